//! Marking-equation lower bound `h(m)` on the remaining alignment cost.
//!
//! `h(m) = min { c.x : C x = f - m, x >= 0 }` over the non-dummy transitions
//! of a product, solved as an exact LP. The source and sink places are not
//! part of the system: a token on the source stands for `i_l + i_m`, a token
//! on the sink for `f_l + f_m`.

pub mod lp;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use num_rational::BigRational;

use crate::cost::Cost;
use crate::net::{Marking, PlaceId, TransitionId};
use crate::sync_product::SyncProduct;

pub use lp::{LinearProgram, LpSolution, LpStatus};

/// State equation of a product restricted to its core places.
#[derive(Debug, Clone)]
pub struct IncidenceMatrix {
    /// Core place per row.
    pub rows: Vec<PlaceId>,
    /// Non-dummy transition per column.
    pub cols: Vec<TransitionId>,
    /// `entry[r][k] = t_k(p_r)• - •t_k(p_r)`.
    pub entry: Vec<Vec<i64>>,
    row_of: Vec<Option<usize>>,
}

impl IncidenceMatrix {
    pub fn new(sp: &SyncProduct) -> IncidenceMatrix {
        let net = sp.net();
        let rows: Vec<PlaceId> = (0..net.place_count())
            .filter(|&p| p != sp.source() && p != sp.sink())
            .collect();
        let mut row_of = vec![None; net.place_count()];
        for (r, &p) in rows.iter().enumerate() {
            row_of[p] = Some(r);
        }
        let cols: Vec<TransitionId> = sp.non_dummy_transitions().collect();
        let mut entry = vec![vec![0i64; cols.len()]; rows.len()];
        for (k, &t) in cols.iter().enumerate() {
            for &(p, d) in net.effect(t) {
                if let Some(r) = row_of[p] {
                    entry[r][k] = d;
                }
            }
        }
        IncidenceMatrix {
            rows,
            cols,
            entry,
            row_of,
        }
    }

    /// Dense vector over the rows, after replacing source/sink tokens.
    fn adjusted(&self, sp: &SyncProduct, m: &Marking) -> Vec<i64> {
        let mut v = vec![0i64; self.rows.len()];
        let mut add = |mk: &Marking, times: i64| {
            for (p, n) in mk.iter() {
                if let Some(r) = self.row_of[p] {
                    v[r] += n as i64 * times;
                }
            }
        };
        add(m, 1);
        let src = m.get(sp.source()) as i64;
        let snk = m.get(sp.sink()) as i64;
        if src > 0 {
            add(sp.core_initial(), src);
        }
        if snk > 0 {
            add(sp.core_final(), snk);
        }
        v
    }
}

/// The LP instance for `h(m)`; costs are scaled to integers by the common
/// denominator returned alongside.
pub fn marking_equation_lp(sp: &SyncProduct, c: &IncidenceMatrix, m: &Marking) -> (LinearProgram, i128) {
    let costs: Vec<Cost> = c.cols.iter().map(|&t| sp.cost(t)).collect();
    let scale = Cost::common_denominator(&costs);
    let cvec = costs
        .iter()
        .map(|k| i64::try_from(k.numer() * (scale / k.denom())).expect("cost fits in i64"))
        .collect();
    let target = c.adjusted(sp, sp.core_final());
    let have = c.adjusted(sp, m);
    let b = target.iter().zip(&have).map(|(f, x)| f - x).collect();
    (
        LinearProgram {
            a: c.entry.clone(),
            b,
            c: cvec,
        },
        scale,
    )
}

/// Exact result of one marking-equation solve.
#[derive(Debug, Clone)]
pub struct Estimate {
    /// `None` when the relaxation is infeasible.
    pub value: Option<BigRational>,
    pub solution: LpSolution,
    pub scale: i128,
}

pub fn marking_equation_lower_bound(sp: &SyncProduct, c: &IncidenceMatrix, m: &Marking) -> Estimate {
    let (lp, scale) = marking_equation_lp(sp, c, m);
    let solution = lp.solve();
    let value = match solution.status {
        LpStatus::Optimal => Some(&solution.objective / BigRational::from_integer(scale.into())),
        _ => None,
    };
    Estimate {
        value,
        solution,
        scale,
    }
}

/// Per-product memo of `h`. Safe to share between threads; two threads may
/// race to compute the same entry, which only costs a duplicate solve.
#[derive(Debug)]
pub struct HeuristicCache {
    matrix: IncidenceMatrix,
    memo: RwLock<HashMap<Marking, Option<Cost>>>,
    solves: AtomicU64,
    pivots: AtomicU64,
}

impl HeuristicCache {
    pub fn new(sp: &SyncProduct) -> HeuristicCache {
        HeuristicCache {
            matrix: IncidenceMatrix::new(sp),
            memo: RwLock::new(HashMap::new()),
            solves: AtomicU64::new(0),
            pivots: AtomicU64::new(0),
        }
    }

    pub fn matrix(&self) -> &IncidenceMatrix {
        &self.matrix
    }

    /// `h(m)`, or `None` if the final marking is unreachable from `m` even in
    /// the relaxation.
    pub fn get(&self, sp: &SyncProduct, m: &Marking) -> Option<Cost> {
        if let Some(v) = self.memo.read().expect("cache lock").get(m) {
            return *v;
        }
        let est = marking_equation_lower_bound(sp, &self.matrix, m);
        self.solves.fetch_add(1, Ordering::Relaxed);
        self.pivots.fetch_add(est.solution.pivots, Ordering::Relaxed);
        let v = est.value.as_ref().map(Cost::from_big_floor);
        self.memo
            .write()
            .expect("cache lock")
            .entry(m.clone())
            .or_insert(v);
        v
    }

    pub fn solves(&self) -> u64 {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn pivots(&self) -> u64 {
        self.pivots.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.memo.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
