//! Exact two-phase simplex for `min c.x  s.t.  A x = b, x >= 0` with integer
//! data.
//!
//! The tableau is kept fraction free: every entry is an integer and the true
//! value is entry / `d`, where `d` is the determinant of the current basis
//! (Edmonds/Bareiss pivoting). Divisions in the pivot update are exact.
//! Entering and leaving variables follow Bland's rule, so the method cannot
//! cycle. Arithmetic runs in `i128` first and restarts in `BigInt` if any
//! intermediate would overflow.

#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Meaningful only when `status == Optimal`.
    pub objective: BigRational,
    pub x: Vec<BigRational>,
    pub pivots: u64,
}

/// Dense problem in equality form.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub c: Vec<i64>,
}

impl LinearProgram {
    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.c.len()
    }

    pub fn solve(&self) -> LpSolution {
        match Tableau::<i128>::new(self).run() {
            Some(s) => s,
            None => Tableau::<BigInt>::new(self)
                .run()
                .expect("big integer pivoting cannot overflow"),
        }
    }

    /// `true` when `x` satisfies every constraint exactly.
    pub fn is_feasible(&self, x: &[BigRational]) -> bool {
        if x.len() != self.cols() || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.a.iter().zip(&self.b).all(|(row, &bi)| {
            let lhs: BigRational = row
                .iter()
                .zip(x)
                .map(|(&aij, xj)| xj * BigRational::from_integer(BigInt::from(aij)))
                .sum();
            lhs == BigRational::from_integer(BigInt::from(bi))
        })
    }

    pub fn objective_of(&self, x: &[BigRational]) -> BigRational {
        self.c
            .iter()
            .zip(x)
            .map(|(&cj, xj)| xj * BigRational::from_integer(BigInt::from(cj)))
            .sum()
    }
}

/// Integer arithmetic used by the tableau. `None` signals overflow.
trait PivotInt: Clone + Ord + Zero {
    fn from_i64(v: i64) -> Self;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn div_exact(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn to_big(&self) -> BigInt;
}

impl PivotInt for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert_eq!(self % o, 0);
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl PivotInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

struct Tableau<T> {
    /// Rows `0..m` are constraints, row `m` the phase-2 objective, row `m + 1`
    /// the phase-1 objective. Columns `0..n` are structural, `n..n + m`
    /// artificial, the last one is the right-hand side.
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    d: T,
    m: usize,
    n: usize,
    pivots: u64,
}

impl<T: PivotInt> Tableau<T> {
    fn new(lp: &LinearProgram) -> Self {
        let (m, n) = (lp.rows(), lp.cols());
        let width = n + m + 1;
        let mut t = vec![vec![T::zero(); width]; m + 2];
        for i in 0..m {
            let flip = lp.b[i] < 0;
            let s = |v: i64| T::from_i64(if flip { -v } else { v });
            for j in 0..n {
                t[i][j] = s(lp.a[i][j]);
            }
            t[i][n + i] = T::from_i64(1);
            t[i][n + m] = s(lp.b[i]);
        }
        for j in 0..n {
            t[m][j] = T::from_i64(lp.c[j]);
        }
        Tableau {
            t,
            basis: (n..n + m).collect(),
            d: T::from_i64(1),
            m,
            n,
            pivots: 0,
        }
    }

    fn rhs(&self) -> usize {
        self.n + self.m
    }

    fn run(mut self) -> Option<LpSolution> {
        let (m, n, rhs) = (self.m, self.n, self.rhs());
        // Phase-1 row: reduced costs of the artificial objective.
        for j in (0..n).chain([rhs]) {
            let mut acc = T::zero();
            for i in 0..m {
                acc = acc.sub(&self.t[i][j])?;
            }
            self.t[m + 1][j] = acc;
        }
        if self.optimize(m + 1)? == LpStatus::Unbounded {
            unreachable!("phase-1 objective is bounded below by zero");
        }
        if !self.t[m + 1][rhs].is_zero() {
            return Some(self.finish(LpStatus::Infeasible));
        }
        self.drive_out_artificials()?;
        let status = self.optimize(m)?;
        Some(self.finish(status))
    }

    /// Bland's rule on objective row `z` over structural columns.
    fn optimize(&mut self, z: usize) -> Option<LpStatus> {
        let rhs = self.rhs();
        loop {
            let Some(c) = (0..self.n).find(|&j| self.t[z][j] < T::zero()) else {
                return Some(LpStatus::Optimal);
            };
            let mut best: Option<usize> = None;
            for i in 0..self.m {
                if self.t[i][c] <= T::zero() {
                    continue;
                }
                best = match best {
                    None => Some(i),
                    Some(k) => {
                        let lhs = self.t[i][rhs].mul(&self.t[k][c])?;
                        let rhs_ = self.t[k][rhs].mul(&self.t[i][c])?;
                        if lhs < rhs_ || (lhs == rhs_ && self.basis[i] < self.basis[k]) {
                            Some(i)
                        } else {
                            Some(k)
                        }
                    }
                };
            }
            let r = match best {
                Some(r) => r,
                None => return Some(LpStatus::Unbounded),
            };
            self.pivot(r, c)?;
        }
    }

    fn drive_out_artificials(&mut self) -> Option<()> {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let Some(c) = (0..self.n).find(|&j| !self.t[r][j].is_zero()) else {
                continue; // redundant constraint
            };
            if self.t[r][c] < T::zero() {
                for v in self.t[r].iter_mut() {
                    *v = v.neg();
                }
            }
            self.pivot(r, c)?;
        }
        Some(())
    }

    fn pivot(&mut self, r: usize, c: usize) -> Option<()> {
        let p = self.t[r][c].clone();
        debug_assert!(p > T::zero());
        let width = self.t[r].len();
        let pivot_row = self.t[r].clone();
        for i in 0..self.t.len() {
            if i == r {
                continue;
            }
            let f = self.t[i][c].clone();
            let row = &mut self.t[i];
            if f.is_zero() {
                if p != self.d {
                    for v in row.iter_mut() {
                        *v = v.mul(&p)?.div_exact(&self.d);
                    }
                }
                continue;
            }
            for j in 0..width {
                let v = row[j].mul(&p)?.sub(&f.mul(&pivot_row[j])?)?;
                row[j] = v.div_exact(&self.d);
            }
        }
        self.d = p;
        self.basis[r] = c;
        self.pivots += 1;
        Some(())
    }

    fn finish(&self, status: LpStatus) -> LpSolution {
        let rhs = self.rhs();
        let d = self.d.to_big();
        let mut x = vec![BigRational::zero(); self.n];
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < self.n {
                x[bv] = BigRational::new(self.t[i][rhs].to_big(), d.clone());
            }
        }
        let objective = if status == LpStatus::Optimal {
            BigRational::new(-self.t[self.m][rhs].to_big(), d)
        } else {
            BigRational::zero()
        };
        LpSolution {
            status,
            objective,
            x,
            pivots: self.pivots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Exhaustive basis enumeration: every vertex of the feasible polyhedron
    /// is a basic solution, so the minimum over feasible bases is the optimum
    /// whenever the problem is bounded.
    fn vertex_oracle(lp: &LinearProgram) -> Option<BigRational> {
        let (m, n) = (lp.rows(), lp.cols());
        let mut best: Option<BigRational> = None;
        let mut consider = |x: Vec<BigRational>| {
            if lp.is_feasible(&x) {
                let v = lp.objective_of(&x);
                if best.as_ref().is_none_or(|b| v < *b) {
                    best = Some(v);
                }
            }
        };
        for mask in 0u32..(1 << n) {
            let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            if cols.len() > m {
                continue;
            }
            // Solve A_cols y = b by Gaussian elimination; least-squares is not
            // needed because we only keep exact solutions.
            let mut mat: Vec<Vec<BigRational>> = (0..m)
                .map(|i| {
                    cols.iter()
                        .map(|&j| q(lp.a[i][j], 1))
                        .chain([q(lp.b[i], 1)])
                        .collect()
                })
                .collect();
            let k = cols.len();
            let mut row = 0;
            let mut pivot_cols = Vec::new();
            for col in 0..k {
                let Some(pr) = (row..m).find(|&i| !mat[i][col].is_zero()) else {
                    continue;
                };
                mat.swap(row, pr);
                let pv = mat[row][col].clone();
                for v in mat[row].iter_mut() {
                    *v = &*v / &pv;
                }
                for i in 0..m {
                    if i != row && !mat[i][col].is_zero() {
                        let f = mat[i][col].clone();
                        for j in 0..=k {
                            let s = &f * &mat[row][j];
                            mat[i][j] = &mat[i][j] - s;
                        }
                    }
                }
                pivot_cols.push(col);
                row += 1;
            }
            if pivot_cols.len() != k {
                continue;
            }
            let mut x = vec![BigRational::zero(); n];
            for (r, &col) in pivot_cols.iter().enumerate() {
                x[cols[col]] = mat[r][k].clone();
            }
            consider(x);
        }
        best
    }

    #[test]
    fn textbook_problem() {
        // min -x1 - x2 s.t. x1 + 2 x2 + s1 = 4, 3 x1 + x2 + s2 = 6
        let lp = LinearProgram {
            a: vec![vec![1, 2, 1, 0], vec![3, 1, 0, 1]],
            b: vec![4, 6],
            c: vec![-1, -1, 0, 0],
        };
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, q(-14, 5));
        assert!(lp.is_feasible(&s.x));
        assert_eq!(lp.objective_of(&s.x), s.objective);
    }

    #[test]
    fn infeasible_detected() {
        let lp = LinearProgram {
            a: vec![vec![1, 1], vec![1, 1]],
            b: vec![1, 2],
            c: vec![1, 1],
        };
        assert_eq!(lp.solve().status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let lp = LinearProgram {
            a: vec![vec![1, -1, 0], vec![-1, 1, 0], vec![0, 1, 1]],
            b: vec![-2, 2, 3],
            c: vec![2, 1, 0],
        };
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(lp.is_feasible(&s.x));
        assert_eq!(s.objective, q(2, 1));
    }

    #[test]
    fn zero_rhs_is_free() {
        let lp = LinearProgram {
            a: vec![vec![1, -1], vec![-1, 1]],
            b: vec![0, 0],
            c: vec![1, 1],
        };
        let s = lp.solve();
        assert_eq!(s.objective, q(0, 1));
        assert!(s.x.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn overflow_falls_back_to_big_integers() {
        let big = i64::MAX / 3;
        let lp = LinearProgram {
            a: vec![vec![big, big - 1, 1], vec![big - 7, big, 0]],
            b: vec![big, big - 3],
            c: vec![3, 5, 1],
        };
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(lp.is_feasible(&s.x));
        assert_eq!(Some(s.objective), vertex_oracle(&lp));
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            m in 1usize..4,
            n in 1usize..6,
            seed in prop::collection::vec(-3i64..4, 40),
            b in prop::collection::vec(-4i64..5, 3),
            c in prop::collection::vec(0i64..5, 6),
        ) {
            let a: Vec<Vec<i64>> = (0..m).map(|i| seed[i * 8..i * 8 + n].to_vec()).collect();
            let lp = LinearProgram { a, b: b[..m].to_vec(), c: c[..n].to_vec() };
            let s = lp.solve();
            let oracle = vertex_oracle(&lp);
            match s.status {
                LpStatus::Optimal => {
                    prop_assert!(lp.is_feasible(&s.x));
                    prop_assert_eq!(lp.objective_of(&s.x), s.objective.clone());
                    prop_assert_eq!(Some(s.objective), oracle);
                }
                LpStatus::Infeasible => prop_assert!(oracle.is_none()),
                LpStatus::Unbounded => unreachable!("non-negative costs"),
            }
        }
    }
}
