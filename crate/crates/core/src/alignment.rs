//! Alignment results and their validation against the alignment definition:
//! the log projection is a linearization of the trace, the model projection
//! is a run of the model from its initial to its final marking, and every
//! move involves the trace, the model, or both.

use std::fmt;

use crate::cost::Cost;
use crate::net::TransitionId;
use crate::sync_product::{MoveKind, MoveSummary, SyncProduct};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("search timed out")]
    Timeout,
    #[error("no alignment exists: {0}")]
    NoAlignment(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum InvalidAlignment {
    #[error("move {0} is not enabled in the synchronous product")]
    NotFireable(usize),
    #[error("run does not end in the final marking")]
    NotFinal,
    #[error("trace event {0} is covered {1} times")]
    EventCount(usize, usize),
    #[error("trace order violated between events {0} and {1}")]
    TraceOrder(usize, usize),
    #[error("model projection is not a run of the model: {0}")]
    ModelRun(String),
    #[error("dummy transition inside the move sequence")]
    Dummy,
    #[error("alignment order disagrees with the linearization")]
    Order,
    #[error("recorded cost {recorded} differs from move cost {actual}")]
    Cost { recorded: Cost, actual: Cost },
}

/// Checks a sequence of non-dummy product transitions.
pub fn validate_sequence(sp: &SyncProduct, seq: &[TransitionId]) -> Result<(), InvalidAlignment> {
    let net = sp.net();
    let mut m = sp.core_initial().clone();
    for (i, &t) in seq.iter().enumerate() {
        if sp.is_dummy(t) {
            return Err(InvalidAlignment::Dummy);
        }
        m = net.fire(&m, t).map_err(|_| InvalidAlignment::NotFireable(i))?;
    }
    if &m != sp.core_final() {
        return Err(InvalidAlignment::NotFinal);
    }
    let trace = sp.trace();
    let mut pos = vec![Vec::new(); trace.len()];
    let mut model_run = Vec::new();
    for (i, &t) in seq.iter().enumerate() {
        let kind = sp.move_kind(t);
        if let Some(e) = kind.trace_event() {
            pos[e].push(i);
        }
        if let Some(mt) = kind.model_transition() {
            model_run.push(mt);
        }
    }
    for (e, p) in pos.iter().enumerate() {
        if p.len() != 1 {
            return Err(InvalidAlignment::EventCount(e, p.len()));
        }
    }
    for &(x, y) in trace.edges() {
        if pos[x][0] >= pos[y][0] {
            return Err(InvalidAlignment::TraceOrder(x, y));
        }
    }
    let model = sp.model();
    let end = model
        .replay(&model_run)
        .map_err(|e| InvalidAlignment::ModelRun(e.to_string()))?;
    if &end != model.final_marking() {
        return Err(InvalidAlignment::ModelRun("final marking not reached".into()));
    }
    Ok(())
}

/// A totally ordered alignment, as returned by the sequential aligners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequentialAlignment {
    pub transitions: Vec<TransitionId>,
    pub moves: Vec<MoveKind>,
    pub cost: Cost,
}

impl SequentialAlignment {
    pub fn new(sp: &SyncProduct, transitions: Vec<TransitionId>) -> SequentialAlignment {
        let transitions: Vec<_> = transitions.into_iter().filter(|&t| !sp.is_dummy(t)).collect();
        let moves = transitions.iter().map(|&t| sp.move_kind(t).clone()).collect();
        let cost = transitions.iter().map(|&t| sp.cost(t)).sum();
        SequentialAlignment {
            transitions,
            moves,
            cost,
        }
    }

    pub fn summary(&self, sp: &SyncProduct) -> MoveSummary {
        sp.summarize(&self.transitions)
    }

    pub fn validate(&self, sp: &SyncProduct) -> Result<(), InvalidAlignment> {
        validate_sequence(sp, &self.transitions)?;
        check_cost(sp, &self.transitions, self.cost)
    }
}

fn check_cost(sp: &SyncProduct, ts: &[TransitionId], recorded: Cost) -> Result<(), InvalidAlignment> {
    let actual: Cost = ts.iter().map(|&t| sp.cost(t)).sum();
    if actual != recorded {
        return Err(InvalidAlignment::Cost { recorded, actual });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedMove {
    /// Event id in the branching process that produced the move.
    pub event: u32,
    pub transition: TransitionId,
    pub kind: MoveKind,
}

/// Moves partially ordered by causality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoAlignment {
    moves: Vec<AlignedMove>,
    /// `before[i][j]` iff move `i` causally precedes move `j`.
    before: Vec<Vec<bool>>,
    linearization: Vec<usize>,
    cost: Cost,
}

impl PoAlignment {
    /// `moves` must be sorted so that causes come before effects; `before`
    /// must be transitively closed.
    pub fn new(moves: Vec<AlignedMove>, before: Vec<Vec<bool>>, cost: Cost) -> PoAlignment {
        let linearization = (0..moves.len()).collect();
        PoAlignment {
            moves,
            before,
            linearization,
            cost,
        }
    }

    pub fn moves(&self) -> &[AlignedMove] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn cost(&self) -> Cost {
        self.cost
    }

    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.before[i][j]
    }

    pub fn concurrent(&self, i: usize, j: usize) -> bool {
        i != j && !self.before[i][j] && !self.before[j][i]
    }

    /// All ordered pairs.
    pub fn order(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.before[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Covering pairs (the Hasse diagram of the order).
    pub fn covering(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        self.order()
            .into_iter()
            .filter(|&(i, j)| !(0..n).any(|k| self.before[i][k] && self.before[k][j]))
            .collect()
    }

    /// Indices into `moves` in a witness total order.
    pub fn linearization(&self) -> &[usize] {
        &self.linearization
    }

    pub fn linear_transitions(&self) -> Vec<TransitionId> {
        self.linearization.iter().map(|&i| self.moves[i].transition).collect()
    }

    pub fn summary(&self, sp: &SyncProduct) -> MoveSummary {
        sp.summarize(&self.moves.iter().map(|m| m.transition).collect::<Vec<_>>())
    }

    pub fn to_sequential(&self, sp: &SyncProduct) -> SequentialAlignment {
        SequentialAlignment::new(sp, self.linear_transitions())
    }

    pub fn validate(&self, sp: &SyncProduct) -> Result<(), InvalidAlignment> {
        let lin = self.linear_transitions();
        validate_sequence(sp, &lin)?;
        check_cost(sp, &lin, self.cost)?;
        let mut rank = vec![0; self.len()];
        for (r, &i) in self.linearization.iter().enumerate() {
            rank[i] = r;
        }
        for (i, j) in self.order() {
            if rank[i] >= rank[j] {
                return Err(InvalidAlignment::Order);
            }
        }
        // trace order must be reflected in the alignment order
        let mut of_event = vec![usize::MAX; sp.trace().len()];
        for (i, m) in self.moves.iter().enumerate() {
            if let Some(e) = m.kind.trace_event() {
                of_event[e] = i;
            }
        }
        for &(x, y) in sp.trace().edges() {
            if !self.before[of_event[x]][of_event[y]] {
                return Err(InvalidAlignment::TraceOrder(x, y));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PoAlignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, &i) in self.linearization.iter().enumerate() {
            if r > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", self.moves[i].kind)?;
        }
        Ok(())
    }
}

impl fmt::Display for SequentialAlignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.moves.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sync_product::product_for_trace;

    fn find(sp: &SyncProduct, pred: impl Fn(&MoveKind) -> bool) -> TransitionId {
        (0..sp.net().transition_count()).find(|&t| pred(sp.move_kind(t))).unwrap()
    }

    fn sync_on(sp: &SyncProduct, model_t: &str) -> TransitionId {
        let mt = sp.model().transition_by_id(model_t).unwrap();
        find(sp, |k| matches!(k, MoveKind::Sync { transition, .. } if *transition == mt))
    }

    #[test]
    fn all_sync_run_is_valid() {
        let sp = product_for_trace(&fixtures::concurrent_choice_model(), &fixtures::concurrent_trace());
        let seq: Vec<_> = ["t1", "t3", "t2", "t4"].iter().map(|t| sync_on(&sp, t)).collect();
        let a = SequentialAlignment::new(&sp, seq);
        assert_eq!(a.cost, Cost::ZERO);
        assert_eq!(a.validate(&sp), Ok(()));
    }

    #[test]
    fn log_and_model_moves_cover_everything() {
        let sp = product_for_trace(&fixtures::concurrent_choice_model(), &fixtures::concurrent_trace());
        let mut seq = Vec::new();
        for e in [0, 1, 2, 3] {
            seq.push(find(&sp, |k| matches!(k, MoveKind::Log { event, .. } if *event == e)));
        }
        for id in ["t5", "t6", "t7", "t8"] {
            let mt = sp.model().transition_by_id(id).unwrap();
            seq.push(find(&sp, |k| matches!(k, MoveKind::Model { transition, .. } if *transition == mt)));
        }
        let a = SequentialAlignment::new(&sp, seq);
        assert_eq!(a.cost, Cost::integer(8));
        assert_eq!(a.validate(&sp), Ok(()));
    }

    #[test]
    fn incomplete_run_rejected() {
        let sp = product_for_trace(&fixtures::concurrent_choice_model(), &fixtures::concurrent_trace());
        let seq: Vec<_> = ["t1", "t2", "t3"].iter().map(|t| sync_on(&sp, t)).collect();
        assert_eq!(validate_sequence(&sp, &seq), Err(InvalidAlignment::NotFinal));
        let seq: Vec<_> = ["t1", "t4"].iter().map(|t| sync_on(&sp, t)).collect();
        assert_eq!(validate_sequence(&sp, &seq), Err(InvalidAlignment::NotFireable(1)));
    }

    #[test]
    fn wrong_cost_rejected() {
        let sp = product_for_trace(&fixtures::concurrent_choice_model(), &fixtures::concurrent_trace());
        let seq: Vec<_> = ["t1", "t2", "t3", "t4"].iter().map(|t| sync_on(&sp, t)).collect();
        let mut a = SequentialAlignment::new(&sp, seq);
        a.cost = Cost::ONE;
        assert!(matches!(a.validate(&sp), Err(InvalidAlignment::Cost { .. })));
    }
}
