//! Synchronous product of an event net and a process model.
//!
//! Transitions are laid out as: model moves, log moves, synchronous moves
//! (grouped by trace event), then the two dummy transitions. The product's
//! initial marking is a single token on a fresh source place; the dummy start
//! moves it onto `i_l + i_m`. The dummy end consumes `f_l + f_m` and marks a
//! fresh sink place, which is the product's final marking.

use std::fmt;

use crate::cost::Cost;
use crate::net::{Marking, NetBuilder, PetriNet, PlaceId, TransitionId};
use crate::trace::{build_event_net, EventNet, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MoveKind {
    /// `(a, >>)`: trace event skipped by the model.
    Log { event: usize, activity: String },
    /// `(>>, t)`: model transition without a matching trace event.
    Model {
        transition: TransitionId,
        label: Option<String>,
    },
    /// `(a, t)` with equal labels.
    Sync {
        event: usize,
        activity: String,
        transition: TransitionId,
    },
    DummyStart,
    DummyEnd,
}

impl MoveKind {
    pub fn is_dummy(&self) -> bool {
        matches!(self, MoveKind::DummyStart | MoveKind::DummyEnd)
    }

    pub fn is_silent_model(&self) -> bool {
        matches!(self, MoveKind::Model { label: None, .. })
    }

    /// Index of the trace event involved, if any.
    pub fn trace_event(&self) -> Option<usize> {
        match self {
            MoveKind::Log { event, .. } | MoveKind::Sync { event, .. } => Some(*event),
            _ => None,
        }
    }

    /// Model transition involved, if any.
    pub fn model_transition(&self) -> Option<TransitionId> {
        match self {
            MoveKind::Model { transition, .. } | MoveKind::Sync { transition, .. } => {
                Some(*transition)
            }
            _ => None,
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveKind::Log { activity, .. } => write!(f, "({activity},>>)"),
            MoveKind::Model { label: Some(l), .. } => write!(f, "(>>,{l})"),
            MoveKind::Model { transition, .. } => write!(f, "(>>,tau#{transition})"),
            MoveKind::Sync { activity, .. } => write!(f, "({activity},{activity})"),
            MoveKind::DummyStart => f.write_str("(start)"),
            MoveKind::DummyEnd => f.write_str("(end)"),
        }
    }
}

/// Cost table used throughout: synchronous 0, log and visible model moves 1,
/// silent model moves 1/10000, dummies 0.
pub fn standard_cost(kind: &MoveKind) -> Cost {
    match kind {
        MoveKind::Sync { .. } | MoveKind::DummyStart | MoveKind::DummyEnd => Cost::ZERO,
        MoveKind::Model { label: None, .. } => Cost::units(1),
        MoveKind::Model { .. } | MoveKind::Log { .. } => Cost::ONE,
    }
}

#[derive(Debug, Clone)]
pub struct SyncProduct {
    net: PetriNet,
    moves: Vec<MoveKind>,
    costs: Vec<Cost>,
    model: PetriNet,
    event_net: EventNet,
    /// Model place `p` lives at `model_offset + p`; event-net places follow.
    model_offset: usize,
    log_offset: usize,
    source: PlaceId,
    sink: PlaceId,
    dummy_start: TransitionId,
    dummy_end: TransitionId,
    core_initial: Marking,
    core_final: Marking,
}

impl SyncProduct {
    pub fn net(&self) -> &PetriNet {
        &self.net
    }

    pub fn model(&self) -> &PetriNet {
        &self.model
    }

    pub fn event_net(&self) -> &EventNet {
        &self.event_net
    }

    pub fn trace(&self) -> &Trace {
        &self.event_net.trace
    }

    pub fn moves(&self) -> &[MoveKind] {
        &self.moves
    }

    pub fn move_kind(&self, t: TransitionId) -> &MoveKind {
        &self.moves[t]
    }

    pub fn costs(&self) -> &[Cost] {
        &self.costs
    }

    pub fn cost(&self, t: TransitionId) -> Cost {
        self.costs[t]
    }

    pub fn source(&self) -> PlaceId {
        self.source
    }

    pub fn sink(&self) -> PlaceId {
        self.sink
    }

    pub fn dummy_start(&self) -> TransitionId {
        self.dummy_start
    }

    pub fn dummy_end(&self) -> TransitionId {
        self.dummy_end
    }

    pub fn is_dummy(&self, t: TransitionId) -> bool {
        t == self.dummy_start || t == self.dummy_end
    }

    /// `i_l + i_m` (the marking after the dummy start).
    pub fn core_initial(&self) -> &Marking {
        &self.core_initial
    }

    /// `f_l + f_m` (the marking the dummy end consumes).
    pub fn core_final(&self) -> &Marking {
        &self.core_final
    }

    /// Product place holding model place `p`.
    pub fn model_place(&self, p: PlaceId) -> PlaceId {
        self.model_offset + p
    }

    /// Product place holding event-net place `p`.
    pub fn log_place(&self, p: PlaceId) -> PlaceId {
        self.log_offset + p
    }

    /// Number of non-dummy transitions (#SPT).
    pub fn spt(&self) -> usize {
        self.net.transition_count() - 2
    }

    pub fn non_dummy_transitions(&self) -> impl Iterator<Item = TransitionId> + '_ {
        (0..self.net.transition_count()).filter(move |&t| !self.is_dummy(t))
    }

    /// Whether `t` may fire at `m` in an alignment run. The dummy end is only
    /// admitted at exactly `f_l + f_m`, so that arriving at the sink means
    /// arriving at the final marking.
    pub fn admits(&self, m: &Marking, t: TransitionId) -> bool {
        if t == self.dummy_end {
            m == &self.core_final
        } else {
            self.net.is_enabled(m, t)
        }
    }

    /// Successor markings reachable in one admitted step.
    pub fn successors(&self, m: &Marking) -> Vec<(TransitionId, Marking)> {
        self.net
            .enabled(m)
            .into_iter()
            .filter(|&t| self.admits(m, t))
            .map(|t| (t, self.net.fire_unchecked(m, t)))
            .collect()
    }

    /// Counts of each move type over a transition multiset.
    pub fn summarize<'a>(&self, ts: impl IntoIterator<Item = &'a TransitionId>) -> MoveSummary {
        let mut s = MoveSummary::default();
        for &t in ts {
            match &self.moves[t] {
                MoveKind::Sync { .. } => s.sync += 1,
                MoveKind::Log { .. } => s.log += 1,
                MoveKind::Model { label: None, .. } => s.silent += 1,
                MoveKind::Model { .. } => s.model += 1,
                MoveKind::DummyStart | MoveKind::DummyEnd => {}
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveSummary {
    pub sync: usize,
    pub log: usize,
    pub model: usize,
    pub silent: usize,
}

impl fmt::Display for MoveSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sync={} log={} model={} silent={}",
            self.sync, self.log, self.model, self.silent
        )
    }
}

/// Builds `event_net x model` with dummy start/end transitions. Ids are
/// prefixed with `m:` and `l:` so the two nets are disjoint.
pub fn synchronous_product(
    model: &PetriNet,
    event_net: &EventNet,
    cost_fn: impl Fn(&MoveKind) -> Cost,
) -> SyncProduct {
    let log = &event_net.net;
    let mut b = NetBuilder::new();
    let model_offset = b.place_count();
    for p in model.places() {
        b.place(format!("m:{}", p.id));
    }
    let log_offset = b.place_count();
    for p in log.places() {
        b.place(format!("l:{}", p.id));
    }
    let source = b.place("source");
    let sink = b.place("sink");

    let mut moves = Vec::new();
    for (ti, t) in model.transitions().iter().enumerate() {
        let id = b.transition(format!("(>>,m:{})", t.id), t.label.as_deref());
        wire(&mut b, id, &t.preset, &t.postset, model_offset);
        moves.push(MoveKind::Model {
            transition: ti,
            label: t.label.clone(),
        });
    }
    let trace = &event_net.trace;
    for (ei, e) in log.transitions().iter().enumerate() {
        let activity = trace.events()[ei].activity.clone();
        let id = b.labeled(format!("(l:{},>>)", e.id), &activity);
        wire(&mut b, id, &e.preset, &e.postset, log_offset);
        moves.push(MoveKind::Log { event: ei, activity });
    }
    for (ei, e) in log.transitions().iter().enumerate() {
        let activity = &trace.events()[ei].activity;
        for (ti, t) in model.transitions().iter().enumerate() {
            if t.label.as_deref() != Some(activity.as_str()) {
                continue;
            }
            let id = b.labeled(format!("(l:{},m:{})", e.id, t.id), activity);
            wire(&mut b, id, &e.preset, &e.postset, log_offset);
            wire(&mut b, id, &t.preset, &t.postset, model_offset);
            moves.push(MoveKind::Sync {
                event: ei,
                activity: activity.clone(),
                transition: ti,
            });
        }
    }

    let shift = |m: &Marking, off: usize| m.iter().map(|(p, n)| (p + off, n)).collect::<Vec<_>>();
    let core_initial = Marking::new(
        shift(log.initial_marking(), log_offset)
            .into_iter()
            .chain(shift(model.initial_marking(), model_offset)),
    );
    let core_final = Marking::new(
        shift(log.final_marking(), log_offset)
            .into_iter()
            .chain(shift(model.final_marking(), model_offset)),
    );

    let dummy_start = b.silent("dummy_start");
    b.input(source, dummy_start);
    for (p, n) in core_initial.iter() {
        b.output_weighted(dummy_start, p, n);
    }
    moves.push(MoveKind::DummyStart);
    let dummy_end = b.silent("dummy_end");
    for (p, n) in core_final.iter() {
        b.input_weighted(p, dummy_end, n);
    }
    b.output(dummy_end, sink);
    moves.push(MoveKind::DummyEnd);

    b.initial(source, 1).final_tokens(sink, 1);
    let net = b.build().expect("product of well-formed nets is well formed");
    let costs = moves.iter().map(&cost_fn).collect();
    SyncProduct {
        net,
        moves,
        costs,
        model: model.clone(),
        event_net: event_net.clone(),
        model_offset,
        log_offset,
        source,
        sink,
        dummy_start,
        dummy_end,
        core_initial,
        core_final,
    }
}

/// Event net construction plus product with the standard cost table.
pub fn product_for_trace(model: &PetriNet, trace: &Trace) -> SyncProduct {
    synchronous_product(model, &build_event_net(trace), standard_cost)
}

fn wire(
    b: &mut NetBuilder,
    t: TransitionId,
    pre: &[(PlaceId, u32)],
    post: &[(PlaceId, u32)],
    offset: usize,
) {
    for &(p, w) in pre {
        b.input_weighted(p + offset, t, w);
    }
    for &(p, w) in post {
        b.output_weighted(t, p + offset, w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::net::NetBuilder;
    use proptest::prelude::*;

    fn label_pairs(model: &PetriNet, trace: &Trace) -> usize {
        let mut n = 0;
        for e in trace.events() {
            for t in model.transitions() {
                if t.label.as_deref() == Some(e.activity.as_str()) {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn running_example_has_twenty_moves() {
        let model = fixtures::concurrent_choice_model();
        let trace = fixtures::concurrent_trace();
        let sp = product_for_trace(&model, &trace);
        let s = sp.summarize(&sp.non_dummy_transitions().collect::<Vec<_>>());
        assert_eq!(label_pairs(&model, &trace), 8);
        assert_eq!(sp.spt(), 20);
        assert_eq!((s.model, s.log, s.sync), (8, 4, 8));
    }

    #[test]
    fn empty_trace_has_only_model_moves() {
        let model = fixtures::housing_model();
        let sp = product_for_trace(&model, &Trace::sequence::<&str>(&[]));
        assert_eq!(sp.spt(), model.transition_count());
        assert!(sp.moves().iter().all(|m| !matches!(m, MoveKind::Sync { .. } | MoveKind::Log { .. })));
    }

    #[test]
    fn housing_product_syncs_each_trace_activity() {
        let sp = product_for_trace(&fixtures::housing_model(), &fixtures::housing_trace());
        let synced: Vec<&str> = sp
            .moves()
            .iter()
            .filter_map(|m| match m {
                MoveKind::Sync { activity, .. } => Some(activity.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(synced, ["MakeBk", "SubmitPD", "AwaitC", "Sign"]);
    }

    #[test]
    fn sync_moves_touch_both_components() {
        let sp = product_for_trace(&fixtures::concurrent_choice_model(), &fixtures::concurrent_trace());
        let model_places = sp.model().place_count();
        for t in sp.non_dummy_transitions() {
            if let MoveKind::Sync { .. } = sp.move_kind(t) {
                let tr = sp.net().transition(t);
                for arcs in [&tr.preset, &tr.postset] {
                    assert!(arcs.iter().any(|&(p, _)| p < model_places));
                    assert!(arcs.iter().any(|&(p, _)| p >= model_places && p < sp.source()));
                }
            }
        }
    }

    #[test]
    fn standard_costs() {
        assert_eq!(
            standard_cost(&MoveKind::Sync {
                event: 0,
                activity: "A".into(),
                transition: 2
            }),
            Cost::ZERO
        );
        assert_eq!(
            standard_cost(&MoveKind::Log {
                event: 0,
                activity: "A".into()
            }),
            Cost::ONE
        );
        assert_eq!(
            standard_cost(&MoveKind::Model {
                transition: 0,
                label: None
            }),
            Cost::new(1, 10000)
        );
        assert_eq!(standard_cost(&MoveKind::DummyEnd), Cost::ZERO);
    }

    #[test]
    fn dummy_end_admitted_only_at_exact_final() {
        let sp = product_for_trace(&fixtures::token_generator_model(), &fixtures::token_generator_trace());
        let mut over = sp.core_final().iter().collect::<Vec<_>>();
        over.push((sp.model_place(sp.model().place_by_id("pool").unwrap()), 1));
        let over = Marking::new(over);
        assert!(sp.net().is_enabled(&over, sp.dummy_end()));
        assert!(!sp.admits(&over, sp.dummy_end()));
        assert!(sp.admits(sp.core_final(), sp.dummy_end()));
    }

    fn arb_model() -> impl Strategy<Value = PetriNet> {
        (2usize..5, prop::collection::vec((0usize..5, 0usize..5, prop::option::of(0u8..3)), 1..6)).prop_map(
            |(np, ts)| {
                let mut b = NetBuilder::new();
                let ps: Vec<_> = (0..np).map(|i| b.place(format!("p{i}"))).collect();
                for (i, (a, z, l)) in ts.into_iter().enumerate() {
                    let label = l.map(|c| ((b'a' + c) as char).to_string());
                    let t = b.transition(format!("t{i}"), label.as_deref());
                    b.input(ps[a % np], t).output(t, ps[z % np]);
                }
                b.initial(ps[0], 1).final_tokens(ps[np - 1], 1);
                b.build().unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn size_law(model in arb_model(), acts in prop::collection::vec(0u8..4, 0..5)) {
            let acts: Vec<String> = acts.iter().map(|c| ((b'a' + c) as char).to_string()).collect();
            let trace = Trace::sequence(&acts);
            let sp = product_for_trace(&model, &trace);
            prop_assert_eq!(sp.spt(), trace.len() + model.transition_count() + label_pairs(&model, &trace));
            prop_assert_eq!(sp.costs().len(), sp.net().transition_count());
            for t in 0..sp.net().transition_count() {
                prop_assert_eq!(sp.cost(t), standard_cost(sp.move_kind(t)));
            }
        }
    }
}
