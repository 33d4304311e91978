//! Cost-directed unfolding of a synchronous product.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Duration;

use crate::alignment::{AlignError, AlignedMove, PoAlignment};
use crate::cost::Cost;
use crate::heuristic::HeuristicCache;
use crate::metrics::{Deadline, RunMetrics, Variant};
use crate::net::Marking;
use crate::sync_product::SyncProduct;

use super::invariants::check_event;
use super::process::{BranchingProcess, EventId, EventStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnfoldVariant {
    /// Order by local configuration cost.
    Naive,
    /// Order by local configuration cost plus the marking-equation bound.
    Heuristic,
}

impl UnfoldVariant {
    pub fn metrics_variant(self) -> Variant {
        match self {
            UnfoldVariant::Naive => Variant::FoldN,
            UnfoldVariant::Heuristic => Variant::FoldH,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UnfoldOptions {
    pub variant: UnfoldVariant,
    pub timeout: Option<Duration>,
    /// Run the structural checks after every append.
    pub check_invariants: bool,
    /// Keep the key of every popped-and-appended event.
    pub record_pops: bool,
}

impl UnfoldOptions {
    pub fn new(variant: UnfoldVariant) -> UnfoldOptions {
        UnfoldOptions {
            variant,
            timeout: None,
            check_invariants: false,
            record_pops: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UnfoldRun {
    pub outcome: Result<PoAlignment, AlignError>,
    pub metrics: RunMetrics,
    pub process: BranchingProcess,
    /// Queue keys of appended events, in append order.
    pub pops: Vec<(Cost, EventId)>,
    pub violations: Vec<String>,
    /// The dummy end event, when an alignment was found.
    pub final_event: Option<EventId>,
}

/// Aligns with a private heuristic cache when the variant needs one.
pub fn unfold_align(sp: &SyncProduct, opts: &UnfoldOptions) -> UnfoldRun {
    match opts.variant {
        UnfoldVariant::Naive => unfold_align_with(sp, opts, None),
        UnfoldVariant::Heuristic => {
            let cache = HeuristicCache::new(sp);
            unfold_align_with(sp, opts, Some(&cache))
        }
    }
}

pub fn unfold_align_with(sp: &SyncProduct, opts: &UnfoldOptions, cache: Option<&HeuristicCache>) -> UnfoldRun {
    let deadline = Deadline::start(opts.timeout);
    let net = sp.net();
    let costs = sp.costs();
    let owned;
    let cache = match (opts.variant, cache) {
        (UnfoldVariant::Heuristic, None) => {
            owned = HeuristicCache::new(sp);
            Some(&owned)
        }
        (UnfoldVariant::Heuristic, c) => c,
        (UnfoldVariant::Naive, _) => None,
    };
    let mut metrics = RunMetrics::new(opts.variant.metrics_variant(), sp.trace().len(), sp.spt());
    let mut bp = BranchingProcess::new(net);
    let mut heap: BinaryHeap<Reverse<(Cost, EventId)>> = BinaryHeap::new();
    let mut pops = Vec::new();
    let mut violations = Vec::new();
    let mut final_event = None;
    let sink = Marking::single(sp.sink());

    let queue_candidates = |bp: &mut BranchingProcess,
                                heap: &mut BinaryHeap<Reverse<(Cost, EventId)>>,
                                metrics: &mut RunMetrics,
                                fresh: &[u32]| {
        for (t, preset) in bp.possible_extensions(net, fresh) {
            let id = bp.register(net, costs, t, preset);
            let ev = bp.event_mut(id);
            if t == sp.dummy_end() && ev.marking != sink {
                ev.status = EventStatus::Pruned;
                continue;
            }
            if let Some(cache) = cache {
                match cache.get(sp, &ev.marking) {
                    Some(h) => {
                        ev.heuristic = Some(h);
                        ev.priority = ev.local_cost + h;
                    }
                    None => {
                        ev.status = EventStatus::Pruned;
                        continue;
                    }
                }
            }
            heap.push(Reverse(ev.key()));
            metrics.queued += 1;
        }
    };

    let outcome = 'run: {
        if let Some(t) = (0..net.transition_count()).find(|&t| net.transition(t).preset.is_empty()) {
            break 'run Err(AlignError::Unsupported(format!(
                "transition `{}` has an empty preset",
                net.transition(t).id
            )));
        }
        let initial: Vec<u32> = bp.initial_conditions().collect();
        queue_candidates(&mut bp, &mut heap, &mut metrics, &initial);

        while let Some(Reverse((_, id))) = heap.pop() {
            if deadline.expired() {
                metrics.timed_out = true;
                break 'run Err(AlignError::Timeout);
            }
            let blocked = bp
                .event(id)
                .local_config
                .iter()
                .any(|&j| bp.event(j).status == EventStatus::Cutoff);
            if blocked {
                bp.event_mut(id).status = EventStatus::Discarded;
                continue;
            }
            bp.append(net, id);
            metrics.visited += 1;
            if opts.record_pops {
                pops.push(bp.event(id).key());
            }
            if opts.check_invariants {
                violations.extend(check_event(sp, &bp, id));
            }
            if bp.event(id).transition == sp.dummy_end() {
                final_event = Some(id);
                break 'run Ok(extract_alignment(sp, &bp, id));
            }
            if bp.is_cutoff(id) {
                bp.mark_cutoff(id);
                continue;
            }
            bp.activate(id);
            let fresh = bp.event(id).postset.clone();
            queue_candidates(&mut bp, &mut heap, &mut metrics, &fresh);
        }
        Err(AlignError::NoAlignment(
            "unfolding exhausted: the model's final marking is unreachable".into(),
        ))
    };
    metrics.elapsed = deadline.elapsed();
    metrics.cost = outcome.as_ref().ok().map(|a| a.cost());
    UnfoldRun {
        outcome,
        metrics,
        process: bp,
        pops,
        violations,
        final_event,
    }
}

/// The local configuration of `final_event` without the dummies, ordered by
/// causality. Event ids respect causality, so id order is a linearization.
pub fn extract_alignment(sp: &SyncProduct, bp: &BranchingProcess, final_event: EventId) -> PoAlignment {
    let config = &bp.event(final_event).local_config;
    let kept: Vec<EventId> = config
        .iter()
        .copied()
        .filter(|&e| !sp.is_dummy(bp.event(e).transition))
        .collect();
    let before = kept
        .iter()
        .map(|&a| {
            kept.iter()
                .map(|&b| a != b && bp.event(b).local_config.binary_search(&a).is_ok())
                .collect()
        })
        .collect();
    let moves: Vec<AlignedMove> = kept
        .iter()
        .map(|&e| {
            let t = bp.event(e).transition;
            AlignedMove {
                event: e,
                transition: t,
                kind: sp.move_kind(t).clone(),
            }
        })
        .collect();
    let cost = moves.iter().map(|m| sp.cost(m.transition)).sum();
    PoAlignment::new(moves, before, cost)
}
