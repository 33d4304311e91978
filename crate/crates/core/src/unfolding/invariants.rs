//! Structural checks on a branching process, used by debug runs and tests.

use std::collections::HashSet;

use crate::net::Marking;
use crate::sync_product::SyncProduct;

use super::process::{BranchingProcess, CondId, EventId};

/// Checks the occurrence-net laws around the freshly appended event `id`.
/// Returns one message per violation.
pub fn check_event(sp: &SyncProduct, bp: &BranchingProcess, id: EventId) -> Vec<String> {
    let mut out = Vec::new();
    let ev = bp.event(id);
    let net = sp.net();

    for &c in &ev.postset {
        if bp.condition(c).input != Some(id) {
            out.push(format!("condition {c} in the postset of e{id} has another input event"));
        }
    }
    for &c in &ev.preset {
        if let Some(src) = bp.condition(c).input {
            if src >= id {
                out.push(format!("e{id} consumes condition {c} produced by later event e{src}"));
            }
        }
    }
    let dup = bp
        .appended()
        .filter(|o| o.id != id && o.transition == ev.transition && o.preset == ev.preset)
        .count();
    if dup > 0 {
        out.push(format!("e{id} duplicates the preset of an existing event"));
    }
    let mut labels: Vec<_> = ev.preset.iter().map(|&c| bp.condition(c).place).collect();
    labels.sort_unstable();
    let mut want: Vec<_> = net
        .transition(ev.transition)
        .preset
        .iter()
        .flat_map(|&(p, w)| std::iter::repeat_n(p, w as usize))
        .collect();
    want.sort_unstable();
    if labels != want {
        out.push(format!("preset of e{id} is not labelled by the transition's preset"));
    }

    // causal closure
    let config: HashSet<EventId> = ev.local_config.iter().copied().collect();
    for &j in &ev.local_config {
        for &c in &bp.event(j).preset {
            if let Some(src) = bp.condition(c).input {
                if !config.contains(&src) {
                    out.push(format!("[e{id}] misses e{src}, a cause of e{j}"));
                }
            }
        }
    }
    // conflict freeness: no condition consumed twice
    let mut consumed: HashSet<CondId> = HashSet::new();
    for &j in &ev.local_config {
        for &c in &bp.event(j).preset {
            if !consumed.insert(c) {
                out.push(format!("[e{id}] consumes condition {c} twice"));
            }
        }
    }
    // Mark([e]) from the cut
    let mut cut: Vec<(usize, u32)> = bp
        .initial_conditions()
        .filter(|c| !consumed.contains(c))
        .map(|c| (bp.condition(c).place, 1))
        .collect();
    for &j in &ev.local_config {
        cut.extend(
            bp.event(j)
                .postset
                .iter()
                .filter(|c| !consumed.contains(c))
                .map(|&c| (bp.condition(c).place, 1)),
        );
    }
    let cut = Marking::new(cut);
    if cut != ev.marking {
        out.push(format!("cached marking of e{id} differs from its cut"));
    }
    // replay of the id-ordered linearization
    let seq: Vec<_> = ev.local_config.iter().map(|&j| bp.event(j).transition).collect();
    match net.replay(&seq) {
        Ok(m) if m == ev.marking => {}
        Ok(_) => out.push(format!("replaying [e{id}] gives a different marking")),
        Err(e) => out.push(format!("replaying [e{id}] fails: {e}")),
    }
    for &y in &ev.postset {
        if bp.condition(y).live {
            for &z in bp.co(y) {
                if !bp.are_concurrent(z, y) {
                    out.push(format!("co relation not symmetric for {y} and {z}"));
                }
            }
        }
    }
    out
}

/// Compares the stored concurrency relation on live conditions against the
/// definition: neither causally related nor in conflict. Quadratic in the
/// number of events; meant for small processes.
pub fn check_co_relation(bp: &BranchingProcess) -> Vec<String> {
    let conds = bp.conditions();
    // causal past (events) of each condition, including its input event
    let past = |c: CondId| -> HashSet<EventId> {
        match bp.condition(c).input {
            Some(e) => bp.event(e).local_config.iter().copied().collect(),
            None => HashSet::new(),
        }
    };
    let consumed_by = |events: &HashSet<EventId>| -> HashSet<CondId> {
        events.iter().flat_map(|&e| bp.event(e).preset.iter().copied()).collect()
    };
    let live: Vec<CondId> = (0..conds.len() as CondId).filter(|&c| bp.condition(c).live).collect();
    let mut out = Vec::new();
    for (i, &a) in live.iter().enumerate() {
        let pa = past(a);
        for &b in &live[i + 1..] {
            let pb = past(b);
            let union: HashSet<EventId> = pa.union(&pb).copied().collect();
            let mut conflict = false;
            let mut seen = HashSet::new();
            for &e in &union {
                for &c in &bp.event(e).preset {
                    if !seen.insert(c) {
                        conflict = true;
                    }
                }
            }
            // a < b when a is consumed in b's past, and vice versa
            let ordered = consumed_by(&pb).contains(&a) || consumed_by(&pa).contains(&b);
            let expected = !conflict && !ordered;
            if bp.are_concurrent(a, b) != expected || bp.are_concurrent(b, a) != expected {
                out.push(format!("co({a},{b}) stored {} expected {expected}", bp.are_concurrent(a, b)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sync_product::product_for_trace;
    use crate::trace::Trace;
    use crate::unfolding::{unfold_align, UnfoldOptions, UnfoldVariant};

    #[test]
    fn co_relation_matches_definition() {
        let cases = [
            product_for_trace(&fixtures::concurrent_choice_model(), &fixtures::concurrent_trace()),
            product_for_trace(&fixtures::housing_model(), &Trace::sequence(&["AwaitC", "MakeBk"])),
            product_for_trace(&fixtures::token_generator_model(), &Trace::sequence(&["MakeBk"])),
        ];
        for sp in &cases {
            for v in [UnfoldVariant::Naive, UnfoldVariant::Heuristic] {
                let mut opts = UnfoldOptions::new(v);
                opts.check_invariants = true;
                let r = unfold_align(sp, &opts);
                assert!(r.outcome.is_ok());
                assert!(r.violations.is_empty(), "{:?}", r.violations);
                assert_eq!(check_co_relation(&r.process), Vec::<String>::new());
            }
        }
    }
}
