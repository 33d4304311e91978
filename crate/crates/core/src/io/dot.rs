//! Graphviz output. Node order follows ids, so output is deterministic.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::alignment::PoAlignment;
use crate::sync_product::{MoveKind, SyncProduct};
use crate::unfolding::{BranchingProcess, EventId, EventStatus};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn fill(kind: &MoveKind) -> &'static str {
    match kind {
        MoveKind::Sync { .. } => "#b7e4c7",
        MoveKind::Log { .. } => "#ffd6a5",
        MoveKind::Model { label: None, .. } => "#e0e0e0",
        MoveKind::Model { .. } => "#a9d6f5",
        MoveKind::DummyStart | MoveKind::DummyEnd => "#ffffff",
    }
}

fn class(kind: &MoveKind) -> &'static str {
    match kind {
        MoveKind::Sync { .. } => "sync",
        MoveKind::Log { .. } => "log",
        MoveKind::Model { label: None, .. } => "silent",
        MoveKind::Model { .. } => "model",
        _ => "dummy",
    }
}

/// The branching process: conditions as circles, events as boxes. Cut-off
/// events are dashed; events of `[winner]` are drawn bold.
pub fn process_dot(sp: &SyncProduct, bp: &BranchingProcess, winner: Option<EventId>) -> String {
    let net = sp.net();
    let win: HashSet<EventId> = winner
        .map(|w| bp.event(w).local_config.iter().copied().collect())
        .unwrap_or_default();
    let shown: HashSet<EventId> = bp.appended().map(|e| e.id).collect();
    let mut s = String::from("digraph unfolding {\n  rankdir=LR;\n");
    for (c, cond) in bp.conditions().iter().enumerate() {
        if cond.input.is_some_and(|e| !shown.contains(&e)) {
            continue;
        }
        let bold = cond.input.is_none_or(|e| win.contains(&e)) && !win.is_empty();
        let _ = writeln!(
            s,
            "  c{c} [shape=circle, label={}{}];",
            quote(&net.place(cond.place).id),
            if bold { ", penwidth=2" } else { "" }
        );
    }
    for e in bp.appended() {
        let kind = sp.move_kind(e.transition);
        let mut style = vec!["filled"];
        if e.status == EventStatus::Cutoff {
            style.push("dashed");
        }
        if win.contains(&e.id) {
            style.push("bold");
        }
        let _ = writeln!(
            s,
            "  e{} [shape=box, class={}, style={}, fillcolor={}, label={}];",
            e.id,
            class(kind),
            quote(&style.join(",")),
            quote(fill(kind)),
            quote(&format!("e{} {kind}", e.id))
        );
    }
    for e in bp.appended() {
        for &c in &e.preset {
            let _ = writeln!(s, "  c{c} -> e{};", e.id);
        }
        for &c in &e.postset {
            let _ = writeln!(s, "  e{} -> c{c};", e.id);
        }
    }
    s.push_str("}\n");
    s
}

/// A partial-order alignment: one box per move, edges for the covering
/// relation of the causal order.
pub fn alignment_dot(alignment: &PoAlignment) -> String {
    let mut s = String::from("digraph alignment {\n  rankdir=LR;\n");
    for (i, m) in alignment.moves().iter().enumerate() {
        let _ = writeln!(
            s,
            "  m{i} [shape=box, class={}, style=filled, fillcolor={}, label={}];",
            class(&m.kind),
            quote(fill(&m.kind)),
            quote(&m.kind.to_string())
        );
    }
    for (i, j) in alignment.covering() {
        let _ = writeln!(s, "  m{i} -> m{j};");
    }
    let _ = writeln!(s, "  label={};", quote(&format!("cost {}", alignment.cost())));
    s.push_str("}\n");
    s
}
