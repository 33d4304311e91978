//! Branching process of a synchronous product with incremental concurrency.

use std::collections::{HashMap, HashSet};

use crate::cost::Cost;
use crate::net::{Marking, PetriNet, PlaceId, TransitionId};

pub type CondId = u32;
pub type EventId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub place: PlaceId,
    /// `None` for the conditions of the initial marking.
    pub input: Option<EventId>,
    /// Postset conditions of cut-off events are dead: no extension uses them.
    pub live: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventStatus {
    /// Waiting in the priority queue.
    Queued,
    /// Part of the branching process.
    Appended,
    /// Appended, but its marking was reached by an earlier event.
    Cutoff,
    /// Popped with a cut-off event in its local configuration.
    Discarded,
    /// Never queued: a dummy end that does not reach the sink alone, or a
    /// marking from which the final marking is unreachable.
    Pruned,
}

#[derive(Debug, Clone)]
pub struct UnfEvent {
    pub id: EventId,
    pub transition: TransitionId,
    /// Sorted.
    pub preset: Vec<CondId>,
    /// Sorted; empty until the event is appended.
    pub postset: Vec<CondId>,
    /// `[e]`, sorted, including the event itself.
    pub local_config: Vec<EventId>,
    pub local_cost: Cost,
    pub heuristic: Option<Cost>,
    pub marking: Marking,
    /// Cost component of the queue key: `local_cost`, plus `h` in the
    /// heuristic variant.
    pub priority: Cost,
    pub status: EventStatus,
}

impl UnfEvent {
    /// Adequate-order key; the id breaks ties.
    pub fn key(&self) -> (Cost, EventId) {
        (self.priority, self.id)
    }

    pub fn is_in_process(&self) -> bool {
        matches!(self.status, EventStatus::Appended | EventStatus::Cutoff)
    }
}

/// Conditions, events (appended and candidate) and the derived indices the
/// search needs: the concurrency relation on live conditions, live conditions
/// per place, and the first event per marking.
#[derive(Debug, Clone)]
pub struct BranchingProcess {
    conditions: Vec<Condition>,
    events: Vec<UnfEvent>,
    co: Vec<Vec<CondId>>,
    by_place: Vec<Vec<CondId>>,
    by_marking: HashMap<Marking, EventId>,
    presets_seen: HashSet<(TransitionId, Vec<CondId>)>,
    initial_marking: Marking,
}

impl BranchingProcess {
    /// One condition per token of the initial marking, all pairwise
    /// concurrent.
    pub fn new(net: &PetriNet) -> BranchingProcess {
        let mut bp = BranchingProcess {
            conditions: Vec::new(),
            events: Vec::new(),
            co: Vec::new(),
            by_place: vec![Vec::new(); net.place_count()],
            by_marking: HashMap::new(),
            presets_seen: HashSet::new(),
            initial_marking: net.initial_marking().clone(),
        };
        for (p, n) in net.initial_marking().iter() {
            for _ in 0..n {
                bp.conditions.push(Condition {
                    place: p,
                    input: None,
                    live: true,
                });
            }
        }
        let all: Vec<CondId> = (0..bp.conditions.len() as CondId).collect();
        for &c in &all {
            bp.co.push(all.iter().copied().filter(|&d| d != c).collect());
            bp.by_place[bp.conditions[c as usize].place].push(c);
        }
        bp
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn condition(&self, c: CondId) -> &Condition {
        &self.conditions[c as usize]
    }

    pub fn events(&self) -> &[UnfEvent] {
        &self.events
    }

    pub fn event(&self, e: EventId) -> &UnfEvent {
        &self.events[e as usize]
    }

    pub(crate) fn event_mut(&mut self, e: EventId) -> &mut UnfEvent {
        &mut self.events[e as usize]
    }

    pub fn initial_conditions(&self) -> impl Iterator<Item = CondId> + '_ {
        (0..self.conditions.len() as CondId).filter(|&c| self.conditions[c as usize].input.is_none())
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial_marking
    }

    /// Conditions concurrent with `c` (live conditions only).
    pub fn co(&self, c: CondId) -> &[CondId] {
        &self.co[c as usize]
    }

    pub fn are_concurrent(&self, a: CondId, b: CondId) -> bool {
        self.co[a as usize].binary_search(&b).is_ok()
    }

    /// Events in the process, in append order.
    pub fn appended(&self) -> impl Iterator<Item = &UnfEvent> {
        self.events.iter().filter(|e| e.is_in_process())
    }

    pub fn cutoffs(&self) -> impl Iterator<Item = &UnfEvent> {
        self.events.iter().filter(|e| e.status == EventStatus::Cutoff)
    }

    pub fn first_with_marking(&self, m: &Marking) -> Option<EventId> {
        self.by_marking.get(m).copied()
    }

    pub fn preset_seen(&self, t: TransitionId, preset: &[CondId]) -> bool {
        self.presets_seen.contains(&(t, preset.to_vec()))
    }

    /// Stores a candidate event `(t, preset)` and fills its caches.
    pub(crate) fn register(
        &mut self,
        net: &PetriNet,
        costs: &[Cost],
        t: TransitionId,
        preset: Vec<CondId>,
    ) -> EventId {
        let id = self.events.len() as EventId;
        let mut config: Vec<EventId> = Vec::new();
        for &c in &preset {
            if let Some(src) = self.conditions[c as usize].input {
                config = merge(&config, &self.events[src as usize].local_config);
            }
        }
        config.push(id);
        let local_cost = config
            .iter()
            .map(|&j| {
                let tj = if j == id { t } else { self.events[j as usize].transition };
                costs[tj]
            })
            .sum();
        let mut dense: Vec<i64> = self.initial_marking.to_dense(net.place_count());
        for &j in &config {
            let tj = if j == id { t } else { self.events[j as usize].transition };
            for &(p, d) in net.effect(tj) {
                dense[p] += d;
            }
        }
        self.presets_seen.insert((t, preset.clone()));
        self.events.push(UnfEvent {
            id,
            transition: t,
            preset,
            postset: Vec::new(),
            local_config: config,
            local_cost,
            heuristic: None,
            marking: Marking::from_dense(&dense),
            priority: local_cost,
            status: EventStatus::Queued,
        });
        id
    }

    /// Adds the event to the process together with one condition per output
    /// token. The new conditions are not yet live.
    pub(crate) fn append(&mut self, net: &PetriNet, e: EventId) {
        let t = self.events[e as usize].transition;
        let mut post = Vec::new();
        for &(p, w) in &net.transition(t).postset {
            for _ in 0..w {
                let c = self.conditions.len() as CondId;
                self.conditions.push(Condition {
                    place: p,
                    input: Some(e),
                    live: false,
                });
                self.co.push(Vec::new());
                post.push(c);
            }
        }
        let ev = &mut self.events[e as usize];
        ev.postset = post;
        ev.status = EventStatus::Appended;
    }

    /// Makes the postset of an appended, non-cut-off event available for
    /// extensions and records its marking.
    pub(crate) fn activate(&mut self, e: EventId) {
        let ev = &self.events[e as usize];
        let mut base: Option<Vec<CondId>> = None;
        for &x in &ev.preset {
            base = Some(match base {
                None => self.co[x as usize].clone(),
                Some(b) => intersect(&b, &self.co[x as usize]),
            });
        }
        let base = base.unwrap_or_default();
        let post = ev.postset.clone();
        for &y in &post {
            let mut set = base.clone();
            set.extend(post.iter().copied().filter(|&z| z != y));
            set.sort_unstable();
            for &z in &base {
                self.co[z as usize].push(y);
            }
            self.co[y as usize] = set;
            self.conditions[y as usize].live = true;
            self.by_place[self.conditions[y as usize].place].push(y);
        }
        let m = self.events[e as usize].marking.clone();
        self.by_marking.entry(m).or_insert(e);
    }

    pub(crate) fn mark_cutoff(&mut self, e: EventId) {
        self.events[e as usize].status = EventStatus::Cutoff;
    }

    /// Whether an event appended earlier (in the adequate order) reaches the
    /// same marking.
    pub fn is_cutoff(&self, e: EventId) -> bool {
        let ev = &self.events[e as usize];
        match self.by_marking.get(&ev.marking) {
            Some(&other) if other != e => self.events[other as usize].key() < ev.key(),
            _ => false,
        }
    }

    /// Every `(t, X)` with `X` a co-set labelled exactly `•t` and containing at
    /// least one of `fresh`, not yet registered.
    pub fn possible_extensions(&self, net: &PetriNet, fresh: &[CondId]) -> Vec<(TransitionId, Vec<CondId>)> {
        let mut seen: HashSet<(TransitionId, Vec<CondId>)> = HashSet::new();
        let mut out = Vec::new();
        for &y in fresh {
            if !self.conditions[y as usize].live {
                continue;
            }
            let py = self.conditions[y as usize].place;
            for &t in net.consumers(py) {
                let mut slots: Vec<(PlaceId, u32)> = Vec::new();
                for &(p, w) in &net.transition(t).preset {
                    let need = if p == py { w - 1 } else { w };
                    if need > 0 {
                        slots.push((p, need));
                    }
                }
                let mut chosen = vec![y];
                let mut found = Vec::new();
                self.fill(&slots, 0, 0, None, &mut chosen, &mut found);
                for mut x in found {
                    x.sort_unstable();
                    if self.presets_seen.contains(&(t, x.clone())) {
                        continue;
                    }
                    if seen.insert((t, x.clone())) {
                        out.push((t, x));
                    }
                }
            }
        }
        out
    }

    /// Backtracking over preset slots; conditions for one place are chosen
    /// in increasing id order so each multiset is produced once.
    fn fill(
        &self,
        slots: &[(PlaceId, u32)],
        slot: usize,
        taken: u32,
        after: Option<CondId>,
        chosen: &mut Vec<CondId>,
        out: &mut Vec<Vec<CondId>>,
    ) {
        if slot == slots.len() {
            out.push(chosen.clone());
            return;
        }
        let (p, need) = slots[slot];
        if taken == need {
            self.fill(slots, slot + 1, 0, None, chosen, out);
            return;
        }
        for &c in &self.by_place[p] {
            if after.is_some_and(|a| c <= a) {
                continue;
            }
            if !chosen.iter().all(|&d| self.are_concurrent(c, d)) {
                continue;
            }
            chosen.push(c);
            self.fill(slots, slot, taken + 1, Some(c), chosen, out);
            chosen.pop();
        }
    }
}

fn merge(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_intersect() {
        assert_eq!(merge(&[1, 3, 5], &[2, 3, 6]), vec![1, 2, 3, 5, 6]);
        assert_eq!(intersect(&[1, 3, 5], &[2, 3, 5]), vec![3, 5]);
        assert!(intersect(&[], &[1]).is_empty());
    }
}
