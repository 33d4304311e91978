//! Place/transition nets with multiset markings.
//!
//! Places and transitions are addressed by dense indices; the original string
//! ids are kept for I/O. Arcs carry a multiplicity (1 for ordinary nets) so the
//! synthetic start/end transitions of a synchronous product can move
//! multi-token markings in one step.

use std::collections::HashMap;
use std::fmt;

pub type PlaceId = usize;
pub type TransitionId = usize;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("duplicate place id `{0}`")]
    DuplicatePlace(String),
    #[error("duplicate transition id `{0}`")]
    DuplicateTransition(String),
    #[error("unknown place index {0}")]
    UnknownPlace(PlaceId),
    #[error("unknown transition index {0}")]
    UnknownTransition(TransitionId),
    #[error("arc weight must be positive")]
    ZeroWeight,
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("transition `{transition}` at index {index} is not enabled")]
pub struct ReplayError {
    pub index: usize,
    pub transition: String,
}

/// A multiset of places in canonical form: sorted by place, zero counts dropped.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Marking(Vec<(PlaceId, u32)>);

impl Marking {
    pub fn empty() -> Marking {
        Marking(Vec::new())
    }

    pub fn new(counts: impl IntoIterator<Item = (PlaceId, u32)>) -> Marking {
        let mut v: Vec<(PlaceId, u32)> = Vec::new();
        for (p, n) in counts {
            v.push((p, n));
        }
        v.sort_unstable_by_key(|&(p, _)| p);
        let mut out: Vec<(PlaceId, u32)> = Vec::with_capacity(v.len());
        for (p, n) in v {
            match out.last_mut() {
                Some((q, m)) if *q == p => *m += n,
                _ => out.push((p, n)),
            }
        }
        out.retain(|&(_, n)| n > 0);
        Marking(out)
    }

    pub fn single(place: PlaceId) -> Marking {
        Marking(vec![(place, 1)])
    }

    /// Builds a marking from a dense vector of non-negative counts.
    pub fn from_dense(counts: &[i64]) -> Marking {
        Marking(
            counts
                .iter()
                .enumerate()
                .filter(|(_, &n)| n != 0)
                .map(|(p, &n)| {
                    assert!(n > 0, "negative token count at place {p}");
                    (p, n as u32)
                })
                .collect(),
        )
    }

    pub fn to_dense(&self, places: usize) -> Vec<i64> {
        let mut v = vec![0i64; places];
        for &(p, n) in &self.0 {
            v[p] += n as i64;
        }
        v
    }

    pub fn get(&self, place: PlaceId) -> u32 {
        match self.0.binary_search_by_key(&place, |&(p, _)| p) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlaceId, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&(_, n)| n as u64).sum()
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.0.iter().map(|&(p, _)| p)
    }

    /// Multiset inclusion `arcs <= self`.
    pub fn covers(&self, arcs: &[(PlaceId, u32)]) -> bool {
        arcs.iter().all(|&(p, w)| self.get(p) >= w)
    }

    /// Multiset union.
    pub fn union(&self, other: &Marking) -> Marking {
        Marking::new(self.iter().chain(other.iter()))
    }

    pub(crate) fn as_slice(&self) -> &[(PlaceId, u32)] {
        &self.0
    }
}

impl fmt::Debug for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (p, n)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if *n == 1 {
                write!(f, "p{p}")?;
            } else {
                write!(f, "p{p}^{n}")?;
            }
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    /// Activity label; `None` marks a silent transition.
    pub label: Option<String>,
    pub preset: Vec<(PlaceId, u32)>,
    pub postset: Vec<(PlaceId, u32)>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

/// A marked Petri net `(P, T, F, i, f)`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    initial: Marking,
    final_marking: Marking,
    consumers: Vec<Vec<TransitionId>>,
    effects: Vec<Vec<(PlaceId, i64)>>,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
}

impl PetriNet {
    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t]
    }

    pub fn place(&self, p: PlaceId) -> &Place {
        &self.places[p]
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    pub fn place_by_id(&self, id: &str) -> Option<PlaceId> {
        self.place_index.get(id).copied()
    }

    pub fn transition_by_id(&self, id: &str) -> Option<TransitionId> {
        self.transition_index.get(id).copied()
    }

    /// Transitions having `place` in their preset.
    pub fn consumers(&self, place: PlaceId) -> &[TransitionId] {
        &self.consumers[place]
    }

    pub fn label(&self, t: TransitionId) -> Option<&str> {
        self.transitions[t].label.as_deref()
    }

    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        m.covers(&self.transitions[t].preset)
    }

    /// Transitions enabled at `m`, in index order.
    pub fn enabled(&self, m: &Marking) -> Vec<TransitionId> {
        let mut out: Vec<TransitionId> = Vec::new();
        for p in m.places() {
            for &t in &self.consumers[p] {
                out.push(t);
            }
        }
        out.extend(
            self.transitions
                .iter()
                .enumerate()
                .filter(|(_, t)| t.preset.is_empty())
                .map(|(i, _)| i),
        );
        out.sort_unstable();
        out.dedup();
        out.retain(|&t| self.is_enabled(m, t));
        out
    }

    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking, NetError> {
        let tr = self
            .transitions
            .get(t)
            .ok_or(NetError::UnknownTransition(t))?;
        if !m.covers(&tr.preset) {
            return Err(NetError::NotEnabled(tr.id.clone()));
        }
        Ok(self.fire_unchecked(m, t))
    }

    pub(crate) fn fire_unchecked(&self, m: &Marking, t: TransitionId) -> Marking {
        let delta = &self.effects[t];
        let cur = m.as_slice();
        let mut out: Vec<(PlaceId, u32)> = Vec::with_capacity(cur.len() + delta.len());
        let (mut i, mut j) = (0, 0);
        while i < cur.len() || j < delta.len() {
            if j == delta.len() || (i < cur.len() && cur[i].0 < delta[j].0) {
                out.push(cur[i]);
                i += 1;
            } else if i == cur.len() || delta[j].0 < cur[i].0 {
                debug_assert!(delta[j].1 > 0);
                out.push((delta[j].0, delta[j].1 as u32));
                j += 1;
            } else {
                let n = cur[i].1 as i64 + delta[j].1;
                debug_assert!(n >= 0);
                if n > 0 {
                    out.push((cur[i].0, n as u32));
                }
                i += 1;
                j += 1;
            }
        }
        Marking(out)
    }

    /// Fires `seq` from the initial marking.
    pub fn replay(&self, seq: &[TransitionId]) -> Result<Marking, ReplayError> {
        self.replay_from(&self.initial, seq)
    }

    pub fn replay_from(&self, start: &Marking, seq: &[TransitionId]) -> Result<Marking, ReplayError> {
        let mut m = start.clone();
        for (index, &t) in seq.iter().enumerate() {
            m = self.fire(&m, t).map_err(|_| ReplayError {
                index,
                transition: self
                    .transitions
                    .get(t)
                    .map(|tr| tr.id.clone())
                    .unwrap_or_else(|| format!("#{t}")),
            })?;
        }
        Ok(m)
    }

    /// Net effect `t• - •t` per place, sorted by place.
    pub fn effect(&self, t: TransitionId) -> &[(PlaceId, i64)] {
        &self.effects[t]
    }

    /// Renders a marking with place ids, e.g. `[p1, p3^2]`.
    pub fn format_marking(&self, m: &Marking) -> String {
        let parts: Vec<String> = m
            .iter()
            .map(|(p, n)| {
                if n == 1 {
                    self.places[p].id.clone()
                } else {
                    format!("{}^{}", self.places[p].id, n)
                }
            })
            .collect();
        format!("[{}]", parts.join(", "))
    }
}

/// Incremental constructor for [`PetriNet`].
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    initial: Vec<(PlaceId, u32)>,
    final_marking: Vec<(PlaceId, u32)>,
}

impl NetBuilder {
    pub fn new() -> NetBuilder {
        NetBuilder::default()
    }

    pub fn place(&mut self, id: impl Into<String>) -> PlaceId {
        self.places.push(Place { id: id.into() });
        self.places.len() - 1
    }

    pub fn transition(&mut self, id: impl Into<String>, label: Option<&str>) -> TransitionId {
        self.transitions.push(Transition {
            id: id.into(),
            label: label.map(str::to_string),
            preset: Vec::new(),
            postset: Vec::new(),
        });
        self.transitions.len() - 1
    }

    pub fn labeled(&mut self, id: impl Into<String>, label: &str) -> TransitionId {
        self.transition(id, Some(label))
    }

    pub fn silent(&mut self, id: impl Into<String>) -> TransitionId {
        self.transition(id, None)
    }

    pub fn input(&mut self, place: PlaceId, t: TransitionId) -> &mut Self {
        self.input_weighted(place, t, 1)
    }

    pub fn output(&mut self, t: TransitionId, place: PlaceId) -> &mut Self {
        self.output_weighted(t, place, 1)
    }

    pub fn input_weighted(&mut self, place: PlaceId, t: TransitionId, w: u32) -> &mut Self {
        add_arc(&mut self.transitions[t].preset, place, w);
        self
    }

    pub fn output_weighted(&mut self, t: TransitionId, place: PlaceId, w: u32) -> &mut Self {
        add_arc(&mut self.transitions[t].postset, place, w);
        self
    }

    pub fn initial(&mut self, place: PlaceId, n: u32) -> &mut Self {
        self.initial.push((place, n));
        self
    }

    pub fn final_tokens(&mut self, place: PlaceId, n: u32) -> &mut Self {
        self.final_marking.push((place, n));
        self
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn build(self) -> Result<PetriNet, NetError> {
        let np = self.places.len();
        let mut place_index = HashMap::new();
        for (i, p) in self.places.iter().enumerate() {
            if place_index.insert(p.id.clone(), i).is_some() {
                return Err(NetError::DuplicatePlace(p.id.clone()));
            }
        }
        let mut transition_index = HashMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            if transition_index.insert(t.id.clone(), i).is_some() {
                return Err(NetError::DuplicateTransition(t.id.clone()));
            }
        }
        let mut consumers = vec![Vec::new(); np];
        for (i, t) in self.transitions.iter().enumerate() {
            for &(p, w) in t.preset.iter().chain(&t.postset) {
                if p >= np {
                    return Err(NetError::UnknownPlace(p));
                }
                if w == 0 {
                    return Err(NetError::ZeroWeight);
                }
            }
            for &(p, _) in &t.preset {
                consumers[p].push(i);
            }
        }
        for &(p, _) in self.initial.iter().chain(&self.final_marking) {
            if p >= np {
                return Err(NetError::UnknownPlace(p));
            }
        }
        let effects = self
            .transitions
            .iter()
            .map(|t| {
                let mut acc: HashMap<PlaceId, i64> = HashMap::new();
                for &(p, w) in &t.preset {
                    *acc.entry(p).or_default() -= w as i64;
                }
                for &(p, w) in &t.postset {
                    *acc.entry(p).or_default() += w as i64;
                }
                let mut v: Vec<_> = acc.into_iter().filter(|&(_, d)| d != 0).collect();
                v.sort_unstable();
                v
            })
            .collect();
        Ok(PetriNet {
            places: self.places,
            effects,
            transitions: self.transitions,
            initial: Marking::new(self.initial),
            final_marking: Marking::new(self.final_marking),
            consumers,
            place_index,
            transition_index,
        })
    }
}

fn add_arc(arcs: &mut Vec<(PlaceId, u32)>, place: PlaceId, w: u32) {
    match arcs.iter_mut().find(|(p, _)| *p == place) {
        Some((_, n)) => *n += w,
        None => {
            arcs.push((place, w));
            arcs.sort_unstable_by_key(|&(p, _)| p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn marking_canonical_form() {
        let a = Marking::new([(3, 1), (1, 2), (3, 0), (1, 1)]);
        let b = Marking::new([(1, 3), (3, 1)]);
        assert_eq!(a, b);
        assert_eq!(a.get(1), 3);
        assert_eq!(a.get(2), 0);
        assert_eq!(Marking::new([(4, 0)]), Marking::empty());
    }

    #[test]
    fn initially_both_s_transitions_enabled() {
        let net = fixtures::concurrent_choice_model();
        let enabled: Vec<&str> = net
            .enabled(net.initial_marking())
            .into_iter()
            .map(|t| net.transition(t).id.as_str())
            .collect();
        assert_eq!(enabled, ["t1", "t5"]);
    }

    #[test]
    fn empty_marking_enables_nothing() {
        let net = fixtures::concurrent_choice_model();
        assert!(net.enabled(&Marking::empty()).is_empty());
    }

    #[test]
    fn firing_split_marks_both_branches() {
        let net = fixtures::concurrent_choice_model();
        let t1 = net.transition_by_id("t1").unwrap();
        let m = net.fire(net.initial_marking(), t1).unwrap();
        let expected = Marking::new([
            (net.place_by_id("p2a").unwrap(), 1),
            (net.place_by_id("p2b").unwrap(), 1),
        ]);
        assert_eq!(m, expected);
    }

    #[test]
    fn self_loop_keeps_count() {
        let mut b = NetBuilder::new();
        let p = b.place("p");
        let t = b.labeled("t", "a");
        b.input(p, t).output(t, p).initial(p, 1);
        let net = b.build().unwrap();
        let m = net.fire(net.initial_marking(), t).unwrap();
        assert_eq!(m, Marking::single(p));
    }

    #[test]
    fn generator_loop_accumulates_tokens() {
        let net = fixtures::token_generator_model();
        let gen = net.transition_by_id("submit_pd").unwrap();
        let pool = net.place_by_id("pool").unwrap();
        let m = net.replay(&[gen, gen]).unwrap();
        assert_eq!(m.get(pool), 2);
    }

    #[test]
    fn replay_reaches_final_and_reports_failure_index() {
        let net = fixtures::concurrent_choice_model();
        let ids = |names: &[&str]| -> Vec<TransitionId> {
            names.iter().map(|n| net.transition_by_id(n).unwrap()).collect()
        };
        assert_eq!(net.replay(&[]).unwrap(), *net.initial_marking());
        assert_eq!(net.replay(&ids(&["t1", "t2", "t3", "t4"])).unwrap(), *net.final_marking());
        let err = net.replay(&ids(&["t1", "t6", "t7"])).unwrap_err();
        assert_eq!(err.index, 1);
        assert_eq!(err.transition, "t6");
    }

    #[test]
    fn fire_disabled_is_error() {
        let net = fixtures::concurrent_choice_model();
        let t4 = net.transition_by_id("t4").unwrap();
        assert!(matches!(net.fire(net.initial_marking(), t4), Err(NetError::NotEnabled(_))));
    }

    #[test]
    fn builder_rejects_duplicates_and_dangling_arcs() {
        let mut b = NetBuilder::new();
        b.place("p");
        b.place("p");
        assert_eq!(b.build().unwrap_err(), NetError::DuplicatePlace("p".into()));

        let mut b = NetBuilder::new();
        let t = b.labeled("t", "a");
        b.input(7, t);
        assert_eq!(b.build().unwrap_err(), NetError::UnknownPlace(7));
    }

    proptest! {
        #[test]
        fn marking_order_independent(mut v in prop::collection::vec((0usize..6, 0u32..3), 0..12)) {
            let a = Marking::new(v.clone());
            v.reverse();
            prop_assert_eq!(a, Marking::new(v));
        }

        #[test]
        fn enabled_iff_fire_succeeds(counts in prop::collection::vec(0i64..3, 12)) {
            let net = fixtures::concurrent_choice_model();
            let m = Marking::from_dense(&counts[..net.place_count()]);
            let enabled = net.enabled(&m);
            for t in 0..net.transition_count() {
                let fired = net.fire(&m, t);
                prop_assert_eq!(enabled.contains(&t), fired.is_ok());
                if let Ok(next) = fired {
                    prop_assert!(next.iter().all(|(_, n)| n > 0));
                }
            }
        }
    }
}
