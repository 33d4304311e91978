//! Synthetic workflow nets, random trace simulation and deviation injection.
//!
//! Shapes: `C` is a silent AND-split into `breadth` parallel branches of
//! `depth` labelled steps followed by a silent AND-join; `E` is an exclusive
//! choice where `breadth` branches leave one place and re-merge into another;
//! `L` is a chain of `depth` steps with a silent back edge and a silent exit.
//! The nested shapes `CN` / `EN` replace the first step of every branch by a
//! nested block of the same kind, `nesting_factor` levels deep.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::net::{Marking, NetBuilder, PetriNet, PlaceId};
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("cannot remove an event from an empty trace")]
    EmptyTrace,
    #[error("simulation deadlocked after {0} steps")]
    Deadlock(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Construct {
    C,
    E,
    CN,
    EN,
    L,
}

impl Construct {
    pub fn is_nested(self) -> bool {
        matches!(self, Construct::CN | Construct::EN)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Construct::C => "C",
            Construct::E => "E",
            Construct::CN => "CN",
            Construct::EN => "EN",
            Construct::L => "L",
        }
    }
}

impl fmt::Display for Construct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Construct {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "C" => Ok(Construct::C),
            "E" => Ok(Construct::E),
            "CN" => Ok(Construct::CN),
            "EN" => Ok(Construct::EN),
            "L" => Ok(Construct::L),
            _ => Err(GenError::InvalidSpec(format!("unknown construct `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    pub construct: Construct,
    pub breadth: u32,
    pub depth: u32,
    pub nesting_factor: Option<u32>,
    pub nesting_breadth: Option<u32>,
    pub nesting_depth: Option<u32>,
    pub seed: u64,
}

impl ModelSpec {
    pub fn simple(construct: Construct, breadth: u32, depth: u32, seed: u64) -> ModelSpec {
        ModelSpec {
            construct,
            breadth,
            depth,
            nesting_factor: None,
            nesting_breadth: None,
            nesting_depth: None,
            seed,
        }
    }

    pub fn nested(construct: Construct, depth: u32, factor: u32, nb: u32, nd: u32, seed: u64) -> ModelSpec {
        ModelSpec {
            construct,
            breadth: 2,
            depth,
            nesting_factor: Some(factor),
            nesting_breadth: Some(nb),
            nesting_depth: Some(nd),
            seed,
        }
    }

    /// Checks the parameter ranges of the experiment taxonomy.
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |msg: String| Err(GenError::InvalidSpec(msg));
        let range = |name: &str, v: u32, lo: u32, hi: u32| -> Result<(), GenError> {
            if v < lo || v > hi {
                return bad(format!("{name} {v} outside {lo}..={hi} for {}", self.construct));
            }
            Ok(())
        };
        match self.construct {
            Construct::C => {
                range("breadth", self.breadth, 2, 12)?;
                range("depth", self.depth, 1, 15)?;
            }
            Construct::E => {
                range("breadth", self.breadth, 2, 15)?;
                range("depth", self.depth, 1, 15)?;
            }
            Construct::L => {
                range("breadth", self.breadth, 1, 1)?;
                range("depth", self.depth, 1, 5)?;
            }
            Construct::CN | Construct::EN => {
                range("breadth", self.breadth, 2, 2)?;
                range("depth", self.depth, 1, 5)?;
                let (Some(nf), Some(nb), Some(nd)) =
                    (self.nesting_factor, self.nesting_breadth, self.nesting_depth)
                else {
                    return bad(format!("{} needs nesting factor, breadth and depth", self.construct));
                };
                range("nesting factor", nf, 1, 5)?;
                range("nesting breadth", nb, 2, 2)?;
                range("nesting depth", nd, 1, 5)?;
            }
        }
        if !self.construct.is_nested()
            && (self.nesting_factor.is_some() || self.nesting_breadth.is_some() || self.nesting_depth.is_some())
        {
            return bad(format!("{} takes no nesting parameters", self.construct));
        }
        Ok(())
    }

    /// Stable identifier, e.g. `C_b3_d5_s7`.
    pub fn model_id(&self) -> String {
        let mut s = format!("{}_b{}_d{}", self.construct, self.breadth, self.depth);
        if let (Some(nf), Some(nb), Some(nd)) = (self.nesting_factor, self.nesting_breadth, self.nesting_depth) {
            s.push_str(&format!("_nf{nf}_nb{nb}_nd{nd}"));
        }
        s.push_str(&format!("_s{}", self.seed));
        s
    }
}

/// `a, b, ..., z, aa, ab, ...`
pub fn activity_label(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

struct Gen {
    b: NetBuilder,
    places: usize,
    labels: usize,
    silents: usize,
}

impl Gen {
    fn place(&mut self) -> PlaceId {
        self.places += 1;
        self.b.place(format!("p{}", self.places))
    }

    fn step(&mut self, from: PlaceId, to: PlaceId) {
        let label = activity_label(self.labels);
        self.labels += 1;
        let t = self.b.labeled(format!("t_{label}"), &label);
        self.b.input(from, t).output(t, to);
    }

    fn silent(&mut self, from: &[PlaceId], to: &[PlaceId]) {
        self.silents += 1;
        let t = self.b.silent(format!("tau{}", self.silents));
        for &p in from {
            self.b.input(p, t);
        }
        for &p in to {
            self.b.output(t, p);
        }
    }

    /// A branch of `depth` steps from `from` to `to`; step 0 becomes a nested
    /// block when `nest` is given.
    fn branch(&mut self, kind: Construct, from: PlaceId, to: PlaceId, depth: u32, nest: Option<Nest>) {
        let mut cur = from;
        for k in 0..depth {
            let next = if k + 1 == depth { to } else { self.place() };
            match nest {
                Some(n) if k == 0 => self.block(kind, cur, next, n.breadth, n.depth, n.deeper()),
                _ => self.step(cur, next),
            }
            cur = next;
        }
    }

    fn block(&mut self, kind: Construct, from: PlaceId, to: PlaceId, breadth: u32, depth: u32, nest: Option<Nest>) {
        match kind {
            Construct::C | Construct::CN => {
                let starts: Vec<PlaceId> = (0..breadth).map(|_| self.place()).collect();
                let ends: Vec<PlaceId> = (0..breadth).map(|_| self.place()).collect();
                self.silent(&[from], &starts);
                for (&s, &e) in starts.iter().zip(&ends) {
                    self.branch(kind, s, e, depth, nest);
                }
                self.silent(&ends, &[to]);
            }
            Construct::E | Construct::EN => {
                for _ in 0..breadth {
                    self.branch(kind, from, to, depth, nest);
                }
            }
            Construct::L => unreachable!("loops are built directly"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Nest {
    levels: u32,
    breadth: u32,
    depth: u32,
}

impl Nest {
    fn deeper(self) -> Option<Nest> {
        (self.levels > 1).then_some(Nest {
            levels: self.levels - 1,
            ..self
        })
    }
}

pub fn generate_model(spec: &ModelSpec) -> Result<PetriNet, GenError> {
    spec.validate()?;
    let mut g = Gen {
        b: NetBuilder::new(),
        places: 0,
        labels: 0,
        silents: 0,
    };
    let start = g.b.place("start");
    let end = g.b.place("end");
    match spec.construct {
        Construct::L => {
            let mut cur = start;
            for _ in 0..spec.depth {
                let next = g.place();
                g.step(cur, next);
                cur = next;
            }
            g.silent(&[cur], &[start]);
            g.silent(&[cur], &[end]);
        }
        kind => {
            let nest = spec.nesting_factor.map(|levels| Nest {
                levels,
                breadth: spec.nesting_breadth.unwrap_or(2),
                depth: spec.nesting_depth.unwrap_or(1),
            });
            g.block(kind, start, end, spec.breadth, spec.depth, nest);
        }
    }
    g.b.initial(start, 1).final_tokens(end, 1);
    Ok(g.b.build().expect("generated nets are well formed"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Placement {
    None,
    Start,
    Middle,
    End,
}

impl Placement {
    pub const ALL: [Placement; 4] = [Placement::None, Placement::Start, Placement::Middle, Placement::End];

    pub fn as_str(self) -> &'static str {
        match self {
            Placement::None => "none",
            Placement::Start => "start",
            Placement::Middle => "middle",
            Placement::End => "end",
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Placement {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Placement::None),
            "start" => Ok(Placement::Start),
            "middle" => Ok(Placement::Middle),
            "end" => Ok(Placement::End),
            _ => Err(GenError::InvalidSpec(format!("unknown deviation placement `{s}`"))),
        }
    }
}

/// Removes one event: index 0, `(len - 1) / 2` or `len - 1`.
pub fn inject_deviation(trace: &Trace, placement: Placement) -> Result<Trace, GenError> {
    if placement == Placement::None {
        return Ok(trace.clone());
    }
    let n = trace.len();
    if n == 0 {
        return Err(GenError::EmptyTrace);
    }
    let idx = match placement {
        Placement::Start => 0,
        Placement::Middle => (n - 1) / 2,
        Placement::End => n - 1,
        Placement::None => unreachable!(),
    };
    Ok(trace.without_event(idx))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulatedRun {
    pub trace: Trace,
    /// Silent transitions fired along the run.
    pub silent: usize,
}

/// Reachable markings beyond which the forced-exit distance table is not
/// built.
const DISTANCE_BOUND: usize = 200_000;

/// Shortest firing distance to the final marking for every reachable
/// marking, or `None` when the state space is too large.
fn distances_to_final(net: &PetriNet) -> Option<HashMap<Marking, usize>> {
    let mut index: HashMap<Marking, usize> = HashMap::new();
    let mut markings = vec![net.initial_marking().clone()];
    index.insert(markings[0].clone(), 0);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let m = markings[i].clone();
        for t in net.enabled(&m) {
            let next = net.fire(&m, t).ok()?;
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if markings.len() >= DISTANCE_BOUND {
                        return None;
                    }
                    markings.push(next.clone());
                    preds.push(Vec::new());
                    index.insert(next, markings.len() - 1);
                    queue.push_back(markings.len() - 1);
                    markings.len() - 1
                }
            };
            preds[j].push(i);
        }
    }
    let target = *index.get(net.final_marking())?;
    let mut dist = vec![usize::MAX; markings.len()];
    dist[target] = 0;
    let mut queue = VecDeque::from([target]);
    while let Some(j) = queue.pop_front() {
        for &i in &preds[j] {
            if dist[i] == usize::MAX {
                dist[i] = dist[j] + 1;
                queue.push_back(i);
            }
        }
    }
    Some(
        markings
            .into_iter()
            .zip(dist)
            .filter(|&(_, d)| d != usize::MAX)
            .collect(),
    )
}

/// Plays `n` runs from the initial to the final marking, choosing uniformly
/// among enabled transitions. Once a run has emitted `max_len` events, only
/// transitions that move closer to the final marking are chosen.
pub fn simulate_runs(net: &PetriNet, n: usize, seed: u64, max_len: usize) -> Result<Vec<SimulatedRun>, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist: Option<Option<HashMap<Marking, usize>>> = None;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut m = net.initial_marking().clone();
        let mut acts: Vec<String> = Vec::new();
        let mut silent = 0;
        let mut steps = 0;
        while &m != net.final_marking() {
            let mut enabled = net.enabled(&m);
            if acts.len() >= max_len {
                let table = dist.get_or_insert_with(|| distances_to_final(net));
                if let Some(table) = table {
                    let here = table.get(&m).copied().unwrap_or(usize::MAX);
                    let closer: Vec<_> = enabled
                        .iter()
                        .copied()
                        .filter(|&t| {
                            let next = net.fire(&m, t).expect("enabled");
                            table.get(&next).is_some_and(|&d| d < here)
                        })
                        .collect();
                    if !closer.is_empty() {
                        enabled = closer;
                    }
                }
            }
            let Some(&t) = enabled.choose(&mut rng) else {
                return Err(GenError::Deadlock(steps));
            };
            m = net.fire(&m, t).expect("enabled");
            match net.label(t) {
                Some(l) => acts.push(l.to_string()),
                None => silent += 1,
            }
            steps += 1;
        }
        out.push(SimulatedRun {
            trace: Trace::sequence(&acts),
            silent,
        });
    }
    Ok(out)
}

pub fn simulate_traces(net: &PetriNet, n: usize, seed: u64, max_len: usize) -> Result<Vec<Trace>, GenError> {
    Ok(simulate_runs(net, n, seed, max_len)?
        .into_iter()
        .map(|r| r.trace)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn labels(net: &PetriNet) -> Vec<&str> {
        net.transitions().iter().filter_map(|t| t.label.as_deref()).collect()
    }

    #[test]
    fn labels_are_alphabetic() {
        assert_eq!(activity_label(0), "a");
        assert_eq!(activity_label(25), "z");
        assert_eq!(activity_label(26), "aa");
        assert_eq!(activity_label(27), "ab");
        assert_eq!(activity_label(26 + 26 * 26), "aaa");
    }

    #[test]
    fn concurrent_3_by_5() {
        let net = generate_model(&ModelSpec::simple(Construct::C, 3, 5, 0)).unwrap();
        assert_eq!(net.transition_count(), 17);
        assert_eq!(labels(&net).len(), 15);
        assert_eq!(net.transitions().iter().filter(|t| t.is_silent()).count(), 2);
    }

    #[test]
    fn minimal_concurrent_traces_are_permutations() {
        let net = generate_model(&ModelSpec::simple(Construct::C, 2, 1, 0)).unwrap();
        let runs = simulate_runs(&net, 50, 3, 100).unwrap();
        let seen: HashSet<Vec<&str>> = runs.iter().map(|r| r.trace.activities()).collect();
        let want: HashSet<Vec<&str>> = [vec!["a", "b"], vec!["b", "a"]].into_iter().collect();
        assert_eq!(seen, want);
        assert!(runs.iter().all(|r| r.silent == 2));
    }

    #[test]
    fn minimal_choice_traces_are_single_events() {
        let net = generate_model(&ModelSpec::simple(Construct::E, 2, 1, 0)).unwrap();
        assert!(net.transitions().iter().all(|t| !t.is_silent()));
        let traces = simulate_traces(&net, 50, 1, 100).unwrap();
        let seen: HashSet<Vec<&str>> = traces.iter().map(|t| t.activities()).collect();
        assert_eq!(seen, [vec!["a"], vec!["b"]].into_iter().collect());
    }

    #[test]
    fn loop_traces_repeat_the_block_and_stay_bounded() {
        let net = generate_model(&ModelSpec::simple(Construct::L, 1, 5, 0)).unwrap();
        let runs = simulate_runs(&net, 100, 7, 20).unwrap();
        assert!(runs.iter().any(|r| r.trace.len() > 5));
        for r in &runs {
            assert_eq!(r.trace.len() % 5, 0);
            assert!(r.trace.len() <= 25);
            assert_eq!(&r.trace.activities()[..5], ["a", "b", "c", "d", "e"]);
        }
    }

    #[test]
    fn nested_models_keep_labels_unique() {
        for c in [Construct::CN, Construct::EN] {
            let net = generate_model(&ModelSpec::nested(c, 3, 2, 2, 2, 0)).unwrap();
            let ls = labels(&net);
            let uniq: HashSet<_> = ls.iter().collect();
            assert_eq!(uniq.len(), ls.len());
            let runs = simulate_runs(&net, 10, 0, 1000).unwrap();
            assert!(runs.iter().all(|r| !r.trace.is_empty()));
        }
        // choice nesting adds no silent steps
        let en = generate_model(&ModelSpec::nested(Construct::EN, 2, 1, 2, 1, 0)).unwrap();
        assert!(en.transitions().iter().all(|t| !t.is_silent()));
    }

    #[test]
    fn nested_concurrency_nests_blocks() {
        // top: 2 branches, depth 2, first step of each branch replaced by a
        // block of 2 x 1 with its own split and join
        let net = generate_model(&ModelSpec::nested(Construct::CN, 2, 1, 2, 1, 0)).unwrap();
        assert_eq!(labels(&net).len(), 2 * (1 + 2));
        assert_eq!(net.transitions().iter().filter(|t| t.is_silent()).count(), 2 + 2 * 2);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate_model(&ModelSpec::simple(Construct::C, 0, 1, 0)).is_err());
        assert!(generate_model(&ModelSpec::simple(Construct::C, 13, 1, 0)).is_err());
        assert!(generate_model(&ModelSpec::simple(Construct::L, 2, 3, 0)).is_err());
        assert!(generate_model(&ModelSpec::simple(Construct::CN, 2, 3, 0)).is_err());
    }

    #[test]
    fn deviation_indices() {
        let t = Trace::sequence(&["a", "b", "c"]);
        assert_eq!(inject_deviation(&t, Placement::Start).unwrap().activities(), ["b", "c"]);
        let t4 = Trace::sequence(&["a", "b", "c", "d"]);
        assert_eq!(inject_deviation(&t4, Placement::Middle).unwrap().activities(), ["a", "c", "d"]);
        let t1 = Trace::sequence(&["a"]);
        assert!(inject_deviation(&t1, Placement::End).unwrap().is_empty());
        assert_eq!(inject_deviation(&t, Placement::None).unwrap(), t);
        assert_eq!(
            inject_deviation(&Trace::sequence::<&str>(&[]), Placement::Start),
            Err(GenError::EmptyTrace)
        );
    }

    #[test]
    fn simulation_is_reproducible() {
        let net = generate_model(&ModelSpec::simple(Construct::C, 3, 3, 0)).unwrap();
        assert_eq!(simulate_runs(&net, 20, 42, 100), simulate_runs(&net, 20, 42, 100));
        assert_ne!(simulate_traces(&net, 20, 42, 100), simulate_traces(&net, 20, 43, 100));
    }

    #[test]
    fn every_model_reaches_its_final_marking() {
        let specs = [
            ModelSpec::simple(Construct::C, 4, 4, 0),
            ModelSpec::simple(Construct::E, 4, 4, 0),
            ModelSpec::simple(Construct::L, 1, 3, 0),
            ModelSpec::nested(Construct::CN, 2, 2, 2, 2, 0),
            ModelSpec::nested(Construct::EN, 2, 2, 2, 2, 0),
        ];
        for s in specs {
            let net = generate_model(&s).unwrap();
            assert!(distances_to_final(&net).unwrap().contains_key(net.initial_marking()));
        }
    }
}
