//! Sequential aligners over the reachability graph of a synchronous product,
//! and an exhaustive oracle used by the test suites.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::time::Duration;

use crate::alignment::{AlignError, SequentialAlignment};
use crate::cost::Cost;
use crate::heuristic::HeuristicCache;
use crate::metrics::{Deadline, RunMetrics, Variant};
use crate::net::{Marking, TransitionId};
use crate::sync_product::SyncProduct;

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    pub timeout: Option<Duration>,
    /// Record the priority of every distinct pop.
    pub record_pops: bool,
}

#[derive(Debug, Clone)]
pub struct SearchRun {
    pub outcome: Result<SequentialAlignment, AlignError>,
    pub metrics: RunMetrics,
    /// `g` (Dijkstra) or `g + h` (A*) of each distinct pop, in pop order.
    pub pops: Vec<Cost>,
}

struct Node {
    marking: Marking,
    g: Cost,
    parent: Option<usize>,
    via: Option<TransitionId>,
}

/// Uniform-cost search from the source marking to the sink marking.
pub fn dijkstra_align(sp: &SyncProduct, opts: &SearchOptions) -> SearchRun {
    search(sp, None, opts)
}

/// A* with the marking-equation heuristic. Markings whose relaxation is
/// infeasible are never queued.
pub fn astar_align(sp: &SyncProduct, cache: &HeuristicCache, opts: &SearchOptions) -> SearchRun {
    search(sp, Some(cache), opts)
}

fn search(sp: &SyncProduct, cache: Option<&HeuristicCache>, opts: &SearchOptions) -> SearchRun {
    let deadline = Deadline::start(opts.timeout);
    let variant = if cache.is_some() { Variant::AStar } else { Variant::Dijkstra };
    let mut metrics = RunMetrics::new(variant, sp.trace().len(), sp.spt());
    let mut pops = Vec::new();
    let h = |m: &Marking| -> Option<Cost> {
        match cache {
            Some(c) => c.get(sp, m),
            None => Some(Cost::ZERO),
        }
    };

    let target = sp.net().final_marking().clone();
    let mut nodes: Vec<Node> = Vec::new();
    let mut best: HashMap<Marking, Cost> = HashMap::new();
    let mut closed: HashSet<Marking> = HashSet::new();
    let mut heap: BinaryHeap<Reverse<(Cost, u64, usize)>> = BinaryHeap::new();
    let mut counter = 0u64;

    let start = sp.net().initial_marking().clone();
    let outcome = 'run: {
        let Some(h0) = h(&start) else {
            break 'run Err(AlignError::NoAlignment(
                "final marking unreachable even in the marking-equation relaxation".into(),
            ));
        };
        best.insert(start.clone(), Cost::ZERO);
        nodes.push(Node {
            marking: start,
            g: Cost::ZERO,
            parent: None,
            via: None,
        });
        heap.push(Reverse((h0, counter, 0)));
        counter += 1;
        metrics.queued += 1;

        while let Some(Reverse((f, _, idx))) = heap.pop() {
            if deadline.expired() {
                metrics.timed_out = true;
                break 'run Err(AlignError::Timeout);
            }
            if closed.contains(&nodes[idx].marking) {
                continue;
            }
            // a stale entry whose marking was later reached more cheaply
            if best[&nodes[idx].marking] < nodes[idx].g {
                continue;
            }
            closed.insert(nodes[idx].marking.clone());
            metrics.visited += 1;
            if opts.record_pops {
                pops.push(f);
            }
            if nodes[idx].marking == target {
                let mut path = Vec::new();
                let mut cur = Some(idx);
                while let Some(i) = cur {
                    if let Some(t) = nodes[i].via {
                        path.push(t);
                    }
                    cur = nodes[i].parent;
                }
                path.reverse();
                break 'run Ok(SequentialAlignment::new(sp, path));
            }
            let g = nodes[idx].g;
            for (t, next) in sp.successors(&nodes[idx].marking) {
                if closed.contains(&next) {
                    continue;
                }
                let g2 = g + sp.cost(t);
                match best.entry(next.clone()) {
                    Entry::Occupied(mut o) => {
                        if *o.get() <= g2 {
                            continue;
                        }
                        o.insert(g2);
                    }
                    Entry::Vacant(v) => {
                        v.insert(g2);
                    }
                }
                let Some(hv) = h(&next) else { continue };
                nodes.push(Node {
                    marking: next,
                    g: g2,
                    parent: Some(idx),
                    via: Some(t),
                });
                heap.push(Reverse((g2 + hv, counter, nodes.len() - 1)));
                counter += 1;
                metrics.queued += 1;
            }
        }
        Err(AlignError::NoAlignment(
            "state space exhausted: the model's final marking is unreachable".into(),
        ))
    };
    metrics.elapsed = deadline.elapsed();
    metrics.cost = outcome.as_ref().ok().map(|a| a.cost);
    SearchRun {
        outcome,
        metrics,
        pops,
    }
}

#[derive(Debug, Clone, Copy, thiserror::Error, PartialEq, Eq)]
#[error("reachability graph exceeds {0} markings")]
pub struct BoundExceeded(pub usize);

/// Explicit reachability graph of a product, built breadth first.
#[derive(Debug, Clone)]
pub struct ReachabilityGraph {
    pub markings: Vec<Marking>,
    pub index: HashMap<Marking, usize>,
    /// `(from, to, cost)` per admitted firing.
    pub edges: Vec<(usize, usize, Cost)>,
    pub initial: usize,
    pub target: Option<usize>,
}

impl ReachabilityGraph {
    pub fn explore(sp: &SyncProduct, bound: usize) -> Result<ReachabilityGraph, BoundExceeded> {
        let start = sp.net().initial_marking().clone();
        let mut markings = vec![start.clone()];
        let mut index = HashMap::from([(start, 0usize)]);
        let mut edges = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (t, next) in sp.successors(&markings[i].clone()) {
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if markings.len() >= bound {
                            return Err(BoundExceeded(bound));
                        }
                        markings.push(next.clone());
                        index.insert(next, markings.len() - 1);
                        queue.push_back(markings.len() - 1);
                        markings.len() - 1
                    }
                };
                edges.push((i, j, sp.cost(t)));
            }
        }
        let target = index.get(sp.net().final_marking()).copied();
        Ok(ReachabilityGraph {
            markings,
            index,
            edges,
            initial: 0,
            target,
        })
    }

    /// Queue-based Bellman-Ford from `source` over edges oriented by
    /// `forward`.
    fn relax(&self, source: usize, forward: bool) -> Vec<Option<Cost>> {
        let n = self.markings.len();
        let mut adj: Vec<Vec<(usize, Cost)>> = vec![Vec::new(); n];
        for &(a, b, c) in &self.edges {
            if forward {
                adj[a].push((b, c));
            } else {
                adj[b].push((a, c));
            }
        }
        let mut dist: Vec<Option<Cost>> = vec![None; n];
        let mut queued = vec![false; n];
        dist[source] = Some(Cost::ZERO);
        let mut queue = VecDeque::from([source]);
        queued[source] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            let du = dist[u].expect("queued nodes have a distance");
            for &(v, c) in &adj[u] {
                let cand = du + c;
                if dist[v].is_none_or(|dv| cand < dv) {
                    dist[v] = Some(cand);
                    if !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        dist
    }

    pub fn distances_from_initial(&self) -> Vec<Option<Cost>> {
        self.relax(self.initial, true)
    }

    /// Minimum remaining cost from every marking to the final marking.
    pub fn distances_to_final(&self) -> Vec<Option<Cost>> {
        match self.target {
            Some(t) => self.relax(t, false),
            None => vec![None; self.markings.len()],
        }
    }
}

/// Exact optimum by exhaustive enumeration, `Ok(None)` if the final marking
/// is unreachable.
pub fn brute_force_optimal_cost(sp: &SyncProduct, bound: usize) -> Result<Option<Cost>, BoundExceeded> {
    let rg = ReachabilityGraph::explore(sp, bound)?;
    Ok(rg.target.and_then(|t| rg.distances_from_initial()[t]))
}
