//! Observed traces and their event nets.

use std::collections::HashMap;

use crate::net::{NetBuilder, PetriNet};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("event order contains a cycle")]
    CyclicOrder,
    #[error("order edge references unknown event `{0}`")]
    UnknownEvent(String),
    #[error("duplicate event id `{0}`")]
    DuplicateEvent(String),
    #[error("event `{0}` has an empty activity name")]
    EmptyActivity(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceEvent {
    pub id: String,
    pub activity: String,
}

/// A trace: events plus a strict partial order over them. Sequential traces
/// carry the chain order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trace {
    events: Vec<TraceEvent>,
    /// Transitive reduction of the order, as event index pairs.
    edges: Vec<(usize, usize)>,
    sequential: bool,
}

impl Trace {
    pub fn sequence<S: AsRef<str>>(activities: &[S]) -> Trace {
        let events = activities
            .iter()
            .enumerate()
            .map(|(i, a)| TraceEvent {
                id: format!("e{}", i + 1),
                activity: a.as_ref().to_string(),
            })
            .collect::<Vec<_>>();
        let edges = (1..events.len()).map(|i| (i - 1, i)).collect();
        Trace {
            events,
            edges,
            sequential: true,
        }
    }

    /// Builds a partial-order trace from events and ordering edges given by
    /// event id. The stored order is the transitive reduction of the input.
    pub fn partial_order(
        events: Vec<TraceEvent>,
        order: &[(String, String)],
    ) -> Result<Trace, TraceError> {
        let mut index = HashMap::new();
        for (i, e) in events.iter().enumerate() {
            if e.activity.is_empty() {
                return Err(TraceError::EmptyActivity(e.id.clone()));
            }
            if index.insert(e.id.clone(), i).is_some() {
                return Err(TraceError::DuplicateEvent(e.id.clone()));
            }
        }
        let mut raw = Vec::with_capacity(order.len());
        for (x, y) in order {
            let xi = *index.get(x).ok_or_else(|| TraceError::UnknownEvent(x.clone()))?;
            let yi = *index.get(y).ok_or_else(|| TraceError::UnknownEvent(y.clone()))?;
            raw.push((xi, yi));
        }
        let closure = transitive_closure(events.len(), &raw)?;
        let edges = transitive_reduction(&closure);
        Ok(Trace {
            events,
            edges,
            sequential: false,
        })
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn is_sequential(&self) -> bool {
        self.sequential
    }

    pub fn activities(&self) -> Vec<&str> {
        self.events.iter().map(|e| e.activity.as_str()).collect()
    }

    /// Covering edges of the order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `closure[x][y]` iff event `x` precedes event `y`.
    pub fn closure(&self) -> Vec<Vec<bool>> {
        transitive_closure(self.events.len(), &self.edges).expect("stored order is acyclic")
    }

    /// Removes one event, keeping the order among the remaining ones.
    pub fn without_event(&self, index: usize) -> Trace {
        if self.sequential {
            let mut acts = self.activities();
            acts.remove(index);
            return Trace::sequence(&acts);
        }
        let closure = self.closure();
        let keep: Vec<usize> = (0..self.len()).filter(|&i| i != index).collect();
        let events = keep.iter().map(|&i| self.events[i].clone()).collect();
        let mut order = Vec::new();
        for &x in &keep {
            for &y in &keep {
                if closure[x][y] {
                    order.push((self.events[x].id.clone(), self.events[y].id.clone()));
                }
            }
        }
        Trace::partial_order(events, &order).expect("sub-order of an acyclic order")
    }
}

fn transitive_closure(n: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<bool>>, TraceError> {
    let mut succ = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(x, y) in edges {
        succ[x].push(y);
        indeg[y] += 1;
    }
    let mut topo = Vec::with_capacity(n);
    let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    while let Some(x) = stack.pop() {
        topo.push(x);
        for &y in &succ[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                stack.push(y);
            }
        }
    }
    if topo.len() != n {
        return Err(TraceError::CyclicOrder);
    }
    let mut reach = vec![vec![false; n]; n];
    for &x in topo.iter().rev() {
        for &y in &succ[x] {
            reach[x][y] = true;
            let below = reach[y].clone();
            for (r, b) in reach[x].iter_mut().zip(below) {
                *r |= b;
            }
        }
    }
    Ok(reach)
}

fn transitive_reduction(closure: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let n = closure.len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if closure[x][y] && !(0..n).any(|z| closure[x][z] && closure[z][y]) {
                out.push((x, y));
            }
        }
    }
    out
}

/// The Petri-net encoding of a trace. Transition `i` is trace event `i`.
#[derive(Debug, Clone)]
pub struct EventNet {
    pub net: PetriNet,
    pub trace: Trace,
}

/// Encodes a trace as an event net: one transition per event, one place per
/// covering edge, an initial place in front of every minimal event and a final
/// place behind every maximal event. The empty trace becomes a single place
/// that is both initial and final.
pub fn build_event_net(trace: &Trace) -> EventNet {
    let mut b = NetBuilder::new();
    let n = trace.len();
    if n == 0 {
        let p = b.place("empty");
        b.initial(p, 1).final_tokens(p, 1);
        return EventNet {
            net: b.build().expect("event net is well formed"),
            trace: trace.clone(),
        };
    }
    let ts: Vec<_> = trace
        .events()
        .iter()
        .map(|e| b.labeled(e.id.clone(), &e.activity))
        .collect();
    let mut has_pred = vec![false; n];
    let mut has_succ = vec![false; n];
    for &(x, y) in trace.edges() {
        has_pred[y] = true;
        has_succ[x] = true;
    }
    for (i, e) in trace.events().iter().enumerate() {
        if !has_pred[i] {
            let p = b.place(format!("start:{}", e.id));
            b.initial(p, 1).input(p, ts[i]);
        }
    }
    for &(x, y) in trace.edges() {
        let p = b.place(format!("{}->{}", trace.events()[x].id, trace.events()[y].id));
        b.output(ts[x], p).input(p, ts[y]);
    }
    for (i, e) in trace.events().iter().enumerate() {
        if !has_succ[i] {
            let p = b.place(format!("end:{}", e.id));
            b.output(ts[i], p).final_tokens(p, 1);
        }
    }
    EventNet {
        net: b.build().expect("event net is well formed"),
        trace: trace.clone(),
    }
}
