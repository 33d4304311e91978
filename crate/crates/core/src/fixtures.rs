//! Small reference models and traces used by tests, docs and the CLI demo.

use crate::net::{NetBuilder, PetriNet};
use crate::trace::{Trace, TraceEvent};

/// Two ways to run `S, A, B, C`: a concurrent branch (t1..t4) where A and B
/// run in parallel, and a sequential branch (t5..t8).
pub fn concurrent_choice_model() -> PetriNet {
    let mut b = NetBuilder::new();
    let p1 = b.place("p1");
    let p2a = b.place("p2a");
    let p2b = b.place("p2b");
    let p3a = b.place("p3a");
    let p3b = b.place("p3b");
    let p4 = b.place("p4");
    let ps = b.place("pS");
    let p5 = b.place("p5");
    let pb = b.place("pB");

    let t1 = b.labeled("t1", "S");
    b.input(p1, t1).output(t1, p2a).output(t1, p2b);
    let t2 = b.labeled("t2", "A");
    b.input(p2a, t2).output(t2, p3a);
    let t3 = b.labeled("t3", "B");
    b.input(p2b, t3).output(t3, p3b);
    let t4 = b.labeled("t4", "C");
    b.input(p3a, t4).input(p3b, t4).output(t4, p4);

    let t5 = b.labeled("t5", "S");
    b.input(p1, t5).output(t5, ps);
    let t6 = b.labeled("t6", "A");
    b.input(ps, t6).output(t6, p5);
    let t7 = b.labeled("t7", "B");
    b.input(p5, t7).output(t7, pb);
    let t8 = b.labeled("t8", "C");
    b.input(pb, t8).output(t8, p4);

    b.initial(p1, 1).final_tokens(p4, 1);
    b.build().expect("fixture is well formed")
}

/// `S < A`, `S < B`, `A < C`, `B < C`.
pub fn concurrent_trace() -> Trace {
    let events = ["S", "A", "B", "C"]
        .iter()
        .enumerate()
        .map(|(i, a)| TraceEvent {
            id: format!("e{}", i + 1),
            activity: a.to_string(),
        })
        .collect();
    let order = [("e1", "e2"), ("e1", "e3"), ("e2", "e4"), ("e3", "e4")]
        .map(|(x, y)| (x.to_string(), y.to_string()));
    Trace::partial_order(events, &order).expect("fixture order is acyclic")
}

/// Housing application: `MakeBk`, then `SubmitPD` and `SubmitPoE` in
/// parallel between a silent split and join, then `AwaitC` and `Sign`.
pub fn housing_model() -> PetriNet {
    let mut b = NetBuilder::new();
    let start = b.place("start");
    let booked = b.place("booked");
    let pd_in = b.place("pd_in");
    let poe_in = b.place("poe_in");
    let pd_out = b.place("pd_out");
    let poe_out = b.place("poe_out");
    let joined = b.place("joined");
    let awaited = b.place("awaited");
    let end = b.place("end");

    let make = b.labeled("make_bk", "MakeBk");
    b.input(start, make).output(make, booked);
    let split = b.silent("split");
    b.input(booked, split).output(split, pd_in).output(split, poe_in);
    let pd = b.labeled("submit_pd", "SubmitPD");
    b.input(pd_in, pd).output(pd, pd_out);
    let poe = b.labeled("submit_poe", "SubmitPoE");
    b.input(poe_in, poe).output(poe, poe_out);
    let join = b.silent("join");
    b.input(pd_out, join).input(poe_out, join).output(join, joined);
    let await_c = b.labeled("await_c", "AwaitC");
    b.input(joined, await_c).output(await_c, awaited);
    let sign = b.labeled("sign", "Sign");
    b.input(awaited, sign).output(sign, end);

    b.initial(start, 1).final_tokens(end, 1);
    b.build().expect("fixture is well formed")
}

/// `MakeBk, SubmitPD, AwaitC, Sign`: misses `SubmitPoE`.
pub fn housing_trace() -> Trace {
    Trace::sequence(&["MakeBk", "SubmitPD", "AwaitC", "Sign"])
}

/// Unbounded but easy sound: `SubmitPD` keeps its input token and adds one
/// to `pool`; `MakeBk` moves a pool token to `done`. Final marking is
/// `start + done`.
pub fn token_generator_model() -> PetriNet {
    let mut b = NetBuilder::new();
    let start = b.place("start");
    let pool = b.place("pool");
    let done = b.place("done");
    let gen = b.labeled("submit_pd", "SubmitPD");
    b.input(start, gen).output(gen, start).output(gen, pool);
    let make = b.labeled("make_bk", "MakeBk");
    b.input(pool, make).output(make, done);
    b.initial(start, 1).final_tokens(start, 1).final_tokens(done, 1);
    b.build().expect("fixture is well formed")
}

pub fn token_generator_trace() -> Trace {
    Trace::sequence(&["SubmitPD", "MakeBk"])
}
