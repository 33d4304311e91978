//! Optimal partial-order alignments between Petri net models and traces.
//!
//! A trace and a model are combined into a synchronous product
//! ([`sync_product`]). The [`unfolding`] module builds its branching process
//! in cost order and stops at the first complete configuration, which is an
//! optimal alignment that keeps concurrency. [`baseline`] holds sequential
//! Dijkstra and A* aligners plus a brute-force oracle.

pub mod alignment;
pub mod baseline;
pub mod bench;
pub mod cost;
pub mod fixtures;
pub mod generator;
pub mod heuristic;
pub mod io;
pub mod metrics;
pub mod net;
pub mod sync_product;
pub mod trace;
pub mod unfolding;
