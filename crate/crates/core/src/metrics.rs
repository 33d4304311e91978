//! Per-run measurements and wall-clock budgets.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::cost::Cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    FoldN,
    FoldH,
    Dijkstra,
    AStar,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::FoldN, Variant::FoldH, Variant::Dijkstra, Variant::AStar];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::FoldN => "foldn",
            Variant::FoldH => "foldh",
            Variant::Dijkstra => "dijkstra",
            Variant::AStar => "astar",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown variant `{0}` (expected foldn, foldh, dijkstra or astar)")]
pub struct ParseVariantError(String);

impl FromStr for Variant {
    type Err = ParseVariantError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "foldn" => Ok(Variant::FoldN),
            "foldh" => Ok(Variant::FoldH),
            "dijkstra" => Ok(Variant::Dijkstra),
            "astar" => Ok(Variant::AStar),
            _ => Err(ParseVariantError(s.to_string())),
        }
    }
}

/// Counters for one alignment run.
///
/// For the unfolding, `queued` counts candidate events pushed to the priority
/// queue and `visited` counts events appended to the branching process. For
/// the sequential searches, `queued` counts heap pushes and `visited` counts
/// distinct markings popped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMetrics {
    pub variant: Variant,
    pub elapsed: Duration,
    pub queued: u64,
    pub visited: u64,
    /// `None` when no alignment was found.
    pub cost: Option<Cost>,
    pub trace_length: usize,
    pub spt: usize,
    pub timed_out: bool,
}

impl RunMetrics {
    pub fn new(variant: Variant, trace_length: usize, spt: usize) -> RunMetrics {
        RunMetrics {
            variant,
            elapsed: Duration::ZERO,
            queued: 0,
            visited: 0,
            cost: None,
            trace_length,
            spt,
            timed_out: false,
        }
    }
}

/// Wall-clock budget; `None` means unlimited.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    start: Instant,
    limit: Option<Duration>,
}

impl Deadline {
    pub fn start(limit: Option<Duration>) -> Deadline {
        Deadline {
            start: Instant::now(),
            limit,
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn expired(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() >= l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("bfs".parse::<Variant>().is_err());
    }

    #[test]
    fn zero_budget_expires_immediately() {
        assert!(Deadline::start(Some(Duration::ZERO)).expired());
        assert!(!Deadline::start(None).expired());
    }
}
