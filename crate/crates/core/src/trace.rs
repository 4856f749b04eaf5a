//! Hooks for watching a sweep: which outer particles were visited, which
//! pairs interacted and when lane sums were flushed.

use std::collections::BTreeSet;

/// The cell of the receiving particle in a cell-pair sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

/// Observer of sweep events. Indices are cell-local particle indices except
/// for [`SweepObserver::outer`], which reports positions in sorted order.
///
/// `()` ignores everything and compiles away.
pub trait SweepObserver {
    const ENABLED: bool = true;

    fn outer(&mut self, _side: Side, _sorted: usize) {}

    fn hit(&mut self, _side: Side, _receiver: usize, _source: usize) {}

    fn flush(&mut self, _side: Side, _receiver: usize) {}
}

impl SweepObserver for () {
    const ENABLED: bool = false;
}

/// Collects interacting pairs as `(receiver id, source id)`.
#[derive(Clone, Debug, Default)]
pub struct PairRecorder {
    ids_a: Vec<u64>,
    ids_b: Vec<u64>,
    pub pairs: BTreeSet<(u64, u64)>,
}

impl PairRecorder {
    pub fn new(ids_a: Vec<u64>, ids_b: Vec<u64>) -> Self {
        Self { ids_a, ids_b, pairs: BTreeSet::new() }
    }
}

impl SweepObserver for PairRecorder {
    fn hit(&mut self, side: Side, receiver: usize, source: usize) {
        let pair = match side {
            Side::A => (self.ids_a[receiver], self.ids_b[source]),
            Side::B => (self.ids_b[receiver], self.ids_a[source]),
        };
        self.pairs.insert(pair);
    }
}

/// Records the raw event sequence.
#[derive(Clone, Debug, Default)]
pub struct EventLog {
    pub outer: Vec<(Side, usize)>,
    pub hits: Vec<(Side, usize, usize)>,
    pub flushes: Vec<(Side, usize)>,
}

impl SweepObserver for EventLog {
    fn outer(&mut self, side: Side, sorted: usize) {
        self.outer.push((side, sorted));
    }

    fn hit(&mut self, side: Side, receiver: usize, source: usize) {
        self.hits.push((side, receiver, source));
    }

    fn flush(&mut self, side: Side, receiver: usize) {
        self.flushes.push((side, receiver));
    }
}
