//! Double-precision reference sweeps over a cell pair: the naive all-pairs
//! loop, the sorted pseudo-Verlet loop, and the loop bounds used by the lane
//! engine to trim the pseudo-Verlet loop further.
//!
//! All pair sweeps are symmetric: one call accumulates (a) <- (b) and
//! (b) <- (a). Cell (a) must be the lower cell along the pair axis.

use crate::geometry::{Cell, SortedProjection};
use crate::kernel::{accumulate, Kernel};
use crate::num::{dist2, Real};
use crate::oracle::PairStatistics;
use crate::trace::{Side, SweepObserver};

/// Loop limits for one cell pair, in sorted order of both cells.
///
/// Entries of `max_index_a` belong to sorted positions `first_a..count_a`;
/// entries of `min_index_b` to sorted positions `0..b_end`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InteractionBounds {
    pub first_a: usize,
    pub max_index_a: Vec<usize>,
    /// One past `last_b`.
    pub b_end: usize,
    pub min_index_b: Vec<usize>,
}

impl InteractionBounds {
    /// Farthest candidate in (b) for sorted particle `i >= first_a` of (a).
    #[inline]
    pub fn max_index_a(&self, i: usize) -> usize {
        self.max_index_a[i - self.first_a]
    }

    /// Nearest candidate in (a) for sorted particle `j < b_end` of (b).
    #[inline]
    pub fn min_index_b(&self, j: usize) -> usize {
        self.min_index_b[j]
    }

    /// Last particle of (b) that can reach into (a), if any.
    pub fn last_b(&self) -> Option<usize> {
        self.b_end.checked_sub(1)
    }
}

/// Naive symmetric sweep over all `count_a * count_b` pairs in both directions.
pub fn naive_pair<T: Real, K: Kernel>(kernel: &K, cell_a: &mut Cell<T>, cell_b: &mut Cell<T>) -> PairStatistics {
    naive_pair_observed(kernel, cell_a, cell_b, &mut ())
}

pub fn naive_pair_observed<T: Real, K: Kernel, O: SweepObserver>(
    kernel: &K,
    cell_a: &mut Cell<T>,
    cell_b: &mut Cell<T>,
    obs: &mut O,
) -> PairStatistics {
    let mut stats = PairStatistics::default();
    naive_half(kernel, cell_a, cell_b, Side::A, &mut stats, obs);
    naive_half(kernel, cell_b, cell_a, Side::B, &mut stats, obs);
    stats
}

fn naive_half<T: Real, K: Kernel, O: SweepObserver>(
    kernel: &K,
    receivers: &mut Cell<T>,
    sources: &Cell<T>,
    side: Side,
    stats: &mut PairStatistics,
    obs: &mut O,
) {
    let sources = sources.particles();
    for (i, pi) in receivers.particles_mut().iter_mut().enumerate() {
        let h2 = pi.h * pi.h;
        for (j, pj) in sources.iter().enumerate() {
            stats.inspected += 1;
            let r2 = dist2(pi.pos, pj.pos);
            if r2 < h2 {
                accumulate(kernel, pi, pj.mass, r2);
                stats.in_range += 1;
                obs.hit(side, i, j);
            }
        }
    }
}

/// All ordered pairs within one cell, excluding self-pairs.
pub fn self_interact<T: Real, K: Kernel>(kernel: &K, cell: &mut Cell<T>) -> PairStatistics {
    let mut stats = PairStatistics::default();
    let parts = cell.particles_mut();
    for i in 0..parts.len() {
        let (pos, h) = (parts[i].pos, parts[i].h);
        let h2 = h * h;
        for j in 0..parts.len() {
            if i == j {
                continue;
            }
            stats.inspected += 1;
            let r2 = dist2(pos, parts[j].pos);
            if r2 < h2 {
                let mass = parts[j].mass;
                accumulate(kernel, &mut parts[i], mass, r2);
                stats.in_range += 1;
            }
        }
    }
    stats
}

/// Sorted sweep: for each particle of (a), scan (b) from the interface while
/// the axial gap is below the particle's own cut-off; mirrored for (b).
pub fn pseudo_verlet_scalar<T: Real, K: Kernel>(
    kernel: &K,
    cell_a: &mut Cell<T>,
    cell_b: &mut Cell<T>,
    sp_a: &SortedProjection<T>,
    sp_b: &SortedProjection<T>,
) -> PairStatistics {
    pseudo_verlet_scalar_observed(kernel, cell_a, cell_b, sp_a, sp_b, &mut ())
}

pub fn pseudo_verlet_scalar_observed<T: Real, K: Kernel, O: SweepObserver>(
    kernel: &K,
    cell_a: &mut Cell<T>,
    cell_b: &mut Cell<T>,
    sp_a: &SortedProjection<T>,
    sp_b: &SortedProjection<T>,
    obs: &mut O,
) -> PairStatistics {
    debug_assert_eq!(sp_a.len(), cell_a.len());
    debug_assert_eq!(sp_b.len(), cell_b.len());
    let mut stats = PairStatistics::default();
    let (count_a, count_b) = (sp_a.len(), sp_b.len());

    {
        let parts_b = cell_b.particles();
        let parts_a = cell_a.particles_mut();
        for i in 0..count_a {
            obs.outer(Side::A, i);
            let pi = &mut parts_a[sp_a.index[i]];
            let limit = sp_a.dist[i] + pi.h;
            let h2 = pi.h * pi.h;
            let mut j = 0;
            while j < count_b && sp_b.dist[j] < limit {
                let pj = &parts_b[sp_b.index[j]];
                stats.inspected += 1;
                let r2 = dist2(pi.pos, pj.pos);
                if r2 < h2 {
                    accumulate(kernel, pi, pj.mass, r2);
                    stats.in_range += 1;
                    obs.hit(Side::A, sp_a.index[i], sp_b.index[j]);
                }
                j += 1;
            }
        }
    }

    let parts_a = cell_a.particles();
    let parts_b = cell_b.particles_mut();
    for j in (0..count_b).rev() {
        obs.outer(Side::B, j);
        let pj = &mut parts_b[sp_b.index[j]];
        let limit = sp_b.dist[j] - pj.h;
        let h2 = pj.h * pj.h;
        let mut i = count_a;
        while i > 0 && sp_a.dist[i - 1] > limit {
            i -= 1;
            let pi = &parts_a[sp_a.index[i]];
            stats.inspected += 1;
            let r2 = dist2(pj.pos, pi.pos);
            if r2 < h2 {
                accumulate(kernel, pj, pi.mass, r2);
                stats.in_range += 1;
                obs.hit(Side::B, sp_b.index[j], sp_a.index[i]);
            }
        }
    }
    stats
}

/// Leftmost sorted particle of (a) that can reach the first particle of (b),
/// by a backward scan from the interface. Returns `count_a` when none can.
pub fn compute_first_a<T: Real>(dist_a: &[T], h_max_a: T, dist_b_0: T) -> usize {
    let mut first_a = dist_a.len();
    while first_a > 0 && dist_a[first_a - 1] + h_max_a > dist_b_0 {
        first_a -= 1;
    }
    first_a
}

/// For each sorted particle `i >= first_a` of (a), an upper bound on the
/// sorted index of its farthest possible neighbour in (b).
///
/// One forward pass; each search resumes where the previous one stopped, so
/// the result is non-decreasing and may overshoot the exact bound.
/// `h_a` holds the cut-offs of (a) in sorted order.
pub fn compute_max_index_a<T: Real>(dist_a: &[T], h_a: &[T], dist_b: &[T], first_a: usize) -> Vec<usize> {
    let mut out = Vec::new();
    max_index_a_into(&mut out, dist_a, |i| h_a[i], dist_b, first_a);
    out
}

fn max_index_a_into<T: Real>(
    out: &mut Vec<usize>,
    dist_a: &[T],
    h_a: impl Fn(usize) -> T,
    dist_b: &[T],
    first_a: usize,
) {
    out.clear();
    let count_a = dist_a.len();
    let count_b = dist_b.len();
    if first_a >= count_a || count_b == 0 {
        return;
    }
    let mut temp = 0;
    for i in first_a..count_a {
        let limit = dist_a[i] + h_a(i);
        while temp < count_b - 1 && limit > dist_b[temp] {
            temp += 1;
        }
        out.push(temp);
    }
}

/// Mirror of [`compute_first_a`] and [`compute_max_index_a`] for the
/// (b) <- (a) direction. Returns `(b_end, min_index_b)` where `b_end` is one
/// past `last_b` and `min_index_b[j]` lower-bounds the sorted index in (a) of
/// any neighbour of sorted particle `j` of (b).
pub fn compute_bounds_b<T: Real>(dist_b: &[T], h_b: &[T], h_max_b: T, dist_a: &[T]) -> (usize, Vec<usize>) {
    let mut out = Vec::new();
    let b_end = bounds_b_into(&mut out, dist_b, |j| h_b[j], h_max_b, dist_a);
    (b_end, out)
}

fn bounds_b_into<T: Real>(
    out: &mut Vec<usize>,
    dist_b: &[T],
    h_b: impl Fn(usize) -> T,
    h_max_b: T,
    dist_a: &[T],
) -> usize {
    out.clear();
    let count_a = dist_a.len();
    let count_b = dist_b.len();
    if count_a == 0 {
        return 0;
    }
    let top_a = dist_a[count_a - 1];
    let mut b_end = 0;
    while b_end < count_b && dist_b[b_end] - h_max_b < top_a {
        b_end += 1;
    }
    out.resize(b_end, 0);
    let mut temp = count_a - 1;
    for j in (0..b_end).rev() {
        let limit = dist_b[j] - h_b(j);
        while temp > 0 && limit < dist_a[temp] {
            temp -= 1;
        }
        out[j] = temp;
    }
    b_end
}

/// All four bounds for a sorted cell pair.
pub fn compute_bounds<T: Real>(
    cell_a: &Cell<T>,
    cell_b: &Cell<T>,
    sp_a: &SortedProjection<T>,
    sp_b: &SortedProjection<T>,
) -> InteractionBounds {
    let mut bounds = InteractionBounds::default();
    compute_bounds_into(&mut bounds, cell_a, cell_b, sp_a, sp_b);
    bounds
}

/// [`compute_bounds`] reusing the storage of `bounds`.
pub fn compute_bounds_into<T: Real>(
    bounds: &mut InteractionBounds,
    cell_a: &Cell<T>,
    cell_b: &Cell<T>,
    sp_a: &SortedProjection<T>,
    sp_b: &SortedProjection<T>,
) {
    bounds.max_index_a.clear();
    bounds.min_index_b.clear();
    bounds.b_end = 0;
    bounds.first_a = sp_a.len();
    if sp_a.is_empty() || sp_b.is_empty() {
        return;
    }
    let (pa, pb) = (cell_a.particles(), cell_b.particles());
    bounds.first_a = compute_first_a(&sp_a.dist, cell_a.h_max(), sp_b.dist[0]);
    max_index_a_into(&mut bounds.max_index_a, &sp_a.dist, |i| pa[sp_a.index[i]].h, &sp_b.dist, bounds.first_a);
    bounds.b_end =
        bounds_b_into(&mut bounds.min_index_b, &sp_b.dist, |j| pb[sp_b.index[j]].h, cell_b.h_max(), &sp_a.dist);
}
