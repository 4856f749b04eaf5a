//! Lane-parallel cell-pair sweep.
//!
//! One outer particle is interacted with `W` cached particles of the other
//! cell at a time. Distances for the whole block are evaluated together, a
//! lane mask selects the pairs inside the outer particle's cut-off, and the
//! masked contributions are summed into per-lane accumulators that are
//! reduced and written back to the particle once per outer iteration.
//!
//! Blocks are fixed-size arrays with a const lane count, which the compiler
//! lowers to vector instructions; the width is picked at run time from
//! 1, 4, 8 or 16.

use std::fmt;

use crate::cache::{build_pair_caches_into, CacheConfig, ParticleCache};
use crate::error::{Error, Result};
use crate::geometry::{Cell, CellPairDirection, PairKind, SortedProjection};
use crate::kernel::Kernel;
use crate::num::Real;
use crate::oracle::PairStatistics;
use crate::scalar::{compute_bounds_into, pseudo_verlet_scalar_observed, InteractionBounds};
use crate::trace::{Side, SweepObserver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaneWidth(usize);

impl LaneWidth {
    pub const W1: LaneWidth = LaneWidth(1);
    pub const W4: LaneWidth = LaneWidth(4);
    pub const W8: LaneWidth = LaneWidth(8);
    pub const W16: LaneWidth = LaneWidth(16);
    pub const ALL: [LaneWidth; 4] = [Self::W1, Self::W4, Self::W8, Self::W16];

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for LaneWidth {
    type Error = Error;

    fn try_from(w: usize) -> Result<Self> {
        match w {
            1 | 4 | 8 | 16 => Ok(LaneWidth(w)),
            _ => Err(Error::LaneWidth(w)),
        }
    }
}

impl fmt::Display for LaneWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `W` consecutive cache slots starting at a lane-aligned offset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaneBlock<S, const W: usize> {
    pub x: [S; W],
    pub y: [S; W],
    pub z: [S; W],
    pub h: [S; W],
    pub mass: [S; W],
}

#[inline(always)]
fn lanes<S: Copy, const W: usize>(v: &[S], offset: usize) -> &[S; W] {
    v[offset..offset + W].try_into().unwrap()
}

impl<S: Real, const W: usize> LaneBlock<S, W> {
    pub fn load(cache: &ParticleCache<S>, offset: usize) -> Self {
        assert_eq!(offset % W, 0, "lane block offset {offset} not aligned to {W}");
        Self {
            x: *lanes(&cache.x, offset),
            y: *lanes(&cache.y, offset),
            z: *lanes(&cache.z, offset),
            h: *lanes(&cache.h, offset),
            mass: *lanes(&cache.mass, offset),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LaneMask<const W: usize>(pub [bool; W]);

impl<const W: usize> LaneMask<W> {
    pub const NONE: Self = LaneMask([false; W]);
    pub const ALL: Self = LaneMask([true; W]);

    /// Lanes with `r2 < h2`.
    #[inline(always)]
    pub fn within<S: Real>(r2: &[S; W], h2: S) -> Self {
        let mut m = [false; W];
        for k in 0..W {
            m[k] = r2[k] < h2;
        }
        LaneMask(m)
    }

    #[inline(always)]
    pub fn any(&self) -> bool {
        self.0.iter().fold(false, |acc, &m| acc | m)
    }

    #[inline(always)]
    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&m| m).count()
    }
}

/// Per-lane partial sums for one outer particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaneAccumulator<S, const W: usize> {
    pub rho: [S; W],
    pub wcount: [S; W],
}

impl<S: Real, const W: usize> Default for LaneAccumulator<S, W> {
    fn default() -> Self {
        Self { rho: [S::zero(); W], wcount: [S::zero(); W] }
    }
}

/// Pairwise tree sum: lane k absorbs lane k + n/2, then halve n.
#[inline(always)]
fn tree_sum<S: Real, const W: usize>(mut v: [S; W]) -> S {
    let mut n = W;
    while n > 1 {
        n /= 2;
        for k in 0..n {
            v[k] += v[k + n];
        }
    }
    v[0]
}

impl<S: Real, const W: usize> LaneAccumulator<S, W> {
    /// Horizontal `(rho, wcount)` sums, in a fixed order for a given width.
    #[inline(always)]
    pub fn reduce(&self) -> (S, S) {
        (tree_sum(self.rho), tree_sum(self.wcount))
    }
}

#[inline(always)]
fn r2_block<S: Real, const W: usize>(xi: S, yi: S, zi: S, x: &[S; W], y: &[S; W], z: &[S; W]) -> [S; W] {
    let mut r2 = [S::zero(); W];
    for k in 0..W {
        let dx = xi - x[k];
        let dy = yi - y[k];
        let dz = zi - z[k];
        r2[k] = dx * dx + dy * dy + dz * dz;
    }
    r2
}

#[inline(always)]
fn accumulate_masked<S: Real, K: Kernel, const W: usize>(
    kernel: &K,
    h_inv: S,
    r2: &[S; W],
    mass: &[S; W],
    mask: &LaneMask<W>,
    acc: &mut LaneAccumulator<S, W>,
) {
    for k in 0..W {
        let w = kernel.weight(r2[k].sqrt() * h_inv);
        let w = if mask.0[k] { w } else { S::zero() };
        acc.rho[k] += mass[k] * w;
        acc.wcount[k] += w;
    }
}

/// [`accumulate_masked`] with the mask `r2 < h2` applied lane by lane as a
/// select. Returns the number of lanes inside.
///
/// Kept out of line: inlined into the sweep, the block body is no longer
/// vectorised at W = 4 and 8 and the select turns into a per-lane branch
/// around the square root.
#[inline(never)]
fn accumulate_within<S: Real, K: Kernel, const W: usize>(
    kernel: &K,
    h_inv: S,
    h2: S,
    r2: &[S; W],
    mass: &[S; W],
    acc: &mut LaneAccumulator<S, W>,
) -> usize {
    let mut inside = 0u32;
    for k in 0..W {
        let within = r2[k] < h2;
        let w = kernel.weight_in_support(r2[k].sqrt() * h_inv);
        let w = if within { w } else { S::zero() };
        acc.rho[k] += mass[k] * w;
        acc.wcount[k] += w;
        inside += within as u32;
    }
    inside as usize
}

/// Squared distances from slot `i` of `cache_a` to the block of `cache_b`
/// starting at `j_block`.
#[inline]
pub fn particle_r2_bulk<S: Real, const W: usize>(
    cache_a: &ParticleCache<S>,
    i: usize,
    cache_b: &ParticleCache<S>,
    j_block: usize,
) -> [S; W] {
    debug_assert_eq!(j_block % W, 0);
    r2_block(
        cache_a.x[i],
        cache_a.y[i],
        cache_a.z[i],
        lanes(&cache_b.x, j_block),
        lanes(&cache_b.y, j_block),
        lanes(&cache_b.z, j_block),
    )
}

/// Pairwise distances from slot `i` of `cache_a` to the lane block of
/// `cache_b` starting at `j_block`.
pub fn particle_dist_bulk<S: Real, const W: usize>(
    cache_a: &ParticleCache<S>,
    i: usize,
    cache_b: &ParticleCache<S>,
    j_block: usize,
) -> [S; W] {
    particle_r2_bulk::<S, W>(cache_a, i, cache_b, j_block).map(|r2| r2.sqrt())
}

/// Masked accumulation of the block at `j_block` onto slot `i`'s accumulator.
pub fn interact_bulk<S: Real, K: Kernel, const W: usize>(
    kernel: &K,
    cache_a: &ParticleCache<S>,
    i: usize,
    cache_b: &ParticleCache<S>,
    j_block: usize,
    mask: &LaneMask<W>,
    acc: &mut LaneAccumulator<S, W>,
) {
    let r2 = particle_r2_bulk::<S, W>(cache_a, i, cache_b, j_block);
    let h_inv = S::one() / cache_a.h[i];
    accumulate_masked(kernel, h_inv, &r2, lanes(&cache_b.mass, j_block), mask, acc);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepPath {
    Lanes(LaneWidth),
    /// Corner pairs, handled by the scalar pseudo-Verlet sweep.
    Scalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LaneStatistics {
    /// Real (non-padding) lanes evaluated and lanes that passed the mask.
    pub pairs: PairStatistics,
    /// Accumulator write-backs, one per outer particle visited.
    pub flushes: u64,
    pub path: SweepPath,
}

/// Cache and loop-bound storage reused across cell pairs.
#[derive(Clone, Debug)]
pub struct LaneWorkspace<S> {
    caches: (ParticleCache<S>, ParticleCache<S>),
    bounds: InteractionBounds,
}

impl<S: Real> Default for LaneWorkspace<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Real> LaneWorkspace<S> {
    pub fn new() -> Self {
        Self { caches: (ParticleCache::default(), ParticleCache::default()), bounds: InteractionBounds::default() }
    }

    /// Loop bounds of the most recent lane sweep.
    pub fn bounds(&self) -> &InteractionBounds {
        &self.bounds
    }

    /// Caches of the most recent lane sweep.
    pub fn caches(&self) -> (&ParticleCache<S>, &ParticleCache<S>) {
        (&self.caches.0, &self.caches.1)
    }
}

/// Full lane-parallel sweep of a sorted cell pair along `direction`:
/// loop bounds, caches, then the masked double loop in both directions.
/// Corner pairs are dispatched to the scalar pseudo-Verlet sweep.
pub fn pair_interact_vectorised<T: Real, S: Real, K: Kernel>(
    kernel: &K,
    cell_a: &mut Cell<T>,
    cell_b: &mut Cell<T>,
    direction: &CellPairDirection<T>,
    sp_a: &SortedProjection<T>,
    sp_b: &SortedProjection<T>,
    config: &CacheConfig,
) -> Result<LaneStatistics> {
    let mut ws = LaneWorkspace::<S>::new();
    pair_interact_vectorised_observed(kernel, cell_a, cell_b, direction, sp_a, sp_b, config, &mut ws, &mut ())
}

/// [`pair_interact_vectorised`] with caller-owned cache storage.
#[allow(clippy::too_many_arguments)]
pub fn pair_interact_vectorised_in<T: Real, S: Real, K: Kernel>(
    kernel: &K,
    cell_a: &mut Cell<T>,
    cell_b: &mut Cell<T>,
    direction: &CellPairDirection<T>,
    sp_a: &SortedProjection<T>,
    sp_b: &SortedProjection<T>,
    config: &CacheConfig,
    ws: &mut LaneWorkspace<S>,
) -> Result<LaneStatistics> {
    pair_interact_vectorised_observed(kernel, cell_a, cell_b, direction, sp_a, sp_b, config, ws, &mut ())
}

#[allow(clippy::too_many_arguments)]
pub fn pair_interact_vectorised_observed<T: Real, S: Real, K: Kernel, O: SweepObserver>(
    kernel: &K,
    cell_a: &mut Cell<T>,
    cell_b: &mut Cell<T>,
    direction: &CellPairDirection<T>,
    sp_a: &SortedProjection<T>,
    sp_b: &SortedProjection<T>,
    config: &CacheConfig,
    ws: &mut LaneWorkspace<S>,
    obs: &mut O,
) -> Result<LaneStatistics> {
    if direction.kind == PairKind::Corner {
        let pairs = pseudo_verlet_scalar_observed(kernel, cell_a, cell_b, sp_a, sp_b, obs);
        let flushes = (sp_a.len() + sp_b.len()) as u64;
        return Ok(LaneStatistics { pairs, flushes, path: SweepPath::Scalar });
    }
    compute_bounds_into(&mut ws.bounds, cell_a, cell_b, sp_a, sp_b);
    build_pair_caches_into(&mut ws.caches, cell_a, cell_b, sp_a, sp_b, &ws.bounds, config)?;
    let mut stats =
        LaneStatistics { pairs: PairStatistics::default(), flushes: 0, path: SweepPath::Lanes(config.width) };
    let sweep = Sweep { kernel, bounds: &ws.bounds, cache_a: &ws.caches.0, cache_b: &ws.caches.1 };
    match config.width.get() {
        1 => sweep.run::<T, O, 1>(cell_a, cell_b, obs, &mut stats),
        4 => sweep.run::<T, O, 4>(cell_a, cell_b, obs, &mut stats),
        8 => sweep.run::<T, O, 8>(cell_a, cell_b, obs, &mut stats),
        16 => sweep.run::<T, O, 16>(cell_a, cell_b, obs, &mut stats),
        w => unreachable!("LaneWidth({w}) cannot be constructed"),
    }
    Ok(stats)
}

struct Sweep<'a, S, K> {
    kernel: &'a K,
    bounds: &'a InteractionBounds,
    cache_a: &'a ParticleCache<S>,
    cache_b: &'a ParticleCache<S>,
}

impl<S: Real, K: Kernel> Sweep<'_, S, K> {
    fn run<T: Real, O: SweepObserver, const W: usize>(
        &self,
        cell_a: &mut Cell<T>,
        cell_b: &mut Cell<T>,
        obs: &mut O,
        stats: &mut LaneStatistics,
    ) {
        let bounds = self.bounds;
        let count_a = self.cache_a.first_sorted + self.cache_a.logical_count();

        // (a) <- (b): outer particles from the interface backwards, inner
        // blocks from the start of (b) up to the padded max_index_a[i].
        let parts_a = cell_a.particles_mut();
        for i in (bounds.first_a..count_a).rev() {
            obs.outer(Side::A, i);
            let slot = i - self.cache_a.first_sorted;
            let end = (bounds.max_index_a(i) + 1).next_multiple_of(W);
            let (rho, wcount) = self.outer::<O, W>(Side::A, self.cache_a, slot, self.cache_b, 0, end, obs, stats);
            let p = &mut parts_a[self.cache_a.src_index[slot]];
            p.rho += rho.cast();
            p.wcount += wcount.cast();
            stats.flushes += 1;
            obs.flush(Side::A, self.cache_a.src_index[slot]);
        }

        // (b) <- (a): mirror image, starting at the lane block holding
        // min_index_b[j] and running to the end of the (a) cache.
        let parts_b = cell_b.particles_mut();
        for j in 0..bounds.b_end {
            obs.outer(Side::B, j);
            let lo = bounds.min_index_b(j) - self.cache_a.first_sorted;
            let start = lo - lo % W;
            let end = self.cache_a.padded_count();
            let (rho, wcount) = self.outer::<O, W>(Side::B, self.cache_b, j, self.cache_a, start, end, obs, stats);
            let p = &mut parts_b[self.cache_b.src_index[j]];
            p.rho += rho.cast();
            p.wcount += wcount.cast();
            stats.flushes += 1;
            obs.flush(Side::B, self.cache_b.src_index[j]);
        }
    }

    /// Interact slot `slot` of `outer` with inner blocks `start..end`.
    #[allow(clippy::too_many_arguments)]
    #[inline(always)]
    fn outer<O: SweepObserver, const W: usize>(
        &self,
        side: Side,
        outer: &ParticleCache<S>,
        slot: usize,
        inner: &ParticleCache<S>,
        start: usize,
        end: usize,
        obs: &mut O,
        stats: &mut LaneStatistics,
    ) -> (S, S) {
        let (xi, yi, zi) = (outer.x[slot], outer.y[slot], outer.z[slot]);
        let hi = outer.h[slot];
        let h2 = hi * hi;
        let h_inv = S::one() / hi;
        let real = inner.logical_count();
        let mut acc = LaneAccumulator::<S, W>::default();
        let mut inspected = 0;
        let mut hits = 0;
        for jb in (start..end).step_by(W) {
            let r2 = r2_block(xi, yi, zi, lanes(&inner.x, jb), lanes(&inner.y, jb), lanes(&inner.z, jb));
            inspected += W.min(real.saturating_sub(jb));
            let mut any = false;
            for r2 in r2 {
                any |= r2 < h2;
            }
            if any {
                hits += accumulate_within(self.kernel, h_inv, h2, &r2, lanes(&inner.mass, jb), &mut acc);
                if O::ENABLED {
                    let mask = LaneMask::within(&r2, h2);
                    for (k, _) in mask.0.iter().enumerate().filter(|(_, &m)| m) {
                        obs.hit(side, outer.src_index[slot], inner.src_index[jb + k]);
                    }
                }
            }
        }
        stats.pairs.inspected += inspected as u64;
        stats.pairs.in_range += hits as u64;
        acc.reduce()
    }
}
