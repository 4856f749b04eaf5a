//! Sorted structure-of-arrays particle caches for one cell pair.
//!
//! Positions are shifted by the centre of the cell pair (wrapped to the
//! minimum image when a periodic domain is configured) before being narrowed
//! to the cache scalar, which keeps the small pairwise differences exact to
//! within a few ulp. Each cache is padded to a multiple of the lane width with
//! sentinel slots placed far outside every cut-off.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::{Cell, SortedProjection};
use crate::lanes::LaneWidth;
use crate::num::{Real, Vec3};
use crate::scalar::InteractionBounds;

/// `src_index` value of a padding slot.
pub const SENTINEL_INDEX: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleCache<S> {
    pub x: Vec<S>,
    pub y: Vec<S>,
    pub z: Vec<S>,
    pub h: Vec<S>,
    pub mass: Vec<S>,
    /// Cell-local particle index of each slot.
    pub src_index: Vec<usize>,
    /// Sorted position of slot 0 within its cell.
    pub first_sorted: usize,
    logical_count: usize,
    sentinel: S,
}

impl<S: Real> Default for ParticleCache<S> {
    fn default() -> Self {
        Self::with_capacity(0, 0, S::zero())
    }
}

impl<S: Real> ParticleCache<S> {
    fn with_capacity(n: usize, first_sorted: usize, sentinel: S) -> Self {
        Self {
            x: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            z: Vec::with_capacity(n),
            h: Vec::with_capacity(n),
            mass: Vec::with_capacity(n),
            src_index: Vec::with_capacity(n),
            first_sorted,
            logical_count: 0,
            sentinel,
        }
    }

    /// Cache sorted positions `range` of `cell`, shifted by `centre`.
    pub fn fill<T: Real>(
        cell: &Cell<T>,
        sorted: &SortedProjection<T>,
        range: Range<usize>,
        centre: Vec3<T>,
        domain: Option<Vec3<T>>,
        sentinel: S,
    ) -> Self {
        let mut cache = Self::with_capacity(range.len(), range.start, sentinel);
        cache.refill(cell, sorted, range, centre, domain, sentinel);
        cache
    }

    /// [`ParticleCache::fill`] into existing storage.
    pub fn refill<T: Real>(
        &mut self,
        cell: &Cell<T>,
        sorted: &SortedProjection<T>,
        range: Range<usize>,
        centre: Vec3<T>,
        domain: Option<Vec3<T>>,
        sentinel: S,
    ) {
        self.clear();
        self.first_sorted = range.start;
        self.sentinel = sentinel;
        let idx = &sorted.index[range];
        let parts = cell.particles();
        let n = idx.len();
        for v in [&mut self.x, &mut self.y, &mut self.z, &mut self.h, &mut self.mass] {
            v.resize(n, S::zero());
        }
        self.src_index.extend_from_slice(idx);
        let (x, y, z) = (&mut self.x[..n], &mut self.y[..n], &mut self.z[..n]);
        let (h, mass) = (&mut self.h[..n], &mut self.mass[..n]);
        for (i, &k) in idx.iter().enumerate() {
            let p = &parts[k];
            let s = shift(p.pos, centre, domain);
            (x[i], y[i], z[i]) = (s[0].cast(), s[1].cast(), s[2].cast());
            (h[i], mass[i]) = (p.h.cast(), p.mass.cast());
        }
        self.logical_count = self.src_index.len();
    }

    fn clear(&mut self) {
        for v in [&mut self.x, &mut self.y, &mut self.z, &mut self.h, &mut self.mass] {
            v.clear();
        }
        self.src_index.clear();
        self.logical_count = 0;
    }

    /// Pad with sentinel slots up to the next multiple of `width`, dropping
    /// any earlier padding first.
    pub fn pad(&mut self, width: LaneWidth) {
        let n = self.logical_count;
        let padded = n.next_multiple_of(width.get());
        let s = self.sentinel;
        for (v, fill) in [
            (&mut self.x, s),
            (&mut self.y, s),
            (&mut self.z, s),
            (&mut self.h, S::zero()),
            (&mut self.mass, S::zero()),
        ] {
            v.truncate(n);
            v.resize(padded, fill);
        }
        self.src_index.truncate(n);
        self.src_index.resize(padded, SENTINEL_INDEX);
    }

    pub fn logical_count(&self) -> usize {
        self.logical_count
    }

    pub fn padded_count(&self) -> usize {
        self.src_index.len()
    }

    /// Coordinate used for every axis of a padding slot.
    pub fn sentinel(&self) -> S {
        self.sentinel
    }

    pub fn is_sentinel(&self, slot: usize) -> bool {
        slot >= self.logical_count
    }
}

/// `pos - centre`, wrapped to the nearest periodic image when `domain` is set.
pub fn shift<T: Real>(pos: Vec3<T>, centre: Vec3<T>, domain: Option<Vec3<T>>) -> Vec3<T> {
    let mut d = [pos[0] - centre[0], pos[1] - centre[1], pos[2] - centre[2]];
    if let Some(len) = domain {
        for k in 0..3 {
            d[k] = d[k] - len[k] * (d[k] / len[k]).round();
        }
    }
    d
}

/// Owned form of [`ParticleCache::pad`].
pub fn pad_to_lanes<S: Real>(mut cache: ParticleCache<S>, width: LaneWidth) -> ParticleCache<S> {
    cache.pad(width);
    cache
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheConfig {
    /// Largest cell the caches accept.
    pub capacity: usize,
    pub width: LaneWidth,
    /// Periodic box lengths; `None` for an open domain.
    pub domain: Option<[f64; 3]>,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self { capacity: 1 << 14, width: LaneWidth::W8, domain: None }
    }
}

/// Sorted ranges each side needs for both sweep directions: (a) a suffix
/// starting at `min(first_a, min_index_b[0])`, (b) a prefix ending at
/// `max(max_index_a[last] + 1, last_b + 1)`.
pub fn cached_ranges(bounds: &InteractionBounds, count_a: usize) -> (Range<usize>, Range<usize>) {
    let mut a_start = bounds.first_a.min(count_a);
    if let Some(&m) = bounds.min_index_b.first() {
        a_start = a_start.min(m);
    }
    let b_end = bounds.max_index_a.last().map_or(0, |&m| m + 1).max(bounds.b_end);
    (a_start..count_a, 0..b_end)
}

/// Build both caches for a sorted cell pair.
pub fn build_pair_caches<T: Real, S: Real>(
    cell_a: &Cell<T>,
    cell_b: &Cell<T>,
    sp_a: &SortedProjection<T>,
    sp_b: &SortedProjection<T>,
    bounds: &InteractionBounds,
    config: &CacheConfig,
) -> Result<(ParticleCache<S>, ParticleCache<S>)> {
    let mut caches = (ParticleCache::default(), ParticleCache::default());
    build_pair_caches_into(&mut caches, cell_a, cell_b, sp_a, sp_b, bounds, config)?;
    Ok(caches)
}

/// [`build_pair_caches`] reusing the storage of `caches`.
pub fn build_pair_caches_into<T: Real, S: Real>(
    caches: &mut (ParticleCache<S>, ParticleCache<S>),
    cell_a: &Cell<T>,
    cell_b: &Cell<T>,
    sp_a: &SortedProjection<T>,
    sp_b: &SortedProjection<T>,
    bounds: &InteractionBounds,
    config: &CacheConfig,
) -> Result<()> {
    for cell in [cell_a, cell_b] {
        if cell.len() > config.capacity {
            return Err(Error::CacheCapacity { count: cell.len(), capacity: config.capacity });
        }
    }
    let (ca, cb) = (cell_a.centre(), cell_b.centre());
    let two = T::lit(2.0);
    let centre = [(ca[0] + cb[0]) / two, (ca[1] + cb[1]) / two, (ca[2] + cb[2]) / two];
    let domain = config.domain.map(|d| d.map(T::lit));
    let edge = cell_a.edge().max(cell_b.edge());
    let sentinel: S = (two * edge + two * cell_a.h_max().max(cell_b.h_max())).cast();

    let (range_a, range_b) = cached_ranges(bounds, sp_a.len());
    caches.0.refill(cell_a, sp_a, range_a, centre, domain, sentinel);
    caches.1.refill(cell_b, sp_b, range_b, centre, domain, sentinel);
    caches.0.pad(config.width);
    caches.1.pad(config.width);
    Ok(())
}
