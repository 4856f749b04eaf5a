//! Cells, particles, the 13 canonical cell-pair directions and sorted axis
//! projections.

use std::fmt;

use crate::error::{Error, Result};
use crate::num::{dot, Real, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub struct Particle<T> {
    pub id: u64,
    pub pos: Vec3<T>,
    /// Cut-off radius.
    pub h: T,
    pub mass: T,
    /// Density accumulator.
    pub rho: T,
    /// Neighbour-weight accumulator.
    pub wcount: T,
}

impl<T: Real> Particle<T> {
    pub fn new(id: u64, pos: Vec3<T>, h: T, mass: T) -> Self {
        Self { id, pos, h, mass, rho: T::zero(), wcount: T::zero() }
    }

    pub fn reset(&mut self) {
        self.rho = T::zero();
        self.wcount = T::zero();
    }
}

/// A cubic cell of the cell list.
///
/// Construction checks that every particle lies in `[origin, origin + edge)`
/// and that `edge >= h_max`, so any particle's neighbours are confined to the
/// 26 adjacent cells.
#[derive(Clone, Debug)]
pub struct Cell<T> {
    origin: Vec3<T>,
    edge: T,
    h_max: T,
    particles: Vec<Particle<T>>,
}

impl<T: Real> Cell<T> {
    pub fn new(origin: Vec3<T>, edge: T, particles: Vec<Particle<T>>) -> Result<Self> {
        if !(edge > T::zero()) {
            return Err(Error::Config(format!("cell edge must be positive, got {edge}")));
        }
        let mut h_max = T::zero();
        for p in &particles {
            if !(p.h > T::zero()) {
                return Err(Error::InvalidParticle { id: p.id, reason: "cut-off must be positive" });
            }
            if !(p.mass > T::zero()) {
                return Err(Error::InvalidParticle { id: p.id, reason: "mass must be positive" });
            }
            let inside = (0..3).all(|k| p.pos[k] >= origin[k] && p.pos[k] < origin[k] + edge);
            if !inside {
                return Err(Error::OutsideCell { id: p.id });
            }
            h_max = h_max.max(p.h);
        }
        if edge < h_max {
            return Err(Error::CellTooSmall {
                edge: edge.to_f64().unwrap_or(f64::NAN),
                h_max: h_max.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { origin, edge, h_max, particles })
    }

    pub fn empty(origin: Vec3<T>, edge: T) -> Self {
        Self { origin, edge, h_max: T::zero(), particles: Vec::new() }
    }

    pub fn origin(&self) -> Vec3<T> {
        self.origin
    }

    pub fn edge(&self) -> T {
        self.edge
    }

    pub fn h_max(&self) -> T {
        self.h_max
    }

    pub fn centre(&self) -> Vec3<T> {
        let half = self.edge / T::lit(2.0);
        [self.origin[0] + half, self.origin[1] + half, self.origin[2] + half]
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle<T>] {
        &self.particles
    }

    /// Mutable access for accumulation. Callers must not move particles out
    /// of the cell.
    pub fn particles_mut(&mut self) -> &mut [Particle<T>] {
        &mut self.particles
    }

    pub fn reset_accumulators(&mut self) {
        self.particles.iter_mut().for_each(Particle::reset);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairKind {
    Corner,
    Edge,
    Face,
}

impl PairKind {
    pub const ALL: [PairKind; 3] = [PairKind::Corner, PairKind::Edge, PairKind::Face];

    fn from_nonzero(n: usize) -> Self {
        match n {
            1 => PairKind::Face,
            2 => PairKind::Edge,
            3 => PairKind::Corner,
            _ => unreachable!("offset must have 1..=3 nonzero components"),
        }
    }

    /// How many of the 26 neighbours of a cell have this orientation.
    pub fn multiplicity(self) -> usize {
        match self {
            PairKind::Corner => 8,
            PairKind::Edge => 12,
            PairKind::Face => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PairKind::Corner => "corner",
            PairKind::Edge => "edge",
            PairKind::Face => "face",
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the 13 symmetry-reduced neighbour offsets and its unit axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellPairDirection<T> {
    pub offset: [i32; 3],
    pub axis: Vec3<T>,
    pub kind: PairKind,
}

fn is_lex_positive(offset: [i32; 3]) -> bool {
    offset.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

impl<T: Real> CellPairDirection<T> {
    fn from_canonical(offset: [i32; 3]) -> Self {
        let nonzero = offset.iter().filter(|&&c| c != 0).count();
        let inv = T::one() / T::from_usize(nonzero).unwrap().sqrt();
        let axis = offset.map(|c| T::from_i32(c).unwrap() * inv);
        Self { offset, axis, kind: PairKind::from_nonzero(nonzero) }
    }

    /// Canonical direction for a neighbour at `offset` from some cell, and
    /// whether the pair had to be flipped to reach it. When flipped, the
    /// neighbour is the lower cell (a) of the pair.
    pub fn for_offset(offset: [i32; 3]) -> Option<(Self, bool)> {
        if offset == [0, 0, 0] || offset.iter().any(|c| c.abs() > 1) {
            return None;
        }
        if is_lex_positive(offset) {
            Some((Self::from_canonical(offset), false))
        } else {
            Some((Self::from_canonical(offset.map(|c| -c)), true))
        }
    }
}

/// The 13 canonical directions: the lexicographically positive member of each
/// `±offset` pair among the 26 neighbours.
pub fn make_direction_set<T: Real>() -> Vec<CellPairDirection<T>> {
    let mut out = Vec::with_capacity(13);
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                let offset = [x, y, z];
                if is_lex_positive(offset) {
                    out.push(CellPairDirection::from_canonical(offset));
                }
            }
        }
    }
    out
}

/// Projected distance of `pos` along a unit `axis`.
#[inline]
pub fn project<T: Real>(pos: Vec3<T>, axis: Vec3<T>) -> T {
    dot(pos, axis)
}

/// Particles of one cell ordered by their projection on a pair axis.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SortedProjection<T> {
    pub dist: Vec<T>,
    pub index: Vec<usize>,
}

impl<T> SortedProjection<T> {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }
}

/// Sort a cell's particles along `axis`; ties go to the lower particle index.
pub fn sort_cell<T: Real>(cell: &Cell<T>, axis: Vec3<T>) -> SortedProjection<T> {
    let mut keyed: Vec<(T, usize)> =
        cell.particles().iter().enumerate().map(|(k, p)| (project(p.pos, axis), k)).collect();
    keyed.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let (dist, index) = keyed.into_iter().unzip();
    SortedProjection { dist, index }
}
