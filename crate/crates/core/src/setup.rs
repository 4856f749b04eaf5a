//! Seeded particle placement: single cells, cell pairs and the 3x3x3 block.
//!
//! Every cell draws from its own ChaCha stream keyed by `(seed, cell index)`,
//! so a cell's contents do not depend on how many other cells were built
//! before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Cell, Particle};
use crate::num::{Real, Vec3};

/// Cut-off assignment: `h = value * (1 + jitter * u)`, `u` uniform in `[-1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPolicy {
    pub value: f64,
    pub jitter: f64,
}

impl HPolicy {
    pub fn fixed(value: f64) -> Self {
        Self { value, jitter: 0.0 }
    }

    pub fn max(&self) -> f64 {
        self.value * (1.0 + self.jitter)
    }
}

pub fn cell_rng(seed: u64, cell_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell_index);
    rng
}

/// `n` particles uniform in the cell `[origin, origin + edge)`, ids starting at
/// `first_id`, masses uniform in `[0.5, 1.5)`.
pub fn random_cell<T: Real>(
    origin: Vec3<T>,
    edge: T,
    n: usize,
    h: HPolicy,
    first_id: u64,
    rng: &mut impl Rng,
) -> Result<Cell<T>> {
    if h.value <= 0.0 || !(0.0..1.0).contains(&h.jitter) {
        return Err(Error::Config(format!("bad cut-off policy {h:?}")));
    }
    let mut particles = Vec::with_capacity(n);
    for k in 0..n {
        let mut pos = origin;
        for (c, o) in pos.iter_mut().zip(origin) {
            *c = loop {
                let v = o + edge * T::lit(rng.random::<f64>());
                // o + edge*u can round up onto the upper face.
                if v < o + edge {
                    break v;
                }
            };
        }
        let u: f64 = rng.random_range(-1.0..1.0);
        let hk = T::lit(h.value * (1.0 + h.jitter * u));
        let mass = T::lit(rng.random_range(0.5..1.5));
        particles.push(Particle::new(first_id + k as u64, pos, hk, mass));
    }
    Cell::new(origin, edge, particles)
}

/// Two adjacent cells, (a) at the origin and (b) displaced by `offset` cells.
pub fn random_pair<T: Real>(
    offset: [i32; 3],
    n_a: usize,
    n_b: usize,
    edge: T,
    h: HPolicy,
    seed: u64,
) -> Result<(Cell<T>, Cell<T>)> {
    let zero = [T::zero(); 3];
    let origin_b = offset.map(|c| T::from_i32(c).unwrap() * edge);
    let a = random_cell(zero, edge, n_a, h, 0, &mut cell_rng(seed, 0))?;
    let b = random_cell(origin_b, edge, n_b, h, n_a as u64, &mut cell_rng(seed, 1))?;
    Ok((a, b))
}

/// A 3x3x3 block of cells around a central cell at the origin.
#[derive(Clone, Debug)]
pub struct Block<T> {
    cells: Vec<Cell<T>>,
}

impl<T: Real> Block<T> {
    pub const CENTRAL: usize = 13;

    pub fn random(n_per_cell: usize, edge: T, h: HPolicy, seed: u64) -> Result<Self> {
        let mut cells = Vec::with_capacity(27);
        for index in 0..27 {
            let offset = Self::offset_of(index);
            let origin = offset.map(|c| T::from_i32(c).unwrap() * edge);
            let first_id = (index * n_per_cell) as u64;
            let mut rng = cell_rng(seed, index as u64);
            cells.push(random_cell(origin, edge, n_per_cell, h, first_id, &mut rng)?);
        }
        Ok(Self { cells })
    }

    pub fn from_cells(cells: Vec<Cell<T>>) -> Result<Self> {
        if cells.len() != 27 {
            return Err(Error::Config(format!("a block needs 27 cells, got {}", cells.len())));
        }
        Ok(Self { cells })
    }

    pub fn index_of(offset: [i32; 3]) -> usize {
        ((offset[0] + 1) * 9 + (offset[1] + 1) * 3 + (offset[2] + 1)) as usize
    }

    pub fn offset_of(index: usize) -> [i32; 3] {
        let i = index as i32;
        [i / 9 - 1, (i / 3) % 3 - 1, i % 3 - 1]
    }

    pub fn cells(&self) -> &[Cell<T>] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [Cell<T>] {
        &mut self.cells
    }

    pub fn central(&self) -> &Cell<T> {
        &self.cells[Self::CENTRAL]
    }

    /// Two distinct cells mutably, in the order requested.
    pub fn pair_mut(&mut self, first: usize, second: usize) -> (&mut Cell<T>, &mut Cell<T>) {
        assert_ne!(first, second);
        if first < second {
            let (lo, hi) = self.cells.split_at_mut(second);
            (&mut lo[first], &mut hi[0])
        } else {
            let (lo, hi) = self.cells.split_at_mut(first);
            (&mut hi[0], &mut lo[second])
        }
    }

    pub fn reset_accumulators(&mut self) {
        self.cells.iter_mut().for_each(Cell::reset_accumulators);
    }
}
