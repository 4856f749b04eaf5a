//! `test27cells`: one central cell and its 26 neighbours, each pair swept by
//! the scalar pseudo-Verlet loop and by the lane-parallel loop at every
//! requested width, timed as the median of several runs.

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use crate::cache::CacheConfig;
use crate::error::{Error, Result};
use crate::geometry::{sort_cell, CellPairDirection, PairKind};
use crate::kernel::{CubicFalloff, Kernel};
use crate::lanes::{pair_interact_vectorised_in, LaneWidth, LaneWorkspace};
use crate::oracle::{
    boundary_pairs, brute_force_pairs, brute_force_reference, compare, Densities, PairStatistics, BOUNDARY_REL,
};
use crate::scalar::{pseudo_verlet_scalar, self_interact};
use crate::setup::{Block, HPolicy};

/// Default cut-off: 1.2348 times the mean spacing of 216 particles in a unit cell.
pub const DEFAULT_H: f64 = 1.2348 / 6.0;

/// Relative tolerance of the verification pass.
pub const VERIFY_REL_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientations {
    All,
    Only(PairKind),
}

impl Orientations {
    pub fn includes(self, kind: PairKind) -> bool {
        match self {
            Orientations::All => true,
            Orientations::Only(k) => k == kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub n_per_cell: usize,
    pub cell_edge: f64,
    pub h_value: f64,
    pub h_jitter: f64,
    pub seed: u64,
    pub runs: usize,
    pub lane_widths: Vec<LaneWidth>,
    pub orientations: Orientations,
    pub verify: bool,
    pub csv_path: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_per_cell: 216,
            cell_edge: 1.0,
            h_value: DEFAULT_H,
            h_jitter: 0.0,
            seed: 0,
            runs: 5,
            lane_widths: vec![LaneWidth::W8],
            orientations: Orientations::All,
            verify: false,
            csv_path: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if !(self.cell_edge > 0.0) {
            return fail(format!("cell edge must be positive, got {}", self.cell_edge));
        }
        if !(self.h_value > 0.0) {
            return fail(format!("h must be positive, got {}", self.h_value));
        }
        if !(0.0..1.0).contains(&self.h_jitter) {
            return fail(format!("h jitter must lie in [0, 1), got {}", self.h_jitter));
        }
        if self.h_policy().max() > self.cell_edge {
            return fail(format!("largest cut-off {} exceeds the cell edge {}", self.h_policy().max(), self.cell_edge));
        }
        if self.lane_widths.is_empty() {
            return fail("at least one lane width is required".into());
        }
        Ok(())
    }

    pub fn h_policy(&self) -> HPolicy {
        HPolicy { value: self.h_value, jitter: self.h_jitter }
    }
}

/// Times a closure in milliseconds.
pub trait Stopwatch {
    fn time(&mut self, f: &mut dyn FnMut()) -> f64;
}

/// Wall time from the monotonic clock.
#[derive(Clone, Copy, Debug, Default)]
pub struct MonotonicClock;

impl Stopwatch for MonotonicClock {
    fn time(&mut self, f: &mut dyn FnMut()) -> f64 {
        let start = Instant::now();
        f();
        start.elapsed().as_secs_f64() * 1e3
    }
}

/// Median; the mean of the two middle values for an even count.
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of no samples");
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaneResult {
    pub width: LaneWidth,
    pub vector_ms: f64,
    pub stats: PairStatistics,
}

/// One of the 26 neighbour pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    /// Offset of the neighbour from the central cell.
    pub offset: [i32; 3],
    pub kind: PairKind,
    pub scalar_ms: f64,
    pub scalar_stats: PairStatistics,
    pub lanes: Vec<LaneResult>,
}

impl BenchResult {
    pub fn lane(&self, width: LaneWidth) -> Option<&LaneResult> {
        self.lanes.iter().find(|l| l.width == width)
    }
}

/// `scalar / vector`, zero when the vector time is not positive.
pub fn speedup(scalar_ms: f64, vector_ms: f64) -> f64 {
    if vector_ms > 0.0 {
        scalar_ms / vector_ms
    } else {
        0.0
    }
}

fn neighbour_offsets() -> impl Iterator<Item = [i32; 3]> {
    (0..27).filter(|&i| i != Block::<f64>::CENTRAL).map(Block::<f64>::offset_of)
}

/// Block indices `(a, b)` and the canonical direction for the pair formed by
/// the central cell and its neighbour at `offset`.
fn pair_of(offset: [i32; 3]) -> (usize, usize, CellPairDirection<f64>) {
    let (dir, flipped) = CellPairDirection::for_offset(offset).expect("neighbour offset");
    let centre = Block::<f64>::CENTRAL;
    let other = Block::<f64>::index_of(offset);
    if flipped {
        (other, centre, dir)
    } else {
        (centre, other, dir)
    }
}

pub fn run_test27cells(config: &BenchConfig) -> Result<Vec<BenchResult>> {
    run_test27cells_with(config, &CubicFalloff, &mut MonotonicClock)
}

pub fn run_test27cells_with<K: Kernel>(
    config: &BenchConfig,
    kernel: &K,
    clock: &mut dyn Stopwatch,
) -> Result<Vec<BenchResult>> {
    config.validate()?;
    let mut block = Block::<f64>::random(config.n_per_cell, config.cell_edge, config.h_policy(), config.seed)?;
    let mut results = Vec::new();
    let mut ws = LaneWorkspace::<f32>::new();

    for offset in neighbour_offsets() {
        let (ia, ib, dir) = pair_of(offset);
        if !config.orientations.includes(dir.kind) {
            continue;
        }
        let (sp_a, sp_b) = {
            let cells = block.cells();
            (sort_cell(&cells[ia], dir.axis), sort_cell(&cells[ib], dir.axis))
        };
        let (a, b) = block.pair_mut(ia, ib);

        let mut samples = Vec::with_capacity(config.runs);
        let mut scalar_stats = PairStatistics::default();
        for _ in 0..config.runs {
            a.reset_accumulators();
            b.reset_accumulators();
            samples.push(clock.time(&mut || {
                scalar_stats = pseudo_verlet_scalar(kernel, a, b, &sp_a, &sp_b);
            }));
        }
        let scalar_ms = median(&samples);
        if config.verify {
            verify_hits(a, b, offset, scalar_stats, None)?;
        }

        let mut lanes = Vec::with_capacity(config.lane_widths.len());
        for &width in &config.lane_widths {
            let cache_cfg = CacheConfig { width, ..CacheConfig::default() };
            let mut samples = Vec::with_capacity(config.runs);
            let mut stats = Ok(PairStatistics::default());
            for _ in 0..config.runs {
                a.reset_accumulators();
                b.reset_accumulators();
                samples.push(clock.time(&mut || {
                    stats = pair_interact_vectorised_in(kernel, a, b, &dir, &sp_a, &sp_b, &cache_cfg, &mut ws)
                        .map(|s| s.pairs);
                }));
            }
            let stats = stats?;
            if config.verify {
                verify_hits(a, b, offset, stats, Some(width))?;
            }
            lanes.push(LaneResult { width, vector_ms: median(&samples), stats });
        }
        a.reset_accumulators();
        b.reset_accumulators();
        results.push(BenchResult { offset, kind: dir.kind, scalar_ms, scalar_stats, lanes });
    }

    if config.verify {
        verify_central(kernel, &mut block, config.orientations, None)?;
        for &width in &config.lane_widths {
            verify_central(kernel, &mut block, config.orientations, Some(width))?;
        }
    }
    Ok(results)
}

/// In-range pair count of one cell pair against the O(N^2) oracle: exact for
/// the double-precision scalar sweep (`width` is `None`), up to the
/// boundary-exempt pairs for the single-precision lanes.
fn verify_hits(
    a: &crate::Cell64,
    b: &crate::Cell64,
    offset: [i32; 3],
    stats: PairStatistics,
    width: Option<LaneWidth>,
) -> Result<()> {
    let cells = [a.clone(), b.clone()];
    let oracle_hits = brute_force_pairs(&cells, false).len() as u64;
    let slack = match width {
        Some(_) => boundary_pairs(&cells, false, BOUNDARY_REL).len() as u64,
        None => 0,
    };
    if stats.in_range.abs_diff(oracle_hits) > slack {
        let path = width.map_or("scalar".to_string(), |w| format!("width {w}"));
        return Err(Error::Verification(format!(
            "pair {offset:?} ({path}): {} hits, oracle has {oracle_hits}",
            stats.in_range
        )));
    }
    Ok(())
}

/// Densities of every particle in the block after sweeping the central cell
/// against each selected neighbour and itself. `width` `None` runs the scalar
/// pseudo-Verlet sweep. Only the central cell's sums are complete.
pub fn block_densities<K: Kernel>(
    kernel: &K,
    block: &mut Block<f64>,
    orientations: Orientations,
    width: Option<LaneWidth>,
) -> Result<Densities> {
    block.reset_accumulators();
    let mut ws = LaneWorkspace::<f32>::new();
    for offset in neighbour_offsets() {
        let (ia, ib, dir) = pair_of(offset);
        if !orientations.includes(dir.kind) {
            continue;
        }
        let cells = block.cells();
        let (sp_a, sp_b) = (sort_cell(&cells[ia], dir.axis), sort_cell(&cells[ib], dir.axis));
        let (a, b) = block.pair_mut(ia, ib);
        match width {
            Some(width) => {
                let cfg = CacheConfig { width, ..CacheConfig::default() };
                pair_interact_vectorised_in(kernel, a, b, &dir, &sp_a, &sp_b, &cfg, &mut ws)?;
            }
            None => {
                pseudo_verlet_scalar(kernel, a, b, &sp_a, &sp_b);
            }
        }
    }
    self_interact(kernel, &mut block.cells_mut()[Block::<f64>::CENTRAL]);
    let out = Densities::from_cells(block.cells());
    block.reset_accumulators();
    Ok(out)
}

/// Oracle densities of the central cell over the cells `orientations`
/// selects, with the ids of central particles that have a boundary pair.
pub fn central_reference<K: Kernel>(
    kernel: &K,
    block: &Block<f64>,
    orientations: Orientations,
) -> (Densities, BTreeSet<u64>) {
    let cells: Vec<crate::Cell64> = (0..27)
        .filter(|&i| i == Block::<f64>::CENTRAL || orientations.includes(pair_of(Block::<f64>::offset_of(i)).2.kind))
        .map(|i| block.cells()[i].clone())
        .collect();
    let central: BTreeSet<u64> = block.central().particles().iter().map(|p| p.id).collect();
    let reference = brute_force_reference(kernel, &cells, true).restrict(&central);
    let exempt = boundary_pairs(&cells, true, BOUNDARY_REL)
        .into_iter()
        .map(|(receiver, _)| receiver)
        .filter(|id| central.contains(id))
        .collect();
    (reference, exempt)
}

/// Complete central-cell densities against the oracle.
fn verify_central<K: Kernel>(
    kernel: &K,
    block: &mut Block<f64>,
    orientations: Orientations,
    width: Option<LaneWidth>,
) -> Result<()> {
    let (reference, exempt) = central_reference(kernel, block, orientations);
    let central: BTreeSet<u64> = reference.by_id.keys().copied().collect();
    let got = block_densities(kernel, block, orientations, width)?.restrict(&central);
    let report = compare(&got, &reference, VERIFY_REL_TOL, &exempt);
    if report.passed() {
        return Ok(());
    }
    let path = width.map_or("scalar".to_string(), |w| format!("width {w}"));
    let at = report.worst.map_or(String::new(), |id| format!(" at particle {id}"));
    Err(Error::Verification(format!(
        "central cell ({path}): relative deviation {:.3e}{at} (tolerance {VERIFY_REL_TOL:e})",
        report.max_deviation()
    )))
}

/// Per-orientation time of one cell pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KindTiming {
    pub kind: PairKind,
    pub scalar_ms: f64,
    pub vector_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedTotal {
    pub scalar_ms: f64,
    pub vector_ms: f64,
    pub speedup: f64,
}

/// `8 x corner + 12 x edge + 6 x face`: the cost of all 26 neighbour pairs.
/// Several timings of one kind are averaged first.
pub fn weighted_total(timings: &[KindTiming]) -> Result<WeightedTotal> {
    let mut scalar_ms = 0.0;
    let mut vector_ms = 0.0;
    for kind in PairKind::ALL {
        let of_kind: Vec<&KindTiming> = timings.iter().filter(|t| t.kind == kind).collect();
        if of_kind.is_empty() {
            return Err(Error::MissingKind(kind.as_str()));
        }
        let n = of_kind.len() as f64;
        let m = kind.multiplicity() as f64;
        scalar_ms += m * of_kind.iter().map(|t| t.scalar_ms).sum::<f64>() / n;
        vector_ms += m * of_kind.iter().map(|t| t.vector_ms).sum::<f64>() / n;
    }
    Ok(WeightedTotal { scalar_ms, vector_ms, speedup: speedup(scalar_ms, vector_ms) })
}

/// Aggregated results of one orientation kind at one lane width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KindSummary {
    pub kind: PairKind,
    pub width: LaneWidth,
    /// Mean over the pairs of this kind of the per-pair median times.
    pub scalar_ms: f64,
    pub vector_ms: f64,
    pub candidates: u64,
    pub hits: u64,
}

pub fn summarize(results: &[BenchResult], widths: &[LaneWidth]) -> Vec<KindSummary> {
    let mut out = Vec::new();
    for kind in PairKind::ALL {
        let of_kind: Vec<&BenchResult> = results.iter().filter(|r| r.kind == kind).collect();
        if of_kind.is_empty() {
            continue;
        }
        let n = of_kind.len() as f64;
        let scalar_ms = of_kind.iter().map(|r| r.scalar_ms).sum::<f64>() / n;
        for &width in widths {
            let lanes: Vec<&LaneResult> = of_kind.iter().filter_map(|r| r.lane(width)).collect();
            out.push(KindSummary {
                kind,
                width,
                scalar_ms,
                vector_ms: lanes.iter().map(|l| l.vector_ms).sum::<f64>() / n,
                candidates: lanes.iter().map(|l| l.stats.inspected).sum(),
                hits: lanes.iter().map(|l| l.stats.in_range).sum(),
            });
        }
    }
    out
}

/// `%g`-style formatting with 6 significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let s = format!("{v:.*}", (5 - exp) as usize);
        trim_zeros(&s).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_HEADER: &str = "orientation,lane_width,scalar_ms,vector_ms,speedup,candidates,hits";

/// One row per orientation kind and lane width, then one `total` row per lane
/// width when every kind is present.
pub fn write_csv(out: &mut impl Write, results: &[BenchResult], widths: &[LaneWidth]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let summary = summarize(results, widths);
    for s in &summary {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.kind,
            s.width,
            format_sig6(s.scalar_ms),
            format_sig6(s.vector_ms),
            format_sig6(speedup(s.scalar_ms, s.vector_ms)),
            s.candidates,
            s.hits
        )?;
    }
    for &width in widths {
        let rows: Vec<&KindSummary> = summary.iter().filter(|s| s.width == width).collect();
        let timings: Vec<KindTiming> =
            rows.iter().map(|s| KindTiming { kind: s.kind, scalar_ms: s.scalar_ms, vector_ms: s.vector_ms }).collect();
        if let Ok(total) = weighted_total(&timings) {
            writeln!(
                out,
                "total,{width},{},{},{},{},{}",
                format_sig6(total.scalar_ms),
                format_sig6(total.vector_ms),
                format_sig6(total.speedup),
                rows.iter().map(|s| s.candidates).sum::<u64>(),
                rows.iter().map(|s| s.hits).sum::<u64>()
            )?;
        }
    }
    Ok(())
}

pub fn csv_string(results: &[BenchResult], widths: &[LaneWidth]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, results, widths).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}
