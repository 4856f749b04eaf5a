//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any hard criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use pverlet::bench::{
    block_densities, central_reference, csv_string, run_test27cells, summarize, weighted_total, BenchConfig,
    KindTiming, Orientations, DEFAULT_H,
};
use pverlet::geometry::{make_direction_set, sort_cell, PairKind};
use pverlet::oracle::{brute_force_pairs, candidate_fraction, SweepMode};
use pverlet::scalar::{compute_bounds, pseudo_verlet_scalar_observed};
use pverlet::setup::{random_pair, HPolicy};
use pverlet::trace::PairRecorder;
use pverlet::{compare, Block64, CubicFalloff, LaneWidth};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Cut-off giving `n` particles per unit cell the benchmark's neighbour count.
fn benchmark_h(n: usize) -> f64 {
    DEFAULT_H * 6.0 / (n as f64).cbrt()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let k = CubicFalloff;
    let n = 64;
    let mut pair_mismatches = Vec::new();
    let mut lane_failures = Vec::new();
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut block = Block64::random(n, 1.0, HPolicy::fixed(benchmark_h(n)), seed).unwrap();

        // Pair sets of the 26 cross-cell sweeps around the central cell.
        let mut found = BTreeSet::new();
        for dir in make_direction_set::<f64>() {
            for sign in [1, -1] {
                let offset = dir.offset.map(|c| c * sign);
                let (ia, ib) = if sign == 1 {
                    (Block64::CENTRAL, Block64::index_of(offset))
                } else {
                    (Block64::index_of(offset), Block64::CENTRAL)
                };
                let cells = block.cells();
                let (sp_a, sp_b) = (sort_cell(&cells[ia], dir.axis), sort_cell(&cells[ib], dir.axis));
                let ids = |i: usize| cells[i].particles().iter().map(|p| p.id).collect::<Vec<_>>();
                let mut rec = PairRecorder::new(ids(ia), ids(ib));
                let (a, b) = block.pair_mut(ia, ib);
                pseudo_verlet_scalar_observed(&k, a, b, &sp_a, &sp_b, &mut rec);
                found.extend(rec.pairs);
            }
        }
        let central: BTreeSet<u64> = block.central().particles().iter().map(|p| p.id).collect();
        let expected: BTreeSet<(u64, u64)> = brute_force_pairs(block.cells(), false)
            .into_iter()
            .filter(|(p, q)| central.contains(p) || central.contains(q))
            .collect();
        if found != expected {
            pair_mismatches.push(seed);
        }

        let (_, exempt) = central_reference(&k, &block, Orientations::All);
        let scalar = block_densities(&k, &mut block, Orientations::All, None).unwrap().restrict(&central);
        for width in [LaneWidth::W4, LaneWidth::W8, LaneWidth::W16] {
            let lanes = block_densities(&k, &mut block, Orientations::All, Some(width)).unwrap().restrict(&central);
            let report = compare(&lanes, &scalar, 1e-5, &exempt);
            worst = worst.max(report.max_deviation());
            if !report.passed() {
                lane_failures.push((seed, width.get(), report.max_deviation(), report.worst));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = pair_mismatches.is_empty() && lane_failures.is_empty() && secs < 60.0;
    outcome(
        pass,
        format!(
            "100 instances, n=64, h={:.4}: pair-set mismatches {:?}; lane deviation max {worst:.3e} (tol 1e-5), \
             failures {lane_failures:?}; {secs:.1}s",
            benchmark_h(n),
            pair_mismatches
        ),
    )
}

fn bound_safety() -> Outcome {
    let dirs = make_direction_set::<f64>();
    let mut violations = 0usize;
    let mut true_pairs = 0usize;
    for seed in 0..1000u64 {
        let dir = &dirs[seed as usize % dirs.len()];
        let n_a = 1 + (seed as usize * 7919) % 120;
        let n_b = 1 + (seed as usize * 104729) % 120;
        let h = HPolicy { value: 0.1 + 0.6 * ((seed % 10) as f64 / 10.0), jitter: 0.3 };
        let (a, b) = random_pair::<f64>(dir.offset, n_a, n_b, 1.0, h, seed).unwrap();
        let (sp_a, sp_b) = (sort_cell(&a, dir.axis), sort_cell(&b, dir.axis));
        let bounds = compute_bounds(&a, &b, &sp_a, &sp_b);
        let (pa, pb) = (a.particles(), b.particles());
        for (i, &ka) in sp_a.index.iter().enumerate() {
            for (j, &kb) in sp_b.index.iter().enumerate() {
                let r2: f64 = (0..3).map(|c| (pa[ka].pos[c] - pb[kb].pos[c]).powi(2)).sum();
                if r2 < pa[ka].h * pa[ka].h {
                    true_pairs += 1;
                    if i < bounds.first_a || j > bounds.max_index_a(i) {
                        violations += 1;
                    }
                }
                if r2 < pb[kb].h * pb[kb].h {
                    true_pairs += 1;
                    if j >= bounds.b_end || i < bounds.min_index_b(j) {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(violations == 0, format!("1000 instances, {true_pairs} true neighbour pairs, {violations} outside bounds"))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn candidate_statistics() -> Outcome {
    let k = CubicFalloff;
    let face = make_direction_set::<f64>().into_iter().find(|d| d.offset == [1, 0, 0]).unwrap();
    let naive: Vec<f64> = (0..20)
        .map(|s| {
            candidate_fraction(&k, SweepMode::Naive, &face, (1000, 1000), HPolicy::fixed(1.0), s).unwrap().fraction()
        })
        .collect();
    let pv: Vec<f64> = (0..20)
        .map(|s| {
            candidate_fraction(&k, SweepMode::PseudoVerlet, &face, (216, 216), HPolicy::fixed(DEFAULT_H), s)
                .unwrap()
                .fraction()
        })
        .collect();
    let (m_naive, m_pv) = (mean(&naive), mean(&pv));
    let naive_ok = m_naive <= 0.17;
    let pv_ok = (0.50..=0.85).contains(&m_pv);
    outcome(
        naive_ok && pv_ok,
        format!(
            "naive face fraction at h=C_l, n=1000: {m_naive:.4} (need <= 0.17) {}; \
             pseudo-Verlet hit fraction at h={DEFAULT_H:.4}, n=216: {m_pv:.4} (need 0.50..0.85) {}",
            if naive_ok { "ok" } else { "MISSED" },
            if pv_ok { "ok" } else { "MISSED" }
        ),
    )
}

fn candidate_reduction() -> Outcome {
    let k = CubicFalloff;
    let faces: Vec<_> = make_direction_set::<f64>().into_iter().filter(|d| d.kind == PairKind::Face).collect();
    let mut instances = 0;
    let mut failures = Vec::new();
    for n in [16, 17, 32, 64, 100, 216] {
        for dir in &faces {
            for seed in 0..30 {
                let h = HPolicy::fixed(benchmark_h(n));
                let naive = candidate_fraction(&k, SweepMode::Naive, dir, (n, n), h, seed).unwrap();
                let pv = candidate_fraction(&k, SweepMode::PseudoVerlet, dir, (n, n), h, seed).unwrap();
                instances += 1;
                if pv.inspected >= naive.inspected {
                    failures.push((n, dir.offset, seed));
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{instances} face-pair instances, n in 16..216; not reduced: {failures:?}"))
}

fn weighted_total_arithmetic() -> Outcome {
    let t = [
        KindTiming { kind: PairKind::Corner, scalar_ms: 0.00035, vector_ms: 0.00035 },
        KindTiming { kind: PairKind::Edge, scalar_ms: 0.0052, vector_ms: 0.0052 },
        KindTiming { kind: PairKind::Face, scalar_ms: 0.082, vector_ms: 0.082 },
    ];
    let total = weighted_total(&t).unwrap().scalar_ms;
    outcome((total - 0.56).abs() < 0.005, format!("weighted total {total:.4} ms, expect 0.56"))
}

fn width_independence() -> Outcome {
    let k = CubicFalloff;
    let cfg = BenchConfig::default();
    let mut block = Block64::random(cfg.n_per_cell, cfg.cell_edge, cfg.h_policy(), cfg.seed).unwrap();
    let results: Vec<_> = LaneWidth::ALL
        .iter()
        .map(|&w| (w, block_densities(&k, &mut block, Orientations::All, Some(w)).unwrap()))
        .collect();
    let none = BTreeSet::new();
    let mut worst = 0.0f64;
    for (x, (wx, dx)) in results.iter().enumerate() {
        for (wy, dy) in &results[x + 1..] {
            let d = compare(dx, dy, 1e-5, &none).max_deviation();
            worst = worst.max(d);
            if d > 1e-5 {
                return outcome(false, format!("widths {wx} and {wy} differ by {d:.3e}"));
            }
        }
    }
    outcome(true, format!("widths 1/4/8/16, all {} particles, max pairwise deviation {worst:.3e}", 27 * cfg.n_per_cell))
}

fn has_eight_f32_lanes() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::arch::is_x86_feature_detected!("avx2")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

fn performance_smoke() -> Outcome {
    let cfg = BenchConfig { orientations: Orientations::Only(PairKind::Face), ..Default::default() };
    let results = run_test27cells(&cfg).unwrap();
    let s = summarize(&results, &cfg.lane_widths)[0];
    let speedup = s.scalar_ms / s.vector_ms;
    let all = run_test27cells(&BenchConfig { lane_widths: vec![LaneWidth::W8], ..Default::default() }).unwrap();
    let rows = summarize(&all, &[LaneWidth::W8]);
    let timings: Vec<KindTiming> =
        rows.iter().map(|r| KindTiming { kind: r.kind, scalar_ms: r.scalar_ms, vector_ms: r.vector_ms }).collect();
    let total = weighted_total(&timings).unwrap();
    outcome(
        !has_eight_f32_lanes() || speedup >= 1.5,
        format!(
            "face width 8: scalar {:.4} ms, lanes {:.4} ms, speedup {speedup:.2} (want >= 1.5); \
             weighted total {:.4}/{:.4} ms, speedup {:.2}; 8 native lanes: {}",
            s.scalar_ms,
            s.vector_ms,
            total.scalar_ms,
            total.vector_ms,
            total.speedup,
            has_eight_f32_lanes()
        ),
    )
}

fn without_timings(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            [f[0], f[1], f[5], f[6]].join(",")
        })
        .collect()
}

fn determinism() -> Outcome {
    let cfg = BenchConfig { seed: 7, runs: 2, lane_widths: LaneWidth::ALL.to_vec(), ..Default::default() };
    let one = csv_string(&run_test27cells(&cfg).unwrap(), &cfg.lane_widths);
    let two = csv_string(&run_test27cells(&cfg).unwrap(), &cfg.lane_widths);
    let same = without_timings(&one) == without_timings(&two);
    outcome(same, format!("{} CSV lines compared on orientation, lane_width, candidates, hits", one.lines().count()))
}

fn main() -> ExitCode {
    let hard: [(&str, fn() -> Outcome); 7] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 bound safety", bound_safety),
        ("3 candidate-fraction statistics", candidate_statistics),
        ("4 candidate reduction", candidate_reduction),
        ("5 weighted-total arithmetic", weighted_total_arithmetic),
        ("6 width independence", width_independence),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in hard {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    let o = performance_smoke();
    println!("{} 7 performance smoke (informational): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);

    println!("{failed} hard criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
