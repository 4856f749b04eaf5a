use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use pverlet::bench::{
    format_sig6, run_test27cells, speedup, summarize, weighted_total, write_csv, BenchConfig, KindTiming, Orientations,
    DEFAULT_H,
};
use pverlet::{Error, LaneWidth, PairKind};

const EXIT_CONFIG: u8 = 1;
const EXIT_VERIFY: u8 = 2;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Orientation {
    Face,
    Edge,
    Corner,
    All,
}

impl From<Orientation> for Orientations {
    fn from(o: Orientation) -> Self {
        match o {
            Orientation::Face => Orientations::Only(PairKind::Face),
            Orientation::Edge => Orientations::Only(PairKind::Edge),
            Orientation::Corner => Orientations::Only(PairKind::Corner),
            Orientation::All => Orientations::All,
        }
    }
}

/// Time the scalar and lane-parallel pseudo-Verlet sweeps between a central
/// cell and its 26 neighbours.
#[derive(Debug, Parser)]
#[command(name = "test27cells", version)]
struct Cli {
    /// Particles in each of the 27 cells.
    #[arg(long, default_value_t = 216)]
    particles_per_cell: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Timed runs per sweep; the median is reported.
    #[arg(long, default_value_t = 5)]
    runs: usize,

    /// Lane width of the vectorised path; repeat to time several.
    #[arg(long = "lane-width", value_parser = parse_width)]
    lane_widths: Vec<LaneWidth>,

    #[arg(long, value_enum, default_value_t = Orientation::All)]
    orientation: Orientation,

    /// Cut-off radius (unit cell edge).
    #[arg(long, default_value_t = DEFAULT_H)]
    h: f64,

    /// Relative spread of per-particle cut-offs around `--h`.
    #[arg(long, default_value_t = 0.0)]
    h_jitter: f64,

    /// Check every sweep against the brute-force reference.
    #[arg(long)]
    verify: bool,

    /// Write per-orientation results as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_width(s: &str) -> Result<LaneWidth, String> {
    let w: usize = s.parse().map_err(|e| format!("{e}"))?;
    LaneWidth::try_from(w).map_err(|e| e.to_string())
}

impl Cli {
    fn config(self) -> BenchConfig {
        let lane_widths = if self.lane_widths.is_empty() { vec![LaneWidth::W8] } else { self.lane_widths };
        BenchConfig {
            n_per_cell: self.particles_per_cell,
            h_value: self.h,
            h_jitter: self.h_jitter,
            seed: self.seed,
            runs: self.runs,
            lane_widths,
            orientations: self.orientation.into(),
            verify: self.verify,
            csv_path: self.csv,
            ..BenchConfig::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let config = cli.config();
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("test27cells: {e}");
            match e {
                Error::Verification(_) => ExitCode::from(EXIT_VERIFY),
                _ => ExitCode::from(EXIT_CONFIG),
            }
        }
    }
}

fn run(config: &BenchConfig) -> pverlet::Result<()> {
    let results = run_test27cells(config)?;
    let widths = &config.lane_widths;
    let summary = summarize(&results, widths);

    let mut out = io::stdout().lock();
    let io_err = |e: io::Error| Error::Config(format!("cannot write output: {e}"));
    writeln!(
        out,
        "{} particles per cell, h = {}, jitter {}, seed {}, median of {} runs",
        config.n_per_cell,
        format_sig6(config.h_value),
        format_sig6(config.h_jitter),
        config.seed,
        config.runs
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "{:<7} {:>5} {:>12} {:>12} {:>8} {:>11} {:>9}",
        "kind", "width", "scalar ms", "vector ms", "speedup", "candidates", "hits"
    )
    .map_err(io_err)?;
    for s in &summary {
        writeln!(
            out,
            "{:<7} {:>5} {:>12.6} {:>12.6} {:>7.2}x {:>11} {:>9}",
            s.kind.as_str(),
            s.width.get(),
            s.scalar_ms,
            s.vector_ms,
            speedup(s.scalar_ms, s.vector_ms),
            s.candidates,
            s.hits
        )
        .map_err(io_err)?;
    }
    for &width in widths {
        let timings: Vec<KindTiming> = summary
            .iter()
            .filter(|s| s.width == width)
            .map(|s| KindTiming { kind: s.kind, scalar_ms: s.scalar_ms, vector_ms: s.vector_ms })
            .collect();
        match weighted_total(&timings) {
            Ok(t) => writeln!(
                out,
                "weighted total, width {width}: scalar {:.6} ms, vector {:.6} ms, speedup {:.2}x",
                t.scalar_ms, t.vector_ms, t.speedup
            ),
            Err(e) => writeln!(out, "weighted total, width {width}: not available ({e})"),
        }
        .map_err(io_err)?;
    }
    if config.verify {
        writeln!(out, "verification passed").map_err(io_err)?;
    }

    if let Some(path) = &config.csv_path {
        let file = File::create(path).map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        write_csv(&mut w, &results, widths)
            .and_then(|_| w.flush())
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_parse() {
        assert_eq!(parse_width("16"), Ok(LaneWidth::W16));
        assert!(parse_width("3").is_err());
        assert!(parse_width("eight").is_err());
    }

    #[test]
    fn no_flags_give_the_default_configuration() {
        let cli = Cli::try_parse_from(["test27cells"]).unwrap();
        assert_eq!(cli.config(), BenchConfig::default());
    }

    #[test]
    fn flags_map_onto_the_configuration() {
        let args = [
            "test27cells",
            "--particles-per-cell",
            "64",
            "--seed",
            "3",
            "--runs",
            "7",
            "--lane-width",
            "4",
            "--lane-width",
            "16",
            "--orientation",
            "edge",
            "--h",
            "0.3",
            "--h-jitter",
            "0.1",
            "--verify",
            "--csv",
            "out.csv",
        ];
        let cfg = Cli::try_parse_from(args).unwrap().config();
        assert_eq!(cfg.n_per_cell, 64);
        assert_eq!((cfg.seed, cfg.runs), (3, 7));
        assert_eq!(cfg.lane_widths, [LaneWidth::W4, LaneWidth::W16]);
        assert_eq!(cfg.orientations, Orientations::Only(PairKind::Edge));
        assert_eq!((cfg.h_value, cfg.h_jitter), (0.3, 0.1));
        assert!(cfg.verify);
        assert_eq!(cfg.csv_path, Some(PathBuf::from("out.csv")));
    }
}
