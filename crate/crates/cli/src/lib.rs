//! The `sfc` command-line driver. Every subcommand is also callable as a
//! function returning its result, which is what the tests use.

pub mod args;
pub mod error;
pub mod plot;
pub mod results;

use std::io::Write;
use std::path::{Path, PathBuf};

use sfc_core::channel::RNG_ALGORITHM;
use sfc_core::decoder::LatticeDecoder;
use sfc_core::design::{
    design, tune_rate, Design, DesignConfig, DesignSummary, DEFAULT_BAND_RATIO,
};
use sfc_core::diversity::{codebook_report, DiversityReport, PairMode};
use sfc_core::lattice::LatticeFamily;
use sfc_core::par::Execution;
use sfc_core::sfcode::{alamouti_codebook, Codebook, Constellation};
use sfc_core::sim::{parse_snr_range, simulate, DecoderKind, SimConfig, SimRow};

pub use args::{
    BaselineArgs, Cli, Command, DecoderArg, DesignArgs, InspectArgs, PlotArgs, Scheme, SimulateArgs,
};
pub use error::CliError;

/// Words of a file and of its rebuilt design may differ by this much.
pub const REBUILD_TOLERANCE: f64 = 1e-9;

pub fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Design(a) => {
            let summary = cmd_design(&a)?;
            println!("{}", summary_json(&summary));
        }
        Command::Inspect(a) => {
            let report = cmd_inspect(&a)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            match &a.out {
                Some(p) => write_file(p, &format!("{text}\n"))?,
                None => println!("{text}"),
            }
        }
        Command::Simulate(a) => {
            let rows = cmd_simulate(&a)?;
            eprintln!("rng: {RNG_ALGORITHM}");
            for r in &rows {
                eprintln!(
                    "{:>6} dB  ser {:.4e}  {:.2} s",
                    r.snr_db, r.ser, r.wall_time
                );
            }
            let text = results::rows_to_string(&rows);
            match &a.out {
                Some(p) => write_file(p, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Plot(a) => {
            for w in cmd_plot(&a)? {
                eprintln!("warning: {w}");
            }
        }
        Command::Baseline(a) => {
            let cb = cmd_baseline(&a)?;
            eprintln!("{} words, rate {}", cb.len(), cb.rate);
        }
    }
    Ok(())
}

/// Sizes the global pool from `SFC_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SFC_THREADS") else {
        return Ok(());
    };
    let n: usize =
        v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Config(format!("SFC_THREADS={v:?} is not a positive integer"))
        })?;
    // a pool that already exists (repeated calls in one process) is kept
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn summary_json(summary: &DesignSummary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes")
}

/// Design configuration from the command-line flags.
pub fn design_config(a: &DesignArgs) -> Result<DesignConfig, CliError> {
    let family: LatticeFamily = a
        .lattice
        .parse()
        .map_err(|e| CliError::Config(format!("{e}")))?;
    if !(a.dmin > 0.0 && a.dmin <= std::f64::consts::PI) {
        return Err(CliError::Config(format!(
            "--dmin {} is not in (0, π]",
            a.dmin
        )));
    }
    if !a.alpha.is_finite() {
        return Err(CliError::Config("--alpha must be finite".into()));
    }
    let mut config = DesignConfig::new(a.k, a.l, a.nt, family, a.dmin, a.alpha);
    config.band_width = a.band_width.unwrap_or(DEFAULT_BAND_RATIO * a.dmin);
    config
        .params()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

/// Builds (or tunes) the design, writes the codebook and returns the summary.
pub fn cmd_design(a: &DesignArgs) -> Result<DesignSummary, CliError> {
    let (built, max_words) = match &a.from_summary {
        Some(path) => {
            let summary: DesignSummary = serde_json::from_str(&read_file(path)?).map_err(|e| {
                CliError::Config(format!("{}: not a design summary: {e}", path.display()))
            })?;
            let d = design(&summary.config, Execution::Auto)?;
            (d, Some(summary.words))
        }
        None => {
            let config = design_config(a)?;
            let d = match a.rate {
                Some(target) => {
                    if a.rate_window.is_nan() || a.rate_window <= 0.0 {
                        return Err(CliError::Config("--rate-window must be positive".into()));
                    }
                    let (d, steps) = tune_rate(
                        &config,
                        target,
                        a.rate_window,
                        a.max_builds,
                        Execution::Auto,
                    )?;
                    for s in steps {
                        eprintln!(
                            "tune: d_S = {:.6} -> {} words, rate {:.4}",
                            s.d_s, s.words, s.rate
                        );
                    }
                    d
                }
                None => design(&config, Execution::Auto)?,
            };
            (d, a.max_words)
        }
    };
    let d = match max_words {
        Some(n) if n < built.codebook.len() => built.truncated(n),
        _ => built,
    };
    write_file(&a.out, &d.codebook.to_json())?;
    let summary = d.summary();
    if let Some(p) = &a.summary {
        write_file(p, &format!("{}\n", summary_json(&summary)))?;
    }
    Ok(summary)
}

pub fn load_codebook(path: &Path) -> Result<Codebook, CliError> {
    Codebook::from_json(&read_file(path)?).map_err(|source| CliError::SchemaMismatch {
        path: path.to_path_buf(),
        source,
    })
}

/// Rebuilds the design a codebook file came from and checks that it
/// reproduces the stored words.
pub fn rebuild_design(cb: &Codebook) -> Result<Design, CliError> {
    let info = cb.lattice.ok_or_else(|| {
        CliError::Config("codebook has no lattice parameters; use the ML decoder".into())
    })?;
    let p = cb.params;
    let config = DesignConfig {
        k: p.k,
        l: p.l,
        nt: p.nt,
        family: info.family,
        d_s: info.d_s,
        alpha: info.alpha,
        band_width: info.band_width,
    };
    let full = design(&config, Execution::Auto)?;
    if full.codebook.len() < cb.len() {
        return Err(CliError::Construction(format!(
            "rebuilt design has {} words, the file has {}",
            full.codebook.len(),
            cb.len()
        )));
    }
    let d = full.truncated(cb.len());
    let worst = d
        .codebook
        .words
        .iter()
        .zip(&cb.words)
        .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    if worst > REBUILD_TOLERANCE {
        return Err(CliError::Construction(format!(
            "rebuilt design differs from the file by {worst:.3e}"
        )));
    }
    Ok(d)
}

pub fn cmd_inspect(a: &InspectArgs) -> Result<DiversityReport, CliError> {
    let cb = load_codebook(&a.file)?;
    if cb.len() < 2 {
        return Err(CliError::Config(
            "a diversity report needs at least two words".into(),
        ));
    }
    let mode = match a.pairs {
        Some(0) => return Err(CliError::Config("--pairs must be positive".into())),
        Some(pairs) => PairMode::Sample {
            pairs,
            seed: a.seed,
        },
        None => PairMode::All,
    };
    Ok(codebook_report(&cb, mode, Execution::Auto))
}

fn code_id_of(a: &SimulateArgs) -> String {
    a.code_id.clone().unwrap_or_else(|| {
        a.file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "code".into())
    })
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Vec<SimRow>, CliError> {
    let snr_db = parse_snr_range(&a.snr).map_err(CliError::Config)?;
    if a.trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    if a.nr == 0 {
        return Err(CliError::Config("--nr must be at least 1".into()));
    }
    let cb = load_codebook(&a.file)?;
    let decoder = match a.decoder {
        DecoderArg::Ml => DecoderKind::Ml,
        DecoderArg::Lattice => DecoderKind::Lattice,
    };
    let lattice = match decoder {
        DecoderKind::Lattice => {
            if a.nr < cb.params.nt {
                return Err(CliError::Config(format!(
                    "the lattice decoder needs --nr >= nt = {} for zero forcing",
                    cb.params.nt
                )));
            }
            Some(LatticeDecoder::new(&rebuild_design(&cb)?))
        }
        DecoderKind::Ml => None,
    };
    let cfg = SimConfig {
        snr_db,
        trials: a.trials,
        seed: a.seed,
        nr: a.nr,
        decoder,
        noiseless: a.noiseless,
        exec: Execution::Auto,
    };
    Ok(simulate(&cb, lattice.as_ref(), &cfg, &code_id_of(a)))
}

/// Writes the chart and returns the warnings for skipped rows and points.
pub fn cmd_plot(a: &PlotArgs) -> Result<Vec<String>, CliError> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for path in &a.csv {
        let r = results::read_rows(path)?;
        rows.extend(r.rows);
        warnings.extend(r.warnings);
    }
    let (series, w) = plot::group_series(&rows);
    warnings.extend(w);
    let first: PathBuf = a.csv[0].clone();
    let svg = plot::render_svg(&series, &a.title)
        .ok_or_else(|| CliError::csv(&first, "no plottable rows"))?;
    write_file(&a.out, &svg)?;
    Ok(warnings)
}

pub fn cmd_baseline(a: &BaselineArgs) -> Result<Codebook, CliError> {
    let cons = match a.scheme {
        Scheme::AlamoutiQpsk => Constellation::Qpsk,
        Scheme::Alamouti8psk => Constellation::Psk8,
    };
    let cb = alamouti_codebook(cons, a.l).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&a.out, &cb.to_json())?;
    Ok(cb)
}

/// Flushes stdout, ignoring a closed pipe.
pub fn flush_stdout() {
    let _ = std::io::stdout().flush();
}
