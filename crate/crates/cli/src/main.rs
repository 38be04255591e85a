use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{OutputFormat, RunConfig};
use output::Failure;

/// Numerical laboratory for q-deformed Gaussian operator algebras.
///
/// Exit codes: 0 success, 1 verification failure, 2 numeric or I/O
/// failure, 3 invalid input, 4 resource limit.
#[derive(Parser, Debug)]
#[command(name = "qfock", version, about, long_about = None)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Deformation parameter, strictly inside (-1, 1).
    #[arg(long, global = true, allow_hyphen_values = true)]
    q: Option<f64>,
    /// Number of generators (dimension of H).
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Truncation degree (at least 2).
    #[arg(long = "N", global = true)]
    n_max: Option<usize>,
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for cached Gram factorizations and sweep results.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the q-commutation relations, [L, R] = 0, adjointness, the
    /// identity f m† = d − S, both |M|² assemblies and vacuum moments.
    ///
    /// CSV columns: check,residual,threshold,passed
    Verify,
    /// Norms of m and m†, the gap of |M| on F⁺ and the inequality flags.
    ///
    /// CSV columns: as for `sweep`, one row.
    Gap,
    /// The threshold d₀(q) for each q in the list.
    ///
    /// CSV columns: q,C1,C2,d0
    D0 {
        /// Comma-separated q values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q_list: Option<Vec<f64>>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<qfock::ThresholdMode>,
        /// d of the probe space that measures the constants.
        #[arg(long)]
        probe_d: Option<usize>,
        /// N of the probe space that measures the constants.
        #[arg(long = "probe-N")]
        probe_n: Option<usize>,
    },
    /// Spectral reports over a (q, d, N) grid; resumes from completed points.
    ///
    /// CSV columns: q,d,N,c1_emp,c2_emp,m_norm,mdag_min_sv,mdag_bound,gap,
    /// vacuum_residual,s_norm,f_norm,m_norm_bound_ok,mdag_lower_bound_ok,
    /// gap_positive,triangle_ok,error
    Sweep {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        d_grid: Option<Vec<usize>>,
        #[arg(long = "N-grid", value_delimiter = ',')]
        n_grid: Option<Vec<usize>>,
    },
    /// Vacuum moments from the matrices against the pair-partition formula.
    ///
    /// CSV columns: q,d,max_order,tuples_checked,max_abs_diff,mismatches
    /// (or indices,wick,matrix for a single tuple).
    Moments {
        /// A single index tuple, e.g. 1,2,1,2; otherwise every tuple is checked.
        #[arg(long, value_delimiter = ',')]
        indices: Option<Vec<usize>>,
        /// Largest order in the exhaustive check (default min(6, 2N)).
        #[arg(long)]
        max_order: Option<usize>,
    },
}

fn parse_mode(s: &str) -> Result<qfock::ThresholdMode, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| "expected empirical-constants or analytic-C1-only".to_string())
}

fn resolve(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_toml_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(q) = common.q {
        cfg.q = q;
    }
    if let Some(d) = common.d {
        cfg.d = d;
    }
    if let Some(n) = common.n_max {
        cfg.n_max = n;
    }
    if let Some(dir) = &common.cache_dir {
        cfg.cache_dir = Some(dir.clone());
    }
    if let Some(format) = common.format {
        cfg.format = format;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut cfg = resolve(&cli.common)?;
    let out = cli.common.out.as_deref();
    match cli.command {
        Command::Verify => commands::verify(&cfg, out),
        Command::Gap => commands::gap(&cfg, out),
        Command::D0 {
            q_list,
            mode,
            probe_d,
            probe_n,
        } => {
            if let Some(qs) = q_list {
                cfg.threshold.q = qs;
            }
            if let Some(mode) = mode {
                cfg.threshold.mode = mode;
            }
            if let Some(d) = probe_d {
                cfg.threshold.probe.d = d;
            }
            if let Some(n) = probe_n {
                cfg.threshold.probe.n_max = n;
            }
            commands::d0(&cfg, out)
        }
        Command::Sweep {
            q_grid,
            d_grid,
            n_grid,
        } => {
            if let Some(q) = q_grid {
                cfg.sweep.q = q;
            }
            if let Some(d) = d_grid {
                cfg.sweep.d = d;
            }
            if let Some(n) = n_grid {
                cfg.sweep.n = n;
            }
            commands::sweep(&cfg, out)
        }
        Command::Moments { indices, max_order } => commands::moments(&cfg, indices, max_order, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
