//! `dicke`: sweeps, fits and oracle validation for the dissipative Dicke model.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 computation
//! failure (including a failed `validate` comparison).

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dicke_core::dissipation::select_k_levels;
use dicke_core::ecs::convergence_check;
use dicke_core::experiments::{
    bias_grid, grid_table, lambda_table, qubits_table, scaling_fit, scaling_table, sweep_lambda,
    sweep_qubits, sweep_temperature, QubitGrid,
};
use dicke_core::io::{to_csv_string, Metadata, Table, Value};
use dicke_core::oracle::OracleConfig;
use dicke_core::validate::run_validation;
use dicke_core::{
    parse_config, with_overrides, Error, LambdaCVariant, LevelPolicy, SimulationConfig,
    SpectrumCache,
};

#[derive(Parser, Debug)]
#[command(
    name = "dicke",
    version,
    about = "Two-photon statistics of the dissipative finite-size Dicke model"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    opts: Overrides,

    /// More log output (-v progress per point, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// Flags mirror config-file keys and win over the file.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// Configuration file (`key = value` lines with optional [sections]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of qubits N.
    #[arg(long, global = true, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Coupling λ.
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Sets both bath temperatures.
    #[arg(long, global = true, allow_hyphen_values = true)]
    temperature: Option<String>,
    #[arg(long = "t-q", global = true, allow_hyphen_values = true)]
    t_q: Option<String>,
    #[arg(long = "t-c", global = true, allow_hyphen_values = true)]
    t_c: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long = "omega-c", global = true, allow_hyphen_values = true)]
    omega_c: Option<String>,
    /// Boson truncation of the displaced basis.
    #[arg(long = "n-tr", global = true, allow_hyphen_values = true)]
    n_tr: Option<String>,
    /// `auto` or a fixed count.
    #[arg(long = "k-levels", global = true, allow_hyphen_values = true)]
    k_levels: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long, global = true)]
    out: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        [
            ("n", &self.n),
            ("delta", &self.delta),
            ("omega", &self.omega),
            ("lambda", &self.lambda),
            ("temperature", &self.temperature),
            ("t_q", &self.t_q),
            ("t_c", &self.t_c),
            ("alpha", &self.alpha),
            ("omega_c", &self.omega_c),
            ("n_tr", &self.n_tr),
            ("k_levels", &self.k_levels),
            ("out", &self.out),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest eigenvalues and parities at one point.
    Spectrum {
        /// Number of levels; defaults to the level count the bath temperature needs.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// g2 along the configured λ axis.
    SweepLambda,
    /// Extrema of g2 over λ for each configured N.
    SweepQubits {
        #[arg(long, value_enum, default_value_t = GridKind::Scaled)]
        grid: GridKind,
    },
    /// Equal-temperature sweep at the configured λ (or --lambdas).
    SweepTemperature {
        /// Comma-separated couplings.
        #[arg(long, value_delimiter = ',')]
        lambdas: Vec<f64>,
    },
    /// g2 over the (T_q, T_c) bias grid for each configured λ.
    BiasGrid,
    /// Log-log fit of λ_extreme(N) - λ_c, both λ_c variants.
    ScalingFit {
        #[arg(long, value_enum, default_value_t = GridKind::Scaled)]
        grid: GridKind,
    },
    /// ECS against the plain Fock-basis oracle.
    Validate {
        #[arg(long = "max-n", default_value_t = 8)]
        max_n: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GridKind {
    /// λ axis that narrows around the transition as 1/N.
    Scaled,
    /// The configured λ axis for every N.
    Fixed,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn load(opts: &Overrides) -> Result<SimulationConfig, Failure> {
    let text = match &opts.config {
        Some(p) => {
            fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => String::new(),
    };
    let base = parse_config(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    let pairs = opts.pairs();
    let borrowed: Vec<(&str, String)> = pairs.iter().map(|(k, v)| (*k, v.clone())).collect();
    with_overrides(&base, &borrowed).map_err(|e| Failure::Usage(e.to_string()))
}

fn cache(cfg: &SimulationConfig) -> Result<SpectrumCache, Failure> {
    Ok(match &cfg.cache_dir {
        Some(d) => SpectrumCache::with_dir(d)?,
        None => SpectrumCache::from_env()?,
    })
}

fn emit(cfg: &SimulationConfig, table: &Table, meta: Metadata) -> Result<(), Failure> {
    let text = to_csv_string(table, &meta)?;
    match &cfg.out {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::Compute(format!("{}: {e}", p.display())))?;
            log::info!("wrote {}", p.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Failure::Compute(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

fn grid(kind: GridKind, cfg: &SimulationConfig) -> QubitGrid {
    match kind {
        GridKind::Scaled => QubitGrid::Scaled {
            points: cfg.lambda_axis.points,
        },
        GridKind::Fixed => QubitGrid::Fixed(cfg.lambda_axis.clone()),
    }
}

fn check_rows<'a>(errors: impl Iterator<Item = &'a Option<String>>) -> Result<(), Failure> {
    let failed: Vec<&String> = errors.flatten().collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Compute(format!(
            "{} point(s) failed, first: {}",
            failed.len(),
            failed[0]
        )))
    }
}

fn spectrum(cfg: &SimulationConfig, levels: Option<usize>) -> Result<(), Failure> {
    let system = cfg.solver.solve(&cfg.params)?;
    let k = levels
        .or(match cfg.solver.k_levels {
            LevelPolicy::Fixed(k) => Some(k),
            LevelPolicy::Auto => None,
        })
        .unwrap_or_else(|| select_k_levels(system.energies(), cfg.baths.max_temperature()))
        .min(system.levels());
    let report = convergence_check(&cfg.params, cfg.solver.n_tr, cfg.solver.n_tr + 10, k, 1e-8)?;
    if !report.converged() {
        log::warn!(
            "levels {:?} move by more than 1e-8 from n_tr = {} to {}; raise n_tr",
            report.non_converged,
            report.n_tr_low,
            report.n_tr_high
        );
    }
    let mut t = Table::new(["k", "energy", "parity"].map(String::from).to_vec());
    for i in 0..k {
        t.push(vec![
            Value::Int(i as i64),
            Value::Float(system.energies()[i]),
            Value::Int(system.parities()[i] as i64),
        ]);
    }
    emit(cfg, &t, Metadata::for_config(cfg).with("kind", "spectrum"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load(&cli.opts)?;
    let p = &cfg.params;
    match cli.command {
        Command::Spectrum { levels } => spectrum(&cfg, levels),
        Command::SweepLambda => {
            let c = cache(&cfg)?;
            let rows = sweep_lambda(&cfg.lambda_axis.values(), p, &cfg.baths, &cfg.solver, &c);
            emit(
                &cfg,
                &lambda_table(&rows),
                Metadata::for_config(&cfg).with("kind", "sweep-lambda"),
            )?;
            check_rows(rows.iter().map(|r| &r.error))
        }
        Command::SweepQubits { grid: kind } => {
            let rows = sweep_qubits(&cfg.n_values, &grid(kind, &cfg), p, &cfg.baths, &cfg.solver)?;
            let meta = Metadata::for_config(&cfg).with("kind", "sweep-qubits");
            emit(&cfg, &qubits_table(&rows), meta)?;
            check_rows(rows.iter().flat_map(|r| r.coarse.iter().map(|c| &c.error)))
        }
        Command::SweepTemperature { lambdas } => {
            let lambdas = if lambdas.is_empty() {
                vec![p.lambda]
            } else {
                lambdas
            };
            let c = cache(&cfg)?;
            let rows = sweep_temperature(
                &lambdas,
                &cfg.temperature_axis.values(),
                p,
                &cfg.baths,
                &cfg.solver,
                &c,
            );
            let meta = Metadata::for_config(&cfg)
                .with("kind", "sweep-temperature")
                .with("cache_hit_ratio", c.hit_ratio());
            emit(&cfg, &grid_table(&rows), meta)?;
            check_rows(rows.iter().map(|r| &r.error))
        }
        Command::BiasGrid => {
            let c = cache(&cfg)?;
            let t = cfg.bias_axis.values();
            let rows = bias_grid(&cfg.bias_lambdas, &t, &t, p, &cfg.baths, &cfg.solver, &c);
            log::info!("cache hit ratio {:.3}", c.hit_ratio());
            let meta = Metadata::for_config(&cfg)
                .with("kind", "bias-grid")
                .with("cache_hit_ratio", c.hit_ratio());
            emit(&cfg, &grid_table(&rows), meta)?;
            check_rows(rows.iter().map(|r| &r.error))
        }
        Command::ScalingFit { grid: kind } => {
            let found = sweep_qubits(&cfg.n_values, &grid(kind, &cfg), p, &cfg.baths, &cfg.solver)?;
            let extrema: Vec<(usize, f64, f64)> = found
                .iter()
                .map(|q| {
                    (
                        q.n_qubits,
                        q.min.map_or(f64::NAN, |e| e.lambda),
                        q.max.map_or(f64::NAN, |e| e.lambda),
                    )
                })
                .collect();
            let other = match cfg.lambda_c_variant {
                LambdaCVariant::Caption => LambdaCVariant::MainText,
                LambdaCVariant::MainText => LambdaCVariant::Caption,
            };
            let t = cfg.baths.t_q;
            if cfg.baths.t_q != cfg.baths.t_c {
                log::warn!(
                    "scaling fit uses λ_c at T_q = {t}; T_c = {} differs",
                    cfg.baths.t_c
                );
            }
            let mut table: Option<Table> = None;
            for variant in [cfg.lambda_c_variant, other] {
                let fit = scaling_fit(&extrema, p, t, variant)?;
                for (name, b) in [("min", &fit.min_branch), ("max", &fit.max_branch)] {
                    match &b.fit {
                        Some(f) => eprintln!(
                            "{} λ_c = {:.6}: {name} branch slope {:.4} ± {:.4} over N = {:?}",
                            variant.name(),
                            fit.lambda_c,
                            f.slope,
                            f.slope_stderr,
                            b.n_values
                        ),
                        None => {
                            eprintln!("{} {name} branch: too few points above λ_c", variant.name())
                        }
                    }
                }
                let part = scaling_table(&fit);
                match &mut table {
                    Some(t) => t.rows.extend(part.rows),
                    None => table = Some(part),
                }
            }
            let table = table.expect("two variants were fitted");
            emit(
                &cfg,
                &table,
                Metadata::for_config(&cfg).with("kind", "scaling-fit"),
            )
        }
        Command::Validate { max_n } => {
            let oracle = OracleConfig {
                fock_cutoff: cfg.oracle_fock_cutoff,
                ..OracleConfig::default()
            };
            let report = run_validation(max_n, &cfg.baths, &cfg.solver, &oracle);
            let table = report.table();
            for r in &table.rows {
                println!(
                    "{}",
                    r.iter().map(Value::render).collect::<Vec<_>>().join("\t")
                );
            }
            let failed = report.checks.iter().filter(|c| !c.passed()).count();
            if cfg.out.is_some() {
                emit(
                    &cfg,
                    &table,
                    Metadata::for_config(&cfg).with("kind", "validate"),
                )?;
            }
            if failed == 0 {
                println!("all {} comparisons passed", report.checks.len());
                Ok(())
            } else {
                Err(Failure::Compute(format!(
                    "{failed} of {} comparisons failed",
                    report.checks.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
