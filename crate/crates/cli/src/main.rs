use std::path::{Path, PathBuf};
use std::process::ExitCode;

use catalysis::io::{parse_density, parse_gibbs, parse_prob_vec, to_json_string};
use catalysis::qstates::DensityMatrix;
use catalysis::spectra::Base;
use catalysis::ProbVec;
use catalysis_cli::commands::{
    cmd_check_locc_mixed, cmd_check_multicopy, cmd_error_vs_size, cmd_protocol_run, cmd_rates,
    cmd_resonance_sweep,
};
use catalysis_cli::config::{
    resolve_output, StateSource, SweepConfig, TheoryName, DEFAULT_SAMPLES,
};
use catalysis_cli::output::write_file;
use catalysis_cli::{CliError, CliResult};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "catalysis",
    version,
    about = "Correlated-catalysis rates, sweeps and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// entanglement, athermality or noisy
    #[arg(long)]
    theory: Option<String>,
    /// Reference state file ({"weights": ...} or {"energies": ..., "beta": ...})
    #[arg(long)]
    gamma: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    /// Display base for entropies: 2 or e
    #[arg(long)]
    base: Option<String>,
    /// Output file (relative paths resolve against CATALYSIS_OUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Sweep {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Also write an SVG chart here
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Rates, copy number, catalyst size and sufficiency for a state pair
    Rates {
        source: PathBuf,
        target: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Protocol error against the number of copies
    ErrorVsSize {
        source: Option<PathBuf>,
        target: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
    },
    /// Minimal copies across a sampled fixed-entropy family
    Resonance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
        #[arg(long)]
        seed: Option<u64>,
        /// Entropy of the sampled sources, in the display base
        #[arg(long)]
        h_ini: Option<f64>,
        /// Entropy of the target, in the display base
        #[arg(long)]
        h_fin: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Comma-separated direction of the target from uniform
        #[arg(long, value_delimiter = ',')]
        target_direction: Option<Vec<f64>>,
    },
    /// Sufficient-condition checks
    Check {
        #[command(subcommand)]
        check: Check,
    },
    /// Catalytic protocol simulation
    Protocol {
        #[command(subcommand)]
        action: Protocol,
    },
}

#[derive(Subcommand)]
enum Check {
    /// Hashing bound against the target's entanglement
    LoccMixed {
        rho: PathBuf,
        sigma: Option<PathBuf>,
        /// Target entanglement in nats, instead of a target state
        #[arg(long)]
        e_sigma: Option<f64>,
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rényi-entropy condition for multi-copy conversion
    Multicopy {
        source: PathBuf,
        target: PathBuf,
        /// Number of log-spaced alpha points
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Protocol {
    /// Run the protocol with n copies
    Run {
        source: PathBuf,
        target: PathBuf,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load<T>(path: &Path, parse: fn(&str) -> catalysis::Result<T>) -> CliResult<T> {
    parse(&read(path)?).map_err(|source| CliError::Input {
        path: path.to_owned(),
        source,
    })
}

fn load_state(path: &Path) -> CliResult<ProbVec> {
    load(path, parse_prob_vec)
}

fn base(arg: &Option<String>) -> CliResult<Base> {
    match arg {
        Some(b) => Ok(b.parse()?),
        None => Ok(Base::Two),
    }
}

/// Config file (or defaults) with command-line overrides applied.
fn sweep_config(common: &Common, sweep: &Sweep) -> CliResult<SweepConfig> {
    let mut cfg = match &sweep.config {
        Some(path) => SweepConfig::from_file(path)?,
        None => SweepConfig::default(),
    };
    if let Some(t) = &common.theory {
        cfg.theory = Some(t.parse()?);
    }
    if let Some(g) = &common.gamma {
        cfg.gamma = Some(load(g, parse_gibbs)?);
    }
    if let Some(e) = common.eps {
        cfg.eps = e;
    }
    if let Some(b) = &common.base {
        cfg.base = b.parse()?;
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    if let Some(n) = sweep.n_min {
        cfg.n_min = n;
    }
    if let Some(n) = sweep.n_max {
        cfg.n_max = Some(n);
    }
    if let Some(w) = sweep.workers {
        cfg.workers = w;
    }
    if let Some(s) = &sweep.svg {
        cfg.svg = Some(s.clone());
    }
    Ok(cfg)
}

fn theory_for(
    common: &Common,
    d: usize,
    default: TheoryName,
) -> CliResult<catalysis::second_order::TheoryKind> {
    let cfg = SweepConfig {
        theory: common.theory.as_deref().map(str::parse).transpose()?,
        gamma: common
            .gamma
            .as_deref()
            .map(|g| load(g, parse_gibbs))
            .transpose()?,
        ..SweepConfig::default()
    };
    cfg.theory_kind(d, default)
}

fn emit(out: Option<&Path>, default_name: &str, text: &str) -> CliResult<()> {
    match resolve_output(out, default_name) {
        Some(path) => write_file(&path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_svg(svg: Option<&Path>, text: impl FnOnce() -> String) -> CliResult<()> {
    if let Some(path) = svg.and_then(|p| resolve_output(Some(p), "")) {
        write_file(&path, &text())?;
    }
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    Ok(to_json_string(value)? + "\n")
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Rates {
            source,
            target,
            common,
        } => {
            let (p, q) = (load_state(&source)?, load_state(&target)?);
            let theory = theory_for(&common, p.dim(), TheoryName::Athermality)?;
            let report = cmd_rates(
                &theory,
                &p,
                &q,
                common.eps.unwrap_or(0.03),
                base(&common.base)?,
            )?;
            emit(common.out.as_deref(), "rates.json", &json(&report)?)
        }
        Command::ErrorVsSize {
            source,
            target,
            common,
            sweep,
        } => {
            let mut cfg = sweep_config(&common, &sweep)?;
            match (source, target) {
                (Some(s), Some(t)) => {
                    cfg.source = Some(StateSource::Explicit {
                        source: load_state(&s)?,
                        target: load_state(&t)?,
                    });
                }
                (None, None) => {}
                _ => return Err(CliError::Config("give both SOURCE and TARGET".into())),
            }
            let result = cmd_error_vs_size(&cfg)?;
            emit(
                cfg.out.as_deref(),
                "error-vs-size.csv",
                &result.table().to_csv()?,
            )?;
            emit_svg(cfg.svg.as_deref(), || result.svg())
        }
        Command::Resonance {
            common,
            sweep,
            seed,
            h_ini,
            h_fin,
            dim,
            samples,
            target_direction,
        } => {
            let mut cfg = sweep_config(&common, &sweep)?;
            if seed.is_some() {
                cfg.seed = seed;
            }
            let flags = h_ini.is_some()
                || h_fin.is_some()
                || dim.is_some()
                || samples.is_some()
                || target_direction.is_some();
            if flags {
                let (old_ini, old_fin, old_dim, old_samples, old_dir) = match &cfg.source {
                    Some(StateSource::Contour {
                        dim,
                        h_ini,
                        h_fin,
                        samples,
                        direction,
                    }) => (
                        Some(cfg.base.from_nats(*h_ini)),
                        Some(cfg.base.from_nats(*h_fin)),
                        Some(*dim),
                        Some(*samples),
                        Some(direction.clone()),
                    ),
                    _ => (None, None, None, None, None),
                };
                let dim = dim.or(old_dim).unwrap_or(3);
                let direction = target_direction.or(old_dir.filter(|d| d.len() == dim));
                cfg.source = Some(
                    cfg.contour(
                        dim,
                        h_ini
                            .or(old_ini)
                            .ok_or_else(|| CliError::Config("missing --h-ini".into()))?,
                        h_fin
                            .or(old_fin)
                            .ok_or_else(|| CliError::Config("missing --h-fin".into()))?,
                        samples.or(old_samples).unwrap_or(DEFAULT_SAMPLES),
                        direction,
                    ),
                );
            }
            let result = cmd_resonance_sweep(&cfg)?;
            emit(
                cfg.out.as_deref(),
                "resonance.csv",
                &result.table().to_csv()?,
            )?;
            if let Some(s) = result.summary() {
                eprintln!(
                    "closest to resonance: sample {} with n = {}; family minimum n = {}; quintile means {:?}",
                    s.closest_index, s.closest_n, s.family_min_n, s.quintile_means
                );
            }
            emit_svg(cfg.svg.as_deref(), || result.svg())
        }
        Command::Check {
            check:
                Check::LoccMixed {
                    rho,
                    sigma,
                    e_sigma,
                    base: b,
                    out,
                },
        } => {
            let rho: DensityMatrix = load(&rho, parse_density)?;
            let sigma = sigma.map(|s| load(&s, parse_density)).transpose()?;
            let report = cmd_check_locc_mixed(&rho, sigma.as_ref(), e_sigma, base(&b)?)?;
            emit(out.as_deref(), "locc-mixed.json", &json(&report)?)
        }
        Command::Check {
            check:
                Check::Multicopy {
                    source,
                    target,
                    grid,
                    base: b,
                    out,
                },
        } => {
            let report = cmd_check_multicopy(
                &load_state(&source)?,
                &load_state(&target)?,
                grid,
                base(&b)?,
            )?;
            emit(out.as_deref(), "multicopy.json", &json(&report)?)
        }
        Command::Protocol {
            action:
                Protocol::Run {
                    source,
                    target,
                    n,
                    common,
                },
        } => {
            let (p, q) = (load_state(&source)?, load_state(&target)?);
            let theory = theory_for(&common, p.dim(), TheoryName::Athermality)?;
            let report = cmd_protocol_run(&theory, &p, &q, n)?;
            emit(common.out.as_deref(), "protocol.json", &json(&report)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
