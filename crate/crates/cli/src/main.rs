//! `spinlink`: command-line front end for the channel simulations.

mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spinlink::analysis::disordered_profile;
use spinlink::dynamics::linspace_times;
use spinlink::ensemble::{run_alpha_sweep, run_omega_alpha_grid, with_threads};
use spinlink::validation::oracle_checks;
use spinlink::{evolve, generate_sequence, DisorderKind, DisorderParams, PureState, SweepConfig, SystemSpec};

use manifest::RunManifest;

const THREADS_ENV: &str = "SPINLINK_THREADS";

#[derive(Parser)]
#[command(name = "spinlink", version, about = "Entanglement transfer through disordered spin channels")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one correlated disorder sequence as CSV `n,value`.
    GenDisorder {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Constant added to coupling sequences after standardization.
        #[arg(long, default_value_t = spinlink::disorder::DEFAULT_COUPLING_SHIFT)]
        shift: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean concurrence against the correlation exponent.
    SweepAlpha(SweepArgs),
    /// Mean concurrence over (alpha, outer-spin field).
    GridOmegaAlpha(SweepArgs),
    /// Site probabilities of the channel mode nearest a target energy.
    Wavefunction {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 201)]
        n: usize,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        target: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact time evolution of a system described by a JSON file.
    Dynamics {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        tmax: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = InitialArg::S)]
        initial: InitialArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the effective theory against exact dynamics.
    Validate {
        /// Only the clean reference system.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Sweep configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Worker threads; falls back to SPINLINK_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Onsite,
    Coupling,
}

impl From<KindArg> for DisorderKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Onsite => DisorderKind::OnSite,
            KindArg::Coupling => DisorderKind::Coupling,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum InitialArg {
    S,
    R,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    let started = Instant::now();
    match command {
        Command::GenDisorder {
            alpha,
            length,
            seed,
            kind,
            shift,
            out,
        } => {
            let params = DisorderParams::new(alpha, length, seed, kind.into()).with_shift(shift);
            let seq = generate_sequence(&params)?;
            let mut csv = String::from("n,value\n");
            for (n, v) in seq.values.iter().enumerate() {
                writeln!(csv, "{},{v}", n + 1)?;
            }
            let manifest = RunManifest::new("gen-disorder", params, Some(seed))?;
            emit(&csv, out.as_deref(), manifest, started)?;
        }
        Command::SweepAlpha(args) => {
            let (config, threads) = load_sweep(&args)?;
            let stats = with_threads(threads, || run_alpha_sweep(&config))??;
            let mut manifest = RunManifest::new("sweep-alpha", &config, Some(config.base_seed))?;
            manifest.threads = threads;
            emit(&stats.alpha_sweep_csv(), args.out.as_deref(), manifest, started)?;
        }
        Command::GridOmegaAlpha(args) => {
            let (config, threads) = load_sweep(&args)?;
            let stats = with_threads(threads, || run_omega_alpha_grid(&config))??;
            let mut manifest = RunManifest::new("grid-omega-alpha", &config, Some(config.base_seed))?;
            manifest.threads = threads;
            emit(&stats.omega_grid_csv(), args.out.as_deref(), manifest, started)?;
        }
        Command::Wavefunction {
            alpha,
            n,
            kind,
            seed,
            target,
            out,
        } => {
            let profile = disordered_profile(kind.into(), alpha, n, seed, target)?;
            let mut csv = String::from("n,prob\n");
            for (i, p) in profile.probabilities.iter().enumerate() {
                writeln!(csv, "{},{p}", i + 1)?;
            }
            #[derive(Serialize)]
            struct Echo {
                alpha: f64,
                n: usize,
                kind: DisorderKind,
                seed: u64,
                target: f64,
                mode_index: usize,
                mode_energy: f64,
            }
            let echo = Echo {
                alpha,
                n,
                kind: kind.into(),
                seed,
                target,
                mode_index: profile.mode_index,
                mode_energy: profile.mode_energy,
            };
            let manifest = RunManifest::new("wavefunction", echo, Some(seed))?;
            emit(&csv, out.as_deref(), manifest, started)?;
        }
        Command::Dynamics {
            config,
            tmax,
            samples,
            initial,
            out,
        } => {
            let spec: SystemSpec = read_json(&config)?;
            spec.validate()?;
            if !(tmax.is_finite() && tmax >= 0.0) {
                bail!("invalid tmax: must be finite and >= 0");
            }
            let start = match initial {
                InitialArg::S => spec.sender_index(),
                InitialArg::R => spec.receiver_index(),
            };
            let trace = evolve(&spec, &PureState::basis(spec.dim(), start), &linspace_times(tmax, samples))?;
            let mut csv = String::from("t,re_ds,im_ds,re_dr,im_dr,c_sr,leak\n");
            for i in 0..trace.len() {
                let (ds, dr) = (trace.amp_s[i], trace.amp_r[i]);
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    trace.times[i], ds.re, ds.im, dr.re, dr.im, trace.concurrence_sr[i], trace.population_leak[i]
                )?;
            }
            #[derive(Serialize)]
            struct Echo<'a> {
                system: &'a SystemSpec,
                tmax: f64,
                samples: usize,
                initial: InitialArg,
            }
            let echo = Echo {
                system: &spec,
                tmax,
                samples,
                initial,
            };
            let manifest = RunManifest::new("dynamics", echo, None)?;
            emit(&csv, out.as_deref(), manifest, started)?;
        }
        Command::Validate { quick } => {
            let checks = oracle_checks(quick);
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn load_sweep(args: &SweepArgs) -> Result<(SweepConfig, Option<usize>)> {
    let mut config: SweepConfig = read_json(&args.config)?;
    if let Some(r) = args.realizations {
        config.realizations = r;
    }
    if let Some(s) = args.base_seed {
        config.base_seed = s;
    }
    config.validate().context("invalid config")?;
    let threads = match args.threads {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.parse().with_context(|| format!("invalid {THREADS_ENV}: {v:?}"))?),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        bail!("invalid threads: must be >= 1");
    }
    Ok((config, threads))
}

/// Writes CSV to `out` plus its manifest, or to stdout when no path is given.
fn emit(csv: &str, out: Option<&Path>, manifest: RunManifest, started: Instant) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            let m = manifest.finish(started.elapsed(), path)?;
            eprintln!("wrote {} and {}", path.display(), m.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
