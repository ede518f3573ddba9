use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qccd::codes::CodeKind;
use qccd::device::{Topology, Wiring};
use qccd::emit::{metrics_csv, parse_trace, write_atomic};
use qccd::pipeline::load_file;
use qccd::sweep::{run_sweep, write_artifacts, Artifacts, SweepConfig};
use qccd::verify::{verify_stream, verify_trace, Report};
use qccd::{compile, CompileConfig, ConfigTuple};

/// Compile surface-code memory experiments for trapped-ion QCCD devices.
#[derive(Parser)]
#[command(name = "qccd", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile one configuration and write its trace, metrics and Stim files.
    Compile(CompileArgs),
    /// Run a grid of configurations from a TOML or JSON file.
    Sweep(SweepArgs),
    /// Replay a configuration (or a saved trace) through the invariant checker.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct PointArgs {
    /// Shorthand `CODE,d,capacity,TOPOLOGY`, e.g. `S,3,2,G`.
    tuple: Option<ConfigTuple>,
    /// Base config file (.toml or .json); flags override it.
    #[arg(long, env = "QCCD_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "QCCD_CODE")]
    code: Option<CodeKind>,
    #[arg(long, env = "QCCD_DISTANCE")]
    distance: Option<usize>,
    #[arg(long, env = "QCCD_CAPACITY")]
    capacity: Option<usize>,
    #[arg(long, env = "QCCD_TOPOLOGY")]
    topology: Option<Topology>,
    #[arg(long, env = "QCCD_WIRING")]
    wiring: Option<Wiring>,
    /// Gate improvement factor f; every error probability is divided by it.
    #[arg(long, env = "QCCD_IMPROVEMENT")]
    improvement: Option<f64>,
    #[arg(long, env = "QCCD_ROUNDS")]
    rounds: Option<usize>,
    /// Tie-breaking seed. Compilation is deterministic, so this is only
    /// recorded alongside the outputs.
    #[arg(long, env = "QCCD_SEED", default_value_t = 0)]
    seed: u64,
}

impl PointArgs {
    fn resolve(&self) -> Result<CompileConfig> {
        let mut cfg: CompileConfig = match &self.config {
            Some(p) => load_file(p)?,
            None => CompileConfig::default(),
        };
        if let Some(t) = self.tuple {
            cfg.code = t.code;
            cfg.distance = t.distance;
            cfg.capacity = t.capacity;
            cfg.topology = t.topology;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(code, distance, capacity, topology, wiring, improvement, rounds);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, env = "QCCD_OUT", default_value = "out")]
    out: PathBuf,
    /// Skip the Stim document.
    #[arg(long)]
    no_stim: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep file (.toml or .json).
    config: PathBuf,
    #[arg(long, env = "QCCD_OUT")]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "QCCD_JOBS")]
    jobs: Option<usize>,
    #[arg(long, env = "QCCD_ROUNDS")]
    rounds: Option<usize>,
    /// Also write a trace and Gantt file per point.
    #[arg(long)]
    traces: bool,
    #[arg(long, env = "QCCD_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Check this JSON-lines trace instead of a fresh compile.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Compile(a) => cmd_compile(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Verify(a) => cmd_verify(a),
    }
}

fn echo_config(dir: &Path, name: &str, value: &impl serde::Serialize, seed: u64) -> Result<()> {
    let echo = serde_json::json!({ "seed": seed, "config": value });
    write_atomic(&dir.join(name), &format!("{}\n", serde_json::to_string_pretty(&echo)?))?;
    Ok(())
}

fn cmd_compile(a: CompileArgs) -> Result<ExitCode> {
    let cfg = a.point.resolve()?;
    let c = compile(&cfg).with_context(|| format!("compiling {}", cfg.stem()))?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let row = write_artifacts(&c, &a.out, Artifacts { stim: !a.no_stim, traces: true })?;
    write_atomic(&a.out.join("metrics.csv"), &metrics_csv(std::slice::from_ref(&row))?)?;
    echo_config(&a.out, "config.json", &cfg, a.point.seed)?;
    println!(
        "{} {} f={}: elapsed/round {:.1} us, movement ops {}, electrodes {}",
        ConfigTuple { code: cfg.code, distance: cfg.distance, capacity: cfg.capacity, topology: cfg.topology },
        cfg.wiring,
        cfg.improvement,
        c.metrics.elapsed_per_round,
        c.metrics.n_movement_ops,
        c.resources.n_electrodes,
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode> {
    let mut cfg = SweepConfig::load(&a.config)?;
    if let Some(out) = a.out {
        cfg.out = out;
    }
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    if let Some(r) = a.rounds {
        cfg.rounds = r;
    }
    cfg.traces |= a.traces;
    let rows = run_sweep(&cfg).with_context(|| format!("sweeping into {}", cfg.out.display()))?;
    echo_config(&cfg.out, "sweep.json", &cfg, a.seed)?;
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    println!("{} points, {} failed, metrics in {}", rows.len(), failed, cfg.out.join("metrics.csv").display());
    for r in rows.iter().filter(|r| !r.error.is_empty()) {
        eprintln!("  {},{},{},{} {}: {}", r.code, r.distance, r.capacity, r.topology, r.wiring, r.error);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode> {
    let cfg = a.point.resolve()?;
    let c = compile(&cfg).with_context(|| format!("compiling {}", cfg.stem()))?;
    let report: Report = match &a.trace {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let trace = parse_trace(&text)?;
            if trace.is_empty() {
                bail!("{} holds no ops", p.display());
            }
            verify_trace(&c.device, c.stream.num_qubits, &c.stream.initial_chains, &trace, cfg.wiring)
        }
        None => verify_stream(&c.device, &c.stream, &c.schedule.entries, cfg.wiring),
    };
    if report.is_clean() {
        println!("clean: {} ops checked", report.n_ops);
        return Ok(ExitCode::SUCCESS);
    }
    eprintln!("{} violation(s) in {} ops; first: {}", report.violations.len(), report.n_ops, report.first().unwrap());
    Ok(ExitCode::FAILURE)
}
