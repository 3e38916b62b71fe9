//! `burstsim`: generate traces, score their randomness and simulate the burst buffer.

mod output;
mod size;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use burstsim::report::{write_decisions, write_metrics, write_stats};
use burstsim::{
    analyze, generate, mix, save_trace, simulate_phases, AccessPattern, Config, InterleavePolicy, Metrics,
    PatternSpec, Phase, PolicyMode, Trace,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{read_trace, write_atomic};
use size::parse_bytes;

#[derive(Parser)]
#[command(name = "burstsim", version, about = "Traffic-aware SSD burst-buffer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace.
    Gen(GenArgs),
    /// Score every window of a trace.
    Analyze(AnalyzeArgs),
    /// Simulate one policy over one or more traces.
    Simulate(SimulateArgs),
    /// Simulate all four policies and write one row per policy.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Pattern {
    Contig,
    Random,
    Strided,
}

impl From<Pattern> for AccessPattern {
    fn from(p: Pattern) -> Self {
        match p {
            Pattern::Contig => AccessPattern::SegmentedContiguous,
            Pattern::Random => AccessPattern::SegmentedRandom,
            Pattern::Strided => AccessPattern::Strided,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Interleave {
    RoundRobin,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    pattern: Pattern,
    #[arg(long)]
    procs: u32,
    /// Total bytes across all processes, e.g. 16GiB.
    #[arg(long, value_parser = parse_bytes)]
    total: u64,
    /// Request size, e.g. 256KiB.
    #[arg(long, value_parser = parse_bytes)]
    req: u64,
    /// Overridden by BURSTSIM_SEED when set.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// File id stamped on every request.
    #[arg(long, default_value_t = 0)]
    file: u32,
    #[arg(long, value_enum, default_value_t = Interleave::RoundRobin)]
    interleave: Interleave,
    /// Existing trace to interleave with the generated one.
    #[arg(long)]
    mix: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    trace: PathBuf,
    #[arg(long, default_value_t = burstsim::DEFAULT_WINDOW, value_parser = parse_window)]
    window: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimOptions {
    /// Traces replayed back to back as separate applications.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    /// JSON configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Idle seconds inserted before every trace after the first.
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    opts: SimOptions,
    #[arg(long, value_parser = parse_mode, default_value = "ssdup-adaptive")]
    mode: PolicyMode,
    #[arg(long)]
    log_decisions: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    opts: SimOptions,
}

fn parse_window(s: &str) -> Result<usize, String> {
    let w: usize = s.parse().map_err(|e| format!("{e}"))?;
    if w < 2 {
        return Err("window must hold at least 2 requests".into());
    }
    Ok(w)
}

fn parse_mode(s: &str) -> Result<PolicyMode, String> {
    s.parse().map_err(|e: burstsim::Error| e.to_string())
}

fn seed_from_env(flag: u64) -> Result<u64> {
    match std::env::var("BURSTSIM_SEED") {
        Ok(v) => v.trim().parse().with_context(|| format!("BURSTSIM_SEED={v:?} is not an unsigned integer")),
        Err(_) => Ok(flag),
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    ensure!(args.procs > 0, "--procs must be positive");
    let seed = seed_from_env(args.seed)?;
    let spec = PatternSpec::new(args.pattern.into(), args.procs, args.total, args.req).seed(seed).file(args.file);
    let interleave = match args.interleave {
        Interleave::RoundRobin => InterleavePolicy::RoundRobin,
        Interleave::Random => InterleavePolicy::Random { seed },
    };
    let mut trace = generate(&spec, interleave)?;
    if let Some(other) = &args.mix {
        let other = read_trace(other)?;
        trace = mix(&[trace, other], seed)?;
    }
    write_atomic(&args.out, |w| save_trace(&trace, w))?;
    eprintln!("wrote {} requests to {}", trace.len(), args.out.display());
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let trace = read_trace(&args.trace)?;
    if trace.is_empty() {
        eprintln!("warning: {} has no requests", args.trace.display());
    }
    let stats = analyze(trace.requests(), args.window)?;
    write_atomic(&args.out, |w| write_stats(&stats, w))?;
    if stats.is_empty() {
        println!("mean_percentage NA");
    } else {
        let mean = stats.iter().map(|s| s.percentage).sum::<f64>() / stats.len() as f64;
        println!("mean_percentage {mean:.6}");
    }
    Ok(())
}

struct Workload {
    traces: Vec<Trace>,
    config: Config,
    gap: f64,
}

impl Workload {
    fn load(opts: &SimOptions) -> Result<Self> {
        ensure!(opts.gap.is_finite() && opts.gap >= 0.0, "--gap must be a non-negative number of seconds");
        let config = match &opts.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                Config::from_json(&text).with_context(|| format!("config {}", path.display()))?
            }
            None => Config::default(),
        };
        let traces = opts.traces.iter().map(|p| read_trace(p)).collect::<Result<Vec<_>>>()?;
        Ok(Self { traces, config, gap: opts.gap })
    }

    fn run(&self, mode: PolicyMode) -> Result<Metrics> {
        let phases: Vec<Phase<'_>> = self
            .traces
            .iter()
            .enumerate()
            .map(|(i, t)| if i == 0 { Phase::new(t) } else { Phase::new(t).idle_before(self.gap).boundary() })
            .collect();
        Ok(simulate_phases(&phases, mode, &self.config)?)
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let work = Workload::load(&args.opts)?;
    let metrics = work.run(args.mode)?;
    write_atomic(&args.opts.out, |w| write_metrics(std::slice::from_ref(&metrics), w))?;
    if let Some(path) = &args.log_decisions {
        write_atomic(path, |w| write_decisions(&metrics.decisions, w))?;
    }
    summarize(&metrics);
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let work = &Workload::load(&args.opts)?;
    let rows = std::thread::scope(|s| {
        let lanes: Vec<_> = PolicyMode::ALL.iter().map(|&mode| s.spawn(move || work.run(mode))).collect();
        lanes.into_iter().map(|h| h.join().expect("simulation lane panicked")).collect::<Result<Vec<_>>>()
    })?;
    write_atomic(&args.opts.out, |w| write_metrics(&rows, w))?;
    rows.iter().for_each(summarize);
    Ok(())
}

fn summarize(m: &Metrics) {
    println!(
        "{:<15} {:>10.3} s {:>9.1} MB/s  ssd {:>5.1}%",
        m.mode.as_str(),
        m.total_time,
        m.throughput_mbps(),
        100.0 * m.ssd_fraction
    );
}

fn check_distinct_outputs(paths: &[&Path]) -> Result<()> {
    for (i, a) in paths.iter().enumerate() {
        if paths[..i].contains(a) {
            bail!("{} is given as more than one output", a.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => {
            if let Some(log) = &a.log_decisions {
                check_distinct_outputs(&[&a.opts.out, log])?;
            }
            cmd_simulate(a)
        }
        Command::Compare(a) => cmd_compare(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
