//! Command-line front door: run scenarios against stores, consolidate and
//! sleep the memory ledger, and lint data files.
//!
//! Exit codes: 0 on any completed episode (impasse-terminal runs included),
//! 1 on IO or file-content errors, 2 on usage and parameter-range errors.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Deserialize;

use ouroboros_core::harness::build_scenario;
use ouroboros_core::memory::{self, load_ledger, MemoryLedger};
use ouroboros_core::schema_store::load_store;
use ouroboros_core::trace::{SleepData, Terminal, TraceEvent, TraceRecord};
use ouroboros_core::{run_episode, Limits, MonitorState, Params};

const CONFIG_ENV: &str = "OUROBOROS_CONFIG";

#[derive(Parser)]
#[command(name = "ouroboros", version, about = "Schema-driven recognition engine")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one episode of a scenario against a store and emit its trace.
    Run(RunArgs),
    /// Promote ripe ledger candidates into the store.
    Consolidate(ConsolidateArgs),
    /// Decay and prune unconsolidated ledger candidates.
    Sleep(SleepArgs),
    /// Lint store and scenario files.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Schema store file (JSONL).
    #[arg(long)]
    store: PathBuf,
    /// Scenario file (JSONL).
    #[arg(long)]
    scenario: PathBuf,
    /// Memory ledger to read and update with this run's events.
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Run seed. Reserved for scenario jitter; the engine itself is
    /// deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tick ceiling for the episode.
    #[arg(long, default_value_t = 200)]
    max_ticks: u64,
    /// Write the trace here instead of standard output.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    overrides: ParamFlags,
}

#[derive(Args)]
struct ConsolidateArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    ledger: PathBuf,
    #[command(flatten)]
    overrides: ParamFlags,
}

#[derive(Args)]
struct SleepArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    ledger: PathBuf,
    /// Current tick for age computation; defaults to 0, which decays without
    /// age-based pruning.
    #[arg(long, default_value_t = 0)]
    now: u64,
    /// Append the sleep record to this trace file.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    overrides: ParamFlags,
}

#[derive(Args)]
#[command(group(ArgGroup::new("target").required(true).multiple(true)))]
struct ValidateArgs {
    #[arg(long, group = "target")]
    store: Option<PathBuf>,
    #[arg(long, group = "target")]
    scenario: Option<PathBuf>,
}

/// Engine parameter overrides. Flags win over the OUROBOROS_CONFIG defaults
/// file (which deserializes into the same shape), which wins over the
/// built-in defaults.
#[derive(Args, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamFlags {
    /// Arousal-congruence discount in [0, 1].
    #[arg(long)]
    gamma: Option<f64>,
    /// Adoption floor for winner selection in [0, 1].
    #[arg(long)]
    winner_floor: Option<f64>,
    /// Satisfied threshold in (0, 1].
    #[arg(long)]
    theta_sat: Option<f64>,
    /// Impasse threshold in [0, 1), below theta-sat.
    #[arg(long)]
    theta_imp: Option<f64>,
    /// Critical-slot weight threshold in (0, 1].
    #[arg(long)]
    w_crit: Option<f64>,
    /// Confidence gain in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Tension gain in [0, 1].
    #[arg(long)]
    beta: Option<f64>,
    /// Fraction of tension released at success, in [0, 1].
    #[arg(long)]
    rho: Option<f64>,
    /// Timeout budget base, >= 1.
    #[arg(long)]
    base: Option<f64>,
    /// Quiet Satisfied iterations before an ambiguous flip, >= 1.
    #[arg(long)]
    n_flip: Option<u32>,
    /// Rival closeness for ambiguity, in [0, 1].
    #[arg(long)]
    delta: Option<f64>,
    /// Minimum fit gain that counts as improvement, > 0.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Bypass ticks at zero tension, >= 0.
    #[arg(long)]
    b_min: Option<f64>,
    /// Bypass ticks at full tension, >= b-min.
    #[arg(long)]
    b_max: Option<f64>,
    /// Memory window size, >= 1.
    #[arg(long)]
    k: Option<usize>,
    /// One-shot consolidation importance in [0, 1].
    #[arg(long)]
    tau_instant: Option<f64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    fn io(context: &str, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Consolidate(args) => cmd_consolidate(args),
        Cmd::Sleep(args) => cmd_sleep(args),
        Cmd::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn apply_overrides(params: &mut Params, src: &ParamFlags) {
    fn take<T: Copy>(target: &mut T, src: Option<T>) {
        if let Some(v) = src {
            *target = v;
        }
    }
    take(&mut params.gamma, src.gamma);
    take(&mut params.winner_floor, src.winner_floor);
    take(&mut params.theta_sat, src.theta_sat);
    take(&mut params.theta_imp, src.theta_imp);
    take(&mut params.w_crit, src.w_crit);
    take(&mut params.alpha, src.alpha);
    take(&mut params.beta, src.beta);
    take(&mut params.rho, src.rho);
    take(&mut params.timeout_base, src.base);
    take(&mut params.n_flip, src.n_flip);
    take(&mut params.delta, src.delta);
    take(&mut params.epsilon, src.epsilon);
    take(&mut params.bypass_min, src.b_min);
    take(&mut params.bypass_max, src.b_max);
    take(&mut params.window_k, src.k);
    take(&mut params.tau_instant, src.tau_instant);
}

fn build_params(flags: &ParamFlags) -> Result<Params, CliError> {
    let mut params = Params::default();
    if let Ok(path) = std::env::var(CONFIG_ENV) {
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read {CONFIG_ENV} file {path}: {e}")))?;
        let cfg: ParamFlags = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad {CONFIG_ENV} file {path}: {e}")))?;
        apply_overrides(&mut params, &cfg);
    }
    apply_overrides(&mut params, flags);
    params
        .validate()
        .map_err(|msg| CliError::Usage(format!("parameter out of range: {msg}")))?;
    Ok(params)
}

/// Exclusive-access guard: `<path>.lock` is created fresh and removed on
/// drop. A surviving lock file means another mutating command is active.
struct LockGuard {
    path: PathBuf,
}

impl LockGuard {
    fn acquire(target: &Path) -> Result<Self, CliError> {
        let path = lock_path(target);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(CliError::Io(format!(
                "lock conflict: {} exists; another command holds {}",
                path.display(),
                target.display()
            ))),
            Err(e) => Err(CliError::io("cannot create lock file", e)),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn lock_path(target: &Path) -> PathBuf {
    let mut name = target.file_name().unwrap_or_default().to_os_string();
    name.push(".lock");
    target.with_file_name(name)
}

/// Writes via a sibling temp file and renames it into place, so an
/// interrupted rewrite never leaves a half-written target.
fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let params = build_params(&args.overrides)?;
    if args.max_ticks == 0 {
        return Err(CliError::Usage("max-ticks must be > 0".to_string()));
    }
    let store = load_store(&args.store)
        .map_err(|e| CliError::io(&format!("store {}", args.store.display()), e))?;
    let scenario = build_scenario(&args.scenario)
        .map_err(|e| CliError::io(&format!("scenario {}", args.scenario.display()), e))?;
    let mut ledger = match &args.ledger {
        Some(path) if path.exists() => load_ledger(path)
            .map_err(|e| CliError::io(&format!("ledger {}", path.display()), e))?,
        _ => MemoryLedger::new(),
    };

    let mut monitor = MonitorState::new();
    let trace = run_episode(
        &store,
        &mut monitor,
        &mut ledger,
        &scenario,
        &params,
        &Limits {
            max_ticks: args.max_ticks,
        },
    )
    .map_err(|e| CliError::io("episode failed", e))?;

    let rendered = trace.to_jsonl();
    match &args.trace_out {
        Some(path) => write_atomic(path, &rendered)
            .map_err(|e| CliError::io(&format!("trace {}", path.display()), e))?,
        None => print!("{rendered}"),
    }
    if let Some(path) = &args.ledger {
        let _lock = LockGuard::acquire(path)?;
        write_atomic(path, &memory::ledger_to_jsonl(&ledger))
            .map_err(|e| CliError::io(&format!("ledger {}", path.display()), e))?;
    }

    let (terminal, schema, fit) = match &trace.terminal {
        Some(Terminal::Concluded { schema, fit }) => {
            ("conclude", schema.as_str().to_string(), format!("{fit}"))
        }
        Some(Terminal::MaxTicks) => ("max_ticks", "-".to_string(), "-".to_string()),
        Some(Terminal::Exhausted) => ("exhausted", "-".to_string(), "-".to_string()),
        None => ("unknown", "-".to_string(), "-".to_string()),
    };
    println!(
        "terminal={} schema={} fit={} iterations={} requests={} resets={} memory_events={} confidence={} tension={}",
        terminal,
        schema,
        fit,
        trace.iterations(),
        trace.count("request"),
        trace.count("reset"),
        trace.count("memory"),
        monitor.confidence,
        monitor.tension,
    );
    Ok(())
}

fn cmd_consolidate(args: ConsolidateArgs) -> Result<(), CliError> {
    let params = build_params(&args.overrides)?;
    let _store_lock = LockGuard::acquire(&args.store)?;
    let _ledger_lock = LockGuard::acquire(&args.ledger)?;
    let mut store = load_store(&args.store)
        .map_err(|e| CliError::io(&format!("store {}", args.store.display()), e))?;
    let mut ledger = load_ledger(&args.ledger)
        .map_err(|e| CliError::io(&format!("ledger {}", args.ledger.display()), e))?;
    let promoted = memory::consolidate(&mut ledger, &mut store, &params)
        .map_err(|e| CliError::io("consolidation failed", e))?;
    write_atomic(&args.store, &ouroboros_core::schema_store::store_to_jsonl(&store))
        .map_err(|e| CliError::io(&format!("store {}", args.store.display()), e))?;
    write_atomic(&args.ledger, &memory::ledger_to_jsonl(&ledger))
        .map_err(|e| CliError::io(&format!("ledger {}", args.ledger.display()), e))?;
    println!("promoted {}", promoted.len());
    Ok(())
}

fn cmd_sleep(args: SleepArgs) -> Result<(), CliError> {
    let params = build_params(&args.overrides)?;
    let _ledger_lock = LockGuard::acquire(&args.ledger)?;
    // The store is read for validation only; sleep never touches
    // consolidated schemata.
    load_store(&args.store)
        .map_err(|e| CliError::io(&format!("store {}", args.store.display()), e))?;
    let mut ledger = load_ledger(&args.ledger)
        .map_err(|e| CliError::io(&format!("ledger {}", args.ledger.display()), e))?;
    let report = memory::sleep_cycle(&mut ledger, args.now, &params);
    write_atomic(&args.ledger, &memory::ledger_to_jsonl(&ledger))
        .map_err(|e| CliError::io(&format!("ledger {}", args.ledger.display()), e))?;
    if let Some(path) = &args.trace_out {
        let record = TraceRecord {
            tick: args.now,
            event: TraceEvent::Sleep(SleepData {
                pruned: report.pruned,
                decayed: report.decayed,
            }),
        };
        let mut existing = if path.exists() {
            fs::read_to_string(path).map_err(|e| CliError::io("trace", e))?
        } else {
            String::new()
        };
        existing.push_str(&record.to_json_line());
        existing.push('\n');
        write_atomic(path, &existing).map_err(|e| CliError::io("trace", e))?;
    }
    println!("pruned {} decayed {}", report.pruned, report.decayed);
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    if let Some(path) = &args.store {
        let store = load_store(path)
            .map_err(|e| CliError::io(&format!("store {}", path.display()), e))?;
        println!("ok: {} ({} schemata)", path.display(), store.len());
    }
    if let Some(path) = &args.scenario {
        let scenario = build_scenario(path)
            .map_err(|e| CliError::io(&format!("scenario {}", path.display()), e))?;
        println!("ok: {} ({} features)", path.display(), scenario.ground.len());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        fs::write(&path, "old").unwrap();
        write_atomic(&path, "new").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "new");
        assert!(!path.with_file_name("data.jsonl.tmp").exists());
    }

    #[test]
    fn lock_guard_blocks_and_releases() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("store.jsonl");
        fs::write(&target, "").unwrap();
        let guard = LockGuard::acquire(&target).unwrap();
        assert!(matches!(LockGuard::acquire(&target), Err(CliError::Io(_))));
        drop(guard);
        assert!(LockGuard::acquire(&target).is_ok());
    }

    #[test]
    fn flags_override_defaults() {
        let flags = ParamFlags {
            theta_sat: Some(0.7),
            ..ParamFlags::default()
        };
        let params = build_params(&flags).unwrap();
        assert_eq!(params.theta_sat, 0.7);
    }

    #[test]
    fn out_of_range_flag_is_a_usage_error() {
        let flags = ParamFlags {
            theta_sat: Some(1.5),
            ..ParamFlags::default()
        };
        assert!(matches!(build_params(&flags), Err(CliError::Usage(_))));
    }
}
