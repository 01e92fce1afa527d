//! Command-line surface: plan, validate, stats, trace and oracle, all driven
//! by rover config files.
//!
//! Exit codes are a stable contract: 0 success, 2 no plan exists within the
//! horizon, 3 invalid configuration, 4 memory budget exceeded, 5 validation
//! failure. Unexpected errors exit 1.

mod manifest;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fsplan_core::fss::PlanningProblem;
use fsplan_core::oracle;
use fsplan_core::pack::{FieldSpec, StateLayout};
use fsplan_core::plan::{
    emit_plan, export_trace, parse_plan_json, parse_plan_text, trace_to_csv, validate_plan,
    TimedPlan,
};
use fsplan_core::rover::{RoverConfig, RoverDomain};
use fsplan_core::search::{
    plan_optimal, reachable, SearchError, SearchOptions, SearchStats, DEFAULT_MEMORY_CAP,
};
use fsplan_core::sig::SignatureMode;
use manifest::RunManifest;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_PLAN: u8 = 2;
pub const EXIT_INVALID_CONFIG: u8 = 3;
pub const EXIT_MEMORY_ABORT: u8 = 4;
pub const EXIT_VALIDATION_FAILURE: u8 = 5;

const MEMORY_CAP_ENV: &str = "PLANNER_MEMORY_CAP";

#[derive(Parser)]
#[command(
    name = "fsplan",
    about = "Explicit-state cost-optimal planner for the rover engine-control model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SearchFlags {
    /// Worker threads for frontier expansion; results are identical for any
    /// count.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Store 64-bit state signatures in the visited set instead of full
    /// (state, tick) keys.
    #[arg(long)]
    compact_hash: bool,
    /// Memory budget in bytes (suffixes K/M/G accepted). Overrides the
    /// PLANNER_MEMORY_CAP environment variable.
    #[arg(long)]
    memory_cap: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a cost-optimal plan and write plan files plus a manifest.
    Plan {
        /// Rover config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Output prefix; writes <out>.plan.txt, <out>.plan.json and
        /// <out>.manifest.json.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Replay a plan file against a config and report the outcome.
    Validate {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Optional JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reachability statistics for the configured model.
    Stats {
        #[arg(long)]
        config: PathBuf,
        /// Horizon in ticks; defaults to the config's t_max.
        #[arg(long)]
        horizon: Option<u32>,
        /// Optional JSON output path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Export the per-second trace of a plan as CSV.
    Trace {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the brute-force oracle (micro instances only).
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Horizon override in ticks; defaults to the config's t_max.
        #[arg(long)]
        max_ticks: Option<u32>,
        /// Expansion guard before the oracle aborts.
        #[arg(long, default_value_t = oracle::DEFAULT_EXPLOSION_GUARD)]
        guard: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Plan {
            config,
            out,
            search,
        } => cmd_plan(&config, &out, &search),
        Command::Validate { plan, config, out } => cmd_validate(&plan, &config, out.as_deref()),
        Command::Stats {
            config,
            horizon,
            out,
            search,
        } => cmd_stats(&config, horizon, out.as_deref(), &search),
        Command::Trace { plan, config, out } => cmd_trace(&plan, &config, &out),
        Command::Oracle {
            config,
            max_ticks,
            guard,
        } => cmd_oracle(&config, max_ticks, guard),
    }
}

/// Parses a byte size like "2048", "512M" or "2G".
fn parse_size(s: &str) -> Result<u64> {
    let s = s.trim();
    let (digits, mult) = match s.chars().last() {
        Some('K') | Some('k') => (&s[..s.len() - 1], 1u64 << 10),
        Some('M') | Some('m') => (&s[..s.len() - 1], 1u64 << 20),
        Some('G') | Some('g') => (&s[..s.len() - 1], 1u64 << 30),
        _ => (s, 1),
    };
    let value: u64 = digits
        .trim()
        .parse()
        .with_context(|| format!("bad size {s:?}"))?;
    Ok(value * mult)
}

/// Effective memory cap: flag over environment over default.
fn memory_cap(flags: &SearchFlags) -> Result<u64> {
    if let Some(s) = &flags.memory_cap {
        return parse_size(s);
    }
    if let Ok(s) = std::env::var(MEMORY_CAP_ENV) {
        return parse_size(&s).with_context(|| format!("bad {MEMORY_CAP_ENV}"));
    }
    Ok(DEFAULT_MEMORY_CAP)
}

fn search_options(flags: &SearchFlags) -> Result<SearchOptions> {
    Ok(SearchOptions {
        workers: flags.workers.max(1),
        compaction: flags.compact_hash.then_some(SignatureMode::Full64),
        memory_cap_bytes: memory_cap(flags)?,
    })
}

/// Loads and validates a config, mapping failures to exit code 3.
fn load_domain(path: &Path) -> Result<RoverDomain, u8> {
    match RoverConfig::from_path(path).and_then(RoverConfig::validate) {
        Ok(params) => Ok(RoverDomain::new(params)),
        Err(err) => {
            eprintln!("invalid config: {err}");
            Err(EXIT_INVALID_CONFIG)
        }
    }
}

fn load_plan(path: &Path) -> Result<TimedPlan> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading plan {}", path.display()))?;
    let parsed = if path.extension().and_then(|e| e.to_str()) == Some("json") {
        parse_plan_json(&text)
    } else {
        parse_plan_text(&text)
    };
    parsed.with_context(|| format!("parsing plan {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_plan(config: &Path, out: &Path, flags: &SearchFlags) -> Result<u8> {
    let domain = match load_domain(config) {
        Ok(d) => d,
        Err(code) => return Ok(code),
    };
    let options = search_options(flags)?;
    let problem = PlanningProblem::new(&domain, domain.params().t_max);

    let txt_path = out.with_extension("plan.txt");
    let json_path = out.with_extension("plan.json");
    let manifest_path = out.with_extension("manifest.json");
    let mut manifest = RunManifest::new("plan", config, domain.params(), &options);

    let outcome = match plan_optimal(&problem, &options) {
        Ok(o) => o,
        Err(SearchError::MemoryBudget { stats }) => {
            eprintln!("memory budget exceeded; partial statistics follow");
            eprintln!("{}", serde_json::to_string_pretty(&stats)?);
            manifest.stats = Some(stats);
            manifest.finish(EXIT_MEMORY_ABORT, &[]);
            write_file(&manifest_path, &manifest.to_json()?)?;
            return Ok(EXIT_MEMORY_ABORT);
        }
        Err(e) => return Err(e.into()),
    };

    manifest.stats = Some(outcome.stats.clone());
    match outcome.plan {
        Some(trajectory) => {
            let plan = emit_plan(&trajectory, &domain)?;
            write_file(&txt_path, &plan.to_text())?;
            write_file(&json_path, &plan.to_json())?;
            manifest.finish(EXIT_OK, &[&txt_path, &json_path]);
            write_file(&manifest_path, &manifest.to_json()?)?;
            println!(
                "plan found: duration {} s, cost {}, residual {} C",
                plan.metadata.duration_s,
                fsplan_core::Cost(plan.metadata.total_cost_micros),
                fsplan_core::fixed::tenths_to_string(plan.metadata.residual_charge_tenths)
            );
            print_stats_human(&outcome.stats);
            Ok(EXIT_OK)
        }
        None => {
            manifest.finish(EXIT_NO_PLAN, &[]);
            write_file(&manifest_path, &manifest.to_json()?)?;
            println!("no admissible plan within the horizon");
            print_stats_human(&outcome.stats);
            Ok(EXIT_NO_PLAN)
        }
    }
}

fn cmd_validate(plan_path: &Path, config: &Path, out: Option<&Path>) -> Result<u8> {
    let domain = match load_domain(config) {
        Ok(d) => d,
        Err(code) => return Ok(code),
    };
    let plan = match load_plan(plan_path) {
        Ok(p) => p,
        Err(err) => {
            eprintln!("{err:#}");
            return Ok(EXIT_VALIDATION_FAILURE);
        }
    };
    let report = validate_plan(&plan, &domain);
    let rendered = serde_json::to_string_pretty(&report)?;
    if let Some(path) = out {
        write_file(path, &rendered)?;
    }
    println!("{rendered}");
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_VALIDATION_FAILURE
    })
}

/// Theoretical state-space size: the product of the quantized field ranges.
fn theoretical_states(domain: &RoverDomain) -> f64 {
    domain.layout().state_space_size()
}

/// State-space size of the published discretization for this config's
/// mission constants: the published variable ranges (speed up to the
/// published 1.0, distance to the published goal) with three mode flags.
fn published_range_states(domain: &RoverDomain) -> Option<f64> {
    let p = domain.params();
    let q = p.quantum_t;
    let layout = StateLayout::new(vec![
        FieldSpec::new("a", -p.a_max_t, p.a_max_t, q),
        FieldSpec::new("v", 0, 10, q),
        FieldSpec::new("d", 0, 2000, q),
        FieldSpec::new("c", 0, p.c_max_t, q),
        FieldSpec::new("T_c", 0, p.t_c as i64, 1),
        FieldSpec::new("flags", 0, 7, 1),
    ])
    .ok()?;
    Some(layout.state_space_size())
}

#[derive(serde::Serialize)]
struct StatsReport {
    horizon: u32,
    stats: SearchStats,
    theoretical_states: f64,
    pruning_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline_reachable: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline_theoretical: Option<f64>,
}

fn cmd_stats(
    config: &Path,
    horizon: Option<u32>,
    out: Option<&Path>,
    flags: &SearchFlags,
) -> Result<u8> {
    let domain = match load_domain(config) {
        Ok(d) => d,
        Err(code) => return Ok(code),
    };
    let options = search_options(flags)?;
    let horizon = horizon.unwrap_or(domain.params().t_max);
    let stats = match reachable(&domain, horizon, &options) {
        Ok(s) => s,
        Err(SearchError::MemoryBudget { stats }) => {
            eprintln!("memory budget exceeded; partial statistics follow");
            eprintln!("{}", serde_json::to_string_pretty(&stats)?);
            return Ok(EXIT_MEMORY_ABORT);
        }
        Err(e) => return Err(e.into()),
    };

    let theoretical = theoretical_states(&domain);
    let baseline = domain.params().config.baseline.clone();
    let report = StatsReport {
        horizon,
        pruning_ratio: stats.reachable_count as f64 / theoretical,
        theoretical_states: theoretical,
        baseline_reachable: baseline.as_ref().map(|b| b.reachable_states),
        baseline_ratio: baseline
            .as_ref()
            .map(|b| stats.reachable_count as f64 / b.reachable_states as f64),
        baseline_theoretical: baseline.as_ref().map(|b| b.theoretical_states),
        stats,
    };
    let rendered = serde_json::to_string_pretty(&report)?;
    if let Some(path) = out {
        write_file(path, &rendered)?;
    }
    println!("{rendered}");
    println!(
        "reachable {} of {:.3e} theoretical states (ratio {:.3e})",
        report.stats.reachable_count, report.theoretical_states, report.pruning_ratio
    );
    if let Some(b) = report.baseline_reachable {
        println!(
            "baseline reachable {} (this run is {:.2}x)",
            b,
            report.baseline_ratio.unwrap_or(f64::NAN)
        );
    }
    if let Some(published) = published_range_states(&domain) {
        println!("published-range state space for these constants: {published:.3e}");
    }
    Ok(EXIT_OK)
}

fn cmd_trace(plan_path: &Path, config: &Path, out: &Path) -> Result<u8> {
    let domain = match load_domain(config) {
        Ok(d) => d,
        Err(code) => return Ok(code),
    };
    let plan = match load_plan(plan_path) {
        Ok(p) => p,
        Err(err) => {
            eprintln!("{err:#}");
            return Ok(EXIT_VALIDATION_FAILURE);
        }
    };
    match export_trace(&plan, &domain) {
        Ok(records) => {
            write_file(out, &trace_to_csv(&records))?;
            println!("wrote {} trace records to {}", records.len(), out.display());
            Ok(EXIT_OK)
        }
        Err(err) => {
            eprintln!("trace export failed: {err}");
            Ok(EXIT_VALIDATION_FAILURE)
        }
    }
}

fn cmd_oracle(config: &Path, max_ticks: Option<u32>, guard: u64) -> Result<u8> {
    let domain = match load_domain(config) {
        Ok(d) => d,
        Err(code) => return Ok(code),
    };
    let horizon = max_ticks.unwrap_or(domain.params().t_max);
    let problem = PlanningProblem::new(&domain, horizon);
    match oracle::brute_force_plan(&problem, horizon, guard) {
        Ok(result) => {
            let names: Vec<&str> = result
                .best_sequence
                .iter()
                .map(|&a| domain.rule_of(a).display_name())
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "best_cost_micros": result.best_cost.map(|c| c.0),
                    "best_cost": result.best_cost.map(|c| c.to_string()),
                    "best_sequence": names,
                    "sequences_explored": result.sequences_explored,
                }))?
            );
            Ok(if result.best_cost.is_some() {
                EXIT_OK
            } else {
                EXIT_NO_PLAN
            })
        }
        Err(err) => {
            eprintln!("oracle aborted: {err}");
            Ok(1)
        }
    }
}

fn print_stats_human(stats: &SearchStats) {
    println!(
        "search: {} nodes discovered, {} expanded, peak open {}, ~{} MiB peak, {:.2} s",
        stats.reachable_count,
        stats.expanded_count,
        stats.peak_open_size,
        stats.peak_memory_estimate / (1024 * 1024),
        stats.wall_time
    );
}
