use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use spin_otto::config::{TauRange, TauSpec};
use spin_otto::cycle::{adiabatic_limit_cycle, sudden_limit_cycle};
use spin_otto::sweep::{find_critical_time_with, run_sweep_to_file, CriticalTimeOptions};
use spin_otto::{config::SpinList, cycle_bounds, frictionless_scan, run_cycle, write_csv, PulseShape, RunConfig};
use spin_otto::{Error, Result, SpinQuantumNumber};

#[derive(Parser)]
#[command(name = "spin-otto", version, about = "Finite-time quantum Otto cycle of a driven spin")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one cycle and print the result as JSON.
    Cycle {
        #[command(flatten)]
        common: Common,
        /// Also report the sudden and quasi-static limits.
        #[arg(long)]
        limits: bool,
    },
    /// Sweep over tau, pulses and spins; CSV to --out or stdout.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluate grid points one at a time.
        #[arg(long)]
        serial: bool,
    },
    /// Work bounds, maximum efficiency and the engine condition.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Critical time where net work turns positive, per pulse.
    Tauc {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        lo: f64,
        #[arg(long, default_value_t = 60.0)]
        hi: f64,
        #[arg(long, default_value_t = 0.5)]
        scan_step: f64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
    /// First tau on a grid where total friction work drops below a threshold.
    Frictionless {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: RangeArgs,
        /// Threshold as a fraction of the quasi-static work.
        #[arg(long, default_value_t = 0.01)]
        fraction: f64,
        /// Absolute threshold; overrides --fraction.
        #[arg(long)]
        threshold: Option<f64>,
    },
}

/// Flags shared by every subcommand. Each overrides the matching key of
/// the --config file.
#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    b1: Option<f64>,
    #[arg(long)]
    b2: Option<f64>,
    #[arg(long = "t1")]
    t1: Option<f64>,
    #[arg(long = "t2")]
    t2: Option<f64>,
    /// Twice the spin quantum number; repeatable.
    #[arg(long = "two-i")]
    two_i: Vec<u32>,
    /// `sin` or `pow:N`; repeatable.
    #[arg(long = "pulse", value_parser = parse_pulse)]
    pulses: Vec<PulseShape>,
    /// Total adiabatic time for a single cycle.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    initial_steps: Option<usize>,
    #[arg(long)]
    convergence_tol: Option<f64>,
    #[arg(long)]
    max_doublings: Option<u32>,
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long)]
    tau_start: Option<f64>,
    #[arg(long)]
    tau_stop: Option<f64>,
    #[arg(long)]
    tau_points: Option<usize>,
    #[arg(long)]
    log: bool,
}

fn parse_pulse(s: &str) -> std::result::Result<PulseShape, String> {
    match s.split_once(':') {
        None if s == "sin" => Ok(PulseShape::Sinusoidal),
        Some(("pow", n)) => {
            let n: f64 = n.parse().map_err(|e| format!("bad exponent {n:?}: {e}"))?;
            PulseShape::power(n).map_err(|e| e.to_string())
        }
        _ => Err(format!("unknown pulse {s:?}; expected `sin` or `pow:N`")),
    }
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let integrator =
            if self.initial_steps.is_some() || self.convergence_tol.is_some() || self.max_doublings.is_some() {
                let mut i = file.integrator.unwrap_or_default();
                i.initial_steps = self.initial_steps.unwrap_or(i.initial_steps);
                i.convergence_tol = self.convergence_tol.unwrap_or(i.convergence_tol);
                i.max_doublings = self.max_doublings.unwrap_or(i.max_doublings);
                Some(i)
            } else {
                None
            };
        let two_i = match self.two_i.as_slice() {
            [] => None,
            list => {
                Some(SpinList::Many(list.iter().map(|&k| SpinQuantumNumber::from_two_i(k)).collect::<Result<_>>()?))
            }
        };
        let flags = RunConfig {
            b0: self.b0,
            b1: self.b1,
            b2: self.b2,
            t1: self.t1,
            t2: self.t2,
            two_i,
            pulses: (!self.pulses.is_empty()).then(|| self.pulses.clone()),
            tau: self.tau.map(TauSpec::Single),
            integrator,
            ..Default::default()
        };
        Ok(file.overridden_by(flags))
    }
}

impl RangeArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if self.tau_start.is_none() && self.tau_stop.is_none() && self.tau_points.is_none() && !self.log {
            return;
        }
        let mut range = match &cfg.tau {
            Some(TauSpec::Range(r)) => *r,
            _ => TauRange { start: 1.0, stop: 100.0, points: 100, spacing: Default::default() },
        };
        range.start = self.tau_start.unwrap_or(range.start);
        range.stop = self.tau_stop.unwrap_or(range.stop);
        range.points = self.tau_points.unwrap_or(range.points);
        if self.log {
            range.spacing = spin_otto::config::Spacing::Log;
        }
        cfg.tau = Some(TauSpec::Range(range));
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn pulse_json(p: &PulseShape) -> serde_json::Value {
    json!({ "pulse": p.tag(), "n": p.exponent() })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Cycle { common, limits } => {
            let cfg = common.resolve()?.cycle_config()?;
            let result = run_cycle(&cfg)?;
            let normalized = result.normalized(cfg.t_cold.value());
            let mut out = json!({ "config": cfg, "result": result, "normalized_by_kt2": normalized });
            if limits {
                out["sudden"] = serde_json::to_value(sudden_limit_cycle(&cfg)?)?;
                out["quasi_static"] = serde_json::to_value(adiabatic_limit_cycle(&cfg)?)?;
            }
            print_json(&out)?;
        }
        Command::Sweep { common, range, out, serial } => {
            let mut cfg = common.resolve()?;
            range.apply(&mut cfg);
            if out.is_some() {
                cfg.out = out;
            }
            if serial {
                cfg.parallel = Some(false);
            }
            let spec = cfg.sweep_spec()?;
            let records = run_sweep_to_file(&spec)?;
            if spec.output.is_none() {
                write_csv(&records, std::io::stdout().lock())?;
            }
            let failed = records.iter().filter(|r| !r.converged).count();
            if failed > 0 {
                eprintln!("{failed} of {} points did not converge", records.len());
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bounds { common } => {
            let mut cfg = common.resolve()?;
            cfg.tau.get_or_insert(TauSpec::Single(1.0));
            let bounds = cycle_bounds(&cfg.cycle_config()?)?;
            print_json(&serde_json::to_value(bounds)?)?;
        }
        Command::Tauc { common, lo, hi, scan_step, tolerance } => {
            let mut rc = common.resolve()?;
            rc.tau.get_or_insert(TauSpec::Single(1.0));
            let base = rc.cycle_config()?;
            let opts = CriticalTimeOptions { scan_step, tolerance };
            let mut rows = Vec::new();
            for p in rc.pulses() {
                let mut row = pulse_json(&p);
                match find_critical_time_with(&base, p, (lo, hi), opts) {
                    Ok(tc) => row["tau_c"] = json!(tc.tau_c),
                    Err(Error::NoSignChange { .. }) => row["tau_c"] = serde_json::Value::Null,
                    Err(e) => return Err(e),
                }
                rows.push(row);
            }
            print_json(&json!(rows))?;
        }
        Command::Frictionless { common, range, fraction, threshold } => {
            let mut rc = common.resolve()?;
            range.apply(&mut rc);
            let spec = rc.sweep_spec()?;
            let base = spec.base.at(spec.spins[0], spec.pulses[0], spec.tau_grid[0]);
            let threshold = match threshold {
                Some(t) => t,
                None => fraction * cycle_bounds(&base)?.w_up,
            };
            let mut rows = Vec::new();
            for p in &spec.pulses {
                let mut row = pulse_json(p);
                let hit = frictionless_scan(&base, *p, &spec.tau_grid, threshold)?;
                row["threshold"] = json!(threshold);
                row["tau"] = json!(hit.map(|h| h.tau));
                row["w_fric"] = json!(hit.map(|h| h.w_fric));
                rows.push(row);
            }
            print_json(&json!(rows))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
