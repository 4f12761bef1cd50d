//! Parameter sweeps over total adiabatic time, pulse shape and spin, plus
//! the critical-time and frictionless-window searches built on them.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle::{run_cycle, CycleConfig, CycleResult};
use crate::error::{Error, Result};
use crate::propagator::IntegratorConfig;
use crate::pulse::PulseShape;
use crate::spin::SpinQuantumNumber;
use crate::state::BathTemperature;

/// Everything in a [`CycleConfig`] except spin, pulse and τ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleBase {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub t_hot: BathTemperature,
    pub t_cold: BathTemperature,
    pub integrator: IntegratorConfig,
}

impl CycleBase {
    pub fn at(&self, spin: SpinQuantumNumber, shape: PulseShape, total_tau: f64) -> CycleConfig {
        CycleConfig {
            b0: self.b0,
            b1: self.b1,
            b2: self.b2,
            t_hot: self.t_hot,
            t_cold: self.t_cold,
            spin,
            shape,
            total_tau,
            integrator: self.integrator,
        }
    }
}

impl From<&CycleConfig> for CycleBase {
    fn from(cfg: &CycleConfig) -> Self {
        Self { b0: cfg.b0, b1: cfg.b1, b2: cfg.b2, t_hot: cfg.t_hot, t_cold: cfg.t_cold, integrator: cfg.integrator }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: CycleBase,
    /// Strictly ascending, positive.
    pub tau_grid: Vec<f64>,
    pub pulses: Vec<PulseShape>,
    pub spins: Vec<SpinQuantumNumber>,
    pub output: Option<PathBuf>,
    /// Evaluate grid points on the rayon pool.
    pub parallel: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.tau_grid.is_empty() {
            return Err(Error::InvalidSweep("tau grid is empty".into()));
        }
        if self.tau_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidSweep("tau values must be positive and finite".into()));
        }
        if self.tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSweep("tau grid must be strictly ascending".into()));
        }
        if self.pulses.is_empty() || self.spins.is_empty() {
            return Err(Error::InvalidSweep("need at least one pulse and one spin".into()));
        }
        for p in &self.pulses {
            p.validate()?;
        }
        self.base.integrator.validate()
    }

    pub fn len(&self) -> usize {
        self.tau_grid.len() * self.pulses.len() * self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One grid point of a sweep. Numeric fields are `None` when the
/// integrator failed to converge for that point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub pulse: &'static str,
    pub n: Option<f64>,
    pub two_i: u32,
    pub tau: f64,
    pub w: Option<f64>,
    pub eta: Option<f64>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub ds_e: Option<f64>,
    pub w_fric: Option<f64>,
    pub c: Option<f64>,
    pub steps: usize,
    pub converged: bool,
    #[serde(skip)]
    pub error: Option<String>,
    /// Position of the pulse in the sweep's pulse list; the primary sort key.
    #[serde(skip)]
    pub pulse_index: usize,
}

impl SweepRecord {
    fn from_outcome(pulse_index: usize, cfg: &CycleConfig, outcome: Result<CycleResult>) -> Self {
        let mut rec = SweepRecord {
            pulse: cfg.shape.tag(),
            n: cfg.shape.exponent(),
            two_i: cfg.spin.two_i(),
            tau: cfg.total_tau,
            w: None,
            eta: None,
            q1: None,
            q2: None,
            ds_e: None,
            w_fric: None,
            c: None,
            steps: 0,
            converged: false,
            error: None,
            pulse_index,
        };
        match outcome {
            Ok(r) => {
                rec.w = Some(r.net_work);
                rec.eta = r.efficiency;
                rec.q1 = Some(r.q_hot);
                rec.q2 = Some(r.q_cold);
                rec.ds_e = Some(r.delta_s_e);
                rec.w_fric = Some(r.w_fric_total);
                rec.c = Some(r.coherence_expansion);
                rec.steps = r.steps_used;
                rec.converged = true;
            }
            Err(e) => {
                if let Error::NoConvergence { steps, .. } = e {
                    rec.steps = steps;
                }
                rec.error = Some(e.to_string());
            }
        }
        rec
    }
}

pub const CSV_HEADER: [&str; 13] =
    ["pulse", "n", "two_I", "tau", "W", "eta", "Q1", "Q2", "dS_E", "W_fric", "C", "steps", "converged"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the fixed-header CSV; missing values are empty fields.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.pulse.to_string(),
            opt(r.n),
            r.two_i.to_string(),
            r.tau.to_string(),
            opt(r.w),
            opt(r.eta),
            opt(r.q1),
            opt(r.q2),
            opt(r.ds_e),
            opt(r.w_fric),
            opt(r.c),
            r.steps.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One cycle per (pulse, spin, τ), ordered by pulse (input order), then
/// spin, then τ. Non-convergence is recorded per row, never aborts.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let mut jobs = Vec::with_capacity(spec.len());
    for (pi, &pulse) in spec.pulses.iter().enumerate() {
        for &spin in &spec.spins {
            for &tau in &spec.tau_grid {
                jobs.push((pi, spec.base.at(spin, pulse, tau)));
            }
        }
    }
    let eval = |(pi, cfg): &(usize, CycleConfig)| SweepRecord::from_outcome(*pi, cfg, run_cycle(cfg));
    let mut records: Vec<SweepRecord> =
        if spec.parallel { jobs.par_iter().map(eval).collect() } else { jobs.iter().map(eval).collect() };
    records.sort_by(|a, b| a.pulse_index.cmp(&b.pulse_index).then(a.two_i.cmp(&b.two_i)).then(a.tau.total_cmp(&b.tau)));
    Ok(records)
}

/// Runs the sweep and writes the CSV to `spec.output` when set.
pub fn run_sweep_to_file(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    let records = run_sweep(spec)?;
    if let Some(path) = &spec.output {
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        write_csv(&records, std::io::BufWriter::new(file))?;
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalTimeOptions {
    /// Spacing of the upward scan that locates the first sign change.
    pub scan_step: f64,
    /// Bisection stops once the bracket is this narrow.
    pub tolerance: f64,
}

impl Default for CriticalTimeOptions {
    fn default() -> Self {
        Self { scan_step: 0.5, tolerance: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalTime {
    pub tau_c: f64,
    /// Final bisection bracket: `W(lo) ≤ 0 < W(hi)`.
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// First upward zero crossing of the net work `W(τ)` inside `bracket`.
///
/// `W(τ)` can oscillate for some ramps, so the scan walks up from the
/// lower end and bisects the first interval where `W` turns positive.
pub fn find_critical_time(base: &CycleConfig, pulse: PulseShape, bracket: (f64, f64)) -> Result<CriticalTime> {
    find_critical_time_with(base, pulse, bracket, CriticalTimeOptions::default())
}

pub fn find_critical_time_with(
    base: &CycleConfig,
    pulse: PulseShape,
    bracket: (f64, f64),
    opts: CriticalTimeOptions,
) -> Result<CriticalTime> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && opts.scan_step > 0.0 && opts.tolerance > 0.0) {
        return Err(Error::InvalidSweep(format!("bad critical-time bracket [{lo}, {hi}]")));
    }
    let cfg = base.with_shape(pulse);
    let mut evaluations = 0;
    let mut work = |tau: f64| -> Result<f64> {
        evaluations += 1;
        Ok(run_cycle(&cfg.with_tau(tau))?.net_work)
    };

    let mut a = lo;
    let mut wa = work(a)?;
    let crossing = loop {
        if a >= hi {
            break None;
        }
        let b = (a + opts.scan_step).min(hi);
        let wb = work(b)?;
        if wa <= 0.0 && wb > 0.0 {
            break Some((a, b));
        }
        a = b;
        wa = wb;
    };
    let (mut a, mut b) = crossing.ok_or(Error::NoSignChange { lo, hi })?;
    while b - a > opts.tolerance {
        let mid = 0.5 * (a + b);
        if work(mid)? > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(CriticalTime { tau_c: 0.5 * (a + b), lo: a, hi: b, evaluations })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrictionlessPoint {
    pub tau: f64,
    pub w_fric: f64,
}

/// Smallest grid τ whose total friction work is below `threshold`.
pub fn frictionless_scan(
    base: &CycleConfig,
    pulse: PulseShape,
    tau_grid: &[f64],
    threshold: f64,
) -> Result<Option<FrictionlessPoint>> {
    if tau_grid.is_empty() {
        return Err(Error::InvalidSweep("tau grid is empty".into()));
    }
    let cfg = base.with_shape(pulse);
    let mut grid = tau_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    for tau in grid {
        let res = run_cycle(&cfg.with_tau(tau))?;
        if res.w_fric_total < threshold {
            return Ok(Some(FrictionlessPoint { tau, w_fric: res.w_fric_total }));
        }
    }
    Ok(None)
}
