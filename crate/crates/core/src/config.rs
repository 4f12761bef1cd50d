//! JSON run configuration shared by the CLI subcommands.
//!
//! ```json
//! {
//!   "b0": 0.5, "b1": 0.5, "b2": 0.05, "T1": 2.0, "T2": 1.0,
//!   "two_I": [1, 2],
//!   "pulses": ["sin", {"pow": 0.5}, {"pow": 1}, {"pow": 2}],
//!   "tau": {"start": 1, "stop": 100, "points": 100, "spacing": "linear"},
//!   "integrator": {"initial_steps": 512, "convergence_tol": 1e-9, "max_doublings": 12},
//!   "out": "sweep.csv"
//! }
//! ```
//!
//! Every key is optional; missing fields fall back to the reference
//! engine (B₀ = B₁ = 0.5, B₂ = 0.05, T₁ = 2, T₂ = 1, spin-1/2, sinusoidal).
//! `two_I` and `tau` also accept a single number.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cycle::CycleConfig;
use crate::error::{Error, Result};
use crate::propagator::IntegratorConfig;
use crate::pulse::PulseShape;
use crate::spin::SpinQuantumNumber;
use crate::state::BathTemperature;
use crate::sweep::{CycleBase, SweepSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TauRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        let TauRange { start, stop, points, spacing } = *self;
        if points == 0 {
            return Err(Error::InvalidSweep("tau grid needs at least one point".into()));
        }
        if !(start > 0.0 && stop >= start && stop.is_finite()) {
            return Err(Error::InvalidSweep(format!("tau range [{start}, {stop}] must be positive and ordered")));
        }
        if points == 1 {
            return Ok(vec![start]);
        }
        let last = (points - 1) as f64;
        Ok((0..points)
            .map(|k| {
                let f = k as f64 / last;
                match spacing {
                    Spacing::Linear => start + (stop - start) * f,
                    Spacing::Log => (start.ln() + (stop.ln() - start.ln()) * f).exp(),
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Single(f64),
    List(Vec<f64>),
    Range(TauRange),
}

impl TauSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            TauSpec::Single(t) => Ok(vec![*t]),
            TauSpec::List(v) => Ok(v.clone()),
            TauSpec::Range(r) => r.values(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpinList {
    One(SpinQuantumNumber),
    Many(Vec<SpinQuantumNumber>),
}

impl SpinList {
    pub fn to_vec(&self) -> Vec<SpinQuantumNumber> {
        match self {
            SpinList::One(s) => vec![*s],
            SpinList::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(rename = "T1", default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(rename = "T2", default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    #[serde(rename = "two_I", default, skip_serializing_if = "Option::is_none")]
    pub two_i: Option<SpinList>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulses: Option<Vec<PulseShape>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<TauSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<bool>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Keys set in `other` replace those in `self`.
    pub fn overridden_by(self, other: RunConfig) -> RunConfig {
        RunConfig {
            b0: other.b0.or(self.b0),
            b1: other.b1.or(self.b1),
            b2: other.b2.or(self.b2),
            t1: other.t1.or(self.t1),
            t2: other.t2.or(self.t2),
            two_i: other.two_i.or(self.two_i),
            pulses: other.pulses.or(self.pulses),
            tau: other.tau.or(self.tau),
            integrator: other.integrator.or(self.integrator),
            out: other.out.or(self.out),
            parallel: other.parallel.or(self.parallel),
        }
    }

    pub fn base(&self) -> Result<CycleBase> {
        let reference = CycleConfig::reference(1.0);
        Ok(CycleBase {
            b0: self.b0.unwrap_or(reference.b0),
            b1: self.b1.unwrap_or(reference.b1),
            b2: self.b2.unwrap_or(reference.b2),
            t_hot: self.t1.map(BathTemperature::new).transpose()?.unwrap_or(reference.t_hot),
            t_cold: self.t2.map(BathTemperature::new).transpose()?.unwrap_or(reference.t_cold),
            integrator: self.integrator.unwrap_or_default(),
        })
    }

    pub fn spins(&self) -> Vec<SpinQuantumNumber> {
        self.two_i.as_ref().map(SpinList::to_vec).unwrap_or_else(|| vec![SpinQuantumNumber::HALF])
    }

    pub fn pulses(&self) -> Vec<PulseShape> {
        self.pulses.clone().unwrap_or_else(|| vec![PulseShape::Sinusoidal])
    }

    /// Single-cycle configuration: first spin, first pulse, and `tau` as a
    /// single value.
    pub fn cycle_config(&self) -> Result<CycleConfig> {
        let taus = self.tau.as_ref().ok_or_else(|| Error::Config("tau is required".into()))?.values()?;
        let [tau] = taus[..] else {
            return Err(Error::Config(format!("a single cycle needs one tau value, got {}", taus.len())));
        };
        let spin = *self.spins().first().ok_or_else(|| Error::Config("two_I is empty".into()))?;
        let shape = *self.pulses().first().ok_or_else(|| Error::Config("pulses is empty".into()))?;
        let cfg = self.base()?.at(spin, shape, tau);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sweep over every (pulse, spin, tau); `tau` defaults to 100 linear
    /// points on [1, 100].
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let tau_grid = match &self.tau {
            Some(t) => t.values()?,
            None => TauRange { start: 1.0, stop: 100.0, points: 100, spacing: Spacing::Linear }.values()?,
        };
        let spec = SweepSpec {
            base: self.base()?,
            tau_grid,
            pulses: self.pulses(),
            spins: self.spins(),
            output: self.out.clone(),
            parallel: self.parallel.unwrap_or(true),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config_parses() {
        let cfg = RunConfig::from_json(
            r#"{"b0": 0.5, "b1": 0.5, "b2": 0.05, "T1": 2, "T2": 1, "two_I": [1, 2, 3, 4],
                "pulses": ["sin", {"pow": 0.5}, {"pow": 1}, {"pow": 2}],
                "tau": {"start": 1, "stop": 100, "points": 100, "spacing": "log"},
                "integrator": {"initial_steps": 256}, "out": "x.csv"}"#,
        )
        .unwrap();
        let spec = cfg.sweep_spec().unwrap();
        assert_eq!(spec.spins.len(), 4);
        assert_eq!(spec.pulses.len(), 4);
        assert_eq!(spec.tau_grid.len(), 100);
        assert!((spec.tau_grid[99] - 100.0).abs() < 1e-12);
        assert!((spec.tau_grid[50] / spec.tau_grid[49] - spec.tau_grid[1] / spec.tau_grid[0]).abs() < 1e-12);
        assert_eq!(spec.base.integrator.initial_steps, 256);
        assert_eq!(spec.base.integrator.max_doublings, 12);
    }

    #[test]
    fn defaults_are_reference_engine() {
        let cfg = RunConfig::from_json(r#"{"tau": 12.5}"#).unwrap().cycle_config().unwrap();
        assert_eq!(cfg, CycleConfig::reference(12.5));
    }

    #[test]
    fn scalar_spin_and_tau_list() {
        let cfg = RunConfig::from_json(r#"{"two_I": 3, "tau": [1, 2, 4]}"#).unwrap();
        assert_eq!(cfg.spins(), vec![SpinQuantumNumber::from_two_i(3).unwrap()]);
        assert_eq!(cfg.sweep_spec().unwrap().tau_grid, vec![1.0, 2.0, 4.0]);
        assert!(cfg.cycle_config().is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::from_json(r#"{"T1": -1, "tau": 1}"#).unwrap().cycle_config().is_err());
        assert!(RunConfig::from_json(r#"{"two_I": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"pulses": ["square"]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"tau": [3, 2]}"#).unwrap().sweep_spec().is_err());
        assert!(RunConfig::from_json(r#"{"tau": {"start": 0, "stop": 1, "points": 3}}"#)
            .unwrap()
            .sweep_spec()
            .is_err());
        assert!(RunConfig::from_json(r#"{}"#).unwrap().cycle_config().is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let file = RunConfig::from_json(r#"{"b2": 0.1, "T1": 3}"#).unwrap();
        let flags = RunConfig { b2: Some(0.2), ..Default::default() };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.b2, Some(0.2));
        assert_eq!(merged.t1, Some(3.0));
    }
}
