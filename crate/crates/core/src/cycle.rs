//! Four-stroke Otto cycle: heating isochore, expansion adiabat, cooling
//! isochore, compression adiabat.
//!
//! Sign convention: work is counted as done *by* the working fluid, so
//! `net_work > 0` means the engine delivers work. Heats are absorbed by the
//! fluid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::{
    adiabatic_target, evolve_detailed, excess_energy, friction_work, sudden_target, IntegratorConfig,
};
use crate::pulse::{hamiltonian_at, FieldProtocol, Hamiltonian, PulseShape};
use crate::spin::{spin_operators, SpinOperators, SpinQuantumNumber};
use crate::state::{coherence, energy_entropy, gibbs_state, internal_energy, BathTemperature, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleConfig {
    pub b0: f64,
    /// Transverse field during the hot isochore.
    pub b1: f64,
    /// Transverse field during the cold isochore.
    pub b2: f64,
    pub t_hot: BathTemperature,
    pub t_cold: BathTemperature,
    pub spin: SpinQuantumNumber,
    pub shape: PulseShape,
    /// Total time of both adiabats; each lasts `total_tau / 2`.
    pub total_tau: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

impl CycleConfig {
    /// B₀ = B₁ = 0.5, B₂ = 0.05, T₁ = 2, T₂ = 1, spin-1/2, sinusoidal ramp.
    pub fn reference(total_tau: f64) -> Self {
        Self {
            b0: 0.5,
            b1: 0.5,
            b2: 0.05,
            t_hot: BathTemperature::new(2.0).expect("positive"),
            t_cold: BathTemperature::new(1.0).expect("positive"),
            spin: SpinQuantumNumber::HALF,
            shape: PulseShape::Sinusoidal,
            total_tau,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn with_tau(self, total_tau: f64) -> Self {
        Self { total_tau, ..self }
    }

    pub fn with_shape(self, shape: PulseShape) -> Self {
        Self { shape, ..self }
    }

    pub fn with_spin(self, spin: SpinQuantumNumber) -> Self {
        Self { spin, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.expansion()?;
        self.integrator.validate()
    }

    /// True when the cold bath is not colder than the hot one. Such
    /// configurations still compute.
    pub fn inverted_baths(&self) -> bool {
        self.t_hot.value() <= self.t_cold.value()
    }

    pub fn gap_hot(&self) -> f64 {
        self.b0.hypot(self.b1)
    }

    pub fn gap_cold(&self) -> f64 {
        self.b0.hypot(self.b2)
    }

    pub fn expansion(&self) -> Result<FieldProtocol> {
        FieldProtocol::new(self.b0, self.b1, self.b2, self.total_tau, self.shape)
    }

    pub fn compression(&self) -> Result<FieldProtocol> {
        Ok(self.expansion()?.reversed())
    }
}

/// Operating label of a cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Net work delivered.
    Engine,
    /// Heat flows through the fluid but no net work comes out.
    Dud,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    /// W_I, work done by the fluid during expansion.
    pub w_expansion: f64,
    /// W_II, work done by the fluid during compression.
    pub w_compression: f64,
    /// Q₁, heat absorbed from the hot bath.
    pub q_hot: f64,
    /// Q₂, heat absorbed from the cold bath (negative when released).
    pub q_cold: f64,
    pub net_work: f64,
    /// `W/Q₁`, only when `Q₁ > 0`.
    pub efficiency: Option<f64>,
    /// Energy-entropy increase summed over both adiabats.
    pub delta_s_e: f64,
    /// Per-adiabat energy-entropy increase: `[expansion, compression]`.
    pub delta_s_e_strokes: [f64; 2],
    /// Relative-entropy friction work summed over both adiabats.
    pub w_fric_total: f64,
    /// Per-adiabat friction work: `[expansion, compression]`.
    pub w_fric_strokes: [f64; 2],
    /// Per-adiabat excess energy `Tr[H_f(ρ_τ − ρ_a)]`, the second route to
    /// the friction work.
    pub excess_energy_strokes: [f64; 2],
    /// `|⟨ε₁|ρ|ε₂⟩|` between the two lowest levels of the cold Hamiltonian
    /// at the end of expansion.
    pub coherence_expansion: f64,
    /// Finest step count used by either adiabat (0 for the analytic limits).
    pub steps_used: usize,
    pub regime: Regime,
}

impl CycleResult {
    /// Copy of the energetic fields divided by `k_B T` (the cold-bath
    /// temperature is the customary unit).
    pub fn normalized(&self, temperature: f64) -> NormalizedEnergies {
        NormalizedEnergies {
            w_expansion: self.w_expansion / temperature,
            w_compression: self.w_compression / temperature,
            q_hot: self.q_hot / temperature,
            q_cold: self.q_cold / temperature,
            net_work: self.net_work / temperature,
            w_fric_total: self.w_fric_total / temperature,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedEnergies {
    pub w_expansion: f64,
    pub w_compression: f64,
    pub q_hot: f64,
    pub q_cold: f64,
    pub net_work: f64,
    pub w_fric_total: f64,
}

#[derive(Clone, Copy)]
enum StrokeModel<'a> {
    Finite(&'a IntegratorConfig),
    QuasiStatic,
    Sudden,
}

struct StrokeOutcome {
    rho: DensityMatrix,
    delta_s_e: f64,
    w_fric: f64,
    excess: f64,
    steps: usize,
}

fn run_stroke(
    model: StrokeModel<'_>,
    rho0: &DensityMatrix,
    proto: &FieldProtocol,
    h_i: &Hamiltonian,
    h_f: &Hamiltonian,
    ops: &SpinOperators,
) -> Result<StrokeOutcome> {
    let target = adiabatic_target(rho0, h_i, h_f)?;
    if let StrokeModel::QuasiStatic = model {
        return Ok(StrokeOutcome { rho: target.rho_a, delta_s_e: 0.0, w_fric: 0.0, excess: 0.0, steps: 0 });
    }
    let (rho, steps) = match model {
        StrokeModel::Finite(cfg) => {
            let ev = evolve_detailed(rho0, proto, ops, cfg)?;
            (ev.rho, ev.steps)
        }
        _ => (sudden_target(rho0), 0),
    };
    let delta_s_e = energy_entropy(&rho, h_f)? - energy_entropy(rho0, h_i)?;
    let w_fric = friction_work(&rho, &target)?;
    let excess = excess_energy(&rho, &target, h_f)?;
    Ok(StrokeOutcome { rho, delta_s_e, w_fric, excess, steps })
}

fn cycle_with(cfg: &CycleConfig, model: StrokeModel<'_>) -> Result<CycleResult> {
    cfg.validate()?;
    let ops = spin_operators(cfg.spin);
    let h1 = hamiltonian_at(cfg.b0, cfg.b1, &ops);
    let h2 = hamiltonian_at(cfg.b0, cfg.b2, &ops);

    let rho_hot = gibbs_state(&h1, cfg.t_hot)?;
    let expansion = run_stroke(model, &rho_hot, &cfg.expansion()?, &h1, &h2, &ops)?;
    let rho_cold = gibbs_state(&h2, cfg.t_cold)?;
    let compression = run_stroke(model, &rho_cold, &cfg.compression()?, &h2, &h1, &ops)?;

    let u_hot = internal_energy(&rho_hot, &h1)?;
    let u_cold = internal_energy(&rho_cold, &h2)?;
    let u_after_expansion = internal_energy(&expansion.rho, &h2)?;
    let u_after_compression = internal_energy(&compression.rho, &h1)?;

    let w_expansion = u_hot - u_after_expansion;
    let w_compression = u_cold - u_after_compression;
    let q_cold = u_cold - u_after_expansion;
    let q_hot = u_hot - u_after_compression;
    let net_work = w_expansion + w_compression;
    let efficiency = (q_hot > 0.0).then(|| net_work / q_hot);

    Ok(CycleResult {
        w_expansion,
        w_compression,
        q_hot,
        q_cold,
        net_work,
        efficiency,
        delta_s_e: expansion.delta_s_e + compression.delta_s_e,
        delta_s_e_strokes: [expansion.delta_s_e, compression.delta_s_e],
        w_fric_total: expansion.w_fric + compression.w_fric,
        w_fric_strokes: [expansion.w_fric, compression.w_fric],
        excess_energy_strokes: [expansion.excess, compression.excess],
        coherence_expansion: coherence(&expansion.rho, &h2, 0, 1)?,
        steps_used: expansion.steps.max(compression.steps),
        regime: if net_work > 0.0 { Regime::Engine } else { Regime::Dud },
    })
}

/// Finite-time cycle with both adiabats integrated numerically.
pub fn run_cycle(cfg: &CycleConfig) -> Result<CycleResult> {
    cycle_with(cfg, StrokeModel::Finite(&cfg.integrator))
}

/// τ → ∞ cycle: level populations carried through both adiabats. Gives
/// the work upper bound and `η = 1 − δ₂/δ₁`.
pub fn adiabatic_limit_cycle(cfg: &CycleConfig) -> Result<CycleResult> {
    cycle_with(cfg, StrokeModel::QuasiStatic)
}

/// τ → 0 cycle: the state is frozen while the field jumps. Gives the work
/// lower bound.
pub fn sudden_limit_cycle(cfg: &CycleConfig) -> Result<CycleResult> {
    cycle_with(cfg, StrokeModel::Sudden)
}

/// Quasi-static efficiency `1 − δ₂/δ₁`.
pub fn max_efficiency(b0: f64, b1: f64, b2: f64) -> Result<f64> {
    let hot = b0.hypot(b1);
    if hot == 0.0 {
        return Err(Error::ZeroGap);
    }
    Ok(1.0 - b0.hypot(b2) / hot)
}

/// `1 − T₂/T₁`.
pub fn carnot_efficiency(t_hot: BathTemperature, t_cold: BathTemperature) -> f64 {
    1.0 - t_cold.value() / t_hot.value()
}

/// Quasi-static engine condition `T₁ > (δ₁/δ₂)·T₂`.
pub fn positive_work_condition(cfg: &CycleConfig) -> bool {
    cfg.t_hot.value() * cfg.gap_cold() > cfg.gap_hot() * cfg.t_cold.value()
}

/// Analytic limits of a configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleBounds {
    pub w_lb: f64,
    pub w_up: f64,
    pub w_lb_over_kt2: f64,
    pub w_up_over_kt2: f64,
    pub eta_m: f64,
    pub eta_c: f64,
    pub positive_work: bool,
}

pub fn cycle_bounds(cfg: &CycleConfig) -> Result<CycleBounds> {
    let w_lb = sudden_limit_cycle(cfg)?.net_work;
    let w_up = adiabatic_limit_cycle(cfg)?.net_work;
    let t2 = cfg.t_cold.value();
    Ok(CycleBounds {
        w_lb,
        w_up,
        w_lb_over_kt2: w_lb / t2,
        w_up_over_kt2: w_up / t2,
        eta_m: max_efficiency(cfg.b0, cfg.b1, cfg.b2)?,
        eta_c: carnot_efficiency(cfg.t_hot, cfg.t_cold),
        positive_work: positive_work_condition(cfg),
    })
}
