//! Finite-time quantum Otto cycle of a single spin-I driven by
//! `H(t) = B₀ I_z + B(t) I_x`.
//!
//! The adiabats are integrated as unitary evolutions under four ramp
//! shapes; the isochores replace the state by the bath's Gibbs state. Each
//! cycle reports work, heat, efficiency, energy-entropy production and the
//! relative-entropy friction work, alongside the analytic sudden and
//! quasi-static limits.

pub mod config;
pub mod cycle;
pub mod error;
pub mod linalg;
pub mod propagator;
pub mod pulse;
pub mod spin;
pub mod state;
pub mod sweep;
pub mod tolerance;

pub use config::RunConfig;
pub use cycle::{
    adiabatic_limit_cycle, carnot_efficiency, cycle_bounds, max_efficiency, positive_work_condition, run_cycle,
    sudden_limit_cycle, CycleBounds, CycleConfig, CycleResult, Regime,
};
pub use error::{Error, Result};
pub use linalg::{commutator, ComplexMatrix, EigenSystem};
pub use propagator::{adiabatic_target, evolve, friction_work, sudden_target, AdiabaticTarget, IntegratorConfig};
pub use pulse::{field_value, hamiltonian_at, FieldProtocol, Hamiltonian, PulseShape};
pub use spin::{spin_operators, SpinOperators, SpinQuantumNumber};
pub use state::{
    coherence, energy_entropy, gibbs_state, internal_energy, relative_entropy, von_neumann_entropy, BathTemperature,
    DensityMatrix,
};
pub use sweep::{
    find_critical_time, frictionless_scan, run_sweep, write_csv, CriticalTime, CycleBase, SweepRecord, SweepSpec,
};
pub use tolerance::Tolerances;
