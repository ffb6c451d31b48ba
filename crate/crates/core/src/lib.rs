//! Simulation of the molecular quantum kicked rotor: laser-kicked linear
//! molecules, thermal ensembles, control scans over the delay between two
//! pulse trains, and the classical kicked-rotor limit.
//!
//! Internal units: time in revival periods `T_rev = 2πI/ħ`, energy in units
//! of the rotational constant `B`, angular momentum in units of ħ. The
//! effective Planck constant of a train with period `T` is `τ = 2π T/T_rev`.

pub mod basis;
pub mod classical;
pub mod coupling;
pub mod ensembles;
pub mod error;
pub mod kick;
pub mod observables;
pub mod propagate;
pub mod pulse;
pub mod resonance;
pub mod scenarios;

pub use basis::{build_basis, Parity, RotorBasis, WavePacket};
pub use classical::{
    classical_energy_trace, classical_free, classical_kick, classical_train_trace,
    ClassicalEnsemble, ClassicalSampling, ClassicalState, ClassicalTrace,
};
pub use coupling::{cos2_element, cos2_matrix};
pub use ensembles::{
    boltzmann_ensemble, ensemble_average, kick_strength_from_pulse, Member, MoleculeSpec,
    ThermalEnsemble,
};
pub use error::{Error, Result};
pub use kick::{free_phases, kick_operator, Cos2Spectrum, KickOperator};
pub use observables::{
    break_time_estimate, degree_of_control, participation_ratio, populations, raman_forward,
    retrieve_populations, rotational_energy, EnergyPoint, EnergyTrace, PopulationDistribution,
    RamanSpectrum,
};
pub use propagate::{
    propagate_delta_train, propagate_finite_pulse, propagate_train, Observation,
    PropagationOptions, PulseModel, Snapshot, TrainPropagator, Trajectory,
};
pub use pulse::{PulseSpec, PulseTrain, TwoStageTrain};
pub use resonance::{resonance_distance, Resonance};
pub use scenarios::{
    quantum_classical_transition, resonance_map, run_classical, run_control_experiment,
    run_scenario, scan_delay, scan_period_sensitivity, EnsembleRun, ExperimentConfig,
    ExperimentResult, Grid, InitialState, LevelPopulation, MoleculeRef, Provenance, RawAmplitude,
    Scenario, Series, Simulator, Table, TransitionCase,
};
