//! Experiment orchestration: configs, simulations checked against predictions, and output files.

use thiserror::Error;

pub mod config;
pub mod experiments;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod sweep;

pub use config::{ConfigError, EtaSpec, NoiseKind, NoiseSpec, PlateauSpec, RandInitSpec, ScenarioConfig, SimulationMode, Spectrum};
pub use experiments::{
    denoise_experiment, divergence_probes, plateau_experiment, random_init_experiment, ProbeReport, PROBE_GRID,
};
pub use report::{emit, Check, Format, HitTime, PlateauWindow, Record, Report};
pub use rng::Prng;
pub use scenario::{build_target, predict, run_scenario, simulate, Target, Trace, Tracking};
pub use sweep::{sweep_bracket, SweepGrid, SweepRow, SweepTable};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error(transparent)]
    Theory(#[from] crate::theory::TheoryError),
    #[error(transparent)]
    Emit(#[from] report::EmitError),
}

impl HarnessError {
    /// Configuration problems, as opposed to failures while running.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}

/// Run `f` on a pool capped by FACTORFLOW_THREADS, or on the global pool when unset.
pub(crate) fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var("FACTORFLOW_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}
