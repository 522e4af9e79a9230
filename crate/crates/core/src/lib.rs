//! Simulation and inference for generalized spiked covariance models.
//!
//! The crate covers the population side ([`model`]), data generation
//! ([`randgen`]), limiting-law transforms ([`stieltjes`]), sample spectra
//! ([`spectral`]), asymptotic projection laws ([`asymptotics`]), the
//! eigenspace test ([`inference`]) and a seeded Monte Carlo harness
//! ([`experiments`]).

pub mod asymptotics;
pub mod error;
pub mod experiments;
pub mod inference;
pub mod model;
pub mod randgen;
pub mod spectral;
pub mod stats;
pub mod stieltjes;

pub use asymptotics::{nu, nu_prime, projection_law, ProjectionLaw};
pub use error::{Error, Result};
pub use experiments::{
    export_report, run, run_clt, run_power, run_size, ConfigFile, ExperimentConfig, ExperimentKind, ExperimentReport,
};
pub use inference::{
    statistic_t, statistic_t1, statistic_t2, theta_omega, vartheta, Hypothesis, TestOutcome, VarthetaMode,
    VarthetaParts,
};
pub use model::{
    build_model, factorize, psi, psi_prime, validate_spikes, BulkSpectrum, FactorDecomposition, PopulationModel,
    Rotation, Side, SpectralRegime, SpikeReport, SpikeSpec,
};
pub use randgen::{draw_entries, fourth_moment, kappa_x, DataMatrix, EntryDistribution};
pub use spectral::{
    eig_desc, match_spike_indices, projection_norm, sample_covariance, ProjectionStats, SampleSpectrum,
};
pub use stieltjes::{
    bulk_moments, companion_derivatives, companion_m, empirical_m, estimate_spike, multiroot_filter, BulkMoments,
    EmpiricalTransform, TransformPoint,
};
