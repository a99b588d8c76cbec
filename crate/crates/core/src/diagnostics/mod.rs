//! Observables and analysis: reduced densities, natural orbitals, Schmidt
//! spectra, coherence, fragment tracking, centre-of-mass moments and error
//! metrics.

mod density;
mod fragments;
mod metrics;
mod moments;
mod schmidt;
mod tracking;

pub use density::{
    coherence_g1, natural_decomposition, one_body_density, one_body_density_mean_field, CoherenceMap,
    NaturalDecomposition, ReducedDensityMatrix,
};
pub use fragments::{
    decay_time, fragment_pair, fragment_positions, fragment_track, linear_slope, FragmentTrack, TrackOptions,
};
pub use metrics::{g1d_correction, g1d_coupling, miscibility, relative_density_error, Miscibility, ZETA_HALF};
pub use moments::{
    analytic_cm_variance, bright_cm_variance, bright_cm_variance_mean_field, cm_moments, cm_moments_mean_field,
    cm_variance, position_moments, position_moments_mean_field, CmMoments, MomentSource, PositionMoments,
    SpeciesOperators,
};
pub use schmidt::{schmidt_decompose, SchmidtDecomposition};
pub use tracking::{quarter_period, DarkTracker, QuarterPeriod};
