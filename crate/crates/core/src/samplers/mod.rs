//! Trajectory ensembles for the two kinds of diffusion and the kinematic
//! estimators that recover v, u and D from raw paths.

mod drive;
mod ensemble;
mod estimate;

pub use drive::{brownian_sample, nelson_sample, DriftFields, SamplerConfig, MAX_EXIT_FRACTION};
pub use ensemble::{ProcessTag, TrajectoryEnsemble, TRAJECTORY_CSV_HEADER};
pub use estimate::{
    estimate_diffusion, estimate_flux_velocity, estimate_osmotic_velocity, position_histogram, second_moment,
    BinSpec, BinnedEstimate, BINNED_CSV_HEADER, MIN_BIN_OCCUPANCY,
};
