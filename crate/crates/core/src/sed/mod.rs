//! Zero-point field synthesis, the radiation-damped oscillator driven by it,
//! and the absorbed/radiated power balance that fixes D.

mod balance;
mod lineshape;
mod oscillator;
mod zpf;

pub use balance::{fix_diffusion_constant, BalanceReport, DiffusionEstimate};
pub use lineshape::lineshape_x2;
pub use oscillator::{ensemble_nonstationary, sed_ensemble, sed_integrate, SedConfig, SedSummary, SedTrajectory, SED_CSV_HEADER};
pub use zpf::{covariance_phi, spectral_density, synthesize, SampledField, ZpfRealization, ZpfSpec, MIN_MODES};
