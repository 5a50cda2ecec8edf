//! Monte Carlo checks of Itô formulas, density and conditional-Gaussian
//! properties of solutions.

pub mod density;
pub mod gauss;
pub mod ito;
pub mod mollify;

pub use density::{density_diagnostics, difference_operator, h_delta, DensityConfig, DensityReport, HDelta};
pub use gauss::{conditional_moments, y_epsilon, y_epsilon_rate, ConditionalGaussReport, ConditionalMoments, RateReport};
pub use ito::{generalized_ito_residual, ito_check, ito_residual, ItoFunction, ItoReport, ItoTerms};
pub use mollify::mollify;
