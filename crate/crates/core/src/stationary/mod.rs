//! Stationary behaviour of the fixed-rate activity process.

mod balance;
mod mixing;
mod product_form;
mod stability;
mod subset;

pub use balance::{balance_residual, exact_stationary_solve, exact_stationary_solve_with, SolveOptions};
pub use mixing::{
    mixing_time, mixing_time_with, worst_tv, MixingOptions, MixingProfile, DEFAULT_MIXING_CAP,
};
pub use product_form::{product_form, uniform_sigma_for_theta, FixedRates, StationaryDistribution};
pub use stability::{interior_check, stability_check, StabilityVerdict};
pub use subset::{subset_analysis, SubsetAnalysis};
