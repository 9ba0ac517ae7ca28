//! Transforms, eigen machinery and the θ-optimized transient bounds.

pub mod bounds;
pub mod eigen;
pub mod laplace;
pub mod optimize;
pub mod rate;
pub mod threshold;

pub use bounds::{bound_curve, ln_binomial, log_time_grid, lower_bound_rate, upper_bound_rate, BoundCurve, BoundPoint, BoundValue};
pub use eigen::{eigen, max_real_eig, perron_max_eig, EigenDecomposition};
pub use laplace::{csma_b_matrix, csma_laplace, eigen_solution, rk4_laplace, EigenSolution, LaplaceMethod, LaplaceValue};
pub use rate::{aloha_rate, RateFunction, Sign};
pub use threshold::{threshold_time, MacParams, ThresholdSetup};
