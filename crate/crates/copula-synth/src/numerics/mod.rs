//! Scalar probability kernels, matrix routines, and the seeded random
//! source that every other module builds on.

pub mod matrix;
pub mod rng;
pub mod special;

pub use matrix::{cholesky, jacobi_eigen, nearest_correlation, CorrelationMatrix, SquareMatrix};
pub use rng::{sample_chi_squared, sample_std_normal_vector, RandomSource};
pub use special::{
    chi_squared_cdf, chi_squared_sf, kolmogorov_sf, std_normal_cdf, std_normal_quantile,
    student_t_cdf, student_t_quantile,
};
