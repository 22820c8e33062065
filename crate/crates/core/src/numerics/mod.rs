//! Complex linear algebra, the DFT, spectral-norm estimation and seeded
//! random numbers.

mod fft;
mod linalg;
mod rng;

pub use fft::{dft, idft, Fft};
pub use linalg::{pinv_rows, sigma_max, CMat, DenseMatrix, LinearOperator, PowerMethod};
pub(crate) use linalg::norm2;
pub use rng::{derive_seed, SimRng};

pub use num_complex::Complex64;
