pub mod bernoulli;
pub mod derivative;
pub mod gamma;
pub mod zeta;

pub use derivative::{complex_derivative, cauchy_derivative};
pub use gamma::complex_gamma;
pub use zeta::complex_zeta;
