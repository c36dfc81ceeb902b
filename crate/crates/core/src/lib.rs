pub mod asymptotics;
pub mod audit;
pub mod coefficients;
pub mod complex;
pub mod context;
pub mod dd;
pub mod error;
pub mod fit;
pub mod kernel;
pub mod laplace;
pub mod partial_fraction;
pub mod quadrature;
pub mod xi;
pub mod zeros;

pub use complex::{Complex, ComplexValue};
pub use context::PrecisionContext;
pub use dd::Dd;
pub use error::{Error, Result, Warning};
