use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DIGITS: u32 = 30;
/// Double-double carries about 32 significant digits; beyond 31 the
/// requested tolerance would sit below the rounding floor.
pub const MAX_DIGITS: u32 = 31;
pub const MIN_DIGITS: u32 = 15;

/// Working precision shared by every numeric operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionContext {
    pub digits: u32,
    pub max_series_terms: usize,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { digits: DEFAULT_DIGITS, max_series_terms: 100_000 }
    }
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        let ctx = PrecisionContext { digits, ..Default::default() };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_DIGITS..=MAX_DIGITS).contains(&self.digits) {
            return Err(Error::Config(format!("digits must lie in {MIN_DIGITS}..={MAX_DIGITS}, got {}", self.digits)));
        }
        if self.max_series_terms == 0 {
            return Err(Error::Config("max_series_terms must be positive".into()));
        }
        Ok(())
    }

    /// Relative tolerance `10^-digits`.
    pub fn tol(&self) -> f64 {
        10f64.powi(-(self.digits as i32))
    }

    /// Target for series truncation, one digit beyond the working precision.
    pub fn target(&self) -> f64 {
        10f64.powi(-(self.digits as i32) - 1)
    }

    /// Half the working precision, used to separate true zeros from noise.
    pub fn half_tol(&self) -> f64 {
        10f64.powf(-(self.digits as f64) / 2.0)
    }
}
