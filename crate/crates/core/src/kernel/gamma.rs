//! Complex log-gamma and gamma by shifted Stirling series with reflection.

use crate::complex::{Complex, ComplexValue};
use crate::context::PrecisionContext;
use crate::dd::{Dd, EPS};
use crate::error::{Error, Result};
use crate::kernel::bernoulli;

/// Minimum modulus at which the asymptotic series is summed.
const STIRLING_RADIUS: f64 = 17.0;

fn is_nonpositive_integer(z: Complex) -> bool {
    z.im.is_zero() && z.re <= 0.0 && z.re == z.re.floor()
}

/// A logarithm of `Gamma(z)` and an absolute error bound for it.
///
/// The imaginary part is correct modulo `2 pi`, which is all that
/// exponentiation needs.
pub fn ln_gamma_raw(z: Complex) -> Result<(Complex, f64)> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(format!("gamma at {}", z.re.to_f64())));
    }
    if z.re.hi < 0.5 {
        let (lg, e) = ln_gamma_raw(Complex::ONE - z)?;
        let pz = z * Dd::PI;
        let ls = pz.ln_sin();
        // sin loses relative accuracy near its zeros
        let sin_mod = ls.re.to_f64().exp().min(1.0);
        let e_sin = 4.0 * EPS * (pz.norm() + 1.0) / sin_mod.max(1e-300);
        let v = Complex::real(Dd::LN_PI) - ls - lg;
        return Ok((v, e + e_sin + 4.0 * EPS * v.norm()));
    }
    let mut w = z;
    let mut shift = Complex::ONE;
    let mut shifted = false;
    let need = STIRLING_RADIUS * STIRLING_RADIUS;
    while w.re.hi * w.re.hi + w.im.hi * w.im.hi < need {
        shift *= w;
        w = w + 1.0;
        shifted = true;
    }
    let lw = w.ln();
    let main = (w - 0.5) * lw - w + Dd::LN_SQRT_2PI;
    let scale = main.norm().max(1.0);
    let inv = w.recip();
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut sum = Complex::ZERO;
    let mut k = 1;
    loop {
        let term = pow * bernoulli::stirling_coeff(k);
        sum += term;
        if term.norm() < 0.05 * EPS * scale || k == bernoulli::COUNT {
            break;
        }
        pow *= inv2;
        k += 1;
    }
    let mut v = main + sum;
    let mut err = 2.0 * EPS * (w.norm() * (lw.norm() + 1.0) + 1.0);
    if shifted {
        let ls = shift.ln();
        v -= ls;
        err += 2.0 * EPS * (ls.norm() + 20.0);
    }
    Ok((v, err))
}

/// `ln Gamma(z)` with the input uncertainty propagated through the digamma
/// magnitude, which is approximated by `|ln z|`.
pub fn ln_gamma(z: &ComplexValue, _ctx: &PrecisionContext) -> Result<ComplexValue> {
    let zz = z.value();
    let (v, e) = ln_gamma_raw(zz)?;
    let psi = (zz.norm() + 2.0).ln() + 1.0 / dist_to_poles(zz).max(1e-300);
    Ok(ComplexValue::new(v, e + psi * z.err))
}

fn dist_to_poles(z: Complex) -> f64 {
    let x = z.re.to_f64();
    let y = z.im.to_f64();
    if x > 0.5 {
        return x.hypot(y);
    }
    let nearest = x.round().min(0.0);
    (x - nearest).hypot(y)
}

/// `Gamma(z)` with a relative error bound.
pub fn complex_gamma(z: &ComplexValue, ctx: &PrecisionContext) -> Result<ComplexValue> {
    let lg = ln_gamma(z, ctx)?;
    let v = lg.value().exp();
    Ok(ComplexValue::new(v, v.norm() * (lg.err + 2.0 * EPS)))
}

/// Real `Gamma(x)`.
pub fn gamma_real(x: Dd) -> Result<Dd> {
    let (lg, _) = ln_gamma_raw(Complex::real(x))?;
    let v = lg.exp();
    Ok(v.re)
}

/// Real `ln |Gamma(x)|`.
pub fn ln_gamma_real(x: Dd) -> Result<Dd> {
    let (lg, _) = ln_gamma_raw(Complex::real(x))?;
    Ok(lg.re)
}
