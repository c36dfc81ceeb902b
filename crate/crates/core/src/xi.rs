//! The building blocks `l, a, b, xi, n, f` and the real function `Xi(t)`.
//!
//! Values that overflow or underflow on their own far from the real axis
//! are carried as `exp(log) * mult` and only combined at the end, so that
//! `sin(pi s / 4)` growth cancels against the gamma decay before any
//! exponential is taken.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::complex::{Complex, ComplexValue, RealValue};
use crate::context::PrecisionContext;
use crate::dd::{Dd, EPS};
use crate::error::{Error, Result};
use crate::kernel::gamma::ln_gamma_raw;
use crate::kernel::zeta::{zeta_raw, zeta_sm1_raw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockName {
    L,
    A,
    B,
    Xi,
    N,
    F,
}

impl BlockName {
    pub const ALL: [BlockName; 6] = [BlockName::L, BlockName::A, BlockName::B, BlockName::Xi, BlockName::N, BlockName::F];

    pub fn as_str(self) -> &'static str {
        match self {
            BlockName::L => "l",
            BlockName::A => "a",
            BlockName::B => "b",
            BlockName::Xi => "xi",
            BlockName::N => "n",
            BlockName::F => "f",
        }
    }
}

impl fmt::Display for BlockName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BlockName {
    type Err = Error;

    fn from_str(s: &str) -> Result<BlockName> {
        BlockName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown block '{s}'")))
    }
}

/// Vertical strip `x0 < Re(s) < x1`, or its closure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub x0: f64,
    pub x1: f64,
    pub closed: bool,
}

impl Strip {
    pub fn new(x0: f64, x1: f64, closed: bool) -> Result<Strip> {
        if !(x0 < x1) {
            return Err(Error::Domain(format!("strip needs x0 < x1, got {x0}, {x1}")));
        }
        Ok(Strip { x0, x1, closed })
    }

    pub fn contains(&self, s: Complex) -> bool {
        let x = s.re.to_f64();
        if self.closed {
            self.x0 <= x && x <= self.x1
        } else {
            self.x0 < x && x < self.x1
        }
    }
}

/// `exp(log) * mult` with separate error bounds on the two factors.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Scaled {
    pub log: Complex,
    pub log_err: f64,
    pub mult: Complex,
    pub mult_err: f64,
}

impl Scaled {
    pub fn value(&self) -> ComplexValue {
        let e = self.log.exp();
        let m = e.norm();
        let v = e * self.mult;
        let err = m * (self.mult_err + self.mult.norm() * (self.log_err + 4.0 * EPS)) * (1.0 + self.log_err);
        ComplexValue::new(v, err + 4.0 * EPS * v.norm())
    }

    fn times_log(mut self, log: Complex, err: f64) -> Scaled {
        self.log += log;
        self.log_err += err + 2.0 * EPS * log.norm();
        self
    }

    fn times(mut self, k: Complex) -> Scaled {
        self.mult_err = self.mult_err * k.norm() + 4.0 * EPS * (self.mult.norm() * k.norm());
        self.mult = self.mult * k;
        self
    }
}

/// `ln l(u) = -(u/2) ln pi + ln 2 + ln Gamma(1 + u/2)`
fn ln_l(u: Complex) -> Result<(Complex, f64)> {
    let (lg, e) = ln_gamma_raw(u.scale(Dd::HALF) + 1.0)?;
    let v = lg + Dd::LN_2 - u.scale(Dd::LN_PI.mul_pwr2(0.5));
    Ok((v, e + 2.0 * EPS * v.norm()))
}

/// `2 xi(u) = a(u) zeta(u)` in scaled form.
pub(crate) fn two_xi_scaled(u: Complex, ctx: &PrecisionContext) -> Result<Scaled> {
    if u.re.hi >= -0.5 {
        let (log, log_err) = ln_l(u)?;
        let (mult, mult_err) = zeta_sm1_raw(u, ctx)?;
        Ok(Scaled { log, log_err, mult, mult_err })
    } else {
        // a(u) zeta(u) = -2^{u+1} pi^{u/2} (u-1) Gamma(1-u) / Gamma(-u/2) * zeta(1-u)
        let (g1, e1) = ln_gamma_raw(Complex::ONE - u)?;
        let (g2, e2) = ln_gamma_raw(-u.scale(Dd::HALF))?;
        let log = (u + 1.0).scale(Dd::LN_2) + u.scale(Dd::LN_PI.mul_pwr2(0.5)) + g1 - g2;
        let (z, ez) = zeta_raw(Complex::ONE - u, ctx)?;
        let um1 = u - 1.0;
        let mult = -(um1 * z);
        let log_err = e1 + e2 + 4.0 * EPS * log.norm();
        Ok(Scaled { log, log_err, mult, mult_err: um1.norm() * ez + 4.0 * EPS * mult.norm() })
    }
}

/// `sin(pi s / 4)` folded into a scaled value; far from the real axis it is
/// applied through its logarithm.
fn with_sin_quarter(s: Complex, x: Scaled) -> Scaled {
    let w = s.scale(Dd::FRAC_PI_4);
    let arg_err = 2.0 * EPS * (w.norm() + 1.0);
    if w.im.hi.abs() < 20.0 {
        let sn = w.sin();
        let mut out = x.times(sn);
        // absolute error of sin near its zeros
        out.mult_err += x.mult.norm() * arg_err * w.im.to_f64().cosh();
        out
    } else {
        x.times_log(w.ln_sin(), arg_err)
    }
}

fn scaled_block(name: BlockName, s: Complex, ctx: &PrecisionContext) -> Result<Scaled> {
    match name {
        BlockName::L => {
            let (log, log_err) = ln_l(s)?;
            Ok(Scaled { log, log_err, mult: Complex::ONE, mult_err: 0.0 })
        }
        BlockName::A => Ok(scaled_block(BlockName::L, s, ctx)?.times(s - 1.0)),
        BlockName::B => {
            let u = s + 0.5;
            let a = scaled_block(BlockName::A, u, ctx)?;
            Ok(with_sin_quarter(s, a))
        }
        BlockName::Xi => {
            let mut x = two_xi_scaled(s, ctx)?;
            x.mult = x.mult.scale(Dd::HALF);
            x.mult_err *= 0.5;
            Ok(x)
        }
        BlockName::N => {
            let x = two_xi_scaled(s + 0.5, ctx)?;
            Ok(with_sin_quarter(s, x))
        }
        BlockName::F => unreachable!("f is the reciprocal of n"),
    }
}

fn block_value(name: BlockName, s: Complex, ctx: &PrecisionContext) -> Result<ComplexValue> {
    match name {
        BlockName::L if is_l_pole(s) => Err(Error::Pole(format!("l at {s}"))),
        BlockName::A if is_l_pole(s) => Err(Error::Pole(format!("a at {s}"))),
        BlockName::B if is_l_pole(s + 0.5) => Err(Error::Pole(format!("b at {s}"))),
        BlockName::F => {
            let n = scaled_block(BlockName::N, s, ctx)?.value();
            if n.abs() < ctx.half_tol() {
                return Err(Error::Pole(format!("f at {s}: |n| = {:e}", n.abs())));
            }
            Ok(n.recip())
        }
        _ => Ok(scaled_block(name, s, ctx)?.value()),
    }
}

/// `l` has poles where `1 + s/2` is a nonpositive integer.
fn is_l_pole(s: Complex) -> bool {
    s.im.is_zero() && s.re <= -2.0 && s.re.mul_pwr2(0.5) == s.re.mul_pwr2(0.5).floor()
}

/// Value of the named block at `s` with first-order propagation of the
/// input uncertainty.
pub fn eval_block(name: BlockName, s: &ComplexValue, ctx: &PrecisionContext) -> Result<ComplexValue> {
    let z = s.value();
    let v = block_value(name, z, ctx)?;
    if s.err == 0.0 {
        return Ok(v);
    }
    // |g'| estimated by a difference quotient on the scale of the input error
    let h = s.err.max(1e-12);
    let w = block_value(name, z + h, ctx)?;
    let slope = (w.value() - v.value()).norm() / h;
    Ok(v.with_err(v.err + slope * s.err))
}

/// Convenience for exact inputs.
pub fn block(name: BlockName, s: Complex, ctx: &PrecisionContext) -> Result<ComplexValue> {
    block_value(name, s, ctx)
}

/// `|xi(1/2 - s) - xi(1/2 + s)|` together with the combined error bound of
/// the two evaluations.
pub fn xi_symmetry_residual(s: &ComplexValue, ctx: &PrecisionContext) -> Result<(f64, f64)> {
    let z = s.value();
    let half = Complex::real(Dd::HALF);
    let a = block(BlockName::Xi, half - z, ctx)?;
    let b = block(BlockName::Xi, half + z, ctx)?;
    Ok(((a.value() - b.value()).norm(), a.err + b.err))
}

/// `2 xi(1/2 + it) e^{pi |t| / 4}` as a complex value (the imaginary part is
/// rounding noise).
fn xi_line_scaled(t: Dd, ctx: &PrecisionContext) -> Result<ComplexValue> {
    let u = Complex::new(Dd::HALF, t);
    let mut x = two_xi_scaled(u, ctx)?;
    x.log.re += Dd::FRAC_PI_4 * t.abs();
    x.log_err += 2.0 * EPS * t.abs().to_f64();
    Ok(x.value())
}

fn real_part_checked(v: ComplexValue, t: Dd) -> Result<RealValue> {
    let im = v.im.abs().to_f64();
    if im > 10.0 * v.err.max(f64::MIN_POSITIVE) {
        return Err(Error::Assertion(format!("Xi({}) has imaginary part {im:e} above 10x error {:e}", t.to_f64(), v.err)));
    }
    Ok(RealValue::new(v.re, v.err))
}

/// `Xi(t) = xi(1/2 + it)`, real for real `t`.
pub fn big_xi(t: Dd, ctx: &PrecisionContext) -> Result<RealValue> {
    let v = block(BlockName::Xi, Complex::new(Dd::HALF, t), ctx)?;
    real_part_checked(v, t)
}

/// `e^{pi |t| / 4} Xi(t)`: same sign as `Xi`, but of moderate size for all
/// `t`, which is what sign-change scanning needs.
pub fn big_xi_scaled(t: Dd, ctx: &PrecisionContext) -> Result<RealValue> {
    let v = xi_line_scaled(t, ctx)?;
    let r = real_part_checked(v, t)?;
    Ok(RealValue::new(r.value.mul_pwr2(0.5), r.err * 0.5))
}

/// The root of `zeta(sigma) = 2` on `(1, oo)`.
pub fn sigma0(ctx: &PrecisionContext) -> Result<Dd> {
    let g = |x: Dd| -> Result<Dd> { Ok(zeta_raw(Complex::real(x), ctx)?.0.re - 2.0) };
    let (mut lo, mut hi) = (Dd::from(1.2), Dd::from(2.0));
    if !(g(lo)? > 0.0 && g(hi)? < 0.0) {
        return Err(Error::Assertion("zeta(sigma) = 2 not bracketed by [1.2, 2]".into()));
    }
    let tol = ctx.tol();
    for _ in 0..200 {
        let mid = (lo + hi).mul_pwr2(0.5);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).to_f64() <= tol {
            break;
        }
    }
    Ok((lo + hi).mul_pwr2(0.5))
}
