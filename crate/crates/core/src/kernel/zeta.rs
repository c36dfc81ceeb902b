//! Riemann zeta by Euler-Maclaurin summation, the reflection formula on the
//! left half-plane and a direct Dirichlet sum far to the right.

use std::sync::OnceLock;

use crate::complex::{Complex, ComplexValue};
use crate::context::PrecisionContext;
use crate::dd::{Dd, EPS};
use crate::error::{Error, Result};
use crate::kernel::{bernoulli, gamma};

const LN_TABLE: usize = 4096;

fn ln_table() -> &'static [Dd] {
    static T: OnceLock<Vec<Dd>> = OnceLock::new();
    T.get_or_init(|| (0..LN_TABLE).map(|n| if n == 0 { Dd::ZERO } else { Dd::from(n as f64).ln() }).collect())
}

#[inline]
fn ln_n(n: usize) -> Dd {
    if n < LN_TABLE {
        ln_table()[n]
    } else {
        Dd::from(n as f64).ln()
    }
}

/// `n^{-s}`
#[inline]
fn npow(n: usize, s: Complex) -> Complex {
    let l = ln_n(n);
    let m = (-(s.re * l)).exp();
    let (sn, cs) = (s.im * l).sin_cos();
    Complex::new(m * cs, -(m * sn))
}

/// Smallest prime factor of every integer below `SIEVE`.
const SIEVE: usize = 1 << 16;

fn smallest_factor() -> &'static [u32] {
    static T: OnceLock<Vec<u32>> = OnceLock::new();
    T.get_or_init(|| {
        let mut spf = vec![0u32; SIEVE];
        for i in 2..SIEVE {
            if spf[i] == 0 {
                let mut j = i;
                while j < SIEVE {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        spf
    })
}

/// `k^{-s}` for `k < n` (index 0 unused). Composite `k` reuse the complete
/// multiplicativity of `k -> k^{-s}`, so only primes need a transcendental
/// evaluation.
fn dirichlet_powers(n: usize, s: Complex) -> Vec<Complex> {
    let mut out = vec![Complex::ZERO; n.max(2)];
    out[1] = Complex::ONE;
    let spf = smallest_factor();
    for k in 2..n {
        let p = if k < SIEVE { spf[k] as usize } else { k };
        out[k] = if p == k { npow(k, s) } else { out[p] * out[k / p] };
    }
    out
}

/// Zeta value and absolute error bound.
pub fn zeta_raw(s: Complex, ctx: &PrecisionContext) -> Result<(Complex, f64)> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {s}")));
    }
    if s.im.is_zero() && s.re == 1.0 {
        return Err(Error::Pole("zeta at 1".into()));
    }
    let sigma = s.re.to_f64();
    if sigma < -0.5 {
        reflected(s, ctx)
    } else if sigma >= 40.0 {
        direct(s, ctx)
    } else {
        euler_maclaurin(s, ctx)
    }
}

fn direct(s: Complex, ctx: &PrecisionContext) -> Result<(Complex, f64)> {
    let sigma = s.re.to_f64();
    let target = ctx.target();
    let mut sum = Complex::ONE;
    let mut n = 2;
    loop {
        sum += npow(n, s);
        let tail = (n as f64).powf(1.0 - sigma) / (sigma - 1.0);
        if tail < target * 0.1 {
            let err = tail + 4.0 * EPS * (1.0 + s.im.to_f64().abs() * (n as f64).ln());
            return Ok((sum, err));
        }
        n += 1;
        if n > ctx.max_series_terms {
            return Err(Error::Cap(ctx.max_series_terms));
        }
    }
}

fn euler_maclaurin(s: Complex, ctx: &PrecisionContext) -> Result<(Complex, f64)> {
    let modulus = s.norm();
    let mut n_cut = ((modulus * 0.3) + 10.0).ceil() as usize;
    loop {
        if let Some(r) = em_at(s, n_cut, ctx)? {
            return Ok(r);
        }
        n_cut = n_cut * 3 / 2 + 1;
        if n_cut > ctx.max_series_terms {
            return Err(Error::Convergence(format!("Euler-Maclaurin at {s}")));
        }
    }
}

/// One Euler-Maclaurin attempt with cut `n`; `None` if the correction
/// series does not reach the target within the Bernoulli table.
fn em_at(s: Complex, n: usize, ctx: &PrecisionContext) -> Result<Option<(Complex, f64)>> {
    let sigma = s.re.to_f64();
    let t = s.im.to_f64().abs();
    let powers = dirichlet_powers(n, s);
    let mut head = Complex::ZERO;
    let mut abs_sum = 0.0;
    for k in 1..n {
        abs_sum += (k as f64).powf(-2.0 * sigma);
        head += powers[k];
    }
    let nd = Dd::from(n as f64);
    let n_s = npow(n, s);
    let sm1 = s - 1.0;
    let tail_int = (n_s * nd) / sm1;
    let mut sum = head + tail_int + n_s.scale(Dd::HALF);
    let scale = sum.norm().max(1.0);
    let target = ctx.target() * scale;
    let inv_n2 = (nd * nd).recip();
    // term_k = B_{2k}/(2k)! * s(s+1)...(s+2k-2) * n^{-s-2k+1}
    let mut poch = s;
    let mut pw = n_s / nd;
    let mut trunc = f64::INFINITY;
    for k in 1..=bernoulli::COUNT {
        let term = poch * pw * bernoulli::em_coeff(k);
        sum += term;
        let mag = term.norm();
        let next = mag * (s + (2 * k) as f64 + 1.0).norm() / (sigma + (2 * k) as f64 + 1.0);
        if mag < target && next < target {
            trunc = next;
            break;
        }
        let a = s + (2 * k - 1) as f64;
        let b = s + (2 * k) as f64;
        poch = poch * a * b;
        pw = pw * inv_n2;
    }
    if !trunc.is_finite() {
        return Ok(None);
    }
    // independent roundings add in quadrature; the phase t ln k dominates
    let phase = 2.0 + 0.25 * t * (n as f64).ln();
    let round = EPS * (phase * abs_sum.sqrt() + 4.0 * scale + (tail_int.norm() + 1.0) * 2.0);
    Ok(Some((sum, trunc + round)))
}

/// `zeta(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1-s) zeta(1-s)`
fn reflected(s: Complex, ctx: &PrecisionContext) -> Result<(Complex, f64)> {
    if s.im.is_zero() {
        let half = s.re.mul_pwr2(0.5);
        if half == half.floor() {
            return Ok((Complex::ZERO, 0.0));
        }
    }
    let one_m = Complex::ONE - s;
    let (z1, e1) = zeta_raw(one_m, ctx)?;
    let (lg, eg) = gamma::ln_gamma_raw(one_m)?;
    let ls = s.scale(Dd::FRAC_PI_2).ln_sin();
    let l = s.scale(Dd::LN_2) + (s - 1.0).scale(Dd::LN_PI) + ls + lg;
    let pref = l.exp();
    let v = pref * z1;
    let pm = pref.norm();
    let err = pm * (e1 + z1.norm() * (eg + 8.0 * EPS * (l.norm() + 4.0)));
    Ok((v, err))
}

/// `(s - 1) zeta(s)`, entire, with the pole cancelled through the Laurent
/// expansion when `s` is within `10^{-digits/2}` of 1.
pub fn zeta_sm1_raw(s: Complex, ctx: &PrecisionContext) -> Result<(Complex, f64)> {
    let d = s - 1.0;
    if d.norm() < ctx.half_tol() {
        // (s-1) zeta(s) = 1 + gamma_0 (s-1) - gamma_1 (s-1)^2 + O((s-1)^3)
        let v = Complex::ONE + d * Dd::EULER - d * d * Dd::STIELTJES_1;
        let err = 0.01 * d.norm().powi(3) + 4.0 * EPS;
        return Ok((v, err));
    }
    let (z, e) = zeta_raw(s, ctx)?;
    let v = d * z;
    Ok((v, d.norm() * e + 4.0 * EPS * v.norm()))
}

fn propagate(s: &ComplexValue, v: Complex, e: f64) -> f64 {
    if s.err == 0.0 {
        return e;
    }
    // crude |zeta'| envelope
    let t = s.value().norm();
    e + s.err * (v.norm() + 1.0) * (t + 2.0).ln()
}

/// `zeta(z)` to context precision.
pub fn complex_zeta(z: &ComplexValue, ctx: &PrecisionContext) -> Result<ComplexValue> {
    let (v, e) = zeta_raw(z.value(), ctx)?;
    Ok(ComplexValue::new(v, propagate(z, v, e)))
}

/// Real `zeta(x)` for `x != 1`.
pub fn zeta_real(x: Dd, ctx: &PrecisionContext) -> Result<Dd> {
    Ok(zeta_raw(Complex::real(x), ctx)?.0.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::c;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn z(re: f64, im: f64) -> (Complex, f64) {
        zeta_raw(c(re, im), &ctx()).unwrap()
    }

    fn lit(s: &str) -> Dd {
        s.parse().unwrap()
    }

    #[test]
    fn closed_forms() {
        let (v, e) = z(2.0, 0.0);
        let pi2_6 = Dd::PI.sqr() / 6.0;
        assert!((v.re - pi2_6).abs() < 1e-31 && v.im.is_zero());
        assert!(e < 1e-29);
        let (v0, _) = z(0.0, 0.0);
        assert!((v0.re + 0.5).abs() < 1e-31);
        let (vm1, _) = z(-1.0, 0.0);
        assert!((vm1.re + Dd::ONE / 12.0).abs() < 1e-31);
        assert_eq!(z(-4.0, 0.0).0, Complex::ZERO);
        assert!(matches!(zeta_raw(c(1.0, 0.0), &ctx()), Err(Error::Pole(_))));
    }

    #[test]
    fn reference_values() {
        let (h, _) = z(0.5, 0.0);
        assert!((h.re - lit("-1.460354508809586812889499152515298012467")).abs() < 1e-30);
        // zeta(1/2 + 100 i)
        let (v, e) = z(0.5, 100.0);
        let re = lit("2.692619885681324090476096470521590577063");
        let im = lit("-0.02038602960259816177072685329832152099173");
        assert!((v - Complex::new(re, im)).norm() < 1e-28, "{v} err {e}");
        // far right and far left
        let (r, _) = z(45.0, 3.0);
        let rr = lit("0.9999999999999861587858238777687435237329");
        let ri = lit("-2.482366539723988947787387968748102819411e-14");
        assert!((r - Complex::new(rr, ri)).norm() < 1e-31);
        let (l, _) = z(-7.5, 2.0);
        let lre = lit("0.04003678999569432161568453616739539872004");
        let lim = lit("0.0115783661091633527098880553367638552824");
        assert!((l - Complex::new(lre, lim)).norm() < 1e-28, "{l}");
    }

    #[test]
    fn laurent_near_one() {
        let ctx = ctx();
        let s = Complex::real(Dd::ONE + 1e-17);
        let (v, _) = zeta_sm1_raw(s, &ctx).unwrap();
        assert!((v.re - (Dd::ONE + Dd::EULER * 1e-17)).abs() < 1e-31);
        let s2 = c(1.001, 0.002);
        let (a, _) = zeta_sm1_raw(s2, &ctx).unwrap();
        let (b, _) = zeta_raw(s2, &ctx).unwrap();
        assert!((a - b * (s2 - 1.0)).norm() < 1e-30);
    }
}
