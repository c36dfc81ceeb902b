//! Residues of `f` at the zeros of `n`: the real family at `4w` and the
//! imaginary family at `i gamma_k`, the even power series `P_0` and the
//! partial sums `A`, `B`, `C` over the imaginary family.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex, ComplexValue, RealValue};
use crate::context::PrecisionContext;
use crate::dd::{Dd, EPS};
use crate::error::{Error, Result};
use crate::fit::{power_fit_upper_half, power_tail, PowerFit};
use crate::kernel::derivative::cauchy_derivative;
use crate::kernel::gamma::ln_gamma_raw;
use crate::kernel::zeta::zeta_raw;
use crate::xi::{block, BlockName};
use crate::zeros::ZeroCache;

/// How many `ln c~(4k)` values are precomputed.
const LN_CTILDE_TABLE: usize = 700;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    /// The pole at `4w`.
    Real(i64),
    /// The pole at `i gamma_k`; negative `k` stands for `-i gamma_{|k|}`.
    Imag(i64),
}

impl Pole {
    pub fn location(&self, cache: &ZeroCache) -> Result<Complex> {
        match *self {
            Pole::Real(w) => Ok(Complex::from(4.0 * w as f64)),
            Pole::Imag(k) => {
                let g = cache.gamma(k.unsigned_abs() as usize)?;
                Ok(Complex::imag(if k < 0 { -g } else { g }))
            }
        }
    }
}

/// `ln c~(4k)` and its absolute error.
fn ln_ctilde_raw(k: usize) -> Result<(Dd, f64)> {
    let ctx = PrecisionContext::default();
    let kk = Dd::from(k as f64);
    let (lg, eg) = ln_gamma_raw(Complex::real(kk.mul_pwr2(2.0) + 1.25))?;
    let lin = kk.mul_pwr2(2.0) - 0.25;
    let (z, ez) = zeta_raw(Complex::real(kk.mul_pwr2(4.0) + 0.5), &ctx)?;
    let prod = lin * z.re;
    if !(prod > 0.0) {
        return Err(Error::Assertion(format!("c~({}) is not positive", 4 * k)));
    }
    let v = -(Dd::LN_PI * 0.75) - lg.re - prod.ln();
    let err = eg + ez / z.re.abs().to_f64() + 4.0 * EPS * v.abs().to_f64();
    Ok((v, err))
}

fn ln_ctilde_table() -> &'static [(Dd, f64)] {
    static T: OnceLock<Vec<(Dd, f64)>> = OnceLock::new();
    T.get_or_init(|| {
        (0..LN_CTILDE_TABLE)
            .into_par_iter()
            .map(|k| ln_ctilde_raw(k).expect("c~ table entry"))
            .collect()
    })
}

fn ln_ctilde(k: usize) -> Result<(Dd, f64)> {
    if k < LN_CTILDE_TABLE {
        Ok(ln_ctilde_table()[k])
    } else {
        ln_ctilde_raw(k)
    }
}

/// `c~(4k) = 1 / (pi^{3/4} Gamma(5/4 + 2k) (2k - 1/4) zeta(1/2 + 4k))`, positive.
pub fn c_tilde(k: usize, _ctx: &PrecisionContext) -> Result<RealValue> {
    let (l, e) = ln_ctilde(k)?;
    let v = l.exp();
    Ok(RealValue::new(v, v.to_f64() * (e + 2.0 * EPS)))
}

/// `c(0) = 16 / (pi^{3/4} Gamma(1/4) (-zeta(1/2)))`
pub fn c_zero(ctx: &PrecisionContext) -> Result<RealValue> {
    let (lg, eg) = ln_gamma_raw(Complex::real(Dd::from(0.25)))?;
    let (z, ez) = zeta_raw(Complex::real(Dd::HALF), ctx)?;
    let den = (Dd::LN_PI * 0.75).exp() * lg.re.exp() * (-z.re);
    let v = Dd::from(16.0) / den;
    let rel = eg + ez / z.re.abs().to_f64() + 8.0 * EPS;
    Ok(RealValue::new(v, v.to_f64().abs() * rel))
}

fn check_real(v: ComplexValue) -> Result<RealValue> {
    let im = v.im.abs().to_f64();
    if im > 10.0 * v.err {
        return Err(Error::RealnessViolation { im, err: v.err });
    }
    Ok(RealValue::new(v.re, v.err))
}

/// `c(i gamma_k) = 1 / (b(i gamma_k) zeta'(1/2 + i gamma_k))` using the
/// derivative stored in the cache.
pub fn c_imag_closed_form(cache: &ZeroCache, k: usize, ctx: &PrecisionContext) -> Result<RealValue> {
    let r = cache.get(k)?;
    let b = block(BlockName::B, Complex::imag(r.gamma), ctx)?;
    let prod = b * r.zeta_prime;
    check_real(prod.recip())
}

/// Residue of `f` at the given pole.
pub fn c_at(pole: Pole, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<RealValue> {
    match pole {
        Pole::Real(0) => c_zero(ctx),
        Pole::Real(w) => {
            let k = w.unsigned_abs() as usize;
            let ct = c_tilde(k, ctx)?;
            let p = Dd::PI.sqr().powi(k as i32);
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            Ok(RealValue::new(ct.value * p * sign, ct.err * p.to_f64()))
        }
        Pole::Imag(0) => Err(Error::Index { index: 0, available: cache.len() }),
        Pole::Imag(k) => {
            let k = k.unsigned_abs() as usize;
            match cache.get(k)?.c_imag {
                Some(c) => {
                    // cached value; recompute the error bound from the closed form only on demand
                    let err = 10f64.powi(1 - cache.digits as i32) * c.abs().to_f64();
                    Ok(RealValue::new(c, err))
                }
                None => c_imag_closed_form(cache, k, ctx),
            }
        }
    }
}

/// `n'(z)` by Cauchy quadrature of `n` on a circle of the given radius.
pub fn n_prime(z: Complex, radius: f64, ctx: &PrecisionContext) -> Result<ComplexValue> {
    cauchy_derivative(|s| Ok(block(BlockName::N, s, ctx)?.value()), z, radius, ctx)
}

/// Writes `c(i gamma_k)` into every record of the cache.
pub fn fill_coefficients(cache: &mut ZeroCache, ctx: &PrecisionContext) -> Result<()> {
    let values: Vec<Dd> = (1..=cache.len())
        .into_par_iter()
        .map(|k| c_imag_closed_form(cache, k, ctx).map(|v| v.value))
        .collect::<Result<_>>()?;
    for (r, v) in cache.records.iter_mut().zip(values) {
        r.c_imag = Some(v);
    }
    Ok(())
}

/// `|c(i gamma_k)|` for `k = 1..=n`.
pub fn imag_moduli(cache: &ZeroCache, n: usize, ctx: &PrecisionContext) -> Result<Vec<f64>> {
    (1..=n).map(|k| Ok(c_at(Pole::Imag(k as i64), cache, ctx)?.value.abs().to_f64())).collect()
}

/// `P_0(z) = -sum_{k>=1} c~(4k) (-z^2)^k`, with truncation and cancellation error.
pub fn p0_eval(z: &ComplexValue, ctx: &PrecisionContext) -> Result<ComplexValue> {
    let zz = z.value();
    if zz.re.is_zero() && zz.im.is_zero() {
        return Ok(ComplexValue::exact(Complex::ZERO));
    }
    let mz2 = -(zz * zz);
    let ln_mz2 = mz2.ln();
    let zmod = zz.norm();
    let mut sum = Complex::ZERO;
    let mut abs_sum = 0.0;
    let mut deriv = 0.0;
    let mut running_max: f64 = 0.0;
    let mut rel_err = 0.0;
    let tol = ctx.tol();
    let mut k = 1;
    loop {
        let (lc, e) = ln_ctilde(k)?;
        let lt = ln_mz2.scale(Dd::from(k as f64)) + lc;
        let term = lt.exp();
        if !term.is_finite() {
            return Err(Error::Convergence(format!("P_0 terms overflow at |z| = {zmod:e}")));
        }
        let m = term.norm();
        sum += term;
        abs_sum += m;
        rel_err += m * (e + 4.0 * EPS * (k as f64 + lt.norm()));
        deriv += 2.0 * k as f64 * m / zmod;
        running_max = running_max.max(m);
        // past the peak of the terms and below the working tolerance
        if 2.0 * k as f64 > zmod && m < tol * running_max * 1e-2 {
            let trunc = 2.0 * m;
            let err = trunc + rel_err + 4.0 * EPS * abs_sum + deriv * z.err;
            return Ok(ComplexValue::new(-sum, err));
        }
        k += 1;
        if k > ctx.max_series_terms {
            return Err(Error::Cap(ctx.max_series_terms));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub partial: f64,
    pub tail: f64,
    pub decay: Option<PowerFit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesConstants {
    pub n: usize,
    /// `A_N = 2 sum |c(i gamma_k)|`
    pub a: PartialSum,
    /// `B_N = sum |c(i gamma_k)| / delta'_k`
    pub b: PartialSum,
    /// `C_N = sum |c(i gamma_k)| / gamma_k^2`
    pub c: PartialSum,
}

fn partial_with_tail(g: &[f64], terms: &[f64], factor: f64) -> PartialSum {
    let partial = factor * terms.iter().sum::<f64>();
    let (tail, decay) = match power_fit_upper_half(g, terms) {
        Ok(fit) => (factor * power_tail(&fit, *g.last().unwrap()), Some(fit)),
        Err(_) => (f64::NAN, None),
    };
    PartialSum { partial, tail, decay }
}

/// Partial sums of `A`, `B`, `C` over the first `n` zeros with fitted tails.
pub fn series_constants(cache: &ZeroCache, n: usize, ctx: &PrecisionContext) -> Result<SeriesConstants> {
    if n == 0 || n > cache.len() {
        return Err(Error::Index { index: n, available: cache.len() });
    }
    let moduli = imag_moduli(cache, n, ctx)?;
    let g: Vec<f64> = cache.records[..n].iter().map(|r| r.gamma.to_f64()).collect();
    let dp: Vec<f64> = cache.records[..n].iter().map(|r| r.delta_prime.to_f64()).collect();
    let b_terms: Vec<f64> = moduli.iter().zip(&dp).map(|(c, d)| c / d).collect();
    let c_terms: Vec<f64> = moduli.iter().zip(&g).map(|(c, x)| c / (x * x)).collect();
    Ok(SeriesConstants {
        n,
        a: partial_with_tail(&g, &moduli, 2.0),
        b: partial_with_tail(&g, &b_terms, 1.0),
        c: partial_with_tail(&g, &c_terms, 1.0),
    })
}

/// The full coefficient set used by the expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    pub c0: RealValue,
    /// `c(4w)` for `w = 1..=W`
    pub c_real: Vec<RealValue>,
    /// `c(i gamma_k)` for `k = 1..=N`
    pub c_imag: Vec<RealValue>,
    pub constants: SeriesConstants,
}

impl CoefficientSet {
    pub fn build(cache: &ZeroCache, w_max: usize, n: usize, ctx: &PrecisionContext) -> Result<CoefficientSet> {
        let c0 = c_zero(ctx)?;
        let c_real = (1..=w_max).map(|w| c_at(Pole::Real(w as i64), cache, ctx)).collect::<Result<_>>()?;
        let c_imag = (1..=n).map(|k| c_at(Pole::Imag(k as i64), cache, ctx)).collect::<Result<_>>()?;
        let constants = series_constants(cache, n, ctx)?;
        Ok(CoefficientSet { c0, c_real, c_imag, constants })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::c;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn c_tilde_values() {
        let ctx = ctx();
        let c0 = c_zero(&ctx).unwrap();
        let t0 = c_tilde(0, &ctx).unwrap();
        assert!((c0.value - t0.value).abs().to_f64() < 1e-29 * c0.to_f64());
        let expect: Dd = "1.280613887610273410636377684524367209468".parse().unwrap();
        assert!((c0.value - expect).abs() < 1e-29, "{c0}");
        let t1 = c_tilde(1, &ctx).unwrap();
        let e1: Dd = "0.09006455203313106689851898632076782776514".parse().unwrap();
        assert!((t1.value - e1).abs() < 1e-30);
        let e5: Dd = "6.633609570397330966768642442582671589354e-9".parse().unwrap();
        assert!((c_tilde(5, &ctx).unwrap().value - e5).abs() < 1e-38);
        let mut prev = t0.to_f64();
        let mut prev_ratio = f64::INFINITY;
        for k in 1..12 {
            let v = c_tilde(k, &ctx).unwrap().to_f64();
            let ratio = v / prev;
            assert!(v > 0.0 && ratio < prev_ratio);
            prev = v;
            prev_ratio = ratio;
        }
    }

    #[test]
    fn real_family_signs() {
        let ctx = ctx();
        let empty = ZeroCache { records: vec![], digits: 30, t_max: 0.0, next_gamma: None };
        let c1 = c_at(Pole::Real(1), &empty, &ctx).unwrap();
        assert!(c1.value < 0.0);
        let cm1 = c_at(Pole::Real(-1), &empty, &ctx).unwrap();
        assert_eq!(c1.value, cm1.value);
        assert!(c_at(Pole::Real(0), &empty, &ctx).unwrap().value > 0.0);
    }

    #[test]
    fn p0_basics() {
        let ctx = ctx();
        assert_eq!(p0_eval(&ComplexValue::from_f64(0.0, 0.0), &ctx).unwrap().value(), Complex::ZERO);
        let a = p0_eval(&ComplexValue::from_f64(1.3, 0.4), &ctx).unwrap();
        let b = p0_eval(&ComplexValue::from_f64(-1.3, -0.4), &ctx).unwrap();
        assert!((a.value() - b.value()).norm() <= a.err + b.err);
        // brute-force partial sum at pi
        let pi = Complex::real(Dd::PI);
        let mut brute = Complex::ZERO;
        let mz2 = -(pi * pi);
        let mut pw = Complex::ONE;
        for k in 1..=20 {
            pw = pw * mz2;
            brute -= pw * c_tilde(k, &ctx).unwrap().value;
        }
        let v = p0_eval(&ComplexValue::exact(pi), &ctx).unwrap();
        assert!((v.value() - brute).norm() < 1e-25, "{v} vs {brute}");
        assert!(v.err < 1e-25);
        let _ = c(0.0, 0.0);
    }
}
