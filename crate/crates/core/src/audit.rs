//! The contour `T_*(alpha)` that detours right of each zero along a
//! semicircle of radius `alpha delta'_k`, the quantities `j_k(alpha)`, and
//! log-log estimates of the growth exponents attached to `zeta` on the
//! contour, to `zeta'` at the zeros, to the gaps and to `j_k`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex, ComplexValue};
use crate::context::PrecisionContext;
use crate::dd::{Dd, EPS};
use crate::error::{Error, Result};
use crate::fit::{lower_envelope, LineFit};
use crate::kernel::zeta::zeta_raw;
use crate::xi::{block, BlockName};
use crate::zeros::ZeroCache;

pub const MIN_AUDIT_ZEROS: usize = 50;
pub const J_GRID: usize = 201;
/// Samples per gap when locating the contour minimum of `|zeta|`.
pub const GAP_SAMPLES: usize = 41;
const GOLDEN_STEPS: usize = 40;

/// `t(1) = gamma_1 - alpha delta'_1`
pub fn contour_start(alpha: f64, cache: &ZeroCache) -> Result<Dd> {
    let r = cache.get(1)?;
    Ok(r.gamma - r.delta_prime * alpha)
}

/// `s(t, alpha)`: on the semicircle around the nearest ordinate when
/// `|t - gamma_k| <= alpha delta'_k`, otherwise on the line `x = 0`.
pub fn contour_point(t: Dd, alpha: f64, cache: &ZeroCache) -> Result<ComplexValue> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Config(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    let start = contour_start(alpha, cache)?;
    if !(t > start) {
        return Err(Error::Domain(format!("t = {} is not above t(1) = {}", t.to_f64(), start.to_f64())));
    }
    let recs = &cache.records;
    let last = recs.last().unwrap();
    // delta'_{N+1} <= delta_N, so below this height the next semicircle cannot start
    let limit = match cache.next_gamma {
        Some(g) => g - (g - last.gamma) * alpha,
        None => last.gamma + last.delta_prime * alpha,
    };
    if t >= limit {
        return Err(Error::Domain(format!("t = {} is beyond the cached contour (limit {})", t.to_f64(), limit.to_f64())));
    }
    let i = recs.partition_point(|r| r.gamma <= t);
    for j in [i.wrapping_sub(1), i] {
        if let Some(r) = recs.get(j) {
            let rad = r.delta_prime * alpha;
            let off = t - r.gamma;
            if off.abs() <= rad {
                let x = (rad.sqr() - off.sqr()).max(Dd::ZERO).sqrt();
                return Ok(ComplexValue::new(Complex::new(x, t), EPS * t.abs().to_f64()));
            }
        }
    }
    Ok(ComplexValue::new(Complex::new(Dd::ZERO, t), 0.0))
}

fn zeta_abs(s: Complex, ctx: &PrecisionContext) -> Result<f64> {
    let (z, _) = zeta_raw(Complex::real(Dd::HALF) + s, ctx)?;
    Ok(z.norm())
}

/// Golden-section minimum of `g` on `[a, b]`.
fn golden<G: Fn(f64) -> Result<f64>>(g: G, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    for _ in 0..GOLDEN_STEPS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Grid minimum over `[a, b]` refined by golden section between the
/// neighbours of the best grid point.
fn grid_min<G: Fn(f64) -> Result<f64> + Sync>(g: G, a: f64, b: f64, n: usize) -> Result<(f64, f64)> {
    let ts: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| g(t)).collect::<Result<_>>()?;
    let (i, _) = vals.iter().enumerate().fold((0, f64::INFINITY), |m, (i, v)| if *v < m.1 { (i, *v) } else { m });
    let lo = ts[i.saturating_sub(1)];
    let hi = ts[(i + 1).min(n - 1)];
    let (t, v) = golden(&g, lo, hi)?;
    Ok(if v < vals[i] { (t, v) } else { (ts[i], vals[i]) })
}

/// `j_k(alpha)`: minimum of `|zeta(1/2 + it)/(t - gamma_k)|` over
/// `|t - gamma_k| <= alpha delta'_k`, with `|zeta'|` at the centre.
pub fn j_k_eval(k: usize, alpha: f64, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<f64> {
    let r = cache.get(k)?;
    let zp = r.zeta_prime.abs();
    let g = r.gamma;
    let rad = (r.delta_prime * alpha).to_f64();
    let q = |u: f64| -> Result<f64> {
        if u == 0.0 {
            return Ok(zp);
        }
        Ok(zeta_abs(Complex::imag(g + u), ctx)? / u.abs())
    };
    let (_, j) = grid_min(q, -rad, rad, J_GRID)?;
    if j > zp {
        return Err(Error::Assertion(format!("j_{k} = {j:e} exceeds |zeta'| = {zp:e}")));
    }
    Ok(j)
}

/// Smallest `|zeta(1/2 + s(t, alpha))|` for `t` between `gamma_k` and
/// `gamma_{k+1}`; returns `(t, value)`.
pub fn contour_gap_min(k: usize, alpha: f64, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<(f64, f64)> {
    let a = cache.gamma(k)?.to_f64();
    let b = cache.gamma(k + 1)?.to_f64();
    let g = |t: f64| -> Result<f64> {
        let s = contour_point(Dd::from(t), alpha, cache)?;
        zeta_abs(s.value(), ctx)
    };
    grid_min(g, a, b, GAP_SAMPLES)
}

/// An exponent `eps` read off a lower-envelope fit `log q ~ c - eps log t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub value: f64,
    pub se: f64,
    /// `log K` of the envelope
    pub intercept: f64,
    pub points: usize,
}

impl Exponent {
    fn from_fit(f: LineFit) -> Exponent {
        Exponent { value: -f.slope, se: f.slope_se, intercept: f.intercept, points: f.n }
    }

    /// `K t^{-eps}`
    pub fn envelope(&self, t: f64) -> f64 {
        (self.intercept - self.value * t.ln()).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    /// bound minus estimate; positive means the inequality holds
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub alpha: f64,
    pub n: usize,
    /// decay of `|zeta|` along the contour between zeros
    pub eps0_hat: Exponent,
    /// decay of `|zeta'(1/2 + i gamma_k)|`
    pub eps1_hat: Exponent,
    /// decay of `delta_k`
    pub eps2_hat: Exponent,
    /// decay of `j_k(alpha)`
    pub eps1tilde_hat: Exponent,
    pub verdicts: BTreeMap<String, Verdict>,
    /// `(t, |zeta|)` at the contour minima
    pub contour_minima: Vec<(f64, f64)>,
    pub j: Vec<f64>,
}

fn upper_half_fit(x: &[f64], y: &[f64]) -> Result<Exponent> {
    let h = x.len() / 2;
    Ok(Exponent::from_fit(lower_envelope(&x[h..], &y[h..])?))
}

fn verdict(bound: f64, est: f64, strict: bool) -> Verdict {
    let margin = bound - est;
    Verdict { holds: if strict { margin > 0.0 } else { margin >= 0.0 }, margin }
}

pub fn exponent_estimates(n: usize, alpha: f64, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<AuditReport> {
    if n < MIN_AUDIT_ZEROS {
        return Err(Error::InsufficientData(format!("audit needs at least {MIN_AUDIT_ZEROS} zeros, got {n}")));
    }
    if n > cache.len() {
        return Err(Error::Index { index: n, available: cache.len() });
    }
    let recs = &cache.records[..n];
    let lg: Vec<f64> = recs.iter().map(|r| r.gamma.to_f64().ln()).collect();
    let eps1 = upper_half_fit(&lg, &recs.iter().map(|r| r.zeta_prime.abs().ln()).collect::<Vec<_>>())?;
    let eps2 = upper_half_fit(&lg, &recs.iter().map(|r| r.delta.to_f64().ln()).collect::<Vec<_>>())?;
    let j: Vec<f64> = (1..=n).into_par_iter().map(|k| j_k_eval(k, alpha, cache, ctx)).collect::<Result<_>>()?;
    let eps1t = upper_half_fit(&lg, &j.iter().map(|v| v.ln()).collect::<Vec<_>>())?;
    let minima: Vec<(f64, f64)> = (1..n).into_par_iter().map(|k| contour_gap_min(k, alpha, cache, ctx)).collect::<Result<_>>()?;
    let (mt, mv): (Vec<f64>, Vec<f64>) = minima.iter().map(|(t, v)| (t.ln(), v.ln())).unzip();
    let eps0 = upper_half_fit(&mt, &mv)?;
    let mut verdicts = BTreeMap::new();
    verdicts.insert("C1ii".to_string(), verdict(0.75, eps0.value, true));
    verdicts.insert("Cprime".to_string(), verdict(1.75, eps0.value, true));
    verdicts.insert("C3ii".to_string(), verdict(0.75, eps1.value + eps2.value, true));
    verdicts.insert("C4ii".to_string(), verdict(1.0, eps1t.value + eps2.value, false));
    for e in [&eps0, &eps1, &eps2, &eps1t] {
        if !(e.value.is_finite() && e.se.is_finite()) {
            return Err(Error::Assertion("non-finite exponent estimate".into()));
        }
    }
    Ok(AuditReport {
        alpha,
        n,
        eps0_hat: eps0,
        eps1_hat: eps1,
        eps2_hat: eps2,
        eps1tilde_hat: eps1t,
        verdicts,
        contour_minima: minima,
        j,
    })
}

/// Points of the fitted half that fall below the envelope `K t^{-eps0}`.
pub fn envelope_violations(report: &AuditReport) -> Vec<(f64, f64)> {
    let h = report.contour_minima.len() / 2;
    report.contour_minima[h..]
        .iter()
        .filter(|(t, v)| v.ln() < (report.eps0_hat.envelope(*t)).ln() - 1e-12)
        .copied()
        .collect()
}

/// Largest `|f(x + it)| / |f(s(t, alpha))|` over `samples` points
/// `x(t, alpha) <= x < 2`; at most `1` when `|f|` falls as `x^2` grows.
pub fn monotone_replacement_ratio(t: f64, alpha: f64, samples: usize, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<f64> {
    let s = contour_point(Dd::from(t), alpha, cache)?.value();
    let x0 = s.re.to_f64();
    let f0 = block(BlockName::F, s, ctx)?.abs();
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let x = x0 + (2.0 - x0) * i as f64 / samples as f64;
        let f = block(BlockName::F, Complex::new(Dd::from(x), Dd::from(t)), ctx)?.abs();
        worst = worst.max(f / f0);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::{locate_zeros, ZeroTarget};
    use std::sync::OnceLock;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn cache() -> &'static ZeroCache {
        static C: OnceLock<ZeroCache> = OnceLock::new();
        C.get_or_init(|| locate_zeros(ZeroTarget::Count(60), &ctx()).unwrap().0)
    }

    #[test]
    fn contour_geometry() {
        let c = cache();
        let (g1, g2) = (c.gamma(1).unwrap(), c.gamma(2).unwrap());
        let mid = contour_point((g1 + g2).mul_pwr2(0.5), 0.25, c).unwrap();
        assert!(mid.re.is_zero());
        let apex = contour_point(g1, 0.25, c).unwrap();
        let r1 = c.get(1).unwrap().delta_prime * 0.25;
        assert!((apex.re - r1).abs() < 1e-30);
        for edge in [g1 - r1, g1 + r1] {
            for eps in [-1e-8, 1e-8] {
                let t = edge + eps;
                if t <= contour_start(0.25, c).unwrap() {
                    continue;
                }
                let x = contour_point(t, 0.25, c).unwrap().re.to_f64();
                assert!(x < 1e-3, "x = {x} near junction");
            }
        }
        assert!(matches!(contour_point(g1 - r1, 0.25, c), Err(Error::Domain(_))));
        assert!(matches!(contour_point(Dd::from(1e4), 0.25, c), Err(Error::Domain(_))));
    }

    #[test]
    fn j_k_properties() {
        let ctx = ctx();
        let c = cache();
        let j1 = j_k_eval(1, 0.25, c, &ctx).unwrap();
        assert!(j1 > 0.0 && j1 <= c.get(1).unwrap().zeta_prime.abs());
        let j_small = j_k_eval(1, 0.05, c, &ctx).unwrap();
        assert!(j_small >= j1 * (1.0 - 1e-12));
    }

    #[test]
    fn audit_report() {
        let ctx = ctx();
        assert!(matches!(exponent_estimates(40, 0.25, cache(), &ctx), Err(Error::InsufficientData(_))));
        let r = exponent_estimates(60, 0.25, cache(), &ctx).unwrap();
        assert_eq!(r.verdicts.len(), 4);
        assert!(r.eps2_hat.value.abs() < 1.0);
        assert!(envelope_violations(&r).is_empty());
        let c3 = r.verdicts["C3ii"];
        assert!((c3.margin - (0.75 - r.eps1_hat.value - r.eps2_hat.value)).abs() < 1e-15);
    }

    #[test]
    fn monotone_replacement() {
        let ctx = ctx();
        let g = cache().gamma(3).unwrap().to_f64();
        let w = monotone_replacement_ratio(g, 0.25, 20, cache(), &ctx).unwrap();
        assert!(w <= 1.0 + 1e-2, "{w}");
    }
}
