//! Product forms of `xi(1/2 + s)` and the monotonicity and growth
//! statements derived from them: moduli increasing in `x^2`, complete
//! monotonicity of `|E|^{-2}`, bounds on `1/|sin|` and `1/|b|`, the
//! reflected ratio of `zeta`, and the regions `D(t0, K)` and `S'(k)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{c, Complex, ComplexValue};
use crate::context::PrecisionContext;
use crate::dd::{Dd, EPS};
use crate::error::{Error, Result};
use crate::kernel::zeta::zeta_raw;
use crate::quadrature::{composite_nodes, gauss_legendre};
use crate::xi::{block, BlockName};
use crate::zeros::ZeroCache;

/// `E(s) = K prod_m (1 - s/(i phi_m)) prod_k (1 + (s/theta_k)^2)`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductDescriptor {
    pub k: f64,
    pub phis: Vec<f64>,
    pub thetas: Vec<f64>,
}

impl ProductDescriptor {
    pub fn new(k: f64, phis: Vec<f64>, mut thetas: Vec<f64>) -> Result<ProductDescriptor> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::Domain("product scale must be nonzero".into()));
        }
        if phis.iter().any(|p| *p == 0.0) || thetas.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Domain("phi must be nonzero and theta positive".into()));
        }
        thetas.sort_by(f64::total_cmp);
        Ok(ProductDescriptor { k, phis, thetas })
    }

    /// `xi(1/2) prod_{k <= count} (1 + (s/gamma_k)^2)`
    pub fn xi_product(cache: &ZeroCache, count: usize, ctx: &PrecisionContext) -> Result<ProductDescriptor> {
        if count > cache.len() {
            return Err(Error::Index { index: count, available: cache.len() });
        }
        let k = block(BlockName::Xi, Complex::real(Dd::HALF), ctx)?.re.to_f64();
        ProductDescriptor::new(k, vec![], cache.records[..count].iter().map(|r| r.gamma.to_f64()).collect())
    }

    /// `ln |E(s)|`, evaluated factor by factor.
    pub fn ln_abs(&self, s: Complex) -> Dd {
        let mut acc = Dd::from(self.k.abs()).ln();
        for &p in &self.phis {
            let f = Complex::ONE - s / Complex::imag(Dd::from(p));
            acc = acc + f.abs().ln();
        }
        for &t in &self.thetas {
            let q = s / Dd::from(t);
            acc = acc + (Complex::ONE + q * q).abs().ln();
        }
        acc
    }

    pub fn eval(&self, s: Complex) -> Complex {
        let mut acc = Complex::from(self.k);
        for &p in &self.phis {
            acc = acc * (Complex::ONE - s / Complex::imag(Dd::from(p)));
        }
        for &t in &self.thetas {
            let q = s / Dd::from(t);
            acc = acc * (Complex::ONE + q * q);
        }
        acc
    }
}

/// The truncated product for `xi(1/2 + s)` and its gap to direct evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HadamardValue {
    pub product: ComplexValue,
    pub direct: ComplexValue,
    /// `|product - direct| / |direct|`
    pub rel_gap: f64,
}

pub fn hadamard_xi(s: Complex, k_terms: usize, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<HadamardValue> {
    let desc = ProductDescriptor::xi_product(cache, k_terms, ctx)?;
    let x_half = block(BlockName::Xi, Complex::real(Dd::HALF), ctx)?;
    let mut p = Complex::real(x_half.re);
    for &t in &desc.thetas {
        let q = s / Dd::from(t);
        p = p * (Complex::ONE + q * q);
    }
    let g_err = 4.0 * EPS * (k_terms as f64 + 1.0) * p.norm() + x_half.err / x_half.abs() * p.norm();
    // the stored ordinates are rounded to f64 above; their relative error enters each factor
    let t_err = 2.0 * f64::EPSILON * s.norm_sqr().to_f64() * desc.thetas.iter().map(|t| 1.0 / (t * t)).sum::<f64>() * p.norm();
    let product = ComplexValue::new(p, g_err + t_err);
    let direct = block(BlockName::Xi, s + 0.5, ctx)?;
    let rel_gap = (product.value() - direct.value()).norm() / direct.abs();
    Ok(HadamardValue { product, direct, rel_gap })
}

/// Indices `i >= 1` where `|E(sqrt(v_i) + it)|` fails to exceed its value at
/// `v_{i-1}` (beyond rounding); the reciprocal profile is the same test
/// with the inequality reversed, so one list serves both.
pub fn monotone_profile(desc: &ProductDescriptor, t: f64, v_grid: &[f64], _ctx: &PrecisionContext) -> Result<Vec<usize>> {
    check_increasing(v_grid)?;
    let vals: Vec<Dd> = v_grid
        .par_iter()
        .map(|&v| desc.ln_abs(Complex::new(Dd::from(v).sqrt(), Dd::from(t))))
        .collect();
    Ok(increase_failures(&vals, 64.0 * EPS * (desc.thetas.len() + desc.phis.len() + 1) as f64))
}

fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Indices where `vals[i] <= vals[i-1] + tol`, i.e. strict increase is not certified.
fn increase_failures(vals: &[Dd], tol: f64) -> Vec<usize> {
    (1..vals.len()).filter(|&i| !((vals[i] - vals[i - 1]).to_f64() > -tol && vals[i] >= vals[i - 1])).collect()
}

/// Indices where `|xi(1/2 + sqrt(v) + it)|` is not increasing along `v_grid`,
/// from direct evaluation.
pub fn xi_profile(t: f64, v_grid: &[f64], ctx: &PrecisionContext) -> Result<Vec<usize>> {
    check_increasing(v_grid)?;
    let vals: Vec<(Dd, f64)> = v_grid
        .par_iter()
        .map(|&v| {
            let x = block(BlockName::Xi, Complex::new(Dd::HALF + Dd::from(v).sqrt(), Dd::from(t)), ctx)?;
            Ok((x.value().abs(), x.err))
        })
        .collect::<Result<_>>()?;
    Ok((1..vals.len())
        .filter(|&i| !((vals[i].0 - vals[i - 1].0).to_f64() > -(vals[i].1 + vals[i - 1].1)))
        .collect())
}

/// Signed forward differences of `g(v) = |E(sqrt(v) + it)|^{-2}` at `v0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignTable {
    /// `(-1)^j Delta_h^j g(v0)` for `j = 0..=J`
    pub signed: Vec<f64>,
    pub tolerance: f64,
    pub ok: Vec<bool>,
}

impl SignTable {
    pub fn all_ok(&self) -> bool {
        self.ok.iter().all(|b| *b)
    }
}

pub const MAX_CM_ORDER: usize = 6;

/// Checks `(-1)^j Delta^j g >= -tol` for `j <= J`, the finite-difference
/// form of complete monotonicity in `v = x^2`.
pub fn complete_monotone_check(desc: &ProductDescriptor, t: f64, v0: f64, h: f64, j_max: usize, tol: f64, _ctx: &PrecisionContext) -> Result<SignTable> {
    if j_max > MAX_CM_ORDER {
        return Err(Error::Step(format!("order {j_max} above {MAX_CM_ORDER}")));
    }
    if !(v0 > 0.0 && h > 0.0) {
        return Err(Error::Step(format!("need v0 > 0 and h > 0, got {v0}, {h}")));
    }
    if j_max > 0 && h > v0 / (2.0 * j_max as f64) {
        return Err(Error::Step(format!("h = {h} exceeds v0/(2J) = {}", v0 / (2.0 * j_max as f64))));
    }
    let g: Vec<Dd> = (0..=j_max)
        .map(|i| {
            let v = Dd::from(v0) + Dd::from(h) * Dd::from(i as f64);
            (-desc.ln_abs(Complex::new(v.sqrt(), Dd::from(t))).mul_pwr2(2.0)).exp()
        })
        .collect();
    let scale = g[0].to_f64().abs();
    let mut signed = Vec::with_capacity(j_max + 1);
    let mut ok = Vec::with_capacity(j_max + 1);
    let mut row = g.clone();
    for j in 0..=j_max {
        let d = if j % 2 == 0 { row[0] } else { -row[0] };
        signed.push(d.to_f64());
        ok.push(d.to_f64() >= -tol * scale);
        row = row.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(SignTable { signed, tolerance: tol * scale, ok })
}

/// Indices `i >= 1` where `1/|sin((pi/a) s) E(s)|` at `s = x_i + it` does
/// not fall below its value at `x_{i-1}`.
pub fn sin_product_decrease(a: f64, desc: &ProductDescriptor, t: f64, x_grid: &[f64], _ctx: &PrecisionContext) -> Result<Vec<usize>> {
    check_increasing(x_grid)?;
    if x_grid.iter().any(|x| !(*x > 0.0 && *x < a / 2.0)) {
        return Err(Error::Domain(format!("x grid must lie in (0, {})", a / 2.0)));
    }
    let w = Dd::PI / Dd::from(a);
    let vals: Vec<Dd> = x_grid
        .par_iter()
        .map(|&x| {
            let s = Complex::new(Dd::from(x), Dd::from(t));
            // ln|sin(x' + it')|^2 = ln((cosh 2t' - cos 2x')/2)
            let (xp, tp) = (Dd::from(x) * w, Dd::from(t) * w);
            let sin2 = (tp.mul_pwr2(2.0).cosh() - xp.mul_pwr2(2.0).cos()).mul_pwr2(0.5);
            sin2.ln().mul_pwr2(0.5) + desc.ln_abs(s)
        })
        .collect();
    // the reciprocal decreases exactly when ln|sin E| increases
    Ok(increase_failures(&vals, 64.0 * EPS * (desc.thetas.len() + 2) as f64))
}

/// `(1/|sin z|, e^{-|t|})`; refused within `d` of a multiple of pi.
pub fn sin_recip_bound(z: Complex, d: f64, _ctx: &PrecisionContext) -> Result<(f64, f64)> {
    let n = (z.re / Dd::PI).round();
    let dist = (z - Complex::real(Dd::PI * n)).norm();
    if dist < d {
        return Err(Error::Domain(format!("{z} is within {d} of a multiple of pi")));
    }
    let lhs = z.sin().abs().recip().to_f64();
    Ok((lhs, (-z.im.abs().to_f64()).exp()))
}

/// Largest `(1/|sin z|) e^{|t|}` over the sample points, i.e. the
/// smallest admissible `epsilon(d)` on that sample.
pub fn fit_sin_eps(points: &[Complex], d: f64, ctx: &PrecisionContext) -> Result<f64> {
    let mut m: f64 = 0.0;
    for &z in points {
        let (lhs, e) = sin_recip_bound(z, d, ctx)?;
        m = m.max(lhs / e);
    }
    Ok(m)
}

/// `(1/|b(s)|, |s|^{-7/4} (2 e pi/|s|)^{x/2})`: the two sides of the lower
/// bound on `|b|` without the constant.
pub fn b_bound_sides(s: Complex, d: f64, ctx: &PrecisionContext) -> Result<(f64, f64)> {
    let x = s.re.to_f64();
    if x < 0.0 || x < 0.5 {
        return Err(Error::Domain(format!("{s} is not in S with Re(s) >= 0")));
    }
    let w = (x / 4.0).round();
    if (s - c(4.0 * w, 0.0)).norm() < d {
        return Err(Error::Domain(format!("{s} is inside B(4w, {d})")));
    }
    let b = block(BlockName::B, s, ctx)?;
    let m = s.abs();
    let ln_rhs = -(m.ln() * 1.75) + (Dd::from(2.0 * std::f64::consts::E) * Dd::PI / m).ln() * (x / 2.0);
    Ok((b.abs().recip(), ln_rhs.exp().to_f64()))
}

/// `K'(d)` fitted as the largest ratio of the two sides over `calibration`.
pub fn fit_b_constant(calibration: &[Complex], d: f64, ctx: &PrecisionContext) -> Result<f64> {
    let ratios: Vec<f64> = calibration
        .par_iter()
        .map(|&s| b_bound_sides(s, d, ctx).map(|(l, r)| l / r))
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Checks `1/|b(s)| <= rhs(s) * K` at one point; returns `(lhs, rhs * K)`.
pub fn b_lower_bound_check(s: Complex, d: f64, k_fit: f64, ctx: &PrecisionContext) -> Result<(f64, f64)> {
    let (l, r) = b_bound_sides(s, d, ctx)?;
    Ok((l, r * k_fit))
}

/// `|zeta(1/2 - s*)| / |zeta(1/2 + s)|` against `(|t|/(2 pi))^x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaRatio {
    pub ratio: f64,
    pub model: f64,
    /// `|ratio/model - 1|`
    pub deviation: f64,
    /// `deviation * |t|`
    pub c: f64,
}

pub fn zeta_ratio_check(s: Complex, ctx: &PrecisionContext) -> Result<ZetaRatio> {
    let t = s.im.to_f64();
    if t == 0.0 {
        return Err(Error::Domain("needs Im(s) != 0".into()));
    }
    let half = Complex::real(Dd::HALF);
    let (a, _) = zeta_raw(half - s.conj(), ctx)?;
    let (b, _) = zeta_raw(half + s, ctx)?;
    let ratio = (a.abs() / b.abs()).to_f64();
    let model = (Dd::from(t.abs()) / Dd::TWO_PI).ln().mul_pwr2(1.0) * s.re;
    let model = model.exp().to_f64();
    let deviation = (ratio / model - 1.0).abs();
    Ok(ZetaRatio { ratio, model, deviation, c: deviation * t.abs() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegionKind {
    /// `{x + it : t >= t0, 0 <= x <= K/log t}`
    D { t0: f64, k: f64 },
    /// `{s : Re(s) >= 0, |s - i gamma_k| <= 1/log gamma_k}`
    SPrime(usize),
}

pub fn region_member(s: Complex, kind: RegionKind, cache: &ZeroCache) -> Result<bool> {
    match kind {
        RegionKind::D { t0, k } => {
            let t = s.im;
            if !(t >= t0) {
                return Ok(false);
            }
            Ok(s.re >= 0.0 && s.re <= Dd::from(k) / t.ln())
        }
        RegionKind::SPrime(k) => {
            let g = cache.gamma(k)?;
            let r = g.ln().recip();
            Ok(s.re >= 0.0 && (s - Complex::imag(g)).abs() <= r)
        }
    }
}

/// Deterministic points filling the half disk `S'(k)`.
pub fn sprime_samples(k: usize, count: usize, cache: &ZeroCache) -> Result<Vec<Complex>> {
    let g = cache.gamma(k)?;
    let r = g.ln().recip().to_f64();
    // sunflower layout over the half disk
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    Ok((0..count)
        .map(|i| {
            let rho = r * ((i as f64 + 0.5) / count as f64).sqrt();
            let th = (i as f64 * golden).rem_euclid(std::f64::consts::PI) - std::f64::consts::FRAC_PI_2;
            Complex::new(Dd::from(rho * th.cos()), g + rho * th.sin())
        })
        .collect())
}

/// Sample-wise inclusion `S'(k) ⊆ D(e - 1, 2)`; returns the points that fail.
pub fn sprime_inclusion(k: usize, count: usize, cache: &ZeroCache) -> Result<Vec<Complex>> {
    let d = RegionKind::D { t0: std::f64::consts::E - 1.0, k: 2.0 };
    let mut bad = Vec::new();
    for s in sprime_samples(k, count, cache)? {
        if region_member(s, RegionKind::SPrime(k), cache)? && !region_member(s, d, cache)? {
            bad.push(s);
        }
    }
    Ok(bad)
}

/// `| |1 - s/(ir)|^2 - r^{-2}(v + (t - r)^2) |` for `s = sqrt(v) + it`.
pub fn h_identity_residual(v: f64, t: f64, r: f64) -> f64 {
    let s = Complex::new(Dd::from(v).sqrt(), Dd::from(t));
    let lhs = (Complex::ONE - s / Complex::imag(Dd::from(r))).norm_sqr();
    let rhs = (Dd::from(v) + (Dd::from(t) - r).sqr()) / Dd::from(r).sqr();
    (lhs - rhs).abs().to_f64()
}

/// `(|int_0^Y e^{-zy} dy - 1/z|, e^{-Re(z) Y}/Re(z))` with the integral by
/// composite Gauss-Legendre.
pub fn laplace_kernel_check(z: Complex, y_max: f64) -> Result<(f64, f64)> {
    let x = z.re.to_f64();
    if !(x > 0.0) {
        return Err(Error::Domain("needs Re(z) > 0".into()));
    }
    let width = (0.5 / z.norm().max(1.0)).min(0.5);
    let nodes = composite_nodes(Dd::ZERO, Dd::from(y_max), width, &gauss_legendre(12));
    let mut acc = Complex::ZERO;
    for (y, w) in nodes {
        acc += (-(z * y)).exp() * w;
    }
    Ok(((acc - z.recip()).norm(), (-x * y_max).exp() / x))
}

/// Indices `i >= 1` along increasing `|x_i|` where `|f(x_i + it)|` rises
/// above its previous value by more than the evaluation error.
pub fn f_profile_violations(t: f64, x_grid: &[f64], ctx: &PrecisionContext) -> Result<Vec<usize>> {
    let mut xs: Vec<f64> = x_grid.to_vec();
    xs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let vals: Vec<(Dd, f64)> = xs
        .par_iter()
        .map(|&x| {
            let f = block(BlockName::F, c(x, t), ctx)?;
            Ok((f.value().abs(), f.err))
        })
        .collect::<Result<_>>()?;
    Ok((1..vals.len()).filter(|&i| (vals[i].0 - vals[i - 1].0).to_f64() > vals[i].1 + vals[i - 1].1).collect())
}
