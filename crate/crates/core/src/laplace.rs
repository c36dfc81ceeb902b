//! The density `lambda(y) = 2 sum_k c(i gamma_k) cos(gamma_k y)`, the
//! two-branch kernel `g_0`, and the numeric two-sided Laplace transform
//! `int e^{sy} g_0(y) dy` compared with `f(s)` on `0 < Re(s) < 4`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{c_at, series_constants, Pole};
use crate::complex::{Complex, ComplexValue};
use crate::context::PrecisionContext;
use crate::dd::{Dd, EPS};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::xi::{block, BlockName};
use crate::zeros::ZeroCache;

pub const DEFAULT_K_TERMS: usize = 60;
pub const DEFAULT_Y_MIN: f64 = -40.0;
pub const DEFAULT_Y_MAX: f64 = 40.0;
pub const DEFAULT_QUAD_POINTS: usize = 8;
pub const DEFAULT_TAIL_TOL: f64 = 1e-15;
pub const MAX_PANEL_WIDTH: f64 = 0.25;
/// Panels between direct re-evaluations of `e^{i gamma y}` in the rotation.
const RESYNC: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    /// zeros in `lambda`
    pub n: usize,
    /// terms kept in `P_0`
    pub k_terms: usize,
    pub y_min: f64,
    pub y_max: f64,
    /// Gauss-Legendre nodes per panel
    pub quad_points: usize,
    /// largest admissible analytic bound on the integral outside the window
    pub tail_tol: f64,
}

impl DensityConfig {
    pub fn new(n: usize) -> DensityConfig {
        DensityConfig {
            n,
            k_terms: DEFAULT_K_TERMS,
            y_min: DEFAULT_Y_MIN,
            y_max: DEFAULT_Y_MAX,
            quad_points: DEFAULT_QUAD_POINTS,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }

    pub fn validate(&self, cache: &ZeroCache) -> Result<()> {
        if !(self.y_min < 0.0 && self.y_max > 0.0) {
            return Err(Error::Config(format!("need y_min < 0 < y_max, got [{}, {}]", self.y_min, self.y_max)));
        }
        if self.n == 0 || self.n > cache.len() {
            return Err(Error::Index { index: self.n, available: cache.len() });
        }
        if self.k_terms == 0 || self.quad_points < 2 {
            return Err(Error::Config("k_terms must be positive and quad_points at least 2".into()));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Config("tail_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub value: f64,
    /// rounding and coefficient error of the partial sum
    pub err: f64,
    /// estimated size of the omitted zeros, from the fitted decay of `|c|`
    pub tail: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformResidual {
    pub integral: (f64, f64),
    pub f: (f64, f64),
    pub residual: f64,
    /// quadrature, window tails, rounding and coefficient error; excludes
    /// the truncation of `lambda`, which is what the residual measures
    pub budget: f64,
    pub window_tail: f64,
    /// `g_0(0+) - g_0(0-)`, informational
    pub jump: f64,
}

/// Coefficients shared by every evaluation at one truncation.
pub struct Density {
    pub config: DensityConfig,
    c0: Dd,
    /// `c(4k)` for `k = 1..=k_terms`
    c_real: Vec<Dd>,
    c_imag: Vec<Dd>,
    gammas: Vec<Dd>,
    /// `sum |c(i gamma_k)|`
    abs_imag: f64,
    coef_err: f64,
    p0_trunc: f64,
    lambda_tail: f64,
}

impl Density {
    pub fn new(config: DensityConfig, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<Density> {
        config.validate(cache)?;
        let c0 = c_at(Pole::Real(0), cache, ctx)?;
        let mut c_real = Vec::with_capacity(config.k_terms);
        let mut coef_err = c0.err;
        for k in 1..=config.k_terms {
            let c = c_at(Pole::Real(k as i64), cache, ctx)?;
            coef_err += c.err;
            c_real.push(c.value);
        }
        let next = c_at(Pole::Real(config.k_terms as i64 + 1), cache, ctx)?.value.abs().to_f64();
        let mut c_imag = Vec::with_capacity(config.n);
        let mut abs_imag = 0.0;
        for k in 1..=config.n {
            let c = c_at(Pole::Imag(k as i64), cache, ctx)?;
            coef_err += 2.0 * c.err;
            abs_imag += c.value.abs().to_f64();
            c_imag.push(c.value);
        }
        let gammas = cache.records[..config.n].iter().map(|r| r.gamma).collect();
        let lambda_tail = if config.n >= 4 { series_constants(cache, config.n, ctx)?.a.tail } else { f64::INFINITY };
        Ok(Density {
            config,
            c0: c0.value,
            c_real,
            c_imag,
            gammas,
            abs_imag,
            coef_err,
            // the terms fall faster than geometrically
            p0_trunc: 2.0 * next,
            lambda_tail,
        })
    }

    fn lambda_dd(&self, y: Dd) -> Dd {
        let mut acc = Dd::ZERO;
        for (c, g) in self.c_imag.iter().zip(&self.gammas) {
            acc = acc + *c * (*g * y).cos();
        }
        acc.mul_pwr2(2.0)
    }

    pub fn lambda(&self, y: f64) -> DensityValue {
        let y = Dd::from(y);
        let v = self.lambda_dd(y);
        let arg = (self.gammas.last().copied().unwrap_or(Dd::ZERO) * y).abs().to_f64();
        DensityValue {
            value: v.to_f64(),
            err: 2.0 * self.abs_imag * EPS * (self.c_imag.len() as f64 + arg + 1.0) + self.coef_err,
            tail: self.lambda_tail,
        }
    }

    /// `sum_k c(4k) q^k` by Horner, `0 <= q <= 1`.
    fn real_series(&self, q: Dd) -> Dd {
        let mut acc = Dd::ZERO;
        for c in self.c_real.iter().rev() {
            acc = (acc + *c) * q;
        }
        acc
    }

    /// `P_0(pi e^{-2|y|})`
    pub fn p0_branch(&self, y: f64) -> Dd {
        let q = (Dd::from(-4.0 * y.abs())).exp();
        -self.real_series(q)
    }

    pub fn g0(&self, y: f64) -> Result<DensityValue> {
        if y == 0.0 {
            return Err(Error::Domain("g_0 is not defined at y = 0".into()));
        }
        let p0 = self.p0_branch(y);
        if y > 0.0 {
            return Ok(DensityValue { value: p0.to_f64(), err: self.p0_trunc + 64.0 * EPS, tail: 0.0 });
        }
        let l = self.lambda(y);
        let v = self.lambda_dd(Dd::from(y)) + self.c0 - p0;
        Ok(DensityValue { value: v.to_f64(), err: l.err + self.p0_trunc + 64.0 * EPS, tail: l.tail })
    }

    /// `g_0(0+) - g_0(0-)`
    pub fn jump(&self) -> f64 {
        let mut lam = Dd::ZERO;
        for c in &self.c_imag {
            lam = lam + *c;
        }
        (-self.real_series(Dd::ONE) - (lam.mul_pwr2(2.0) + self.c0 + self.real_series(Dd::ONE))).to_f64()
    }

    fn panel_width(&self) -> f64 {
        MAX_PANEL_WIDTH.min(1.0 / self.gammas.last().unwrap().to_f64())
    }

    /// Bound on `int |e^{sy} g_0|` outside `[y_min, y_max]` for `x = Re(s)`.
    pub fn window_tail(&self, x: f64) -> f64 {
        let (lo, hi) = (self.config.y_min, self.config.y_max);
        let mut right = 0.0;
        let mut left = (2.0 * self.abs_imag + self.c0.abs().to_f64()) * (x * lo).exp() / x;
        for (i, c) in self.c_real.iter().enumerate() {
            let w = 4.0 * (i + 1) as f64;
            let m = c.abs().to_f64();
            right += m * ((x - w) * hi).exp() / (w - x);
            left += m * ((x + w) * lo).exp() / (x + w);
        }
        left + right
    }

    /// Nodes and weights plus `g_0` at the nodes, left branch then right.
    fn nodes(&self) -> Vec<(Dd, Dd, Dd)> {
        let rule = gauss_legendre(self.config.quad_points);
        let width = self.panel_width();
        let mut out = branch_nodes(self, Dd::from(self.config.y_min), Dd::ZERO, width, &rule, true);
        out.extend(branch_nodes(self, Dd::ZERO, Dd::from(self.config.y_max), width, &rule, false));
        out
    }

    /// Gauss-Legendre error bound for `e^{sy} g_0` summed over all panels.
    fn quadrature_bound(&self, s: Complex) -> f64 {
        let n = self.config.quad_points as i32;
        let h = self.panel_width();
        // (b-a)^{2n+1} (n!)^4 / ((2n+1) ((2n)!)^3) per unit of the 2n-th derivative
        let mut ln_k = (2 * n + 1) as f64 * h.ln() - ((2 * n + 1) as f64).ln();
        for i in 1..=n {
            ln_k += 4.0 * (i as f64).ln();
        }
        for i in 1..=2 * n {
            ln_k -= 3.0 * (i as f64).ln();
        }
        let sm = s.norm();
        let x = s.re.to_f64();
        let p = 2.0 * n as f64;
        let mut m_left = (self.c0.abs().to_f64().ln() + p * sm.ln()).exp();
        for (c, g) in self.c_imag.iter().zip(&self.gammas) {
            m_left += 2.0 * (c.abs().to_f64().ln() + p * (sm + g.to_f64()).ln()).exp();
        }
        let mut m_right = 0.0;
        for (i, c) in self.c_real.iter().enumerate() {
            let t = (c.abs().to_f64().ln() + p * (sm + 4.0 * (i + 1) as f64).ln()).exp();
            m_left += t;
            m_right += t;
        }
        // sum over panels of max e^{xy}, at most the integral over one extra panel
        let panels_left = (1.0 + h * x) / (h * x);
        let panels_right = self.config.y_max / h + 1.0;
        // on the right the factor e^{(x - 4k) y} is at most one
        (ln_k.exp()) * (m_left * panels_left + m_right * panels_right)
    }

    pub fn transform(&self, s: Complex, ctx: &PrecisionContext) -> Result<TransformResidual> {
        Ok(self.transform_many(&[s], ctx)?.pop().unwrap())
    }

    /// One pass over the nodes serves every `s`.
    pub fn transform_many(&self, points: &[Complex], ctx: &PrecisionContext) -> Result<Vec<TransformResidual>> {
        for s in points {
            let x = s.re.to_f64();
            if !(x > 0.0 && x < 4.0) {
                return Err(Error::Domain(format!("{s} is outside 0 < Re(s) < 4")));
            }
            let tail = self.window_tail(x);
            if tail > self.config.tail_tol {
                return Err(Error::Window(format!(
                    "tail bound {tail:e} at Re(s) = {x} exceeds {:e} on [{}, {}]",
                    self.config.tail_tol, self.config.y_min, self.config.y_max
                )));
            }
        }
        let nodes = self.nodes();
        let g_err_left = self.lambda(-1.0).err + self.p0_trunc;
        let jump = self.jump();
        points
            .iter()
            .map(|&s| {
                let (acc, abs) = nodes
                    .par_chunks(4096)
                    .map(|chunk| {
                        let mut acc = Complex::ZERO;
                        let mut abs = 0.0;
                        for &(y, w, g) in chunk {
                            let term = (s * y).exp() * (w * g);
                            abs += term.norm();
                            acc += term;
                        }
                        (acc, abs)
                    })
                    .collect::<Vec<_>>()
                    .into_iter()
                    // fixed summation order keeps the result bit-identical across runs
                    .fold((Complex::ZERO, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
                let x = s.re.to_f64();
                let f = block(BlockName::F, s, ctx)?;
                let window_tail = self.window_tail(x);
                let budget = window_tail
                    + self.quadrature_bound(s)
                    + 16.0 * EPS * abs
                    + g_err_left / x
                    + self.p0_trunc / (4.0 - x)
                    + f.err;
                Ok(TransformResidual {
                    integral: (acc.re.to_f64(), acc.im.to_f64()),
                    f: (f.value().re.to_f64(), f.value().im.to_f64()),
                    residual: (acc - f.value()).norm(),
                    budget,
                    window_tail,
                    jump,
                })
            })
            .collect()
    }
}

/// `(y, w, g_0(y))` over `[a, b]` on one branch; `lambda` at the nodes
/// comes from rotating `e^{i gamma_k y}` panel to panel.
fn branch_nodes(d: &Density, a: Dd, b: Dd, width: f64, rule: &[(Dd, Dd)], left: bool) -> Vec<(Dd, Dd, Dd)> {
    let panels = ((b - a).to_f64() / width).ceil().max(1.0) as usize;
    let h = (b - a) / Dd::from(panels as f64);
    let half = h.mul_pwr2(0.5);
    let offsets: Vec<Dd> = rule.iter().map(|(x, _)| half * *x).collect();
    // c_k e^{i gamma_k offset_j} and the panel step e^{i gamma_k h}
    let (shifted, step): (Vec<Vec<Complex>>, Vec<Complex>) = if left {
        let shifted = offsets
            .iter()
            .map(|o| d.c_imag.iter().zip(&d.gammas).map(|(c, g)| cis(*g * *o).scale(*c)).collect())
            .collect();
        (shifted, d.gammas.iter().map(|g| cis(*g * h)).collect())
    } else {
        (vec![], vec![])
    };
    let blocks: Vec<usize> = (0..panels).step_by(RESYNC).collect();
    blocks
        .par_iter()
        .flat_map_iter(|&start| {
            let end = (start + RESYNC).min(panels);
            let mut out = Vec::with_capacity((end - start) * rule.len());
            let mid0 = a + h * Dd::from(start as f64) + half;
            let mut rot: Vec<Complex> = if left { d.gammas.iter().map(|g| cis(*g * mid0)).collect() } else { vec![] };
            for p in start..end {
                let mid = a + h * Dd::from(p as f64) + half;
                for (j, &(_, w)) in rule.iter().enumerate() {
                    let y = mid + offsets[j];
                    let q = (y.abs() * -4.0).exp();
                    let series = d.real_series(q);
                    let g = if left {
                        let mut lam = Dd::ZERO;
                        for (e, a) in rot.iter().zip(&shifted[j]) {
                            lam = lam + (e.re * a.re - e.im * a.im);
                        }
                        lam.mul_pwr2(2.0) + d.c0 + series
                    } else {
                        -series
                    };
                    out.push((y, half * w, g));
                }
                if left {
                    for (e, r) in rot.iter_mut().zip(&step) {
                        *e = *e * *r;
                    }
                }
            }
            out
        })
        .collect()
}

fn cis(t: Dd) -> Complex {
    let (s, c) = t.sin_cos();
    Complex::new(c, s)
}

pub fn lambda_eval(y: f64, n: usize, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<DensityValue> {
    Ok(Density::new(DensityConfig::new(n), cache, ctx)?.lambda(y))
}

pub fn g0_eval(y: f64, config: &DensityConfig, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<DensityValue> {
    Density::new(*config, cache, ctx)?.g0(y)
}

pub fn transform_residual(s: Complex, config: &DensityConfig, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<TransformResidual> {
    Density::new(*config, cache, ctx)?.transform(s, ctx)
}

/// `int e^{sy} g_0` against the closed form `c0/s + p_I + p_R` built from
/// the same coefficients; isolates the quadrature from the truncation.
pub fn closed_form(s: Complex, d: &Density) -> ComplexValue {
    let mut acc = Complex::real(d.c0) / s;
    let s2 = s * s;
    for (c, g) in d.c_imag.iter().zip(&d.gammas) {
        acc += s * (*c * 2.0) / (s2 + g.sqr());
    }
    for (i, c) in d.c_real.iter().enumerate() {
        let w = Dd::from(4.0 * (i + 1) as f64);
        acc += s * (*c * 2.0) / (s2 - w.sqr());
    }
    ComplexValue::new(acc, d.p0_trunc + 64.0 * EPS * acc.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{fill_coefficients, p0_eval};
    use crate::complex::c;
    use crate::zeros::{locate_zeros, ZeroTarget};
    use std::sync::OnceLock;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn cache() -> &'static ZeroCache {
        static C: OnceLock<ZeroCache> = OnceLock::new();
        C.get_or_init(|| {
            let mut z = locate_zeros(ZeroTarget::Count(60), &ctx()).unwrap().0;
            fill_coefficients(&mut z, &ctx()).unwrap();
            z
        })
    }

    #[test]
    fn lambda_even_and_at_zero() {
        let d = Density::new(DensityConfig::new(40), cache(), &ctx()).unwrap();
        for y in [0.1, 0.7, 3.3] {
            assert!((d.lambda(y).value - d.lambda(-y).value).abs() < 1e-28);
        }
        let l0 = d.lambda(0.0).value;
        let signed: f64 = (1..=40).map(|k| 2.0 * c_at(Pole::Imag(k), cache(), &ctx()).unwrap().value.to_f64()).sum();
        assert!((l0 - signed).abs() < 1e-14 && l0.abs() <= 2.0 * d.abs_imag);
    }

    #[test]
    fn g0_branches() {
        let ctx = ctx();
        let d = Density::new(DensityConfig::new(40), cache(), &ctx).unwrap();
        assert!(matches!(d.g0(0.0), Err(Error::Domain(_))));
        let z = ComplexValue::exact(Complex::real(Dd::PI * (Dd::from(-0.6)).exp()));
        let p = p0_eval(&z, &ctx).unwrap();
        assert!((d.g0(0.3).unwrap().value - p.value().re.to_f64()).abs() < 1e-15);
        assert!(d.g0(-0.3).unwrap().value.is_finite());
        // g_0 e^{4y} approaches -c(4) as y grows
        let c4 = d.c_real[0].to_f64();
        for y in [5.0, 10.0, 20.0] {
            let v = d.g0(y).unwrap().value * (4.0 * y).exp();
            assert!((v + c4).abs() < 1e-6 * c4.abs() + 1e-3 * (-4.0 * y).exp().sqrt());
        }
        assert!(d.g0(60.0).unwrap().value.abs() < 1e-100);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let ctx = ctx();
        let d = Density::new(DensityConfig::new(20), cache(), &ctx).unwrap();
        for s in [c(2.0, 0.0), c(1.5, 3.0)] {
            let r = d.transform(s, &ctx).unwrap();
            let cf = closed_form(s, &d);
            let diff = ((r.integral.0 - cf.re.to_f64()).powi(2) + (r.integral.1 - cf.im.to_f64()).powi(2)).sqrt();
            assert!(diff < 1e-14, "{diff:e} budget {:e}", r.budget);
            assert!(r.budget < 1e-13);
        }
    }

    #[test]
    fn residual_symmetric_and_shrinking() {
        let ctx = ctx();
        let a = Density::new(DensityConfig::new(15), cache(), &ctx).unwrap();
        let b = Density::new(DensityConfig::new(60), cache(), &ctx).unwrap();
        let r = a.transform_many(&[c(2.0, 1.0), c(2.0, -1.0)], &ctx).unwrap();
        assert!((r[0].residual - r[1].residual).abs() < 1e-13 * r[0].residual.max(1e-20));
        let rb = b.transform(c(2.0, 1.0), &ctx).unwrap();
        assert!(rb.residual < r[0].residual);
    }

    #[test]
    fn window_checks() {
        let ctx = ctx();
        let mut cfg = DensityConfig::new(20);
        cfg.y_max = 10.0;
        let d = Density::new(cfg, cache(), &ctx).unwrap();
        assert!(matches!(d.transform(c(2.0, 0.0), &ctx), Err(Error::Window(_))));
        assert!(matches!(d.transform(c(4.5, 0.0), &ctx), Err(Error::Domain(_))));
        cfg.y_min = 1.0;
        assert!(matches!(Density::new(cfg, cache(), &ctx), Err(Error::Config(_))));
    }
}
