//! The truncated expansion `p = p_r + p_i` of `f`, the defect
//! `Delta = f - p`, the single-pole terms `T`, and the remainder and
//! decomposition bounds used around each pole.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{c_at, series_constants, Pole};
use crate::complex::{c, Complex, ComplexValue, RealValue};
use crate::context::PrecisionContext;
use crate::dd::{Dd, EPS};
use crate::error::{Error, Result, Warning};
use crate::kernel::zeta::zeta_raw;
use crate::xi::{block, BlockName};
use crate::zeros::ZeroCache;

pub const DEFAULT_D: f64 = 2.0;
pub const DEFAULT_ALPHA: f64 = 0.25;
/// Inside this distance from a pole only `f - T` is reported.
pub const POLE_GUARD: f64 = 1e-3;
pub const CIRCLE_SAMPLES: usize = 64;
/// Relative slack on bounds that use a sampled maximum over a circle.
pub const SAMPLING_SLACK: f64 = 1e-2;

/// Cutoffs, disk radii and the uniform tail bounds of a truncated expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTruncation {
    pub w: usize,
    pub n: usize,
    pub d: f64,
    pub alpha: f64,
    /// `sum_{|w| > W} |c(4w)| / d`
    pub tail_real: f64,
    /// `sum_{|k| > N} |c(i gamma_k)| / (alpha delta'_k)`, fitted
    pub tail_imag: f64,
}

impl ExpansionTruncation {
    pub fn new(w: usize, n: usize, d: f64, alpha: f64, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<ExpansionTruncation> {
        if !(d > 0.0 && d <= 2.0) {
            return Err(Error::Config(format!("d must lie in (0, 2], got {d}")));
        }
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::Config(format!("alpha must lie in (0, 1/2), got {alpha}")));
        }
        if n == 0 || n > cache.len() {
            return Err(Error::Index { index: n, available: cache.len() });
        }
        let tail_real = 2.0 * real_abs_tail(w, |_| d)?;
        let b_tail = series_constants(cache, n, ctx)?.b.tail;
        let tail_imag = if b_tail.is_finite() { 2.0 * b_tail / alpha } else { f64::INFINITY };
        Ok(ExpansionTruncation { w, n, d, alpha, tail_real, tail_imag })
    }

    pub fn defaults(cache: &ZeroCache, ctx: &PrecisionContext) -> Result<ExpansionTruncation> {
        ExpansionTruncation::new(50, 100.min(cache.len()), DEFAULT_D, DEFAULT_ALPHA, cache, ctx)
    }
}

/// `|c(4w)|` without building a cache.
fn c_real_abs(w: usize) -> Result<f64> {
    let empty = ZeroCache::empty();
    Ok(c_at(Pole::Real(w as i64), &empty, &PrecisionContext::default())?.value.abs().to_f64())
}

/// `sum_{w > W} |c(4w)| / dist(w)`; the terms fall off faster than any
/// geometric sequence once `dist` stops shrinking, so the sum is cut when a
/// term is below `1e-40` of the total and bounded by twice that term.
fn real_abs_tail(w_cut: usize, dist: impl Fn(usize) -> f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut w = w_cut + 1;
    let mut prev = f64::INFINITY;
    loop {
        let dw = dist(w);
        if !(dw > 0.0) {
            return Ok(f64::INFINITY);
        }
        let term = c_real_abs(w)? / dw;
        sum += term;
        if term < prev && (term <= 1e-40 * sum || term == 0.0) {
            return Ok(sum + 2.0 * term);
        }
        prev = term;
        w += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `s` lies in the closed disk `B(4w, d)`.
    RealDisk(i64),
    /// `s` lies in `B(i gamma_k, alpha delta'_k)`; negative `k` for `-i gamma_|k|`.
    ImagDisk(i64),
    Exterior,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionTag {
    pub region: Region,
    /// `|Re(s)| >= 1/2`
    pub s_member: bool,
}

impl Region {
    pub fn pole(&self) -> Option<Pole> {
        match *self {
            Region::RealDisk(w) => Some(Pole::Real(w)),
            Region::ImagDisk(k) => Some(Pole::Imag(k)),
            Region::Exterior => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Region::RealDisk(w) => format!("real:{w}"),
            Region::ImagDisk(k) => format!("imag:{k}"),
            Region::Exterior => "exterior".into(),
        }
    }
}

/// Index `k` (1-based) of the cached ordinate nearest to `t >= 0`.
fn nearest_ordinate(cache: &ZeroCache, t: f64) -> Option<usize> {
    if cache.is_empty() {
        return None;
    }
    let i = cache.records.partition_point(|r| r.gamma.to_f64() < t);
    let cands = [i.saturating_sub(1), i.min(cache.len() - 1)];
    cands.into_iter().min_by(|&a, &b| {
        let da = (cache.records[a].gamma.to_f64() - t).abs();
        let db = (cache.records[b].gamma.to_f64() - t).abs();
        da.total_cmp(&db)
    }).map(|i| i + 1)
}

/// Which pole disk, if any, contains `s`.
pub fn classify(s: &ComplexValue, trunc: &ExpansionTruncation, cache: &ZeroCache) -> RegionTag {
    let z = s.value();
    let s_member = z.re.abs() >= 0.5;
    let w = (z.re.to_f64() / 4.0).round();
    if (z - c(4.0 * w, 0.0)).norm() <= trunc.d {
        return RegionTag { region: Region::RealDisk(w as i64), s_member };
    }
    let t = z.im.to_f64();
    if let Some(k) = nearest_ordinate(cache, t.abs()) {
        let r = &cache.records[k - 1];
        let centre = Complex::imag(if t < 0.0 { -r.gamma } else { r.gamma });
        if (z - centre).norm() <= trunc.alpha * r.delta_prime.to_f64() {
            let k = k as i64;
            return RegionTag { region: Region::ImagDisk(if t < 0.0 { -k } else { k }), s_member };
        }
    }
    RegionTag { region: Region::Exterior, s_member }
}

/// A truncated sum with a bound on the omitted terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncated {
    pub value: ComplexValue,
    pub tail: f64,
}

/// `f`, `p` and `Delta = f - p` at one point, with the truncation budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaValue {
    pub f: ComplexValue,
    pub p: ComplexValue,
    pub delta: ComplexValue,
    pub budget: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalTerm {
    pub t: ComplexValue,
    pub f_minus_t: ComplexValue,
}

/// The expansion with its coefficients evaluated once.
#[derive(Clone, Debug)]
pub struct Expansion<'a> {
    pub cache: &'a ZeroCache,
    pub trunc: ExpansionTruncation,
    c0: RealValue,
    /// `c(4w)` for `w = 1..=W`
    c_real: Vec<RealValue>,
    /// `c(i gamma_k)` for `k = 1..=N`
    c_imag: Vec<RealValue>,
    gamma: Vec<Dd>,
    /// fitted `sum_{k > N} |c(i gamma_k)| / gamma_k^2`
    c_tail: f64,
    /// fitted `sum_{k > N} |c(i gamma_k)| / delta'_k`
    b_tail: f64,
    ctx: PrecisionContext,
}

impl<'a> Expansion<'a> {
    pub fn new(cache: &'a ZeroCache, trunc: ExpansionTruncation, ctx: &PrecisionContext) -> Result<Expansion<'a>> {
        let empty = ZeroCache::empty();
        let c0 = c_at(Pole::Real(0), &empty, ctx)?;
        let c_real = (1..=trunc.w).map(|w| c_at(Pole::Real(w as i64), &empty, ctx)).collect::<Result<_>>()?;
        let c_imag = (1..=trunc.n).into_par_iter().map(|k| c_at(Pole::Imag(k as i64), cache, ctx)).collect::<Result<_>>()?;
        let gamma = cache.records[..trunc.n].iter().map(|r| r.gamma).collect();
        let sc = series_constants(cache, trunc.n, ctx)?;
        let finite = |x: f64| if x.is_finite() { x } else { f64::INFINITY };
        Ok(Expansion { cache, trunc, c0, c_real, c_imag, gamma, c_tail: finite(sc.c.tail), b_tail: finite(sc.b.tail), ctx: *ctx })
    }

    /// `c(0)/s + sum_{w=1}^{W} c(4w) 2s / (s^2 - 16 w^2)`
    pub fn p_r(&self, s: &ComplexValue) -> Result<Truncated> {
        let z = s.value();
        let pole_tol = self.ctx.half_tol();
        if z.norm() < pole_tol {
            return Err(Error::Pole(format!("p_r at {z}")));
        }
        let z2 = z * z;
        let two_z = z.scale(Dd::from(2.0));
        let mut sum = Complex::real(self.c0.value) / z;
        let mut err = self.c0.err / z.norm();
        let mut abs_sum = sum.norm();
        let mut slope = self.c0.value.abs().to_f64() / z.norm_sqr().to_f64();
        for (i, cw) in self.c_real.iter().enumerate() {
            let w4 = Dd::from(4.0 * (i + 1) as f64);
            let dist = (z - Complex::real(w4)).norm().min((z + Complex::real(w4)).norm());
            if dist < pole_tol {
                return Err(Error::Pole(format!("p_r at {z}")));
            }
            let den = z2 - Complex::real(w4 * w4);
            let term = two_z * cw.value / den;
            let ratio = term.norm() / cw.value.abs().to_f64().max(f64::MIN_POSITIVE);
            sum += term;
            abs_sum += term.norm();
            err += cw.err * ratio;
            slope += 2.0 * cw.value.abs().to_f64() / (dist * dist);
        }
        let tail = real_abs_tail(self.trunc.w, |w| {
            let w4 = 4.0 * w as f64;
            // each omitted pair contributes |c| (1/|s - 4w| + 1/|s + 4w|)
            1.0 / (1.0 / (z - c(w4, 0.0)).norm() + 1.0 / (z + c(w4, 0.0)).norm())
        })?;
        let err = err + 8.0 * EPS * abs_sum + slope * s.err;
        Ok(Truncated { value: ComplexValue::new(sum, err), tail })
    }

    /// `2s sum_{k=1}^{N} c(i gamma_k) / (s^2 + gamma_k^2)`
    pub fn p_i(&self, s: &ComplexValue) -> Result<Truncated> {
        let z = s.value();
        let pole_tol = self.ctx.half_tol();
        let z2 = z * z;
        let two_z = z.scale(Dd::from(2.0));
        let mut sum = Complex::ZERO;
        let mut err = 0.0;
        let mut abs_sum = 0.0;
        let mut slope = 0.0;
        for (ck, g) in self.c_imag.iter().zip(&self.gamma) {
            let dist = (z - Complex::imag(*g)).norm().min((z + Complex::imag(*g)).norm());
            if dist < pole_tol {
                return Err(Error::Pole(format!("p_i at {z}")));
            }
            let term = two_z * ck.value / (z2 + Complex::real(g.sqr()));
            let ratio = term.norm() / ck.value.abs().to_f64().max(f64::MIN_POSITIVE);
            sum += term;
            abs_sum += term.norm();
            err += ck.err * ratio;
            slope += 2.0 * ck.value.abs().to_f64() / (dist * dist);
        }
        let err = err + 8.0 * EPS * abs_sum + slope * s.err;
        Ok(Truncated { value: ComplexValue::new(sum, err), tail: self.p_i_tail(z) })
    }

    /// Bound on the omitted imaginary-axis terms at `s`. Well inside the
    /// omitted ordinates the paired form gives `2|s| C_tail / (1 - |s|^2/g^2)`;
    /// otherwise the disk-exterior bound `(2/alpha) B_tail` applies, which
    /// needs `s` outside every omitted disk.
    fn p_i_tail(&self, z: Complex) -> f64 {
        let n = self.trunc.n;
        let g_next = match self.cache.records.get(n) {
            Some(r) => r.gamma.to_f64(),
            None => self.cache.next_gamma.map(|g| g.to_f64()).unwrap_or_else(|| self.gamma[n - 1].to_f64()),
        };
        let rho2 = z.norm_sqr().to_f64() / (g_next * g_next);
        if rho2 <= 0.5 {
            return 2.0 * z.norm() * self.c_tail / (1.0 - rho2);
        }
        let t = z.im.to_f64().abs();
        let inside = self.cache.records[n..].iter().any(|r| {
            (z.re.to_f64().hypot(t - r.gamma.to_f64())) <= self.trunc.alpha * r.delta_prime.to_f64()
        });
        if inside {
            f64::INFINITY
        } else {
            2.0 * self.b_tail / self.trunc.alpha
        }
    }

    /// `p_r(s) + p_i(s)` with the summed tail bounds.
    pub fn p(&self, s: &ComplexValue) -> Result<Truncated> {
        let r = self.p_r(s)?;
        let i = self.p_i(s)?;
        Ok(Truncated { value: r.value + i.value, tail: r.tail + i.tail })
    }

    /// Distance from `s` to the nearest pole kept in the truncation.
    pub fn pole_distance(&self, z: Complex) -> f64 {
        let x = z.re.to_f64();
        let w = (x / 4.0).round().clamp(-(self.trunc.w as f64), self.trunc.w as f64);
        let dr = (z - c(4.0 * w, 0.0)).norm();
        let t = z.im.to_f64().abs();
        let di = match nearest_ordinate(&self.cache.truncated(self.trunc.n), t) {
            Some(k) => x.hypot(t - self.gamma[k - 1].to_f64()),
            None => f64::INFINITY,
        };
        dr.min(di)
    }

    /// `Delta(s) = f(s) - p_r(s) - p_i(s)`; refused within `POLE_GUARD` of a kept pole.
    pub fn delta(&self, s: &ComplexValue) -> Result<DeltaValue> {
        let z = s.value();
        let dist = self.pole_distance(z);
        if dist <= POLE_GUARD {
            return Err(Error::Pole(format!("Delta at {z}: distance {dist:e} to a pole")));
        }
        let f = crate::xi::eval_block(BlockName::F, s, &self.ctx)?;
        let p = self.p(s)?;
        Ok(DeltaValue { f, p: p.value, delta: f - p.value, budget: p.tail })
    }

    /// Classification against this truncation's disks.
    pub fn classify(&self, s: &ComplexValue) -> RegionTag {
        classify(s, &self.trunc, self.cache)
    }

    /// The uniform disk-exterior bound `A'` over the kept poles plus the
    /// omitted ones.
    pub fn pole_disks(&self) -> Vec<PoleDisk> {
        let mut out = vec![PoleDisk { center: Complex::ZERO, radius: self.trunc.d, modulus: self.c0.to_f64().abs() }];
        for (i, cw) in self.c_real.iter().enumerate() {
            let x = 4.0 * (i + 1) as f64;
            let m = cw.to_f64().abs();
            out.push(PoleDisk { center: c(x, 0.0), radius: self.trunc.d, modulus: m });
            out.push(PoleDisk { center: c(-x, 0.0), radius: self.trunc.d, modulus: m });
        }
        for (k, ck) in self.c_imag.iter().enumerate() {
            let g = self.gamma[k];
            let r = self.trunc.alpha * self.cache.records[k].delta_prime.to_f64();
            let m = ck.to_f64().abs();
            out.push(PoleDisk { center: Complex::imag(g), radius: r, modulus: m });
            out.push(PoleDisk { center: Complex::imag(-g), radius: r, modulus: m });
        }
        out
    }

    pub fn uniform_tail(&self) -> f64 {
        self.trunc.tail_real + self.trunc.tail_imag
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn b_tail(&self) -> f64 {
        self.b_tail
    }
}

/// `p_r(s)` truncated at `W`.
pub fn p_r_eval(s: &ComplexValue, w: usize, ctx: &PrecisionContext) -> Result<Truncated> {
    let empty = ZeroCache::empty();
    let trunc = ExpansionTruncation { w, n: 0, d: DEFAULT_D, alpha: DEFAULT_ALPHA, tail_real: 0.0, tail_imag: 0.0 };
    let c0 = c_at(Pole::Real(0), &empty, ctx)?;
    let c_real = (1..=w).map(|w| c_at(Pole::Real(w as i64), &empty, ctx)).collect::<Result<_>>()?;
    let e = Expansion { cache: &empty, trunc, c0, c_real, c_imag: vec![], gamma: vec![], c_tail: 0.0, b_tail: 0.0, ctx: *ctx };
    e.p_r(s)
}

/// `p_i(s)` truncated at `N`.
pub fn p_i_eval(s: &ComplexValue, n: usize, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<Truncated> {
    let trunc = ExpansionTruncation::new(0, n, DEFAULT_D, DEFAULT_ALPHA, cache, ctx)?;
    Expansion::new(cache, trunc, ctx)?.p_i(s)
}

/// `Delta(s)` for the given truncation.
pub fn delta_eval(s: &ComplexValue, trunc: &ExpansionTruncation, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<DeltaValue> {
    Expansion::new(cache, *trunc, ctx)?.delta(s)
}

/// `e^{2 pi i j / m}` in double-double.
fn unit_root(j: usize, m: usize) -> Complex {
    let theta = Dd::TWO_PI * Dd::from(j as f64) / Dd::from(m as f64);
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

/// Value at `s` of a function analytic on the disk `|zeta - z| <= radius`
/// (apart from a removable point at `z`), from its samples on the circle:
/// the trapezoidal Cauchy integral `(1/m) sum g(zeta_j)(zeta_j - z)/(zeta_j - s)`.
/// The error is estimated by comparing against the rule on every other point.
pub fn cauchy_value<G>(g: G, z: Complex, s: Complex, radius: f64, m: usize) -> Result<ComplexValue>
where
    G: Fn(Complex) -> Result<Complex> + Sync,
{
    let m = m.max(4) & !1;
    let r = Dd::from(radius);
    let terms: Vec<(Complex, f64)> = (0..m)
        .into_par_iter()
        .map(|j| {
            let u = unit_root(j, m);
            let zeta = z + u * r;
            let v = g(zeta)?;
            Ok((v * (u * r) / (zeta - s), v.norm()))
        })
        .collect::<Result<_>>()?;
    let sum: Complex = terms.iter().map(|t| t.0).sum();
    let half: Complex = terms.iter().step_by(2).map(|t| t.0).sum();
    let full = sum / Dd::from(m as f64);
    let coarse = half / Dd::from((m / 2) as f64);
    let gmax = terms.iter().map(|t| t.1).fold(0.0, f64::max);
    let q = (s - z).norm() / radius;
    let err = (full - coarse).norm() + gmax / (1.0 - q) * 8.0 * EPS * m as f64;
    Ok(ComplexValue::new(full, err))
}

/// Radius of the circle used to evaluate `f - T` near its pole.
fn removable_radius(pole: Pole, cache: &ZeroCache) -> Result<f64> {
    match pole {
        Pole::Real(_) => Ok(1.0),
        Pole::Imag(k) => Ok(cache.get(k.unsigned_abs() as usize)?.delta_prime.to_f64() / 2.0),
    }
}

/// `T(s) = c(z)/(s - z)` for the pole of the region, and `f(s) - T(s)`.
/// Within `POLE_GUARD` of the pole the difference is taken from the Cauchy
/// integral of `f - T`, which has a removable singularity there.
pub fn local_term(s: &ComplexValue, region: &RegionTag, cache: &ZeroCache, ctx: &PrecisionContext) -> Result<LocalTerm> {
    let pole = region.region.pole().ok_or_else(|| Error::Domain("local term needs a pole disk, got exterior".into()))?;
    let z = pole.location(cache)?;
    let cz = c_at(pole, cache, ctx)?;
    let cv = ComplexValue::new(Complex::real(cz.value), cz.err);
    let sz = s.value();
    let f_minus_t = |x: Complex| -> Result<Complex> {
        let f = block(BlockName::F, x, ctx)?.value();
        Ok(f - Complex::real(cz.value) / (x - z))
    };
    let diff = *s - ComplexValue::exact(z);
    if diff.abs() == 0.0 {
        let g = cauchy_value(f_minus_t, z, sz, removable_radius(pole, cache)?, 96)?;
        return Ok(LocalTerm { t: ComplexValue::new(Complex::ZERO, f64::INFINITY), f_minus_t: g });
    }
    let t = cv / diff;
    let g = if diff.abs() <= POLE_GUARD {
        cauchy_value(f_minus_t, z, sz, removable_radius(pole, cache)?, 96)?
    } else {
        crate::xi::eval_block(BlockName::F, s, ctx)? - t
    };
    Ok(LocalTerm { t, f_minus_t: g })
}

/// A disk `B(center, radius)` carrying a coefficient of modulus `modulus`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoleDisk {
    pub center: Complex,
    pub radius: f64,
    pub modulus: f64,
}

/// `A'` and the explicit smallness radius for one `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct APrimeBound {
    /// `sum |c_z| / d_z`
    pub a_prime: f64,
    pub epsilon: f64,
    /// least `r'` with `sum_{|z| > r'} |c_z|/d_z < epsilon/2`
    pub r_cut: f64,
    /// largest `|z|` not beyond `r_cut`
    pub m: f64,
    /// `sum_{|z| <= r_cut} |c_z|`
    pub theta: f64,
    /// `m + (2/epsilon) theta`
    pub r_eps: f64,
}

/// Checks that no two disks overlap; tangent closed disks are accepted.
pub fn check_disjoint(poles: &[PoleDisk]) -> Result<()> {
    let mut order: Vec<usize> = (0..poles.len()).collect();
    order.sort_by(|&a, &b| poles[a].center.re.to_f64().total_cmp(&poles[b].center.re.to_f64()));
    let rmax = poles.iter().map(|p| p.radius).fold(0.0, f64::max);
    for (i, &a) in order.iter().enumerate() {
        let pa = &poles[a];
        for &b in &order[i + 1..] {
            let pb = &poles[b];
            if pb.center.re.to_f64() - pa.center.re.to_f64() > pa.radius + rmax {
                break;
            }
            let dist = (pa.center - pb.center).norm();
            if dist < (pa.radius + pb.radius) * (1.0 - 1e-15) {
                return Err(Error::Disjointness(format!(
                    "B({}, {}) and B({}, {}) at distance {dist}",
                    pa.center, pa.radius, pb.center, pb.radius
                )));
            }
        }
    }
    Ok(())
}

/// `A'` and `R(epsilon)` for a finite family of disjoint pole disks.
pub fn tail_bound_a_prime(poles: &[PoleDisk], epsilon: f64) -> Result<APrimeBound> {
    if poles.iter().any(|p| !(p.radius > 0.0)) {
        return Err(Error::Domain("pole radii must be positive".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    check_disjoint(poles)?;
    let mut by_mod: Vec<(f64, f64, f64)> = poles.iter().map(|p| (p.center.norm(), p.modulus / p.radius, p.modulus)).collect();
    by_mod.sort_by(|a, b| a.0.total_cmp(&b.0));
    let a_prime: f64 = by_mod.iter().map(|p| p.1).sum();
    // beyond[i] = sum over entries i.. of |c|/d
    let mut beyond = vec![0.0; by_mod.len() + 1];
    for i in (0..by_mod.len()).rev() {
        beyond[i] = beyond[i + 1] + by_mod[i].1;
    }
    let first_positive = by_mod.partition_point(|p| p.0 <= 0.0);
    let mut r_cut = 0.0;
    if beyond[first_positive] >= epsilon / 2.0 {
        r_cut = f64::INFINITY;
        let mut i = 0;
        while i < by_mod.len() {
            let r = by_mod[i].0;
            let j = by_mod.partition_point(|p| p.0 <= r);
            if beyond[j] < epsilon / 2.0 {
                r_cut = r;
                break;
            }
            i = j;
        }
    }
    let inside: Vec<&(f64, f64, f64)> = by_mod.iter().filter(|p| p.0 <= r_cut).collect();
    let m = inside.iter().map(|p| p.0).fold(0.0, f64::max);
    let theta: f64 = inside.iter().map(|p| p.2).sum();
    let r_eps = if inside.is_empty() { 0.0 } else { m + 2.0 * theta / epsilon };
    Ok(APrimeBound { a_prime, epsilon, r_cut, m, theta, r_eps })
}

/// `G'(s) = sum_{z in I(s)} |c_z| / |s - z|`, leaving out the disk containing `s`.
pub fn g_prime(s: Complex, poles: &[PoleDisk]) -> f64 {
    poles
        .iter()
        .map(|p| {
            let d = (s - p.center).norm();
            if d <= p.radius {
                0.0
            } else {
                p.modulus / d
            }
        })
        .sum()
}

/// Both sides of the Taylor remainder bound on sampled circles.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorCheck {
    /// max `|F_n(z, h, z0)|` over `|z - z0| = r`
    pub lhs_max: f64,
    /// `M(h, z0, rho) / (rho^{n-1} (rho - r))`
    pub rhs_bound: f64,
    pub holds: bool,
    pub warnings: Vec<Warning>,
}

/// Largest `|h|` over `CIRCLE_SAMPLES` points of `|z - z0| = rho`; samples
/// where `h` fails are skipped and reported.
pub fn circle_max<H>(h: &H, z0: Complex, rho: f64, warnings: &mut Vec<Warning>) -> f64
where
    H: Fn(Complex) -> Result<Complex> + Sync,
{
    let r = Dd::from(rho);
    let vals: Vec<std::result::Result<f64, String>> = (0..CIRCLE_SAMPLES)
        .into_par_iter()
        .map(|j| {
            let z = z0 + unit_root(j, CIRCLE_SAMPLES) * r;
            h(z).map(|v| v.norm()).map_err(|e| format!("{e} at {z}"))
        })
        .collect();
    let mut m: f64 = 0.0;
    for v in vals {
        match v {
            Ok(x) => m = m.max(x),
            Err(e) => warnings.push(Warning::Analyticity(e)),
        }
    }
    m
}

/// `F_n(s, h, z0) = (h(s) - sum_{k<n} a_k (s - z0)^k) / (s - z0)^n` with
/// the Taylor coefficients `a`.
fn remainder_quotient(hs: Complex, a: &[Complex], s: Complex, z0: Complex) -> Complex {
    let u = s - z0;
    let mut poly = Complex::ZERO;
    for ak in a.iter().rev() {
        poly = poly * u + *ak;
    }
    (hs - poly) / u.powi(a.len() as u32)
}

/// Samples `|F_n|` on `|z - z0| = r` and compares against the Cauchy bound
/// built from the maximum of `|h|` on `|z - z0| = rho`.
pub fn taylor_remainder_check<H>(h: H, z0: Complex, rho: f64, r: f64, n: usize, _ctx: &PrecisionContext) -> Result<TaylorCheck>
where
    H: Fn(Complex) -> Result<Complex> + Sync,
{
    if !(r > 0.0 && r < rho) {
        return Err(Error::Domain(format!("need 0 < r < rho, got r = {r}, rho = {rho}")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let mut warnings = Vec::new();
    let coeffs = match crate::kernel::derivative::taylor_coefficients(&h, z0, rho / 2.0, n, 128) {
        Ok((mut a, _)) => {
            a[0] = h(z0)?;
            a
        }
        Err(e) => {
            warnings.push(Warning::Analyticity(format!("Taylor coefficients at {z0}: {e}")));
            return Ok(TaylorCheck { lhs_max: f64::NAN, rhs_bound: f64::NAN, holds: false, warnings });
        }
    };
    let rd = Dd::from(r);
    let lhs: Vec<std::result::Result<f64, String>> = (0..CIRCLE_SAMPLES)
        .into_par_iter()
        .map(|j| {
            let z = z0 + unit_root(j, CIRCLE_SAMPLES) * rd;
            h(z).map(|hz| remainder_quotient(hz, &coeffs, z, z0).norm()).map_err(|e| format!("{e} at {z}"))
        })
        .collect();
    let mut lhs_max: f64 = 0.0;
    for v in lhs {
        match v {
            Ok(x) => lhs_max = lhs_max.max(x),
            Err(e) => warnings.push(Warning::Analyticity(e)),
        }
    }
    let m = circle_max(&h, z0, rho, &mut warnings);
    let rhs_bound = m / (rho.powi(n as i32 - 1) * (rho - r));
    Ok(TaylorCheck { lhs_max, rhs_bound, holds: lhs_max <= rhs_bound * (1.0 + SAMPLING_SLACK), warnings })
}

/// The two factorisations `n = A B` around a pole of `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecompositionCase {
    /// `B(s) = sin(pi s/4)`, `A(s) = 2 xi(1/2 + s)` at `z = 4w`, `w >= 1`
    Prime,
    /// `B(s) = zeta(1/2 + s)`, `A(s) = b(s)` at `z = i gamma_k`
    DoublePrime,
}

/// Result of evaluating the decomposition of `Delta(s, z)` both ways.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCheck {
    /// `1/(A(s)B(s)) - 1/((AB)'(z)(s - z))` from `f` and the residue
    pub lhs: ComplexValue,
    /// `(1/A(s))(1/B(s) - 1/(B'(z)(s-z))) + F_1(s, 1/A, z)/B'(z)`
    pub rhs: ComplexValue,
    pub residual: f64,
    /// combined error of both sides
    pub err: f64,
    /// `|B'(z)|^{-1} (M(B,z,rho)/(rho(rho-r)|A(s)B(s)/(s-z)|) + M(1/A,z,rho')/(rho'-r))`
    pub bound: f64,
    pub bound_holds: bool,
    pub warnings: Vec<Warning>,
}

struct CaseSetup<'a> {
    z: Complex,
    r: f64,
    rho: f64,
    rho_p: f64,
    a: Box<dyn Fn(Complex) -> Result<Complex> + Sync + 'a>,
    b: Box<dyn Fn(Complex) -> Result<Complex> + Sync + 'a>,
    b_prime: ComplexValue,
}

fn case_setup<'a>(pole: Pole, case: DecompositionCase, trunc: &ExpansionTruncation, cache: &'a ZeroCache, ctx: &'a PrecisionContext) -> Result<CaseSetup<'a>> {
    match (case, pole) {
        (DecompositionCase::Prime, Pole::Real(w)) if w >= 1 => {
            let z = c(4.0 * w as f64, 0.0);
            let sign = if w % 2 == 0 { 1.0 } else { -1.0 };
            Ok(CaseSetup {
                z,
                r: trunc.d,
                rho: 3.0,
                rho_p: 3.0,
                a: Box::new(move |s| Ok(block(BlockName::Xi, s + 0.5, ctx)?.value() * 2.0)),
                b: Box::new(|s| Ok(s.scale(Dd::FRAC_PI_4).sin())),
                b_prime: ComplexValue::new(Complex::real(Dd::FRAC_PI_4 * sign), 2.0 * EPS),
            })
        }
        (DecompositionCase::DoublePrime, Pole::Imag(k)) if k >= 1 => {
            let rec = cache.get(k as usize)?;
            let dp = rec.delta_prime.to_f64();
            Ok(CaseSetup {
                z: Complex::imag(rec.gamma),
                r: trunc.alpha * dp,
                rho: dp,
                rho_p: dp,
                a: Box::new(move |s| Ok(block(BlockName::B, s, ctx)?.value())),
                b: Box::new(move |s| Ok(zeta_raw(s + 0.5, ctx)?.0)),
                b_prime: rec.zeta_prime,
            })
        }
        _ => Err(Error::Case(format!("{case:?} does not apply at {pole:?}"))),
    }
}

/// Evaluates `Delta(s, z) = f(s) - T(s)` directly and through the split
/// into the `B` and `A` parts, and checks the Cauchy bound on it.
pub fn decomposition_check(
    s: Complex,
    pole: Pole,
    case: DecompositionCase,
    trunc: &ExpansionTruncation,
    cache: &ZeroCache,
    ctx: &PrecisionContext,
) -> Result<DecompositionCheck> {
    let setup = case_setup(pole, case, trunc, cache, ctx)?;
    let z = setup.z;
    let u = s - z;
    let dist = u.norm();
    if dist > setup.r {
        return Err(Error::Case(format!("|s - z| = {dist} exceeds r = {}", setup.r)));
    }
    let region = RegionTag {
        region: match pole {
            Pole::Real(w) => Region::RealDisk(w),
            Pole::Imag(k) => Region::ImagDisk(k),
        },
        s_member: s.re.abs() >= 0.5,
    };
    let lhs = local_term(&ComplexValue::exact(s), &region, cache, ctx)?.f_minus_t;

    let bp = setup.b_prime.value();
    let a_fn = &setup.a;
    let b_fn = &setup.b;
    // the B part, removable at z
    let b_part = |x: Complex| -> Result<Complex> { Ok(b_fn(x)?.recip() - (bp * (x - z)).recip()) };
    let a_z = a_fn(z)?;
    let f1 = |x: Complex| -> Result<Complex> { Ok((a_fn(x)?.recip() - a_z.recip()) / (x - z)) };
    let near = dist <= POLE_GUARD;
    let circle = setup.rho / 2.0;
    let (bv, f1v) = if near {
        (cauchy_value(&b_part, z, s, circle, 64)?, cauchy_value(&f1, z, s, circle, 64)?)
    } else {
        // cancellation in each difference costs about |value|/|difference| ulps
        let bs = b_fn(s)?.recip();
        let tb = (bp * u).recip();
        let bv = bs - tb;
        let ias = a_fn(s)?.recip();
        let fv = (ias - a_z.recip()) / u;
        let be = 16.0 * EPS * (bs.norm() + tb.norm()) + setup.b_prime.err / setup.b_prime.abs() * tb.norm();
        let fe = 16.0 * EPS * (ias.norm() + a_z.norm().recip()) / dist + 16.0 * EPS * fv.norm();
        (ComplexValue::new(bv, be), ComplexValue::new(fv, fe))
    };
    let a_s = ComplexValue::new(a_fn(s)?, 0.0);
    let a_s = a_s.with_err(16.0 * EPS * a_s.abs());
    let rhs = bv / a_s + f1v / setup.b_prime;
    let residual = (lhs.value() - rhs.value()).norm();
    let err = lhs.err + rhs.err;

    let mut warnings = Vec::new();
    let m_b = circle_max(&|x| b_fn(x), z, setup.rho, &mut warnings);
    let inv_a = |x: Complex| -> Result<Complex> { Ok(a_fn(x)?.recip()) };
    let m_ia = circle_max(&inv_a, z, setup.rho_p, &mut warnings);
    let ab_over = if near {
        // B(s)/(s - z) tends to B'(z)
        (a_s.value() * cauchy_value(|x| Ok(b_fn(x)? / (x - z)), z, s, circle, 64)?.value()).norm()
    } else {
        (a_s.value() * b_fn(s)? / u).norm()
    };
    let bound = (m_b / (setup.rho * (setup.rho - setup.r) * ab_over) + m_ia / (setup.rho_p - setup.r)) / setup.b_prime.abs();
    let bound_holds = lhs.abs() <= bound * (1.0 + SAMPLING_SLACK);
    Ok(DecompositionCheck { lhs, rhs, residual, err, bound, bound_holds, warnings })
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
        C.get_or_init(|| {
            let (mut c, _) = locate_zeros(ZeroTarget::Count(60), &ctx()).unwrap();
            crate::coefficients::fill_coefficients(&mut c, &ctx()).unwrap();
            c
        })
    }

    fn trunc(w: usize, n: usize, d: f64) -> ExpansionTruncation {
        ExpansionTruncation::new(w, n, d, DEFAULT_ALPHA, cache(), &ctx()).unwrap()
    }

    #[test]
    fn classify_examples() {
        let t = trunc(10, 20, 2.0);
        let tag = classify(&ComplexValue::from_f64(4.1, 0.0), &t, cache());
        assert_eq!(tag.region, Region::RealDisk(1));
        let t1 = trunc(10, 20, 1.0);
        let tag = classify(&ComplexValue::from_f64(2.0, 2.0), &t1, cache());
        assert_eq!(tag, RegionTag { region: Region::Exterior, s_member: true });
        let g1 = cache().records[0].gamma;
        let s = ComplexValue::exact(Complex::new(Dd::ZERO, g1 + 0.01));
        assert_eq!(classify(&s, &t, cache()).region, Region::ImagDisk(1));
        assert_eq!(classify(&s.conj(), &t, cache()).region, Region::ImagDisk(-1));
    }

    #[test]
    fn truncation_validation() {
        let e = ExpansionTruncation::new(10, 20, 2.5, 0.25, cache(), &ctx());
        assert!(matches!(e, Err(Error::Config(_))));
        let e = ExpansionTruncation::new(10, 20, 2.0, 0.5, cache(), &ctx());
        assert!(matches!(e, Err(Error::Config(_))));
        let t = trunc(10, 20, 2.0);
        assert!(t.tail_real > 0.0 && t.tail_real < 1e-10 && t.tail_imag.is_finite());
    }

    #[test]
    fn p_r_symmetries_and_tail() {
        let ctx = ctx();
        let a = p_r_eval(&ComplexValue::from_f64(2.0, 0.0), 10, &ctx).unwrap();
        let b = p_r_eval(&ComplexValue::from_f64(-2.0, 0.0), 10, &ctx).unwrap();
        assert!((a.value.value() + b.value.value()).norm() <= a.value.err + b.value.err);
        let i = p_r_eval(&ComplexValue::from_f64(0.0, 2.0), 10, &ctx).unwrap();
        assert!(i.value.re.abs().to_f64() <= i.value.err);
        let big = p_r_eval(&ComplexValue::from_f64(2.0, 0.0), 20, &ctx).unwrap();
        let diff = (a.value.value() - big.value.value()).norm();
        assert!(diff <= a.tail + a.value.err + big.value.err, "{diff:e} vs {:e}", a.tail);
        assert!(matches!(p_r_eval(&ComplexValue::from_f64(8.0, 0.0), 10, &ctx), Err(Error::Pole(_))));
    }

    #[test]
    fn p_i_symmetries_and_tail() {
        let ctx = ctx();
        let z = p_i_eval(&ComplexValue::from_f64(0.0, 0.0), 20, cache(), &ctx).unwrap();
        assert_eq!(z.value.value(), Complex::ZERO);
        let s = ComplexValue::from_f64(1.5, 3.0);
        let a = p_i_eval(&s, 20, cache(), &ctx).unwrap();
        let b = p_i_eval(&s.conj(), 20, cache(), &ctx).unwrap();
        assert!((a.value.value().conj() - b.value.value()).norm() <= a.value.err + b.value.err);
        let two = ComplexValue::from_f64(2.0, 0.0);
        let small = p_i_eval(&two, 25, cache(), &ctx).unwrap();
        let big = p_i_eval(&two, 50, cache(), &ctx).unwrap();
        let diff = (small.value.value() - big.value.value()).norm();
        assert!(diff <= small.tail, "{diff:e} vs {:e}", small.tail);
    }

    #[test]
    fn delta_is_small_and_odd() {
        let ctx = ctx();
        let t = trunc(30, 60, 2.0);
        let e = Expansion::new(cache(), t, &ctx).unwrap();
        let d = e.delta(&ComplexValue::from_f64(2.0, 0.0)).unwrap();
        assert!(d.delta.abs() <= 1e-3 && d.delta.abs() <= d.budget + d.delta.err, "{} vs {:e}", d.delta, d.budget);
        let s = ComplexValue::from_f64(1.3, 2.7);
        let a = e.delta(&s).unwrap();
        let b = e.delta(&-s).unwrap();
        assert!((a.delta.value() + b.delta.value()).norm() <= a.delta.err + b.delta.err);
        assert!(matches!(e.delta(&ComplexValue::from_f64(4.0 + 1e-4, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn local_term_near_pole() {
        let ctx = ctx();
        let tag = RegionTag { region: Region::RealDisk(1), s_member: true };
        let near = local_term(&ComplexValue::from_f64(4.0 + 1e-6, 0.0), &tag, cache(), &ctx).unwrap();
        let mid = local_term(&ComplexValue::from_f64(4.0 + 2e-3, 0.0), &tag, cache(), &ctx).unwrap();
        assert!((near.f_minus_t.value() - mid.f_minus_t.value()).norm() < 1e-2 * mid.f_minus_t.abs().max(1e-3));
        assert!((near.f_minus_t.abs() * 1e-6) < 1e-5);
        let ext = RegionTag { region: Region::Exterior, s_member: true };
        assert!(matches!(local_term(&ComplexValue::from_f64(2.0, 2.0), &ext, cache(), &ctx), Err(Error::Domain(_))));
    }

    #[test]
    fn a_prime_examples() {
        let one = [PoleDisk { center: Complex::ZERO, radius: 1.0, modulus: 1.0 }];
        assert_eq!(tail_bound_a_prime(&one, 0.1).unwrap().a_prime, 1.0);
        let poles: Vec<PoleDisk> = (1..=20)
            .map(|k| PoleDisk { center: c(0.0, 5.0 * k as f64), radius: 1.0, modulus: 1.0 / (k * k) as f64 })
            .collect();
        let b = tail_bound_a_prime(&poles, 0.01).unwrap();
        let doubled: Vec<PoleDisk> = poles.iter().map(|p| PoleDisk { radius: 2.0 * p.radius, ..*p }).collect();
        let b2 = tail_bound_a_prime(&doubled, 0.01).unwrap();
        assert!((b2.a_prime - b.a_prime / 2.0).abs() < 1e-14);
        for j in 0..100 {
            let th = std::f64::consts::TAU * j as f64 / 100.0;
            let s = c((b.r_eps + 1.0) * th.cos(), (b.r_eps + 1.0) * th.sin());
            assert!(g_prime(s, &poles) < 0.01);
        }
        let overlap = [one[0], PoleDisk { center: c(1.5, 0.0), radius: 1.0, modulus: 1.0 }];
        assert!(matches!(tail_bound_a_prime(&overlap, 0.1), Err(Error::Disjointness(_))));
        let touching = [one[0], PoleDisk { center: c(2.0, 0.0), radius: 1.0, modulus: 1.0 }];
        assert!(tail_bound_a_prime(&touching, 0.1).is_ok());
    }

    #[test]
    fn taylor_bound_cases() {
        let ctx = ctx();
        let e = taylor_remainder_check(|z: Complex| Ok(z.exp()), Complex::ZERO, 2.0, 1.0, 1, &ctx).unwrap();
        assert!(e.holds && e.lhs_max > 0.0, "{e:?}");
        let e3 = taylor_remainder_check(|z: Complex| Ok(z.exp()), Complex::ZERO, 2.0, 1.0, 3, &ctx).unwrap();
        assert!(e3.holds, "{e3:?}");
        let p = taylor_remainder_check(|z: Complex| Ok(z * z * 3.0 + z - 2.0), c(1.0, 1.0), 2.0, 1.0, 3, &ctx).unwrap();
        assert!(p.lhs_max < 1e-25 && p.holds, "{p:?}");
        let inv = |s: Complex| Ok(block(BlockName::Xi, s + 0.5, &ctx)?.value().scale(Dd::from(2.0)).recip());
        let x = taylor_remainder_check(inv, c(8.0, 0.0), 3.0, 2.0, 1, &ctx).unwrap();
        assert!(x.holds && x.warnings.is_empty(), "{x:?}");
    }

    #[test]
    fn decomposition_prime_and_double_prime() {
        let ctx = ctx();
        let t = trunc(10, 20, 2.0);
        let d = decomposition_check(c(8.5, 0.0), Pole::Real(2), DecompositionCase::Prime, &t, cache(), &ctx).unwrap();
        assert!(d.residual <= 1e-20 && d.residual <= d.err, "{d:?}");
        assert!(d.bound_holds);
        let r = &cache().records[0];
        let s = Complex::imag(r.gamma) + (r.delta_prime * 0.1).to_f64();
        let d2 = decomposition_check(s, Pole::Imag(1), DecompositionCase::DoublePrime, &t, cache(), &ctx).unwrap();
        assert!(d2.residual <= d2.err.max(1e-25) && d2.bound_holds, "{d2:?}");
        let close = decomposition_check(c(8.0 + 1e-8, 0.0), Pole::Real(2), DecompositionCase::Prime, &t, cache(), &ctx).unwrap();
        assert!(close.lhs.abs().is_finite() && close.residual <= close.err, "{close:?}");
        let wrong = decomposition_check(c(8.5, 0.0), Pole::Imag(1), DecompositionCase::Prime, &t, cache(), &ctx);
        assert!(matches!(wrong, Err(Error::Case(_))));
    }
}
