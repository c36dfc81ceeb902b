//! Ordinates of the nontrivial zeros on the critical line, their gaps and
//! the derivative of zeta at each of them.

mod cache;

pub use cache::{cache_io, load_cache, save_cache, Direction, SCHEMA_VERSION};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex, ComplexValue};
use crate::context::PrecisionContext;
use crate::dd::Dd;
use crate::error::{Error, Result, Warning};
use crate::kernel::derivative::cauchy_derivative;
use crate::kernel::zeta::zeta_raw;
use crate::xi::big_xi_scaled;

/// Scan step for sign changes of `Xi`.
pub const GRID_STEP: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroRecord {
    pub k: usize,
    pub gamma: Dd,
    pub delta: Dd,
    pub delta_prime: Dd,
    pub zeta_prime: ComplexValue,
    pub c_imag: Option<Dd>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCache {
    pub records: Vec<ZeroRecord>,
    pub digits: u32,
    pub t_max: f64,
    /// First ordinate above `t_max`, kept so the last record has both gaps.
    pub next_gamma: Option<Dd>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ZeroTarget {
    Count(usize),
    Height(f64),
}

impl ZeroCache {
    /// A cache without records, enough for real-axis residues.
    pub fn empty() -> ZeroCache {
        ZeroCache { records: vec![], digits: crate::context::DEFAULT_DIGITS, t_max: 0.0, next_gamma: None }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record with 1-based index `k`.
    pub fn get(&self, k: usize) -> Result<&ZeroRecord> {
        if k == 0 || k > self.records.len() {
            return Err(Error::Index { index: k, available: self.records.len() });
        }
        Ok(&self.records[k - 1])
    }

    pub fn gamma(&self, k: usize) -> Result<Dd> {
        Ok(self.get(k)?.gamma)
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.gamma.to_f64()).collect()
    }

    /// Keeps only the first `n` records.
    pub fn truncated(&self, n: usize) -> ZeroCache {
        let n = n.min(self.records.len());
        let next = if n < self.records.len() { Some(self.records[n].gamma) } else { self.next_gamma };
        let t_max = match next {
            Some(g) if n > 0 => (self.records[n - 1].gamma.to_f64() + g.to_f64()) / 2.0,
            _ => self.t_max,
        };
        ZeroCache { records: self.records[..n].to_vec(), digits: self.digits, t_max, next_gamma: next }
    }

    /// True when every record carries a coefficient.
    pub fn has_coefficients(&self) -> bool {
        self.records.iter().all(|r| r.c_imag.is_some())
    }
}

/// Smooth part of the zero-counting function, `(T/2pi) log(T/2pi e) + 7/8`.
pub fn smooth_count(t: f64) -> f64 {
    let x = t / std::f64::consts::TAU;
    x * (x / std::f64::consts::E).ln() + 0.875
}

/// Height by which roughly `n` zeros have appeared.
fn height_for_count(n: usize) -> f64 {
    let mut t = 20.0;
    while smooth_count(t) < n as f64 + 1.5 {
        t += 1.0;
    }
    t + 5.0
}

fn xi_sign_value(t: f64, ctx: &PrecisionContext) -> Result<Dd> {
    Ok(big_xi_scaled(Dd::from(t), ctx)?.value)
}

/// Brackets `[a, b]` of every sign change of `Xi` on the grid
/// `t0, t0 + step, ...` up to `t1`.
pub fn scan_sign_changes(t0: f64, t1: f64, step: f64, ctx: &PrecisionContext) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0) || !(t1 > t0) {
        return Err(Error::Domain(format!("bad scan window [{t0}, {t1}] step {step}")));
    }
    let n = ((t1 - t0) / step).ceil() as usize;
    let vals: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|j| xi_sign_value(t0 + j as f64 * step, ctx).map(|v| v.signum()))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for j in 0..n {
        if vals[j] != 0.0 && vals[j + 1] != 0.0 && vals[j] != vals[j + 1] {
            out.push((t0 + j as f64 * step, t0 + (j + 1) as f64 * step));
        } else if vals[j + 1] == 0.0 {
            let x = t0 + (j + 1) as f64 * step;
            out.push((x, x));
        }
    }
    Ok(out)
}

/// Refines a sign-change bracket of `Xi` until its width is at most
/// `10^{5 - digits}` or the function value drops below its own error.
pub fn refine_zero(a: f64, b: f64, ctx: &PrecisionContext) -> Result<Dd> {
    let (mut lo, mut hi) = (Dd::from(a), Dd::from(b));
    if lo == hi {
        return Ok(lo);
    }
    let f = |t: Dd| big_xi_scaled(t, ctx);
    let mut flo = f(lo)?.value;
    let mut fhi = f(hi)?.value;
    if flo.signum() == fhi.signum() {
        return Err(Error::Domain(format!("no sign change on [{a}, {b}]")));
    }
    let width_tol = 10f64.powi(5 - ctx.digits as i32);
    let mut side = 0i32;
    for it in 0..400 {
        if (hi - lo).to_f64() <= width_tol {
            break;
        }
        // Illinois step, with a plain bisection every few iterations as a safeguard
        let mid = if it % 4 == 3 {
            (lo + hi).mul_pwr2(0.5)
        } else {
            let m = (lo * fhi - hi * flo) / (fhi - flo);
            if m > lo && m < hi {
                m
            } else {
                (lo + hi).mul_pwr2(0.5)
            }
        };
        let fm = f(mid)?;
        if fm.value.abs().to_f64() <= fm.err {
            return Ok(mid);
        }
        if fm.value.signum() == flo.signum() {
            lo = mid;
            flo = fm.value;
            if side == -1 {
                fhi = fhi.mul_pwr2(0.5);
            }
            side = -1;
        } else {
            hi = mid;
            fhi = fm.value;
            if side == 1 {
                flo = flo.mul_pwr2(0.5);
            }
            side = 1;
        }
    }
    Ok((lo + hi).mul_pwr2(0.5))
}

/// `(delta, delta')` for ordinate `k` given its neighbours; `prev` is 0 for `k = 1`.
pub fn gaps(prev: Dd, gamma: Dd, next: Dd) -> (Dd, Dd) {
    let delta = (gamma - prev).min(next - gamma);
    let cap = gamma.ln().recip();
    (delta, cap.min(delta))
}

/// Gap statistics of record `k` (1-based), with `gamma_0 = 0`.
pub fn gap_stats(cache: &ZeroCache, k: usize) -> Result<(Dd, Dd)> {
    let n = cache.records.len();
    let next = if k < n {
        Some(cache.records[k].gamma)
    } else if k == n {
        cache.next_gamma
    } else {
        None
    };
    let (Some(next), true) = (next, k >= 1) else {
        return Err(Error::Index { index: k, available: if cache.next_gamma.is_some() { n } else { n.saturating_sub(1) } });
    };
    let prev = if k == 1 { Dd::ZERO } else { cache.records[k - 2].gamma };
    Ok(gaps(prev, cache.records[k - 1].gamma, next))
}

/// Radius of the Cauchy circle used for `zeta'` at a zero.
pub fn derivative_radius(delta_prime: Dd) -> f64 {
    (delta_prime.to_f64() / 2.0).min(0.1)
}

fn zeta_fn(ctx: &PrecisionContext) -> impl Fn(Complex) -> Result<Complex> + Sync + '_ {
    move |z| Ok(zeta_raw(z, ctx)?.0)
}

/// `zeta'(1/2 + i gamma)` by Cauchy quadrature, with the simple-zero check.
pub fn zeta_prime_at(k: usize, gamma: Dd, delta_prime: Dd, ctx: &PrecisionContext) -> Result<ComplexValue> {
    let z = Complex::new(Dd::HALF, gamma);
    let d = cauchy_derivative(zeta_fn(ctx), z, derivative_radius(delta_prime), ctx)?;
    if d.abs() <= ctx.half_tol() {
        return Err(Error::SimpleZeroViolation { k, modulus: d.abs() });
    }
    Ok(d)
}

/// `zeta'(1/2 + i gamma_k)` for a zero already in the table.
pub fn zeta_prime_at_zero(cache: &ZeroCache, k: usize, ctx: &PrecisionContext) -> Result<ComplexValue> {
    let r = cache.get(k)?;
    zeta_prime_at(k, r.gamma, r.delta_prime, ctx)
}

/// Locates zeros by a sign-change scan of `Xi` followed by bracket refinement.
pub fn locate_zeros(target: ZeroTarget, ctx: &PrecisionContext) -> Result<(ZeroCache, Vec<Warning>)> {
    ctx.validate()?;
    let (want, mut t_hi) = match target {
        ZeroTarget::Count(n) => {
            if n == 0 || n > 2000 {
                return Err(Error::Config(format!("zero count must lie in 1..=2000, got {n}")));
            }
            (Some(n), height_for_count(n))
        }
        ZeroTarget::Height(t) => {
            if !(t > 0.0) || t > 2000.0 {
                return Err(Error::Config(format!("height must lie in (0, 2000], got {t}")));
            }
            (None, t + 5.0)
        }
    };
    let mut brackets = scan_sign_changes(0.0, t_hi, GRID_STEP, ctx)?;
    // make sure one ordinate past the requested range is available
    loop {
        let enough = match (want, target) {
            (Some(n), _) => brackets.len() > n,
            (None, ZeroTarget::Height(t)) => brackets.iter().any(|b| b.0 > t),
            _ => unreachable!(),
        };
        if enough {
            break;
        }
        let more = scan_sign_changes(t_hi, t_hi + 10.0, GRID_STEP, ctx)?;
        brackets.extend(more.into_iter().filter(|b| b.0 >= t_hi));
        t_hi += 10.0;
    }
    let roots: Vec<Dd> = brackets.par_iter().map(|&(a, b)| refine_zero(a, b, ctx)).collect::<Result<_>>()?;
    let count = match (want, target) {
        (Some(n), _) => n,
        (None, ZeroTarget::Height(t)) => roots.iter().filter(|g| g.to_f64() <= t).count(),
        _ => unreachable!(),
    };
    let next_gamma = roots.get(count).copied();
    let t_max = match target {
        ZeroTarget::Height(t) => t,
        ZeroTarget::Count(_) => match next_gamma {
            Some(g) => (roots[count - 1].to_f64() + g.to_f64()) / 2.0,
            None => t_hi,
        },
    };
    for w in roots.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Assertion(format!("ordinates not strictly increasing near {}", w[0].to_f64())));
        }
    }
    let records: Vec<ZeroRecord> = (0..count)
        .into_par_iter()
        .map(|i| {
            let prev = if i == 0 { Dd::ZERO } else { roots[i - 1] };
            let (delta, delta_prime) = gaps(prev, roots[i], roots[i + 1]);
            let zeta_prime = zeta_prime_at(i + 1, roots[i], delta_prime, ctx)?;
            Ok(ZeroRecord { k: i + 1, gamma: roots[i], delta, delta_prime, zeta_prime, c_imag: None })
        })
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    let expected = smooth_count(t_max);
    if (records.len() as f64 - expected).abs() > 2.0 {
        warnings.push(Warning::MissedZero { t_max, found: records.len(), expected });
    }
    Ok((ZeroCache { records, digits: ctx.digits, t_max, next_gamma }, warnings))
}
