//! Derivatives of analytic functions by trapezoidal quadrature of the
//! Cauchy integral on a circle.

use rayon::prelude::*;

use crate::complex::{Complex, ComplexValue};
use crate::context::PrecisionContext;
use crate::dd::{Dd, EPS};
use crate::error::{Error, Result};

const MAX_POINTS: usize = 4096;

fn initial_points(ctx: &PrecisionContext) -> usize {
    if ctx.digits > 20 {
        32
    } else {
        16
    }
}

/// `e^{2 pi i j / m}`
fn root(j: usize, m: usize) -> Complex {
    let theta = Dd::TWO_PI * Dd::from(j as f64) / Dd::from(m as f64);
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

fn sample<F>(f: &F, z: Complex, r: Dd, m: usize, js: &[usize]) -> Result<Vec<(usize, Complex)>>
where
    F: Fn(Complex) -> Result<Complex> + Sync,
{
    js.par_iter()
        .map(|&j| {
            let w = root(j, m);
            f(z + w * r).map(|v| (j, v))
        })
        .collect()
}

/// Taylor coefficients `a_0 .. a_{count-1}` of `f` about `z` from `m`
/// samples on the circle of radius `r`, plus the largest sample modulus.
pub fn taylor_coefficients<F>(f: &F, z: Complex, r: f64, count: usize, m: usize) -> Result<(Vec<Complex>, f64)>
where
    F: Fn(Complex) -> Result<Complex> + Sync,
{
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let rd = Dd::from(r);
    let js: Vec<usize> = (0..m).collect();
    let vals = sample(f, z, rd, m, &js)?;
    let fmax = vals.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(count);
    let mut rpow = Dd::ONE;
    for k in 0..count {
        let mut acc = Complex::ZERO;
        for &(j, v) in &vals {
            acc += v * root((m - (j * k) % m) % m, m);
        }
        out.push(acc / (Dd::from(m as f64) * rpow));
        rpow = rpow * rd;
    }
    Ok((out, fmax))
}

/// `f'(z)` with an error estimate from successive point doublings.
pub fn cauchy_derivative<F>(f: F, z: Complex, radius: f64, ctx: &PrecisionContext) -> Result<ComplexValue>
where
    F: Fn(Complex) -> Result<Complex> + Sync,
{
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    let r = Dd::from(radius);
    let mut m = initial_points(ctx);
    let first: Vec<usize> = (0..m).collect();
    // weighted sum of f(z + r w_j) / w_j over all current points
    let mut acc = Complex::ZERO;
    let mut fmax: f64 = 0.0;
    for (j, v) in sample(&f, z, r, m, &first)? {
        fmax = fmax.max(v.norm());
        acc += v * root(j, m).conj();
    }
    let mut d = acc / (r * Dd::from(m as f64));
    let mut prev_diff = f64::INFINITY;
    let tol = ctx.tol();
    loop {
        let m2 = 2 * m;
        if m2 > MAX_POINTS {
            return Err(Error::Convergence(format!("Cauchy quadrature at {z} with radius {radius}")));
        }
        let odd: Vec<usize> = (0..m).map(|j| 2 * j + 1).collect();
        for (j, v) in sample(&f, z, r, m2, &odd)? {
            fmax = fmax.max(v.norm());
            acc += v * root(j, m2).conj();
        }
        m = m2;
        let next = acc / (r * Dd::from(m as f64));
        let diff = (next - d).norm();
        d = next;
        let mag = d.norm();
        let floor = 64.0 * EPS * fmax / radius;
        if diff <= tol * mag || diff <= floor {
            return Ok(ComplexValue::new(d, diff + floor));
        }
        // once the change stalls it is sampling noise from f itself
        if diff > 0.25 * prev_diff && diff <= tol.sqrt() * mag {
            return Ok(ComplexValue::new(d, diff + floor));
        }
        prev_diff = diff;
    }
}

/// Derivative of `fn` at the centre of a `ComplexValue`.
pub fn complex_derivative<F>(f: F, z: &ComplexValue, radius: f64, ctx: &PrecisionContext) -> Result<ComplexValue>
where
    F: Fn(Complex) -> Result<Complex> + Sync,
{
    cauchy_derivative(f, z.value(), radius, ctx)
}

/// Symmetric difference quotient `(f(z+h) - f(z-h)) / 2h` along the real direction.
pub fn central_difference<F>(f: F, z: Complex, h: f64) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let hd = Dd::from(h);
    let a = f(z + hd)?;
    let b = f(z - hd)?;
    Ok((a - b) / hd.mul_pwr2(2.0))
}

/// Richardson-extrapolated central difference from steps `h` and `h/2`.
pub fn richardson_difference<F>(f: F, z: Complex, h: f64) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let d1 = central_difference(&f, z, h)?;
    let d2 = central_difference(&f, z, h / 2.0)?;
    Ok((d2 * 4.0 - d1) / 3.0)
}
