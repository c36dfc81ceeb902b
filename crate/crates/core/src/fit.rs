//! Least-squares line fits used for decay exponents and envelopes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub n: usize,
}

impl LineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 paired points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = rss / (nf - 2.0);
    let slope_se = (s2 / sxx).sqrt();
    let intercept_se = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    Ok(LineFit { slope, intercept, slope_se, intercept_se, n })
}

/// OLS slope with the intercept lowered until no point lies below the line.
pub fn lower_envelope(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let mut fit = ols(x, y)?;
    let shift = x.iter().zip(y).map(|(a, b)| b - fit.eval(*a)).fold(f64::INFINITY, f64::min);
    fit.intercept += shift.min(0.0);
    Ok(fit)
}

/// Power law `v ~ K g^{-p}` fitted in log-log coordinates on the upper half
/// of the index range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub k: f64,
    pub p: f64,
    pub p_se: f64,
}

pub fn power_fit_upper_half(g: &[f64], v: &[f64]) -> Result<PowerFit> {
    let start = g.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = g[start..]
        .iter()
        .zip(&v[start..])
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    let f = ols(&xs, &ys)?;
    Ok(PowerFit { k: f.intercept.exp(), p: -f.slope, p_se: f.slope_se })
}

/// `sum_{gamma_k > g0} K gamma_k^{-p}` with the zero density `log(g/2pi)/2pi`
/// replaced by its integral; infinite when `p <= 1`.
pub fn power_tail(fit: &PowerFit, g0: f64) -> f64 {
    let p = fit.p;
    if !(p > 1.0) {
        return f64::INFINITY;
    }
    let q = p - 1.0;
    let lg = (g0 / std::f64::consts::TAU).ln().max(0.0);
    fit.k / std::f64::consts::TAU * g0.powf(-q) / q * (lg + 1.0 / q)
}
