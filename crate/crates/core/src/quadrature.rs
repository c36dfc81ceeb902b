//! Gauss-Legendre rules in double-double and a composite driver.

use crate::dd::Dd;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Vec<(Dd, Dd)> {
    assert!(n >= 1, "rule needs at least one node");
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let guess = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = Dd::from(guess);
        let mut dp = Dd::ONE;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x = x - step;
            if step.abs() < 1e-33 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = Dd::from(2.0) / ((Dd::ONE - x.sqr()) * dp.sqr());
        out.push((x, w));
    }
    out
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: Dd) -> (Dd, Dd) {
    let mut p0 = Dd::ONE;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = (x * p1 * (2.0 * kf - 1.0) - p0 * (kf - 1.0)) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (Dd::ONE, Dd::ZERO);
    }
    let d = (p0 - x * p1) * (n as f64) / (Dd::ONE - x.sqr());
    (p1, d)
}

/// Nodes and weights of the composite rule on `[a, b]` with panels of at
/// most `width`.
pub fn composite_nodes(a: Dd, b: Dd, width: f64, rule: &[(Dd, Dd)]) -> Vec<(Dd, Dd)> {
    let len = (b - a).to_f64();
    let panels = (len / width).ceil().max(1.0) as usize;
    let h = (b - a) / Dd::from(panels as f64);
    let half = h.mul_pwr2(0.5);
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let mid = a + h * Dd::from(p as f64) + half;
        for &(x, w) in rule {
            out.push((mid + half * x, half * w));
        }
    }
    out
}
