#![allow(dead_code)]

use std::sync::OnceLock;

use zetapfrac::coefficients::fill_coefficients;
use zetapfrac::zeros::{locate_zeros, ZeroCache, ZeroTarget};
use zetapfrac::{Complex, ComplexValue, Dd, PrecisionContext};

pub fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

/// First 100 zeros with coefficients, built once per test binary.
pub fn cache() -> &'static ZeroCache {
    static C: OnceLock<ZeroCache> = OnceLock::new();
    C.get_or_init(|| {
        let (mut z, _) = locate_zeros(ZeroTarget::Count(100), &ctx()).expect("zeros");
        fill_coefficients(&mut z, &ctx()).expect("coefficients");
        z
    })
}

pub fn dd(s: &str) -> Dd {
    s.parse().unwrap()
}

pub fn cz(re: &str, im: &str) -> Complex {
    Complex::new(dd(re), dd(im))
}

/// Relative distance of `got` from `want`.
pub fn rel(got: Complex, want: Complex) -> f64 {
    (got - want).norm() / want.norm()
}

pub fn exact(re: f64, im: f64) -> ComplexValue {
    ComplexValue::from_f64(re, im)
}
