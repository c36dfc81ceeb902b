mod common;

use common::{cache, ctx};
use proptest::prelude::*;
use zetapfrac::coefficients::{c_at, Pole};
use zetapfrac::complex::c;
use zetapfrac::laplace::{transform_residual, Density, DensityConfig};
use zetapfrac::Error;

fn density(n: usize) -> Density {
    Density::new(DensityConfig::new(n), cache(), &ctx()).unwrap()
}

#[test]
fn positive_branch_is_the_real_pole_series() {
    let ctx = ctx();
    let d = density(100);
    let y = 0.3;
    let direct: f64 = (1..40).map(|k| -c_at(Pole::Real(k), cache(), &ctx).unwrap().value.to_f64() * (-4.0 * k as f64 * y).exp()).sum();
    let g = d.g0(y).unwrap();
    assert!((g.value - direct).abs() < 1e-14, "{} vs {direct}", g.value);
}

#[test]
fn density_is_undefined_at_zero() {
    assert!(matches!(density(100).g0(0.0), Err(Error::Domain(_))));
}

#[test]
fn transform_residual_shrinks_with_more_zeros() {
    let ctx = ctx();
    let s = c(2.0, 0.0);
    let a = transform_residual(s, &DensityConfig::new(50), cache(), &ctx).unwrap();
    let b = transform_residual(s, &DensityConfig::new(100), cache(), &ctx).unwrap();
    assert!(b.residual < a.residual / 2.0, "{} -> {}", a.residual, b.residual);
    assert!(b.budget < b.residual);
}

#[test]
fn short_window_is_refused() {
    let mut cfg = DensityConfig::new(100);
    cfg.y_max = 10.0;
    let r = transform_residual(c(2.0, 0.0), &cfg, cache(), &ctx());
    assert!(matches!(r, Err(Error::Window(_))));
}

#[test]
fn strip_is_enforced() {
    let d = density(100);
    assert!(matches!(d.transform(c(4.5, 0.0), &ctx()), Err(Error::Domain(_))));
    assert!(matches!(d.transform(c(-0.5, 0.0), &ctx()), Err(Error::Domain(_))));
}

#[test]
fn config_validation() {
    let mut cfg = DensityConfig::new(101);
    assert!(cfg.validate(cache()).is_err());
    cfg.n = 100;
    cfg.y_min = 1.0;
    assert!(cfg.validate(cache()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambda_is_even(y in 0.0f64..40.0) {
        let d = density(100);
        let a = d.lambda(y);
        let b = d.lambda(-y);
        prop_assert!((a.value - b.value).abs() <= a.err + b.err);
    }
}
