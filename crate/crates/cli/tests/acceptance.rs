//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Defaults: 30 digits, N = 100, W = 50, d = 2, alpha = 1/4.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zetapfrac::asymptotics::zeta_ratio_check;
use zetapfrac::audit::exponent_estimates;
use zetapfrac::coefficients::{c_at, c_imag_closed_form, c_tilde, c_zero, fill_coefficients, n_prime, Pole};
use zetapfrac::complex::c;
use zetapfrac::kernel::derivative::central_difference;
use zetapfrac::kernel::zeta::zeta_raw;
use zetapfrac::laplace::{Density, DensityConfig};
use zetapfrac::partial_fraction::{
    decomposition_check, g_prime, tail_bound_a_prime, taylor_remainder_check, DecompositionCase, Expansion, ExpansionTruncation, Region,
};
use zetapfrac::xi::{block, xi_symmetry_residual, BlockName};
use zetapfrac::zeros::{derivative_radius, locate_zeros, refine_zero, scan_sign_changes, ZeroCache, ZeroTarget, GRID_STEP};
use zetapfrac::{Complex, ComplexValue, Dd, PrecisionContext};
use zetapfrac_cli::monotone_report;

const SEED: u64 = 0x5eed_2a7e;
const N: usize = 100;
const W: usize = 50;
const D: f64 = 2.0;
const ALPHA: f64 = 0.25;

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

/// 500 zeros with coefficients; smaller truncations read a prefix.
fn cache() -> &'static ZeroCache {
    static C: OnceLock<ZeroCache> = OnceLock::new();
    C.get_or_init(|| {
        let (mut z, _) = locate_zeros(ZeroTarget::Count(500), &ctx()).expect("zeros");
        fill_coefficients(&mut z, &ctx()).expect("coefficients");
        z
    })
}

fn expansion(w: usize, n: usize) -> Expansion<'static> {
    let t = ExpansionTruncation::new(w, n, D, ALPHA, cache(), &ctx()).unwrap();
    Expansion::new(cache(), t, &ctx()).unwrap()
}

/// 100 points uniform in `|s| <= 50`.
fn disk_grid() -> Vec<Complex> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..100)
        .map(|_| {
            let r = 50.0 * rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            c(r * th.cos(), r * th.sin())
        })
        .collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn functional_equation() -> Outcome {
    let ctx = ctx();
    let t0 = Instant::now();
    let (mut worst_rel, mut worst_abs) = (0.0f64, 0.0f64);
    for s in disk_grid() {
        let (res, _) = xi_symmetry_residual(&ComplexValue::exact(s), &ctx).unwrap();
        let scale = block(BlockName::Xi, s + 0.5, &ctx).unwrap().abs().max(1.0);
        worst_rel = worst_rel.max(res / scale);
        worst_abs = worst_abs.max(res);
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        worst_rel <= 1e-20 && secs <= 60.0,
        format!("max residual/max(1,|xi|) = {worst_rel:.2e}, raw max {worst_abs:.2e}, {secs:.1} s"),
    )
}

fn symmetry_suite() -> Outcome {
    let ctx = ctx();
    let e = expansion(W, N);
    let mut worst = [0.0f64; 7];
    let names = ["n odd", "f odd", "p odd", "xi conj", "n conj", "f conj", "p conj"];
    let p = |s: Complex| e.p(&ComplexValue::exact(s)).unwrap().value.value();
    for s in disk_grid() {
        let mut odd = |i: usize, a: Complex, b: Complex| {
            worst[i] = worst[i].max((a + b).norm() / a.norm().max(1.0));
        };
        let nb = |x| block(BlockName::N, x, &ctx).unwrap().value();
        let fb = |x| block(BlockName::F, x, &ctx).unwrap().value();
        odd(0, nb(s), nb(-s));
        odd(1, fb(s), fb(-s));
        odd(2, p(s), p(-s));
        let mut conj = |i: usize, a: Complex, b: Complex| {
            worst[i] = worst[i].max((a.conj() - b).norm() / a.norm().max(1.0));
        };
        let xb = |x: Complex| block(BlockName::Xi, x + 0.5, &ctx).unwrap().value();
        conj(3, xb(s), xb(s.conj()));
        conj(4, nb(s), nb(s.conj()));
        conj(5, fb(s), fb(s.conj()));
        conj(6, p(s), p(s.conj()));
    }
    let detail: Vec<String> = names.iter().zip(&worst).map(|(n, w)| format!("{n} {w:.1e}")).collect();
    outcome(worst.iter().all(|w| *w <= 1e-20), format!("scaled residuals: {}", detail.join(", ")))
}

fn zero_table() -> Outcome {
    let ctx = ctx();
    let t0 = Instant::now();
    let recs = &cache().records[..N];
    let top = (recs[N - 1].gamma.to_f64() + cache().records[N].gamma.to_f64()) / 2.0;
    let brackets = scan_sign_changes(0.0, top, GRID_STEP / 2.0, &ctx).unwrap();
    let rescan: Vec<Dd> = brackets.iter().map(|&(a, b)| refine_zero(a, b, &ctx).unwrap()).collect();
    let count_ok = rescan.len() == N;
    let gap = rescan.iter().zip(recs).map(|(a, r)| (*a - r.gamma).abs().to_f64()).fold(0.0, f64::max);
    let min_zp = recs.iter().map(|r| r.zeta_prime.abs()).fold(f64::INFINITY, f64::min);
    let zeta = |s: Complex| Ok(zeta_raw(s, &ctx)?.0);
    let mut worst_rel: f64 = 0.0;
    for r in recs {
        let z = Complex::new(Dd::HALF, r.gamma);
        // derivative along the real direction equals zeta'(z) for analytic zeta
        let cd = central_difference(zeta, z, 1e-6).unwrap();
        worst_rel = worst_rel.max((cd - r.zeta_prime.value()).norm() / r.zeta_prime.abs());
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        count_ok && gap <= 1e-20 && min_zp > 1e-3 && worst_rel <= 1e-10 && secs <= 300.0,
        format!("rescan found {} zeros, max |gamma diff| {gap:.1e}; min |zeta'| {min_zp:.3e}; Cauchy vs central difference {worst_rel:.1e}; {secs:.1} s", rescan.len()),
    )
}

fn coefficient_consistency() -> Outcome {
    let ctx = ctx();
    let mut worst: f64 = 0.0;
    for w in 0..=3i64 {
        let z = c(4.0 * w as f64, 0.0);
        let np = n_prime(z, 1.0, &ctx).unwrap();
        let closed = c_at(Pole::Real(w), cache(), &ctx).unwrap().value;
        worst = worst.max(((np.value().recip() - Complex::real(closed)).norm() / closed.abs()).to_f64());
    }
    for k in 1..=10 {
        let r = cache().get(k).unwrap();
        let np = n_prime(Complex::imag(r.gamma), derivative_radius(r.delta_prime), &ctx).unwrap();
        let closed = c_imag_closed_form(cache(), k, &ctx).unwrap().value;
        worst = worst.max(((np.value().recip() - Complex::real(closed)).norm() / closed.abs()).to_f64());
    }
    let c0 = c_zero(&ctx).unwrap().value;
    let ct0 = c_tilde(0, &ctx).unwrap().value;
    let c0_rel = ((c0 - ct0) / c0).abs().to_f64();
    outcome(
        worst <= 1e-8 && c0_rel <= 1e-28,
        format!("max relative gap 1/n' vs closed forms {worst:.1e}; c(0) vs c~(0) {c0_rel:.1e}"),
    )
}

const CENTRAL: [(f64, f64); 4] = [(2.0, 0.0), (2.0, 2.0), (1.0, 10.0), (6.0, 3.0)];

fn central_expansion() -> Outcome {
    let small = expansion(W, N);
    let big = expansion(2 * W, 2 * N);
    let mut ok = true;
    let mut parts = Vec::new();
    for (re, im) in CENTRAL {
        let s = ComplexValue::from_f64(re, im);
        let a = small.delta(&s).unwrap();
        let b = big.delta(&s).unwrap();
        let ratio = a.delta.abs() / b.delta.abs();
        ok &= a.delta.abs() <= a.budget.max(1e-3) && ratio >= 2.0;
        parts.push(format!("{re}+{im}i: {:.2e} (budget {:.1e}) -> {:.2e}, x{ratio:.1}", a.delta.abs(), a.budget, b.delta.abs()));
    }
    outcome(ok, parts.join("; "))
}

fn tail_bound_law() -> Outcome {
    let e = expansion(W, N);
    let disks = e.pole_disks();
    let bound = tail_bound_a_prime(&disks, 1e-2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let inside = |s: Complex| disks.iter().any(|p| (s - p.center).norm() <= p.radius);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 200 {
        let r = 250.0 * rng.gen::<f64>().sqrt();
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        let s = c(r * th.cos(), r * th.sin());
        if inside(s) {
            continue;
        }
        worst = worst.max(g_prime(s, &disks));
        count += 1;
    }
    let mut far: f64 = 0.0;
    for scale in [1.0, 1.5, 2.0, 4.0] {
        for j in 0..100 {
            let th = std::f64::consts::TAU * (j as f64 + 0.5) / 100.0;
            let r = bound.r_eps * scale;
            let s = c(r * th.cos(), r * th.sin());
            if !inside(s) {
                far = far.max(g_prime(s, &disks));
            }
        }
    }
    outcome(
        worst <= bound.a_prime && far < 1e-2,
        format!("max G' {worst:.3e} <= A' {:.3e}; R(0.01) = {:.1}, max G' beyond it {far:.2e}", bound.a_prime, bound.r_eps),
    )
}

fn taylor_remainder() -> Outcome {
    let ctx = ctx();
    let exp = taylor_remainder_check(|z: Complex| Ok(z.exp()), Complex::ZERO, 2.0, 1.0, 1, &ctx).unwrap();
    let poly = taylor_remainder_check(|z: Complex| Ok(z * z * 3.0 + z - 2.0), c(1.0, 1.0), 2.0, 1.0, 3, &ctx).unwrap();
    let inv = |s: Complex| Ok((block(BlockName::Xi, s + 0.5, &ctx)?.value() * 2.0).recip());
    let prime = taylor_remainder_check(inv, c(8.0, 0.0), 3.0, D, 1, &ctx).unwrap();
    let all = [&exp, &poly, &prime];
    outcome(
        all.iter().all(|c| c.holds && c.warnings.is_empty()),
        all.iter()
            .zip(["exp", "quadratic", "1/(2 xi) at 8"])
            .map(|(c, n)| format!("{n}: {:.2e} <= {:.2e}", c.lhs_max, c.rhs_bound * 1.01))
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn decomposition_identity() -> Outcome {
    let ctx = ctx();
    let t = ExpansionTruncation::new(W, N, D, ALPHA, cache(), &ctx).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let (mut worst, mut bound_ok, mut count) = (0.0f64, true, 0);
    for i in 0..20 {
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        let u = rng.gen::<f64>().sqrt();
        let (s, pole, case) = if i % 2 == 0 {
            let w = rng.gen_range(1..=10i64);
            (c(4.0 * w as f64 + D * u * th.cos(), D * u * th.sin()), Pole::Real(w), DecompositionCase::Prime)
        } else {
            let k = rng.gen_range(1..=10usize);
            let r = cache().get(k).unwrap();
            let rad = (r.delta_prime * ALPHA).to_f64() * u;
            (Complex::imag(r.gamma) + c(rad * th.cos(), rad * th.sin()), Pole::Imag(k as i64), DecompositionCase::DoublePrime)
        };
        let d = decomposition_check(s, pole, case, &t, cache(), &ctx).unwrap();
        worst = worst.max(d.residual);
        bound_ok &= d.bound_holds;
        count += 1;
    }
    outcome(worst <= 1e-18 && bound_ok, format!("{count} pairs, max two-sided residual {worst:.2e}, bound holds: {bound_ok}"))
}

fn monotonicity() -> Outcome {
    let r = monotone_report(&cache().truncated(N), N, &ctx()).unwrap();
    let cm: Vec<String> = r.complete_monotone.iter().map(|(t, tab)| format!("t={t}: {}", if tab.all_ok() { "signs ok" } else { "sign error" })).collect();
    outcome(
        r.violations() == 0,
        format!("{} violations over direct xi, product, sin-product profiles; complete monotonicity J=4: {}", r.violations(), cm.join(", ")),
    )
}

fn asymptotic_ratio() -> Outcome {
    let ctx = ctx();
    let devs: Vec<f64> = [0.1, 0.3].iter().map(|&x| zeta_ratio_check(c(x, 500.0), &ctx).unwrap().deviation).collect();
    outcome(devs.iter().all(|d| *d < 1e-2), format!("relative deviation at t = 500: x=0.1 {:.2e}, x=0.3 {:.2e}", devs[0], devs[1]))
}

fn max_exterior_delta(e: &Expansion, points: impl Iterator<Item = Complex>) -> f64 {
    let mut m: f64 = 0.0;
    for s in points {
        let s = ComplexValue::exact(s);
        if e.classify(&s).region != Region::Exterior {
            continue;
        }
        m = m.max(e.delta(&s).unwrap().delta.abs());
    }
    m
}

fn vanishing_trends() -> Outcome {
    let e = expansion(W, N);
    let arcs: Vec<f64> = [20.0, 40.0, 80.0]
        .iter()
        .map(|&r| {
            let pts = (0..800).map(move |j| {
                let th = std::f64::consts::TAU * (j as f64 + 0.5) / 800.0;
                c(r * th.cos(), r * th.sin())
            });
            max_exterior_delta(&e, pts.filter(|s| s.re.abs() >= 0.5))
        })
        .collect();
    let strip: Vec<f64> = [30.0, 60.0, 120.0]
        .iter()
        .map(|&t| max_exterior_delta(&e, (0..=40).map(move |j| c(-0.49 + 0.98 * j as f64 / 40.0, t))))
        .collect();
    let arc_ok = arcs.windows(2).all(|w| w[1] < w[0]);
    let strip_ok = strip.windows(2).all(|w| w[1] < w[0]);
    outcome(
        arc_ok && strip_ok,
        format!(
            "arc max|Delta| R=20,40,80: {:.2e}, {:.2e}, {:.2e}; strip T=30,60,120: {:.2e}, {:.2e}, {:.2e}",
            arcs[0], arcs[1], arcs[2], strip[0], strip[1], strip[2]
        ),
    )
}

fn conjecture_audit() -> Outcome {
    let t0 = Instant::now();
    let r = exponent_estimates(N, ALPHA, cache(), &ctx()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let es = [r.eps0_hat, r.eps1_hat, r.eps2_hat, r.eps1tilde_hat];
    let finite = es.iter().all(|e| e.value.is_finite() && e.se.is_finite()) && r.verdicts.values().all(|v| v.margin.is_finite());
    let verdicts: Vec<String> = r.verdicts.iter().map(|(k, v)| format!("{k} margin {:.3}", v.margin)).collect();
    outcome(
        finite && r.verdicts.len() == 4 && secs <= 600.0,
        format!(
            "eps0 {:.3}+-{:.3}, eps1 {:.3}+-{:.3}, eps2 {:.3}+-{:.3}, eps1~ {:.3}+-{:.3}; {}; {secs:.1} s",
            es[0].value, es[0].se, es[1].value, es[1].se, es[2].value, es[2].se, es[3].value, es[3].se,
            verdicts.join(", ")
        ),
    )
}

fn laplace_check() -> Outcome {
    let ctx = ctx();
    let grid = [c(2.0, 0.0), c(1.5, 1.0), c(2.5, -1.0), c(1.2, 3.0), c(2.8, 0.5)];
    let mut medians = Vec::new();
    let mut at_two = Vec::new();
    for n in [100, 200, 500] {
        let d = Density::new(DensityConfig::new(n), cache(), &ctx).unwrap();
        let r = d.transform_many(&grid, &ctx).unwrap();
        at_two.push((r[0].residual, r[0].budget));
        let mut res: Vec<f64> = r.iter().map(|x| x.residual).collect();
        res.sort_by(f64::total_cmp);
        medians.push(res[2]);
    }
    let trend = medians.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    let budget_ok = at_two.iter().all(|(_, b)| b.is_finite());
    outcome(
        trend && budget_ok,
        format!(
            "s=2 residual (budget) N=100,200,500: {:.2e} ({:.1e}), {:.2e} ({:.1e}), {:.2e} ({:.1e}); medians {:.2e}, {:.2e}, {:.2e}",
            at_two[0].0, at_two[0].1, at_two[1].0, at_two[1].1, at_two[2].0, at_two[2].1, medians[0], medians[1], medians[2]
        ),
    )
}

/// Same relative arguments in each directory, so reported paths match.
fn run_all(dir: &Path) -> std::io::Result<bool> {
    let status = Command::new(env!("CARGO_BIN_EXE_zetapfrac"))
        .args(["all", "--cache", "zeros.csv", "--out", "out"])
        .current_dir(dir)
        .env_remove("ZETAPFRAC_CACHE")
        .output()?;
    Ok(status.status.success())
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in [dir.to_path_buf(), dir.join("out")] {
        let mut names: Vec<_> = std::fs::read_dir(&sub).unwrap().filter_map(|e| e.ok()).filter(|e| e.path().is_file()).map(|e| e.path()).collect();
        names.sort();
        for p in names {
            out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
        }
    }
    out
}

fn end_to_end() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    let ok_a = run_all(a.path()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let ok_b = run_all(b.path()).unwrap();
    let fa = files(a.path());
    let fb = files(b.path());
    let identical = fa == fb && !fa.is_empty();
    outcome(
        ok_a && ok_b && identical && secs <= 1800.0,
        format!("exit ok {}/{}, {} files byte-identical: {identical}, first run {secs:.1} s", ok_a, ok_b, fa.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("functional equation", functional_equation),
        ("symmetry suite", symmetry_suite),
        ("zero table", zero_table),
        ("coefficient consistency", coefficient_consistency),
        ("central expansion", central_expansion),
        ("tail-bound law", tail_bound_law),
        ("Taylor remainder", taylor_remainder),
        ("decomposition identity", decomposition_identity),
        ("monotonicity", monotonicity),
        ("asymptotic ratio", asymptotic_ratio),
        ("vanishing trends", vanishing_trends),
        ("conjecture audit", conjecture_audit),
        ("Laplace check", laplace_check),
        ("end-to-end run", end_to_end),
    ];
    let t0 = Instant::now();
    cache();
    println!("acceptance: shared 500-zero cache built in {:.1} s", t0.elapsed().as_secs_f64());
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if r.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {} [{:.1} s]", i + 1, r.detail, t.elapsed().as_secs_f64());
        if !r.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 14 criteria pass");
    } else {
        println!("acceptance: {} of 14 criteria fail: {:?}", failed.len(), failed);
        std::process::exit(1);
    }
}
