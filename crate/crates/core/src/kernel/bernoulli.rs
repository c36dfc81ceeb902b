//! Bernoulli numbers in exact rational arithmetic, rounded once to [`Dd`].

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dd::Dd;

/// Number of even-index Bernoulli numbers kept (`B_2 .. B_{2*COUNT}`).
pub const COUNT: usize = 120;

struct Tables {
    /// `B_{2k}` for `k = 1..=COUNT` (index `k - 1`).
    b2k: Vec<BigRational>,
    /// `B_{2k} / (2k)!`
    em: Vec<Dd>,
    /// `B_{2k} / (2k (2k - 1))`
    stirling: Vec<Dd>,
}

static TABLES: OnceLock<Tables> = OnceLock::new();

/// `B_0 .. B_n` by the Akiyama-Tanigawa recurrence (with `B_1 = +1/2`).
pub fn bernoulli_upto(n: usize) -> Vec<BigRational> {
    let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * BigRational::from_integer(BigInt::from(j));
        }
        out.push(a[0].clone());
    }
    out
}

fn to_dd(q: &BigRational) -> Dd {
    if q.is_zero() {
        return Dd::ZERO;
    }
    Dd::from_ratio(q.numer(), q.denom())
}

fn tables() -> &'static Tables {
    TABLES.get_or_init(|| {
        let all = bernoulli_upto(2 * COUNT);
        let b2k: Vec<BigRational> = (1..=COUNT).map(|k| all[2 * k].clone()).collect();
        let mut fact = BigInt::one();
        let mut em = Vec::with_capacity(COUNT);
        let mut stirling = Vec::with_capacity(COUNT);
        for (i, b) in b2k.iter().enumerate() {
            let k = i + 1;
            fact *= BigInt::from(2 * k - 1) * BigInt::from(2 * k);
            em.push(to_dd(&(b / BigRational::from_integer(fact.clone()))));
            let den = BigInt::from(2 * k) * BigInt::from(2 * k - 1);
            stirling.push(to_dd(&(b / BigRational::from_integer(den))));
        }
        Tables { b2k, em, stirling }
    })
}

/// Exact `B_{2k}` for `1 <= k <= COUNT`.
pub fn b2k(k: usize) -> &'static BigRational {
    &tables().b2k[k - 1]
}

/// `B_{2k} / (2k)!` for `1 <= k <= COUNT`.
pub fn em_coeff(k: usize) -> Dd {
    tables().em[k - 1]
}

/// `B_{2k} / (2k (2k-1))` for `1 <= k <= COUNT`.
pub fn stirling_coeff(k: usize) -> Dd {
    tables().stirling[k - 1]
}
