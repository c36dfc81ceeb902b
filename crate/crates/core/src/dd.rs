//! Double-double real arithmetic.
//!
//! A [`Dd`] is an unevaluated sum `hi + lo` of two `f64` with `|lo| <= ulp(hi)/2`,
//! giving a 106-bit significand (about 31.9 decimal digits). The basic
//! operations follow the classical error-free transformations (Dekker/Knuth);
//! the transcendental functions use argument reduction plus Taylor series and
//! one Newton step where that is cheaper.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Unit roundoff of the double-double format, 2^-104.
pub const EPS: f64 = 4.930_380_657_631_324e-32;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

#[inline]
fn two_sqr(a: f64) -> (f64, f64) {
    let p = a * a;
    let (h, l) = split(a);
    let e = ((h * h - p) + 2.0 * h * l) + l * l;
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const HALF: Dd = Dd { hi: 0.5, lo: 0.0 };
    pub const PI: Dd = Dd { hi: 3.141592653589793, lo: 1.2246467991473532e-16 };
    pub const TWO_PI: Dd = Dd { hi: 6.283185307179586, lo: 2.4492935982947064e-16 };
    pub const FRAC_PI_2: Dd = Dd { hi: 1.5707963267948966, lo: 6.123233995736766e-17 };
    pub const FRAC_PI_4: Dd = Dd { hi: 0.7853981633974483, lo: 3.061616997868383e-17 };
    pub const LN_2: Dd = Dd { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };
    pub const LN_PI: Dd = Dd { hi: 1.1447298858494002, lo: 1.0265951162707826e-17 };
    pub const LN_2PI: Dd = Dd { hi: 1.8378770664093456, lo: -7.756588316134483e-17 };
    /// ln(sqrt(2 pi))
    pub const LN_SQRT_2PI: Dd = Dd { hi: 0.9189385332046728, lo: -3.8782941580672414e-17 };
    /// Euler-Mascheroni constant.
    pub const EULER: Dd = Dd { hi: 0.5772156649015329, lo: -4.942915152430645e-18 };
    /// First Stieltjes constant gamma_1.
    pub const STIELTJES_1: Dd = Dd { hi: -0.07281584548367673, lo: 2.851266173998682e-18 };
    pub const NAN: Dd = Dd { hi: f64::NAN, lo: f64::NAN };
    pub const INFINITY: Dd = Dd { hi: f64::INFINITY, lo: 0.0 };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Dd {
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    /// Exact conversion for integers up to 2^106 in magnitude.
    pub fn from_i128(n: i128) -> Dd {
        let hi = n as f64;
        let rest = n - hi as i128;
        Dd::from_sum(hi, rest as f64)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn is_nan(self) -> bool {
        self.hi.is_nan()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    #[inline]
    pub fn signum(self) -> f64 {
        if self.hi > 0.0 {
            1.0
        } else if self.hi < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn mul_pwr2(self, p: f64) -> Dd {
        Dd { hi: self.hi * p, lo: self.lo * p }
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        let (p1, mut p2) = two_sqr(self.hi);
        p2 += 2.0 * self.hi * self.lo;
        p2 += self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn floor(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            Dd { hi, lo }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    pub fn round(self) -> Dd {
        (self + 0.5).floor()
    }

    pub fn max(self, other: Dd) -> Dd {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Dd) -> Dd {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Multiplies by 2^e, splitting the scale so intermediate powers stay representable.
    pub fn ldexp(self, e: i32) -> Dd {
        if (-1000..=1000).contains(&e) {
            self.mul_pwr2(2f64.powi(e))
        } else {
            let h = e / 2;
            self.mul_pwr2(2f64.powi(h)).mul_pwr2(2f64.powi(e - h))
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        if self.hi < 0.0 {
            return Dd::NAN;
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (p, e) = two_sqr(ax);
        let diff = (self - Dd { hi: p, lo: e }).hi;
        Dd::from_sum(ax, diff * (x * 0.5))
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.78 {
            return Dd::INFINITY;
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        let m = (self.hi / Dd::LN_2.hi + 0.5).floor();
        let r = (self - Dd::LN_2 * m).mul_pwr2(1.0 / 512.0);
        // expm1(r), |r| < 7e-4
        let mut term = r;
        let mut s = r;
        let mut n = 2.0;
        loop {
            term = term * r / n;
            s += term;
            if term.hi.abs() <= 1e-36 * s.hi.abs().max(1e-300) || n > 30.0 {
                break;
            }
            n += 1.0;
        }
        for _ in 0..9 {
            s = s.mul_pwr2(2.0) + s.sqr();
        }
        (s + 1.0).ldexp(m as i32)
    }

    pub fn ln(self) -> Dd {
        if self.hi <= 0.0 {
            if self.hi == 0.0 {
                return -Dd::INFINITY;
            }
            return Dd::NAN;
        }
        if self.hi.is_infinite() {
            return Dd::INFINITY;
        }
        let x = Dd::from(self.hi.ln());
        x + self * (-x).exp() - 1.0
    }

    /// Reduces `self` modulo pi/2, returning the quadrant index and the remainder in [-pi/4, pi/4].
    fn reduce_half_pi(self) -> (i64, Dd) {
        const P1: f64 = 1.5707963267948966;
        const P2: f64 = 6.123233995736766e-17;
        const P3: f64 = -1.4973849048591698e-33;
        let j = (self.hi * std::f64::consts::FRAC_2_PI).round();
        if j == 0.0 {
            return (0, self);
        }
        let r = self - Dd::from_prod(j, P1) - Dd::from_prod(j, P2) - j * P3;
        // j fits in i64 for every argument of interest; take it mod 4 in floating point
        let q = j - 4.0 * (j / 4.0).floor();
        (q as i64, r)
    }

    /// sin and cos of an argument with |r| <= pi/4.
    fn sin_cos_reduced(r: Dd) -> (Dd, Dd) {
        if r.hi == 0.0 {
            return (Dd::ZERO, Dd::ONE);
        }
        let r2 = -r.sqr();
        let mut term = r;
        let mut s = r;
        let mut n = 3.0;
        loop {
            term = term * r2 / (n * (n - 1.0));
            s += term;
            if term.hi.abs() <= 1e-35 * s.hi.abs() || n > 60.0 {
                break;
            }
            n += 2.0;
        }
        let c = (Dd::ONE - s.sqr()).sqrt();
        (s, c)
    }

    pub fn sin_cos(self) -> (Dd, Dd) {
        let (q, r) = self.reduce_half_pi();
        let (s, c) = Dd::sin_cos_reduced(r);
        match q {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }

    pub fn atan2(y: Dd, x: Dd) -> Dd {
        if x.hi == 0.0 && y.hi == 0.0 {
            return Dd::ZERO;
        }
        let z0 = Dd::from(y.hi.atan2(x.hi));
        let (s, c) = z0.sin_cos();
        let num = y * c - x * s;
        let den = x * c + y * s;
        z0 + num / den
    }

    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// `self^y` for positive `self`.
    pub fn powf(self, y: Dd) -> Dd {
        (y * self.ln()).exp()
    }

    pub fn sinh(self) -> Dd {
        if self.hi.abs() < 1e-3 {
            let x2 = self.sqr();
            let mut term = self;
            let mut s = self;
            let mut n = 3.0;
            while term.hi.abs() > 1e-36 * s.hi.abs() && n < 40.0 {
                term = term * x2 / (n * (n - 1.0));
                s += term;
                n += 2.0;
            }
            return s;
        }
        let e = self.exp();
        (e - e.recip()).mul_pwr2(0.5)
    }

    pub fn cosh(self) -> Dd {
        let e = self.abs().exp();
        (e + e.recip()).mul_pwr2(0.5)
    }

    /// Exact rational value of `self` as `num * 2^exp2`.
    fn to_exact(self) -> (BigInt, i64) {
        let parts = [self.hi, self.lo];
        let mut terms: Vec<(BigInt, i64)> = Vec::new();
        for &p in &parts {
            if p == 0.0 {
                continue;
            }
            let bits = p.to_bits();
            let sign = if bits >> 63 == 1 { -1 } else { 1 };
            let exp = ((bits >> 52) & 0x7ff) as i64;
            let frac = bits & ((1u64 << 52) - 1);
            let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
            terms.push((BigInt::from(sign) * BigInt::from(mant), e));
        }
        if terms.is_empty() {
            return (BigInt::zero(), 0);
        }
        let emin = terms.iter().map(|t| t.1).min().unwrap();
        let mut num = BigInt::zero();
        for (m, e) in terms {
            num += m << ((e - emin) as usize);
        }
        (num, emin)
    }

    /// Correctly rounded scientific notation with `sig` significant digits.
    pub fn to_sci_string(self, sig: usize) -> String {
        if self.hi.is_nan() {
            return "NaN".into();
        }
        if self.hi.is_infinite() {
            return if self.hi > 0.0 { "inf".into() } else { "-inf".into() };
        }
        if self.hi == 0.0 {
            return "0".into();
        }
        let sig = sig.max(1);
        let (num, e2) = self.to_exact();
        let neg = num.is_negative();
        let num = num.abs();
        let mut p = self.hi.abs().log10().floor() as i64 - sig as i64 + 1;
        loop {
            let (mut n, mut d) = (num.clone(), BigInt::one());
            if e2 >= 0 {
                n <<= e2 as usize;
            } else {
                d <<= (-e2) as usize;
            }
            let ten = BigInt::from(10u32);
            if p >= 0 {
                d *= num_traits::pow(ten, p as usize);
            } else {
                n *= num_traits::pow(ten, (-p) as usize);
            }
            let digits = ((n << 1usize) + &d) / (d << 1usize);
            let s = digits.to_string();
            if s.len() > sig {
                p += 1;
                continue;
            }
            if s.len() < sig {
                p -= 1;
                continue;
            }
            let exp10 = p + sig as i64 - 1;
            let mut out = String::new();
            if neg {
                out.push('-');
            }
            out.push_str(&s[..1]);
            if sig > 1 {
                out.push('.');
                out.push_str(&s[1..]);
            }
            out.push('e');
            out.push_str(&exp10.to_string());
            return out;
        }
    }

    /// Nearest double-double to the rational `n / d`.
    pub fn from_ratio(n: &BigInt, d: &BigInt) -> Dd {
        let hi = Dd::rational_to_f64(n, d);
        if hi == 0.0 || !hi.is_finite() {
            return Dd::from(hi);
        }
        let (hn, he) = Dd::from(hi).to_exact();
        let (rn, rd) = if he >= 0 { (n - ((hn * d) << (he as usize)), d.clone()) } else { ((n << ((-he) as usize)) - hn * d, d << ((-he) as usize)) };
        Dd::from_sum(hi, Dd::rational_to_f64(&rn, &rd))
    }

    /// Rounds the rational `n / d` to the nearest double (via a long decimal expansion).
    fn rational_to_f64(n: &BigInt, d: &BigInt) -> f64 {
        if n.is_zero() {
            return 0.0;
        }
        let neg = n.is_negative() != d.is_negative();
        let (n, d) = (n.abs(), d.abs());
        // scale to 40 significant digits
        let approx = n.bits() as i64 - d.bits() as i64;
        let mut p = (approx as f64 * std::f64::consts::LOG10_2).floor() as i64 - 40;
        let ten = BigInt::from(10u32);
        let digits = loop {
            let (mut nn, mut dd) = (n.clone(), d.clone());
            if p >= 0 {
                dd *= num_traits::pow(ten.clone(), p as usize);
            } else {
                nn *= num_traits::pow(ten.clone(), (-p) as usize);
            }
            let (q, _) = nn.div_rem(&dd);
            let s = q.to_string();
            if s.len() < 40 {
                p -= 1;
                continue;
            }
            break s;
        };
        let v: f64 = format!("{}e{}", digits, p).parse().unwrap_or(f64::NAN);
        if neg {
            -v
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDdError(pub String);

impl fmt::Display for ParseDdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid double-double literal '{}'", self.0)
    }
}

impl std::error::Error for ParseDdError {}

impl FromStr for Dd {
    type Err = ParseDdError;

    /// Parses a decimal literal and rounds it to the nearest double-double.
    fn from_str(s: &str) -> Result<Dd, ParseDdError> {
        let err = || ParseDdError(s.to_string());
        let t = s.trim();
        match t {
            "NaN" => return Ok(Dd::NAN),
            "inf" => return Ok(Dd::INFINITY),
            "-inf" => return Ok(-Dd::INFINITY),
            _ => {}
        }
        let hi: f64 = t.parse().map_err(|_| err())?;
        if hi == 0.0 || !hi.is_finite() {
            return Ok(Dd::from(hi));
        }
        let (mant, exp10) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| err())?),
            None => (t, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (int_part, frac_part) = match mant.find('.') {
            Some(i) => (&mant[..i], &mant[i + 1..]),
            None => (mant, ""),
        };
        let digits: String = format!("{}{}", int_part, frac_part);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let mut value = BigInt::from_str(&digits).map_err(|_| err())?;
        if neg {
            value = -value;
        }
        let p = exp10 - frac_part.len() as i64;
        // value * 10^p - hi, as a rational n/d
        let (hn, he) = Dd::from(hi).to_exact();
        let ten = BigInt::from(10u32);
        let (mut n, mut d) = (value, BigInt::one());
        if p >= 0 {
            n *= num_traits::pow(ten, p as usize);
        } else {
            d *= num_traits::pow(ten, (-p) as usize);
        }
        // subtract hn * 2^he
        let (rn, rd) = if he >= 0 {
            (n - (hn * &d << (he as usize)), d)
        } else {
            ((n << ((-he) as usize)) - hn * &d, d << ((-he) as usize))
        };
        let lo = Dd::rational_to_f64(&rn, &rd);
        let (hi, lo) = quick_two_sum(hi, lo);
        Ok(Dd { hi, lo })
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().unwrap_or(32);
        f.write_str(&self.to_sci_string(sig))
    }
}

impl From<f64> for Dd {
    #[inline]
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }
}

impl From<i32> for Dd {
    #[inline]
    fn from(x: i32) -> Dd {
        Dd { hi: x as f64, lo: 0.0 }
    }
}

impl From<usize> for Dd {
    fn from(x: usize) -> Dd {
        Dd::from_i128(x as i128)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl PartialEq<f64> for Dd {
    fn eq(&self, other: &f64) -> bool {
        self.hi == *other && self.lo == 0.0
    }
}

impl PartialOrd<f64> for Dd {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&Dd::from(*other))
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }
}

impl Add<Dd> for f64 {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        b + self
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Sub<Dd> for f64 {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        (-b) + self
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p1, mut p2) = two_prod(self.hi, b.hi);
        p2 += self.hi * b.lo + self.lo * b.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p1, mut p2) = two_prod(self.hi, b);
        p2 += self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Mul<Dd> for f64 {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        b * self
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p1, p2) = two_prod(q1, b);
        let (s, e) = two_sum(self.hi, -p1);
        let e = e + self.lo - p2;
        let q2 = (s + e) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

impl Div<Dd> for f64 {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        Dd::from(self) / b
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Dd {
            #[inline]
            fn $m(&mut self, b: Dd) { *self = *self $op b; }
        }
        impl $tr<f64> for Dd {
            #[inline]
            fn $m(&mut self, b: f64) { *self = *self $op b; }
        }
    )*};
}

assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl std::iter::Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}
