//! Complex numbers over [`Dd`] and the error-carrying [`ComplexValue`].

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::dd::{Dd, EPS};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Complex {
    pub re: Dd,
    pub im: Dd,
}

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(Dd::from(re), Dd::from(im))
}

impl Complex {
    pub const ZERO: Complex = Complex { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: Complex = Complex { re: Dd::ONE, im: Dd::ZERO };
    pub const I: Complex = Complex { re: Dd::ZERO, im: Dd::ONE };

    #[inline]
    pub const fn new(re: Dd, im: Dd) -> Complex {
        Complex { re, im }
    }

    #[inline]
    pub fn real(re: Dd) -> Complex {
        Complex { re, im: Dd::ZERO }
    }

    #[inline]
    pub fn imag(im: Dd) -> Complex {
        Complex { re: Dd::ZERO, im }
    }

    #[inline]
    pub fn conj(self) -> Complex {
        Complex { re: self.re, im: -self.im }
    }

    #[inline]
    pub fn scale(self, k: Dd) -> Complex {
        Complex { re: self.re * k, im: self.im * k }
    }

    #[inline]
    pub fn mul_i(self) -> Complex {
        Complex { re: -self.im, im: self.re }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn norm_sqr(self) -> Dd {
        self.re.sqr() + self.im.sqr()
    }

    /// Modulus, scaled to avoid overflow of the squares.
    pub fn abs(self) -> Dd {
        let m = self.re.hi.abs().max(self.im.hi.abs());
        if m == 0.0 {
            return Dd::ZERO;
        }
        if !m.is_finite() {
            return Dd::INFINITY;
        }
        let e = m.log2().floor() as i32;
        let k = 2f64.powi(-e);
        let (a, b) = (self.re.mul_pwr2(k), self.im.mul_pwr2(k));
        (a.sqr() + b.sqr()).sqrt().ldexp(e)
    }

    /// Modulus as `f64`.
    #[inline]
    pub fn norm(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    pub fn arg(self) -> Dd {
        Dd::atan2(self.im, self.re)
    }

    pub fn recip(self) -> Complex {
        Complex::ONE / self
    }

    pub fn exp(self) -> Complex {
        let m = self.re.exp();
        if m.is_zero() {
            return Complex::ZERO;
        }
        let (s, c) = self.im.sin_cos();
        Complex { re: m * c, im: m * s }
    }

    /// Principal logarithm.
    pub fn ln(self) -> Complex {
        Complex { re: self.abs().ln(), im: self.arg() }
    }

    pub fn sqrt(self) -> Complex {
        if self.re.is_zero() && self.im.is_zero() {
            return Complex::ZERO;
        }
        let r = self.abs();
        if self.re >= 0.0 {
            let t = ((r + self.re).mul_pwr2(0.5)).sqrt();
            Complex { re: t, im: self.im / t.mul_pwr2(2.0) }
        } else {
            let t = ((r - self.re).mul_pwr2(0.5)).sqrt();
            let re = self.im.abs() / t.mul_pwr2(2.0);
            let im = if self.im < 0.0 { -t } else { t };
            Complex { re, im }
        }
    }

    /// `base^self` for a positive real base, principal branch.
    pub fn pow_base(self, ln_base: Dd) -> Complex {
        self.scale(ln_base).exp()
    }

    pub fn powi(self, n: u32) -> Complex {
        let mut acc = Complex::ONE;
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn sin(self) -> Complex {
        let (s, c) = self.re.sin_cos();
        Complex { re: s * self.im.cosh(), im: c * self.im.sinh() }
    }

    pub fn cos(self) -> Complex {
        let (s, c) = self.re.sin_cos();
        Complex { re: c * self.im.cosh(), im: -(s * self.im.sinh()) }
    }

    /// A logarithm of `sin(self)`, usable far off the real axis where `sin`
    /// itself overflows. The imaginary part is correct modulo 2*pi.
    pub fn ln_sin(self) -> Complex {
        if self.im.hi.abs() < 20.0 {
            return self.sin().ln();
        }
        // sin w = -e^{-iw}(1 - e^{2iw})/(2i) for Im w > 0, mirrored below the axis
        let upper = self.im.hi > 0.0;
        let iw = self.mul_i();
        let u = if upper { (iw.scale(Dd::from(2.0))).exp() } else { (-iw.scale(Dd::from(2.0))).exp() };
        let log1m = ln_one_minus(u);
        // ln(2i) = ln 2 + i pi/2
        let ln2i = Complex::new(Dd::LN_2, Dd::FRAC_PI_2);
        if upper {
            // -iw + ln(1-u) - ln(2i) + i*pi
            -iw + log1m - ln2i + Complex::imag(Dd::PI)
        } else {
            // sin w = e^{iw}(1 - e^{-2iw})/(2i)
            iw + log1m - ln2i
        }
    }

    pub fn max_abs_component(self) -> f64 {
        self.re.hi.abs().max(self.im.hi.abs())
    }
}

/// ln(1 - u) with care for tiny |u|.
fn ln_one_minus(u: Complex) -> Complex {
    if u.norm() < 1e-8 {
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u2 * u2;
        -(u + u2.scale(Dd::HALF) + u3.scale(Dd::ONE / 3.0) + u4.scale(Dd::from(0.25)))
    } else {
        (Complex::ONE - u).ln()
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = f.precision().unwrap_or(20);
        write!(f, "{} {} {}i", self.re.to_sci_string(p), if self.im.hi < 0.0 { "-" } else { "+" }, self.im.abs().to_sci_string(p))
    }
}

impl From<Dd> for Complex {
    fn from(x: Dd) -> Complex {
        Complex::real(x)
    }
}

impl From<f64> for Complex {
    fn from(x: f64) -> Complex {
        Complex::real(Dd::from(x))
    }
}

impl Neg for Complex {
    type Output = Complex;
    #[inline]
    fn neg(self) -> Complex {
        Complex { re: -self.re, im: -self.im }
    }
}

impl Add for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, b: Complex) -> Complex {
        Complex { re: self.re + b.re, im: self.im + b.im }
    }
}

impl Sub for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, b: Complex) -> Complex {
        Complex { re: self.re - b.re, im: self.im - b.im }
    }
}

impl Mul for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, b: Complex) -> Complex {
        Complex { re: self.re * b.re - self.im * b.im, im: self.re * b.im + self.im * b.re }
    }
}

impl Div for Complex {
    type Output = Complex;
    fn div(self, b: Complex) -> Complex {
        let m = b.max_abs_component();
        let e = if m > 0.0 && m.is_finite() { m.log2().floor() as i32 } else { 0 };
        let k = 2f64.powi(-e);
        let bs = Complex { re: b.re.mul_pwr2(k), im: b.im.mul_pwr2(k) };
        let den = bs.norm_sqr();
        let num = self * bs.conj();
        Complex { re: (num.re / den).ldexp(-e), im: (num.im / den).ldexp(-e) }
    }
}

impl Add<Dd> for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, b: Dd) -> Complex {
        Complex { re: self.re + b, im: self.im }
    }
}

impl Sub<Dd> for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, b: Dd) -> Complex {
        Complex { re: self.re - b, im: self.im }
    }
}

impl Mul<Dd> for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, b: Dd) -> Complex {
        self.scale(b)
    }
}

impl Div<Dd> for Complex {
    type Output = Complex;
    #[inline]
    fn div(self, b: Dd) -> Complex {
        Complex { re: self.re / b, im: self.im / b }
    }
}

impl Add<f64> for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, b: f64) -> Complex {
        Complex { re: self.re + b, im: self.im }
    }
}

impl Sub<f64> for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, b: f64) -> Complex {
        Complex { re: self.re - b, im: self.im }
    }
}

impl Mul<f64> for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, b: f64) -> Complex {
        Complex { re: self.re * b, im: self.im * b }
    }
}

impl Div<f64> for Complex {
    type Output = Complex;
    #[inline]
    fn div(self, b: f64) -> Complex {
        Complex { re: self.re / b, im: self.im / b }
    }
}

impl AddAssign for Complex {
    #[inline]
    fn add_assign(&mut self, b: Complex) {
        *self = *self + b;
    }
}

impl SubAssign for Complex {
    #[inline]
    fn sub_assign(&mut self, b: Complex) {
        *self = *self - b;
    }
}

impl MulAssign for Complex {
    #[inline]
    fn mul_assign(&mut self, b: Complex) {
        *self = *self * b;
    }
}

impl std::iter::Sum for Complex {
    fn sum<I: Iterator<Item = Complex>>(iter: I) -> Complex {
        iter.fold(Complex::ZERO, |a, b| a + b)
    }
}

/// A complex value together with an absolute error bound.
///
/// Arithmetic propagates `err` additively for sums and to first order for
/// products and quotients, plus one rounding of the result.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexValue {
    pub re: Dd,
    pub im: Dd,
    pub err: f64,
}

impl ComplexValue {
    pub fn new(z: Complex, err: f64) -> ComplexValue {
        ComplexValue { re: z.re, im: z.im, err }
    }

    pub fn exact(z: Complex) -> ComplexValue {
        ComplexValue::new(z, 0.0)
    }

    pub fn from_f64(re: f64, im: f64) -> ComplexValue {
        ComplexValue::exact(c(re, im))
    }

    #[inline]
    pub fn value(&self) -> Complex {
        Complex::new(self.re, self.im)
    }

    pub fn abs(&self) -> f64 {
        self.value().norm()
    }

    pub fn conj(&self) -> ComplexValue {
        ComplexValue { re: self.re, im: -self.im, err: self.err }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn recip(&self) -> ComplexValue {
        ComplexValue::exact(Complex::ONE) / *self
    }

    pub fn with_err(mut self, err: f64) -> ComplexValue {
        self.err = err;
        self
    }
}

#[inline]
fn rounding(z: Complex) -> f64 {
    4.0 * EPS * z.norm()
}

impl Neg for ComplexValue {
    type Output = ComplexValue;
    fn neg(self) -> ComplexValue {
        ComplexValue { re: -self.re, im: -self.im, err: self.err }
    }
}

impl Add for ComplexValue {
    type Output = ComplexValue;
    fn add(self, b: ComplexValue) -> ComplexValue {
        let z = self.value() + b.value();
        ComplexValue::new(z, self.err + b.err + rounding(z))
    }
}

impl Sub for ComplexValue {
    type Output = ComplexValue;
    fn sub(self, b: ComplexValue) -> ComplexValue {
        let z = self.value() - b.value();
        ComplexValue::new(z, self.err + b.err + rounding(z))
    }
}

impl Mul for ComplexValue {
    type Output = ComplexValue;
    fn mul(self, b: ComplexValue) -> ComplexValue {
        let z = self.value() * b.value();
        let err = self.abs() * b.err + b.abs() * self.err + self.err * b.err + rounding(z);
        ComplexValue::new(z, err)
    }
}

impl Div for ComplexValue {
    type Output = ComplexValue;
    fn div(self, b: ComplexValue) -> ComplexValue {
        let z = self.value() / b.value();
        let bm = b.abs();
        let err = if bm > b.err { (self.err + z.norm() * b.err) / (bm - b.err) } else { f64::INFINITY };
        ComplexValue::new(z, err + rounding(z))
    }
}

impl fmt::Display for ComplexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{:.*} (± {:.2e})", p, self.value(), self.err),
            None => write!(f, "{} (± {:.2e})", self.value(), self.err),
        }
    }
}

/// A real value with an absolute error bound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RealValue {
    pub value: Dd,
    pub err: f64,
}

impl RealValue {
    pub fn new(value: Dd, err: f64) -> RealValue {
        RealValue { value, err }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

impl fmt::Display for RealValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (± {:.2e})", self.value.to_sci_string(f.precision().unwrap_or(20)), self.err)
    }
}

/// Plain `f64` view of a complex value for reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl From<Complex> for C64 {
    fn from(z: Complex) -> C64 {
        C64 { re: z.re.to_f64(), im: z.im.to_f64() }
    }
}
