//! Scalars: exact Gaussian rationals or complex floats.

use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::padic::qi;
use crate::Q;

/// Absolute tolerance used when a float coefficient is tested for zero.
pub const FLOAT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum CoefficientValue {
    Exact { re: Q, im: Q },
    Float(Complex64),
}

use CoefficientValue::{Exact, Float};

fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl CoefficientValue {
    pub fn rational(x: Q) -> Self {
        Exact { re: x, im: Q::zero() }
    }

    pub fn int(n: i64) -> Self {
        Self::rational(qi(n))
    }

    pub fn gaussian(re: Q, im: Q) -> Self {
        Exact { re, im }
    }

    pub fn float(re: f64, im: f64) -> Self {
        Float(Complex64::new(re, im))
    }

    /// `e^{2πi·a}` for a rational angle `a`, exact when the order divides 4.
    pub fn root_of_unity(angle: &Q) -> Self {
        let a = angle - angle.floor();
        let d = a.denom().to_u64().unwrap_or(0);
        if d <= 4 && 4 % d == 0 {
            let k = (a * qi(4)).to_integer().to_i64().unwrap();
            return match k {
                0 => Self::int(1),
                1 => Self::gaussian(Q::zero(), qi(1)),
                2 => Self::int(-1),
                _ => Self::gaussian(Q::zero(), qi(-1)),
            };
        }
        let t = 2.0 * core::f64::consts::PI * q_to_f64(&a);
        Float(Complex64::new(libm::cos(t), libm::sin(t)))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Exact { .. })
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Exact { re, im } => Complex64::new(q_to_f64(re), q_to_f64(im)),
            Float(z) => *z,
        }
    }

    /// The real rational value, if exact and real.
    pub fn as_rational(&self) -> Option<&Q> {
        match self {
            Exact { re, im } if im.is_zero() => Some(re),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Exact { re, im } => re.is_zero() && im.is_zero(),
            Float(z) => z.norm() < FLOAT_TOL,
        }
    }

    pub fn is_one(&self) -> bool {
        (self.clone() - Self::int(1)).is_zero()
    }

    pub fn conj(&self) -> Self {
        match self {
            Exact { re, im } => Exact { re: re.clone(), im: -im },
            Float(z) => Float(z.conj()),
        }
    }

    pub fn norm_sqr(&self) -> Self {
        match self {
            Exact { re, im } => Self::rational(re * re + im * im),
            Float(z) => Self::float(z.norm_sqr(), 0.0),
        }
    }

    pub fn inv(&self) -> Self {
        match self {
            Exact { re, im } => {
                let n = re * re + im * im;
                Exact { re: re / &n, im: -im / &n }
            }
            Float(z) => Float(z.inv()),
        }
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut b = base;
        let mut r = Self::int(1);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b.clone();
            }
            b = b.clone() * b;
            e >>= 1;
        }
        r
    }

    /// Equality: exact on the exact backend, `tol`-relative otherwise.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (Exact { re: a, im: b }, Exact { re: c, im: d }) => a == c && b == d,
            _ => {
                let (x, y) = (self.to_complex(), other.to_complex());
                (x - y).norm() <= tol * (1.0 + x.norm().max(y.norm()))
            }
        }
    }
}

impl PartialEq for CoefficientValue {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, FLOAT_TOL)
    }
}

impl From<Q> for CoefficientValue {
    fn from(x: Q) -> Self {
        Self::rational(x)
    }
}

impl From<i64> for CoefficientValue {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl From<Complex64> for CoefficientValue {
    fn from(z: Complex64) -> Self {
        Float(z)
    }
}

impl Zero for CoefficientValue {
    fn zero() -> Self {
        Self::int(0)
    }
    fn is_zero(&self) -> bool {
        CoefficientValue::is_zero(self)
    }
}

impl One for CoefficientValue {
    fn one() -> Self {
        Self::int(1)
    }
}

impl Add for CoefficientValue {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        match (self, o) {
            (Exact { re: a, im: b }, Exact { re: c, im: d }) => Exact { re: a + c, im: b + d },
            (x, y) => Float(x.to_complex() + y.to_complex()),
        }
    }
}

impl Sub for CoefficientValue {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for CoefficientValue {
    type Output = Self;
    fn neg(self) -> Self {
        match self {
            Exact { re, im } => Exact { re: -re, im: -im },
            Float(z) => Float(-z),
        }
    }
}

impl Mul for CoefficientValue {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        match (self, o) {
            (Exact { re: a, im: b }, Exact { re: c, im: d }) => {
                if b.is_zero() && d.is_zero() {
                    return Exact { re: a * c, im: Q::zero() };
                }
                Exact { re: &a * &c - &b * &d, im: a * d + b * c }
            }
            (x, y) => Float(x.to_complex() * y.to_complex()),
        }
    }
}

impl Div for CoefficientValue {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.inv()
    }
}

impl fmt::Display for CoefficientValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exact { re, im } if im.is_zero() => write!(f, "{re}"),
            Exact { re, im } => write!(f, "{re}+{im}i"),
            Float(z) => write!(f, "{:.12}{:+.12}i", z.re, z.im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::qr;

    #[test]
    fn exact_field_ops() {
        let i = CoefficientValue::gaussian(Q::zero(), qi(1));
        assert_eq!(i.clone() * i.clone(), CoefficientValue::int(-1));
        let z = CoefficientValue::gaussian(qi(3), qi(4));
        assert_eq!(z.clone() * z.inv(), CoefficientValue::int(1));
        assert_eq!(z.norm_sqr(), CoefficientValue::int(25));
        assert_eq!(CoefficientValue::int(2).pow(-3), CoefficientValue::rational(qr(1, 8)));
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(CoefficientValue::root_of_unity(&qr(1, 2)), CoefficientValue::int(-1));
        assert!(CoefficientValue::root_of_unity(&qr(3, 4)).is_exact());
        let w = CoefficientValue::root_of_unity(&qr(1, 3));
        assert!(!w.is_exact());
        assert!(w.pow(3).approx_eq(&CoefficientValue::int(1), 1e-12));
    }
}
