//! Rational functions in `X = q^{-s}`.
//!
//! Exact functions are kept reduced with a monic denominator, so equality of
//! reduced forms is structural. Float functions are only normalised by the
//! leading denominator coefficient. Non-integer `s` uses the principal branch
//! `q^{-s} = exp(-s·ln q)`.

#[allow(unused_imports)]
use num_traits::float::Float as _;
use core::fmt;

use num_complex::Complex64;

use crate::coeff::CoefficientValue;
use crate::error::{Error, Result};
use crate::padic::{q_pow, qr};
use crate::poly::{root_multiplicity, Poly};
use crate::Q;

/// A point `s` at which a local factor is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SValue {
    Int(i64),
    /// `s = k/2`.
    Half(i64),
    Real(f64),
    Complex(Complex64),
}

impl SValue {
    pub fn to_complex(self) -> Complex64 {
        match self {
            SValue::Int(k) => Complex64::new(k as f64, 0.0),
            SValue::Half(k) => Complex64::new(k as f64 / 2.0, 0.0),
            SValue::Real(x) => Complex64::new(x, 0.0),
            SValue::Complex(z) => z,
        }
    }

    pub fn re(self) -> f64 {
        self.to_complex().re
    }

    /// Normalises `Half(2k)` and integral reals to `Int(k)`.
    pub fn canonical(self) -> Self {
        match self {
            SValue::Half(k) if k % 2 == 0 => SValue::Int(k / 2),
            SValue::Real(x) if x.fract() == 0.0 && x.abs() < 1e15 => SValue::Int(x as i64),
            SValue::Real(x) if (2.0 * x).fract() == 0.0 && x.abs() < 1e15 => SValue::Half((2.0 * x) as i64),
            s => s,
        }
    }

    /// `q^{-s}`; exact for integral `s`.
    pub fn x_value(self, q: u64) -> CoefficientValue {
        match self.canonical() {
            SValue::Int(k) => CoefficientValue::rational(q_pow(q, -k)),
            s => {
                let z = -s.to_complex() * (q as f64).ln();
                CoefficientValue::Float(z.exp())
            }
        }
    }
}

impl From<i64> for SValue {
    fn from(k: i64) -> Self {
        SValue::Int(k)
    }
}

impl From<f64> for SValue {
    fn from(x: f64) -> Self {
        SValue::Real(x).canonical()
    }
}

#[derive(Clone, Debug)]
pub struct LocalRationalFunction {
    num: Poly,
    den: Poly,
    q: u64,
}

impl LocalRationalFunction {
    pub fn new(num: Poly, den: Poly, q: u64) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Invalid("zero denominator".into()));
        }
        Ok(Self::normalized(num, den, q))
    }

    fn normalized(num: Poly, den: Poly, q: u64) -> Self {
        if num.is_zero() {
            return Self { num: Poly::zero(), den: Poly::one(), q };
        }
        let (num, den) = if num.is_exact() && den.is_exact() {
            let g = num.gcd(&den);
            (num.divrem(&g).0, den.divrem(&g).0)
        } else {
            (num, den)
        };
        let l = den.leading().expect("non-zero denominator").inv();
        Self { num: num.scale(&l), den: den.scale(&l), q }
    }

    pub fn constant(c: CoefficientValue, q: u64) -> Self {
        Self::normalized(Poly::constant(c), Poly::one(), q)
    }

    pub fn from_q(c: Q, q: u64) -> Self {
        Self::constant(CoefficientValue::rational(c), q)
    }

    pub fn one(q: u64) -> Self {
        Self::constant(CoefficientValue::int(1), q)
    }

    pub fn zero(q: u64) -> Self {
        Self::constant(CoefficientValue::int(0), q)
    }

    /// `c·X^k` for any integer `k`.
    pub fn monomial(c: CoefficientValue, k: i64, q: u64) -> Self {
        if k >= 0 {
            Self::normalized(Poly::monomial(c, k as usize), Poly::one(), q)
        } else {
            Self::normalized(Poly::constant(c), Poly::monomial(CoefficientValue::int(1), (-k) as usize), q)
        }
    }

    /// `X^k`.
    pub fn x_pow(k: i64, q: u64) -> Self {
        Self::monomial(CoefficientValue::int(1), k, q)
    }

    /// `a + b·X^k` as a function.
    pub fn binomial(a: CoefficientValue, b: CoefficientValue, k: i64, q: u64) -> Self {
        Self::constant(a, q).add(&Self::monomial(b, k, q))
    }

    /// `q^{a + b·s}` written as `q^a · X^{-b}`.
    pub fn q_power_affine(a: i64, b: i64, q: u64) -> Self {
        Self::monomial(CoefficientValue::rational(q_pow(q, a)), -b, q)
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn is_exact(&self) -> bool {
        self.num.is_exact() && self.den.is_exact()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn check_q(&self, o: &Self) {
        assert_eq!(self.q, o.q, "rational functions bound to different q");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_q(o);
        let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        Self::normalized(num, self.den.mul(&o.den), self.q)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self { num: self.num.neg(), den: self.den.clone(), q: self.q }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check_q(o);
        Self::normalized(self.num.mul(&o.num), self.den.mul(&o.den), self.q)
    }

    pub fn scale(&self, c: &CoefficientValue) -> Self {
        Self::normalized(self.num.scale(c), self.den.clone(), self.q)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroFunction);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone(), self.q))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        Ok((0..k.unsigned_abs()).fold(Self::one(self.q), |acc, _| acc.mul(&base)))
    }

    /// Substitutes `X ↦ c·X^k`, `k ≠ 0`.
    pub fn compose_monomial(&self, c: &CoefficientValue, k: i64) -> Self {
        assert!(k != 0);
        let ka = k.unsigned_abs() as usize;
        let n = self.num.substitute(c, ka);
        let d = self.den.substitute(c, ka);
        if k > 0 {
            return Self::normalized(n, d, self.q);
        }
        let top = n.degree().unwrap_or(0).max(d.degree().unwrap_or(0));
        Self::normalized(n.reversed(top), d.reversed(top), self.q)
    }

    /// Value at `X = x0`.
    pub fn evaluate_x(&self, x0: &CoefficientValue) -> Result<CoefficientValue> {
        let d = self.den.eval(x0);
        if d.is_zero() {
            let order = self.order_at_x(x0).unwrap_or(-1);
            return Err(Error::Pole { order: -order });
        }
        Ok(self.num.eval(x0) / d)
    }

    /// Value at `X = q^{-s}`.
    pub fn evaluate_at_s(&self, s: impl Into<SValue>) -> Result<CoefficientValue> {
        self.evaluate_x(&s.into().x_value(self.q))
    }

    /// Zero order (positive) or pole order (negative) at `X = x0`.
    pub fn order_at_x(&self, x0: &CoefficientValue) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::ZeroFunction);
        }
        Ok(root_multiplicity(&self.num, x0) as i64 - root_multiplicity(&self.den, x0) as i64)
    }

    /// Order at `s = 0`, i.e. at `X = 1`.
    pub fn order_at_s0(&self) -> Result<i64> {
        self.order_at_x(&CoefficientValue::int(1))
    }

    pub fn equal(&self, o: &Self) -> Result<bool> {
        if self.q != o.q {
            return Err(Error::QMismatch(self.q, o.q));
        }
        let l = self.num.mul(&o.den);
        let r = o.num.mul(&self.den);
        Ok(l.approx_eq(&r, 1e-9))
    }
}

impl fmt::Display for LocalRationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / [{}]", self.num, self.den)
    }
}

/// `ζ_P(s) = (1 − X)^{-1}`.
pub fn zeta(q: u64) -> LocalRationalFunction {
    geometric(CoefficientValue::int(1), 1, q)
}

/// `(1 − c·X^k)^{-1}`.
pub fn geometric(c: CoefficientValue, k: i64, q: u64) -> LocalRationalFunction {
    LocalRationalFunction::binomial(CoefficientValue::int(1), -c, k, q)
        .inv()
        .expect("1 - cX^k is non-zero")
}

/// `(1 − c)^{-1}` as an exact rational, the formal sum of a geometric series.
pub fn geometric_sum(c: &Q) -> Q {
    (qr(1, 1) - c).recip()
}
