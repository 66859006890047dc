//! Dense univariate polynomials over [`CoefficientValue`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coeff::{CoefficientValue, FLOAT_TOL};

#[derive(Clone, Debug)]
pub struct Poly {
    coeffs: Vec<CoefficientValue>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<CoefficientValue>) -> Self {
        while coeffs.last().is_some_and(is_hard_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: CoefficientValue) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(CoefficientValue::int(1))
    }

    /// `c·X^k`.
    pub fn monomial(c: CoefficientValue, k: usize) -> Self {
        let mut v = vec![CoefficientValue::int(0); k];
        v.push(c);
        Self::new(v)
    }

    /// `a + b·X`.
    pub fn linear(a: CoefficientValue, b: CoefficientValue) -> Self {
        Self::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[CoefficientValue] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact())
    }

    pub fn leading(&self) -> Option<&CoefficientValue> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &CoefficientValue) -> CoefficientValue {
        self.coeffs
            .iter()
            .rev()
            .fold(CoefficientValue::int(0), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = CoefficientValue::int(0);
        Self::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).unwrap_or(&z).clone() + o.coeffs.get(i).unwrap_or(&z).clone()
                })
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &CoefficientValue) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::zero();
        }
        let mut out = vec![CoefficientValue::int(0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if is_hard_zero(a) {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Substitutes `X ↦ c·X^k` for `k ≥ 1`.
    pub fn substitute(&self, c: &CoefficientValue, k: usize) -> Self {
        let mut out = vec![CoefficientValue::int(0); k * self.coeffs.len().max(1)];
        let mut cp = CoefficientValue::int(1);
        for (i, a) in self.coeffs.iter().enumerate() {
            out[i * k] = a.clone() * cp.clone();
            cp = cp * c.clone();
        }
        Self::new(out)
    }

    /// `X^n · P(1/X)` for `n ≥ deg P`.
    pub fn reversed(&self, n: usize) -> Self {
        let mut out = vec![CoefficientValue::int(0); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            out[n - i] = a.clone();
        }
        Self::new(out)
    }

    /// Euclidean division; `d` must be non-zero with an invertible leading coefficient.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = d.coeffs[dd].inv();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quo = vec![CoefficientValue::int(0); r.len() - dd];
        for i in (0..quo.len()).rev() {
            let c = r[i + dd].clone() * lead_inv.clone();
            if !is_hard_zero(&c) {
                for (j, b) in d.coeffs.iter().enumerate() {
                    r[i + j] = r[i + j].clone() - c.clone() * b.clone();
                }
            }
            r[i + dd] = CoefficientValue::int(0);
            quo[i] = c;
        }
        (Self::new(quo), Self::new(r))
    }

    /// Divides by `(X − x0)`, returning quotient and remainder `P(x0)`.
    pub fn div_linear(&self, x0: &CoefficientValue) -> (Self, CoefficientValue) {
        if self.coeffs.is_empty() {
            return (Self::zero(), CoefficientValue::int(0));
        }
        let n = self.coeffs.len();
        let mut q = vec![CoefficientValue::int(0); n - 1];
        let mut acc = CoefficientValue::int(0);
        for i in (0..n).rev() {
            acc = acc * x0.clone() + self.coeffs[i].clone();
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        (Self::new(q), acc)
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.inv()),
            None => Self::zero(),
        }
    }

    /// Monic gcd over the exact backend.
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.coeffs.is_empty() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Coefficient-wise comparison; floats within a relative tolerance.
    pub fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = CoefficientValue::int(0);
        let scale = self
            .coeffs
            .iter()
            .chain(o.coeffs.iter())
            .map(|c| c.to_complex().norm())
            .fold(1.0f64, f64::max);
        (0..n).all(|i| {
            let a = self.coeffs.get(i).unwrap_or(&z);
            let b = o.coeffs.get(i).unwrap_or(&z);
            if a.is_exact() && b.is_exact() {
                a.approx_eq(b, 0.0)
            } else {
                (a.to_complex() - b.to_complex()).norm() <= tol * scale
            }
        })
    }
}

fn is_hard_zero(c: &CoefficientValue) -> bool {
    match c {
        CoefficientValue::Exact { .. } => c.is_zero(),
        CoefficientValue::Float(z) => z.norm() == 0.0,
    }
}

/// Multiplicity of `x0` as a root, with float remainders judged against `FLOAT_TOL`.
pub fn root_multiplicity(p: &Poly, x0: &CoefficientValue) -> usize {
    let mut m = 0;
    let mut cur = p.clone();
    loop {
        if cur.degree().is_none() {
            return m;
        }
        let scale = cur.coeffs.iter().map(|c| c.to_complex().norm()).fold(1.0, f64::max);
        let (q, r) = cur.div_linear(x0);
        let zero = if r.is_exact() { r.is_zero() } else { r.to_complex().norm() < FLOAT_TOL * scale * 1e3 };
        if !zero {
            return m;
        }
        m += 1;
        cur = q;
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})X")?,
                _ => write!(f, "({c})X^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
