//! Valuations, absolute values and residue rings over rational representatives.

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Q;

/// The base field `F_P`: residue cardinality `q = p^f`, uniformizer `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeLocalField {
    pub p: u64,
    pub f: u32,
    pub q: u64,
}

impl PrimeLocalField {
    pub fn new(p: u64, f: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if f == 0 {
            return Err(Error::Invalid("residue degree must be at least 1".into()));
        }
        let q = p
            .checked_pow(f)
            .ok_or_else(|| Error::Invalid("q overflows".into()))?;
        Ok(Self { p, f, q })
    }

    /// `Q_p` itself.
    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, 1)
    }

    pub fn require_enumerable(&self) -> Result<()> {
        if self.f != 1 {
            return Err(Error::NeedsPrimeResidueField(self.f));
        }
        Ok(())
    }

    pub fn element(&self, value: Q) -> PAdicRational {
        PAdicRational { value, field: *self }
    }

    /// `p^n` as an unsigned modulus; panics past 2^126.
    pub fn modulus(&self, n: u32) -> u128 {
        (self.p as u128).pow(n)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of `F_P` modelled by an exact rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicRational {
    pub value: Q,
    pub field: PrimeLocalField,
}

impl PAdicRational {
    pub fn valuation(&self) -> Result<i64> {
        valuation(&self.value, self.field.p)
    }

    pub fn absolute_value(&self) -> Result<Q> {
        Ok(q_pow(self.field.q, -self.valuation()?))
    }

    /// `x / p^ν(x)`.
    pub fn unit_part(&self) -> Result<Q> {
        let v = self.valuation()?;
        Ok(&self.value * q_pow(self.field.p, -v))
    }
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (d, r) = n.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        n = d;
        v += 1;
    }
}

/// `ord_p(x)`.
pub fn valuation(x: &Q, p: u64) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let p = BigInt::from(p);
    Ok(int_valuation(x.numer(), &p) - int_valuation(x.denom(), &p))
}

pub fn absolute_value(x: &Q, field: &PrimeLocalField) -> Result<Q> {
    Ok(q_pow(field.q, -valuation(x, field.p)?))
}

/// `base^k` for any integer exponent.
pub fn q_pow(base: u64, k: i64) -> Q {
    let b = BigInt::from(base).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Q::from_integer(b)
    } else {
        Q::new(BigInt::one(), b)
    }
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical representatives of `(Z/p^N)^×` in increasing order.
pub fn unit_residues(field: &PrimeLocalField, n: u32) -> Result<Vec<u64>> {
    field.require_enumerable()?;
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    let m = field.p.pow(n);
    Ok((1..m).filter(|u| u % field.p != 0).collect())
}

pub fn mod_pow(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m` for `gcd(a, m) = 1`.
pub fn mod_inv(a: u128, m: u128) -> Option<u128> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u128)
}

/// Image of a `p`-integral rational in `Z/m`, where `m` is a power of `p`.
pub fn residue(x: &Q, m: u128) -> Result<u128> {
    let mb = BigInt::from(m);
    let n = x.numer().mod_floor(&mb).to_u128().unwrap();
    let d = x.denom().mod_floor(&mb).to_u128().unwrap();
    let di = mod_inv(d, m).ok_or(Error::NotIntegral)?;
    Ok(n * di % m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&qi(9), 3), Ok(2));
        assert_eq!(valuation(&qr(1, 3), 3), Ok(-1));
        assert_eq!(valuation(&qi(12), 2), Ok(2));
        assert_eq!(valuation(&qi(0), 2), Err(Error::ZeroValuation));
    }

    #[test]
    fn absolute_value_examples() {
        let f3 = PrimeLocalField::prime(3).unwrap();
        let f5 = PrimeLocalField::prime(5).unwrap();
        assert_eq!(absolute_value(&qi(3), &f3).unwrap(), qr(1, 3));
        assert_eq!(absolute_value(&qi(1), &f5).unwrap(), qi(1));
        assert_eq!(absolute_value(&qr(4, 9), &f3).unwrap(), qi(9));
    }

    #[test]
    fn residues_examples() {
        let f3 = PrimeLocalField::prime(3).unwrap();
        let f2 = PrimeLocalField::prime(2).unwrap();
        assert_eq!(unit_residues(&f3, 1).unwrap(), [1, 2]);
        assert_eq!(unit_residues(&f3, 2).unwrap(), [1, 2, 4, 5, 7, 8]);
        assert_eq!(unit_residues(&f2, 3).unwrap(), [1, 3, 5, 7]);
        for p in [2, 3, 5] {
            let f = PrimeLocalField::prime(p).unwrap();
            for n in 1..5 {
                let c = unit_residues(&f, n).unwrap().len() as u64;
                assert_eq!(c, p.pow(n - 1) * (p - 1));
            }
        }
        let f9 = PrimeLocalField::new(3, 2).unwrap();
        assert_eq!(f9.q, 9);
        assert_eq!(unit_residues(&f9, 1), Err(Error::NeedsPrimeResidueField(2)));
    }

    #[test]
    fn residue_of_fraction() {
        assert_eq!(residue(&qr(1, 2), 9).unwrap(), 5);
        assert_eq!(residue(&qr(-1, 1), 27).unwrap(), 26);
        assert_eq!(residue(&qr(1, 3), 9), Err(Error::NotIntegral));
    }
}
