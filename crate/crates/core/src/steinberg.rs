//! The Steinberg module as functions on `P¹` modulo constants, the open set
//! `U`, the cocycles `z_ℓ` and the section `φ₁` whose coboundary they are.
//!
//! Points of `P¹` away from the two torus fixed points are written in the
//! split torus coordinate `x` (see [`SplitEmbedding`]); `x = 0` is `x₁` and
//! `x = ∞` is `x₂`. The torus acts by `(t·F)(x) = F(t^{-1}x)`, which on `G`
//! is `g ↦ g·E(t)^{-1}`. Values live in `Z/p^M`.

use alloc::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gl2::{k_point, GL2Element, P1Point, P1Residue, SplitEmbedding};
use crate::padic::{mod_inv, q_pow, qi, residue, valuation};
use crate::Q;

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    a * b % m
}

/// A continuous homomorphism `ℓ = a·ord + b·lg : F^× → Z_p`, reduced mod `p^M`,
/// where `lg` is the logarithm coordinate of the principal units normalised
/// by `lg(1 + p) = 1` (`lg(5) = 1` for `p = 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalHomomorphism {
    pub p: u64,
    pub a: u128,
    pub b: u128,
    pub m: u32,
}

/// Working precision of the logarithm series, above `M`.
const LOG_GUARD: u32 = 4;

impl LocalHomomorphism {
    pub fn new(p: u64, a: i64, b: i64, m: u32) -> Result<Self> {
        if !crate::padic::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::ZeroLevel);
        }
        // products of residues modulo p^{M+guard+extra} must fit in u128
        let fits = (p as u128).checked_pow(m + LOG_GUARD + 8).is_some_and(|x| x < 1 << 64);
        if !fits {
            return Err(Error::Invalid(alloc::format!("precision p^{m} too large for p = {p}")));
        }
        let md = (p as u128).pow(m) as i128;
        Ok(Self { p, a: (a as i128).rem_euclid(md) as u128, b: (b as i128).rem_euclid(md) as u128, m })
    }

    pub fn ord(p: u64, m: u32) -> Result<Self> {
        Self::new(p, 1, 0, m)
    }

    pub fn log_coordinate(p: u64, m: u32) -> Result<Self> {
        Self::new(p, 0, 1, m)
    }

    pub fn modulus(&self) -> u128 {
        (self.p as u128).pow(self.m)
    }

    /// `c₁·self + c₂·other`.
    pub fn combine(&self, c1: i64, other: &Self, c2: i64) -> Result<Self> {
        if self.p != other.p || self.m != other.m {
            return Err(Error::LevelMismatch(self.m, other.m));
        }
        let md = self.modulus() as i128;
        let f = |x: u128, y: u128| (c1 as i128 * x as i128 + c2 as i128 * y as i128).rem_euclid(md);
        Self::new(self.p, f(self.a, other.a) as i64, f(self.b, other.b) as i64, self.m)
    }

    /// `ℓ(x)` for `x ∈ Q^×`.
    pub fn eval(&self, x: &Q) -> Result<u128> {
        let md = self.modulus();
        let v = valuation(x, self.p)?;
        let ord_part = (v as i128 * self.a as i128).rem_euclid(md as i128) as u128;
        if self.b == 0 {
            return Ok(ord_part);
        }
        let u = x * q_pow(self.p, -v);
        Ok((ord_part + mulmod(self.b, unit_log_coordinate(self.p, self.m, &u)?, md)) % md)
    }
}

/// `log(v) mod p^K` for `v ≡ 1 mod p` given as a residue modulo `p^{K+E}`.
fn log_mod(p: u64, k: u32, v: u128) -> u128 {
    let pk = (p as u128).pow(k);
    let extra = 8u32;
    let big = (p as u128).pow(k + extra);
    let y = (v + big - 1) % big;
    if y == 0 {
        return 0;
    }
    let mut nu_y = 0u32;
    let mut t = y;
    while t.is_multiple_of(p as u128) {
        t /= p as u128;
        nu_y += 1;
    }
    let mut acc = 0u128;
    let mut yn = 1u128;
    for n in 1u64.. {
        yn = mulmod(yn, y, big);
        let mut e = 0u32;
        let mut n1 = n;
        while n1 % p == 0 {
            n1 /= p;
            e += 1;
        }
        let vt = (n as u32).saturating_mul(nu_y).saturating_sub(e);
        if vt >= k && (n as u32) * nu_y > k + 2 * extra {
            break;
        }
        if vt >= k || e > extra {
            continue;
        }
        let term = (yn / (p as u128).pow(e)) % pk;
        let term = mulmod(term, mod_inv(n1 as u128 % pk, pk).expect("unit"), pk);
        acc = if n % 2 == 1 { (acc + term) % pk } else { (acc + pk - term) % pk };
    }
    acc
}

/// `lg(u) mod p^M` for a `p`-adic unit `u`, torsion killed by `u ↦ u^{p−1}`
/// (`u²` for `p = 2`).
pub fn unit_log_coordinate(p: u64, m: u32, u: &Q) -> Result<u128> {
    let k = m + LOG_GUARD;
    let big = (p as u128).pow(k + 8);
    let r = residue(u, big)?;
    if r % p as u128 == 0 {
        return Err(Error::Invalid("not a unit".into()));
    }
    let (e, gen) = if p == 2 { (2u128, 5u128) } else { (p as u128 - 1, p as u128 + 1) };
    let pw = |x: u128| crate::padic::mod_pow(x, e, big);
    let num = log_mod(p, k, pw(r));
    let den = log_mod(p, k, pw(gen));
    let mut sh = 0u32;
    let mut d = den;
    while d.is_multiple_of(p as u128) {
        d /= p as u128;
        sh += 1;
    }
    let pm = (p as u128).pow(m);
    let n = num / (p as u128).pow(sh);
    Ok(mulmod(n % pm, mod_inv(d % pm, pm).expect("unit"), pm))
}

/// An element of `C(P¹(Z/p^N), Z/p^M)`, optionally modulo constants.
#[derive(Debug, Clone)]
pub struct SteinbergElement {
    pub p: u64,
    pub level: u32,
    pub m: u32,
    pub modulo_constants: bool,
    table: BTreeMap<P1Residue, u128>,
}

impl SteinbergElement {
    /// Values at the canonical representatives of the classes.
    pub fn tabulate(p: u64, level: u32, m: u32, mut f: impl FnMut(&P1Point) -> Result<u128>) -> Result<Self> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        let md = (p as u128).pow(m);
        let table = P1Residue::all(p, level)
            .into_iter()
            .map(|r| Ok((r, f(&r.representative())? % md)))
            .collect::<Result<_>>()?;
        Ok(Self { p, level, m, modulo_constants: true, table })
    }

    pub fn modulus(&self) -> u128 {
        (self.p as u128).pow(self.m)
    }

    pub fn table(&self) -> &BTreeMap<P1Residue, u128> {
        &self.table
    }

    pub fn at(&self, r: P1Residue) -> u128 {
        self.table[&r]
    }

    fn zip(&self, o: &Self, f: impl Fn(u128, u128) -> u128) -> Result<Self> {
        if self.level != o.level || self.m != o.m || self.p != o.p {
            return Err(Error::LevelMismatch(self.level, o.level));
        }
        let table = self.table.iter().map(|(k, v)| (*k, f(*v, o.table[k]) % self.modulus())).collect();
        Ok(Self { table, ..self.clone() })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        let md = self.modulus();
        self.zip(o, move |a, b| a + md - b)
    }

    pub fn scale(&self, c: i64) -> Self {
        let md = self.modulus() as i128;
        let table = self.table.iter().map(|(k, v)| (*k, (c as i128 * *v as i128).rem_euclid(md) as u128)).collect();
        Self { table, ..self.clone() }
    }

    /// The constant `c` with `self = c`, if any.
    pub fn as_constant(&self) -> Option<u128> {
        let mut it = self.table.values();
        let c = *it.next()?;
        it.all(|v| *v == c).then_some(c)
    }

    pub fn is_zero(&self) -> bool {
        match self.as_constant() {
            Some(c) => self.modulo_constants || c == 0,
            None => false,
        }
    }

    /// Equality, up to a constant when either side is taken modulo constants.
    pub fn equals(&self, o: &Self) -> bool {
        match self.sub(o) {
            Ok(d) => match d.as_constant() {
                Some(c) => c == 0 || self.modulo_constants || o.modulo_constants,
                None => false,
            },
            Err(_) => false,
        }
    }
}

/// A point of `P¹` in torus coordinates: `Some(x)` on `T`, `None` for
/// `x₂ = ∞`; `x₁` is `Some(0)`.
pub fn torus_point(emb: &SplitEmbedding, z: &P1Point) -> Option<Q> {
    if z.coordinate().is_some_and(|c| c.is_zero()) {
        return None;
    }
    match emb.torus_coordinate(z) {
        Ok(x) => Some(x),
        Err(_) => Some(qi(0)),
    }
}

/// The point with torus coordinate `x` (including `x₁`, `x₂`).
pub fn point_of(emb: &SplitEmbedding, x: Option<&Q>) -> P1Point {
    match x {
        None => P1Point::finite(qi(0)),
        Some(x) if x.is_zero() => P1Point::finite(emb.c_const().recip()),
        Some(x) => emb.point_of(x),
    }
}

/// `x ∈ t·U` with `U = {ν(x) ≥ 0} ∪ {x₁}`.
fn in_shifted_u(x: Option<&Q>, p: u64, k: i64) -> Result<bool> {
    Ok(match x {
        None => false,
        Some(x) if x.is_zero() => true,
        Some(x) => valuation(x, p)? >= k,
    })
}

/// The open compact set `U` in `P¹`.
#[derive(Debug, Clone, Copy)]
pub struct OpenSetU {
    pub emb: SplitEmbedding,
}

impl OpenSetU {
    pub fn contains(&self, z: &P1Point) -> Result<bool> {
        in_shifted_u(torus_point(&self.emb, z).as_ref(), self.emb.field.p, 0)
    }

    pub fn indicator(&self, level: u32, m: u32) -> Result<SteinbergElement> {
        let mut e = SteinbergElement::tabulate(self.emb.field.p, level, m, |z| Ok(self.contains(z)? as u128))?;
        e.modulo_constants = false;
        Ok(e)
    }
}

fn check_level(level: u32, t: &Q, p: u64) -> Result<()> {
    let k = valuation(t, p)?.unsigned_abs() as u32;
    if level < k + 1 {
        return Err(Error::Refinement { need: k + 1, have: level });
    }
    Ok(())
}

/// `z_ℓ(t)(x) = ℓ(x)1_U(x) − ℓ(t^{-1}x)1_U(t^{-1}x)`, continued to `x₁, x₂`.
pub fn cocycle_value(emb: &SplitEmbedding, ell: &LocalHomomorphism, t: &Q, x: Option<&Q>) -> Result<u128> {
    let p = emb.field.p;
    let md = ell.modulus();
    let k = valuation(t, p)?;
    let in_u = in_shifted_u(x, p, 0)?;
    let in_tu = in_shifted_u(x, p, k)?;
    // = ℓ(x)(1_U − 1_{tU}) + ℓ(t)1_{tU}
    let mut v = if in_tu { ell.eval(t)? } else { 0 };
    if in_u != in_tu {
        let lx = ell.eval(x.expect("boundary points lie in both or neither"))?;
        v = if in_u { v + lx } else { v + md - lx };
    }
    Ok(v % md)
}

pub fn cocycle_z(emb: &SplitEmbedding, ell: &LocalHomomorphism, t: &Q, level: u32) -> Result<SteinbergElement> {
    check_level(level, t, emb.field.p)?;
    SteinbergElement::tabulate(emb.field.p, level, ell.m, |z| cocycle_value(emb, ell, t, torus_point(emb, z).as_ref()))
}

/// `(t·F)` evaluated through a pointwise description of `F`.
pub fn act(
    emb: &SplitEmbedding,
    t: &Q,
    level: u32,
    m: u32,
    f: impl Fn(Option<&Q>) -> Result<u128>,
) -> Result<SteinbergElement> {
    SteinbergElement::tabulate(emb.field.p, level, m, |z| {
        let x = torus_point(emb, z);
        let moved = x.map(|x| if x.is_zero() { x } else { x / t });
        f(moved.as_ref())
    })
}

/// `z(t₁t₂) = z(t₁) + t₁·z(t₂)` on every class of `P¹(Z/p^N)`.
pub fn check_cocycle_identity(emb: &SplitEmbedding, ell: &LocalHomomorphism, t1: &Q, t2: &Q, level: u32) -> Result<bool> {
    let t12 = t1 * t2;
    let lhs = cocycle_z(emb, ell, &t12, level)?;
    check_level(level, t2, emb.field.p)?;
    let first = cocycle_z(emb, ell, t1, level)?;
    let second = act(emb, t1, level, ell.m, |x| cocycle_value(emb, ell, t2, x))?;
    Ok(lhs.equals(&first.add(&second)?))
}

/// `Λ₁(g) = d + x₁c` and `Λ₂(g) = d + x₂c`.
pub fn lambdas(emb: &SplitEmbedding, g: &GL2Element) -> (Q, Q) {
    (&g.d + &g.c * emb.c_const().recip(), g.d.clone())
}

/// `φ₁(g) = ℓ(Λ₂(g))` on `φ(g) ∈ U`, `ℓ(Λ₁(g))` otherwise.
pub fn phi1_value(emb: &SplitEmbedding, ell: &LocalHomomorphism, g: &GL2Element) -> Result<u128> {
    let (l1, l2) = lambdas(emb, g);
    let in_u = OpenSetU { emb: *emb }.contains(&g.point())?;
    let lam = if in_u { l2 } else { l1 };
    if lam.is_zero() {
        return Err(Error::ExcludedPoint);
    }
    ell.eval(&lam)
}

/// `φ₁` on the representatives `k_z`.
pub fn phi1_section(emb: &SplitEmbedding, ell: &LocalHomomorphism, level: u32) -> Result<SteinbergElement> {
    let mut e = SteinbergElement::tabulate(emb.field.p, level, ell.m, |z| phi1_value(emb, ell, &k_point(emb.field, z)))?;
    e.modulo_constants = false;
    Ok(e)
}

/// `t·φ₁ − φ₁`, i.e. `g ↦ φ₁(g E(t)^{-1}) − φ₁(g)` on the `k_z`.
pub fn phi1_coboundary(emb: &SplitEmbedding, ell: &LocalHomomorphism, t: &Q, level: u32) -> Result<SteinbergElement> {
    let ti = emb.element(&t.recip())?;
    let md = ell.modulus();
    let mut e = SteinbergElement::tabulate(emb.field.p, level, ell.m, |z| {
        let k = k_point(emb.field, z);
        Ok((phi1_value(emb, ell, &k.mul(&ti))? + md - phi1_value(emb, ell, &k)?) % md)
    })?;
    e.modulo_constants = false;
    Ok(e)
}

/// For `ℓ(t) = 0`: `z_ℓ(t) = ±ℓ·1_{U_t}` with `U_t = U ∖ tU` (sign `+`) or
/// `tU ∖ U` (sign `−`), a compact subset of `T`.
pub fn compact_support_form(
    emb: &SplitEmbedding,
    ell: &LocalHomomorphism,
    t: &Q,
    level: u32,
) -> Result<(i8, SteinbergElement)> {
    if ell.eval(t)? != 0 {
        return Err(Error::Invalid("compact support form needs ℓ(t) = 0".into()));
    }
    check_level(level, t, emb.field.p)?;
    let p = emb.field.p;
    let k = valuation(t, p)?;
    let sign: i8 = if k >= 0 { 1 } else { -1 };
    let (lo, hi) = if k >= 0 { (0, k) } else { (k, 0) };
    let md = ell.modulus();
    let mut e = SteinbergElement::tabulate(p, level, ell.m, |z| match torus_point(emb, z) {
        Some(x) if !x.is_zero() => {
            let v = valuation(&x, p)?;
            if (lo..hi).contains(&v) {
                let l = ell.eval(&x)?;
                Ok(if sign > 0 { l } else { (md - l) % md })
            } else {
                Ok(0)
            }
        }
        _ => Ok(0),
    })?;
    e.modulo_constants = false;
    Ok((sign, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{qr, PrimeLocalField};
    use crate::torus::{LocalTorusCase, TorusKind};

    fn emb(p: u64) -> SplitEmbedding {
        SplitEmbedding::new(&LocalTorusCase::new(TorusKind::Split, PrimeLocalField::prime(p).unwrap(), 0)).unwrap()
    }

    #[test]
    fn log_normalisation() {
        assert_eq!(unit_log_coordinate(3, 8, &qi(4)).unwrap(), 1);
        assert_eq!(unit_log_coordinate(5, 6, &qi(6)).unwrap(), 1);
        assert_eq!(unit_log_coordinate(2, 8, &qi(5)).unwrap(), 1);
        // torsion dies
        assert_eq!(unit_log_coordinate(3, 8, &qi(-1)).unwrap(), 0);
        assert_eq!(unit_log_coordinate(2, 8, &qi(-1)).unwrap(), 0);
        // additivity
        let l = |x: i64| unit_log_coordinate(3, 8, &qi(x)).unwrap();
        assert_eq!((l(4) * 2) % 6561, l(16));
        assert_eq!((l(7) + l(10)) % 6561, l(70));
        let l2 = |x: Q| unit_log_coordinate(2, 8, &x).unwrap();
        assert_eq!((l2(qi(3)) + l2(qr(1, 7))) % 256, l2(qr(3, 7)));
    }

    #[test]
    fn ord_cocycle_is_translate() {
        let e = emb(3);
        let ord = LocalHomomorphism::ord(3, 8).unwrap();
        let t = qi(3) * qi(7);
        let z = cocycle_z(&e, &ord, &t, 4).unwrap();
        let tu = act(&e, &t, 4, 8, |x| Ok(in_shifted_u(x, 3, 0)? as u128)).unwrap();
        assert!(z.equals(&tu));
        assert!(cocycle_z(&e, &ord, &qi(1), 4).unwrap().is_zero());
    }

    #[test]
    fn identity_and_coboundary() {
        let e = emb(3);
        let ell = LocalHomomorphism::new(3, 2, 5, 8).unwrap();
        let (t1, t2) = (qr(9, 2), qr(7, 3));
        assert!(check_cocycle_identity(&e, &ell, &t1, &t2, 4).unwrap());
        assert!(check_cocycle_identity(&e, &ell, &t1, &t1.recip(), 4).unwrap());
        let cob = phi1_coboundary(&e, &ell, &t1, 4).unwrap();
        let z = cocycle_z(&e, &ell, &t1, 4).unwrap();
        let d = cob.sub(&z).unwrap();
        assert_eq!(d.as_constant(), Some((ell.modulus() - ell.eval(&t1).unwrap()) % ell.modulus()));
    }

    #[test]
    fn compact_form() {
        let e = emb(3);
        let lg = LocalHomomorphism::log_coordinate(3, 8).unwrap();
        for t in [qi(9), qr(1, 27)] {
            let (_, c) = compact_support_form(&e, &lg, &t, 5).unwrap();
            let z = cocycle_z(&e, &lg, &t, 5).unwrap();
            let mut z = z;
            z.modulo_constants = false;
            assert!(z.equals(&c));
        }
    }
}
