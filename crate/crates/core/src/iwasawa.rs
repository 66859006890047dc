//! Finite-level Iwasawa algebras `Q[G_N]` for `G_N = (Z/p^N)^r`: convolution,
//! degree, the maps `φ : G → I/I²` and `ψ : I/I² → Hom(G, Z/p^M)`, and
//! boundedness of compatible families.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{is_prime, residue, valuation};
use crate::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteLevelGroup {
    pub p: u64,
    pub r: u32,
    pub n: u32,
}

impl FiniteLevelGroup {
    pub fn new(p: u64, r: u32, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        if r == 0 || p.checked_pow(n * r).is_none_or(|o| o > 10_000_000) {
            return Err(Error::Invalid("group too large to enumerate".into()));
        }
        Ok(Self { p, r, n })
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.n)
    }

    pub fn order(&self) -> usize {
        self.modulus().pow(self.r) as usize
    }

    /// Coordinates of the element with index `i`.
    pub fn coords(&self, mut i: usize) -> Vec<u64> {
        let m = self.modulus() as usize;
        (0..self.r)
            .map(|_| {
                let c = (i % m) as u64;
                i /= m;
                c
            })
            .collect()
    }

    pub fn index(&self, c: &[u64]) -> usize {
        let m = self.modulus();
        c.iter().rev().fold(0usize, |acc, x| acc * m as usize + (x % m) as usize)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.coords(a), self.coords(b));
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
        self.index(&s)
    }

    pub fn neg(&self, a: usize) -> usize {
        let m = self.modulus();
        let c: Vec<u64> = self.coords(a).iter().map(|x| (m - x) % m).collect();
        self.index(&c)
    }

    /// The `i`-th standard generator.
    pub fn basis(&self, i: u32) -> usize {
        let mut c = vec![0; self.r as usize];
        c[i as usize] = 1;
        self.index(&c)
    }

    /// Reduction to level `n' ≤ n`.
    pub fn reduce(&self, a: usize, to: &Self) -> usize {
        to.index(&self.coords(a))
    }
}

/// An element `Σ μ(g) d_g` of `Q[G_N]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAlgebraElement {
    pub group: FiniteLevelGroup,
    coeffs: Vec<Q>,
}

impl GroupAlgebraElement {
    pub fn zero(group: FiniteLevelGroup) -> Self {
        Self { group, coeffs: vec![Q::zero(); group.order()] }
    }

    /// `d_g`.
    pub fn dirac(group: FiniteLevelGroup, g: usize) -> Self {
        let mut e = Self::zero(group);
        e.coeffs[g] = Q::one();
        e
    }

    pub fn from_coeffs(group: FiniteLevelGroup, coeffs: Vec<Q>) -> Result<Self> {
        if coeffs.len() != group.order() {
            return Err(Error::Invalid("coefficient vector has the wrong length".into()));
        }
        Ok(Self { group, coeffs })
    }

    pub fn coeff(&self, g: usize) -> &Q {
        &self.coeffs[g]
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    /// All coefficients lie in `Z_(p)`.
    pub fn is_integral(&self) -> bool {
        self.min_valuation().is_none_or(|v| v >= 0)
    }

    /// Smallest `p`-adic valuation of a non-zero coefficient.
    pub fn min_valuation(&self) -> Option<i64> {
        self.coeffs.iter().filter(|c| !c.is_zero()).map(|c| valuation(c, self.group.p).unwrap()).min()
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.group != o.group {
            return Err(Error::LevelMismatch(self.group.n, o.group.n));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self { group: self.group, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self { group: self.group, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn convolve(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let g = self.group;
        let mut out = Self::zero(g);
        for (h, a) in self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (k, b) in o.coeffs.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                let s = g.add(h, k);
                out.coeffs[s] += a * b;
            }
        }
        Ok(out)
    }

    pub fn degree(&self) -> Q {
        self.coeffs.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(usize) -> Q) -> Q {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(g, c)| c * f(g)).sum()
    }

    /// Pushforward to a lower level.
    pub fn pushforward(&self, to: FiniteLevelGroup) -> Result<Self> {
        if to.p != self.group.p || to.r != self.group.r || to.n > self.group.n {
            return Err(Error::LevelMismatch(self.group.n, to.n));
        }
        let mut out = Self::zero(to);
        for (g, c) in self.coeffs.iter().enumerate() {
            out.coeffs[self.group.reduce(g, &to)] += c;
        }
        Ok(out)
    }
}

/// `φ(g) = d_g − d_0`.
pub fn phi_map(group: FiniteLevelGroup, g: usize) -> GroupAlgebraElement {
    GroupAlgebraElement::dirac(group, g).sub(&GroupAlgebraElement::dirac(group, 0)).unwrap()
}

/// `(∫ ℓ_i dμ)_i mod p^{min(N, M)}` for the coordinate maps `ℓ_i`.
pub fn psi_class(mu: &GroupAlgebraElement, m: u32) -> Result<Vec<u64>> {
    if !mu.degree().is_zero() {
        return Err(Error::NotAugmentation);
    }
    let g = mu.group;
    let md = (g.p as u128).pow(g.n.min(m));
    (0..g.r as usize)
        .map(|i| {
            let v = mu.integrate(|x| Q::from_integer((g.coords(x)[i] as i64).into()));
            Ok(residue(&v, md)? as u64)
        })
        .collect()
}

/// Invariant factors `p^{e_i}` of a module `(Z/p^N)^cols / ⟨rows⟩`; entries
/// of the returned vector are the exponents (`N` for a free summand).
pub fn quotient_invariants(p: u64, n: u32, cols: usize, rows: &[Vec<(usize, i64)>]) -> Vec<u32> {
    let m = p.pow(n) as i128;
    let val = |x: i128| -> u32 {
        if x == 0 {
            return n;
        }
        let mut x = x;
        let mut v = 0;
        while x % p as i128 == 0 {
            x /= p as i128;
            v += 1;
        }
        v
    };
    let mut mat: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![0i128; cols];
            for &(c, v) in r {
                row[c] = (row[c] + v as i128).rem_euclid(m);
            }
            row
        })
        .filter(|r| r.iter().any(|x| *x != 0))
        .collect();
    let mut live_cols: Vec<usize> = (0..cols).collect();
    let mut out = Vec::new();
    while !live_cols.is_empty() {
        // pivot of least valuation
        let mut best: Option<(u32, usize, usize)> = None;
        for (ri, row) in mat.iter().enumerate() {
            for &c in &live_cols {
                let v = val(row[c]);
                if v < n && best.is_none_or(|b| v < b.0) {
                    best = Some((v, ri, c));
                }
            }
            if best.is_some_and(|b| b.0 == 0) {
                break;
            }
        }
        let Some((v, ri, c)) = best else { break };
        out.push(v);
        let pivot_row = mat.swap_remove(ri);
        let unit = pivot_row[c] / (p as i128).pow(v);
        let uinv = crate::padic::mod_inv(unit.rem_euclid(m) as u128, m as u128).unwrap() as i128;
        // clear column c in the other rows: each entry has valuation ≥ v
        for row in mat.iter_mut() {
            if row[c] == 0 {
                continue;
            }
            let f = (row[c] / (p as i128).pow(v)) * uinv % m;
            for &cc in &live_cols {
                row[cc] = (row[cc] - f * pivot_row[cc]).rem_euclid(m);
            }
        }
        // column operations clear the rest of the pivot row without changing the quotient
        live_cols.retain(|&x| x != c);
        mat.retain(|r| live_cols.iter().any(|&cc| r[cc] != 0));
    }
    out.extend(live_cols.iter().map(|_| n));
    out.retain(|&e| e > 0);
    out
}

/// Relations of `I_N/I_N²` in the basis `e_g = d_g − d_0` (`g ≠ 0`):
/// `e_{g+h} − e_g − e_h`.
fn augmentation_relations(g: FiniteLevelGroup) -> (usize, Vec<Vec<(usize, i64)>>) {
    let ord = g.order();
    let col = |x: usize| x - 1;
    let mut rows = Vec::new();
    for a in 1..ord {
        for b in a..ord {
            let s = g.add(a, b);
            let mut r = vec![(col(a), -1), (col(b), -1)];
            if s != 0 {
                r.push((col(s), 1));
            }
            rows.push(r);
        }
    }
    (ord - 1, rows)
}

/// Exponents of the invariant factors of `I_N/I_N²` over `Z/p^N`.
pub fn augmentation_quotient(g: FiniteLevelGroup) -> Vec<u32> {
    let (cols, rows) = augmentation_relations(g);
    quotient_invariants(g.p, g.n, cols, &rows)
}

/// `I_N/I_N² ≅ (Z/p^N)^r` and the classes `φ(e_i)` generate it.
pub fn phi_span_full_rank(g: FiniteLevelGroup) -> bool {
    let (cols, mut rows) = augmentation_relations(g);
    let inv = quotient_invariants(g.p, g.n, cols, &rows);
    if inv.len() != g.r as usize || inv.iter().any(|&e| e != g.n) {
        return false;
    }
    for i in 0..g.r {
        rows.push(vec![(g.basis(i) - 1, 1)]);
    }
    quotient_invariants(g.p, g.n, cols, &rows).is_empty()
}

/// Levels `1..=N_max` of a distribution, compatible under pushforward.
#[derive(Debug, Clone)]
pub struct CompatibleFamily {
    levels: Vec<GroupAlgebraElement>,
}

impl CompatibleFamily {
    pub fn new(levels: Vec<GroupAlgebraElement>) -> Result<Self> {
        for (k, w) in levels.windows(2).enumerate() {
            if w[1].pushforward(w[0].group)? != w[0] {
                return Err(Error::IncompatibleFamily(k as u32 + 1));
            }
        }
        if levels.is_empty() {
            return Err(Error::ZeroLevel);
        }
        Ok(Self { levels })
    }

    /// Build from a rule giving the level-`k` element.
    pub fn from_fn(
        p: u64,
        r: u32,
        n_max: u32,
        mut f: impl FnMut(FiniteLevelGroup) -> GroupAlgebraElement,
    ) -> Result<Self> {
        Self::new((1..=n_max).map(|k| Ok(f(FiniteLevelGroup::new(p, r, k)?))).collect::<Result<_>>()?)
    }

    pub fn levels(&self) -> &[GroupAlgebraElement] {
        &self.levels
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self { levels: self.levels.iter().map(|l| l.scale(c)).collect() }
    }
}

/// Boundedness of a family: the minimal coefficient valuations `v_k` can
/// only decrease with `k`; the family is bounded when they have stabilised
/// at the top level (`v_{N_max} = v_{N_max−1}`). The witness is `v_{N_max}`.
pub fn is_bounded(family: &CompatibleFamily) -> (bool, Option<i64>) {
    let vals: Vec<Option<i64>> = family.levels.iter().map(|l| l.min_valuation()).collect();
    let last = *vals.last().unwrap();
    let bounded = match vals.len() {
        1 => true,
        n => vals[n - 1] == vals[n - 2] || last.is_none(),
    };
    (bounded, last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{q_pow, qi};

    #[test]
    fn group_like_and_degree() {
        let g = FiniteLevelGroup::new(3, 2, 2).unwrap();
        let (a, b) = (g.index(&[1, 4]), g.index(&[7, 8]));
        let da = GroupAlgebraElement::dirac(g, a);
        let db = GroupAlgebraElement::dirac(g, b);
        assert_eq!(da.convolve(&db).unwrap(), GroupAlgebraElement::dirac(g, g.add(a, b)));
        assert_eq!(da.convolve(&GroupAlgebraElement::dirac(g, 0)).unwrap(), da);
        assert_eq!(da.scale(&qi(3)).add(&db.scale(&qi(2))).unwrap().degree(), qi(5));
        assert!(phi_map(g, a).degree().is_zero());
    }

    #[test]
    fn psi_examples() {
        let g = FiniteLevelGroup::new(3, 2, 2).unwrap();
        assert_eq!(psi_class(&phi_map(g, g.basis(0)), 8).unwrap(), vec![1, 0]);
        let (a, b) = (g.index(&[2, 5]), g.index(&[4, 1]));
        let prod = phi_map(g, a).convolve(&phi_map(g, b)).unwrap();
        assert_eq!(psi_class(&prod, 8).unwrap(), vec![0, 0]);
        let d = phi_map(g, g.add(a, b)).sub(&phi_map(g, a)).unwrap().sub(&phi_map(g, b)).unwrap();
        assert_eq!(psi_class(&d, 8).unwrap(), vec![0, 0]);
        assert_eq!(psi_class(&GroupAlgebraElement::dirac(g, a), 8), Err(Error::NotAugmentation));
    }

    #[test]
    fn quotient_rank() {
        for (p, n, r) in [(2, 2, 1), (3, 2, 1), (2, 1, 2), (3, 1, 2)] {
            let g = FiniteLevelGroup::new(p, r, n).unwrap();
            assert_eq!(augmentation_quotient(g), vec![n; r as usize]);
            assert!(phi_span_full_rank(g));
        }
    }

    #[test]
    fn boundedness() {
        let ones = CompatibleFamily::from_fn(3, 1, 4, |g| GroupAlgebraElement::dirac(g, 0)).unwrap();
        assert_eq!(is_bounded(&ones), (true, Some(0)));
        assert_eq!(is_bounded(&ones.scale(&q_pow(3, -3))), (true, Some(-3)));
        let haar = CompatibleFamily::from_fn(3, 1, 4, |g| {
            GroupAlgebraElement::from_coeffs(g, vec![q_pow(3, -(g.n as i64)); g.order()]).unwrap()
        })
        .unwrap();
        assert_eq!(is_bounded(&haar), (false, Some(-4)));
        let bad = CompatibleFamily::new(vec![
            GroupAlgebraElement::dirac(FiniteLevelGroup::new(3, 1, 1).unwrap(), 0),
            GroupAlgebraElement::dirac(FiniteLevelGroup::new(3, 1, 2).unwrap(), 1),
        ]);
        assert_eq!(bad.unwrap_err(), Error::IncompatibleFamily(1));
    }
}
