//! The truncated `(g, O)`-module spanned by `f_{2k}`, `|k| ≤ K_max`, with the
//! raising and lowering operators `R f_{2k} = (1+k) f_{2k+2}`,
//! `L f_{2k} = (1−k) f_{2k−2}`, the involutions `ω f_{2k} = λ(k) f_{−2k}`,
//! and the two extensions of the discrete series by the trivial module.
//!
//! Rotations act on `f_{2k}` through the formal character `e^{2kit}`, kept as
//! its index `k`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A finite combination `Σ c_k f_{2k}`.
pub type Vector = BTreeMap<i64, i64>;

fn clean(mut v: Vector) -> Vector {
    v.retain(|_, c| *c != 0);
    v
}

#[derive(Debug, Clone)]
pub struct TruncatedGOModule {
    pub k_max: i64,
    lambda: BTreeMap<i64, i64>,
}

impl TruncatedGOModule {
    pub fn new(k_max: i64, lambda: impl Fn(i64) -> i64) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::Truncation(k_max));
        }
        Ok(Self { k_max, lambda: (-k_max..=k_max).map(|k| (k, lambda(k))).collect() })
    }

    /// `λ ≡ sign`.
    pub fn constant(k_max: i64, sign: i64) -> Result<Self> {
        Self::new(k_max, |_| sign)
    }

    pub fn lambda(&self, k: i64) -> i64 {
        self.lambda[&k]
    }

    fn check(&self, k: i64) -> Result<()> {
        if k.abs() >= self.k_max {
            return Err(Error::Truncation(k));
        }
        Ok(())
    }

    pub fn apply_r(&self, k: i64) -> Result<(i64, i64)> {
        self.check(k)?;
        Ok((1 + k, k + 1))
    }

    pub fn apply_l(&self, k: i64) -> Result<(i64, i64)> {
        self.check(k)?;
        Ok((1 - k, k - 1))
    }

    pub fn omega(&self, k: i64) -> (i64, i64) {
        (self.lambda(k), -k)
    }

    fn map(&self, v: &Vector, f: impl Fn(i64) -> Result<(i64, i64)>) -> Result<Vector> {
        let mut out = Vector::new();
        for (&k, &c) in v {
            let (a, k2) = f(k)?;
            *out.entry(k2).or_insert(0) += a * c;
        }
        Ok(clean(out))
    }

    pub fn r(&self, v: &Vector) -> Result<Vector> {
        self.map(v, |k| self.apply_r(k))
    }

    pub fn l(&self, v: &Vector) -> Result<Vector> {
        self.map(v, |k| self.apply_l(k))
    }

    pub fn w(&self, v: &Vector) -> Vector {
        self.map(v, |k| Ok(self.omega(k))).expect("ω is defined everywhere")
    }

    /// Indices where both `ωR` and `Lω` are defined.
    fn interior(&self) -> impl Iterator<Item = i64> {
        (1 - self.k_max)..self.k_max
    }

    /// `ω² = 1` and `ωR = Lω` on the interior (`ω f_{2k} ∈ C f_{−2k}` holds by
    /// construction).
    pub fn verify_omega_structure(&self) -> bool {
        let basis = |k: i64| Vector::from([(k, 1)]);
        let square = (-self.k_max..=self.k_max).all(|k| self.w(&self.w(&basis(k))) == basis(k));
        let commute = self.interior().all(|k| {
            let lhs = self.r(&basis(k)).map(|v| self.w(&v));
            let rhs = self.l(&self.w(&basis(k)));
            lhs.is_ok() && lhs == rhs
        });
        square && commute
    }
}

/// All `λ : [−K, K] → {±1}` making `ω` a valid structure, found by
/// propagating the equalities forced by `ωR = Lω` (`(1+k)(λ(k+1) − λ(k)) = 0`)
/// and `ω² = 1` (`λ(k)λ(−k) = 1`). Returns `None` if a continuous family
/// survives.
pub fn solve_lambda_structures(k_max: i64) -> Option<Vec<BTreeMap<i64, i64>>> {
    let idx: Vec<i64> = (-k_max..=k_max).collect();
    let pos = |k: i64| (k + k_max) as usize;
    let mut parent: Vec<usize> = (0..idx.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for k in (1 - k_max)..k_max {
        if 1 + k != 0 {
            let (a, b) = (find(&mut parent, pos(k)), find(&mut parent, pos(k + 1)));
            parent[a] = b;
        }
    }
    // classes of the equality relation on which λ(k)λ(−k) = 1 forces λ² = 1
    let forced: BTreeSet<usize> = idx
        .iter()
        .filter_map(|&k| {
            let a = find(&mut parent, pos(k));
            (a == find(&mut parent, pos(-k))).then_some(a)
        })
        .collect();
    // λ(−k) = λ(k)⁻¹ glues classes; since ±1 are self-inverse the signs agree
    let mut glued = parent.clone();
    for &k in &idx {
        let (a, b) = (find(&mut glued, pos(k)), find(&mut glued, pos(-k)));
        glued[a] = b;
    }
    let roots: BTreeSet<usize> = (0..idx.len()).map(|i| find(&mut glued, i)).collect();
    let forced: BTreeSet<usize> = forced.into_iter().map(|a| find(&mut glued, a)).collect();
    if forced != roots {
        return None;
    }
    let roots: Vec<usize> = roots.into_iter().collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << roots.len()) {
        let lam = idx
            .iter()
            .map(|&k| {
                let r = find(&mut glued, pos(k));
                let bit = mask >> roots.iter().position(|x| *x == r).unwrap() & 1;
                (k, if bit == 1 { -1 } else { 1 })
            })
            .collect();
        out.push(lam);
    }
    Some(out)
}

/// `pr(f_{2k}) = ∫₀^π e^{2kiθ} dθ`, as a multiple of `π`.
pub fn projection(k: i64) -> i64 {
    i64::from(k == 0)
}

/// The sign twist `f_{2k} ↦ sign(k) f_{2k}`.
pub fn sign_twist(v: &Vector) -> Vector {
    clean(v.iter().map(|(&k, &c)| (k, k.signum() * c)).collect())
}

/// `pr` kills exactly the `f_{2k}` with `k ≠ 0`; that kernel is stable under
/// `R` and `L`; the sign twist intertwines `ω⁺` with `ω⁻` and commutes with
/// `R`, `L` on it.
pub fn verify_extension_structure(k_max: i64) -> Result<bool> {
    if k_max < 3 {
        return Err(Error::Truncation(k_max));
    }
    let plus = TruncatedGOModule::constant(k_max, 1)?;
    let minus = TruncatedGOModule::constant(k_max, -1)?;
    let basis = |k: i64| Vector::from([(k, 1)]);
    let kernel: Vec<i64> = (-k_max..=k_max).filter(|&k| k != 0).collect();
    let pr_ok = (-k_max..=k_max).all(|k| (projection(k) == 0) == (k != 0));
    let in_kernel = |v: &Vector| !v.contains_key(&0);
    let stable = kernel
        .iter()
        .filter(|k| k.abs() < k_max)
        .all(|&k| plus.r(&basis(k)).is_ok_and(|v| in_kernel(&v)) && plus.l(&basis(k)).is_ok_and(|v| in_kernel(&v)));
    let twist = kernel.iter().all(|&k| sign_twist(&plus.w(&basis(k))) == minus.w(&sign_twist(&basis(k))));
    let commutes = kernel.iter().filter(|k| k.abs() < k_max).all(|&k| {
        let b = basis(k);
        plus.r(&b).map(|v| sign_twist(&v)) == plus.r(&sign_twist(&b))
            && plus.l(&b).map(|v| sign_twist(&v)) == plus.l(&sign_twist(&b))
    });
    Ok(pr_ok && stable && twist && commutes)
}

/// `ω κ(t) = κ(−t) ω`: with `κ(t)f_{2k} = e^{2kit} f_{2k}` recorded by the
/// character index, `ω` sends index `k` to `−k`.
pub fn rotation_flip(m: &TruncatedGOModule) -> bool {
    (-m.k_max..=m.k_max).all(|k| m.omega(k).1 == -k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_examples() {
        let m = TruncatedGOModule::constant(5, 1).unwrap();
        assert_eq!(m.apply_r(1).unwrap(), (2, 2));
        assert_eq!(m.apply_l(1).unwrap().0, 0);
        assert_eq!(m.apply_r(-1).unwrap().0, 0);
        assert_eq!(m.apply_r(5), Err(Error::Truncation(5)));
    }

    #[test]
    fn omega_structures() {
        assert!(TruncatedGOModule::constant(6, 1).unwrap().verify_omega_structure());
        assert!(TruncatedGOModule::constant(6, -1).unwrap().verify_omega_structure());
        let alt = TruncatedGOModule::new(6, |k| if k.rem_euclid(2) == 0 { 1 } else { -1 }).unwrap();
        assert!(!alt.verify_omega_structure());
        let sols = solve_lambda_structures(6).unwrap();
        assert_eq!(sols.len(), 2);
        for s in &sols {
            let c = s[&0];
            assert!(s.values().all(|v| *v == c));
        }
    }

    #[test]
    fn extensions() {
        assert!(verify_extension_structure(4).unwrap());
        assert!(rotation_flip(&TruncatedGOModule::constant(4, -1).unwrap()));
    }
}
