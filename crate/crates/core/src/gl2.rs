//! `GL₂(F)`, `P¹(F)`, the Iwasawa decomposition, level-`N` principal series
//! vectors, `δ_T` for the split torus, `T_P`, and the intertwining integral.
//!
//! Vectors satisfy `φ(bg) = μ_α(b)φ(g)` with `μ_α(b) = α^{ν(t₂/t₁)}` and are
//! stored by their values on the representatives `k_z` of `B(O)\GL₂(O) = P¹`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_traits::Zero;

use crate::coeff::CoefficientValue;
use crate::error::{Error, Result};
use crate::integrals::{unit_theta_integral, ConstantName, SteinbergDatum, SymbolicConstants, SymbolicValue};
use crate::padic::{q_pow, qi, residue, valuation, PrimeLocalField};
use crate::rational_forms::{LocalRationalFunction, SValue};
use crate::torus::{shell_volume, LocalTorusCase, ShellFunction, TorusCharacter, TorusKind, UnitClass, UnitGroup};
use crate::Q;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GL2Element {
    pub a: Q,
    pub b: Q,
    pub c: Q,
    pub d: Q,
    pub field: PrimeLocalField,
}

impl GL2Element {
    pub fn new(field: PrimeLocalField, a: Q, b: Q, c: Q, d: Q) -> Result<Self> {
        let g = Self { a, b, c, d, field };
        if g.det().is_zero() {
            return Err(Error::Invalid("singular matrix".into()));
        }
        Ok(g)
    }

    pub fn from_ints(field: PrimeLocalField, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(field, qi(a), qi(b), qi(c), qi(d))
    }

    pub fn identity(field: PrimeLocalField) -> Self {
        Self { a: qi(1), b: qi(0), c: qi(0), d: qi(1), field }
    }

    /// `ω = (0 −1; 1 0)`.
    pub fn omega(field: PrimeLocalField) -> Self {
        Self { a: qi(0), b: qi(-1), c: qi(1), d: qi(0), field }
    }

    pub fn diag(field: PrimeLocalField, t1: Q, t2: Q) -> Result<Self> {
        Self::new(field, t1, qi(0), qi(0), t2)
    }

    /// `g_ϖ = diag(ϖ, 1)`.
    pub fn g_varpi(field: PrimeLocalField) -> Self {
        Self { a: qi(field.p as i64), b: qi(0), c: qi(0), d: qi(1), field }
    }

    /// `n(x) = (1 x; 0 1)`.
    pub fn unipotent(field: PrimeLocalField, x: Q) -> Self {
        Self { a: qi(1), b: x, c: qi(0), d: qi(1), field }
    }

    pub fn det(&self) -> Q {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
            field: self.field,
        }
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self {
            a: &self.d / &det,
            b: -&self.b / &det,
            c: -&self.c / &det,
            d: &self.a / &det,
            field: self.field,
        }
    }

    pub fn is_upper(&self) -> bool {
        self.c.is_zero()
    }

    fn integral(&self, x: &Q) -> bool {
        x.is_zero() || valuation(x, self.field.p).is_ok_and(|v| v >= 0)
    }

    /// Entries in `O` and unit determinant.
    pub fn in_maximal_compact(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d].into_iter().all(|x| self.integral(x))
            && valuation(&self.det(), self.field.p) == Ok(0)
    }

    /// Equality in `GL₂/Z`.
    pub fn projectively_equal(&self, o: &Self) -> bool {
        let l = [&self.a, &self.b, &self.c, &self.d];
        let r = [&o.a, &o.b, &o.c, &o.d];
        (0..4).all(|i| (0..4).all(|j| l[i] * r[j] == l[j] * r[i]))
    }

    /// `φ(g) = −d/c`, the image of `P\G → P¹`.
    pub fn point(&self) -> P1Point {
        P1Point::new(-&self.d, self.c.clone()).expect("invertible matrix has a non-zero row")
    }
}

/// A point `(u : v)` of `P¹(F)`, normalised to `(z : 1)` or `(1 : 0)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct P1Point {
    u: Q,
    v: Q,
}

impl P1Point {
    pub fn new(u: Q, v: Q) -> Result<Self> {
        if v.is_zero() {
            if u.is_zero() {
                return Err(Error::Invalid("(0 : 0) is not a point".into()));
            }
            return Ok(Self::infinity());
        }
        Ok(Self { u: u / v, v: qi(1) })
    }

    pub fn finite(z: Q) -> Self {
        Self { u: z, v: qi(1) }
    }

    pub fn infinity() -> Self {
        Self { u: qi(1), v: qi(0) }
    }

    pub fn is_infinity(&self) -> bool {
        self.v.is_zero()
    }

    /// The affine coordinate `z`, if finite.
    pub fn coordinate(&self) -> Option<&Q> {
        (!self.is_infinity()).then_some(&self.u)
    }

    /// Reduction to `P¹(Z/p^N)`.
    pub fn residue(&self, p: u64, level: u32) -> Result<P1Residue> {
        let m = (p as u128).pow(level);
        match self.coordinate() {
            Some(z) if z.is_zero() || valuation(z, p)? >= 0 => Ok(P1Residue::Finite(residue(z, m)? as u64)),
            Some(z) => Ok(P1Residue::Infinite(residue(&z.recip(), m)? as u64)),
            None => Ok(P1Residue::Infinite(0)),
        }
    }
}

/// A point of `P¹(Z/p^N)`: `Finite(z)` with `z ∈ Z/p^N`, or `Infinite(w)` for
/// `1/w` with `w ∈ pZ/p^N` (`w = 0` is `∞`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum P1Residue {
    Finite(u64),
    Infinite(u64),
}

impl P1Residue {
    pub fn all(p: u64, level: u32) -> Vec<Self> {
        let m = p.pow(level);
        (0..m).map(Self::Finite).chain((0..m).filter(|w| w % p == 0).map(Self::Infinite)).collect()
    }

    /// The canonical representative in `P¹(F)`.
    pub fn representative(&self) -> P1Point {
        match *self {
            Self::Finite(z) => P1Point::finite(qi(z as i64)),
            Self::Infinite(0) => P1Point::infinity(),
            Self::Infinite(w) => P1Point::finite(Q::new(1.into(), (w as i64).into())),
        }
    }
}

/// `k_z ∈ GL₂(O)` with `φ(k_z) = z`: `(0 1; −1 z)` for `z ∈ O`,
/// `(1 0; −1/z 1)` otherwise, the identity at `∞`.
pub fn k_point(field: PrimeLocalField, z: &P1Point) -> GL2Element {
    match z.coordinate() {
        None => GL2Element::identity(field),
        Some(z) if z.is_zero() || valuation(z, field.p).is_ok_and(|v| v >= 0) => {
            GL2Element { a: qi(0), b: qi(1), c: qi(-1), d: z.clone(), field }
        }
        Some(z) => GL2Element { a: qi(1), b: qi(0), c: -z.recip(), d: qi(1), field },
    }
}

/// `g = b·k` with `b` upper triangular and `k ∈ GL₂(O)`.
pub fn iwasawa_decompose(g: &GL2Element) -> (GL2Element, GL2Element) {
    if g.in_maximal_compact() {
        return (GL2Element::identity(g.field), g.clone());
    }
    let k = k_point(g.field, &g.point());
    let b = g.mul(&k.inverse());
    debug_assert!(b.is_upper());
    (b, k)
}

/// `α^{ν(t₂/t₁)}`.
pub fn mu_alpha(b: &GL2Element, alpha: &CoefficientValue) -> Result<CoefficientValue> {
    if !b.is_upper() {
        return Err(Error::Invalid("mu_alpha needs an upper triangular matrix".into()));
    }
    let e = valuation(&b.d, b.field.p)? - valuation(&b.a, b.field.p)?;
    Ok(alpha.pow(e))
}

/// The split torus `x ↦ E(x) = (x 0; C(x−1) 1)` with `C = p^{n_T}`, so that
/// `det E(x) = x` and `c(E(x)) = C(x−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitEmbedding {
    pub field: PrimeLocalField,
    pub n_t: i64,
}

impl SplitEmbedding {
    pub fn new(case: &LocalTorusCase) -> Result<Self> {
        if case.kind != TorusKind::Split {
            return Err(Error::NonSplit);
        }
        Ok(Self { field: case.field, n_t: case.n_t })
    }

    pub fn c_const(&self) -> Q {
        q_pow(self.field.p, self.n_t)
    }

    pub fn element(&self, x: &Q) -> Result<GL2Element> {
        GL2Element::new(self.field, x.clone(), qi(0), self.c_const() * (x - qi(1)), qi(1))
    }

    /// `φ(E(x)) = −1/(C(x−1))`.
    pub fn point_of(&self, x: &Q) -> P1Point {
        self.element(x).expect("x is non-zero").point()
    }

    /// The torus fixed points `x₁ = 1/C` and `x₂ = 0` of `P¹`.
    pub fn excluded(&self) -> [P1Point; 2] {
        [P1Point::finite(self.c_const().recip()), P1Point::finite(qi(0))]
    }

    /// Inverse chart `x = 1 − 1/(Cz)`.
    pub fn torus_coordinate(&self, z: &P1Point) -> Result<Q> {
        match z.coordinate() {
            None => Ok(qi(1)),
            Some(z) if z.is_zero() => Err(Error::ExcludedPoint),
            Some(z) => {
                let x = qi(1) - (self.c_const() * z).recip();
                if x.is_zero() {
                    Err(Error::ExcludedPoint)
                } else {
                    Ok(x)
                }
            }
        }
    }
}

/// A level-`N` vector of the unramified principal series of `α`.
#[derive(Debug, Clone)]
pub struct PrincipalSeriesVector {
    pub field: PrimeLocalField,
    pub alpha: CoefficientValue,
    pub level: u32,
    table: BTreeMap<P1Residue, CoefficientValue>,
}

impl PrincipalSeriesVector {
    pub fn from_fn(
        field: PrimeLocalField,
        alpha: CoefficientValue,
        level: u32,
        mut f: impl FnMut(P1Residue) -> Result<CoefficientValue>,
    ) -> Result<Self> {
        field.require_enumerable()?;
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        let table = P1Residue::all(field.p, level).into_iter().map(|r| Ok((r, f(r)?))).collect::<Result<_>>()?;
        Ok(Self { field, alpha, level, table })
    }

    /// The spherical vector `φ₀` with `φ₀|_{GL₂(O)} = 1`.
    pub fn spherical(field: PrimeLocalField, alpha: CoefficientValue, level: u32) -> Result<Self> {
        Self::from_fn(field, alpha, level, |_| Ok(CoefficientValue::int(1)))
    }

    pub fn table(&self) -> &BTreeMap<P1Residue, CoefficientValue> {
        &self.table
    }

    pub fn at(&self, r: P1Residue) -> CoefficientValue {
        self.table[&r].clone()
    }

    /// `φ(g) = μ_α(g k_z^{-1}) φ(k_z)` for `z = φ(g)`.
    pub fn eval(&self, g: &GL2Element) -> Result<CoefficientValue> {
        let z = g.point();
        let k = k_point(self.field, &z);
        let b = g.mul(&k.inverse());
        Ok(mu_alpha(&b, &self.alpha)? * self.at(z.residue(self.field.p, self.level)?))
    }

    /// `(π(h)φ)(g) = φ(gh)`, for `h` whose action preserves the level.
    pub fn translate(&self, h: &GL2Element) -> Result<Self> {
        Self::from_fn(self.field, self.alpha.clone(), self.level, |r| {
            self.eval(&k_point(self.field, &r.representative()).mul(h))
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.level != o.level {
            return Err(Error::LevelMismatch(self.level, o.level));
        }
        Self::from_fn(self.field, self.alpha.clone(), self.level, |r| Ok(self.at(r) + o.at(r)))
    }

    pub fn scale(&self, c: &CoefficientValue) -> Self {
        let table = self.table.iter().map(|(k, v)| (*k, v.clone() * c.clone())).collect();
        Self { table, ..self.clone() }
    }

    /// Invariance under `GL₂(O)`: a constant table.
    pub fn is_spherical(&self) -> bool {
        let mut it = self.table.values();
        let first = it.next().cloned().unwrap_or_else(|| CoefficientValue::int(0));
        it.all(|v| *v == first)
    }

    pub fn approx_eq(&self, o: &Self) -> bool {
        self.level == o.level && self.table.iter().all(|(k, v)| o.table.get(k) == Some(v))
    }
}

/// `T_P φ(g) = Σ_{b mod ϖ} φ(g (ϖ b; 0 1)) + φ(g diag(1, ϖ))` on
/// `GL₂(O)`-invariant vectors.
pub fn hecke_tp(v: &PrincipalSeriesVector) -> Result<PrincipalSeriesVector> {
    if !v.is_spherical() {
        return Err(Error::NotInvariant);
    }
    let f = v.field;
    let p = f.p as i64;
    let mut cosets: Vec<GL2Element> = (0..p).map(|b| GL2Element::from_ints(f, p, b, 0, 1).unwrap()).collect();
    cosets.push(GL2Element::from_ints(f, 1, 0, 0, p).unwrap());
    PrincipalSeriesVector::from_fn(f, v.alpha.clone(), v.level, |r| {
        let k = k_point(f, &r.representative());
        cosets.iter().try_fold(CoefficientValue::int(0), |acc, g| Ok(acc + v.eval(&k.mul(g))?))
    })
}

fn support_range(f: &ShellFunction) -> Option<(i64, i64)> {
    let ms: BTreeSet<i64> = f.entries().map(|((m, _), _)| *m).collect();
    Some((*ms.first()?, *ms.last()?))
}

/// Value of `f` at the torus element `x ∈ F^×`.
fn shell_value(f: &ShellFunction, x: &Q) -> Result<CoefficientValue> {
    let p = f.case.field.p;
    let m = valuation(x, p)?;
    let g = f.group();
    let u = x * q_pow(p, -m);
    Ok(f.eval(m, &g, g.split_class(&u)?))
}

/// `δ_T(f)(g) = μ_α(b) f(t^{-1})` for `g = b·E(t)`, zero off `P·T`, tabulated
/// at level `N`. Each residue class must map into a single cell of `f`.
pub fn delta_t(f: &ShellFunction, alpha: &CoefficientValue, level: u32) -> Result<PrincipalSeriesVector> {
    let emb = SplitEmbedding::new(&f.case)?;
    let field = emb.field;
    let p = field.p;
    let n_t = emb.n_t;
    let big_l = f.level.max(1) as i64;
    let (m_lo, m_hi) = support_range(f).unwrap_or((0, 0));
    let empty = support_range(f).is_none();
    let c = emb.c_const();
    let n = level as i64;
    let need = |k: i64| Error::Refinement { need: (level as i64 + k).max(0) as u32, have: level };
    PrincipalSeriesVector::from_fn(field, alpha.clone(), level, |r| {
        // valuation window of x^{-1} over the class, or the exact valuations at the representative
        match r {
            P1Residue::Finite(z0) => {
                let w = &c * qi(z0 as i64);
                if z0 == 0 {
                    // contains x = ∞: x^{-1} = w/(w−1) with ν ≥ N + n_T
                    if !empty && m_hi >= n + n_t {
                        return Err(need(m_hi - n - n_t + 1));
                    }
                    return Ok(CoefficientValue::int(0));
                }
                let wm1 = &w - qi(1);
                let b = if wm1.is_zero() { i64::MAX } else { valuation(&wm1, p)? };
                if b >= n + n_t {
                    // contains x = 0: ν(x^{-1}) ≤ −(N + n_T)
                    if !empty && m_lo <= -(n + n_t) {
                        return Err(need(-(n + n_t) - m_lo + 1));
                    }
                    return Ok(CoefficientValue::int(0));
                }
                let a = valuation(&w, p)?;
                let slack = n + n_t - big_l - a.max(b);
                if slack < 0 && !empty {
                    return Err(need(-slack));
                }
            }
            P1Residue::Infinite(u0) => {
                let cu = &c - qi(u0 as i64);
                let b = if cu.is_zero() { i64::MAX } else { valuation(&cu, p)? };
                if b >= n {
                    if !empty && m_lo <= n_t - n {
                        return Err(need(m_lo.abs() + n_t.abs() + 1));
                    }
                    return Ok(CoefficientValue::int(0));
                }
                if n - big_l - b < 0 && !empty {
                    return Err(need(big_l + b - n));
                }
            }
        }
        let z = r.representative();
        let x = emb.torus_coordinate(&z)?;
        let t = emb.element(&x)?;
        let b = k_point(field, &z).mul(&t.inverse());
        Ok(mu_alpha(&b, alpha)? * shell_value(f, &x.recip())?)
    })
}

/// `∫_{ϖ^m·c·H_L} θ_T(s)(y) d^×y` on the split torus.
fn theta_cell(case: &LocalTorusCase, alpha: i64, m: i64, g: &UnitGroup, c: UnitClass) -> Result<LocalRationalFunction> {
    let q = case.q();
    let big_l = g.level() as i64;
    let vol = CoefficientValue::rational(shell_volume(case, big_l)?);
    let qx = |k: i64| LocalRationalFunction::monomial(CoefficientValue::rational(q_pow(q, k)), k, q);
    if m != 0 {
        let sign = CoefficientValue::int(if alpha == -1 && m.rem_euclid(2) == 1 { -1 } else { 1 });
        return Ok(qx(2 * case.n_t - m.abs()).scale(&(sign * vol)));
    }
    let lvl = g.shell_level(c) as i64;
    if lvl < big_l {
        Ok(qx(2 * (case.n_t + lvl)).scale(&vol))
    } else {
        let triv = TorusCharacter::trivial(case, Some(CoefficientValue::int(1)))?;
        unit_theta_integral(case, &triv, big_l)
    }
}

/// `∫ θ_T(s)(y) f(τ^{-1}y) d^×y` for `τ = ϖ^k·u`, without the constant `C_T`.
pub fn intertwine_closed(f: &ShellFunction, alpha: i64, tau: (i64, UnitClass)) -> Result<LocalRationalFunction> {
    if f.case.kind != TorusKind::Split {
        return Err(Error::NonSplit);
    }
    crate::integrals::check_alpha(alpha)?;
    let moved = f.translate(tau.0, tau.1)?;
    let g = moved.group();
    let mut acc = LocalRationalFunction::zero(f.case.q());
    for ((m, c), v) in moved.entries() {
        acc = acc.add(&theta_cell(&f.case, alpha, *m, &g, *c)?.scale(v));
    }
    Ok(acc)
}

/// `C_T = |C|(1 − q^{-1})`, the Jacobian of `x ↦ 1 + 1/(Cx)`.
pub fn c_t_constant(case: &LocalTorusCase) -> Q {
    q_pow(case.q(), -case.n_t) * (qi(1) - q_pow(case.q(), -1))
}

/// Representative of a split unit class as a rational.
fn class_rep(c: UnitClass) -> Q {
    qi(c.0.max(1) as i64)
}

/// `∫_F φ_s(ω n(x) E(τ)) dx` with `φ_s = δ_T(f)` in the principal series of
/// `α q^s`: each `ω n(x) E(τ)` is decomposed as `b·E(t)` and weighted by
/// `(αq^s)^{ν(t₂/t₁)} f(t^{-1})`. Shells `ν(x) ≤ −n_T − L` have a constant
/// integrand and are summed geometrically; the rest are enumerated modulo
/// `p^{ν(x)+R}`.
pub fn intertwine_oracle(f: &ShellFunction, alpha: i64, s: SValue, tau: (i64, UnitClass)) -> Result<CoefficientValue> {
    let emb = SplitEmbedding::new(&f.case)?;
    crate::integrals::check_alpha(alpha)?;
    if s.re() <= 0.5 {
        return Err(Error::Divergent(alloc::format!("{:?}", s)));
    }
    let field = emb.field;
    let p = field.p;
    let q = f.case.q();
    let Some((m_lo, m_hi)) = support_range(f) else { return Ok(CoefficientValue::int(0)) };
    let big_l = f.level.max(1) as i64;
    let (k, u) = tau;
    let n_t = emb.n_t;
    let xs = s.x_value(q);
    let al = CoefficientValue::int(alpha);
    // (α q^s)^e = α^e X^{-e}
    let weight = |e: i64| al.pow(e) * xs.pow(-e);
    let tau_q = q_pow(p, k) * class_rep(u);
    let tau_m = emb.element(&tau_q)?;
    let w_big = GL2Element::omega(field);

    // deep shells: s_x ∈ H_L, integrand (αq^s)^{2j} f(τ^{-1})
    let j0 = -n_t - big_l;
    let f_tau = shell_value(f, &tau_q.recip())?;
    let y = CoefficientValue::rational(qi(q as i64)) * xs.clone() * xs.clone();
    let geo = y.pow(-j0) / (CoefficientValue::int(1) - y);
    let mut acc = f_tau * CoefficientValue::rational(qi(1) - q_pow(q, -1)) * geo;

    let r_prec = (big_l + (-(m_lo + k)).max(0) + 2) as u32;
    // the shell at -n_T mixes valuations and is always needed
    let j_hi = (m_hi + k - n_t).max(-n_t);
    let modulus = p.pow(r_prec);
    let cell = CoefficientValue::rational(q_pow(q, -(r_prec as i64)));
    for j in (j0 + 1)..=j_hi {
        let pj = q_pow(p, j);
        let mut shell = CoefficientValue::int(0);
        for uu in (1..modulus).filter(|v| v % p != 0) {
            let x = &pj * qi(uu as i64);
            let g = w_big.mul(&GL2Element::unipotent(field, x)).mul(&tau_m);
            let z = g.point();
            let t = match emb.torus_coordinate(&z) {
                Ok(t) => t,
                Err(Error::ExcludedPoint) => continue,
                Err(e) => return Err(e),
            };
            let val = shell_value(f, &t.recip())?;
            if val.is_zero() {
                continue;
            }
            let b = g.mul(&emb.element(&t)?.inverse());
            if !b.is_upper() {
                return Err(Error::Invalid("decomposition failed".into()));
            }
            let e = valuation(&b.d, p)? - valuation(&b.a, p)?;
            shell = shell + weight(e) * val;
        }
        acc = acc + shell * cell.clone() * CoefficientValue::rational(q_pow(q, -j));
    }
    Ok(acc)
}

/// `α^{ν(τ)} I_T(α^{ν∘det}, s)`: the intertwiner of the full-support function
/// `y ↦ α^{ν(y)}`.
pub fn intertwine_full_support(case: &LocalTorusCase, alpha: i64, tau_k: i64) -> Result<LocalRationalFunction> {
    let chi = TorusCharacter::trivial(case, Some(CoefficientValue::int(alpha)))?;
    let sign = CoefficientValue::int(alpha).pow(tau_k);
    Ok(crate::integrals::i_t_statement(case, alpha, &chi)?.scale(&sign))
}

/// `Σ_t χ(t) ∫ θ_T(s)(y) f(t^{-1}y) d^×y` over cells `ϖ^k c H_L`; only
/// finitely many `k` survive for ramified `χ`, and the range is widened
/// until the contributions vanish.
pub fn twisted_intertwine(f: &ShellFunction, alpha: i64, chi: &TorusCharacter) -> Result<LocalRationalFunction> {
    if chi.is_unramified() {
        return Err(Error::Invalid("the t-sum is finite only for ramified characters".into()));
    }
    let big_l = f.level.max(chi.conductor);
    let f = f.refine(big_l)?;
    let g = f.group();
    let (m_lo, m_hi) = support_range(&f).unwrap_or((0, 0));
    let cell = CoefficientValue::rational(shell_volume(&f.case, big_l as i64)?);
    let uv = chi.uniformizer_value.clone().unwrap_or_else(|| CoefficientValue::int(1));
    let mut acc = LocalRationalFunction::zero(f.case.q());
    for k in (-m_hi - 2)..=(-m_lo + 2) {
        for c in g.elements() {
            let lam = intertwine_closed(&f, alpha, (k, c))?;
            let w = chi.value(&g, c) * uv.pow(k) * cell.clone();
            acc = acc.add(&lam.scale(&w));
        }
    }
    Ok(acc)
}

/// `⟨f_P, f_P⟩` re-derived from the underlying integrals: the spherical split
/// branch from Iwasawa decompositions of `A·diag(t, 1)`, the others from
/// torus shell sums of `|f_P|²` or of `θ_T`.
pub fn inner_product_fp_rederived(
    case: &LocalTorusCase,
    datum: &SteinbergDatum,
    n_s: i64,
    constants: &SymbolicConstants,
) -> Result<SymbolicValue> {
    let q = case.q();
    let ct = constants.get(ConstantName::CT);
    let cbar = constants.get(ConstantName::CTBar);
    let triv = |c: &LocalTorusCase| {
        TorusCharacter::trivial(c, (c.kind != TorusKind::Inert).then(|| CoefficientValue::int(1)))
    };
    let one_dep = BTreeSet::from([ConstantName::CT]);
    let two_deps = BTreeSet::from([ConstantName::CT, ConstantName::CTBar]);
    let at0 = |r: LocalRationalFunction| r.evaluate_at_s(0);
    match (datum, case.kind) {
        (SteinbergDatum::Spherical { .. }, TorusKind::Inert) => {
            let f = ShellFunction::indicator_shell(case, 0, 0)?;
            Ok(SymbolicValue { value: ct * norm_sq_mass(&f)?, deps: one_dep })
        }
        (SteinbergDatum::Spherical { alpha }, TorusKind::Ramified) => {
            let mut f = ShellFunction::indicator_shell(case, 0, 0)?;
            let g = f.group();
            f.set(1, g.identity(), alpha.inv());
            Ok(SymbolicValue { value: ct * norm_sq_mass(&f)?, deps: one_dep })
        }
        (SteinbergDatum::Spherical { alpha }, TorusKind::Split) => {
            let field = case.field;
            let a = GL2Element::new(field, qi(0), qi(-1), qi(1), q_pow(field.p, n_s))?;
            let window = n_s + 12;
            let term = |n: i64| -> Result<CoefficientValue> {
                let g = a.mul(&GL2Element::diag(field, q_pow(field.p, n), qi(1))?);
                let (b, _) = iwasawa_decompose(&g);
                let m = mu_alpha(&b, alpha)?;
                Ok(m.norm_sqr())
            };
            let mut acc = CoefficientValue::int(0);
            for n in -window..=window {
                acc = acc + term(n)?;
            }
            // both ends decay geometrically with ratio q^{-1}
            let r = CoefficientValue::rational(q_pow(q, -1) / (qi(1) - q_pow(q, -1)));
            acc = acc + (term(window)? + term(-window)?) * r;
            Ok(SymbolicValue { value: ct * acc, deps: one_dep })
        }
        (SteinbergDatum::Special { .. }, TorusKind::Inert) => {
            let lam = unit_theta_integral(case, &triv(case)?, 1)?;
            let v = CoefficientValue::rational(shell_volume(case, 1)?) * at0(lam)?.conj();
            Ok(SymbolicValue { value: ct * cbar * v, deps: two_deps })
        }
        (SteinbergDatum::Special { .. }, TorusKind::Ramified) => {
            let lam = unit_theta_integral(case, &triv(case)?, 0)?;
            Ok(SymbolicValue { value: ct * cbar * at0(lam)?.conj(), deps: two_deps })
        }
        (SteinbergDatum::Special { .. }, TorusKind::Split) => {
            // Σ_{j≥1} Σ_{N>−j} q^{(2−2s)n_T} q^{N(s−1)}, both sums formal geometric series
            let one = CoefficientValue::int(1);
            let r = LocalRationalFunction::monomial(CoefficientValue::rational(q_pow(q, -1)), -1, q);
            let qx = |k: i64| LocalRationalFunction::monomial(CoefficientValue::rational(q_pow(q, k)), k, q);
            let inner = LocalRationalFunction::one(q).sub(&r).inv()?; // Σ_{N>−j} r^N = r^{1−j}/(1−r)
            let outer = LocalRationalFunction::binomial(one.clone(), -CoefficientValue::rational(qi(q as i64)), 1, q).inv()?; // Σ_{j≥1} r^{1−j}
            let total = qx(2 * case.n_t).mul(&inner).mul(&outer);
            Ok(SymbolicValue { value: ct * cbar * at0(total)?, deps: two_deps })
        }
    }
}

/// `∫ |f|² d^×t`.
fn norm_sq_mass(f: &ShellFunction) -> Result<CoefficientValue> {
    let cell = CoefficientValue::rational(shell_volume(&f.case, f.level as i64)?);
    Ok(f.entries().fold(CoefficientValue::int(0), |a, (_, v)| a + v.norm_sqr() * cell.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::qr;

    fn f3() -> PrimeLocalField {
        PrimeLocalField::prime(3).unwrap()
    }

    #[test]
    fn decomposition_examples() {
        let f = f3();
        let g = GL2Element::g_varpi(f);
        let (b, k) = iwasawa_decompose(&g);
        assert_eq!(b, g);
        assert_eq!(k, GL2Element::identity(f));
        let w = GL2Element::omega(f);
        let (b, k) = iwasawa_decompose(&w);
        assert_eq!((b, k), (GL2Element::identity(f), w));
        let g = GL2Element::new(f, qi(1), qi(0), qr(1, 3), qi(1)).unwrap();
        let (b, k) = iwasawa_decompose(&g);
        assert_eq!(b.mul(&k), g);
        assert!(b.is_upper() && k.in_maximal_compact());
        assert_eq!(valuation(&(&b.d / &b.a), 3).unwrap(), -2);
    }

    #[test]
    fn mu_examples() {
        let f = f3();
        let m1 = CoefficientValue::int(-1);
        assert_eq!(mu_alpha(&GL2Element::diag(f, qi(1), qi(3)).unwrap(), &m1).unwrap(), m1);
        assert_eq!(mu_alpha(&GL2Element::diag(f, qi(3), qi(3)).unwrap(), &CoefficientValue::int(5)).unwrap(), CoefficientValue::int(1));
        assert_eq!(
            mu_alpha(&GL2Element::diag(f, qi(9), qi(1)).unwrap(), &CoefficientValue::int(2)).unwrap(),
            CoefficientValue::rational(qr(1, 4))
        );
    }

    #[test]
    fn hecke_on_spherical() {
        for p in [2u64, 3, 5] {
            let f = PrimeLocalField::prime(p).unwrap();
            for a in [1i64, -1] {
                let v = PrincipalSeriesVector::spherical(f, CoefficientValue::int(a), 3).unwrap();
                let t = hecke_tp(&v).unwrap();
                let eig = CoefficientValue::int(a) + CoefficientValue::int(p as i64) * CoefficientValue::int(a).inv();
                assert!(t.approx_eq(&v.scale(&eig)), "p={p} a={a}");
            }
        }
    }

    #[test]
    fn delta_examples() {
        let case = LocalTorusCase::new(TorusKind::Split, f3(), 0);
        let h = ShellFunction::indicator_shell(&case, 0, 0).unwrap();
        let v = delta_t(&h, &CoefficientValue::int(1), 3).unwrap();
        // t ∈ H: identity has point ∞ ↔ x = 1
        assert_eq!(v.eval(&GL2Element::identity(f3())).unwrap(), CoefficientValue::int(1));
        let emb = SplitEmbedding::new(&case).unwrap();
        let x1 = &emb.excluded()[0];
        assert_eq!(v.at(x1.residue(3, 3).unwrap()), CoefficientValue::int(0));
    }

    #[test]
    fn intertwiner_ratio() {
        let case = LocalTorusCase::new(TorusKind::Split, f3(), 0);
        let mut f = ShellFunction::new(&case, 1).unwrap();
        let g = f.group();
        f.set(0, g.identity(), CoefficientValue::int(1));
        f.set(1, UnitClass(2, 0), CoefficientValue::int(3));
        for tau in [(0, UnitClass(1, 0)), (1, UnitClass(2, 0)), (-1, UnitClass(1, 0))] {
            let cl = intertwine_closed(&f, 1, tau).unwrap().evaluate_at_s(2).unwrap();
            let or = intertwine_oracle(&f, 1, SValue::Int(2), tau).unwrap();
            assert_eq!(or, cl * CoefficientValue::rational(c_t_constant(&case)), "{tau:?}");
        }
    }

    #[test]
    fn delta_equivariant() {
        let case = LocalTorusCase::new(TorusKind::Split, f3(), 0);
        let mut f = ShellFunction::new(&case, 1).unwrap();
        f.set(0, UnitClass(1, 0), CoefficientValue::int(2));
        f.set(1, UnitClass(2, 0), CoefficientValue::int(-1));
        let a = CoefficientValue::int(-1);
        let emb = SplitEmbedding::new(&case).unwrap();
        for (k, u) in [(1i64, 2u64), (0, 2), (-1, 1)] {
            let y = q_pow(3, k) * qi(u as i64);
            let lhs = delta_t(&f.translate(k, UnitClass(u, 0)).unwrap(), &a, 5).unwrap();
            let rhs = delta_t(&f, &a, 5).unwrap().translate(&emb.element(&y).unwrap()).unwrap();
            assert!(lhs.approx_eq(&rhs), "k={k} u={u}");
        }
    }

    #[test]
    fn twisted_matches_statement() {
        let case = LocalTorusCase::new(TorusKind::Split, f3(), 0);
        let chi = TorusCharacter::with_conductor(&case, 1, Some(CoefficientValue::int(1))).unwrap();
        let mut f = ShellFunction::new(&case, 1).unwrap();
        f.set(0, UnitClass(1, 0), CoefficientValue::int(1));
        f.set(1, UnitClass(2, 0), CoefficientValue::int(5));
        let lhs = twisted_intertwine(&f, 1, &chi).unwrap();
        let it = crate::integrals::i_t_statement(&case, 1, &chi).unwrap();
        let rhs = it.scale(&f.integrate_character(&chi, true).unwrap());
        assert!(lhs.equal(&rhs).unwrap());
    }

    #[test]
    fn full_support_vanishes() {
        let case = LocalTorusCase::new(TorusKind::Split, f3(), 1);
        for a in [1, -1] {
            let v = intertwine_full_support(&case, a, 1).unwrap().evaluate_at_s(0).unwrap();
            assert!(v.is_zero());
        }
    }

    #[test]
    fn rederived_inner_products() {
        let c = SymbolicConstants::default();
        for kind in [TorusKind::Split, TorusKind::Inert, TorusKind::Ramified] {
            for n_t in [0, 1] {
                let case = LocalTorusCase::new(kind, f3(), n_t);
                let sph = SteinbergDatum::spherical(CoefficientValue::float(1.0, 2f64.sqrt()), 3).unwrap();
                for d in [SteinbergDatum::special(1).unwrap(), sph] {
                    for n_s in [0, 2] {
                        let a = inner_product_fp_rederived(&case, &d, n_s, &c).unwrap();
                        let b = crate::integrals::inner_product_fp(&case, &d, n_s, &c);
                        assert!(a.value.approx_eq(&b.value, 1e-9), "{kind:?} {n_t} {d:?} {n_s}: {:?} {:?}", a.value, b.value);
                    }
                }
            }
        }
    }
}
