//! The local torus `T(F) = K^×/F^×`: shell filtration, volumes, characters,
//! `θ_T` and shell integration.
//!
//! Concrete models (`f = 1`, uniformizer `p`):
//!
//! * split: `T ≅ F^×`, `H_0 = Z_p^×`, `H_n = 1 + p^n Z_p`;
//! * inert: `O_K = Z_p[β]`; classes of `a + bβ` are normalised to `(1, b)` or
//!   `(a, 1)` with `p | a`, and `H_n = {(1, b) : p^n | b}`;
//! * ramified: `O_K = Z_p[π]`, `π² = p`; units are `1 + bπ` with
//!   `b ⊕ c = (b + c)/(1 + p·b·c)`, `H_n = {p^n | b}`, plus the coset of `π`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::coeff::CoefficientValue;
use crate::error::{Error, Result};
use crate::padic::{mod_inv, q_pow, qi, qr, PrimeLocalField};
use crate::rational_forms::{LocalRationalFunction, SValue};
use crate::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TorusKind {
    Split,
    Inert,
    Ramified,
}

impl TorusKind {
    pub const ALL: [TorusKind; 3] = [TorusKind::Split, TorusKind::Inert, TorusKind::Ramified];

    pub fn name(self) -> &'static str {
        match self {
            TorusKind::Split => "split",
            TorusKind::Inert => "inert",
            TorusKind::Ramified => "ramified",
        }
    }
}

impl core::str::FromStr for TorusKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(TorusKind::Split),
            "inert" => Ok(TorusKind::Inert),
            "ramified" => Ok(TorusKind::Ramified),
            _ => Err(Error::Invalid(alloc::format!("unknown torus kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalTorusCase {
    pub kind: TorusKind,
    pub field: PrimeLocalField,
    pub n_t: i64,
}

impl LocalTorusCase {
    pub fn new(kind: TorusKind, field: PrimeLocalField, n_t: i64) -> Self {
        Self { kind, field, n_t }
    }

    pub fn q(&self) -> u64 {
        self.field.q
    }

    /// `L(s, η)`: `(1 − X)^{-1}`, `(1 + X)^{-1}` or `1`.
    pub fn l_eta(&self) -> LocalRationalFunction {
        let q = self.q();
        let one = CoefficientValue::int(1);
        match self.kind {
            TorusKind::Split => crate::rational_forms::geometric(one, 1, q),
            TorusKind::Inert => crate::rational_forms::geometric(CoefficientValue::int(-1), 1, q),
            TorusKind::Ramified => LocalRationalFunction::one(q),
        }
    }

    /// `L(1, η)` as an exact rational.
    pub fn l_eta_at_one(&self) -> Q {
        let qq = Q::from_integer(BigInt::from(self.q()));
        match self.kind {
            TorusKind::Split => qq.clone() / (qq - qi(1)),
            TorusKind::Inert => qq.clone() / (qq + qi(1)),
            TorusKind::Ramified => qi(1),
        }
    }
}

/// `vol(H_n)` with `vol(H_0) = 1`.
pub fn shell_volume(case: &LocalTorusCase, n: i64) -> Result<Q> {
    if n < 0 {
        return Err(Error::NegativeShell(n));
    }
    let q = case.q() as i64;
    Ok(match (case.kind, n) {
        (TorusKind::Split | TorusKind::Inert, 0) => qi(1),
        (TorusKind::Split, _) => q_pow(q as u64, 1 - n) / qi(q - 1),
        (TorusKind::Inert, _) => q_pow(q as u64, 1 - n) / qi(q + 1),
        (TorusKind::Ramified, _) => q_pow(q as u64, -n),
    })
}

/// `vol(H_n ∖ H_{n+1})`.
pub fn shell_difference_volume(case: &LocalTorusCase, n: i64) -> Result<Q> {
    Ok(shell_volume(case, n)? - shell_volume(case, n + 1)?)
}

/// A class in `H_0/H_n`, encoded per torus kind (see the module docs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitClass(pub u64, pub u64);

/// The finite group `H_0/H_n` of a torus model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitGroup {
    kind: TorusKind,
    p: u64,
    level: u32,
    modulus: u64,
    /// `β² = u0 + v0·β` (inert only).
    beta: (u64, u64),
}

impl UnitGroup {
    pub fn new(case: &LocalTorusCase, level: u32) -> Result<Self> {
        case.field.require_enumerable()?;
        let p = case.field.p;
        let modulus = p.pow(level);
        let beta = if case.kind == TorusKind::Inert { inert_beta(p) } else { (0, 0) };
        Ok(Self { kind: case.kind, p, level, modulus, beta: (beta.0 % modulus, beta.1 % modulus) })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn identity(&self) -> UnitClass {
        match self.kind {
            TorusKind::Split | TorusKind::Inert if self.level > 0 => UnitClass(1, 0),
            _ => UnitClass(0, 0),
        }
    }

    pub fn order(&self) -> u64 {
        if self.level == 0 {
            return 1;
        }
        let pn1 = self.modulus / self.p;
        match self.kind {
            TorusKind::Split => pn1 * (self.p - 1),
            TorusKind::Inert => pn1 * (self.p + 1),
            TorusKind::Ramified => self.modulus,
        }
    }

    pub fn elements(&self) -> Vec<UnitClass> {
        if self.level == 0 {
            return vec![self.identity()];
        }
        let m = self.modulus;
        match self.kind {
            TorusKind::Split => (1..m).filter(|u| u % self.p != 0).map(|u| UnitClass(u, 0)).collect(),
            TorusKind::Inert => (0..m)
                .map(|b| UnitClass(1, b))
                .chain((0..m).filter(|a| a % self.p == 0).map(|a| UnitClass(a, 1)))
                .collect(),
            TorusKind::Ramified => (0..m).map(|b| UnitClass(b, 0)).collect(),
        }
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    fn inv(&self, a: u64) -> u64 {
        mod_inv(a as u128, self.modulus as u128).expect("unit") as u64
    }

    /// Normal form of the class of `a + bβ`.
    fn normalize_inert(&self, a: u64, b: u64) -> UnitClass {
        if !a.is_multiple_of(self.p) {
            UnitClass(1, self.mulmod(b, self.inv(a)))
        } else {
            UnitClass(self.mulmod(a, self.inv(b)), 1)
        }
    }

    pub fn mul(&self, x: UnitClass, y: UnitClass) -> UnitClass {
        if self.level == 0 {
            return self.identity();
        }
        let m = self.modulus;
        match self.kind {
            TorusKind::Split => UnitClass(self.mulmod(x.0, y.0), 0),
            TorusKind::Inert => {
                let (a1, b1, a2, b2) = (x.0, x.1, y.0, y.1);
                let bb = self.mulmod(b1, b2);
                let a = (self.mulmod(a1, a2) + self.mulmod(bb, self.beta.0)) % m;
                let b = (self.mulmod(a1, b2) + self.mulmod(a2, b1) + self.mulmod(bb, self.beta.1)) % m;
                self.normalize_inert(a, b)
            }
            TorusKind::Ramified => {
                let num = (x.0 + y.0) % m;
                let den = (1 + self.mulmod(self.p % m, self.mulmod(x.0, y.0))) % m;
                UnitClass(self.mulmod(num, self.inv(den)), 0)
            }
        }
    }

    pub fn pow(&self, x: UnitClass, mut e: u64) -> UnitClass {
        let mut r = self.identity();
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    pub fn inverse(&self, x: UnitClass) -> UnitClass {
        self.pow(x, self.order() - 1)
    }

    /// Image in `H_0/H_level` for `level ≤ self.level`.
    pub fn reduce(&self, x: UnitClass, level: u32) -> UnitClass {
        if level == 0 {
            return UnitClass(0, 0);
        }
        let m = self.p.pow(level);
        match self.kind {
            TorusKind::Split => UnitClass(x.0 % m, 0),
            TorusKind::Inert => UnitClass(x.0 % m, x.1 % m),
            TorusKind::Ramified => UnitClass(x.0 % m, 0),
        }
    }

    /// Largest `n ≤ level` with `x ∈ H_n`.
    pub fn shell_level(&self, x: UnitClass) -> u32 {
        let val = |v: u64| -> u32 {
            if v == 0 {
                return self.level;
            }
            let mut k = 0;
            let mut v = v;
            while v.is_multiple_of(self.p) && k < self.level {
                v /= self.p;
                k += 1;
            }
            k
        };
        if self.level == 0 {
            return 0;
        }
        match self.kind {
            TorusKind::Split => val((x.0 + self.modulus - 1) % self.modulus),
            TorusKind::Inert if x.0 == 1 => val(x.1),
            TorusKind::Inert => 0,
            TorusKind::Ramified => val(x.0),
        }
    }

    /// Class of a `p`-adic unit (split case) given as a rational.
    pub fn split_class(&self, u: &Q) -> Result<UnitClass> {
        if self.level == 0 {
            return Ok(self.identity());
        }
        let r = crate::padic::residue(u, self.modulus as u128)? as u64;
        if r.is_multiple_of(self.p) {
            return Err(Error::Invalid("not a unit".into()));
        }
        Ok(UnitClass(r, 0))
    }
}

/// `β² = u0 + v0·β` with `X² − v0·X − u0` irreducible mod `p`.
pub fn inert_beta(p: u64) -> (u64, u64) {
    if p == 2 {
        // β² = −1 − β, stored as 2^64 − 1 ≡ −1 modulo every 2^n.
        return (u64::MAX, u64::MAX);
    }
    let n = (2..p).find(|&a| crate::padic::mod_pow(a as u128, ((p - 1) / 2) as u128, p as u128) == (p - 1) as u128);
    (n.expect("odd prime has a non-residue"), 0)
}

/// A character `χ` of `T(F)` with exact conductor.
#[derive(Debug, Clone)]
pub struct TorusCharacter {
    pub case: LocalTorusCase,
    pub conductor: u32,
    /// `χ(ϖ)` (split) or `χ(ϖ_K)` (ramified); absent for inert tori.
    pub uniformizer_value: Option<CoefficientValue>,
    /// Angles `a` with `χ(x) = e^{2πia}` on `H_0/H_{n_χ}`.
    table: BTreeMap<UnitClass, Q>,
}

impl TorusCharacter {
    pub fn trivial(case: &LocalTorusCase, uniformizer_value: Option<CoefficientValue>) -> Result<Self> {
        let g = UnitGroup::new(case, 0)?;
        let table = BTreeMap::from([(g.identity(), Q::zero())]);
        let c = Self { case: *case, conductor: 0, uniformizer_value, table };
        c.check_uniformizer()?;
        Ok(c)
    }

    /// A character of exact conductor `n` built by extending a faithful
    /// character of `H_{n-1}/H_n` across `H_0/H_n`.
    pub fn with_conductor(
        case: &LocalTorusCase,
        n: u32,
        uniformizer_value: Option<CoefficientValue>,
    ) -> Result<Self> {
        if n == 0 {
            return Self::trivial(case, uniformizer_value);
        }
        let g = UnitGroup::new(case, n)?;
        let elems = g.elements();
        let seed = elems
            .iter()
            .copied()
            .filter(|&x| x != g.identity() && g.shell_level(x) >= n - 1)
            .min_by_key(|&x| core::cmp::Reverse(element_order(&g, x)))
            .ok_or_else(|| {
                Error::Invalid(alloc::format!(
                    "no character of conductor {n} on the {} torus at p = {}",
                    case.kind.name(),
                    case.field.p
                ))
            })?;
        let mut table: BTreeMap<UnitClass, Q> = BTreeMap::new();
        table.insert(g.identity(), Q::zero());
        let ord = element_order(&g, seed);
        extend(&g, &mut table, seed, qr(1, ord as i64), ord);
        for &x in &elems {
            if table.contains_key(&x) {
                continue;
            }
            let mut m = 1u64;
            let mut y = x;
            while !table.contains_key(&y) {
                y = g.mul(y, x);
                m += 1;
            }
            let a = table[&y].clone() / qi(m as i64);
            extend(&g, &mut table, x, a, m);
        }
        let c = Self { case: *case, conductor: n, uniformizer_value, table };
        c.check_uniformizer()?;
        Ok(c)
    }

    /// Builds a character from an explicit angle table on `H_0/H_n`, checking
    /// the homomorphism law and recomputing the exact conductor.
    pub fn from_table(
        case: &LocalTorusCase,
        level: u32,
        uniformizer_value: Option<CoefficientValue>,
        table: BTreeMap<UnitClass, Q>,
    ) -> Result<Self> {
        let g = UnitGroup::new(case, level)?;
        let elems = g.elements();
        if elems.len() != table.len() || elems.iter().any(|e| !table.contains_key(e)) {
            return Err(Error::Invalid("table does not cover H_0/H_n".into()));
        }
        let frac = |a: Q| a.clone() - a.floor();
        for &x in &elems {
            for &y in &elems {
                if frac(&table[&x] + &table[&y]) != frac(table[&g.mul(x, y)].clone()) {
                    return Err(Error::Invalid("table is not a homomorphism".into()));
                }
            }
        }
        let mut c = Self { case: *case, conductor: level, uniformizer_value, table };
        let n = c.detect_conductor();
        if n < level {
            let table = elems
                .iter()
                .map(|&x| (g.reduce(x, n), frac(c.table[&x].clone())))
                .collect();
            c.table = table;
            c.conductor = n;
        }
        c.check_uniformizer()?;
        Ok(c)
    }

    fn check_uniformizer(&self) -> Result<()> {
        match (self.case.kind, &self.uniformizer_value) {
            (TorusKind::Inert, Some(_)) => Err(Error::Invalid("inert characters carry no uniformizer value".into())),
            (TorusKind::Split, None) | (TorusKind::Ramified, None) => {
                Err(Error::Invalid("uniformizer value required".into()))
            }
            (TorusKind::Ramified, Some(v)) if !(v.clone() * v.clone()).is_one() => {
                Err(Error::Invalid("chi(varpi_K)^2 must be 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn group(&self) -> UnitGroup {
        UnitGroup::new(&self.case, self.conductor).expect("validated at construction")
    }

    pub fn table(&self) -> &BTreeMap<UnitClass, Q> {
        &self.table
    }

    pub fn is_unramified(&self) -> bool {
        self.conductor == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.is_unramified() && self.uniformizer_value.as_ref().is_none_or(|v| v.is_one())
    }

    /// Angle of `χ(x)` for a class at any level `≥ n_χ`.
    pub fn angle(&self, g: &UnitGroup, x: UnitClass) -> Q {
        self.table[&g.reduce(x, self.conductor)].clone()
    }

    pub fn value(&self, g: &UnitGroup, x: UnitClass) -> CoefficientValue {
        CoefficientValue::root_of_unity(&self.angle(g, x))
    }

    /// `χ^{-1}`.
    pub fn inverse(&self) -> Self {
        Self {
            case: self.case,
            conductor: self.conductor,
            uniformizer_value: self.uniformizer_value.as_ref().map(|v| v.inv()),
            table: self.table.iter().map(|(k, a)| (*k, -a.clone() - (-a.clone()).floor())).collect(),
        }
    }

    /// Smallest `j` with `χ` trivial on `H_j/H_{n_χ}`, read off the table.
    pub fn detect_conductor(&self) -> u32 {
        let g = UnitGroup::new(&self.case, self.conductor).expect("validated");
        (0..=self.conductor)
            .find(|&j| {
                self.table
                    .iter()
                    .all(|(x, a)| g.shell_level(*x) < j || (a.clone() - a.floor()).is_zero())
            })
            .unwrap_or(self.conductor)
    }
}

fn element_order(g: &UnitGroup, x: UnitClass) -> u64 {
    let mut k = 1;
    let mut y = x;
    while y != g.identity() {
        y = g.mul(y, x);
        k += 1;
    }
    k
}

/// Adds `x` with angle `a` to the subgroup held in `table`, where `m` is the
/// least exponent with `x^m` already present.
fn extend(g: &UnitGroup, table: &mut BTreeMap<UnitClass, Q>, x: UnitClass, a: Q, m: u64) {
    let base: Vec<(UnitClass, Q)> = table.iter().map(|(k, v)| (*k, v.clone())).collect();
    let mut xj = g.identity();
    let mut aj = Q::zero();
    for _ in 0..m {
        for (s, b) in &base {
            let v = &aj + b;
            table.entry(g.mul(*s, xj)).or_insert_with(|| v.clone() - v.floor());
        }
        xj = g.mul(xj, x);
        aj += &a;
    }
}

/// `∫_{H_n} χ d^×t`: zero below the conductor, `vol(H_n)` from it on.
pub fn shell_character_integral(case: &LocalTorusCase, chi: &TorusCharacter, n: i64) -> Result<Q> {
    if n < chi.conductor as i64 {
        Ok(Q::zero())
    } else {
        shell_volume(case, n)
    }
}

/// `∫_{H_n ∖ H_{n+1}} χ d^×t`.
pub fn shell_character_difference(case: &LocalTorusCase, chi: &TorusCharacter, n: i64) -> Result<Q> {
    Ok(shell_character_integral(case, chi, n)? - shell_character_integral(case, chi, n + 1)?)
}

/// `∫_{H_n} χ d^×t` by summing `χ` over explicit classes of `H_n/H_N`.
pub fn brute_shell_character_integral(
    case: &LocalTorusCase,
    chi: &TorusCharacter,
    n: i64,
    truncation: u32,
) -> Result<CoefficientValue> {
    if n < 0 {
        return Err(Error::NegativeShell(n));
    }
    if truncation < chi.conductor {
        return Err(Error::Refinement { need: chi.conductor, have: truncation });
    }
    let vol = shell_volume(case, n)?;
    let g = UnitGroup::new(case, truncation)?;
    let members: Vec<UnitClass> = g
        .elements()
        .into_iter()
        .filter(|&x| (g.shell_level(x) as i64) >= n.min(truncation as i64))
        .collect();
    let angles: Vec<Q> = members.iter().map(|&x| chi.angle(&g, x)).collect();
    let sum = root_of_unity_sum(&angles);
    Ok(sum * CoefficientValue::rational(vol / qi(members.len() as i64)))
}

/// `Σ e^{2πi·a}` over rational angles, exact via reduction modulo the
/// cyclotomic polynomial of the common denominator.
pub fn root_of_unity_sum(angles: &[Q]) -> CoefficientValue {
    let m = angles.iter().fold(BigInt::one(), |l, a| l.lcm(a.denom())).to_u64().expect("small order");
    let mut counts = vec![0i64; m as usize];
    for a in angles {
        let k = ((a - a.floor()) * qi(m as i64)).to_integer().to_u64().unwrap();
        counts[k as usize] += 1;
    }
    if 4 % m == 0 {
        return counts.iter().enumerate().fold(CoefficientValue::int(0), |acc, (k, &c)| {
            acc + CoefficientValue::int(c) * CoefficientValue::root_of_unity(&qr(k as i64, m as i64))
        });
    }
    let phi = cyclotomic(m);
    let rem = reduce_mod(&counts, &phi);
    if rem.iter().skip(1).all(|&c| c == 0) {
        return CoefficientValue::int(rem.first().copied().unwrap_or(0));
    }
    rem.iter().enumerate().fold(CoefficientValue::int(0), |acc, (k, &c)| {
        acc + CoefficientValue::int(c) * CoefficientValue::root_of_unity(&qr(k as i64, m as i64))
    })
}

/// Integer coefficients of `Φ_m`, low degree first.
pub fn cyclotomic(m: u64) -> Vec<i64> {
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = exact_div(&num, &cyclotomic(d));
        }
    }
    num
}

fn exact_div(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![0i64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db];
        q[i] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[i + j] -= c * bj;
        }
    }
    q
}

fn reduce_mod(a: &[i64], monic: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let d = monic.len() - 1;
    for i in (d..r.len()).rev() {
        let c = r[i];
        if c != 0 {
            for (j, &mj) in monic.iter().enumerate() {
                r[i - d + j] -= c * mj;
            }
        }
    }
    r.truncate(d);
    r
}

/// A point of `T(F)` as seen by `θ_T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusPoint {
    /// Split coordinate `x` with `ν(x) = m ≠ 0`.
    SplitOff { m: i64 },
    /// Split coordinate `x ∈ H_n ∖ H_{n+1}`; `None` is `x = 1`.
    SplitUnit { shell: Option<u32> },
    /// Inert or ramified unit in `H_n ∖ H_{n+1}`; `None` is the identity.
    Unit { shell: Option<u32> },
    /// The coset of `ϖ_K` (ramified).
    Uniformizer,
}

/// `θ_T(s)(t) = α^{ν(det t)} |det t / c(t)²|^{1-s}` as a function of `X`.
pub fn theta(case: &LocalTorusCase, alpha: i64, t: TorusPoint) -> Result<LocalRationalFunction> {
    let q = case.q();
    let n_t = case.n_t;
    // q^{a(1-s)} = q^a X^a
    let pw = |a: i64| LocalRationalFunction::monomial(CoefficientValue::rational(q_pow(q, a)), a, q);
    let sign = |k: i64| CoefficientValue::int(if alpha == -1 && k.rem_euclid(2) == 1 { -1 } else { 1 });
    match (case.kind, t) {
        (TorusKind::Split, TorusPoint::SplitOff { m }) if m != 0 => {
            Ok(pw(2 * n_t - m.abs()).scale(&sign(m)))
        }
        (TorusKind::Split, TorusPoint::SplitUnit { shell: Some(n) }) => Ok(pw(2 * (n_t + n as i64))),
        (TorusKind::Inert | TorusKind::Ramified, TorusPoint::Unit { shell: Some(n) }) => {
            Ok(pw(2 * (n_t + n as i64)))
        }
        (TorusKind::Ramified, TorusPoint::Uniformizer) => Ok(pw(2 * n_t - 1).scale(&sign(1))),
        (_, TorusPoint::SplitUnit { shell: None } | TorusPoint::Unit { shell: None }) => Err(Error::ExcludedPoint),
        _ => Err(Error::Invalid("torus point does not match the torus kind".into())),
    }
}

/// `θ_T(s)(t)` at a numeric `s`.
pub fn theta_at(case: &LocalTorusCase, alpha: i64, t: TorusPoint, s: SValue) -> Result<CoefficientValue> {
    theta(case, alpha, t)?.evaluate_at_s(s)
}

/// A compactly supported function on `T(F)`, constant on the cells
/// `ϖ^m · x·H_level`; `m` ranges over `Z` (split), `{0}` (inert) or `{0, 1}`
/// (ramified, `1` marking the `ϖ_K` coset).
#[derive(Debug, Clone)]
pub struct ShellFunction {
    pub case: LocalTorusCase,
    pub level: u32,
    entries: BTreeMap<(i64, UnitClass), CoefficientValue>,
}

impl ShellFunction {
    pub fn new(case: &LocalTorusCase, level: u32) -> Result<Self> {
        UnitGroup::new(case, level)?;
        Ok(Self { case: *case, level, entries: BTreeMap::new() })
    }

    pub fn group(&self) -> UnitGroup {
        UnitGroup::new(&self.case, self.level).expect("validated")
    }

    pub fn set(&mut self, m: i64, x: UnitClass, v: CoefficientValue) {
        if v.is_zero() {
            self.entries.remove(&(m, x));
        } else {
            self.entries.insert((m, x), v);
        }
    }

    pub fn get(&self, m: i64, x: UnitClass) -> CoefficientValue {
        self.entries.get(&(m, x)).cloned().unwrap_or_else(|| CoefficientValue::int(0))
    }

    /// Value at `ϖ^m·x` with `x` a class at any level `≥ self.level`.
    pub fn eval(&self, m: i64, g: &UnitGroup, x: UnitClass) -> CoefficientValue {
        self.get(m, g.reduce(x, self.level))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(i64, UnitClass), &CoefficientValue)> {
        self.entries.iter()
    }

    /// `1_{ϖ^m H_n}`.
    pub fn indicator_shell(case: &LocalTorusCase, m: i64, n: u32) -> Result<Self> {
        let mut f = Self::new(case, n)?;
        let g = f.group();
        f.set(m, g.identity(), CoefficientValue::int(1));
        Ok(f)
    }

    /// The same function on a finer level.
    pub fn refine(&self, level: u32) -> Result<Self> {
        if level < self.level {
            return Err(Error::Refinement { need: self.level, have: level });
        }
        let g = UnitGroup::new(&self.case, level)?;
        let mut out = Self::new(&self.case, level)?;
        let ms: Vec<i64> = self.entries.keys().map(|k| k.0).collect();
        for m in ms {
            for x in g.elements() {
                out.set(m, x, self.get(m, g.reduce(x, self.level)));
            }
        }
        Ok(out)
    }

    /// `∫ f·χ d^×t` (or against `χ^{-1}` when `inverse`).
    pub fn integrate_character(&self, chi: &TorusCharacter, inverse: bool) -> Result<CoefficientValue> {
        let chi = if inverse { chi.inverse() } else { chi.clone() };
        let level = self.level.max(chi.conductor);
        let f = self.refine(level)?;
        let g = f.group();
        let cell = CoefficientValue::rational(shell_volume(&self.case, level as i64)?);
        let mut acc = CoefficientValue::int(0);
        for ((m, x), v) in f.entries.iter() {
            let u = match (self.case.kind, chi.uniformizer_value.as_ref()) {
                (TorusKind::Inert, _) => CoefficientValue::int(1),
                (_, Some(c)) => c.pow(*m),
                (_, None) => CoefficientValue::int(1),
            };
            acc = acc + v.clone() * u * chi.value(&g, *x) * cell.clone();
        }
        Ok(acc)
    }

    /// Translate: `(t*f)(y) = f(t^{-1}y)` for `t = ϖ^k·u` (split only).
    pub fn translate(&self, k: i64, u: UnitClass) -> Result<Self> {
        if self.case.kind != TorusKind::Split {
            return Err(Error::NonSplit);
        }
        let g = self.group();
        let mut out = Self::new(&self.case, self.level)?;
        for ((m, x), v) in &self.entries {
            // t^{-1}y = ϖ^m x  ⇔  y = ϖ^{m+k}·u·x
            out.set(m + k, g.mul(u, *x), v.clone());
        }
        Ok(out)
    }

    /// `∫ f d^×t`.
    pub fn total_mass(&self) -> Result<CoefficientValue> {
        let cell = CoefficientValue::rational(shell_volume(&self.case, self.level as i64)?);
        Ok(self.entries.values().fold(CoefficientValue::int(0), |a, v| a + v.clone() * cell.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(kind: TorusKind, p: u64) -> LocalTorusCase {
        LocalTorusCase::new(kind, PrimeLocalField::prime(p).unwrap(), 0)
    }

    #[test]
    fn volume_examples() {
        assert_eq!(shell_volume(&case(TorusKind::Split, 3), 2).unwrap(), qr(1, 6));
        assert_eq!(shell_volume(&case(TorusKind::Inert, 3), 1).unwrap(), qr(1, 4));
        assert_eq!(shell_volume(&case(TorusKind::Ramified, 5), 0).unwrap(), qi(1));
        assert_eq!(shell_volume(&case(TorusKind::Split, 3), -1), Err(Error::NegativeShell(-1)));
    }

    #[test]
    fn group_orders_match_index() {
        for p in [2, 3, 5] {
            for kind in TorusKind::ALL {
                let c = case(kind, p);
                for n in 0..4 {
                    let g = UnitGroup::new(&c, n).unwrap();
                    let e = g.elements();
                    assert_eq!(e.len() as u64, g.order(), "{kind:?} p={p} n={n}");
                    // index of H_n equals 1/vol(H_n)
                    assert_eq!(qi(1) / shell_volume(&c, n as i64).unwrap(), qi(g.order() as i64));
                    let set: alloc::collections::BTreeSet<_> = e.iter().copied().collect();
                    for &x in e.iter().take(12) {
                        for &y in e.iter().take(12) {
                            assert!(set.contains(&g.mul(x, y)));
                        }
                        assert_eq!(g.mul(x, g.inverse(x)), g.identity());
                    }
                }
            }
        }
    }

    #[test]
    fn characters_have_exact_conductor() {
        for p in [2, 3, 5] {
            for kind in TorusKind::ALL {
                let c = case(kind, p);
                let uv = match kind {
                    TorusKind::Inert => None,
                    _ => Some(CoefficientValue::int(-1)),
                };
                for n in 0..4 {
                    match TorusCharacter::with_conductor(&c, n, uv.clone()) {
                        Ok(chi) => assert_eq!(chi.detect_conductor(), n),
                        Err(_) => assert!(kind == TorusKind::Split && p == 2 && n == 1),
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_examples() {
        let c = case(TorusKind::Split, 3);
        let chi = TorusCharacter::with_conductor(&c, 2, Some(CoefficientValue::int(1))).unwrap();
        assert!(shell_character_integral(&c, &chi, 1).unwrap().is_zero());
        assert!(brute_shell_character_integral(&c, &chi, 1, 4).unwrap().is_zero());
        let ci = case(TorusKind::Inert, 3);
        let chi = TorusCharacter::with_conductor(&ci, 1, None).unwrap();
        assert_eq!(shell_character_difference(&ci, &chi, 0).unwrap(), qr(-1, 4));
        let cr = case(TorusKind::Ramified, 5);
        let chi = TorusCharacter::trivial(&cr, Some(CoefficientValue::int(1))).unwrap();
        assert_eq!(shell_character_integral(&cr, &chi, 3).unwrap(), qr(1, 125));
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic(1), [-1, 1]);
        assert_eq!(cyclotomic(3), [1, 1, 1]);
        assert_eq!(cyclotomic(6), [1, -1, 1]);
        assert_eq!(cyclotomic(8), [1, 0, 0, 0, 1]);
        let third = [qr(0, 1), qr(1, 3), qr(2, 3)];
        assert!(root_of_unity_sum(&third).is_zero());
    }

    #[test]
    fn theta_examples() {
        let c = case(TorusKind::Split, 3);
        let v = theta_at(&c, 1, TorusPoint::SplitOff { m: 1 }, SValue::Int(0)).unwrap();
        assert_eq!(v, CoefficientValue::rational(qr(1, 3)));
        let w = theta_at(&c, -1, TorusPoint::SplitOff { m: 1 }, SValue::Int(0)).unwrap();
        assert_eq!(w, CoefficientValue::rational(qr(-1, 3)));
        assert_eq!(theta(&c, 1, TorusPoint::SplitUnit { shell: None }).unwrap_err(), Error::ExcludedPoint);
    }
}
