//! Toric local integrals `I_T(χ, s)`, local L-factors, exceptional zeros,
//! the pairings `α_{π,χ}` and `⟨f, f⟩`, and the Steinberg `F(0)(t)` sum.
//!
//! Every closed form is a [`LocalRationalFunction`] in `X = q^{-s}`. Useful
//! dictionary: `q^{a(1-s)} = (qX)^a`, `q^{s-1} = (qX)^{-1}` and
//! `q^{1-2s} = qX²`.

#[allow(unused_imports)]
use num_traits::float::Float as _;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::coeff::CoefficientValue;
use crate::error::{Error, Result};
use crate::padic::{q_pow, qi};
use crate::rational_forms::{zeta, LocalRationalFunction, SValue};
use crate::torus::{
    brute_shell_character_integral, shell_character_difference, shell_character_integral,
    shell_difference_volume, shell_volume, LocalTorusCase, TorusCharacter, TorusKind,
};
use crate::Q;

type Lrf = LocalRationalFunction;

fn cq(x: Q) -> CoefficientValue {
    CoefficientValue::rational(x)
}

/// `c·X^k`.
fn mono(c: Q, k: i64, q: u64) -> Lrf {
    Lrf::monomial(cq(c), k, q)
}

/// `(qX)^k = q^{k(1-s)}`.
fn qx(k: i64, q: u64) -> Lrf {
    mono(q_pow(q, k), k, q)
}

/// `Y^k` with `Y = q^{1-2s} = qX²`.
fn y_pow(k: i64, q: u64) -> Lrf {
    mono(q_pow(q, k), 2 * k, q)
}

fn one_minus(r: &Lrf) -> Lrf {
    Lrf::one(r.q()).sub(r)
}

/// `Σ_{m≥1} r^m = r/(1 − r)` as a formal series.
fn geometric_tail(r: &Lrf) -> Result<Lrf> {
    r.div(&one_minus(r))
}

pub fn check_alpha(alpha: i64) -> Result<()> {
    if alpha == 1 || alpha == -1 {
        Ok(())
    } else {
        Err(Error::AlphaNotUnit)
    }
}

fn check_character(case: &LocalTorusCase, chi: &TorusCharacter) -> Result<()> {
    if chi.case.kind != case.kind || chi.case.field != case.field {
        return Err(Error::Invalid("character belongs to a different torus".into()));
    }
    Ok(())
}

/// `αχ(ϖ)` (split) or `αχ(ϖ_K)` (ramified); `None` for inert tori.
pub fn twisted_uniformizer(alpha: i64, chi: &TorusCharacter) -> Option<CoefficientValue> {
    chi.uniformizer_value.as_ref().map(|v| v.clone() * CoefficientValue::int(alpha))
}

// ---------------------------------------------------------------------------
// Steinberg data and symbolic constants

/// The local component at `P`: Steinberg (`α = ±1`) or spherical (`|α|² = q`).
#[derive(Debug, Clone, PartialEq)]
pub enum SteinbergDatum {
    Special { alpha: i64 },
    Spherical { alpha: CoefficientValue },
}

impl SteinbergDatum {
    pub fn special(alpha: i64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::Special { alpha })
    }

    /// Spherical datum; `|α|² = q` is checked exactly on the exact backend.
    pub fn spherical(alpha: CoefficientValue, q: u64) -> Result<Self> {
        let n = alpha.norm_sqr();
        if !n.approx_eq(&CoefficientValue::int(q as i64), 1e-12) {
            return Err(Error::Invalid("spherical datum needs |alpha|^2 = q".into()));
        }
        Ok(Self::Spherical { alpha })
    }

    pub fn alpha(&self) -> CoefficientValue {
        match self {
            Self::Special { alpha } => CoefficientValue::int(*alpha),
            Self::Spherical { alpha } => alpha.clone(),
        }
    }

    /// Hecke eigenvalue `a_P`: `α + qα^{-1}` (spherical) or `α` (special).
    pub fn a_p(&self, q: u64) -> CoefficientValue {
        match self {
            Self::Special { alpha } => CoefficientValue::int(*alpha),
            Self::Spherical { alpha } => alpha.clone() + CoefficientValue::int(q as i64) * alpha.inv(),
        }
    }

    pub fn is_special(&self) -> bool {
        matches!(self, Self::Special { .. })
    }
}

/// Constants that exist but are never evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstantName {
    CT,
    CTBar,
    KT,
    CK,
    CPhi,
    KSmallT,
}

impl ConstantName {
    pub const ALL: [ConstantName; 6] = [Self::CT, Self::CTBar, Self::KT, Self::CK, Self::CPhi, Self::KSmallT];

    pub fn name(self) -> &'static str {
        match self {
            Self::CT => "c_T",
            Self::CTBar => "C_T_bar",
            Self::KT => "K_T",
            Self::CK => "C_K",
            Self::CPhi => "C_phi",
            Self::KSmallT => "k_T",
        }
    }
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for ConstantName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Invalid(alloc::format!("unknown constant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicConstant {
    pub name: ConstantName,
    pub value: CoefficientValue,
}

/// Values for the symbolic constants; unset ones read as 1.
#[derive(Debug, Clone, Default)]
pub struct SymbolicConstants {
    values: BTreeMap<ConstantName, CoefficientValue>,
}

impl SymbolicConstants {
    pub fn set(&mut self, c: SymbolicConstant) -> Result<()> {
        if c.value.is_zero() {
            return Err(Error::Invalid(alloc::format!("{} must be non-zero", c.name)));
        }
        self.values.insert(c.name, c.value);
        Ok(())
    }

    pub fn get(&self, name: ConstantName) -> CoefficientValue {
        self.values.get(&name).cloned().unwrap_or_else(|| CoefficientValue::int(1))
    }

    pub fn is_set(&self, name: ConstantName) -> bool {
        self.values.contains_key(&name)
    }
}

/// A value together with the symbolic constants it was multiplied by.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicValue {
    pub value: CoefficientValue,
    pub deps: BTreeSet<ConstantName>,
}

impl SymbolicValue {
    pub fn deps_string(&self) -> alloc::string::String {
        let v: Vec<&str> = self.deps.iter().map(|d| d.name()).collect();
        v.join(";")
    }
}

// ---------------------------------------------------------------------------
// L-factors

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LFactorKind {
    Zeta,
    Eta,
    PiChi,
}

/// A local L-factor stored as a rational function of its natural variable:
/// `X = q^{-s}` for `ζ_P` and `L(s, η)`, and `V = q^{-s-1/2}` for
/// `L(s, π, χ)` (`half_shift`).
#[derive(Debug, Clone)]
pub struct LFactor {
    pub kind: LFactorKind,
    pub half_shift: bool,
    f: Lrf,
}

fn shift_half(s: SValue) -> SValue {
    match s.canonical() {
        SValue::Int(k) => SValue::Half(2 * k + 1),
        SValue::Half(k) => SValue::Half(k + 1).canonical(),
        SValue::Real(x) => SValue::Real(x + 0.5),
        SValue::Complex(z) => SValue::Complex(z + Complex64::new(0.5, 0.0)),
    }
}

impl LFactor {
    pub fn in_variable(&self) -> &Lrf {
        &self.f
    }

    /// Value at `s`; exact whenever the variable is an integral power of `q`.
    pub fn evaluate(&self, s: impl Into<SValue>) -> Result<CoefficientValue> {
        let s = s.into();
        let t = if self.half_shift { shift_half(s) } else { s };
        self.f.evaluate_at_s(t)
    }

    /// `1/L(s)`; finite where `L` has a pole.
    pub fn reciprocal_at(&self, s: impl Into<SValue>) -> Result<CoefficientValue> {
        let s = s.into();
        let t = if self.half_shift { shift_half(s) } else { s };
        self.f.inv()?.evaluate_at_s(t)
    }

    /// `L(ε·s + h2/2)` as a function of `X`, for `ε = ±1`; the total shift
    /// must be integral.
    pub fn in_x(&self, eps: i64, h2: i64) -> Result<Lrf> {
        if eps != 1 && eps != -1 {
            return Err(Error::Invalid("eps must be +1 or -1".into()));
        }
        let e2 = h2 + i64::from(self.half_shift);
        if e2 % 2 != 0 {
            return Err(Error::Invalid("shift leaves a half-integral power of q".into()));
        }
        Ok(self.f.compose_monomial(&cq(q_pow(self.f.q(), -e2 / 2)), eps))
    }
}

/// `ζ_P`, `L(s, η)`, or `L(s, π, χ)` for `α = ±1` and unramified `χ`.
pub fn l_factor(
    kind: LFactorKind,
    case: &LocalTorusCase,
    alpha: i64,
    chi: Option<&TorusCharacter>,
) -> Result<LFactor> {
    let q = case.q();
    let f = match kind {
        LFactorKind::Zeta => zeta(q),
        LFactorKind::Eta => case.l_eta(),
        LFactorKind::PiChi => {
            check_alpha(alpha)?;
            let chi = chi.ok_or_else(|| Error::Invalid("pi_chi factor needs a character".into()))?;
            check_character(case, chi)?;
            if !chi.is_unramified() {
                return Err(Error::RamifiedCharacter);
            }
            let one = CoefficientValue::int(1);
            let lin = |c: CoefficientValue| Lrf::binomial(one.clone(), -c, 1, q);
            let den = match case.kind {
                TorusKind::Split => {
                    let a = twisted_uniformizer(alpha, chi).expect("split characters carry chi(varpi)");
                    lin(a.clone()).mul(&lin(a.inv()))
                }
                TorusKind::Inert => Lrf::binomial(one.clone(), CoefficientValue::int(-1), 2, q),
                TorusKind::Ramified => lin(twisted_uniformizer(alpha, chi).expect("ramified characters carry chi(varpi_K)")),
            };
            den.inv()?
        }
    };
    Ok(LFactor { kind, half_shift: kind == LFactorKind::PiChi, f })
}

// ---------------------------------------------------------------------------
// I_T(χ, s)

/// `ζ_P(2s−1)/ζ_P(2−2s) = (1 − q^{-2}X^{-2})/(1 − qX²)`.
fn zeta_ratio(q: u64) -> Lrf {
    let num = one_minus(&mono(q_pow(q, -2), -2, q));
    num.div(&one_minus(&y_pow(1, q))).expect("non-zero")
}

/// The statement form `q^{(2−2s)n_T} L(1,η) ζ_P(2s−1)/ζ_P(2−2s) · B(s)` with
/// `B = q^{(1−2s)n_χ}` for ramified `χ` and `L(−s+½,π,χ)/L(s−½,π,χ)` otherwise.
pub fn i_t_statement(case: &LocalTorusCase, alpha: i64, chi: &TorusCharacter) -> Result<Lrf> {
    check_alpha(alpha)?;
    check_character(case, chi)?;
    let q = case.q();
    let l_eta = l_factor(LFactorKind::Eta, case, alpha, None)?.evaluate(1)?;
    let pref = qx(2 * case.n_t, q).mul(&zeta_ratio(q)).scale(&l_eta);
    let b = if chi.is_unramified() {
        let l = l_factor(LFactorKind::PiChi, case, alpha, Some(chi))?;
        l.in_x(-1, 1)?.div(&l.in_x(1, -1)?)?
    } else {
        y_pow(chi.conductor as i64, q)
    };
    Ok(pref.mul(&b))
}

/// `∫_{H_from} θ_T(s)(t) χ(t) d^×t` over the unit part, i.e.
/// `Σ_{n≥from} q^{(2−2s)(n_T+n)} ∫_{H_n∖H_{n+1}} χ`, summed exactly: beyond
/// `max(n_χ, 1)` the shell masses decay like `q^{-n}` and the tail is geometric.
pub fn unit_theta_integral(case: &LocalTorusCase, chi: &TorusCharacter, from: i64) -> Result<Lrf> {
    if from < 0 {
        return Err(Error::NegativeShell(from));
    }
    let q = case.q();
    let n0 = from.max(chi.conductor as i64).max(1);
    let mut acc = Lrf::zero(q);
    for n in from..n0 {
        let d = shell_character_difference(case, chi, n)?;
        acc = acc.add(&qx(2 * (case.n_t + n), q).scale(&cq(d)));
    }
    let d = shell_character_difference(case, chi, n0)?;
    let tail = qx(2 * (case.n_t + n0), q).scale(&cq(d)).div(&one_minus(&y_pow(1, q)))?;
    Ok(acc.add(&tail))
}

/// The proof form: split tori add the two valuation sums
/// `Σ_{m≥1} (αχ(ϖ)^{±1} q^{s−1})^m · q^{2n_T(1−s)} ∫_{O^×}χ` to the unit
/// shells; ramified tori add the `ϖ_K` coset.
pub fn i_t_proofform(case: &LocalTorusCase, alpha: i64, chi: &TorusCharacter) -> Result<Lrf> {
    check_alpha(alpha)?;
    check_character(case, chi)?;
    let q = case.q();
    let mut total = unit_theta_integral(case, chi, 0)?;
    let i0 = cq(shell_character_integral(case, chi, 0)?);
    match case.kind {
        TorusKind::Split => {
            let a = twisted_uniformizer(alpha, chi).ok_or_else(|| Error::Invalid("missing chi(varpi)".into()))?;
            let pref = qx(2 * case.n_t, q).scale(&i0);
            for c in [a.clone(), a.inv()] {
                let r = Lrf::monomial(c * cq(q_pow(q, -1)), -1, q);
                total = total.add(&pref.mul(&geometric_tail(&r)?));
            }
        }
        TorusKind::Ramified => {
            let a = twisted_uniformizer(alpha, chi).ok_or_else(|| Error::Invalid("missing chi(varpi_K)".into()))?;
            total = total.add(&qx(2 * case.n_t - 1, q).scale(&(a * i0)));
        }
        TorusKind::Inert => {}
    }
    Ok(total)
}

/// The closed forms as printed case by case at the end of each branch of the
/// derivation, with `Y = q^{1−2s}`.
pub fn i_t_printed(case: &LocalTorusCase, alpha: i64, chi: &TorusCharacter) -> Result<Lrf> {
    check_alpha(alpha)?;
    check_character(case, chi)?;
    let q = case.q();
    let qq = qi(q as i64);
    let pref = qx(2 * case.n_t, q);
    let y1 = one_minus(&y_pow(1, q));
    let n = chi.conductor as i64;
    // (qY^n − Y^{n−1}) / (1 − Y)
    let ramified_shape = || y_pow(n, q).scale(&cq(qq.clone())).sub(&y_pow(n - 1, q)).div(&y1);
    let one = CoefficientValue::int(1);
    let out = match (case.kind, n) {
        (TorusKind::Split, 0) => {
            let a = twisted_uniformizer(alpha, chi).expect("validated");
            let lin = |c: CoefficientValue, k: i64| Lrf::binomial(one.clone(), -c, k, q);
            let num = lin(a.clone(), 1).mul(&lin(a.inv(), 1));
            let den = lin(a.clone() * cq(q_pow(q, -1)), -1).mul(&lin(a.inv() * cq(q_pow(q, -1)), -1));
            let head = one_minus(&mono(q_pow(q, -2), -2, q))
                .div(&y1.scale(&cq(qi(1) - q_pow(q, -1))))?;
            head.mul(&num.div(&den)?)
        }
        (TorusKind::Split, _) => ramified_shape()?.scale(&cq(qi(1) / (qq.clone() - qi(1)))),
        (TorusKind::Inert, 0) => {
            one_minus(&mono(qi(1), 2, q)).div(&y1.scale(&cq(qi(1) + q_pow(q, -1))))?
        }
        (TorusKind::Inert, _) => ramified_shape()?.scale(&cq(qi(1) / (qq.clone() + qi(1)))),
        (TorusKind::Ramified, 0) => {
            let a = twisted_uniformizer(alpha, chi).expect("validated");
            let f1 = Lrf::binomial(one.clone(), -a.clone(), 1, q);
            let f2 = Lrf::binomial(one.clone(), a * cq(q_pow(q, -1)), -1, q);
            f1.mul(&f2).div(&y1)?
        }
        (TorusKind::Ramified, _) => ramified_shape()?.scale(&cq(qi(1) / qq.clone())),
    };
    Ok(pref.mul(&out))
}

/// `I_T(χ, 0) = 0` exactly when `χ = α^{ν∘det}` on `T(F)`: unramified, and
/// `αχ(ϖ) = 1` (split), `αχ(ϖ_K) = 1` (ramified); for inert tori
/// `ν∘det` is even, so only the trivial character qualifies.
pub fn is_exceptional(alpha: i64, chi: &TorusCharacter, case: &LocalTorusCase) -> bool {
    if !chi.is_unramified() || chi.case.kind != case.kind {
        return false;
    }
    match case.kind {
        TorusKind::Inert => true,
        _ => twisted_uniformizer(alpha, chi).is_some_and(|a| a.is_one()),
    }
}

/// An oracle value with its truncation error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: Complex64,
    pub tail_bound: f64,
    /// Set when a split valuation sum diverges at `s` and was replaced by its
    /// geometric continuation `r/(1 − r)`.
    pub continued: bool,
}

/// Brute-force shell masses `∫_{H_n} χ` for one character, reusable across
/// `α`, `n_T` and `s`.
#[derive(Debug, Clone)]
pub struct OracleShells {
    case: LocalTorusCase,
    level: u32,
    masses: Vec<Complex64>,
    /// `χ`-average over `H_level`, which scales `vol(H_n)` for deeper `n`.
    deep_average: Complex64,
}

impl OracleShells {
    pub fn new(case: &LocalTorusCase, chi: &TorusCharacter) -> Result<Self> {
        check_character(case, chi)?;
        case.field.require_enumerable()?;
        let level = chi.conductor + 2;
        let masses = (0..=level as i64)
            .map(|n| brute_shell_character_integral(case, chi, n, level).map(|v| v.to_complex()))
            .collect::<Result<Vec<_>>>()?;
        let vol = shell_volume(case, level as i64)?.to_f64().unwrap();
        let deep_average = masses[level as usize] / vol;
        Ok(Self { case: *case, level, masses, deep_average })
    }

    pub fn mass(&self, n: i64) -> Complex64 {
        if n <= self.level as i64 {
            self.masses[n as usize]
        } else {
            self.deep_average * shell_volume(&self.case, n).unwrap().to_f64().unwrap()
        }
    }
}

/// Direct summation of `∫ θ_T(s) χ` over `|m| ≤ N` and shells `n ≤ N`.
pub fn i_t_oracle(
    case: &LocalTorusCase,
    alpha: i64,
    chi: &TorusCharacter,
    s: f64,
    truncation: u32,
) -> Result<OracleValue> {
    let shells = OracleShells::new(case, chi)?;
    i_t_oracle_with(&shells, case, alpha, chi, s, truncation)
}

/// [`i_t_oracle`] with precomputed shell masses.
pub fn i_t_oracle_with(
    shells: &OracleShells,
    case: &LocalTorusCase,
    alpha: i64,
    chi: &TorusCharacter,
    s: f64,
    truncation: u32,
) -> Result<OracleValue> {
    check_alpha(alpha)?;
    if s.is_nan() || s <= 0.5 {
        return Err(Error::Divergent(alloc::format!("{s}")));
    }
    if shells.case.kind != case.kind || shells.case.field != case.field {
        return Err(Error::Invalid("shell table belongs to a different torus".into()));
    }
    let q = case.q() as f64;
    let big_n = truncation as i64;
    let w = |k: i64| q.powf(k as f64 * (1.0 - s));
    let mut value = Complex64::new(0.0, 0.0);
    for n in 0..=big_n {
        value += (shells.mass(n) - shells.mass(n + 1)) * w(2 * (case.n_t + n));
    }
    // remaining shells carry |χ-average| · vol(H_n ∖ H_{n+1}) ∝ q^{-n}
    let dv = shell_difference_volume(case, big_n + 1)?.to_f64().unwrap();
    let mut tail_bound = shells.deep_average.norm() * dv * w(2 * (case.n_t + big_n + 1)) / (1.0 - q.powf(1.0 - 2.0 * s));
    let mut continued = false;
    let i0 = shells.mass(0);
    match case.kind {
        TorusKind::Split if i0.norm() > 1e-300 => {
            let a = twisted_uniformizer(alpha, chi).expect("validated").to_complex();
            for c in [a, a.inv()] {
                let r = c * q.powf(s - 1.0);
                let sum = if r.norm() < 1.0 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut rm = Complex64::new(1.0, 0.0);
                    for _ in 1..=big_n {
                        rm *= r;
                        acc += rm;
                    }
                    tail_bound += w(2 * case.n_t) * i0.norm() * r.norm().powi(big_n as i32 + 1) / (1.0 - r.norm());
                    acc
                } else if (r - 1.0).norm() < 1e-12 {
                    return Err(Error::Pole { order: 1 });
                } else {
                    continued = true;
                    r / (1.0 - r)
                };
                value += sum * i0 * w(2 * case.n_t);
            }
        }
        TorusKind::Ramified => {
            let a = twisted_uniformizer(alpha, chi).expect("validated").to_complex();
            value += a * i0 * w(2 * case.n_t - 1);
        }
        _ => {}
    }
    Ok(OracleValue { value, tail_bound, continued })
}

// ---------------------------------------------------------------------------
// Euler factor and the pairing α_{π,χ}

/// `ξ_P` at the points where it enters; defaults to `ζ_P`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiValues {
    pub at_one: CoefficientValue,
    pub at_two: CoefficientValue,
    pub at_minus_one: CoefficientValue,
}

impl XiValues {
    pub fn zeta_default(q: u64) -> Self {
        let z = |s: i64| zeta(q).evaluate_at_s(s).expect("no pole away from s = 0");
        Self { at_one: z(1), at_two: z(2), at_minus_one: z(-1) }
    }
}

/// `L(1, π, ad)` and `L(½, π, χ)` for a spherical `π`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalLValues {
    pub l_ad: CoefficientValue,
    pub l_half: CoefficientValue,
}

impl SphericalLValues {
    /// Satake-parameter defaults with `β = α/√q` (floating point).
    pub fn satake_default(case: &LocalTorusCase, alpha: &CoefficientValue, chi: &TorusCharacter) -> Self {
        let q = case.q() as f64;
        let b = alpha.to_complex() / q.sqrt();
        let one = Complex64::new(1.0, 0.0);
        let l_ad = one / ((one - b * b / q) * (1.0 - 1.0 / q) * (one - one / (b * b * q)));
        let e = |z: Complex64| one / (one - z);
        let rq = 1.0 / q.sqrt();
        let l_half = if !chi.is_unramified() {
            one
        } else {
            match case.kind {
                TorusKind::Split => {
                    let c = chi.uniformizer_value.as_ref().expect("validated").to_complex();
                    e(b * c * rq) * e(b / c * rq) * e(c / b * rq) * e(one / (b * c) * rq)
                }
                TorusKind::Inert => e(b * b / q) * e(one / (b * b * q)),
                TorusKind::Ramified => {
                    let c = chi.uniformizer_value.as_ref().expect("validated").to_complex();
                    e(b * c * rq) * e(c / b * rq)
                }
            }
        };
        Self { l_ad: CoefficientValue::Float(l_ad), l_half: CoefficientValue::Float(l_half) }
    }
}

/// Normalisations and overrides entering the pairings.
#[derive(Debug, Clone)]
pub struct PairingContext {
    pub constants: SymbolicConstants,
    pub xi: XiValues,
    /// Spherical-branch L-values; Satake defaults when absent.
    pub spherical: Option<SphericalLValues>,
    /// `L(1, π, ad)` for the Steinberg branch; `ζ_P(2)` when absent.
    pub l_ad_special: Option<CoefficientValue>,
}

impl PairingContext {
    pub fn new(q: u64) -> Self {
        Self { constants: SymbolicConstants::default(), xi: XiValues::zeta_default(q), spherical: None, l_ad_special: None }
    }

    pub fn l_ad_special(&self, q: u64) -> CoefficientValue {
        self.l_ad_special.clone().unwrap_or_else(|| zeta(q).evaluate_at_s(2).expect("finite"))
    }
}

/// `e_P(π, χ)`: `L(1,π,ad)/L(½,π,χ)` (spherical), `1/L(−½,π,χ)` (special,
/// unramified `χ`), `q^{n_χ}/L(½,π,χ)` with `L(½,π,χ) = 1` (special, ramified `χ`).
pub fn euler_factor(
    case: &LocalTorusCase,
    datum: &SteinbergDatum,
    chi: &TorusCharacter,
    spherical: Option<&SphericalLValues>,
) -> Result<CoefficientValue> {
    check_character(case, chi)?;
    match datum {
        SteinbergDatum::Spherical { alpha } => {
            let v = spherical.cloned().unwrap_or_else(|| SphericalLValues::satake_default(case, alpha, chi));
            Ok(v.l_ad / v.l_half)
        }
        SteinbergDatum::Special { alpha } if chi.is_unramified() => {
            l_factor(LFactorKind::PiChi, case, *alpha, Some(chi))?.reciprocal_at(SValue::Half(-1))
        }
        SteinbergDatum::Special { .. } => Ok(cq(q_pow(case.q(), chi.conductor as i64))),
    }
}

/// `K_T`: `c_T L(1,η)/ξ(2)` (spherical) or `c_T C̄_T L(1,η)² ξ(−1) q^{2n_T}/ξ(2)`.
pub fn k_t(case: &LocalTorusCase, datum: &SteinbergDatum, ctx: &PairingContext) -> SymbolicValue {
    let c = &ctx.constants;
    if c.is_set(ConstantName::KT) {
        return SymbolicValue { value: c.get(ConstantName::KT), deps: BTreeSet::from([ConstantName::KT]) };
    }
    let eta = cq(case.l_eta_at_one());
    match datum {
        SteinbergDatum::Spherical { .. } => SymbolicValue {
            value: c.get(ConstantName::CT) * eta / ctx.xi.at_two.clone(),
            deps: BTreeSet::from([ConstantName::CT]),
        },
        SteinbergDatum::Special { .. } => SymbolicValue {
            value: c.get(ConstantName::CT) * c.get(ConstantName::CTBar) * eta.clone() * eta
                * ctx.xi.at_minus_one.clone()
                * cq(q_pow(case.q(), 2 * case.n_t))
                / ctx.xi.at_two.clone(),
            deps: BTreeSet::from([ConstantName::CT, ConstantName::CTBar]),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingValue {
    pub value: CoefficientValue,
    pub k_t: CoefficientValue,
    pub e_p: CoefficientValue,
    /// `e_P` vanishes identically: an exceptional zero.
    pub exceptional: bool,
    pub deps: BTreeSet<ConstantName>,
}

/// `α_{π,χ}(δ_T f₁, δ_T f₂) = K_T e_P (∫ f₁χ^{-1}) conj(∫ f₂χ^{-1})`.
pub fn pairing_alpha(
    case: &LocalTorusCase,
    datum: &SteinbergDatum,
    chi: &TorusCharacter,
    f1: &crate::torus::ShellFunction,
    f2: &crate::torus::ShellFunction,
    ctx: &PairingContext,
) -> Result<PairingValue> {
    let e_p = euler_factor(case, datum, chi, ctx.spherical.as_ref())?;
    let k = k_t(case, datum, ctx);
    let exceptional = datum.is_special() && e_p.is_zero();
    if exceptional {
        return Ok(PairingValue { value: CoefficientValue::int(0), k_t: k.value, e_p, exceptional, deps: k.deps });
    }
    let i1 = f1.integrate_character(chi, true)?;
    let i2 = f2.integrate_character(chi, true)?;
    let value = k.value.clone() * e_p.clone() * i1 * i2.conj();
    Ok(PairingValue { value, k_t: k.value, e_p, exceptional, deps: k.deps })
}

/// `⟨f_P, f_P⟩` from the case table. `extra` is `n_s` (spherical) or ignored
/// in favour of `case.n_t` (special).
pub fn inner_product_fp(
    case: &LocalTorusCase,
    datum: &SteinbergDatum,
    n_s: i64,
    constants: &SymbolicConstants,
) -> SymbolicValue {
    let q = case.q();
    let qinv = q_pow(q, -1);
    let ct = constants.get(ConstantName::CT);
    match datum {
        SteinbergDatum::Spherical { .. } => {
            let v = match case.kind {
                TorusKind::Inert => qi(1),
                TorusKind::Split => q_pow(q, n_s) * (qi(1) + &qinv) / (qi(1) - &qinv),
                TorusKind::Ramified => qi(1) + &qinv,
            };
            SymbolicValue { value: ct * cq(v), deps: BTreeSet::from([ConstantName::CT]) }
        }
        SteinbergDatum::Special { .. } => {
            let l = match case.kind {
                TorusKind::Inert => qi(1) / ((qi(1) + &qinv) * (qi(1) + &qinv)),
                TorusKind::Split => qi(1) / ((qi(1) - &qinv) * (qi(1) - &qinv)),
                TorusKind::Ramified => qi(1),
            };
            let v = -q_pow(q, 2 * case.n_t - 1) * l;
            SymbolicValue {
                value: ct * constants.get(ConstantName::CTBar) * cq(v),
                deps: BTreeSet::from([ConstantName::CT, ConstantName::CTBar]),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// F(0)(t) for the split Steinberg pairing of 1_U

fn require_split(case: &LocalTorusCase) -> Result<()> {
    if case.kind != TorusKind::Split {
        return Err(Error::NonSplit);
    }
    Ok(())
}

/// `F(0)(t)` as a function of `k = ord(t)`.
pub fn f0_of_t(case: &LocalTorusCase, ord_t: i64) -> Result<Q> {
    require_split(case)?;
    let q = case.q();
    let qq = qi(q as i64);
    let base = q_pow(q, 2 * case.n_t);
    Ok(if ord_t > 0 {
        let d = qi(1) - q_pow(q, -1);
        base * q_pow(q, -ord_t) / (&d * &d)
    } else {
        let d = qi(1) - qq;
        base * q_pow(q, ord_t) / (&d * &d)
    })
}

/// `∫_{ϖ^m O^×} |1 − y|^{2s−2} d^×y` as a function of `X`; the unit shell
/// `m = 0` is the trivial-character shell sum.
pub fn f0_inner_integral(q: u64, m_y: i64) -> Result<Lrf> {
    use core::cmp::Ordering;
    Ok(match m_y.cmp(&0) {
        Ordering::Greater => Lrf::one(q),
        Ordering::Less => qx(2 * m_y, q),
        Ordering::Equal => {
            let field = crate::padic::PrimeLocalField::new(prime_of(q)?, exponent_of(q)?)?;
            let case = LocalTorusCase::new(TorusKind::Split, field, 0);
            let chi = TorusCharacter::trivial(&case, Some(CoefficientValue::int(1)))?;
            unit_theta_integral(&case, &chi, 0)?
        }
    })
}

fn prime_of(q: u64) -> Result<u64> {
    (2..=q).find(|d| q.is_multiple_of(*d)).ok_or_else(|| Error::Invalid("q < 2".into()))
}

fn exponent_of(q: u64) -> Result<u32> {
    let p = prime_of(q)?;
    let mut k = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        k += 1;
    }
    if r != 1 {
        return Err(Error::Invalid(alloc::format!("{q} is not a prime power")));
    }
    Ok(k)
}

/// `F(0)(t) = q^{2n_T} Σ_{m_x ≥ k} Σ_{m_y ≥ m_x} q^{-m_y} J(m_y)|_{s=0}`, written
/// as `Σ_{m ≥ k} (m − k + 1) q^{-m} J(m)`: explicit up to `m = N`, then the
/// closed form of `Σ_{m>N} (m − k + 1) q^{-m}` (all `J(m) = 1` there).
pub fn f0_oracle(case: &LocalTorusCase, ord_t: i64, truncation: i64) -> Result<Q> {
    require_split(case)?;
    if truncation < ord_t.max(0) {
        return Err(Error::Truncation(truncation));
    }
    let q = case.q();
    let mut acc = Q::zero();
    for m in ord_t..=truncation {
        let j = f0_inner_integral(q, m)?.evaluate_at_s(0)?;
        let j = j.as_rational().cloned().ok_or_else(|| Error::Invalid("inexact inner integral".into()))?;
        acc += qi(m - ord_t + 1) * q_pow(q, -m) * j;
    }
    let r = q_pow(q, -1);
    let c = truncation + 1;
    let one_r = qi(1) - &r;
    let tail = q_pow(q, -c) * (qi(c - ord_t + 1) / &one_r + &r / (&one_r * &one_r));
    Ok(q_pow(q, 2 * case.n_t) * (acc + tail))
}

/// `Σ_{k∈Z} F(0)(ϖ^k) vol(ϖ^k O^×)`: explicit on `|k| ≤ W`, geometric outside.
pub fn f0_summed(case: &LocalTorusCase, window: i64) -> Result<Q> {
    require_split(case)?;
    let q = case.q();
    let mut acc = Q::zero();
    for k in -window..=window {
        acc += f0_of_t(case, k)?;
    }
    // both tails have ratio q^{-1}
    let r = q_pow(q, -1);
    let g = &r / (qi(1) - &r);
    acc += f0_of_t(case, window)? * &g + f0_of_t(case, -window)? * g;
    Ok(acc)
}

/// `q^{2n_T} q^{-1}(1 + q^{-1})/(1 − q^{-1})³`.
pub fn f0_total_closed(case: &LocalTorusCase) -> Result<Q> {
    require_split(case)?;
    let q = case.q();
    let r = q_pow(q, -1);
    let d = qi(1) - &r;
    Ok(q_pow(q, 2 * case.n_t) * &r * (qi(1) + &r) / (&d * &d * &d))
}

/// `α_{π,1}(δ_T 1_U, δ_T 1_U) = L(1,η)L(1,π,ad)/(ζ_P(2)L(½,π,1)) · c_T C̄_T ∫ F(0)`.
pub fn alpha_1u_pairing(case: &LocalTorusCase, ctx: &PairingContext) -> Result<SymbolicValue> {
    require_split(case)?;
    let q = case.q();
    let trivial = TorusCharacter::trivial(case, Some(CoefficientValue::int(1)))?;
    let l_half = l_factor(LFactorKind::PiChi, case, 1, Some(&trivial))?.evaluate(SValue::Half(1))?;
    let z2 = zeta(q).evaluate_at_s(2)?;
    let c = &ctx.constants;
    let value = cq(case.l_eta_at_one()) * ctx.l_ad_special(q) / (z2 * l_half)
        * c.get(ConstantName::CT)
        * c.get(ConstantName::CTBar)
        * cq(f0_summed(case, 8)?);
    Ok(SymbolicValue { value, deps: BTreeSet::from([ConstantName::CT, ConstantName::CTBar]) })
}
