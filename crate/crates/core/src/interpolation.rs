//! Assembly of interpolation constants: the Euler factor `C(π_P, χ_P)`, the
//! local constants `C_v`, the explicit interpolation value, `C(π_P)` for the
//! Steinberg derivative formula, Tate-lattice L-invariants and the derivative
//! class in `I/I²`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::coeff::CoefficientValue;
use crate::error::{Error, Result};
use crate::integrals::{euler_factor, l_factor, LFactorKind, SphericalLValues, SteinbergDatum};
use crate::iwasawa::{phi_map, FiniteLevelGroup, GroupAlgebraElement};
use crate::padic::{mod_inv, q_pow, qi, residue, valuation};
use crate::rational_forms::{zeta, SValue};
use crate::steinberg::LocalHomomorphism;
use crate::torus::{LocalTorusCase, TorusCharacter, TorusKind};
use crate::Q;

/// `C(π_P, χ_P)`: the three-row table (`|α|² = q`; `α = ±1` with unramified
/// `χ`; `α = ±1` with ramified `χ`). Exceptional configurations give `0`.
pub fn euler_factor_c(
    case: &LocalTorusCase,
    datum: &SteinbergDatum,
    chi: &TorusCharacter,
    spherical: Option<&SphericalLValues>,
) -> Result<CoefficientValue> {
    euler_factor(case, datum, chi, spherical)
}

/// A value depending on named caller inputs; absent inputs count as `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledValue {
    pub value: CoefficientValue,
    pub deps: BTreeSet<&'static str>,
}

/// Local data at a place `v` for `C_v`.
#[derive(Debug, Clone)]
pub struct PlaceData {
    pub q: u64,
    pub kind: TorusKind,
    pub pi: SteinbergDatum,
    /// `v | disc(B)`.
    pub in_disc_b: bool,
    /// `χ_v(ϖ)` (split, ramified: `χ_v(ϖ_K)`).
    pub chi_uniformizer: CoefficientValue,
    /// `gcd(𝔫, d_{K/F})` square free.
    pub assumption_square_free: bool,
    pub vol_t: Option<CoefficientValue>,
    pub l_half: Option<CoefficientValue>,
    pub l_ad: Option<CoefficientValue>,
    pub whittaker_norm: Option<CoefficientValue>,
    pub norm_disc: Option<CoefficientValue>,
}

impl PlaceData {
    pub fn new(q: u64, kind: TorusKind, pi: SteinbergDatum) -> Self {
        Self {
            q,
            kind,
            pi,
            in_disc_b: false,
            chi_uniformizer: CoefficientValue::int(1),
            assumption_square_free: true,
            vol_t: None,
            l_half: None,
            l_ad: None,
            whittaker_norm: None,
            norm_disc: None,
        }
    }
}

fn input(v: &Option<CoefficientValue>, name: &'static str, deps: &mut BTreeSet<&'static str>) -> CoefficientValue {
    deps.insert(name);
    v.clone().unwrap_or_else(|| CoefficientValue::int(1))
}

/// `C_v = β(f_v, f_v)/⟨f_v, f_v⟩` for unramified `χ_v`.
pub fn c_v_constant(place: &PlaceData) -> Result<AssembledValue> {
    if !place.assumption_square_free {
        return Err(Error::Invalid("gcd(n, d_K/F) must be square free".into()));
    }
    let mut deps = BTreeSet::new();
    let value = match (place.kind, &place.pi) {
        (TorusKind::Inert, _) => input(&place.vol_t, "vol_T", &mut deps),
        (TorusKind::Ramified, SteinbergDatum::Spherical { .. }) => {
            let xi2 = zeta(place.q).evaluate_at_s(2)?;
            input(&place.l_half, "L_half", &mut deps) * xi2 / input(&place.l_ad, "L_ad", &mut deps)
                * input(&place.vol_t, "vol_T", &mut deps)
        }
        (TorusKind::Ramified, SteinbergDatum::Special { alpha }) => {
            if !place.in_disc_b {
                let prod = CoefficientValue::int(*alpha) * place.chi_uniformizer.clone();
                if prod != CoefficientValue::int(-1) {
                    return Err(Error::Invalid("Hom space vanishes: alpha chi(varpi_K) != -1".into()));
                }
            }
            input(&place.vol_t, "vol_T", &mut deps)
        }
        (TorusKind::Split, _) => {
            input(&place.l_half, "L_half", &mut deps) * input(&place.norm_disc, "N_D", &mut deps)
                / input(&place.whittaker_norm, "W_norm", &mut deps)
        }
    };
    Ok(AssembledValue { value, deps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Definite,
    Indefinite,
}

/// Inputs of the explicit interpolation formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationInputs {
    pub setting: Setting,
    pub degree: u32,
    pub norm_disc: f64,
    pub k_ram: f64,
    pub e_factor: f64,
    pub l_ratio: f64,
    pub norm_f_sq: f64,
}

/// `√N(d_{K/F})/2^{d}` (definite) or `/2^{d+1}` (indefinite), times
/// `K_ram · e · L / ‖f‖²`.
pub fn interpolation_value(i: &InterpolationInputs) -> Result<f64> {
    if i.norm_disc < 0.0 || i.norm_f_sq <= 0.0 {
        return Err(Error::NegativeNorm);
    }
    let pow = i.degree + u32::from(i.setting == Setting::Indefinite);
    Ok(libm::sqrt(i.norm_disc) / libm::ldexp(1.0, pow as i32) * i.k_ram * i.e_factor * i.l_ratio / i.norm_f_sq)
}

/// `L(½, π_P, 1)` for the split Steinberg representation with `α = 1`.
fn steinberg_l_half(q: u64) -> Result<CoefficientValue> {
    let case = split_case(q)?;
    let triv = TorusCharacter::trivial(&case, Some(CoefficientValue::int(1)))?;
    l_factor(LFactorKind::PiChi, &case, 1, Some(&triv))?.evaluate(SValue::Half(1))
}

fn split_case(q: u64) -> Result<LocalTorusCase> {
    Ok(LocalTorusCase::new(TorusKind::Split, crate::padic::PrimeLocalField::prime(q)?, 0))
}

/// `C(π_P) = −L(1,π_P,ad) ζ_P(1)²/L(½,π_P,1)`.
pub fn c_pi_steinberg(q: u64, ad_value: &CoefficientValue) -> Result<CoefficientValue> {
    let z1 = zeta(q).evaluate_at_s(1)?;
    Ok(-ad_value.clone() * z1.clone() * z1 / steinberg_l_half(q)?)
}

/// `L(s+½, π_P, 1) = ζ_P(s+1)²` as rational functions of `X`.
pub fn c_pi_cancellation(q: u64) -> Result<bool> {
    let case = split_case(q)?;
    let triv = TorusCharacter::trivial(&case, Some(CoefficientValue::int(1)))?;
    let l = l_factor(LFactorKind::PiChi, &case, 1, Some(&triv))?.in_x(1, 1)?;
    let z = zeta(q).compose_monomial(&CoefficientValue::rational(q_pow(q, -1)), 1);
    l.equal(&z.mul(&z))
}

/// A `p`-adic number `p^shift · digits` with `digits` known mod `p^prec`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PAdicApprox {
    pub shift: i64,
    pub digits: u128,
    pub prec: u32,
}

impl PAdicApprox {
    /// The value as an element of `Z/p^prec` when `shift ≥ 0`.
    pub fn to_residue(&self, p: u64) -> Option<u128> {
        if self.shift < 0 {
            return None;
        }
        let m = (p as u128).pow(self.prec);
        Some(self.digits * (p as u128).pow(self.shift as u32) % m)
    }
}

pub type IntMatrix = Vec<Vec<i64>>;

/// The pairing `j : X × Y → F_P^×` through its values `j(x_i, y_k)`.
#[derive(Debug, Clone)]
pub struct TateLatticePairing {
    pub p: u64,
    pub j: Vec<Vec<Q>>,
    /// Matrices of the `O_L`-action, if any.
    pub actions: Vec<IntMatrix>,
}

impl TateLatticePairing {
    pub fn new(p: u64, j: Vec<Vec<Q>>) -> Result<Self> {
        let d = j.len();
        if d == 0 || j.iter().any(|r| r.len() != d) {
            return Err(Error::Invalid("pairing matrix must be square".into()));
        }
        Ok(Self { p, j, actions: Vec::new() })
    }

    pub fn rank(&self) -> usize {
        self.j.len()
    }

    pub fn j_ord(&self) -> Result<IntMatrix> {
        self.j.iter().map(|r| r.iter().map(|x| valuation(x, self.p)).collect()).collect()
    }
}

fn det_adj(m: &IntMatrix) -> (i128, Vec<Vec<i128>>) {
    let d = m.len();
    let mi: Vec<Vec<Q>> = m.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect();
    let det = det_q(&mi);
    let adj = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    // adj[i][j] = (−1)^{i+j} minor(j, i)
                    let minor: Vec<Vec<Q>> = (0..d)
                        .filter(|&r| r != j)
                        .map(|r| (0..d).filter(|&c| c != i).map(|c| mi[r][c].clone()).collect())
                        .collect();
                    let v = if d == 1 { qi(1) } else { det_q(&minor) };
                    let v = if (i + j) % 2 == 0 { v } else { -v };
                    to_i128(&v)
                })
                .collect()
        })
        .collect();
    (to_i128(&det), adj)
}

fn to_i128(x: &Q) -> i128 {
    use num_traits::ToPrimitive;
    x.to_integer().to_i128().expect("small integer matrix")
}

fn det_q(m: &[Vec<Q>]) -> Q {
    use num_traits::Zero;
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut det = qi(1);
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| !a[r][c].is_zero()) else { return qi(0) };
        if r != c {
            a.swap(r, c);
            det = -det;
        }
        det *= a[c][c].clone();
        let (top, rest) = a.split_at_mut(c + 1);
        let pivot = &top[c];
        for row in rest {
            let f = &row[c] / &pivot[c];
            for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x -= &f * y;
            }
        }
    }
    det
}

/// `ℒ(ℓ) = J_ℓ J_ord^{-1}` with entries `p^{-ν(det J_ord)}·(digits mod p^M)`.
/// When action matrices are present the result must commute with them.
pub fn geometric_l_invariant(pairing: &TateLatticePairing, ell: &LocalHomomorphism) -> Result<Vec<Vec<PAdicApprox>>> {
    let p = pairing.p;
    let d = pairing.rank();
    let jo = pairing.j_ord()?;
    let (det, adj) = det_adj(&jo);
    if det == 0 {
        return Err(Error::NotPerfect);
    }
    let m = ell.modulus() as i128;
    let v = valuation(&Q::from_integer(det.into()), p)?;
    let unit = det / (p as i128).pow(v as u32);
    let uinv = mod_inv(unit.rem_euclid(m) as u128, m as u128).expect("unit") as i128;
    let jl: Vec<Vec<i128>> =
        pairing.j.iter().map(|r| r.iter().map(|x| Ok(ell.eval(x)? as i128)).collect::<Result<_>>()).collect::<Result<_>>()?;
    let mut raw = alloc::vec![alloc::vec![0i128; d]; d];
    for i in 0..d {
        for k in 0..d {
            let s: i128 = (0..d).map(|j| jl[i][j] * adj[j][k].rem_euclid(m) % m).sum::<i128>();
            raw[i][k] = s.rem_euclid(m) * uinv % m;
        }
    }
    for a in &pairing.actions {
        let mul = |x: &Vec<Vec<i128>>, y: &Vec<Vec<i128>>| -> Vec<Vec<i128>> {
            (0..d).map(|i| (0..d).map(|k| (0..d).map(|j| x[i][j] * y[j][k]).sum::<i128>().rem_euclid(m)).collect()).collect()
        };
        let ai: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        if mul(&raw, &ai) != mul(&ai, &raw) {
            return Err(Error::Invalid("L-invariant does not commute with the O_L action".into()));
        }
    }
    Ok(raw
        .into_iter()
        .map(|r| r.into_iter().map(|x| PAdicApprox { shift: -v, digits: x as u128, prec: ell.m }).collect())
        .collect())
}

/// `ℒ(ℓ)` on the basis `{ord, lg}` of local homomorphisms.
#[derive(Debug, Clone, PartialEq)]
pub struct LInvariantVector {
    pub ord: CoefficientValue,
    pub log: CoefficientValue,
}

impl LInvariantVector {
    /// Calibrated so that `ℒ(ord) = 1`.
    pub fn normalized(log: CoefficientValue) -> Self {
        Self { ord: CoefficientValue::int(1), log }
    }
}

/// The class `∇L ∈ I/I²` as the map `ℓ ↦ ℒ(ℓ)·base` on the basis.
pub fn derivative_class(base: &CoefficientValue, linv: &LInvariantVector) -> BTreeMap<&'static str, CoefficientValue> {
    BTreeMap::from([("ord", linv.ord.clone() * base.clone()), ("log", linv.log.clone() * base.clone())])
}

/// A finite-level element of `I` with prescribed `ψ`-coordinates.
pub fn class_to_measure(group: FiniteLevelGroup, coords: &[CoefficientValue]) -> Result<GroupAlgebraElement> {
    if coords.len() != group.r as usize {
        return Err(Error::Invalid("one coordinate per generator".into()));
    }
    let m = group.modulus() as u128;
    let mut mu = GroupAlgebraElement::zero(group);
    for (i, c) in coords.iter().enumerate() {
        let c = c.as_rational().ok_or(Error::NotIntegral)?;
        let r = residue(c, m)?;
        mu = mu.add(&phi_map(group, group.basis(i as u32)).scale(&qi(r as i64)))?;
    }
    Ok(mu)
}
