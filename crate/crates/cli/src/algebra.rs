//! Reports for the algebraic layer: Iwasawa algebras, Steinberg cocycles,
//! L-invariants, interpolation constants, derivative classes and the
//! discrete-series module.

use anticyclo_core::discrete_series::{
    rotation_flip, solve_lambda_structures, verify_extension_structure, TruncatedGOModule,
};
use anticyclo_core::gl2::SplitEmbedding;
use anticyclo_core::integrals::SteinbergDatum;
use anticyclo_core::interpolation::{
    c_pi_cancellation, c_pi_steinberg, c_v_constant, class_to_measure, derivative_class, geometric_l_invariant,
    interpolation_value, InterpolationInputs, LInvariantVector, PlaceData, Setting, TateLatticePairing,
};
use anticyclo_core::iwasawa::{
    augmentation_quotient, is_bounded, phi_map, phi_span_full_rank, psi_class, CompatibleFamily, FiniteLevelGroup,
    GroupAlgebraElement,
};
use anticyclo_core::padic::{q_pow, qi};
use anticyclo_core::steinberg::{
    check_cocycle_identity, cocycle_z, compact_support_form, phi1_coboundary, LocalHomomorphism,
};
use anticyclo_core::torus::{LocalTorusCase, TorusKind};
use anticyclo_core::{CoefficientValue, PrimeLocalField, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::Row;
use crate::CliError;

fn count_row(quantity: &str, ok: usize, total: usize) -> Row {
    Row::new(quantity).real(ok as f64).check(ok == total).note(format!("{ok}/{total}"))
}

/// A random element of the augmentation ideal with small integer weights.
pub fn random_augmentation(g: FiniteLevelGroup, rng: &mut impl Rng) -> GroupAlgebraElement {
    let mut c: Vec<Q> = (0..g.order()).map(|_| qi(rng.random_range(-3..=3))).collect();
    let deg: Q = c.iter().sum();
    c[0] -= deg;
    GroupAlgebraElement::from_coeffs(g, c).expect("length matches the group")
}

pub fn iwasawa(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for &[p, n, r] in &cfg.iwasawa_groups {
        let g = FiniteLevelGroup::new(p, r as u32, n as u32)?;
        let tag = |row: Row| Row { q: Some(p), note: format!("N = {n}, r = {r}; {}", row.note), ..row };
        let m = g.modulus();
        let ok = (0..g.order())
            .into_par_iter()
            .filter(|&x| {
                let want: Vec<u64> = g.coords(x).iter().map(|c| c % m).collect();
                psi_class(&phi_map(g, x), n as u32).is_ok_and(|v| v == want)
            })
            .count();
        rows.push(tag(count_row("psi(phi(g)) = g", ok, g.order())));

        let inv = augmentation_quotient(g);
        let free = inv.len() == r as usize && inv.iter().all(|&e| e as u64 == n);
        rows.push(tag(Row::new("I/I^2 invariants").real(inv.len() as f64).check(free).note(format!("{inv:?}"))));
        rows.push(tag(Row::new("phi span full rank").check(phi_span_full_rank(g))));

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (p << 32) ^ (n << 16) ^ r);
        let pairs: Vec<_> = (0..cfg.samples).map(|_| (random_augmentation(g, &mut rng), random_augmentation(g, &mut rng))).collect();
        let ok = pairs
            .par_iter()
            .filter(|(a, b)| {
                a.convolve(b).and_then(|c| psi_class(&c, n as u32)).is_ok_and(|v| v.iter().all(|&x| x == 0))
            })
            .count();
        rows.push(tag(count_row("psi(I^2) = 0", ok, pairs.len())));

        let n_max = n as u32 + 1;
        let dirac = CompatibleFamily::from_fn(p, r as u32, n_max, |h| GroupAlgebraElement::dirac(h, 0))?;
        let haar = CompatibleFamily::from_fn(p, r as u32, n_max, |h| {
            let w = Q::from_integer(1.into()) / Q::from_integer((h.order() as i64).into());
            GroupAlgebraElement::from_coeffs(h, vec![w; h.order()]).expect("length matches")
        })?;
        rows.push(tag(Row::new("dirac family bounded").check(is_bounded(&dirac).0)));
        rows.push(tag(Row::new("haar family unbounded").check(!is_bounded(&haar).0)));
    }
    Ok(rows)
}

/// A random `p^k u/v` with `|k| ≤ kmax` and `u, v` prime to `p`.
pub fn random_torus_element(p: u64, kmax: i64, rng: &mut impl Rng) -> Q {
    let unit = |rng: &mut dyn rand::RngCore| loop {
        let u = rng.random_range(1..(p * p * p) as i64);
        if u % p as i64 != 0 {
            return if rng.random_bool(0.5) { -u } else { u };
        }
    };
    let k = rng.random_range(-kmax..=kmax);
    q_pow(p, k) * qi(unit(rng)) / qi(unit(rng))
}

pub fn cocycle(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let p = cfg.cocycle_p;
    let level = cfg.cocycle_level;
    let m = cfg.precision;
    let field = PrimeLocalField::prime(p)?;
    let emb = SplitEmbedding::new(&LocalTorusCase::new(TorusKind::Split, field, 0))?;
    let kmax = (level as i64 - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let triples: Vec<(LocalHomomorphism, Q, Q)> = (0..cfg.samples)
        .map(|_| {
            let (a, b) = (rng.random_range(-5..=5), rng.random_range(-5..=5));
            let ell = LocalHomomorphism::new(p, a, b, m)?;
            Ok((ell, random_torus_element(p, kmax, &mut rng), random_torus_element(p, kmax, &mut rng)))
        })
        .collect::<Result<_, anticyclo_core::Error>>()?;
    let ok = triples
        .par_iter()
        .filter(|(ell, t1, t2)| check_cocycle_identity(&emb, ell, t1, t2, level).unwrap_or(false))
        .count();
    let tag = |row: Row| Row { q: Some(p), ..row };
    let mut rows = vec![tag(count_row("cocycle identity", ok, triples.len()))];

    let lg = LocalHomomorphism::log_coordinate(p, m)?;
    let mut compact_ok = 0;
    let ts: Vec<Q> = (-kmax..=kmax).filter(|&k| k != 0).map(|k| q_pow(p, k)).collect();
    for t in &ts {
        let (_, c) = compact_support_form(&emb, &lg, t, level)?;
        let mut z = cocycle_z(&emb, &lg, t, level)?;
        z.modulo_constants = false;
        compact_ok += usize::from(z.equals(&c));
    }
    rows.push(tag(count_row("compact support form", compact_ok, ts.len())));

    let ok = triples
        .par_iter()
        .filter(|(ell, t, _)| {
            let run = || -> anticyclo_core::Result<bool> {
                let d = phi1_coboundary(&emb, ell, t, level)?.sub(&cocycle_z(&emb, ell, t, level)?)?;
                let md = ell.modulus();
                Ok(d.as_constant() == Some((md - ell.eval(t)?) % md))
            };
            run().unwrap_or(false)
        })
        .count();
    rows.push(tag(count_row("phi1 coboundary = z - l(t)", ok, triples.len())));
    Ok(rows)
}

fn pairing_from(cfg: &RunConfig) -> Result<TateLatticePairing, CliError> {
    let j = cfg.tate_j.iter().map(|r| r.iter().map(|x| x.to_q()).collect()).collect::<Result<_, _>>()?;
    let mut t = TateLatticePairing::new(cfg.tate_p, j)?;
    t.actions = cfg.tate_actions.clone();
    Ok(t)
}

pub fn linvariant(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let p = cfg.tate_p;
    let m = cfg.precision;
    let pairing = pairing_from(cfg)?;
    let ell = LocalHomomorphism::new(p, cfg.ell[0], cfg.ell[1], m)?;
    let tag = |row: Row| Row { q: Some(p), ..row };
    let mut rows = Vec::new();
    let l = match geometric_l_invariant(&pairing, &ell) {
        Ok(l) => l,
        Err(e) => return Ok(vec![tag(Row::new("L-invariant").fail(e.to_string()))]),
    };
    for (i, r) in l.iter().enumerate() {
        for (k, x) in r.iter().enumerate() {
            rows.push(tag(Row::new(format!("L[{i}][{k}]")).real(x.digits as f64).note(format!(
                "p^{} * {} mod p^{}",
                x.shift, x.digits, x.prec
            ))));
        }
    }
    let ord = LocalHomomorphism::ord(p, m)?;
    let lg = LocalHomomorphism::log_coordinate(p, m)?;
    let lo = geometric_l_invariant(&pairing, &ord)?;
    let md = ord.modulus();
    let normal = lo.iter().enumerate().all(|(i, r)| {
        r.iter().enumerate().all(|(k, x)| {
            let one = (p as u128).pow((-x.shift) as u32) % md;
            x.digits == if i == k { one } else { 0 }
        })
    });
    rows.push(tag(Row::new("L(ord) = 1").check(normal)));
    let (a, b) = (3, -2);
    let lin = geometric_l_invariant(&pairing, &ord.combine(a, &lg, b)?)?;
    let ll = geometric_l_invariant(&pairing, &lg)?;
    let linear = (0..pairing.rank()).all(|i| {
        (0..pairing.rank()).all(|k| {
            let want = (lo[i][k].digits as i128 * a as i128 + ll[i][k].digits as i128 * b as i128).rem_euclid(md as i128);
            lin[i][k].digits as i128 == want
        })
    });
    rows.push(tag(Row::new("L linear in l").check(linear)));
    Ok(rows)
}

fn place_data(pc: &crate::config::PlaceConfig) -> Result<PlaceData, CliError> {
    let kind: TorusKind = pc.kind.parse()?;
    let pi = match pc.alpha {
        Some(a) => SteinbergDatum::special(a)?,
        None => SteinbergDatum::spherical(
            CoefficientValue::float(pc.alpha_re.unwrap_or(0.0), pc.alpha_im.unwrap_or(0.0)),
            pc.q,
        )?,
    };
    let f = |x: Option<f64>| x.map(|v| CoefficientValue::float(v, 0.0));
    let mut d = PlaceData::new(pc.q, kind, pi);
    d.in_disc_b = pc.in_disc_b;
    d.chi_uniformizer = CoefficientValue::int(pc.chi_uniformizer);
    d.assumption_square_free = pc.square_free;
    d.vol_t = f(pc.vol_t);
    d.l_half = f(pc.l_half);
    d.l_ad = f(pc.l_ad);
    d.whittaker_norm = f(pc.whittaker_norm);
    d.norm_disc = f(pc.norm_disc);
    Ok(d)
}

pub fn interpolate(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for pc in &cfg.places {
        let d = place_data(pc)?;
        let row = Row { q: Some(pc.q), kind: Some(pc.kind.clone()), alpha: pc.alpha.map(|a| a.to_string()), ..Row::new("C_v") };
        rows.push(match c_v_constant(&d) {
            Ok(v) => Row { symbolic_deps: v.deps.iter().copied().collect::<Vec<_>>().join(";"), ..row }.value(&v.value),
            Err(e) => row.fail(e.to_string()),
        });
    }
    let inputs = InterpolationInputs {
        setting: if cfg.setting == "indefinite" { Setting::Indefinite } else { Setting::Definite },
        degree: cfg.degree,
        norm_disc: cfg.norm_disc,
        k_ram: cfg.k_ram,
        e_factor: cfg.e_factor,
        l_ratio: cfg.l_ratio,
        norm_f_sq: cfg.norm_f_sq,
    };
    let row = Row::new("interpolation value").note(cfg.setting.clone());
    rows.push(match interpolation_value(&inputs) {
        Ok(v) => row.real(v),
        Err(e) => row.fail(e.to_string()),
    });
    Ok(rows)
}

pub fn derivative(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let base = CoefficientValue::rational(cfg.derivative_base.to_q()?);
    let linv = LInvariantVector::normalized(CoefficientValue::rational(cfg.l_invariant_log.to_q()?));
    let class = derivative_class(&base, &linv);
    let mut rows: Vec<Row> = class.iter().map(|(k, v)| Row::new(format!("dL({k})")).value(v)).collect();
    let [p, n, r] = cfg.derivative_group;
    let g = FiniteLevelGroup::new(p, r as u32, n as u32)?;
    let coords: Vec<CoefficientValue> = ["ord", "log"].iter().take(r as usize).map(|k| class[k].clone()).collect();
    let row = Row { q: Some(p), note: format!("N = {n}, r = {r}"), ..Row::new("psi(measure) = class") };
    rows.push(if coords.len() != r as usize {
        row.fail("derivative_group rank must be 1 or 2")
    } else {
        match class_to_measure(g, &coords).and_then(|mu| psi_class(&mu, n as u32)) {
            Ok(v) => {
                let md = g.modulus() as u128;
                let want: Vec<u64> = coords
                    .iter()
                    .map(|c| anticyclo_core::padic::residue(c.as_rational().unwrap(), md).unwrap() as u64)
                    .collect();
                row.check(v == want).note(format!("{v:?}"))
            }
            Err(e) => row.fail(e.to_string()),
        }
    });
    for &q in &cfg.q {
        let ad = anticyclo_core::rational_forms::zeta(q).evaluate_at_s(2)?;
        let row = Row { q: Some(q), ..Row::new("C(pi)") };
        rows.push(match (c_pi_steinberg(q, &ad), c_pi_cancellation(q)) {
            (Ok(v), Ok(true)) => {
                let ok = v.approx_eq(&(-ad.clone()), 1e-12);
                row.value(&v).reference(&(-ad)).check(ok)
            }
            (Ok(_), Ok(false)) => row.fail("L(s+1/2, pi, 1) differs from zeta(s+1)^2"),
            (Err(e), _) | (_, Err(e)) => row.fail(e.to_string()),
        });
    }
    Ok(rows)
}

pub fn discrete_series(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let k = cfg.k_max;
    let m = TruncatedGOModule::constant(k, 1)?;
    let mut rows = Vec::new();
    for (name, got, want) in [
        ("R f_2", m.apply_r(1)?, (2, 2)),
        ("L f_2", m.apply_l(1)?, (0, 0)),
        ("R f_-2", m.apply_r(-1)?, (0, 0)),
    ] {
        rows.push(Row::new(name).real(got.0 as f64).check(got == want).note(format!("index {}", got.1)));
    }
    for (name, sign) in [("omega+", 1), ("omega-", -1)] {
        let m = TruncatedGOModule::constant(k, sign)?;
        rows.push(Row::new(name).check(m.verify_omega_structure() && rotation_flip(&m)));
    }
    let alt = TruncatedGOModule::new(k, |j| if j.rem_euclid(2) == 0 { 1 } else { -1 })?;
    rows.push(Row::new("omega (-1)^k rejected").check(!alt.verify_omega_structure()));
    let sols = solve_lambda_structures(k);
    let count = sols.as_ref().map_or(0, Vec::len);
    let constant = sols.iter().flatten().all(|s| s.values().all(|v| *v == s[&0]));
    rows.push(Row::new("lambda structures").real(count as f64).check(count == 2 && constant));
    rows.push(Row::new("extension structure").check(verify_extension_structure(k)?));
    for r in &mut rows {
        r.note = if r.note.is_empty() { format!("K_max = {k}") } else { format!("K_max = {k}; {}", r.note) };
    }
    Ok(rows)
}
