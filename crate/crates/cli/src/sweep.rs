//! Sweeps over `(q, kind, n_T, n_χ, χ(ϖ), α)`: local integrals, exceptional
//! zeros, Euler factors and inner products.

use std::collections::BTreeMap;

use anticyclo_core::gl2::inner_product_fp_rederived;
use anticyclo_core::integrals::{
    alpha_1u_pairing, f0_of_t, f0_oracle, f0_summed, f0_total_closed, i_t_oracle_with, i_t_proofform,
    i_t_statement, inner_product_fp, is_exceptional, OracleShells, PairingContext, SteinbergDatum,
};
use anticyclo_core::interpolation::euler_factor_c;
use anticyclo_core::rational_forms::zeta;
use anticyclo_core::torus::{LocalTorusCase, TorusCharacter, TorusKind};
use anticyclo_core::{CoefficientValue, Error, PrimeLocalField, SValue};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::Row;
use crate::CliError;

/// Absolute tolerance between the oracle and the closed form.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct GridPoint {
    pub case: LocalTorusCase,
    pub n_chi: u32,
    pub uv: Option<i64>,
    pub alpha: i64,
}

impl GridPoint {
    pub fn row(&self, quantity: &str) -> Row {
        Row {
            q: Some(self.case.q()),
            kind: Some(self.case.kind.name().into()),
            n_t: Some(self.case.n_t),
            n_chi: Some(self.n_chi),
            alpha: Some(self.alpha.to_string()),
            chi_uniformizer: self.uv,
            ..Row::new(quantity)
        }
    }

    /// `None` when no character of this conductor exists on the torus.
    pub fn character(&self) -> Result<Option<TorusCharacter>, Error> {
        match TorusCharacter::with_conductor(&self.case, self.n_chi, self.uv.map(CoefficientValue::int)) {
            Ok(c) => Ok(Some(c)),
            Err(Error::Invalid(m)) if m.starts_with("no character") => Ok(None),
            Err(e) => Err(e),
        }
    }
}

pub fn grid(cfg: &RunConfig) -> Result<Vec<GridPoint>, CliError> {
    let mut out = Vec::new();
    for &q in &cfg.q {
        let field = PrimeLocalField::prime(q)?;
        for kind in cfg.torus_kinds()? {
            for &n_t in &cfg.n_t {
                let case = LocalTorusCase::new(kind, field, n_t);
                for &n_chi in &cfg.n_chi {
                    let uvs: Vec<Option<i64>> = match kind {
                        TorusKind::Inert => vec![None],
                        _ => cfg.uniformizer_values.iter().map(|&v| Some(v)).collect(),
                    };
                    for uv in uvs {
                        for &alpha in &cfg.alpha {
                            out.push(GridPoint { case, n_chi, uv, alpha });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn s_label(s: SValue) -> String {
    match s {
        SValue::Int(k) => k.to_string(),
        SValue::Half(k) if k % 2 == 0 => (k / 2).to_string(),
        SValue::Half(k) => format!("{k}/2"),
        SValue::Real(x) => x.to_string(),
        SValue::Complex(z) => format!("{}+{}i", z.re, z.im),
    }
}

fn failed(gp: &GridPoint, quantity: &str, e: Error) -> Row {
    gp.row(quantity).fail(e.to_string())
}

/// Statement and proof forms at each `s`, plus the oracle where it converges.
pub fn local_integral(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let svals: Vec<SValue> = cfg.s.iter().map(|s| s.to_s()).collect::<Result<_, _>>()?;
    // the shell masses depend only on the character, so group by it
    let mut groups: BTreeMap<(u64, TorusKind, u32, Option<i64>), Vec<GridPoint>> = BTreeMap::new();
    for gp in grid(cfg)? {
        groups.entry((gp.case.q(), gp.case.kind, gp.n_chi, gp.uv)).or_default().push(gp);
    }
    let groups: Vec<Vec<GridPoint>> = groups.into_values().collect();
    let rows = groups
        .par_iter()
        .flat_map_iter(|pts| {
            let mut rows = Vec::new();
            let chi = match pts[0].character() {
                Ok(Some(c)) => c,
                Ok(None) => return rows,
                Err(e) => {
                    rows.push(failed(&pts[0], "I_T", e));
                    return rows;
                }
            };
            let shells = if cfg.oracle { OracleShells::new(&pts[0].case, &chi).ok() } else { None };
            for gp in pts {
                rows.extend(integral_rows(cfg, gp, &chi, shells.as_ref(), &svals));
            }
            rows
        })
        .collect();
    Ok(rows)
}

fn integral_rows(
    cfg: &RunConfig,
    gp: &GridPoint,
    chi: &TorusCharacter,
    shells: Option<&OracleShells>,
    svals: &[SValue],
) -> Vec<Row> {
    let forms = i_t_statement(&gp.case, gp.alpha, chi).and_then(|a| Ok((i_t_proofform(&gp.case, gp.alpha, chi)?, a)));
    let (proof, stmt) = match forms {
        Ok(f) => f,
        Err(e) => return vec![failed(gp, "I_T", e)],
    };
    let equal = stmt.equal(&proof).unwrap_or(false);
    let mut rows = Vec::new();
    for &s in svals {
        let base = Row { s: Some(s_label(s)), ..gp.row("I_T") }.check(equal);
        let closed = match (stmt.evaluate_at_s(s), proof.evaluate_at_s(s)) {
            (Ok(a), Ok(b)) => {
                rows.push(base.value(&a).reference(&b).check(a.approx_eq(&b, 1e-12)));
                a
            }
            (Err(Error::Pole { order }), Err(Error::Pole { .. })) => {
                rows.push(base.note(format!("pole of order {order}")));
                continue;
            }
            (a, b) => {
                rows.push(base.fail(format!("evaluation mismatch: {a:?} vs {b:?}")));
                continue;
            }
        };
        if !equal {
            continue;
        }
        let (Some(shells), SValue::Int(_) | SValue::Half(_) | SValue::Real(_)) = (shells, s) else { continue };
        if s.re() <= 0.5 {
            continue;
        }
        let row = Row { s: Some(s_label(s)), ..gp.row("I_T_oracle") };
        rows.push(match i_t_oracle_with(shells, &gp.case, gp.alpha, chi, s.re(), cfg.truncation) {
            Ok(o) => {
                let v = CoefficientValue::from(o.value);
                let ok = (o.value - closed.to_complex()).norm() < ORACLE_TOL;
                let row = row.value(&v).reference(&closed).check(ok);
                if o.continued { row.note("continued") } else { row }
            }
            Err(Error::Pole { order }) => row.note(format!("pole of order {order}")),
            Err(e) => row.fail(e.to_string()),
        });
    }
    rows
}

/// `is_exceptional` against the order of vanishing of `I_T` at `s = 0`.
pub fn exceptional(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let mut rows: Vec<Row> = grid(cfg)?
        .par_iter()
        .filter_map(|gp| {
            let chi = match gp.character() {
                Ok(Some(c)) => c,
                Ok(None) => return None,
                Err(e) => return Some(failed(gp, "I_T(0)", e)),
            };
            let exc = is_exceptional(gp.alpha, &chi, &gp.case);
            let row = Row { s: Some("0".into()), exceptional: Some(exc), ..gp.row("I_T(0)") };
            Some(match i_t_statement(&gp.case, gp.alpha, &chi).and_then(|f| Ok((f.order_at_s0()?, f.evaluate_at_s(0)))) {
                Ok((order, v)) => {
                    let row = row.check(exc == (order >= 1)).note(format!("order {order}"));
                    match v {
                        Ok(v) => row.value(&v),
                        Err(_) => row,
                    }
                }
                Err(e) => row.fail(e.to_string()),
            })
        })
        .collect();
    // the non-vanishing inputs of the converse direction
    for &q in &cfg.q {
        let z = zeta(q);
        for (name, s) in [("zeta(-1)", -1), ("1/zeta(2)", 2)] {
            let row = Row { q: Some(q), s: Some(s.to_string()), ..Row::new(name) };
            rows.push(match z.evaluate_at_s(s) {
                Ok(v) => {
                    let v = if s == 2 { v.inv() } else { v };
                    let ok = !v.is_zero();
                    row.value(&v).check(ok)
                }
                Err(e) => row.fail(e.to_string()),
            });
        }
    }
    Ok(rows)
}

fn spherical_alphas(cfg: &RunConfig, q: u64) -> Vec<CoefficientValue> {
    if cfg.spherical_alpha.is_empty() {
        vec![CoefficientValue::float(0.0, (q as f64).sqrt())]
    } else {
        cfg.spherical_alpha.iter().map(|a| CoefficientValue::float(a[0], a[1])).collect()
    }
}

fn alpha_label(a: &CoefficientValue) -> String {
    match a.as_rational() {
        Some(r) => r.to_string(),
        None => {
            let z = a.to_complex();
            format!("{}{:+}i", crate::output::fixed(z.re), crate::output::fixed(z.im))
        }
    }
}

/// The Euler factor `C(π, χ)`; for `α = ±1` it vanishes exactly on the
/// exceptional configurations.
pub fn euler(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let n_t0 = cfg.n_t.first().copied().unwrap_or(0);
    let pts: Vec<GridPoint> = grid(cfg)?.into_iter().filter(|gp| gp.case.n_t == n_t0).collect();
    let rows = pts
        .par_iter()
        .flat_map_iter(|gp| {
            let mut rows = Vec::new();
            let chi = match gp.character() {
                Ok(Some(c)) => c,
                Ok(None) => return rows,
                Err(e) => {
                    rows.push(failed(gp, "C(pi,chi)", e));
                    return rows;
                }
            };
            let exc = is_exceptional(gp.alpha, &chi, &gp.case);
            let row = Row { exceptional: Some(exc), ..gp.row("C(pi,chi)") };
            rows.push(match SteinbergDatum::special(gp.alpha).and_then(|d| euler_factor_c(&gp.case, &d, &chi, None)) {
                Ok(v) => {
                    let ok = v.is_zero() == exc;
                    row.value(&v).check(ok)
                }
                Err(e) => row.fail(e.to_string()),
            });
            // spherical rows do not depend on α = ±1; emit them once
            if gp.alpha == cfg.alpha[0] {
                for a in spherical_alphas(cfg, gp.case.q()) {
                    let row = Row { alpha: Some(alpha_label(&a)), exceptional: Some(false), ..gp.row("C(pi,chi)") };
                    rows.push(
                        match SteinbergDatum::spherical(a, gp.case.q()).and_then(|d| euler_factor_c(&gp.case, &d, &chi, None)) {
                            Ok(v) => {
                                let ok = !v.is_zero();
                                row.value(&v).check(ok)
                            }
                            Err(e) => row.fail(e.to_string()),
                        },
                    );
                }
            }
            rows
        })
        .collect();
    Ok(rows)
}

/// Closed-form `⟨f, f⟩` against the re-derived shell sums, and the split
/// Steinberg pairing `α(δ1_U, δ1_U)` through `Σ F(0)`.
pub fn pairing(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let constants = cfg.symbolic_constants()?;
    let mut jobs = Vec::new();
    for &q in &cfg.q {
        let field = PrimeLocalField::prime(q)?;
        for kind in cfg.torus_kinds()? {
            for &n_t in &cfg.n_t {
                let case = LocalTorusCase::new(kind, field, n_t);
                let mut data: Vec<SteinbergDatum> =
                    cfg.alpha.iter().map(|&a| SteinbergDatum::special(a)).collect::<Result<_, _>>()?;
                for a in spherical_alphas(cfg, q) {
                    data.push(SteinbergDatum::spherical(a, q).map_err(|e| CliError::Config(e.to_string()))?);
                }
                for d in data {
                    for &n_s in &cfg.n_s {
                        jobs.push((case, d.clone(), n_s));
                    }
                }
            }
        }
    }
    let mut rows: Vec<Row> = jobs
        .par_iter()
        .map(|(case, d, n_s)| {
            let closed = inner_product_fp(case, d, *n_s, &constants);
            let row = Row {
                q: Some(case.q()),
                kind: Some(case.kind.name().into()),
                n_t: Some(case.n_t),
                alpha: Some(alpha_label(&d.alpha())),
                symbolic_deps: closed.deps_string(),
                note: format!("n_s = {n_s}"),
                ..Row::new(if d.is_special() { "<f,f>_special" } else { "<f,f>_spherical" })
            }
            .value(&closed.value);
            match inner_product_fp_rederived(case, d, *n_s, &constants) {
                Ok(r) => {
                    let ok = r.value.approx_eq(&closed.value, 1e-9) && r.deps == closed.deps;
                    row.reference(&r.value).check(ok)
                }
                Err(e) => row.fail(e.to_string()),
            }
        })
        .collect();
    let mut ctx = PairingContext::new(2);
    ctx.constants = constants;
    for &q in &cfg.q {
        let field = PrimeLocalField::prime(q)?;
        ctx.xi = anticyclo_core::integrals::XiValues::zeta_default(q);
        for &n_t in &cfg.n_t {
            let case = LocalTorusCase::new(TorusKind::Split, field, n_t);
            let base = Row { q: Some(q), kind: Some("split".into()), n_t: Some(n_t), alpha: Some("1".into()), ..Row::new("") };
            rows.push(match f0_summed(&case, 8).and_then(|a| Ok((a, f0_total_closed(&case)?))) {
                Ok((a, b)) => {
                    let row = Row { quantity: "sum F0".into(), ..base.clone() };
                    row.value(&a.clone().into()).reference(&b.clone().into()).check(a == b)
                }
                Err(e) => Row { quantity: "sum F0".into(), ..base.clone() }.fail(e.to_string()),
            });
            for k in -3..=3 {
                let row = Row { quantity: "F0(t)".into(), note: format!("ord t = {k}"), ..base.clone() };
                rows.push(match f0_of_t(&case, k).and_then(|a| Ok((a, f0_oracle(&case, k, cfg.truncation as i64)?))) {
                    Ok((a, b)) => row.value(&a.clone().into()).reference(&b.clone().into()).check(a == b),
                    Err(e) => row.fail(e.to_string()),
                });
            }
            let row = Row { quantity: "alpha(1_U,1_U)".into(), ..base };
            rows.push(match alpha_1u_pairing(&case, &ctx) {
                Ok(v) => Row { symbolic_deps: v.deps_string(), ..row }.value(&v.value),
                Err(e) => row.fail(e.to_string()),
            });
        }
    }
    Ok(rows)
}
