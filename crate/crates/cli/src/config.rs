//! Run configuration read from a TOML document. Every key is optional.

use std::collections::BTreeMap;
use std::path::Path;

use anticyclo_core::integrals::{ConstantName, SymbolicConstant, SymbolicConstants};
use anticyclo_core::padic::PrimeLocalField;
use anticyclo_core::steinberg::LocalHomomorphism;
use anticyclo_core::torus::TorusKind;
use anticyclo_core::{CoefficientValue, SValue, Q};
use serde::Deserialize;

use crate::CliError;

/// A number written as an integer, a float, or a string such as `"3/2"`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    pub fn to_q(&self) -> Result<Q, CliError> {
        match self {
            Scalar::Int(n) => Ok(Q::from_integer((*n).into())),
            Scalar::Float(x) => Q::from_float(*x).ok_or_else(|| CliError::Config(format!("non-finite number {x}"))),
            Scalar::Text(s) => s.trim().parse::<Q>().map_err(|_| CliError::Config(format!("not a rational number: `{s}`"))),
        }
    }

    pub fn to_s(&self) -> Result<SValue, CliError> {
        match self {
            Scalar::Int(n) => Ok(SValue::Int(*n)),
            Scalar::Float(x) if (2.0 * x).fract() == 0.0 => Ok(SValue::Half((2.0 * x) as i64).canonical()),
            Scalar::Float(x) => Ok(SValue::Real(*x)),
            Scalar::Text(_) => {
                let q = self.to_q()?;
                let two_q = q * Q::from_integer(2.into());
                if two_q.is_integer() {
                    let k: i64 = two_q.to_integer().try_into().map_err(|_| CliError::Config("s out of range".into()))?;
                    Ok(SValue::Half(k).canonical())
                } else {
                    Err(CliError::Config("s must be an integer or half-integer when written as a fraction".into()))
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Scalar::Int(n) => n.to_string(),
            Scalar::Float(x) => x.to_string(),
            Scalar::Text(s) => s.trim().to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaceConfig {
    pub q: u64,
    pub kind: String,
    /// `±1` for the Steinberg representation; omit for spherical with `alpha_re`, `alpha_im`.
    pub alpha: Option<i64>,
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub in_disc_b: bool,
    pub chi_uniformizer: i64,
    pub square_free: bool,
    pub vol_t: Option<f64>,
    pub l_half: Option<f64>,
    pub l_ad: Option<f64>,
    pub whittaker_norm: Option<f64>,
    pub norm_disc: Option<f64>,
}

impl Default for PlaceConfig {
    fn default() -> Self {
        Self {
            q: 3,
            kind: "split".into(),
            alpha: Some(1),
            alpha_re: None,
            alpha_im: None,
            in_disc_b: false,
            chi_uniformizer: 1,
            square_free: true,
            vol_t: None,
            l_half: None,
            l_ad: None,
            whittaker_norm: None,
            norm_disc: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub q: Vec<u64>,
    pub kinds: Vec<String>,
    pub n_t: Vec<i64>,
    pub n_chi: Vec<u32>,
    pub uniformizer_values: Vec<i64>,
    pub alpha: Vec<i64>,
    pub s: Vec<Scalar>,
    /// Run the brute-force oracle next to the closed forms.
    pub oracle: bool,
    pub truncation: u32,
    pub precision: u32,
    pub seed: u64,
    pub samples: usize,
    pub n_s: Vec<i64>,
    /// Spherical Satake parameters `[re, im]` with `|α|² = q`; empty means `i√q`.
    pub spherical_alpha: Vec<[f64; 2]>,
    pub constants: BTreeMap<String, Scalar>,

    pub iwasawa_groups: Vec<[u64; 3]>,

    pub cocycle_p: u64,
    pub cocycle_level: u32,

    pub tate_p: u64,
    pub tate_j: Vec<Vec<Scalar>>,
    pub tate_actions: Vec<Vec<Vec<i64>>>,
    /// `ℓ = a·ord + b·lg`.
    pub ell: [i64; 2],

    pub setting: String,
    pub degree: u32,
    pub norm_disc: f64,
    pub k_ram: f64,
    pub e_factor: f64,
    pub l_ratio: f64,
    pub norm_f_sq: f64,
    pub places: Vec<PlaceConfig>,

    pub derivative_base: Scalar,
    pub l_invariant_log: Scalar,
    pub derivative_group: [u64; 3],

    pub k_max: i64,
    pub format: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: vec![2, 3, 5],
            kinds: TorusKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            n_t: vec![0, 1, 2],
            n_chi: (0..=4).collect(),
            uniformizer_values: vec![1, -1],
            alpha: vec![1, -1],
            s: vec![Scalar::Int(0), Scalar::Int(1), Scalar::Text("3/2".into()), Scalar::Int(2)],
            oracle: true,
            truncation: 60,
            precision: 10,
            seed: 0,
            samples: 100,
            n_s: vec![0, 2],
            spherical_alpha: Vec::new(),
            constants: BTreeMap::new(),
            iwasawa_groups: vec![[2, 2, 1], [3, 2, 2], [3, 3, 1]],
            cocycle_p: 3,
            cocycle_level: 6,
            tate_p: 3,
            tate_j: vec![vec![Scalar::Int(12)]],
            tate_actions: Vec::new(),
            ell: [0, 1],
            setting: "definite".into(),
            degree: 1,
            norm_disc: 1.0,
            k_ram: 1.0,
            e_factor: 1.0,
            l_ratio: 1.0,
            norm_f_sq: 1.0,
            places: vec![PlaceConfig::default()],
            derivative_base: Scalar::Int(1),
            l_invariant_log: Scalar::Int(1),
            derivative_group: [3, 2, 1],
            k_max: 20,
            format: None,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        for &q in &self.q {
            PrimeLocalField::prime(q).map_err(|_| CliError::Config(format!("q = {q} is not prime")))?;
        }
        self.torus_kinds()?;
        if self.n_t.iter().any(|&n| n < 0) {
            return bad("n_t must be non-negative".into());
        }
        if self.alpha.iter().any(|a| a.abs() != 1) {
            return bad("alpha must be ±1".into());
        }
        if self.uniformizer_values.iter().any(|a| a.abs() != 1) {
            return bad("uniformizer values must be ±1".into());
        }
        for s in &self.s {
            s.to_s()?;
        }
        if self.truncation == 0 {
            return bad("truncation must be positive".into());
        }
        if !(1..=40).contains(&self.precision) {
            return bad("precision must lie in 1..=40".into());
        }
        if self.n_s.iter().any(|&n| n < 0) {
            return bad("n_s must be non-negative".into());
        }
        self.symbolic_constants()?;
        for g in &self.iwasawa_groups {
            PrimeLocalField::prime(g[0]).map_err(|_| CliError::Config(format!("iwasawa p = {} is not prime", g[0])))?;
            if g[1] == 0 || g[2] == 0 {
                return bad("iwasawa levels and ranks must be positive".into());
            }
        }
        PrimeLocalField::prime(self.cocycle_p).map_err(|_| CliError::Config("cocycle_p is not prime".into()))?;
        PrimeLocalField::prime(self.tate_p).map_err(|_| CliError::Config("tate_p is not prime".into()))?;
        for p in [self.cocycle_p, self.tate_p] {
            LocalHomomorphism::ord(p, self.precision).map_err(|e| CliError::Config(e.to_string()))?;
        }
        if self.cocycle_level < 2 {
            return bad("cocycle_level must be at least 2".into());
        }
        let d = self.tate_j.len();
        if d == 0 || self.tate_j.iter().any(|r| r.len() != d) {
            return bad("tate_j must be a non-empty square matrix".into());
        }
        for row in &self.tate_j {
            for x in row {
                x.to_q()?;
            }
        }
        if self.tate_actions.iter().any(|a| a.len() != d || a.iter().any(|r| r.len() != d)) {
            return bad("tate_actions must be square matrices of the size of tate_j".into());
        }
        if !matches!(self.setting.as_str(), "definite" | "indefinite") {
            return bad(format!("unknown setting `{}`", self.setting));
        }
        for p in &self.places {
            PrimeLocalField::prime(p.q).map_err(|_| CliError::Config(format!("place q = {} is not prime", p.q)))?;
            p.kind.parse::<TorusKind>().map_err(|e| CliError::Config(e.to_string()))?;
            if p.alpha.is_none() && (p.alpha_re.is_none() || p.alpha_im.is_none()) {
                return bad("a place needs alpha, or both alpha_re and alpha_im".into());
            }
        }
        self.derivative_base.to_q()?;
        self.l_invariant_log.to_q()?;
        if self.k_max < 3 {
            return bad("k_max must be at least 3".into());
        }
        if let Some(f) = &self.format {
            crate::output::Format::parse(f)?;
        }
        Ok(())
    }

    pub fn torus_kinds(&self) -> Result<Vec<TorusKind>, CliError> {
        self.kinds.iter().map(|k| k.parse::<TorusKind>().map_err(|e| CliError::Config(e.to_string()))).collect()
    }

    pub fn symbolic_constants(&self) -> Result<SymbolicConstants, CliError> {
        let mut c = SymbolicConstants::default();
        for (name, v) in &self.constants {
            let name: ConstantName = name.parse().map_err(|e: anticyclo_core::Error| CliError::Config(e.to_string()))?;
            let value = CoefficientValue::rational(v.to_q()?);
            c.set(SymbolicConstant { name, value }).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        let c = RunConfig::from_toml("q = [3]\ns = [0, \"1/2\", 2.5]\n[constants]\nc_T = \"2/3\"\n").unwrap();
        assert_eq!(c.s[1].to_s().unwrap(), SValue::Half(1));
        assert_eq!(c.s[2].to_s().unwrap(), SValue::Half(5));
        assert!(c.symbolic_constants().unwrap().is_set(ConstantName::CT));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::from_toml("q = [4]").is_err());
        assert!(RunConfig::from_toml("alpha = [2]").is_err());
        assert!(RunConfig::from_toml("unknown_key = 1").is_err());
        assert!(RunConfig::from_toml("[constants]\nnope = 1").is_err());
    }
}
