//! Two-level boson models and their conserved-quantity sectors.
//!
//! All four Hamiltonians share the form `H = (1 - xi) n_b + (xi / N) P`, where
//! `n_b` counts the bosons of the `n`-dimensional species and `P` is the
//! pairing operator of the `so(n + 1)` limit. Inside a sector of fixed
//! `so(n)` seniority the pairing operator only connects `n_b` to `n_b +- 2`,
//! so every block is tridiagonal in the `n_b` quanta.

mod block;
pub mod elements;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use block::{analytic_limit_spectrum, build_block, SectorBlock};

/// Largest boson number accepted; keeps every integer factor of the matrix
/// elements inside `i64`.
pub const MAX_BOSONS: u32 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "LMG")]
    Lmg,
    #[serde(rename = "VM2D")]
    Vm2d,
    #[serde(rename = "VM3D")]
    Vm3d,
    #[serde(rename = "IBM")]
    Ibm,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Lmg, Model::Vm2d, Model::Vm3d, Model::Ibm];

    pub fn id(self) -> &'static str {
        match self {
            Model::Lmg => "LMG",
            Model::Vm2d => "VM2D",
            Model::Vm3d => "VM3D",
            Model::Ibm => "IBM",
        }
    }

    /// Number of components `n` of the second boson, i.e. the collective
    /// degrees of freedom of the `u(n + 1)` model.
    pub fn dof(self) -> u32 {
        match self {
            Model::Lmg => 1,
            Model::Vm2d => 2,
            Model::Vm3d => 3,
            Model::Ibm => 5,
        }
    }

    /// Overall factor multiplying `N(N + n - 1) - C[so(n + 1)]` in the
    /// pairing operator. The IBM pairing carries an explicit factor of two.
    pub fn pairing_factor(self) -> i64 {
        match self {
            Model::Ibm => 2,
            _ => 1,
        }
    }

    pub fn sector_kind(self) -> SectorKind {
        match self {
            Model::Lmg => SectorKind::Parity,
            Model::Vm2d => SectorKind::VibrationalAngularMomentum,
            Model::Vm3d => SectorKind::AngularMomentum,
            Model::Ibm => SectorKind::Seniority,
        }
    }

    /// Dimension of the totally symmetric irrep `[N]` of `u(n + 1)`.
    pub fn full_dimension(self, n_bosons: u32) -> u64 {
        binomial(n_bosons as u64 + self.dof() as u64, self.dof() as u64)
    }

    /// Critical coupling of the ground-state transition in the mean-field
    /// limit, `1 / (1 + 4 c)` with `c` the pairing factor.
    pub fn critical_xi(self) -> f64 {
        1.0 / (1.0 + 4.0 * self.pairing_factor() as f64)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LMG" => Ok(Model::Lmg),
            "VM2D" | "2DVM" => Ok(Model::Vm2d),
            "VM3D" | "VM" => Ok(Model::Vm3d),
            "IBM" => Ok(Model::Ibm),
            _ => Err(Error::UnknownModel(s.to_string())),
        }
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Control parameter `xi`, kept alongside its decimal source text so that
/// arbitrary-precision blocks are built from the literal, not from the
/// rounded double.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ControlParameter {
    value: f64,
    text: String,
}

impl ControlParameter {
    pub fn parse(text: &str) -> Result<Self> {
        let value: f64 = text
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("control parameter {text:?} is not a number")))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidInput(format!(
                "control parameter {text} outside [0, 1]"
            )));
        }
        Ok(Self {
            value,
            text: text.trim().to_string(),
        })
    }

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidInput("control parameter is not finite".into()));
        }
        // `{}` prints the shortest decimal that round-trips, e.g. "0.6".
        Self::parse(&format!("{value}"))
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

impl TryFrom<String> for ControlParameter {
    type Error = Error;

    fn try_from(text: String) -> Result<Self> {
        Self::parse(&text)
    }
}

impl From<ControlParameter> for String {
    fn from(xi: ControlParameter) -> String {
        xi.text
    }
}

impl fmt::Display for ControlParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelInstance {
    pub model: Model,
    pub n_bosons: u32,
    pub xi: ControlParameter,
}

impl ModelInstance {
    pub fn new(model: Model, n_bosons: u32, xi: f64) -> Result<Self> {
        Self::with_parameter(model, n_bosons, ControlParameter::new(xi)?)
    }

    pub fn with_parameter(model: Model, n_bosons: u32, xi: ControlParameter) -> Result<Self> {
        if n_bosons < 1 {
            return Err(Error::InvalidInput("boson number must be at least 1".into()));
        }
        if n_bosons > MAX_BOSONS {
            return Err(Error::InvalidInput(format!(
                "boson number {n_bosons} exceeds the supported maximum {MAX_BOSONS}"
            )));
        }
        Ok(Self {
            model,
            n_bosons,
            xi,
        })
    }

    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        Self::new(self.model, self.n_bosons, xi)
    }

    pub fn full_dimension(&self) -> u64 {
        self.model.full_dimension(self.n_bosons)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SectorKind {
    /// Eigenvalue of `exp(i pi n_t)`, encoded 0 (even) / 1 (odd).
    Parity,
    /// `so(2)` vibrational angular momentum `l`.
    VibrationalAngularMomentum,
    /// `so(3)` angular momentum `J`.
    AngularMomentum,
    /// `so(5)` seniority `tau`.
    Seniority,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorLabel {
    pub kind: SectorKind,
    pub value: i32,
}

impl SectorLabel {
    pub fn new(kind: SectorKind, value: i32) -> Self {
        Self { kind, value }
    }

    pub fn for_model(model: Model, value: i32) -> Self {
        Self::new(model.sector_kind(), value)
    }

    pub fn even() -> Self {
        Self::new(SectorKind::Parity, 0)
    }

    pub fn odd() -> Self {
        Self::new(SectorKind::Parity, 1)
    }

    pub fn l(value: i32) -> Self {
        Self::new(SectorKind::VibrationalAngularMomentum, value)
    }

    /// `so(n)` seniority of the block: parity, `|l|`, `J` or `tau`.
    pub fn seniority(&self) -> u32 {
        self.value.unsigned_abs()
    }

    /// Number of degenerate copies of this block in the full Fock space
    /// (the `M` projections of `J`, or the dimension of the `so(5)` irrep).
    pub fn multiplicity(&self) -> u64 {
        let v = self.seniority() as u64;
        match self.kind {
            SectorKind::Parity | SectorKind::VibrationalAngularMomentum => 1,
            SectorKind::AngularMomentum => 2 * v + 1,
            SectorKind::Seniority => (v + 1) * (v + 2) * (2 * v + 3) / 6,
        }
    }

    pub fn is_valid_for(&self, instance: &ModelInstance) -> bool {
        if self.kind != instance.model.sector_kind() {
            return false;
        }
        let n = instance.n_bosons as i64;
        let v = self.value as i64;
        match self.kind {
            SectorKind::Parity => v == 0 || v == 1,
            SectorKind::VibrationalAngularMomentum => v.abs() <= n,
            SectorKind::AngularMomentum | SectorKind::Seniority => (0..=n).contains(&v),
        }
    }

    /// Parses `even`/`odd` or `<kind>=<int>` (`parity`, `l`, `J`, `tau`).
    pub fn parse(model: Model, s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("cannot parse sector {s:?} for {model}"));
        let label = match s.to_ascii_lowercase().as_str() {
            "even" | "+" => Self::even(),
            "odd" | "-" => Self::odd(),
            other => {
                let value = match other.split_once('=') {
                    Some((kind, v)) => {
                        let expected = match model.sector_kind() {
                            SectorKind::Parity => "parity",
                            SectorKind::VibrationalAngularMomentum => "l",
                            SectorKind::AngularMomentum => "j",
                            SectorKind::Seniority => "tau",
                        };
                        if kind.trim() != expected {
                            return Err(bad());
                        }
                        v.trim()
                    }
                    None => other,
                };
                Self::for_model(model, value.parse().map_err(|_| bad())?)
            }
        };
        if label.kind != model.sector_kind() {
            return Err(bad());
        }
        Ok(label)
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SectorKind::Parity => f.write_str(if self.value == 0 { "even" } else { "odd" }),
            SectorKind::VibrationalAngularMomentum => write!(f, "l={}", self.value),
            SectorKind::AngularMomentum => write!(f, "J={}", self.value),
            SectorKind::Seniority => write!(f, "tau={}", self.value),
        }
    }
}

/// Every conserved-quantity sector of the instance, without duplicates.
/// Negative `l` blocks of the 2D vibron model are listed explicitly.
pub fn sector_list(instance: &ModelInstance) -> Vec<SectorLabel> {
    let n = instance.n_bosons as i32;
    let model = instance.model;
    match model.sector_kind() {
        SectorKind::Parity => vec![SectorLabel::even(), SectorLabel::odd()],
        SectorKind::VibrationalAngularMomentum => (-n..=n).map(SectorLabel::l).collect(),
        _ => (0..=n).map(|v| SectorLabel::for_model(model, v)).collect(),
    }
}

/// Quanta `n_b` spanning the block of seniority `v`: `v, v + 2, ..., <= N`.
pub fn basis_quanta(n_bosons: u32, label: &SectorLabel) -> Vec<u32> {
    let v = label.seniority();
    if v > n_bosons {
        return Vec::new();
    }
    (v..=n_bosons).step_by(2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lmg(n: u32) -> ModelInstance {
        ModelInstance::new(Model::Lmg, n, 0.5).unwrap()
    }

    #[test]
    fn lmg_n2_has_even_and_odd() {
        let sectors = sector_list(&lmg(2));
        assert_eq!(sectors, vec![SectorLabel::even(), SectorLabel::odd()]);
        assert_eq!(basis_quanta(2, &sectors[0]).len(), 2);
        assert_eq!(basis_quanta(2, &sectors[1]).len(), 1);
    }

    #[test]
    fn vm2d_n3_sector_dimensions() {
        let inst = ModelInstance::new(Model::Vm2d, 3, 0.0).unwrap();
        let sectors = sector_list(&inst);
        let values: Vec<i32> = sectors.iter().map(|s| s.value).collect();
        assert_eq!(values, vec![-3, -2, -1, 0, 1, 2, 3]);
        let dims: Vec<usize> = sectors.iter().map(|s| basis_quanta(3, s).len()).collect();
        assert_eq!(dims, vec![1, 1, 2, 2, 2, 1, 1]);
    }

    #[test]
    fn ibm_n2_sector_dimensions() {
        let inst = ModelInstance::new(Model::Ibm, 2, 0.3).unwrap();
        let dims: Vec<usize> = sector_list(&inst)
            .iter()
            .map(|s| basis_quanta(2, s).len())
            .collect();
        assert_eq!(dims, vec![2, 1, 1]);
    }

    #[test]
    fn sector_dimensions_sum_to_full_space() {
        for model in Model::ALL {
            for n in 1..=10 {
                let inst = ModelInstance::new(model, n, 0.2).unwrap();
                let total: u64 = sector_list(&inst)
                    .iter()
                    .map(|s| basis_quanta(n, s).len() as u64 * s.multiplicity())
                    .sum();
                assert_eq!(total, inst.full_dimension(), "{model} N={n}");
            }
        }
    }

    #[test]
    fn full_dimension_formulas() {
        for n in 1..=10u64 {
            assert_eq!(Model::Lmg.full_dimension(n as u32), n + 1);
            assert_eq!(Model::Vm2d.full_dimension(n as u32), (n + 1) * (n + 2) / 2);
            assert_eq!(Model::Vm3d.full_dimension(n as u32), (n + 1) * (n + 2) * (n + 3) / 6);
            assert_eq!(
                Model::Ibm.full_dimension(n as u32),
                (n + 1) * (n + 2) * (n + 3) * (n + 4) * (n + 5) / 120
            );
        }
    }

    #[test]
    fn instance_validation() {
        assert!(ModelInstance::new(Model::Lmg, 0, 0.5).is_err());
        assert!(ModelInstance::new(Model::Lmg, 4, 1.5).is_err());
        assert!(ModelInstance::new(Model::Lmg, 4, -0.1).is_err());
        assert!("XYZ".parse::<Model>().is_err());
        assert_eq!("2dvm".parse::<Model>().unwrap(), Model::Vm2d);
    }

    #[test]
    fn control_parameter_keeps_shortest_text() {
        assert_eq!(ControlParameter::new(0.6).unwrap().text(), "0.6");
        assert_eq!(ControlParameter::parse(" 0.25 ").unwrap().value(), 0.25);
    }

    #[test]
    fn label_parsing_and_validity() {
        assert_eq!(SectorLabel::parse(Model::Lmg, "odd").unwrap(), SectorLabel::odd());
        assert_eq!(SectorLabel::parse(Model::Vm2d, "l=-2").unwrap(), SectorLabel::l(-2));
        assert_eq!(
            SectorLabel::parse(Model::Ibm, "tau=1").unwrap(),
            SectorLabel::for_model(Model::Ibm, 1)
        );
        assert!(SectorLabel::parse(Model::Lmg, "banana").is_err());
        let inst = ModelInstance::new(Model::Vm2d, 3, 0.5).unwrap();
        assert!(SectorLabel::l(-3).is_valid_for(&inst));
        assert!(!SectorLabel::l(4).is_valid_for(&inst));
        assert!(!SectorLabel::even().is_valid_for(&inst));
    }
}
