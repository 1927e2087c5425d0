//! Run configuration. A config is one JSON document; every number may be
//! written as a JSON number or as a string, so that control parameters and
//! tolerances keep their decimal text through to the arbitrary-precision
//! blocks.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use esqpt_core::analysis::{xi_grid, FitForm, PairSpec, DEFAULT_XI_STEP};
use esqpt_core::eigensolver::{PrecisionConfig, DEFAULT_BITS};
use esqpt_core::fock::DENSE_LIMIT;
use esqpt_core::models::ControlParameter;
use esqpt_core::otoc::OtocOperator;
use esqpt_core::{Model, ModelInstance, SectorLabel};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Ced,
    GapsXi,
    GapsN,
    Centrifugal,
    OtocScan,
    CriticalEnergy,
    OracleCheck,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Ced => "ced",
            Subcommand::GapsXi => "gaps-xi",
            Subcommand::GapsN => "gaps-n",
            Subcommand::Centrifugal => "centrifugal",
            Subcommand::OtocScan => "otoc-scan",
            Subcommand::CriticalEnergy => "critical-energy",
            Subcommand::OracleCheck => "oracle-check",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "ced" => Subcommand::Ced,
            "gaps-xi" => Subcommand::GapsXi,
            "gaps-n" => Subcommand::GapsN,
            "centrifugal" => Subcommand::Centrifugal,
            "otoc-scan" => Subcommand::OtocScan,
            "critical-energy" => Subcommand::CriticalEnergy,
            "oracle-check" => Subcommand::OracleCheck,
            other => return Err(CliError::Config(format!("unknown subcommand {other:?}"))),
        })
    }
}

/// A number kept as its literal text.
#[derive(Clone, Debug, PartialEq)]
pub struct Num(pub String);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match Value::deserialize(deserializer)? {
            Value::Number(n) => Ok(Num(n.to_string())),
            Value::String(s) => Ok(Num(s.trim().to_string())),
            other => Err(serde::de::Error::custom(format!("expected a number, got {other}"))),
        }
    }
}

impl Num {
    fn f64(&self, field: &str) -> CliResult<f64> {
        let v: f64 = self
            .0
            .parse()
            .map_err(|_| CliError::Config(format!("{field}: {:?} is not a number", self.0)))?;
        if v.is_nan() {
            return Err(CliError::Config(format!("{field}: NaN is not allowed")));
        }
        Ok(v)
    }

    fn int(&self, field: &str) -> CliResult<i64> {
        let v = self.f64(field)?;
        if v.fract() != 0.0 || !v.is_finite() || v.abs() > 1e15 {
            return Err(CliError::Config(format!("{field}: {:?} is not an integer", self.0)));
        }
        Ok(v as i64)
    }

    fn u32(&self, field: &str) -> CliResult<u32> {
        let v = self.int(field)?;
        u32::try_from(v).map_err(|_| CliError::Config(format!("{field}: {v} out of range")))
    }

    fn xi(&self, field: &str) -> CliResult<ControlParameter> {
        ControlParameter::parse(&self.0).map_err(|e| CliError::Config(format!("{field}: {e}")))
    }
}

/// Either an explicit list or an inclusive `start..stop` range with `step`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Seq {
    List(Vec<Num>),
    Range { start: Num, stop: Num, step: Num },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPair {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub index: Option<Num>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPrecision {
    pub mode: String,
    #[serde(default)]
    pub mantissa_bits: Option<Num>,
    #[serde(default)]
    pub eig_tol_log2: Option<Num>,
    #[serde(default)]
    pub escalate: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOtoc {
    #[serde(rename = "V", default)]
    pub v: Option<String>,
    #[serde(rename = "W", default)]
    pub w: Option<String>,
    #[serde(rename = "T_list", default)]
    pub t_list: Option<Vec<Num>>,
    #[serde(default)]
    pub tol_deg: Option<Num>,
    #[serde(default)]
    pub sector: Option<String>,
}

/// The config document as written.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub subcommand: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub models: Option<Vec<String>>,
    #[serde(rename = "N", default)]
    pub n: Option<Num>,
    #[serde(rename = "N_list", default)]
    pub n_list: Option<Seq>,
    #[serde(rename = "N_max", default)]
    pub n_max: Option<Num>,
    #[serde(default)]
    pub xi: Option<Num>,
    #[serde(default)]
    pub xi_grid: Option<Seq>,
    #[serde(default)]
    pub sectors: Option<Vec<String>>,
    #[serde(default)]
    pub pairs: Option<Vec<RawPair>>,
    #[serde(default)]
    pub precision: Option<RawPrecision>,
    #[serde(default)]
    pub otoc: Option<RawOtoc>,
    #[serde(default)]
    pub l_list: Option<Vec<Num>>,
    #[serde(default)]
    pub fits: Option<Vec<String>>,
    #[serde(default)]
    pub tolerance: Option<Num>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub plots: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OtocSettings {
    pub v: OtocOperator,
    pub w: OtocOperator,
    /// `None` is the infinite-time average.
    pub t_list: Vec<Option<f64>>,
    pub tol_deg: f64,
    pub sector: Option<SectorLabel>,
}

/// Validated configuration; serialized verbatim into the manifest.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub models: Vec<Model>,
    pub sizes: Vec<u32>,
    pub xi: Vec<ControlParameter>,
    pub sectors: Vec<SectorLabel>,
    pub pairs: Vec<PairSpec>,
    pub precision: PrecisionConfig,
    pub escalate: bool,
    pub otoc: Option<OtocSettings>,
    pub ls: Vec<u32>,
    pub fits: Vec<FitForm>,
    pub tolerance: f64,
    pub output: PathBuf,
    pub plots: bool,
}

impl RunConfig {
    /// The single model of every subcommand except `oracle-check`.
    pub fn model(&self) -> Model {
        self.models[0]
    }
}

/// Parses the JSON text of a config.
pub fn parse_raw(text: &str) -> CliResult<(RawConfig, Value)> {
    let echo: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("not valid JSON: {e}")))?;
    let raw: RawConfig = serde_json::from_value(echo.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((raw, echo))
}

fn model_of(raw: &RawConfig) -> CliResult<Model> {
    let text = raw
        .model
        .as_deref()
        .ok_or_else(|| CliError::Config("`model` is required".into()))?;
    Ok(Model::from_str(text)?)
}

fn seq_values(seq: &Seq, field: &str) -> CliResult<Vec<Num>> {
    match seq {
        Seq::List(v) => {
            if v.is_empty() {
                return Err(CliError::Config(format!("{field}: empty list")));
            }
            Ok(v.clone())
        }
        Seq::Range { start, stop, step } => {
            let (a, b, h) = (start.int(field)?, stop.int(field)?, step.int(field)?);
            if h <= 0 || a > b {
                return Err(CliError::Config(format!("{field}: bad range {a}..{b} step {h}")));
            }
            Ok((0..=(b - a) / h).map(|k| Num((a + k * h).to_string())).collect())
        }
    }
}

fn sizes(raw: &RawConfig, required: bool, default: &[u32]) -> CliResult<Vec<u32>> {
    let mut out = match (&raw.n, &raw.n_list) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either `N` or `N_list`, not both".into())),
        (Some(n), None) => vec![n.u32("N")?],
        (None, Some(seq)) => seq_values(seq, "N_list")?
            .iter()
            .map(|n| n.u32("N_list"))
            .collect::<CliResult<_>>()?,
        (None, None) if required => return Err(CliError::Config("`N` or `N_list` is required".into())),
        (None, None) => default.to_vec(),
    };
    if out.contains(&0) {
        return Err(CliError::Config("boson numbers must be positive".into()));
    }
    let before = out.len();
    out.dedup();
    if out.len() != before || out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("`N_list` must be strictly ascending".into()));
    }
    Ok(out)
}

fn xi_values(raw: &RawConfig, default_grid: bool) -> CliResult<Vec<ControlParameter>> {
    match (&raw.xi, &raw.xi_grid) {
        (Some(_), Some(_)) => Err(CliError::Config("give either `xi` or `xi_grid`, not both".into())),
        (Some(x), None) => Ok(vec![x.xi("xi")?]),
        (None, Some(Seq::List(v))) => {
            if v.is_empty() {
                return Err(CliError::Config("xi_grid: empty list".into()));
            }
            v.iter().map(|x| x.xi("xi_grid")).collect()
        }
        (None, Some(Seq::Range { start, stop, step })) => {
            let (a, b, h) = (start.f64("xi_grid")?, stop.f64("xi_grid")?, step.f64("xi_grid")?);
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(CliError::Config(format!("xi_grid: [{a}, {b}] is outside [0, 1]")));
            }
            xi_grid(a, b, h).map_err(|e| CliError::Config(format!("xi_grid: {e}")))
        }
        (None, None) if default_grid => Ok(xi_grid(0.0, 1.0, DEFAULT_XI_STEP)?),
        (None, None) => Err(CliError::Config("`xi` or `xi_grid` is required".into())),
    }
}

fn sectors(raw: &RawConfig, model: Model) -> CliResult<Vec<SectorLabel>> {
    match &raw.sectors {
        None => Ok(vec![SectorLabel::for_model(model, 0), SectorLabel::for_model(model, 1)]),
        Some(list) if list.is_empty() => Err(CliError::Config("`sectors` is empty".into())),
        Some(list) => list
            .iter()
            .map(|s| SectorLabel::parse(model, s).map_err(|e| CliError::Config(format!("sectors: {e}"))))
            .collect(),
    }
}

fn pairs(raw: &RawConfig, model: Model) -> CliResult<Vec<PairSpec>> {
    match &raw.pairs {
        None => Ok(vec![PairSpec::head(model, 0)]),
        Some(list) if list.is_empty() => Err(CliError::Config("`pairs` is empty".into())),
        Some(list) => list
            .iter()
            .map(|p| {
                let parse = |s: &str| SectorLabel::parse(model, s).map_err(|e| CliError::Config(format!("pairs: {e}")));
                let index = match &p.index {
                    Some(i) => i.u32("pairs.index")? as usize,
                    None => 0,
                };
                Ok(PairSpec {
                    a: parse(&p.a)?,
                    b: parse(&p.b)?,
                    index,
                })
            })
            .collect(),
    }
}

fn precision(raw: &RawConfig, default_arbitrary: bool) -> CliResult<(PrecisionConfig, bool)> {
    let Some(p) = &raw.precision else {
        return Ok(if default_arbitrary {
            (PrecisionConfig::arbitrary(DEFAULT_BITS)?, true)
        } else {
            (PrecisionConfig::double(), false)
        });
    };
    let mut cfg = match p.mode.as_str() {
        "double" => {
            if p.mantissa_bits.is_some() {
                return Err(CliError::Config("precision: mantissa_bits needs mode \"arbitrary\"".into()));
            }
            PrecisionConfig::double()
        }
        "arbitrary" => {
            let bits = match &p.mantissa_bits {
                Some(b) => b.u32("precision.mantissa_bits")? as usize,
                None => DEFAULT_BITS,
            };
            PrecisionConfig::arbitrary(bits).map_err(|e| CliError::Config(format!("precision: {e}")))?
        }
        other => return Err(CliError::Config(format!("precision.mode {other:?} is not \"double\" or \"arbitrary\""))),
    };
    if let Some(t) = &p.eig_tol_log2 {
        cfg = cfg
            .with_eig_tol_log2(t.int("precision.eig_tol_log2")?)
            .map_err(|e| CliError::Config(format!("precision: {e}")))?;
    }
    Ok((cfg, p.escalate.unwrap_or(default_arbitrary)))
}

fn fits(raw: &RawConfig) -> CliResult<Vec<FitForm>> {
    let Some(list) = &raw.fits else {
        return Ok(vec![FitForm::Exponential, FitForm::Power]);
    };
    list.iter()
        .map(|f| match f.as_str() {
            "exponential" | "exp" => Ok(FitForm::Exponential),
            "power" | "power-law" => Ok(FitForm::Power),
            other => Err(CliError::Config(format!("fits: unknown form {other:?}"))),
        })
        .collect()
}

fn otoc(raw: &RawConfig, model: Model) -> CliResult<OtocSettings> {
    let o = raw.otoc.clone().unwrap_or(RawOtoc {
        v: None,
        w: None,
        t_list: None,
        tol_deg: None,
        sector: None,
    });
    let probe = ModelInstance::new(model, 2, 0.0)?;
    let (_, _, v0, w0) = esqpt_core::otoc::standard_setup(&probe)
        .map_err(|e| CliError::Config(format!("otoc-scan: {e}")))?;
    let op = |s: &Option<String>, default: OtocOperator, name: &str| -> CliResult<OtocOperator> {
        let op = match s {
            Some(text) => OtocOperator::parse(text).map_err(|e| CliError::Config(format!("otoc.{name}: {e}")))?,
            None => default,
        };
        if !op.is_defined_for(model) {
            return Err(CliError::Config(format!("otoc.{name}: {} is not defined for {model}", op.name())));
        }
        Ok(op)
    };
    let t_list = match &o.t_list {
        None => vec![None],
        Some(list) if list.is_empty() => return Err(CliError::Config("otoc.T_list is empty".into())),
        Some(list) => list
            .iter()
            .map(|t| match t.0.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "stationary" => Ok(None),
                _ => {
                    let v = t.f64("otoc.T_list")?;
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(CliError::Config(format!("otoc.T_list: {v} is not a positive time")));
                    }
                    Ok(Some(v))
                }
            })
            .collect::<CliResult<_>>()?,
    };
    let tol_deg = match &o.tol_deg {
        Some(t) => t.f64("otoc.tol_deg")?,
        None => 1e-10,
    };
    if !(tol_deg > 0.0) {
        return Err(CliError::Config(format!("otoc.tol_deg must be positive, got {tol_deg}")));
    }
    let sector = match &o.sector {
        Some(s) => Some(SectorLabel::parse(model, s).map_err(|e| CliError::Config(format!("otoc.sector: {e}")))?),
        None => None,
    };
    Ok(OtocSettings {
        v: op(&o.v, v0, "V")?,
        w: op(&o.w, w0, "W")?,
        t_list,
        tol_deg,
        sector,
    })
}

fn forbid(sub: Subcommand, fields: &[(&str, bool)]) -> CliResult<()> {
    for (name, present) in fields {
        if *present {
            return Err(CliError::Config(format!("`{name}` is not used by {sub}")));
        }
    }
    Ok(())
}

/// Validates a raw config for `sub`. `out_override` (the `--out` flag) wins
/// over the config's `output`, and `plots_flag` turns plotting on.
pub fn resolve(raw: &RawConfig, sub: Subcommand, out_override: Option<PathBuf>, plots_flag: bool) -> CliResult<RunConfig> {
    if let Some(s) = &raw.subcommand {
        let named: Subcommand = s.parse()?;
        if named != sub {
            return Err(CliError::Config(format!("config is for {named}, but {sub} was invoked")));
        }
    }
    let output = out_override
        .or_else(|| raw.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let plots = plots_flag || raw.plots.unwrap_or(false);
    let tolerance = match &raw.tolerance {
        Some(t) => t.f64("tolerance")?,
        None => 1e-9,
    };
    if !(tolerance > 0.0) {
        return Err(CliError::Config("tolerance must be positive".into()));
    }

    let mut cfg = RunConfig {
        subcommand: sub,
        models: Vec::new(),
        sizes: Vec::new(),
        xi: Vec::new(),
        sectors: Vec::new(),
        pairs: Vec::new(),
        precision: PrecisionConfig::double(),
        escalate: false,
        otoc: None,
        ls: Vec::new(),
        fits: Vec::new(),
        tolerance,
        output,
        plots,
    };
    if sub != Subcommand::OracleCheck {
        forbid(sub, &[("models", raw.models.is_some()), ("N_max", raw.n_max.is_some()), ("tolerance", raw.tolerance.is_some())])?;
        cfg.models = vec![model_of(raw)?];
    }
    match sub {
        Subcommand::Ced => {
            forbid(sub, &[("pairs", raw.pairs.is_some()), ("precision", raw.precision.is_some()), ("otoc", raw.otoc.is_some()), ("l_list", raw.l_list.is_some()), ("fits", raw.fits.is_some())])?;
            cfg.sizes = sizes(raw, true, &[])?;
            cfg.xi = xi_values(raw, true)?;
            cfg.sectors = sectors(raw, cfg.model())?;
        }
        Subcommand::GapsXi => {
            forbid(sub, &[("sectors", raw.sectors.is_some()), ("otoc", raw.otoc.is_some()), ("l_list", raw.l_list.is_some()), ("fits", raw.fits.is_some())])?;
            cfg.sizes = sizes(raw, true, &[])?;
            cfg.xi = xi_values(raw, true)?;
            cfg.pairs = pairs(raw, cfg.model())?;
            (cfg.precision, cfg.escalate) = precision(raw, false)?;
        }
        Subcommand::GapsN => {
            forbid(sub, &[("sectors", raw.sectors.is_some()), ("otoc", raw.otoc.is_some()), ("l_list", raw.l_list.is_some()), ("xi_grid", raw.xi_grid.is_some())])?;
            cfg.sizes = sizes(raw, true, &[])?;
            if cfg.sizes.len() < 4 {
                return Err(CliError::Config("gaps-n needs at least four sizes for the fits".into()));
            }
            cfg.xi = xi_values(raw, false)?;
            cfg.pairs = pairs(raw, cfg.model())?;
            (cfg.precision, cfg.escalate) = precision(raw, true)?;
            cfg.fits = fits(raw)?;
        }
        Subcommand::Centrifugal => {
            forbid(sub, &[("sectors", raw.sectors.is_some()), ("pairs", raw.pairs.is_some()), ("precision", raw.precision.is_some()), ("otoc", raw.otoc.is_some()), ("fits", raw.fits.is_some())])?;
            if cfg.model() != Model::Vm2d {
                return Err(CliError::Config("centrifugal scans are defined for VM2D only".into()));
            }
            cfg.sizes = sizes(raw, true, &[])?;
            cfg.xi = xi_values(raw, true)?;
            cfg.ls = match &raw.l_list {
                Some(v) if v.is_empty() => return Err(CliError::Config("`l_list` is empty".into())),
                Some(v) => v.iter().map(|l| l.u32("l_list")).collect::<CliResult<_>>()?,
                None => vec![1, 14, 30],
            };
            let nmin = cfg.sizes[0];
            if let Some(&l) = cfg.ls.iter().find(|&&l| l == 0 || l > nmin) {
                return Err(CliError::Config(format!("l_list: {l} outside [1, {nmin}]")));
            }
        }
        Subcommand::OtocScan => {
            forbid(sub, &[("pairs", raw.pairs.is_some()), ("precision", raw.precision.is_some()), ("l_list", raw.l_list.is_some()), ("fits", raw.fits.is_some()), ("sectors", raw.sectors.is_some()), ("xi_grid", raw.xi_grid.is_some())])?;
            cfg.sizes = sizes(raw, true, &[])?;
            cfg.xi = xi_values(raw, false)?;
            let settings = otoc(raw, cfg.model())?;
            if let Some(label) = settings.sector {
                let probe = ModelInstance::new(cfg.model(), cfg.sizes[0], 0.0)?;
                let (labels, _, _, _) = esqpt_core::otoc::standard_setup(&probe)?;
                if !labels.contains(&label) {
                    return Err(CliError::Config(format!("otoc.sector {label} is not among the loaded sectors")));
                }
            }
            cfg.otoc = Some(settings);
        }
        Subcommand::CriticalEnergy => {
            forbid(sub, &[("pairs", raw.pairs.is_some()), ("precision", raw.precision.is_some()), ("otoc", raw.otoc.is_some()), ("l_list", raw.l_list.is_some()), ("fits", raw.fits.is_some()), ("sectors", raw.sectors.is_some())])?;
            cfg.sizes = sizes(raw, false, &[300, 600, 1200])?;
            if cfg.sizes.len() < 2 {
                return Err(CliError::Config("the level-density extrapolation needs at least two sizes".into()));
            }
            cfg.xi = xi_values(raw, false)?;
            let model = cfg.model();
            if let Some(x) = cfg.xi.iter().find(|x| x.value() <= model.critical_xi()) {
                return Err(CliError::Config(format!(
                    "xi = {x} is not above the critical coupling {} of {model}",
                    model.critical_xi()
                )));
            }
        }
        Subcommand::OracleCheck => {
            forbid(sub, &[("model", raw.model.is_some()), ("N", raw.n.is_some()), ("N_list", raw.n_list.is_some()), ("pairs", raw.pairs.is_some()), ("precision", raw.precision.is_some()), ("otoc", raw.otoc.is_some()), ("l_list", raw.l_list.is_some()), ("fits", raw.fits.is_some()), ("sectors", raw.sectors.is_some()), ("xi_grid", raw.xi_grid.is_some())])?;
            cfg.models = match &raw.models {
                None => Model::ALL.to_vec(),
                Some(list) if list.is_empty() => return Err(CliError::Config("`models` is empty".into())),
                Some(list) => list.iter().map(|m| Ok(Model::from_str(m)?)).collect::<CliResult<_>>()?,
            };
            let n_max = match &raw.n_max {
                Some(n) => n.u32("N_max")?,
                None => 4,
            };
            if n_max == 0 {
                return Err(CliError::Config("N_max must be positive".into()));
            }
            for &m in &cfg.models {
                if m.full_dimension(n_max) > DENSE_LIMIT as u64 {
                    return Err(CliError::Config(format!(
                        "N_max = {n_max} gives a {m} Fock space of dimension {} > {DENSE_LIMIT}",
                        m.full_dimension(n_max)
                    )));
                }
            }
            cfg.sizes = (1..=n_max).collect();
            cfg.xi = match &raw.xi {
                Some(x) => vec![x.xi("xi")?],
                None => ["0", "0.2", "0.5", "0.8", "1"]
                    .iter()
                    .map(|s| ControlParameter::parse(s))
                    .collect::<Result<_, _>>()?,
            };
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, sub: Subcommand) -> CliResult<RunConfig> {
        let (raw, _) = parse_raw(text)?;
        resolve(&raw, sub, None, false)
    }

    #[test]
    fn numbers_may_be_strings() {
        let cfg = parse(r#"{"model": "LMG", "N": "40", "xi": "0.6", "N_list": null}"#, Subcommand::GapsXi).unwrap();
        assert_eq!(cfg.sizes, vec![40]);
        assert_eq!(cfg.xi[0].text(), "0.6");
    }

    #[test]
    fn ranges_expand_inclusively() {
        let cfg = parse(
            r#"{"model": "LMG", "N_list": {"start": 20, "stop": "120", "step": 20}, "xi": 0.5}"#,
            Subcommand::GapsN,
        )
        .unwrap();
        assert_eq!(cfg.sizes, vec![20, 40, 60, 80, 100, 120]);
        assert!(cfg.escalate);
        assert_eq!(cfg.fits.len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse(r#"{"model": "LMG", "N": 10, "bogus": 1}"#, Subcommand::Ced).is_err());
        assert!(parse(r#"{"model": "LMG", "N": -3}"#, Subcommand::Ced).is_err());
        assert!(parse(r#"{"model": "LMG", "N": 10, "xi": "1.5"}"#, Subcommand::GapsXi).is_err());
        assert!(parse(r#"{"model": "XYZ", "N": 10}"#, Subcommand::Ced).is_err());
        assert!(parse(r#"{"model": "LMG", "N": 10, "sectors": ["l=1"]}"#, Subcommand::Ced).is_err());
        assert!(parse(r#"{"model": "LMG", "N": 50, "xi": 0.1}"#, Subcommand::CriticalEnergy).is_err());
        assert!(parse(r#"{"model": "LMG", "N": 50}"#, Subcommand::Centrifugal).is_err());
        assert!(parse(r#"{"model": "LMG", "N": 50, "xi": 0.6, "otoc": {"V": "D+"}}"#, Subcommand::OtocScan).is_err());
        assert!(parse(r#"{"subcommand": "ced", "model": "LMG", "N": 50}"#, Subcommand::GapsXi).is_err());
        assert!(parse(r#"{"N_max": 40}"#, Subcommand::OracleCheck).is_err());
    }

    #[test]
    fn otoc_defaults_follow_the_model() {
        let cfg = parse(r#"{"model": "VM2D", "N": 30, "xi": 0.6, "otoc": {"T_list": ["inf", 10]}}"#, Subcommand::OtocScan).unwrap();
        let o = cfg.otoc.unwrap();
        assert_eq!(o.v, OtocOperator::DMinus);
        assert_eq!(o.w, OtocOperator::DPlus);
        assert_eq!(o.t_list, vec![None, Some(10.0)]);
        assert_eq!(o.tol_deg, 1e-10);
    }

    #[test]
    fn oracle_check_defaults() {
        let cfg = parse("{}", Subcommand::OracleCheck).unwrap();
        assert_eq!(cfg.models.len(), 4);
        assert_eq!(cfg.sizes, vec![1, 2, 3, 4]);
        assert_eq!(cfg.xi.len(), 5);
    }
}
