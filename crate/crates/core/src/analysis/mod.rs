//! Spectral post-processing: correlation energy diagrams, inter-sector gaps
//! against the control parameter and the system size, gap fits, centrifugal
//! scans and critical-energy estimates.

mod critical;
mod fit;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{
    bisect_range, certified_gap, eig_values, prepare, Eigenvalue, PrecisionConfig, PrecisionMode,
    MAX_BITS,
};
use crate::error::{Error, Result};
use crate::models::{build_block, sector_list, ControlParameter, Model, ModelInstance, SectorLabel};
use crate::real::{BigFloat, Real};

pub use critical::{
    condensate_energy, golden_section_min, level_density_critical_energy, level_density_peak,
    meanfield_critical_energy, qpt_location, reference_ground_energy, reference_sector,
    running_median, LevelDensityEstimate, QptScan,
};
pub use fit::{fit_gap, linear_least_squares, FitForm, FitResult};

/// Default diagram step in the control parameter.
pub const DEFAULT_XI_STEP: f64 = 0.005;

/// Evenly spaced grid `0, step, ..., 1` with decimal texts free of
/// accumulated rounding.
pub fn xi_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<ControlParameter>> {
    if !(step > 0.0) || lo > hi {
        return Err(Error::InvalidInput(format!("bad grid [{lo}, {hi}] step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|k| {
            let x = lo + k as f64 * step;
            let text = format!("{:.12}", x);
            let text = text.trim_end_matches('0').trim_end_matches('.').to_string();
            ControlParameter::parse(if text.is_empty() { "0" } else { &text })
        })
        .collect()
}

fn lowest_f64(instance: &ModelInstance, label: &SectorLabel, count: usize) -> Result<Vec<f64>> {
    let block = build_block::<f64>(instance, label, 53)?;
    let count = count.min(block.dim());
    let ev = bisect_range(&block.diag, &block.offdiag, 0..count, &PrecisionConfig::double())?;
    Ok(ev.into_iter().map(|e| e.value).collect())
}

/// Global ground-state energy: the lowest eigenvalue over every sector.
pub fn ground_state_energy(instance: &ModelInstance) -> Result<f64> {
    let labels = sector_list(instance);
    let heads: Vec<f64> = labels
        .iter()
        .filter(|l| l.value >= 0)
        .map(|l| Ok(lowest_f64(instance, l, 1)?[0]))
        .collect::<Result<_>>()?;
    Ok(heads.into_iter().fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectorLevels {
    pub label: SectorLabel,
    /// Scaled excitation energies `(E - E_0) / N`, ascending.
    pub levels: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub xi: ControlParameter,
    pub ground_energy: f64,
    pub sectors: Vec<SectorLevels>,
    /// Set when this grid point failed; the sweep continues past it.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationDiagram {
    pub model: Model,
    pub n_bosons: u32,
    pub points: Vec<DiagramPoint>,
}

fn diagram_point(model: Model, n: u32, xi: &ControlParameter, sectors: &[SectorLabel]) -> Result<DiagramPoint> {
    let inst = ModelInstance::with_parameter(model, n, xi.clone())?;
    let e0 = ground_state_energy(&inst)?;
    let scale = n as f64;
    let sectors = sectors
        .iter()
        .map(|label| {
            let block = build_block::<f64>(&inst, label, 53)?;
            let s = eig_values(&block, &PrecisionConfig::double())?;
            Ok(SectorLevels {
                label: *label,
                levels: s.eigenvalues.iter().map(|e| ((e - e0) / scale).max(0.0)).collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(DiagramPoint {
        xi: xi.clone(),
        ground_energy: e0,
        sectors,
        error: None,
    })
}

/// Levels of the requested sectors on a grid of control parameters.
pub fn correlation_diagram(
    model: Model,
    n_bosons: u32,
    grid: &[ControlParameter],
    sectors: &[SectorLabel],
) -> Result<CorrelationDiagram> {
    let probe = ModelInstance::new(model, n_bosons, 0.0)?;
    for label in sectors {
        if !label.is_valid_for(&probe) {
            return Err(Error::NotInSectorList {
                model,
                n: n_bosons,
                label: *label,
            });
        }
    }
    let points = grid
        .par_iter()
        .map(|xi| {
            diagram_point(model, n_bosons, xi, sectors).unwrap_or_else(|e| {
                warn!("diagram point xi = {xi} failed: {e}");
                DiagramPoint {
                    xi: xi.clone(),
                    ground_energy: f64::NAN,
                    sectors: Vec::new(),
                    error: Some(e.to_string()),
                }
            })
        })
        .collect();
    Ok(CorrelationDiagram {
        model,
        n_bosons,
        points,
    })
}

/// The `index`-th level of sector `a` paired with the `index`-th of `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub a: SectorLabel,
    pub b: SectorLabel,
    pub index: usize,
}

impl PairSpec {
    /// Even/odd (LMG) or `l = 0 / l = 1` style pair of the model's two lowest sectors.
    pub fn head(model: Model, index: usize) -> Self {
        Self {
            a: SectorLabel::for_model(model, 0),
            b: SectorLabel::for_model(model, 1),
            index,
        }
    }
}

/// One gap measurement, `E_b - E_a`, in absolute energy units.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapSample {
    pub n_bosons: u32,
    pub xi: String,
    /// Full-precision decimal rendering of the gap.
    pub gap: String,
    pub gap_f64: f64,
    /// Combined certified half-widths of the two eigenvalues.
    pub resolution_f64: f64,
    /// False when the two levels cannot be told apart at the working
    /// precision; `gap` then equals the resolution.
    pub certified: bool,
    pub mantissa_bits: usize,
    pub spectral_scale: f64,
}

impl GapSample {
    /// `|gap|` for fitting and plotting.
    pub fn magnitude(&self) -> f64 {
        self.gap_f64.abs()
    }
}

fn gap_with<T: Real>(instance: &ModelInstance, pair: &PairSpec, precision: &PrecisionConfig) -> Result<GapSample> {
    let bits = precision.mantissa_bits;
    let level = |label: &SectorLabel| -> Result<(Eigenvalue<T>, T)> {
        let block = build_block::<T>(instance, label, bits)?;
        if pair.index >= block.dim() {
            return Err(Error::InvalidInput(format!(
                "level {} does not exist in sector {label} (dimension {})",
                pair.index,
                block.dim()
            )));
        }
        let scale = prepare(&block.diag, &block.offdiag, bits)?.scale;
        let ev = bisect_range(&block.diag, &block.offdiag, pair.index..pair.index + 1, precision)?;
        Ok((ev.into_iter().next().expect("one eigenvalue"), scale))
    };
    let (ea, sa) = level(&pair.a)?;
    let (eb, sb) = level(&pair.b)?;
    let gap = certified_gap(&ea, &eb);
    Ok(GapSample {
        n_bosons: instance.n_bosons,
        xi: instance.xi.text().to_string(),
        gap: gap.value.to_decimal_string(),
        gap_f64: gap.value.to_f64(),
        resolution_f64: gap.resolution.to_f64(),
        certified: gap.certified,
        mantissa_bits: bits,
        spectral_scale: sa.max_of(sb).to_f64(),
    })
}

/// Gap of a level pair at the given precision, with no escalation.
pub fn pair_gap(instance: &ModelInstance, pair: &PairSpec, precision: &PrecisionConfig) -> Result<GapSample> {
    match precision.mode {
        PrecisionMode::Double => gap_with::<f64>(instance, pair, precision),
        PrecisionMode::Arbitrary => gap_with::<BigFloat>(instance, pair, precision),
    }
}

fn needs_more_bits(sample: &GapSample) -> bool {
    let floor = 2f64.powi(16 - sample.mantissa_bits as i32) * sample.spectral_scale;
    !sample.certified || sample.magnitude() < floor
}

/// Gap of a level pair, doubling the mantissa width (up to 4096 bits)
/// while the gap is unresolved or below `2^(16 - bits)` times the
/// spectral scale. Double precision escalates to 256-bit arithmetic first.
/// A gap that stays unresolved at the cap is returned flagged, not dropped.
pub fn pair_gap_escalating(
    instance: &ModelInstance,
    pair: &PairSpec,
    precision: &PrecisionConfig,
) -> Result<GapSample> {
    let mut cfg = *precision;
    loop {
        let sample = pair_gap(instance, pair, &cfg)?;
        if !needs_more_bits(&sample) {
            return Ok(sample);
        }
        let next = match cfg.mode {
            PrecisionMode::Double => crate::eigensolver::DEFAULT_BITS,
            PrecisionMode::Arbitrary => cfg.mantissa_bits * 2,
        };
        if next > MAX_BITS {
            warn!(
                "gap at N = {} stays below resolution at {} bits",
                instance.n_bosons, cfg.mantissa_bits
            );
            return Ok(sample);
        }
        debug!("N = {}: escalating to {next} bits", instance.n_bosons);
        cfg = PrecisionConfig::arbitrary(next)?;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapCurve {
    pub pair: PairSpec,
    pub samples: Vec<GapSample>,
}

/// Gap of every pair along a grid of control parameters, unscaled.
pub fn gap_vs_xi(
    model: Model,
    n_bosons: u32,
    pairs: &[PairSpec],
    grid: &[ControlParameter],
    precision: &PrecisionConfig,
) -> Result<Vec<GapCurve>> {
    pairs
        .iter()
        .map(|pair| {
            let samples = grid
                .par_iter()
                .map(|xi| {
                    let inst = ModelInstance::with_parameter(model, n_bosons, xi.clone())?;
                    pair_gap(&inst, pair, precision)
                })
                .collect::<Result<_>>()?;
            Ok(GapCurve {
                pair: *pair,
                samples,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapSeries {
    pub model: Model,
    pub xi: String,
    pub pair: PairSpec,
    pub samples: Vec<GapSample>,
    pub precision: PrecisionConfig,
}

impl GapSeries {
    /// `(N, |gap|)` of the certified samples.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter(|s| s.certified)
            .map(|s| (s.n_bosons as f64, s.magnitude()))
            .collect()
    }

    /// Fit over the samples; fails when any sample is below resolution.
    pub fn fit(&self, form: FitForm) -> Result<FitResult> {
        if let Some(s) = self.samples.iter().find(|s| !s.certified) {
            return Err(Error::InvalidInput(format!(
                "gap at N = {} is below the certified resolution",
                s.n_bosons
            )));
        }
        fit_gap(&self.points(), form)
    }
}

/// Gap of one level pair over system sizes at fixed `xi`. With
/// `escalate`, each size is recomputed at higher precision until resolved.
pub fn gap_vs_n(
    model: Model,
    xi: &ControlParameter,
    pair: &PairSpec,
    sizes: &[u32],
    precision: &PrecisionConfig,
    escalate: bool,
) -> Result<GapSeries> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("system sizes must be strictly ascending".into()));
    }
    let samples = sizes
        .par_iter()
        .map(|&n| {
            let inst = ModelInstance::with_parameter(model, n, xi.clone())?;
            if escalate {
                pair_gap_escalating(&inst, pair, precision)
            } else {
                pair_gap(&inst, pair, precision)
            }
        })
        .collect::<Result<_>>()?;
    Ok(GapSeries {
        model,
        xi: xi.text().to_string(),
        pair: *pair,
        samples,
        precision: *precision,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CentrifugalCurve {
    pub l: u32,
    /// `(xi, (E_head(l) - E_0) / l)`.
    pub points: Vec<(ControlParameter, f64)>,
}

/// Band-head excitation of each `l` block of the 2D vibron model, divided
/// by `l`, along a grid of control parameters.
pub fn centrifugal_scan(
    n_bosons: u32,
    ls: &[u32],
    grid: &[ControlParameter],
) -> Result<Vec<CentrifugalCurve>> {
    if let Some(&l) = ls.iter().find(|&&l| l == 0 || l > n_bosons) {
        return Err(Error::InvalidInput(format!(
            "angular momentum {l} outside [1, {n_bosons}]"
        )));
    }
    let e0: Vec<f64> = grid
        .par_iter()
        .map(|xi| {
            let inst = ModelInstance::with_parameter(Model::Vm2d, n_bosons, xi.clone())?;
            ground_state_energy(&inst)
        })
        .collect::<Result<_>>()?;
    ls.iter()
        .map(|&l| {
            let points = grid
                .par_iter()
                .zip(e0.par_iter())
                .map(|(xi, &ground)| {
                    let inst = ModelInstance::with_parameter(Model::Vm2d, n_bosons, xi.clone())?;
                    let head = lowest_f64(&inst, &SectorLabel::l(l as i32), 1)?[0];
                    Ok((xi.clone(), (head - ground) / l as f64))
                })
                .collect::<Result<_>>()?;
            Ok(CentrifugalCurve { l, points })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_texts_are_clean() {
        let g = xi_grid(0.0, 1.0, 0.005).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[1].text(), "0.005");
        assert_eq!(g[200].text(), "1");
        assert_eq!(g[0].text(), "0");
    }

    #[test]
    fn xi_zero_diagram_is_number_spectrum() {
        let d = correlation_diagram(
            Model::Lmg,
            50,
            &[ControlParameter::new(0.0).unwrap()],
            &[SectorLabel::even(), SectorLabel::odd()],
        )
        .unwrap();
        let p = &d.points[0];
        assert!(p.ground_energy.abs() < 1e-12);
        for (k, e) in p.sectors[0].levels.iter().enumerate() {
            assert!((e - 2.0 * k as f64 / 50.0).abs() < 1e-12);
        }
        for (k, e) in p.sectors[1].levels.iter().enumerate() {
            assert!((e - (2.0 * k as f64 + 1.0) / 50.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coupling_gap_is_one_quantum() {
        for model in Model::ALL {
            let s = gap_vs_n(
                model,
                &ControlParameter::new(0.0).unwrap(),
                &PairSpec::head(model, 0),
                &[4, 8, 16],
                &PrecisionConfig::double(),
                false,
            )
            .unwrap();
            for g in s.samples {
                assert!(g.certified);
                assert!((g.gap_f64 - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lmg_xi1_pair_is_unresolved() {
        let inst = ModelInstance::new(Model::Lmg, 50, 1.0).unwrap();
        let g = pair_gap(&inst, &PairSpec::head(Model::Lmg, 0), &PrecisionConfig::double()).unwrap();
        assert!(!g.certified);
        assert!(g.gap_f64 > 0.0 && g.gap_f64 < 1e-10);
    }

    #[test]
    fn centrifugal_rejects_bad_l() {
        let g = xi_grid(0.0, 1.0, 0.5).unwrap();
        assert!(centrifugal_scan(10, &[0], &g).is_err());
        assert!(centrifugal_scan(10, &[11], &g).is_err());
    }
}
