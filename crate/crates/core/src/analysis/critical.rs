//! Mean-field critical energy of the ESQPT, and the finite-size level
//! density estimate it is cross-checked against.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{bisect_range, eig_values, PrecisionConfig};
use crate::error::{Error, Result};
use crate::models::{build_block, Model, ModelInstance, SectorLabel};

use super::fit::linear_least_squares;

/// Intensive condensate energy per boson, `e = (1 - xi) x + c xi (1 - 2x)^2`
/// with `x = beta^2 / (1 + beta^2)` the fraction of second bosons.
pub fn condensate_energy(model: Model, xi: f64, beta: f64) -> f64 {
    let x = beta * beta / (1.0 + beta * beta);
    let c = model.pairing_factor() as f64;
    (1.0 - xi) * x + c * xi * (1.0 - 2.0 * x).powi(2)
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo + hi) / 2.0
}

/// Scaled critical excitation energy `e(0) - min_beta e(beta)`.
///
/// The origin `beta = 0` is the energy maximum the separatrix sits on.
/// Couplings below the model's critical value have no barrier and are
/// rejected; at the critical value the result is 0.
pub fn meanfield_critical_energy(model: Model, xi: f64) -> Result<f64> {
    let xc = model.critical_xi();
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidInput(format!("xi = {xi} outside [0, 1]")));
    }
    if xi < xc - 1e-15 {
        return Err(Error::InvalidInput(format!(
            "xi = {xi} is below the critical coupling {xc} of {model}; there is no ESQPT"
        )));
    }
    let e = |beta: f64| condensate_energy(model, xi, beta);
    // x = 1/2 at beta = 1 and every minimum has x < 1/2
    let beta_min = golden_section_min(e, 0.0, 4.0, 1e-12);
    Ok((e(0.0) - e(beta_min)).max(0.0))
}

/// Sector whose spectrum carries the ESQPT signature used by the
/// level-density estimate: even parity or zero angular momentum/seniority.
pub fn reference_sector(model: Model) -> SectorLabel {
    SectorLabel::for_model(model, 0)
}

/// Location `(E - E_0)/N` of the maximum of the smoothed level density
/// (inverse nearest-neighbour spacing, 5-point running median) in the
/// reference sector.
pub fn level_density_peak(instance: &ModelInstance) -> Result<f64> {
    let label = reference_sector(instance.model);
    let block = build_block::<f64>(instance, &label, 53)?;
    let spectrum = eig_values(&block, &PrecisionConfig::double())?;
    let e = spectrum.eigenvalues;
    if e.len() < 8 {
        return Err(Error::InvalidInput("too few levels for a level-density estimate".into()));
    }
    let n = instance.n_bosons as f64;
    let e0 = e[0];
    let mids: Vec<f64> = e.windows(2).map(|w| ((w[0] + w[1]) / 2.0 - e0) / n).collect();
    let density: Vec<f64> = e
        .windows(2)
        .map(|w| {
            let s = w[1] - w[0];
            if s > 0.0 {
                1.0 / s
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let smooth = running_median(&density, 5);
    let (imax, _) = smooth
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    Ok(mids[imax])
}

/// Running median with a centered odd window, truncated at the ends.
pub fn running_median(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            let mut w: Vec<f64> = values[lo..hi].to_vec();
            w.sort_by(f64::total_cmp);
            let m = w.len();
            if m % 2 == 1 {
                w[m / 2]
            } else {
                (w[m / 2 - 1] + w[m / 2]) / 2.0
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelDensityEstimate {
    pub model: Model,
    pub xi: f64,
    /// `(N, peak position)` per size.
    pub peaks: Vec<(u32, f64)>,
    /// Intercept of the least-squares line of peak position against `1/N`.
    pub extrapolated: f64,
}

/// Finite-size extrapolation of [`level_density_peak`] to `N -> infinity`.
pub fn level_density_critical_energy(model: Model, xi: f64, sizes: &[u32]) -> Result<LevelDensityEstimate> {
    if sizes.len() < 2 {
        return Err(Error::InvalidInput("extrapolation needs at least two sizes".into()));
    }
    let peaks: Vec<(u32, f64)> = sizes
        .par_iter()
        .map(|&n| {
            let inst = ModelInstance::new(model, n, xi)?;
            Ok((n, level_density_peak(&inst)?))
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = peaks.iter().map(|(n, _)| 1.0 / *n as f64).collect();
    let y: Vec<f64> = peaks.iter().map(|(_, p)| *p).collect();
    let (intercept, _, _, _) = linear_least_squares(&x, &y)?;
    Ok(LevelDensityEstimate {
        model,
        xi,
        peaks,
        extrapolated: intercept,
    })
}

/// Lowest eigenvalue of the reference sector, which holds the ground state.
pub fn reference_ground_energy(instance: &ModelInstance) -> Result<f64> {
    let block = build_block::<f64>(instance, &reference_sector(instance.model), 53)?;
    let ev = bisect_range(&block.diag, &block.offdiag, 0..1, &PrecisionConfig::double())?;
    Ok(ev[0].value)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QptScan {
    pub model: Model,
    pub n_bosons: u32,
    /// `(xi, E_0 / N)` on the grid.
    pub ground: Vec<(f64, f64)>,
    /// `(xi, d^2 e_0 / d xi^2)` by central differences at interior points.
    pub curvature: Vec<(f64, f64)>,
    /// Grid point of largest `|curvature|`.
    pub peak_xi: f64,
}

/// Scans the scaled ground-state energy on `[lo, hi]` with step `h` and
/// locates the peak of its second derivative.
pub fn qpt_location(model: Model, n_bosons: u32, lo: f64, hi: f64, h: f64) -> Result<QptScan> {
    if !(h > 0.0) || !(lo < hi) || lo < 0.0 || hi > 1.0 {
        return Err(Error::InvalidInput(format!("bad scan window [{lo}, {hi}] step {h}")));
    }
    let steps = ((hi - lo) / h).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| lo + k as f64 * h).collect();
    let ground: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&xi| {
            let inst = ModelInstance::new(model, n_bosons, xi.min(1.0))?;
            Ok((xi, reference_ground_energy(&inst)? / n_bosons as f64))
        })
        .collect::<Result<_>>()?;
    let curvature: Vec<(f64, f64)> = ground
        .windows(3)
        .map(|w| (w[1].0, (w[2].1 - 2.0 * w[1].1 + w[0].1) / (h * h)))
        .collect();
    let peak_xi = curvature
        .iter()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, &(x, c)| {
            if c.abs() > best.1 {
                (x, c.abs())
            } else {
                best
            }
        })
        .0;
    Ok(QptScan {
        model,
        n_bosons,
        ground,
        curvature,
        peak_xi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_critical_coupling() {
        for model in Model::ALL {
            let e = meanfield_critical_energy(model, model.critical_xi()).unwrap();
            assert!(e.abs() < 1e-12, "{model}: {e}");
        }
        assert!(meanfield_critical_energy(Model::Lmg, 0.1).is_err());
        assert!(meanfield_critical_energy(Model::Lmg, 1.5).is_err());
    }

    #[test]
    fn golden_section_on_parabola() {
        let x = golden_section_min(|x| (x - 0.3).powi(2), 0.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn running_median_window() {
        let m = running_median(&[1.0, 100.0, 2.0, 3.0, 4.0], 5);
        assert_eq!(m[2], 3.0);
        assert_eq!(m.len(), 5);
    }
}
