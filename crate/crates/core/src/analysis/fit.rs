use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitForm {
    /// `dE = a exp(-b N)`
    Exponential,
    /// `dE = a N^(-b)`
    Power,
}

impl FitForm {
    pub fn name(self) -> &'static str {
        match self {
            FitForm::Exponential => "exponential",
            FitForm::Power => "power",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub form: FitForm,
    pub a: f64,
    pub b: f64,
    /// Coefficient of determination of the linearized fit, in `[0, 1]`.
    pub r2: f64,
    /// `ln dE - fitted ln dE` per sample.
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        match self.form {
            FitForm::Exponential => self.a * (-self.b * n).exp(),
            FitForm::Power => self.a * n.powf(-self.b),
        }
    }
}

/// Ordinary least squares `y = c0 + c1 x`; returns `(c0, c1, r2, residuals)`.
pub fn linear_least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, Vec<f64>)> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InvalidInput(format!(
            "need matching abscissae and ordinates (got {} and {})",
            x.len(),
            y.len()
        )));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * n as f64 {
        return Err(Error::RankDeficient("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - (intercept + slope * a))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok((intercept, slope, r2, residuals))
}

/// Fits `(N, dE)` samples by least squares on `ln dE` against `N`
/// (exponential) or `ln N` (power law).
pub fn fit_gap(samples: &[(f64, f64)], form: FitForm) -> Result<FitResult> {
    if samples.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "a gap fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    if let Some((n, g)) = samples.iter().find(|(_, g)| !(*g > 0.0) || !g.is_finite()) {
        return Err(Error::InvalidInput(format!("nonpositive gap {g} at N = {n}")));
    }
    if let Some((n, _)) = samples.iter().find(|(n, _)| !(*n > 0.0)) {
        return Err(Error::InvalidInput(format!("nonpositive size {n}")));
    }
    let x: Vec<f64> = samples
        .iter()
        .map(|(n, _)| match form {
            FitForm::Exponential => *n,
            FitForm::Power => n.ln(),
        })
        .collect();
    let y: Vec<f64> = samples.iter().map(|(_, g)| g.ln()).collect();
    let (c0, c1, r2, residuals) = linear_least_squares(&x, &y)?;
    let b = -c1;
    if !b.is_finite() {
        return Err(Error::RankDeficient("non-finite slope".into()));
    }
    Ok(FitResult {
        form,
        a: c0.exp(),
        b,
        r2,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_exponential() {
        let s: Vec<(f64, f64)> = (1..=10).map(|n| (n as f64 * 10.0, (-0.1 * n as f64 * 10.0).exp())).collect();
        let f = fit_gap(&s, FitForm::Exponential).unwrap();
        assert!((f.a - 1.0).abs() < 1e-10);
        assert!((f.b - 0.1).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthetic_power() {
        let s: Vec<(f64, f64)> = (1..=8).map(|n| (n as f64 * 7.0, 2.0 * (n as f64 * 7.0).powi(-3))).collect();
        let f = fit_gap(&s, FitForm::Power).unwrap();
        assert!((f.a - 2.0).abs() < 1e-9);
        assert!((f.b - 3.0).abs() < 1e-12);
        assert!(f.predict(14.0) > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let s = vec![(1.0, 1.0), (2.0, 0.5), (3.0, 0.0), (4.0, 0.1)];
        assert!(fit_gap(&s, FitForm::Exponential).is_err());
        let s = vec![(1.0, 1.0), (2.0, 0.5), (3.0, 0.2)];
        assert!(fit_gap(&s, FitForm::Exponential).is_err());
        let s = vec![(5.0, 1.0), (5.0, 0.5), (5.0, 0.2), (5.0, 0.1)];
        assert!(matches!(fit_gap(&s, FitForm::Power), Err(Error::RankDeficient(_))));
    }
}
