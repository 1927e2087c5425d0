//! Symmetric tridiagonal eigensolver: Gershgorin bracketing, Sturm-count
//! bisection and inverse iteration, identical in `f64` and [`BigFloat`].
//!
//! Every eigenvalue comes with a certified half-width: the final bisection
//! bracket plus a backward-error allowance for the Sturm recurrence.
//!
//! [`BigFloat`]: crate::real::BigFloat

mod inverse;
mod sturm;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::SectorBlock;
use crate::real::Real;

pub use inverse::eig_vectors_tridiagonal;
pub use sturm::sturm_count;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    Double,
    Arbitrary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub mode: PrecisionMode,
    pub mantissa_bits: usize,
    /// `log2` of the relative eigenvalue tolerance.
    pub eig_tol_log2: i64,
}

pub const DEFAULT_BITS: usize = 256;
pub const MAX_BITS: usize = 4096;

impl PrecisionConfig {
    pub fn double() -> Self {
        Self {
            mode: PrecisionMode::Double,
            mantissa_bits: f64::MANTISSA_DIGITS as usize,
            eig_tol_log2: -50,
        }
    }

    pub fn arbitrary(bits: usize) -> Result<Self> {
        let cfg = Self {
            mode: PrecisionMode::Arbitrary,
            mantissa_bits: bits,
            eig_tol_log2: 8 - bits as i64,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_eig_tol_log2(mut self, log2: i64) -> Result<Self> {
        self.eig_tol_log2 = log2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            PrecisionMode::Double => {
                if self.mantissa_bits != 53 {
                    return Err(Error::InvalidInput("double mode carries 53 mantissa bits".into()));
                }
            }
            PrecisionMode::Arbitrary => {
                if self.mantissa_bits < 64 || self.mantissa_bits > MAX_BITS {
                    return Err(Error::InvalidInput(format!(
                        "mantissa_bits must lie in [64, {MAX_BITS}], got {}",
                        self.mantissa_bits
                    )));
                }
            }
        }
        if self.eig_tol_log2 < 1 - self.mantissa_bits as i64 {
            return Err(Error::InvalidInput(format!(
                "eig_tol 2^{} is below the working precision 2^{}",
                self.eig_tol_log2,
                1 - self.mantissa_bits as i64
            )));
        }
        if self.eig_tol_log2 >= 0 {
            return Err(Error::InvalidInput("eig_tol must be below 1".into()));
        }
        Ok(())
    }

    pub fn eig_tol<T: Real>(&self) -> T {
        T::pow2(self.eig_tol_log2, self.mantissa_bits)
    }

    /// Unit roundoff `2^-bits` of the working precision.
    pub fn unit_roundoff<T: Real>(&self) -> T {
        T::pow2(-(self.mantissa_bits as i64), self.mantissa_bits)
    }

    /// Tolerance on `|v.v - 1|` for computed eigenvectors.
    pub fn norm_tolerance(&self) -> f64 {
        match self.mode {
            PrecisionMode::Double => 1e-12,
            PrecisionMode::Arbitrary => 2f64.powi(20 - self.mantissa_bits as i32),
        }
    }

    fn check_scalar<T: Real>(&self) -> Result<()> {
        let bits = T::zero(self.mantissa_bits).mantissa_bits();
        if bits != self.mantissa_bits {
            return Err(Error::InvalidInput(format!(
                "scalar type carries {bits} bits but the precision config asks for {}",
                self.mantissa_bits
            )));
        }
        Ok(())
    }
}

/// Eigenvalue with its certified half-width.
#[derive(Clone, Debug)]
pub struct Eigenvalue<T> {
    pub index: usize,
    pub value: T,
    pub half_width: T,
}

#[derive(Clone, Debug)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<T>,
    pub half_widths: Vec<T>,
    /// Unit-norm eigenvectors, one per eigenvalue, when requested.
    pub eigenvectors: Option<Vec<Vec<T>>>,
    pub precision: PrecisionConfig,
    /// `max(lambda_max - lambda_min, |lambda|_max)` from Gershgorin bounds;
    /// the scale all absolute tolerances are taken against.
    pub spectral_scale: T,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalue(&self, i: usize) -> Eigenvalue<T> {
        Eigenvalue {
            index: i,
            value: self.eigenvalues[i].clone(),
            half_width: self.half_widths[i].clone(),
        }
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(Real::to_f64).collect()
    }
}

/// Certified difference `b - a` of two eigenvalues.
#[derive(Clone, Debug)]
pub struct Gap<T> {
    /// `b - a` when resolved; otherwise the combined resolution, never zero.
    pub value: T,
    pub resolution: T,
    pub certified: bool,
}

pub fn certified_gap<T: Real>(a: &Eigenvalue<T>, b: &Eigenvalue<T>) -> Gap<T> {
    let diff = b.value.clone() - a.value.clone();
    let resolution = a.half_width.clone() + b.half_width.clone();
    if diff.abs() > resolution {
        Gap {
            value: diff,
            resolution,
            certified: true,
        }
    } else {
        Gap {
            value: resolution.clone(),
            resolution,
            certified: false,
        }
    }
}

pub(crate) struct Prepared<T> {
    pub off_sq: Vec<T>,
    pub lower: T,
    pub upper: T,
    pub scale: T,
    pub pivmin: T,
}

pub(crate) fn prepare<T: Real>(diag: &[T], offdiag: &[T], bits: usize) -> Result<Prepared<T>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty tridiagonal matrix".into()));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "off-diagonal length {} does not match dimension {n}",
            offdiag.len()
        )));
    }
    for (i, d) in diag.iter().enumerate() {
        if !d.is_finite() {
            return Err(Error::NonFinite(i));
        }
    }
    for (i, e) in offdiag.iter().enumerate() {
        if !e.is_finite() {
            return Err(Error::NonFinite(n + i));
        }
    }
    let zero = T::zero(bits);
    let mut lower: Option<T> = None;
    let mut upper: Option<T> = None;
    for i in 0..n {
        let left = if i > 0 { offdiag[i - 1].abs() } else { zero.clone() };
        let right = if i + 1 < n { offdiag[i].abs() } else { zero.clone() };
        let radius = left + right;
        let lo = diag[i].clone() - radius.clone();
        let hi = diag[i].clone() + radius;
        lower = Some(match lower {
            Some(l) => l.min_of(lo),
            None => lo,
        });
        upper = Some(match upper {
            Some(u) => u.max_of(hi),
            None => hi,
        });
    }
    let (lower, upper) = (lower.unwrap(), upper.unwrap());
    let mut scale = (upper.clone() - lower.clone())
        .max_of(lower.abs())
        .max_of(upper.abs());
    if scale.is_zero() {
        scale = T::one(bits);
    }
    let off_sq: Vec<T> = offdiag.iter().map(|e| e.clone() * e.clone()).collect();
    let pivmin = T::pow2(-2 * bits as i64, bits) * scale.clone();
    Ok(Prepared {
        off_sq,
        lower,
        upper,
        scale,
        pivmin,
    })
}

/// Eigenvalues with indices in `range` (ascending order) by Sturm bisection.
pub fn bisect_range<T: Real>(
    diag: &[T],
    offdiag: &[T],
    range: std::ops::Range<usize>,
    precision: &PrecisionConfig,
) -> Result<Vec<Eigenvalue<T>>> {
    precision.validate()?;
    precision.check_scalar::<T>()?;
    let bits = precision.mantissa_bits;
    let prep = prepare(diag, offdiag, bits)?;
    let n = diag.len();
    if range.end > n || range.start > range.end {
        return Err(Error::InvalidInput(format!(
            "eigenvalue range {range:?} outside 0..{n}"
        )));
    }
    let two = T::from_i64(2, bits);
    let tol_abs = precision.eig_tol::<T>() * prep.scale.clone();
    // Bisection's backward error: a few ulps of the matrix norm.
    let rounding = T::from_i64(8, bits) * precision.unit_roundoff::<T>() * prep.scale.clone();
    // Pad the Gershgorin interval so that the end points are strict bounds.
    let pad = tol_abs.clone() + rounding.clone();
    let glo = prep.lower.clone() - pad.clone();
    let ghi = prep.upper.clone() + pad;

    let m = range.len();
    let mut lo: Vec<T> = vec![glo; m];
    let mut hi: Vec<T> = vec![ghi; m];
    let max_iter = 4 * bits + 256;
    let mut out = Vec::with_capacity(m);

    for slot in 0..m {
        let k = range.start + slot;
        let mut iter = 0;
        loop {
            let width = hi[slot].clone() - lo[slot].clone();
            if width <= tol_abs {
                break;
            }
            let mid = (lo[slot].clone() + hi[slot].clone()) / two.clone();
            if !(mid > lo[slot] && mid < hi[slot]) {
                // bracket is down to adjacent floating-point numbers
                break;
            }
            let count = sturm::count_prepared(diag, &prep.off_sq, &mid, &prep.pivmin);
            // count = #eigenvalues < mid; tighten every bracket it informs
            for s in slot..m {
                let kk = range.start + s;
                if count <= kk {
                    if mid > lo[s] {
                        lo[s] = mid.clone();
                    }
                } else if mid < hi[s] {
                    hi[s] = mid.clone();
                }
            }
            iter += 1;
            if iter > max_iter {
                return Err(Error::NonConvergence {
                    index: k,
                    lo: lo[slot].to_decimal_string(),
                    hi: hi[slot].to_decimal_string(),
                });
            }
        }
        let value = (lo[slot].clone() + hi[slot].clone()) / two.clone();
        let half_width = (hi[slot].clone() - lo[slot].clone()) / two.clone() + rounding.clone();
        out.push(Eigenvalue {
            index: k,
            value,
            half_width,
        });
        // later eigenvalues are not below this one
        if slot + 1 < m {
            let floor = lo[slot].clone();
            for s in slot + 1..m {
                if floor > lo[s] {
                    lo[s] = floor.clone();
                }
            }
        }
    }
    Ok(out)
}

/// All eigenvalues of a symmetric tridiagonal matrix, ascending.
pub fn eig_values_tridiagonal<T: Real>(
    diag: &[T],
    offdiag: &[T],
    precision: &PrecisionConfig,
) -> Result<Spectrum<T>> {
    let values = bisect_range(diag, offdiag, 0..diag.len(), precision)?;
    let prep = prepare(diag, offdiag, precision.mantissa_bits)?;
    let (eigenvalues, half_widths) = values.into_iter().map(|e| (e.value, e.half_width)).unzip();
    Ok(Spectrum {
        eigenvalues,
        half_widths,
        eigenvectors: None,
        precision: *precision,
        spectral_scale: prep.scale,
    })
}

pub fn eig_values<T: Real>(block: &SectorBlock<T>, precision: &PrecisionConfig) -> Result<Spectrum<T>> {
    eig_values_tridiagonal(&block.diag, &block.offdiag, precision)
}

/// Adds eigenvectors to a spectrum computed from the same block.
pub fn eig_vectors<T: Real>(
    block: &SectorBlock<T>,
    spectrum: Spectrum<T>,
) -> Result<Spectrum<T>> {
    eig_vectors_tridiagonal(&block.diag, &block.offdiag, spectrum)
}

/// Eigenvalues and eigenvectors in one call.
pub fn diagonalize<T: Real>(block: &SectorBlock<T>, precision: &PrecisionConfig) -> Result<Spectrum<T>> {
    let spectrum = eig_values(block, precision)?;
    eig_vectors(block, spectrum)
}
