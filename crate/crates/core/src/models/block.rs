use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::models::elements::{
    pair_product_diagonal, pair_product_offdiag_square, pairing_offdiag_sign,
};
use crate::models::{basis_quanta, ModelInstance, SectorLabel};
use crate::real::Real;

/// One conserved-quantity block of `H` as a symmetric tridiagonal matrix
/// over the quanta `n_b = v, v + 2, ...`.
#[derive(Clone, Debug)]
pub struct SectorBlock<T> {
    pub instance: ModelInstance,
    pub label: SectorLabel,
    pub basis_quanta: Vec<u32>,
    pub diag: Vec<T>,
    pub offdiag: Vec<T>,
    /// Mantissa bits the entries were assembled with.
    pub bits: usize,
}

impl<T: Real> SectorBlock<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `2` for the `+-l` pair of the 2D vibron model, `1` otherwise.
    pub fn sign_degeneracy(&self) -> u32 {
        match self.label.kind {
            crate::models::SectorKind::VibrationalAngularMomentum if self.label.value != 0 => 2,
            _ => 1,
        }
    }

    /// JSON export: `{model, N, xi, sector, diag[], offdiag[]}` with every
    /// number written as a decimal string.
    pub fn to_json(&self) -> Value {
        json!({
            "model": self.instance.model.id(),
            "N": self.instance.n_bosons.to_string(),
            "xi": self.instance.xi.text(),
            "sector": self.label.to_string(),
            "diag": self.diag.iter().map(Real::to_decimal_string).collect::<Vec<_>>(),
            "offdiag": self.offdiag.iter().map(Real::to_decimal_string).collect::<Vec<_>>(),
        })
    }

    /// Dense `f64` copy, for checks against the Fock-space oracle.
    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i].to_f64();
            if i + 1 < n {
                m[i][i + 1] = self.offdiag[i].to_f64();
                m[i + 1][i] = self.offdiag[i].to_f64();
            }
        }
        m
    }
}

fn check_label(instance: &ModelInstance, label: &SectorLabel) -> Result<()> {
    if label.is_valid_for(instance) {
        Ok(())
    } else {
        Err(Error::NotInSectorList {
            model: instance.model,
            n: instance.n_bosons,
            label: *label,
        })
    }
}

/// Assembles the block of `H = (1 - xi) n_b + (xi / N) P` for one sector
/// directly from the closed-form pairing elements, at `bits` of mantissa
/// (ignored for `f64`).
pub fn build_block<T: Real>(
    instance: &ModelInstance,
    label: &SectorLabel,
    bits: usize,
) -> Result<SectorBlock<T>> {
    check_label(instance, label)?;
    let model = instance.model;
    let n = instance.n_bosons;
    let dof = model.dof();
    let v = label.seniority();
    let quanta = basis_quanta(n, label);

    let xi = T::parse_decimal(instance.xi.text(), bits)?;
    let one_minus_xi = T::one(bits) - xi.clone();
    let coupling = xi * T::from_i64(model.pairing_factor(), bits) / T::from_i64(n as i64, bits);
    let sign = pairing_offdiag_sign(model);

    let diag: Vec<T> = quanta
        .iter()
        .map(|&nb| {
            let p = T::from_i64(pair_product_diagonal(n, dof, v, nb), bits);
            one_minus_xi.clone() * T::from_i64(nb as i64, bits) + coupling.clone() * p
        })
        .collect();
    let offdiag: Vec<T> = quanta
        .iter()
        .take(quanta.len().saturating_sub(1))
        .map(|&nb| {
            let mag = T::from_i64(pair_product_offdiag_square(n, dof, v, nb), bits).sqrt();
            let el = coupling.clone() * mag;
            if sign < 0 {
                -el
            } else {
                el
            }
        })
        .collect();

    let bits = diag.first().map(Real::mantissa_bits).unwrap_or(bits);
    Ok(SectorBlock {
        instance: instance.clone(),
        label: *label,
        basis_quanta: quanta,
        diag,
        offdiag,
        bits,
    })
}

/// Closed-form spectrum of a block at the dynamical-symmetry endpoints.
///
/// At `xi = 0` the eigenvalues are the quanta `n_b`. At `xi = 1` they are
/// `c (N(N + n - 1) - w(w + n - 1)) / N` for `w = N, N - 2, ... >= v`, with
/// `c` the model's pairing factor.
pub fn analytic_limit_spectrum<T: Real>(
    instance: &ModelInstance,
    label: &SectorLabel,
    bits: usize,
) -> Result<Vec<T>> {
    check_label(instance, label)?;
    let xi = instance.xi.value();
    let n = instance.n_bosons as i64;
    let quanta = basis_quanta(instance.n_bosons, label);
    if xi == 0.0 {
        return Ok(quanta.iter().map(|&q| T::from_i64(q as i64, bits)).collect());
    }
    if xi != 1.0 {
        return Err(Error::InvalidInput(format!(
            "closed-form spectrum needs xi = 0 or 1, got {}",
            instance.xi
        )));
    }
    let d = instance.model.dof() as i64;
    let c = instance.model.pairing_factor();
    let v = label.seniority() as i64;
    let casimir_top = n * (n + d - 1);
    // w = N, N-2, ... gives ascending energies
    let values = (0..quanta.len() as i64)
        .map(|k| {
            let w = n - 2 * k;
            debug_assert!(w >= v);
            let num = c * (casimir_top - w * (w + d - 1));
            T::from_i64(num, bits) / T::from_i64(n, bits)
        })
        .collect();
    Ok(values)
}
