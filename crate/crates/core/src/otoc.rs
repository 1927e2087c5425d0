//! Microcanonical out-of-time-order correlators.
//!
//! For an eigenstate `|j>` the four-point correlator
//! `F(t) = <j| W(t)^dag V^dag W(t) V |j>` expands over eigenstates as
//! `sum N_{j1 j2 j3} exp(i w t)` with
//! `N = W^dag_{j j1} V^dag_{j1 j2} W_{j2 j3} V_{j3 j}` and
//! `w = E_j + E_j2 - E_j1 - E_j3`. Its time average over `[0, T]` weighs
//! each term by `(exp(i w T) - 1) / (i w T)`; the infinite-time average keeps
//! the resonant terms `w = 0`.

use std::collections::BTreeMap;

use log::{info, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{diagonalize, PrecisionConfig};
use crate::error::{Error, Result};
use crate::models::elements::{d_minus_elements, d_plus_elements, jx_elements};
use crate::models::{build_block, Model, ModelInstance, SectorLabel};

/// Eigenvalues and eigenvectors of one sector, in double precision.
#[derive(Clone, Debug)]
pub struct SectorEigensystem {
    pub label: SectorLabel,
    pub quanta: Vec<u32>,
    pub energies: Vec<f64>,
    /// Combined certified half-width of each eigenvalue.
    pub half_widths: Vec<f64>,
    /// `vectors[k]` is the k-th eigenvector over `quanta`.
    pub vectors: Option<Vec<Vec<f64>>>,
}

impl SectorEigensystem {
    fn vectors(&self) -> Result<&[Vec<f64>]> {
        self.vectors.as_deref().ok_or(Error::MissingEigenvectors(self.label))
    }
}

/// Eigensystems of several sectors of one model instance.
#[derive(Clone, Debug)]
pub struct EigenSystems {
    pub instance: ModelInstance,
    pub sectors: Vec<SectorEigensystem>,
    /// Lowest energy over the stored sectors.
    pub ground_energy: f64,
    /// Highest minus lowest energy over the stored sectors.
    pub spectral_width: f64,
}

impl EigenSystems {
    pub fn sector_index(&self, label: &SectorLabel) -> Result<usize> {
        self.sectors
            .iter()
            .position(|s| s.label == *label)
            .ok_or_else(|| Error::Incompatible(format!("sector {label} is not loaded")))
    }

    /// Largest certified half-width over the stored eigenvalues, relative to
    /// the spectral width; twice this is the finest meaningful `tol_deg`.
    pub fn relative_resolution(&self) -> f64 {
        let hw = self
            .sectors
            .iter()
            .flat_map(|s| s.half_widths.iter().copied())
            .fold(0.0, f64::max);
        hw / self.spectral_width
    }
}

/// Diagonalizes the listed sectors (with eigenvectors) in double precision.
pub fn diagonalize_sectors(instance: &ModelInstance, labels: &[SectorLabel]) -> Result<EigenSystems> {
    let precision = PrecisionConfig::double();
    let sectors: Vec<SectorEigensystem> = labels
        .par_iter()
        .map(|label| {
            let block = build_block::<f64>(instance, label, 53)?;
            let spectrum = diagonalize(&block, &precision)?;
            Ok(SectorEigensystem {
                label: *label,
                quanta: block.basis_quanta.clone(),
                energies: spectrum.eigenvalues,
                half_widths: spectrum.half_widths,
                vectors: spectrum.eigenvectors,
            })
        })
        .collect::<Result<_>>()?;
    let lo = sectors
        .iter()
        .flat_map(|s| s.energies.first().copied())
        .fold(f64::INFINITY, f64::min);
    let hi = sectors
        .iter()
        .flat_map(|s| s.energies.last().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(EigenSystems {
        instance: instance.clone(),
        sectors,
        ground_energy: lo,
        spectral_width: (hi - lo).max(f64::MIN_POSITIVE),
    })
}

/// Operators available for the correlators, with analytic banded elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OtocOperator {
    Identity,
    #[serde(rename = "J_x")]
    Jx,
    #[serde(rename = "D_+")]
    DPlus,
    #[serde(rename = "D_-")]
    DMinus,
}

impl OtocOperator {
    pub fn name(self) -> &'static str {
        match self {
            OtocOperator::Identity => "identity",
            OtocOperator::Jx => "J_x",
            OtocOperator::DPlus => "D_+",
            OtocOperator::DMinus => "D_-",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "identity" | "I" | "1" => Ok(OtocOperator::Identity),
            "J_x" | "Jx" | "jx" => Ok(OtocOperator::Jx),
            "D_+" | "D+" | "Dplus" | "d_plus" => Ok(OtocOperator::DPlus),
            "D_-" | "D-" | "Dminus" | "d_minus" => Ok(OtocOperator::DMinus),
            other => Err(Error::InvalidInput(format!("unknown operator {other:?}"))),
        }
    }

    pub fn is_defined_for(self, model: Model) -> bool {
        match self {
            OtocOperator::Identity => true,
            OtocOperator::Jx => model == Model::Lmg,
            OtocOperator::DPlus | OtocOperator::DMinus => model == Model::Vm2d,
        }
    }

    /// Sector reached from `source`, if the selection rule allows one.
    pub fn target(self, source: &SectorLabel) -> SectorLabel {
        match self {
            OtocOperator::Identity => *source,
            OtocOperator::Jx => SectorLabel::new(source.kind, 1 - source.value),
            OtocOperator::DPlus => SectorLabel::l(source.value + 1),
            OtocOperator::DMinus => SectorLabel::l(source.value - 1),
        }
    }

    /// `(target quanta, element)` of the operator applied to `|n_b>` of `source`.
    fn apply(self, n_bosons: u32, source: &SectorLabel, nb: u32) -> Vec<(u32, f64)> {
        match self {
            OtocOperator::Identity => vec![(nb, 1.0)],
            OtocOperator::Jx => jx_elements(n_bosons)
                .into_iter()
                .filter(|e| e.from == nb)
                .map(|e| (e.to, 0.5 * e.value_f64()))
                .collect(),
            OtocOperator::DPlus => d_plus_elements(n_bosons, nb, source.value)
                .into_iter()
                .map(|e| (e.to, e.value_f64()))
                .collect(),
            OtocOperator::DMinus => d_minus_elements(n_bosons, nb, source.value)
                .into_iter()
                .map(|e| (e.to, e.value_f64()))
                .collect(),
        }
    }
}

/// Matrix elements `<psi_a| O |psi_b>` between eigenstates, stored per
/// (target sector, source sector) pair allowed by the selection rule.
#[derive(Clone, Debug)]
pub struct EigenOperator {
    pub op: OtocOperator,
    /// Keyed by `(target index, source index)` into [`EigenSystems::sectors`];
    /// entry `(a, b)` is `<psi_a| O |psi_b>`.
    pub blocks: BTreeMap<(usize, usize), DMatrix<f64>>,
}

impl EigenOperator {
    pub fn block(&self, target: usize, source: usize) -> Option<&DMatrix<f64>> {
        self.blocks.get(&(target, source))
    }

    /// Target sectors reached from `source`.
    pub fn targets(&self, source: usize) -> Vec<usize> {
        self.blocks
            .keys()
            .filter(|(_, s)| *s == source)
            .map(|(t, _)| *t)
            .collect()
    }
}

/// Transforms the banded operator into the eigenbases of every loaded pair
/// of sectors it connects. Sectors whose image is not loaded are skipped.
pub fn eigen_operator(systems: &EigenSystems, op: OtocOperator) -> Result<EigenOperator> {
    let model = systems.instance.model;
    if !op.is_defined_for(model) {
        return Err(Error::InvalidOperator {
            op: op.name().to_string(),
            model,
        });
    }
    let n = systems.instance.n_bosons;
    let mut blocks = BTreeMap::new();
    for (si, source) in systems.sectors.iter().enumerate() {
        let target_label = op.target(&source.label);
        let Some(ti) = systems.sectors.iter().position(|s| s.label == target_label) else {
            continue;
        };
        let target = &systems.sectors[ti];
        let matrix = if op == OtocOperator::Identity {
            DMatrix::identity(target.energies.len(), source.energies.len())
        } else {
            let sv = source.vectors()?;
            let tv = target.vectors()?;
            let t_index: BTreeMap<u32, usize> =
                target.quanta.iter().enumerate().map(|(i, &q)| (q, i)).collect();
            // O applied to every source eigenvector, in the target quanta basis
            let mut image = DMatrix::<f64>::zeros(target.quanta.len(), sv.len());
            for (k, &nb) in source.quanta.iter().enumerate() {
                for (to, el) in op.apply(n, &source.label, nb) {
                    let Some(&row) = t_index.get(&to) else { continue };
                    for (col, v) in sv.iter().enumerate() {
                        image[(row, col)] += el * v[k];
                    }
                }
            }
            let tmat = DMatrix::from_fn(target.quanta.len(), tv.len(), |r, c| tv[c][r]);
            tmat.transpose() * image
        };
        blocks.insert((ti, si), matrix);
    }
    Ok(EigenOperator { op, blocks })
}

/// Averaging window: infinite time (resonant terms only) or finite `T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Averaging {
    Stationary,
    Finite(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MotocResult {
    /// Eigenstate index within its sector.
    pub j: usize,
    pub energy: f64,
    /// `(E_j - E_gs) / N`.
    pub scaled_energy: f64,
    /// Real part of the averaged correlator.
    pub value: f64,
    pub imag: f64,
    /// Modulus of the averaged correlator.
    pub modulus: f64,
    /// Averaging time; `None` for the infinite-time average.
    pub t: Option<f64>,
    /// Resonance tolerance relative to the spectral width.
    pub tol_deg: f64,
    /// Resonant triples whose resonance is not a pairing of `E_j` with
    /// `E_j1` or `E_j3`.
    pub accidental_resonances: usize,
}

/// `(exp(i x) - 1) / (i x)` as `(re, im)`, with the `x -> 0` limit 1.
pub fn kernel(x: f64) -> (f64, f64) {
    if x.abs() < 1e-8 {
        (1.0 - x * x / 6.0, x / 2.0)
    } else {
        (x.sin() / x, (1.0 - x.cos()) / x)
    }
}

struct Triples<'a> {
    s: usize,
    s1: usize,
    s2: usize,
    s3: usize,
    w1: &'a DMatrix<f64>,
    v21: &'a DMatrix<f64>,
    w23: &'a DMatrix<f64>,
    v3: &'a DMatrix<f64>,
}

/// Sector paths `s -V-> s3 -W-> s2` and `s -W-> s1 -V-> s2`.
fn sector_paths<'a>(v: &'a EigenOperator, w: &'a EigenOperator, s: usize) -> Vec<Triples<'a>> {
    let mut out = Vec::new();
    for s3 in v.targets(s) {
        for s1 in w.targets(s) {
            for s2 in w.targets(s3) {
                if let Some(v21) = v.block(s2, s1) {
                    out.push(Triples {
                        s,
                        s1,
                        s2,
                        s3,
                        w1: w.block(s1, s).expect("listed target"),
                        v21,
                        w23: w.block(s2, s3).expect("listed target"),
                        v3: v.block(s3, s).expect("listed target"),
                    });
                }
            }
        }
    }
    out
}

fn check_inputs(systems: &EigenSystems, sector: usize, j: usize, v: &EigenOperator, w: &EigenOperator) -> Result<()> {
    let s = systems
        .sectors
        .get(sector)
        .ok_or_else(|| Error::Incompatible(format!("sector index {sector} out of range")))?;
    if j >= s.energies.len() {
        return Err(Error::InvalidInput(format!(
            "state {j} outside sector {} of dimension {}",
            s.label,
            s.energies.len()
        )));
    }
    for op in [v, w] {
        if op.blocks.keys().any(|&(t, src)| t >= systems.sectors.len() || src >= systems.sectors.len()) {
            return Err(Error::Incompatible(format!(
                "operator {} was built for other eigensystems",
                op.op.name()
            )));
        }
    }
    Ok(())
}

/// Range of indices of `sorted` within `tol` of `target`.
fn window(sorted: &[f64], target: f64, tol: f64) -> std::ops::Range<usize> {
    let lo = sorted.partition_point(|&e| e < target - tol);
    let hi = sorted.partition_point(|&e| e <= target + tol);
    lo..hi
}

fn result(systems: &EigenSystems, sector: usize, j: usize, re: f64, im: f64, t: Option<f64>, tol_deg: f64, accidental: usize) -> MotocResult {
    let e = systems.sectors[sector].energies[j];
    MotocResult {
        j,
        energy: e,
        scaled_energy: (e - systems.ground_energy) / systems.instance.n_bosons as f64,
        value: re,
        imag: im,
        modulus: re.hypot(im),
        t,
        tol_deg,
        accidental_resonances: accidental,
    }
}

/// Infinite-time average: the sum of `N_{j1 j2 j3}` over triples with
/// `|w| <= tol_deg * spectral_width`. For each `(j1, j3)` the resonant
/// `j2` are found by binary search, so the cost per state is
/// `O(D^2 log D)` rather than `O(D^3)`.
pub fn motoc_stationary(
    systems: &EigenSystems,
    sector: usize,
    j: usize,
    v: &EigenOperator,
    w: &EigenOperator,
    tol_deg: f64,
) -> Result<MotocResult> {
    if !(tol_deg > 0.0) {
        return Err(Error::InvalidInput(format!("tol_deg must be positive, got {tol_deg}")));
    }
    check_inputs(systems, sector, j, v, w)?;
    let tol = tol_deg * systems.spectral_width;
    let mut sum = 0.0;
    let mut accidental = 0;
    for p in sector_paths(v, w, sector) {
        let e = &systems.sectors[p.s].energies;
        let e1 = &systems.sectors[p.s1].energies;
        let e2 = &systems.sectors[p.s2].energies;
        let e3 = &systems.sectors[p.s3].energies;
        let ej = e[j];
        for j1 in 0..e1.len() {
            let a = p.w1[(j1, j)];
            if a == 0.0 {
                continue;
            }
            for j3 in 0..e3.len() {
                let d = p.v3[(j3, j)];
                if d == 0.0 {
                    continue;
                }
                let target = e1[j1] + e3[j3] - ej;
                for j2 in window(e2, target, tol) {
                    sum += a * p.v21[(j2, j1)] * p.w23[(j2, j3)] * d;
                    let paired = (ej - e1[j1]).abs() <= tol || (ej - e3[j3]).abs() <= tol;
                    if !paired {
                        accidental += 1;
                    }
                }
            }
        }
    }
    if accidental > 0 {
        warn!(
            "state {j} of sector {}: {accidental} accidental resonant triples",
            systems.sectors[sector].label
        );
    }
    Ok(result(systems, sector, j, sum, 0.0, None, tol_deg, accidental))
}

/// Average of `F` over `[0, T]`, summed in closed form per triple.
/// Triples with `|w| <= tol_deg * width` take the kernel value 1.
pub fn motoc_finite_t(
    systems: &EigenSystems,
    sector: usize,
    j: usize,
    v: &EigenOperator,
    w: &EigenOperator,
    t: f64,
    tol_deg: f64,
) -> Result<MotocResult> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("averaging time must be positive, got {t}")));
    }
    if !(tol_deg > 0.0) {
        return Err(Error::InvalidInput(format!("tol_deg must be positive, got {tol_deg}")));
    }
    check_inputs(systems, sector, j, v, w)?;
    let tol = tol_deg * systems.spectral_width;
    let (mut re, mut im) = (0.0, 0.0);
    for p in sector_paths(v, w, sector) {
        let e = &systems.sectors[p.s].energies;
        let e1 = &systems.sectors[p.s1].energies;
        let e2 = &systems.sectors[p.s2].energies;
        let e3 = &systems.sectors[p.s3].energies;
        let ej = e[j];
        for j1 in 0..e1.len() {
            let a = p.w1[(j1, j)];
            if a == 0.0 {
                continue;
            }
            for j3 in 0..e3.len() {
                let d = p.v3[(j3, j)];
                if d == 0.0 {
                    continue;
                }
                let ad = a * d;
                let base = ej - e1[j1] - e3[j3];
                for j2 in 0..e2.len() {
                    let n = ad * p.v21[(j2, j1)] * p.w23[(j2, j3)];
                    let omega = base + e2[j2];
                    if omega.abs() <= tol {
                        re += n;
                    } else {
                        let (kr, ki) = kernel(omega * t);
                        re += n * kr;
                        im += n * ki;
                    }
                }
            }
        }
    }
    Ok(result(systems, sector, j, re, im, Some(t), tol_deg, 0))
}

/// Two-point term, four-point term and squared commutator at time `t`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SquaredCommutator {
    pub a: f64,
    pub f_re: f64,
    pub f_im: f64,
    /// `C = A - 2 Re F`.
    pub c: f64,
}

type SectorState = BTreeMap<usize, Vec<(f64, f64)>>;

fn apply_op(systems: &EigenSystems, op: &EigenOperator, state: &SectorState, t: Option<f64>) -> SectorState {
    let mut out: SectorState = BTreeMap::new();
    for (&src, amps) in state {
        for tgt in op.targets(src) {
            let m = op.block(tgt, src).expect("listed target");
            let es = &systems.sectors[src].energies;
            let et = &systems.sectors[tgt].energies;
            let entry = out.entry(tgt).or_insert_with(|| vec![(0.0, 0.0); et.len()]);
            for (a, slot) in entry.iter_mut().enumerate() {
                let (mut re, mut im) = (0.0, 0.0);
                for (b, &(xr, xi)) in amps.iter().enumerate() {
                    let el = m[(a, b)];
                    if el == 0.0 {
                        continue;
                    }
                    // O(t)_{ab} = exp(i (E_a - E_b) t) O_{ab}
                    let (pr, pi) = match t {
                        Some(t) => {
                            let ph = (et[a] - es[b]) * t;
                            (ph.cos(), ph.sin())
                        }
                        None => (1.0, 0.0),
                    };
                    let (cr, ci) = (el * pr, el * pi);
                    re += cr * xr - ci * xi;
                    im += cr * xi + ci * xr;
                }
                slot.0 += re;
                slot.1 += im;
            }
        }
    }
    out
}

fn inner(a: &SectorState, b: &SectorState) -> (f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    for (s, va) in a {
        if let Some(vb) = b.get(s) {
            for (&(ar, ai), &(br, bi)) in va.iter().zip(vb) {
                // conj(a) * b
                re += ar * br + ai * bi;
                im += ar * bi - ai * br;
            }
        }
    }
    (re, im)
}

/// Microcanonical squared commutator `C(t) = <j|[W(t), V]^dag [W(t), V]|j>`
/// assembled as `A - 2 Re F` from the eigenbasis vectors `W(t) V|j>` and
/// `V W(t)|j>`.
pub fn squared_commutator(
    systems: &EigenSystems,
    sector: usize,
    j: usize,
    v: &EigenOperator,
    w: &EigenOperator,
    t: f64,
) -> Result<SquaredCommutator> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be nonnegative, got {t}")));
    }
    check_inputs(systems, sector, j, v, w)?;
    let mut start: SectorState = BTreeMap::new();
    let mut amps = vec![(0.0, 0.0); systems.sectors[sector].energies.len()];
    amps[j] = (1.0, 0.0);
    start.insert(sector, amps);
    let wv = apply_op(systems, w, &apply_op(systems, v, &start, None), Some(t));
    let vw = apply_op(systems, v, &apply_op(systems, w, &start, Some(t)), None);
    let a = inner(&wv, &wv).0 + inner(&vw, &vw).0;
    let (f_re, f_im) = inner(&vw, &wv);
    Ok(SquaredCommutator {
        a,
        f_re,
        f_im,
        c: a - 2.0 * f_re,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MotocScan {
    pub sector: SectorLabel,
    pub results: Vec<MotocResult>,
    /// `(j, message)` for states whose evaluation failed.
    pub failures: Vec<(usize, String)>,
}

/// Correlator for every eigenstate of `sector`, in energy order.
pub fn motoc_scan(
    systems: &EigenSystems,
    sector: &SectorLabel,
    v: &EigenOperator,
    w: &EigenOperator,
    averaging: Averaging,
    tol_deg: f64,
) -> Result<MotocScan> {
    let s = systems.sector_index(sector)?;
    let dim = systems.sectors[s].energies.len();
    let outcomes: Vec<(usize, Result<MotocResult>)> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let r = match averaging {
                Averaging::Stationary => motoc_stationary(systems, s, j, v, w, tol_deg),
                Averaging::Finite(t) => motoc_finite_t(systems, s, j, v, w, t, tol_deg),
            };
            (j, r)
        })
        .collect();
    let mut results = Vec::with_capacity(dim);
    let mut failures = Vec::new();
    for (j, r) in outcomes {
        match r {
            Ok(m) => results.push(m),
            Err(e) => failures.push((j, e.to_string())),
        }
    }
    let accidental: usize = results.iter().map(|r| r.accidental_resonances).sum();
    if accidental > 0 {
        info!("scan over {sector}: {accidental} accidental resonant triples in total");
    }
    Ok(MotocScan {
        sector: *sector,
        results,
        failures,
    })
}

/// Sectors and operators for the two standard correlators: `V = W = J_x`
/// over even LMG states, and `V = D_-`, `W = D_+` over `l = 0` 2D vibron
/// states.
pub fn standard_setup(instance: &ModelInstance) -> Result<(Vec<SectorLabel>, SectorLabel, OtocOperator, OtocOperator)> {
    match instance.model {
        Model::Lmg => Ok((
            vec![SectorLabel::even(), SectorLabel::odd()],
            SectorLabel::even(),
            OtocOperator::Jx,
            OtocOperator::Jx,
        )),
        Model::Vm2d => Ok((
            vec![SectorLabel::l(-1), SectorLabel::l(0), SectorLabel::l(1)],
            SectorLabel::l(0),
            OtocOperator::DMinus,
            OtocOperator::DPlus,
        )),
        model => Err(Error::Incompatible(format!("no correlator operators are defined for {model}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lmg(n: u32, xi: f64) -> (EigenSystems, EigenOperator) {
        let inst = ModelInstance::new(Model::Lmg, n, xi).unwrap();
        let sys = diagonalize_sectors(&inst, &[SectorLabel::even(), SectorLabel::odd()]).unwrap();
        let jx = eigen_operator(&sys, OtocOperator::Jx).unwrap();
        (sys, jx)
    }

    #[test]
    fn ground_state_closed_form() {
        let (sys, jx) = lmg(2, 0.0);
        let r = motoc_stationary(&sys, 0, 0, &jx, &jx, 1e-10).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12);
        assert_eq!(r.imag, 0.0);
    }

    #[test]
    fn jx_eigen_elements_at_zero_coupling() {
        let (_, jx) = lmg(2, 0.0);
        let r = 2f64.sqrt() / 2.0;
        let odd_even = jx.block(1, 0).unwrap();
        assert!((odd_even[(0, 0)].abs() - r).abs() < 1e-14);
        assert!((odd_even[(0, 1)].abs() - r).abs() < 1e-14);
        assert!(jx.block(0, 0).is_none() && jx.block(1, 1).is_none());
    }

    #[test]
    fn d_plus_eigen_element_at_zero_coupling() {
        let inst = ModelInstance::new(Model::Vm2d, 2, 0.0).unwrap();
        let sys = diagonalize_sectors(&inst, &[SectorLabel::l(1), SectorLabel::l(2)]).unwrap();
        let dp = eigen_operator(&sys, OtocOperator::DPlus).unwrap();
        let m = dp.block(1, 0).unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert!((m[(0, 0)].abs() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn identity_normalization() {
        let (sys, _) = lmg(12, 0.6);
        let id = eigen_operator(&sys, OtocOperator::Identity).unwrap();
        for j in 0..sys.sectors[0].energies.len() {
            let s = motoc_stationary(&sys, 0, j, &id, &id, 1e-10).unwrap();
            assert!((s.value - 1.0).abs() < 1e-14);
            for t in [0.5, 10.0, 1e3] {
                let f = motoc_finite_t(&sys, 0, j, &id, &id, t, 1e-10).unwrap();
                assert!((f.value - 1.0).abs() < 1e-14);
                let c = squared_commutator(&sys, 0, j, &id, &id, t).unwrap();
                assert!(c.c.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commutator_vanishes_at_time_zero() {
        let (sys, jx) = lmg(10, 0.4);
        for j in 0..sys.sectors[0].energies.len() {
            let c = squared_commutator(&sys, 0, j, &jx, &jx, 0.0).unwrap();
            assert!(c.c.abs() < 1e-10, "{}", c.c);
        }
    }

    #[test]
    fn kernel_limits() {
        assert_eq!(kernel(0.0), (1.0, 0.0));
        let (re, im) = kernel(1e3);
        assert!(re.hypot(im) <= 2.0 / 1e3);
    }

    #[test]
    fn rejects_bad_arguments() {
        let (sys, jx) = lmg(4, 0.5);
        assert!(motoc_stationary(&sys, 0, 0, &jx, &jx, 0.0).is_err());
        assert!(motoc_finite_t(&sys, 0, 0, &jx, &jx, -1.0, 1e-10).is_err());
        assert!(motoc_stationary(&sys, 0, 99, &jx, &jx, 1e-10).is_err());
        assert!(eigen_operator(&sys, OtocOperator::DPlus).is_err());
    }
}
