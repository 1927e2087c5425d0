//! Brute-force Fock-space representation of the boson operators and
//! Hamiltonians, for small `N`. This is the reference every closed-form
//! block element and OTOC sum is checked against.
//!
//! Mode 0 is always the scalar boson (`s` or `sigma`). The second boson uses
//! `t` (LMG), circular components `tau_+, tau_-` (2D vibron) and real
//! Cartesian components for the 3D vibron (`p_x, p_y, p_z`) and the IBM
//! (five real `d` components), so every operator below is a real matrix.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::models::{ControlParameter, Model, SectorKind, SectorLabel, MAX_BOSONS};

/// Largest basis the dense oracle will diagonalize.
pub const DENSE_LIMIT: usize = 5000;

/// Ordered occupation-number basis of all `N`-boson states.
#[derive(Clone, Debug)]
pub struct FockBasis {
    pub model: Model,
    pub n_bosons: u32,
    /// Occupation tuples `(n_scalar, n_1, ..., n_dof)`, in descending
    /// lexicographic order.
    pub states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn compositions(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl FockBasis {
    fn with_total(model: Model, n_bosons: u32) -> Self {
        let modes = model.dof() as usize + 1;
        let mut states = Vec::new();
        compositions(n_bosons, modes, &mut Vec::with_capacity(modes), &mut states);
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Self {
            model,
            n_bosons,
            states,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn modes(&self) -> usize {
        self.model.dof() as usize + 1
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Number of quanta of the second boson in state `i`.
    pub fn second_quanta(&self, i: usize) -> u32 {
        self.states[i][1..].iter().sum()
    }
}

pub fn build_basis(model: Model, n_bosons: u32) -> Result<FockBasis> {
    if !(1..=MAX_BOSONS).contains(&n_bosons) {
        return Err(Error::InvalidInput(format!(
            "boson number must lie in [1, {MAX_BOSONS}], got {n_bosons}"
        )));
    }
    Ok(FockBasis::with_total(model, n_bosons))
}

/// Parses the model identifier and builds the basis.
pub fn build_basis_by_id(model: &str, n_bosons: u32) -> Result<FockBasis> {
    build_basis(model.parse()?, n_bosons)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorId {
    Identity,
    /// `n_t`, `n_tau`, `n_p` or `n_d`.
    SecondNumber,
    /// `J_x = (t^dag s + s^dag t) / 2` (LMG).
    Jx,
    /// `J_y^2 = -(t^dag s - s^dag t)^2 / 4`, the real square of the
    /// anti-Hermitian `J_y` (LMG).
    JySquared,
    /// `J_z = (n_t - n_s) / 2` (LMG).
    Jz,
    /// `exp(i pi n_t)` (LMG).
    Parity,
    /// `D_+ = sqrt(2)(tau_+^dag sigma - sigma^dag tau_-)` (2D vibron).
    DPlus,
    /// `D_- = sqrt(2)(-tau_-^dag sigma + sigma^dag tau_+)` (2D vibron).
    DMinus,
    /// `l = n_+ - n_-` (2D vibron).
    AngularMomentum,
    /// `W^2 = (D_+ D_- + D_- D_+) / 2 + l^2` (2D vibron).
    WSquared,
    /// `D^2 = sum_i (p_i^dag s + s^dag p_i)^2` (3D vibron).
    DipoleSquared,
    /// Casimir of the rotation algebra `so(n)` of the second boson:
    /// `l^2`, `J^2` or the `so(5)` Casimir `tau(tau + 3)`.
    InnerCasimir,
    /// Casimir of `so(n + 1)`: `4 J_x^2`, `W^2`, `D^2 + J^2` or the `so(6)`
    /// Casimir `sigma(sigma + 4)`.
    OuterCasimir,
    /// The pair product `(b^dag.b^dag - s^dag s^dag)(b~.b~ - s s)`.
    PairProduct,
    /// The model's pairing operator `P_t`, `P_tau`, `P_p` or `P_d`.
    Pairing,
}

impl OperatorId {
    pub fn name(self) -> &'static str {
        match self {
            OperatorId::Identity => "identity",
            OperatorId::SecondNumber => "n_second",
            OperatorId::Jx => "J_x",
            OperatorId::JySquared => "J_y^2",
            OperatorId::Jz => "J_z",
            OperatorId::Parity => "parity",
            OperatorId::DPlus => "D_+",
            OperatorId::DMinus => "D_-",
            OperatorId::AngularMomentum => "l",
            OperatorId::WSquared => "W^2",
            OperatorId::DipoleSquared => "D^2",
            OperatorId::InnerCasimir => "C_so(n)",
            OperatorId::OuterCasimir => "C_so(n+1)",
            OperatorId::PairProduct => "pair_product",
            OperatorId::Pairing => "pairing",
        }
    }

    pub fn is_defined_for(self, model: Model) -> bool {
        use OperatorId::*;
        match self {
            Identity | SecondNumber | OuterCasimir | PairProduct | Pairing => true,
            Jx | JySquared | Jz | Parity => model == Model::Lmg,
            DPlus | DMinus | AngularMomentum | WSquared => model == Model::Vm2d,
            DipoleSquared => model == Model::Vm3d,
            InnerCasimir => model != Model::Lmg,
        }
    }
}

/// Dense real matrix of an operator on a [`FockBasis`].
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub op: Option<OperatorId>,
    pub matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |A - A^T|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.matrix.amax().max(f64::MIN_POSITIVE);
        (&self.matrix - self.matrix.transpose()).amax() / scale
    }
}

/// `b_i^dag b_j` on the basis.
fn bilinear(basis: &FockBasis, i: usize, j: usize) -> DMatrix<f64> {
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    for (col, state) in basis.states.iter().enumerate() {
        if state[j] == 0 {
            continue;
        }
        let mut target = state.clone();
        let mut amp = (target[j] as f64).sqrt();
        target[j] -= 1;
        target[i] += 1;
        amp *= (target[i] as f64).sqrt();
        let row = basis.index_of(&target).expect("bilinear preserves N");
        m[(row, col)] += amp;
    }
    m
}

/// Terms `(coef, a, b)` of the pair annihilator `b~.b~ - s s` as `sum coef b_a b_b`.
fn pair_terms(model: Model) -> Vec<(f64, usize, usize)> {
    let mut terms = vec![(-1.0, 0, 0)];
    match model {
        // tau_x^2 + tau_y^2 = -2 tau_+ tau_- for tau_pm = -+(tau_x +- i tau_y)/sqrt(2)
        Model::Vm2d => terms.push((-2.0, 1, 2)),
        _ => {
            for i in 1..=model.dof() as usize {
                terms.push((1.0, i, i));
            }
        }
    }
    terms
}

/// Matrix of the pair annihilator from `basis` (N bosons) to `lower` (N - 2).
fn pair_annihilator(basis: &FockBasis, lower: &FockBasis) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(lower.dim(), basis.dim());
    for (col, state) in basis.states.iter().enumerate() {
        for &(coef, a, b) in &pair_terms(basis.model) {
            let mut target = state.clone();
            if target[b] == 0 {
                continue;
            }
            let mut amp = (target[b] as f64).sqrt();
            target[b] -= 1;
            if target[a] == 0 {
                continue;
            }
            amp *= (target[a] as f64).sqrt();
            target[a] -= 1;
            let row = lower.index_of(&target).expect("pair removal gives N - 2 bosons");
            m[(row, col)] += coef * amp;
        }
    }
    m
}

fn pair_product(basis: &FockBasis) -> DMatrix<f64> {
    if basis.n_bosons < 2 {
        return DMatrix::zeros(basis.dim(), basis.dim());
    }
    let lower = FockBasis::with_total(basis.model, basis.n_bosons - 2);
    let a = pair_annihilator(basis, &lower);
    a.transpose() * a
}

fn diagonal(basis: &FockBasis, f: impl Fn(&[u32]) -> f64) -> DMatrix<f64> {
    let values: Vec<f64> = basis.states.iter().map(|s| f(s)).collect();
    DMatrix::from_diagonal(&DVector::from_vec(values))
}

fn cartesian_k(basis: &FockBasis, i: usize) -> DMatrix<f64> {
    bilinear(basis, i, 0) + bilinear(basis, 0, i)
}

/// `-sum_{i<j} X_ij^2` with `X_ij = b_i^dag b_j - b_j^dag b_i` over modes 1..=dof.
fn cartesian_rotation_casimir(basis: &FockBasis) -> DMatrix<f64> {
    let n = basis.dim();
    let dof = basis.model.dof() as usize;
    let mut c = DMatrix::zeros(n, n);
    for i in 1..=dof {
        for j in i + 1..=dof {
            let x = bilinear(basis, i, j) - bilinear(basis, j, i);
            c -= &x * &x;
        }
    }
    c
}

fn d_plus(basis: &FockBasis) -> DMatrix<f64> {
    (bilinear(basis, 1, 0) - bilinear(basis, 0, 2)) * 2f64.sqrt()
}

fn d_minus(basis: &FockBasis) -> DMatrix<f64> {
    (bilinear(basis, 0, 1) - bilinear(basis, 2, 0)) * 2f64.sqrt()
}

pub fn operator_matrix(basis: &FockBasis, op: OperatorId) -> Result<DenseOperator> {
    let model = basis.model;
    if !op.is_defined_for(model) {
        return Err(Error::InvalidOperator {
            op: op.name().to_string(),
            model,
        });
    }
    let n = basis.dim();
    let nb = basis.n_bosons as f64;
    let d = model.dof() as f64;
    let matrix = match op {
        OperatorId::Identity => DMatrix::identity(n, n),
        OperatorId::SecondNumber => diagonal(basis, |s| s[1..].iter().sum::<u32>() as f64),
        OperatorId::Jx => cartesian_k(basis, 1) * 0.5,
        OperatorId::JySquared => {
            let a = bilinear(basis, 1, 0) - bilinear(basis, 0, 1);
            -(&a * &a) * 0.25
        }
        OperatorId::Jz => diagonal(basis, |s| (s[1] as f64 - s[0] as f64) / 2.0),
        OperatorId::Parity => diagonal(basis, |s| if s[1] % 2 == 0 { 1.0 } else { -1.0 }),
        OperatorId::DPlus => d_plus(basis),
        OperatorId::DMinus => d_minus(basis),
        OperatorId::AngularMomentum => diagonal(basis, |s| s[1] as f64 - s[2] as f64),
        OperatorId::WSquared => w_squared(basis),
        OperatorId::DipoleSquared => dipole_squared(basis),
        OperatorId::InnerCasimir => match model {
            Model::Vm2d => diagonal(basis, |s| (s[1] as f64 - s[2] as f64).powi(2)),
            _ => cartesian_rotation_casimir(basis),
        },
        OperatorId::OuterCasimir => outer_casimir(basis),
        OperatorId::PairProduct => pair_product(basis),
        OperatorId::Pairing => {
            let c = model.pairing_factor() as f64;
            let top = DMatrix::identity(n, n) * (nb * (nb + d - 1.0));
            let inner = match model {
                Model::Lmg => {
                    let k = cartesian_k(basis, 1);
                    &k * &k
                }
                Model::Vm2d => w_squared(basis),
                Model::Vm3d => dipole_squared(basis) + cartesian_rotation_casimir(basis),
                Model::Ibm => outer_casimir(basis),
            };
            (top - inner) * c
        }
    };
    Ok(DenseOperator {
        op: Some(op),
        matrix,
    })
}

fn w_squared(basis: &FockBasis) -> DMatrix<f64> {
    let dp = d_plus(basis);
    let dm = d_minus(basis);
    let l = diagonal(basis, |s| (s[1] as f64 - s[2] as f64).powi(2));
    (&dp * &dm + &dm * &dp) * 0.5 + l
}

fn dipole_squared(basis: &FockBasis) -> DMatrix<f64> {
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 1..=basis.model.dof() as usize {
        let k = cartesian_k(basis, i);
        m += &k * &k;
    }
    m
}

fn outer_casimir(basis: &FockBasis) -> DMatrix<f64> {
    match basis.model {
        Model::Vm2d => w_squared(basis),
        _ => dipole_squared(basis) + cartesian_rotation_casimir(basis),
    }
}

/// `H = (1 - xi) n_second + (xi / N) P` on the full space.
pub fn full_hamiltonian(basis: &FockBasis, xi: &ControlParameter) -> Result<DenseOperator> {
    let x = xi.value();
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidInput(format!("xi = {x} outside [0, 1]")));
    }
    let number = operator_matrix(basis, OperatorId::SecondNumber)?.matrix;
    let pairing = operator_matrix(basis, OperatorId::Pairing)?.matrix;
    let matrix = number * (1.0 - x) + pairing * (x / basis.n_bosons as f64);
    Ok(DenseOperator { op: None, matrix })
}

fn guard(basis: &FockBasis) -> Result<()> {
    if basis.dim() > DENSE_LIMIT {
        return Err(Error::DimensionGuard {
            dim: basis.dim(),
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

fn sorted_eigen(matrix: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Full-space eigenvalues, ascending.
pub fn oracle_spectrum(basis: &FockBasis, xi: &ControlParameter) -> Result<Vec<f64>> {
    guard(basis)?;
    let h = full_hamiltonian(basis, xi)?;
    Ok(sorted_eigen(h.matrix).0)
}

/// The conserved operator whose eigenvalues label the model's sectors.
pub fn conserved_operator(model: Model) -> OperatorId {
    match model {
        Model::Lmg => OperatorId::Parity,
        Model::Vm2d => OperatorId::AngularMomentum,
        Model::Vm3d | Model::Ibm => OperatorId::InnerCasimir,
    }
}

/// Sector label for a quantized expectation of the conserved operator, or
/// the distance to the nearest quantized value when none is close.
fn quantize(model: Model, n_bosons: u32, value: f64) -> (Option<SectorLabel>, f64) {
    let d = model.dof() as i64;
    let candidates: Vec<(SectorLabel, f64)> = match model.sector_kind() {
        SectorKind::Parity => vec![(SectorLabel::even(), 1.0), (SectorLabel::odd(), -1.0)],
        SectorKind::VibrationalAngularMomentum => (-(n_bosons as i32)..=n_bosons as i32)
            .map(|l| (SectorLabel::l(l), l as f64))
            .collect(),
        _ => (0..=n_bosons as i64)
            .map(|v| {
                (
                    SectorLabel::for_model(model, v as i32),
                    (v * (v + d - 2)) as f64,
                )
            })
            .collect(),
    };
    let (label, q) = candidates
        .into_iter()
        .min_by(|a, b| (a.1 - value).abs().total_cmp(&(b.1 - value).abs()))
        .expect("at least one candidate");
    let dist = (q - value).abs();
    if dist <= 1e-6 {
        (Some(label), dist)
    } else {
        (None, dist)
    }
}

/// Shifted inverse subspace iteration on one cluster of eigenvectors. The
/// dense symmetric solver returns eigenvalues to full precision but vectors
/// with residuals up to about `1e-8`; three sweeps restore them.
fn refine_cluster(h: &DMatrix<f64>, energies: &[f64], mut block: DMatrix<f64>, width: f64) -> DMatrix<f64> {
    let dim = h.nrows();
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    let shift = mean + 1e-10 * width;
    let lu = (h - DMatrix::<f64>::identity(dim, dim) * shift).lu();
    for _ in 0..3 {
        let Some(next) = lu.solve(&block) else {
            return block;
        };
        if !next.iter().all(|x| x.is_finite()) {
            return block;
        }
        block = next.qr().q();
    }
    block
}

/// Full-space eigensystem with every eigenvector assigned to a sector.
#[derive(Clone, Debug)]
pub struct LabeledEigensystem {
    pub energies: Vec<f64>,
    /// Columns are eigenvectors in the order of `energies`.
    pub vectors: DMatrix<f64>,
    /// Expectation of the conserved operator in each eigenvector.
    pub expectations: Vec<f64>,
    pub labels: Vec<SectorLabel>,
}

/// Diagonalizes `H` and resolves every degenerate cluster (tolerance
/// `1e-9` times the spectral width) by diagonalizing the conserved operator
/// inside it, so each eigenvector carries a sharp sector label.
pub fn conserved_expectations(basis: &FockBasis, xi: &ControlParameter) -> Result<LabeledEigensystem> {
    guard(basis)?;
    let h = full_hamiltonian(basis, xi)?;
    let c = operator_matrix(basis, conserved_operator(basis.model))?.matrix;
    let (mut energies, mut vectors) = sorted_eigen(h.matrix.clone());
    let n = energies.len();
    let width = (energies[n - 1] - energies[0]).max(1.0);
    let tol = 1e-9 * width;

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && energies[end] - energies[end - 1] <= tol {
            end += 1;
        }
        let refined = refine_cluster(&h.matrix, &energies[start..end], vectors.columns(start, end - start).into_owned(), width);
        vectors.columns_mut(start, end - start).copy_from(&refined);
        if end - start == 1 {
            let v = vectors.column(start);
            energies[start] = v.dot(&(&h.matrix * v));
        } else {
            let block = vectors.columns(start, end - start).into_owned();
            let restricted = block.transpose() * &c * &block;
            let (_, rot) = sorted_eigen(restricted);
            let rotated = block * rot;
            // the rotation mixes levels up to `tol` apart: reassign energies
            // as Rayleigh quotients and keep the cluster ascending
            let mut order: Vec<(f64, usize)> = (0..end - start)
                .map(|i| {
                    let v = rotated.column(i);
                    (v.dot(&(&h.matrix * v)), i)
                })
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (slot, &(e, i)) in order.iter().enumerate() {
                energies[start + slot] = e;
                vectors.column_mut(start + slot).copy_from(&rotated.column(i));
            }
        }
        start = end;
    }

    let mut expectations = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for k in 0..n {
        let v = vectors.column(k);
        let value = v.dot(&(&c * v));
        let (label, distance) = quantize(basis.model, basis.n_bosons, value);
        let label = label.ok_or(Error::LabelResolution { value, distance })?;
        expectations.push(value);
        labels.push(label);
    }
    Ok(LabeledEigensystem {
        energies,
        vectors,
        expectations,
        labels,
    })
}

/// Fock index of the block state `|N; n_b, v>` for models whose blocks are
/// spanned by single occupation tuples (LMG and 2D vibron).
pub fn block_state_index(basis: &FockBasis, nb: u32, label: &SectorLabel) -> Option<usize> {
    let n = basis.n_bosons;
    if nb > n {
        return None;
    }
    match basis.model {
        Model::Lmg => basis.index_of(&[n - nb, nb]),
        Model::Vm2d => {
            let l = label.value;
            let plus = (nb as i32 + l) / 2;
            let minus = (nb as i32 - l) / 2;
            if plus < 0 || minus < 0 {
                return None;
            }
            basis.index_of(&[n - nb, plus as u32, minus as u32])
        }
        _ => None,
    }
}
