//! Inverse iteration on a shifted tridiagonal matrix, with Gram-Schmidt
//! reorthogonalization inside eigenvalue clusters.

use log::debug;

use crate::error::{Error, Result};
use crate::real::Real;

use super::{prepare, PrecisionConfig, Spectrum};

const MAX_SOLVES: usize = 4;
const MAX_ATTEMPTS: usize = 3;

/// LU factors of `T - sigma I` with partial pivoting: `U` has two
/// superdiagonals, `L` is unit lower bidiagonal up to row swaps.
struct TridiagonalLu<T> {
    u0: Vec<T>,
    u1: Vec<T>,
    u2: Vec<T>,
    l: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> TridiagonalLu<T> {
    fn factor(diag: &[T], offdiag: &[T], sigma: &T, tiny: &T) -> Self {
        let n = diag.len();
        let zero = T::zero(tiny.mantissa_bits());
        let mut a: Vec<T> = diag.iter().map(|d| d.clone() - sigma.clone()).collect();
        let mut b: Vec<T> = offdiag.to_vec();
        let c: Vec<T> = offdiag.to_vec();
        let mut u0 = vec![zero.clone(); n];
        let mut u1 = vec![zero.clone(); n];
        let mut u2 = vec![zero.clone(); n];
        let mut l = vec![zero.clone(); n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            if a[k].abs() >= c[k].abs() {
                if a[k].abs() <= *tiny {
                    a[k] = tiny.clone();
                }
                let mult = c[k].clone() / a[k].clone();
                u0[k] = a[k].clone();
                u1[k] = b[k].clone();
                a[k + 1] = a[k + 1].clone() - mult.clone() * b[k].clone();
                l[k] = mult;
            } else {
                let mult = a[k].clone() / c[k].clone();
                u0[k] = c[k].clone();
                u1[k] = a[k + 1].clone();
                let next_b = if k + 1 < n - 1 { b[k + 1].clone() } else { zero.clone() };
                u2[k] = next_b.clone();
                a[k + 1] = b[k].clone() - mult.clone() * a[k + 1].clone();
                if k + 1 < n - 1 {
                    b[k + 1] = -(mult.clone() * next_b);
                }
                l[k] = mult;
                swapped[k] = true;
            }
        }
        if a[n - 1].abs() <= *tiny {
            a[n - 1] = tiny.clone();
        }
        u0[n - 1] = a[n - 1].clone();
        Self { u0, u1, u2, l, swapped }
    }

    fn solve(&self, rhs: &mut [T]) {
        let n = rhs.len();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                rhs.swap(k, k + 1);
            }
            let t = self.l[k].clone() * rhs[k].clone();
            rhs[k + 1] = rhs[k + 1].clone() - t;
        }
        for k in (0..n).rev() {
            let mut acc = rhs[k].clone();
            if k + 1 < n {
                acc = acc - self.u1[k].clone() * rhs[k + 1].clone();
            }
            if k + 2 < n {
                acc = acc - self.u2[k].clone() * rhs[k + 2].clone();
            }
            rhs[k] = acc / self.u0[k].clone();
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T], zero: &T) -> T {
    a.iter()
        .zip(b)
        .fold(zero.clone(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn normalize<T: Real>(v: &mut [T], zero: &T) -> bool {
    let norm = dot(v, v, zero).sqrt();
    if norm.is_zero() || !norm.is_finite() {
        return false;
    }
    for x in v.iter_mut() {
        *x = x.clone() / norm.clone();
    }
    true
}

fn residual_inf<T: Real>(diag: &[T], offdiag: &[T], lambda: &T, v: &[T], zero: &T) -> T {
    let n = diag.len();
    let mut worst = zero.clone();
    for i in 0..n {
        let mut r = (diag[i].clone() - lambda.clone()) * v[i].clone();
        if i > 0 {
            r = r + offdiag[i - 1].clone() * v[i - 1].clone();
        }
        if i + 1 < n {
            r = r + offdiag[i].clone() * v[i + 1].clone();
        }
        worst = worst.max_of(r.abs());
    }
    worst
}

/// Flips `v` so that its first component of at least half the largest
/// magnitude is positive.
fn fix_sign<T: Real>(v: &mut [T], zero: &T) {
    let max = v.iter().fold(zero.clone(), |m, x| m.max_of(x.abs()));
    let half = max / T::from_i64(2, zero.mantissa_bits());
    if let Some(pivot) = v.iter().find(|x| x.abs() > half) {
        if *pivot < *zero {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
    }
}

fn start_vector<T: Real>(n: usize, attempt: usize, bits: usize) -> Vec<T> {
    let mut v: Vec<T> = (0..n)
        .map(|i| {
            let entry = match attempt {
                0 => 1,
                1 => if i % 2 == 0 { 1 } else { -1 },
                _ => 1 + ((7 * i + 3 * attempt) % 11) as i64,
            };
            T::from_i64(entry, bits)
        })
        .collect();
    normalize(&mut v, &T::zero(bits));
    v
}

struct Tolerances<T> {
    cluster: T,
    residual: T,
    tiny: T,
    shift_step: T,
    orthogonality: f64,
}

fn tolerances<T: Real>(precision: &PrecisionConfig, scale: &T) -> Tolerances<T> {
    let bits = precision.mantissa_bits;
    let eig_tol: T = precision.eig_tol();
    Tolerances {
        cluster: T::from_i64(1000, bits) * eig_tol.clone() * scale.clone(),
        residual: T::from_i64(10, bits) * eig_tol.clone() * scale.clone(),
        tiny: precision.unit_roundoff::<T>() * precision.unit_roundoff::<T>() * scale.clone(),
        shift_step: eig_tol * scale.clone(),
        orthogonality: 1e-8,
    }
}

/// Computes one eigenvector for `lambda`, orthogonal to the previously
/// accepted vectors of the same cluster.
fn one_vector<T: Real>(
    diag: &[T],
    offdiag: &[T],
    lambda: &T,
    index: usize,
    cluster_prev: &[Vec<T>],
    tol: &Tolerances<T>,
    bits: usize,
) -> Result<Vec<T>> {
    let n = diag.len();
    let zero = T::zero(bits);
    let mut worst_overlap = 0.0f64;
    for attempt in 0..MAX_ATTEMPTS {
        // later attempts nudge the shift off the computed eigenvalue
        let sigma = lambda.clone() + tol.shift_step.clone() * T::from_i64(attempt as i64, bits);
        let lu = TridiagonalLu::factor(diag, offdiag, &sigma, &tol.tiny);
        let mut v = start_vector::<T>(n, attempt, bits);
        let mut ok = false;
        for _ in 0..MAX_SOLVES {
            lu.solve(&mut v);
            for prev in cluster_prev {
                let p = dot(&v, prev, &zero);
                for (x, y) in v.iter_mut().zip(prev) {
                    *x = x.clone() - p.clone() * y.clone();
                }
            }
            if !normalize(&mut v, &zero) {
                break;
            }
            if residual_inf(diag, offdiag, lambda, &v, &zero) <= tol.residual {
                ok = true;
                break;
            }
        }
        if !ok {
            debug!("inverse iteration attempt {attempt} for eigenvalue {index} missed the residual bound");
            continue;
        }
        let overlap = cluster_prev
            .iter()
            .map(|p| dot(&v, p, &zero).abs().to_f64())
            .fold(0.0, f64::max);
        if overlap <= tol.orthogonality {
            fix_sign(&mut v, &zero);
            return Ok(v);
        }
        worst_overlap = worst_overlap.max(overlap);
        debug!("eigenvector {index}: in-cluster overlap {overlap:e}, retrying");
    }
    Err(Error::OrthogonalityLoss {
        index,
        overlap: worst_overlap.max(f64::MIN_POSITIVE),
    })
}

/// Adds unit eigenvectors to `spectrum` by inverse iteration; the start
/// vector is the normalized all-ones vector, so results are reproducible.
pub fn eig_vectors_tridiagonal<T: Real>(
    diag: &[T],
    offdiag: &[T],
    mut spectrum: Spectrum<T>,
) -> Result<Spectrum<T>> {
    if spectrum.eigenvalues.len() != diag.len() {
        return Err(Error::Incompatible(format!(
            "spectrum holds {} eigenvalues for a block of dimension {}",
            spectrum.eigenvalues.len(),
            diag.len()
        )));
    }
    let precision = spectrum.precision;
    let bits = precision.mantissa_bits;
    let prep = prepare(diag, offdiag, bits)?;
    let tol = tolerances(&precision, &prep.scale);
    let n = diag.len();
    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut cluster_start = 0;
    for i in 0..n {
        let lambda = &spectrum.eigenvalues[i];
        if i > 0 && lambda.clone() - spectrum.eigenvalues[i - 1].clone() > tol.cluster {
            cluster_start = i;
        }
        let v = one_vector(
            diag,
            offdiag,
            lambda,
            i,
            &vectors[cluster_start..i],
            &tol,
            bits,
        )?;
        vectors.push(v);
    }
    spectrum.eigenvectors = Some(vectors);
    Ok(spectrum)
}

#[cfg(test)]
mod tests {
    use super::super::{eig_values_tridiagonal, PrecisionConfig};
    use super::*;
    use crate::real::BigFloat;

    fn vectors(d: &[f64], e: &[f64]) -> Vec<Vec<f64>> {
        let p = PrecisionConfig::double();
        let s = eig_values_tridiagonal(d, e, &p).unwrap();
        eig_vectors_tridiagonal(d, e, s).unwrap().eigenvectors.unwrap()
    }

    #[test]
    fn two_by_two_top_vector() {
        let v = vectors(&[0.0, 0.0], &[1.0]);
        let r = 0.5f64.sqrt();
        assert!((v[1][0] - r).abs() < 1e-12 && (v[1][1] - r).abs() < 1e-12);
        assert!((v[0][0] - r).abs() < 1e-12);
        assert!((v[0][0] + v[0][1]).abs() < 1e-12);
    }

    #[test]
    fn singleton() {
        let v = vectors(&[2.0], &[]);
        assert_eq!(v, vec![vec![1.0]]);
    }

    #[test]
    fn degenerate_diagonal_gives_orthonormal_basis() {
        let d = [3.0, 3.0, 3.0, 1.0];
        let e = [0.0, 0.0, 0.0];
        let v = vectors(&d, &e);
        for i in 0..4 {
            for j in 0..4 {
                let p: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((p - target).abs() < 1e-12, "{i} {j} {p}");
            }
        }
    }

    #[test]
    fn lmg_block_residual() {
        let d = [0.5, 1.5];
        let e = [-0.5];
        let v = vectors(&d, &e);
        let lambda = 1.0 - 0.5f64.sqrt();
        let r0 = (d[0] - lambda) * v[0][0] + e[0] * v[0][1];
        let r1 = e[0] * v[0][0] + (d[1] - lambda) * v[0][1];
        assert!(r0.abs() < 1e-14 && r1.abs() < 1e-14);
    }

    #[test]
    fn arbitrary_precision_vectors() {
        let bits = 192;
        let p = PrecisionConfig::arbitrary(bits).unwrap();
        let d: Vec<BigFloat> = (0..12).map(|i| BigFloat::from_i64(i % 5, bits)).collect();
        let e: Vec<BigFloat> = (0..11)
            .map(|i| BigFloat::from_i64(i + 1, bits) / BigFloat::from_i64(7, bits))
            .collect();
        let s = eig_values_tridiagonal(&d, &e, &p).unwrap();
        let s = eig_vectors_tridiagonal(&d, &e, s).unwrap();
        let zero = BigFloat::zero(bits);
        let tol = BigFloat::pow2(20 - bits as i64, bits);
        for (lambda, v) in s.eigenvalues.iter().zip(s.eigenvectors.as_ref().unwrap()) {
            let norm = dot(v, v, &zero);
            assert!((norm - BigFloat::one(bits)).abs() < tol);
            let r = residual_inf(&d, &e, lambda, v, &zero);
            assert!(r < BigFloat::pow2(-170, bits));
        }
    }
}
