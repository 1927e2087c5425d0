use crate::real::Real;

use super::prepare;

/// Number of eigenvalues strictly below `x` (up to rounding) of the
/// symmetric tridiagonal matrix `(diag, offdiag)`.
///
/// Uses the LDL^T pivot recurrence `q_i = d_i - x - e_{i-1}^2 / q_{i-1}`;
/// pivots smaller than `pivmin` are replaced by `-pivmin`, which keeps the
/// recurrence finite without changing the count of any well-separated value.
pub fn sturm_count<T: Real>(diag: &[T], offdiag: &[T], x: &T) -> usize {
    let bits = x.mantissa_bits();
    match prepare(diag, offdiag, bits) {
        Ok(prep) => count_prepared(diag, &prep.off_sq, x, &prep.pivmin),
        Err(_) => 0,
    }
}

pub(crate) fn count_prepared<T: Real>(diag: &[T], off_sq: &[T], x: &T, pivmin: &T) -> usize {
    let zero = T::zero(pivmin.mantissa_bits());
    let mut count = 0;
    let mut q = diag[0].clone() - x.clone();
    let neg_pivmin = -pivmin.clone();
    if q.abs() <= *pivmin {
        q = neg_pivmin.clone();
    }
    if q < zero {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i].clone() - x.clone() - off_sq[i - 1].clone() / q;
        if q.abs() <= *pivmin {
            q = neg_pivmin.clone();
        }
        if q < zero {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_on_small_matrix() {
        let d = [0.0, 0.0];
        let e = [1.0];
        assert_eq!(sturm_count(&d, &e, &0.0), 1);
        assert_eq!(sturm_count(&d, &e, &-5.0), 0);
        assert_eq!(sturm_count(&d, &e, &5.0), 2);
    }

    #[test]
    fn counts_with_zero_pivots() {
        // diag {1, 1, 1}, zero couplings: every pivot vanishes at x = 1
        let d = [1.0, 1.0, 1.0];
        let e = [0.0, 0.0];
        assert_eq!(sturm_count(&d, &e, &0.999), 0);
        assert_eq!(sturm_count(&d, &e, &1.001), 3);
    }
}
