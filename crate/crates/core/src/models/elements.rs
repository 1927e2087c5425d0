//! Closed-form matrix elements in the `|N; n_b, v>` basis.
//!
//! Elements are returned as a sign and the integer square of their
//! magnitude, so each precision path takes its own square root.

use crate::models::Model;
use crate::real::Real;

/// One nonzero element `<to| O |from>` of a sparse operator, equal to
/// `scale * sign * sqrt(square)`; `scale` is operator-specific (1/2 for `J_x`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Element {
    pub from: u32,
    pub to: u32,
    pub sign: i64,
    pub square: i64,
}

impl Element {
    pub fn value<T: Real>(&self, bits: usize) -> T {
        let magnitude = T::from_i64(self.square, bits).sqrt();
        if self.sign < 0 {
            -magnitude
        } else {
            magnitude
        }
    }

    pub fn value_f64(&self) -> f64 {
        self.sign as f64 * (self.square as f64).sqrt()
    }
}

/// Diagonal of the pair product `(b+.b+ - s+s+)(b~.b~ - s s)` on
/// `|N; n_b, v>` for an `n`-dimensional boson:
/// `(n_b - v)(n_b + v + n - 2) + (N - n_b)(N - n_b - 1)`.
pub fn pair_product_diagonal(n_bosons: u32, dof: u32, v: u32, nb: u32) -> i64 {
    let (n, nb, v, d) = (n_bosons as i64, nb as i64, v as i64, dof as i64);
    (nb - v) * (nb + v + d - 2) + (n - nb) * (n - nb - 1)
}

/// Square of the pair-product element between `n_b` and `n_b + 2`:
/// `(n_b + 2 - v)(n_b + v + n)(N - n_b)(N - n_b - 1)`.
pub fn pair_product_offdiag_square(n_bosons: u32, dof: u32, v: u32, nb: u32) -> i64 {
    let (n, nb, v, d) = (n_bosons as i64, nb as i64, v as i64, dof as i64);
    (nb + 2 - v) * (nb + v + d) * (n - nb) * (n - nb - 1)
}

/// Phase of the pairing off-diagonal once block states are identified with
/// Fock states. For the 2D vibron model the `D_+-` phases of the circular
/// bosons make the `so(3)`-pairing element positive; elsewhere it is negative.
pub fn pairing_offdiag_sign(model: Model) -> i64 {
    match model {
        Model::Vm2d => 1,
        _ => -1,
    }
}

/// `J_x` on the LMG basis `|n_t>`: `<n_t + 1|J_x|n_t> = sqrt((N - n_t)(n_t + 1)) / 2`.
/// Each element is returned in both directions; the `1/2` is not included.
pub fn jx_elements(n_bosons: u32) -> Vec<Element> {
    let n = n_bosons as i64;
    let mut out = Vec::with_capacity(2 * n_bosons as usize);
    for nt in 0..n_bosons {
        let square = (n - nt as i64) * (nt as i64 + 1);
        out.push(Element { from: nt, to: nt + 1, sign: 1, square });
        out.push(Element { from: nt + 1, to: nt, sign: 1, square });
    }
    out
}

/// `D_+ = sqrt(2)(tau_+^dag sigma - sigma^dag tau_-)` acting on `|n, l>`.
/// Raises `l` by one and moves `n` by one in either direction.
pub fn d_plus_elements(n_bosons: u32, n: u32, l: i32) -> Vec<Element> {
    let (nn, ni, li) = (n_bosons as i64, n as i64, l as i64);
    let mut out = Vec::with_capacity(2);
    if n < n_bosons {
        let square = (nn - ni) * (ni + li + 2);
        if square > 0 {
            out.push(Element { from: n, to: n + 1, sign: 1, square });
        }
    }
    if n > 0 {
        let square = (nn - ni + 1) * (ni - li);
        if square > 0 {
            out.push(Element { from: n, to: n - 1, sign: -1, square });
        }
    }
    out
}

/// `D_- = sqrt(2)(-tau_-^dag sigma + sigma^dag tau_+)` acting on `|n, l>`.
pub fn d_minus_elements(n_bosons: u32, n: u32, l: i32) -> Vec<Element> {
    let (nn, ni, li) = (n_bosons as i64, n as i64, l as i64);
    let mut out = Vec::with_capacity(2);
    if n < n_bosons {
        let square = (nn - ni) * (ni - li + 2);
        if square > 0 {
            out.push(Element { from: n, to: n + 1, sign: -1, square });
        }
    }
    if n > 0 {
        let square = (nn - ni + 1) * (ni + li);
        if square > 0 {
            out.push(Element { from: n, to: n - 1, sign: 1, square });
        }
    }
    out
}
