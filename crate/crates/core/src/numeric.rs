//! Small dense linear-algebra and phase helpers shared by the other modules.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest power inspected when searching for a contracting power of `R^{-1}`.
pub const MAX_CONTRACTION_PERIOD: usize = 64;

/// `e^{i 2 pi x}`, with exact values at multiples of a quarter turn.
pub fn cis_turns(x: f64) -> Complex64 {
    let f = x - x.round();
    if f == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if f == 0.5 || f == -0.5 {
        Complex64::new(-1.0, 0.0)
    } else if f == 0.25 {
        Complex64::new(0.0, 1.0)
    } else if f == -0.25 {
        Complex64::new(0.0, -1.0)
    } else {
        let (s, c) = (TAU * f).sin_cos();
        Complex64::new(c, s)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Total lexicographic order on coordinate vectors.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs();
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// Numerical rank of the matrix whose columns are `vectors`.
pub fn rank_of(vectors: &[DVector<f64>], dim: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
    let sv = m.singular_values();
    let scale = sv.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let tol = scale * 1e-12 * dim.max(vectors.len()) as f64;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Operator norms `c_k = ||M^k||` for `k = 0..=kmax`.
pub fn power_norms(m: &DMatrix<f64>, kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut p = DMatrix::<f64>::identity(m.nrows(), m.ncols());
    out.push(1.0);
    for _ in 0..kmax {
        p = &p * m;
        out.push(op_norm(&p));
    }
    out
}

/// Inverse actions of an expansive matrix `A` and its transpose, plus a
/// contracting period used to bound geometric tails.
///
/// For the smallest `m` with `c_m = ||A^{-m}|| < 1`, submultiplicativity gives
/// `sum_{k >= K} |A^{-k} v| <= (1 - c_m)^{-1} sum_{j < m} |A^{-(K+j)} v|`.
#[derive(Debug, Clone)]
pub struct Contraction {
    forward: LU<f64, Dyn, Dyn>,
    adjoint: LU<f64, Dyn, Dyn>,
    inverse: DMatrix<f64>,
    period: usize,
    factor: f64,
}

impl Contraction {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let inverse = a.clone().try_inverse().ok_or(Error::Singular)?;
        let norms = power_norms(&inverse, MAX_CONTRACTION_PERIOD);
        let (period, factor) = norms
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, &c)| c < 1.0)
            .map(|(k, &c)| (k, c))
            .ok_or_else(|| Error::NotExpansive {
                min_modulus: min_eigenvalue_modulus(a),
            })?;
        Ok(Self {
            forward: a.clone().lu(),
            adjoint: a.transpose().lu(),
            inverse,
            period,
            factor,
        })
    }

    /// `A^{-1} v`.
    pub fn apply_inverse(&self, v: &DVector<f64>) -> DVector<f64> {
        self.forward.solve(v).expect("invertibility checked at construction")
    }

    /// `(A^T)^{-1} v`.
    pub fn apply_adjoint_inverse(&self, v: &DVector<f64>) -> DVector<f64> {
        self.adjoint.solve(v).expect("invertibility checked at construction")
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// Bound on an infinite tail given the first `period()` terms of it.
    pub fn tail_from_window(&self, window: &[f64]) -> f64 {
        debug_assert_eq!(window.len(), self.period);
        window.iter().sum::<f64>() / (1.0 - self.factor)
    }
}

pub fn min_eigenvalue_modulus(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 1 {
        return a[(0, 0)].abs();
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min)
}
