//! The affine triple `(R, B, L)` and its validation.
//!
//! Entries are stored twice: as exact rationals (for integrality and phase
//! checks) and as `f64` (for everything numerical). Inputs given as `f64`
//! convert exactly, since every finite double is a dyadic rational.

mod file;

pub use file::{parse_rational, SystemFile};

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{self, cis_turns};

pub type Rational = BigRational;

/// Absolute tolerance for integer proximity in the compatibility check.
pub const DEFAULT_INTEGRALITY_TOL: f64 = 1e-9;
/// Powers of `R` tested when the integer shortcut does not apply.
pub const DEFAULT_COMPATIBILITY_DEPTH: u32 = 12;
/// Tolerance on `||H H^* - I||` for the Hadamard condition.
pub const DEFAULT_HADAMARD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
struct ExactPoint {
    exact: Vec<Rational>,
    approx: DVector<f64>,
}

impl ExactPoint {
    fn new(exact: Vec<Rational>) -> Self {
        let approx = DVector::from_iterator(exact.len(), exact.iter().map(to_f64));
        Self { exact, approx }
    }
}

fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn from_f64(x: f64, what: &str) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::Input(format!("{what}: non-finite value {x}")));
    }
    Rational::from_float(x).ok_or_else(|| Error::Input(format!("{what}: cannot represent {x}")))
}

fn cmp_exact(a: &[Rational], b: &[Rational]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

fn is_integer(q: &Rational) -> bool {
    q.is_integer()
}

/// Distance from `q` to the nearest integer, exactly.
fn integrality_defect(q: &Rational) -> Rational {
    let frac = q - q.floor();
    let other = Rational::one() - &frac;
    if frac < other {
        frac
    } else {
        other
    }
}

/// An affine iteration system `(R, B, L)` with an optional integer scale `r`.
///
/// The measure dynamics use `x -> (rR)^{-1} x + b`, the spectrum uses powers
/// of `(rR)^T`. `B` and `L` are kept in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSystem {
    dim: usize,
    matrix_exact: Vec<Rational>,
    matrix: DMatrix<f64>,
    digits: Vec<ExactPoint>,
    frequencies: Vec<ExactPoint>,
    scale: u32,
}

impl AffineSystem {
    /// Builds a system from exact rational data. `matrix` is row-major.
    pub fn from_rationals(
        dim: usize,
        matrix: Vec<Rational>,
        digits: Vec<Vec<Rational>>,
        frequencies: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("dimension must be positive".into()));
        }
        if matrix.len() != dim * dim {
            return Err(Error::Input(format!(
                "R must have {} entries, got {}",
                dim * dim,
                matrix.len()
            )));
        }
        if digits.is_empty() {
            return Err(Error::Input("B must be non-empty".into()));
        }
        if digits.len() != frequencies.len() {
            return Err(Error::Input(format!(
                "#B = {} but #L = {}",
                digits.len(),
                frequencies.len()
            )));
        }
        let canon = |set: Vec<Vec<Rational>>, name: &str| -> Result<Vec<ExactPoint>> {
            for (i, v) in set.iter().enumerate() {
                if v.len() != dim {
                    return Err(Error::Input(format!(
                        "{name}[{i}] has {} coordinates, expected {dim}",
                        v.len()
                    )));
                }
            }
            let mut set = set;
            set.sort_by(|a, b| cmp_exact(a, b));
            if let Some(w) = set.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Input(format!(
                    "{name} contains a repeated element {:?}",
                    w[0].iter().map(|q| q.to_string()).collect::<Vec<_>>()
                )));
            }
            Ok(set.into_iter().map(ExactPoint::new).collect())
        };
        let digits = canon(digits, "B")?;
        let frequencies = canon(frequencies, "L")?;
        let approx = DMatrix::from_row_iterator(dim, dim, matrix.iter().map(to_f64));
        Ok(Self {
            dim,
            matrix_exact: matrix,
            matrix: approx,
            digits,
            frequencies,
            scale: 1,
        })
    }

    /// Builds a system from floating-point data, converted exactly.
    pub fn new(matrix: DMatrix<f64>, digits: Vec<DVector<f64>>, frequencies: Vec<DVector<f64>>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::Input("R must be square".into()));
        }
        let mut exact = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                exact.push(from_f64(matrix[(i, j)], "R")?);
            }
        }
        let conv = |set: Vec<DVector<f64>>, name: &str| -> Result<Vec<Vec<Rational>>> {
            set.iter()
                .map(|v| v.iter().map(|&x| from_f64(x, name)).collect())
                .collect()
        };
        Self::from_rationals(dim, exact, conv(digits, "B")?, conv(frequencies, "L")?)
    }

    /// One-dimensional convenience constructor.
    pub fn one_dim(r: f64, digits: &[f64], frequencies: &[f64]) -> Result<Self> {
        let v = |xs: &[f64]| xs.iter().map(|&x| DVector::from_element(1, x)).collect();
        Self::new(DMatrix::from_element(1, 1, r), v(digits), v(frequencies))
    }

    /// The system with `R = 4`, `B = {0, 1/2}`, `L = {0, 1}`.
    pub fn cantor4() -> Self {
        Self::one_dim(4.0, &[0.0, 0.5], &[0.0, 1.0]).expect("static system")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N = #B = #L`.
    pub fn size(&self) -> usize {
        self.digits.len()
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// The unscaled `R`.
    pub fn base_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `rR`, the matrix governing both the measure and the spectrum.
    pub fn dynamics_matrix(&self) -> DMatrix<f64> {
        &self.matrix * self.scale as f64
    }

    fn dynamics_exact(&self) -> Vec<Rational> {
        let r = Rational::from_integer(BigInt::from(self.scale));
        self.matrix_exact.iter().map(|q| q * &r).collect()
    }

    pub fn base_matrix_exact(&self) -> &[Rational] {
        &self.matrix_exact
    }

    pub fn digits(&self) -> impl ExactSizeIterator<Item = &DVector<f64>> {
        self.digits.iter().map(|p| &p.approx)
    }

    pub fn frequencies(&self) -> impl ExactSizeIterator<Item = &DVector<f64>> {
        self.frequencies.iter().map(|p| &p.approx)
    }

    pub fn digits_exact(&self) -> impl ExactSizeIterator<Item = &[Rational]> {
        self.digits.iter().map(|p| p.exact.as_slice())
    }

    pub fn frequencies_exact(&self) -> impl ExactSizeIterator<Item = &[Rational]> {
        self.frequencies.iter().map(|p| p.exact.as_slice())
    }

    pub fn zero_in_frequencies(&self) -> bool {
        self.frequencies.iter().any(|p| p.exact.iter().all(|q| q.is_zero()))
    }

    /// Whether `rR` and `L` have integer entries (exact comparison).
    pub fn has_integer_spectrum_data(&self) -> bool {
        self.dynamics_exact().iter().all(is_integer) && self.frequencies.iter().all(|p| p.exact.iter().all(is_integer))
    }

    pub fn max_digit_norm(&self) -> f64 {
        self.digits().map(|b| b.norm()).fold(0.0, f64::max)
    }

    pub fn max_frequency_norm(&self) -> f64 {
        self.frequencies().map(|l| l.norm()).fold(0.0, f64::max)
    }

    /// `max |b - b'|_2` over `B`.
    pub fn digit_diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for a in self.digits() {
            for b in self.digits() {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    /// Replaces `R` by `rR` in both the dynamics and the spectrum.
    pub fn scale_system(&self, r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::Input("scale factor must be at least 1".into()));
        }
        let mut out = self.clone();
        out.scale = self
            .scale
            .checked_mul(r)
            .ok_or_else(|| Error::Input("scale factor overflows".into()))?;
        Ok(out)
    }
}

/// Result of the compatibility check `(rR)^n b . l in Z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Compatibility {
    pub compatible: bool,
    /// Largest `n` such that every power up to `n` passed (equals the tested maximum on success).
    pub compatible_up_to: u32,
    pub n_max_tested: u32,
    pub max_integrality_defect: f64,
    pub exact_shortcut_used: bool,
}

/// Checks `(rR)^n b . l` for integrality.
///
/// When `rR`, `rR.B` and `L` are integral the condition holds for every `n`
/// and no powers are evaluated. Otherwise powers `1..=n_max` are evaluated in
/// exact rational arithmetic.
pub fn validate_compatibility(sys: &AffineSystem, n_max: u32, tol: f64) -> Result<Compatibility> {
    if n_max == 0 {
        return Err(Error::Input("n_max must be at least 1".into()));
    }
    check_tol(tol)?;
    ensure_invertible(sys)?;
    if integer_shortcut_applies(sys) {
        return Ok(Compatibility {
            compatible: true,
            compatible_up_to: n_max,
            n_max_tested: n_max,
            max_integrality_defect: 0.0,
            exact_shortcut_used: true,
        });
    }
    let mut report = compatibility_by_powers(sys, n_max, tol);
    report.exact_shortcut_used = false;
    Ok(report)
}

/// The direct evaluation path of [`validate_compatibility`], never taking the shortcut.
pub fn compatibility_by_powers(sys: &AffineSystem, n_max: u32, tol: f64) -> Compatibility {
    let d = sys.dim;
    let a = sys.dynamics_exact();
    let mut power_b: Vec<Vec<Rational>> = sys.digits.iter().map(|p| p.exact.clone()).collect();
    let mut max_defect: f64 = 0.0;
    let mut up_to = 0;
    let mut failed = false;
    for n in 1..=n_max {
        for v in power_b.iter_mut() {
            *v = mat_vec_exact(&a, v, d);
        }
        let mut worst: f64 = 0.0;
        for v in &power_b {
            for l in &sys.frequencies {
                let prod = dot_exact(v, &l.exact);
                worst = worst.max(to_f64(&integrality_defect(&prod)));
            }
        }
        max_defect = max_defect.max(worst);
        if worst > tol {
            failed = true;
        } else if !failed {
            up_to = n;
        }
    }
    Compatibility {
        compatible: !failed,
        compatible_up_to: up_to,
        n_max_tested: n_max,
        max_integrality_defect: max_defect,
        exact_shortcut_used: false,
    }
}

fn integer_shortcut_applies(sys: &AffineSystem) -> bool {
    let a = sys.dynamics_exact();
    a.iter().all(is_integer)
        && sys
            .digits
            .iter()
            .all(|b| mat_vec_exact(&a, &b.exact, sys.dim).iter().all(is_integer))
        && sys.frequencies.iter().all(|l| l.exact.iter().all(is_integer))
}

fn mat_vec_exact(a: &[Rational], v: &[Rational], d: usize) -> Vec<Rational> {
    (0..d)
        .map(|i| (0..d).fold(Rational::zero(), |acc, j| acc + &a[i * d + j] * &v[j]))
        .collect()
}

fn dot_exact(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "tolerance must be positive and finite, got {tol}"
        )))
    }
}

fn ensure_invertible(sys: &AffineSystem) -> Result<()> {
    if sys.dynamics_matrix().try_inverse().is_none() {
        return Err(Error::Singular);
    }
    Ok(())
}

/// The unnormalized matrix `(e^{i 2 pi b.l})`, with phases reduced exactly mod 1.
pub fn hadamard_phases(sys: &AffineSystem) -> DMatrix<Complex64> {
    let n = sys.size();
    DMatrix::from_fn(n, n, |i, j| {
        let prod = dot_exact(&sys.digits[i].exact, &sys.frequencies[j].exact);
        let frac = &prod - prod.floor();
        cis_turns(to_f64(&frac))
    })
}

/// `|| H H^* - I ||_op` for `H = N^{-1/2} (e^{i 2 pi b.l})`.
pub fn check_hadamard(sys: &AffineSystem) -> f64 {
    let n = sys.size();
    let e = hadamard_phases(sys);
    let gram = (&e * e.adjoint()).map(|z| z / n as f64);
    let defect = gram - DMatrix::<Complex64>::identity(n, n);
    if n == 1 {
        return defect[(0, 0)].norm();
    }
    defect.singular_values().iter().cloned().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expansiveness {
    pub expansive: bool,
    pub min_eigenvalue_modulus: f64,
}

/// Whether every eigenvalue of `rR` lies outside the closed unit disc.
pub fn spectral_expansiveness(sys: &AffineSystem) -> Result<Expansiveness> {
    ensure_invertible(sys)?;
    let m = numeric::min_eigenvalue_modulus(&sys.dynamics_matrix());
    Ok(Expansiveness {
        expansive: m > 1.0,
        min_eigenvalue_modulus: m,
    })
}

/// `c_k = ||((rR)^T)^{-k}||_op` for `k = 0..=kmax`.
pub fn adjoint_power_norms(sys: &AffineSystem, kmax: usize) -> Result<Vec<f64>> {
    let inv = sys.dynamics_matrix().transpose().try_inverse().ok_or(Error::Singular)?;
    Ok(numeric::power_norms(&inv, kmax))
}

/// All validation results for a system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub compatible: bool,
    pub compatible_up_to: u32,
    pub max_integrality_defect: f64,
    pub hadamard_deviation: f64,
    pub hadamard_ok: bool,
    pub expansive: bool,
    pub min_eigenvalue_modulus: f64,
    pub exact_shortcut_used: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.compatible && self.hadamard_ok && self.expansive
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    pub n_max: u32,
    pub integrality_tol: f64,
    pub hadamard_tol: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_COMPATIBILITY_DEPTH,
            integrality_tol: DEFAULT_INTEGRALITY_TOL,
            hadamard_tol: DEFAULT_HADAMARD_TOL,
        }
    }
}

pub fn validate(sys: &AffineSystem, opts: &ValidationOptions) -> Result<ValidationReport> {
    check_tol(opts.hadamard_tol)?;
    let compat = validate_compatibility(sys, opts.n_max, opts.integrality_tol)?;
    let exp = spectral_expansiveness(sys)?;
    let dev = check_hadamard(sys);
    Ok(ValidationReport {
        compatible: compat.compatible,
        compatible_up_to: compat.compatible_up_to,
        max_integrality_defect: compat.max_integrality_defect,
        hadamard_deviation: dev,
        hadamard_ok: dev <= opts.hadamard_tol,
        expansive: exp.expansive,
        min_eigenvalue_modulus: exp.min_eigenvalue_modulus,
        exact_shortcut_used: compat.exact_shortcut_used,
    })
}
