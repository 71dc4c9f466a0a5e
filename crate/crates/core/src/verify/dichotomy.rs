//! The `d = 1, N = 2, B = {0, a}` dichotomy: odd `R` admits no exponential
//! basis, even `|R| >= 4` does.

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::clique::{max_orthogonal_clique, CliqueOptions, CliqueResult, ZERO_TOL};
use crate::affine_system::{AffineSystem, Rational};
use crate::error::{Error, Result};
use crate::measure::FractalMeasure;
use crate::ruelle::{certify, ContractionReport};
use crate::spectrum::{completeness_scan, CompletenessOptions, CompletenessReport, CompletenessStatus, Grid};

pub const DEFAULT_CLASSIFY_WINDOW: usize = 60;
pub const COMPLETENESS_TARGET: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prediction {
    NoBasis,
    Basis,
    /// `|R| = 2` is not covered by the even clause.
    OutsideTheorem,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyEvidence {
    pub clique: Option<CliqueResult>,
    pub certificate: Option<ContractionReport>,
    pub completeness: Option<CompletenessReport>,
}

impl DichotomyEvidence {
    pub fn max_clique_size(&self) -> Option<usize> {
        self.clique.as_ref().map(|c| c.size)
    }

    pub fn completeness_min_q(&self) -> Option<f64> {
        self.completeness.as_ref().map(|c| c.min_q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyVerdict {
    #[serde(rename = "R")]
    pub r: i64,
    pub a: f64,
    pub a_exact: String,
    /// The nonzero frequency `l` of `L = {0, l}`.
    pub frequency: f64,
    pub predicted: Prediction,
    pub evidence: DichotomyEvidence,
    /// Whether the evidence agrees with the prediction; `None` outside the theorem.
    pub consistent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyOptions {
    pub window: usize,
    pub zero_tol: f64,
    /// Overrides the default `l = 1/(2a)`.
    pub frequency: Option<Rational>,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_CLASSIFY_WINDOW,
            zero_tol: ZERO_TOL,
            frequency: None,
        }
    }
}

pub fn predict(r: i64) -> Result<Prediction> {
    match r.unsigned_abs() {
        0 | 1 => Err(Error::Input(format!("|R| must be at least 2, got {r}"))),
        2 => Ok(Prediction::OutsideTheorem),
        m if m % 2 == 1 => Ok(Prediction::NoBasis),
        _ => Ok(Prediction::Basis),
    }
}

/// The system `R`, `B = {0, a}`, `L = {0, l}`.
pub fn dichotomy_system(r: i64, a: &Rational, l: &Rational) -> Result<AffineSystem> {
    let zero = Rational::zero();
    AffineSystem::from_rationals(
        1,
        vec![Rational::from_integer(r.into())],
        vec![vec![zero.clone()], vec![a.clone()]],
        vec![vec![zero], vec![l.clone()]],
    )
}

/// Prediction plus evidence: the exact clique in a window for odd `R`, the
/// contraction certificate and a completeness scan for even `|R| >= 4`, the
/// certificate alone for `|R| = 2`.
pub fn dim_one_classify(r: i64, a: &Rational, opts: &DichotomyOptions) -> Result<DichotomyVerdict> {
    let predicted = predict(r)?;
    if a.is_zero() {
        return Err(Error::Input("a must be nonzero".into()));
    }
    let l = opts
        .frequency
        .clone()
        .unwrap_or_else(|| (Rational::from_integer(2.into()) * a).recip());
    if l.is_zero() {
        return Err(Error::Input("the frequency l must be nonzero".into()));
    }
    let m = FractalMeasure::new(dichotomy_system(r, a, &l)?)?;
    let lf = l.to_f64().unwrap_or(f64::NAN);
    let mut evidence = DichotomyEvidence {
        clique: None,
        certificate: None,
        completeness: None,
    };
    let consistent = if r % 2 != 0 {
        let mut o = CliqueOptions::new(opts.window);
        o.zero_tol = opts.zero_tol;
        o.unit = lf;
        let c = max_orthogonal_clique(&m, &o)?;
        let ok = c.size <= 2;
        evidence.clique = Some(c);
        Some(ok)
    } else {
        let cert = certify(&m)?;
        let certified = cert.basis_certified;
        evidence.certificate = Some(cert);
        if predicted == Prediction::Basis {
            let width = l.abs().to_f64().unwrap_or(f64::NAN);
            let grid = Grid::new(vec![0.0], vec![width], vec![width / 100.0])?;
            let scan = completeness_scan(&m, &CompletenessOptions::new(grid, COMPLETENESS_TARGET))?;
            let ok = certified && scan.status == CompletenessStatus::Complete;
            evidence.completeness = Some(scan);
            Some(ok)
        } else {
            // |R| = 2: L_n only reaches nonnegative labels, so Q_n creeps
            // up over many depths; the certificate is recorded alone
            None
        }
    };
    Ok(DichotomyVerdict {
        r,
        a: a.to_f64().unwrap_or(f64::NAN),
        a_exact: a.to_string(),
        frequency: lf,
        predicted,
        evidence,
        consistent,
    })
}
