//! The candidate spectrum `L_n = { sum_{k<=n} (rR^T)^k l_k }`, orthogonality of
//! its exponentials, and the completeness function `Q`.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::affine_system::AffineSystem;
use crate::error::{Error, Result};
use crate::measure::FractalMeasure;
use crate::numeric::lex_cmp;

pub const DEFAULT_SPECTRUM_BUDGET: u128 = 1 << 24;
pub const DEDUP_TOL: f64 = 1e-9;
/// Change in `min Q` between consecutive depths regarded as converged.
pub const CONVERGENCE_INCREMENT: f64 = 1e-4;
pub const BESSEL_SLACK: f64 = 1e-9;
pub const DEFAULT_MAX_SCAN_DEPTH: usize = 12;

/// A finite, sorted, deduplicated set of frequency vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEnumeration {
    dim: usize,
    depth: Option<usize>,
    elements: Vec<DVector<f64>>,
}

impl SpectrumEnumeration {
    /// An explicit frequency set, sorted and deduplicated.
    pub fn from_elements(dim: usize, elements: Vec<DVector<f64>>) -> Result<Self> {
        if let Some(bad) = elements.iter().find(|e| e.len() != dim) {
            return Err(Error::Input(format!(
                "frequency of length {} in dimension {dim}",
                bad.len()
            )));
        }
        if elements.iter().any(|e| e.iter().any(|x| !x.is_finite())) {
            return Err(Error::Input("non-finite frequency".into()));
        }
        Ok(Self {
            dim,
            depth: None,
            elements: sort_dedup(elements, DEDUP_TOL),
        })
    }

    pub fn from_1d(values: &[f64]) -> Result<Self> {
        Self::from_elements(1, values.iter().map(|&x| DVector::from_element(1, x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> Option<usize> {
        self.depth
    }

    pub fn elements(&self) -> &[DVector<f64>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, t: &DVector<f64>, tol: f64) -> bool {
        self.elements.iter().any(|e| (e - t).amax() <= tol)
    }

    /// Coordinates of one-dimensional spectra.
    pub fn values_1d(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e[0]).collect()
    }
}

fn sort_dedup(mut v: Vec<DVector<f64>>, tol: f64) -> Vec<DVector<f64>> {
    v.sort_by(|a, b| lex_cmp(a.as_slice(), b.as_slice()));
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(v.len());
    for x in v {
        // candidates within tol share a first coordinate within tol, and sit at the end of `out`
        let dup = out
            .iter()
            .rev()
            .take_while(|y| (x[0] - y[0]).abs() <= tol)
            .any(|y| (&x - y).amax() <= tol);
        if !dup {
            out.push(x);
        }
    }
    out
}

/// All sums `sum_{k=0}^{depth} ((rR)^T)^k l_k` with `l_k in L`.
pub fn enumerate_spectrum(sys: &AffineSystem, depth: usize) -> Result<SpectrumEnumeration> {
    enumerate_spectrum_with_budget(sys, depth, DEFAULT_SPECTRUM_BUDGET)
}

pub fn enumerate_spectrum_with_budget(sys: &AffineSystem, depth: usize, budget: u128) -> Result<SpectrumEnumeration> {
    let n = sys.size() as u128;
    let needed = n.checked_pow(depth as u32 + 1).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget {
            what: "spectrum words",
            needed,
            limit: budget,
        });
    }
    let adj = sys.dynamics_matrix().transpose();
    let tol = if sys.has_integer_spectrum_data() {
        0.0
    } else {
        DEDUP_TOL
    };
    let mut level: Vec<DVector<f64>> = sys.frequencies().cloned().collect();
    let mut sums: Vec<DVector<f64>> = vec![DVector::zeros(sys.dim())];
    for k in 0..=depth {
        if k > 0 {
            level = level.iter().map(|l| &adj * l).collect();
        }
        let mut next = Vec::with_capacity(sums.len() * level.len());
        for s in &sums {
            for l in &level {
                next.push(s + l);
            }
        }
        sums = sort_dedup(next, tol);
    }
    Ok(SpectrumEnumeration {
        dim: sys.dim(),
        depth: Some(depth),
        elements: sums,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityEntry {
    pub i: usize,
    pub j: usize,
    /// `<e_{lambda_i}, e_{lambda_j}>_mu = mu_hat(lambda_i - lambda_j)`.
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityTable {
    pub max_offdiag: f64,
    /// Pairs `i < j`; the lower triangle follows by conjugation.
    pub entries: Vec<OrthogonalityEntry>,
}

impl OrthogonalityTable {
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.max_offdiag <= tol
    }
}

pub fn orthogonality_matrix(m: &FractalMeasure, s: &SpectrumEnumeration) -> Result<OrthogonalityTable> {
    check_dim(m, s)?;
    let el = s.elements();
    let pairs: Vec<(usize, usize)> = (0..el.len())
        .flat_map(|i| (i + 1..el.len()).map(move |j| (i, j)))
        .collect();
    let entries = pairs
        .par_iter()
        .map(|&(i, j)| {
            m.fourier(&(&el[i] - &el[j]))
                .map(|f| OrthogonalityEntry { i, j, value: f.value })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_offdiag = entries.iter().map(|e| e.value.norm()).fold(0.0, f64::max);
    Ok(OrthogonalityTable { max_offdiag, entries })
}

fn check_dim(m: &FractalMeasure, s: &SpectrumEnumeration) -> Result<()> {
    if m.system().dim() != s.dim() {
        return Err(Error::Input(format!(
            "spectrum dimension {} does not match system dimension {}",
            s.dim(),
            m.system().dim()
        )));
    }
    Ok(())
}

/// `Q_n(t) = sum_{lambda in S} |mu_hat(t - lambda)|^2`.
pub fn q_partial(m: &FractalMeasure, s: &SpectrumEnumeration, t: &DVector<f64>) -> Result<f64> {
    check_dim(m, s)?;
    let mut q = 0.0;
    for l in s.elements() {
        q += m.fourier(&(t - l))?.value.norm_sqr();
    }
    Ok(q)
}

/// A regular grid over an axis-aligned box: nodes `lo + i * step` up to `hi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub step: Vec<f64>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, step: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != step.len() || lo.is_empty() {
            return Err(Error::Input(
                "grid bounds and steps must share a positive dimension".into(),
            ));
        }
        if step.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Input("grid steps must be positive".into()));
        }
        if lo.iter().chain(&hi).any(|x| !x.is_finite()) {
            return Err(Error::Input("grid bounds must be finite".into()));
        }
        Ok(Self { lo, hi, step })
    }

    /// The same interval and step on every axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, step: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], vec![step; dim])
    }

    /// The unit cell with step 0.01 in one dimension, 0.05 otherwise.
    pub fn unit_cell(dim: usize) -> Self {
        let step = if dim == 1 { 0.01 } else { 0.05 };
        Self::cube(dim, 0.0, 1.0, step).expect("static grid")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(&self.step)
            .map(|((&a, &b), &h)| {
                if b < a {
                    0
                } else {
                    ((b - a) / h + 1e-9).floor() as usize + 1
                }
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.counts().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<DVector<f64>> {
        let counts = self.counts();
        let total: usize = counts.iter().product();
        let d = self.dim();
        (0..total)
            .map(|mut idx| {
                let mut p = DVector::zeros(d);
                for axis in (0..d).rev() {
                    let i = idx % counts[axis];
                    idx /= counts[axis];
                    p[axis] = self.lo[axis] + i as f64 * self.step[axis];
                }
                p
            })
            .collect()
    }
}

/// `Q_S` at every node of the grid.
pub fn scan_q(m: &FractalMeasure, s: &SpectrumEnumeration, points: &[DVector<f64>]) -> Result<Vec<f64>> {
    points.par_iter().map(|t| q_partial(m, s, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompletenessStatus {
    /// `min Q_n >= target`.
    Complete,
    /// Converged below the target.
    Incomplete,
    /// Depth budget exhausted before the increment criterion was met.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthStep {
    pub depth: usize,
    pub spectrum_size: usize,
    pub min_q: f64,
    pub max_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport {
    pub min_q: f64,
    pub argmin: Vec<f64>,
    pub max_q: f64,
    pub converged: bool,
    pub depth: usize,
    pub target: f64,
    pub status: CompletenessStatus,
    /// `Q_n <= 1 + slack` held at every node and every depth.
    pub bessel_ok: bool,
    pub history: Vec<DepthStep>,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CompletenessOptions {
    pub grid: Grid,
    pub target: f64,
    pub start_depth: usize,
    pub max_depth: usize,
    pub increment_tol: f64,
}

impl CompletenessOptions {
    pub fn new(grid: Grid, target: f64) -> Self {
        Self {
            grid,
            target,
            start_depth: 0,
            max_depth: DEFAULT_MAX_SCAN_DEPTH,
            increment_tol: CONVERGENCE_INCREMENT,
        }
    }
}

/// Evaluates `Q_n` on the grid for increasing depth until `min Q_n` moves by
/// less than the increment tolerance.
///
/// `Q_n <= Q <= 1`, so `min Q_n >= target` is evidence of completeness at any
/// depth; a converged `min Q_n < target` is evidence (not proof) of incompleteness.
pub fn completeness_scan(m: &FractalMeasure, opts: &CompletenessOptions) -> Result<CompletenessReport> {
    let sys = m.system();
    if opts.grid.dim() != sys.dim() {
        return Err(Error::Input("grid dimension does not match the system".into()));
    }
    if opts.start_depth > opts.max_depth {
        return Err(Error::Input("start depth exceeds max depth".into()));
    }
    let points = opts.grid.points();
    let mut history = Vec::new();
    let mut bessel_ok = true;
    let mut converged = false;
    let mut prev_min: Option<f64> = None;
    let mut last: Option<(usize, Vec<f64>)> = None;
    for depth in opts.start_depth..=opts.max_depth {
        let s = match enumerate_spectrum(sys, depth) {
            Ok(s) => s,
            Err(Error::Budget { .. }) if last.is_some() => break,
            Err(e) => return Err(e),
        };
        let values = scan_q(m, &s, &points)?;
        let (min_q, max_q) = min_max(&values);
        bessel_ok &= values.iter().all(|&q| q <= 1.0 + BESSEL_SLACK);
        history.push(DepthStep {
            depth,
            spectrum_size: s.len(),
            min_q,
            max_q,
        });
        last = Some((depth, values));
        if let Some(p) = prev_min {
            if (min_q - p).abs() < opts.increment_tol {
                converged = true;
                break;
            }
        }
        prev_min = Some(min_q);
    }
    let (depth, values) = last.expect("at least one depth evaluated");
    let (min_q, max_q) = min_max(&values);
    let argmin = values
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |acc, (i, &q)| match acc {
            Some((_, best)) if best <= q => acc,
            _ => Some((i, q)),
        })
        .map(|(i, _)| points[i].iter().cloned().collect())
        .unwrap_or_default();
    let status = if !values.is_empty() && min_q >= opts.target {
        CompletenessStatus::Complete
    } else if converged {
        CompletenessStatus::Incomplete
    } else {
        CompletenessStatus::Inconclusive
    };
    Ok(CompletenessReport {
        min_q,
        argmin,
        max_q,
        converged,
        depth,
        target: opts.target,
        status,
        bessel_ok,
        history,
        points: points.iter().map(|p| p.iter().cloned().collect()).collect(),
        values,
    })
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| {
        (lo.min(q), hi.max(q))
    })
}

/// Minimum pairwise distance, evidence of uniform discreteness.
pub fn separation(s: &SpectrumEnumeration) -> Result<f64> {
    let el = s.elements();
    if el.len() < 2 {
        return Err(Error::Input("separation needs at least two frequencies".into()));
    }
    if s.dim() == 1 {
        return Ok(el.windows(2).map(|w| w[1][0] - w[0][0]).fold(f64::INFINITY, f64::min));
    }
    let mut best = f64::INFINITY;
    for i in 0..el.len() {
        for j in i + 1..el.len() {
            best = best.min((&el[i] - &el[j]).norm());
        }
    }
    Ok(best)
}
