//! The Ruelle transfer operator
//! `(Cq)(t) = sum_l |chi_B(t - l)|^2 q(rho_l(t))`, `rho_l(t) = (R^T)^{-1}(t - l)`,
//! on grid functions over a box containing the attractor of `{rho_l}`, and the
//! Lipschitz contraction bound that certifies the basis property.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::affine_system::{
    check_hadamard, validate_compatibility, AffineSystem, DEFAULT_COMPATIBILITY_DEPTH, DEFAULT_HADAMARD_TOL,
    DEFAULT_INTEGRALITY_TOL,
};
use crate::error::{Error, Result};
use crate::measure::{chi_mask, FractalMeasure};
use crate::numeric::{hs_norm, op_norm, power_norms, rank_of, Contraction};

/// Slack allowed when testing that `rho_l` maps the box into itself.
pub const BOX_TOL: f64 = 1e-9;
/// Tail radius below which the attractor hull is considered resolved.
pub const HULL_TAIL_TOL: f64 = 1e-12;
pub const MAX_HULL_DEPTH: usize = 256;
const MAX_INVARIANT_PASSES: usize = 200;

/// Default grid resolution per axis for the operator.
pub fn default_nodes(dim: usize) -> usize {
    match dim {
        1 => 1 << 10,
        2 => 1 << 7,
        _ => 1 << 5,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Input("box bounds must share a positive dimension".into()));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b))
        {
            return Err(Error::Input("box bounds must be finite with lo <= hi".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&x, (&a, &b))| x >= a - tol && x <= b + tol)
    }

    pub fn corners(&self) -> Vec<DVector<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                DVector::from_iterator(
                    d,
                    (0..d).map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] }),
                )
            })
            .collect()
    }

    fn include(&mut self, p: &DVector<f64>) {
        for i in 0..self.dim() {
            self.lo[i] = self.lo[i].min(p[i]);
            self.hi[i] = self.hi[i].max(p[i]);
        }
    }
}

/// `rho_l(t) = (R^T)^{-1}(t - l)`.
fn rho(c: &Contraction, t: &DVector<f64>, l: &DVector<f64>) -> DVector<f64> {
    c.apply_adjoint_inverse(&(t - l))
}

/// Bounding box of `{ -sum_{k=1}^{K} (R^T)^{-k} l_k }`, inflated by the tail radius
/// `sum_{k>K} ||(R^T)^{-k}|| max|l|`. Contains the attractor of `{rho_l}`.
pub fn attractor_hull(sys: &AffineSystem, depth: usize) -> Result<AxisBox> {
    let c = Contraction::new(&sys.dynamics_matrix())?;
    let (lo, hi) = level_sums(sys, &c, depth);
    let tail = hull_tail(sys, &c, depth);
    Ok(inflate(lo, hi, tail))
}

/// [`attractor_hull`] at the first depth whose tail radius is below [`HULL_TAIL_TOL`].
pub fn default_hull(sys: &AffineSystem) -> Result<AxisBox> {
    let c = Contraction::new(&sys.dynamics_matrix())?;
    let max_l = sys.max_frequency_norm();
    if max_l == 0.0 {
        return AxisBox::new(vec![0.0; sys.dim()], vec![0.0; sys.dim()]);
    }
    let norms = power_norms(&c.inverse().transpose(), MAX_HULL_DEPTH + c.period() + 1);
    let tail_at = |k: usize| max_l * norms[k + 1..k + 1 + c.period()].iter().sum::<f64>() / (1.0 - c.factor());
    let depth = (1..=MAX_HULL_DEPTH)
        .find(|&k| tail_at(k) <= HULL_TAIL_TOL)
        .ok_or(Error::Convergence {
            max_depth: MAX_HULL_DEPTH,
            tail: tail_at(MAX_HULL_DEPTH),
            tol: HULL_TAIL_TOL,
        })?;
    let (lo, hi) = level_sums(sys, &c, depth);
    Ok(inflate(lo, hi, tail_at(depth)))
}

fn level_sums(sys: &AffineSystem, c: &Contraction, depth: usize) -> (Vec<f64>, Vec<f64>) {
    let d = sys.dim();
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    let mut level: Vec<DVector<f64>> = sys.frequencies().cloned().collect();
    for _ in 0..depth {
        level = level.iter().map(|l| c.apply_adjoint_inverse(l)).collect();
        for i in 0..d {
            let (a, b) = level
                .iter()
                .map(|v| -v[i])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            lo[i] += a;
            hi[i] += b;
        }
    }
    (lo, hi)
}

fn hull_tail(sys: &AffineSystem, c: &Contraction, depth: usize) -> f64 {
    let max_l = sys.max_frequency_norm();
    let norms = power_norms(&c.inverse().transpose(), depth + c.period() + 1);
    max_l * norms[depth + 1..depth + 1 + c.period()].iter().sum::<f64>() / (1.0 - c.factor())
}

fn inflate(lo: Vec<f64>, hi: Vec<f64>, r: f64) -> AxisBox {
    AxisBox {
        lo: lo.into_iter().map(|x| x - r).collect(),
        hi: hi.into_iter().map(|x| x + r).collect(),
    }
}

/// Whether `rho_l(box) ⊆ box` (up to `tol`) for every `l`; checking corners suffices.
pub fn is_forward_invariant(sys: &AffineSystem, domain: &AxisBox, tol: f64) -> Result<bool> {
    let c = Contraction::new(&sys.dynamics_matrix())?;
    Ok(domain.corners().iter().all(|p| {
        sys.frequencies()
            .all(|l| domain.contains(rho(&c, p, l).as_slice(), tol))
    }))
}

/// Grows `domain` by the images of its corners until it is `rho_l`-invariant.
pub fn invariant_box(sys: &AffineSystem, domain: &AxisBox) -> Result<AxisBox> {
    let c = Contraction::new(&sys.dynamics_matrix())?;
    let mut current = domain.clone();
    for _ in 0..MAX_INVARIANT_PASSES {
        let mut grown = current.clone();
        for p in current.corners() {
            for l in sys.frequencies() {
                grown.include(&rho(&c, &p, l));
            }
        }
        if grown == current {
            return Ok(current);
        }
        current = grown;
    }
    if is_forward_invariant(sys, &current, BOX_TOL)? {
        return Ok(current);
    }
    Err(Error::Domain(format!(
        "no invariant box found within {MAX_INVARIANT_PASSES} passes"
    )))
}

/// Real samples on a regular grid over a box, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: AxisBox,
    counts: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_fn(domain: AxisBox, counts: Vec<usize>, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        check_counts(&domain, &counts)?;
        let total: usize = counts.iter().product();
        let skeleton = Self {
            domain,
            counts,
            values: Vec::new(),
        };
        let values: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|i| f(skeleton.node(i).as_slice()))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("grid function samples must be finite".into()));
        }
        Ok(Self { values, ..skeleton })
    }

    pub fn from_values(domain: AxisBox, counts: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_counts(&domain, &counts)?;
        if values.len() != counts.iter().product::<usize>() {
            return Err(Error::Input("sample count does not match grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("grid function samples must be finite".into()));
        }
        Ok(Self { domain, counts, values })
    }

    pub fn constant(domain: AxisBox, counts: Vec<usize>, c: f64) -> Result<Self> {
        Self::from_fn(domain, counts, |_| c)
    }

    pub fn domain(&self) -> &AxisBox {
        &self.domain
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self, axis: usize) -> f64 {
        let n = self.counts[axis];
        if n < 2 {
            0.0
        } else {
            (self.domain.hi[axis] - self.domain.lo[axis]) / (n - 1) as f64
        }
    }

    fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let d = self.counts.len();
        let mut out = vec![0; d];
        for axis in (0..d).rev() {
            out[axis] = idx % self.counts[axis];
            idx /= self.counts[axis];
        }
        out
    }

    fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.counts).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn node(&self, idx: usize) -> DVector<f64> {
        let m = self.multi_index(idx);
        DVector::from_iterator(
            m.len(),
            m.iter()
                .enumerate()
                .map(|(axis, &i)| self.domain.lo[axis] + i as f64 * self.step(axis)),
        )
    }

    /// Multilinear interpolation; points up to [`BOX_TOL`] outside the box are clamped.
    pub fn interpolate(&self, p: &[f64]) -> Result<f64> {
        if !self.domain.contains(p, BOX_TOL) {
            return Err(Error::Domain(format!(
                "point {p:?} outside box {:?}..{:?}",
                self.domain.lo, self.domain.hi
            )));
        }
        let d = self.counts.len();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for axis in 0..d {
            let n = self.counts[axis];
            if n < 2 {
                continue;
            }
            let u = ((p[axis] - self.domain.lo[axis]) / self.step(axis)).clamp(0.0, (n - 1) as f64);
            let i = (u.floor() as usize).min(n - 2);
            base[axis] = i;
            frac[axis] = u - i as f64;
        }
        let mut acc = 0.0;
        let mut corner = vec![0usize; d];
        for mask in 0..1usize << d {
            let mut w = 1.0;
            for axis in 0..d {
                let up = mask >> axis & 1 == 1;
                if self.counts[axis] < 2 {
                    if up {
                        w = 0.0;
                    }
                    corner[axis] = 0;
                    continue;
                }
                corner[axis] = base[axis] + up as usize;
                w *= if up { frac[axis] } else { 1.0 - frac[axis] };
            }
            if w != 0.0 {
                acc += w * self.values[self.flat_index(&corner)];
            }
        }
        Ok(acc)
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_counts(domain: &AxisBox, counts: &[usize]) -> Result<()> {
    if counts.len() != domain.dim() {
        return Err(Error::Input("grid counts must match the box dimension".into()));
    }
    for (axis, &n) in counts.iter().enumerate() {
        let width = domain.hi[axis] - domain.lo[axis];
        if n == 0 || (width > 0.0 && n < 2) {
            return Err(Error::Input(format!(
                "axis {axis}: {n} nodes cannot sample a box of width {width}"
            )));
        }
    }
    Ok(())
}

fn ruelle_node(
    sys: &AffineSystem,
    c: &Contraction,
    domain: &AxisBox,
    t: &DVector<f64>,
    eval: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
) -> Result<f64> {
    let mut acc = 0.0;
    for l in sys.frequencies() {
        let w = chi_mask(sys, &(t - l)).norm_sqr();
        let p = rho(c, t, l);
        if !domain.contains(p.as_slice(), BOX_TOL) {
            return Err(Error::Domain(format!(
                "rho_l({:?}) = {:?} leaves the box; enlarge it",
                t.as_slice(),
                p.as_slice()
            )));
        }
        acc += w * eval(p.as_slice())?;
    }
    Ok(acc)
}

/// `Cq` on the grid of `q`, with `q(rho_l(t))` by multilinear interpolation.
pub fn apply_ruelle(sys: &AffineSystem, q: &GridFunction) -> Result<GridFunction> {
    let q_ref = q;
    apply_ruelle_with(sys, q.domain.clone(), q.counts.clone(), move |p| q_ref.interpolate(p))
}

/// `Cf` sampled on a grid, evaluating `f` exactly at `rho_l(t)`.
pub fn apply_ruelle_with(
    sys: &AffineSystem,
    domain: AxisBox,
    counts: Vec<usize>,
    f: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<GridFunction> {
    if domain.dim() != sys.dim() {
        return Err(Error::Input("box dimension does not match the system".into()));
    }
    check_counts(&domain, &counts)?;
    let c = Contraction::new(&sys.dynamics_matrix())?;
    let skeleton = GridFunction {
        domain,
        counts,
        values: Vec::new(),
    };
    let total: usize = skeleton.counts.iter().product();
    let values = (0..total)
        .into_par_iter()
        .map(|i| ruelle_node(sys, &c, &skeleton.domain, &skeleton.node(i), &f))
        .collect::<Result<Vec<f64>>>()?;
    Ok(GridFunction { values, ..skeleton })
}

/// `sup |grad q|_2` over interior nodes, by central differences.
pub fn lipschitz_norm(q: &GridFunction) -> Result<f64> {
    let d = q.counts.len();
    for (axis, &n) in q.counts.iter().enumerate() {
        if n < 3 {
            return Err(Error::Input(format!(
                "grid too coarse on axis {axis}: {n} nodes, need at least 3"
            )));
        }
    }
    let steps: Vec<f64> = (0..d).map(|a| q.step(a)).collect();
    let mut best: f64 = 0.0;
    for idx in 0..q.values.len() {
        let m = q.multi_index(idx);
        if m.iter().zip(&q.counts).any(|(&i, &n)| i == 0 || i == n - 1) {
            continue;
        }
        let mut g2 = 0.0;
        let mut nb = m.clone();
        for axis in 0..d {
            nb[axis] = m[axis] + 1;
            let up = q.values[q.flat_index(&nb)];
            nb[axis] = m[axis] - 1;
            let down = q.values[q.flat_index(&nb)];
            nb[axis] = m[axis];
            let g = (up - down) / (2.0 * steps[axis]);
            g2 += g * g;
        }
        best = best.max(g2.sqrt());
    }
    Ok(best)
}

/// `sup |sin u|` over `u in [a, b]`.
fn sup_abs_sin(a: f64, b: f64) -> f64 {
    if b - a >= PI {
        return 1.0;
    }
    let k = ((a - FRAC_PI_2) / PI).ceil();
    if FRAC_PI_2 + k * PI <= b {
        return 1.0;
    }
    a.sin().abs().max(b.sin().abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaEstimate {
    pub beta: f64,
    pub gamma_bound: f64,
    pub inverse_op_norm: f64,
    pub inverse_hs_norm: f64,
    pub max_frequency_norm: f64,
    pub digit_diameter: f64,
}

/// The explicit Lipschitz bound
/// `gamma = (N-1)^2 N^{-1} beta ||R^{-1}||_op max|l| + ||R^{-1}||_hs`, with
/// `beta = 2 pi diam(B) max_{b,b',l} sup_Y |sin(2 pi (b-b').(y-l))|`.
///
/// The sup is taken over the whole box, computed exactly from the range of
/// the linear phase, so it never underestimates the sup over `Y`.
pub fn estimate_gamma(sys: &AffineSystem, domain: &AxisBox) -> Result<GammaEstimate> {
    if domain.dim() != sys.dim() {
        return Err(Error::Input("box dimension does not match the system".into()));
    }
    let inv = sys.dynamics_matrix().try_inverse().ok_or(Error::Singular)?;
    let center: Vec<f64> = domain.lo.iter().zip(&domain.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half: Vec<f64> = domain.lo.iter().zip(&domain.hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let digits: Vec<&DVector<f64>> = sys.digits().collect();
    let mut sup_sin: f64 = 0.0;
    for (i, b) in digits.iter().enumerate() {
        for b2 in &digits[i + 1..] {
            let g: Vec<f64> = (*b - *b2).iter().map(|x| TAU * x).collect();
            let spread: f64 = g.iter().zip(&half).map(|(gi, h)| gi.abs() * h).sum();
            for l in sys.frequencies() {
                let mid: f64 = g
                    .iter()
                    .zip(center.iter().zip(l.iter()))
                    .map(|(gi, (c, li))| gi * (c - li))
                    .sum();
                sup_sin = sup_sin.max(sup_abs_sin(mid - spread, mid + spread));
            }
        }
    }
    let diam = sys.digit_diameter();
    let beta = TAU * diam * sup_sin;
    let n = sys.size() as f64;
    let op = op_norm(&inv);
    let hs = hs_norm(&inv);
    let max_l = sys.max_frequency_norm();
    let gamma_bound = (n - 1.0).powi(2) / n * beta * op * max_l + hs;
    Ok(GammaEstimate {
        beta,
        gamma_bound,
        inverse_op_norm: op,
        inverse_hs_norm: hs,
        max_frequency_norm: max_l,
        digit_diameter: diam,
    })
}

/// A real trigonometric polynomial shifted to vanish at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    frequencies: Vec<Vec<f64>>,
    cos_coef: Vec<f64>,
    sin_coef: Vec<f64>,
}

impl TrigPolynomial {
    /// All integer frequencies `1 <= |k|_inf <= degree` up to sign, with
    /// coefficients uniform on `[-1, 1]`.
    pub fn random(dim: usize, degree: i64, rng: &mut impl Rng) -> Self {
        let mut frequencies = Vec::new();
        let side = (2 * degree + 1) as usize;
        for idx in 0..side.pow(dim as u32) {
            let mut k = Vec::with_capacity(dim);
            let mut rest = idx;
            for _ in 0..dim {
                k.push((rest % side) as i64 - degree);
                rest /= side;
            }
            // keep one representative of each +-k pair
            match k.iter().find(|&&x| x != 0) {
                Some(&first) if first > 0 => frequencies.push(k.iter().map(|&x| x as f64).collect()),
                _ => {}
            }
        }
        let cos_coef = frequencies.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
        let sin_coef = frequencies.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self {
            frequencies,
            cos_coef,
            sin_coef,
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((k, a), b) in self.frequencies.iter().zip(&self.cos_coef).zip(&self.sin_coef) {
            let (s, c) = (TAU * k.iter().zip(y).map(|(ki, yi)| ki * yi).sum::<f64>()).sin_cos();
            acc += a * (c - 1.0) + b * s;
        }
        acc
    }
}

/// `||Cq|| / ||q||` in the Lipschitz norm; `None` when `||q|| = 0`.
pub fn contraction_ratio(
    sys: &AffineSystem,
    domain: &AxisBox,
    counts: &[usize],
    q: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<Option<f64>> {
    let grid_q = GridFunction::from_fn(domain.clone(), counts.to_vec(), &q)?;
    let denom = lipschitz_norm(&grid_q)?;
    if denom == 0.0 {
        return Ok(None);
    }
    let cq = apply_ruelle_with(sys, domain.clone(), counts.to_vec(), |p| Ok(q(p)))?;
    Ok(Some(lipschitz_norm(&cq)? / denom))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
    pub trials: usize,
    pub skipped: usize,
    pub seed: u64,
}

/// Largest Lipschitz ratio `||Cq|| / ||q||` over seeded random trigonometric
/// polynomials of degree at most 4 with `q(0) = 0`.
pub fn contraction_probe(
    sys: &AffineSystem,
    domain: &AxisBox,
    counts: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ProbeResult> {
    if trials == 0 {
        return Err(Error::Input("at least one trial is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polys: Vec<TrigPolynomial> = (0..trials)
        .map(|_| TrigPolynomial::random(sys.dim(), 4, &mut rng))
        .collect();
    let mut ratios = Vec::with_capacity(trials);
    let mut skipped = 0;
    for p in &polys {
        match contraction_ratio(sys, domain, counts, |y| p.eval(y))? {
            Some(r) => ratios.push(r),
            None => skipped += 1,
        }
    }
    Ok(ProbeResult {
        max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        ratios,
        trials,
        skipped,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub gamma_bound: f64,
    pub beta: f64,
    pub empirical_max_ratio: Option<f64>,
    pub trials: usize,
    pub basis_certified: bool,
    pub hadamard_ok: bool,
    pub compatible: bool,
    pub zero_in_l: bool,
    pub l_spans: bool,
    pub gamma_below_one: bool,
    pub failures: Vec<String>,
    pub domain: AxisBox,
}

impl ContractionReport {
    pub fn with_probe(mut self, probe: &ProbeResult) -> Self {
        self.empirical_max_ratio = Some(probe.max_ratio);
        self.trials = probe.trials;
        self
    }
}

/// Checks every hypothesis of the contraction criterion and records the ones
/// that fail. A certificate means the exponentials indexed by the candidate
/// spectrum form an orthonormal basis of `L^2(mu)`.
pub fn basis_certificate(m: &FractalMeasure, domain: &AxisBox) -> Result<ContractionReport> {
    let sys = m.system();
    let est = estimate_gamma(sys, domain)?;
    let hadamard_ok = check_hadamard(sys) <= DEFAULT_HADAMARD_TOL;
    let compatible = validate_compatibility(sys, DEFAULT_COMPATIBILITY_DEPTH, DEFAULT_INTEGRALITY_TOL)?.compatible;
    let zero_in_l = sys.zero_in_frequencies();
    let freqs: Vec<DVector<f64>> = sys.frequencies().cloned().collect();
    let l_spans = rank_of(&freqs, sys.dim()) == sys.dim();
    let gamma_below_one = est.gamma_bound < 1.0;
    let mut failures = Vec::new();
    if !hadamard_ok {
        failures.push("Hadamard condition fails".to_string());
    }
    if !compatible {
        failures.push("compatibility condition fails".to_string());
    }
    if !zero_in_l {
        failures.push("0 is not in L".to_string());
    }
    if !l_spans {
        failures.push("L does not span R^d".to_string());
    }
    if !gamma_below_one {
        failures.push(format!("gamma bound {} is not below 1", est.gamma_bound));
    }
    Ok(ContractionReport {
        gamma_bound: est.gamma_bound,
        beta: est.beta,
        empirical_max_ratio: None,
        trials: 0,
        basis_certified: failures.is_empty(),
        hadamard_ok,
        compatible,
        zero_in_l,
        l_spans,
        gamma_below_one,
        failures,
        domain: domain.clone(),
    })
}

/// [`basis_certificate`] over the default attractor hull.
pub fn certify(m: &FractalMeasure) -> Result<ContractionReport> {
    let hull = default_hull(m.system())?;
    basis_certificate(m, &hull)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor_hull() -> AxisBox {
        default_hull(&AffineSystem::cantor4()).unwrap()
    }

    #[test]
    fn cantor4_hull() {
        let h = cantor_hull();
        assert!((h.lo[0] + 1.0 / 3.0).abs() < 1e-11);
        assert!(h.hi[0].abs() < 1e-11);
        assert!(h.hi[0] >= 0.0 && h.lo[0] <= -1.0 / 3.0);
        assert!(is_forward_invariant(&AffineSystem::cantor4(), &h, BOX_TOL).unwrap());
        let coarse = attractor_hull(&AffineSystem::cantor4(), 3).unwrap();
        assert!(coarse.lo[0] <= -1.0 / 3.0 && coarse.hi[0] >= 0.0);
    }

    #[test]
    fn zero_frequency_hull_is_a_point() {
        let sys = AffineSystem::one_dim(4.0, &[0.0], &[0.0]).unwrap();
        let h = default_hull(&sys).unwrap();
        assert_eq!(h.lo, vec![0.0]);
        assert_eq!(h.hi, vec![0.0]);
        let h = attractor_hull(&sys, 5).unwrap();
        assert_eq!(h.lo, vec![0.0]);
    }

    #[test]
    fn constant_is_fixed() {
        let sys = AffineSystem::cantor4();
        let one = GridFunction::constant(cantor_hull(), vec![1024], 1.0).unwrap();
        let c1 = apply_ruelle(&sys, &one).unwrap();
        assert!(c1.sup_distance(&one) < 1e-12);
        let zero = GridFunction::constant(cantor_hull(), vec![1024], 0.0).unwrap();
        assert!(apply_ruelle(&sys, &zero).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn box_too_small_is_a_domain_error() {
        let sys = AffineSystem::cantor4();
        let small = AxisBox::new(vec![-0.1], vec![0.0]).unwrap();
        let q = GridFunction::constant(small, vec![16], 1.0).unwrap();
        assert!(matches!(apply_ruelle(&sys, &q), Err(Error::Domain(_))));
    }

    #[test]
    fn lipschitz_examples() {
        let h = cantor_hull();
        let c = GridFunction::constant(h.clone(), vec![1024], 3.0).unwrap();
        assert_eq!(lipschitz_norm(&c).unwrap(), 0.0);
        let lin = GridFunction::from_fn(h.clone(), vec![1024], |y| y[0]).unwrap();
        assert!((lipschitz_norm(&lin).unwrap() - 1.0).abs() < 1e-9);
        let unit = AxisBox::new(vec![-0.25], vec![0.25]).unwrap();
        let s = GridFunction::from_fn(unit, vec![1025], |y| (TAU * y[0]).sin()).unwrap();
        let h2 = 0.5f64 / 1024.0;
        assert!((lipschitz_norm(&s).unwrap() - TAU).abs() < TAU.powi(3) * h2 * h2);
        let tiny = GridFunction::constant(h, vec![2], 0.0).unwrap();
        assert!(lipschitz_norm(&tiny).is_err());
    }

    #[test]
    fn interval_sup_of_sine() {
        assert_eq!(sup_abs_sin(0.0, 2.0), 1.0);
        assert_eq!(sup_abs_sin(-5.0, -4.5), 1.0);
        assert!((sup_abs_sin(-PI / 3.0, 0.0) - (PI / 3.0).sin()).abs() < 1e-15);
        assert!((sup_abs_sin(-4.0 * PI / 3.0, -PI) - (PI / 3.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn cantor4_gamma() {
        let est = estimate_gamma(&AffineSystem::cantor4(), &cantor_hull()).unwrap();
        let beta = PI * (PI / 3.0).sin();
        assert!((est.beta - beta).abs() < 1e-9);
        assert!((est.gamma_bound - (est.beta / 8.0 + 0.25)).abs() < 1e-15);
        assert!(est.gamma_bound < 1.0);
        assert!(est.beta <= PI);
    }

    #[test]
    fn singleton_digits_degenerate_gamma() {
        let sys = AffineSystem::one_dim(4.0, &[0.0], &[0.0]).unwrap();
        let est = estimate_gamma(&sys, &default_hull(&sys).unwrap()).unwrap();
        assert_eq!(est.beta, 0.0);
        assert_eq!(est.gamma_bound, 0.25);
    }

    #[test]
    fn probe_is_homogeneous_and_below_bound() {
        let sys = AffineSystem::cantor4();
        let h = cantor_hull();
        let est = estimate_gamma(&sys, &h).unwrap();
        let r1 = contraction_ratio(&sys, &h, &[1024], |y| y[0]).unwrap().unwrap();
        assert!(r1.is_finite() && r1 <= est.gamma_bound + 1e-6);
        let p = TrigPolynomial::random(1, 4, &mut ChaCha8Rng::seed_from_u64(3));
        let a = contraction_ratio(&sys, &h, &[1024], |y| p.eval(y)).unwrap().unwrap();
        let b = contraction_ratio(&sys, &h, &[1024], |y| 2.0 * p.eval(y))
            .unwrap()
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(contraction_ratio(&sys, &h, &[1024], |_| 0.0).unwrap(), None);
    }

    #[test]
    fn trig_polynomials_vanish_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=2 {
            let p = TrigPolynomial::random(dim, 4, &mut rng);
            assert_eq!(p.eval(&vec![0.0; dim]), 0.0);
        }
        assert_eq!(TrigPolynomial::random(2, 4, &mut rng).frequencies.len(), 40);
    }

    #[test]
    fn certificates() {
        let m = FractalMeasure::new(AffineSystem::cantor4()).unwrap();
        let r = certify(&m).unwrap();
        assert!(r.basis_certified, "{:?}", r.failures);
        let m = FractalMeasure::new(AffineSystem::one_dim(4.0, &[0.0], &[0.0]).unwrap()).unwrap();
        let r = certify(&m).unwrap();
        assert!(!r.basis_certified);
        assert!(r.failures.iter().any(|f| f.contains("L does not span")));
        let m = FractalMeasure::new(AffineSystem::one_dim(2.0, &[0.0, 0.5], &[0.0, 1.0]).unwrap()).unwrap();
        let r = certify(&m).unwrap();
        assert!((r.gamma_bound - (PI / 4.0 + 0.5)).abs() < 1e-9);
        assert!(!r.basis_certified);
    }
}
