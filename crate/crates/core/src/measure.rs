//! The invariant probability measure `mu = N^{-1} sum_b mu o sigma_b^{-1}`.
//!
//! Convention: `mu_hat(t) = int e^{-i 2 pi t.x} dmu(x)`, which for the
//! product expansion means each factor is the conjugate of [`chi_mask`].

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine_system::{check_hadamard, spectral_expansiveness, AffineSystem, DEFAULT_HADAMARD_TOL};
use crate::error::{Error, Result};
use crate::numeric::{cis_turns, dot, Contraction};

pub const DEFAULT_PRODUCT_TAIL_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_PRODUCT_DEPTH: usize = 256;
pub const DEFAULT_ATOM_BUDGET: u128 = 1 << 24;
pub const DEFAULT_MOMENT_DEGREE_CAP: u32 = 8;

/// `N^{-1} sum_b e^{i 2 pi b.t}`.
pub fn chi_mask(sys: &AffineSystem, t: &DVector<f64>) -> Complex64 {
    let n = sys.size() as f64;
    let sum: Complex64 = sys.digits().map(|b| cis_turns(dot(b.as_slice(), t.as_slice()))).sum();
    sum / n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierValue {
    pub value: Complex64,
    /// Bound on `|mu_hat(t) - value|`.
    pub tail_bound: f64,
    /// Number of factors multiplied.
    pub depth: usize,
}

/// A validated system viewed as its invariant measure.
#[derive(Debug, Clone)]
pub struct FractalMeasure {
    sys: AffineSystem,
    contraction: Contraction,
    product_tail_tol: f64,
    max_product_depth: usize,
    tail_scale: f64,
}

impl FractalMeasure {
    /// Requires an expansive `R` and a unitary `H_{B,L}`.
    pub fn new(sys: AffineSystem) -> Result<Self> {
        let exp = spectral_expansiveness(&sys)?;
        if !exp.expansive {
            return Err(Error::NotExpansive {
                min_modulus: exp.min_eigenvalue_modulus,
            });
        }
        let dev = check_hadamard(&sys);
        if dev > DEFAULT_HADAMARD_TOL {
            return Err(Error::Validation(format!(
                "Hadamard condition fails: ||H H* - I|| = {dev:e}"
            )));
        }
        let contraction = Contraction::new(&sys.dynamics_matrix())?;
        let tail_scale = TAU * sys.max_digit_norm();
        Ok(Self {
            sys,
            contraction,
            product_tail_tol: DEFAULT_PRODUCT_TAIL_TOL,
            max_product_depth: DEFAULT_MAX_PRODUCT_DEPTH,
            tail_scale,
        })
    }

    pub fn with_product_limits(mut self, tail_tol: f64, max_depth: usize) -> Result<Self> {
        if !(tail_tol > 0.0 && tail_tol.is_finite()) || max_depth == 0 {
            return Err(Error::Input("product limits must be positive".into()));
        }
        self.product_tail_tol = tail_tol;
        self.max_product_depth = max_depth;
        Ok(self)
    }

    pub fn system(&self) -> &AffineSystem {
        &self.sys
    }

    pub fn contraction(&self) -> &Contraction {
        &self.contraction
    }

    /// `mu_hat(t)` by the infinite product, truncated once the tail is below tolerance.
    ///
    /// With `s_k = (R^T)^{-k} t` and `|chi(s) - 1| <= 2 pi max|b| |s|`, the
    /// neglected factors change the product by at most `expm1(2 pi max|b| sum_{k>=K} |s_k|)`.
    pub fn fourier(&self, t: &DVector<f64>) -> Result<FourierValue> {
        if self.tail_scale == 0.0 {
            return Ok(FourierValue {
                value: Complex64::new(1.0, 0.0),
                tail_bound: 0.0,
                depth: 0,
            });
        }
        let m = self.contraction.period();
        let mut window: Vec<DVector<f64>> = Vec::with_capacity(m);
        window.push(t.clone());
        while window.len() < m {
            let next = self.contraction.apply_adjoint_inverse(window.last().unwrap());
            window.push(next);
        }
        let mut value = Complex64::new(1.0, 0.0);
        let mut norms: Vec<f64> = window.iter().map(|s| s.norm()).collect();
        let mut head = 0;
        let mut tail = 0.0;
        for depth in 0..=self.max_product_depth {
            let sum = self.contraction.tail_from_window(&norms);
            tail = self.tail_scale * sum;
            if tail <= self.product_tail_tol {
                return Ok(FourierValue {
                    value,
                    tail_bound: tail.exp_m1(),
                    depth,
                });
            }
            if depth == self.max_product_depth {
                break;
            }
            let s = &window[head];
            let factor = chi_mask(&self.sys, s).conj();
            value *= factor;
            if value == Complex64::new(0.0, 0.0) {
                return Ok(FourierValue {
                    value,
                    tail_bound: 0.0,
                    depth: depth + 1,
                });
            }
            let last = &window[(head + m - 1) % m];
            let next = self.contraction.apply_adjoint_inverse(last);
            norms[head] = next.norm();
            window[head] = next;
            head = (head + 1) % m;
        }
        Err(Error::Convergence {
            max_depth: self.max_product_depth,
            tail,
            tol: self.product_tail_tol,
        })
    }

    pub fn fourier_1d(&self, t: f64) -> Result<FourierValue> {
        self.fourier(&DVector::from_element(1, t))
    }

    /// The first `k` factors of the product.
    pub fn fourier_truncated(&self, t: &DVector<f64>, k: usize) -> Complex64 {
        let mut s = t.clone();
        let mut value = Complex64::new(1.0, 0.0);
        for i in 0..k {
            if i > 0 {
                s = self.contraction.apply_adjoint_inverse(&s);
            }
            value *= chi_mask(&self.sys, &s).conj();
        }
        value
    }

    /// Radius of a ball around 0 containing the attractor of `sigma_b`.
    pub fn support_radius(&self) -> f64 {
        let norms = crate::numeric::power_norms(self.contraction.inverse(), self.contraction.period() - 1);
        let head: f64 = norms.iter().sum();
        head / (1.0 - self.contraction.factor()) * self.sys.max_digit_norm()
    }
}

/// Depth-`K` unrolling of the invariance equation: `N^K` atoms of weight `N^{-K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicApproximation {
    dim: usize,
    depth: usize,
    coords: Vec<f64>,
    weight: f64,
}

impl AtomicApproximation {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    /// `sum_w N^{-K} e^{-i 2 pi t.x_w}`.
    pub fn fourier(&self, t: &[f64]) -> Complex64 {
        let sum: Complex64 = self.points().map(|x| cis_turns(-dot(t, x))).sum();
        sum * self.weight
    }

    /// `sum_w N^{-K} x_w^alpha`.
    pub fn moment(&self, order: &[u32]) -> f64 {
        self.points()
            .map(|x| x.iter().zip(order).map(|(xi, &a)| xi.powi(a as i32)).product::<f64>())
            .sum::<f64>()
            * self.weight
    }
}

/// Points `x_w = sum_{k<K} R^{-k} b_k` over all words, in lexicographic word order.
pub fn atomic_approximation(m: &FractalMeasure, depth: usize) -> Result<AtomicApproximation> {
    atomic_approximation_with_budget(m, depth, DEFAULT_ATOM_BUDGET)
}

pub fn atomic_approximation_with_budget(m: &FractalMeasure, depth: usize, budget: u128) -> Result<AtomicApproximation> {
    let sys = m.system();
    let n = sys.size();
    let d = sys.dim();
    let needed = (n as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget {
            what: "atomic approximation points",
            needed,
            limit: budget,
        });
    }
    let mut level: Vec<DVector<f64>> = sys.digits().cloned().collect();
    let mut coords = vec![0.0; d];
    for k in 0..depth {
        if k > 0 {
            level = level.iter().map(|b| m.contraction.apply_inverse(b)).collect();
        }
        let mut next = Vec::with_capacity(coords.len() * n);
        for p in coords.chunks(d) {
            for v in &level {
                next.extend(p.iter().zip(v.iter()).map(|(a, b)| a + b));
            }
        }
        coords = next;
    }
    Ok(AtomicApproximation {
        dim: d,
        depth,
        coords,
        weight: (n as f64).powi(-(depth as i32)),
    })
}

type Poly = BTreeMap<Vec<u32>, f64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

fn monomials_of_degree(d: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(d: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == d - 1 {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=deg).rev() {
            prefix.push(k);
            rec(d, deg - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, deg, &mut Vec::with_capacity(d), &mut out);
    out
}

/// All moments `int x^alpha dmu` with `|alpha| <= max_degree`.
///
/// Integrating `x^alpha` against the invariance equation gives, degree by
/// degree, a linear system `(I - T_n) m_n = r_n` whose right-hand side
/// involves only lower-degree moments. `T_n` has spectral radius below one
/// for expansive `R`.
pub fn moment_table(m: &FractalMeasure, max_degree: u32) -> Result<BTreeMap<Vec<u32>, f64>> {
    if max_degree > DEFAULT_MOMENT_DEGREE_CAP {
        return Err(Error::Input(format!(
            "moment degree {max_degree} exceeds cap {DEFAULT_MOMENT_DEGREE_CAP}"
        )));
    }
    let sys = m.system();
    let d = sys.dim();
    let inv: &DMatrix<f64> = m.contraction.inverse();
    let n = sys.size() as f64;
    let mut known: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    known.insert(vec![0; d], 1.0);

    // Affine forms (R^{-1} x + b)_i as polynomials, per digit.
    let forms: Vec<Vec<Poly>> = sys
        .digits()
        .map(|b| {
            (0..d)
                .map(|i| {
                    let mut p = Poly::new();
                    let mut e0 = vec![0; d];
                    p.insert(e0.clone(), b[i]);
                    for j in 0..d {
                        e0[j] = 1;
                        *p.entry(e0.clone()).or_insert(0.0) += inv[(i, j)];
                        e0[j] = 0;
                    }
                    p.retain(|_, c| *c != 0.0);
                    p
                })
                .collect()
        })
        .collect();

    for deg in 1..=max_degree {
        let basis = monomials_of_degree(d, deg);
        let index: BTreeMap<&Vec<u32>, usize> = basis.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let size = basis.len();
        let mut lhs = DMatrix::<f64>::identity(size, size);
        let mut rhs = DVector::<f64>::zeros(size);
        for (row, alpha) in basis.iter().enumerate() {
            for form in &forms {
                let mut p = Poly::new();
                p.insert(vec![0; d], 1.0);
                for (i, &a) in alpha.iter().enumerate() {
                    for _ in 0..a {
                        p = poly_mul(&p, &form[i]);
                    }
                }
                for (e, c) in p {
                    let total: u32 = e.iter().sum();
                    if total == deg {
                        lhs[(row, index[&e])] -= c / n;
                    } else {
                        rhs[row] += c / n * known[&e];
                    }
                }
            }
        }
        let sol = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Validation(format!("singular moment system at degree {deg}")))?;
        for (i, e) in basis.into_iter().enumerate() {
            known.insert(e, sol[i]);
        }
    }
    Ok(known)
}

/// `int x^alpha dmu` for a single multi-index.
pub fn moments(m: &FractalMeasure, order: &[u32]) -> Result<f64> {
    if order.len() != m.system().dim() {
        return Err(Error::Input(format!(
            "multi-index has {} entries, dimension is {}",
            order.len(),
            m.system().dim()
        )));
    }
    let deg: u32 = order.iter().sum();
    let table = moment_table(m, deg)?;
    Ok(table[order])
}

/// Random iteration `x <- R^{-1} x + b` with `b` uniform on `B`, started at 0.
pub fn chaos_sample(m: &FractalMeasure, count: usize, burn_in: usize, seed: u64) -> Vec<DVector<f64>> {
    let sys = m.system();
    let digits: Vec<&DVector<f64>> = sys.digits().collect();
    let inv = m.contraction.inverse();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DVector::<f64>::zeros(sys.dim());
    let mut out = Vec::with_capacity(count);
    for i in 0..burn_in + count {
        let b = digits[rng.random_range(0..digits.len())];
        x = inv * &x + b;
        if i >= burn_in {
            out.push(x.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor4() -> FractalMeasure {
        FractalMeasure::new(AffineSystem::cantor4()).unwrap()
    }

    fn v(t: f64) -> DVector<f64> {
        DVector::from_element(1, t)
    }

    #[test]
    fn mask_values() {
        let sys = AffineSystem::cantor4();
        assert_eq!(chi_mask(&sys, &v(0.0)), Complex64::new(1.0, 0.0));
        assert_eq!(chi_mask(&sys, &v(1.0)).norm(), 0.0);
        for i in 0..=400 {
            let t = -2.0 + i as f64 * 0.01;
            let expect = (std::f64::consts::PI * t / 2.0).cos().powi(2);
            assert!((chi_mask(&sys, &v(t)).norm_sqr() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn fourier_at_zero_and_at_zero_of_first_factor() {
        let m = cantor4();
        let f = m.fourier_1d(0.0).unwrap();
        assert_eq!(f.value, Complex64::new(1.0, 0.0));
        assert_eq!(f.tail_bound, 0.0);
        let f = m.fourier_1d(1.0).unwrap();
        assert_eq!(f.value.norm(), 0.0);
        assert_eq!(f.depth, 1);
    }

    #[test]
    fn fourier_matches_brute_force_atoms() {
        let m = cantor4();
        let t = 0.5;
        let exact = m.fourier_1d(t).unwrap();
        assert!(exact.tail_bound <= 1e-11);
        // The moduli agree to second order in 4^{-K}; the phase only to first order.
        let atoms = atomic_approximation(&m, 12).unwrap();
        assert!((atoms.fourier(&[t]).norm() - exact.value.norm()).abs() < 1e-8);
        let atoms = atomic_approximation(&m, 14).unwrap();
        assert!((atoms.fourier(&[t]) - exact.value).norm() < 1e-8);
        for k in 0..=12 {
            let a = atomic_approximation(&m, k).unwrap();
            let trunc = m.fourier_truncated(&v(t), k);
            assert!((a.fourier(&[t]) - trunc).norm() < 1e-13, "K = {k}");
        }
    }

    #[test]
    fn singleton_digit_set_is_a_point_mass() {
        let m = FractalMeasure::new(AffineSystem::one_dim(4.0, &[0.0], &[0.0]).unwrap()).unwrap();
        let f = m.fourier_1d(3.7).unwrap();
        assert_eq!(f.value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn convergence_error_when_depth_is_too_small() {
        let m = cantor4().with_product_limits(1e-12, 3).unwrap();
        assert!(matches!(m.fourier_1d(0.3), Err(Error::Convergence { .. })));
    }

    #[test]
    fn non_expansive_systems_are_rejected() {
        let sys = AffineSystem::one_dim(1.0, &[0.0, 0.5], &[0.0, 1.0]).unwrap();
        assert!(matches!(FractalMeasure::new(sys), Err(Error::NotExpansive { .. })));
        let sys = AffineSystem::one_dim(4.0, &[0.0, 1.0 / 3.0], &[0.0, 1.0]).unwrap();
        assert!(matches!(FractalMeasure::new(sys), Err(Error::Validation(_))));
    }

    #[test]
    fn small_atomic_approximations() {
        let m = cantor4();
        let a0 = atomic_approximation(&m, 0).unwrap();
        assert_eq!(a0.len(), 1);
        assert_eq!(a0.point(0), &[0.0]);
        assert_eq!(a0.weight(), 1.0);
        let a1 = atomic_approximation(&m, 1).unwrap();
        assert_eq!(a1.points().collect::<Vec<_>>(), vec![&[0.0][..], &[0.5][..]]);
        let a2 = atomic_approximation(&m, 2).unwrap();
        let pts: Vec<f64> = a2.points().map(|p| p[0]).collect();
        assert_eq!(pts, vec![0.0, 0.125, 0.5, 0.625]);
        assert_eq!(a2.weight(), 0.25);
    }

    #[test]
    fn atom_budget_is_enforced() {
        let m = cantor4();
        assert!(matches!(
            atomic_approximation_with_budget(&m, 10, 512),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn cantor4_moments() {
        let m = cantor4();
        assert_eq!(moments(&m, &[0]).unwrap(), 1.0);
        let mean = moments(&m, &[1]).unwrap();
        assert!((mean - 1.0 / 3.0).abs() < 1e-12);
        let atoms = atomic_approximation(&m, 14).unwrap();
        let second = moments(&m, &[2]).unwrap();
        assert!((atoms.moment(&[2]) - second).abs() < 1e-8);
        assert!(moments(&m, &[9]).is_err());
    }

    #[test]
    fn chaos_samples_stay_in_the_hull() {
        let m = cantor4();
        assert!(chaos_sample(&m, 0, 10, 1).is_empty());
        let xs = chaos_sample(&m, 10_000, 32, 7);
        assert!(xs.iter().all(|x| x[0] >= 0.0 && x[0] <= 2.0 / 3.0 + 1e-15));
        assert_eq!(xs, chaos_sample(&m, 10_000, 32, 7));
        assert_ne!(xs, chaos_sample(&m, 10_000, 32, 8));
    }

    #[test]
    fn support_radius_bounds_atoms() {
        let m = cantor4();
        assert!((m.support_radius() - 2.0 / 3.0).abs() < 1e-15);
    }
}
