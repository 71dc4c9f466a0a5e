//! Exact maximum cliques in the orthogonality graph on a window of frequencies.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::FractalMeasure;

/// Largest window for which the exact branch-and-bound is attempted.
pub const MAX_EXACT_WINDOW: usize = 200;
/// `|mu_hat| <= ZERO_TOL` counts as orthogonal.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CliqueOptions {
    /// Vertices are the labels `j` in `[-window, window]`.
    pub window: usize,
    pub zero_tol: f64,
    /// Frequency of label `j` is `j * unit`.
    pub unit: f64,
    /// Greedy search instead of the exact one; allowed for any window.
    pub heuristic: bool,
}

impl CliqueOptions {
    pub fn new(window: usize) -> Self {
        Self {
            window,
            zero_tol: ZERO_TOL,
            unit: 1.0,
            heuristic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliqueResult {
    pub size: usize,
    /// Labels of the witness, ascending.
    pub witness: Vec<i64>,
    /// `witness * unit`.
    pub frequencies: Vec<f64>,
    pub exact: bool,
    pub window: usize,
    pub unit: f64,
    pub zero_tol: f64,
    pub edges: usize,
}

/// Vertex order 0, 1, -1, 2, -2, ...
fn label(v: usize) -> i64 {
    if v % 2 == 1 {
        (v as i64 + 1) / 2
    } else {
        -(v as i64) / 2
    }
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn full(n: usize) -> Self {
        let mut b = Self::empty(n);
        for v in 0..n {
            b.set(v);
        }
        b
    }

    fn set(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }

    fn clear(&mut self, v: usize) {
        self.0[v / 64] &= !(1 << (v % 64));
    }

    fn get(&self, v: usize) -> bool {
        self.0[v / 64] >> (v % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn highest(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    fn ones(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &w) in self.0.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(i * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }
}

struct Graph {
    n: usize,
    adj: Vec<Bits>,
}

impl Graph {
    /// Per-vertex bound: number of colors used on `p ∩ {u >= v}` by a greedy
    /// coloring that colors high indices first.
    fn color_bounds(&self, p: &Bits) -> Vec<(usize, usize)> {
        let mut color = vec![0usize; self.n];
        let mut uncolored = p.clone();
        let mut k = 0;
        while !uncolored.is_empty() {
            k += 1;
            let mut q = uncolored.clone();
            while let Some(v) = q.highest() {
                color[v] = k;
                q.clear(v);
                q.and_not_assign(&self.adj[v]);
                uncolored.clear(v);
            }
        }
        let order = p.ones();
        let mut seen = vec![false; k + 1];
        let mut distinct = 0;
        let mut bounds = vec![(0, 0); order.len()];
        for (i, &v) in order.iter().enumerate().rev() {
            if !seen[color[v]] {
                seen[color[v]] = true;
                distinct += 1;
            }
            bounds[i] = (v, distinct);
        }
        bounds
    }

    fn expand(&self, r: &mut Vec<usize>, p: Bits, best: &mut Vec<usize>) {
        if p.is_empty() {
            if r.len() > best.len() {
                *best = r.clone();
            }
            return;
        }
        for (v, bound) in self.color_bounds(&p) {
            if r.len() + bound <= best.len() {
                break;
            }
            let mut rest = p.clone();
            for u in 0..v {
                rest.clear(u);
            }
            r.push(v);
            self.expand(r, rest.and(&self.adj[v]), best);
            r.pop();
        }
    }

    fn greedy(&self) -> Vec<usize> {
        let mut clique: Vec<usize> = Vec::new();
        for v in 0..self.n {
            if clique.iter().all(|&u| self.adj[v].get(u)) {
                clique.push(v);
            }
        }
        clique
    }
}

/// Maximum set of frequencies `j * unit`, `|j| <= M`, with pairwise
/// `|mu_hat(lambda - lambda')| <= zero_tol`. Among maximum cliques the witness
/// is the first found in the vertex order 0, 1, -1, 2, -2, ...
pub fn max_orthogonal_clique(m: &FractalMeasure, opts: &CliqueOptions) -> Result<CliqueResult> {
    if opts.window == 0 {
        return Err(Error::Input("clique window must be at least 1".into()));
    }
    if !(opts.zero_tol >= 0.0 && opts.zero_tol.is_finite()) {
        return Err(Error::Input("zero tolerance must be finite and nonnegative".into()));
    }
    if !(opts.unit.is_finite() && opts.unit != 0.0) {
        return Err(Error::Input("frequency unit must be finite and nonzero".into()));
    }
    if m.system().dim() != 1 {
        return Err(Error::Input("clique search works on one-dimensional systems".into()));
    }
    if opts.window > MAX_EXACT_WINDOW && !opts.heuristic {
        return Err(Error::Budget {
            what: "exact clique window (use heuristic mode for larger windows)",
            needed: opts.window as u128,
            limit: MAX_EXACT_WINDOW as u128,
        });
    }
    let n = 2 * opts.window + 1;
    // |mu_hat(-t)| = |mu_hat(t)|, so one value per absolute difference suffices
    let modulus = (0..=2 * opts.window)
        .into_par_iter()
        .map(|k| m.fourier_1d(k as f64 * opts.unit).map(|f| f.value.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let mut adj = vec![Bits::empty(n); n];
    let mut edges = 0;
    for u in 0..n {
        for v in u + 1..n {
            if modulus[(label(u) - label(v)).unsigned_abs() as usize] <= opts.zero_tol {
                adj[u].set(v);
                adj[v].set(u);
                edges += 1;
            }
        }
    }
    let g = Graph { n, adj };
    let best = if opts.heuristic {
        g.greedy()
    } else {
        let mut best = Vec::new();
        g.expand(&mut Vec::new(), Bits::full(n), &mut best);
        best
    };
    debug_assert!(best.iter().all(|&u| best.iter().all(|&v| u == v || g.adj[u].get(v))));
    let mut witness: Vec<i64> = best.iter().map(|&v| label(v)).collect();
    witness.sort_unstable();
    Ok(CliqueResult {
        size: witness.len(),
        frequencies: witness.iter().map(|&j| j as f64 * opts.unit).collect(),
        witness,
        exact: !opts.heuristic,
        window: opts.window,
        unit: opts.unit,
        zero_tol: opts.zero_tol,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_system::AffineSystem;

    fn measure(r: f64) -> FractalMeasure {
        FractalMeasure::new(AffineSystem::one_dim(r, &[0.0, 0.5], &[0.0, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn labels() {
        let l: Vec<i64> = (0..5).map(label).collect();
        assert_eq!(l, vec![0, 1, -1, 2, -2]);
    }

    #[test]
    fn odd_scale_has_pairs_only() {
        let r = max_orthogonal_clique(&measure(3.0), &CliqueOptions::new(30)).unwrap();
        assert_eq!(r.size, 2);
        assert_eq!(r.witness, vec![0, 1]);
    }

    #[test]
    fn even_scale_contains_the_spectrum() {
        let r = max_orthogonal_clique(&measure(4.0), &CliqueOptions::new(21)).unwrap();
        assert!(r.size >= 8, "{r:?}");
    }

    #[test]
    fn no_edges_gives_single_vertex() {
        // differences stay below the first zero at t = 1
        let mut o = CliqueOptions::new(3);
        o.zero_tol = 0.0;
        o.unit = 0.1;
        let r = max_orthogonal_clique(&measure(4.0), &o).unwrap();
        assert_eq!(r.edges, 0);
        assert_eq!(r.size, 1);
        assert_eq!(r.witness, vec![0]);
    }

    #[test]
    fn window_limits() {
        assert!(matches!(
            max_orthogonal_clique(&measure(3.0), &CliqueOptions::new(201)),
            Err(Error::Budget { .. })
        ));
        assert!(max_orthogonal_clique(&measure(3.0), &CliqueOptions::new(0)).is_err());
        let mut o = CliqueOptions::new(300);
        o.heuristic = true;
        let r = max_orthogonal_clique(&measure(3.0), &o).unwrap();
        assert!(!r.exact);
        assert_eq!(r.size, 2);
    }

    #[test]
    fn exact_beats_or_matches_greedy() {
        let m = measure(4.0);
        let mut o = CliqueOptions::new(40);
        let exact = max_orthogonal_clique(&m, &o).unwrap();
        o.heuristic = true;
        let greedy = max_orthogonal_clique(&m, &o).unwrap();
        assert!(exact.size >= greedy.size);
    }
}
