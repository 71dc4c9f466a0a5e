//! Tiling by `Omega_n = [0,1) + L_n` with translates `-2 L_n`.

use rayon::prelude::*;
use serde::Serialize;

use crate::affine_system::AffineSystem;
use crate::error::{Error, Result};
use crate::spectrum::enumerate_spectrum;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranslateRule {
    MinusTwoSpectrum,
    MinusSpectrum,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TilingOptions {
    pub depth: usize,
    pub window: (f64, f64),
    pub samples: usize,
    pub rule: TranslateRule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TilingReport {
    pub depth: usize,
    pub requested_window: (f64, f64),
    /// The part of the request covered at this depth; samples live here.
    pub window: (f64, f64),
    pub truncated: bool,
    pub warning: Option<String>,
    pub rule: TranslateRule,
    pub translates: Vec<f64>,
    pub points: Vec<f64>,
    pub multiplicity: Vec<u32>,
    pub min_mult: u32,
    pub max_mult: u32,
}

impl TilingReport {
    pub fn tiles(&self) -> bool {
        self.min_mult == 1 && self.max_mult == 1
    }
}

/// `#{t in T : x - t in Omega}` with `starts` sorted and cells `[s, s+1)`.
fn multiplicity(starts: &[f64], translates: &[f64], x: f64) -> u32 {
    translates
        .iter()
        .filter(|&&t| {
            let y = x - t;
            let i = starts.partition_point(|&s| s <= y);
            i > 0 && y < starts[i - 1] + 1.0
        })
        .count() as u32
}

/// Multiplicity profile at midpoint samples of the window, clipped to the
/// hull `[min L_n + min T, max L_n + 1 + max T)` outside of which the finite
/// truncation cannot cover.
pub fn tiling_multiplicity(sys: &AffineSystem, opts: &TilingOptions) -> Result<TilingReport> {
    if sys.dim() != 1 {
        return Err(Error::Input("tiling check is one-dimensional".into()));
    }
    let (lo, hi) = opts.window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Input("tiling window must be a finite interval lo < hi".into()));
    }
    if opts.samples == 0 {
        return Err(Error::Input("at least one sample is required".into()));
    }
    let starts = enumerate_spectrum(sys, opts.depth)?.values_1d();
    let translates: Vec<f64> = match &opts.rule {
        TranslateRule::MinusTwoSpectrum => starts.iter().map(|l| -2.0 * l).collect(),
        TranslateRule::MinusSpectrum => starts.iter().map(|l| -l).collect(),
        TranslateRule::Custom(t) => t.clone(),
    };
    if translates.is_empty() || translates.iter().any(|t| !t.is_finite()) {
        return Err(Error::Input("translate set must be nonempty and finite".into()));
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, v: &[f64]| v.iter().copied().fold(init, f);
    let safe_lo = starts[0] + fold(f64::min, f64::INFINITY, &translates);
    let safe_hi = starts[starts.len() - 1] + 1.0 + fold(f64::max, f64::NEG_INFINITY, &translates);
    let (wlo, whi) = (lo.max(safe_lo), hi.min(safe_hi));
    if wlo >= whi {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}) misses the covered region [{safe_lo}, {safe_hi})"
        )));
    }
    let truncated = (wlo, whi) != (lo, hi);
    let warning = truncated.then(|| {
        format!(
            "window [{lo}, {hi}) exceeds the depth-{} covered region; shrunk to [{wlo}, {whi})",
            opts.depth
        )
    });
    let h = (whi - wlo) / opts.samples as f64;
    let points: Vec<f64> = (0..opts.samples).map(|i| wlo + (i as f64 + 0.5) * h).collect();
    let mult: Vec<u32> = points
        .par_iter()
        .map(|&x| multiplicity(&starts, &translates, x))
        .collect();
    Ok(TilingReport {
        depth: opts.depth,
        requested_window: (lo, hi),
        window: (wlo, whi),
        truncated,
        warning,
        rule: opts.rule.clone(),
        translates,
        min_mult: mult.iter().copied().min().unwrap_or(0),
        max_mult: mult.iter().copied().max().unwrap_or(0),
        points,
        multiplicity: mult,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(depth: usize, window: (f64, f64), rule: TranslateRule) -> TilingOptions {
        TilingOptions {
            depth,
            window,
            samples: 10_000,
            rule,
        }
    }

    #[test]
    fn depth_one_tiles() {
        let r = tiling_multiplicity(
            &AffineSystem::cantor4(),
            &opts(1, (-10.0, 6.0), TranslateRule::MinusTwoSpectrum),
        )
        .unwrap();
        let mut t = r.translates.clone();
        t.sort_by(f64::total_cmp);
        assert_eq!(t, vec![-10.0, -8.0, -2.0, 0.0]);
        assert!(!r.truncated);
        assert!(r.tiles());
        assert_eq!(r.points.len(), 10_000);
    }

    #[test]
    fn deeper_tilings_and_truncation() {
        for depth in 1..=3 {
            let r = tiling_multiplicity(
                &AffineSystem::cantor4(),
                &opts(depth, (-1000.0, 1000.0), TranslateRule::MinusTwoSpectrum),
            )
            .unwrap();
            let n = 4f64.powi(depth as i32 + 1);
            assert_eq!(r.window, (-2.0 * (n - 1.0) / 3.0, (n - 1.0) / 3.0 + 1.0));
            assert!(r.truncated && r.warning.is_some());
            assert!(r.tiles(), "depth {depth}");
        }
    }

    #[test]
    fn wrong_translates_overlap() {
        let r = tiling_multiplicity(
            &AffineSystem::cantor4(),
            &opts(1, (-10.0, 6.0), TranslateRule::MinusSpectrum),
        )
        .unwrap();
        assert!(r.max_mult >= 2);
        assert!(r.multiplicity.contains(&2));
        // x = 1/2 lies in all four translates
        assert_eq!(multiplicity(&[0.0, 1.0, 4.0, 5.0], &r.translates, 0.5), 4);
    }

    #[test]
    fn single_translate() {
        let r = tiling_multiplicity(
            &AffineSystem::cantor4(),
            &opts(0, (0.0, 2.0), TranslateRule::Custom(vec![0.0])),
        )
        .unwrap();
        assert!(r.tiles());
        assert!(tiling_multiplicity(
            &AffineSystem::cantor4(),
            &opts(0, (5.0, 7.0), TranslateRule::Custom(vec![0.0]))
        )
        .is_err());
    }

    #[test]
    fn half_open_cells() {
        assert_eq!(multiplicity(&[0.0, 1.0], &[0.0], 1.0), 1);
        assert_eq!(multiplicity(&[0.0, 1.0], &[0.0], 2.0), 0);
        assert_eq!(multiplicity(&[0.0, 1.0], &[0.0], -0.0), 1);
    }
}
