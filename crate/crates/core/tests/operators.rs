//! Cross-module identities and the verification sweeps.

use nalgebra::DVector;
use num_complex::Complex64;

use fracspec::ruelle::{apply_ruelle_with, default_hull, GridFunction};
use fracspec::spectrum::{enumerate_spectrum, q_partial};
use fracspec::verify::{
    dim_one_classify, hardy_roundtrip, max_orthogonal_clique, tiling_multiplicity, CliqueOptions, DichotomyOptions,
    Prediction, TilingOptions, TranslateRule,
};
use fracspec::{AffineSystem, FractalMeasure, Rational};

fn measure(r: f64) -> FractalMeasure {
    FractalMeasure::new(AffineSystem::one_dim(r, &[0.0, 0.5], &[0.0, 1.0]).unwrap()).unwrap()
}

/// `L_{n+1} = L + R^T L_n` and compatibility give `C Q_n = Q_{n+1}` exactly.
#[test]
fn ruelle_maps_partial_sums_forward() {
    let sys = AffineSystem::cantor4();
    let m = FractalMeasure::new(sys.clone()).unwrap();
    let hull = default_hull(&sys).unwrap();
    let mut prev_defect = f64::INFINITY;
    for n in 0..4 {
        let s = enumerate_spectrum(&sys, n).unwrap();
        let next = enumerate_spectrum(&sys, n + 1).unwrap();
        let cq = apply_ruelle_with(&sys, hull.clone(), vec![65], |y| {
            q_partial(&m, &s, &DVector::from_column_slice(y))
        })
        .unwrap();
        let q_next = GridFunction::from_fn(hull.clone(), vec![65], |y| {
            q_partial(&m, &next, &DVector::from_column_slice(y)).unwrap()
        })
        .unwrap();
        let q_now = GridFunction::from_fn(hull.clone(), vec![65], |y| {
            q_partial(&m, &s, &DVector::from_column_slice(y)).unwrap()
        })
        .unwrap();
        assert!(cq.sup_distance(&q_next) < 1e-12, "depth {n}");
        let defect = cq.sup_distance(&q_now);
        assert!(defect <= prev_defect + 1e-15, "depth {n}: {defect} > {prev_defect}");
        prev_defect = defect;
    }
}

#[test]
fn clique_is_monotone_in_window_and_tolerance() {
    let m = measure(4.0);
    let mut prev = 0;
    for w in [4, 8, 16, 24] {
        let size = max_orthogonal_clique(&m, &CliqueOptions::new(w)).unwrap().size;
        assert!(size >= prev);
        prev = size;
    }
    let mut prev = 0;
    for tol in [0.0, 1e-9, 1e-3, 0.1, 0.5] {
        let mut o = CliqueOptions::new(12);
        o.zero_tol = tol;
        let size = max_orthogonal_clique(&m, &o).unwrap().size;
        assert!(size >= prev, "tol {tol}");
        prev = size;
    }
}

#[test]
fn odd_scales_stay_at_two() {
    for r in [3.0, 5.0, 7.0] {
        let res = max_orthogonal_clique(&measure(r), &CliqueOptions::new(60)).unwrap();
        assert!(res.size <= 2, "R={r}: {res:?}");
    }
}

#[test]
fn even_scales_grow_with_the_spectrum() {
    for r in [4i64, 6, 8] {
        let sys = AffineSystem::one_dim(r as f64, &[0.0, 0.5], &[0.0, 1.0]).unwrap();
        let m = FractalMeasure::new(sys.clone()).unwrap();
        let spectrum = enumerate_spectrum(&sys, 4).unwrap().values_1d();
        let mut prev = 0;
        for w in [8usize, 20, 40] {
            let size = max_orthogonal_clique(&m, &CliqueOptions::new(w)).unwrap().size;
            let in_window = spectrum.iter().filter(|&&l| l <= w as f64 && l >= 0.0).count();
            assert!(size >= in_window, "R={r} M={w}: {size} < {in_window}");
            assert!(size >= prev);
            prev = size;
        }
    }
}

#[test]
fn classify_follows_the_dichotomy() {
    let half = Rational::new(1.into(), 2.into());
    for r in [3, 5, -3] {
        let v = dim_one_classify(r, &half, &DichotomyOptions::default()).unwrap();
        assert_eq!(v.predicted, Prediction::NoBasis);
        assert_eq!(v.consistent, Some(true), "R={r}");
    }
    for r in [4, 6, -4] {
        let v = dim_one_classify(r, &half, &DichotomyOptions::default()).unwrap();
        assert_eq!(v.predicted, Prediction::Basis);
        assert!(v.evidence.completeness_min_q().unwrap() >= 0.99, "R={r}");
        assert_eq!(v.consistent, Some(true), "R={r}");
    }
}

#[test]
fn tiling_holds_through_depth_three() {
    for depth in 1..=3 {
        let r = tiling_multiplicity(
            &AffineSystem::cantor4(),
            &TilingOptions {
                depth,
                window: (-1e6, 1e6),
                samples: 20_000,
                rule: TranslateRule::MinusTwoSpectrum,
            },
        )
        .unwrap();
        assert!(r.tiles(), "depth {depth}: [{}, {}]", r.min_mult, r.max_mult);
    }
}

#[test]
fn hardy_error_does_not_grow_with_depth() {
    let sys = AffineSystem::cantor4();
    let m = FractalMeasure::new(sys.clone()).unwrap();
    let s = enumerate_spectrum(&sys, 2).unwrap();
    let coeffs: Vec<(DVector<f64>, Complex64)> = s
        .elements()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), Complex64::new(1.0 / (i + 1) as f64, (i as f64).sin())))
        .collect();
    let floor = 1e-13;
    let mut prev = f64::INFINITY;
    for k in [2, 4, 6, 8, 10] {
        let e = hardy_roundtrip(&m, &s, &coeffs, k).unwrap().recon_error;
        assert!(e <= prev.max(floor), "K={k}: {e} > {prev}");
        prev = e;
    }
    assert!(prev < 1e-12);
}
