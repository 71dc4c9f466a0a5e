//! Expansion round-trip `f = sum c_lambda e_lambda`, coefficients recovered by
//! quadrature against the atomic approximation.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{atomic_approximation, FractalMeasure};
use crate::numeric::{cis_turns, dot};
use crate::spectrum::{SpectrumEnumeration, DEDUP_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub lambda: Vec<f64>,
    pub re: f64,
    pub im: f64,
    pub recovered_re: f64,
    pub recovered_im: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyReport {
    pub depth: usize,
    pub recon_error: f64,
    /// `|sum |c|^2 - ||f||^2|` in `L^2` of the atomic measure.
    pub parseval_defect: f64,
    pub coefficient_norm2: f64,
    pub function_norm2: f64,
    pub coefficients: Vec<CoefficientCheck>,
}

pub fn hardy_roundtrip(
    m: &FractalMeasure,
    s: &SpectrumEnumeration,
    coeffs: &[(DVector<f64>, Complex64)],
    depth: usize,
) -> Result<HardyReport> {
    let d = m.system().dim();
    for (lambda, c) in coeffs {
        if lambda.len() != d {
            return Err(Error::Input("coefficient frequency has the wrong dimension".into()));
        }
        if !s.contains(lambda, DEDUP_TOL) {
            return Err(Error::Input(format!(
                "coefficient frequency {:?} is not in the spectrum",
                lambda.as_slice()
            )));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Input("coefficients must be finite".into()));
        }
    }
    let atoms = atomic_approximation(m, depth)?;
    let f: Vec<Complex64> = (0..atoms.len())
        .into_par_iter()
        .map(|i| {
            let x = atoms.point(i);
            coeffs.iter().map(|(l, c)| c * cis_turns(dot(l.as_slice(), x))).sum()
        })
        .collect();
    let w = atoms.weight();
    let function_norm2 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() * w;
    let coefficients: Vec<CoefficientCheck> = coeffs
        .par_iter()
        .map(|(l, c)| {
            let rec: Complex64 = f
                .iter()
                .enumerate()
                .map(|(i, v)| v * cis_turns(-dot(l.as_slice(), atoms.point(i))))
                .sum::<Complex64>()
                * w;
            CoefficientCheck {
                lambda: l.as_slice().to_vec(),
                re: c.re,
                im: c.im,
                recovered_re: rec.re,
                recovered_im: rec.im,
                error: (rec - c).norm(),
            }
        })
        .collect();
    let coefficient_norm2: f64 = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum();
    Ok(HardyReport {
        depth,
        recon_error: coefficients.iter().map(|c| c.error).fold(0.0, f64::max),
        parseval_defect: (coefficient_norm2 - function_norm2).abs(),
        coefficient_norm2,
        function_norm2,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_system::AffineSystem;
    use crate::spectrum::enumerate_spectrum;

    fn setup() -> (FractalMeasure, SpectrumEnumeration) {
        let sys = AffineSystem::cantor4();
        let s = enumerate_spectrum(&sys, 2).unwrap();
        (FractalMeasure::new(sys).unwrap(), s)
    }

    fn at(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn constant_function() {
        let (m, s) = setup();
        let r = hardy_roundtrip(&m, &s, &[(at(0.0), Complex64::new(1.0, 0.0))], 6).unwrap();
        assert!(r.recon_error < 1e-14);
        assert!(r.parseval_defect < 1e-14);
    }

    #[test]
    fn zero_coefficients() {
        let (m, s) = setup();
        let zero = Complex64::new(0.0, 0.0);
        let r = hardy_roundtrip(&m, &s, &[(at(1.0), zero), (at(4.0), zero)], 6).unwrap();
        assert_eq!(r.recon_error, 0.0);
        assert_eq!(r.parseval_defect, 0.0);
        assert!(hardy_roundtrip(&m, &s, &[], 4).unwrap().coefficients.is_empty());
    }

    #[test]
    fn four_terms() {
        let (m, s) = setup();
        let c = [
            (at(0.0), Complex64::new(1.0, 0.5)),
            (at(1.0), Complex64::new(-0.25, 2.0)),
            (at(4.0), Complex64::new(0.0, -1.0)),
            (at(5.0), Complex64::new(3.0, 0.0)),
        ];
        let r = hardy_roundtrip(&m, &s, &c, 10).unwrap();
        assert!(r.recon_error <= 1e-6);
        assert!(r.parseval_defect <= 1e-6);
        assert!(hardy_roundtrip(&m, &s, &[(at(2.0), Complex64::new(1.0, 0.0))], 4).is_err());
    }
}
