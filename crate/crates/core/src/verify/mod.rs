//! Theorem-level checks: the odd/even dichotomy, scaling, the tiling example
//! and the expansion round-trip.

pub mod clique;
pub mod dichotomy;
pub mod hardy;
pub mod tiling;

use rayon::prelude::*;
use serde::Serialize;

pub use clique::{max_orthogonal_clique, CliqueOptions, CliqueResult};
pub use dichotomy::{dim_one_classify, DichotomyOptions, DichotomyVerdict, Prediction};
pub use hardy::{hardy_roundtrip, HardyReport};
pub use tiling::{tiling_multiplicity, TilingOptions, TilingReport, TranslateRule};

use crate::affine_system::AffineSystem;
use crate::error::{Error, Result};
use crate::measure::FractalMeasure;
use crate::ruelle::certify;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub r: u32,
    pub gamma_bound: f64,
    pub certified: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub smallest_certified: Option<u32>,
}

/// Certificates for `(rR, B, L)`, `r = 1..=r_max`.
pub fn scaling_sweep(sys: &AffineSystem, r_max: u32) -> Result<SweepReport> {
    if r_max == 0 {
        return Err(Error::Input("r_max must be at least 1".into()));
    }
    let entries = (1..=r_max)
        .into_par_iter()
        .map(|r| {
            let m = FractalMeasure::new(sys.scale_system(r)?)?;
            let c = certify(&m)?;
            Ok(SweepEntry {
                r,
                gamma_bound: c.gamma_bound,
                certified: c.basis_certified,
                failures: c.failures,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let smallest_certified = entries.iter().find(|e| e.certified).map(|e| e.r);
    Ok(SweepReport {
        entries,
        smallest_certified,
    })
}
