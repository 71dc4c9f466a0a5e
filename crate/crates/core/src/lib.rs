//! Self-similar measures built from affine iteration systems `(R, B, L)`.
//!
//! The crate constructs the invariant measure of the contractions
//! `x -> R^{-1} x + b`, enumerates the candidate frequency set generated by
//! `l -> R^T l`, and decides numerically whether the exponentials indexed by
//! that set form an orthogonal basis of `L^2(mu)`. The decision is backed by
//! two independent routes: direct evaluation of the completeness function
//! `Q(t) = sum |mu_hat(t - lambda)|^2`, and a Lipschitz contraction bound for
//! the Ruelle transfer operator.
//!
//! Modules:
//! - [`affine_system`]: the triple, its validation and the JSON input format.
//! - [`measure`]: Fourier transform by infinite product, atoms, moments, sampling.
//! - [`spectrum`]: candidate spectrum, orthogonality, completeness scans.
//! - [`ruelle`]: the transfer operator on grids and the basis certificate.
//! - [`verify`]: theorem-level checks (parity dichotomy, scaling, tiling, Hardy expansion).
//! - [`cli`]: the `fracspec` command-line front end.

pub mod affine_system;
pub mod cli;
pub mod error;
pub mod measure;
pub mod numeric;
pub mod ruelle;
pub mod spectrum;
pub mod verify;

pub use affine_system::{AffineSystem, Rational, ValidationReport};
pub use error::{Error, Result};
pub use measure::{AtomicApproximation, FourierValue, FractalMeasure};
pub use ruelle::{AxisBox, ContractionReport, GridFunction};
pub use spectrum::SpectrumEnumeration;
