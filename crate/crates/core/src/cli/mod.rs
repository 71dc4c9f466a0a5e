//! The `fracspec` command line. Every run writes one artifact (JSON or CSV)
//! embedding the resolved configuration and the validation report of the
//! system it ran on; identical configurations give byte-identical artifacts.
//!
//! Exit status: 0 success / certified / evidence positive, 2 computed but
//! negative, 1 failed to compute.

pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::affine_system::{parse_rational, validate, AffineSystem, Rational, SystemFile, ValidationOptions};
use crate::error::{Error, Result};
use crate::measure::{FractalMeasure, DEFAULT_MAX_PRODUCT_DEPTH, DEFAULT_PRODUCT_TAIL_TOL};
use crate::ruelle::{basis_certificate, contraction_probe, default_hull, default_nodes, estimate_gamma, invariant_box};
use crate::spectrum::{
    completeness_scan, enumerate_spectrum, orthogonality_matrix, CompletenessOptions, CompletenessStatus, Grid,
    CONVERGENCE_INCREMENT, DEFAULT_MAX_SCAN_DEPTH,
};
use crate::verify::dichotomy::{dichotomy_system, DEFAULT_CLASSIFY_WINDOW};
use crate::verify::{
    clique::ZERO_TOL, dim_one_classify, hardy_roundtrip, max_orthogonal_clique, scaling_sweep, tiling_multiplicity,
    CliqueOptions, DichotomyOptions, TilingOptions, TranslateRule,
};
use output::{render_csv, render_json, Cell, Envelope, Table, SCHEMA_VERSION};

const ENV_HELP: &str = "\
Environment:
  RAYON_NUM_THREADS   worker threads for grid evaluation (default: all cores);
                      results do not depend on it

Exit status:
  0  success, certified, or evidence consistent with the prediction
  2  computed, negative verdict (not certified, incomplete, overlap, ...)
  1  error (bad input, parse failure, budget exceeded)";

#[derive(Debug, Parser)]
#[command(name = "fracspec", version, about = "Spectral analysis of self-similar measures", after_help = ENV_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// System file (JSON with d, R, B, L; rationals as "p/q" strings)
    #[arg(long, global = true)]
    pub system: Option<PathBuf>,
    /// Depth; meaning depends on the command (see each command's help)
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Grid `a:b:step`, the same on every axis, or one spec per axis separated by commas
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Tolerance; meaning depends on the command
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for every random stream
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compatibility, Hadamard and expansiveness checks. --tol: integrality (1e-9); --depth: powers tested (12)
    Validate,
    /// mu_hat on a grid. --grid: default unit cell; --tol: product tail (1e-12); --depth: max factors (256)
    Fourier,
    /// Candidate spectrum L_n. --depth: n (4)
    Spectrum,
    /// |mu_hat(lambda - lambda')| over the spectrum. --depth: n (4); --tol: pass threshold (1e-10)
    Orthogonality,
    /// Q_n scan with increasing n. --grid: default unit cell; --depth: max n (12); --tol: increment (1e-4)
    Completeness {
        #[arg(long, default_value_t = 0.99)]
        target: f64,
        #[arg(long, default_value_t = 0)]
        start_depth: usize,
    },
    /// Explicit gamma bound plus seeded contraction probes. --tol: probe slack (1e-6)
    RuelleBound {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Grid nodes per axis (default 1024 in 1-d, 128 in 2-d, 32 otherwise)
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Basis certificate from the contraction criterion
    Certify,
    /// Odd/even dichotomy for d=1, B={0,a}. --tol: orthogonality zero (1e-9)
    Classify {
        #[arg(long = "R", allow_hyphen_values = true)]
        r: i64,
        /// Digit a, rational ("1/2") or decimal
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// Frequency l of L={0,l} (default 1/(2a))
        #[arg(long, allow_hyphen_values = true)]
        l: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_WINDOW)]
        window: usize,
    },
    /// Exact maximum orthogonal set among frequencies j*unit, |j| <= window. --tol: zero (1e-9)
    Clique {
        /// With --a, use the system R, B={0,a}, L={0,1/(2a)} and unit 1/(2a)
        #[arg(long = "R", allow_hyphen_values = true)]
        r: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_WINDOW)]
        window: usize,
        /// Greedy search (allowed beyond window 200)
        #[arg(long)]
        heuristic: bool,
    },
    /// Certificates for the scaled systems (rR, B, L), r = 1..r_max
    Sweep {
        #[arg(long, default_value_t = 16)]
        r_max: u32,
    },
    /// Multiplicity of the translates of [0,1) + L_n (default system R=4, B={0,1/2}, L={0,1}). --depth: n (1)
    Tiling {
        #[arg(long, allow_hyphen_values = true, default_value = "-10:6")]
        window: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// minus-two-spectrum, minus-spectrum, or a comma-separated list
        #[arg(long, allow_hyphen_values = true, default_value = "minus-two-spectrum")]
        translates: String,
    },
    /// Expansion round-trip by quadrature. --depth: spectrum n (1); --tol: pass threshold (1e-6)
    Hardy {
        /// Atomic approximation depth
        #[arg(long = "K", default_value_t = 10)]
        k: usize,
        /// `lambda:re:im`, lambda comma-separated in d>1; default: seeded
        /// uniform [-1,1] coefficients on the whole spectrum
        #[arg(long, allow_hyphen_values = true)]
        coeff: Vec<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Fourier => "fourier",
            Command::Spectrum => "spectrum",
            Command::Orthogonality => "orthogonality",
            Command::Completeness { .. } => "completeness",
            Command::RuelleBound { .. } => "ruelle-bound",
            Command::Certify => "certify",
            Command::Classify { .. } => "classify",
            Command::Clique { .. } => "clique",
            Command::Sweep { .. } => "sweep",
            Command::Tiling { .. } => "tiling",
            Command::Hardy { .. } => "hardy",
        }
    }
}

/// A finished computation before rendering.
struct Outcome {
    result: Value,
    table: Table,
    status: u8,
}

struct Context {
    params: BTreeMap<String, Value>,
    warnings: Vec<String>,
    system: Option<AffineSystem>,
}

impl Context {
    fn param(&mut self, key: &str, value: impl Serialize) {
        self.params
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    fn system(&self) -> Result<&AffineSystem> {
        self.system
            .as_ref()
            .ok_or_else(|| Error::Input("this command needs --system <file>".into()))
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Input(format!("{name} must be positive and finite, got {x}")))
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let r = parse_rational(s.trim())?;
    r.to_f64().ok_or_else(|| Error::Parse(format!("{s:?} is out of range")))
}

fn parse_grid(spec: &str, dim: usize) -> Result<Grid> {
    let axes: Vec<&str> = spec.split(',').collect();
    let parse_axis = |s: &str| -> Result<(f64, f64, f64)> {
        let p: Vec<&str> = s.split(':').collect();
        if p.len() != 3 {
            return Err(Error::Parse(format!("grid axis {s:?} is not a:b:step")));
        }
        Ok((parse_f64(p[0])?, parse_f64(p[1])?, parse_f64(p[2])?))
    };
    let parsed = axes.iter().map(|s| parse_axis(s)).collect::<Result<Vec<_>>>()?;
    let parsed = match parsed.len() {
        1 => vec![parsed[0]; dim],
        n if n == dim => parsed,
        n => return Err(Error::Input(format!("grid has {n} axes, system has dimension {dim}"))),
    };
    Grid::new(
        parsed.iter().map(|a| a.0).collect(),
        parsed.iter().map(|a| a.1).collect(),
        parsed.iter().map(|a| a.2).collect(),
    )
}

fn point_headers(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=dim).map(|i| format!("{prefix}{i}")).collect()
    }
}

fn with_headers(mut lead: Vec<String>, rest: &[&str]) -> Table {
    lead.extend(rest.iter().map(|s| s.to_string()));
    Table {
        headers: lead,
        rows: Vec::new(),
    }
}

fn floats(v: &[f64]) -> Vec<Cell> {
    v.iter().map(|&x| Cell::F(x)).collect()
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn default_hull_measure(sys: &AffineSystem) -> Result<FractalMeasure> {
    FractalMeasure::new(sys.clone())
}

fn run_command(cmd: &Command, g: &GlobalArgs, ctx: &mut Context) -> Result<Outcome> {
    if let Some(t) = g.tol {
        positive("--tol", t)?;
    }
    match cmd {
        Command::Validate => {
            let sys = ctx.system()?.clone();
            let opts = ValidationOptions {
                n_max: g.depth.unwrap_or(12) as u32,
                integrality_tol: g.tol.unwrap_or(ValidationOptions::default().integrality_tol),
                ..Default::default()
            };
            ctx.param("n_max", opts.n_max);
            ctx.param("integrality_tol", opts.integrality_tol);
            let rep = validate(&sys, &opts)?;
            let result = to_value(&rep);
            Ok(Outcome {
                table: Table::fields(&result),
                result,
                status: if rep.is_valid() { 0 } else { 2 },
            })
        }
        Command::Fourier => {
            let sys = ctx.system()?.clone();
            let grid = match &g.grid {
                Some(s) => parse_grid(s, sys.dim())?,
                None => Grid::unit_cell(sys.dim()),
            };
            let tol = g.tol.unwrap_or(DEFAULT_PRODUCT_TAIL_TOL);
            let max_depth = g.depth.unwrap_or(DEFAULT_MAX_PRODUCT_DEPTH);
            ctx.param("grid", &grid);
            ctx.param("tail_tol", tol);
            ctx.param("max_depth", max_depth);
            let m = default_hull_measure(&sys)?.with_product_limits(tol, max_depth)?;
            let points = grid.points();
            let values = points.iter().map(|t| m.fourier(t)).collect::<Result<Vec<_>>>()?;
            let mut table = with_headers(point_headers("t", sys.dim()), &["re", "im", "abs", "tail_bound"]);
            let mut rows = Vec::new();
            for (t, v) in points.iter().zip(&values) {
                let mut row = floats(t.as_slice());
                row.extend(floats(&[v.value.re, v.value.im, v.value.norm(), v.tail_bound]));
                table.rows.push(row);
                rows.push(json!({
                    "t": t.as_slice(), "re": v.value.re, "im": v.value.im,
                    "abs": v.value.norm(), "tail_bound": v.tail_bound, "depth": v.depth,
                }));
            }
            Ok(Outcome {
                result: json!({ "points": rows }),
                table,
                status: 0,
            })
        }
        Command::Spectrum => {
            let sys = ctx.system()?.clone();
            let depth = g.depth.unwrap_or(4);
            ctx.param("depth", depth);
            let s = enumerate_spectrum(&sys, depth)?;
            let mut table = with_headers(vec!["index".into()], &[]);
            table.headers.extend(point_headers("lambda", sys.dim()));
            let elements: Vec<Vec<f64>> = s.elements().iter().map(|e| e.as_slice().to_vec()).collect();
            for (i, e) in elements.iter().enumerate() {
                let mut row = vec![Cell::I(i as i64)];
                row.extend(floats(e));
                table.rows.push(row);
            }
            Ok(Outcome {
                result: json!({ "depth": depth, "size": s.len(), "elements": elements }),
                table,
                status: 0,
            })
        }
        Command::Orthogonality => {
            let sys = ctx.system()?.clone();
            let depth = g.depth.unwrap_or(4);
            let tol = g.tol.unwrap_or(1e-10);
            ctx.param("depth", depth);
            ctx.param("tol", tol);
            let m = FractalMeasure::new(sys.clone())?;
            let s = enumerate_spectrum(&sys, depth)?;
            let table_o = orthogonality_matrix(&m, &s)?;
            let mut table = Table::new(&["i", "j", "re", "im", "abs"]);
            let mut entries = Vec::with_capacity(table_o.entries.len());
            for e in &table_o.entries {
                let (re, im, abs) = (e.value.re, e.value.im, e.value.norm());
                table.rows.push(vec![
                    Cell::I(e.i as i64),
                    Cell::I(e.j as i64),
                    Cell::F(re),
                    Cell::F(im),
                    Cell::F(abs),
                ]);
                entries.push(json!({"i": e.i, "j": e.j, "re": re, "im": im, "abs": abs}));
            }
            let ok = table_o.is_orthogonal(tol);
            Ok(Outcome {
                result: json!({
                    "depth": depth, "size": s.len(), "pairs": table_o.entries.len(),
                    "max_offdiag": table_o.max_offdiag, "orthogonal": ok, "entries": entries,
                }),
                table,
                status: if ok { 0 } else { 2 },
            })
        }
        Command::Completeness { target, start_depth } => {
            let sys = ctx.system()?.clone();
            let grid = match &g.grid {
                Some(s) => parse_grid(s, sys.dim())?,
                None => Grid::unit_cell(sys.dim()),
            };
            positive("--target", *target)?;
            let mut opts = CompletenessOptions::new(grid, *target);
            opts.start_depth = *start_depth;
            opts.max_depth = g.depth.unwrap_or(DEFAULT_MAX_SCAN_DEPTH);
            opts.increment_tol = g.tol.unwrap_or(CONVERGENCE_INCREMENT);
            ctx.param("grid", &opts.grid);
            ctx.param("target", opts.target);
            ctx.param("start_depth", opts.start_depth);
            ctx.param("max_depth", opts.max_depth);
            ctx.param("increment_tol", opts.increment_tol);
            let m = FractalMeasure::new(sys.clone())?;
            let rep = completeness_scan(&m, &opts)?;
            let mut table = with_headers(point_headers("t", sys.dim()), &["q"]);
            for (p, q) in rep.points.iter().zip(&rep.values) {
                let mut row = floats(p);
                row.push(Cell::F(*q));
                table.rows.push(row);
            }
            let ok = rep.status == CompletenessStatus::Complete && rep.bessel_ok;
            Ok(Outcome {
                result: to_value(&rep),
                table,
                status: if ok { 0 } else { 2 },
            })
        }
        Command::RuelleBound { trials, nodes } => {
            let sys = ctx.system()?.clone();
            let slack = g.tol.unwrap_or(1e-6);
            let n = nodes.unwrap_or_else(|| default_nodes(sys.dim()));
            ctx.param("trials", trials);
            ctx.param("nodes", n);
            ctx.param("slack", slack);
            ctx.param("seed", g.seed);
            FractalMeasure::new(sys.clone())?;
            let domain = invariant_box(&sys, &default_hull(&sys)?)?;
            let est = estimate_gamma(&sys, &domain)?;
            let probe = contraction_probe(&sys, &domain, &vec![n; sys.dim()], *trials, g.seed)?;
            let mut table = Table::new(&["trial", "ratio"]);
            for (i, r) in probe.ratios.iter().enumerate() {
                table.rows.push(vec![Cell::I(i as i64), Cell::F(*r)]);
            }
            let within = probe.max_ratio <= est.gamma_bound + slack;
            let ok = within && est.gamma_bound < 1.0;
            Ok(Outcome {
                result: json!({
                    "domain": to_value(&domain), "estimate": to_value(&est), "probe": to_value(&probe),
                    "probes_within_bound": within, "gamma_below_one": est.gamma_bound < 1.0,
                }),
                table,
                status: if ok { 0 } else { 2 },
            })
        }
        Command::Certify => {
            let sys = ctx.system()?.clone();
            let result = match FractalMeasure::new(sys.clone()) {
                Ok(m) => to_value(basis_certificate(&m, &default_hull(&sys)?)?),
                // a measure that cannot be built is a negative verdict, not a failure
                Err(e @ (Error::Validation(_) | Error::NotExpansive { .. })) => json!({
                    "basis_certified": false, "failures": [e.to_string()],
                }),
                Err(e) => return Err(e),
            };
            let ok = result["basis_certified"] == Value::Bool(true);
            Ok(Outcome {
                table: Table::fields(&result),
                result,
                status: if ok { 0 } else { 2 },
            })
        }
        Command::Classify { r, a, l, window } => {
            let a_exact = parse_rational(a)?;
            let l_exact = l.as_deref().map(parse_rational).transpose()?;
            let opts = DichotomyOptions {
                window: *window,
                zero_tol: g.tol.unwrap_or(ZERO_TOL),
                frequency: l_exact.clone(),
            };
            ctx.param("R", r);
            ctx.param("a", a_exact.to_string());
            ctx.param("l", l_exact.as_ref().map(|x| x.to_string()));
            ctx.param("window", window);
            ctx.param("zero_tol", opts.zero_tol);
            let verdict = dim_one_classify(*r, &a_exact, &opts)?;
            let l_used = l_exact.unwrap_or_else(|| (Rational::from_integer(2.into()) * &a_exact).recip());
            ctx.system = Some(dichotomy_system(*r, &a_exact, &l_used)?);
            let result = to_value(&verdict);
            Ok(Outcome {
                table: Table::fields(&result),
                result,
                status: if verdict.consistent == Some(false) { 2 } else { 0 },
            })
        }
        Command::Clique {
            r,
            a,
            window,
            heuristic,
        } => {
            let mut opts = CliqueOptions::new(*window);
            opts.zero_tol = g.tol.unwrap_or(ZERO_TOL);
            opts.heuristic = *heuristic;
            match (r, a) {
                (Some(r), Some(a)) => {
                    let a_exact = parse_rational(a)?;
                    let l = (Rational::from_integer(2.into()) * &a_exact).recip();
                    opts.unit = l.to_f64().unwrap_or(f64::NAN);
                    ctx.param("R", r);
                    ctx.param("a", a_exact.to_string());
                    ctx.system = Some(dichotomy_system(*r, &a_exact, &l)?);
                }
                (None, None) => {}
                _ => return Err(Error::Input("--R and --a go together".into())),
            }
            ctx.param("window", opts.window);
            ctx.param("zero_tol", opts.zero_tol);
            ctx.param("unit", opts.unit);
            ctx.param("heuristic", opts.heuristic);
            let m = FractalMeasure::new(ctx.system()?.clone())?;
            let res = max_orthogonal_clique(&m, &opts)?;
            let mut table = Table::new(&["label", "frequency"]);
            for (j, f) in res.witness.iter().zip(&res.frequencies) {
                table.rows.push(vec![Cell::I(*j), Cell::F(*f)]);
            }
            Ok(Outcome {
                result: to_value(&res),
                table,
                status: 0,
            })
        }
        Command::Sweep { r_max } => {
            let sys = ctx.system()?.clone();
            ctx.param("r_max", r_max);
            let rep = scaling_sweep(&sys, *r_max)?;
            let mut table = Table::new(&["r", "gamma_bound", "certified"]);
            for e in &rep.entries {
                table.rows.push(vec![
                    Cell::I(e.r as i64),
                    Cell::F(e.gamma_bound),
                    Cell::S(e.certified.to_string()),
                ]);
            }
            Ok(Outcome {
                status: if rep.smallest_certified.is_some() { 0 } else { 2 },
                result: to_value(&rep),
                table,
            })
        }
        Command::Tiling {
            window,
            samples,
            translates,
        } => {
            if ctx.system.is_none() {
                ctx.system = Some(AffineSystem::cantor4());
            }
            let sys = ctx.system()?.clone();
            let w: Vec<f64> = window.split(':').map(parse_f64).collect::<Result<_>>()?;
            if w.len() != 2 {
                return Err(Error::Parse(format!("window {window:?} is not lo:hi")));
            }
            let rule = match translates.as_str() {
                "minus-two-spectrum" => TranslateRule::MinusTwoSpectrum,
                "minus-spectrum" => TranslateRule::MinusSpectrum,
                list => TranslateRule::Custom(list.split(',').map(parse_f64).collect::<Result<_>>()?),
            };
            let opts = TilingOptions {
                depth: g.depth.unwrap_or(1),
                window: (w[0], w[1]),
                samples: *samples,
                rule,
            };
            ctx.param("depth", opts.depth);
            ctx.param("window", opts.window);
            ctx.param("samples", opts.samples);
            ctx.param("translates", &opts.rule);
            let rep = tiling_multiplicity(&sys, &opts)?;
            if let Some(w) = &rep.warning {
                ctx.warnings.push(w.clone());
            }
            let mut table = Table::new(&["x", "multiplicity"]);
            for (x, k) in rep.points.iter().zip(&rep.multiplicity) {
                table.rows.push(vec![Cell::F(*x), Cell::I(*k as i64)]);
            }
            let mut result = to_value(&rep);
            result["tiles"] = Value::Bool(rep.tiles());
            Ok(Outcome {
                status: if rep.tiles() { 0 } else { 2 },
                result,
                table,
            })
        }
        Command::Hardy { k, coeff } => {
            let sys = ctx.system()?.clone();
            let depth = g.depth.unwrap_or(1);
            let tol = g.tol.unwrap_or(1e-6);
            let m = FractalMeasure::new(sys.clone())?;
            let s = enumerate_spectrum(&sys, depth)?;
            let coeffs: Vec<(DVector<f64>, Complex64)> = if coeff.is_empty() {
                let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
                s.elements()
                    .iter()
                    .map(|l| {
                        let c = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
                        (l.clone(), c)
                    })
                    .collect()
            } else {
                coeff.iter().map(|c| parse_coeff(c, sys.dim())).collect::<Result<_>>()?
            };
            ctx.param("depth", depth);
            ctx.param("K", k);
            ctx.param("tol", tol);
            ctx.param("seed", g.seed);
            ctx.param("coeff", coeff);
            let rep = hardy_roundtrip(&m, &s, &coeffs, *k)?;
            let mut table = with_headers(
                point_headers("lambda", sys.dim()),
                &["re", "im", "recovered_re", "recovered_im", "error"],
            );
            for c in &rep.coefficients {
                let mut row = floats(&c.lambda);
                row.extend(floats(&[c.re, c.im, c.recovered_re, c.recovered_im, c.error]));
                table.rows.push(row);
            }
            let ok = rep.recon_error <= tol && rep.parseval_defect <= tol;
            Ok(Outcome {
                result: to_value(&rep),
                table,
                status: if ok { 0 } else { 2 },
            })
        }
    }
}

fn parse_coeff(s: &str, dim: usize) -> Result<(DVector<f64>, Complex64)> {
    let p: Vec<&str> = s.split(':').collect();
    if p.len() != 3 {
        return Err(Error::Parse(format!("coefficient {s:?} is not lambda:re:im")));
    }
    let lambda: Vec<f64> = p[0].split(',').map(parse_f64).collect::<Result<_>>()?;
    if lambda.len() != dim {
        return Err(Error::Input(format!("coefficient {s:?} has the wrong dimension")));
    }
    Ok((
        DVector::from_vec(lambda),
        Complex64::new(parse_f64(p[1])?, parse_f64(p[2])?),
    ))
}

/// Runs a parsed command and returns the rendered artifact with its exit status.
pub fn execute(cli: &Cli) -> Result<(String, u8)> {
    let mut ctx = Context {
        params: BTreeMap::new(),
        warnings: Vec::new(),
        system: None,
    };
    if let Some(path) = &cli.global.system {
        let file = SystemFile::load(path)?;
        ctx.warnings.extend(file.warnings);
        ctx.system = Some(file.system);
    }
    let outcome = run_command(&cli.command, &cli.global, &mut ctx)?;
    let (system, validation) = match &ctx.system {
        Some(sys) => (
            Some(sys.to_json()),
            Some(to_value(validate(sys, &ValidationOptions::default())?)),
        ),
        None => (None, None),
    };
    // the output path is where the artifact goes, not part of the computation
    let config = json!({
        "command": cli.command.name(),
        "system": cli.global.system.as_ref().map(|p| p.display().to_string()),
        "seed": cli.global.seed,
        "format": cli.global.format,
        "params": ctx.params,
    });
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        command: cli.command.name().to_string(),
        config,
        system,
        validation,
        warnings: ctx.warnings,
        exit_status: outcome.status,
    };
    let text = match cli.global.format {
        Format::Json => render_json(&envelope, &outcome.result)?,
        Format::Csv => render_csv(&envelope, &outcome.table),
    };
    Ok((text, outcome.status))
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok((text, status)) => {
            let written = match &cli.global.out {
                Some(path) => fs::write(path, &text),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
