//! JSON system files.
//!
//! ```json
//! { "d": 1, "R": [[4]], "B": [["0"], ["1/2"]], "L": [[0], [1]], "r": 1 }
//! ```
//!
//! Entries may be JSON integers, strings holding `p/q`, integers or decimals
//! (parsed exactly), or JSON floats. Non-integer JSON floats are accepted with
//! a warning, since `0.1` and friends are not the rationals they look like.
//! For `d = 1` scalars may stand in for one-element vectors and for `R`.

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::{self, Deserialize, Deserializer, SeqAccess, Visitor};
use serde_json::{json, Value};

use super::{AffineSystem, Rational};
use crate::error::{Error, Result};

/// Parses `p/q`, an integer, or a plain decimal (`-1.25`, `3e-2`) exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let shift = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if shift >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Ok(if neg { -value } else { value })
}

#[derive(Debug, Clone)]
struct Scalar {
    value: Rational,
    /// Came from a non-integer JSON float literal.
    inexact_literal: bool,
}

#[derive(Debug, Clone)]
enum Shaped {
    Scalar(Scalar),
    List(Vec<Shaped>),
}

impl<'de> Deserialize<'de> for Shaped {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ShapedVisitor;

        impl<'de> Visitor<'de> for ShapedVisitor {
            type Value = Shaped;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, a rational string like \"1/2\", or a list")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Shaped, E> {
                Ok(Shaped::Scalar(Scalar {
                    value: Rational::from_integer(v.into()),
                    inexact_literal: false,
                }))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Shaped, E> {
                Ok(Shaped::Scalar(Scalar {
                    value: Rational::from_integer(v.into()),
                    inexact_literal: false,
                }))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Shaped, E> {
                let value = Rational::from_float(v).ok_or_else(|| E::custom(format!("non-finite number {v}")))?;
                Ok(Shaped::Scalar(Scalar {
                    inexact_literal: v.fract() != 0.0,
                    value,
                }))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Shaped, E> {
                let value = parse_rational(v).map_err(|e| E::custom(e.to_string()))?;
                Ok(Shaped::Scalar(Scalar {
                    value,
                    inexact_literal: false,
                }))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Shaped, A::Error> {
                let mut items = Vec::new();
                while let Some(item) = seq.next_element::<Shaped>()? {
                    items.push(item);
                }
                Ok(Shaped::List(items))
            }
        }

        deserializer.deserialize_any(ShapedVisitor)
    }
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    d: usize,
    #[serde(rename = "R")]
    matrix: Shaped,
    #[serde(rename = "B")]
    digits: Shaped,
    #[serde(rename = "L")]
    frequencies: Shaped,
    #[serde(default)]
    r: Option<u32>,
}

/// A parsed system file together with any non-fatal warnings.
#[derive(Debug, Clone)]
pub struct SystemFile {
    pub system: AffineSystem,
    pub warnings: Vec<String>,
}

struct Collector<'a> {
    warnings: &'a mut Vec<String>,
}

impl Collector<'_> {
    fn scalar(&mut self, s: &Shaped, path: &str) -> Result<Rational> {
        match s {
            Shaped::Scalar(x) => {
                if x.inexact_literal {
                    self.warnings.push(format!(
                        "{path}: decimal literal taken as the binary double {}; write it as a string like \"1/2\" for an exact value",
                        x.value
                    ));
                }
                Ok(x.value.clone())
            }
            Shaped::List(_) => Err(Error::Parse(format!("{path}: expected a number, found a list"))),
        }
    }

    fn vector(&mut self, s: &Shaped, d: usize, path: &str) -> Result<Vec<Rational>> {
        match s {
            Shaped::Scalar(_) if d == 1 => Ok(vec![self.scalar(s, path)?]),
            Shaped::Scalar(_) => Err(Error::Parse(format!("{path}: expected a list of {d} coordinates"))),
            Shaped::List(items) => {
                if items.len() != d {
                    return Err(Error::Parse(format!(
                        "{path}: expected {d} coordinates, found {}",
                        items.len()
                    )));
                }
                items
                    .iter()
                    .enumerate()
                    .map(|(i, x)| self.scalar(x, &format!("{path}[{i}]")))
                    .collect()
            }
        }
    }

    fn set(&mut self, s: &Shaped, d: usize, name: &str) -> Result<Vec<Vec<Rational>>> {
        match s {
            Shaped::List(items) => items
                .iter()
                .enumerate()
                .map(|(i, x)| self.vector(x, d, &format!("{name}[{i}]")))
                .collect(),
            Shaped::Scalar(_) => Err(Error::Parse(format!("{name}: expected a list of vectors"))),
        }
    }

    fn matrix(&mut self, s: &Shaped, d: usize) -> Result<Vec<Rational>> {
        match s {
            Shaped::Scalar(_) if d == 1 => Ok(vec![self.scalar(s, "R")?]),
            Shaped::Scalar(_) => Err(Error::Parse(format!("R: expected a {d}x{d} matrix"))),
            Shaped::List(rows) if rows.iter().all(|r| matches!(r, Shaped::List(_))) => {
                if rows.len() != d {
                    return Err(Error::Parse(format!("R: expected {d} rows, found {}", rows.len())));
                }
                let mut out = Vec::with_capacity(d * d);
                for (i, row) in rows.iter().enumerate() {
                    out.extend(self.vector(row, d, &format!("R[{i}]"))?);
                }
                Ok(out)
            }
            Shaped::List(flat) => {
                if flat.len() != d * d {
                    return Err(Error::Parse(format!(
                        "R: expected {} row-major entries, found {}",
                        d * d,
                        flat.len()
                    )));
                }
                flat.iter()
                    .enumerate()
                    .map(|(i, x)| self.scalar(x, &format!("R[{}][{}]", i / d, i % d)))
                    .collect()
            }
        }
    }
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawSystem = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.d == 0 {
            return Err(Error::Parse("d: dimension must be positive".into()));
        }
        let mut warnings = Vec::new();
        let mut c = Collector {
            warnings: &mut warnings,
        };
        let matrix = c.matrix(&raw.matrix, raw.d)?;
        let digits = c.set(&raw.digits, raw.d, "B")?;
        let frequencies = c.set(&raw.frequencies, raw.d, "L")?;
        let mut system = AffineSystem::from_rationals(raw.d, matrix, digits, frequencies)?;
        if let Some(r) = raw.r {
            system = system.scale_system(r)?;
        }
        Ok(Self { system, warnings })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

fn rational_str(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// The system in file form, entries as exact rational strings.
pub fn to_json(sys: &AffineSystem) -> Value {
    let d = sys.dim();
    let m = sys.base_matrix_exact();
    let rows: Vec<Vec<String>> = (0..d)
        .map(|i| (0..d).map(|j| rational_str(&m[i * d + j])).collect())
        .collect();
    let set = |it: &mut dyn Iterator<Item = &[Rational]>| -> Vec<Vec<String>> {
        it.map(|v| v.iter().map(rational_str).collect()).collect()
    };
    json!({
        "d": d,
        "R": rows,
        "B": set(&mut sys.digits_exact()),
        "L": set(&mut sys.frequencies_exact()),
        "r": sys.scale(),
    })
}

impl AffineSystem {
    pub fn to_json(&self) -> Value {
        to_json(self)
    }
}
