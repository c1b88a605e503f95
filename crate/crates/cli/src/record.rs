//! Tab-separated output records.
//!
//! A record is one line of fields. Parsing is driven by a schema, since
//! `2` could equally be an integer or a real.

use std::fmt;

use num_complex::Complex64;
use tandyn::{format_complex, parse_complex, text::format_real, Itinerary};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(i64),
    Real(f64),
    Complex(Complex64),
    /// A point that may be `∞`, written `inf`.
    Point(Option<Complex64>),
    Word(String),
    Itinerary(Itinerary),
    /// A comma-separated list of complex numbers.
    Points(Vec<Complex64>),
    /// Placeholder for a value that does not exist, written `-`.
    Missing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Int,
    Real,
    Complex,
    Point,
    Word,
    Itinerary,
    Points,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Int(n) => write!(f, "{n}"),
            Field::Real(x) => f.write_str(&format_real(*x)),
            Field::Complex(z) => f.write_str(&format_complex(*z)),
            Field::Point(Some(z)) => f.write_str(&format_complex(*z)),
            Field::Point(None) => f.write_str("inf"),
            Field::Word(w) => f.write_str(w),
            Field::Itinerary(it) => write!(f, "{it}"),
            Field::Points(zs) => {
                let parts: Vec<String> = zs.iter().map(|z| format_complex(*z)).collect();
                f.write_str(&parts.join(","))
            }
            Field::Missing => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn parse_field(text: &str, kind: FieldKind) -> Result<Field, ParseError> {
    let bad = |what: &str| ParseError(format!("cannot parse {text:?} as {what}"));
    if text == "-" {
        return Ok(Field::Missing);
    }
    Ok(match kind {
        FieldKind::Int => Field::Int(text.parse().map_err(|_| bad("integer"))?),
        FieldKind::Real => {
            let x: f64 = text.parse().map_err(|_| bad("real"))?;
            Field::Real(x)
        }
        FieldKind::Complex => Field::Complex(parse_complex(text).map_err(|_| bad("complex"))?),
        FieldKind::Point if text == "inf" => Field::Point(None),
        FieldKind::Point => Field::Point(Some(parse_complex(text).map_err(|_| bad("point"))?)),
        FieldKind::Word => {
            if text.is_empty() || text.contains(['\t', '\n']) {
                return Err(bad("word"));
            }
            Field::Word(text.to_string())
        }
        FieldKind::Itinerary => Field::Itinerary(text.parse().map_err(|_| bad("itinerary"))?),
        FieldKind::Points => Field::Points(
            text.split(',')
                .map(|t| parse_complex(t).map_err(|_| bad("point list")))
                .collect::<Result<_, _>>()?,
        ),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record(pub Vec<Field>);

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, field) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\t")?;
            }
            write!(f, "{field}")?;
        }
        Ok(())
    }
}

impl Record {
    pub fn parse(line: &str, schema: &[FieldKind]) -> Result<Record, ParseError> {
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != schema.len() {
            return Err(ParseError(format!(
                "expected {} fields, found {}",
                schema.len(),
                parts.len()
            )));
        }
        parts
            .into_iter()
            .zip(schema)
            .map(|(t, &k)| parse_field(t, k))
            .collect::<Result<_, _>>()
            .map(Record)
    }
}

/// Field layouts of the records each subcommand prints.
pub mod schema {
    use super::FieldKind::*;
    use super::FieldKind;

    /// period, kind, multiplier
    pub const CLASSIFY: &[FieldKind] = &[Int, Word, Complex];
    /// step, point
    pub const ORBIT: &[FieldKind] = &[Int, Point];
    /// itinerary, point, forward residual
    pub const PREPOLE: &[FieldKind] = &[Itinerary, Point, Real];
    /// period, stability, multiplier, residual, points
    pub const CYCLE: &[FieldKind] = &[Int, Word, Complex, Real, Points];
    /// λ*, residual, pole index
    pub const CENTER: &[FieldKind] = &[Complex, Real, Int];
    /// r, alpha, λ, multiplier
    pub const RAY: &[FieldKind] = &[Real, Real, Complex, Complex];
    /// output path, cols, rows
    pub const RENDER: &[FieldKind] = &[Word, Int, Int];
    /// check name, PASS or FAIL, detail
    pub const SELFTEST: &[FieldKind] = &[Word, Word, Word];
}
