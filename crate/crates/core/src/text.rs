//! Text forms of numbers: `a+bi` complex literals, shortest round-trip reals.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shortest decimal that parses back to `x`, in exponent form when
/// `|x| < 1e-5` or `|x| >= 1e16`. Negative zero prints as `0`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// `a+bi` or `a-bi`.
pub fn format_complex(z: Complex64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let sign = if im.is_sign_negative() { "-" } else { "+" };
    format!("{}{}{}i", format_real(z.re), sign, format_real(im.abs()))
}

fn parse_real(s: &str, whole: &str) -> Result<f64> {
    let bad = || Error::InvalidInput(format!("cannot parse complex number {whole:?}"));
    if s.is_empty() || s.contains(char::is_whitespace) {
        return Err(bad());
    }
    let v: f64 = s.parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Parse `a+bi`, `a-bi`, `a`, `bi`, `i` or `-i`, with optional exponents.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse complex number {s:?}"));
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(parse_real(t, s)?, 0.0));
    };
    // The imaginary part starts at the last sign that is not leading and not
    // part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k], s)?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        digits => parse_real(digits, s)?,
    };
    if re.is_nan() || im.is_nan() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn formats() {
        assert_eq!(format_complex(c(0.5, 0.0)), "0.5+0i");
        assert_eq!(format_complex(c(0.0, std::f64::consts::FRAC_PI_2)), "0+1.5707963267948966i");
        assert_eq!(format_complex(c(-0.0, -0.0)), "0+0i");
        assert_eq!(format_complex(c(1.0, -2.0)), "1-2i");
        assert_eq!(format_complex(c(1e-7, 3e20)), "1e-7+3e20i");
    }

    #[test]
    fn parses() {
        assert_eq!(parse_complex("0.5+0i").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex("-2").unwrap(), c(-2.0, 0.0));
        assert_eq!(parse_complex("1.5i").unwrap(), c(0.0, 1.5));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1-i").unwrap(), c(1.0, -1.0));
        assert_eq!(parse_complex("1e-3-2.5E+4i").unwrap(), c(1e-3, -2.5e4));
        assert_eq!(parse_complex("-1e-3+1e-3i").unwrap(), c(-1e-3, 1e-3));
        for bad in ["", "x", "1+", "1++2i", "nan", "inf+1i", "1 + 2i", "i1"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn round_trips() {
        for z in [c(0.1, -0.2), c(1.0 / 3.0, 1e300), c(-5e-324, 7.0), c(123456.789, -1e-6)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }
}
