//! Inverse branches, itineraries and prepoles.
//!
//! The branch `f⁻¹_n` takes values in the half-open strip
//! `L_n = [(n - 1/2)π, (n + 1/2)π)`. Compositions follow the itinerary
//! order `(n_1, ..., n_p)`: `f⁻¹_{n_1}` is applied first.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dynamics::{self, pole, ComplexPoint, Parameter};
use crate::error::{Error, Result};

/// Distance to `±λ i` below which inverse branches are refused.
pub const BRANCH_TOL: f64 = 1e-9;

/// Sequence of branch indices `(n_1, ..., n_p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Itinerary(Vec<i64>);

impl Itinerary {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("itinerary must be non-empty".into()));
        }
        Ok(Itinerary(entries))
    }

    /// The empty itinerary of the order-0 prepole `∞`.
    pub fn empty() -> Self {
        Itinerary(Vec::new())
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn head(&self) -> Option<i64> {
        self.0.first().copied()
    }

    /// `(-n_1 - 1, -n_2, ..., -n_p)`: the itinerary of the negated prepole.
    ///
    /// The head names a pole and `-s_n = s_{-n-1}`; the remaining entries name
    /// strips and `-L_n` is `L_{-n}` up to its boundary line.
    pub fn mirrored(&self) -> Itinerary {
        Itinerary(
            self.0
                .iter()
                .enumerate()
                .map(|(i, n)| if i == 0 { -n - 1 } else { -n })
                .collect(),
        )
    }

    /// `(k, n_1, ..., n_p)`.
    pub fn prepend(&self, k: i64) -> Itinerary {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(k);
        v.extend_from_slice(&self.0);
        Itinerary(v)
    }

    /// `(n_2, ..., n_p)`, or `None` when that would be empty.
    pub fn tail(&self) -> Option<Itinerary> {
        (self.0.len() > 1).then(|| Itinerary(self.0[1..].to_vec()))
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl FromStr for Itinerary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::InvalidInput(format!("bad itinerary entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Itinerary::new(entries)
    }
}

/// A point mapped to `∞` in exactly `order` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepole {
    pub point: ComplexPoint,
    pub order: usize,
    pub itinerary: Itinerary,
    /// `|f^{order-1}(point) - s_{n_1}|` (zero for orders 0 and 1).
    pub forward_residual: f64,
}

impl Prepole {
    pub fn infinity() -> Self {
        Prepole {
            point: ComplexPoint::Infinity,
            order: 0,
            itinerary: Itinerary::empty(),
            forward_residual: 0.0,
        }
    }

    pub fn finite_point(&self) -> Option<Complex64> {
        match self.point {
            ComplexPoint::Finite(z) => Some(z),
            ComplexPoint::Infinity => None,
        }
    }
}

/// Index `n` of the strip `L_n` containing real part `x`.
pub fn strip_index(x: f64) -> i64 {
    (x / PI + 0.5).floor() as i64
}

fn strip_bounds(n: i64) -> (f64, f64) {
    ((n as f64 - 0.5) * PI, (n as f64 + 0.5) * PI)
}

fn check_asymptotic(lambda: Parameter, z: Complex64, depth: usize) -> Result<()> {
    let v = lambda.asymptotic_value();
    if (z - v).norm() < BRANCH_TOL || (z + v).norm() < BRANCH_TOL {
        return Err(Error::AsymptoticValueInput { z, depth });
    }
    Ok(())
}

fn branch_unchecked(n: i64, lambda: Complex64, z: Complex64) -> Complex64 {
    let (a, b) = (lambda.re, lambda.im);
    let (x, y) = (z.re, z.im);

    let num = 2.0 * (a * x + b * y);
    let den = lambda.norm_sqr() - z.norm_sqr();
    let mut theta = 0.5 * num.atan2(den);
    if theta >= FRAC_PI_2 {
        // atan2 returned π: move to the closed edge of the strip.
        theta = -FRAC_PI_2;
    }
    let (lo, hi) = strip_bounds(n);
    let mut re = n as f64 * PI + theta;
    if re < lo {
        re = lo;
    }
    if re >= hi {
        re = hi.next_down();
    }

    // Im w = 1/4 ln(|λ - iz|^2 / |λ + iz|^2), written with ln_1p because
    // |λ - iz|^2 - |λ + iz|^2 = 4 (a y - b x).
    let plus_sq = (a - y) * (a - y) + (b + x) * (b + x);
    let im = 0.25 * (4.0 * (a * y - b * x) / plus_sq).ln_1p();

    Complex64::new(re, im)
}

/// The branch `f⁻¹_{n,λ}(z)` with real part in `L_n`.
pub fn inverse_branch(n: i64, lambda: Parameter, z: impl Into<ComplexPoint>) -> Result<Complex64> {
    let z = z.into().finite()?;
    check_asymptotic(lambda, z, 0)?;
    Ok(branch_unchecked(n, lambda.value(), z))
}

/// `f⁻¹_n(∞) = s_n`.
pub fn inverse_branch_at_infinity(n: i64) -> Complex64 {
    Complex64::new(pole(n), 0.0)
}

/// `f⁻¹_{n_p} ∘ ... ∘ f⁻¹_{n_1}(z)`. Errors carry the 0-based position of the
/// failing branch in the itinerary.
pub fn compose_inverse(itin: &Itinerary, lambda: Parameter, z: impl Into<ComplexPoint>) -> Result<Complex64> {
    let mut w = z.into().finite()?;
    for (depth, &n) in itin.entries().iter().enumerate() {
        check_asymptotic(lambda, w, depth)?;
        w = branch_unchecked(n, lambda.value(), w);
    }
    Ok(w)
}

/// The prepole `f⁻¹_{n_p} ∘ ... ∘ f⁻¹_{n_2}(s_{n_1})` of order `p`.
pub fn prepole(itin: &Itinerary, lambda: Parameter) -> Result<Prepole> {
    let Some(head) = itin.head() else {
        return Ok(Prepole::infinity());
    };
    let s = inverse_branch_at_infinity(head);
    let mut w = s;
    for (i, &n) in itin.entries()[1..].iter().enumerate() {
        check_asymptotic(lambda, w, i + 1)?;
        w = branch_unchecked(n, lambda.value(), w);
    }
    let forward_residual = if itin.len() > 1 {
        dynamics::iterate_n(lambda, w, itin.len() - 1)
            .map(|v| (v - s).norm())
            .unwrap_or(f64::INFINITY)
    } else {
        0.0
    };
    Ok(Prepole {
        point: ComplexPoint::Finite(w),
        order: itin.len(),
        itinerary: itin.clone(),
        forward_residual,
    })
}

/// Result of [`enumerate_prepoles`].
#[derive(Debug, Clone, Default)]
pub struct PrepoleEnumeration {
    pub prepoles: Vec<Prepole>,
    /// Itineraries that ran into an omitted value.
    pub skipped: Vec<(Itinerary, Error)>,
}

/// All prepoles of order `p` with entries in `[-bound, bound]`, in
/// lexicographic itinerary order.
pub fn enumerate_prepoles(p: usize, bound: u32, lambda: Parameter) -> PrepoleEnumeration {
    let mut out = PrepoleEnumeration::default();
    if p == 0 {
        out.prepoles.push(Prepole::infinity());
        return out;
    }
    let b = bound as i64;
    let mut entries = vec![-b; p];
    loop {
        let itin = Itinerary(entries.clone());
        match prepole(&itin, lambda) {
            Ok(v) => out.prepoles.push(v),
            Err(e) => out.skipped.push((itin, e)),
        }
        // odometer increment, last entry fastest
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if entries[i] < b {
                entries[i] += 1;
                break;
            }
            entries[i] = -b;
        }
    }
}

/// Recover the itinerary of a prepole of the given order from its forward orbit.
pub fn recover_itinerary(lambda: Parameter, point: Complex64, order: usize) -> Result<Itinerary> {
    if order == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    let mut strips = Vec::with_capacity(order);
    let mut z = point;
    for _ in 0..order - 1 {
        strips.push(strip_index(z.re));
        z = dynamics::eval_f(lambda, z)?;
    }
    let (head, _) = dynamics::nearest_pole(z);
    let mut entries = vec![head];
    entries.extend(strips.iter().rev());
    Itinerary::new(entries)
}
