//! Evaluation of `f(z) = λ tan z`, forward orbits and parameter derivatives.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::cycles::{self, Cycle};
use crate::error::{Error, Result};

/// Distance to a pole below which an orbit is considered to have hit it.
pub const POLE_TOL: f64 = 1e-9;
/// `|Im z|` above which `tan` is evaluated in the factored `e^{-2|y|}` form.
pub const Y_SWITCH: f64 = 20.0;
/// Near-return tolerance used to propose a period before Newton confirms it.
pub const CYCLE_TOL: f64 = 1e-8;
/// Largest period scanned for near-returns.
pub const MAX_PERIOD: usize = 64;
/// Points with `|Im z|` beyond this map straight to the asymptotic value.
pub const IM_CLAMP: f64 = 1e8;

/// Best near-return (relative) that triggers a one-time budget extension.
const NEAR_RETURN_HINT: f64 = 1e-3;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComplexPoint {
    Finite(Complex64),
    Infinity,
}

impl ComplexPoint {
    pub fn finite(self) -> Result<Complex64> {
        match self {
            ComplexPoint::Finite(z) => Ok(z),
            ComplexPoint::Infinity => Err(Error::InfinityInput),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ComplexPoint::Infinity)
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        ComplexPoint::Finite(z)
    }
}

impl From<f64> for ComplexPoint {
    fn from(x: f64) -> Self {
        ComplexPoint::Finite(Complex64::new(x, 0.0))
    }
}

impl fmt::Display for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexPoint::Finite(z) => write!(f, "{z}"),
            ComplexPoint::Infinity => f.write_str("inf"),
        }
    }
}

/// The family parameter λ, always finite and nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameter(Complex64);

impl Parameter {
    pub fn new(lambda: Complex64) -> Result<Self> {
        if !lambda.re.is_finite() || !lambda.im.is_finite() || lambda == Complex64::new(0.0, 0.0)
        {
            return Err(Error::InvalidParameter(lambda));
        }
        Ok(Parameter(lambda))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// The asymptotic value `λ i`; its negative is the other one.
    pub fn asymptotic_value(self) -> Complex64 {
        self.0 * I
    }

    pub fn neg(self) -> Self {
        Parameter(-self.0)
    }

    pub fn conj(self) -> Self {
        Parameter(self.0.conj())
    }
}

impl TryFrom<Complex64> for Parameter {
    type Error = Error;

    fn try_from(lambda: Complex64) -> Result<Self> {
        Parameter::new(lambda)
    }
}

/// Outcome of following a forward orbit.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitOutcome {
    /// The orbit converged to an attracting cycle; `steps` is the orbit index
    /// at which the capture was confirmed.
    Attracted { cycle: Cycle, steps: usize },
    /// The orbit point with index `step` lies within [`POLE_TOL`] of `s_pole_index`.
    PrepoleHit { step: usize, pole_index: i64 },
    /// Neither a cycle nor a pole was found within the budget.
    Undetermined { last_point: Complex64 },
}

impl OrbitOutcome {
    pub fn period(&self) -> Option<usize> {
        match self {
            OrbitOutcome::Attracted { cycle, .. } => Some(cycle.period),
            _ => None,
        }
    }

    pub fn cycle(&self) -> Option<&Cycle> {
        match self {
            OrbitOutcome::Attracted { cycle, .. } => Some(cycle),
            _ => None,
        }
    }
}

/// The pole `s_n = (n + 1/2) π`.
#[inline]
pub fn pole(n: i64) -> f64 {
    (n as f64 + 0.5) * PI
}

/// Pole index minimising `|z - s_n|` together with that distance.
///
/// Equidistant candidates resolve toward smaller `|n|`, then smaller `n`.
pub fn nearest_pole(z: Complex64) -> (i64, f64) {
    let guess = (z.re / PI - 0.5).round();
    let guess = if guess.is_finite() {
        guess.clamp(-(1i64 << 52) as f64, (1i64 << 52) as f64) as i64
    } else {
        0
    };
    let mut best = (guess, f64::INFINITY);
    for n in [guess - 1, guess, guess + 1] {
        let d = (z.re - pole(n)).hypot(z.im);
        let better = d < best.1
            || (d == best.1
                && (n.unsigned_abs() < best.0.unsigned_abs()
                    || (n.unsigned_abs() == best.0.unsigned_abs() && n < best.0)));
        if better {
            best = (n, d);
        }
    }
    best
}

/// `tan z` in the two-real-component form, switching to the factored
/// `e^{-2|y|}` form for `|Im z| > Y_SWITCH`. No pole check.
#[inline]
pub fn tan_stable(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    if y.abs() > Y_SWITCH {
        // tan(x+iy) = (2t sin 2x + i sgn(y) (1 - t^2)) / (1 + 2t cos 2x + t^2), t = e^{-2|y|}
        let t = (-2.0 * y.abs()).exp();
        let (s2, c2) = (2.0 * x).sin_cos();
        let den = 1.0 + t * (2.0 * c2 + t);
        Complex64::new(2.0 * t * s2 / den, y.signum() * (1.0 - t * t) / den)
    } else {
        // (sin 2x + i sinh 2y) / (cos 2x + cosh 2y) with numerator and
        // denominator halved: cos 2x + cosh 2y = 2 (cos^2 x + sinh^2 y).
        let (sx, cx) = x.sin_cos();
        let (sh, ch) = (y.sinh(), y.cosh());
        let den = cx * cx + sh * sh;
        Complex64::new(sx * cx / den, sh * ch / den)
    }
}

/// `sec^2 z`, accurate in relative terms both near poles and for large `|Im z|`.
#[inline]
pub fn sec2_stable(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    if y.abs() > Y_SWITCH {
        // sec^2 z = 4w / (1 + w)^2 with w = e^{2i z} (y > 0) or e^{-2i z} (y < 0).
        let mag = (-2.0 * y.abs()).exp();
        let w = Complex64::from_polar(mag, 2.0 * x * y.signum());
        let one_w = Complex64::new(1.0, 0.0) + w;
        w * 4.0 / (one_w * one_w)
    } else {
        let (sx, cx) = x.sin_cos();
        let cos_z = Complex64::new(cx * y.cosh(), -sx * y.sinh());
        (cos_z * cos_z).inv()
    }
}

fn check_pole(z: Complex64) -> Result<()> {
    let (n, d) = nearest_pole(z);
    if d < POLE_TOL {
        return Err(Error::PoleProximity { z, pole_index: n });
    }
    Ok(())
}

/// One step of the map without the pole check.
#[inline]
pub(crate) fn apply(lambda: Complex64, z: Complex64) -> Complex64 {
    if z.im.abs() > IM_CLAMP {
        return lambda * Complex64::new(0.0, z.im.signum());
    }
    lambda * tan_stable(z)
}

#[inline]
pub(crate) fn apply_prime(lambda: Complex64, z: Complex64) -> Complex64 {
    if z.im.abs() > IM_CLAMP {
        return Complex64::new(0.0, 0.0);
    }
    lambda * sec2_stable(z)
}

/// `f_λ(z) = λ tan z`.
pub fn eval_f(lambda: Parameter, z: impl Into<ComplexPoint>) -> Result<Complex64> {
    let z = z.into().finite()?;
    check_pole(z)?;
    Ok(apply(lambda.value(), z))
}

/// `f_λ'(z) = λ sec^2 z`.
pub fn eval_f_prime(lambda: Parameter, z: impl Into<ComplexPoint>) -> Result<Complex64> {
    let z = z.into().finite()?;
    check_pole(z)?;
    Ok(apply_prime(lambda.value(), z))
}

/// `f_λ^n(z)` with pole checks along the way.
pub fn iterate_n(lambda: Parameter, z: Complex64, n: usize) -> Result<Complex64> {
    let mut z = z;
    for _ in 0..n {
        z = eval_f(lambda, z)?;
    }
    Ok(z)
}

/// Knobs for [`iterate_orbit_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSettings {
    pub max_iter: usize,
    pub max_period: usize,
    /// Double the budget once if the orbit is close to returning when it runs out.
    pub extend_once: bool,
}

impl OrbitSettings {
    pub fn with_budget(max_iter: usize) -> Self {
        OrbitSettings {
            max_iter,
            max_period: MAX_PERIOD,
            extend_once: false,
        }
    }
}

/// Follow the orbit of `z0` for at most `max_iter` steps.
pub fn iterate_orbit(lambda: Parameter, z0: Complex64, max_iter: usize) -> OrbitOutcome {
    iterate_orbit_with(lambda, z0, &OrbitSettings::with_budget(max_iter), None)
}

/// As [`iterate_orbit`], also returning the visited points `z_0, z_1, ...`.
pub fn iterate_orbit_traced(
    lambda: Parameter,
    z0: Complex64,
    max_iter: usize,
) -> (OrbitOutcome, Vec<Complex64>) {
    let mut trace = Vec::new();
    let outcome = iterate_orbit_with(
        lambda,
        z0,
        &OrbitSettings::with_budget(max_iter),
        Some(&mut trace),
    );
    (outcome, trace)
}

#[inline]
fn scale(z: Complex64) -> f64 {
    z.norm().max(1.0)
}

/// Orbit scan: Brent-style anchors at steps 1, 2, 4, ... up to `max_period`,
/// then every `max_period` steps, so every period up to `max_period` shows up
/// as a near-return to the current anchor.
pub fn iterate_orbit_with(
    lambda: Parameter,
    z0: Complex64,
    settings: &OrbitSettings,
    mut trace: Option<&mut Vec<Complex64>>,
) -> OrbitOutcome {
    let lam = lambda.value();
    let max_period = settings.max_period.max(1);
    let mut budget = settings.max_iter;
    let mut extended = false;

    let mut z = z0;
    let mut anchor = z0;
    let mut anchor_step = 0usize;
    let mut next_checkpoint = 1usize;
    let mut best_return = f64::INFINITY;
    let mut last_window_best = f64::INFINITY;
    let mut attempted_this_window = false;
    let mut k = 0usize;
    loop {
        if let Some(t) = trace.as_deref_mut() {
            t.push(z);
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return OrbitOutcome::Undetermined { last_point: z };
        }
        let (n, d) = nearest_pole(z);
        if d < POLE_TOL {
            return OrbitOutcome::PrepoleHit {
                step: k,
                pole_index: n,
            };
        }
        if k > 0 {
            let rel = (z - anchor).norm() / scale(anchor);
            best_return = best_return.min(rel);
            let q = k - anchor_step;
            if rel < CYCLE_TOL && q <= max_period && !attempted_this_window {
                attempted_this_window = true;
                if let Ok(cycle) = cycles::refine_cycle_newton(lambda, z, q) {
                    let attracting = cycle.multiplier.norm() < 1.0 - cycles::CLASS_TOL;
                    let near = cycle
                        .points
                        .iter()
                        .any(|&w| (w - z).norm() < 1e-6 * scale(z));
                    if attracting && near {
                        return OrbitOutcome::Attracted { cycle, steps: k };
                    }
                }
            }
            if k == next_checkpoint {
                anchor = z;
                anchor_step = k;
                next_checkpoint = if k < max_period { 2 * k } else { k + max_period };
                attempted_this_window = false;
                last_window_best = best_return;
                best_return = f64::INFINITY;
            }
        }
        if k >= budget {
            if settings.extend_once
                && !extended
                && best_return.min(last_window_best) < NEAR_RETURN_HINT
            {
                extended = true;
                budget *= 2;
            } else {
                return OrbitOutcome::Undetermined { last_point: z };
            }
        }
        z = apply(lam, z);
        k += 1;
    }
}

/// `d z_k / dλ` for `k = 0..=steps` along the orbit `z_0 = λ i`.
pub fn orbit_derivative_wrt_lambda(lambda: Parameter, steps: usize) -> Result<Vec<Complex64>> {
    Ok(orbit_with_lambda_derivative(lambda, steps)?
        .into_iter()
        .map(|(_, dz)| dz)
        .collect())
}

/// Pairs `(z_k, dz_k/dλ)` for `k = 0..=steps` along the orbit of `λ i`.
pub fn orbit_with_lambda_derivative(
    lambda: Parameter,
    steps: usize,
) -> Result<Vec<(Complex64, Complex64)>> {
    let lam = lambda.value();
    let mut z = lambda.asymptotic_value();
    let mut dz = I;
    let mut out = Vec::with_capacity(steps + 1);
    out.push((z, dz));
    for _ in 0..steps {
        check_pole(z)?;
        let t = if z.im.abs() > IM_CLAMP {
            Complex64::new(0.0, z.im.signum())
        } else {
            tan_stable(z)
        };
        dz = t + apply_prime(lam, z) * dz;
        z = lam * t;
        out.push((z, dz));
    }
    Ok(out)
}
