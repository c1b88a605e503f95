//! The parameter plane: hyperbolic components, the eigenvalue map, internal
//! rays, virtual centers and bud points.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::cycles::{refine_cycle_newton, Cycle};
use crate::dynamics::{
    self, iterate_orbit_with, orbit_with_lambda_derivative, tan_stable, OrbitOutcome,
    OrbitSettings, Parameter,
};
use crate::error::{Error, Result};
use crate::inverse::{self, Itinerary};

/// Iteration budget per asymptotic orbit.
pub const DEFAULT_BUDGET: usize = 2000;
/// Relative tolerance for deciding that two limit cycles are the same set.
pub const SET_MATCH_TOL: f64 = 1e-6;
/// Radius ratio between consecutive ray samples.
pub const RAY_RATIO: f64 = 0.9;
/// Step for the central difference of the eigenvalue map.
pub const FD_STEP: f64 = 1e-7;
/// Defining residual accepted for a virtual center.
pub const CENTER_TOL: f64 = 1e-10;

/// On `|ln(m / target)|`.
const RAY_NEWTON_TOL: f64 = 1e-11;
const RAY_NEWTON_STEPS: usize = 40;
const RAY_MIN_STEP: f64 = 1e-9;
const ANGLE_STEP: f64 = 0.01;
const TRACK_JUMP: f64 = 0.25;
const CENTER_MAX_ITERS: usize = 200;
const CENTER_NEWTON_STEPS: usize = 60;
const BOUNDARY_NEWTON_STEPS: usize = 100;
const BUD_RADIUS: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    /// Two attracting cycles of period `p`, negatives of each other.
    TwoCycles,
    /// One symmetric attracting cycle of period `2p`.
    SingleDoubled,
    /// The punctured unit disk: `0` is an attracting fixed point.
    UnitDisk,
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComponentKind::TwoCycles => "TwoCycles",
            ComponentKind::SingleDoubled => "SingleDoubled",
            ComponentKind::UnitDisk => "UnitDisk",
        })
    }
}

impl FromStr for ComponentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TwoCycles" => Ok(ComponentKind::TwoCycles),
            "SingleDoubled" => Ok(ComponentKind::SingleDoubled),
            "UnitDisk" => Ok(ComponentKind::UnitDisk),
            other => Err(Error::InvalidInput(format!("unknown component kind {other:?}"))),
        }
    }
}

/// A parameter known to lie in a hyperbolic component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSample {
    pub lambda: Parameter,
    /// `p` in the component name; the attracting cycle has period `2p` for
    /// [`ComponentKind::SingleDoubled`].
    pub period: usize,
    pub kind: ComponentKind,
    /// Multiplier of the attracting cycle, over its full period.
    pub multiplier: Complex64,
    /// The cycle attracting the orbit of `λ i`.
    pub cycle: Cycle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Hyperbolic(ComponentSample),
    /// No attracting cycle was confirmed. `prepole_hit` is set when the
    /// asymptotic orbit landed on a pole, so `λ` is a virtual-center candidate.
    Undetermined { prepole_hit: bool },
}

impl Classification {
    pub fn sample(&self) -> Option<&ComponentSample> {
        match self {
            Classification::Hyperbolic(s) => Some(s),
            Classification::Undetermined { .. } => None,
        }
    }

    pub fn period(&self) -> Option<usize> {
        self.sample().map(|s| s.period)
    }

    pub fn kind(&self) -> Option<ComponentKind> {
        self.sample().map(|s| s.kind)
    }
}

/// Classify `λ` by following its asymptotic orbits. The orbit of `-λ i` is
/// the negation of the orbit of `λ i`, so its limit cycle is the negated cycle.
pub fn classify_parameter(lambda: Parameter, budget: usize) -> Classification {
    let settings = OrbitSettings {
        max_iter: budget,
        max_period: dynamics::MAX_PERIOD,
        extend_once: true,
    };
    match iterate_orbit_with(lambda, lambda.asymptotic_value(), &settings, None) {
        OrbitOutcome::Attracted { cycle, .. } => Classification::Hyperbolic(sample_from(lambda, cycle)),
        OrbitOutcome::PrepoleHit { .. } => Classification::Undetermined { prepole_hit: true },
        OrbitOutcome::Undetermined { .. } => Classification::Undetermined { prepole_hit: false },
    }
}

fn sample_from(lambda: Parameter, cycle: Cycle) -> ComponentSample {
    let multiplier = cycle.multiplier;
    let (kind, period) = if cycle.period == 1 && cycle.points[0].norm() < SET_MATCH_TOL {
        (ComponentKind::UnitDisk, 1)
    } else if cycle.period.is_multiple_of(2) && cycle.same_set(&cycle.negated(), SET_MATCH_TOL) {
        (ComponentKind::SingleDoubled, cycle.period / 2)
    } else {
        (ComponentKind::TwoCycles, cycle.period)
    };
    ComponentSample {
        lambda,
        period,
        kind,
        multiplier,
        cycle,
    }
}

/// The multiplier of the attracting cycle at `λ`.
pub fn eigenvalue(lambda: Parameter) -> Result<Complex64> {
    classify_parameter(lambda, DEFAULT_BUDGET)
        .sample()
        .map(|s| s.multiplier)
        .ok_or(Error::NotHyperbolic(lambda.value()))
}

/// A point of an internal ray: `multiplier = r e^{2πiα}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPoint {
    pub r: f64,
    pub alpha: f64,
    pub lambda: Parameter,
    pub multiplier: Complex64,
}

#[inline]
fn scale(z: Complex64) -> f64 {
    z.norm().max(1.0)
}

/// An attracting cycle followed through parameter space.
#[derive(Debug, Clone, Copy)]
struct Tracked {
    lambda: Complex64,
    anchor: Complex64,
    period: usize,
    m: Complex64,
}

impl Tracked {
    fn from_cycle(lambda: Parameter, cycle: &Cycle) -> Self {
        Tracked {
            lambda: lambda.value(),
            anchor: smallest_point(cycle),
            period: cycle.period,
            m: cycle.multiplier,
        }
    }

    /// Refine the cycle at a nearby parameter; `None` if it was lost.
    fn at(&self, lam: Complex64) -> Option<Tracked> {
        let p = Parameter::new(lam).ok()?;
        let cy = refine_cycle_newton(p, self.anchor, self.period).ok()?;
        if cy.period != self.period {
            return None;
        }
        let nearest = cy
            .points
            .iter()
            .map(|&w| (w - self.anchor).norm())
            .fold(f64::INFINITY, f64::min);
        if nearest > TRACK_JUMP * scale(self.anchor) {
            return None;
        }
        Some(Tracked {
            lambda: lam,
            anchor: smallest_point(&cy),
            period: self.period,
            m: cy.multiplier,
        })
    }

    fn dm(&self) -> Option<Complex64> {
        let h = FD_STEP * scale(self.lambda);
        let plus = self.at(self.lambda + h)?.m;
        let minus = self.at(self.lambda - h)?.m;
        Some((plus - minus) / (2.0 * h))
    }

    /// Newton in `λ` on `ln(m(λ) / target) = 0`, which keeps the tolerance
    /// relative when the multiplier is tiny.
    fn solve(&self, target: Complex64) -> Option<Tracked> {
        let log_err = |m: Complex64| {
            let q = m / target;
            (q.norm() > 0.0 && q.re.is_finite() && q.im.is_finite()).then(|| q.ln())
        };
        let mut cur = *self;
        for _ in 0..RAY_NEWTON_STEPS {
            let g = log_err(cur.m)?;
            let err = g.norm();
            if err < RAY_NEWTON_TOL {
                return Some(cur);
            }
            let dlog = cur.dm()? / cur.m;
            if dlog.norm() == 0.0 || !(dlog.re.is_finite() && dlog.im.is_finite()) {
                return None;
            }
            let mut step = g / dlog;
            let mut next = None;
            for _ in 0..12 {
                if let Some(t) = cur.at(cur.lambda - step) {
                    if log_err(t.m).is_some_and(|e| e.norm() < err) {
                        next = Some(t);
                        break;
                    }
                }
                step *= 0.5;
            }
            cur = next?;
        }
        None
    }
}

fn smallest_point(cycle: &Cycle) -> Complex64 {
    cycle
        .points
        .iter()
        .copied()
        .fold(cycle.points[0], |a, b| if b.norm() < a.norm() { b } else { a })
}

/// Follow `target(s)` for `s` from 0 to 1 with adaptive steps, starting at
/// `start`, calling `accept` on every converged point.
fn continue_target(
    start: Tracked,
    initial_step: f64,
    target: impl Fn(f64) -> Complex64,
    mut accept: impl FnMut(f64, &Tracked),
) -> std::result::Result<Tracked, Tracked> {
    let mut cur = start;
    let mut s = 0.0;
    let mut ds = initial_step.min(1.0);
    while s < 1.0 {
        let next_s = (s + ds).min(1.0);
        match cur.solve(target(next_s)) {
            Some(t) => {
                cur = t;
                s = next_s;
                accept(s, &cur);
                ds = (ds * 1.5).min(initial_step);
            }
            None => {
                ds *= 0.5;
                if ds < RAY_MIN_STEP {
                    return Err(cur);
                }
            }
        }
    }
    Ok(cur)
}

/// Trace the internal ray of angle `alpha` through the component of `seed`,
/// from `r = |m(seed)|` to `r_end`. The seed is first moved at constant radius
/// to the ray's angle (counterclockwise when the two directions are opposite).
pub fn trace_internal_ray(seed: Parameter, alpha: f64, r_end: f64) -> Result<Vec<RayPoint>> {
    trace_tracked(seed, alpha, r_end).map(|(ray, _)| ray)
}

fn trace_tracked(seed: Parameter, alpha: f64, r_end: f64) -> Result<(Vec<RayPoint>, Tracked)> {
    if !(r_end > 0.0 && r_end < 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!(
            "ray needs 0 < r_end < 1 and finite alpha, got r_end = {r_end}, alpha = {alpha}"
        )));
    }
    let sample = classify_parameter(seed, DEFAULT_BUDGET);
    let sample = sample.sample().ok_or(Error::NotHyperbolic(seed.value()))?;
    let start = Tracked::from_cycle(seed, &sample.cycle);
    let r0 = start.m.norm();
    if r0 == 0.0 {
        return Err(Error::InvalidInput("seed has a superattracting cycle".into()));
    }
    let a0 = start.m.arg() / TAU;
    let mut da = (alpha - a0).rem_euclid(1.0);
    if da > 0.5 {
        da -= 1.0;
    }
    let fail = |t: Tracked| Error::ContinuationFailure {
        lambda: t.lambda,
        r: t.m.norm(),
    };

    let on_ray = if da == 0.0 {
        start
    } else {
        let steps = (da.abs() / ANGLE_STEP).ceil().max(1.0);
        continue_target(
            start,
            1.0 / steps,
            |s| Complex64::from_polar(r0, TAU * (a0 + s * da)),
            |_, _| {},
        )
        .map_err(fail)?
    };
    let on_ray = on_ray
        .solve(Complex64::from_polar(r0, TAU * alpha))
        .ok_or(fail(on_ray))?;

    let mut out = vec![ray_point(r0, alpha, &on_ray)?];
    if r_end == r0 {
        return Ok((out, on_ray));
    }
    // Uniform steps in ln(r / (1 - r)): geometric in r near 0, in 1 - r near 1.
    let logit = |r: f64| (r / (1.0 - r)).ln();
    let (u0, u1) = (logit(r0), logit(r_end));
    let to_r = |u: f64| 1.0 / (1.0 + (-u).exp());
    let span = (u1 - u0).abs();
    let initial = (-RAY_RATIO.ln() / span).min(1.0);
    let r_at = |s: f64| if s >= 1.0 { r_end } else { to_r(u0 + s * (u1 - u0)) };
    let mut pending = Ok(());
    let end = continue_target(
        on_ray,
        initial,
        |s| Complex64::from_polar(r_at(s), TAU * alpha),
        |s, t| {
            if pending.is_ok() {
                match ray_point(r_at(s), alpha, t) {
                    Ok(p) => out.push(p),
                    Err(e) => pending = Err(e),
                }
            }
        },
    )
    .map_err(fail)?;
    pending?;
    Ok((out, end))
}

fn ray_point(r: f64, alpha: f64, t: &Tracked) -> Result<RayPoint> {
    Ok(RayPoint {
        r,
        alpha,
        lambda: Parameter::new(t.lambda)?,
        multiplier: t.m,
    })
}

/// A parameter whose asymptotic value is a prepole.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualCenter {
    pub lambda_star: Parameter,
    /// Prepole order of `-λ* i`, one less than the period of the component pair.
    pub order: usize,
    /// Itinerary of the prepole `-λ* i`; `λ* i` carries the mirrored itinerary.
    pub itinerary: Itinerary,
    /// `f^{order-1}(-λ* i) = s_{pole_index}`.
    pub pole_index: i64,
    /// `|f^{order-1}(-λ* i) - s_{pole_index}|`.
    pub residual: f64,
}

impl VirtualCenter {
    /// The center `-λ*`. Since `f_{-λ}^k = (-1)^k f_λ^k`, its prepole `λ* i`
    /// has an itinerary that is recomputed rather than derived by a formula.
    pub fn negated(&self) -> Result<VirtualCenter> {
        let lambda_star = self.lambda_star.neg();
        let itinerary = inverse::recover_itinerary(
            lambda_star,
            -lambda_star.asymptotic_value(),
            self.order,
        )?;
        let residual = center_residual(lambda_star, &itinerary)?;
        Ok(VirtualCenter {
            lambda_star,
            order: self.order,
            pole_index: itinerary.head().unwrap_or(0),
            itinerary,
            residual,
        })
    }
}

/// Defining residual of a center: `|f^{q-1}(-λ i) - s_{n_1}|` with `q = itin.len()`.
pub fn center_residual(lambda: Parameter, itin: &Itinerary) -> Result<f64> {
    let n1 = itin
        .head()
        .ok_or_else(|| Error::InvalidInput("empty itinerary".into()))?;
    let z = dynamics::iterate_n(lambda, -lambda.asymptotic_value(), itin.len() - 1)?;
    Ok((z - dynamics::pole(n1)).norm())
}

fn center_map(lam: Complex64, itin: &Itinerary) -> Result<Complex64> {
    let p = Parameter::new(lam)?;
    match inverse::prepole(itin, p) {
        Ok(v) => v
            .finite_point()
            .map(|w| Complex64::i() * w)
            .ok_or(Error::InfinityInput),
        Err(Error::AsymptoticValueInput { depth, .. }) => {
            Err(Error::AsymptoticValueCollision { depth })
        }
        Err(e) => Err(e),
    }
}

/// Solve `-λ i = prepole(itin, λ)` for the virtual center of a period-`p`
/// component pair, `itin.len() == p - 1`.
pub fn find_virtual_center(p: usize, itin: &Itinerary, seed: Parameter) -> Result<VirtualCenter> {
    if p < 2 || itin.len() != p - 1 {
        return Err(Error::InvalidInput(format!(
            "period {p} needs an itinerary of length {}, got {}",
            p.saturating_sub(1),
            itin.len()
        )));
    }
    let lam = fixed_point_center(itin, seed.value())
        .or_else(|e| newton_center(itin, seed.value()).map_err(|_| e))?;
    let lambda_star = Parameter::new(lam)?;
    let residual = center_residual(lambda_star, itin)?;
    if residual >= CENTER_TOL {
        return Err(Error::NoConvergence {
            iterations: CENTER_MAX_ITERS,
        });
    }
    Ok(VirtualCenter {
        lambda_star,
        order: itin.len(),
        itinerary: itin.clone(),
        pole_index: itin.head().unwrap_or(0),
        residual,
    })
}

fn fixed_point_center(itin: &Itinerary, seed: Complex64) -> Result<Complex64> {
    for damping in [1.0, 0.5, 0.25] {
        let mut lam = seed;
        let mut last_delta = f64::INFINITY;
        for _ in 0..CENTER_MAX_ITERS {
            let next = match center_map(lam, itin) {
                Ok(v) => lam + (v - lam) * damping,
                Err(e @ Error::AsymptoticValueCollision { .. }) => return Err(e),
                Err(_) => break,
            };
            let delta = (next - lam).norm();
            lam = next;
            if delta <= 4.0 * f64::EPSILON * scale(lam) {
                return Ok(lam);
            }
            if delta > 1e3 * last_delta.max(1.0) {
                break;
            }
            last_delta = delta;
        }
        // Stalled at rounding level rather than diverged.
        if last_delta < 1e-12 * scale(lam) {
            return Ok(lam);
        }
    }
    Err(Error::NoConvergence {
        iterations: CENTER_MAX_ITERS,
    })
}

/// Newton on `g(λ) = -f^{q-1}(λ i) - s_{n_1}`, using oddness of the map.
fn newton_center(itin: &Itinerary, seed: Complex64) -> Result<Complex64> {
    let q = itin.len();
    let target = dynamics::pole(itin.head().unwrap_or(0));
    let mut lam = seed;
    for _ in 0..CENTER_NEWTON_STEPS {
        let p = Parameter::new(lam)?;
        let (z, dz) = *orbit_with_lambda_derivative(p, q - 1)?
            .last()
            .expect("orbit has at least one point");
        let g = -z - target;
        if g.norm() < 0.1 * CENTER_TOL {
            return Ok(lam);
        }
        lam -= g / -dz;
    }
    Err(Error::NoConvergence {
        iterations: CENTER_NEWTON_STEPS,
    })
}

/// Centers with itineraries `(k, parent itinerary)` for `k` in `ks`, seeded at
/// the parent. Per-`k` failures are kept in place.
pub fn centers_accumulation(
    parent: &VirtualCenter,
    ks: impl IntoIterator<Item = i64>,
) -> Vec<(i64, Result<VirtualCenter>)> {
    let p = parent.order + 2;
    ks.into_iter()
        .map(|k| {
            let itin = parent.itinerary.prepend(k);
            (k, find_virtual_center(p, &itin, parent.lambda_star))
        })
        .collect()
}

/// First index from which `distances` strictly decreases to the end.
pub fn monotone_from(distances: &[f64]) -> usize {
    let mut start = distances.len().saturating_sub(1);
    while start > 0 && distances[start - 1] > distances[start] {
        start -= 1;
    }
    start
}

/// A point on the boundary of the component where a fixed point `z` has
/// `|λ sec² z| = 1`. With `u = 2z` the condition is `|u| = |sin u|`; Newton in
/// `x = Re u` at fixed `y = Im u`, then `λ = (u/2) cot(u/2)`.
pub fn omega1_boundary_point(y: f64, x_guess: f64) -> Result<Parameter> {
    if y == 0.0 || !y.is_finite() || !x_guess.is_finite() {
        return Err(Error::InvalidInput(format!("need finite y != 0, got {y}")));
    }
    let rhs = y.sinh().powi(2) - y * y;
    let mut x = x_guess;
    for _ in 0..BOUNDARY_NEWTON_STEPS {
        let h = x * x - x.sin().powi(2) - rhs;
        let dh = 2.0 * x - (2.0 * x).sin();
        if dh == 0.0 {
            break;
        }
        let step = h / dh;
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            let half = Complex64::new(x, y) * 0.5;
            return Parameter::new(half / tan_stable(half));
        }
    }
    Err(Error::NoConvergence {
        iterations: BOUNDARY_NEWTON_STEPS,
    })
}

/// The point on the boundary of the component of `seed` where the multiplier
/// is `e^{2πij/q}`, reached along the internal ray of angle `j/q`.
pub fn bud_point(seed: Parameter, q: u32, j: i64) -> Result<Parameter> {
    if q < 2 || gcd(j.unsigned_abs(), q as u64) != 1 {
        return Err(Error::InvalidInput(format!(
            "bud needs q >= 2 and gcd(j, q) = 1, got j = {j}, q = {q}"
        )));
    }
    let alpha = (j as f64 / q as f64).rem_euclid(1.0);
    let (ray, tracked) = trace_tracked(seed, alpha, BUD_RADIUS)?;
    let last = ray.last().expect("ray has a first point");
    let root = Complex64::from_polar(1.0, TAU * alpha);
    let fail = Error::ContinuationFailure {
        lambda: last.lambda.value(),
        r: last.r,
    };
    let end = tracked.solve(root).ok_or(fail)?;
    Parameter::new(end.lambda)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `(k + 1/2) π i`, the virtual center of the period-2 pair with itinerary `(k)`.
pub fn period_two_center(k: i64) -> Complex64 {
    Complex64::new(0.0, (k as f64 + 0.5) * PI)
}
