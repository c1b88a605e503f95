//! Periodic cycles: Newton refinement, multipliers, repelling cycles near
//! prepoles, and continuation along parameter paths.

use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::dynamics::{self, apply, apply_prime, nearest_pole, Parameter, POLE_TOL};
use crate::error::{Error, Result};
use crate::inverse::{self, Itinerary, BRANCH_TOL};

/// Half-width of the neutral band around `|m| = 1`.
pub const CLASS_TOL: f64 = 1e-6;
/// `|Im z|` beyond which a cycle point counts as escaping.
pub const ESCAPE_THRESHOLD: f64 = 50.0;
/// Newton iterations allowed in [`refine_cycle_newton`].
pub const NEWTON_MAX_STEPS: usize = 50;
/// Relative tolerance for the primitive-period divisor test.
pub const PERIOD_TOL: f64 = 1e-8;
/// Residual target for refined cycles, relative to `max(1, |z|)`.
pub const RESIDUAL_TOL: f64 = 1e-12;
/// `|m - 1|` at the end of a path for an algebraic singularity.
pub const ALGEBRAIC_TOL: f64 = 1e-3;
/// `|m|` at the end of a path below which the multiplier is taken to vanish.
pub const VANISHING_MULTIPLIER: f64 = 1e-6;
/// Distance from the escaping point's predecessor to a pole.
pub const PREDECESSOR_POLE_DIST: f64 = 0.1;

/// Largest relative move of the tracked point in one continuation step.
const CONTINUATION_JUMP: f64 = 0.25;
const CONTINUATION_MAX_DEPTH: usize = 16;
const CONTRACTION_MAX_ITERS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Attracting,
    Repelling,
    Neutral,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Attracting => "Attracting",
            Stability::Repelling => "Repelling",
            Stability::Neutral => "Neutral",
        })
    }
}

/// A periodic orbit `z_0 -> z_1 -> ... -> z_{p-1} -> z_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub points: Vec<Complex64>,
    pub period: usize,
    pub multiplier: Complex64,
    pub stability: Stability,
    /// `z_{i + p/2} = -z_i`, so the point set is invariant under `z -> -z`.
    /// Always false for the fixed point `0`, whose period is odd.
    pub symmetric: bool,
}

#[inline]
fn scale(z: Complex64) -> f64 {
    z.norm().max(1.0)
}

impl Cycle {
    /// Build the cycle through `z0`, assumed periodic with period dividing `p`.
    pub(crate) fn through(lambda: Parameter, z0: Complex64, p: usize) -> Result<Cycle> {
        let lam = lambda.value();
        let mut points = Vec::with_capacity(p + 1);
        let mut z = z0;
        for step in 0..=p {
            points.push(z);
            if step < p {
                let (n, d) = nearest_pole(z);
                if d < POLE_TOL {
                    return Err(Error::PoleCollision {
                        step,
                        pole_index: n,
                    });
                }
                z = apply(lam, z);
            }
        }
        let period = (1..p)
            .filter(|d| p.is_multiple_of(*d))
            .find(|&d| (points[d] - z0).norm() < PERIOD_TOL * scale(z0))
            .unwrap_or(p);
        points.truncate(period);
        let multiplier = product_multiplier(lam, &points);
        Ok(Cycle {
            stability: classify_cycle(multiplier),
            symmetric: is_symmetric(&points),
            points,
            period,
            multiplier,
        })
    }

    /// The cycle `{-z_i}`; a cycle of the same map by oddness.
    pub fn negated(&self) -> Cycle {
        Cycle {
            points: self.points.iter().map(|z| -z).collect(),
            ..self.clone()
        }
    }

    /// The same cycle starting from `points[k]`.
    pub fn rotated(&self, k: usize) -> Cycle {
        let mut points = self.points.clone();
        points.rotate_left(k % self.period.max(1));
        Cycle { points, ..self.clone() }
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.points.iter().any(|w| (w - z).norm() < tol * scale(z))
    }

    /// Point sets coincide within `tol` (relative).
    pub fn same_set(&self, other: &Cycle, tol: f64) -> bool {
        self.period == other.period && self.points.iter().all(|&z| other.contains(z, tol))
    }

    /// `max_i |f(z_i) - z_{i+1}|`.
    pub fn residual(&self, lambda: Parameter) -> f64 {
        let lam = lambda.value();
        let p = self.points.len();
        (0..p)
            .map(|i| (apply(lam, self.points[i]) - self.points[(i + 1) % p]).norm())
            .fold(0.0, f64::max)
    }
}

fn is_symmetric(points: &[Complex64]) -> bool {
    let p = points.len();
    if !p.is_multiple_of(2) {
        return false;
    }
    (0..p).all(|i| (points[(i + p / 2) % p] + points[i]).norm() < PERIOD_TOL * scale(points[i]))
}

fn product_multiplier(lam: Complex64, points: &[Complex64]) -> Complex64 {
    points
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &z| acc * apply_prime(lam, z))
}

/// `m = ∏ λ sec^2 z_i` over the cycle.
pub fn multiplier(lambda: Parameter, cycle: &Cycle) -> Complex64 {
    product_multiplier(lambda.value(), &cycle.points)
}

/// `m = ∏ 2 z_{i+1} / sin 2 z_i`, which uses only the cycle relation
/// `λ = z_{i+1} / tan z_i`. `None` when some `z_{i+1}` is at (or numerically
/// at) zero, where the relation degenerates, or the sine overflows.
pub fn multiplier_sine_form(cycle: &Cycle) -> Option<Complex64> {
    let p = cycle.points.len();
    let mut m = Complex64::new(1.0, 0.0);
    for i in 0..p {
        let next = cycle.points[(i + 1) % p];
        if next.norm() < PERIOD_TOL {
            return None;
        }
        let s = (cycle.points[i] * 2.0).sin();
        if !(s.re.is_finite() && s.im.is_finite()) || s.norm() == 0.0 {
            return None;
        }
        m *= next * 2.0 / s;
    }
    Some(m)
}

pub fn classify_cycle(m: Complex64) -> Stability {
    let r = m.norm();
    if r < 1.0 - CLASS_TOL {
        Stability::Attracting
    } else if r > 1.0 + CLASS_TOL {
        Stability::Repelling
    } else {
        Stability::Neutral
    }
}

/// `(f^p(z), (f^p)'(z))`.
fn return_map(lam: Complex64, z0: Complex64, p: usize) -> Result<(Complex64, Complex64)> {
    let mut z = z0;
    let mut d = Complex64::new(1.0, 0.0);
    for step in 0..p {
        let (n, dist) = nearest_pole(z);
        if dist < POLE_TOL {
            return Err(Error::PoleCollision {
                step,
                pole_index: n,
            });
        }
        d *= apply_prime(lam, z);
        z = apply(lam, z);
    }
    Ok((z, d))
}

/// Newton's method on `f^p(z) - z`, followed by reduction to the primitive period.
pub fn refine_cycle_newton(lambda: Parameter, z_guess: Complex64, p: usize) -> Result<Cycle> {
    if p == 0 {
        return Err(Error::InvalidInput("period must be at least 1".into()));
    }
    let lam = lambda.value();
    let mut z = z_guess;
    let (mut fz, mut dz) = return_map(lam, z, p)?;
    for _ in 0..NEWTON_MAX_STEPS {
        let g = fz - z;
        // Rounding in f^p grows with the multiplier; never demand better than that.
        let tol = (RESIDUAL_TOL * scale(z)).max(64.0 * f64::EPSILON * dz.norm() * scale(z));
        if g.norm() < tol {
            return Cycle::through(lambda, z, p);
        }
        let dg = dz - 1.0;
        if dg.norm() == 0.0 || !(g.re.is_finite() && g.im.is_finite()) {
            break;
        }
        let step = g / dg;
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let cand = z - step * damping;
            match return_map(lam, cand, p) {
                Ok(next) => {
                    accepted = Some((cand, next));
                    break;
                }
                Err(_) => damping *= 0.5,
            }
        }
        let Some((cand, (f2, d2))) = accepted else {
            break;
        };
        z = cand;
        fz = f2;
        dz = d2;
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_STEPS,
    })
}

/// A repelling cycle from the prepole construction, tagged by its outer branch.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepoleCycle {
    pub k: i64,
    pub cycle: Cycle,
}

/// Cycles accumulating at a prepole, for all `k` in the range with `|k| >= k_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepellingFamily {
    pub prepole: Complex64,
    pub k_min: u64,
    pub cycles: Vec<PrepoleCycle>,
}

/// Period-`p` repelling cycles near the prepole `v` with itinerary of length
/// `p - 1`: for each `k` the cycle point near `v` is the attracting fixed point
/// of the inverse composition `f⁻¹_k`, then `f⁻¹_{n_1}`, ..., `f⁻¹_{n_{p-1}}`.
pub fn repelling_cycles_near_prepole(
    lambda: Parameter,
    prepole_itin: &Itinerary,
    k_range: RangeInclusive<i64>,
) -> Result<RepellingFamily> {
    let v = inverse::prepole(prepole_itin, lambda)?
        .finite_point()
        .ok_or(Error::InfinityInput)?;
    let av = lambda.asymptotic_value();
    if (v - av).norm() <= 2.0 * BRANCH_TOL || (v + av).norm() <= 2.0 * BRANCH_TOL {
        return Err(Error::AsymptoticValueInput { z: v, depth: 0 });
    }
    let p = prepole_itin.len() + 1;

    let attempts: Vec<(i64, Result<Cycle>)> = k_range
        .map(|k| (k, cycle_for_branch(lambda, prepole_itin, v, p, k)))
        .collect();

    let last_failure = attempts
        .iter()
        .filter(|(_, r)| r.is_err())
        .map(|(k, _)| k.unsigned_abs())
        .max();
    let k_min = last_failure.map_or(0, |m| m + 1);
    let cycles: Vec<PrepoleCycle> = attempts
        .into_iter()
        .filter(|(k, _)| k.unsigned_abs() >= k_min)
        .filter_map(|(k, r)| r.ok().map(|cycle| PrepoleCycle { k, cycle }))
        .collect();
    if cycles.is_empty() {
        return Err(Error::ContractionFailure {
            k: last_failure.map_or(0, |m| m as i64),
        });
    }
    Ok(RepellingFamily {
        prepole: v,
        k_min,
        cycles,
    })
}

fn cycle_for_branch(
    lambda: Parameter,
    prepole_itin: &Itinerary,
    v: Complex64,
    p: usize,
    k: i64,
) -> Result<Cycle> {
    let fail = Error::ContractionFailure { k };
    let composed = prepole_itin.prepend(k);
    let mut z = v;
    let mut converged = false;
    for _ in 0..CONTRACTION_MAX_ITERS {
        let next = inverse::compose_inverse(&composed, lambda, z).map_err(|_| fail.clone())?;
        let delta = (next - z).norm();
        z = next;
        if delta < RESIDUAL_TOL * scale(z) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(fail);
    }
    let cycle = refine_cycle_newton(lambda, z, p).map_err(|_| fail.clone())?;
    if cycle.period != p
        || (cycle.points[0] - z).norm() > PERIOD_TOL * scale(z)
        || cycle.multiplier.norm() <= 1.0
    {
        return Err(fail);
    }
    Ok(cycle)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSingularityKind {
    Algebraic,
    Transcendental,
    None,
}

impl std::fmt::Display for PathSingularityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PathSingularityKind::Algebraic => "Algebraic",
            PathSingularityKind::Transcendental => "Transcendental",
            PathSingularityKind::None => "None",
        })
    }
}

/// What happened to a continued cycle at the end of a parameter path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSingularityReport {
    pub kind: PathSingularityKind,
    pub final_multiplier: Complex64,
    pub max_abs_im: f64,
    /// Nearest pole `(index, distance)` to the predecessor of the cycle point
    /// with the largest `|Im z|`.
    pub predecessor_pole: (i64, f64),
}

impl PathSingularityReport {
    fn assess(cycle: &Cycle) -> Self {
        let p = cycle.points.len();
        let (imax, max_abs_im) = cycle
            .points
            .iter()
            .enumerate()
            .map(|(i, z)| (i, z.im.abs()))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let predecessor = cycle.points[(imax + p - 1) % p];
        let predecessor_pole = nearest_pole(predecessor);
        let m = cycle.multiplier;
        // compared with a small slack so that a path ending at exactly 1 - ALGEBRAIC_TOL counts
        let kind = if (m - 1.0).norm() <= ALGEBRAIC_TOL * (1.0 + 1e-9) {
            PathSingularityKind::Algebraic
        } else if max_abs_im > ESCAPE_THRESHOLD
            && predecessor_pole.1 < PREDECESSOR_POLE_DIST
            && m.norm() < VANISHING_MULTIPLIER
        {
            PathSingularityKind::Transcendental
        } else {
            PathSingularityKind::None
        };
        PathSingularityReport {
            kind,
            final_multiplier: m,
            max_abs_im,
            predecessor_pole,
        }
    }
}

/// Follow `cycle0` along the parameter samples, bisecting steps where Newton
/// loses the cycle. Returns the cycle at every sample and the end-of-path report.
pub fn continue_cycle_along_path(
    lambda_samples: &[Parameter],
    cycle0: &Cycle,
) -> Result<(Vec<Cycle>, PathSingularityReport)> {
    let Some(&first) = lambda_samples.first() else {
        return Err(Error::InvalidInput("empty parameter path".into()));
    };
    // Track the smallest point of the cycle; it stays bounded as others escape.
    let anchor = cycle0
        .points
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (i, z)| if z.norm() < a.1 { (i, z.norm()) } else { a })
        .0;
    let mut current = refine_cycle_newton(first, cycle0.points[anchor], cycle0.period)
        .map_err(|_| Error::StepFailure {
            last_good: 0,
            lambda: first.value(),
        })?;
    let mut path = vec![current.clone()];
    for (j, pair) in lambda_samples.windows(2).enumerate() {
        current = advance(pair[0].value(), pair[1].value(), &current, 0).map_err(|_| {
            Error::StepFailure {
                last_good: j,
                lambda: pair[0].value(),
            }
        })?;
        path.push(current.clone());
    }
    let report = PathSingularityReport::assess(&current);
    Ok((path, report))
}

fn advance(from: Complex64, to: Complex64, cycle: &Cycle, depth: usize) -> Result<Cycle> {
    let target = Parameter::new(to)?;
    let z_old = cycle.points[0];
    if let Ok(next) = refine_cycle_newton(target, z_old, cycle.period) {
        if next.period == cycle.period
            && (next.points[0] - z_old).norm() <= CONTINUATION_JUMP * scale(z_old)
        {
            return Ok(next);
        }
    }
    if depth >= CONTINUATION_MAX_DEPTH {
        return Err(Error::NoConvergence { iterations: depth });
    }
    let mid = (from + to) * 0.5;
    let half = advance(from, mid, cycle, depth + 1)?;
    advance(mid, to, &half, depth + 1)
}

/// Convenience: `f_λ` on every point of the cycle, as a check helper.
pub fn image_of(lambda: Parameter, cycle: &Cycle) -> Result<Vec<Complex64>> {
    cycle
        .points
        .iter()
        .map(|&z| dynamics::eval_f(lambda, z))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lam(re: f64, im: f64) -> Parameter {
        Parameter::new(c(re, im)).unwrap()
    }

    fn tanh_fixed_point(l: f64) -> f64 {
        let (mut lo, mut hi) = (0.5_f64, 10.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - l * mid.tanh() < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn newton_examples() {
        let cy = refine_cycle_newton(lam(0.5, 0.0), c(0.1, 0.0), 1).unwrap();
        assert_eq!(cy.period, 1);
        assert!(cy.points[0].norm() < 1e-12);
        assert!((cy.multiplier - c(0.5, 0.0)).norm() < 1e-12);
        assert!(!cy.symmetric);

        let t = tanh_fixed_point(2.0);
        let cy = refine_cycle_newton(lam(2.0, 0.0), c(0.0, 1.8), 1).unwrap();
        assert!((cy.points[0] - c(0.0, t)).norm() < 1e-12);

        let cy = refine_cycle_newton(lam(-2.0, 0.0), c(0.0, 1.8), 2).unwrap();
        assert_eq!(cy.period, 2);
        assert!(cy.symmetric);
        assert!(cy.contains(c(0.0, t), 1e-10) && cy.contains(c(0.0, -t), 1e-10));
        let sech2 = 1.0 / t.cosh().powi(2);
        let want = 4.0 * sech2 * sech2;
        assert!((cy.multiplier.re - want).abs() < 1e-12 && cy.multiplier.im.abs() < 1e-14);
        assert!((want - 0.02768).abs() < 1e-5);
    }

    #[test]
    fn newton_reduces_to_primitive_period() {
        let cy = refine_cycle_newton(lam(2.0, 0.0), c(0.0, 1.8), 6).unwrap();
        assert_eq!(cy.period, 1);
        let cy = refine_cycle_newton(lam(-2.0, 0.0), c(0.0, 1.8), 4).unwrap();
        assert_eq!(cy.period, 2);
    }

    #[test]
    fn newton_errors() {
        assert!(matches!(
            refine_cycle_newton(lam(2.0, 0.0), c(FRAC_PI_2, 0.0), 1),
            Err(Error::PoleCollision { step: 0, pole_index: 0 })
        ));
        assert!(refine_cycle_newton(lam(2.0, 0.0), c(0.0, 1.0), 0).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let l = lam(2.0, 0.0);
        let t = tanh_fixed_point(2.0);
        let cy = refine_cycle_newton(l, c(0.0, 1.8), 1).unwrap();
        let want = 2.0 / t.cosh().powi(2);
        assert!((multiplier(l, &cy) - c(want, 0.0)).norm() < 1e-12);
        assert!((want - 0.16638).abs() < 1e-5);
        let sine = multiplier_sine_form(&cy).unwrap();
        assert!((sine - cy.multiplier).norm() <= 1e-8 * cy.multiplier.norm());

        let zero = refine_cycle_newton(lam(0.3, 0.2), c(0.05, 0.0), 1).unwrap();
        assert!((multiplier(lam(0.3, 0.2), &zero) - c(0.3, 0.2)).norm() < 1e-12);
        assert_eq!(multiplier_sine_form(&zero), None);

        let l = lam(-2.0, 0.0);
        let cy = refine_cycle_newton(l, c(0.0, 1.8), 2).unwrap();
        assert!((multiplier(l, &cy) - c(want * want, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn stability_classes() {
        assert_eq!(classify_cycle(c(0.5, 0.0)), Stability::Attracting);
        assert_eq!(classify_cycle(c(1.0, 0.0)), Stability::Neutral);
        assert_eq!(classify_cycle(c(0.0, 2.0)), Stability::Repelling);
        assert_eq!(classify_cycle(c(0.0, 1.0 - 1e-7)), Stability::Neutral);
    }

    #[test]
    fn prepole_family_at_half_pi() {
        let l = lam(2.0, 0.0);
        let fam = repelling_cycles_near_prepole(l, &Itinerary::new(vec![0]).unwrap(), 5..=15).unwrap();
        assert_eq!(fam.cycles.len(), 11);
        let mut last_dist = f64::INFINITY;
        let mut last_m = 0.0;
        for pc in &fam.cycles {
            let cy = &pc.cycle;
            assert_eq!(cy.period, 2);
            let back = dynamics::iterate_n(l, cy.points[0], 2).unwrap();
            assert!((back - cy.points[0]).norm() < 1e-9);
            let dist = (cy.points[0] - c(FRAC_PI_2, 0.0)).norm();
            assert!(dist < last_dist);
            assert!(cy.multiplier.norm() > last_m && cy.multiplier.norm() > 1.0);
            last_dist = dist;
            last_m = cy.multiplier.norm();
        }
    }

    #[test]
    fn prepole_family_order_two() {
        let l = lam(0.0, 2.0);
        let it = Itinerary::new(vec![0, 0]).unwrap();
        let v = inverse::prepole(&it, l).unwrap().finite_point().unwrap();
        let fam = repelling_cycles_near_prepole(l, &it, 6..=14).unwrap();
        assert!(!fam.cycles.is_empty());
        let dists: Vec<f64> = fam.cycles.iter().map(|pc| (pc.cycle.points[0] - v).norm()).collect();
        assert!(dists.windows(2).all(|w| w[1] < w[0]), "{dists:?}");
        for pc in &fam.cycles {
            assert_eq!(pc.cycle.period, 3);
            assert!(pc.cycle.residual(l) < 1e-8 * scale(pc.cycle.points[2]));
        }
    }

    #[test]
    fn continuation_along_real_axis_is_algebraic() {
        let samples: Vec<Parameter> = (0..=50)
            .map(|i| lam(0.5 + (0.999 - 0.5) * i as f64 / 50.0, 0.0))
            .collect();
        let cy = refine_cycle_newton(samples[0], c(0.1, 0.0), 1).unwrap();
        let (path, report) = continue_cycle_along_path(&samples, &cy).unwrap();
        assert_eq!(path.len(), samples.len());
        assert_eq!(report.kind, PathSingularityKind::Algebraic);
        assert!((report.final_multiplier - c(0.999, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constant_path_reports_nothing() {
        let l = lam(2.0, 0.0);
        let cy = refine_cycle_newton(l, c(0.0, 1.8), 1).unwrap();
        let (path, report) = continue_cycle_along_path(&[l, l, l], &cy).unwrap();
        assert_eq!(report.kind, PathSingularityKind::None);
        assert!(path.iter().all(|p| p.same_set(&cy, 1e-12)));
    }

    #[test]
    fn negated_cycle_is_a_cycle() {
        let l = lam(1.3, 0.9);
        let cy = refine_cycle_newton(l, c(0.3, 1.1), 1).unwrap();
        let neg = cy.negated();
        assert!(neg.residual(l) < 1e-10);
        assert_eq!(neg.multiplier, cy.multiplier);
    }
}
