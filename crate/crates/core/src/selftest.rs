//! Invariant suite run by `tandyn selftest`. Each check is small enough that
//! the whole suite finishes in a few seconds.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::cycles::{
    continue_cycle_along_path, multiplier, multiplier_sine_form, refine_cycle_newton,
    repelling_cycles_near_prepole, Cycle, PathSingularityKind,
};
use crate::dynamics::{
    eval_f, eval_f_prime, iterate_n, nearest_pole, orbit_with_lambda_derivative, Parameter,
};
use crate::inverse::{inverse_branch, prepole, Itinerary};
use crate::parameter::{
    centers_accumulation, classify_parameter, find_virtual_center, monotone_from,
    trace_internal_ray, ComponentKind, DEFAULT_BUDGET,
};
use crate::render::{
    decode_ppm, encode_ppm, render_dynamic_plane, render_parameter_plane, RenderOptions, Viewport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lam(re: f64, im: f64) -> Parameter {
    Parameter::new(c(re, im)).expect("nonzero literal")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sample_parameters() -> Vec<Parameter> {
    [(0.5, 0.0), (2.0, 0.0), (-2.0, 0.0), (1.0, 0.3), (0.2, 1.7), (-0.7, -2.4), (3.5, 1.0)]
        .iter()
        .map(|&(a, b)| lam(a, b))
        .collect()
}

/// A grid of points away from poles.
fn sample_points() -> Vec<Complex64> {
    let mut out = Vec::new();
    for i in -6..=6 {
        for j in -6..=6 {
            let z = c(0.37 * i as f64 + 0.011, 0.53 * j as f64 - 0.007);
            if nearest_pole(z).1 > 1e-3 {
                out.push(z);
            }
        }
    }
    out
}

fn eval_oddness() -> Outcome {
    let mut n = 0;
    for l in sample_parameters() {
        for z in sample_points() {
            let a = eval_f(l, z).map_err(|e| e.to_string())?;
            let b = eval_f(l, -z).map_err(|e| e.to_string())?;
            ensure(a == -b, || format!("f({}) != -f(-z) at λ={}", z, l.value()))?;
            let s = eval_f(l.neg(), z).map_err(|e| e.to_string())?;
            ensure(s == -a, || format!("f_(-λ) != -f_λ at z={z}"))?;
            n += 1;
        }
    }
    Ok(format!("{n} points, exact"))
}

fn asymptotic_limit() -> Outcome {
    for l in sample_parameters() {
        for x in [-2.0, 0.0, 0.7, 3.0] {
            for y in [21.0_f64, 25.0, 30.0] {
                let bound = 3.0 * l.value().norm() * (-2.0 * y).exp();
                let up = eval_f(l, c(x, y)).map_err(|e| e.to_string())?;
                let down = eval_f(l, c(x, -y)).map_err(|e| e.to_string())?;
                ensure((up - l.asymptotic_value()).norm() <= bound, || {
                    format!("upper tract at λ={} x={x} y={y}", l.value())
                })?;
                ensure((down + l.asymptotic_value()).norm() <= bound, || {
                    format!("lower tract at λ={} x={x} y={y}", l.value())
                })?;
            }
        }
    }
    Ok("|f - (±λi)| <= 3|λ| e^{-2|y|}".into())
}

fn derivative_consistency() -> Outcome {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for l in sample_parameters() {
        for z in sample_points() {
            if nearest_pole(z).1 < 0.1 {
                continue;
            }
            let d = eval_f_prime(l, z).map_err(|e| e.to_string())?;
            let fd = (eval_f(l, z + h).map_err(|e| e.to_string())?
                - eval_f(l, z - h).map_err(|e| e.to_string())?)
                / (2.0 * h);
            let rel = (d - fd).norm() / d.norm().max(1.0);
            worst = worst.max(rel);
        }
    }
    ensure(worst < 1e-6, || format!("worst relative error {worst:e}"))?;
    Ok(format!("worst relative error {worst:.1e}"))
}

fn orbit_lambda_derivative() -> Outcome {
    let l = lam(1.0, 0.3);
    let h = 1e-6;
    let exact = orbit_with_lambda_derivative(l, 10).map_err(|e| e.to_string())?;
    let plus = orbit_with_lambda_derivative(lam(1.0 + h, 0.3), 10).map_err(|e| e.to_string())?;
    let minus = orbit_with_lambda_derivative(lam(1.0 - h, 0.3), 10).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for k in 0..=10 {
        let fd = (plus[k].0 - minus[k].0) / (2.0 * h);
        worst = worst.max((exact[k].1 - fd).norm() / exact[k].1.norm().max(1.0));
    }
    ensure(worst < 1e-5, || format!("worst relative error {worst:e}"))?;
    Ok(format!("10 steps, worst relative error {worst:.1e}"))
}

fn inverse_roundtrip() -> Outcome {
    let mut n = 0;
    for l in sample_parameters() {
        for z in sample_points() {
            let av = l.asymptotic_value();
            if (z - av).norm() < 1e-3 || (z + av).norm() < 1e-3 {
                continue;
            }
            for k in [-20, -3, -1, 0, 1, 4, 20] {
                let w = inverse_branch(k, l, z).map_err(|e| e.to_string())?;
                let lo = (k as f64 - 0.5) * PI;
                let hi = (k as f64 + 0.5) * PI;
                ensure(w.re >= lo && w.re < hi, || format!("Re w outside strip {k}"))?;
                let back = eval_f(l, w).map_err(|e| e.to_string())?;
                ensure((back - z).norm() <= 1e-10 * z.norm().max(1.0), || {
                    format!("roundtrip at λ={} z={z} n={k}", l.value())
                })?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} roundtrips with strip membership"))
}

fn prepole_accumulation() -> Outcome {
    let l = lam(0.0, 2.0);
    let point = |entries: Vec<i64>| -> std::result::Result<Complex64, String> {
        let it = Itinerary::new(entries).map_err(|e| e.to_string())?;
        prepole(&it, l)
            .map_err(|e| e.to_string())?
            .finite_point()
            .ok_or_else(|| "prepole at infinity".to_string())
    };
    for sign in [1, -1] {
        let tail: Vec<f64> = (1..=30)
            .map(|n| point(vec![0, sign * n]).map(|z| -z.norm()))
            .collect::<std::result::Result<_, _>>()?;
        ensure(monotone_from(&tail) <= 10, || "tail-varying growth not monotone".into())?;
        let parent = point(vec![1])?;
        let head: Vec<f64> = (1..=30)
            .map(|n| point(vec![sign * n, 1]).map(|z| (z - parent).norm()))
            .collect::<std::result::Result<_, _>>()?;
        ensure(monotone_from(&head) <= 10, || "head-varying approach not monotone".into())?;
    }
    Ok("orders 2, |n| <= 30".into())
}

fn prepole_symmetry() -> Outcome {
    let l = lam(0.4, 1.3);
    for entries in [vec![0, 0], vec![2, -1], vec![-3, 4, 1], vec![5]] {
        let it = Itinerary::new(entries).map_err(|e| e.to_string())?;
        let a = prepole(&it, l).map_err(|e| e.to_string())?.finite_point();
        let b = prepole(&it.mirrored(), l)
            .map_err(|e| e.to_string())?
            .finite_point();
        let (Some(a), Some(b)) = (a, b) else {
            return Err("prepole at infinity".into());
        };
        ensure((a + b).norm() < 1e-10 * a.norm().max(1.0), || {
            format!("mirror of ({it}) is not the negative")
        })?;
    }
    Ok("mirrored itineraries give negated prepoles".into())
}

fn check_cycle(l: Parameter, cy: &Cycle) -> std::result::Result<(), String> {
    ensure(cy.residual(l) < 1e-8 * cy.points.iter().map(|z| z.norm()).fold(1.0, f64::max), || {
        format!("cycle residual {:e}", cy.residual(l))
    })?;
    let neg = cy.negated();
    ensure(neg.residual(l) < 1e-8 * neg.points.iter().map(|z| z.norm()).fold(1.0, f64::max), || {
        "negated cycle is not a cycle".into()
    })?;
    let m = multiplier(l, &neg);
    ensure((m - cy.multiplier).norm() <= 1e-8 * cy.multiplier.norm().max(1e-300), || {
        "negated multiplier differs".into()
    })?;
    if let Some(s) = multiplier_sine_form(cy) {
        ensure((s - cy.multiplier).norm() <= 1e-8 * cy.multiplier.norm().max(1e-300), || {
            format!("sine-form multiplier {s} vs {}", cy.multiplier)
        })?;
    }
    Ok(())
}

fn cycle_symmetries() -> Outcome {
    let mut n = 0;
    for l in sample_parameters() {
        if let Some(s) = classify_parameter(l, DEFAULT_BUDGET).sample() {
            check_cycle(l, &s.cycle)?;
            n += 1;
        }
    }
    let l = lam(2.0, 0.0);
    let fam = repelling_cycles_near_prepole(l, &Itinerary::new(vec![0]).expect("nonempty"), 5..=8)
        .map_err(|e| e.to_string())?;
    for pc in &fam.cycles {
        check_cycle(l, &pc.cycle)?;
        n += 1;
    }
    Ok(format!("{n} cycles: negation and multiplier forms agree"))
}

fn sign_flip_of_odd_cycles() -> Outcome {
    // fixed point of f_2 and a repelling 3-cycle of f_{2i}
    let cases = [
        (lam(2.0, 0.0), refine_cycle_newton(lam(2.0, 0.0), c(0.0, 1.8), 1)),
        (
            lam(0.0, 2.0),
            repelling_cycles_near_prepole(
                lam(0.0, 2.0),
                &Itinerary::new(vec![0, 0]).expect("nonempty"),
                8..=8,
            )
            .map(|f| f.cycles[0].cycle.clone()),
        ),
    ];
    for (l, cy) in cases {
        let cy = cy.map_err(|e| e.to_string())?;
        let p = cy.period;
        let doubled = refine_cycle_newton(l.neg(), cy.points[0], 2 * p).map_err(|e| e.to_string())?;
        ensure(doubled.period == 2 * p, || {
            format!("period {} under -λ, expected {}", doubled.period, 2 * p)
        })?;
        for k in 0..2 * p {
            let a = iterate_n(l.neg(), cy.points[0], k).map_err(|e| e.to_string())?;
            let b = iterate_n(l, cy.points[0], k).map_err(|e| e.to_string())?;
            let want = if k % 2 == 0 { b } else { -b };
            ensure((a - want).norm() < 1e-8 * want.norm().max(1.0), || {
                format!("f_(-λ)^{k} != (-1)^k f_λ^{k}")
            })?;
        }
    }
    Ok("odd periods 1 and 3 double under λ -> -λ".into())
}

fn prepole_cycle_family() -> Outcome {
    let l = lam(2.0, 0.0);
    let fam = repelling_cycles_near_prepole(l, &Itinerary::new(vec![0]).expect("nonempty"), 5..=15)
        .map_err(|e| e.to_string())?;
    ensure(fam.cycles.len() == 11, || format!("{} cycles", fam.cycles.len()))?;
    let dist: Vec<f64> = fam
        .cycles
        .iter()
        .map(|pc| (pc.cycle.points[0] - c(FRAC_PI_2, 0.0)).norm())
        .collect();
    let mult: Vec<f64> = fam.cycles.iter().map(|pc| pc.cycle.multiplier.norm()).collect();
    ensure(dist.windows(2).all(|w| w[1] < w[0]), || "distance not decreasing".into())?;
    ensure(mult.windows(2).all(|w| w[1] > w[0]), || "multiplier not increasing".into())?;
    ensure(mult[0] > 1.0, || "not repelling".into())?;
    Ok(format!("k = 5..15, k_min = {}", fam.k_min))
}

fn continuation_algebraic() -> Outcome {
    let path: Vec<Parameter> = (0..=40)
        .map(|i| lam(0.5 + 0.499 * i as f64 / 40.0, 0.0))
        .collect();
    let cy = refine_cycle_newton(path[0], c(0.1, 0.0), 1).map_err(|e| e.to_string())?;
    let (_, rep) = continue_cycle_along_path(&path, &cy).map_err(|e| e.to_string())?;
    ensure(rep.kind == PathSingularityKind::Algebraic, || format!("{:?}", rep.kind))?;
    Ok(format!("final multiplier {}", rep.final_multiplier))
}

fn classification_symmetries() -> Outcome {
    let pos = classify_parameter(lam(2.0, 0.0), DEFAULT_BUDGET);
    let neg = classify_parameter(lam(-2.0, 0.0), DEFAULT_BUDGET);
    ensure(
        pos.kind() == Some(ComponentKind::TwoCycles) && neg.kind() == Some(ComponentKind::SingleDoubled),
        || "λ = ±2 kinds".into(),
    )?;
    let (Some(a), Some(b)) = (pos.sample(), neg.sample()) else {
        return Err("λ = ±2 not hyperbolic".into());
    };
    let t = a.cycle.points[0];
    ensure(b.cycle.period == 2 && b.cycle.contains(t, 1e-8) && b.cycle.contains(-t, 1e-8), || {
        "cycle of -2 is not the doubled cycle of 2".into()
    })?;
    for l in sample_parameters() {
        let x = classify_parameter(l, DEFAULT_BUDGET);
        let y = classify_parameter(l.conj(), DEFAULT_BUDGET);
        ensure((x.period(), x.kind()) == (y.period(), y.kind()), || {
            format!("conjugation changes class at {}", l.value())
        })?;
    }
    Ok("λ <-> -λ at ±2 and conjugation on samples".into())
}

fn virtual_centers() -> Outcome {
    let mut n = 0;
    for k in [0, 1, -1] {
        let vc = find_virtual_center(2, &Itinerary::new(vec![k]).expect("nonempty"), lam(0.0, 1.0))
            .map_err(|e| e.to_string())?;
        ensure((vc.lambda_star.value() - c(0.0, (k as f64 + 0.5) * PI)).norm() < 1e-9, || {
            format!("center for ({k}) at {}", vc.lambda_star.value())
        })?;
        let neg = vc.negated().map_err(|e| e.to_string())?;
        ensure(neg.residual < 1e-8, || "negated center residual".into())?;
        n += 1;
        if k == 0 {
            for (_, child) in centers_accumulation(&vc, 5..=8) {
                let child = child.map_err(|e| e.to_string())?;
                ensure(child.residual < 1e-8, || "child residual".into())?;
                ensure(child.negated().map_err(|e| e.to_string())?.residual < 1e-8, || {
                    "negated child residual".into()
                })?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} centers and their negatives"))
}

fn both_kinds_near_center() -> Outcome {
    let center = c(0.0, FRAC_PI_2);
    let mut two = false;
    let mut doubled = false;
    for j in 0..32 {
        let l = center + Complex64::from_polar(0.05, 2.0 * PI * j as f64 / 32.0);
        let cls = classify_parameter(Parameter::new(l).map_err(|e| e.to_string())?, DEFAULT_BUDGET);
        match (cls.period(), cls.kind()) {
            (Some(2), Some(ComponentKind::TwoCycles)) => two = true,
            (Some(2), Some(ComponentKind::SingleDoubled)) => doubled = true,
            _ => {}
        }
    }
    ensure(two && doubled, || format!("TwoCycles {two}, SingleDoubled {doubled}"))?;
    Ok("circle of radius 0.05 about (π/2)i".into())
}

fn ray_moduli() -> Outcome {
    let mut n = 0;
    for (seed, alpha) in [(lam(0.5, 0.0), 0.0), (lam(2.0, 0.0), 0.0), (lam(0.0, 1.2), 0.0), (lam(0.5, 0.0), 0.3)] {
        let ray = trace_internal_ray(seed, alpha, 1e-2).map_err(|e| e.to_string())?;
        for p in &ray {
            ensure((p.multiplier.norm() - p.r).abs() < 1e-6, || {
                format!("|m| = {} at r = {}", p.multiplier.norm(), p.r)
            })?;
            n += 1;
        }
    }
    Ok(format!("{n} ray points with |m| = r"))
}

fn render_invariants() -> Outcome {
    let vp = Viewport::square(c(0.0, 0.0), 12.0, 48).map_err(|e| e.to_string())?;
    let serial = RenderOptions {
        budget: 500,
        threads: Some(1),
        ..RenderOptions::default()
    };
    let parallel = RenderOptions {
        threads: Some(3),
        ..serial.clone()
    };
    let a = render_parameter_plane(&vp, &serial).map_err(|e| e.to_string())?;
    let b = render_parameter_plane(&vp, &parallel).map_err(|e| e.to_string())?;
    ensure(encode_ppm(&a) == encode_ppm(&b), || "thread count changes bytes".into())?;
    ensure(a.pixels == a.flipped_vertically().pixels, || "conjugation symmetry".into())?;
    let back = decode_ppm(&encode_ppm(&a)).map_err(|e| e.to_string())?;
    ensure(back.pixels == a.pixels, || "PPM roundtrip".into())?;
    let d = render_dynamic_plane(lam(1.0, 0.5), &vp, &serial).map_err(|e| e.to_string())?;
    ensure(d.pixels == d.rotated_half_turn().pixels, || "dynamic plane not 180° symmetric".into())?;
    Ok("determinism, conjugation, rotation, PPM roundtrip".into())
}

/// Run every check.
pub fn run_all() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Outcome); 17] = [
        ("eval-oddness-and-sign-flip", eval_oddness),
        ("asymptotic-value-limit", asymptotic_limit),
        ("derivative-consistency", derivative_consistency),
        ("orbit-lambda-derivative", orbit_lambda_derivative),
        ("inverse-roundtrip-and-strips", inverse_roundtrip),
        ("prepole-accumulation", prepole_accumulation),
        ("prepole-symmetry", prepole_symmetry),
        ("cycle-negation-and-multipliers", cycle_symmetries),
        ("odd-cycles-under-sign-flip", sign_flip_of_odd_cycles),
        ("repelling-cycles-near-prepole", prepole_cycle_family),
        ("continuation-algebraic", continuation_algebraic),
        ("classification-symmetries", classification_symmetries),
        ("virtual-centers", virtual_centers),
        ("both-kinds-near-center", both_kinds_near_center),
        ("ray-moduli", ray_moduli),
        ("render-invariants", render_invariants),
        ("pole-distance", pole_distance),
    ];
    checks
        .iter()
        .map(|&(name, f)| {
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

fn pole_distance() -> Outcome {
    for n in -5..=5 {
        let s = (n as f64 + 0.5) * PI;
        ensure(nearest_pole(c(s, 0.0)) == (n, 0.0), || format!("pole {n}"))?;
    }
    Ok("poles map to themselves".into())
}
