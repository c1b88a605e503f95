//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails or exceeds its time limit.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tandyn::cycles::{
    continue_cycle_along_path, multiplier, refine_cycle_newton, repelling_cycles_near_prepole,
    PathSingularityKind,
};
use tandyn::dynamics::{eval_f, iterate_n, nearest_pole};
use tandyn::inverse::{inverse_branch, prepole};
use tandyn::parameter::{
    centers_accumulation, classify_parameter, eigenvalue, find_virtual_center, monotone_from,
    trace_internal_ray, DEFAULT_BUDGET,
};
use tandyn::render::{
    encode_ppm, render_dynamic_plane, render_parameter_plane, BLACK, WHITE,
};
use tandyn::{
    Complex64, ComponentKind, Cycle, Itinerary, OrbitOutcome, Palette, Parameter, RenderOptions,
    Viewport,
};

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lam(re: f64, im: f64) -> Parameter {
    Parameter::new(c(re, im)).unwrap()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Root of `t = l tanh t` on (0.5, 10) by bisection.
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

fn c1_unit_disk_multiplier() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let l = Complex64::from_polar(0.95 * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
        let Ok(p) = Parameter::new(l) else { continue };
        let cls = classify_parameter(p, DEFAULT_BUDGET);
        let s = cls.sample().ok_or_else(|| format!("λ = {l} undetermined"))?;
        check(s.kind == ComponentKind::UnitDisk && s.period == 1, || {
            format!("λ = {l}: {:?} period {}", s.kind, s.period)
        })?;
        worst = worst.max((s.multiplier - l).norm());
    }
    check(worst < 1e-9, || format!("max |m - λ| = {worst:e}"))?;
    Ok(format!("100 samples, max |m - λ| = {worst:.1e}"))
}

fn c2_real_axis() -> Outcome {
    let t = tanh_fixed_point(2.0);
    let pos = classify_parameter(lam(2.0, 0.0), DEFAULT_BUDGET);
    let s = pos.sample().ok_or("λ = 2 undetermined")?;
    check(s.kind == ComponentKind::TwoCycles && s.period == 1, || {
        format!("λ = 2: {:?} period {}", s.kind, s.period)
    })?;
    let z = s.cycle.points[0];
    check(z.re.abs() < 1e-6 && (z.im.abs() - t).abs() < 1e-6, || format!("fixed point {z}"))?;
    let neg = classify_parameter(lam(-2.0, 0.0), DEFAULT_BUDGET);
    let s = neg.sample().ok_or("λ = -2 undetermined")?;
    check(s.kind == ComponentKind::SingleDoubled && s.period == 1, || {
        format!("λ = -2: {:?} period {}", s.kind, s.period)
    })?;
    check(
        s.cycle.period == 2 && s.cycle.contains(c(0.0, t), 1e-6) && s.cycle.contains(c(0.0, -t), 1e-6),
        || format!("2-cycle {:?}", s.cycle.points),
    )?;
    let want = 4.0 / t.cosh().powi(4);
    let rel = (s.multiplier - want).norm() / want;
    check(rel < 1e-6, || format!("multiplier {} vs {want}", s.multiplier))?;
    Ok(format!("t = {t:.9}, 4 sech^4 t = {want:.6}, rel err {rel:.1e}"))
}

fn c3_virtual_centers() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in [0, 1, 2, -1] {
        let vc = find_virtual_center(2, &Itinerary::new(vec![k]).unwrap(), lam(0.1, 1.0))
            .map_err(|e| format!("k = {k}: {e}"))?;
        worst = worst.max((vc.lambda_star.value() - c(0.0, (k as f64 + 0.5) * PI)).norm());
    }
    check(worst < 1e-9, || format!("max center error {worst:e}"))?;
    let center = c(0.0, FRAC_PI_2);
    let (mut two, mut doubled) = (0, 0);
    for j in 0..64 {
        let l = center + Complex64::from_polar(0.05, TAU * j as f64 / 64.0);
        let cls = classify_parameter(Parameter::new(l).unwrap(), DEFAULT_BUDGET);
        match (cls.period(), cls.kind()) {
            (Some(2), Some(ComponentKind::TwoCycles)) => two += 1,
            (Some(2), Some(ComponentKind::SingleDoubled)) => doubled += 1,
            _ => {}
        }
    }
    check(two > 0 && doubled > 0, || format!("TwoCycles p=2: {two}, SingleDoubled p=2: {doubled}"))?;
    Ok(format!(
        "max center error {worst:.1e}; circle: {two} TwoCycles p=2, {doubled} SingleDoubled p=2 of 64"
    ))
}

fn c4_accumulation() -> Outcome {
    let parent = find_virtual_center(2, &Itinerary::new(vec![0]).unwrap(), lam(0.0, 1.0))
        .map_err(|e| e.to_string())?;
    let mut dists = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, vc) in centers_accumulation(&parent, 5..=30) {
        let vc = vc.map_err(|e| format!("k = {k}: {e}"))?;
        check(vc.itinerary.entries() == [k, 0], || format!("itinerary {}", vc.itinerary))?;
        worst = worst.max(vc.residual);
        dists.push((vc.lambda_star.value() - c(0.0, FRAC_PI_2)).norm());
    }
    check(worst < 1e-10, || format!("max residual {worst:e}"))?;
    check(dists.windows(2).all(|w| w[1] < w[0]), || format!("distances {dists:?}"))?;
    Ok(format!(
        "26 centers, max residual {worst:.1e}, distance {:.3e} -> {:.3e}",
        dists[0],
        dists[dists.len() - 1]
    ))
}

fn c5_prepole_cycles() -> Outcome {
    let l = lam(2.0, 0.0);
    let fam = repelling_cycles_near_prepole(l, &Itinerary::new(vec![0]).unwrap(), 5..=15)
        .map_err(|e| e.to_string())?;
    check(fam.cycles.len() == 11, || format!("{} cycles, k_min {}", fam.cycles.len(), fam.k_min))?;
    let mut worst: f64 = 0.0;
    let mut dist = Vec::new();
    let mut mult = Vec::new();
    for pc in &fam.cycles {
        let z = pc.cycle.points[0];
        worst = worst.max((iterate_n(l, z, 2).map_err(|e| e.to_string())? - z).norm());
        dist.push((z - c(FRAC_PI_2, 0.0)).norm());
        mult.push(pc.cycle.multiplier.norm());
    }
    check(worst < 1e-9, || format!("max |f²(z) - z| = {worst:e}"))?;
    check(dist.windows(2).all(|w| w[1] < w[0]), || format!("distances {dist:?}"))?;
    check(mult.windows(2).all(|w| w[1] > w[0]), || format!("|m| {mult:?}"))?;
    check(mult.iter().all(|&m| m > 1.0), || "non-repelling cycle".into())?;
    Ok(format!(
        "k = 5..15, max residual {worst:.1e}, |m| {:.3e} -> {:.3e}",
        mult[0],
        mult[mult.len() - 1]
    ))
}

fn c6_inverse_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut n = 0;
    let mut worst: f64 = 0.0;
    while n < 10_000 {
        let l = Complex64::from_polar(rng.gen_range(0.2..5.0), rng.gen_range(0.0..TAU));
        let p = Parameter::new(l).unwrap();
        let z = c(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        if (z - p.asymptotic_value()).norm() < 1e-3 || (z + p.asymptotic_value()).norm() < 1e-3 {
            continue;
        }
        let k: i64 = rng.gen_range(-20..=20);
        let w = inverse_branch(k, p, z).map_err(|e| e.to_string())?;
        let (lo, hi) = ((k as f64 - 0.5) * PI, (k as f64 + 0.5) * PI);
        check(w.re >= lo && w.re < hi, || format!("Re w = {} outside L_{k}", w.re))?;
        let back = eval_f(p, w).map_err(|e| e.to_string())?;
        worst = worst.max((back - z).norm() / z.norm().max(1.0));
        n += 1;
    }
    check(worst < 1e-10, || format!("worst relative roundtrip error {worst:e}"))?;

    let mut latest_start = 0;
    for l in [lam(0.0, 2.0), lam(1.0, 1.0)] {
        let point = |e: Vec<i64>| prepole(&Itinerary::new(e).unwrap(), l).map(|v| v.finite_point().unwrap());
        for prefix in [vec![0], vec![1], vec![-2], vec![0, 3], vec![-1, 1]] {
            for sign in [1, -1] {
                let mut grow = Vec::new();
                let mut approach = Vec::new();
                // The limit is a prepole of order p - 1. For imaginary λ the
                // prepoles sit on strip boundaries, where the half-open strip
                // convention can shift its itinerary entries by one.
                let mut candidates = Vec::new();
                for code in 0..3_usize.pow(prefix.len() as u32) {
                    let mut it = prefix.clone();
                    let mut rest = code;
                    for e in it.iter_mut() {
                        *e += (rest % 3) as i64 - 1;
                        rest /= 3;
                    }
                    if let Ok(v) = point(it) {
                        candidates.push(v);
                    }
                }
                let mut heads = Vec::new();
                for m in 1..=40 {
                    let mut tail = prefix.clone();
                    tail.push(sign * m);
                    grow.push(-point(tail).map_err(|e| e.to_string())?.norm());
                    let mut head = vec![sign * m];
                    head.extend(&prefix);
                    heads.push(point(head).map_err(|e| e.to_string())?);
                }
                let last = heads[heads.len() - 1];
                let parent = candidates
                    .iter()
                    .copied()
                    .min_by(|a, b| (last - a).norm().total_cmp(&(last - b).norm()))
                    .ok_or("no candidate limit")?;
                approach.extend(heads.iter().map(|h| (h - parent).norm()));
                let start = monotone_from(&grow).max(monotone_from(&approach));
                check(start <= 20, || format!("prefix {prefix:?} sign {sign}: monotone only from |n| = {}", start + 1))?;
                latest_start = latest_start.max(start + 1);
            }
        }
    }
    Ok(format!(
        "10^4 roundtrips, worst rel err {worst:.1e}; accumulation monotone from |n| <= {latest_start} (p = 2, 3)"
    ))
}

fn c7_rays() -> Outcome {
    let disk = trace_internal_ray(lam(0.5, 0.0), 0.0, 1e-3).map_err(|e| e.to_string())?;
    let seg = disk
        .iter()
        .map(|p| (p.lambda.value() - c(p.r, 0.0)).norm())
        .fold(0.0, f64::max);
    check(seg < 1e-8, || format!("unit-disk ray off the segment by {seg:e}"))?;

    let ray = trace_internal_ray(lam(2.0, 0.0), 0.0, 1e-3).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for w in ray.windows(2) {
        let (a, b) = (w[0].lambda.value(), w[1].lambda.value());
        check(b.re > a.re && b.im == 0.0, || format!("not monotone real: {a} -> {b}"))?;
    }
    for p in &ray {
        let m = eigenvalue(p.lambda).map_err(|e| e.to_string())?;
        worst = worst.max((m - p.r).norm());
    }
    check(worst < 1e-6, || format!("max |eigenvalue - r| = {worst:e}"))?;

    let center = c(0.0, FRAC_PI_2);
    let ray = trace_internal_ray(lam(0.0, 1.2), 0.0, 1e-3).map_err(|e| e.to_string())?;
    let end = ray.last().unwrap();
    let d = (end.lambda.value() - center).norm();
    check(d < 1e-2, || {
        format!(
            "segment and R(0) from 2 ok ({} points, max err {worst:.1e}); ray toward (π/2)i ends at {} (r = {}), {d:.4} from (π/2)i",
            ray.len(),
            end.lambda.value(),
            end.r
        )
    })?;
    Ok(format!("segment err {seg:.1e}; R(0) max err {worst:.1e}; end distance {d:.1e}"))
}

fn c8_continuation() -> Outcome {
    let path: Vec<Parameter> = (0..=100).map(|i| lam(0.5 + 0.499 * i as f64 / 100.0, 0.0)).collect();
    let cy = refine_cycle_newton(path[0], c(0.1, 0.0), 1).map_err(|e| e.to_string())?;
    let (_, rep) = continue_cycle_along_path(&path, &cy).map_err(|e| e.to_string())?;
    check(rep.kind == PathSingularityKind::Algebraic, || format!("real path: {:?}", rep.kind))?;
    let m_alg = rep.final_multiplier;

    let (y0, y1) = (1.2, FRAC_PI_2 - 0.01);
    let path: Vec<Parameter> = (0..=200).map(|i| lam(0.0, y0 + (y1 - y0) * i as f64 / 200.0)).collect();
    let start = classify_parameter(path[0], DEFAULT_BUDGET);
    let s = start.sample().ok_or("start of imaginary path undetermined")?;
    check(s.period == 2, || format!("start period {}", s.period))?;
    let (_, rep) = continue_cycle_along_path(&path, &s.cycle).map_err(|e| e.to_string())?;
    check(rep.kind == PathSingularityKind::Transcendental, || format!("imaginary path: {rep:?}"))?;
    let (n, d) = rep.predecessor_pole;
    check((n == 0 || n == -1) && d < 0.1, || format!("predecessor pole {n} at {d}"))?;
    Ok(format!(
        "real path m -> {m_alg}; imaginary path m -> {:.1e}, max|Im| {:.1}, predecessor {d:.3} from s_{n}",
        rep.final_multiplier.norm(),
        rep.max_abs_im
    ))
}

fn c9_figures() -> Outcome {
    let vp = Viewport::square(c(0.0, 0.0), 12.0, 256).unwrap();
    let opts = RenderOptions::default();
    let a = render_parameter_plane(&vp, &opts).map_err(|e| e.to_string())?;
    let b = render_parameter_plane(&vp, &RenderOptions { threads: Some(3), ..opts.clone() })
        .map_err(|e| e.to_string())?;
    check(encode_ppm(&a) == encode_ppm(&b), || "renders differ".into())?;
    let mirrored = render_parameter_plane(&vp.conjugated(), &opts).map_err(|e| e.to_string())?;
    check(mirrored.pixels == a.flipped_vertically().pixels, || "conjugation symmetry broken".into())?;

    let pal = Palette::Standard;
    let two = pal.component_color(2, ComponentKind::TwoCycles);
    let dbl = pal.component_color(2, ComponentKind::SingleDoubled);
    let pitch = vp.pitch();
    for k in [0_i64, 1, -1, -2] {
        let y = (k as f64 + 0.5) * PI;
        // pixels within 0.3 of the center, split by side
        let (mut above, mut below) = (Vec::new(), Vec::new());
        for row in 0..vp.rows {
            for col in 0..vp.cols {
                let z = vp.pixel_center(col, row);
                let d = z - c(0.0, y);
                if d.norm() < 0.3 && d.re.abs() < 2.0 * pitch {
                    if d.im > 0.0 {
                        above.push(a.get(col, row));
                    } else {
                        below.push(a.get(col, row));
                    }
                }
            }
        }
        let has = |v: &[[u8; 3]], col: [u8; 3]| v.contains(&col);
        let straddles = (has(&above, two) && has(&below, dbl)) || (has(&above, dbl) && has(&below, two));
        check(straddles, || format!("no period-2 pair straddling {y:.4}i"))?;
    }

    let dynamic = render_dynamic_plane(lam(2.0, 0.0), &vp, &opts).map_err(|e| e.to_string())?;
    let mut black_rows = std::collections::BTreeSet::new();
    for row in 0..vp.rows {
        for col in 0..vp.cols {
            let px = dynamic.get(col, row);
            if px == BLACK || px == WHITE {
                let im = vp.pixel_center(col, row).im;
                check(im.abs() < pitch, || format!("unconverged pixel at Im = {im}"))?;
                black_rows.insert(row);
            }
        }
    }
    Ok(format!(
        "byte-identical across thread counts, mirror-symmetric, pairs straddle ±(π/2)i ±(3π/2)i; λ = 2 unconverged rows {black_rows:?}"
    ))
}

fn c10_symmetry() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let mut n = 0;
    while n < 10_000 {
        let p = Parameter::new(c(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0))).unwrap();
        let z = c(rng.gen_range(-20.0..20.0), rng.gen_range(-30.0..30.0));
        if nearest_pole(z).1 < 1e-6 {
            continue;
        }
        let (a, b) = (eval_f(p, z).unwrap(), eval_f(p, -z).unwrap());
        check(a == -b, || format!("oddness fails at λ = {}, z = {z}", p.value()))?;
        n += 1;
    }

    let vp = Viewport::square(c(0.0, 0.0), 8.0, 128).unwrap();
    let opts = RenderOptions::default();
    let lambdas = [lam(0.5, 0.0), lam(2.0, 0.0), lam(-2.0, 0.0), lam(1.0, 0.5), lam(0.3, 1.4)];
    for &l in &lambdas {
        let img = render_dynamic_plane(l, &vp, &opts).map_err(|e| e.to_string())?;
        check(img.pixels == img.rotated_half_turn().pixels, || {
            format!("dynamic plane at λ = {} not 180° symmetric", l.value())
        })?;
    }

    let mut cycles: Vec<(Parameter, Cycle)> = Vec::new();
    for &l in lambdas.iter().chain(&[lam(0.0, 1.3), lam(0.0, 1.8), lam(3.0, -1.0)]) {
        if let Some(s) = classify_parameter(l, DEFAULT_BUDGET).sample() {
            cycles.push((l, s.cycle.clone()));
        }
        for z0 in [c(0.3, 0.4), c(-1.0, 2.0), c(2.0, -0.1)] {
            if let OrbitOutcome::Attracted { cycle, .. } = tandyn::dynamics::iterate_orbit(l, z0, 2000) {
                cycles.push((l, cycle));
            }
        }
    }
    for (l, it) in [(lam(2.0, 0.0), vec![0]), (lam(0.0, 2.0), vec![0, 0])] {
        let fam = repelling_cycles_near_prepole(l, &Itinerary::new(it).unwrap(), 6..=12)
            .map_err(|e| e.to_string())?;
        cycles.extend(fam.cycles.into_iter().map(|pc| (l, pc.cycle)));
    }
    for (l, cy) in &cycles {
        let neg = cy.negated();
        let size = cy.points.iter().map(|z| z.norm()).fold(1.0, f64::max);
        check(neg.residual(*l) < 1e-8 * size, || format!("negated cycle residual {:e}", neg.residual(*l)))?;
        let m = multiplier(*l, &neg);
        check((m - cy.multiplier).norm() <= 1e-8 * cy.multiplier.norm(), || {
            format!("negated multiplier {m} vs {}", cy.multiplier)
        })?;
    }
    Ok(format!(
        "10^4 exact oddness checks, {} rotation-invariant images, {} cycles with matching negated partners",
        lambdas.len(),
        cycles.len()
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "fixed-point multiplier identity", limit: Duration::from_secs(5), run: c1_unit_disk_multiplier },
        Criterion { id: 2, name: "real-axis dichotomy", limit: Duration::from_secs(1), run: c2_real_axis },
        Criterion { id: 3, name: "virtual centers", limit: Duration::from_secs(30), run: c3_virtual_centers },
        Criterion { id: 4, name: "center accumulation", limit: Duration::from_secs(30), run: c4_accumulation },
        Criterion { id: 5, name: "repelling cycles near a prepole", limit: Duration::from_secs(5), run: c5_prepole_cycles },
        Criterion { id: 6, name: "inverse-branch suite", limit: Duration::from_secs(10), run: c6_inverse_suite },
        Criterion { id: 7, name: "ray behavior", limit: Duration::from_secs(60), run: c7_rays },
        Criterion { id: 8, name: "continuation singularities", limit: Duration::from_secs(30), run: c8_continuation },
        Criterion { id: 9, name: "figure reproduction", limit: Duration::from_secs(120), run: c9_figures },
        Criterion { id: 10, name: "symmetry suite", limit: Duration::from_secs(30), run: c10_symmetry },
    ];
    let mut failed = 0;
    for cr in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(cr.run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= cr.limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} [{}] {} ({:.2}s, limit {}s): {}",
            if ok { "PASS" } else { "FAIL" },
            cr.id,
            cr.name,
            elapsed.as_secs_f64(),
            cr.limit.as_secs(),
            detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
