//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any failure.

use std::time::{Duration, Instant};

use convexify::bench::{continuum_instances, finite_instances, test_dim, TestInstance};
use convexify::relaxation::{certify, relaxed_value, separation_distance};
use convexify::{interval_evaluate, solve, BoxRegion, Expression, Objective, RunReport, SolverConfig};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WALL_BUDGET: Duration = Duration::from_secs(600);

struct Solved {
    instance: TestInstance,
    report: RunReport,
    elapsed: Duration,
}

fn run(instance: TestInstance) -> Solved {
    let start = Instant::now();
    let report = solve(&instance.objective(), &instance.domain, &SolverConfig::default())
        .unwrap_or_else(|e| panic!("{}: {e}", instance.name));
    Solved {
        instance,
        report,
        elapsed: start.elapsed(),
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

type Check = Result<String, String>;

fn criterion_1(finite: &[Solved]) -> Check {
    let mut seen = Vec::new();
    let mut bad = Vec::new();
    for s in finite {
        let n = s.report.n_eps;
        let ok = match s.instance.name.as_str() {
            "Branin" => n == 2 || n == 3,
            _ => Some(n) == s.instance.expected_count,
        };
        seen.push(format!("{}={n}", s.instance.name));
        if !ok {
            bad.push(format!("{} gave {n}", s.instance.name));
        }
    }
    if bad.is_empty() {
        Ok(seen.join(" "))
    } else {
        Err(bad.join("; "))
    }
}

fn criterion_2(finite: &[Solved]) -> Check {
    let mut worst_gap: f64 = 0.0;
    let mut worst_dist: f64 = 0.0;
    for s in finite {
        let f = s.instance.objective();
        for c in &s.report.solutions {
            let v = f.value(&c.point).map_err(|e| e.to_string())?;
            let gap = v - s.instance.known_min_value;
            worst_gap = worst_gap.max(gap);
            if gap > 1e-3 {
                return Err(format!("{}: f({:?}) = {v}", s.instance.name, c.point));
            }
        }
        let fixtures = s.instance.finite_minimizers().expect("finite instance");
        for c in &s.report.clusters {
            let d = fixtures
                .iter()
                .map(|m| dist(m, &c.point))
                .fold(f64::INFINITY, f64::min);
            worst_dist = worst_dist.max(d);
            if d > 1e-2 {
                return Err(format!("{}: cluster {:?} is {d} from every fixture", s.instance.name, c.point));
            }
        }
    }
    Ok(format!("max f - f* = {worst_gap:.2e}, max distance to fixture = {worst_dist:.2e}"))
}

fn criterion_3(dims: &[Solved]) -> Check {
    let mut seen = Vec::new();
    for s in dims {
        let d = s.instance.dimension;
        let rep = &s.report;
        if rep.n_eps != 1 << d || rep.flag_ter != 0 {
            return Err(format!("d={d}: n_eps={} flag_ter={}", rep.n_eps, rep.flag_ter));
        }
        for c in &rep.solutions {
            let pattern: Vec<f64> = c.point.iter().map(|v| 0.25f64.copysign(*v)).collect();
            if dist(&pattern, &c.point) > 1e-2 {
                return Err(format!("d={d}: {:?} is not near a corner", c.point));
            }
        }
        seen.push(format!("d={d}:{}", rep.n_eps));
    }
    Ok(seen.join(" "))
}

fn criterion_4(continuum: &[Solved]) -> Check {
    let mut seen = Vec::new();
    for s in continuum {
        let rep = &s.report;
        let f = s.instance.objective();
        if rep.n_eps <= 50 || rep.flag_ter != 0 {
            return Err(format!("{}: n_eps={} flag_ter={}", s.instance.name, rep.n_eps, rep.flag_ter));
        }
        for c in &rep.solutions {
            let v = f.value(&c.point).map_err(|e| e.to_string())?;
            if v > 1e-3 {
                return Err(format!("{}: f({:?}) = {v}", s.instance.name, c.point));
            }
        }
        seen.push(format!("{}={}", s.instance.name, rep.n_eps));
    }
    Ok(seen.join(" "))
}

fn criterion_5(all: &[&Solved]) -> Check {
    let limit = SolverConfig::default().max_outer_iters;
    let mut slowest = (Duration::ZERO, "");
    for s in all {
        if s.report.hit_iteration_limit || s.report.iterations >= limit {
            return Err(format!("{} hit the iteration limit", s.instance.name));
        }
        if s.elapsed > WALL_BUDGET {
            return Err(format!("{} took {:?}", s.instance.name, s.elapsed));
        }
        if s.elapsed > slowest.0 {
            slowest = (s.elapsed, &s.instance.name);
        }
    }
    Ok(format!(
        "{} instances terminated; slowest {} in {:.2}s",
        all.len(),
        slowest.1,
        slowest.0.as_secs_f64()
    ))
}

fn random_sub_box(rng: &mut ChaCha8Rng, domain: &BoxRegion) -> BoxRegion {
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for i in 0..domain.dimension() {
        let (a, b) = (domain.lower()[i], domain.upper()[i]);
        let u = rng.gen_range(a..b);
        let v = rng.gen_range(a..b);
        let (mut u, mut v) = if u < v { (u, v) } else { (v, u) };
        // keep boxes away from zero width so the checks are not vacuous
        let min_width = 1e-3 * (b - a);
        if v - u < min_width {
            v = (u + min_width).min(b);
            u = v - min_width;
        }
        lo.push(u);
        hi.push(v);
    }
    BoxRegion::new(lo, hi).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, region: &BoxRegion) -> Vec<f64> {
    (0..region.dimension())
        .map(|i| rng.gen_range(region.lower()[i]..=region.upper()[i]))
        .collect()
}

/// Smallest eigenvalue of the relaxation's Hessian at `x`.
fn relaxed_min_eigenvalue(f: &Objective, alpha: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut h = DMatrix::from_vec(n, n, f.hessian_at(x).unwrap());
    for i in 0..n {
        h[(i, i)] += 2.0 * alpha[i];
    }
    SymmetricEigen::new(h).eigenvalues.min()
}

fn criterion_6(instances: &[TestInstance]) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checks = 0usize;
    for inst in instances {
        let f = inst.objective();
        for _ in 0..100 {
            let region = random_sub_box(&mut rng, &inst.domain);
            let cert = certify(&f, &region, 0.0).map_err(|e| format!("{}: {e}", inst.name))?;
            let alpha = &cert.alpha;
            let scale = 1.0 + alpha.iter().sum::<f64>() * region.max_width().powi(2);

            for _ in 0..20 {
                let x = random_point(&mut rng, &region);
                let (fx, rx) = (f.value(&x).unwrap(), relaxed_value(&f, &region, alpha, &x).unwrap());
                if rx > fx + 1e-9 * scale * (1.0 + fx.abs()) {
                    return Err(format!("{}: underestimation fails at {x:?} on {region}", inst.name));
                }
                let lam = relaxed_min_eigenvalue(&f, alpha, &x);
                let hscale = 1.0 + cert.lambda_tilde.abs() + alpha.iter().fold(0.0f64, |m, a| m.max(*a));
                if lam < -1e-9 * hscale {
                    return Err(format!("{}: relaxation Hessian eigenvalue {lam} at {x:?} on {region}", inst.name));
                }
                checks += 2;
            }
            for c in region.corners() {
                let (fx, rx) = (f.value(&c).unwrap(), relaxed_value(&f, &region, alpha, &c).unwrap());
                if (fx - rx).abs() > 1e-9 * (1.0 + fx.abs()) {
                    return Err(format!("{}: corner {c:?} has f={fx}, F={rx}", inst.name));
                }
                checks += 1;
            }

            let mid = region.midpoint();
            let gap = f.value(&mid).unwrap() - relaxed_value(&f, &region, alpha, &mid).unwrap();
            let d = separation_distance(&region, alpha);
            if (gap - d).abs() > 1e-9 * (1.0 + d + f.value(&mid).unwrap().abs()) {
                return Err(format!("{}: midpoint gap {gap} differs from D(X) = {d}", inst.name));
            }

            let inner = random_sub_box(&mut rng, &region);
            let inner_cert = certify(&f, &inner, 0.0).unwrap();
            if inner_cert.lambda_tilde < cert.lambda_tilde - 1e-9 * (1.0 + cert.lambda_tilde.abs()) {
                return Err(format!(
                    "{}: lambda_tilde drops from {} to {} on a sub-box",
                    inst.name, cert.lambda_tilde, inner_cert.lambda_tilde
                ));
            }
            checks += 2;
        }
    }
    Ok(format!("{} sub-boxes, {checks} property checks", 100 * instances.len()))
}

fn criterion_7() -> Check {
    let formulas = [
        ("x1*x2 - x1^3 + 2", 2),
        ("sin(3*x1)*cos(x2) + exp(x1/4)", 2),
        ("(x1 - x2)^2/(2 + x1^2)", 2),
        ("ln(x1^2 + 1) - x2^4", 2),
        ("-x1^2*x2 + cos(x1*x2*pi)", 2),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let per = 100_000 / formulas.len();
    let mut total = 0usize;
    for (text, n) in formulas {
        let e = Expression::parse(text, n).unwrap();
        for _ in 0..per {
            let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..2.0)).collect();
            let region = BoxRegion::new(lo, hi).unwrap();
            let enclosure = interval_evaluate(&e, &region).unwrap();
            let x = random_point(&mut rng, &region);
            let v = e.evaluate(&x).unwrap();
            if !enclosure.contains(v) {
                return Err(format!("{text}: f({x:?}) = {v} outside {enclosure:?} on {region}"));
            }
            total += 1;
        }
    }
    Ok(format!("{total} checks, 0 violations"))
}

fn criterion_8() -> Check {
    let cases = [
        ("x1^2 + x2^2", [0.0, 0.0]),
        ("(x1 + x2)^2", [f64::NAN, f64::NAN]),
        ("exp(x1) + x2^2", [-1.0, 0.0]),
    ];
    let domain = BoxRegion::cube(-1.0, 1.0, 2).unwrap();
    let mut seen = Vec::new();
    for (text, expected) in cases {
        let f = Objective::parse(text, 2).unwrap();
        let rep = solve(&f, &domain, &SolverConfig::default()).map_err(|e| e.to_string())?;
        if rep.iterations != 0 || rep.n_eps != 1 {
            return Err(format!("{text}: {} splits, n_eps={}", rep.iterations, rep.n_eps));
        }
        let x = &rep.clusters[0].point;
        let ok = if expected[0].is_nan() {
            // minimizers form the segment x1 + x2 = 0; the midpoint start lands on it
            (x[0] + x[1]).abs() <= 1e-6 && rep.f_min <= 1e-12
        } else {
            dist(x, &expected) <= 1e-6
        };
        if !ok {
            return Err(format!("{text}: returned {x:?}"));
        }
        seen.push(format!("{text} -> {x:?}"));
    }
    Ok(seen.join("; "))
}

struct Grid {
    m: usize,
    lo: [f64; 2],
    step: [f64; 2],
    values: Vec<f64>,
}

impl Grid {
    fn new(f: &Objective, domain: &BoxRegion, m: usize) -> Self {
        let lo = [domain.lower()[0], domain.lower()[1]];
        let step = [domain.width(0) / m as f64, domain.width(1) / m as f64];
        let mut values = Vec::with_capacity((m + 1) * (m + 1));
        for i in 0..=m {
            for j in 0..=m {
                values.push(f.value(&[lo[0] + step[0] * i as f64, lo[1] + step[1] * j as f64]).unwrap());
            }
        }
        Self { m, lo, step, values }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.m + 1) + j]
    }

    fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Grid points no larger than any of their neighbours, lowest first.
    fn local_minima(&self, count: usize) -> Vec<[f64; 2]> {
        let m = self.m as isize;
        let mut found = Vec::new();
        for i in 0..=m {
            for j in 0..=m {
                let v = self.at(i as usize, j as usize);
                let lowest = (-1..=1).all(|di| {
                    (-1..=1).all(|dj| {
                        let (a, b) = (i + di, j + dj);
                        a < 0 || b < 0 || a > m || b > m || self.at(a as usize, b as usize) >= v
                    })
                });
                if lowest {
                    found.push((v, [self.lo[0] + self.step[0] * i as f64, self.lo[1] + self.step[1] * j as f64]));
                }
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        found.into_iter().take(count).map(|(_, x)| x).collect()
    }
}

/// Derivative-free polish: repeatedly re-grid an 11x11 neighbourhood of the
/// best point found, shrinking it by a factor of 5 each round.
fn zoom(f: &Objective, domain: &BoxRegion, start: [f64; 2], step: [f64; 2]) -> f64 {
    let (mut x, mut h) = (start, step);
    let mut best = f.value(&x).unwrap();
    for _ in 0..30 {
        let centre = x;
        for a in -5..=5 {
            for b in -5..=5 {
                let mut p = [centre[0] + h[0] * a as f64 / 5.0, centre[1] + h[1] * b as f64 / 5.0];
                domain.project(&mut p);
                let v = f.value(&p).unwrap();
                if v < best {
                    best = v;
                    x = p;
                }
            }
        }
        h = [h[0] / 5.0, h[1] / 5.0];
    }
    best
}

/// Compares the reported minimum against the plain 1001x1001 grid minimum.
/// Where the grid spacing alone leaves the grid more than the tolerance above
/// the reported value, the verdict rests on a zoom-refined grid instead, and
/// the line says so.
fn criterion_9(all: &[&Solved]) -> Check {
    let mut worst = (0.0f64, "");
    let mut refined = Vec::new();
    for s in all.iter().filter(|s| s.instance.dimension == 2) {
        let f = s.instance.objective();
        let grid = Grid::new(&f, &s.instance.domain, 1000);
        let g = grid.min();
        let reported = s.report.f_min;
        let attained = s
            .report
            .clusters
            .iter()
            .any(|c| f.value(&c.point).unwrap() == reported);
        if !attained {
            return Err(format!("{}: no returned point attains f_min = {reported}", s.instance.name));
        }
        let d = (reported - g).abs();
        if d <= 1e-3 {
            if d >= worst.0 {
                worst = (d, &s.instance.name);
            }
            continue;
        }
        if reported > g {
            return Err(format!("{}: reported {reported} but grid reaches {g}", s.instance.name));
        }
        let polished = grid
            .local_minima(64)
            .into_iter()
            .map(|x| zoom(&f, &s.instance.domain, x, grid.step))
            .fold(g, f64::min);
        if (reported - polished).abs() > 1e-3 {
            return Err(format!(
                "{}: reported {reported}, grid {g}, refined grid {polished}",
                s.instance.name
            ));
        }
        refined.push(format!(
            "{} (grid {:.1e} above, refined {:.1e})",
            s.instance.name,
            g - reported,
            (reported - polished).abs()
        ));
    }
    let mut line = format!("largest |f_min - grid min| = {:.2e} ({})", worst.0, worst.1);
    if !refined.is_empty() {
        line.push_str(&format!(
            "; plain grid too coarse, judged on refined grid: {}",
            refined.join(", ")
        ));
    }
    Ok(line)
}

fn main() {
    let finite: Vec<Solved> = finite_instances().into_iter().map(run).collect();
    let dims: Vec<Solved> = (2..=5).map(|d| run(test_dim(d))).collect();
    let continuum: Vec<Solved> = continuum_instances().into_iter().map(run).collect();
    let all: Vec<&Solved> = finite.iter().chain(&dims).chain(&continuum).collect();
    let relaxation_set: Vec<TestInstance> = all.iter().map(|s| s.instance.clone()).collect();

    let results: Vec<(&str, Check)> = vec![
        ("finite optima counts", criterion_1(&finite)),
        ("solution quality", criterion_2(&finite)),
        ("high-dimensional counts", criterion_3(&dims)),
        ("infinite solution sets", criterion_4(&continuum)),
        ("termination budget", criterion_5(&all)),
        ("relaxation properties", criterion_6(&relaxation_set)),
        ("interval containment fuzz", criterion_7()),
        ("convex shortcut", criterion_8()),
        ("grid oracle soundness", criterion_9(&all)),
    ];

    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
