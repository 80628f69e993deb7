//! Benchmark instances, the batch runner and subdivision plots.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::bnb::{solve, RunReport};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::expression::Objective;
use crate::geometry::BoxRegion;

/// Where a global minimizer set comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MinimizerSet {
    /// Finitely many points.
    Finite(Vec<Vec<f64>>),
    /// A continuum, described in words.
    Continuum(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestInstance {
    pub name: String,
    pub formula: String,
    pub dimension: usize,
    pub domain: BoxRegion,
    pub known_min_value: f64,
    pub known_minimizers: MinimizerSet,
    /// Number of solutions reported in the published results, when finite.
    pub expected_count: Option<usize>,
    /// How the minimizer coordinates were obtained.
    pub provenance: &'static str,
}

impl TestInstance {
    pub fn objective(&self) -> Objective {
        Objective::parse(&self.formula, self.dimension)
            .expect("registry formulas parse")
    }

    pub fn finite_minimizers(&self) -> Option<&[Vec<f64>]> {
        match &self.known_minimizers {
            MinimizerSet::Finite(v) => Some(v),
            MinimizerSet::Continuum(_) => None,
        }
    }
}

const PUBLISHED: &str = "published";
const ANALYTIC: &str = "analytic";
const REFINED: &str = "grid search + high-precision Newton refinement";

fn two_d(lo: [f64; 2], hi: [f64; 2]) -> BoxRegion {
    BoxRegion::new(lo.to_vec(), hi.to_vec()).expect("valid registry box")
}

fn finite(
    name: &str,
    formula: &str,
    domain: BoxRegion,
    min: f64,
    points: Vec<Vec<f64>>,
    expected: usize,
    provenance: &'static str,
) -> TestInstance {
    TestInstance {
        name: name.to_string(),
        formula: formula.to_string(),
        dimension: domain.dimension(),
        domain,
        known_min_value: min,
        known_minimizers: MinimizerSet::Finite(points),
        expected_count: Some(expected),
        provenance,
    }
}

fn continuum(name: &str, formula: &str, domain: BoxRegion, set: &'static str) -> TestInstance {
    TestInstance {
        name: name.to_string(),
        formula: formula.to_string(),
        dimension: domain.dimension(),
        domain,
        known_min_value: 0.0,
        known_minimizers: MinimizerSet::Continuum(set),
        expected_count: None,
        provenance: ANALYTIC,
    }
}

fn product(xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
    xs.iter()
        .flat_map(|&x| ys.iter().map(move |&y| vec![x, y]))
        .collect()
}

/// The two-dimensional instances with finitely many global minimizers.
pub fn finite_instances() -> Vec<TestInstance> {
    use std::f64::consts::PI;

    // Shubert factors: first factor maximal (14.508...) paired with the second
    // minimal (-12.870...), and the reverse.
    let shubert_max_x1 = [-6.482_864_206_707_613, -0.199_678_899_528_026_9, 6.0835064076515596];
    let shubert_min_x2 = [-7.708_313_735_499_347, -1.425128428319761, 4.858_056_878_859_825];
    let shubert_min_x1 = [-5.858_056_878_859_825, 0.42512842831976097, 6.708_313_735_499_347];
    let shubert_max_x2 = [-7.0835064076515596, -0.800_321_100_471_973_1, 5.482_864_206_707_613];
    let mut shubert = product(&shubert_max_x1, &shubert_min_x2);
    shubert.extend(product(&shubert_min_x1, &shubert_max_x2));

    let rm = 0.497_479_633_395_11;
    let vincent: Vec<f64> = (-2..=3)
        .map(|k| (PI / 20.0 + k as f64 * PI / 5.0).exp())
        .collect();
    let deb = [0.1, 0.3, 0.5, 0.7, 0.9];
    let hump = [0.089_842_013_100_318_06, -0.712_656_403_020_739_6];

    vec![
        finite(
            "Rastrigin",
            "20 + x1^2 + x2^2 - 10*(cos(2*pi*x1) + cos(2*pi*x2))",
            BoxRegion::cube(-5.12, 5.12, 2).unwrap(),
            0.0,
            vec![vec![0.0, 0.0]],
            1,
            ANALYTIC,
        ),
        finite(
            "6-Hump",
            "(4 - 2.1*x1^2 + x1^4/3)*x1^2 + x1*x2 - (4 - 4*x2^2)*x2^2",
            two_d([-1.9, -1.1], [1.9, 1.1]),
            -1.0316284534898774,
            vec![hump.to_vec(), vec![-hump[0], -hump[1]]],
            2,
            REFINED,
        ),
        finite(
            "Branin",
            "(x2 - 5.1/(4*pi^2)*x1^2 + 5/pi*x1 - 6)^2 + 10*(1 - 1/(8*pi))*cos(x1) + 10",
            two_d([-5.0, 0.0], [10.0, 15.0]),
            10.0 / (8.0 * PI),
            vec![vec![-PI, 12.275], vec![PI, 2.275], vec![3.0 * PI, 2.475]],
            2,
            ANALYTIC,
        ),
        finite(
            "Himmelblau",
            "(x1^2 + x2 - 11)^2 + (x1 + x2^2 - 7)^2",
            BoxRegion::cube(-6.0, 6.0, 2).unwrap(),
            0.0,
            vec![
                vec![3.0, 2.0],
                vec![-2.805_118_086_952_745, 3.131312518250573],
                vec![-3.779_310_253_377_747, -3.2831859912861694],
                vec![3.5844283403304917, -1.8481265269644036],
            ],
            4,
            REFINED,
        ),
        finite(
            "Rastrigin-mod",
            "20 + x1^2 + x2^2 + 10*(cos(2*pi*x1) + cos(2*pi*x2))",
            BoxRegion::cube(-5.12, 5.12, 2).unwrap(),
            0.49747968580169165,
            product(&[-rm, rm], &[-rm, rm]),
            4,
            REFINED,
        ),
        finite(
            "Shubert",
            "(cos(2*x1 + 1) + 2*cos(3*x1 + 1) + 3*cos(4*x1 + 1) + 4*cos(5*x1 + 1) + 5*cos(6*x1 + 1))\
             * (cos(2*x2 + 1) + 2*cos(3*x2 + 2) + 3*cos(4*x2 + 3) + 4*cos(5*x2 + 4) + 5*cos(6*x2 + 5))",
            BoxRegion::cube(-10.0, 10.0, 2).unwrap(),
            14.508007927195033 * -12.870885497725685,
            shubert,
            18,
            REFINED,
        ),
        finite(
            "Deb-1",
            "-0.5*(sin(5*pi*x1)^6 + sin(5*pi*x2)^6)",
            BoxRegion::cube(0.0, 1.0, 2).unwrap(),
            -1.0,
            product(&deb, &deb),
            25,
            ANALYTIC,
        ),
        finite(
            "Vincent",
            "-0.5*(sin(10*ln(x1)) + sin(10*ln(x2)))",
            BoxRegion::cube(0.25, 10.0, 2).unwrap(),
            -1.0,
            product(&vincent, &vincent),
            36,
            ANALYTIC,
        ),
    ]
}

/// The two-dimensional instances whose minimizers form curves or segments.
pub fn continuum_instances() -> Vec<TestInstance> {
    vec![
        continuum(
            "Test01",
            "(x1^2/4^2 + x2^2/2^2 - 1)^2",
            BoxRegion::cube(-5.0, 5.0, 2).unwrap(),
            "ellipse x1^2/16 + x2^2/4 = 1",
        ),
        continuum(
            "Test02",
            "1/10*(x1*(1 - x2) + x2*(1 - x1))^2",
            BoxRegion::cube(-5.0, 5.0, 2).unwrap(),
            "hyperbola x2 = -x1/(1 - 2 x1), x1 != 1/2",
        ),
        continuum(
            "Test03",
            "sin(5/4*x1 + x2 - 3)^2",
            two_d([0.0, -2.0], [4.0, 3.0]),
            "lines 5/4 x1 + x2 = 3 + a, a in {0, pi, -pi}",
        ),
        continuum(
            "Test04",
            "(x1 + sin(x1)^2)*cos(x2)^2",
            two_d([0.0, -2.0], [4.0, 3.0]),
            "segment x1 = 0 together with lines x2 = +-pi/2",
        ),
    ]
}

/// `sum_i cos(2 pi x_i)^2` on `[-1/4, 1/4]^d`, minimized at every corner.
pub fn test_dim(d: usize) -> TestInstance {
    let formula = (1..=d)
        .map(|i| format!("cos(2*pi*x{i})^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    let domain = BoxRegion::cube(-0.25, 0.25, d).unwrap();
    let corners = domain.corners();
    TestInstance {
        name: format!("TestDim_{d}"),
        formula,
        dimension: d,
        domain,
        known_min_value: 0.0,
        known_minimizers: MinimizerSet::Finite(corners),
        expected_count: Some(1 << d),
        provenance: PUBLISHED,
    }
}

/// Every instance with a fixed dimension, plus `TestDim_2 ..= TestDim_5`.
pub fn registry() -> Vec<TestInstance> {
    let mut all = finite_instances();
    all.extend(continuum_instances());
    all.extend((2..=5).map(test_dim));
    all
}

fn normalize(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace([' ', '_'], "-")
}

/// Looks up an instance by name; `TestDim_<d>` accepts any `d >= 1`.
pub fn instance(name: &str) -> Result<TestInstance> {
    let key = normalize(name);
    if let Some(d) = key.strip_prefix("testdim-") {
        if let Ok(d) = d.parse::<usize>() {
            if (1..=16).contains(&d) {
                return Ok(test_dim(d));
            }
        }
        return Err(Error::UnknownInstance(name.to_string()));
    }
    finite_instances()
        .into_iter()
        .chain(continuum_instances())
        .find(|inst| normalize(&inst.name) == key)
        .ok_or_else(|| Error::UnknownInstance(name.to_string()))
}

/// Names accepted by `--instance all`: the finite and continuum tables.
pub fn default_suite() -> Vec<String> {
    finite_instances()
        .into_iter()
        .chain(continuum_instances())
        .map(|i| i.name)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub name: String,
    pub iter: usize,
    pub wall_ms: u128,
    pub n_eps: usize,
    pub flag_ter: u8,
    pub f_min: f64,
}

impl SuiteRow {
    fn from_report(name: &str, report: &RunReport) -> Self {
        Self {
            name: name.to_string(),
            iter: report.iterations,
            wall_ms: report.wall_time.as_millis(),
            n_eps: report.n_eps,
            flag_ter: report.flag_ter,
            f_min: report.f_min,
        }
    }
}

/// Solves each named instance, independent instances in parallel.
/// Rows come back in the order of `names`.
pub fn run_suite(names: &[String], cfg: &SolverConfig) -> Result<Vec<(SuiteRow, RunReport)>> {
    let instances = names
        .iter()
        .map(|n| instance(n))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<RunReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = instances
            .iter()
            .map(|inst| scope.spawn(move || solve(&inst.objective(), &inst.domain, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    instances
        .iter()
        .zip(results)
        .map(|(inst, r)| r.map(|rep| (SuiteRow::from_report(&inst.name, &rep), rep)))
        .collect()
}

pub const CSV_HEADER: &str = "name,iter,wall_ms,n_eps,flag_ter,f_min";

pub fn suite_csv(rows: &[SuiteRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name, r.iter, r.wall_ms, r.n_eps, r.flag_ter, r.f_min
        );
    }
    out
}

/// Stroke colours by list membership.
pub const ACTIVE_STROKE: &str = "#d62728";
pub const CONVEX_STROKE: &str = "#1f77b4";
pub const DISCARDED_STROKE: &str = "#b0b0b0";
pub const MARKER_FILL: &str = "#e31a1c";

fn star(cx: f64, cy: f64, r: f64) -> String {
    let mut pts = Vec::with_capacity(10);
    for k in 0..10 {
        let rad = if k % 2 == 0 { r } else { 0.4 * r };
        let t = std::f64::consts::PI * (0.5 + k as f64 / 5.0);
        pts.push(format!("{:.6},{:.6}", cx + rad * t.cos(), cy + rad * t.sin()));
    }
    pts.join(" ")
}

/// SVG of the final subdivision with solution points starred.
///
/// Coordinates are the problem's own, flipped so `x2` grows upward, with a
/// margin of one unit around the domain.
pub fn render_subdivision_svg(report: &RunReport) -> Result<String> {
    if report.dimension != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: report.dimension,
        });
    }
    let (lo, hi) = (report.domain.lower(), report.domain.upper());
    let margin = 1.0;
    let (x0, y0) = (lo[0] - margin, -(hi[1] + margin));
    let (w, h) = (hi[0] - lo[0] + 2.0 * margin, hi[1] - lo[1] + 2.0 * margin);
    let marker = 0.012 * report.domain.max_width().max(1e-9);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {w} {h}" width="640" height="{}">"#,
        (640.0 * h / w).round()
    );
    let _ = writeln!(svg, r#"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="white"/>"#);
    let lists = [
        ("discarded", DISCARDED_STROKE, &report.boxes.discarded),
        ("convex", CONVEX_STROKE, &report.boxes.convex),
        ("active", ACTIVE_STROKE, &report.boxes.active),
    ];
    for (class, stroke, boxes) in lists {
        let _ = writeln!(
            svg,
            r#"<g class="{class}" fill="none" stroke="{stroke}" stroke-width="0.6" vector-effect="non-scaling-stroke">"#
        );
        for b in boxes.iter() {
            let _ = writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="{}" height="{}" vector-effect="non-scaling-stroke"/>"#,
                b.lower()[0],
                -b.upper()[1],
                b.width(0),
                b.width(1)
            );
        }
        svg.push_str("</g>\n");
    }
    let _ = writeln!(svg, r#"<g class="solutions" fill="{MARKER_FILL}" stroke="none">"#);
    for c in &report.solutions {
        let _ = writeln!(
            svg,
            r#"<polygon points="{}"/>"#,
            star(c.point[0], -c.point[1], marker)
        );
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

pub fn emit_subdivision_svg(report: &RunReport, path: &Path) -> Result<()> {
    let svg = render_subdivision_svg(report)?;
    std::fs::write(path, svg).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn format_duration(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}
