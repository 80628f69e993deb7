//! Piecewise-convexification branch and bound.
//!
//! Boxes live in exactly one of three lists:
//!
//! * `active`: relaxation not yet certified convex (`lambda_tilde < 0`); candidates for bisection.
//! * `convex`: objective certified convex on the box; frozen, never split again.
//! * `discarded`: relaxed minimum above the best known value; cannot hold a global minimizer.
//!
//! Each outer iteration bisects the active box of largest modified width
//! (earliest inserted on ties), relaxes and solves both halves, and files them.
//! The loop stops once no active box remains or every active box has modified
//! width at most `epsilon`. The solution set is drawn from the relaxation
//! minimizers of the surviving active and convex boxes.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::convex_solver::minimize_on_box;
use crate::error::{Error, Result};
use crate::expression::Objective;
use crate::geometry::BoxRegion;
use crate::relaxation::certify;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub region: BoxRegion,
    /// Minimizer of the relaxation on `region`.
    pub candidate: Vec<f64>,
    /// Relaxed minimum, a lower bound of the objective on `region`.
    pub relaxed_min: f64,
    pub alpha: Vec<f64>,
    pub lambda_tilde: f64,
    /// Objective at `candidate`; absent for boxes discarded on arrival.
    pub candidate_value: Option<f64>,
    /// Modified width of `region` under `alpha`.
    pub width: f64,
}

/// A point together with its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Removes and returns the first record of maximal modified width.
pub fn select_node(active: &mut Vec<NodeRecord>) -> Result<NodeRecord> {
    if active.is_empty() {
        return Err(Error::Empty);
    }
    let mut best = 0;
    for (i, r) in active.iter().enumerate().skip(1) {
        if r.width > active[best].width {
            best = i;
        }
    }
    Ok(active.remove(best))
}

/// Moves every active record with `relaxed_min > v_glob` to `discarded`,
/// preserving order in both lists. Returns the number moved.
pub fn discard_sweep(
    active: &mut Vec<NodeRecord>,
    discarded: &mut Vec<NodeRecord>,
    v_glob: f64,
) -> usize {
    let before = active.len();
    let (keep, drop): (Vec<_>, Vec<_>) = std::mem::take(active)
        .into_iter()
        .partition(|r| !(r.relaxed_min > v_glob));
    *active = keep;
    discarded.extend(drop);
    before - active.len()
}

/// Keeps the pool entries within `filter_tol` of the pool minimum.
pub fn assemble_solution_set(pool: &[Candidate], filter_tol: f64) -> Vec<Candidate> {
    let best = pool.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    pool.iter()
        .filter(|c| c.value <= best + filter_tol)
        .cloned()
        .collect()
}

/// Greedy clustering: visiting points by increasing value (ties in input
/// order), each joins the first cluster whose representative lies within
/// `delta`, otherwise it founds a new cluster. Representatives are therefore
/// the lowest-valued member of each cluster.
pub fn cluster_solutions(points: &[Candidate], delta: f64) -> Vec<Candidate> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].value.total_cmp(&points[b].value));
    let mut reps: Vec<Candidate> = Vec::new();
    for i in order {
        let p = &points[i];
        let near = reps.iter().any(|r| {
            r.point
                .iter()
                .zip(&p.point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                <= delta
        });
        if !near {
            reps.push(p.clone());
        }
    }
    reps
}

/// Box lists at termination, for plotting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoxLists {
    pub active: Vec<BoxRegion>,
    pub convex: Vec<BoxRegion>,
    pub discarded: Vec<BoxRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dimension: usize,
    pub domain: BoxRegion,
    pub epsilon: f64,
    pub iterations: usize,
    /// 1 when the active list ran empty, 0 when every active box had
    /// modified width at most epsilon.
    pub flag_ter: u8,
    pub f_min: f64,
    pub n_eps: usize,
    /// Cluster representatives.
    pub clusters: Vec<Candidate>,
    /// Every filtered candidate before clustering.
    pub solutions: Vec<Candidate>,
    pub boxes_active: usize,
    pub boxes_convex: usize,
    pub boxes_discarded: usize,
    /// Inner solves that hit the iteration cap.
    pub inner_nonconverged: usize,
    pub hit_iteration_limit: bool,
    pub boxes: BoxLists,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunReport {
    /// Summary line printed by the command-line front end.
    pub fn summary(&self) -> String {
        format!(
            "iter={} n_eps={} f_min={} flag_ter={}",
            self.iterations, self.n_eps, self.f_min, self.flag_ter
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))
    }
}

/// Wall clock for reports. The browser target has no monotonic clock in
/// `std`, so there the elapsed time is always zero.
#[derive(Debug, Clone, Copy)]
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        return Self(std::time::Instant::now());
        #[cfg(target_arch = "wasm32")]
        return Self();
    }

    fn elapsed(&self) -> Duration {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed();
        #[cfg(target_arch = "wasm32")]
        return Duration::ZERO;
    }
}

/// Resumable solver state; [`solve`] drives it to completion.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    objective: &'a Objective,
    domain: BoxRegion,
    cfg: SolverConfig,
    active: Vec<NodeRecord>,
    convex: Vec<NodeRecord>,
    discarded: Vec<NodeRecord>,
    v_glob: f64,
    v_act: f64,
    x_act: Option<Vec<f64>>,
    iterations: usize,
    inner_nonconverged: usize,
    started: Stopwatch,
}

impl<'a> Solver<'a> {
    /// Relaxes and solves the root box and files it like any child.
    pub fn new(objective: &'a Objective, domain: BoxRegion, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if domain.dimension() != objective.dimension() {
            return Err(Error::DimensionMismatch {
                expected: objective.dimension(),
                actual: domain.dimension(),
            });
        }
        let mut s = Self {
            objective,
            domain: domain.clone(),
            cfg,
            active: Vec::new(),
            convex: Vec::new(),
            discarded: Vec::new(),
            v_glob: f64::INFINITY,
            v_act: f64::INFINITY,
            x_act: None,
            iterations: 0,
            inner_nonconverged: 0,
            started: Stopwatch::start(),
        };
        s.process(domain)?;
        Ok(s)
    }

    pub fn active(&self) -> &[NodeRecord] {
        &self.active
    }

    pub fn convex(&self) -> &[NodeRecord] {
        &self.convex
    }

    pub fn discarded(&self) -> &[NodeRecord] {
        &self.discarded
    }

    pub fn v_glob(&self) -> f64 {
        self.v_glob
    }

    pub fn x_act(&self) -> Option<&[f64]> {
        self.x_act.as_deref()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn max_active_width(&self) -> f64 {
        self.active.iter().map(|r| r.width).fold(0.0, f64::max)
    }

    pub fn is_finished(&self) -> bool {
        self.active.is_empty()
            || self.max_active_width() <= self.cfg.epsilon
            || self.iterations >= self.cfg.max_outer_iters
    }

    /// One outer iteration. Returns `false` without doing anything once finished.
    pub fn step(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        self.iterations += 1;
        let parent = select_node(&mut self.active)?;
        let (left, right) = parent.region.split()?;
        self.process(left)?;
        self.process(right)?;
        Ok(true)
    }

    fn process(&mut self, region: BoxRegion) -> Result<()> {
        let cert = certify(self.objective, &region, self.cfg.hessian_slack)?;
        let sol = minimize_on_box(self.objective, &region, &cert.alpha, &self.cfg)?;
        if !sol.converged {
            self.inner_nonconverged += 1;
        }
        let width = region.modified_width(&cert.alpha)?;
        let mut record = NodeRecord {
            region,
            candidate: sol.minimizer,
            relaxed_min: sol.value,
            alpha: cert.alpha,
            lambda_tilde: cert.lambda_tilde,
            candidate_value: None,
            width,
        };
        if !(record.relaxed_min <= self.v_glob + self.cfg.discard_margin) {
            self.discarded.push(record);
            return Ok(());
        }
        let value = self.objective.value(&record.candidate)?;
        record.candidate_value = Some(value);
        let candidate = record.candidate.clone();
        if record.lambda_tilde >= 0.0 {
            self.convex.push(record);
        } else {
            self.active.push(record);
        }
        if value <= self.v_act {
            self.x_act = Some(candidate);
            self.v_act = value;
            self.v_glob = self.v_act.min(self.v_glob);
            discard_sweep(&mut self.active, &mut self.discarded, self.v_glob);
        }
        Ok(())
    }

    /// Candidates of the retained (active and convex) boxes.
    pub fn pool(&self) -> Vec<Candidate> {
        self.active
            .iter()
            .chain(&self.convex)
            .filter_map(|r| {
                r.candidate_value.map(|value| Candidate {
                    point: r.candidate.clone(),
                    value,
                })
            })
            .collect()
    }

    pub fn report(&self) -> RunReport {
        let solutions = assemble_solution_set(&self.pool(), self.cfg.filter_tol);
        let clusters = cluster_solutions(&solutions, self.cfg.cluster_delta);
        let f_min = solutions
            .iter()
            .map(|c| c.value)
            .fold(f64::INFINITY, f64::min);
        let boxes = |list: &[NodeRecord]| list.iter().map(|r| r.region.clone()).collect();
        RunReport {
            dimension: self.domain.dimension(),
            domain: self.domain.clone(),
            epsilon: self.cfg.epsilon,
            iterations: self.iterations,
            flag_ter: u8::from(self.active.is_empty()),
            f_min,
            n_eps: clusters.len(),
            clusters,
            solutions,
            boxes_active: self.active.len(),
            boxes_convex: self.convex.len(),
            boxes_discarded: self.discarded.len(),
            inner_nonconverged: self.inner_nonconverged,
            hit_iteration_limit: !self.active.is_empty()
                && self.max_active_width() > self.cfg.epsilon,
            boxes: BoxLists {
                active: boxes(&self.active),
                convex: boxes(&self.convex),
                discarded: boxes(&self.discarded),
            },
            wall_time: self.started.elapsed(),
        }
    }
}

/// Runs the branch and bound to termination.
pub fn solve(objective: &Objective, domain: &BoxRegion, cfg: &SolverConfig) -> Result<RunReport> {
    let mut solver = Solver::new(objective, domain.clone(), cfg.clone())?;
    while solver.step()? {}
    let report = solver.report();
    if report.hit_iteration_limit {
        log::warn!("outer iteration limit {} reached", cfg.max_outer_iters);
    }
    Ok(report)
}
