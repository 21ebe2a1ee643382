//! The main iteration: evaluate the control, the cutters, `φ`, `β` and the
//! weights at `x_k`, combine, relax, project onto `Q`, and repeat until the
//! exact feasibility test passes.

use alloc::string::String;
use alloc::vec::Vec;

use crate::controls::{Control, ControlSpec};
use crate::operators::Cutter;
use crate::problem::Problem;
use crate::schedules::{
    beta, CorrectionCounter, CounterMode, OverrelaxationSchedule, PhiFunctional, RelaxationSchedule,
    WeightRule,
};
use crate::vector::{self, CompensatedSum, Vector};
use crate::{Error, Result};

/// How the step vector is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateForm {
    /// `Σ λ β (T_i(x) − x)` from the cutter images.
    Cutter,
    /// `−Σ λ (r + f_i(x))/‖g_i(x)‖² g_i(x)` over violated sublevel
    /// constraints; the same iteration as `Cutter` with `φ = ‖g‖`.
    SubgradientClosedForm,
}

/// Everything one run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    pub control: ControlSpec,
    pub relaxation: RelaxationSchedule,
    pub overrelaxation: OverrelaxationSchedule,
    pub phi: PhiFunctional,
    pub weights: WeightRule,
    pub counter_mode: CounterMode,
    pub x0: Vector,
    pub max_iter: u64,
    /// Indices tested by the termination check.
    pub feas_window: Vec<usize>,
    pub feas_tol: f64,
    pub update: UpdateForm,
    /// Keep every [`TraceRecord`]; off saves memory in large sweeps.
    pub keep_trace: bool,
}

pub const DEFAULT_MAX_ITER: u64 = 1_000_000;

impl RunConfig {
    /// Defaults: `α ≡ 1`, harmonic `r`, `φ ≡ 1`, uniform weights, bracketed
    /// counter, the whole pool as feasibility window (empty for `m = ∞`).
    pub fn new(problem: Problem, control: ControlSpec, x0: Vector) -> Result<Self> {
        x0.ensure_dim(problem.dim())?;
        if !problem.outer().contains(x0.as_slice()) {
            return Err(Error::StartOutsideOuter);
        }
        let feas_window = problem.full_window().unwrap_or_default();
        Ok(Self {
            problem,
            control,
            relaxation: RelaxationSchedule::Constant(1.0),
            overrelaxation: OverrelaxationSchedule::Harmonic,
            phi: PhiFunctional::One,
            weights: WeightRule::UniformOverActive,
            counter_mode: CounterMode::Bracketed,
            x0,
            max_iter: DEFAULT_MAX_ITER,
            feas_window,
            feas_tol: 0.0,
            update: UpdateForm::Cutter,
            keep_trace: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.x0.ensure_dim(self.problem.dim())?;
        if !self.problem.outer().contains(self.x0.as_slice()) {
            return Err(Error::StartOutsideOuter);
        }
        self.relaxation.validate()?;
        self.overrelaxation.validate()?;
        self.weights.validate()?;
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if !(self.feas_tol >= 0.0) {
            return Err(Error::Config("feas_tol must be nonnegative".into()));
        }
        if self.feas_window.is_empty() {
            return Err(Error::WindowRequired);
        }
        for &i in &self.feas_window {
            self.problem.constraint(i)?;
        }
        if let PhiFunctional::Custom { lower, upper, .. } = self.phi {
            if !(lower > 0.0 && lower <= upper) {
                return Err(Error::Config("custom phi needs 0 < lower <= upper".into()));
            }
        }
        Ok(())
    }
}

/// Per-index evaluation within one step.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEval {
    pub index: usize,
    /// `f_i(x)` for sublevel constraints, `d(x, C_i)` otherwise.
    pub residual: f64,
    /// `‖T_i(x) − x‖`.
    pub displacement: f64,
    /// `φ_i(x)`, evaluated only for violated indices.
    pub phi: Option<f64>,
    pub beta: f64,
    pub weight: f64,
    pub violated: bool,
}

/// Snapshot of iteration `k`, taken at `x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: u64,
    /// `[k]`, the corrections before step `k`.
    pub bracket_k: u64,
    /// The index fed to `α` and `r`: `[k]` or `k` depending on the counter.
    pub schedule_index: u64,
    pub x: Vector,
    pub active: Vec<usize>,
    /// `I_k⁺(x_k)`.
    pub violated: Vec<usize>,
    pub evals: Vec<IndexEval>,
    pub step_norm: f64,
    pub alpha: f64,
    pub r: f64,
    pub feasible: bool,
    pub corrected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: Vector,
    pub corrected: bool,
    pub record: TraceRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    FeasibleAt(u64),
    MaxIterExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub status: RunStatus,
    /// One record per step, plus a terminal record at the feasible iterate.
    pub trace: Vec<TraceRecord>,
    pub final_x: Vector,
    pub corrections: u64,
    pub iterations: u64,
    /// First step at which `‖x_k‖` left the expected scale; only monitored
    /// outside the `φ ≡ 1` and `φ = ‖g‖` regimes.
    pub unbounded_at: Option<u64>,
    pub warnings: Vec<String>,
}

impl RunResult {
    pub fn k_feasible(&self) -> Option<u64> {
        match self.status {
            RunStatus::FeasibleAt(k) => Some(k),
            RunStatus::MaxIterExceeded => None,
        }
    }
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct Solver {
    cfg: RunConfig,
    control: Control,
    warnings: Vec<String>,
}

impl Solver {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let control = Control::new(cfg.control.clone(), &cfg.problem)?;
        let mut warnings = Vec::new();
        if !cfg.overrelaxation.divergent_sum() {
            warnings.push(String::from(
                "overrelaxation schedule is not known to have a divergent sum; finite convergence is not guaranteed",
            ));
        }
        if matches!(cfg.overrelaxation, OverrelaxationSchedule::Constant(_))
            && !matches!(cfg.phi, PhiFunctional::One)
        {
            warnings.push(String::from(
                "constant overrelaxation is only covered by the theory with phi = 1 and r <= R",
            ));
        }
        Ok(Self {
            cfg,
            control,
            warnings,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_feasible(&self, x: &Vector) -> Result<bool> {
        self.cfg
            .problem
            .feasible(x, &self.cfg.feas_window, self.cfg.feas_tol)
    }

    /// One iteration from `x_k` with the configured update form.
    pub fn step(&self, x: &Vector, k: u64, counter: CorrectionCounter) -> Result<StepOutcome> {
        match self.cfg.update {
            UpdateForm::Cutter => self.step_cutter(x, k, counter),
            UpdateForm::SubgradientClosedForm => self.step_subgradient(x, k, counter),
        }
    }

    pub fn step_cutter(&self, x: &Vector, k: u64, counter: CorrectionCounter) -> Result<StepOutcome> {
        let (active, alpha, r) = self.prologue(x, k, counter)?;
        let problem = &self.cfg.problem;
        let xs = x.as_slice();
        let mut evals = Vec::with_capacity(active.len());
        let mut directions: Vec<Option<Vec<f64>>> = Vec::with_capacity(active.len());
        for &i in &active {
            let c = problem.constraint(i)?;
            let violated = c.value(xs) > 0.0;
            let eval = c.apply(x)?;
            let residual = if c.is_sublevel() {
                eval.residual
            } else {
                c.distance(xs).unwrap_or(eval.residual)
            };
            let (phi, b, dir) = if violated {
                let phi = self.cfg.phi.evaluate(i, &c, xs)?;
                let d = eval.displacement_norm;
                let b = beta(r, phi, d);
                let dir: Vec<f64> = if d > 0.0 {
                    eval.image
                        .as_slice()
                        .iter()
                        .zip(xs)
                        .map(|(t, xi)| b * (t - xi))
                        .collect()
                } else {
                    // rounding left x in place although it is outside C_i:
                    // take the limit of β(T(x) − x) along −g
                    let g = c.subgradient(xs);
                    let gn = g.norm();
                    if gn == 0.0 {
                        return Err(Error::InconsistentConstraint);
                    }
                    g.as_slice().iter().map(|gj| -(r / phi) * gj / gn).collect()
                };
                (Some(phi), b, Some(dir))
            } else {
                (None, 0.0, None)
            };
            evals.push(IndexEval {
                index: i,
                residual,
                displacement: eval.displacement_norm,
                phi,
                beta: b,
                weight: 0.0,
                violated,
            });
            directions.push(dir);
        }
        self.combine(x, k, counter, active, alpha, r, evals, directions)
    }

    pub fn step_subgradient(&self, x: &Vector, k: u64, counter: CorrectionCounter) -> Result<StepOutcome> {
        let (active, alpha, r) = self.prologue(x, k, counter)?;
        let problem = &self.cfg.problem;
        let xs = x.as_slice();
        let mut evals = Vec::with_capacity(active.len());
        let mut directions = Vec::with_capacity(active.len());
        for &i in &active {
            let c = problem.constraint(i)?;
            let f = c.value(xs);
            if f <= 0.0 {
                evals.push(IndexEval {
                    index: i,
                    residual: f,
                    displacement: 0.0,
                    phi: None,
                    beta: 0.0,
                    weight: 0.0,
                    violated: false,
                });
                directions.push(None);
                continue;
            }
            if !c.is_sublevel() {
                return Err(Error::Precondition(alloc::format!(
                    "closed-form subgradient update needs sublevel constraints; index {i} is not"
                )));
            }
            let g = c.subgradient(xs);
            let gg = vector::norm_sq(g.as_slice());
            if gg == 0.0 {
                return Err(Error::InconsistentConstraint);
            }
            let gn = g.norm();
            let t = (r + f) / gg;
            let d = f / gn;
            evals.push(IndexEval {
                index: i,
                residual: f,
                displacement: d,
                phi: Some(gn),
                beta: beta(r, gn, d),
                weight: 0.0,
                violated: true,
            });
            directions.push(Some(g.as_slice().iter().map(|gj| -t * gj).collect()));
        }
        self.combine(x, k, counter, active, alpha, r, evals, directions)
    }

    fn prologue(&self, x: &Vector, k: u64, counter: CorrectionCounter) -> Result<(Vec<usize>, f64, f64)> {
        x.ensure_dim(self.cfg.problem.dim())?;
        let active = self.control.next_indices(k, x, &self.cfg.problem)?;
        let n = counter.value();
        Ok((active, self.cfg.relaxation.value(n), self.cfg.overrelaxation.value(n)))
    }

    #[allow(clippy::too_many_arguments)]
    fn combine(
        &self,
        x: &Vector,
        k: u64,
        counter: CorrectionCounter,
        active: Vec<usize>,
        alpha: f64,
        r: f64,
        mut evals: Vec<IndexEval>,
        directions: Vec<Option<Vec<f64>>>,
    ) -> Result<StepOutcome> {
        let mask: Vec<bool> = evals.iter().map(|e| e.violated).collect();
        let weights = self.cfg.weights.weights(&active, &mask)?;
        let dim = x.dim();
        let mut sums = alloc::vec![CompensatedSum::default(); dim];
        for ((e, w), dir) in evals.iter_mut().zip(&weights).zip(&directions) {
            e.weight = *w;
            if let Some(dir) = dir {
                for (s, dj) in sums.iter_mut().zip(dir) {
                    s.add(w * dj);
                }
            }
        }
        let step: Vec<f64> = sums.iter().map(|s| alpha * s.value()).collect();
        let corrected = step.iter().any(|s| *s != 0.0);
        let next = if corrected {
            let moved: Vec<f64> = x.as_slice().iter().zip(&step).map(|(a, b)| a + b).collect();
            let moved = Vector::new(moved).map_err(|_| Error::Diverged(k as usize))?;
            self.cfg.problem.outer().project(moved)
        } else {
            x.clone()
        };
        let violated = evals.iter().filter(|e| e.violated).map(|e| e.index).collect();
        let record = TraceRecord {
            k,
            bracket_k: counter.corrections(),
            schedule_index: counter.value(),
            x: x.clone(),
            active,
            violated,
            evals,
            step_norm: vector::norm(&step),
            alpha,
            r,
            feasible: false,
            corrected,
        };
        Ok(StepOutcome {
            next,
            corrected,
            record,
        })
    }

    fn terminal_record(&self, x: &Vector, k: u64, counter: CorrectionCounter) -> TraceRecord {
        let n = counter.value();
        TraceRecord {
            k,
            bracket_k: counter.corrections(),
            schedule_index: n,
            x: x.clone(),
            active: Vec::new(),
            violated: Vec::new(),
            evals: Vec::new(),
            step_norm: 0.0,
            alpha: self.cfg.relaxation.value(n),
            r: self.cfg.overrelaxation.value(n),
            feasible: true,
            corrected: false,
        }
    }

    /// Iterates until `x_k` passes the feasibility test or `max_iter` steps
    /// have been taken.
    pub fn solve(&self) -> Result<RunResult> {
        let cfg = &self.cfg;
        let mut x = cfg.x0.clone();
        let mut counter = CorrectionCounter::new(cfg.counter_mode);
        let mut trace = Vec::new();
        let monitor = !cfg.phi.guarantees_bounded_iterates();
        let scale = 1e6 * cfg.x0.norm().max(1.0);
        let mut unbounded_at = None;
        let mut k = 0;
        let status = loop {
            if self.is_feasible(&x)? {
                if cfg.keep_trace {
                    trace.push(self.terminal_record(&x, k, counter));
                }
                break RunStatus::FeasibleAt(k);
            }
            if k == cfg.max_iter {
                break RunStatus::MaxIterExceeded;
            }
            let out = self.step(&x, k, counter)?;
            counter = counter.update(out.corrected);
            x = out.next;
            if cfg.keep_trace {
                trace.push(out.record);
            }
            if monitor && unbounded_at.is_none() && x.norm() > scale {
                unbounded_at = Some(k + 1);
            }
            k += 1;
        };
        let mut warnings = self.warnings.clone();
        if let Some(k) = unbounded_at {
            warnings.push(alloc::format!("iterates left the initial scale by 1e6 at k = {k}"));
        }
        Ok(RunResult {
            status,
            trace,
            final_x: x,
            corrections: counter.corrections(),
            iterations: k,
            unbounded_at,
            warnings,
        })
    }
}
