//! Checks of the quantitative inequalities behind finite convergence, run over
//! recorded traces, and closed-form oracles for two schedules under which the
//! uncounted iteration never terminates.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controls::ControlSpec;
use crate::engine::{RunConfig, RunResult, RunStatus, Solver, UpdateForm};
use crate::function::ConvexFunction;
use crate::operators::Cutter;
use crate::problem::{random_unit, Body, Constraint, OuterSet, Problem};
use crate::schedules::{
    beta, CorrectionCounter, CounterMode, MergeSource, OverrelaxationSchedule, PhiFunctional,
    RelaxationSchedule,
};
use crate::vector::{self, Vector};
use crate::{Error, Result};

/// One step of the descent check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentEntry {
    pub k: u64,
    /// `‖x_{k+1} − z‖²`.
    pub lhs: f64,
    /// `‖x_k − z‖² − 2αλRρ(x_k)`.
    pub rhs: f64,
    pub slack: f64,
    /// `ρ(x_k) = max_{j ∈ I_k⁺} r/φ_j(x_k)`.
    pub rho: f64,
    /// The step corrected `x_k` and `ρ(x_k) ≤ R`.
    pub applicable: bool,
}

/// `‖x_{k+1} − z‖² ≤ ‖x_k − z‖² − 2αλRρ(x_k)` along a trace, for a ball
/// `B(z, 2R) ⊆ C` with `z ∈ Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentCertificate {
    pub z: Vector,
    pub radius: f64,
    pub lambda: f64,
    pub entries: Vec<DescentEntry>,
    /// Steps whose slack fell below `−1e−9·(1 + ‖x_k − z‖²)`.
    pub violations: Vec<u64>,
}

impl DescentCertificate {
    pub fn applicable_steps(&self) -> usize {
        self.entries.iter().filter(|e| e.applicable).count()
    }

    pub fn min_slack(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.applicable)
            .map(|e| e.slack)
            .reduce(f64::min)
    }
}

pub fn check_descent(
    result: &RunResult,
    outer: &OuterSet,
    z: &Vector,
    radius: f64,
    lambda: f64,
) -> Result<DescentCertificate> {
    if !outer.contains(z.as_slice()) {
        return Err(Error::Precondition("z is not in Q".into()));
    }
    if !(radius > 0.0 && lambda > 0.0) {
        return Err(Error::Config("descent check needs R > 0 and lambda > 0".into()));
    }
    let trace = &result.trace;
    let mut entries = Vec::new();
    let mut violations = Vec::new();
    for (n, rec) in trace.iter().enumerate() {
        if rec.feasible {
            continue;
        }
        let next = match trace.get(n + 1) {
            Some(r) => &r.x,
            None => &result.final_x,
        };
        let before = vector::dist_sq(rec.x.as_slice(), z.as_slice());
        let lhs = vector::dist_sq(next.as_slice(), z.as_slice());
        let rho = rec
            .evals
            .iter()
            .filter(|e| e.violated)
            .filter_map(|e| e.phi.map(|phi| rec.r / phi))
            .fold(0.0, f64::max);
        let rhs = before - 2.0 * rec.alpha * lambda * radius * rho;
        let applicable = rec.corrected && rho <= radius;
        let slack = rhs - lhs;
        if applicable && slack < -1e-9 * (1.0 + before) {
            violations.push(rec.k);
        }
        entries.push(DescentEntry {
            k: rec.k,
            lhs,
            rhs,
            slack,
            rho,
            applicable,
        });
    }
    Ok(DescentCertificate {
        z: z.clone(),
        radius,
        lambda,
        entries,
        violations,
    })
}

/// Outcome of `‖U(x) − y‖² ≤ ‖x − y‖² − ((2−α)/α)‖U(x) − x‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleOperatorCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Builds `U(x) = x + αβ(x)(T(x) − x)` with overrelaxation `rho` and checks
/// the single-operator inequality. The caller guarantees `B(y, ρ) ⊆ fix T`.
pub fn check_single_operator<T: Cutter + ?Sized>(
    t: &T,
    x: &Vector,
    y: &Vector,
    rho: f64,
    alpha: f64,
) -> Result<SingleOperatorCheck> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::RelaxationOutOfRange(alpha));
    }
    let eval = t.apply(x)?;
    let d = eval.displacement_norm;
    if d == 0.0 {
        return Err(Error::HypothesisViolated("x is a fixed point of T"));
    }
    let b = beta(rho, 1.0, d);
    let xs = x.as_slice();
    let u: Vec<f64> = eval
        .image
        .as_slice()
        .iter()
        .zip(xs)
        .map(|(ti, xi)| xi + alpha * b * (ti - xi))
        .collect();
    let lhs = vector::dist_sq(&u, y.as_slice());
    let base = vector::dist_sq(xs, y.as_slice());
    let rhs = base - (2.0 - alpha) / alpha * vector::dist_sq(&u, xs);
    Ok(SingleOperatorCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + 1e-10 * (1.0 + base),
    })
}

/// `δ = −f(z)/r` with `f = max_i f_i`: a lower bound on `‖g_i(x)‖` wherever
/// `f_i(x) > 0` and `‖x − z‖ ≤ r`.
pub fn slater_delta(fs: &[ConvexFunction], z: &Vector, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Config("slater radius must be positive".into()));
    }
    let fz = fs
        .iter()
        .map(|f| f.value(z.as_slice()))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(fz < 0.0) {
        return Err(Error::SlaterPointInvalid(fz));
    }
    Ok(-fz / r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlaterSampleReport {
    pub delta: f64,
    /// Sampled `(point, function)` pairs with `f_i(x) > 0`.
    pub checked: usize,
    pub min_norm: f64,
    pub violations: usize,
}

/// Samples `x` uniformly in `B(z, r)` until `samples` violating pairs have
/// been checked against `‖g_i(x)‖ ≥ δ`.
pub fn sample_slater_bound(
    fs: &[ConvexFunction],
    z: &Vector,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<SlaterSampleReport> {
    let delta = slater_delta(fs, z, r)?;
    let dim = z.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut violations, mut min_norm) = (0, 0, f64::INFINITY);
    let mut draws = 0usize;
    while checked < samples {
        draws += 1;
        if draws > samples.saturating_mul(1000).max(1000) {
            return Err(Error::Precondition("no violating points found in the ball".into()));
        }
        let dir = random_unit(&mut rng, dim);
        let u: f64 = rng.random();
        let scale = r * libm::pow(u, 1.0 / dim as f64);
        let x: Vec<f64> = z.as_slice().iter().zip(&dir).map(|(zi, e)| zi + scale * e).collect();
        for f in fs {
            if checked < samples && f.value(&x) > 0.0 {
                let n = f.subgradient(&x).norm();
                min_norm = min_norm.min(n);
                if n < delta {
                    violations += 1;
                }
                checked += 1;
            }
        }
    }
    Ok(SlaterSampleReport {
        delta,
        checked,
        min_norm,
        violations,
    })
}

/// Steps that left the iterate in place although it was outside some active
/// constraint or outside `Q`; a correct run has none.
pub fn check_fixed_points(result: &RunResult, problem: &Problem) -> Result<Vec<u64>> {
    let mut bad = Vec::new();
    for rec in result.trace.iter().filter(|r| !r.feasible && !r.corrected) {
        let xs = rec.x.as_slice();
        let mut ok = problem.outer().contains(xs);
        for &i in &rec.active {
            ok &= problem.constraint(i)?.member(xs, 0.0);
        }
        if !ok {
            bad.push(rec.k);
        }
    }
    Ok(bad)
}

/// An engine value next to its closed-form counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub k: u64,
    /// Iteration at which the value was taken.
    pub position: u64,
    pub engine: f64,
    pub oracle: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproductionReport {
    pub name: &'static str,
    pub rows: Vec<OracleRow>,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub status: RunStatus,
    pub steps: u64,
    pub feasible_iterates: u64,
    pub checks: Vec<(String, bool)>,
    pub notes: Vec<String>,
}

impl ReproductionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

/// `|e − o|/|o|`, demanding exact agreement when the oracle is zero.
pub fn relative_error(engine: f64, oracle: f64) -> f64 {
    if oracle == 0.0 {
        if engine == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((engine - oracle) / oracle).abs()
    }
}

const ORACLE_TOL: f64 = 1e-12;

fn halfplane(axis: usize) -> Constraint {
    Constraint::new(Body::Halfspace {
        a: Vector::basis(2, axis),
        b: 0.0,
    })
}

/// The iterate of the alternating two-halfplane run after `k` steps:
/// `x_k = 0` for `k ≥ 1`, `y_0 = y_1 = 1`, `y_{2j−1} = y_{2j−2}`, `y_{2j} = 2^{−2j}`.
pub fn oracle_a1(k: u64) -> (f64, f64) {
    let x = if k == 0 { 1.0 } else { 0.0 };
    let even = k - k % 2;
    let y = libm::ldexp(1.0, -(even.min(1 << 20) as i32));
    (x, y)
}

/// `{x ≤ 0} ∩ {y ≤ 0}` from `(1, 1)`, alternating projections with `α = 1/2`,
/// `φ ≡ 1`, and `r_k = 1/(k+1)` on even, `2^{−k}` on odd steps.
pub fn a1_config(counter_mode: CounterMode, max_iter: u64) -> Result<RunConfig> {
    let problem = Problem::new(2, alloc::vec![halfplane(0), halfplane(1)], OuterSet::WholeSpace)?;
    let mut cfg = RunConfig::new(problem, ControlSpec::Cyclic(alloc::vec![0, 1]), Vector::from_slice(&[1.0, 1.0])?)?;
    cfg.relaxation = RelaxationSchedule::Constant(0.5);
    cfg.overrelaxation = OverrelaxationSchedule::Interleaved {
        even: Box::new(OverrelaxationSchedule::Harmonic),
        odd: Box::new(OverrelaxationSchedule::Geometric { ratio: 0.5 }),
    };
    cfg.phi = PhiFunctional::One;
    cfg.counter_mode = counter_mode;
    cfg.max_iter = max_iter;
    Ok(cfg)
}

/// Runs the alternating example with uncounted schedules for `max_iter`
/// steps and compares every iterate with [`oracle_a1`].
pub fn reproduce_a1(max_iter: u64) -> Result<ReproductionReport> {
    let result = Solver::new(a1_config(CounterMode::Raw, max_iter)?)?.solve()?;
    let mut iterates: Vec<&Vector> = result.trace.iter().map(|r| &r.x).collect();
    iterates.push(&result.final_x);
    let mut rows = Vec::new();
    let mut max_rel_err: f64 = 0.0;
    let mut x_zero = true;
    let mut y_match = true;
    let mut stall = None;
    for (k, it) in iterates.iter().enumerate() {
        let k = k as u64;
        let (ox, oy) = oracle_a1(k);
        x_zero &= it[0] == ox;
        if oy == 0.0 {
            // 2^{−k} no longer exists in binary64; the engine cannot reach
            // zero without landing in C
            stall.get_or_insert(k);
            continue;
        }
        let err = relative_error(it[1], oy);
        y_match &= err <= ORACLE_TOL;
        if k.is_multiple_of(2) && (2..=200).contains(&k) {
            rows.push(OracleRow {
                k: k / 2,
                position: k,
                engine: it[1],
                oracle: oy,
                rel_err: err,
            });
            max_rel_err = max_rel_err.max(err);
        }
    }
    let feasible_iterates = result.trace.iter().filter(|r| r.feasible).count() as u64;
    let mut notes = Vec::new();
    if let Some(k) = stall {
        notes.push(alloc::format!(
            "from k = {k} the closed form underflows to 0 while the iterate stays at the smallest subnormal {:e}",
            result.final_x[1]
        ));
    }
    Ok(ReproductionReport {
        name: "a1",
        rows,
        max_rel_err,
        tolerance: ORACLE_TOL,
        status: result.status,
        steps: result.iterations,
        feasible_iterates,
        checks: alloc::vec![
            ("x_k = 0 for k >= 1".into(), x_zero),
            ("y_k matches the closed form".into(), y_match),
            ("no feasible iterate".into(), feasible_iterates == 0 && result.status == RunStatus::MaxIterExceeded),
        ],
        notes,
    })
}

/// `b_0 = 1/2`, `b_{k+1} = b_k / (2√2/√b_k + 4)²`, evaluated as written.
pub fn oracle_a2_b(k: u64) -> f64 {
    let mut b = 0.5f64;
    for _ in 0..k {
        if b == 0.0 {
            break;
        }
        let d = 2.0 * SQRT_2 / libm::sqrt(b) + 4.0;
        b /= d * d;
    }
    b
}

/// `(b_k, 1 + √(2 b_k))`.
pub fn oracle_a2(k: u64) -> (f64, f64) {
    let b = oracle_a2_b(k);
    (b, 1.0 + libm::sqrt(2.0 * b))
}

/// The positive `b_k` of the recursion (it underflows after eight terms).
pub fn a2_b_sequence() -> Vec<f64> {
    (0..)
        .map(oracle_a2_b)
        .take_while(|b| *b > 0.0)
        .collect()
}

/// `a_k = 1/(k+1)` and `b_k` merged in decreasing order.
pub fn a2_schedule() -> OverrelaxationSchedule {
    OverrelaxationSchedule::MergedDecreasing {
        a: Box::new(OverrelaxationSchedule::Harmonic),
        b: Box::new(OverrelaxationSchedule::ExplicitList(a2_b_sequence())),
    }
}

/// `|y| − 1` and `x² − 1`, the constraints of the subgradient example.
pub fn a2_functions() -> [ConvexFunction; 2] {
    [
        ConvexFunction::AbsCoordMinusC { axis: 1, c: 1.0 },
        ConvexFunction::QuadCoordMinusC { axis: 0, c: 1.0 },
    ]
}

fn a2_problem() -> Result<Problem> {
    let constraints = a2_functions().into_iter().map(|f| Constraint::new(Body::Sublevel(f))).collect();
    Problem::new(2, constraints, OuterSet::WholeSpace)
}

/// `{|y| ≤ 1} ∩ {x² ≤ 1}` from `(2, 2)` with the closed-form subgradient
/// update, `α = 1`, the merged schedule, and the control that processes
/// `|y| − 1` at positions taken from `a` and `x² − 1` at positions from `b`.
pub fn a2_config(counter_mode: CounterMode, max_iter: u64) -> Result<RunConfig> {
    let schedule = a2_schedule();
    let sets = (0..=max_iter)
        .map(|p| match schedule.merge_source(p) {
            Some(MergeSource::B(_)) => alloc::vec![1],
            _ => alloc::vec![0],
        })
        .collect();
    let mut cfg = RunConfig::new(a2_problem()?, ControlSpec::Explicit(sets), Vector::from_slice(&[2.0, 2.0])?)?;
    cfg.relaxation = RelaxationSchedule::Constant(1.0);
    cfg.overrelaxation = schedule;
    cfg.phi = PhiFunctional::SubgradNorm;
    cfg.update = UpdateForm::SubgradientClosedForm;
    cfg.counter_mode = counter_mode;
    cfg.max_iter = max_iter;
    Ok(cfg)
}

/// Runs the subgradient example with uncounted schedules for `max_iter`
/// steps, then follows the iterate through the positions `n_k` of
/// `b_0, …, b_{k_max}`.
///
/// Only the `b` steps move `x` (once `y = 0` the `a` steps are inactive), and
/// `n_3` already exceeds 10¹¹, so the later positions are reached by applying
/// the engine step at each `n_k` in turn. The two phases must agree bitwise
/// at every `n_k` inside the direct run.
pub fn reproduce_a2(max_iter: u64, k_max: u64) -> Result<ReproductionReport> {
    let cfg = a2_config(CounterMode::Raw, max_iter)?;
    let schedule = cfg.overrelaxation.clone();
    let solver = Solver::new(cfg)?;
    let result = solver.solve()?;
    let mut iterates: Vec<&Vector> = result.trace.iter().map(|r| &r.x).collect();
    iterates.push(&result.final_x);
    let y_zero = iterates.iter().skip(1).all(|it| it[1] == 0.0);
    let x_above_one = iterates.iter().all(|it| it[0] > 1.0);
    let feasible_iterates = result.trace.iter().filter(|r| r.feasible).count() as u64;

    // Reduced run over the b-positions only.
    let mut reduced_cfg = a2_config(CounterMode::Raw, 1)?;
    reduced_cfg.control = ControlSpec::Cyclic(alloc::vec![1]);
    reduced_cfg.overrelaxation = OverrelaxationSchedule::ExplicitList(a2_b_sequence());
    let reduced = Solver::new(reduced_cfg)?;
    let n0 = schedule.merged_position_of_b(0).unwrap_or(u64::MAX);
    let mut x = iterates
        .get(n0 as usize)
        .map(|v| (*v).clone())
        .ok_or_else(|| Error::Config(alloc::format!("max_iter must exceed n_0 = {n0}")))?;
    let mut counter = CorrectionCounter::new(CounterMode::Raw);
    let mut rows = Vec::new();
    let mut max_rel_err: f64 = 0.0;
    let mut phases_agree = true;
    let mut above_one_where_expected = true;
    for k in 0..=k_max {
        let (_, ox) = oracle_a2(k);
        let err = relative_error(x[0], ox);
        max_rel_err = max_rel_err.max(err);
        let position = schedule.merged_position_of_b(k).unwrap_or(u64::MAX);
        if let Some(direct) = iterates.get(position as usize) {
            phases_agree &= direct.as_slice() == x.as_slice();
        }
        if ox > 1.0 {
            above_one_where_expected &= x[0] > 1.0;
        }
        rows.push(OracleRow {
            k,
            position,
            engine: x[0],
            oracle: ox,
            rel_err: err,
        });
        x = reduced.step(&x, k, counter)?.next;
        counter = counter.update(true);
    }
    let mut notes = Vec::new();
    if let Some(row) = rows.iter().find(|r| r.oracle == 1.0) {
        notes.push(alloc::format!(
            "1 + sqrt(2 b_k) rounds to 1.0 from k = {} on; the iterate there is exactly 1.0",
            row.k
        ));
    }
    Ok(ReproductionReport {
        name: "a2",
        rows,
        max_rel_err,
        tolerance: ORACLE_TOL,
        status: result.status,
        steps: result.iterations,
        feasible_iterates,
        checks: alloc::vec![
            ("b_1 = 1/128".into(), oracle_a2_b(1) == 1.0 / 128.0),
            ("y_k = 0 for k >= 1".into(), y_zero),
            ("x_k > 1 in the direct run".into(), x_above_one),
            ("x at n_k matches 1 + sqrt(2 b_k)".into(), max_rel_err <= ORACLE_TOL),
            ("x at n_k > 1 wherever 1 + sqrt(2 b_k) > 1".into(), above_one_where_expected),
            ("direct and reduced runs agree".into(), phases_agree),
            ("no feasible iterate".into(), feasible_iterates == 0 && result.status == RunStatus::MaxIterExceeded),
        ],
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RunConfig;
    use alloc::vec;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn two_halfspace_run(r: OverrelaxationSchedule) -> (RunResult, OuterSet) {
        let p = Problem::new(2, vec![halfplane(0), halfplane(1)], OuterSet::WholeSpace).unwrap();
        let mut cfg = RunConfig::new(p, ControlSpec::Cyclic(vec![0, 1]), v(&[1.0, 1.0])).unwrap();
        cfg.overrelaxation = r;
        (Solver::new(cfg).unwrap().solve().unwrap(), OuterSet::WholeSpace)
    }

    #[test]
    fn descent_on_two_halfspaces() {
        let (res, q) = two_halfspace_run(OverrelaxationSchedule::Harmonic);
        let cert = check_descent(&res, &q, &v(&[-3.0, -3.0]), 1.0, 1.0).unwrap();
        assert!(cert.violations.is_empty());
        assert!(cert.applicable_steps() > 0);
        assert!(cert.min_slack().unwrap() >= 0.0);
    }

    #[test]
    fn descent_skips_large_overrelaxation() {
        let (res, q) = two_halfspace_run(OverrelaxationSchedule::ExplicitList(vec![10.0, 0.5]));
        let cert = check_descent(&res, &q, &v(&[-3.0, -3.0]), 1.0, 1.0).unwrap();
        assert_eq!(cert.entries[0].k, 0);
        assert_eq!(cert.entries[0].rho, 10.0);
        assert!(!cert.entries[0].applicable);
        assert!(cert.violations.is_empty());
    }

    #[test]
    fn descent_requires_z_in_outer() {
        let (res, _) = two_halfspace_run(OverrelaxationSchedule::Harmonic);
        let q = OuterSet::Box { lo: v(&[0.0, 0.0]), hi: v(&[1.0, 1.0]) };
        assert!(matches!(
            check_descent(&res, &q, &v(&[-3.0, -3.0]), 1.0, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn single_operator_example() {
        let t = halfplane(0);
        let c = check_single_operator(&t, &v(&[1.0, 0.0]), &v(&[-2.0, 0.0]), 1.0, 1.0).unwrap();
        assert_eq!((c.lhs, c.rhs, c.ok), (1.0, 5.0, true));
        let c = check_single_operator(&t, &v(&[1.0, 0.0]), &v(&[-2.0, 0.0]), 1.0, 2.0).unwrap();
        assert_eq!(c.rhs, 9.0);
        assert!(c.ok);
        assert_eq!(
            check_single_operator(&t, &v(&[-1.0, 0.0]), &v(&[-2.0, 0.0]), 1.0, 1.0).unwrap_err(),
            Error::HypothesisViolated("x is a fixed point of T")
        );
    }

    #[test]
    fn slater_examples() {
        let fs = [
            ConvexFunction::AbsCoordMinusC { axis: 1, c: 1.0 },
            ConvexFunction::QuadCoordMinusC { axis: 0, c: 1.0 },
        ];
        let z = v(&[0.0, 0.0]);
        assert_eq!(slater_delta(&fs, &z, 2.0).unwrap(), 0.5);
        assert_eq!(slater_delta(&fs, &z, 4.0).unwrap(), 0.25);
        assert_eq!(slater_delta(&fs, &v(&[0.0, 1.0]), 2.0).unwrap_err(), Error::SlaterPointInvalid(0.0));
        let report = sample_slater_bound(&fs, &z, 2.0, 2000, 1).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.min_norm >= 0.5);
    }

    #[test]
    fn a1_oracle_values() {
        assert_eq!(oracle_a1(0), (1.0, 1.0));
        assert_eq!(oracle_a1(1), (0.0, 1.0));
        assert_eq!(oracle_a1(2).1, 0.25);
        assert_eq!(oracle_a1(3).1, 0.25);
        assert_eq!(oracle_a1(4).1, 1.0 / 16.0);
        assert_eq!(oracle_a1(1076).1, 0.0);
    }

    #[test]
    fn a2_oracle_values() {
        assert_eq!(oracle_a2(0), (0.5, 2.0));
        assert_eq!(oracle_a2_b(1), 1.0 / 128.0);
        assert_eq!(oracle_a2_b(2), 1.0 / 165_888.0);
        assert_eq!(a2_b_sequence().len(), 8);
        let s = a2_schedule();
        assert_eq!(s.merged_position_of_b(0), Some(2));
        assert_eq!(s.merged_position_of_b(1), Some(129));
        assert_eq!(s.merged_position_of_b(2), Some(165_890));
    }

    #[test]
    fn a1_reproduction_short() {
        let rep = reproduce_a1(400).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.rows.len(), 100);
        assert!(rep.max_rel_err <= 1e-12);
    }

    #[test]
    fn a2_reproduction_short() {
        let rep = reproduce_a2(300, 30).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        assert_eq!(rep.rows[1].engine, 1.125);
    }

    #[test]
    fn bracketed_counter_terminates_both_examples() {
        let r1 = Solver::new(a1_config(CounterMode::Bracketed, 10_000).unwrap()).unwrap().solve().unwrap();
        assert!(r1.k_feasible().is_some());
        let r2 = Solver::new(a2_config(CounterMode::Bracketed, 10_000).unwrap()).unwrap().solve().unwrap();
        assert!(r2.k_feasible().is_some());
    }

    #[test]
    fn fixed_points_lie_in_active_sets() {
        let (res, _) = two_halfspace_run(OverrelaxationSchedule::Harmonic);
        let p = Problem::new(2, vec![halfplane(0), halfplane(1)], OuterSet::WholeSpace).unwrap();
        assert!(check_fixed_points(&res, &p).unwrap().is_empty());
    }
}
