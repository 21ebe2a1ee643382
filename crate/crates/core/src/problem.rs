//! The feasibility problem: constraint bodies, cutters, the outer set `Q` and
//! (finite or lazily generated) constraint pools.

use alloc::borrow::Cow;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::function::ConvexFunction;
use crate::operators::{
    self, project_metric, project_onto_ball, project_onto_box, project_onto_halfspace, Cutter,
    CutterEval,
};
use crate::vector::{self, Vector};
use crate::{Error, Result};

/// A closed convex set `C_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// `{x : ⟨a, x⟩ ≤ b}`
    Halfspace { a: Vector, b: f64 },
    Ball { center: Vector, radius: f64 },
    Box { lo: Vector, hi: Vector },
    /// `{x : f(x) ≤ 0}`
    Sublevel(ConvexFunction),
}

impl Body {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Body::Halfspace { a, b } => {
                a.ensure_dim(dim)?;
                if !b.is_finite() {
                    return Err(Error::Config("halfspace offset must be finite".into()));
                }
                if a.norm() == 0.0 {
                    return Err(Error::Config("halfspace normal must be nonzero".into()));
                }
                Ok(())
            }
            Body::Ball { center, radius } => {
                center.ensure_dim(dim)?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Config(alloc::format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                Ok(())
            }
            Body::Box { lo, hi } => {
                lo.ensure_dim(dim)?;
                hi.ensure_dim(dim)?;
                if let Some(j) = (0..dim).find(|&j| lo[j] > hi[j]) {
                    return Err(Error::Config(alloc::format!(
                        "box bounds cross on axis {j}: {} > {}",
                        lo[j],
                        hi[j]
                    )));
                }
                Ok(())
            }
            Body::Sublevel(f) => f.validate(dim),
        }
    }

    /// Signed defining function: positive exactly outside the set.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Body::Halfspace { a, b } => vector::dot(a.as_slice(), x) - b,
            Body::Ball { center, radius } => vector::norm(&vector::sub(x, center.as_slice())) - radius,
            Body::Box { lo, hi } => box_violation(lo.as_slice(), hi.as_slice(), x).1,
            Body::Sublevel(f) => f.value(x),
        }
    }

    /// A subgradient of [`Body::value`] at `x`.
    pub fn subgradient(&self, x: &[f64]) -> Vector {
        match self {
            Body::Halfspace { a, .. } => a.clone(),
            Body::Ball { center, .. } => {
                let diff = vector::sub(x, center.as_slice());
                let d = vector::norm(&diff);
                if d == 0.0 {
                    Vector::zeros(x.len())
                } else {
                    Vector::from_raw(diff.into_iter().map(|u| u / d).collect())
                }
            }
            Body::Box { lo, hi } => {
                let (axis, _) = box_violation(lo.as_slice(), hi.as_slice(), x);
                let mut g = Vector::zeros(x.len()).into_inner();
                g[axis] = if x[axis] - hi[axis] >= lo[axis] - x[axis] { 1.0 } else { -1.0 };
                Vector::from_raw(g)
            }
            Body::Sublevel(f) => f.subgradient(x),
        }
    }

    /// Exact distance `d(x, C)` where a closed form exists.
    pub fn distance(&self, x: &[f64]) -> Option<f64> {
        match self {
            Body::Halfspace { a, b } => Some((vector::dot(a.as_slice(), x) - b).max(0.0) / a.norm()),
            Body::Ball { center, radius } => {
                Some((vector::norm(&vector::sub(x, center.as_slice())) - radius).max(0.0))
            }
            Body::Box { lo, hi } => {
                let p = project_onto_box(lo.as_slice(), hi.as_slice(), x);
                Some(vector::norm(&vector::sub(p.as_slice(), x)))
            }
            Body::Sublevel(f) => f.sublevel_distance(x),
        }
    }

    pub fn has_metric_projection(&self) -> bool {
        !matches!(self, Body::Sublevel(ConvexFunction::MaxAffine { .. }))
    }
}

// (axis, value) of the most violated box face, lowest axis on ties.
fn box_violation(lo: &[f64], hi: &[f64], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for j in 0..x.len() {
        let v = (lo[j] - x[j]).max(x[j] - hi[j]);
        if v > best.1 {
            best = (j, v);
        }
    }
    best
}

/// Which cutter realizes `C_i = fix T_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutterKind {
    Metric,
    Subgradient,
}

/// One constraint `C_i` with its cutter `T_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    body: Body,
    cutter: CutterKind,
}

impl Constraint {
    /// Geometric bodies default to their metric projection, sublevel sets to
    /// the subgradient projection.
    pub fn new(body: Body) -> Self {
        let cutter = match body {
            Body::Sublevel(_) => CutterKind::Subgradient,
            _ => CutterKind::Metric,
        };
        Self { body, cutter }
    }

    pub fn with_cutter(mut self, cutter: CutterKind) -> Result<Self> {
        if cutter == CutterKind::Metric && !self.body.has_metric_projection() {
            return Err(Error::Config(
                "cutter = \"metric\" needs a closed-form projection".into(),
            ));
        }
        self.cutter = cutter;
        Ok(self)
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn cutter(&self) -> CutterKind {
        self.cutter
    }

    pub fn is_sublevel(&self) -> bool {
        matches!(self.body, Body::Sublevel(_))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.body.value(x)
    }

    pub fn subgradient(&self, x: &[f64]) -> Vector {
        self.body.subgradient(x)
    }

    pub fn member(&self, x: &[f64], tol: f64) -> bool {
        self.body.value(x) <= tol
    }

    pub fn distance(&self, x: &[f64]) -> Option<f64> {
        self.body.distance(x)
    }
}

impl Cutter for Constraint {
    fn apply(&self, x: &Vector) -> Result<CutterEval> {
        match self.cutter {
            CutterKind::Metric => project_metric(&self.body, x),
            CutterKind::Subgradient => match &self.body {
                Body::Sublevel(f) => operators::project_subgradient(f, x),
                body => operators::subgradient_step(
                    body.value(x.as_slice()),
                    || body.subgradient(x.as_slice()),
                    x,
                ),
            },
        }
    }
}

/// The outer set `Q`, onto which every iterate is projected exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum OuterSet {
    WholeSpace,
    Halfspace { a: Vector, b: f64 },
    Box { lo: Vector, hi: Vector },
    Ball { center: Vector, radius: f64 },
}

impl OuterSet {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            OuterSet::WholeSpace => Ok(()),
            OuterSet::Halfspace { a, b } => Body::Halfspace { a: a.clone(), b: *b }.validate(dim),
            OuterSet::Box { lo, hi } => Body::Box { lo: lo.clone(), hi: hi.clone() }.validate(dim),
            OuterSet::Ball { center, radius } => Body::Ball {
                center: center.clone(),
                radius: *radius,
            }
            .validate(dim),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            OuterSet::WholeSpace => true,
            OuterSet::Halfspace { a, b } => vector::dot(a.as_slice(), x) <= *b,
            OuterSet::Box { lo, hi } => x
                .iter()
                .zip(lo.as_slice().iter().zip(hi.as_slice()))
                .all(|(xi, (l, h))| l <= xi && xi <= h),
            OuterSet::Ball { center, radius } => {
                vector::norm(&vector::sub(x, center.as_slice())) <= *radius
            }
        }
    }

    /// `P_Q(x)`; points of `Q` are returned unchanged.
    pub fn project(&self, x: Vector) -> Vector {
        if self.contains(x.as_slice()) {
            return x;
        }
        match self {
            OuterSet::WholeSpace => x,
            OuterSet::Halfspace { a, b } => project_onto_halfspace(a.as_slice(), *b, x.as_slice()),
            OuterSet::Box { lo, hi } => project_onto_box(lo.as_slice(), hi.as_slice(), x.as_slice()),
            OuterSet::Ball { center, radius } => {
                project_onto_ball(center.as_slice(), *radius, x.as_slice())
            }
        }
    }
}

type Generator = Arc<dyn Fn(usize) -> Constraint + Send + Sync>;

/// The index set `I` and its constraints.
#[derive(Clone)]
pub enum Pool {
    Finite(Vec<Constraint>),
    /// Constraints produced on demand; `cardinality == None` means `m = ∞`.
    Lazy {
        generator: Generator,
        cardinality: Option<usize>,
    },
}

impl fmt::Debug for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pool::Finite(cs) => f.debug_tuple("Finite").field(cs).finish(),
            Pool::Lazy { cardinality, .. } => f
                .debug_struct("Lazy")
                .field("cardinality", cardinality)
                .finish_non_exhaustive(),
        }
    }
}

/// A ball `B(z, 2R) ⊆ C` with `z ∈ Q`, supplied by the user.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedInterior {
    pub z: Vector,
    /// `R`; the certified ball has radius `2R`.
    pub radius: f64,
}

/// Outcome of sampling the boundary of `B(z, 2R)` against every constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorCheck {
    pub z_in_outer: bool,
    pub samples: usize,
    /// `(constraint, sample)` pairs where `z + 2R·e` left the set.
    pub failures: Vec<(usize, usize)>,
}

impl InteriorCheck {
    pub fn passed(&self) -> bool {
        self.z_in_outer && self.failures.is_empty()
    }
}

/// Find `x ∈ Q ∩ ⋂_{i ∈ I} C_i`.
#[derive(Debug, Clone)]
pub struct Problem {
    dim: usize,
    pool: Pool,
    outer: OuterSet,
    interior: Option<CertifiedInterior>,
}

impl Problem {
    pub fn new(dim: usize, constraints: Vec<Constraint>, outer: OuterSet) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if constraints.is_empty() {
            return Err(Error::Config("problem has no constraints".into()));
        }
        for c in &constraints {
            c.body.validate(dim)?;
        }
        outer.validate(dim)?;
        Ok(Self {
            dim,
            pool: Pool::Finite(constraints),
            outer,
            interior: None,
        })
    }

    /// A pool whose `i`-th constraint is `generator(i)`.
    pub fn lazy<F>(dim: usize, generator: F, cardinality: Option<usize>, outer: OuterSet) -> Result<Self>
    where
        F: Fn(usize) -> Constraint + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if cardinality == Some(0) {
            return Err(Error::Config("problem has no constraints".into()));
        }
        outer.validate(dim)?;
        Ok(Self {
            dim,
            pool: Pool::Lazy {
                generator: Arc::new(generator),
                cardinality,
            },
            outer,
            interior: None,
        })
    }

    /// Attaches `B(z, 2R) ⊆ C`. `z ∈ Q` is checked exactly; the ball itself is
    /// only spot-checked by [`Problem::spot_check_interior`].
    pub fn with_interior(mut self, z: Vector, radius: f64) -> Result<Self> {
        z.ensure_dim(self.dim)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(alloc::format!(
                "interior radius R must be positive, got {radius}"
            )));
        }
        if !self.outer.contains(z.as_slice()) {
            return Err(Error::Precondition("interior point z is not in Q".into()));
        }
        self.interior = Some(CertifiedInterior { z, radius });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outer(&self) -> &OuterSet {
        &self.outer
    }

    pub fn interior(&self) -> Option<&CertifiedInterior> {
        self.interior.as_ref()
    }

    pub fn pool(&self) -> &Pool {
        &self.pool
    }

    /// `m`, or `None` for an infinite pool.
    pub fn cardinality(&self) -> Option<usize> {
        match &self.pool {
            Pool::Finite(cs) => Some(cs.len()),
            Pool::Lazy { cardinality, .. } => *cardinality,
        }
    }

    pub fn constraint(&self, i: usize) -> Result<Cow<'_, Constraint>> {
        match &self.pool {
            Pool::Finite(cs) => cs.get(i).map(Cow::Borrowed).ok_or(Error::IndexOutOfPool(i)),
            Pool::Lazy {
                generator,
                cardinality,
            } => {
                if cardinality.is_some_and(|m| i >= m) {
                    return Err(Error::IndexOutOfPool(i));
                }
                let c = generator(i);
                c.body.validate(self.dim)?;
                Ok(Cow::Owned(c))
            }
        }
    }

    /// All indices of a finite pool.
    pub fn full_window(&self) -> Result<Vec<usize>> {
        self.cardinality()
            .map(|m| (0..m).collect())
            .ok_or(Error::WindowRequired)
    }

    /// `I_+(x)` restricted to `window`, by the exact sign test.
    pub fn violated_indices(&self, x: &Vector, window: &[usize]) -> Result<Vec<usize>> {
        self.violated_indices_tol(x, window, 0.0)
    }

    pub fn violated_indices_tol(&self, x: &Vector, window: &[usize], tol: f64) -> Result<Vec<usize>> {
        x.ensure_dim(self.dim)?;
        let mut out = Vec::new();
        for &i in window {
            if !self.constraint(i)?.member(x.as_slice(), tol) {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// `x ∈ Q` and no constraint in `window` is violated.
    pub fn feasible(&self, x: &Vector, window: &[usize], tol: f64) -> Result<bool> {
        x.ensure_dim(self.dim)?;
        if !self.outer.contains(x.as_slice()) {
            return Ok(false);
        }
        for &i in window {
            if !self.constraint(i)?.member(x.as_slice(), tol) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Samples `z + 2R·e` for random unit directions `e` and tests membership
    /// in every constraint of `window`. Boundary points get an absolute slack of 1e−10.
    pub fn spot_check_interior(&self, window: &[usize], samples: usize, seed: u64) -> Result<InteriorCheck> {
        let Some(CertifiedInterior { z, radius }) = &self.interior else {
            return Err(Error::Precondition("problem has no certified interior".into()));
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = Vec::new();
        for s in 0..samples {
            let dir = random_unit(&mut rng, self.dim);
            let p: Vec<f64> = z
                .as_slice()
                .iter()
                .zip(&dir)
                .map(|(zi, ei)| zi + 2.0 * radius * ei)
                .collect();
            for &i in window {
                if !self.constraint(i)?.member(&p, 1e-10) {
                    failures.push((i, s));
                }
            }
        }
        Ok(InteriorCheck {
            z_in_outer: self.outer.contains(z.as_slice()),
            samples,
            failures,
        })
    }
}

pub(crate) fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = vector::norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn two_halfspaces() -> Problem {
        Problem::new(
            2,
            vec![
                Constraint::new(Body::Halfspace { a: v(&[1.0, 0.0]), b: 0.0 }),
                Constraint::new(Body::Halfspace { a: v(&[0.0, 1.0]), b: 0.0 }),
            ],
            OuterSet::WholeSpace,
        )
        .unwrap()
    }

    pub(crate) fn abs_and_quad_problem() -> Problem {
        Problem::new(
            2,
            vec![
                Constraint::new(Body::Sublevel(ConvexFunction::AbsCoordMinusC { axis: 1, c: 1.0 })),
                Constraint::new(Body::Sublevel(ConvexFunction::QuadCoordMinusC { axis: 0, c: 1.0 })),
            ],
            OuterSet::WholeSpace,
        )
        .unwrap()
    }

    #[test]
    fn violated_indices_examples() {
        let p = two_halfspaces();
        assert_eq!(p.violated_indices(&v(&[1.0, -1.0]), &[0, 1]).unwrap(), vec![0]);
        assert!(p.violated_indices(&v(&[-1.0, -1.0]), &[0, 1]).unwrap().is_empty());
        let q = abs_and_quad_problem();
        assert_eq!(q.violated_indices(&v(&[2.0, 2.0]), &[0, 1]).unwrap(), vec![0, 1]);
        assert_eq!(p.violated_indices(&v(&[0.0, 0.0]), &[2]), Err(Error::IndexOutOfPool(2)));
    }

    #[test]
    fn feasible_examples() {
        let q = abs_and_quad_problem();
        let w = q.full_window().unwrap();
        assert!(q.feasible(&v(&[0.0, 0.0]), &w, 0.0).unwrap());
        assert!(!q.feasible(&v(&[2.0, 2.0]), &w, 0.0).unwrap());
        assert!(q.feasible(&v(&[1.0, 1.0]), &w, 0.0).unwrap());
    }

    #[test]
    fn feasible_is_monotone_under_constraint_removal() {
        let q = abs_and_quad_problem();
        let x = v(&[0.5, -0.25]);
        assert!(q.feasible(&x, &[0, 1], 0.0).unwrap());
        assert!(q.feasible(&x, &[0], 0.0).unwrap());
        assert!(q.feasible(&x, &[1], 0.0).unwrap());
    }

    #[test]
    fn metric_cutter_fixes_exactly_its_body() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bodies = [
            Body::Halfspace { a: v(&[1.0, -1.0]), b: 0.25 },
            Body::Ball { center: v(&[0.5, 0.5]), radius: 1.0 },
            Body::Box { lo: v(&[-1.0, 0.0]), hi: v(&[0.0, 2.0]) },
        ];
        for body in bodies {
            let c = Constraint::new(body);
            for _ in 0..1000 {
                let x = v(&[rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)]);
                let img = c.apply(&x).unwrap().image;
                assert!(c.member(img.as_slice(), 0.0), "{c:?} image {img:?}");
                assert_eq!(c.apply(&img).unwrap().image, img);
            }
        }
    }

    #[test]
    fn outer_projection_is_idempotent() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let outers = [
            OuterSet::WholeSpace,
            OuterSet::Halfspace { a: v(&[2.0, 1.0, -1.0]), b: 1.0 },
            OuterSet::Box { lo: v(&[-1.0, -2.0, 0.0]), hi: v(&[1.0, 0.0, 3.0]) },
            OuterSet::Ball { center: v(&[1.0, 1.0, 1.0]), radius: 2.0 },
        ];
        for q in &outers {
            for _ in 0..1000 {
                let x = v(&[
                    rng.random_range(-6.0..6.0),
                    rng.random_range(-6.0..6.0),
                    rng.random_range(-6.0..6.0),
                ]);
                let once = q.project(x);
                assert!(q.contains(once.as_slice()));
                let twice = q.project(once.clone());
                for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
                    assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn lazy_pool_generates_and_bounds_indices() {
        let p = Problem::lazy(
            2,
            |i| Constraint::new(Body::Halfspace { a: Vector::basis(2, i % 2), b: 1.0 + i as f64 }),
            Some(4),
            OuterSet::WholeSpace,
        )
        .unwrap();
        assert_eq!(p.cardinality(), Some(4));
        assert_eq!(p.violated_indices(&v(&[1.5, 0.0]), &[0, 1, 2, 3]).unwrap(), vec![0]);
        assert!(matches!(p.constraint(4), Err(Error::IndexOutOfPool(4))));

        let inf = Problem::lazy(
            2,
            |i| Constraint::new(Body::Halfspace { a: Vector::basis(2, 0), b: 1.0 / (i + 1) as f64 }),
            None,
            OuterSet::WholeSpace,
        )
        .unwrap();
        assert_eq!(inf.full_window(), Err(Error::WindowRequired));
        assert_eq!(inf.violated_indices(&v(&[0.4, 0.0]), &[0, 1, 2, 3]).unwrap(), vec![2, 3]);
    }

    #[test]
    fn interior_spot_check() {
        let p = two_halfspaces().with_interior(v(&[-3.0, -3.0]), 1.0).unwrap();
        assert!(p.spot_check_interior(&[0, 1], 500, 1).unwrap().passed());
        let bad = two_halfspaces().with_interior(v(&[-1.0, -3.0]), 1.0).unwrap();
        assert!(!bad.spot_check_interior(&[0, 1], 500, 1).unwrap().passed());
        let outside_q = Problem::new(
            1,
            vec![Constraint::new(Body::Halfspace { a: v(&[1.0]), b: 0.0 })],
            OuterSet::Box { lo: v(&[0.0]), hi: v(&[1.0]) },
        )
        .unwrap()
        .with_interior(v(&[-2.0]), 0.5);
        assert!(matches!(outside_q, Err(Error::Precondition(_))));
    }

    #[test]
    fn metric_override_requires_closed_form() {
        let f = ConvexFunction::MaxAffine { pieces: vec![(v(&[1.0]), 0.0)] };
        assert!(Constraint::new(Body::Sublevel(f)).with_cutter(CutterKind::Metric).is_err());
        let g = ConvexFunction::QuadCoordMinusC { axis: 0, c: 4.0 };
        let c = Constraint::new(Body::Sublevel(g)).with_cutter(CutterKind::Metric).unwrap();
        assert_eq!(c.apply(&v(&[3.0])).unwrap().image.as_slice(), &[2.0]);
    }
}
