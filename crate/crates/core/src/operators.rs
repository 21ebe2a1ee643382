//! Cutter operators: metric projections onto halfspaces, balls and boxes, the
//! subgradient projection onto a sublevel set, and the cutter-property check.

use crate::function::ConvexFunction;
use crate::problem::Body;
use crate::vector::{self, Vector};
use crate::{Error, Result};

/// One application `T(x)` of a cutter.
#[derive(Debug, Clone, PartialEq)]
pub struct CutterEval {
    pub image: Vector,
    /// `‖T(x) − x‖`, always measured on the image difference.
    pub displacement_norm: f64,
    /// `f(x)` for sublevel constraints, `d(x, C)` otherwise.
    pub residual: f64,
}

impl CutterEval {
    fn new(x: &[f64], image: Vector, residual: f64) -> Self {
        let displacement_norm = vector::norm(&vector::sub(image.as_slice(), x));
        Self {
            image,
            displacement_norm,
            residual,
        }
    }

    fn identity(x: &Vector, residual: f64) -> Self {
        Self {
            image: x.clone(),
            displacement_norm: 0.0,
            residual,
        }
    }
}

/// An operator `T` with `fix T ≠ ∅` satisfying `⟨x − T(x), z − T(x)⟩ ≤ 0` for
/// every `z ∈ fix T`.
pub trait Cutter {
    fn apply(&self, x: &Vector) -> Result<CutterEval>;
}

/// Metric projection onto one of the closed-form bodies.
pub fn project_metric(body: &Body, x: &Vector) -> Result<CutterEval> {
    let xs = x.as_slice();
    match body {
        Body::Halfspace { a, b } => {
            let v = vector::dot(a.as_slice(), xs) - b;
            if v <= 0.0 {
                return Ok(CutterEval::identity(x, 0.0));
            }
            let image = project_onto_halfspace(a.as_slice(), *b, xs);
            Ok(CutterEval::new(xs, image, v / a.norm()))
        }
        Body::Ball { center, radius } => {
            if *radius <= 0.0 {
                return Err(Error::Config(alloc::format!(
                    "ball radius must be positive, got {radius}"
                )));
            }
            let d = vector::norm(&vector::sub(xs, center.as_slice()));
            if d <= *radius {
                return Ok(CutterEval::identity(x, 0.0));
            }
            let image = project_onto_ball(center.as_slice(), *radius, xs);
            Ok(CutterEval::new(xs, image, d - radius))
        }
        Body::Box { lo, hi } => {
            let image = project_onto_box(lo.as_slice(), hi.as_slice(), xs);
            let eval = CutterEval::new(xs, image, 0.0);
            let residual = eval.displacement_norm;
            Ok(CutterEval { residual, ..eval })
        }
        Body::Sublevel(f) => match f.sublevel_projection(xs) {
            Some(image) => {
                let residual = f.sublevel_distance(xs).unwrap_or(0.0);
                if f.value(xs) <= 0.0 {
                    return Ok(CutterEval::identity(x, residual));
                }
                Ok(CutterEval::new(xs, image, residual))
            }
            None => Err(Error::Config(
                "metric projection has no closed form for this sublevel set".into(),
            )),
        },
    }
}

/// Subgradient projection `x − f(x)/‖g(x)‖² · g(x)` when `f(x) > 0`, identity otherwise.
pub fn project_subgradient(f: &ConvexFunction, x: &Vector) -> Result<CutterEval> {
    let xs = x.as_slice();
    subgradient_step(f.value(xs), || f.subgradient(xs), x)
}

pub(crate) fn subgradient_step(
    value: f64,
    subgradient: impl FnOnce() -> Vector,
    x: &Vector,
) -> Result<CutterEval> {
    if value <= 0.0 {
        return Ok(CutterEval::identity(x, value));
    }
    let g = subgradient();
    let gg = vector::norm_sq(g.as_slice());
    if gg == 0.0 {
        return Err(Error::InconsistentConstraint);
    }
    let t = value / gg;
    let image: alloc::vec::Vec<f64> = x
        .as_slice()
        .iter()
        .zip(g.as_slice())
        .map(|(xi, gi)| xi - t * gi)
        .collect();
    let image = Vector::checked(image)?;
    Ok(CutterEval::new(x.as_slice(), image, value))
}

/// Result of checking `⟨T(x) − x, z − x⟩ ≥ ‖T(x) − x‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutterCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Checks the cutter characterization at `x` against a caller-verified fixed point `z`.
pub fn check_cutter_property<T: Cutter + ?Sized>(t: &T, x: &Vector, z: &Vector) -> Result<CutterCheck> {
    let eval = t.apply(x)?;
    let step = vector::sub(eval.image.as_slice(), x.as_slice());
    let lhs = vector::dot(&step, &vector::sub(z.as_slice(), x.as_slice()));
    let rhs = vector::norm_sq(&step);
    Ok(CutterCheck {
        lhs,
        rhs,
        ok: lhs >= rhs - 1e-10 * (1.0 + rhs),
    })
}

/// `x − ((⟨a,x⟩ − b)/‖a‖²) a` for a violated halfspace, nudged so that the
/// image passes the exact membership test.
pub(crate) fn project_onto_halfspace(a: &[f64], b: f64, x: &[f64]) -> Vector {
    let v = vector::dot(a, x) - b;
    if v <= 0.0 {
        return Vector::from_raw(x.to_vec());
    }
    let aa = vector::norm_sq(a);
    let mut t = v / aa;
    let mut image: alloc::vec::Vec<f64> = x.iter().zip(a).map(|(xi, ai)| xi - t * ai).collect();
    let mut bump = f64::EPSILON;
    for _ in 0..16 {
        if vector::dot(a, &image) <= b {
            break;
        }
        t *= 1.0 + bump;
        bump *= 2.0;
        for ((p, xi), ai) in image.iter_mut().zip(x).zip(a) {
            *p = xi - t * ai;
        }
    }
    Vector::from_raw(image)
}

/// `c + ρ (x − c)/‖x − c‖` outside the ball, nudged inward onto the exact test.
pub(crate) fn project_onto_ball(center: &[f64], radius: f64, x: &[f64]) -> Vector {
    let diff = vector::sub(x, center);
    let d = vector::norm(&diff);
    if d <= radius {
        return Vector::from_raw(x.to_vec());
    }
    let mut s = radius / d;
    let mut image: alloc::vec::Vec<f64> = center.iter().zip(&diff).map(|(c, u)| c + s * u).collect();
    let mut bump = f64::EPSILON;
    for _ in 0..16 {
        if vector::norm(&vector::sub(&image, center)) <= radius {
            break;
        }
        s *= 1.0 - bump;
        bump *= 2.0;
        for ((p, c), u) in image.iter_mut().zip(center).zip(&diff) {
            *p = c + s * u;
        }
    }
    Vector::from_raw(image)
}

pub(crate) fn project_onto_box(lo: &[f64], hi: &[f64], x: &[f64]) -> Vector {
    Vector::from_raw(
        x.iter()
            .zip(lo.iter().zip(hi))
            .map(|(xi, (l, h))| xi.clamp(*l, *h))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Constraint;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn halfspace_axis_projection() {
        let body = Body::Halfspace { a: v(&[1.0, 0.0]), b: 0.0 };
        let e = project_metric(&body, &v(&[2.0, 3.0])).unwrap();
        assert_eq!(e.image.as_slice(), &[0.0, 3.0]);
        assert_eq!(e.displacement_norm, 2.0);
        assert_eq!(e.residual, 2.0);
    }

    #[test]
    fn member_is_fixed() {
        let body = Body::Ball { center: v(&[0.0, 0.0]), radius: 1.0 };
        let x = v(&[0.3, -0.2]);
        let e = project_metric(&body, &x).unwrap();
        assert_eq!(e.image, x);
        assert_eq!(e.displacement_norm, 0.0);
    }

    #[test]
    fn oblique_halfspace_matches_grid_minimization() {
        let body = Body::Halfspace { a: v(&[1.0, 1.0]), b: 1.0 };
        let e = project_metric(&body, &v(&[2.0, 2.0])).unwrap();
        assert_eq!(e.image.as_slice(), &[0.5, 0.5]);
        // brute force over the boundary line x + y = 1
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=40_000 {
            let s = -2.0 + 4.0 * i as f64 / 40_000.0;
            let d = (s - 2.0).powi(2) + (1.0 - s - 2.0).powi(2);
            if d < best.0 {
                best = (d, s);
            }
        }
        assert!((best.1 - 0.5).abs() < 1e-4);
    }

    #[test]
    fn ball_with_nonpositive_radius_is_rejected() {
        let body = Body::Ball { center: v(&[0.0]), radius: 0.0 };
        assert!(matches!(project_metric(&body, &v(&[1.0])), Err(Error::Config(_))));
    }

    #[test]
    fn subgradient_projection_examples() {
        let f2 = ConvexFunction::QuadCoordMinusC { axis: 0, c: 1.0 };
        let e = project_subgradient(&f2, &v(&[2.0, 0.0])).unwrap();
        assert_eq!(e.image.as_slice(), &[1.25, 0.0]);
        assert_eq!(e.residual, 3.0);

        let f1 = ConvexFunction::AbsCoordMinusC { axis: 1, c: 1.0 };
        let e = project_subgradient(&f1, &v(&[0.0, 2.0])).unwrap();
        assert_eq!(e.image.as_slice(), &[0.0, 1.0]);

        let e = project_subgradient(&f1, &v(&[0.0, 0.5])).unwrap();
        assert_eq!(e.image.as_slice(), &[0.0, 0.5]);
        assert_eq!(e.displacement_norm, 0.0);
        assert_eq!(e.residual, -0.5);
    }

    #[test]
    fn zero_subgradient_with_positive_value_is_inconsistent() {
        let f = ConvexFunction::Affine { a: v(&[0.0, 0.0]), b: -1.0 };
        assert_eq!(
            project_subgradient(&f, &v(&[0.0, 0.0])),
            Err(Error::InconsistentConstraint)
        );
    }

    #[test]
    fn subgradient_image_hits_the_linearization() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fs = [
            ConvexFunction::QuadCoordMinusC { axis: 1, c: 0.5 },
            ConvexFunction::SquaredDistToBall { center: v(&[1.0, -1.0]), radius: 0.7 },
            ConvexFunction::Affine { a: v(&[0.3, -2.0]), b: 0.1 },
        ];
        for f in &fs {
            for _ in 0..1000 {
                let x = v(&[rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)]);
                let fx = f.value(x.as_slice());
                if fx <= 0.0 {
                    continue;
                }
                let e = project_subgradient(f, &x).unwrap();
                let g = f.subgradient(x.as_slice());
                let lin = vector::dot(g.as_slice(), &vector::sub(e.image.as_slice(), x.as_slice()));
                assert!((lin + fx).abs() <= 1e-12 * fx.abs().max(1.0), "{lin} vs {fx}");
            }
        }
    }

    #[test]
    fn cutter_property_examples() {
        let c = Constraint::new(Body::Halfspace { a: v(&[1.0, 0.0]), b: 0.0 });
        let r = check_cutter_property(&c, &v(&[2.0, 3.0]), &v(&[-1.0, 3.0])).unwrap();
        assert_eq!((r.lhs, r.rhs), (6.0, 4.0));
        assert!(r.ok);
        let r = check_cutter_property(&c, &v(&[-1.0, 0.0]), &v(&[-2.0, 0.0])).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.ok);
    }

    #[test]
    fn metric_projections_are_firmly_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let bodies = [
            Body::Halfspace { a: v(&[1.0, 2.0, -1.0]), b: 0.5 },
            Body::Ball { center: v(&[0.0, 1.0, 0.0]), radius: 1.5 },
            Body::Box { lo: v(&[-1.0, -1.0, 0.0]), hi: v(&[1.0, 2.0, 0.5]) },
        ];
        for body in &bodies {
            for _ in 0..2000 {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
                let y: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
                let px = project_metric(body, &v(&x)).unwrap().image;
                let py = project_metric(body, &v(&y)).unwrap().image;
                let d = vector::sub(px.as_slice(), py.as_slice());
                let lhs = vector::norm_sq(&d);
                let rhs = vector::dot(&d, &vector::sub(&x, &y));
                assert!(lhs <= rhs + 1e-10, "{body:?}");
            }
        }
    }

    #[test]
    fn projected_halfspace_images_pass_exact_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5000 {
            let a: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b = rng.random_range(-2.0..2.0);
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-50.0..50.0)).collect();
            let p = project_onto_halfspace(&a, b, &x);
            assert!(vector::dot(&a, p.as_slice()) <= b);
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let q = project_onto_ball(&c, 0.75, &x);
            assert!(vector::norm(&vector::sub(q.as_slice(), &c)) <= 0.75);
        }
    }
}
