//! Convex functions with subgradient oracles, used as sublevel-set constraints
//! `{x : f(x) ≤ 0}`.

use alloc::vec::Vec;

use crate::operators::{project_onto_ball, project_onto_halfspace};
use crate::vector::{self, Vector};
use crate::{Error, Result};

/// A real-valued convex function on ℝⁿ together with a fixed subgradient
/// selection rule.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexFunction {
    /// `f(x) = ⟨a, x⟩ − b`.
    Affine { a: Vector, b: f64 },
    /// `f(x) = |x[axis]| − c`.
    AbsCoordMinusC { axis: usize, c: f64 },
    /// `f(x) = x[axis]² − c`.
    QuadCoordMinusC { axis: usize, c: f64 },
    /// `f(x) = max_j (⟨a_j, x⟩ − b_j)`; ties pick the lowest piece index.
    MaxAffine { pieces: Vec<(Vector, f64)> },
    /// `f(x) = ‖x − center‖² − radius²`, whose zero sublevel set is the ball.
    SquaredDistToBall { center: Vector, radius: f64 },
}

impl ConvexFunction {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Self::Affine { a, b } => {
                a.ensure_dim(dim)?;
                finite(*b, "affine offset")
            }
            Self::AbsCoordMinusC { axis, c } | Self::QuadCoordMinusC { axis, c } => {
                if *axis >= dim {
                    return Err(Error::Config(alloc::format!(
                        "axis {axis} out of range for dimension {dim}"
                    )));
                }
                finite(*c, "coordinate bound")?;
                if *c < 0.0 {
                    return Err(Error::Config(alloc::format!(
                        "coordinate bound {c} is negative, the sublevel set is empty"
                    )));
                }
                Ok(())
            }
            Self::MaxAffine { pieces } => {
                if pieces.is_empty() {
                    return Err(Error::Config("max-affine function without pieces".into()));
                }
                for (a, b) in pieces {
                    a.ensure_dim(dim)?;
                    finite(*b, "affine offset")?;
                }
                Ok(())
            }
            Self::SquaredDistToBall { center, radius } => {
                center.ensure_dim(dim)?;
                finite(*radius, "radius")?;
                if *radius <= 0.0 {
                    return Err(Error::Config(alloc::format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Affine { a, b } => vector::dot(a.as_slice(), x) - b,
            Self::AbsCoordMinusC { axis, c } => x[*axis].abs() - c,
            Self::QuadCoordMinusC { axis, c } => x[*axis] * x[*axis] - c,
            Self::MaxAffine { .. } => self.active_piece(x).1,
            Self::SquaredDistToBall { center, radius } => {
                vector::dist_sq(x, center.as_slice()) - radius * radius
            }
        }
    }

    /// The selected subgradient `g(x) ∈ ∂f(x)`.
    pub fn subgradient(&self, x: &[f64]) -> Vector {
        let dim = x.len();
        match self {
            Self::Affine { a, .. } => a.clone(),
            Self::AbsCoordMinusC { axis, .. } => {
                let mut g = Vector::zeros(dim).into_inner();
                g[*axis] = if x[*axis] > 0.0 {
                    1.0
                } else if x[*axis] < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                Vector::from_raw(g)
            }
            Self::QuadCoordMinusC { axis, .. } => {
                let mut g = Vector::zeros(dim).into_inner();
                g[*axis] = 2.0 * x[*axis];
                Vector::from_raw(g)
            }
            Self::MaxAffine { pieces } => pieces[self.active_piece(x).0].0.clone(),
            Self::SquaredDistToBall { center, .. } => Vector::from_raw(
                x.iter()
                    .zip(center.as_slice())
                    .map(|(xi, ci)| 2.0 * (xi - ci))
                    .collect(),
            ),
        }
    }

    fn active_piece(&self, x: &[f64]) -> (usize, f64) {
        let Self::MaxAffine { pieces } = self else {
            unreachable!("active_piece on a non max-affine function")
        };
        let mut best = (0, f64::NEG_INFINITY);
        for (j, (a, b)) in pieces.iter().enumerate() {
            let v = vector::dot(a.as_slice(), x) - b;
            // strict comparison keeps the lowest index on ties
            if v > best.1 {
                best = (j, v);
            }
        }
        best
    }

    /// Metric projection onto `{f ≤ 0}` when it has a closed form.
    pub fn sublevel_projection(&self, x: &[f64]) -> Option<Vector> {
        match self {
            Self::Affine { a, b } => Some(project_onto_halfspace(a.as_slice(), *b, x)),
            Self::AbsCoordMinusC { axis, c } => Some(clamp_axis(x, *axis, *c)),
            Self::QuadCoordMinusC { axis, c } => Some(clamp_axis(x, *axis, libm::sqrt(*c))),
            Self::SquaredDistToBall { center, radius } => {
                Some(project_onto_ball(center.as_slice(), *radius, x))
            }
            Self::MaxAffine { .. } => None,
        }
    }

    /// Exact `d(x, {f ≤ 0})` when it has a closed form.
    pub fn sublevel_distance(&self, x: &[f64]) -> Option<f64> {
        match self {
            Self::Affine { a, b } => {
                let v = vector::dot(a.as_slice(), x) - b;
                let n = a.norm();
                Some(if v > 0.0 && n > 0.0 { v / n } else { 0.0 })
            }
            Self::AbsCoordMinusC { axis, c } => Some((x[*axis].abs() - c).max(0.0)),
            Self::QuadCoordMinusC { axis, c } => Some((x[*axis].abs() - libm::sqrt(*c)).max(0.0)),
            Self::SquaredDistToBall { center, radius } => {
                Some((vector::norm(&vector::sub(x, center.as_slice())) - radius).max(0.0))
            }
            Self::MaxAffine { .. } => None,
        }
    }
}

fn clamp_axis(x: &[f64], axis: usize, bound: f64) -> Vector {
    let mut out = x.to_vec();
    out[axis] = out[axis].clamp(-bound, bound);
    Vector::from_raw(out)
}

fn finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(alloc::format!("{what} must be finite")))
    }
}
