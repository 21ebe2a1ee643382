//! Seeded random polyhedral instances with a known interior ball, used by the
//! convergence sweeps.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::function::ConvexFunction;
use crate::problem::{random_unit, Body, Constraint, OuterSet, Problem};
use crate::vector::{self, Vector};
use crate::Result;

/// Half-width of the box used as `Q` on odd seeds.
pub const OUTER_BOX: f64 = 10.0;
/// Every instance certifies `B(z, 2R) ⊆ C` with this `R`.
pub const INTERIOR_R: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct PolyhedralInstance {
    pub seed: u64,
    pub problem: Problem,
    pub z: Vector,
    /// `R`, with `B(z, 2R) ⊆ C`.
    pub radius: f64,
    pub x0: Vector,
}

/// `dim ∈ [2, 8]`, `m ∈ [2, 12]` affine constraints `⟨a_i, x⟩ ≤ b_i` with
/// `‖a_i‖ ∈ [0.5, 2]`, each at distance at least `2R` from a random `z`.
/// Even constraint indices are sublevel sets of affine functions, odd ones
/// plain halfspaces. `Q` is ℝⁿ on even seeds and `[−10, 10]ⁿ` on odd seeds.
/// The start lies at distance 2 to 5 from `z` and is infeasible whenever one
/// of 64 draws is.
pub fn random_polyhedral(seed: u64) -> Result<PolyhedralInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(2..=8usize);
    let m = rng.random_range(2..=12usize);
    let z: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut constraints = Vec::with_capacity(m);
    for i in 0..m {
        let scale = rng.random_range(0.5..2.0);
        let a: Vec<f64> = random_unit(&mut rng, dim).into_iter().map(|c| c * scale).collect();
        let margin = rng.random_range(2.0 * INTERIOR_R..1.0);
        let b = vector::dot(&a, &z) + vector::norm(&a) * margin;
        let a = Vector::new(a)?;
        let body = if i % 2 == 0 {
            Body::Sublevel(ConvexFunction::Affine { a, b })
        } else {
            Body::Halfspace { a, b }
        };
        constraints.push(Constraint::new(body));
    }
    let outer = if seed.is_multiple_of(2) {
        OuterSet::WholeSpace
    } else {
        OuterSet::Box {
            lo: Vector::new(alloc::vec![-OUTER_BOX; dim])?,
            hi: Vector::new(alloc::vec![OUTER_BOX; dim])?,
        }
    };
    let z = Vector::new(z)?;
    let problem = Problem::new(dim, constraints, outer)?.with_interior(z.clone(), INTERIOR_R)?;
    let window = problem.full_window()?;
    // prefer an infeasible start; C may be unbounded in the drawn direction
    let mut x0 = None;
    for _ in 0..64 {
        let dist = rng.random_range(2.0..5.0);
        let dir = random_unit(&mut rng, dim);
        let x = Vector::new(z.as_slice().iter().zip(&dir).map(|(zi, e)| zi + dist * e).collect())?;
        let feasible = problem.feasible(&x, &window, 0.0)?;
        x0 = Some(x);
        if !feasible {
            break;
        }
    }
    let x0 = x0.expect("at least one draw");
    Ok(PolyhedralInstance {
        seed,
        problem,
        z,
        radius: INTERIOR_R,
        x0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_ball_holds() {
        for seed in 0..50 {
            let inst = random_polyhedral(seed).unwrap();
            let window = inst.problem.full_window().unwrap();
            let check = inst.problem.spot_check_interior(&window, 200, seed).unwrap();
            assert!(check.passed(), "seed {seed}");
            assert!(inst.problem.outer().contains(inst.x0.as_slice()));
            let d = inst.x0.dist(&inst.z);
            assert!((2.0..=5.0).contains(&d));
        }
    }

    #[test]
    fn seeded_instances_repeat() {
        let a = random_polyhedral(17).unwrap();
        let b = random_polyhedral(17).unwrap();
        assert_eq!(a.x0, b.x0);
        assert_eq!(a.problem.constraint(0).unwrap(), b.problem.constraint(0).unwrap());
    }
}
