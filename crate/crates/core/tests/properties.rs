use feasik_core::certificates::check_single_operator;
use feasik_core::operators::{check_cutter_property, project_metric};
use feasik_core::{
    Body, Constraint, ConvexFunction, CorrectionCounter, CounterMode, Cutter, OuterSet,
    OverrelaxationSchedule, Vector,
};
use proptest::prelude::*;

fn vec_in(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, dim)
}

fn v(c: Vec<f64>) -> Vector {
    Vector::new(c).unwrap()
}

fn nonzero(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    vec_in(dim, -3.0, 3.0).prop_filter("nonzero normal", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-2)
}

fn geometric_body(dim: usize) -> impl Strategy<Value = Body> {
    prop_oneof![
        (nonzero(dim), -2.0..2.0f64).prop_map(|(a, b)| Body::Halfspace { a: v(a), b }),
        (vec_in(dim, -2.0, 2.0), 0.1..3.0f64).prop_map(|(c, r)| Body::Ball { center: v(c), radius: r }),
        (vec_in(dim, -2.0, 0.0), vec_in(dim, 0.0, 2.0)).prop_map(|(lo, hi)| Body::Box { lo: v(lo), hi: v(hi) }),
    ]
}

fn body(dim: usize) -> impl Strategy<Value = Body> {
    prop_oneof![
        geometric_body(dim),
        (0..dim, 0.1..2.0f64).prop_map(|(axis, c)| Body::Sublevel(ConvexFunction::QuadCoordMinusC { axis, c })),
        (0..dim, 0.1..2.0f64).prop_map(|(axis, c)| Body::Sublevel(ConvexFunction::AbsCoordMinusC { axis, c })),
        (vec_in(dim, -1.0, 1.0), 0.5..2.0f64)
            .prop_map(|(c, r)| Body::Sublevel(ConvexFunction::SquaredDistToBall { center: v(c), radius: r })),
    ]
}

// A point of the body: sample and pull it in with the metric projection when
// one exists, else fall back to a known interior point.
fn member_of(b: &Body, p: Vec<f64>) -> Vector {
    let x = v(p);
    match b {
        Body::Sublevel(ConvexFunction::QuadCoordMinusC { axis, c }) | Body::Sublevel(ConvexFunction::AbsCoordMinusC { axis, c }) => {
            let mut y = x.into_inner();
            y[*axis] = y[*axis].clamp(-c.sqrt().min(*c), c.sqrt().min(*c));
            v(y)
        }
        _ => project_metric(b, &x).unwrap().image,
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 2000,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn cutter_property_holds(b in body(3), x in vec_in(3, -6.0, 6.0), p in vec_in(3, -6.0, 6.0)) {
        let c = Constraint::new(b.clone());
        let z = member_of(&b, p);
        prop_assume!(c.member(z.as_slice(), 0.0));
        let check = check_cutter_property(&c, &v(x), &z).unwrap();
        prop_assert!(check.ok, "{check:?}");
    }

    #[test]
    fn metric_projection_is_firmly_nonexpansive(b in geometric_body(3), x in vec_in(3, -6.0, 6.0), y in vec_in(3, -6.0, 6.0)) {
        let px = project_metric(&b, &v(x.clone())).unwrap().image;
        let py = project_metric(&b, &v(y.clone())).unwrap().image;
        let d: Vec<f64> = px.as_slice().iter().zip(py.as_slice()).map(|(a, b)| a - b).collect();
        let e: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let lhs: f64 = d.iter().map(|t| t * t).sum();
        let rhs: f64 = d.iter().zip(&e).map(|(a, b)| a * b).sum();
        prop_assert!(lhs <= rhs + 1e-10);
        prop_assert!(Constraint::new(b).member(px.as_slice(), 0.0));
    }

    #[test]
    fn single_operator_inequality(
        a in nonzero(3), off in 0.0..2.0f64, y in vec_in(3, -3.0, 3.0),
        gap in 0.01..4.0f64, rho_frac in 0.01..1.0f64, alpha in 0.05..=2.0f64,
    ) {
        // halfspace {⟨a,x⟩ ≤ ⟨a,y⟩ + ‖a‖(ρ + off)} contains B(y, ρ)
        let an = a.iter().map(|t| t * t).sum::<f64>().sqrt();
        let rho = rho_frac * 2.0;
        let b = a.iter().zip(&y).map(|(s, t)| s * t).sum::<f64>() + an * (rho + off);
        let x: Vec<f64> = y.iter().zip(&a).map(|(yi, ai)| yi + ai / an * (rho + off + gap)).collect();
        let t = Constraint::new(Body::Halfspace { a: v(a), b });
        let check = check_single_operator(&t, &v(x), &v(y), rho, alpha).unwrap();
        prop_assert!(check.ok, "{check:?}");
    }

    #[test]
    fn beta_never_undershoots(r in 1e-9..10.0f64, phi in 1e-3..10.0f64, d in 1e-9..10.0f64) {
        prop_assert!(feasik_core::schedules::beta(r, phi, d) >= 1.0);
    }

    #[test]
    fn bracketed_counter_steps_by_at_most_one(flags in prop::collection::vec(any::<bool>(), 1..200)) {
        let mut c = CorrectionCounter::new(CounterMode::Bracketed);
        for f in flags {
            let next = c.update(f);
            prop_assert!(next.value() - c.value() == u64::from(f));
            c = next;
        }
    }

    #[test]
    fn outer_projection_is_idempotent(x in vec_in(3, -20.0, 20.0), c in vec_in(3, -2.0, 2.0), r in 0.1..5.0f64) {
        let sets = [
            OuterSet::Ball { center: v(c.clone()), radius: r },
            OuterSet::Box { lo: v(vec![-1.0, -2.0, -3.0]), hi: v(vec![1.0, 2.0, 3.0]) },
            OuterSet::Halfspace { a: v(vec![1.0, -2.0, 0.5]), b: r },
        ];
        for q in sets {
            let once = q.project(v(x.clone()));
            let twice = q.project(once.clone());
            for (s, t) in once.as_slice().iter().zip(twice.as_slice()) {
                prop_assert!((s - t).abs() <= 1e-14 * (1.0 + s.abs()));
            }
            prop_assert!(q.contains(once.as_slice()));
        }
    }
}

#[test]
fn merged_schedule_is_nonincreasing() {
    let r = feasik_core::certificates::a2_schedule();
    let mut prev = f64::INFINITY;
    for k in 0..20_000 {
        let x = r.value(k);
        assert!(x > 0.0 && x <= prev);
        prev = x;
    }
    assert!(matches!(r, OverrelaxationSchedule::MergedDecreasing { .. }));
}

#[test]
fn subgradient_image_satisfies_linearization() {
    let f = ConvexFunction::QuadCoordMinusC { axis: 0, c: 1.0 };
    let c = Constraint::new(Body::Sublevel(f.clone()));
    for i in 0..200 {
        let x = v(vec![1.5 + i as f64 * 0.1, -0.3 * i as f64]);
        let img = c.apply(&x).unwrap().image;
        let g = f.subgradient(x.as_slice());
        let lin: f64 = g.as_slice().iter().zip(img.as_slice()).zip(x.as_slice()).map(|((g, t), x)| g * (t - x)).sum();
        let fx = f.value(x.as_slice());
        assert!((lin + fx).abs() <= 1e-12 * fx.abs());
    }
}
