mod common;

use cat_core::model::model_value;
use cat_core::trs::{solve_subproblem, Gammas, Subproblem, SubproblemInput};
use common::{exact_certificate, exact_model, exact_trs, random_instances, to_f64, UNIT_ROUNDOFF};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const GAMMAS: (f64, f64, f64) = (0.01, 0.8, 0.5);

fn input<'a>(
    g: &'a DVector<f64>,
    h: &'a DMatrix<f64>,
    radius: f64,
    eps: f64,
    delta_warm: f64,
) -> SubproblemInput<'a> {
    SubproblemInput {
        gradient: g,
        hessian: h,
        radius,
        eps,
        delta_warm,
        gammas: Gammas::default(),
        seed: 7,
    }
}

#[test]
fn exact_oracle_on_closed_forms() {
    // H = I, g = (3, 4), r = 1: the boundary solution is -g/||g||
    let g = DVector::from_vec(vec![3.0, 4.0]);
    let eye = DMatrix::identity(2, 2);
    let ex = exact_trs(&g, &eye, 1.0);
    assert!((ex.d[0] + 0.6).abs() < 1e-12 && (ex.d[1] + 0.8).abs() < 1e-12);
    assert!((ex.multiplier - 4.0).abs() < 1e-9);

    // interior Newton point
    let ex = exact_trs(&g, &eye, 6.0);
    assert_eq!(ex.multiplier, 0.0);
    assert!((ex.model + 12.5).abs() < 1e-12);

    // H = diag(-1, 1), g = (0, 1), r = 2: multiplier 1, d = (+-sqrt(15)/2, -1/2)
    let h = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0]));
    let g = DVector::from_vec(vec![0.0, 1.0]);
    let ex = exact_trs(&g, &h, 2.0);
    assert!(ex.hard_case);
    assert!((ex.d[0].abs() - 15f64.sqrt() / 2.0).abs() < 1e-6);
    assert!((ex.d[1] + 0.5).abs() < 1e-6);
    assert!((ex.model - (-0.5 * 15.0 / 4.0 + 0.5 * 0.25 - 0.5)).abs() < 1e-6);
}

#[test]
fn random_instances_satisfy_certificate_and_are_dominated_by_exact_solution() {
    for (k, inst) in random_instances(200, 20240601).iter().enumerate() {
        let sol = solve_subproblem(&input(&inst.g, &inst.h, inst.radius, inst.eps, inst.delta_warm))
            .unwrap_or_else(|e| panic!("instance {k}: {e}"));
        let verdict = exact_certificate(
            &inst.g,
            &inst.h,
            &sol.direction,
            sol.delta,
            inst.radius,
            inst.eps,
            GAMMAS,
            4.0,
        );
        assert!(verdict.holds(), "instance {k}: {verdict:?}");

        let m_ret = to_f64(&exact_model(&inst.g, &inst.h, &sol.direction));
        assert!(m_ret <= 0.0, "instance {k}: model {m_ret}");
        let ex = exact_trs(&inst.g, &inst.h, inst.radius);
        let m_star = to_f64(&exact_model(&inst.g, &inst.h, &ex.d));
        let scale = inst.g.norm() * inst.radius + inst.h.norm() * inst.radius * inst.radius;
        assert!(
            m_star <= m_ret + 4.0 * UNIT_ROUNDOFF * scale,
            "instance {k}: exact {m_star} vs returned {m_ret}"
        );
    }
}

#[test]
fn hard_case_in_three_dimensions() {
    let h = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 1.0]));
    let s = 0.5f64.sqrt();
    let g = DVector::from_vec(vec![0.0, s, s]);
    let sol = solve_subproblem(&input(&g, &h, 3.0, 1.0, 0.0)).unwrap();
    assert!(sol.hard_case);
    assert!((sol.direction.norm() - 3.0).abs() <= 1e-8 * 3.0);
    let verdict = exact_certificate(&g, &h, &sol.direction, sol.delta, 3.0, 1.0, GAMMAS, 4.0);
    assert!(verdict.holds(), "{verdict:?}");
    let ex = exact_trs(&g, &h, 3.0);
    assert!(ex.model <= model_value(&g, &h, &sol.direction) + 1e-12);
}

#[test]
fn newton_shortcut_uses_one_factorization() {
    let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let g = DVector::from_vec(vec![0.1, -0.2]);
    let sol = solve_subproblem(&input(&g, &h, 10.0, 1.0, 0.0)).unwrap();
    assert_eq!(sol.delta, 0.0);
    assert_eq!(sol.factorizations_used, 1);
    assert!(!sol.hard_case);
}

#[test]
fn zero_tolerance_never_yields_an_uncertified_step() {
    // exact eigenvector alignment is not reachable at eps = 0
    let h = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0]));
    let g = DVector::from_vec(vec![0.0, 1.0]);
    let result = solve_subproblem(&input(&g, &h, 2.0, 0.0, 0.0));
    if let Ok(sol) = result {
        let verdict = exact_certificate(&g, &h, &sol.direction, sol.delta, 2.0, 0.0, GAMMAS, 4.0);
        assert!(verdict.holds());
    }
}

proptest! {
    #[test]
    fn shifted_step_norm_is_nonincreasing(
        seed in 0u64..10_000,
        t1 in 0.0f64..20.0,
        t2 in 0.0f64..20.0,
    ) {
        let inst = &random_instances(1, seed)[0];
        let lmin = nalgebra::SymmetricEigen::new(inst.h.clone()).eigenvalues.min();
        let floor = (-lmin).max(0.0) + 1e-6;
        let (a, b) = (floor + t1.min(t2), floor + t1.max(t2));
        let mut sub = Subproblem::from_input(&input(&inst.g, &inst.h, 1.0, 1.0, 0.0));
        let da = sub.phi(a).step.expect("positive definite shift");
        let db = sub.phi(b).step.expect("positive definite shift");
        prop_assert!(db.norm() <= da.norm() * (1.0 + 1e-12));
        prop_assert_eq!(sub.factorizations(), 2);
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible(seed in 0u64..10_000) {
        let inst = &random_instances(1, seed)[0];
        let inp = input(&inst.g, &inst.h, inst.radius, inst.eps, inst.delta_warm);
        prop_assert_eq!(solve_subproblem(&inp), solve_subproblem(&inp));
    }
}
