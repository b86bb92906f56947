use super::*;
use crate::linalg::{basis, max_abs_diff};
use crate::statistical::{builtin_flat, builtin_space_form_fiber, levi_civita};
use proptest::prelude::*;
use rand::Rng;

fn close_rel(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-14 * b.abs().max(1.0)
}

fn horizontal<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    v[0] = 0.0;
    v
}

fn full<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

#[test]
fn h3_connection_table_is_reproduced() {
    let chart = build_warped_chart(&builtin_h3_example()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let p = chart.sample_point(&mut rng);
        let e2t = (2.0 * p[0]).exp();
        let g = chart.connection(ConnectionKind::Nabla, &p).unwrap();
        let (t, x, y) = (basis(3, 0), basis(3, 1), basis(3, 2));
        let expect = [
            (&t, &t, vec![0.0, 0.0, 0.0]),
            (&t, &x, vec![0.0, 1.0, 0.0]),
            (&t, &y, vec![0.0, 0.0, 1.0]),
            (&x, &t, vec![0.0, 1.0, 0.0]),
            (&x, &x, vec![-e2t, 0.0, 1.0]),
            (&x, &y, vec![0.0, 1.0, 0.0]),
            (&y, &t, vec![0.0, 0.0, 1.0]),
            (&y, &x, vec![0.0, 1.0, 0.0]),
            (&y, &y, vec![-e2t, 0.0, 0.0]),
        ];
        for (a, b, want) in expect {
            let got = g.apply(a, b);
            assert!(
                got.iter().zip(&want).all(|(u, v)| close_rel(*u, *v)),
                "{got:?} vs {want:?}"
            );
        }
    }
}

#[test]
fn flat_fiber_gets_warp_term_only() {
    let spec = WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::exp());
    let chart = build_warped_chart(&spec).unwrap();
    let p = [0.3, 0.1, -0.2];
    let g = chart.connection(ConnectionKind::Nabla, &p).unwrap();
    assert!(close_rel(g.get(0, 1, 1), -(0.6f64).exp()));
    assert_eq!(g.get(2, 1, 1), 0.0);
}

#[test]
fn constant_warp_is_a_product() {
    let spec = WarpedProductSpec::with_standard_j(builtin_r2_example(), WarpingFunction::constant(1.0));
    let chart = build_warped_chart(&spec).unwrap();
    let p = [0.2, 0.4, 0.5];
    let g = chart.connection(ConnectionKind::Nabla, &p).unwrap();
    let fiber = builtin_r2_example().connection(ConnectionKind::Nabla, &p[1..]).unwrap();
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let want = if k > 0 && i > 0 && j > 0 { fiber.get(k - 1, i - 1, j - 1) } else { 0.0 };
                assert_eq!(g.get(k, i, j), want);
            }
        }
    }
}

#[test]
fn closed_form_curvature_matches_finite_differences() {
    let warps = [WarpingFunction::exp(), WarpingFunction::constant(2.0), WarpingFunction::cosh()];
    let fibers = [builtin_flat(2), builtin_r2_example()];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    for warp in &warps {
        for fiber in &fibers {
            let spec = WarpedProductSpec::with_standard_j(fiber.clone(), warp.clone());
            let chart = build_warped_chart(&spec).unwrap();
            for _ in 0..100 {
                let p = spec.sample_point(&mut rng);
                let (u, v, w) = (horizontal(3, &mut rng), horizontal(3, &mut rng), horizontal(3, &mut rng));
                for case in WarpedCurvatureCase::ALL {
                    let closed = warped_curvature_closed_form(&spec, &p, case, &u, &v, &w).unwrap();
                    let r = curvature(&chart, case.connection(), &p, DerivativeMode::FiniteDifference(1e-5))
                        .unwrap();
                    let [a, b, c] = case.slots(&u, &v, &w);
                    worst = worst.max(max_abs_diff(&closed, &r.apply(&a, &b, &c)));
                }
            }
        }
    }
    assert!(worst < 1e-6, "worst deviation {worst:e}");
}

#[test]
fn closed_form_case_d_example() {
    let spec = builtin_h3_example();
    let t = 0.25f64;
    let (x, y) = (basis(3, 1), basis(3, 2));
    let v = warped_curvature_closed_form(&spec, &[t, 0.0, 0.0], WarpedCurvatureCase::D, &y, &x, &y).unwrap();
    let want = vec![0.0, -(1.0 + (2.0 * t).exp()), 0.0];
    assert!(max_abs_diff(&v, &want) < 1e-14);
    let a = warped_curvature_closed_form(&spec, &[t, 0.0, 0.0], WarpedCurvatureCase::A, &y, &x, &y).unwrap();
    assert!(max_abs_diff(&a, &[0.0, -1.0, 0.0]) < 1e-14);
    let b = warped_curvature_closed_form(&spec, &[t, 0.0, 0.0], WarpedCurvatureCase::BStar, &y, &x, &y).unwrap();
    assert_eq!(b, vec![0.0; 3]);
}

#[test]
fn closed_form_rejects_vertical_probes() {
    let spec = builtin_h3_example();
    let xi = basis(3, 0);
    let x = basis(3, 1);
    assert!(matches!(
        warped_curvature_closed_form(&spec, &[0.0; 3], WarpedCurvatureCase::D, &x, &xi, &x),
        Err(GeometryError::InvalidArgument(_))
    ));
    assert!("e".parse::<WarpedCurvatureCase>().is_err());
    assert_eq!("d*".parse::<WarpedCurvatureCase>().unwrap(), WarpedCurvatureCase::DStar);
}

fn prp_deviation(spec: &WarpedProductSpec, samples: usize, seed: u64) -> f64 {
    let chart = build_warped_chart(spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = spec.total_dim();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let p = spec.sample_point(&mut rng);
        let (x, y, z, w) = (full(m, &mut rng), full(m, &mut rng), full(m, &mut rng), full(m, &mut rng));
        let closed = space_form_warped_curvature(spec, &p, &x, &y, &z, &w).unwrap();
        for kind in [ConnectionKind::Nabla, ConnectionKind::NablaStar] {
            let num = numerical_four_form(&chart, kind, &p, &x, &y, &z, &w, DerivativeMode::FiniteDifference(1e-5))
                .unwrap();
            worst = worst.max((closed - num).abs());
        }
    }
    worst
}

#[test]
fn space_form_curvature_matches_numerics_for_flat_fiber() {
    let spec = WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::exp()).with_space_form(0.0);
    assert!(prp_deviation(&spec, 100, 3) < 1e-6);
}

#[test]
fn space_form_curvature_matches_numerics_for_curved_fibers() {
    for c in [-1.0, 2.0] {
        for warp in [WarpingFunction::exp(), WarpingFunction::cosh()] {
            let spec = WarpedProductSpec::with_standard_j(builtin_space_form_fiber(c), warp).with_space_form(c);
            assert!(prp_deviation(&spec, 30, 4) < 1e-6, "c = {c}");
        }
    }
    // the statistical plane is a statistical space form with c = −1
    let spec = builtin_h3_example().with_space_form(-1.0);
    assert!(prp_deviation(&spec, 30, 5) < 1e-6);
}

#[test]
fn space_form_curvature_simple_values() {
    let spec = WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::constant(1.0)).with_space_form(0.0);
    let (x, y) = (basis(3, 1), basis(3, 2));
    assert_eq!(space_form_warped_curvature(&spec, &[0.1, 0.0, 0.0], &x, &y, &y, &x).unwrap(), 0.0);

    let hyp = WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::exp()).with_space_form(0.0);
    let xi = basis(3, 0);
    // ⟨R(X,Y)Y,X⟩ for the orthonormal pair (ξ, ∂x) at t = 0
    let v = space_form_warped_curvature(&hyp, &[0.0; 3], &xi, &x, &x, &xi).unwrap();
    assert!((v + 1.0).abs() < 1e-14);
    assert!(space_form_warped_curvature(&builtin_h3_example(), &[0.0; 3], &x, &y, &y, &x).is_err());
}

#[test]
fn h3_levi_civita_is_hyperbolic() {
    let chart = build_warped_chart(&builtin_h3_example()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let p = chart.sample_point(&mut rng);
        let (x, y) = (full(3, &mut rng), full(3, &mut rng));
        let g = chart.metric(&p).unwrap();
        let r = curvature(&chart, ConnectionKind::LeviCivita, &p, DerivativeMode::Auto).unwrap();
        assert!((r.sectional(&g, &x, &y) + 1.0).abs() < 1e-6);
    }
}

#[test]
fn built_charts_satisfy_axioms() {
    let specs = [
        builtin_h3_example(),
        WarpedProductSpec::with_standard_j(builtin_r2_example(), WarpingFunction::cosh()),
        WarpedProductSpec::new(builtin_flat(4), |x| twisted_j_field(0.7)(x), WarpingFunction::exp()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for spec in &specs {
        let chart = build_warped_chart(spec).unwrap();
        for _ in 0..20 {
            let p = chart.sample_point(&mut rng);
            let probes = Probes::random(chart.dim(), &mut rng);
            let rec = axiom_residuals(&chart, &p, &probes, DerivativeMode::Auto).unwrap();
            assert!(rec.max() < 1e-6, "{rec:?}");
        }
    }
}

#[test]
fn corrupted_fiber_is_rejected() {
    let fiber = builtin_r2_example().with_corrupted_nabla(0, 0, 1, 0.3);
    let spec = WarpedProductSpec::with_standard_j(fiber, WarpingFunction::exp());
    assert!(matches!(build_warped_chart(&spec), Err(GeometryError::FiberAxiomViolation(_))));
}

#[test]
fn frame_invariants_hold() {
    let spec = builtin_h3_example();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let p = spec.sample_point(&mut rng);
        let frame = ContactFrame::at(&spec, &p).unwrap();
        assert!(frame.invariant_residuals().max() < 1e-9);
    }
    let bad = WarpedProductSpec::new(builtin_flat(2), |x| perturbed_j_field(2, 0.1)(x), WarpingFunction::exp());
    assert!(matches!(ContactFrame::at(&bad, &[0.0; 3]), Err(GeometryError::FrameViolation(_))));
    assert!(bad.validate(4, 0).is_err());
    assert!(spec.validate(4, 0).is_ok());
}

#[test]
fn classification_branches() {
    let cosym = WarpedProductSpec::with_standard_j(builtin_r2_example(), WarpingFunction::constant(2.0));
    let c = contact_classification(&cosym, &[0.1, 0.2, 0.3]).unwrap();
    assert_eq!(c.structure_tag, StructureTag::AlmostCosymplectic);
    assert!(c.d_phi_residual < 1e-8);
    assert_eq!(c.d_eta_residual, 0.0);

    let kenmotsu = WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::exp());
    let k = contact_classification(&kenmotsu, &[0.3, 0.2, -0.1]).unwrap();
    assert_eq!(k.structure_tag, StructureTag::AlmostAlphaKenmotsu);
    assert_eq!(k.alpha, 1.0);
    assert_eq!(k.alpha_printed, -1.0);
    assert!(k.d_phi_residual < 1e-8);
    assert!(k.d_phi_residual_printed > 1.0);
    assert_eq!(k.d_eta_residual, 0.0);
}

#[test]
fn kenmotsu_iff_holds_on_both_branches() {
    let good = kenmotsu_theorem_check(&WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::exp()))
        .unwrap();
    assert!(good.fiber_almost_kaehler && good.total_almost_kenmotsu && good.consistent);
    assert_eq!(good.k_tilde.get("k_xi_xi"), Some(0.0));
    assert!(good.k_tilde.max() < 1e-9);

    let h3 = kenmotsu_theorem_check(&builtin_h3_example()).unwrap();
    assert!(h3.fiber_almost_kaehler && h3.total_almost_kenmotsu);
    assert!(h3.k_tilde.max() < 1e-9, "{:?}", h3.k_tilde);

    let perturbed = kenmotsu_theorem_check(&WarpedProductSpec::new(
        builtin_flat(2),
        |x| perturbed_j_field(2, 0.05)(x),
        WarpingFunction::exp(),
    ))
    .unwrap();
    assert!(!perturbed.fiber_almost_kaehler && !perturbed.total_almost_kenmotsu && perturbed.consistent);

    let twisted = kenmotsu_theorem_check(&WarpedProductSpec::new(
        builtin_flat(4),
        |x| twisted_j_field(0.8)(x),
        WarpingFunction::exp(),
    ))
    .unwrap();
    assert!(!twisted.fiber_almost_kaehler && !twisted.total_almost_kenmotsu && twisted.consistent);
    assert!(twisted.max_d_omega > 0.1);
    assert!(twisted.notes.is_empty());
}

#[test]
fn fiber_identities_vanish() {
    let fiber = builtin_r2_example();
    let j = standard_j_field(2);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let p = fiber.sample_point(&mut rng);
        let probes = Probes::random(2, &mut rng);
        let rec = hermitian_statistical_residuals(ResidualTarget::Fiber { chart: &fiber, j: &j }, &p, &probes, None)
            .unwrap();
        for name in ["aziz4", "aziz5", "aziz5a", "aziz5b", "cyclic"] {
            assert!(rec.get(name).unwrap() < 1e-8, "{name}: {rec:?}");
        }
    }
    let flat = builtin_flat(2);
    let rec = hermitian_statistical_residuals(
        ResidualTarget::Fiber { chart: &flat, j: &j },
        &[0.1, 0.1],
        &Probes::random(2, &mut rng),
        None,
    )
    .unwrap();
    assert_eq!(rec.get("fu_parallel"), Some(0.0));
}

#[test]
fn total_identities_vanish() {
    let specs = [
        builtin_h3_example(),
        WarpedProductSpec::with_standard_j(builtin_r2_example(), WarpingFunction::cosh()),
        WarpedProductSpec::new(builtin_flat(4), |x| twisted_j_field(0.6)(x), WarpingFunction::exp()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for spec in &specs {
        let chart = build_warped_chart(spec).unwrap();
        for _ in 0..20 {
            let p = spec.sample_point(&mut rng);
            let probes = Probes::random(chart.dim(), &mut rng);
            let rec = hermitian_statistical_residuals(ResidualTarget::Total { spec, chart: &chart }, &p, &probes, None)
                .unwrap();
            assert!(rec.max() < 1e-7, "{rec:?}");
        }
    }
}

#[test]
fn non_skew_psi_is_rejected() {
    let fiber = builtin_r2_example();
    let j = standard_j_field(2);
    let psi: PointFn<DMatrix<f64>> = Arc::new(|_| DMatrix::identity(2, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let err = hermitian_statistical_residuals(
        ResidualTarget::Fiber { chart: &fiber, j: &j },
        &[0.0, 0.0],
        &Probes::random(2, &mut rng),
        Some(&psi),
    );
    assert!(matches!(err, Err(GeometryError::InvalidArgument(_))));
}

#[test]
fn levi_civita_of_total_matches_trivial_lift() {
    let spec = WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::cosh());
    let chart = build_warped_chart(&spec).unwrap();
    let p = [0.3, 0.0, 0.1];
    let lc = levi_civita(&chart, &p).unwrap();
    let nabla = chart.connection(ConnectionKind::Nabla, &p).unwrap();
    assert!(lc.max_abs_diff(&nabla) < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn case_b_vanishes_numerically(t in -0.5f64..0.5, x in -1.0f64..1.0, y in -1.0f64..1.0,
                                    v in proptest::array::uniform2(-1.0f64..1.0),
                                    u in proptest::array::uniform2(-1.0f64..1.0)) {
        let chart = build_warped_chart(&builtin_h3_example()).unwrap();
        let r = curvature(&chart, ConnectionKind::Nabla, &[t, x, y], DerivativeMode::Auto).unwrap();
        let out = r.apply(&[0.0, v[0], v[1]], &[0.0, u[0], u[1]], &basis(3, 0));
        prop_assert!(out.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn prp_is_antisymmetric_in_first_pair(c in -3.0f64..3.0, t in -0.5f64..0.5,
                                          x in proptest::array::uniform3(-1.0f64..1.0),
                                          y in proptest::array::uniform3(-1.0f64..1.0),
                                          z in proptest::array::uniform3(-1.0f64..1.0),
                                          w in proptest::array::uniform3(-1.0f64..1.0)) {
        let spec = WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::cosh()).with_space_form(c);
        let p = [t, 0.0, 0.0];
        let a = space_form_warped_curvature(&spec, &p, &x, &y, &z, &w).unwrap();
        let b = space_form_warped_curvature(&spec, &p, &y, &x, &z, &w).unwrap();
        prop_assert!((a + b).abs() < 1e-12);
    }
}
