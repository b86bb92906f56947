//! One PASS/FAIL line per acceptance criterion, with wall-clock time.
//! Exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statwintgen::legendrian::{rho_perp_statistical, rho_statistical, LegendrianPointInstance};
use statwintgen::linalg::max_abs_diff;
use statwintgen::statistical::{
    builtin_flat, builtin_r2_example, builtin_space_form_fiber, curvature, DerivativeMode,
    ConnectionKind,
};
use statwintgen::suites::{reproduce_h3, reproduce_r2};
use statwintgen::tensor::{random_symmetric_traceless, SeedSequence};
use statwintgen::warped::{
    build_warped_chart, contact_classification, kenmotsu_theorem_check, numerical_four_form,
    perturbed_j_field, space_form_warped_curvature, twisted_j_field, warped_curvature_closed_form,
    StructureTag, WarpedCurvatureCase, WarpedProductSpec, WarpingFunction,
};
use statwintgen::wintgen::{
    corollary_constant, corollary_reports, lu_inequality, main_inequality, sweep, write_csv,
    CorollaryVariant, InstanceParams, Pairing, SweepConfig, SweepSummary,
};
use statwintgen::SquareMatrix;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn vector<R: Rng>(m: usize, rng: &mut R, horizontal: bool) -> Vec<f64> {
    let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    if horizontal {
        v[0] = 0.0;
    }
    v
}

fn r2_example() -> Verdict {
    let r = reproduce_r2(50, 1).expect("r2 example");
    verdict(
        r.passed,
        format!(
            "K = {}, K* = {}, analytic dev {:e}, fd dev {:e}, max axiom residual {:e}",
            r.sectional,
            r.sectional_star,
            r.max_deviation_analytic,
            r.max_deviation_fd,
            r.axioms.residuals.max()
        ),
    )
}

fn h3_example() -> Verdict {
    let r = reproduce_h3(50, 2).expect("h3 example");
    let pass = r.table_matches && r.max_sectional_deviation <= 1e-6;
    verdict(
        pass,
        format!(
            "table rel err {:e}, max |K0 + 1| {:e}",
            r.table_max_relative_error, r.max_sectional_deviation
        ),
    )
}

fn closed_form_cases() -> Verdict {
    let warps = [WarpingFunction::exp(), WarpingFunction::constant(2.0), WarpingFunction::cosh()];
    let fibers = [builtin_flat(2), builtin_r2_example()];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for warp in &warps {
        for fiber in &fibers {
            let spec = WarpedProductSpec::with_standard_j(fiber.clone(), warp.clone());
            let chart = build_warped_chart(&spec).expect("chart");
            for _ in 0..100 {
                let p = spec.sample_point(&mut rng);
                let (u, v, w) = (vector(3, &mut rng, true), vector(3, &mut rng, true), vector(3, &mut rng, true));
                for case in WarpedCurvatureCase::ALL {
                    let closed = warped_curvature_closed_form(&spec, &p, case, &u, &v, &w).expect("closed form");
                    let r = curvature(&chart, case.connection(), &p, DerivativeMode::FiniteDifference(1e-5))
                        .expect("curvature");
                    let [a, b, c] = case.slots(&u, &v, &w);
                    worst = worst.max(max_abs_diff(&closed, &r.apply(&a, &b, &c)));
                    checks += 1;
                }
            }
        }
    }
    verdict(worst < 1e-6, format!("{checks} comparisons, worst {worst:e}"))
}

fn space_form_products() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let flat = WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::exp()).with_space_form(0.0);
    let chart = build_warped_chart(&flat).expect("chart");
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = flat.sample_point(&mut rng);
        let [x, y, z, w] = [(); 4].map(|_| vector(3, &mut rng, false));
        let closed = space_form_warped_curvature(&flat, &p, &x, &y, &z, &w).expect("closed form");
        for kind in [ConnectionKind::Nabla, ConnectionKind::NablaStar] {
            let num = numerical_four_form(&chart, kind, &p, &x, &y, &z, &w, DerivativeMode::FiniteDifference(1e-5))
                .expect("numerics");
            worst = worst.max((closed - num).abs());
        }
    }
    let mut antisym = 0.0f64;
    let mut dual_gap = 0.0f64;
    for c in [-1.0, 0.0, 2.0] {
        let spec = WarpedProductSpec::with_standard_j(builtin_space_form_fiber(c), WarpingFunction::cosh())
            .with_space_form(c);
        let chart = build_warped_chart(&spec).expect("chart");
        for _ in 0..30 {
            let p = spec.sample_point(&mut rng);
            let [x, y, z, w] = [(); 4].map(|_| vector(3, &mut rng, false));
            let a = space_form_warped_curvature(&spec, &p, &x, &y, &z, &w).expect("closed form");
            let b = space_form_warped_curvature(&spec, &p, &y, &x, &z, &w).expect("closed form");
            antisym = antisym.max((a + b).abs());
            let mode = DerivativeMode::FiniteDifference(1e-5);
            let r = numerical_four_form(&chart, ConnectionKind::Nabla, &p, &x, &y, &z, &w, mode).expect("r");
            let rs = numerical_four_form(&chart, ConnectionKind::NablaStar, &p, &x, &y, &z, &w, mode).expect("r*");
            dual_gap = dual_gap.max((r - rs).abs());
        }
    }
    verdict(
        worst < 1e-6 && antisym <= 1e-12 && dual_gap <= 1e-12,
        format!("flat-fiber worst {worst:e}, antisymmetry {antisym:e}, |R - R*| {dual_gap:e}"),
    )
}

fn contact_structures() -> Verdict {
    let cosym = WarpedProductSpec::with_standard_j(builtin_r2_example(), WarpingFunction::constant(2.0));
    let c = contact_classification(&cosym, &[0.1, 0.2, 0.3]).expect("classification");
    let ken = WarpedProductSpec::with_standard_j(builtin_flat(2), WarpingFunction::exp());
    let k = contact_classification(&ken, &[0.3, 0.2, -0.1]).expect("classification");
    let positive = kenmotsu_theorem_check(&ken).expect("check");
    let h3 = kenmotsu_theorem_check(&WarpedProductSpec::with_standard_j(builtin_r2_example(), WarpingFunction::exp()))
        .expect("check");
    let twisted =
        kenmotsu_theorem_check(&WarpedProductSpec::new(builtin_flat(4), |x| twisted_j_field(0.8)(x), WarpingFunction::exp()))
            .expect("check");
    let perturbed = kenmotsu_theorem_check(&WarpedProductSpec::new(
        builtin_flat(2),
        |x| perturbed_j_field(2, 0.05)(x),
        WarpingFunction::exp(),
    ))
    .expect("check");
    let pass = c.structure_tag == StructureTag::AlmostCosymplectic
        && c.d_phi_residual < 1e-8
        && k.alpha.abs() == 1.0
        && k.d_phi_residual < 1e-8
        && positive.consistent
        && positive.total_almost_kenmotsu
        && h3.consistent
        && twisted.consistent
        && !twisted.fiber_almost_kaehler
        && perturbed.consistent
        && !perturbed.total_almost_kenmotsu;
    verdict(
        pass,
        format!(
            "constant warp: {} (dPhi res {:e}); e^t: alpha {} (res {:e}); iff consistent on flat/r2/twisted/perturbed: {}/{}/{}/{}",
            c.structure_tag,
            c.d_phi_residual,
            k.alpha,
            k.d_phi_residual,
            positive.consistent,
            h3.consistent,
            twisted.consistent,
            perturbed.consistent
        ),
    )
}

fn lu_theorem() -> Verdict {
    let seeds = SeedSequence::new(6);
    let mut failures = 0;
    let mut min_gap = f64::INFINITY;
    for k in 0..10_000u64 {
        let dim = 2 + (k % 5) as usize;
        let count = 1 + ((k / 5) % 5) as usize;
        let ms = random_symmetric_traceless(dim, count, seeds.derive(k));
        let r = lu_inequality(&ms, Pairing::Ordered).expect("lu");
        failures += usize::from(!r.holds);
        min_gap = min_gap.min(r.gap);
    }
    let pair = vec![
        SquareMatrix::diagonal(&[1.0, -1.0]),
        SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).expect("matrix"),
    ];
    let eq = lu_inequality(&pair, Pairing::Ordered).expect("lu");
    verdict(
        failures == 0 && eq.lhs == 16.0 && eq.rhs == 16.0,
        format!("{failures} failures in 10000 sets, min gap {min_gap:e}; pair {} = {}", eq.lhs, eq.rhs),
    )
}

fn legendrian_sweep() -> SweepConfig {
    SweepConfig {
        base_seed: 2024,
        count: 10_000,
        n_values: vec![2, 3, 4, 5],
        params: InstanceParams::default(),
    }
}

fn two_paths() -> Verdict {
    let config = legendrian_sweep();
    let mut disagreements = 0;
    for k in 0..config.count {
        let inst = config.instance(k).expect("instance");
        if rho_statistical(&inst).is_err() || rho_perp_statistical(&inst).is_err() {
            disagreements += 1;
        }
    }
    verdict(disagreements == 0, format!("{disagreements} disagreements in {} instances", config.count))
}

fn main_theorem() -> Verdict {
    let rows = sweep(&legendrian_sweep()).expect("sweep");
    let s = SweepSummary::from_rows(&rows);
    let umbilic = main_inequality(&LegendrianPointInstance::umbilic(2, 0.0, 1.0, 1.0), None).expect("report");
    let umbilic_ok = umbilic.lhs.abs() <= 1e-12 && (umbilic.rhs - 7.0).abs() <= 1e-12;
    let chain_ok = s.chain_failures.iter().all(|&f| f == 0);
    verdict(
        s.violations == 0 && umbilic_ok && chain_ok,
        format!(
            "{} violations in {} (min slack {:e}); chain step failures {:?}; umbilic lhs {} rhs {}; bound with consistent substitution: {} violations, min slack {:e}",
            s.violations,
            s.count,
            s.min_slack,
            s.chain_failures,
            umbilic.lhs,
            umbilic.rhs,
            s.corrected_violations,
            s.min_corrected_slack
        ),
    )
}

fn corollaries() -> Verdict {
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let ken = statwintgen::wintgen::random_instance(
            &InstanceParams {
                c_range: (0.0, 0.0),
                f_range: (0.5, 2.0),
                fprime_range: (0.0, 0.0),
                ..InstanceParams::default()
            },
            seed,
        )
        .expect("instance");
        // f′ = f exactly
        let ken = LegendrianPointInstance::umbilic(ken.n, 0.0, ken.f, ken.f);
        let a = corollary_reports(&ken, CorollaryVariant::Kenmotsu).expect("kenmotsu");
        let b = main_inequality(&ken, None).expect("main");
        worst = worst.max((a.rhs - b.rhs).abs());

        let cos = statwintgen::wintgen::random_instance(
            &InstanceParams {
                f_range: (1.0, 1.0),
                fprime_range: (0.0, 0.0),
                ..InstanceParams::default()
            },
            seed,
        )
        .expect("instance");
        let a = corollary_reports(&cos, CorollaryVariant::Cosymplectic).expect("cosymplectic");
        let b = main_inequality(&cos, None).expect("main");
        worst = worst.max((a.rhs - b.rhs).abs());
    }
    let c4 = corollary_constant(CorollaryVariant::Cosymplectic, 4.0);
    let cm4 = corollary_constant(CorollaryVariant::Cosymplectic, -4.0);
    verdict(
        worst <= 1e-12 && c4 == 1.0 && cm4 == 3.0,
        format!("max |rhs difference| {worst:e}; constants {c4} (c = 4), {cm4} (c = -4)"),
    )
}

fn determinism() -> Verdict {
    let config = SweepConfig {
        count: 2000,
        ..legendrian_sweep()
    };
    let render = || {
        let mut buf = Vec::new();
        write_csv(&sweep(&config).expect("sweep"), &mut buf).expect("csv");
        buf
    };
    let (a, b) = (render(), render());
    verdict(a == b, format!("{} bytes, identical = {}", a.len(), a == b))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Verdict); 10] = [
        ("r2 example reproduction", Duration::from_secs(1), r2_example),
        ("hyperbolic warped model", Duration::from_secs(5), h3_example),
        ("closed-form warped curvature", Duration::from_secs(30), closed_form_cases),
        ("space-form warped curvature", Duration::MAX, space_form_products),
        ("contact classification", Duration::MAX, contact_structures),
        ("Lu commutator inequality", Duration::MAX, lu_theorem),
        ("two-path curvature scalars", Duration::from_secs(60), two_paths),
        ("main inequality sweep", Duration::MAX, main_theorem),
        ("corollary specialization", Duration::MAX, corollaries),
        ("sweep determinism", Duration::MAX, determinism),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        let budget_note = if *budget == Duration::MAX {
            String::new()
        } else {
            format!(" (budget {}s)", budget.as_secs())
        };
        println!(
            "{} criterion {:>2} {name}: {} [{:.3}s{budget_note}]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
