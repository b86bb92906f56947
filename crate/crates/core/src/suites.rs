//! Batch checks over sampled points: axiom suites and the two worked examples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::linalg::basis;
use crate::residuals::ResidualRecord;
use crate::statistical::{
    axiom_residuals, builtin_flat, builtin_r2_example, builtin_space_form_fiber, curvature,
    ConnectionKind, DerivativeMode, DualisticChart, Probes,
};
use crate::warped::{build_warped_chart, builtin_h3_example};

/// Charts reachable by name: `flat` (plane), `flat4`, `r2`, `h3`
/// (the total chart of the hyperbolic warped model) and `space-form`
/// (constant curvature 1).
pub fn builtin_chart(name: &str) -> Result<DualisticChart> {
    match name {
        "flat" | "flat2" => Ok(builtin_flat(2)),
        "flat4" => Ok(builtin_flat(4)),
        "r2" => Ok(builtin_r2_example()),
        "h3" => build_warped_chart(&builtin_h3_example()),
        "space-form" => Ok(builtin_space_form_fiber(1.0)),
        other => Err(GeometryError::InvalidArgument(format!(
            "unknown chart {other:?} (expected flat, flat4, r2, h3 or space-form)"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomSuiteReport {
    pub chart: String,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Worst value of each residual over all samples.
    pub residuals: ResidualRecord,
    pub breaches: Vec<(String, f64)>,
    pub passed: bool,
}

/// Axiom residuals at `samples` seeded points with fresh random probes.
pub fn axiom_suite(
    chart: &DualisticChart,
    samples: usize,
    seed: u64,
    mode: DerivativeMode,
    tolerance: f64,
) -> Result<AxiomSuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = ResidualRecord::new();
    for _ in 0..samples {
        let p = chart.sample_point(&mut rng);
        let probes = Probes::random(chart.dim(), &mut rng);
        residuals.absorb(&axiom_residuals(chart, &p, &probes, mode)?);
    }
    let breaches: Vec<(String, f64)> = residuals
        .breaches(tolerance)
        .into_iter()
        .map(|(n, v)| (n.to_string(), v))
        .collect();
    Ok(AxiomSuiteReport {
        chart: chart.name().to_string(),
        samples,
        seed,
        tolerance,
        passed: breaches.is_empty(),
        residuals,
        breaches,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct R2Reproduction {
    /// `g(R(∂x,∂y)∂y,∂x)` and the same for `R*` at the first sample.
    pub sectional: f64,
    pub sectional_star: f64,
    /// Largest deviation from −1 with analytic connection derivatives.
    pub max_deviation_analytic: f64,
    /// Largest deviation from −1 with finite differences.
    pub max_deviation_fd: f64,
    pub axioms: AxiomSuiteReport,
    pub passed: bool,
}

/// The statistical plane of constant curvature −1.
pub fn reproduce_r2(samples: usize, seed: u64) -> Result<R2Reproduction> {
    let chart = builtin_r2_example();
    let (ex, ey) = (basis(2, 0), basis(2, 1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev_a = 0.0f64;
    let mut dev_fd = 0.0f64;
    let mut first = Vec::new();
    for sample in 0..samples.max(1) {
        let p = chart.sample_point(&mut rng);
        let g = chart.metric(&p)?;
        for kind in [ConnectionKind::Nabla, ConnectionKind::NablaStar] {
            let ra = curvature(&chart, kind, &p, DerivativeMode::Analytic)?;
            let rf = curvature(&chart, kind, &p, DerivativeMode::FiniteDifference(chart.fd_step()))?;
            let sa = ra.four_form(&g, &ex, &ey, &ey, &ex);
            dev_a = dev_a.max((sa + 1.0).abs());
            dev_fd = dev_fd.max((rf.four_form(&g, &ex, &ey, &ey, &ex) + 1.0).abs());
            if sample == 0 {
                first.push(sa);
            }
        }
    }
    let (sectional, sectional_star) = (first[0], first[1]);
    let axioms = axiom_suite(&chart, samples.max(1), seed, DerivativeMode::Analytic, 1e-8)?;
    let passed = dev_a <= 1e-10 && dev_fd <= 1e-6 && axioms.passed;
    Ok(R2Reproduction {
        sectional,
        sectional_star,
        max_deviation_analytic: dev_a,
        max_deviation_fd: dev_fd,
        axioms,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H3Reproduction {
    /// Number of `∇̄_{∂a}∂b` identities compared per sample (nine).
    pub table_identities: usize,
    /// Largest relative error against the closed-form table.
    pub table_max_relative_error: f64,
    pub table_matches: bool,
    /// Largest `|K⁰ + 1|` over random planes.
    pub max_sectional_deviation: f64,
    pub axioms: AxiomSuiteReport,
    pub passed: bool,
}

/// `dt² + e^{2t}(dx² + dy²)` over the statistical plane.
pub fn reproduce_h3(samples: usize, seed: u64) -> Result<H3Reproduction> {
    let spec = builtin_h3_example();
    let chart = build_warped_chart(&spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t, x, y) = (basis(3, 0), basis(3, 1), basis(3, 2));
    let mut table_err = 0.0f64;
    let mut sec_dev = 0.0f64;
    for _ in 0..samples.max(1) {
        let p = chart.sample_point(&mut rng);
        let e2t = (2.0 * p[0]).exp();
        let gamma = chart.connection(ConnectionKind::Nabla, &p)?;
        let expect = [
            (&t, &t, [0.0, 0.0, 0.0]),
            (&t, &x, [0.0, 1.0, 0.0]),
            (&t, &y, [0.0, 0.0, 1.0]),
            (&x, &t, [0.0, 1.0, 0.0]),
            (&x, &x, [-e2t, 0.0, 1.0]),
            (&x, &y, [0.0, 1.0, 0.0]),
            (&y, &t, [0.0, 0.0, 1.0]),
            (&y, &x, [0.0, 1.0, 0.0]),
            (&y, &y, [-e2t, 0.0, 0.0]),
        ];
        for (a, b, want) in expect {
            for (got, w) in gamma.apply(a, b).iter().zip(want) {
                table_err = table_err.max((got - w).abs() / w.abs().max(1.0));
            }
        }
        let probes = Probes::random(3, &mut rng);
        let g = chart.metric(&p)?;
        let r0 = curvature(&chart, ConnectionKind::LeviCivita, &p, DerivativeMode::Auto)?;
        sec_dev = sec_dev.max((r0.sectional(&g, &probes.x, &probes.y) + 1.0).abs());
    }
    let axioms = axiom_suite(&chart, samples.max(1), seed, DerivativeMode::Auto, 1e-6)?;
    let table_matches = table_err <= 1e-14;
    Ok(H3Reproduction {
        table_identities: 9,
        table_max_relative_error: table_err,
        table_matches,
        max_sectional_deviation: sec_dev,
        passed: table_matches && sec_dev <= 1e-6 && axioms.passed,
        axioms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r2_reproduces() {
        let r = reproduce_r2(20, 1).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.sectional + 1.0).abs() < 1e-12);
        assert!((r.sectional_star + 1.0).abs() < 1e-12);
    }

    #[test]
    fn h3_reproduces() {
        let r = reproduce_h3(20, 2).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn corrupted_chart_breaches_duality() {
        let chart = builtin_chart("h3").unwrap().with_corrupted_nabla(0, 1, 1, 1e-3);
        let rep = axiom_suite(&chart, 5, 0, DerivativeMode::Auto, 1e-8).unwrap();
        assert!(!rep.passed);
        assert!(rep.breaches.iter().any(|(n, _)| n == "duality"));
    }

    #[test]
    fn unknown_chart_is_rejected() {
        assert!(builtin_chart("torus").is_err());
    }
}
