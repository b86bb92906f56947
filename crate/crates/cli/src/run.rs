use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statwintgen::legendrian::LegendrianPointInstance;
use statwintgen::linalg::basis;
use statwintgen::report_schema_version;
use statwintgen::statistical::{
    builtin_flat, builtin_r2_example, builtin_space_form_fiber, curvature, ConnectionKind,
    DerivativeMode, DualisticChart,
};
use statwintgen::suites::{axiom_suite, builtin_chart, reproduce_h3, reproduce_r2};
use statwintgen::warped::{
    contact_classification, kenmotsu_theorem_check, perturbed_j_field, standard_j_field,
    twisted_j_field, ContactClassification, KenmotsuCheck, WarpedProductSpec, WarpingFunction,
};
use statwintgen::wintgen::{
    corollary_reports, main_inequality, sharpness_search, sweep, write_csv, InstanceParams,
    SharpnessConfig, SweepConfig, SweepSummary,
};

use crate::config::{Command, Example, Format, RunConfig};
use crate::CliError;

/// Result of one run: exit status and the rendered report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// 0 when every check passed, 1 when a violation was found.
    pub status: u8,
    pub report: String,
    /// One-line human summary for stderr.
    pub summary: String,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    seed: u64,
    passed: bool,
    report: T,
}

fn render<T: Serialize>(config: &RunConfig, passed: bool, report: T) -> Result<String, CliError> {
    let env = Envelope {
        schema: report_schema_version(),
        command: config.command.name(),
        seed: config.seed,
        passed,
        report,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn outcome(passed: bool, report: String, summary: String) -> Outcome {
    Outcome {
        status: if passed { 0 } else { 1 },
        report,
        summary,
    }
}

/// Executes the command without touching the filesystem except to read inputs.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    match &config.command {
        Command::Axioms => axioms(config),
        Command::Curvature => curvature_report(config),
        Command::Classify => classify(config),
        Command::Reproduce(example) => reproduce(config, *example),
        Command::WintgenVerify(path) | Command::WintgenChain(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let inst = LegendrianPointInstance::from_json(&text)?;
            verify(config, &inst)
        }
        Command::WintgenSweep => run_sweep(config),
        Command::WintgenSharpness => sharpness(config),
    }
}

/// Executes the command and writes the report to its destination
/// (stdout when none is configured).
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let out = execute(config)?;
    match config.destination() {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| {
                    CliError::Usage(format!("cannot create {}: {e}", parent.display()))
                })?;
            }
            std::fs::write(&path, &out.report)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        }
        None => print!("{}", out.report),
    }
    Ok(out)
}

fn chart_for(config: &RunConfig) -> Result<DualisticChart, CliError> {
    let chart = builtin_chart(&config.chart)?;
    Ok(match config.corrupt_gamma {
        Some(eps) => {
            let k = usize::from(chart.dim() > 2);
            chart.with_corrupted_nabla(k, 0, 1, eps)
        }
        None => chart,
    })
}

fn axioms(config: &RunConfig) -> Result<Outcome, CliError> {
    let chart = chart_for(config)?;
    let rep = axiom_suite(&chart, config.samples, config.seed, DerivativeMode::Auto, config.tolerance)?;
    let summary = if rep.passed {
        format!("axioms {}: all residuals within {:e}", rep.chart, config.tolerance)
    } else {
        let names: Vec<String> = rep.breaches.iter().map(|(n, v)| format!("{n} = {v:e}")).collect();
        format!("axioms {}: residual breach: {}", rep.chart, names.join(", "))
    };
    Ok(outcome(rep.passed, render(config, rep.passed, &rep)?, summary))
}

#[derive(Serialize)]
struct PlaneCurvature {
    plane: (usize, usize),
    nabla: f64,
    nabla_star: f64,
    levi_civita: f64,
}

#[derive(Serialize)]
struct CurvatureSample {
    point: Vec<f64>,
    planes: Vec<PlaneCurvature>,
    antisymmetry_defect: f64,
}

#[derive(Serialize)]
struct CurvatureReport {
    chart: String,
    samples: Vec<CurvatureSample>,
    max_antisymmetry_defect: f64,
}

fn curvature_report(config: &RunConfig) -> Result<Outcome, CliError> {
    let chart = chart_for(config)?;
    let n = chart.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut samples = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..config.samples {
        let p = chart.sample_point(&mut rng);
        let g = chart.metric(&p)?;
        let r = curvature(&chart, ConnectionKind::Nabla, &p, DerivativeMode::Auto)?;
        let rs = curvature(&chart, ConnectionKind::NablaStar, &p, DerivativeMode::Auto)?;
        let r0 = curvature(&chart, ConnectionKind::LeviCivita, &p, DerivativeMode::Auto)?;
        let mut planes = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let (x, y) = (basis(n, i), basis(n, j));
                planes.push(PlaneCurvature {
                    plane: (i, j),
                    nabla: r.sectional(&g, &x, &y),
                    nabla_star: rs.sectional(&g, &x, &y),
                    levi_civita: r0.sectional(&g, &x, &y),
                });
            }
        }
        let defect = r
            .antisymmetry_defect()
            .max(rs.antisymmetry_defect())
            .max(r0.antisymmetry_defect());
        worst = worst.max(defect);
        samples.push(CurvatureSample {
            point: p,
            planes,
            antisymmetry_defect: defect,
        });
    }
    let passed = worst <= config.tolerance;
    let report = CurvatureReport {
        chart: chart.name().to_string(),
        samples,
        max_antisymmetry_defect: worst,
    };
    let summary = format!("curvature {}: {} samples", report.chart, report.samples.len());
    Ok(outcome(passed, render(config, passed, &report)?, summary))
}

fn fiber_for(name: &str) -> Result<DualisticChart, CliError> {
    Ok(match name {
        "flat" | "flat2" => builtin_flat(2),
        "flat4" => builtin_flat(4),
        "r2" => builtin_r2_example(),
        "space-form" => builtin_space_form_fiber(1.0),
        other => return Err(CliError::Usage(format!("unknown fiber {other:?}"))),
    })
}

fn warp_for(name: &str) -> Result<WarpingFunction, CliError> {
    Ok(match name {
        "exp" => WarpingFunction::exp(),
        "cosh" => WarpingFunction::cosh(),
        "constant" => WarpingFunction::constant(2.0),
        other => return Err(CliError::Usage(format!("unknown warp {other:?}"))),
    })
}

#[derive(Serialize)]
struct ClassifySample {
    point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<ContactClassification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct ClassifyReport {
    fiber: String,
    warp: String,
    j_perturbation: f64,
    samples: Vec<ClassifySample>,
    kenmotsu: KenmotsuCheck,
}

fn classify(config: &RunConfig) -> Result<Outcome, CliError> {
    let fiber = fiber_for(&config.fiber)?;
    let dim = fiber.dim();
    let eps = config.j_perturbation;
    let j = if eps == 0.0 {
        standard_j_field(dim)
    } else if dim == 4 {
        twisted_j_field(eps)
    } else {
        perturbed_j_field(dim, eps)
    };
    let spec = WarpedProductSpec::new(fiber, move |x| j(x), warp_for(&config.warp)?);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let samples: Vec<ClassifySample> = (0..config.samples)
        .map(|_| {
            let p = spec.sample_point(&mut rng);
            match contact_classification(&spec, &p) {
                Ok(c) => ClassifySample { point: p, classification: Some(c), error: None },
                Err(e) => ClassifySample { point: p, classification: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let kenmotsu = kenmotsu_theorem_check(&spec)?;
    let passed = kenmotsu.consistent;
    let tag = samples
        .iter()
        .find_map(|s| s.classification.as_ref().map(|c| c.structure_tag.to_string()))
        .unwrap_or_else(|| "no valid frame".into());
    let summary = format!(
        "classify {} ×_{} : {tag}; fiber almost Kaehler = {}, almost Kenmotsu = {}",
        config.fiber, config.warp, kenmotsu.fiber_almost_kaehler, kenmotsu.total_almost_kenmotsu
    );
    let report = ClassifyReport {
        fiber: config.fiber.clone(),
        warp: config.warp.clone(),
        j_perturbation: eps,
        samples,
        kenmotsu,
    };
    Ok(outcome(passed, render(config, passed, &report)?, summary))
}

fn reproduce(config: &RunConfig, example: Example) -> Result<Outcome, CliError> {
    match example {
        Example::R2 => {
            let r = reproduce_r2(config.samples, config.seed)?;
            let summary = format!(
                "example-r2: sectional {} / {}, max deviation {:e} (analytic) {:e} (finite differences)",
                r.sectional, r.sectional_star, r.max_deviation_analytic, r.max_deviation_fd
            );
            Ok(outcome(r.passed, render(config, r.passed, &r)?, summary))
        }
        Example::H3 => {
            let r = reproduce_h3(config.samples, config.seed)?;
            let summary = format!(
                "example-h3: table matches = {}, max |K + 1| = {:e}",
                r.table_matches, r.max_sectional_deviation
            );
            Ok(outcome(r.passed, render(config, r.passed, &r)?, summary))
        }
    }
}

fn verify(config: &RunConfig, inst: &LegendrianPointInstance) -> Result<Outcome, CliError> {
    let report = match config.variant {
        Some(v) => corollary_reports(inst, v)?,
        None => main_inequality(inst, Some(config.seed))?,
    };
    let holds = report.slack >= -config.slack_tolerance;
    if let Command::WintgenChain(_) = config.command {
        let chain_ok = report.chain.iter().all(|s| s.rhs - s.lhs >= -config.slack_tolerance);
        let failed: Vec<&str> = report.chain.iter().filter(|s| !s.holds).map(|s| s.step).collect();
        let summary = if chain_ok {
            "chain: every step holds".to_string()
        } else {
            format!("chain: failing steps {}", failed.join(", "))
        };
        return Ok(outcome(chain_ok, render(config, chain_ok, &report)?, summary));
    }
    let summary = format!(
        "lhs {} rhs {} slack {} ({})",
        report.lhs,
        report.rhs,
        report.slack,
        if holds { "holds" } else { "violated" }
    );
    Ok(outcome(holds, render(config, holds, &report)?, summary))
}

#[derive(Serialize)]
struct SweepReport<'a> {
    summary: &'a SweepSummary,
    rows: &'a [statwintgen::SweepRow],
}

fn run_sweep(config: &RunConfig) -> Result<Outcome, CliError> {
    let sweep_config = SweepConfig {
        base_seed: config.seed,
        count: config.count,
        n_values: config.n.clone(),
        params: InstanceParams {
            n: config.n[0],
            c_range: config.c_range,
            f_range: config.f_range,
            fprime_range: config.fprime_range,
            magnitude: config.magnitude,
            total_symmetry: config.total_symmetry,
        },
    };
    let mut rows = sweep(&sweep_config)?;
    for row in &mut rows {
        row.holds = row.slack >= -config.slack_tolerance;
    }
    let summary = SweepSummary::from_rows(&rows);
    let passed = summary.violations == 0;
    let report = match config.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).map_err(|e| CliError::Usage(e.to_string()))?;
            String::from_utf8(buf).expect("CSV is ASCII")
        }
        Format::Json => render(config, passed, SweepReport { summary: &summary, rows: &rows })?,
    };
    let text = format!(
        "sweep: {} instances, {} violations, min slack {:e}, chain step failures {:?}",
        summary.count, summary.violations, summary.min_slack, summary.chain_failures
    );
    Ok(outcome(passed, report, text))
}

fn sharpness(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut sc = SharpnessConfig::new(
        config.n[0],
        config.c,
        config.f,
        config.f_prime,
        config.iterations,
        config.seed,
    );
    sc.restarts = config.restarts;
    let rec = sharpness_search(&sc)?;
    let passed = rec.min_slack >= -config.slack_tolerance;
    let summary = format!(
        "sharpness: min slack {} after {} evaluations{}",
        rec.min_slack,
        rec.evaluations,
        if passed { "" } else { " (VIOLATION)" }
    );
    Ok(outcome(passed, render(config, passed, &rec)?, summary))
}
