use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{main_inequality, InstanceParams, SLACK_TOLERANCE};
use crate::error::{GeometryError, Result};
use crate::legendrian::LegendrianPointInstance;
use crate::tensor::SeedSequence;

const INITIAL_STEP: f64 = 0.25;
const MIN_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessConfig {
    pub n: usize,
    pub c: f64,
    pub f: f64,
    pub f_prime: f64,
    /// Total slack evaluations across all restarts.
    pub iterations: usize,
    pub seed: u64,
    pub restarts: usize,
}

impl SharpnessConfig {
    pub fn new(n: usize, c: f64, f: f64, f_prime: f64, iterations: usize, seed: u64) -> Self {
        Self {
            n,
            c,
            f,
            f_prime,
            iterations,
            seed,
            restarts: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessRecord {
    pub best: LegendrianPointInstance,
    pub min_slack: f64,
    /// Best slack after each improvement; non-increasing.
    pub trace: Vec<f64>,
    /// True when the search found slack below `−1e−9`.
    pub violation: bool,
    pub evaluations: usize,
}

fn slack(inst: &LegendrianPointInstance) -> Result<f64> {
    Ok(main_inequality(inst, None)?.slack)
}

/// Random-restart coordinate hill climb over the φ-slice entries of `h` and `h*`.
///
/// The umbilic instance is evaluated first. Each restart starts from a random
/// instance, perturbs one symmetric entry pair at a time, and halves the step
/// after a full round of failed moves until it drops below `1e−6`.
pub fn sharpness_search(config: &SharpnessConfig) -> Result<SharpnessRecord> {
    if config.iterations == 0 {
        return Err(GeometryError::InvalidArgument("iterations must be at least 1".into()));
    }
    let n = config.n;
    let base = LegendrianPointInstance::umbilic(n, config.c, config.f, config.f_prime);
    base.check()?;
    let mut best = base.clone();
    let mut best_slack = slack(&base)?;
    let mut trace = vec![best_slack];
    let mut evaluations = 1;

    let coords: Vec<(bool, usize, usize, usize)> = [false, true]
        .into_iter()
        .flat_map(|star| {
            (0..n).flat_map(move |r| (0..n).flat_map(move |i| (i..n).map(move |j| (star, r, i, j))))
        })
        .collect();
    let seeds = SeedSequence::new(config.seed);
    let restarts = config.restarts.max(1);
    let per_restart = (config.iterations.saturating_sub(1) / restarts).max(1);

    for restart in 0..restarts {
        if evaluations >= config.iterations {
            break;
        }
        let params = InstanceParams {
            n,
            c_range: (config.c, config.c),
            f_range: (config.f, config.f),
            fprime_range: (config.f_prime, config.f_prime),
            magnitude: 1.0,
            total_symmetry: false,
        };
        let mut current = super::random_instance(&params, seeds.derive(2 * restart as u64))?;
        let mut current_slack = slack(&current)?;
        evaluations += 1;
        if current_slack < best_slack {
            best_slack = current_slack;
            best = current.clone();
            trace.push(best_slack);
        }
        let mut rng = seeds.rng(2 * restart as u64 + 1);
        let mut step = INITIAL_STEP;
        let mut failures = 0;
        let budget_end = (evaluations + per_restart).min(config.iterations);
        while evaluations < budget_end && step >= MIN_STEP {
            let (star, r, i, j) = coords[rng.gen_range(0..coords.len())];
            let delta = if rng.gen_bool(0.5) { step } else { -step };
            let mut cand = current.clone();
            let form = if star { &mut cand.h_star } else { &mut cand.h };
            form[r][i][j] += delta;
            form[r][j][i] = form[r][i][j];
            let s = slack(&cand)?;
            evaluations += 1;
            if s < current_slack {
                current = cand;
                current_slack = s;
                failures = 0;
                if s < best_slack {
                    best_slack = s;
                    best = current.clone();
                    trace.push(s);
                }
            } else {
                failures += 1;
                if failures >= 2 * coords.len() {
                    step *= 0.5;
                    failures = 0;
                }
            }
        }
    }
    Ok(SharpnessRecord {
        best,
        min_slack: best_slack,
        trace,
        violation: best_slack < -SLACK_TOLERANCE,
        evaluations,
    })
}
