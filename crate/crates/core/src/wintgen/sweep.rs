use std::io::Write;
use std::ops::RangeInclusive;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{main_inequality, SLACK_TOLERANCE};
use crate::error::{GeometryError, Result};
use crate::legendrian::LegendrianPointInstance;
use crate::tensor::SeedSequence;

/// Fixed CSV column order.
pub const CSV_HEADER: &str = "seed,n,c,f,f_prime,lhs,rhs,slack,holds";

/// Parameters of the random instance generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n: usize,
    pub c_range: (f64, f64),
    pub f_range: (f64, f64),
    pub fprime_range: (f64, f64),
    pub magnitude: f64,
    /// Also symmetrize φ-slices in the normal index, `h[r][i][j] = h[i][r][j]`.
    #[serde(default)]
    pub total_symmetry: bool,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            n: 3,
            c_range: (-4.0, 4.0),
            f_range: (0.5, 2.0),
            fprime_range: (-1.0, 1.0),
            magnitude: 1.0,
            total_symmetry: false,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<RangeInclusive<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(GeometryError::InvalidArgument(format!(
            "{name} range [{lo}, {hi}] is empty or non-finite"
        )));
    }
    Ok(lo..=hi)
}

impl InstanceParams {
    pub fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(GeometryError::InvalidArgument(format!("n = {} < 2", self.n)));
        }
        check_range("c", self.c_range)?;
        check_range("f", self.f_range)?;
        check_range("f_prime", self.fprime_range)?;
        if self.f_range.0 <= 0.0 {
            return Err(GeometryError::InvalidArgument("f range must be positive".into()));
        }
        if !(self.magnitude.is_finite() && self.magnitude >= 0.0) {
            return Err(GeometryError::InvalidArgument(format!(
                "magnitude {} must be finite and non-negative",
                self.magnitude
            )));
        }
        Ok(())
    }
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Draws a validated instance; the ξ-slices are set to `−(f′/f)δ` exactly.
pub fn random_instance(params: &InstanceParams, seed: u64) -> Result<LegendrianPointInstance> {
    params.check()?;
    let n = params.n;
    let mut rng = SeedSequence::new(seed).rng(0);
    let c = uniform(&mut rng, params.c_range);
    let f = uniform(&mut rng, params.f_range);
    let f_prime = uniform(&mut rng, params.fprime_range);
    let mut inst = LegendrianPointInstance::umbilic(n, c, f, f_prime);
    let m = params.magnitude;
    for form in [&mut inst.h, &mut inst.h_star] {
        for r in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = uniform(&mut rng, (-m, m));
                    form[r][i][j] = v;
                    form[r][j][i] = v;
                }
            }
        }
        if params.total_symmetry {
            // overwrite with the value at the sorted index triple
            for r in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut idx = [r, i, j];
                        idx.sort_unstable();
                        form[r][i][j] = form[idx[0]][idx[1]][idx[2]];
                    }
                }
            }
        }
    }
    inst.check()?;
    Ok(inst)
}

/// A seeded batch of instances; instance `k` has dimension
/// `n_values[k % len]` and seed `SeedSequence::new(base_seed).derive(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base_seed: u64,
    pub count: usize,
    pub n_values: Vec<usize>,
    pub params: InstanceParams,
}

impl SweepConfig {
    pub fn instance_seed(&self, k: usize) -> u64 {
        SeedSequence::new(self.base_seed).derive(k as u64)
    }

    pub fn instance(&self, k: usize) -> Result<LegendrianPointInstance> {
        if self.n_values.is_empty() {
            return Err(GeometryError::InvalidArgument("no dimensions to sweep".into()));
        }
        let params = InstanceParams {
            n: self.n_values[k % self.n_values.len()],
            ..self.params.clone()
        };
        random_instance(&params, self.instance_seed(k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub n: usize,
    pub c: f64,
    pub f: f64,
    pub f_prime: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// Verdicts of the five chain steps.
    #[serde(skip)]
    pub chain_holds: [bool; 5],
    #[serde(skip)]
    pub corrected_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub count: usize,
    pub violations: usize,
    pub min_slack: f64,
    /// Instances on which each chain step fails.
    pub chain_failures: [usize; 5],
    /// Instances violating the consistently substituted bound.
    pub corrected_violations: usize,
    pub min_corrected_slack: f64,
}

impl SweepSummary {
    pub fn from_rows(rows: &[SweepRow]) -> Self {
        let mut chain_failures = [0; 5];
        for row in rows {
            for (k, ok) in row.chain_holds.iter().enumerate() {
                chain_failures[k] += usize::from(!ok);
            }
        }
        Self {
            count: rows.len(),
            violations: rows.iter().filter(|r| !r.holds).count(),
            min_slack: rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
            chain_failures,
            corrected_violations: rows
                .iter()
                .filter(|r| r.corrected_slack < -SLACK_TOLERANCE)
                .count(),
            min_corrected_slack: rows.iter().map(|r| r.corrected_slack).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Evaluates every instance in parallel; rows come back in instance order.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.params.check()?;
    (0..config.count)
        .into_par_iter()
        .map(|k| {
            let inst = config.instance(k)?;
            let report = main_inequality(&inst, Some(config.instance_seed(k)))?;
            let mut chain_holds = [false; 5];
            for (slot, step) in chain_holds.iter_mut().zip(&report.chain) {
                *slot = step.holds;
            }
            Ok(SweepRow {
                seed: config.instance_seed(k),
                n: inst.n,
                c: inst.c,
                f: inst.f,
                f_prime: inst.f_prime,
                lhs: report.lhs,
                rhs: report.rhs,
                slack: report.slack,
                holds: report.holds,
                chain_holds,
                corrected_slack: report.diagnostics.corrected_slack,
            })
        })
        .collect()
}

/// Writes rows as CSV with 17 significant digits per float.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.seed, r.n, r.c, r.f, r.f_prime, r.lhs, r.rhs, r.slack, r.holds
        )?;
    }
    Ok(())
}
