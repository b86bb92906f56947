//! The generalized Wintgen inequality for Legendrian submanifolds of
//! `ℝ ×_f N(c)`, its proof chain, Lu's commutator inequality and sweeps.

mod sharpness;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::legendrian::{
    means_and_traceless, rho_levicivita, rho_perp_statistical, rho_statistical, shape_operators,
    LegendrianPointInstance,
};
use crate::tensor::{commutator, compensated_sum, frobenius_norm_sq, SquareMatrix};

pub use sharpness::{sharpness_search, SharpnessConfig, SharpnessRecord};
pub use sweep::{
    random_instance, sweep, write_csv, InstanceParams, SweepConfig, SweepRow, SweepSummary,
    CSV_HEADER,
};

/// Slack below which an inequality counts as violated.
pub const SLACK_TOLERANCE: f64 = 1e-9;

/// How Lu's double sum runs over index pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// All ordered pairs `(α, β)`.
    #[default]
    Ordered,
    /// Pairs `α < β` only (half the ordered sum).
    Unordered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LuRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `rhs − lhs`.
    pub gap: f64,
}

/// `Σ ‖[B_α, B_β]‖² ≤ (Σ ‖B_α‖²)²` for symmetric trace-zero matrices.
pub fn lu_inequality(matrices: &[SquareMatrix], pairing: Pairing) -> Result<LuRecord> {
    if let Some(first) = matrices.first() {
        let dim = first.dim();
        for (k, m) in matrices.iter().enumerate() {
            if m.dim() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            if m.asymmetry() > 1e-9 {
                return Err(GeometryError::InvalidArgument(format!(
                    "matrix {k} is not symmetric"
                )));
            }
            if m.trace().abs() > 1e-9 {
                return Err(GeometryError::InvalidArgument(format!(
                    "matrix {k} has trace {}",
                    m.trace()
                )));
            }
        }
    }
    let mut terms = Vec::new();
    for (a, ma) in matrices.iter().enumerate() {
        for (b, mb) in matrices.iter().enumerate() {
            let include = match pairing {
                Pairing::Ordered => true,
                Pairing::Unordered => a < b,
            };
            if include {
                terms.push(frobenius_norm_sq(&commutator(ma, mb)?));
            }
        }
    }
    let lhs = compensated_sum(terms);
    let rhs = compensated_sum(matrices.iter().map(frobenius_norm_sq)).powi(2);
    Ok(LuRecord {
        lhs,
        rhs,
        holds: lhs <= rhs + SLACK_TOLERANCE,
        gap: rhs - lhs,
    })
}

/// `(λ + μ + ν + w)² ≤ 4(λ² + μ² + ν² + w²)`, returned as `(lhs, rhs)`.
pub fn four_term_cauchy_schwarz(l: f64, m: f64, v: f64, w: f64) -> (f64, f64) {
    ((l + m + v + w).powi(2), 4.0 * (l * l + m * m + v * v + w * w))
}

/// The six summands of the theorem's right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhsTerms {
    pub two_rho: f64,
    pub minus_eight_rho_zero: f64,
    /// `(1/4f²)(2f|c| − c + 4f′²)`, or the specialized constant of a corollary.
    pub curvature_constant: f64,
    pub four_h_zero_sq: f64,
    pub h_sq: f64,
    pub h_star_sq: f64,
}

impl RhsTerms {
    pub fn sum(&self) -> f64 {
        compensated_sum([
            self.two_rho,
            self.minus_eight_rho_zero,
            self.curvature_constant,
            self.four_h_zero_sq,
            self.h_sq,
            self.h_star_sq,
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub step: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl ChainStep {
    fn new(step: &'static str, lhs: f64, rhs: f64) -> Self {
        Self {
            step,
            lhs,
            rhs,
            holds: rhs - lhs >= -SLACK_TOLERANCE,
        }
    }
}

/// Quantities that expose where the printed chain loses or gains terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainDiagnostics {
    /// `(1/N)·sqrt(4 Σ (λ² + μ² + ν² + w²))` with `w = −(2c/4f²)(δδ − δδ)`.
    pub cauchy_schwarz_exact: f64,
    /// `|c|/(f²√(2N)) + (4‖τ⁰‖² + ‖τ‖² + ‖τ*‖²)/N`.
    pub lu_bound_exact: f64,
    /// Substitution step minus the Lu step; zero up to rounding.
    pub substitution_minus_lu: f64,
    /// Substitution step minus the theorem bound; equals `7(c/4f² − f′²/f²)`.
    pub substitution_minus_theorem: f64,
    /// The bound obtained by substituting consistently into the exact Lu step.
    pub corrected_rhs: f64,
    pub corrected_slack: f64,
}

/// Report for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WintgenReport {
    pub seed: Option<u64>,
    pub n: usize,
    pub c: f64,
    pub f: f64,
    pub f_prime: f64,
    pub lhs: f64,
    pub rhs_terms: RhsTerms,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub chain: Vec<ChainStep>,
    pub diagnostics: ChainDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<CorollaryVariant>,
}

/// `(1/4f²)(2f|c| − c + 4f′²)`.
pub fn theorem_constant(c: f64, f: f64, f_prime: f64) -> f64 {
    (2.0 * f * c.abs() - c + 4.0 * f_prime * f_prime) / (4.0 * f * f)
}

struct Ingredients {
    rho: f64,
    rho_perp: f64,
    rho_zero: f64,
    h0_sq: f64,
    h_sq: f64,
    hs_sq: f64,
    tau0: f64,
    tau: f64,
    taus: f64,
}

fn ingredients(inst: &LegendrianPointInstance) -> Result<Ingredients> {
    let m = means_and_traceless(inst)?;
    Ok(Ingredients {
        rho: rho_statistical(inst)?,
        rho_perp: rho_perp_statistical(inst)?,
        rho_zero: rho_levicivita(inst)?,
        h0_sq: m.h_zero_mean_sq,
        h_sq: m.h_mean_sq,
        hs_sq: m.h_star_mean_sq,
        tau0: m.tau_zero_sq,
        tau: m.tau_sq,
        taus: m.tau_star_sq,
    })
}

fn terms_for(ing: &Ingredients, constant: f64) -> RhsTerms {
    RhsTerms {
        two_rho: 2.0 * ing.rho,
        minus_eight_rho_zero: -8.0 * ing.rho_zero,
        curvature_constant: constant,
        four_h_zero_sq: 4.0 * ing.h0_sq,
        h_sq: ing.h_sq,
        h_star_sq: ing.hs_sq,
    }
}

fn chain_for(inst: &LegendrianPointInstance, ing: &Ingredients, theorem_rhs: f64) -> Result<(Vec<ChainStep>, ChainDiagnostics)> {
    let n = inst.n;
    let nn = (n * (n - 1)) as f64;
    let (c, f) = (inst.c, inst.f);
    let k = 2.0 * c / (4.0 * f * f);
    let ops = shape_operators(inst)?;
    let lhs = ing.rho_perp;

    // summand decomposition over φ-directions r < s and frame pairs i < j
    let mut sum_lmn = Vec::new();
    let mut sum_w = Vec::new();
    let mut delta_count = 0usize;
    for r in 0..n {
        for s in (r + 1)..n {
            let c0 = commutator(&ops[r].a_zero, &ops[s].a_zero)?;
            let ca = commutator(&ops[r].a, &ops[s].a)?;
            let cs = commutator(&ops[r].a_star, &ops[s].a_star)?;
            for i in 0..n {
                for j in (i + 1)..n {
                    let lambda = 4.0 * c0.pair(i, j);
                    let mu = -ca.pair(i, j);
                    let nu = -cs.pair(i, j);
                    let delta = if (i, j) == (r, s) { 1.0 } else { 0.0 };
                    let w = -k * delta;
                    delta_count += delta as usize;
                    sum_lmn.push(lambda * lambda + mu * mu + nu * nu);
                    sum_w.push(w * w);
                }
            }
        }
    }
    let lmn = compensated_sum(sum_lmn);
    let exact_w = compensated_sum(sum_w);
    let cauchy_schwarz_exact = (4.0 * (lmn + exact_w)).sqrt() / nn;
    let step1 = 2.0 / nn * (lmn + c * c / (4.0 * f * f) * delta_count as f64).sqrt();

    let mut comm = Vec::new();
    for r in 0..n {
        for s in 0..n {
            comm.push(16.0 * frobenius_norm_sq(&commutator(&ops[r].s_zero, &ops[s].s_zero)?));
            comm.push(frobenius_norm_sq(&commutator(&ops[r].s, &ops[s].s)?));
            comm.push(frobenius_norm_sq(&commutator(&ops[r].s_star, &ops[s].s_star)?));
        }
    }
    let step2 = 2.0 / nn * (c * c / (4.0 * f * f) * nn * nn + 0.25 * compensated_sum(comm)).sqrt();

    let tau_part = (4.0 * ing.tau0 + ing.tau + ing.taus) / nn;
    let step3 = c.abs() / (2.0 * f) + tau_part;
    let step4 = compensated_sum([
        c.abs() / (2.0 * f),
        8.0 * ing.tau0 / nn,
        2.0 * ing.rho,
        -2.0 * c / (4.0 * f * f),
        2.0 * inst.warp_ratio().powi(2),
        -4.0 * ing.h0_sq,
        ing.h_sq,
        ing.hs_sq,
    ]);

    let lu_bound_exact = c.abs() / (f * f * (2.0 * nn).sqrt()) + tau_part;
    let corrected_rhs = compensated_sum([
        2.0 * ing.rho,
        -8.0 * ing.rho_zero,
        c.abs() / (f * f * (2.0 * nn).sqrt()),
        6.0 * inst.curvature_constant(),
        4.0 * ing.h0_sq,
        ing.h_sq,
        ing.hs_sq,
    ]);

    let chain = vec![
        ChainStep::new("cauchy_schwarz", lhs, step1),
        ChainStep::new("s_operator_bound", lhs, step2),
        ChainStep::new("lu_bound", lhs, step3),
        ChainStep::new("substitution_bound", lhs, step4),
        ChainStep::new("theorem_bound", lhs, theorem_rhs),
    ];
    let diagnostics = ChainDiagnostics {
        cauchy_schwarz_exact,
        lu_bound_exact,
        substitution_minus_lu: step4 - step3,
        substitution_minus_theorem: step4 - theorem_rhs,
        corrected_rhs,
        corrected_slack: corrected_rhs - lhs,
    };
    Ok((chain, diagnostics))
}

fn assemble(
    inst: &LegendrianPointInstance,
    seed: Option<u64>,
    constant: f64,
    variant: Option<CorollaryVariant>,
) -> Result<WintgenReport> {
    let ing = ingredients(inst)?;
    let rhs_terms = terms_for(&ing, constant);
    let rhs = rhs_terms.sum();
    let slack = rhs - ing.rho_perp;
    let (chain, diagnostics) = chain_for(inst, &ing, rhs)?;
    Ok(WintgenReport {
        seed,
        n: inst.n,
        c: inst.c,
        f: inst.f,
        f_prime: inst.f_prime,
        lhs: ing.rho_perp,
        rhs_terms,
        rhs,
        slack,
        holds: slack >= -SLACK_TOLERANCE,
        chain,
        diagnostics,
        variant,
    })
}

/// Evaluates `ρ⊥ ≤ 2ρ − 8ρ⁰ + (1/4f²)(2f|c| − c + 4f′²) + 4‖H⁰‖² + ‖H‖² + ‖H*‖²`.
pub fn main_inequality(inst: &LegendrianPointInstance, seed: Option<u64>) -> Result<WintgenReport> {
    assemble(inst, seed, theorem_constant(inst.c, inst.f, inst.f_prime), None)
}

/// The five bounds of the proof, each compared against `ρ⊥`.
pub fn inequality_chain(inst: &LegendrianPointInstance) -> Result<Vec<ChainStep>> {
    Ok(main_inequality(inst, None)?.chain)
}

/// Specializations of the theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorollaryVariant {
    /// `ℝ ×_{e^t} ℂⁿ`: `c = 0`, `f′ = f`, constant 1.
    Kenmotsu,
    /// `ℝ × N(c)`: `f = 1`, `f′ = 0`, constant `(2|c| − c)/4`.
    Cosymplectic,
}

impl std::str::FromStr for CorollaryVariant {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kenmotsu" => Ok(Self::Kenmotsu),
            "cosymplectic" => Ok(Self::Cosymplectic),
            other => Err(GeometryError::InvalidArgument(format!("unknown variant {other:?}"))),
        }
    }
}

pub fn corollary_constant(variant: CorollaryVariant, c: f64) -> f64 {
    match variant {
        CorollaryVariant::Kenmotsu => 1.0,
        CorollaryVariant::Cosymplectic => 0.25 * (2.0 * c.abs() - c),
    }
}

/// The corollary form of the theorem; errors when the instance does not
/// match the variant's parameters.
pub fn corollary_reports(inst: &LegendrianPointInstance, variant: CorollaryVariant) -> Result<WintgenReport> {
    let ok = match variant {
        CorollaryVariant::Kenmotsu => inst.c == 0.0 && inst.f_prime == inst.f,
        CorollaryVariant::Cosymplectic => inst.f == 1.0 && inst.f_prime == 0.0,
    };
    if !ok {
        return Err(GeometryError::InvalidArgument(format!(
            "instance (c = {}, f = {}, f′ = {}) does not match the {variant:?} specialization",
            inst.c, inst.f, inst.f_prime
        )));
    }
    assemble(inst, None, corollary_constant(variant, inst.c), Some(variant))
}
