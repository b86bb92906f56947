use nalgebra::DMatrix;
use ndarray::Array3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_warped_chart, WarpedProductSpec};
use crate::error::{GeometryError, Result};
use crate::linalg::{apply, basis, inner, matrix_max_abs_diff};
use crate::residuals::ResidualRecord;
use crate::statistical::{check_almost_hermitian, difference_tensor};
use crate::tensor::central_difference_vec;

/// Tolerance for the almost contact metric identities.
pub const FRAME_TOLERANCE: f64 = 1e-9;
/// Tolerance for exterior-derivative identities (finite differences involved).
pub const FORM_TOLERANCE: f64 = 1e-8;

/// Almost contact metric data `(φ, ξ, η, Φ)` at a point of the total chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactFrame {
    pub phi: DMatrix<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub metric: DMatrix<f64>,
    /// `Φ_{ij} = ⟨φ∂i, ∂j⟩`.
    pub fundamental_form: DMatrix<f64>,
}

impl ContactFrame {
    /// Builds the frame and rejects it when any invariant exceeds [`FRAME_TOLERANCE`].
    pub fn at(spec: &WarpedProductSpec, point: &[f64]) -> Result<Self> {
        let frame = Self::unchecked(spec, point)?;
        let rec = frame.invariant_residuals();
        if let Some((name, v)) = rec.breaches(FRAME_TOLERANCE).first() {
            return Err(GeometryError::FrameViolation(format!("{name} = {v:e}")));
        }
        Ok(frame)
    }

    pub fn unchecked(spec: &WarpedProductSpec, point: &[f64]) -> Result<Self> {
        let m = spec.total_dim();
        if point.len() != m {
            return Err(GeometryError::DimensionMismatch {
                expected: m,
                found: point.len(),
            });
        }
        let metric = total_metric(spec, point)?;
        let phi = spec.phi(point);
        let fundamental_form = phi.transpose() * &metric;
        Ok(Self {
            phi,
            xi: basis(m, 0),
            eta: basis(m, 0),
            metric,
            fundamental_form,
        })
    }

    /// Residuals of `φξ = 0`, `η∘φ = 0`, `φ² = −Id + η⊗ξ`,
    /// `⟨φX, φY⟩ = ⟨X, Y⟩ − η(X)η(Y)` and `|ξ| = 1`.
    pub fn invariant_residuals(&self) -> ResidualRecord {
        let m = self.phi.nrows();
        let mut rec = ResidualRecord::new();
        let phi_xi = apply(&self.phi, &self.xi);
        rec.push("phi_xi", phi_xi.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        let eta = DMatrix::from_row_slice(1, m, &self.eta);
        let eta_phi = &eta * &self.phi;
        rec.push("eta_phi", eta_phi.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        let xi = DMatrix::from_column_slice(m, 1, &self.xi);
        let target = -DMatrix::identity(m, m) + &xi * &eta;
        rec.push("phi_squared", matrix_max_abs_diff(&(&self.phi * &self.phi), &target));
        let lhs = self.phi.transpose() * &self.metric * &self.phi;
        let rhs = &self.metric - eta.transpose() * &eta;
        rec.push("phi_metric", matrix_max_abs_diff(&lhs, &rhs));
        rec.push("xi_unit", inner(&self.metric, &self.xi, &self.xi) - 1.0);
        rec
    }
}

pub(crate) fn total_metric(spec: &WarpedProductSpec, point: &[f64]) -> Result<DMatrix<f64>> {
    let m = spec.total_dim();
    let f = spec.warp.value(point[0]);
    let gn = spec.fiber.metric(&point[1..])?;
    let mut g = DMatrix::zeros(m, m);
    g[(0, 0)] = 1.0;
    g.view_mut((1, 1), (m - 1, m - 1)).copy_from(&(gn * (f * f)));
    Ok(g)
}

/// Coordinate exterior derivative of a 2-form field:
/// `dω_{abc} = ∂_a ω_{bc} − ∂_b ω_{ac} + ∂_c ω_{ab}`.
pub fn exterior_derivative_2form(
    form: impl Fn(&[f64]) -> DMatrix<f64>,
    point: &[f64],
    step: f64,
) -> Result<Array3<f64>> {
    let n = point.len();
    let mut partial = Vec::with_capacity(n);
    for a in 0..n {
        let d = central_difference_vec(|p| form(p).iter().copied().collect(), point, a, step)?;
        // column-major storage
        partial.push(DMatrix::from_column_slice(n, n, &d));
    }
    Ok(Array3::from_shape_fn((n, n, n), |(a, b, c)| {
        partial[a][(b, c)] - partial[b][(a, c)] + partial[c][(a, b)]
    }))
}

/// `(η ∧ ω)_{abc} = η_a ω_{bc} − η_b ω_{ac} + η_c ω_{ab}`.
pub fn wedge_1_2(eta: &[f64], omega: &DMatrix<f64>) -> Array3<f64> {
    let n = eta.len();
    Array3::from_shape_fn((n, n, n), |(a, b, c)| {
        eta[a] * omega[(b, c)] - eta[b] * omega[(a, c)] + eta[c] * omega[(a, b)]
    })
}

fn array_max_abs(a: &Array3<f64>) -> f64 {
    a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Classification of the induced almost contact metric structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureTag {
    AlmostCosymplectic,
    AlmostAlphaKenmotsu,
    Unclassified,
}

impl std::fmt::Display for StructureTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::AlmostCosymplectic => "almost cosymplectic",
            Self::AlmostAlphaKenmotsu => "almost α-Kenmotsu",
            Self::Unclassified => "unclassified",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactClassification {
    /// `α` with `dΦ = f² dΩ + 2α η∧Φ`; equals `f′/f`.
    pub alpha: f64,
    /// The coefficient as it is usually printed, `−f′/f`.
    pub alpha_printed: f64,
    pub d_eta_residual: f64,
    /// `max |dΦ − (f² dΩ + 2α η∧Φ)|`.
    pub d_phi_residual: f64,
    /// Same residual with `α_printed` in place of `α`.
    pub d_phi_residual_printed: f64,
    /// `max |dΦ − 2α η∧Φ|`.
    pub kenmotsu_residual: f64,
    pub d_phi_max: f64,
    pub d_omega_max: f64,
    pub structure_tag: StructureTag,
}

/// Fiber fundamental form `Ω_{ij} = g(J∂i, ∂j)` evaluated on fiber coordinates.
pub(crate) fn fiber_omega(spec: &WarpedProductSpec, x: &[f64]) -> DMatrix<f64> {
    match spec.fiber.metric(x) {
        Ok(g) => (spec.j)(x).transpose() * g,
        Err(_) => DMatrix::from_element(x.len(), x.len(), f64::NAN),
    }
}

/// Computes `α`, `dη`, `dΦ` and the identity `dΦ = f² dΩ + 2α η∧Φ` at `point`.
pub fn contact_classification(
    spec: &WarpedProductSpec,
    point: &[f64],
) -> Result<ContactClassification> {
    let frame = ContactFrame::at(spec, point)?;
    let m = spec.total_dim();
    let step = spec.fiber.fd_step();
    let (f, f1, _) = spec.warp_at(point[0]);
    let alpha = f1 / f;

    let d_phi = exterior_derivative_2form(
        |p| match ContactFrame::unchecked(spec, p) {
            Ok(fr) => fr.fundamental_form,
            Err(_) => DMatrix::from_element(m, m, f64::NAN),
        },
        point,
        step,
    )?;
    let d_omega_fiber = exterior_derivative_2form(|x| fiber_omega(spec, x), &point[1..], step)?;
    let mut d_omega = Array3::zeros((m, m, m));
    for ((a, b, c), v) in d_omega_fiber.indexed_iter() {
        d_omega[[a + 1, b + 1, c + 1]] = *v;
    }
    // dη for the constant one-form dt
    let d_eta = exterior_derivative_1form(|_| frame.eta.clone(), point, step)?;
    let d_eta_residual = d_eta.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let eta_phi = wedge_1_2(&frame.eta, &frame.fundamental_form);
    let resid = |coef: f64| array_max_abs(&(&d_phi - &(&d_omega * (f * f)) - &(&eta_phi * (2.0 * coef))));
    let kenmotsu_residual = array_max_abs(&(&d_phi - &(&eta_phi * (2.0 * alpha))));
    let d_phi_max = array_max_abs(&d_phi);

    let structure_tag = if d_eta_residual <= FORM_TOLERANCE && d_phi_max <= FORM_TOLERANCE {
        StructureTag::AlmostCosymplectic
    } else if d_eta_residual <= FORM_TOLERANCE
        && kenmotsu_residual <= FORM_TOLERANCE
        && alpha != 0.0
    {
        StructureTag::AlmostAlphaKenmotsu
    } else {
        StructureTag::Unclassified
    };

    Ok(ContactClassification {
        alpha,
        alpha_printed: -alpha,
        d_eta_residual,
        d_phi_residual: resid(alpha),
        d_phi_residual_printed: resid(-alpha),
        kenmotsu_residual,
        d_phi_max,
        d_omega_max: array_max_abs(&d_omega_fiber),
        structure_tag,
    })
}

fn exterior_derivative_1form(
    form: impl Fn(&[f64]) -> Vec<f64>,
    point: &[f64],
    step: f64,
) -> Result<DMatrix<f64>> {
    let n = point.len();
    let mut partial = Vec::with_capacity(n);
    for a in 0..n {
        partial.push(central_difference_vec(&form, point, a, step)?);
    }
    Ok(DMatrix::from_fn(n, n, |a, b| partial[a][b] - partial[b][a]))
}

/// Both sides of "the warped product is almost α-Kenmotsu iff the fiber is
/// almost Kaehler", evaluated on sampled points, plus the difference-tensor
/// properties `𝒦̃_X Y = 𝒦_X Y`, `𝒦̃_X ξ = 𝒦̃_ξ X = 0`, `𝒦̃_ξ ξ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KenmotsuCheck {
    pub fiber_almost_kaehler: bool,
    pub total_almost_kenmotsu: bool,
    pub consistent: bool,
    pub samples: usize,
    pub max_d_omega: f64,
    pub max_kenmotsu_residual: f64,
    pub k_tilde: ResidualRecord,
    /// Reasons a side failed, e.g. a frame violation.
    pub notes: Vec<String>,
}

/// Samples used by [`kenmotsu_theorem_check`].
pub const KENMOTSU_SAMPLES: usize = 16;

pub fn kenmotsu_theorem_check(spec: &WarpedProductSpec) -> Result<KenmotsuCheck> {
    let chart = build_warped_chart(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b65_6e6d);
    let mut fiber_ok = true;
    let mut total_ok = true;
    let mut max_d_omega = 0.0f64;
    let mut max_kenmotsu = 0.0f64;
    let mut notes = Vec::new();
    let mut k_tilde = ResidualRecord::new();
    let m = spec.total_dim();
    let step = spec.fiber.fd_step();

    for _ in 0..KENMOTSU_SAMPLES {
        let p = spec.sample_point(&mut rng);
        let x = &p[1..];

        match check_almost_hermitian(&spec.fiber.metric(x)?, &(spec.j)(x), FRAME_TOLERANCE) {
            Ok(()) => {
                let d = exterior_derivative_2form(|y| fiber_omega(spec, y), x, step)?;
                let v = array_max_abs(&d);
                max_d_omega = max_d_omega.max(v);
                if v > FORM_TOLERANCE {
                    fiber_ok = false;
                }
            }
            Err(e) => {
                fiber_ok = false;
                push_note(&mut notes, format!("fiber: {e}"));
            }
        }

        match contact_classification(spec, &p) {
            Ok(cls) => {
                max_kenmotsu = max_kenmotsu.max(cls.kenmotsu_residual);
                if cls.kenmotsu_residual > FORM_TOLERANCE || cls.d_eta_residual > FORM_TOLERANCE {
                    total_ok = false;
                }
            }
            Err(e) => {
                total_ok = false;
                push_note(&mut notes, format!("total: {e}"));
            }
        }

        let kt = difference_tensor(&chart, &p)?;
        let kf = difference_tensor(&spec.fiber, x)?;
        let (mut xy, mut x_xi, mut xi_x, mut xi_xi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for k in 0..m {
            xi_xi = xi_xi.max(kt.get(k, 0, 0).abs());
            for a in 1..m {
                x_xi = x_xi.max(kt.get(k, a, 0).abs());
                xi_x = xi_x.max(kt.get(k, 0, a).abs());
                for b in 1..m {
                    let expect = if k == 0 { 0.0 } else { kf.get(k - 1, a - 1, b - 1) };
                    xy = xy.max((kt.get(k, a, b) - expect).abs());
                }
            }
        }
        k_tilde.push("k_x_y", xy);
        k_tilde.push("k_x_xi", x_xi);
        k_tilde.push("k_xi_x", xi_x);
        k_tilde.push("k_xi_xi", xi_xi);
    }

    Ok(KenmotsuCheck {
        fiber_almost_kaehler: fiber_ok,
        total_almost_kenmotsu: total_ok,
        consistent: fiber_ok == total_ok,
        samples: KENMOTSU_SAMPLES,
        max_d_omega,
        max_kenmotsu_residual: max_kenmotsu,
        k_tilde,
        notes,
    })
}

fn push_note(notes: &mut Vec<String>, note: String) {
    if !notes.contains(&note) {
        notes.push(note);
    }
}
