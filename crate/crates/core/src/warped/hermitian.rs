use nalgebra::DMatrix;

use super::contact::exterior_derivative_2form;
use super::WarpedProductSpec;
use crate::error::{GeometryError, Result};
use crate::linalg::{apply, inner, matrix_max_abs_diff, max_abs};
use crate::residuals::ResidualRecord;
use crate::statistical::{
    levi_civita, Christoffel, ConnectionKind, DualisticChart, PointFn, Probes,
};
use crate::tensor::central_difference_vec;

/// Where the identities are evaluated.
#[derive(Clone, Copy)]
pub enum ResidualTarget<'a> {
    /// An almost Hermitian statistical chart with its `J`.
    Fiber {
        chart: &'a DualisticChart,
        j: &'a PointFn<DMatrix<f64>>,
    },
    /// The total chart of a warped product, with `φ` induced from the fiber `J`.
    Total {
        spec: &'a WarpedProductSpec,
        chart: &'a DualisticChart,
    },
}

/// A (1,1) field together with everything needed to differentiate it at one point.
struct FieldContext {
    g: DMatrix<f64>,
    gamma: Christoffel,
    gamma_star: Christoffel,
    lc: Christoffel,
    k: Christoffel,
    field: DMatrix<f64>,
    /// `∂_a S` for each coordinate `a`.
    d_field: Vec<DMatrix<f64>>,
    /// `∂_a (Sᵀ g)`, i.e. derivatives of `Ω_{bc} = g(S∂b, ∂c)`.
    d_form: Vec<DMatrix<f64>>,
}

impl FieldContext {
    fn new(
        chart: &DualisticChart,
        field: &(dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync),
        point: &[f64],
    ) -> Result<Self> {
        let n = chart.dim();
        let g = chart.metric(point)?;
        let gamma = chart.connection(ConnectionKind::Nabla, point)?;
        let gamma_star = chart.connection(ConnectionKind::NablaStar, point)?;
        let lc = levi_civita(chart, point)?;
        let k = gamma.combine(&lc, 1.0, -1.0);
        let s = field(point);
        if s.nrows() != n || s.ncols() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                found: s.nrows(),
            });
        }
        let step = chart.fd_step();
        let mut d_field = Vec::with_capacity(n);
        let mut d_form = Vec::with_capacity(n);
        for a in 0..n {
            let ds = central_difference_vec(|p| field(p).iter().copied().collect(), point, a, step)?;
            d_field.push(DMatrix::from_column_slice(n, n, &ds));
            let dw = central_difference_vec(
                |p| match chart.metric(p) {
                    Ok(gp) => (field(p).transpose() * gp).iter().copied().collect(),
                    Err(_) => vec![f64::NAN; n * n],
                },
                point,
                a,
                step,
            )?;
            d_form.push(DMatrix::from_column_slice(n, n, &dw));
        }
        Ok(Self {
            g,
            gamma,
            gamma_star,
            lc,
            k,
            field: s,
            d_field,
            d_form,
        })
    }

    fn directional(ds: &[DMatrix<f64>], x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut out = DMatrix::zeros(n, n);
        for (a, d) in ds.iter().enumerate() {
            out += d * x[a];
        }
        out
    }

    /// `(∇_X S) Y`.
    fn nabla_field(&self, gamma: &Christoffel, x: &[f64], y: &[f64]) -> Vec<f64> {
        let xs = Self::directional(&self.d_field, x);
        let sy = apply(&self.field, y);
        let term = gamma.apply(x, &sy);
        let back = apply(&self.field, &gamma.apply(x, y));
        apply(&xs, y)
            .iter()
            .zip(term)
            .zip(back)
            .map(|((a, b), c)| a + b - c)
            .collect()
    }

    /// `Ω(Y, Z) = g(SY, Z)`.
    fn form(&self, y: &[f64], z: &[f64]) -> f64 {
        inner(&self.g, &apply(&self.field, y), z)
    }

    /// `(∇_X Ω)(Y, Z)`.
    fn nabla_form(&self, gamma: &Christoffel, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        let xw = Self::directional(&self.d_form, x);
        let mut directional = 0.0;
        for b in 0..y.len() {
            for c in 0..z.len() {
                directional += xw[(b, c)] * y[b] * z[c];
            }
        }
        directional - self.form(&gamma.apply(x, y), z) - self.form(y, &gamma.apply(x, z))
    }

    /// `g(𝒦_X ψY + ψ 𝒦_X Y, Z)`.
    fn mixed(&self, psi: &DMatrix<f64>, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        let a = self.k.apply(x, &apply(psi, y));
        let b = apply(psi, &self.k.apply(x, y));
        let v: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        inner(&self.g, &v, z)
    }

    fn cyclic(&self, psi: &DMatrix<f64>, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        self.mixed(psi, x, y, z) + self.mixed(psi, z, x, y) + self.mixed(psi, y, z, x)
    }
}

fn check_skew(g: &DMatrix<f64>, psi: &DMatrix<f64>) -> Result<()> {
    let defect = matrix_max_abs_diff(&(psi.transpose() * g), &-(g * psi));
    if defect > 1e-9 {
        return Err(GeometryError::InvalidArgument(format!(
            "ψ is not skew-adjoint (defect {defect:e})"
        )));
    }
    Ok(())
}

/// Residuals of the almost Hermitian / almost contact statistical identities.
///
/// Fiber target: `fu_parallel`, `aziz4`, `aziz5`, `aziz5a`, `aziz5b`, `cyclic`.
/// Total target: `bb1`, `bb2`, `cyclic`, `contact4`, `contact5`, `contact5_nabla`.
/// `psi` defaults to `J` (fiber) or `φ` (total) for the cyclic identity.
/// The fundamental form is `Ω(X, Y) = g(JX, Y)`.
pub fn hermitian_statistical_residuals(
    target: ResidualTarget<'_>,
    point: &[f64],
    probes: &Probes,
    psi: Option<&PointFn<DMatrix<f64>>>,
) -> Result<ResidualRecord> {
    let (chart, field): (&DualisticChart, PointFn<DMatrix<f64>>) = match target {
        ResidualTarget::Fiber { chart, j } => (chart, j.clone()),
        ResidualTarget::Total { spec, chart } => {
            let spec = spec.clone();
            (chart, std::sync::Arc::new(move |p: &[f64]| spec.phi(p)))
        }
    };
    let n = chart.dim();
    for v in [&probes.x, &probes.y, &probes.z] {
        if v.len() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let ctx = FieldContext::new(chart, field.as_ref(), point)?;
    let psi_m = match psi {
        Some(p) => p(point),
        None => ctx.field.clone(),
    };
    if psi_m.nrows() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            found: psi_m.nrows(),
        });
    }
    check_skew(&ctx.g, &psi_m)?;
    let (x, y, z) = (&probes.x, &probes.y, &probes.z);
    let mut rec = ResidualRecord::new();

    let nabla_omega = ctx.nabla_form(&ctx.gamma, x, y, z);
    let star_omega = ctx.nabla_form(&ctx.gamma_star, x, y, z);
    let lc_omega = ctx.nabla_form(&ctx.lc, x, y, z);
    let kjy = inner(&ctx.g, &ctx.k.apply(x, &apply(&ctx.field, y)), z);
    let mixed = ctx.mixed(&ctx.field, x, y, z);

    match target {
        ResidualTarget::Fiber { .. } => {
            rec.push("fu_parallel", nabla_omega);
            let dj = inner(&ctx.g, &ctx.nabla_field(&ctx.gamma, x, y), z);
            rec.push("aziz4", nabla_omega - dj + 2.0 * kjy);
            let dj_star = inner(&ctx.g, &ctx.nabla_field(&ctx.gamma_star, x, y), z);
            rec.push("aziz5", star_omega - dj_star - 2.0 * kjy);
            rec.push("aziz5a", nabla_omega - lc_omega + mixed);
            rec.push("aziz5b", star_omega - lc_omega - mixed);
            rec.push("cyclic", ctx.cyclic(&psi_m, x, y, z));
        }
        ResidualTarget::Total { spec, .. } => {
            rec.push("bb1", nabla_omega - lc_omega + mixed);
            rec.push("bb2", star_omega - lc_omega - mixed);
            rec.push("cyclic", ctx.cyclic(&psi_m, x, y, z));
            rec.push("contact4", contact4_residual(spec, &ctx, point, x, y)?);

            let d_phi = exterior_derivative_2form(|p| spec.phi(p).transpose() * total_g(chart, p), point, chart.fd_step())?;
            let mut d = 0.0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        d += d_phi[[a, b, c]] * x[a] * y[b] * z[c];
                    }
                }
            }
            let cyc = |gamma: &Christoffel| {
                ctx.nabla_form(gamma, x, y, z) + ctx.nabla_form(gamma, z, x, y) + ctx.nabla_form(gamma, y, z, x)
            };
            rec.push("contact5", d - cyc(&ctx.lc));
            rec.push("contact5_nabla", d - cyc(&ctx.gamma));
        }
    }
    Ok(rec)
}

fn total_g(chart: &DualisticChart, p: &[f64]) -> DMatrix<f64> {
    chart
        .metric(p)
        .unwrap_or_else(|_| DMatrix::from_element(p.len(), p.len(), f64::NAN))
}

/// `|(∇̃_X̃ φ)Ỹ − (∇_X J)Y + (f′/f)⟨X̃, φỸ⟩ξ + (f′/f)η(Ỹ)φX̃|`.
fn contact4_residual(
    spec: &WarpedProductSpec,
    ctx: &FieldContext,
    point: &[f64],
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let fiber_ctx = FieldContext::new(&spec.fiber, spec.j.as_ref(), &point[1..])?;
    let fiber_term = fiber_ctx.nabla_field(&fiber_ctx.gamma, &x[1..], &y[1..]);
    let (f, f1, _) = spec.warp_at(point[0]);
    let ratio = f1 / f;
    let total = ctx.nabla_field(&ctx.gamma, x, y);
    let phi_x = apply(&ctx.field, x);
    let x_phi_y = inner(&ctx.g, x, &apply(&ctx.field, y));
    let mut resid = total;
    for i in 1..resid.len() {
        resid[i] -= fiber_term[i - 1];
    }
    resid[0] += ratio * x_phi_y;
    for (r, p) in resid.iter_mut().zip(&phi_x) {
        *r += ratio * y[0] * p;
    }
    Ok(max_abs(&resid))
}
