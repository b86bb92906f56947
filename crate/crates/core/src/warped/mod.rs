//! Statistical warped products `ℝ ×_f N` over an almost Hermitian statistical fiber.
//!
//! The total chart uses coordinates `(t, x¹, …, x^{2n})` with `t` at index 0,
//! so `ξ = ∂₀` and `η = dx⁰`.

mod contact;
mod hermitian;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::{Array3, Array4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::linalg::{apply, inner};
use crate::statistical::{
    axiom_residuals, builtin_r2_example, check_almost_hermitian, curvature,
    standard_complex_structure, Christoffel, ConnectionKind, CurvatureTensor, DerivativeMode,
    DualisticChart, PointFn, Probes,
};

pub use contact::{
    contact_classification, kenmotsu_theorem_check, ContactClassification, ContactFrame,
    KenmotsuCheck, StructureTag,
};
pub use hermitian::{hermitian_statistical_residuals, ResidualTarget};

/// Tolerance for fiber axiom checks during chart construction.
pub const FIBER_AXIOM_TOLERANCE: f64 = 1e-6;

/// Warping function `f(t)` with analytic first and second derivatives.
#[derive(Clone)]
pub struct WarpingFunction {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    f1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    f2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for WarpingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WarpingFunction({})", self.name)
    }
}

impl WarpingFunction {
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_double_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            f1: Arc::new(f_prime),
            f2: Arc::new(f_double_prime),
        }
    }

    /// `f = e^t`.
    pub fn exp() -> Self {
        Self::custom("exp", f64::exp, f64::exp, f64::exp)
    }

    pub fn constant(value: f64) -> Self {
        Self::custom(format!("const({value})"), move |_| value, |_| 0.0, |_| 0.0)
    }

    pub fn cosh() -> Self {
        Self::custom("cosh", f64::cosh, f64::sinh, f64::cosh)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn first(&self, t: f64) -> f64 {
        (self.f1)(t)
    }

    pub fn second(&self, t: f64) -> f64 {
        (self.f2)(t)
    }
}

/// A statistical warped product `ℝ ×_f N` with an almost complex field on `N`.
#[derive(Clone)]
pub struct WarpedProductSpec {
    pub fiber: DualisticChart,
    pub j: PointFn<DMatrix<f64>>,
    pub warp: WarpingFunction,
    /// Constant holomorphic sectional curvature when the fiber is a statistical space form.
    pub space_form_c: Option<f64>,
    pub t_range: (f64, f64),
}

impl fmt::Debug for WarpedProductSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpedProductSpec")
            .field("fiber", &self.fiber)
            .field("warp", &self.warp)
            .field("space_form_c", &self.space_form_c)
            .field("t_range", &self.t_range)
            .finish()
    }
}

impl WarpedProductSpec {
    pub fn new(
        fiber: DualisticChart,
        j: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        warp: WarpingFunction,
    ) -> Self {
        Self {
            fiber,
            j: Arc::new(j),
            warp,
            space_form_c: None,
            t_range: (-0.5, 0.5),
        }
    }

    /// Fiber with the standard `J` on `ℝ^{2n}`.
    pub fn with_standard_j(fiber: DualisticChart, warp: WarpingFunction) -> Self {
        let j = standard_complex_structure(fiber.dim());
        Self::new(fiber, move |_| j.clone(), warp)
    }

    pub fn with_space_form(mut self, c: f64) -> Self {
        self.space_form_c = Some(c);
        self
    }

    pub fn with_t_range(mut self, lo: f64, hi: f64) -> Self {
        self.t_range = (lo, hi);
        self
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    pub fn total_dim(&self) -> usize {
        self.fiber.dim() + 1
    }

    /// Checks `f > 0` and the almost Hermitian conditions at `samples` points.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        if self.fiber.dim() % 2 != 0 {
            return Err(GeometryError::InvalidArgument(format!(
                "fiber dimension {} is odd",
                self.fiber.dim()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples.max(1) {
            let p = self.sample_point(&mut rng);
            let f = self.warp.value(p[0]);
            if !(f > 0.0 && f.is_finite()) {
                return Err(GeometryError::InvalidArgument(format!(
                    "warping function {} is not positive at t = {}",
                    self.warp.name, p[0]
                )));
            }
            let x = &p[1..];
            check_almost_hermitian(&self.fiber.metric(x)?, &(self.j)(x), 1e-9)?;
        }
        Ok(())
    }

    /// Uniform sample from the t-range times the fiber's sample box.
    pub fn sample_point<R: rand::Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut p = vec![rng.gen_range(self.t_range.0..=self.t_range.1)];
        p.extend(self.fiber.sample_point(rng));
        p
    }

    /// `f, f′, f″` at `t`.
    pub fn warp_at(&self, t: f64) -> (f64, f64, f64) {
        (self.warp.value(t), self.warp.first(t), self.warp.second(t))
    }

    /// `φ` on the total chart: `φ∂t = 0`, `φ` restricted to fiber directions is `J`.
    pub fn phi(&self, point: &[f64]) -> DMatrix<f64> {
        let n = self.fiber.dim();
        let j = (self.j)(&point[1..]);
        let mut phi = DMatrix::zeros(n + 1, n + 1);
        phi.view_mut((1, 1), (n, n)).copy_from(&j);
        phi
    }
}

fn check_fiber_axioms(fiber: &DualisticChart) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        let p = fiber.sample_point(&mut rng);
        let probes = Probes::random(fiber.dim(), &mut rng);
        let rec = axiom_residuals(fiber, &p, &probes, DerivativeMode::Auto)?;
        let breaches = rec.breaches(FIBER_AXIOM_TOLERANCE);
        if !breaches.is_empty() {
            let list = breaches
                .iter()
                .map(|(n, v)| format!("{n} = {v:e}"))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(GeometryError::FiberAxiomViolation(format!(
                "{} at {:?}: {list}",
                fiber.name(),
                p
            )));
        }
    }
    Ok(())
}

fn warped_gamma(spec: &WarpedProductSpec, kind: ConnectionKind, p: &[f64]) -> Christoffel {
    let n = spec.fiber_dim();
    let (f, f1, _) = spec.warp_at(p[0]);
    let x = &p[1..];
    let (Ok(gn), Ok(fg)) = (spec.fiber.metric(x), spec.fiber.connection(kind, x)) else {
        return Christoffel::from_fn(n + 1, |_, _, _| f64::NAN);
    };
    let mut g = Christoffel::zeros(n + 1);
    for a in 0..n {
        g.set(a + 1, 0, a + 1, f1 / f);
        g.set(a + 1, a + 1, 0, f1 / f);
        for b in 0..n {
            g.set(0, a + 1, b + 1, -f * f1 * gn[(a, b)]);
            for c in 0..n {
                g.set(c + 1, a + 1, b + 1, fg.get(c, a, b));
            }
        }
    }
    g
}

fn warped_gamma_derivative(
    spec: &WarpedProductSpec,
    kind: ConnectionKind,
    p: &[f64],
) -> Array4<f64> {
    let n = spec.fiber_dim();
    let m = n + 1;
    let (f, f1, f2) = spec.warp_at(p[0]);
    let x = &p[1..];
    let parts = (|| -> Result<_> {
        Ok((
            spec.fiber.metric(x)?,
            spec.fiber.metric_derivative(x, DerivativeMode::Auto)?,
            spec.fiber.connection_derivative(kind, x, DerivativeMode::Auto)?,
        ))
    })();
    let Ok((gn, dgn, dfg)) = parts else {
        return Array4::from_elem((m, m, m, m), f64::NAN);
    };
    let mut d = Array4::zeros((m, m, m, m));
    let radial = f2 / f - (f1 / f).powi(2);
    for a in 0..n {
        d[[0, a + 1, 0, a + 1]] = radial;
        d[[0, a + 1, a + 1, 0]] = radial;
        for b in 0..n {
            d[[0, 0, a + 1, b + 1]] = -(f1 * f1 + f * f2) * gn[(a, b)];
        }
    }
    for e in 0..n {
        for a in 0..n {
            for b in 0..n {
                d[[e + 1, 0, a + 1, b + 1]] = -f * f1 * dgn[[e, a, b]];
                for c in 0..n {
                    d[[e + 1, c + 1, a + 1, b + 1]] = dfg[[e, c, a, b]];
                }
            }
        }
    }
    d
}

/// Total chart of `ℝ ×_f N` with metric `dt² + f² g_N` and the lifted
/// connections `∇̄`, `∇̄*`. Derivatives are analytic in `t`; fiber
/// derivatives come from the fiber chart.
pub fn build_warped_chart(spec: &WarpedProductSpec) -> Result<DualisticChart> {
    check_fiber_axioms(&spec.fiber)?;
    let n = spec.fiber_dim();
    let m = n + 1;
    let name = format!("{}x_{}", spec.fiber.name(), spec.warp.name());

    let s = spec.clone();
    let metric = move |p: &[f64]| {
        let f = s.warp.value(p[0]);
        let mut g = DMatrix::zeros(m, m);
        g[(0, 0)] = 1.0;
        match s.fiber.metric(&p[1..]) {
            Ok(gn) => g.view_mut((1, 1), (n, n)).copy_from(&(gn * (f * f))),
            Err(_) => g.fill(f64::NAN),
        }
        g
    };
    let s = spec.clone();
    let dmetric = move |p: &[f64]| {
        let (f, f1, _) = s.warp_at(p[0]);
        let x = &p[1..];
        let (Ok(gn), Ok(dgn)) = (
            s.fiber.metric(x),
            s.fiber.metric_derivative(x, DerivativeMode::Auto),
        ) else {
            return Array3::from_elem((m, m, m), f64::NAN);
        };
        let mut d = Array3::zeros((m, m, m));
        for a in 0..n {
            for b in 0..n {
                d[[0, a + 1, b + 1]] = 2.0 * f * f1 * gn[(a, b)];
                for e in 0..n {
                    d[[e + 1, a + 1, b + 1]] = f * f * dgn[[e, a, b]];
                }
            }
        }
        d
    };
    let (s1, s2, s3, s4) = (spec.clone(), spec.clone(), spec.clone(), spec.clone());
    let mut ranges = vec![spec.t_range];
    ranges.extend_from_slice(spec.fiber.sample_ranges());
    Ok(DualisticChart::new(
        name,
        m,
        metric,
        move |p| warped_gamma(&s1, ConnectionKind::Nabla, p),
        move |p| warped_gamma(&s2, ConnectionKind::NablaStar, p),
    )
    .with_metric_derivative(dmetric)
    .with_connection_derivatives(
        move |p| warped_gamma_derivative(&s3, ConnectionKind::Nabla, p),
        move |p| warped_gamma_derivative(&s4, ConnectionKind::NablaStar, p),
    )
    .with_sample_ranges(ranges)
    .with_fd_step(spec.fiber.fd_step()))
}

/// The eight closed-form curvature cases of a statistical warped product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpedCurvatureCase {
    A,
    B,
    C,
    D,
    AStar,
    BStar,
    CStar,
    DStar,
}

impl WarpedCurvatureCase {
    pub const ALL: [WarpedCurvatureCase; 8] = [
        Self::A,
        Self::B,
        Self::C,
        Self::D,
        Self::AStar,
        Self::BStar,
        Self::CStar,
        Self::DStar,
    ];

    pub fn connection(self) -> ConnectionKind {
        match self {
            Self::A | Self::B | Self::C | Self::D => ConnectionKind::Nabla,
            _ => ConnectionKind::NablaStar,
        }
    }

    fn base(self) -> char {
        match self {
            Self::A | Self::AStar => 'a',
            Self::B | Self::BStar => 'b',
            Self::C | Self::CStar => 'c',
            Self::D | Self::DStar => 'd',
        }
    }

    /// The `(X, Y, Z)` slots fed to `R(X, Y) Z` for probes `(u, v, w)`.
    pub fn slots(self, u: &[f64], v: &[f64], w: &[f64]) -> [Vec<f64>; 3] {
        let xi = crate::linalg::basis(u.len(), 0);
        match self.base() {
            'a' => [v.to_vec(), xi.clone(), xi],
            'b' => [v.to_vec(), u.to_vec(), xi],
            'c' => [xi, v.to_vec(), w.to_vec()],
            _ => [v.to_vec(), w.to_vec(), u.to_vec()],
        }
    }
}

impl std::str::FromStr for WarpedCurvatureCase {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "a" => Self::A,
            "b" => Self::B,
            "c" => Self::C,
            "d" => Self::D,
            "a*" | "a_star" => Self::AStar,
            "b*" | "b_star" => Self::BStar,
            "c*" | "c_star" => Self::CStar,
            "d*" | "d_star" => Self::DStar,
            other => {
                return Err(GeometryError::InvalidArgument(format!(
                    "unknown curvature case {other:?}"
                )))
            }
        })
    }
}

fn require_horizontal(spec: &WarpedProductSpec, v: &[f64], label: &str) -> Result<()> {
    if v.len() != spec.total_dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: spec.total_dim(),
            found: v.len(),
        });
    }
    if v[0] != 0.0 {
        return Err(GeometryError::InvalidArgument(format!(
            "probe {label} must be tangent to the fiber (t-component {})",
            v[0]
        )));
    }
    Ok(())
}

/// Closed-form curvature of the warped product for fiber-tangent probes
/// `U, V, W` (given in total coordinates with zero `t`-component):
///
/// * a: `R(V,∂t)∂t = −(f″/f) V`
/// * b: `R(V,U)∂t = 0`
/// * c: `R(∂t,V)W = −(f″/f)⟨V,W⟩ ∂t`
/// * d: `R(V,W)U = R^N(V,W)U − (f′/f)² (⟨W,U⟩V − ⟨V,U⟩W)`
///
/// Starred cases use `∇*` and `R^{N*}`.
pub fn warped_curvature_closed_form(
    spec: &WarpedProductSpec,
    point: &[f64],
    case: WarpedCurvatureCase,
    u: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<Vec<f64>> {
    if point.len() != spec.total_dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: spec.total_dim(),
            found: point.len(),
        });
    }
    require_horizontal(spec, v, "V")?;
    let m = spec.total_dim();
    let (f, f1, f2) = spec.warp_at(point[0]);
    let x = &point[1..];
    let gn = spec.fiber.metric(x)?;
    let g = |a: &[f64], b: &[f64]| f * f * inner(&gn, &a[1..], &b[1..]);
    Ok(match case.base() {
        'a' => v.iter().map(|vi| -(f2 / f) * vi).collect(),
        'b' => {
            require_horizontal(spec, u, "U")?;
            vec![0.0; m]
        }
        'c' => {
            require_horizontal(spec, w, "W")?;
            let mut out = vec![0.0; m];
            out[0] = -(f2 / f) * g(v, w);
            out
        }
        _ => {
            require_horizontal(spec, w, "W")?;
            require_horizontal(spec, u, "U")?;
            let rn = curvature(&spec.fiber, case.connection(), x, DerivativeMode::Auto)?;
            let fiber_part = rn.apply(&v[1..], &w[1..], &u[1..]);
            let k = (f1 / f).powi(2);
            let (wu, vu) = (g(w, u), g(v, u));
            let mut out = vec![0.0; m];
            for i in 1..m {
                out[i] = fiber_part[i - 1] - k * (wu * v[i] - vu * w[i]);
            }
            out
        }
    })
}

/// `R̃(X,Y,Z,W) = ⟨R̃(X,Y)Z, W⟩` of `I ×_f N(c)` over a statistical complex
/// space form, the same for `∇̃` and `∇̃*`.
pub fn space_form_warped_curvature(
    spec: &WarpedProductSpec,
    point: &[f64],
    x: &[f64],
    y: &[f64],
    z: &[f64],
    w: &[f64],
) -> Result<f64> {
    let c = spec.space_form_c.ok_or_else(|| {
        GeometryError::InvalidArgument("fiber is not declared as a complex space form".into())
    })?;
    let m = spec.total_dim();
    if point.len() != m {
        return Err(GeometryError::DimensionMismatch {
            expected: m,
            found: point.len(),
        });
    }
    for v in [x, y, z, w] {
        if v.len() != m {
            return Err(GeometryError::DimensionMismatch {
                expected: m,
                found: v.len(),
            });
        }
    }
    let (f, f1, f2) = spec.warp_at(point[0]);
    let mut g = DMatrix::zeros(m, m);
    g[(0, 0)] = 1.0;
    let gn = spec.fiber.metric(&point[1..])?;
    g.view_mut((1, 1), (m - 1, m - 1)).copy_from(&(gn * (f * f)));
    let phi = spec.phi(point);
    let ip = |a: &[f64], b: &[f64]| inner(&g, a, b);
    let (px, py, pz) = (apply(&phi, x), apply(&phi, y), apply(&phi, z));

    let k1 = c / (4.0 * f * f) - (f1 / f).powi(2);
    let k2 = k1 + f2 / f;
    let k3 = c / (4.0 * f * f);
    let (xt, yt, zt, wt) = (x[0], y[0], z[0], w[0]);
    Ok(k1 * (ip(y, z) * ip(x, w) - ip(x, z) * ip(y, w))
        + k2 * (ip(x, z) * yt * wt - ip(y, z) * xt * wt + ip(y, w) * xt * zt
            - ip(x, w) * yt * zt)
        + k3 * (ip(x, &pz) * ip(&py, w) - ip(y, &pz) * ip(&px, w) + 2.0 * ip(x, &py) * ip(&pz, w)))
}

/// Numerical `⟨R(X,Y)Z, W⟩` of the built chart, for comparison with the closed forms.
pub fn numerical_four_form(
    chart: &DualisticChart,
    kind: ConnectionKind,
    point: &[f64],
    x: &[f64],
    y: &[f64],
    z: &[f64],
    w: &[f64],
    mode: DerivativeMode,
) -> Result<f64> {
    let r: CurvatureTensor = curvature(chart, kind, point, mode)?;
    Ok(r.four_form(&chart.metric(point)?, x, y, z, w))
}

/// Standard `J` field for a fiber of even dimension.
pub fn standard_j_field(dim: usize) -> PointFn<DMatrix<f64>> {
    let j = standard_complex_structure(dim);
    Arc::new(move |_| j.clone())
}

/// Left multiplication by the quaternion units `i` and `j` on `ℝ⁴`.
pub fn quaternion_units() -> (DMatrix<f64>, DMatrix<f64>) {
    let mut j1 = DMatrix::zeros(4, 4);
    j1[(1, 0)] = 1.0;
    j1[(0, 1)] = -1.0;
    j1[(3, 2)] = 1.0;
    j1[(2, 3)] = -1.0;
    let mut j2 = DMatrix::zeros(4, 4);
    j2[(2, 0)] = 1.0;
    j2[(3, 1)] = -1.0;
    j2[(0, 2)] = -1.0;
    j2[(1, 3)] = 1.0;
    (j1, j2)
}

/// Orthogonal almost complex field `cos θ J₁ + sin θ J₂`, `θ = ε x⁰`, on flat `ℝ⁴`.
/// Its fundamental form is closed only for `ε = 0`.
pub fn twisted_j_field(eps: f64) -> PointFn<DMatrix<f64>> {
    let (j1, j2) = quaternion_units();
    Arc::new(move |x| {
        let theta = eps * x[0];
        &j1 * theta.cos() + &j2 * theta.sin()
    })
}

/// `J + ε E` with `E = diag(1, 0, …)`: fails `J² = −Id` for `ε ≠ 0`.
pub fn perturbed_j_field(dim: usize, eps: f64) -> PointFn<DMatrix<f64>> {
    let mut j = standard_complex_structure(dim);
    j[(0, 0)] += eps;
    Arc::new(move |_| j.clone())
}

/// The warped product model of hyperbolic space: statistical plane fiber, `f = e^t`.
pub fn builtin_h3_example() -> WarpedProductSpec {
    WarpedProductSpec::with_standard_j(builtin_r2_example(), WarpingFunction::exp())
}

#[cfg(test)]
mod tests;
