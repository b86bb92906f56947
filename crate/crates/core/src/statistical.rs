//! Dualistic structures `(g, ∇, ∇*)` on coordinate charts.
//!
//! Connection coefficients are stored as `Γ[k][i][j]` with
//! `∇_{∂i} ∂j = Γ^k_{ij} ∂k`. Curvature uses
//! `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]} Z`; in coordinate frames the
//! bracket term vanishes and
//!
//! ```text
//! R^l_{kij} = ∂_i Γ^l_{jk} − ∂_j Γ^l_{ik} + Γ^m_{jk} Γ^l_{im} − Γ^m_{ik} Γ^l_{jm}
//! ```
//!
//! where `l` is the output index, `k` the `Z` slot and `(i, j)` the `(X, Y)` slots.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::{Array3, Array4};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::linalg::{apply, inner, max_abs, max_abs_diff};
use crate::residuals::ResidualRecord;
use crate::tensor::{central_difference_vec, DEFAULT_FD_STEP};

pub type PointFn<T> = Arc<dyn Fn(&[f64]) -> T + Send + Sync>;

/// Connection coefficients `Γ^k_{ij}` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel(Array3<f64>);

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self(Array3::zeros((dim, dim, dim)))
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        Self(Array3::from_shape_fn((dim, dim, dim), |(k, i, j)| f(k, i, j)))
    }

    pub fn from_array(a: Array3<f64>) -> Self {
        Self(a)
    }

    pub fn dim(&self) -> usize {
        self.0.shape()[0]
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[[k, i, j]]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.0[[k, i, j]] = v;
    }

    pub fn array(&self) -> &Array3<f64> {
        &self.0
    }

    /// `Γ(X, Y)^k = Γ^k_{ij} X^i Y^j`, i.e. `∇_X Y` for constant-coefficient fields.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    acc += self.0[[k, i, j]] * x[i] * y[j];
                }
            }
            *o = acc;
        }
        out
    }

    pub fn combine(&self, other: &Christoffel, a: f64, b: f64) -> Christoffel {
        Christoffel(&self.0 * a + &other.0 * b)
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// Largest `|Γ^k_{ij} − Γ^k_{ji}|` (torsion).
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    worst = worst.max((self.0[[k, i, j]] - self.0[[k, j, i]]).abs());
                }
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Which connection of the dualistic triple to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    Nabla,
    NablaStar,
    LeviCivita,
}

/// How coordinate derivatives of metric and connection fields are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    /// Analytic provider when present, central differences otherwise.
    Auto,
    /// Analytic provider required.
    Analytic,
    /// Central differences with the given step.
    FiniteDifference(f64),
}

/// A coordinate chart with metric `g` and a pair of connections `∇`, `∇*`.
#[derive(Clone)]
pub struct DualisticChart {
    name: String,
    dim: usize,
    metric: PointFn<DMatrix<f64>>,
    gamma: PointFn<Christoffel>,
    gamma_star: PointFn<Christoffel>,
    metric_derivative: Option<PointFn<Array3<f64>>>,
    gamma_derivative: Option<PointFn<Array4<f64>>>,
    gamma_star_derivative: Option<PointFn<Array4<f64>>>,
    sample_ranges: Vec<(f64, f64)>,
    fd_step: f64,
}

impl fmt::Debug for DualisticChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DualisticChart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_metric_derivative", &self.metric_derivative.is_some())
            .field("analytic_connection_derivative", &self.gamma_derivative.is_some())
            .finish()
    }
}

impl DualisticChart {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        metric: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        gamma: impl Fn(&[f64]) -> Christoffel + Send + Sync + 'static,
        gamma_star: impl Fn(&[f64]) -> Christoffel + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            metric: Arc::new(metric),
            gamma: Arc::new(gamma),
            gamma_star: Arc::new(gamma_star),
            metric_derivative: None,
            gamma_derivative: None,
            gamma_star_derivative: None,
            sample_ranges: vec![(-1.0, 1.0); dim],
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Riemannian chart with the trivial statistical structure `∇ = ∇* = ∇⁰`.
    pub fn riemannian(
        name: impl Into<String>,
        dim: usize,
        metric: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        metric_derivative: impl Fn(&[f64]) -> Array3<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::from_cubic_form(name, dim, metric, metric_derivative, move |_| {
            Array3::zeros((dim, dim, dim))
        })
    }

    /// Statistical chart built from a totally symmetric cubic form `C`:
    /// `∇ = ∇⁰ + K`, `∇* = ∇⁰ − K` with `g(K_X Y, Z) = C(X, Y, Z)`.
    pub fn from_cubic_form(
        name: impl Into<String>,
        dim: usize,
        metric: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        metric_derivative: impl Fn(&[f64]) -> Array3<f64> + Send + Sync + 'static,
        cubic: impl Fn(&[f64]) -> Array3<f64> + Send + Sync + 'static,
    ) -> Self {
        let metric: PointFn<DMatrix<f64>> = Arc::new(metric);
        let dmetric: PointFn<Array3<f64>> = Arc::new(metric_derivative);
        let cubic: PointFn<Array3<f64>> = Arc::new(cubic);
        let build = {
            let metric = metric.clone();
            let dmetric = dmetric.clone();
            move |x: &[f64], sign: f64| -> Christoffel {
                let g = metric(x);
                let dg = dmetric(x);
                let n = g.nrows();
                let Some(ginv) = g.clone().try_inverse() else {
                    return Christoffel::from_fn(n, |_, _, _| f64::NAN);
                };
                let lc = christoffel_from_metric(&ginv, &dg);
                let c = cubic(x);
                Christoffel::from_fn(n, |k, i, j| {
                    let k_term: f64 = (0..n).map(|l| ginv[(k, l)] * c[[l, i, j]]).sum();
                    lc.get(k, i, j) + sign * k_term
                })
            }
        };
        let b1 = build.clone();
        let b2 = build;
        let m = metric.clone();
        let mut chart = Self::new(
            name,
            dim,
            move |x| m(x),
            move |x| b1(x, 1.0),
            move |x| b2(x, -1.0),
        );
        chart.metric_derivative = Some(dmetric);
        chart
    }

    pub fn with_metric_derivative(
        mut self,
        d: impl Fn(&[f64]) -> Array3<f64> + Send + Sync + 'static,
    ) -> Self {
        self.metric_derivative = Some(Arc::new(d));
        self
    }

    pub fn with_connection_derivatives(
        mut self,
        d: impl Fn(&[f64]) -> Array4<f64> + Send + Sync + 'static,
        d_star: impl Fn(&[f64]) -> Array4<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gamma_derivative = Some(Arc::new(d));
        self.gamma_star_derivative = Some(Arc::new(d_star));
        self
    }

    pub fn with_sample_ranges(mut self, ranges: Vec<(f64, f64)>) -> Self {
        assert_eq!(ranges.len(), self.dim);
        self.sample_ranges = ranges;
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    /// Returns a copy whose `∇` has `eps` added to `Γ^k_{ij}` and `Γ^k_{ji}`.
    /// The dual connection is left untouched, so duality breaks.
    pub fn with_corrupted_nabla(mut self, k: usize, i: usize, j: usize, eps: f64) -> Self {
        let inner_gamma = self.gamma.clone();
        self.gamma = Arc::new(move |x| {
            let mut g = inner_gamma(x);
            g.set(k, i, j, g.get(k, i, j) + eps);
            if i != j {
                g.set(k, j, i, g.get(k, j, i) + eps);
            }
            g
        });
        self.name = format!("{}+corrupted", self.name);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn sample_ranges(&self) -> &[(f64, f64)] {
        &self.sample_ranges
    }

    pub fn has_analytic_connection_derivatives(&self) -> bool {
        self.gamma_derivative.is_some() && self.gamma_star_derivative.is_some()
    }

    pub fn has_analytic_metric_derivative(&self) -> bool {
        self.metric_derivative.is_some()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.sample_ranges
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..=hi))
            .collect()
    }

    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let g = (self.metric)(x);
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: g.nrows(),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite {
                what: format!("metric of {}", self.name),
            });
        }
        Ok(g)
    }

    /// Coefficients of the requested connection at `x`.
    pub fn connection(&self, kind: ConnectionKind, x: &[f64]) -> Result<Christoffel> {
        self.check_point(x)?;
        let gamma = match kind {
            ConnectionKind::Nabla => (self.gamma)(x),
            ConnectionKind::NablaStar => (self.gamma_star)(x),
            ConnectionKind::LeviCivita => return levi_civita(self, x),
        };
        if gamma.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: gamma.dim(),
            });
        }
        if !gamma.is_finite() {
            return Err(GeometryError::NonFinite {
                what: format!("connection coefficients of {}", self.name),
            });
        }
        Ok(gamma)
    }

    /// `∂_a g_{ij}` as `[a][i][j]`.
    pub fn metric_derivative(&self, x: &[f64], mode: DerivativeMode) -> Result<Array3<f64>> {
        self.check_point(x)?;
        let n = self.dim;
        match (mode, &self.metric_derivative) {
            (DerivativeMode::Auto | DerivativeMode::Analytic, Some(d)) => {
                let out = d(x);
                if out.iter().any(|v| !v.is_finite()) {
                    return Err(GeometryError::NonFinite {
                        what: format!("metric derivative of {}", self.name),
                    });
                }
                Ok(out)
            }
            (DerivativeMode::Analytic, None) => {
                Err(GeometryError::MissingAnalytic("metric derivative"))
            }
            (DerivativeMode::Auto, None) | (DerivativeMode::FiniteDifference(_), _) => {
                let step = match mode {
                    DerivativeMode::FiniteDifference(h) => h,
                    _ => self.fd_step,
                };
                let mut out = Array3::zeros((n, n, n));
                for a in 0..n {
                    let d = central_difference_vec(
                        |p| (self.metric)(p).iter().copied().collect(),
                        x,
                        a,
                        step,
                    )?;
                    // nalgebra storage is column-major
                    for j in 0..n {
                        for i in 0..n {
                            out[[a, i, j]] = d[j * n + i];
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// `∂_a Γ^k_{ij}` as `[a][k][i][j]`.
    pub fn connection_derivative(
        &self,
        kind: ConnectionKind,
        x: &[f64],
        mode: DerivativeMode,
    ) -> Result<Array4<f64>> {
        self.check_point(x)?;
        let analytic = match kind {
            ConnectionKind::Nabla => self.gamma_derivative.as_ref(),
            ConnectionKind::NablaStar => self.gamma_star_derivative.as_ref(),
            ConnectionKind::LeviCivita => None,
        };
        match (mode, analytic) {
            (DerivativeMode::Auto | DerivativeMode::Analytic, Some(d)) => {
                let out = d(x);
                if out.iter().any(|v| !v.is_finite()) {
                    return Err(GeometryError::NonFinite {
                        what: format!("connection derivative of {}", self.name),
                    });
                }
                Ok(out)
            }
            (DerivativeMode::Analytic, None) if kind != ConnectionKind::LeviCivita => {
                Err(GeometryError::MissingAnalytic("connection derivative"))
            }
            _ => {
                let step = match mode {
                    DerivativeMode::FiniteDifference(h) => h,
                    _ => self.fd_step,
                };
                let n = self.dim;
                let mut out = Array4::zeros((n, n, n, n));
                let failure = std::cell::RefCell::new(None);
                for a in 0..n {
                    let d = central_difference_vec(
                        |p| match self.connection(kind, p) {
                            Ok(g) => g.array().iter().copied().collect(),
                            Err(e) => {
                                failure.borrow_mut().get_or_insert(e);
                                vec![f64::NAN; n * n * n]
                            }
                        },
                        x,
                        a,
                        step,
                    );
                    if let Some(e) = failure.borrow_mut().take() {
                        return Err(e);
                    }
                    let d = d?;
                    for (idx, v) in d.into_iter().enumerate() {
                        let k = idx / (n * n);
                        let i = (idx / n) % n;
                        let j = idx % n;
                        out[[a, k, i, j]] = v;
                    }
                }
                Ok(out)
            }
        }
    }
}

fn christoffel_from_metric(ginv: &DMatrix<f64>, dg: &Array3<f64>) -> Christoffel {
    let n = ginv.nrows();
    Christoffel::from_fn(n, |k, i, j| {
        0.5 * (0..n)
            .map(|l| ginv[(k, l)] * (dg[[i, l, j]] + dg[[j, l, i]] - dg[[l, i, j]]))
            .sum::<f64>()
    })
}

fn inverse_metric(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = g[(i, j)].abs().max(g[(j, i)].abs()).max(1.0);
            if (g[(i, j)] - g[(j, i)]).abs() > 1e-12 * scale {
                return Err(GeometryError::SingularMetric);
            }
        }
    }
    let chol = g.clone().cholesky().ok_or(GeometryError::SingularMetric)?;
    let inv = chol.inverse();
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::SingularMetric);
    }
    Ok(inv)
}

/// Christoffel symbols of the metric's Levi-Civita connection.
pub fn levi_civita(chart: &DualisticChart, point: &[f64]) -> Result<Christoffel> {
    let g = chart.metric(point)?;
    let ginv = inverse_metric(&g)?;
    let dg = chart.metric_derivative(point, DerivativeMode::Auto)?;
    Ok(christoffel_from_metric(&ginv, &dg))
}

/// Components `R^l_{kij}` of a curvature tensor at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor(Array4<f64>);

impl CurvatureTensor {
    pub fn zeros(dim: usize) -> Self {
        Self(Array4::zeros((dim, dim, dim, dim)))
    }

    pub fn dim(&self) -> usize {
        self.0.shape()[0]
    }

    /// `R^l_{kij}`: output `l`, `Z`-slot `k`, `(X, Y)`-slots `(i, j)`.
    pub fn component(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        self.0[[l, k, i, j]]
    }

    pub fn array(&self) -> &Array4<f64> {
        &self.0
    }

    /// `R(X, Y) Z`.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (l, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..n {
                if z[k] == 0.0 {
                    continue;
                }
                for i in 0..n {
                    if x[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        acc += self.0[[l, k, i, j]] * x[i] * y[j] * z[k];
                    }
                }
            }
            *o = acc;
        }
        out
    }

    /// `g(R(X, Y) Z, W)`.
    pub fn four_form(
        &self,
        g: &DMatrix<f64>,
        x: &[f64],
        y: &[f64],
        z: &[f64],
        w: &[f64],
    ) -> f64 {
        inner(g, &self.apply(x, y, z), w)
    }

    /// `g(R(X, Y) Y, X) / (g(X,X) g(Y,Y) − g(X,Y)²)`.
    pub fn sectional(&self, g: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
        let area = inner(g, x, x) * inner(g, y, y) - inner(g, x, y).powi(2);
        self.four_form(g, x, y, y, x) / area
    }

    pub fn max_abs_diff(&self, other: &CurvatureTensor) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, a| acc.max(a.abs()))
    }

    /// Largest `|R^l_{kij} + R^l_{kji}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((self.0[[l, k, i, j]] + self.0[[l, k, j, i]]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Curvature tensor of the chosen connection at `point`.
///
/// For `LeviCivita` the derivative of `Γ⁰` is always taken numerically
/// (using the analytic metric derivative when the chart has one).
pub fn curvature(
    chart: &DualisticChart,
    kind: ConnectionKind,
    point: &[f64],
    mode: DerivativeMode,
) -> Result<CurvatureTensor> {
    let gamma = chart.connection(kind, point)?;
    let dgamma = chart.connection_derivative(kind, point, mode)?;
    Ok(curvature_from_parts(&gamma, &dgamma))
}

pub(crate) fn curvature_from_parts(gamma: &Christoffel, dgamma: &Array4<f64>) -> CurvatureTensor {
    let n = gamma.dim();
    let mut r = Array4::zeros((n, n, n, n));
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut v = dgamma[[i, l, j, k]] - dgamma[[j, l, i, k]];
                    for m in 0..n {
                        v += gamma.get(m, j, k) * gamma.get(l, i, m)
                            - gamma.get(m, i, k) * gamma.get(l, j, m);
                    }
                    r[[l, k, i, j]] = v;
                    r[[l, k, j, i]] = -v;
                }
            }
        }
    }
    CurvatureTensor(r)
}

/// Difference tensor `K = ∇ − ∇⁰`.
pub fn difference_tensor(chart: &DualisticChart, point: &[f64]) -> Result<Christoffel> {
    let gamma = chart.connection(ConnectionKind::Nabla, point)?;
    let lc = levi_civita(chart, point)?;
    Ok(gamma.combine(&lc, 1.0, -1.0))
}

/// `[K, K](X, Y) Z = K_X K_Y Z − K_Y K_X Z` as a full component array.
pub fn difference_bracket(k: &Christoffel) -> CurvatureTensor {
    let n = k.dim();
    let mut r = Array4::zeros((n, n, n, n));
    for l in 0..n {
        for kk in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = 0.0;
                    for m in 0..n {
                        v += k.get(l, i, m) * k.get(m, j, kk) - k.get(l, j, m) * k.get(m, i, kk);
                    }
                    r[[l, kk, i, j]] = v;
                }
            }
        }
    }
    CurvatureTensor(r)
}

/// `(∇_X g)(Y, Z)` for the given coefficients and metric derivative.
pub(crate) fn metric_covariant_derivative(
    g: &DMatrix<f64>,
    dg: &Array3<f64>,
    gamma: &Christoffel,
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> f64 {
    let n = g.nrows();
    let mut directional = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                directional += x[a] * dg[[a, b, c]] * y[b] * z[c];
            }
        }
    }
    directional - inner(g, &gamma.apply(x, y), z) - inner(g, y, &gamma.apply(x, z))
}

/// Four probe vectors for identity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Probes {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
}

impl Probes {
    pub fn random<R: Rng>(dim: usize, rng: &mut R) -> Self {
        let mut v = || (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect::<Vec<f64>>();
        Self {
            x: v(),
            y: v(),
            z: v(),
            w: v(),
        }
    }

    fn check(&self, dim: usize) -> Result<()> {
        for v in [&self.x, &self.y, &self.z, &self.w] {
            if v.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// Absolute residuals of the dualistic axioms and curvature identities:
/// `duality`, `codazzi`, `k_symmetry`, `k_self_adjoint`, `conjugate`,
/// `curvature_sum` (componentwise max), plus `torsion` of both connections.
pub fn axiom_residuals(
    chart: &DualisticChart,
    point: &[f64],
    probes: &Probes,
    mode: DerivativeMode,
) -> Result<ResidualRecord> {
    probes.check(chart.dim())?;
    let Probes { x, y, z, w } = probes;
    let g = chart.metric(point)?;
    let dg = chart.metric_derivative(point, DerivativeMode::Auto)?;
    let gamma = chart.connection(ConnectionKind::Nabla, point)?;
    let gamma_star = chart.connection(ConnectionKind::NablaStar, point)?;
    let lc = levi_civita(chart, point)?;
    let k = gamma.combine(&lc, 1.0, -1.0);

    let mut rec = ResidualRecord::new();

    // Z g(X, Y) = g(∇_Z X, Y) + g(X, ∇*_Z Y)
    let n = chart.dim();
    let mut zg = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                zg += z[a] * dg[[a, b, c]] * x[b] * y[c];
            }
        }
    }
    rec.push(
        "duality",
        zg - inner(&g, &gamma.apply(z, x), y) - inner(&g, x, &gamma_star.apply(z, y)),
    );

    let codazzi = metric_covariant_derivative(&g, &dg, &gamma, x, y, z)
        - metric_covariant_derivative(&g, &dg, &gamma, y, x, z);
    rec.push("codazzi", codazzi);

    rec.push("k_symmetry", max_abs_diff(&k.apply(x, y), &k.apply(y, x)));
    rec.push(
        "k_self_adjoint",
        inner(&g, &k.apply(x, y), z) - inner(&g, y, &k.apply(x, z)),
    );
    rec.push("torsion", gamma.asymmetry().max(gamma_star.asymmetry()));

    let r = curvature(chart, ConnectionKind::Nabla, point, mode)?;
    let r_star = curvature(chart, ConnectionKind::NablaStar, point, mode)?;
    rec.push(
        "conjugate",
        r.four_form(&g, x, y, z, w) + inner(&g, z, &r_star.apply(x, y, w)),
    );

    let r0 = curvature(chart, ConnectionKind::LeviCivita, point, mode)?;
    let kk = difference_bracket(&k);
    let mut worst = 0.0f64;
    for (idx, v) in r.array().indexed_iter() {
        let resid = v + r_star.array()[idx] - 2.0 * r0.array()[idx] - 2.0 * kk.array()[idx];
        worst = worst.max(resid.abs());
    }
    rec.push("curvature_sum", worst);
    Ok(rec)
}

/// Checks `J² = −Id` and `g(JX, JY) = g(X, Y)` at a point.
pub fn check_almost_hermitian(g: &DMatrix<f64>, j: &DMatrix<f64>, tol: f64) -> Result<()> {
    let n = g.nrows();
    if j.nrows() != n || j.ncols() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            found: j.nrows(),
        });
    }
    let sq = j * j + DMatrix::<f64>::identity(n, n);
    let sq_defect = max_abs(sq.as_slice());
    if sq_defect > tol {
        return Err(GeometryError::NotAlmostComplex(format!(
            "|J² + Id| = {sq_defect:e}"
        )));
    }
    let compat = j.transpose() * g * j - g;
    let compat_defect = max_abs(compat.as_slice());
    if compat_defect > tol {
        return Err(GeometryError::NotAlmostComplex(format!(
            "|g(J·, J·) − g| = {compat_defect:e}"
        )));
    }
    Ok(())
}

/// Curvature operator of a complex space form of constant holomorphic
/// sectional curvature `c`:
///
/// `(c/4)(g(X,Z)Y − g(Y,Z)X + g(JX,Z)JY − g(JY,Z)JX + 2g(JX,Y)JZ)`.
///
/// The sign convention of this operator makes `g(R(X,JX)X, JX) = c` for a unit `X`.
pub fn holomorphic_space_form_curvature(
    c: f64,
    g: &DMatrix<f64>,
    j: &DMatrix<f64>,
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Result<Vec<f64>> {
    check_almost_hermitian(g, j, 1e-9)?;
    let n = g.nrows();
    for v in [x, y, z] {
        if v.len() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let jx = apply(j, x);
    let jy = apply(j, y);
    let jz = apply(j, z);
    let a = inner(g, x, z);
    let b = inner(g, y, z);
    let c1 = inner(g, &jx, z);
    let c2 = inner(g, &jy, z);
    let d = inner(g, &jx, y);
    Ok((0..n)
        .map(|i| 0.25 * c * (a * y[i] - b * x[i] + c1 * jy[i] - c2 * jx[i] + 2.0 * d * jz[i]))
        .collect())
}

/// Flat Euclidean chart with the trivial statistical structure.
pub fn builtin_flat(dim: usize) -> DualisticChart {
    DualisticChart::new(
        format!("flat{dim}"),
        dim,
        move |_| DMatrix::identity(dim, dim),
        move |_| Christoffel::zeros(dim),
        move |_| Christoffel::zeros(dim),
    )
    .with_metric_derivative(move |_| Array3::zeros((dim, dim, dim)))
    .with_connection_derivatives(
        move |_| Array4::zeros((dim, dim, dim, dim)),
        move |_| Array4::zeros((dim, dim, dim, dim)),
    )
}

/// The statistical plane `(ℝ², dx² + dy²)` with
/// `∇_{∂x}∂x = ∂y`, `∇_{∂y}∂y = 0`, `∇_{∂x}∂y = ∇_{∂y}∂x = ∂x`
/// and its conjugate with all signs flipped. Constant curvature −1.
pub fn builtin_r2_example() -> DualisticChart {
    let table = |sign: f64| {
        move |_: &[f64]| {
            let mut g = Christoffel::zeros(2);
            // indices: 0 = x, 1 = y
            g.set(1, 0, 0, sign);
            g.set(0, 0, 1, sign);
            g.set(0, 1, 0, sign);
            g
        }
    };
    DualisticChart::new(
        "r2",
        2,
        |_| DMatrix::identity(2, 2),
        table(1.0),
        table(-1.0),
    )
    .with_metric_derivative(|_| Array3::zeros((2, 2, 2)))
    .with_connection_derivatives(|_| Array4::zeros((2, 2, 2, 2)), |_| Array4::zeros((2, 2, 2, 2)))
}

/// Surface of constant Gauss curvature `c` in the conformal chart
/// `g = λ²(dx² + dy²)`, `λ = 1 / (1 + c(x² + y²)/4)`, with the trivial
/// statistical structure. With the standard rotation `J` it is a complex
/// space form `N(c)` of complex dimension one.
pub fn builtin_space_form_fiber(c: f64) -> DualisticChart {
    let lambda = move |x: &[f64]| 1.0 / (1.0 + 0.25 * c * (x[0] * x[0] + x[1] * x[1]));
    let chart = DualisticChart::riemannian(
        format!("space_form({c})"),
        2,
        move |x| DMatrix::identity(2, 2) * lambda(x).powi(2),
        move |x| {
            // ∂_a λ² = −c x_a λ³
            let l = lambda(x);
            let mut d = Array3::zeros((2, 2, 2));
            for a in 0..2 {
                let v = -c * x[a] * l.powi(3);
                d[[a, 0, 0]] = v;
                d[[a, 1, 1]] = v;
            }
            d
        },
    );
    // keep 1 + c r²/4 well away from zero
    let radius = if c < 0.0 { (1.0 / c.abs()).sqrt().min(1.0) } else { 1.0 };
    chart.with_sample_ranges(vec![(-radius, radius); 2])
}

/// The standard almost complex structure on ℝ^{2m}: `J∂_{2a} = ∂_{2a+1}`,
/// `J∂_{2a+1} = −∂_{2a}`.
pub fn standard_complex_structure(dim: usize) -> DMatrix<f64> {
    assert!(dim % 2 == 0, "almost complex structures need even dimension");
    let mut j = DMatrix::zeros(dim, dim);
    for a in 0..dim / 2 {
        j[(2 * a + 1, 2 * a)] = 1.0;
        j[(2 * a, 2 * a + 1)] = -1.0;
    }
    j
}
