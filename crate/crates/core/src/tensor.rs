//! Numerical kernel shared by every other module: square matrices, scalar
//! fields, central differences and seeded generation of constrained matrices.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GeometryError, Result};

/// Default step for central differences.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Dense real square matrix, indexed `(row, col)`.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        Self::from_fn(dim, |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// Builds a matrix from row slices; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(GeometryError::InvalidArgument("empty matrix".into()));
        }
        for row in rows {
            if row.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        let m = Self::from_fn(dim, |i, j| rows[i][j]);
        if !m.is_finite() {
            return Err(GeometryError::NonFinite {
                what: "matrix entries".into(),
            });
        }
        Ok(m)
    }

    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(GeometryError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    /// Largest entrywise deviation from symmetry.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// `g(M e_i, e_j)` for the standard orthonormal frame, i.e. entry `(j, i)`.
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.0[(j, i)]
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut f64 {
        &mut self.0[idx]
    }
}

impl<'a> Mul for &'a SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: &'a SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add for &'a SquareMatrix {
    type Output = SquareMatrix;
    fn add(self, rhs: &'a SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub for &'a SquareMatrix {
    type Output = SquareMatrix;
    fn sub(self, rhs: &'a SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 - &rhs.0)
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        SquareMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Sum of squared entries.
pub fn frobenius_norm_sq(m: &SquareMatrix) -> f64 {
    m.0.iter().map(|v| v * v).sum()
}

/// `AB - BA`.
pub fn commutator(a: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix> {
    if a.dim() != b.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(SquareMatrix(&a.0 * &b.0 - &b.0 * &a.0))
}

/// Real-valued field on a coordinate chart.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl ScalarField {
    pub fn new(dim: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        (self.eval)(point)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("dim", &self.dim).finish()
    }
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::InvalidStep(step))
    }
}

/// Symmetric difference quotient of `field` along coordinate axis `direction`.
pub fn central_difference(
    field: &ScalarField,
    point: &[f64],
    direction: usize,
    step: f64,
) -> Result<f64> {
    check_step(step)?;
    if point.len() != field.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: field.dim(),
            found: point.len(),
        });
    }
    if direction >= point.len() {
        return Err(GeometryError::InvalidArgument(format!(
            "axis {direction} out of range for dimension {}",
            point.len()
        )));
    }
    let mut shifted = point.to_vec();
    shifted[direction] = point[direction] + step;
    let plus = field.eval(&shifted);
    shifted[direction] = point[direction] - step;
    let minus = field.eval(&shifted);
    if !plus.is_finite() || !minus.is_finite() {
        return Err(GeometryError::NonFinite {
            what: "scalar field".into(),
        });
    }
    Ok((plus - minus) / (2.0 * step))
}

/// Central difference of a vector-valued evaluator, component by component.
pub fn central_difference_vec(
    eval: impl Fn(&[f64]) -> Vec<f64>,
    point: &[f64],
    direction: usize,
    step: f64,
) -> Result<Vec<f64>> {
    check_step(step)?;
    let mut shifted = point.to_vec();
    shifted[direction] = point[direction] + step;
    let plus = eval(&shifted);
    shifted[direction] = point[direction] - step;
    let minus = eval(&shifted);
    if plus.len() != minus.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: plus.len(),
            found: minus.len(),
        });
    }
    let out: Vec<f64> = plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (p - m) / (2.0 * step))
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::NonFinite {
            what: "vector field".into(),
        });
    }
    Ok(out)
}

/// Splittable seed source: every index gets an independent, reproducible
/// 64-bit seed (SplitMix64 finalizer over `base + index * golden`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSequence {
    base: u64,
}

impl SeedSequence {
    pub fn new(base: u64) -> Self {
        Self { base }
    }

    pub fn derive(&self, index: u64) -> u64 {
        let mut z = self
            .base
            .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive(index))
    }
}

/// Draws a symmetric trace-zero matrix: uniform entries on [-1, 1],
/// symmetrized, then projected onto trace zero.
pub fn random_symmetric_traceless_with<R: Rng>(dim: usize, rng: &mut R) -> SquareMatrix {
    let raw = SquareMatrix::from_fn(dim, |_, _| rng.gen_range(-1.0..=1.0));
    let sym = (&raw + &raw.transpose()).scale(0.5);
    let shift = sym.trace() / dim as f64;
    let mut out = sym;
    for i in 0..dim {
        out[(i, i)] -= shift;
    }
    // Re-symmetrize so the output is bitwise symmetric.
    for i in 0..dim {
        for j in (i + 1)..dim {
            out[(j, i)] = out[(i, j)];
        }
    }
    if dim == 1 {
        out[(0, 0)] = 0.0;
    }
    out
}

/// `count` seeded symmetric trace-zero matrices of size `dim`.
pub fn random_symmetric_traceless(dim: usize, count: usize, seed: u64) -> Vec<SquareMatrix> {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_symmetric_traceless_with(dim, &mut rng))
        .collect()
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
