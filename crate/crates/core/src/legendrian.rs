//! Pointwise algebra of a Legendrian submanifold `Mⁿ ⊂ ℝ ×_f N(c)`.
//!
//! Normal directions are indexed `α = 0..n` on disk and in this API, with
//! `u_α = φe_{α}` for `α < n` and `u_n = ξ`. Mathematical one-based labels
//! (`α = 1..n+1`) appear only in violation reports.

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::tensor::{commutator, compensated_sum, SquareMatrix};

/// Tolerance for instance invariants.
pub const INSTANCE_TOLERANCE: f64 = 1e-12;
/// Tolerance for agreement of two computation paths.
pub const PATH_TOLERANCE: f64 = 1e-10;

/// Second fundamental forms of a Legendrian submanifold at one point, in
/// adapted orthonormal frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendrianPointInstance {
    pub n: usize,
    pub c: f64,
    #[serde(alias = "f_val")]
    pub f: f64,
    pub f_prime: f64,
    /// `h[α][i][j] = ⟨h(e_i, e_j), u_α⟩`.
    pub h: Vec<Vec<Vec<f64>>>,
    pub h_star: Vec<Vec<Vec<f64>>>,
}

/// Which second fundamental form a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormName {
    H,
    HStar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Malformed parameters or array shapes.
    Shape { message: String },
    /// `h[α][i][j] ≠ h[α][j][i]`; indices are one-based.
    Asymmetric {
        form: FormName,
        alpha: usize,
        i: usize,
        j: usize,
        value: f64,
    },
    /// ξ-slice entry differs from `−(f′/f) δ_ij`; indices are one-based.
    XiSlice {
        form: FormName,
        alpha: usize,
        i: usize,
        j: usize,
        value: f64,
        expected: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Shape { message } => write!(f, "shape: {message}"),
            Violation::Asymmetric { form, alpha, i, j, value } => {
                write!(f, "{form:?}[{alpha}][{i}][{j}] asymmetric by {value:e}")
            }
            Violation::XiSlice { form, alpha, i, j, value, expected } => write!(
                f,
                "{form:?}[{alpha}][{i}][{j}] = {value} but the ξ-slice requires {expected}"
            ),
        }
    }
}

impl LegendrianPointInstance {
    /// Instance with all φ-slices zero and the ξ-slices forced by `f′/f`.
    pub fn umbilic(n: usize, c: f64, f: f64, f_prime: f64) -> Self {
        let mut h = vec![vec![vec![0.0; n]; n]; n + 1];
        for (i, row) in h[n].iter_mut().enumerate() {
            row[i] = -(f_prime / f);
        }
        Self {
            n,
            c,
            f,
            f_prime,
            h_star: h.clone(),
            h,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text)
            .map_err(|e| GeometryError::InvalidInstance(e.to_string()))?;
        inst.check()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    /// `f′/f`.
    pub fn warp_ratio(&self) -> f64 {
        self.f_prime / self.f
    }

    /// `c/4f² − f′²/f²`.
    pub fn curvature_constant(&self) -> f64 {
        self.c / (4.0 * self.f * self.f) - self.warp_ratio().powi(2)
    }

    /// All invariant violations; empty means the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.n;
        let mut out = Vec::new();
        if n < 2 {
            out.push(Violation::Shape {
                message: format!("n = {n} but n ≥ 2 is required"),
            });
        }
        if !(self.f > 0.0 && self.f.is_finite()) {
            out.push(Violation::Shape {
                message: format!("f = {} must be positive", self.f),
            });
        }
        if !self.c.is_finite() || !self.f_prime.is_finite() {
            out.push(Violation::Shape {
                message: "c and f_prime must be finite".into(),
            });
        }
        for (form, arr) in [(FormName::H, &self.h), (FormName::HStar, &self.h_star)] {
            let shape_ok = arr.len() == n + 1
                && arr.iter().all(|s| s.len() == n && s.iter().all(|r| r.len() == n));
            if !shape_ok {
                out.push(Violation::Shape {
                    message: format!("{form:?} must have shape [{}][{n}][{n}]", n + 1),
                });
                continue;
            }
            if arr.iter().flatten().flatten().any(|v| !v.is_finite()) {
                out.push(Violation::Shape {
                    message: format!("{form:?} has non-finite entries"),
                });
            }
            for (a, slice) in arr.iter().enumerate() {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let d = slice[i][j] - slice[j][i];
                        if d.abs() > INSTANCE_TOLERANCE {
                            out.push(Violation::Asymmetric {
                                form,
                                alpha: a + 1,
                                i: i + 1,
                                j: j + 1,
                                value: d,
                            });
                        }
                    }
                }
            }
            if self.f > 0.0 {
                let ratio = self.warp_ratio();
                for i in 0..n {
                    for j in 0..n {
                        let expected = if i == j { -ratio } else { 0.0 };
                        let value = arr[n][i][j];
                        if (value - expected).abs() > INSTANCE_TOLERANCE {
                            out.push(Violation::XiSlice {
                                form,
                                alpha: n + 1,
                                i: i + 1,
                                j: j + 1,
                                value,
                                expected,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// `Ok(())` when valid, otherwise an error listing every violation.
    pub fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(GeometryError::InvalidInstance(
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
            ))
        }
    }

    fn slice(&self, form: FormName, alpha: usize) -> SquareMatrix {
        let arr = match form {
            FormName::H => &self.h,
            FormName::HStar => &self.h_star,
        };
        SquareMatrix::from_fn(self.n, |i, j| arr[alpha][i][j])
    }
}

/// Mean curvature vectors (normal coordinates) and squared norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCurvatures {
    pub h_mean: Vec<f64>,
    pub h_star_mean: Vec<f64>,
    pub h_zero_mean: Vec<f64>,
    pub h_mean_sq: f64,
    pub h_star_mean_sq: f64,
    pub h_zero_mean_sq: f64,
    pub h_sq: f64,
    pub h_star_sq: f64,
    pub h_zero_sq: f64,
    pub tau_sq: f64,
    pub tau_star_sq: f64,
    pub tau_zero_sq: f64,
}

fn form_stats(arr: &[Vec<Vec<f64>>], n: usize) -> (Vec<f64>, f64, f64, f64) {
    let mean: Vec<f64> = arr
        .iter()
        .map(|s| compensated_sum((0..n).map(|i| s[i][i])) / n as f64)
        .collect();
    let mean_sq = compensated_sum(mean.iter().map(|v| v * v));
    let full_sq = compensated_sum(arr.iter().flatten().flatten().map(|v| v * v));
    // ‖h − H g‖² summed directly
    let direct = compensated_sum(arr.iter().zip(&mean).flat_map(|(s, m)| {
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| {
                let v = s[i][j] - if i == j { *m } else { 0.0 };
                v * v
            })
        })
    }));
    (mean, mean_sq, full_sq, direct)
}

fn average_form(inst: &LegendrianPointInstance) -> Vec<Vec<Vec<f64>>> {
    inst.h
        .iter()
        .zip(&inst.h_star)
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| 0.5 * (x + y)).collect())
                .collect()
        })
        .collect()
}

/// `H = (1/n) tr h`, `h⁰ = (h + h*)/2`, traceless parts and their squared norms.
/// `‖τ‖²` is computed directly and cross-checked against `‖h‖² − n‖H‖²`.
pub fn means_and_traceless(inst: &LegendrianPointInstance) -> Result<MeanCurvatures> {
    inst.check()?;
    let n = inst.n;
    let h0 = average_form(inst);
    let (hm, hm2, h2, tau) = form_stats(&inst.h, n);
    let (hsm, hsm2, hs2, tau_s) = form_stats(&inst.h_star, n);
    let (h0m, h0m2, h02, tau_0) = form_stats(&h0, n);
    for (name, direct, full, mean_sq) in [
        ("tau", tau, h2, hm2),
        ("tau_star", tau_s, hs2, hsm2),
        ("tau_zero", tau_0, h02, h0m2),
    ] {
        let identity = full - n as f64 * mean_sq;
        if (direct - identity).abs() > 1e-12 * full.max(1.0) {
            return Err(GeometryError::PathDisagreement {
                quantity: name,
                path_a: direct,
                path_b: identity,
            });
        }
    }
    Ok(MeanCurvatures {
        h_mean: hm,
        h_star_mean: hsm,
        h_zero_mean: h0m,
        h_mean_sq: hm2,
        h_star_mean_sq: hsm2,
        h_zero_mean_sq: h0m2,
        h_sq: h2,
        h_star_sq: hs2,
        h_zero_sq: h02,
        tau_sq: tau,
        tau_star_sq: tau_s,
        tau_zero_sq: tau_0,
    })
}

/// Shape operators for one normal direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperators {
    /// `A_α`, dual to `h*`: `⟨h*(X,Y), u_α⟩ = g(A_α X, Y)`.
    pub a: SquareMatrix,
    /// `A*_α`, dual to `h`.
    pub a_star: SquareMatrix,
    pub a_zero: SquareMatrix,
    pub s: SquareMatrix,
    pub s_star: SquareMatrix,
    pub s_zero: SquareMatrix,
}

fn traceless(m: &SquareMatrix) -> SquareMatrix {
    let n = m.dim();
    let mean = m.trace() / n as f64;
    SquareMatrix::from_fn(n, |i, j| m[(i, j)] - if i == j { mean } else { 0.0 })
}

/// Shape operators `A, A*, A⁰` and their traceless parts for every normal direction.
pub fn shape_operators(inst: &LegendrianPointInstance) -> Result<Vec<ShapeOperators>> {
    inst.check()?;
    Ok((0..=inst.n)
        .map(|alpha| {
            let a = inst.slice(FormName::HStar, alpha);
            let a_star = inst.slice(FormName::H, alpha);
            let a_zero = (&a + &a_star).scale(0.5);
            ShapeOperators {
                s: traceless(&a),
                s_star: traceless(&a_star),
                s_zero: traceless(&a_zero),
                a,
                a_star,
                a_zero,
            }
        })
        .collect())
}

/// Which connection a sectional curvature refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Nabla,
    NablaStar,
}

fn normal_inner(a: &[Vec<Vec<f64>>], b: &[Vec<Vec<f64>>], ia: (usize, usize), ib: (usize, usize)) -> f64 {
    a.iter()
        .zip(b)
        .map(|(sa, sb)| sa[ia.0][ia.1] * sb[ib.0][ib.1])
        .sum()
}

/// `g(R(e_i,e_j)e_j,e_i)` from the Gauss equation (zero-based `i ≠ j`).
pub fn gauss_sectional(inst: &LegendrianPointInstance, i: usize, j: usize, which: Which) -> Result<f64> {
    inst.check()?;
    gauss_sectional_unchecked(inst, i, j, which)
}

fn gauss_sectional_unchecked(inst: &LegendrianPointInstance, i: usize, j: usize, which: Which) -> Result<f64> {
    if i == j {
        return Err(GeometryError::InvalidArgument(
            "sectional curvature needs two distinct frame vectors".into(),
        ));
    }
    if i >= inst.n || j >= inst.n {
        return Err(GeometryError::InvalidArgument(format!(
            "frame index out of range for n = {}",
            inst.n
        )));
    }
    let (first, second) = match which {
        Which::Nabla => (&inst.h_star, &inst.h),
        Which::NablaStar => (&inst.h, &inst.h_star),
    };
    Ok(inst.curvature_constant() + normal_inner(first, second, (i, i), (j, j))
        - normal_inner(second, first, (i, j), (j, i)))
}

/// `ρ^{∇,∇*}`: average over orthonormal pairs of `½[sec_∇ + sec_∇*]`.
/// Checked against the closed form in mean curvatures and traceless norms.
pub fn rho_statistical(inst: &LegendrianPointInstance) -> Result<f64> {
    let m = means_and_traceless(inst)?;
    let n = inst.n;
    let nn = (n * (n - 1)) as f64;
    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in (i + 1)..n {
            terms.push(gauss_sectional_unchecked(inst, i, j, Which::Nabla)?);
            terms.push(gauss_sectional_unchecked(inst, i, j, Which::NablaStar)?);
        }
    }
    let path_a = compensated_sum(terms) / nn;
    let path_b = compensated_sum([
        inst.curvature_constant(),
        2.0 * m.h_zero_mean_sq,
        -2.0 / nn * m.tau_zero_sq,
        -0.5 * m.h_mean_sq,
        0.5 / nn * m.tau_sq,
        -0.5 * m.h_star_mean_sq,
        0.5 / nn * m.tau_star_sq,
    ]);
    agree("rho", path_a, path_b)?;
    Ok(path_a)
}

fn agree(quantity: &'static str, a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > PATH_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
        return Err(GeometryError::PathDisagreement {
            quantity,
            path_a: a,
            path_b: b,
        });
    }
    Ok(())
}

fn delta_term(i: usize, j: usize, r: usize, s: usize) -> f64 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    d(i, r) * d(j, s) - d(i, s) * d(j, r)
}

/// The summands `⟨R⊥(e_i,e_j)u_r,u_s⟩ + ⟨R*⊥(e_i,e_j)u_r,u_s⟩` for all
/// normal pairs `r < s` (including `ξ`) and frame pairs `i < j`.
pub fn normal_curvature_terms(inst: &LegendrianPointInstance) -> Result<Vec<(usize, usize, usize, usize, f64)>> {
    let ops = shape_operators(inst)?;
    let n = inst.n;
    let k = 2.0 * inst.c / (4.0 * inst.f * inst.f);
    let mut out = Vec::new();
    for r in 0..=n {
        for s in (r + 1)..=n {
            let m = &commutator(&ops[r].a_star, &ops[s].a)? + &commutator(&ops[r].a, &ops[s].a_star)?;
            for i in 0..n {
                for j in (i + 1)..n {
                    // ⟨φe_i, u_r⟩ = δ_ir; u_n = ξ never matches
                    let v = m.pair(i, j) - k * delta_term(i, j, r, s);
                    out.push((r, s, i, j, v));
                }
            }
        }
    }
    Ok(out)
}

/// `ρ⊥^{∇,∇*}`, by the definitional normal-curvature sum and by the
/// `A⁰`-combination `4[A⁰_r,A⁰_s] − [A_r,A_s] − [A*_r,A*_s]`.
pub fn rho_perp_statistical(inst: &LegendrianPointInstance) -> Result<f64> {
    let terms = normal_curvature_terms(inst)?;
    let n = inst.n;
    let nn = (n * (n - 1)) as f64;
    let path_a = compensated_sum(terms.iter().map(|t| t.4 * t.4)).sqrt() / nn;

    let ops = shape_operators(inst)?;
    let k = 2.0 * inst.c / (4.0 * inst.f * inst.f);
    let mut sq = Vec::new();
    for r in 0..n {
        for s in (r + 1)..n {
            let c0 = commutator(&ops[r].a_zero, &ops[s].a_zero)?.scale(4.0);
            let ca = commutator(&ops[r].a, &ops[s].a)?;
            let cs = commutator(&ops[r].a_star, &ops[s].a_star)?;
            let m = &(&c0 - &ca) - &cs;
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = m.pair(i, j) - k * delta_term(i, j, r, s);
                    sq.push(v * v);
                }
            }
        }
    }
    let path_b = compensated_sum(sq).sqrt() / nn;
    agree("rho_perp", path_a, path_b)?;
    Ok(path_a)
}

/// `ρ⁰ = (c/4f² − f′²/f²) + ‖H⁰‖² − ‖τ⁰‖²/(n(n−1))`.
pub fn rho_levicivita(inst: &LegendrianPointInstance) -> Result<f64> {
    let m = means_and_traceless(inst)?;
    let nn = (inst.n * (inst.n - 1)) as f64;
    Ok(compensated_sum([
        inst.curvature_constant(),
        m.h_zero_mean_sq,
        -m.tau_zero_sq / nn,
    ]))
}

/// All normalized curvature scalars of an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureScalars {
    pub rho: f64,
    pub rho_perp: f64,
    pub rho_zero: f64,
    pub h_mean_sq: f64,
    pub h_star_mean_sq: f64,
    pub h_zero_mean_sq: f64,
    pub tau_sq: f64,
    pub tau_star_sq: f64,
    pub tau_zero_sq: f64,
}

pub fn curvature_scalars(inst: &LegendrianPointInstance) -> Result<CurvatureScalars> {
    let m = means_and_traceless(inst)?;
    Ok(CurvatureScalars {
        rho: rho_statistical(inst)?,
        rho_perp: rho_perp_statistical(inst)?,
        rho_zero: rho_levicivita(inst)?,
        h_mean_sq: m.h_mean_sq,
        h_star_mean_sq: m.h_star_mean_sq,
        h_zero_mean_sq: m.h_zero_mean_sq,
        tau_sq: m.tau_sq,
        tau_star_sq: m.tau_star_sq,
        tau_zero_sq: m.tau_zero_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::frobenius_norm_sq;

    fn umbilic() -> LegendrianPointInstance {
        LegendrianPointInstance::umbilic(2, 0.0, 1.0, 1.0)
    }

    fn zero(n: usize, c: f64) -> LegendrianPointInstance {
        LegendrianPointInstance::umbilic(n, c, 1.0, 0.0)
    }

    /// A fixed non-trivial instance with n = 3.
    fn sample() -> LegendrianPointInstance {
        let mut inst = LegendrianPointInstance::umbilic(3, 1.5, 1.3, -0.4);
        let vals = [0.3, -0.7, 0.2, 0.9, -0.1, 0.5];
        for a in 0..3 {
            let mut k = a;
            for i in 0..3 {
                for j in i..3 {
                    let v = vals[k % 6] * (a as f64 + 1.0) / 2.0;
                    let w = vals[(k + 2) % 6] - 0.1 * a as f64;
                    inst.h[a][i][j] = v;
                    inst.h[a][j][i] = v;
                    inst.h_star[a][i][j] = w;
                    inst.h_star[a][j][i] = w;
                    k += 1;
                }
            }
        }
        inst
    }

    #[test]
    fn validation_examples() {
        assert!(umbilic().validate().is_empty());
        let mut bad = umbilic();
        bad.h[2][0][1] = 0.5;
        let v = bad.validate();
        assert!(v.iter().any(|x| matches!(x, Violation::XiSlice { alpha: 3, i: 1, j: 2, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::Asymmetric { alpha: 3, i: 1, j: 2, .. })));
        assert!(zero(3, 0.0).validate().is_empty());
        let mut cosym = zero(2, 0.0);
        cosym.h[2][0][0] = -1.0;
        assert!(!cosym.validate().is_empty());
        let mut shape = umbilic();
        shape.h.pop();
        assert!(matches!(shape.validate()[0], Violation::Shape { .. }));
    }

    #[test]
    fn json_round_trip_and_alias() {
        let inst = sample();
        let back = LegendrianPointInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        let text = r#"{"n":2,"c":0,"f_val":1,"f_prime":0,
            "h":[[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]]],
            "h_star":[[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]]]}"#;
        assert_eq!(LegendrianPointInstance::from_json(text).unwrap(), zero(2, 0.0));
        assert!(matches!(
            LegendrianPointInstance::from_json(r#"{"n":2}"#),
            Err(GeometryError::InvalidInstance(_))
        ));
    }

    #[test]
    fn means_examples() {
        let m = means_and_traceless(&umbilic()).unwrap();
        assert_eq!((m.h_mean_sq, m.h_star_mean_sq, m.h_zero_mean_sq), (1.0, 1.0, 1.0));
        assert_eq!((m.tau_sq, m.tau_star_sq, m.tau_zero_sq), (0.0, 0.0, 0.0));
        assert_eq!(m.h_mean, vec![0.0, 0.0, -1.0]);
        let z = means_and_traceless(&zero(3, 0.0)).unwrap();
        assert_eq!(z.h_sq + z.tau_sq + z.h_mean_sq, 0.0);
        let s = means_and_traceless(&sample()).unwrap();
        assert!(4.0 * s.h_zero_mean_sq <= 2.0 * s.h_mean_sq + 2.0 * s.h_star_mean_sq + 1e-12);
    }

    #[test]
    fn shape_operator_examples() {
        let ops = shape_operators(&umbilic()).unwrap();
        assert_eq!(ops[2].a, SquareMatrix::identity(2).scale(-1.0));
        assert_eq!(ops[2].s.max_abs(), 0.0);
        let ops = shape_operators(&sample()).unwrap();
        for a in 0..4 {
            assert!(ops[a].s.trace().abs() < 1e-12);
            for b in 0..4 {
                let x = commutator(&ops[a].s, &ops[b].s).unwrap();
                let y = commutator(&ops[a].a, &ops[b].a).unwrap();
                assert!((&x - &y).max_abs() < 1e-12);
            }
        }
        for op in shape_operators(&zero(3, 1.0)).unwrap() {
            assert_eq!(op.a.max_abs() + op.a_star.max_abs() + op.s_zero.max_abs(), 0.0);
        }
        // A is dual to h*, A* to h
        let inst = sample();
        let ops = shape_operators(&inst).unwrap();
        assert_eq!(ops[1].a[(0, 2)], inst.h_star[1][0][2]);
        assert_eq!(ops[1].a_star[(0, 2)], inst.h[1][0][2]);
    }

    #[test]
    fn sectional_examples() {
        for w in [Which::Nabla, Which::NablaStar] {
            assert_eq!(gauss_sectional(&umbilic(), 0, 1, w).unwrap(), 0.0);
            assert_eq!(gauss_sectional(&zero(3, 0.0), 0, 2, w).unwrap(), 0.0);
            assert_eq!(gauss_sectional(&zero(3, 4.0), 1, 2, w).unwrap(), 1.0);
        }
        assert!(gauss_sectional(&umbilic(), 1, 1, Which::Nabla).is_err());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_statistical(&umbilic()).unwrap(), 0.0);
        assert_eq!(rho_statistical(&zero(2, 0.0)).unwrap(), 0.0);
        assert!((rho_statistical(&zero(4, 4.0)).unwrap() - 1.0).abs() < 1e-15);
        rho_statistical(&sample()).unwrap();
    }

    #[test]
    fn rho_perp_examples() {
        assert_eq!(rho_perp_statistical(&umbilic()).unwrap(), 0.0);
        // zero φ-slices, c = 4, f = 1, n = 2: a single summand −2c/4f² = −2
        assert_eq!(rho_perp_statistical(&zero(2, 4.0)).unwrap(), 1.0);
        // commuting diagonal slices with c = 0
        let mut inst = zero(3, 0.0);
        for a in 0..3 {
            for i in 0..3 {
                inst.h[a][i][i] = (a + i) as f64 * 0.3;
                inst.h_star[a][i][i] = (a * i) as f64 * 0.2 - 0.1;
            }
        }
        assert_eq!(rho_perp_statistical(&inst).unwrap(), 0.0);
        assert!(rho_perp_statistical(&sample()).unwrap() > 0.0);
    }

    #[test]
    fn xi_pairs_contribute_nothing() {
        let inst = sample();
        for (r, s, _, _, v) in normal_curvature_terms(&inst).unwrap() {
            if r == inst.n || s == inst.n {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn rho_zero_examples() {
        assert_eq!(rho_levicivita(&umbilic()).unwrap(), 0.0);
        assert_eq!(rho_levicivita(&zero(2, 0.0)).unwrap(), 0.0);
        assert_eq!(rho_levicivita(&zero(3, 4.0)).unwrap(), 1.0);
    }

    #[test]
    fn traceless_norm_matches_operator_norms() {
        let inst = sample();
        let m = means_and_traceless(&inst).unwrap();
        let ops = shape_operators(&inst).unwrap();
        let total: f64 = ops.iter().map(|o| frobenius_norm_sq(&o.s_star)).sum();
        assert!((total - m.tau_sq).abs() < 1e-12);
    }

    #[test]
    fn invalid_instance_is_rejected_everywhere() {
        let mut bad = umbilic();
        bad.h_star[2][1][1] = 0.0;
        assert!(means_and_traceless(&bad).is_err());
        assert!(rho_statistical(&bad).is_err());
        assert!(rho_perp_statistical(&bad).is_err());
        assert!(rho_levicivita(&bad).is_err());
    }
}
