//! Symplectic linear algebra on `R^{2m}`.
//!
//! Coordinates are grouped in planes `(x_i, y_i)` and the structure matrix is
//! block diagonal with blocks `[[0, -1], [1, 0]]`, so `exp(θJ)` rotates each
//! plane counterclockwise by `θ`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

type C64 = Complex<f64>;

pub fn standard_j(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(2 * i, 2 * i + 1)] = -1.0;
        j[(2 * i + 1, 2 * i)] = 1.0;
    }
    j
}

pub fn direct_sum(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// `exp(JH)` for a symmetric `H`.
pub fn symplectic_exp(h: &DMatrix<f64>) -> DMatrix<f64> {
    let j = standard_j(h.nrows() / 2);
    (j * h).exp()
}

pub fn symplectic_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let j = standard_j(a.nrows() / 2);
    -(&j * a.transpose() * &j)
}

fn half_dim(a: &DMatrix<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 || a.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!("dimension {} is not a positive even integer", a.nrows())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dimension("matrix has non-finite entries".into()));
    }
    Ok(a.nrows() / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticCheckReport {
    pub is_symplectic: bool,
    pub defect: f64,
}

pub fn symplectic_defect(a: &DMatrix<f64>) -> f64 {
    let j = standard_j(a.nrows() / 2);
    (a.transpose() * &j * a - &j).amax()
}

pub fn check_symplectic(a: &DMatrix<f64>, tol: f64) -> Result<SymplecticCheckReport> {
    half_dim(a)?;
    let defect = symplectic_defect(a);
    Ok(SymplecticCheckReport { is_symplectic: defect <= tol, defect })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticPair {
    /// First-kind angle in `(-π, π]`.
    pub angle: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicPair {
    pub sign: i8,
    pub modulus: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenClassification {
    pub elliptic_pairs: Vec<EllipticPair>,
    pub hyperbolic_pairs: Vec<HyperbolicPair>,
    pub unit_block_dim: usize,
    pub complex_quadruples: usize,
}

impl EigenClassification {
    pub fn dim(&self) -> usize {
        2 * self.elliptic_pairs.iter().map(|e| e.multiplicity).sum::<usize>()
            + 2 * self.hyperbolic_pairs.iter().map(|h| h.multiplicity).sum::<usize>()
            + self.unit_block_dim
            + 4 * self.complex_quadruples
    }

    pub fn rho(&self) -> C64 {
        let mut z = C64::new(1.0, 0.0);
        for e in &self.elliptic_pairs {
            z *= C64::from_polar(1.0, e.angle * e.multiplicity as f64);
        }
        for h in &self.hyperbolic_pairs {
            if h.sign < 0 && h.multiplicity % 2 == 1 {
                z = -z;
            }
        }
        z
    }
}

fn degeneracy(z: C64, size: usize) -> Error {
    Error::Degeneracy { re: z.re, im: z.im, size }
}

/// Single-linkage clusters of complex points at radius `r`.
fn clusters(points: &[C64], r: f64) -> Vec<Vec<C64>> {
    let mut seen = vec![false; points.len()];
    let mut out = Vec::new();
    for s in 0..points.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut group = vec![points[s]];
        let mut i = 0;
        while i < group.len() {
            for t in 0..points.len() {
                if !seen[t] && (points[t] - group[i]).norm() <= r {
                    seen[t] = true;
                    group.push(points[t]);
                }
            }
            i += 1;
        }
        out.push(group);
    }
    out
}

/// Signature counts of the Krein form `-i v*Jv` on the generalized eigenspace
/// of `a` at `c` of dimension `size`.
fn krein_counts(a: &DMatrix<f64>, c: C64, size: usize) -> Result<(usize, usize)> {
    let n = a.nrows();
    let ac: DMatrix<C64> = a.map(|v| C64::new(v, 0.0));
    let shifted = ac - DMatrix::<C64>::identity(n, n) * c;
    let mut p = shifted.clone();
    for _ in 1..size {
        p = &p * &shifted;
    }
    let svd = p.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| degeneracy(c, size))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let mut basis = DMatrix::<C64>::zeros(n, size);
    for (col, &idx) in order.iter().take(size).enumerate() {
        for row in 0..n {
            basis[(row, col)] = v_t[(idx, row)].conj();
        }
    }
    let j: DMatrix<C64> = standard_j(n / 2).map(|v| C64::new(v, 0.0));
    let g = basis.adjoint() * j * &basis * C64::new(0.0, -1.0);
    let g = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(g);
    let scale = eig.eigenvalues.amax().max(1e-300);
    let mut pos = 0;
    let mut neg = 0;
    for &ev in eig.eigenvalues.iter() {
        if ev.abs() <= 1e-9 * scale.max(1.0) {
            return Err(degeneracy(c, size));
        }
        if ev > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    Ok((pos, neg))
}

pub fn eigen_classify(a: &DMatrix<f64>, tol: f64) -> Result<EigenClassification> {
    let m = half_dim(a)?;
    let eigs: Vec<C64> = a.complex_eigenvalues().iter().copied().collect();
    let one = C64::new(1.0, 0.0);

    let mut unit = 0;
    let mut minus_one = Vec::new();
    let mut upper = Vec::new();
    let mut lower = 0usize;
    let mut hyper_out = Vec::new();
    let mut hyper_in = 0usize;
    let mut quad_out = 0usize;
    let mut quad_rest = 0usize;
    // Jordan blocks at ±1 split their eigenvalues by about the square root of the perturbation.
    let near_pm_one = tol.sqrt().max(tol);
    for &z in &eigs {
        if (z - one).norm() <= near_pm_one {
            unit += 1;
        } else if (z + one).norm() <= near_pm_one {
            minus_one.push(z);
        } else if (z.norm() - 1.0).abs() <= tol {
            if z.im > 0.0 {
                upper.push(z);
            } else {
                lower += 1;
            }
        } else if z.im.abs() <= tol {
            if z.norm() > 1.0 {
                hyper_out.push(z.re);
            } else {
                hyper_in += 1;
            }
        } else if z.norm() > 1.0 && z.im > 0.0 {
            quad_out += 1;
        } else {
            quad_rest += 1;
        }
    }

    if unit % 2 != 0 {
        return Err(degeneracy(one, unit));
    }
    if minus_one.len() % 2 != 0 {
        return Err(degeneracy(-one, minus_one.len()));
    }
    if upper.len() != lower {
        let z = upper.first().copied().unwrap_or(one);
        return Err(degeneracy(z, upper.len() + lower));
    }
    if hyper_out.len() != hyper_in {
        let z = C64::new(hyper_out.first().copied().unwrap_or(0.0), 0.0);
        return Err(degeneracy(z, hyper_out.len() + hyper_in));
    }
    if 3 * quad_out != quad_rest {
        return Err(degeneracy(C64::new(0.0, 0.0), quad_out + quad_rest));
    }

    let mut elliptic = Vec::new();
    for group in clusters(&upper, tol) {
        let c = group.iter().sum::<C64>() / group.len() as f64;
        let theta = c.arg();
        let (pos, neg) = krein_counts(a, c, group.len())?;
        if pos > 0 {
            elliptic.push(EllipticPair { angle: theta, multiplicity: pos });
        }
        if neg > 0 {
            elliptic.push(EllipticPair { angle: -theta, multiplicity: neg });
        }
    }
    if !minus_one.is_empty() {
        elliptic.push(EllipticPair {
            angle: std::f64::consts::PI,
            multiplicity: minus_one.len() / 2,
        });
    }
    elliptic.sort_by(|x, y| x.angle.total_cmp(&y.angle));

    let mut hyperbolic: Vec<HyperbolicPair> = Vec::new();
    hyper_out.sort_by(f64::total_cmp);
    for x in hyper_out {
        let sign = if x < 0.0 { -1 } else { 1 };
        match hyperbolic
            .iter_mut()
            .find(|h| h.sign == sign && (h.modulus - x.abs()).abs() <= tol)
        {
            Some(h) => h.multiplicity += 1,
            None => hyperbolic.push(HyperbolicPair { sign, modulus: x.abs(), multiplicity: 1 }),
        }
    }

    let out = EigenClassification {
        elliptic_pairs: elliptic,
        hyperbolic_pairs: hyperbolic,
        unit_block_dim: unit,
        complex_quadruples: quad_out,
    };
    if out.dim() != 2 * m {
        return Err(degeneracy(one, out.dim()));
    }
    Ok(out)
}

pub fn rho(a: &DMatrix<f64>, tol: f64) -> Result<C64> {
    Ok(eigen_classify(a, tol)?.rho())
}

fn symmetric_eigenvalues(q: &DMatrix<f64>) -> Result<Vec<f64>> {
    if q.nrows() != q.ncols() {
        return Err(Error::Dimension("quadratic form must be square".into()));
    }
    if q.nrows() == 0 {
        return Ok(Vec::new());
    }
    let sym = (q + q.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym).eigenvalues.iter().copied().collect())
}

pub fn signature(q: &DMatrix<f64>, tol: f64) -> Result<i64> {
    let ev = symmetric_eigenvalues(q)?;
    let pos = ev.iter().filter(|&&e| e > tol).count() as i64;
    let neg = ev.iter().filter(|&&e| e < -tol).count() as i64;
    Ok(pos - neg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticFormInvariants {
    pub sgn: i64,
    pub nullity: usize,
    pub half_dim: usize,
}

impl QuadraticFormInvariants {
    /// `b₊ − b₋`.
    pub fn b_difference(&self) -> i64 {
        self.sgn
    }

    /// `b₀ + b₊ + ν₀`.
    pub fn upper_count(&self) -> i64 {
        (self.sgn + self.nullity as i64) / 2
    }

    /// `b₀ + b₋ + ν₀`.
    pub fn lower_count(&self) -> i64 {
        (self.nullity as i64 - self.sgn) / 2
    }
}

pub fn quad_invariants(q: &DMatrix<f64>, tol: f64) -> Result<QuadraticFormInvariants> {
    let ev = symmetric_eigenvalues(q)?;
    let pos = ev.iter().filter(|&&e| e > tol).count() as i64;
    let neg = ev.iter().filter(|&&e| e < -tol).count() as i64;
    Ok(QuadraticFormInvariants {
        sgn: pos - neg,
        nullity: ev.len() - (pos + neg) as usize,
        half_dim: q.nrows() / 2,
    })
}

/// Wire format `{"dim": 2m, "rows": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
}

impl From<&DMatrix<f64>> for MatrixJson {
    fn from(a: &DMatrix<f64>) -> Self {
        MatrixJson {
            dim: a.nrows(),
            rows: rows_of(a),
        }
    }
}

impl TryFrom<&MatrixJson> for DMatrix<f64> {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        let a = matrix_from_rows(&j.rows)?;
        if a.nrows() != j.dim {
            return Err(Error::Input(format!("declared dim {} but {} rows given", j.dim, a.nrows())));
        }
        Ok(a)
    }
}

pub fn rows_of(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input("matrix rows must all have length equal to the row count".into()));
    }
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    Ok(a)
}
