#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use sympidx::homalg::{FilteredComplex, RationalMatrix, Q};
use sympidx::orbitmodel::{DegenerateBlock, OrbitModel, Rotation};
use sympidx::pathindex::GeneratedPath;

pub fn frac_dist(x: f64) -> f64 {
    let f = x - x.floor();
    f.min(1.0 - f)
}

/// Irrational-looking rotation with `‖kλ‖ ≥ gap` for `1 ≤ k ≤ k_max`.
pub fn rotation<R: Rng>(rng: &mut R, k_max: i64, gap: f64) -> f64 {
    loop {
        let x: f64 = rng.gen_range(0.02..0.98);
        if (1..=k_max).all(|k| frac_dist(k as f64 * x) >= gap) {
            return x;
        }
    }
}

pub fn degenerate_block<R: Rng>(rng: &mut R, d: usize, plane_decomposable: bool) -> DegenerateBlock {
    let lo = if plane_decomposable { d as i64 } else { 1 };
    loop {
        let u = rng.gen_range(lo..=2 * d as i64);
        let s = rng.gen_range(-u..=u);
        let b = DegenerateBlock { half_dim: d, sgn: s, nullity: u };
        if b.validate().is_ok() {
            return b;
        }
    }
}

pub struct ModelShape {
    pub max_half_dim: usize,
    pub allow_rational: bool,
    pub allow_degenerate: bool,
    pub allow_hyperbolic: bool,
    /// Upper bound on irrational rotations.
    pub max_irrational: usize,
    /// Rotations keep `‖kλ‖ ≥ gap` for `k ≤ gap_k`.
    pub gap: f64,
    pub gap_k: i64,
    pub plane_decomposable: bool,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            max_half_dim: 3,
            allow_rational: true,
            allow_degenerate: true,
            allow_hyperbolic: true,
            max_irrational: 3,
            gap: 0.0,
            gap_k: 1,
            plane_decomposable: false,
        }
    }
}

pub fn random_model<R: Rng>(rng: &mut R, shape: &ModelShape, m: usize) -> OrbitModel {
    let mut rotations = Vec::new();
    let mut hyperbolic_planes = 0;
    let mut degenerate = None;
    let mut left = m;
    let mut irr = 0;
    while left > 0 {
        let pick = rng.gen_range(0..4);
        match pick {
            0 if irr < shape.max_irrational => {
                rotations.push(Rotation::Irrational(rotation(rng, shape.gap_k, shape.gap)));
                irr += 1;
                left -= 1;
            }
            1 if shape.allow_rational => {
                let q = rng.gen_range(2..=6);
                let p = rng.gen_range(1..q);
                let g = num_integer::gcd(p, q);
                rotations.push(Rotation::Rational(p / g, q / g));
                left -= 1;
            }
            2 if shape.allow_hyperbolic => {
                hyperbolic_planes += 1;
                left -= 1;
            }
            3 if shape.allow_degenerate && degenerate.is_none() => {
                let d = rng.gen_range(1..=left);
                degenerate = Some(degenerate_block(rng, d, shape.plane_decomposable));
                left -= d;
            }
            _ => {}
        }
    }
    let hyperbolic_index = if hyperbolic_planes > 0 { rng.gen_range(-3..=6) } else { 0 };
    OrbitModel {
        label: String::new(),
        loop_index: 2 * rng.gen_range(-2..=4),
        rotations,
        hyperbolic_index,
        hyperbolic_planes,
        degenerate,
        action: None,
    }
}

/// Shifts the loop so that `μ₋ ≥ m + 2 + extra`.
pub fn make_dynamically_convex(model: &mut OrbitModel, extra: i64) {
    let m = model.half_dim() as i64;
    let lo = sympidx::orbitmodel::mu_pm(model, 1).unwrap().0;
    let need = m + 2 + extra - lo;
    model.loop_index += 2 * ((need + 1).div_euclid(2));
}

/// Direct Bott-type index of an ellipsoid orbit: `n − 1 + 2 Σ_j ⌊k r_i²/r_j²⌋`.
pub fn ellipsoid_cz(radii_sq: &[f64], i: usize, k: i64) -> i64 {
    let n = radii_sq.len() as i64;
    let others: i64 = (0..radii_sq.len())
        .filter(|&j| j != i)
        .map(|j| 2 * (k as f64 * radii_sq[i] / radii_sq[j]).floor() as i64)
        .sum();
    n - 1 + 2 * k + others
}

/// Brute-force spectral merge: sort all `π r_j² k` with `k ≤ count`.
pub fn brute_spectrum(radii_sq: &[f64], count: usize) -> Vec<(f64, usize, i64)> {
    let mut all: Vec<(f64, usize, i64)> = Vec::new();
    for (i, r) in radii_sq.iter().enumerate() {
        for k in 1..=count as i64 {
            all.push((PI * r * k as f64, i, k));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all.truncate(count);
    all
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-scale..scale));
    (&a + a.transpose()) * 0.5
}

/// Piecewise-linear generator with random symmetric samples.
pub fn random_generated_path<R: Rng>(rng: &mut R, m: usize, scale: f64, steps: usize) -> GeneratedPath {
    let pieces = rng.gen_range(1..=3);
    let mut samples = Vec::new();
    for i in 0..=pieces {
        samples.push((i as f64 / pieces as f64, random_symmetric(rng, 2 * m, scale)));
    }
    GeneratedPath { m, hamiltonian_samples: samples, integration_steps: steps }
}

fn rank_of(columns: &[Vec<Q>], len: usize) -> usize {
    if columns.is_empty() {
        return 0;
    }
    RationalMatrix::from_columns(len, columns).rank()
}

/// `dim E^r_{p,n} = dim Z^r_{p,n} − dim(Z^{r−1}_{p−1,n} + ∂Z^{r−1}_{p+r−1,n+1})`,
/// from subspaces of the chain complex only.
pub fn page_dims_oracle(fc: &FilteredComplex, r: i64) -> BTreeMap<(i64, i64), usize> {
    let len = fc.len();
    let mut out = BTreeMap::new();
    let mut bidegrees: Vec<(i64, i64)> = fc.generators.iter().map(|g| (g.filtration, g.degree)).collect();
    bidegrees.sort();
    bidegrees.dedup();
    for (p, n) in bidegrees {
        let z = fc.cycles_basis(r, p, n);
        let mut b = fc.cycles_basis(r - 1, p - 1, n);
        b.extend(fc.cycles_basis(r - 1, p + r - 1, n + 1).iter().map(|v| fc.apply(v)));
        let dim = z.len() - rank_of(&b, len);
        if dim > 0 {
            out.insert((p, n), dim);
        }
    }
    out
}

/// `dim C_n − rank ∂_n − rank ∂_{n+1}` per degree.
pub fn homology_oracle(boundary: &RationalMatrix, degrees: &[i64]) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    let n = degrees.len();
    let mut ds: Vec<i64> = degrees.to_vec();
    ds.sort();
    ds.dedup();
    let rank_from = |d: i64| {
        let cols: Vec<Vec<Q>> = (0..n).filter(|&j| degrees[j] == d).map(|j| boundary.column(j)).collect();
        rank_of(&cols, n)
    };
    for d in ds {
        let size = degrees.iter().filter(|&&x| x == d).count();
        out.insert(d, size - rank_from(d) - rank_from(d + 1));
    }
    out
}

/// Harmonic vectors supported on the given coordinates: `∂̄v = 0` and `∂̄ᵀv = 0`.
pub fn harmonic_dim_on(dbar: &RationalMatrix, support: &[usize]) -> usize {
    let n = dbar.rows();
    let stacked = dbar.stack(&dbar.transpose());
    let cols: Vec<Vec<Q>> = support.iter().map(|&j| stacked.column(j)).collect();
    support.len() - if cols.is_empty() { 0 } else { RationalMatrix::from_columns(2 * n, &cols).rank() }
}

pub fn is_zero(v: &[Q]) -> bool {
    v.iter().all(num_traits::Zero::is_zero)
}

/// `(μ₋, μ₊)` summed block by block; negative iterates by `μ±(Φ⁻ᵏ) = −μ∓(Φᵏ)`.
pub fn oracle_mu_pm(model: &OrbitModel, k: i64) -> (i64, i64) {
    assert!(k != 0);
    if k < 0 {
        let (lo, hi) = oracle_mu_pm(model, -k);
        return (-hi, -lo);
    }
    let mut lo = k * model.loop_index + k * model.hyperbolic_index;
    let mut hi = lo;
    for r in &model.rotations {
        match *r {
            Rotation::Rational(p, q) => {
                if (k * p) % q == 0 {
                    lo += 2 * k * p / q - 1;
                    hi += 2 * k * p / q + 1;
                } else {
                    let v = 2 * (k * p).div_euclid(q) + 1;
                    lo += v;
                    hi += v;
                }
            }
            Rotation::Irrational(x) => {
                let v = 2 * (k as f64 * x).floor() as i64 + 1;
                lo += v;
                hi += v;
            }
        }
    }
    if let Some(b) = model.degenerate {
        lo += (b.sgn - b.nullity) / 2;
        hi += (b.sgn + b.nullity) / 2;
    }
    (lo, hi)
}

pub fn oracle_mean(model: &OrbitModel, k: i64) -> f64 {
    let rot: f64 = model.rotations.iter().map(|r| 2.0 * r.value()).sum();
    k as f64 * ((model.loop_index + model.hyperbolic_index) as f64 + rot)
}

pub fn oracle_nullity(model: &OrbitModel, k: i64) -> usize {
    let rational = model
        .rotations
        .iter()
        .filter(|r| matches!(r, Rotation::Rational(p, q) if (k * p) % q == 0))
        .count();
    rational + model.degenerate.map_or(0, |b| b.half_dim)
}

/// Smallest singular value of `A − I`.
pub fn gap_from_identity(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    (a - DMatrix::<f64>::identity(n, n)).singular_values().min()
}
