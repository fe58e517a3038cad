//! Numeric indices of paths in Sp(2m) that start at the identity.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symlin::{self, eigen_classify, standard_j};

pub const TOL_ENV: &str = "SYMPIDX_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub symplectic: f64,
    pub cluster: f64,
    pub crossing_form: f64,
    /// Minimum of `σ_min(Φ(t) − I)` below which a crossing is declared.
    pub crossing_gap: f64,
    /// Singular values of `Φ(τ) − I` below this span the crossing kernel.
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symplectic: 1e-8,
            cluster: 1e-8,
            crossing_form: 1e-8,
            crossing_gap: 1e-6,
            kernel: 1e-5,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            symplectic: tol,
            cluster: tol,
            crossing_form: tol,
            ..Default::default()
        }
    }

    /// Defaults, with `SYMPIDX_TOL` overriding the symplectic, cluster and form thresholds.
    pub fn from_env() -> Self {
        match std::env::var(TOL_ENV).ok().and_then(|s| s.trim().parse::<f64>().ok()) {
            Some(t) if t > 0.0 && t.is_finite() => Tolerances::uniform(t),
            _ => Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub m: usize,
    pub times: Vec<f64>,
    pub matrices: Vec<DMatrix<f64>>,
}

impl SampledPath {
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = 2 * self.m;
        if self.m == 0 || self.times.len() != self.matrices.len() || self.times.len() < 2 {
            return Err(Error::Input("a sampled path needs m ≥ 1 and at least two samples".into()));
        }
        if self.times[0] != 0.0 || (self.times[self.times.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::Input("sample times must run from 0 to 1".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("sample times must be strictly increasing".into()));
        }
        for (t, a) in self.times.iter().zip(&self.matrices) {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::Dimension(format!("sample at t = {t} is not {n}x{n}")));
            }
            let rep = symlin::check_symplectic(a, tol)?;
            if !rep.is_symplectic {
                return Err(Error::Input(format!(
                    "sample at t = {t} has symplectic defect {:.3e}",
                    rep.defect
                )));
            }
        }
        if (&self.matrices[0] - DMatrix::<f64>::identity(n, n)).amax() > tol {
            return Err(Error::Input("path must start at the identity".into()));
        }
        Ok(())
    }

    pub fn endpoint(&self) -> &DMatrix<f64> {
        self.matrices.last().expect("non-empty path")
    }

    /// The k-fold iterate `t ↦ Φ(kt − j) Φ(1)^j`, reparametrized to `[0, 1]`.
    pub fn iterate(&self, k: usize) -> SampledPath {
        let mut times = Vec::new();
        let mut matrices = Vec::new();
        let end = self.endpoint().clone();
        let mut power = DMatrix::<f64>::identity(2 * self.m, 2 * self.m);
        for j in 0..k {
            let skip = usize::from(j > 0);
            for (t, a) in self.times.iter().zip(&self.matrices).skip(skip) {
                times.push((j as f64 + t) / k as f64);
                matrices.push(a * &power);
            }
            power = &end * power;
        }
        SampledPath { m: self.m, times, matrices }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPath {
    pub m: usize,
    /// Piecewise-linear samples of `H_t`; a repeated time marks a jump.
    pub hamiltonian_samples: Vec<(f64, DMatrix<f64>)>,
    pub integration_steps: usize,
}

impl GeneratedPath {
    pub fn constant(h: DMatrix<f64>, steps: usize) -> Self {
        GeneratedPath {
            m: h.nrows() / 2,
            hamiltonian_samples: vec![(0.0, h.clone()), (1.0, h)],
            integration_steps: steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = 2 * self.m;
        if self.m == 0 || self.hamiltonian_samples.is_empty() {
            return Err(Error::Input("a generated path needs m ≥ 1 and at least one sample".into()));
        }
        if self.integration_steps == 0 {
            return Err(Error::Input("integration_steps must be positive".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for (t, h) in &self.hamiltonian_samples {
            if !(0.0..=1.0).contains(t) || *t < prev {
                return Err(Error::Input("generator times must be non-decreasing in [0, 1]".into()));
            }
            prev = *t;
            if h.nrows() != n || h.ncols() != n {
                return Err(Error::Dimension(format!("generator at t = {t} is not {n}x{n}")));
            }
            if h.iter().any(|v| !v.is_finite()) || (h - h.transpose()).amax() > 1e-9 * (1.0 + h.amax()) {
                return Err(Error::Input(format!("generator at t = {t} is not a finite symmetric matrix")));
            }
        }
        Ok(())
    }

    fn jump_times(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .hamiltonian_samples
            .windows(2)
            .filter(|w| w[0].0 == w[1].0 && w[0].0 > 0.0 && w[0].0 < 1.0)
            .map(|w| w[0].0)
            .collect();
        out.dedup();
        out
    }

    /// `H_t`, taking the left limit at a jump when `left` is set.
    pub fn h_at(&self, t: f64, left: bool) -> DMatrix<f64> {
        let s = &self.hamiltonian_samples;
        if t <= s[0].0 {
            let last_at = s.iter().rposition(|(u, _)| *u == s[0].0).unwrap_or(0);
            return if left { s[0].1.clone() } else { s[last_at].1.clone() };
        }
        if t >= s[s.len() - 1].0 {
            let first_at = s.iter().position(|(u, _)| *u == s[s.len() - 1].0).unwrap_or(s.len() - 1);
            return if left { s[first_at].1.clone() } else { s[s.len() - 1].1.clone() };
        }
        if let Some(i) = s.iter().position(|(u, _)| *u == t) {
            let j = s.iter().rposition(|(u, _)| *u == t).unwrap_or(i);
            return if left { s[i].1.clone() } else { s[j].1.clone() };
        }
        let i = s.iter().rposition(|(u, _)| *u < t).unwrap_or(0);
        let (t0, h0) = &s[i];
        let (t1, h1) = &s[i + 1];
        let w = (t - t0) / (t1 - t0);
        h0 * (1.0 - w) + h1 * w
    }

    /// Generator of `t ↦ Φ(1 − t) Φ(1)⁻¹`, which is `Φ⁻¹` up to homotopy rel endpoints.
    pub fn inverse(&self) -> GeneratedPath {
        let samples = self
            .hamiltonian_samples
            .iter()
            .rev()
            .map(|(t, h)| (1.0 - t, -h))
            .collect();
        GeneratedPath {
            m: self.m,
            hamiltonian_samples: samples,
            integration_steps: self.integration_steps,
        }
    }

    pub fn iterate(&self, k: usize) -> GeneratedPath {
        let mut samples = Vec::new();
        let kf = k as f64;
        for j in 0..k {
            for (t, h) in &self.hamiltonian_samples {
                samples.push(((j as f64 + t) / kf, h * kf));
            }
        }
        GeneratedPath {
            m: self.m,
            hamiltonian_samples: samples,
            integration_steps: self.integration_steps * k,
        }
    }

    /// `self` on `[0, ½]` followed by `other` on `[½, 1]`.
    pub fn concat(&self, other: &GeneratedPath) -> GeneratedPath {
        let mut samples: Vec<(f64, DMatrix<f64>)> = self
            .hamiltonian_samples
            .iter()
            .map(|(t, h)| (t / 2.0, h * 2.0))
            .collect();
        samples.extend(
            other
                .hamiltonian_samples
                .iter()
                .map(|(t, h)| (0.5 + t / 2.0, h * 2.0)),
        );
        GeneratedPath {
            m: self.m,
            hamiltonian_samples: samples,
            integration_steps: 2 * self.integration_steps.max(other.integration_steps),
        }
    }

    pub fn direct_sum(parts: &[GeneratedPath]) -> GeneratedPath {
        let mut times: Vec<f64> = parts
            .iter()
            .flat_map(|p| p.hamiltonian_samples.iter().map(|(t, _)| *t))
            .chain([0.0, 1.0])
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut jumps: Vec<f64> = parts.iter().flat_map(|p| p.jump_times()).collect();
        jumps.sort_by(f64::total_cmp);
        let mut samples = Vec::new();
        for t in times {
            let is_jump = jumps.iter().any(|&u| u == t);
            let sides: &[bool] = if is_jump { &[true, false] } else { &[false] };
            for &left in sides {
                let blocks: Vec<DMatrix<f64>> = parts.iter().map(|p| p.h_at(t, left)).collect();
                samples.push((t, symlin::direct_sum(&blocks)));
            }
        }
        GeneratedPath {
            m: parts.iter().map(|p| p.m).sum(),
            hamiltonian_samples: samples,
            integration_steps: parts.iter().map(|p| p.integration_steps).max().unwrap_or(1),
        }
    }

    fn pieces(&self) -> Vec<(f64, f64)> {
        let mut cuts = vec![0.0];
        cuts.extend(self.jump_times());
        cuts.push(1.0);
        cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
    }

    /// Fourth-order Magnus steps from `(t0, a)` to `t1 ≥ t0` inside one piece.
    fn flow_piece(&self, j: &DMatrix<f64>, t0: f64, t1: f64, n: usize, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let h = (t1 - t0) / n as f64;
        let c = 3f64.sqrt() / 6.0;
        let mut a = a.clone();
        for s in 0..n {
            let t = t0 + s as f64 * h;
            let a1 = j * self.h_at(t + (0.5 - c) * h, false);
            let a2 = j * self.h_at(t + (0.5 + c) * h, false);
            let comm = &a2 * &a1 - &a1 * &a2;
            let omega = (&a1 + &a2) * (h / 2.0) + comm * (3f64.sqrt() * h * h / 12.0);
            a = omega.exp() * a;
            resymplectify(&mut a, j);
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(t + h));
            }
        }
        Ok(a)
    }

    /// `Φ(t1)` from a known `Φ(t0)`, crossing jumps as needed.
    pub fn flow_between(&self, t0: f64, a: &DMatrix<f64>, t1: f64, n: usize) -> Result<DMatrix<f64>> {
        let j = standard_j(self.m);
        let mut cur = a.clone();
        for (a0, b0) in self.pieces() {
            let lo = a0.max(t0);
            let hi = b0.min(t1);
            if hi > lo {
                let steps = ((n as f64) * (hi - lo) / (t1 - t0)).ceil().max(1.0) as usize;
                cur = self.flow_piece(&j, lo, hi, steps, &cur)?;
            }
        }
        Ok(cur)
    }
}

/// One Newton-type correction `A ← A(I + ½JE)` with `E = AᵀJA − J`.
fn resymplectify(a: &mut DMatrix<f64>, j: &DMatrix<f64>) {
    let e = a.transpose() * j * &*a - j;
    let n = a.nrows();
    let corr = DMatrix::<f64>::identity(n, n) + j * e * 0.5;
    *a = &*a * corr;
}

pub fn integrate(gen: &GeneratedPath) -> Result<SampledPath> {
    gen.validate()?;
    let n = 2 * gen.m;
    let j = standard_j(gen.m);
    let mut times = vec![0.0];
    let mut matrices = vec![DMatrix::<f64>::identity(n, n)];
    let mut cur = matrices[0].clone();
    for (a, b) in gen.pieces() {
        let steps = ((gen.integration_steps as f64) * (b - a)).round().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        for s in 0..steps {
            let t0 = a + s as f64 * h;
            let t1 = if s + 1 == steps { b } else { t0 + h };
            cur = gen.flow_piece(&j, t0, t1, 1, &cur)?;
            times.push(t1);
            matrices.push(cur.clone());
        }
    }
    Ok(SampledPath { m: gen.m, times, matrices })
}

fn rho_with_fallback(a: &DMatrix<f64>, tol: f64) -> Result<nalgebra::Complex<f64>> {
    let mut last = None;
    for scale in [1.0, 10.0, 100.0, 1000.0] {
        match symlin::rho(a, tol * scale) {
            Ok(z) => return Ok(z),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Continuous lift of `arg ρ(Φ(t))` along the samples.
pub fn phase_lift(path: &SampledPath, tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(path.matrices.len());
    let mut prev: Option<f64> = None;
    for (i, a) in path.matrices.iter().enumerate() {
        let z = rho_with_fallback(a, tol)?;
        let arg = z.arg();
        let theta = match prev {
            None => arg,
            Some(p) => {
                let mut d = arg - p.rem_euclid(2.0 * PI);
                d = (d + PI).rem_euclid(2.0 * PI) - PI;
                if d.abs() >= PI / 2.0 {
                    return Err(Error::UnwrapAmbiguity { index: i - 1, jump: d.abs() });
                }
                p + d
            }
        };
        out.push(theta);
        prev = Some(theta);
    }
    Ok(out)
}

pub fn mean_index(path: &SampledPath, tol: f64) -> Result<f64> {
    let lift = phase_lift(path, tol)?;
    Ok((lift[lift.len() - 1] - lift[0]) / PI)
}

/// Conley–Zehnder index through the ρ-phase: elliptic first-kind eigenvalues of
/// the endpoint are pushed to −1 inside Sp*, after which μ equals the phase over π.
pub fn cz_index(path: &SampledPath, tol: f64) -> Result<i64> {
    let class = eigen_classify(path.endpoint(), tol)?;
    if class.unit_block_dim > 0 {
        return Err(Error::DegenerateEndpoint(class.unit_block_dim));
    }
    let theta = PI * mean_index(path, tol)?;
    let mut adjust = 0.0;
    for e in &class.elliptic_pairs {
        if (e.angle - PI).abs() < 1e-12 {
            continue;
        }
        let step = if e.angle > 0.0 { PI - e.angle } else { -PI - e.angle };
        adjust += step * e.multiplicity as f64;
    }
    let raw = (theta + adjust) / PI;
    let mu = raw.round();
    if (raw - mu).abs() > 1e-4 {
        return Err(Error::Degeneracy { re: raw, im: 0.0, size: class.dim() });
    }
    Ok(mu as i64)
}

pub fn nullity(path: &SampledPath, tol: f64) -> Result<usize> {
    Ok(eigen_classify(path.endpoint(), tol)?.unit_block_dim / 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub tau: f64,
    pub kernel_dim: usize,
    pub crossing_signature: i64,
    pub degenerate: bool,
}

fn sigma_min(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let d = a - DMatrix::<f64>::identity(n, n);
    d.singular_values().min()
}

fn crossing_at(gen: &GeneratedPath, tau: f64, phi: &DMatrix<f64>, left: bool, tol: &Tolerances) -> Result<Crossing> {
    let n = phi.nrows();
    let d = phi - DMatrix::<f64>::identity(n, n);
    let svd = d.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let idx: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= tol.kernel).collect();
    if idx.is_empty() {
        return Err(Error::RootIsolation(tau));
    }
    let basis = DMatrix::from_fn(n, idx.len(), |r, c| v_t[(idx[c], r)]);
    let h = gen.h_at(tau, left);
    let q = basis.transpose() * &h * &basis;
    let zero = tol.crossing_form.max(1e-6 * h.amax().max(1.0));
    let inv = symlin::quad_invariants(&q, zero)?;
    let crossing = Crossing {
        tau,
        kernel_dim: idx.len(),
        crossing_signature: inv.sgn,
        degenerate: inv.nullity > 0,
    };
    if crossing.degenerate {
        return Err(Error::DegenerateCrossing(crossing));
    }
    Ok(crossing)
}

/// Robbin–Salamon index with the list of crossings it was assembled from.
pub fn rs_index(gen: &GeneratedPath, tol: &Tolerances) -> Result<(f64, Vec<Crossing>)> {
    let path = integrate(gen)?;
    let sig: Vec<f64> = path.matrices.iter().map(sigma_min).collect();
    let n = sig.len() - 1;
    let mut crossings = vec![crossing_at(gen, 0.0, &path.matrices[0], false, tol)?];

    let golden = (5f64.sqrt() - 1.0) / 2.0;
    for i in 1..n {
        if !(sig[i] <= sig[i - 1] && sig[i] <= sig[i + 1]) {
            continue;
        }
        let base_t = path.times[i - 1];
        let base = &path.matrices[i - 1];
        let span = path.times[i + 1] - base_t;
        let eval = |t: f64| -> Result<(f64, DMatrix<f64>)> {
            let sub = (((t - base_t) / span) * 16.0).ceil().max(1.0) as usize;
            let phi = if t > base_t { gen.flow_between(base_t, base, t, sub)? } else { base.clone() };
            Ok((sigma_min(&phi), phi))
        };
        let (mut a, mut b) = (base_t, path.times[i + 1]);
        let mut c = b - golden * (b - a);
        let mut d = a + golden * (b - a);
        let mut fc = eval(c)?.0;
        let mut fd = eval(d)?.0;
        while b - a > 1e-10 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - golden * (b - a);
                fc = eval(c)?.0;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + golden * (b - a);
                fd = eval(d)?.0;
            }
        }
        let tau = 0.5 * (a + b);
        let (s, phi) = eval(tau)?;
        if s < tol.crossing_gap && tau < 1.0 - 1e-9 {
            crossings.push(crossing_at(gen, tau, &phi, false, tol)?);
        }
    }
    if sig[n] < tol.crossing_gap {
        crossings.push(crossing_at(gen, 1.0, &path.matrices[n], true, tol)?);
    }

    for w in crossings.windows(2) {
        if (w[1].tau - w[0].tau).abs() < 1e-8 {
            let mut merged = w[0].clone();
            merged.kernel_dim += w[1].kernel_dim;
            merged.degenerate = true;
            return Err(Error::DegenerateCrossing(merged));
        }
    }

    let mut twice = 0i64;
    for c in &crossings {
        let weight = if c.tau == 0.0 || c.tau == 1.0 { 1 } else { 2 };
        twice += weight * c.crossing_signature;
    }
    Ok((twice as f64 / 2.0, crossings))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuPm {
    pub minus: i64,
    pub plus: i64,
    /// `dim ker(Φ(1) − I)`.
    pub geometric_nullity: usize,
    /// Whether `μ± = RS ± g/2` held; absent when the RS index was unavailable.
    pub rs_consistent: Option<bool>,
}

fn geometric_nullity(a: &DMatrix<f64>, tol: &Tolerances) -> usize {
    let n = a.nrows();
    (a - DMatrix::<f64>::identity(n, n))
        .singular_values()
        .iter()
        .filter(|&&s| s <= tol.kernel)
        .count()
}

/// Upper and lower indices, realized by appending the flow of `±ε` times the
/// identity form to the path.
pub fn mu_pm(gen: &GeneratedPath, eps: f64, tol: &Tolerances) -> Result<MuPm> {
    gen.validate()?;
    let n = 2 * gen.m;
    let mut out = [0i64; 2];
    for (slot, sign) in [(0usize, -1.0), (1, 1.0)] {
        let push = GeneratedPath::constant(DMatrix::<f64>::identity(n, n) * (sign * eps), 8);
        let ext = integrate(&gen.concat(&push))?;
        out[slot] = match cz_index(&ext, tol.cluster) {
            Ok(v) => v,
            Err(Error::DegenerateEndpoint(d)) => {
                return Err(Error::Precondition(format!(
                    "extended endpoint still degenerate (unit block {d}); adjust eps = {eps}"
                )))
            }
            Err(e) => return Err(e),
        };
    }
    let end = integrate(gen)?;
    let g = geometric_nullity(end.endpoint(), tol);
    let rs_consistent = rs_index(gen, tol).ok().map(|(rs, _)| {
        let half = g as f64 / 2.0;
        (out[1] as f64 - (rs + half)).abs() < 1e-9 && (out[0] as f64 - (rs - half)).abs() < 1e-9
    });
    Ok(MuPm {
        minus: out[0],
        plus: out[1],
        geometric_nullity: g,
        rs_consistent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub mean_index: f64,
    pub rs_index: Option<f64>,
    pub cz_index: Option<i64>,
    pub mu_plus: Option<i64>,
    pub mu_minus: Option<i64>,
    pub nullity: usize,
    pub crossings: Vec<Crossing>,
    pub tolerances: Tolerances,
}

pub fn index_report(gen: &GeneratedPath, eps: f64, tol: &Tolerances) -> Result<IndexReport> {
    let path = integrate(gen)?;
    let mean = mean_index(&path, tol.cluster)?;
    let nu = nullity(&path, tol.cluster)?;
    let cz = if nu == 0 { Some(cz_index(&path, tol.cluster)?) } else { None };
    let (rs, crossings) = match rs_index(gen, tol) {
        Ok((rs, c)) => (Some(rs), c),
        Err(_) => (None, Vec::new()),
    };
    let pm = match cz {
        Some(c) => Some((c, c)),
        None => mu_pm(gen, eps, tol).ok().map(|p| (p.minus, p.plus)),
    };
    Ok(IndexReport {
        mean_index: mean,
        rs_index: rs,
        cz_index: cz,
        mu_plus: pm.map(|p| p.1),
        mu_minus: pm.map(|p| p.0),
        nullity: nu,
        crossings,
        tolerances: *tol,
    })
}

pub fn sampled_index_report(path: &SampledPath, tol: &Tolerances) -> Result<IndexReport> {
    path.validate(tol.symplectic.max(1e-6))?;
    let mean = mean_index(path, tol.cluster)?;
    let nu = nullity(path, tol.cluster)?;
    let cz = if nu == 0 { Some(cz_index(path, tol.cluster)?) } else { None };
    Ok(IndexReport {
        mean_index: mean,
        rs_index: cz.map(|c| c as f64),
        cz_index: cz,
        mu_plus: cz,
        mu_minus: cz,
        nullity: nu,
        crossings: Vec::new(),
        tolerances: *tol,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleJson {
    pub t: f64,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSampleJson {
    pub t: f64,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathJson {
    Sampled { m: usize, samples: Vec<SampleJson> },
    Generated { m: usize, generator: Vec<GeneratorSampleJson>, steps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyPath {
    Sampled(SampledPath),
    Generated(GeneratedPath),
}

impl TryFrom<&PathJson> for AnyPath {
    type Error = Error;

    fn try_from(p: &PathJson) -> Result<Self> {
        match p {
            PathJson::Sampled { m, samples } => {
                let mut times = Vec::new();
                let mut matrices = Vec::new();
                for s in samples {
                    times.push(s.t);
                    matrices.push(symlin::matrix_from_rows(&s.matrix)?);
                }
                Ok(AnyPath::Sampled(SampledPath { m: *m, times, matrices }))
            }
            PathJson::Generated { m, generator, steps } => {
                let mut samples = Vec::new();
                for s in generator {
                    samples.push((s.t, symlin::matrix_from_rows(&s.h)?));
                }
                let g = GeneratedPath {
                    m: *m,
                    hamiltonian_samples: samples,
                    integration_steps: *steps,
                };
                g.validate()?;
                Ok(AnyPath::Generated(g))
            }
        }
    }
}

impl From<&GeneratedPath> for PathJson {
    fn from(g: &GeneratedPath) -> Self {
        PathJson::Generated {
            m: g.m,
            generator: g
                .hamiltonian_samples
                .iter()
                .map(|(t, h)| GeneratorSampleJson { t: *t, h: symlin::rows_of(h) })
                .collect(),
            steps: g.integration_steps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(lambda: f64, steps: usize) -> GeneratedPath {
        GeneratedPath::constant(DMatrix::identity(2, 2) * (2.0 * PI * lambda), steps)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn integrate_examples() {
        let p = integrate(&GeneratedPath::constant(DMatrix::zeros(2, 2), 10)).unwrap();
        assert!(p.matrices.iter().all(|a| *a == DMatrix::identity(2, 2)));

        let p = integrate(&rotation(1.0, 1000)).unwrap();
        assert!((p.endpoint() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-8);
        let worst = p.matrices.iter().map(symlin::symplectic_defect).fold(0.0, f64::max);
        assert!(worst < 1e-8);

        let h = DMatrix::from_row_slice(2, 2, &[0.0, 0.7, 0.7, 0.0]);
        let p = integrate(&GeneratedPath::constant(h.clone(), 1000)).unwrap();
        // Oracle: JH = diag(-0.7, 0.7), so the flow is diag(e^{-0.7}, e^{0.7}).
        let exact = DMatrix::from_row_slice(2, 2, &[(-0.7f64).exp(), 0.0, 0.0, 0.7f64.exp()]);
        assert!((p.endpoint() - exact).amax() < 1e-8);
        assert!((p.endpoint() - symlin::symplectic_exp(&h)).amax() < 1e-8);
    }

    #[test]
    fn mean_index_examples() {
        let p = integrate(&rotation(0.3, 400)).unwrap();
        assert!((mean_index(&p, 1e-8).unwrap() - 0.6).abs() < 1e-9);
        let p = integrate(&rotation(-0.25, 400)).unwrap();
        assert!((mean_index(&p, 1e-8).unwrap() + 0.5).abs() < 1e-9);
        let p = integrate(&GeneratedPath::constant(DMatrix::zeros(2, 2), 5)).unwrap();
        assert_eq!(mean_index(&p, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn coarse_sampling_is_rejected() {
        let rot = |a: f64| DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()]);
        let p = SampledPath {
            m: 1,
            times: vec![0.0, 0.5, 1.0],
            matrices: vec![rot(0.0), rot(2.0), rot(4.0)],
        };
        assert!(matches!(mean_index(&p, 1e-8), Err(Error::UnwrapAmbiguity { .. })));
    }

    #[test]
    fn cz_examples() {
        for (lambda, want) in [(0.3, 1), (1.5, 3), (-0.25, -1), (0.75, 1), (-1.3, -3)] {
            let p = integrate(&rotation(lambda, 600)).unwrap();
            assert_eq!(cz_index(&p, 1e-8).unwrap(), want, "λ = {lambda}");
        }
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = integrate(&GeneratedPath::constant(h, 200)).unwrap();
        assert_eq!(cz_index(&p, 1e-8).unwrap(), 0);
        let p = integrate(&rotation(1.0, 200)).unwrap();
        assert!(matches!(cz_index(&p, 1e-6), Err(Error::DegenerateEndpoint(2))));
    }

    #[test]
    fn rs_examples() {
        let (rs, c) = rs_index(&GeneratedPath::constant(DMatrix::identity(2, 2) * 0.01, 100), &tol()).unwrap();
        assert_eq!(rs, 1.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].crossing_signature, 2);

        assert!(matches!(
            rs_index(&GeneratedPath::constant(DMatrix::zeros(2, 2), 100), &tol()),
            Err(Error::DegenerateCrossing(_))
        ));

        let (rs, c) = rs_index(&rotation(0.5, 500), &tol()).unwrap();
        assert_eq!((rs, c.len()), (1.0, 1));

        // λ = 1.5 crosses at t = 2/3 with full weight.
        let (rs, c) = rs_index(&rotation(1.5, 500), &tol()).unwrap();
        assert_eq!(rs, 3.0);
        assert_eq!(c.len(), 2);
        assert!((c[1].tau - 2.0 / 3.0).abs() < 1e-8);

        // λ = 1 ends on a crossing, counted with half weight.
        let (rs, c) = rs_index(&rotation(1.0, 500), &tol()).unwrap();
        assert_eq!((rs, c.len()), (2.0, 2));
    }

    #[test]
    fn positive_definite_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for t in [0.5, 1.0, 2.0, 3.5, 5.0, 6.0, 9.0] {
            let g = GeneratedPath::constant(DMatrix::identity(4, 4) * t, 600);
            let (rs, _) = rs_index(&g, &tol()).unwrap();
            assert!(rs >= prev);
            prev = rs;
            let pm = mu_pm(&g, 0.01, &tol()).unwrap();
            assert!(pm.minus >= 2);
        }
    }

    #[test]
    fn mu_pm_examples() {
        let pm = mu_pm(&GeneratedPath::constant(DMatrix::zeros(2, 2), 50), 0.01, &tol()).unwrap();
        assert_eq!((pm.minus, pm.plus), (-1, 1));
        let shear = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0]));
        let pm = mu_pm(&GeneratedPath::constant(shear, 200), 0.01, &tol()).unwrap();
        assert_eq!((pm.minus, pm.plus), (0, 1));
        let pm = mu_pm(&rotation(0.3, 300), 0.01, &tol()).unwrap();
        assert_eq!((pm.minus, pm.plus), (1, 1));
        assert_eq!(pm.rs_consistent, Some(true));
        let pm = mu_pm(&rotation(1.0, 300), 0.01, &tol()).unwrap();
        assert_eq!((pm.minus, pm.plus, pm.geometric_nullity), (1, 3, 2));
        assert_eq!(pm.rs_consistent, Some(true));
    }

    #[test]
    fn nullity_examples() {
        let p = integrate(&GeneratedPath::constant(DMatrix::zeros(2, 2), 5)).unwrap();
        assert_eq!(nullity(&p, 1e-8).unwrap(), 1);
        let p = integrate(&rotation(0.3, 100)).unwrap();
        assert_eq!(nullity(&p, 1e-8).unwrap(), 0);
        // Exact shear endpoint exp(J·diag(1,0)) = [[1,0],[1,1]].
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let path = SampledPath {
            m: 1,
            times: vec![0.0, 1.0],
            matrices: vec![DMatrix::identity(2, 2), shear],
        };
        assert_eq!(nullity(&path, 1e-8).unwrap(), 1);
    }

    #[test]
    fn inverse_and_iterate_generators() {
        let g = GeneratedPath::direct_sum(&[rotation(0.3, 300), rotation(-0.7, 300)]);
        let pm = mu_pm(&g, 0.01, &tol()).unwrap();
        let inv = mu_pm(&g.inverse(), 0.01, &tol()).unwrap();
        assert_eq!((inv.minus, inv.plus), (-pm.plus, -pm.minus));
        let p = integrate(&g).unwrap();
        let p3 = integrate(&g.iterate(3)).unwrap();
        let m1 = mean_index(&p, 1e-8).unwrap();
        assert!((mean_index(&p3, 1e-8).unwrap() - 3.0 * m1).abs() < 1e-8);
        assert!((mean_index(&p.iterate(3), 1e-8).unwrap() - 3.0 * m1).abs() < 1e-8);
    }

    #[test]
    fn path_json_round_trip() {
        let g = rotation(0.3, 20);
        let s = serde_json::to_string(&PathJson::from(&g)).unwrap();
        let back: PathJson = serde_json::from_str(&s).unwrap();
        assert_eq!(AnyPath::try_from(&back).unwrap(), AnyPath::Generated(g));
    }
}
