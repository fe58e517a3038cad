//! Lower bounds on the number of simple closed Reeb orbits, ellipsoid
//! spectral data, and common-jump witnesses for those bounds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbitmodel::{self, OrbitModel, Rotation};
use crate::recurrence::{
    self, find_recurrence, IterateWindow, JumpInterval, JumpMode, RecurrenceCertificate, RecurrenceQuery,
};
use crate::shdim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactKind {
    /// Standard contact sphere `S^{2n−1}`.
    Sphere,
    /// Unit cotangent bundle `ST*S^n`.
    Stsn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactSetting {
    pub kind: ContactKind,
    pub n: i64,
    /// Lower bound on `μ₋` over all closed orbits.
    pub q: i64,
    pub nondegenerate: bool,
}

impl ContactSetting {
    pub fn sphere(n: i64, q: i64, nondegenerate: bool) -> Self {
        ContactSetting { kind: ContactKind::Sphere, n, q, nondegenerate }
    }

    pub fn stsn(n: i64, q: i64, nondegenerate: bool) -> Self {
        ContactSetting { kind: ContactKind::Stsn, n, q, nondegenerate }
    }

    /// `μ₋ ≥ n+1` on the sphere, `μ₋ ≥ n−1` on `ST*S^n`.
    pub fn q_max(kind: ContactKind, n: i64) -> i64 {
        match kind {
            ContactKind::Sphere => n + 1,
            ContactKind::Stsn => n - 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min_n = match self.kind {
            ContactKind::Sphere => 2,
            ContactKind::Stsn => 3,
        };
        if self.n < min_n {
            return Err(Error::Input(format!("n = {} is below {min_n}", self.n)));
        }
        let top = Self::q_max(self.kind, self.n);
        if !(0 < self.q && self.q <= top) {
            return Err(Error::Input(format!("q = {} must lie in 1..={top}", self.q)));
        }
        Ok(())
    }

    /// Half-dimension of the transverse linearized flow.
    pub fn half_dim(&self) -> usize {
        (self.n - 1) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    SphereDynamicallyConvex,
    SphereIndexBound,
    StsnStandard,
    StsnIndexBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessStatus {
    /// The weighted lattice count in `L` equals `r`.
    Matches,
    /// One short of `r`; the remaining orbit comes from a symplectically
    /// degenerate maximum, which is not searched for.
    SdmBranch,
    /// Below `r`; the bound needs an argument beyond interval counting.
    ExtraOrbitArgument,
    Exceeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub degree: i64,
    pub model: Option<usize>,
    pub k: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub certificate: RecurrenceCertificate,
    pub interval: JumpInterval,
    /// Lattice degrees in `L`, repeated by homology dimension.
    pub degrees: Vec<i64>,
    pub count: usize,
    pub assignment: Vec<Assignment>,
    pub matched: usize,
    pub windows: Vec<IterateWindow>,
    pub disjoint: bool,
    pub even_iterates: bool,
    pub status: WitnessStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityBound {
    pub setting: ContactSetting,
    pub bound: BoundKind,
    pub r: i64,
    pub vacuous: bool,
    pub witness: Option<Witness>,
}

fn ceil_half(n: i64) -> i64 {
    (n + 1).div_euclid(2)
}

fn degenerate_formula(n: i64, q: i64) -> i64 {
    if n % 2 == 1 && q % 2 == 1 {
        q - ceil_half(n)
    } else {
        q + 1 - ceil_half(n)
    }
}

pub fn lower_bound(setting: &ContactSetting) -> Result<MultiplicityBound> {
    setting.validate()?;
    let ContactSetting { kind, n, q, nondegenerate } = *setting;
    let (bound, r) = match kind {
        ContactKind::Sphere if q == n + 1 => (
            BoundKind::SphereDynamicallyConvex,
            if nondegenerate { n } else { ceil_half(n) + 1 },
        ),
        ContactKind::Sphere => {
            let r = if !nondegenerate {
                degenerate_formula(n, q)
            } else if q == n {
                n
            } else if (n - q) % 2 == 0 {
                q + 1
            } else {
                q
            };
            (BoundKind::SphereIndexBound, r)
        }
        ContactKind::Stsn if q == n - 1 => {
            let r = match (nondegenerate, n % 2 == 0) {
                (false, _) => n / 2 - 1,
                (true, true) => n,
                (true, false) => n + 1,
            };
            (BoundKind::StsnStandard, r)
        }
        ContactKind::Stsn => {
            let r = if !nondegenerate {
                degenerate_formula(n, q)
            } else if n % 2 == 1 || q % 2 == 0 {
                q + 1
            } else {
                q
            };
            (BoundKind::StsnIndexBound, r)
        }
    };
    Ok(MultiplicityBound { setting: *setting, bound, r, vacuous: r <= 0, witness: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidModel {
    pub radii_sq: Vec<f64>,
}

/// Ratios `p/q` with `q ≤ MAX_DENOMINATOR` closer than `RESONANCE_BAND` count as rational.
pub const MAX_DENOMINATOR: i64 = 1_000_000;
pub const RESONANCE_BAND: f64 = 1e-9;

/// A rational `p/q` with `q ≤ max_q` and `|q x − p| < band`, searched along the
/// continued-fraction convergents of `x`.
pub fn rational_approximation(x: f64, max_q: i64, band: f64) -> Option<(i64, i64)> {
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut t = x;
    for _ in 0..64 {
        let a = t.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_q as i128 {
            break;
        }
        if (k2 as f64 * x - h2 as f64).abs() < band {
            return Some((h2 as i64, k2 as i64));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let f = t - a as f64;
        if f <= 0.0 {
            break;
        }
        t = 1.0 / f;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub i: usize,
    pub j: usize,
    pub p: i64,
    pub q: i64,
}

impl EllipsoidModel {
    pub fn new(radii_sq: Vec<f64>) -> Result<Self> {
        let e = EllipsoidModel { radii_sq };
        e.validate()?;
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.radii_sq.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii_sq.is_empty() {
            return Err(Error::Input("ellipsoid needs at least one radius".into()));
        }
        if let Some(r) = self.radii_sq.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::Input(format!("squared radius {r} must be positive")));
        }
        Ok(())
    }

    pub fn resonance(&self) -> Option<Resonance> {
        let r = &self.radii_sq;
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                if let Some((p, q)) = rational_approximation(r[i] / r[j], MAX_DENOMINATOR, RESONANCE_BAND) {
                    return Some(Resonance { i, j, p, q });
                }
            }
        }
        None
    }

    pub fn require_nonresonant(&self) -> Result<()> {
        self.validate()?;
        match self.resonance() {
            Some(Resonance { i, j, p, q }) => Err(Error::Input(format!(
                "radii_sq[{i}] / radii_sq[{j}] is within the resonance band of {p}/{q}"
            ))),
            None => Ok(()),
        }
    }

    /// `π / (2 Σ r_j⁻²)`.
    pub fn chat(&self) -> f64 {
        PI / (2.0 * self.radii_sq.iter().map(|r| r.recip()).sum::<f64>())
    }

    /// Random non-resonant radii in `[1, spread]`, resampled until non-resonant.
    pub fn random<R: rand::Rng>(rng: &mut R, n: usize, spread: f64) -> Self {
        loop {
            let mut radii_sq: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..spread)).collect();
            radii_sq[0] = 1.0;
            let e = EllipsoidModel { radii_sq };
            if e.resonance().is_none() {
                return e;
            }
        }
    }
}

pub fn ellipsoid_orbit_models(e: &EllipsoidModel) -> Result<Vec<OrbitModel>> {
    e.require_nonresonant()?;
    let r = &e.radii_sq;
    let total: f64 = r.iter().map(|x| x.recip()).sum();
    let mut out = Vec::with_capacity(r.len());
    for i in 0..r.len() {
        let mut loop_index = 2;
        let mut rotations = Vec::new();
        for j in (0..r.len()).filter(|&j| j != i) {
            let x = r[i] / r[j];
            let fl = x.floor();
            loop_index += 2 * fl as i64;
            rotations.push(Rotation::Irrational(x - fl));
        }
        let model = OrbitModel {
            label: format!("x{}", i + 1),
            loop_index,
            rotations,
            hyperbolic_index: 0,
            hyperbolic_planes: 0,
            degenerate: None,
            action: Some(PI * r[i]),
        };
        let mean = orbitmodel::mean_index(&model, 1)?;
        let expected = 2.0 * r[i] * total;
        if (mean - expected).abs() > 1e-10 * expected.max(1.0) {
            return Err(Error::InvalidModel(format!(
                "mean index {mean} of {} differs from {expected}",
                model.label
            )));
        }
        out.push(model);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralInvariantSequence {
    pub values: Vec<f64>,
    /// `(orbit, iterate)` carrying each value.
    pub carriers: Vec<(usize, i64)>,
}

#[derive(PartialEq)]
struct Next {
    value: f64,
    orbit: usize,
    k: i64,
}

impl Eq for Next {}

impl Ord for Next {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.orbit.cmp(&self.orbit))
    }
}

impl PartialOrd for Next {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn ellipsoid_spectral_invariants(e: &EllipsoidModel, count: usize) -> Result<SpectralInvariantSequence> {
    e.validate()?;
    let mut heap: BinaryHeap<Next> = e
        .radii_sq
        .iter()
        .enumerate()
        .map(|(i, r)| Next { value: PI * r, orbit: i, k: 1 })
        .collect();
    let mut values = Vec::with_capacity(count);
    let mut carriers = Vec::with_capacity(count);
    while values.len() < count {
        let top = heap.pop().expect("heap never empties");
        values.push(top.value);
        carriers.push((top.orbit, top.k));
        let k = top.k + 1;
        heap.push(Next { value: PI * e.radii_sq[top.orbit] * k as f64, orbit: top.orbit, k });
    }
    Ok(SpectralInvariantSequence { values, carriers })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierCheck {
    pub position: usize,
    pub orbit: usize,
    pub iterate: i64,
    pub expected: i64,
    pub cz: i64,
    pub mean: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierReport {
    pub checks: Vec<CarrierCheck>,
    pub failures: usize,
    pub passed: bool,
}

pub fn verify_carrier_indices(e: &EllipsoidModel, count: usize) -> Result<CarrierReport> {
    let models = ellipsoid_orbit_models(e)?;
    let seq = ellipsoid_spectral_invariants(e, count)?;
    let n = e.n() as i64;
    let mut checks = Vec::with_capacity(count);
    for (idx, &(orbit, k)) in seq.carriers.iter().enumerate() {
        let position = idx + 1;
        let expected = n + 2 * position as i64 - 1;
        let cz = orbitmodel::cz_index(&models[orbit], k)?;
        let mean = orbitmodel::mean_index(&models[orbit], k)?;
        let pass = cz == expected && (mean - expected as f64).abs() <= (n - 1) as f64 + 1e-9;
        checks.push(CarrierCheck { position, orbit, iterate: k, expected, cz, mean, pass });
    }
    let failures = checks.iter().filter(|c| !c.pass).count();
    Ok(CarrierReport { checks, failures, passed: failures == 0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    /// `action / μ̂`, `None` where `μ̂ = 0`.
    pub chat: Vec<Option<f64>>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn resonance_check(models: &[OrbitModel], tol: f64) -> Result<ResonanceReport> {
    let mut chat = Vec::with_capacity(models.len());
    for m in models {
        let action = m
            .action
            .ok_or_else(|| Error::Input(format!("model '{}' has no action", m.label)))?;
        let mean = orbitmodel::mean_index(m, 1)?;
        chat.push((mean != 0.0).then(|| action / mean));
    }
    let mut dev: f64 = 0.0;
    for a in &chat {
        for b in &chat {
            dev = dev.max(match (a, b) {
                (Some(x), Some(y)) => (x - y).abs(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            });
        }
    }
    Ok(ResonanceReport { chat, max_deviation: dev, tol, pass: dev <= tol })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatLimitReport {
    pub count: usize,
    pub c_d: f64,
    /// Degree `n + 2D − 1` carried by `c_D`.
    pub degree: i64,
    pub ratio: f64,
    pub limit: f64,
    pub deviation: f64,
    pub tol: f64,
    pub within: bool,
}

pub fn chat_limit_check(e: &EllipsoidModel, count: usize, tol: f64) -> Result<ChatLimitReport> {
    if count == 0 {
        return Err(Error::Input("count must be positive".into()));
    }
    e.require_nonresonant()?;
    let seq = ellipsoid_spectral_invariants(e, count)?;
    let c_d = *seq.values.last().expect("count > 0");
    let degree = e.n() as i64 + 2 * count as i64 - 1;
    let ratio = c_d / degree as f64;
    let limit = e.chat();
    let deviation = (ratio - limit).abs();
    Ok(ChatLimitReport { count, c_d, degree, ratio, limit, deviation, tol, within: deviation < tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub ell0: i64,
    pub eta: f64,
    pub k_max: i64,
    /// Certificates examined while looking for one whose interval sits inside the support.
    pub attempts: usize,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams { ell0: 2, eta: 0.25, k_max: 1_000_000, attempts: 20 }
    }
}

fn lattice_start(setting: &ContactSetting) -> i64 {
    match setting.kind {
        ContactKind::Sphere => setting.n + 1,
        ContactKind::Stsn => setting.n - 1,
    }
}

pub fn witness_divisor(setting: &ContactSetting) -> i64 {
    match setting.kind {
        ContactKind::Sphere => 2,
        ContactKind::Stsn => 2 * (setting.n - 1),
    }
}

fn lattice_dims(setting: &ContactSetting, interval: &JumpInterval) -> Result<Vec<i64>> {
    let range = interval.lo..=interval.hi;
    let table = match setting.kind {
        ContactKind::Sphere => shdim::sphere_sh_dims(setting.n, range)?,
        ContactKind::Stsn => shdim::stsn_sh_dims_cases(setting.n, range)?,
    };
    Ok(table
        .degrees
        .iter()
        .flat_map(|(&k, &d)| std::iter::repeat(k).take(d as usize))
        .collect())
}

/// Maximum matching of degree slots to models by augmenting paths.
fn match_degrees(degrees: &[i64], windows: &[(i64, i64)]) -> Vec<Option<usize>> {
    fn augment(
        s: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &m in &adj[s] {
            if seen[m] {
                continue;
            }
            seen[m] = true;
            if owner[m].map_or(true, |o| augment(o, adj, seen, owner)) {
                owner[m] = Some(s);
                return true;
            }
        }
        false
    }
    let adj: Vec<Vec<usize>> = degrees
        .iter()
        .map(|&d| (0..windows.len()).filter(|&m| windows[m].0 <= d && d <= windows[m].1).collect())
        .collect();
    let mut owner = vec![None; windows.len()];
    for s in 0..degrees.len() {
        let mut seen = vec![false; windows.len()];
        augment(s, &adj, &mut seen, &mut owner);
    }
    let mut slot = vec![None; degrees.len()];
    for (m, o) in owner.iter().enumerate() {
        if let Some(s) = o {
            slot[*s] = Some(m);
        }
    }
    slot
}

pub fn mult_witness(
    models: &[OrbitModel],
    setting: &ContactSetting,
    params: &WitnessParams,
) -> Result<MultiplicityBound> {
    let mut bound = lower_bound(setting)?;
    let m = setting.half_dim();
    if models.is_empty() {
        return Err(Error::Input("no orbit models".into()));
    }
    for x in models {
        x.validate()?;
        if x.half_dim() != m {
            return Err(Error::Dimension(format!(
                "model '{}' has half-dimension {}, expected {m}",
                x.label,
                x.half_dim()
            )));
        }
        for k in 1..=100 {
            let lo = orbitmodel::mu_pm(x, k)?.0;
            if lo < setting.q {
                return Err(Error::Precondition(format!(
                    "μ₋ of iterate {k} of '{}' is {lo} < q = {}",
                    x.label, setting.q
                )));
            }
        }
        if setting.nondegenerate && !x.is_strongly_nondegenerate() {
            return Err(Error::Precondition(format!(
                "model '{}' is not strongly non-degenerate",
                x.label
            )));
        }
    }
    let mode = if setting.nondegenerate { JumpMode::StronglyNondegenerate } else { JumpMode::General };
    let query = RecurrenceQuery {
        models: models.to_vec(),
        ell0: params.ell0,
        eta: params.eta,
        divisor: witness_divisor(setting),
        k_max: params.k_max,
        count: params.attempts,
        require_d_divisible: true,
    };
    let outcome = find_recurrence(&query)?;
    let start = lattice_start(setting);
    let found = outcome.certificates.into_iter().find_map(|c| {
        let l = JumpInterval::for_lower_bound(c.d, m as i64, setting.q, mode);
        (l.lo >= start).then_some((c, l))
    });
    let Some((cert, interval)) = found else {
        return Ok(bound);
    };

    let degrees = lattice_dims(setting, &interval)?;
    let count = degrees.len();
    let carriers: Vec<(i64, i64)> = models
        .iter()
        .zip(&cert.k)
        .map(|(x, &k)| orbitmodel::mu_pm(x, k))
        .collect::<Result<_>>()?;
    let slots = match_degrees(&degrees, &carriers);
    let assignment: Vec<Assignment> = degrees
        .iter()
        .zip(&slots)
        .map(|(&degree, s)| Assignment { degree, model: *s, k: s.map(|i| cert.k[i]) })
        .collect();
    let matched = slots.iter().filter(|s| s.is_some()).count();
    let windows = recurrence::iterate_windows(&cert, models, params.ell0, &interval)?;
    let disjoint = windows.iter().all(|w| w.disjoint);
    let r = bound.r.max(0) as usize;
    let sdm_case = setting.kind == ContactKind::Sphere
        && setting.q == setting.n + 1
        && !setting.nondegenerate
        && setting.n % 2 == 1;
    let status = match count.cmp(&r) {
        Ordering::Equal => WitnessStatus::Matches,
        Ordering::Greater => WitnessStatus::Exceeds,
        Ordering::Less if sdm_case && count + 1 == r => WitnessStatus::SdmBranch,
        Ordering::Less => WitnessStatus::ExtraOrbitArgument,
    };
    bound.witness = Some(Witness {
        even_iterates: cert.k.iter().all(|k| k % 2 == 0),
        certificate: cert,
        interval,
        degrees,
        count,
        assignment,
        matched,
        windows,
        disjoint,
        status,
    });
    Ok(bound)
}
