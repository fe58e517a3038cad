//! Index-recurrence certificates: a common shift `d` in the index direction and
//! iterates `k_i` of every orbit around which the index pattern repeats.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbitmodel::{self, dist_to_int, OrbitModel};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceQuery {
    pub models: Vec<OrbitModel>,
    pub ell0: i64,
    pub eta: f64,
    pub divisor: i64,
    pub k_max: i64,
    pub count: usize,
    /// Also require `N | d`, not only `N | k_i`.
    #[serde(default = "default_true")]
    pub require_d_divisible: bool,
}

impl RecurrenceQuery {
    pub fn validate(&self) -> Result<usize> {
        if self.models.is_empty() {
            return Err(Error::Input("at least one orbit model is required".into()));
        }
        for m in &self.models {
            m.validate()?;
        }
        let m = self.models[0].half_dim();
        if self.models.iter().any(|x| x.half_dim() != m) {
            return Err(Error::Dimension("all models must share one half-dimension".into()));
        }
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return Err(Error::Input(format!("eta = {} must lie in (0, 1/2)", self.eta)));
        }
        if self.divisor < 1 || self.ell0 < 1 || self.k_max < 1 {
            return Err(Error::Input("divisor, ell0 and k_max must be positive".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceCertificate {
    pub d: i64,
    pub k: Vec<i64>,
    pub epsilon_used: f64,
    /// Per model, the largest `‖k_i λ‖` over its irrational rotations.
    pub residuals: Vec<f64>,
    /// Per model, `|μ̂(Φ_i^{k_i}) − d|`.
    pub mean_gaps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub certificates: Vec<RecurrenceCertificate>,
    pub exhausted: bool,
    /// Number of reference iterates examined.
    pub scanned: i64,
    pub epsilon: f64,
    pub effective_divisors: Vec<i64>,
    /// Set when every mean index vanishes, so `d` stays bounded.
    pub bounded_d: bool,
}

/// Smallest `‖ℓλ‖` over all irrational rotations and `1 ≤ ℓ ≤ ℓ₀`.
pub fn epsilon0(models: &[OrbitModel], ell0: i64) -> Result<f64> {
    let mut eps = f64::INFINITY;
    for m in models {
        for x in m.irrationals() {
            for l in 1..=ell0 {
                eps = eps.min(dist_to_int(l, x)?);
            }
        }
    }
    Ok(eps)
}

/// `‖kx‖` without the resonance guard, for screening.
fn quick_dist(k: i64, x: f64) -> f64 {
    let kf = k as f64;
    let p = kf * x;
    let e = kf.mul_add(x, -p);
    let frac = (p - p.floor()) + e;
    let frac = frac - frac.floor();
    frac.min(1.0 - frac)
}

fn residual(model: &OrbitModel, k: i64, eps: f64) -> Result<Option<f64>> {
    let mut worst: f64 = 0.0;
    for x in model.irrationals() {
        if quick_dist(k, x) >= eps {
            return Ok(None);
        }
        worst = worst.max(dist_to_int(k, x)?);
    }
    Ok((worst < eps).then_some(worst))
}

pub fn find_recurrence(query: &RecurrenceQuery) -> Result<SearchOutcome> {
    let m = query.validate()?;
    let models = &query.models;
    let eps = epsilon0(models, query.ell0)?.min(query.eta / (2.0 * m as f64));
    let deltas: Vec<f64> = models
        .iter()
        .map(|x| orbitmodel::mean_index(x, 1))
        .collect::<Result<_>>()?;
    let divisors: Vec<i64> = models
        .iter()
        .map(|x| query.divisor.lcm(&x.root_of_unity_degree()))
        .collect();
    let is_zero = |d: f64| d.abs() < 1e-12;
    let reference = deltas.iter().position(|&d| !is_zero(d));
    let bounded_d = reference.is_none();
    let ref_divisor = match reference {
        Some(i) => divisors[i],
        None => divisors.iter().fold(1, |a, b| a.lcm(b)),
    };

    let mut certs: Vec<RecurrenceCertificate> = Vec::new();
    let mut scanned = 0;
    let r = models.len();
    'scan: for t in 1..=query.k_max {
        if certs.len() >= query.count {
            break;
        }
        scanned = t;
        let k_ref = ref_divisor * t;
        let target = reference.map_or(0.0, |i| k_ref as f64 * deltas[i]);
        let mut ks = vec![0i64; r];
        for i in 0..r {
            ks[i] = if Some(i) == reference || reference.is_none() {
                k_ref
            } else if is_zero(deltas[i]) {
                divisors[i] * ((k_ref as f64 / divisors[i] as f64).round() as i64).max(1)
            } else {
                divisors[i] * (target / (divisors[i] as f64 * deltas[i])).round() as i64
            };
            if ks[i] <= query.ell0 {
                continue 'scan;
            }
        }
        let mut residuals = vec![0.0; r];
        for i in 0..r {
            match residual(&models[i], ks[i], eps)? {
                Some(v) => residuals[i] = v,
                None => continue 'scan,
            }
        }
        for i in 0..r {
            if !is_zero(deltas[i]) && (target - ks[i] as f64 * deltas[i]).abs() >= 0.125 {
                continue 'scan;
            }
        }
        let d = target.round() as i64;
        if query.require_d_divisible && d % query.divisor != 0 {
            continue;
        }
        let mut gaps = vec![0.0; r];
        for i in 0..r {
            gaps[i] = (orbitmodel::mean_index(&models[i], ks[i])? - d as f64).abs();
            if gaps[i] >= query.eta {
                continue 'scan;
            }
        }
        if let Some(prev) = certs.last() {
            if ks.iter().zip(&prev.k).any(|(a, b)| a <= b) {
                continue;
            }
        }
        certs.push(RecurrenceCertificate {
            d,
            k: ks,
            epsilon_used: eps,
            residuals,
            mean_gaps: gaps,
        });
    }
    Ok(SearchOutcome {
        exhausted: certs.len() < query.count,
        certificates: certs,
        scanned,
        epsilon: eps,
        effective_divisors: divisors,
        bounded_d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `μ±(k+ℓ) = d + μ±(ℓ)`.
    Forward,
    /// `μ±(k−ℓ) = d − μ∓(ℓ) + (b₊ − b₋)(ℓ)`.
    Backward,
    /// `μ₊(k−ℓ) ≤ d − μ₋(ℓ) + ν(ℓ)`, stored as `[lhs, 0]` against `[bound, 0]`.
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCheck {
    pub model: usize,
    pub k: i64,
    pub mean: f64,
    pub gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexCheck {
    pub model: usize,
    pub ell: i64,
    pub kind: CheckKind,
    /// `[μ₋, μ₊]` on the iterate side.
    pub lhs: [i64; 2],
    pub rhs: [i64; 2],
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub d: i64,
    pub mean_checks: Vec<MeanCheck>,
    pub index_checks: Vec<IndexCheck>,
    pub failures: usize,
    pub passed: bool,
}

pub fn verify_certificate(
    cert: &RecurrenceCertificate,
    models: &[OrbitModel],
    ell0: i64,
    eta: f64,
) -> Result<VerificationReport> {
    if cert.k.len() != models.len() {
        return Err(Error::Input(format!(
            "certificate has {} iterates for {} models",
            cert.k.len(),
            models.len()
        )));
    }
    let d = cert.d;
    let mut mean_checks = Vec::new();
    let mut index_checks = Vec::new();
    for (i, (model, &k)) in models.iter().zip(&cert.k).enumerate() {
        if k <= ell0 {
            return Err(Error::Range(format!("k_{i} = {k} does not exceed ell0 = {ell0}")));
        }
        let mean = orbitmodel::mean_index(model, k)?;
        let gap = (mean - d as f64).abs();
        mean_checks.push(MeanCheck { model: i, k, mean, gap, pass: gap < eta });
        for l in 1..=ell0 {
            let (lo, hi) = orbitmodel::mu_pm(model, l)?;
            let b = orbitmodel::b_correction(model, l);
            let nu = orbitmodel::nullity(model, l) as i64;

            let (flo, fhi) = orbitmodel::mu_pm(model, k + l)?;
            let rhs = [d + lo, d + hi];
            index_checks.push(IndexCheck {
                model: i,
                ell: l,
                kind: CheckKind::Forward,
                lhs: [flo, fhi],
                rhs,
                pass: [flo, fhi] == rhs,
            });

            let (blo, bhi) = orbitmodel::mu_pm(model, k - l)?;
            let rhs = [d - hi + b, d - lo + b];
            index_checks.push(IndexCheck {
                model: i,
                ell: l,
                kind: CheckKind::Backward,
                lhs: [blo, bhi],
                rhs,
                pass: [blo, bhi] == rhs,
            });

            let bound = d - lo + nu;
            index_checks.push(IndexCheck {
                model: i,
                ell: l,
                kind: CheckKind::UpperBound,
                lhs: [bhi, 0],
                rhs: [bound, 0],
                pass: bhi <= bound,
            });
        }
    }
    let failures =
        mean_checks.iter().filter(|c| !c.pass).count() + index_checks.iter().filter(|c| !c.pass).count();
    Ok(VerificationReport {
        d,
        mean_checks,
        index_checks,
        failures,
        passed: failures == 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpMode {
    General,
    StronglyNondegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpInterval {
    pub lo: i64,
    pub hi: i64,
    pub mode: JumpMode,
}

impl JumpInterval {
    /// The interval left free when every iterate satisfies `μ₋ ≥ q`.
    pub fn for_lower_bound(d: i64, m: i64, q: i64, mode: JumpMode) -> Self {
        let lo = match mode {
            JumpMode::General => d - q + m + 1,
            JumpMode::StronglyNondegenerate => d - q + 1,
        };
        JumpInterval { lo, hi: d + q - 1, mode }
    }

    /// Dynamically convex case, `q = m + 2`.
    pub fn dynamically_convex(d: i64, m: i64, mode: JumpMode) -> Self {
        Self::for_lower_bound(d, m, m + 2, mode)
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn meets(&self, lo: i64, hi: i64) -> bool {
        lo <= self.hi && self.lo <= hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateWindow {
    pub model: usize,
    pub k: i64,
    pub mu_minus: i64,
    pub mu_plus: i64,
    pub disjoint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub interval: JumpInterval,
    pub windows: Vec<IterateWindow>,
    pub disjoint: bool,
}

pub fn jump_intervals(
    cert: &RecurrenceCertificate,
    models: &[OrbitModel],
    ell0: i64,
    mode: JumpMode,
) -> Result<JumpReport> {
    let m = models
        .first()
        .ok_or_else(|| Error::Input("no models".into()))?
        .half_dim();
    for x in models {
        if !orbitmodel::is_dynamically_convex(x, m)? {
            return Err(Error::Precondition(format!("model '{}' is not dynamically convex", x.label)));
        }
        if mode == JumpMode::StronglyNondegenerate && !x.is_strongly_nondegenerate() {
            return Err(Error::Precondition(format!(
                "model '{}' is not strongly non-degenerate",
                x.label
            )));
        }
    }
    let interval = JumpInterval::dynamically_convex(cert.d, m as i64, mode);
    let windows = iterate_windows(cert, models, ell0, &interval)?;
    let disjoint = windows.iter().all(|w| w.disjoint);
    Ok(JumpReport { interval, windows, disjoint })
}

/// `[μ₋, μ₊]` of every iterate `k_i ± ℓ`, `1 ≤ ℓ ≤ ℓ₀`, tested against `interval`.
pub fn iterate_windows(
    cert: &RecurrenceCertificate,
    models: &[OrbitModel],
    ell0: i64,
    interval: &JumpInterval,
) -> Result<Vec<IterateWindow>> {
    let mut windows = Vec::new();
    for (i, (x, &k)) in models.iter().zip(&cert.k).enumerate() {
        for l in 1..=ell0 {
            for kk in [k - l, k + l] {
                if kk == 0 {
                    continue;
                }
                let (lo, hi) = orbitmodel::mu_pm(x, kk)?;
                windows.push(IterateWindow {
                    model: i,
                    k: kk,
                    mu_minus: lo,
                    mu_plus: hi,
                    disjoint: !interval.meets(lo, hi),
                });
            }
        }
    }
    Ok(windows)
}
