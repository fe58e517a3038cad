//! Closed-form indices of iterated orbits from a symbolic block decomposition
//! of the linearized return map: a loop factor, elliptic rotations, a
//! hyperbolic part and a totally degenerate block.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathindex::GeneratedPath;

/// Fractional parts closer than this to an integer are treated as resonant.
pub const GUARD_BAND: f64 = 1e-12;

/// `(⌊kx⌋, {kx})` with the product formed without rounding error.
pub fn floor_product(k: i64, x: f64) -> Result<(i64, f64)> {
    let kf = k as f64;
    let p = kf * x;
    let e = kf.mul_add(x, -p);
    let f = p.floor();
    let mut frac = (p - f) + e;
    let mut fl = f;
    if frac < 0.0 {
        fl -= 1.0;
        frac += 1.0;
    } else if frac >= 1.0 {
        fl += 1.0;
        frac -= 1.0;
    }
    if frac < GUARD_BAND || 1.0 - frac < GUARD_BAND {
        return Err(Error::NearResonance(format!(
            "{k}·{x} lies within {GUARD_BAND:e} of an integer"
        )));
    }
    Ok((fl as i64, frac))
}

/// Distance from `kx` to the nearest integer.
pub fn dist_to_int(k: i64, x: f64) -> Result<f64> {
    let (_, frac) = floor_product(k, x)?;
    Ok(frac.min(1.0 - frac))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    /// Reduced `p/q` with `0 < |p| < q`.
    Rational(i64, i64),
    Irrational(f64),
}

impl Rotation {
    pub fn value(&self) -> f64 {
        match *self {
            Rotation::Rational(p, q) => p as f64 / q as f64,
            Rotation::Irrational(x) => x,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Rotation::Rational(p, q) => {
                if q <= 0 || p == 0 || p.abs() >= q || p.gcd(&q) != 1 {
                    return Err(Error::InvalidModel(format!(
                        "rational rotation {p}/{q} must be reduced with 0 < |p| < q"
                    )));
                }
            }
            Rotation::Irrational(x) => {
                if !x.is_finite() || x == 0.0 || x.abs() >= 1.0 {
                    return Err(Error::InvalidModel(format!("rotation number {x} must lie in (-1, 1) \\ {{0}}")));
                }
            }
        }
        Ok(())
    }

    /// `(μ₋, μ₊)` of the k-th iterate of the rotation block, `k ≥ 1`.
    fn mu_pm(&self, k: i64) -> Result<(i64, i64)> {
        match *self {
            Rotation::Rational(p, q) => {
                if k % q == 0 {
                    let c = 2 * p * (k / q);
                    Ok((c - 1, c + 1))
                } else {
                    let v = 2 * Integer::div_floor(&(k * p), &q) + 1;
                    Ok((v, v))
                }
            }
            Rotation::Irrational(x) => {
                let (fl, _) = floor_product(k, x)?;
                let v = 2 * fl + 1;
                Ok((v, v))
            }
        }
    }

    fn degenerate_at(&self, k: i64) -> bool {
        matches!(*self, Rotation::Rational(_, q) if k % q == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateBlock {
    pub half_dim: usize,
    pub sgn: i64,
    pub nullity: i64,
}

impl DegenerateBlock {
    pub fn validate(&self) -> Result<()> {
        let (h, s, u) = (self.half_dim as i64, self.sgn, self.nullity);
        let ok = h >= 1 && u >= 1 && s.abs() <= u && (s + u) % 2 == 0 && s.abs() <= 2 * h - u && u <= 2 * h;
        if !ok {
            return Err(Error::InvalidModel(format!(
                "degenerate block (half_dim {h}, sgn {s}, nullity {u}) is not realizable"
            )));
        }
        Ok(())
    }

    pub fn mu_pm(&self) -> (i64, i64) {
        ((self.sgn - self.nullity) / 2, (self.sgn + self.nullity) / 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitModel {
    #[serde(default)]
    pub label: String,
    pub loop_index: i64,
    #[serde(default)]
    pub rotations: Vec<Rotation>,
    #[serde(default)]
    pub hyperbolic_index: i64,
    #[serde(default)]
    pub hyperbolic_planes: usize,
    #[serde(default)]
    pub degenerate: Option<DegenerateBlock>,
    #[serde(default)]
    pub action: Option<f64>,
}

impl OrbitModel {
    pub fn rotation(lambda: Rotation) -> Self {
        OrbitModel {
            label: String::new(),
            loop_index: 0,
            rotations: vec![lambda],
            hyperbolic_index: 0,
            hyperbolic_planes: 0,
            degenerate: None,
            action: None,
        }
    }

    pub fn half_dim(&self) -> usize {
        self.rotations.len() + self.hyperbolic_planes + self.degenerate.map_or(0, |d| d.half_dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.loop_index % 2 != 0 {
            return Err(Error::InvalidModel(format!("loop index {} must be even", self.loop_index)));
        }
        if self.half_dim() == 0 {
            return Err(Error::InvalidModel("model has no blocks".into()));
        }
        for r in &self.rotations {
            r.validate()?;
        }
        if self.hyperbolic_planes == 0 && self.hyperbolic_index != 0 {
            return Err(Error::InvalidModel("hyperbolic index without hyperbolic planes".into()));
        }
        if let Some(d) = &self.degenerate {
            d.validate()?;
        }
        if let Some(a) = self.action {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidModel(format!("action {a} must be positive")));
            }
        }
        Ok(())
    }

    /// Least common multiple of the rational rotation denominators.
    pub fn root_of_unity_degree(&self) -> i64 {
        self.rotations.iter().fold(1, |acc, r| match *r {
            Rotation::Rational(_, q) => acc.lcm(&q),
            Rotation::Irrational(_) => acc,
        })
    }

    pub fn irrationals(&self) -> impl Iterator<Item = f64> + '_ {
        self.rotations.iter().filter_map(|r| match *r {
            Rotation::Irrational(x) => Some(x),
            Rotation::Rational(..) => None,
        })
    }

    pub fn is_strongly_nondegenerate(&self) -> bool {
        self.degenerate.is_none() && self.rotations.iter().all(|r| matches!(r, Rotation::Irrational(_)))
    }
}

fn check_k(k: i64) -> Result<()> {
    if k == 0 {
        Err(Error::ZeroIterate)
    } else {
        Ok(())
    }
}

pub fn mean_index(model: &OrbitModel, k: i64) -> Result<f64> {
    check_k(k)?;
    let integer = k * (model.loop_index + model.hyperbolic_index);
    let mut rational = num_rational::Ratio::new(0i64, 1);
    let mut irrational = 0.0;
    for r in &model.rotations {
        match *r {
            Rotation::Rational(p, q) => rational += num_rational::Ratio::new(2 * p * k, q),
            Rotation::Irrational(x) => irrational += 2.0 * (k as f64) * x,
        }
    }
    let rational = *rational.numer() as f64 / *rational.denom() as f64;
    Ok(integer as f64 + rational + irrational)
}

pub fn mu_pm(model: &OrbitModel, k: i64) -> Result<(i64, i64)> {
    check_k(k)?;
    if k < 0 {
        let (lo, hi) = mu_pm(model, -k)?;
        return Ok((-hi, -lo));
    }
    let shift = k * (model.loop_index + model.hyperbolic_index);
    let (mut lo, mut hi) = (shift, shift);
    for r in &model.rotations {
        let (a, b) = r.mu_pm(k)?;
        lo += a;
        hi += b;
    }
    if let Some(d) = &model.degenerate {
        let (a, b) = d.mu_pm();
        lo += a;
        hi += b;
    }
    Ok((lo, hi))
}

pub fn nullity(model: &OrbitModel, k: i64) -> usize {
    let k = k.abs().max(1);
    model.degenerate.map_or(0, |d| d.half_dim) + model.rotations.iter().filter(|r| r.degenerate_at(k)).count()
}

pub fn cz_index(model: &OrbitModel, k: i64) -> Result<i64> {
    check_k(k)?;
    if nullity(model, k) > 0 {
        let rational_blocks = model
            .rotations
            .iter()
            .filter(|r| r.degenerate_at(k.abs()))
            .map(|r| match *r {
                Rotation::Rational(p, q) => (p, q),
                Rotation::Irrational(_) => unreachable!(),
            })
            .collect();
        return Err(Error::DegenerateIterate {
            k,
            rational_blocks,
            degenerate_block: model.degenerate.is_some(),
        });
    }
    Ok(mu_pm(model, k)?.0)
}

/// `b₊ − b₋` of the k-th iterate.
pub fn b_correction(model: &OrbitModel, _k: i64) -> i64 {
    model.degenerate.map_or(0, |d| d.sgn)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterIndex {
    pub k: i64,
    pub mean: f64,
    pub mu_minus: i64,
    pub mu_plus: i64,
    pub nu: usize,
    pub cz: Option<i64>,
}

pub fn iter_index(model: &OrbitModel, k: i64) -> Result<IterIndex> {
    let (lo, hi) = mu_pm(model, k)?;
    let nu = nullity(model, k);
    Ok(IterIndex {
        k,
        mean: mean_index(model, k)?,
        mu_minus: lo,
        mu_plus: hi,
        nu,
        cz: (nu == 0).then_some(lo),
    })
}

pub fn is_dynamically_convex(model: &OrbitModel, m: usize) -> Result<bool> {
    if model.half_dim() != m {
        return Err(Error::Dimension(format!(
            "model has half-dimension {}, expected {m}",
            model.half_dim()
        )));
    }
    Ok(mu_pm(model, 1)?.0 >= m as i64 + 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcViolation {
    pub k: i64,
    pub check: String,
    pub lhs: i64,
    pub rhs: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcReport {
    pub k_max: i64,
    pub holds: bool,
    pub first_violation: Option<DcViolation>,
}

pub fn verify_dc_iteration(model: &OrbitModel, m: usize, k_max: i64) -> Result<DcReport> {
    if !is_dynamically_convex(model, m)? {
        return Err(Error::Precondition(format!(
            "model '{}' is not dynamically convex",
            model.label
        )));
    }
    let m = m as i64;
    let gain = mu_pm(model, 1)?.0 - m;
    let mut prev = mu_pm(model, 1)?.0;
    let mut violation = None;
    for k in 1..=k_max {
        let next = mu_pm(model, k + 1)?.0;
        let checks = [
            ("mu_minus(k+1) >= mu_minus(k) + mu_minus(1) - m", next, prev + gain),
            ("mu_minus(k+1) > mu_minus(k)", next, prev + 1),
            ("mu_minus(k) >= 2k + m", prev, 2 * k + m),
        ];
        if let Some((name, lhs, rhs)) = checks.into_iter().find(|(_, l, r)| l < r) {
            violation = Some(DcViolation { k, check: name.to_string(), lhs, rhs });
            break;
        }
        prev = next;
    }
    Ok(DcReport {
        k_max,
        holds: violation.is_none(),
        first_violation: violation,
    })
}

fn plane(h: DMatrix<f64>, steps: usize) -> GeneratedPath {
    GeneratedPath::constant(h, steps)
}

fn scaled_identity(n: usize, c: f64) -> DMatrix<f64> {
    DMatrix::identity(n, n) * c
}

/// `±(p₁q₂ + … + p_{d−1}q_d + p_d²/2)` in plane coordinates `(p_i, q_i)`.
fn nilpotent_form(d: usize, sign: f64) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d.saturating_sub(1) {
        h[(2 * i, 2 * (i + 1) + 1)] = sign;
        h[(2 * (i + 1) + 1, 2 * i)] = sign;
    }
    h[(2 * (d - 1), 2 * (d - 1))] = sign;
    h
}

fn hyperbolic_plane(index: i64, steps: usize) -> GeneratedPath {
    let stretch = plane(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), steps);
    if index == 0 {
        return stretch;
    }
    plane(scaled_identity(2, PI * index as f64), steps).concat(&stretch)
}

/// A generated path whose indices are those of the model.
pub fn model_to_path(model: &OrbitModel, steps: usize) -> Result<GeneratedPath> {
    model.validate()?;
    let mut w = model.loop_index / 2;
    let mut parts = Vec::new();

    for r in &model.rotations {
        let lambda = r.value() + w as f64;
        w = 0;
        parts.push(plane(scaled_identity(2, 2.0 * PI * lambda), steps));
    }

    let mut degenerate_parts = Vec::new();
    if let Some(d) = model.degenerate {
        let (hd, s, u) = (d.half_dim as i64, d.sgn, d.nullity);
        if u >= hd {
            let zero = u - hd;
            let plus = (2 * hd - u + s) / 2;
            let minus = (2 * hd - u - s) / 2;
            for _ in 0..zero {
                degenerate_parts.push(plane(scaled_identity(2, 2.0 * PI * w as f64), steps));
                w = 0;
            }
            for _ in 0..plus {
                degenerate_parts.push(plane(nilpotent_form(1, 1.0), steps));
            }
            for _ in 0..minus {
                degenerate_parts.push(plane(nilpotent_form(1, -1.0), steps));
            }
        } else {
            let plus = (u + s) / 2;
            let minus = (u - s) / 2;
            let big = (hd - u + 1) as usize;
            let signs = std::iter::repeat(1.0).take(plus as usize).chain(std::iter::repeat(-1.0).take(minus as usize));
            for (i, sign) in signs.enumerate() {
                let size = if i == 0 { big } else { 1 };
                degenerate_parts.push(plane(nilpotent_form(size, sign), steps));
            }
        }
    }

    let mut hyper_index = model.hyperbolic_index;
    if w != 0 && model.hyperbolic_planes > 0 {
        hyper_index += 2 * w;
        w = 0;
    }
    for i in 0..model.hyperbolic_planes {
        parts.push(hyperbolic_plane(if i == 0 { hyper_index } else { 0 }, steps));
    }

    if !degenerate_parts.is_empty() {
        let block = GeneratedPath::direct_sum(&degenerate_parts);
        if w != 0 {
            let mut lp = DMatrix::zeros(2 * block.m, 2 * block.m);
            lp[(0, 0)] = 2.0 * PI * w as f64;
            lp[(1, 1)] = 2.0 * PI * w as f64;
            w = 0;
            parts.push(plane(lp, steps).concat(&block));
        } else {
            parts.push(block);
        }
    }
    debug_assert_eq!(w, 0);
    Ok(GeneratedPath::direct_sum(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(r: Rotation) -> OrbitModel {
        OrbitModel::rotation(r)
    }

    #[test]
    fn mean_examples() {
        assert!((mean_index(&rot(Rotation::Irrational(0.3)), 1).unwrap() - 0.6).abs() < 1e-15);
        let mut m = rot(Rotation::Rational(1, 3));
        m.loop_index = 4;
        assert!((mean_index(&m, 3).unwrap() - 14.0).abs() < 1e-12);
        let s = 2f64.sqrt();
        let mut x1 = rot(Rotation::Irrational(1.0 / s));
        x1.loop_index = 2;
        assert!((mean_index(&x1, 1).unwrap() - 2.0 * (1.0 + 1.0 / s)).abs() < 1e-12);
        assert!(matches!(mean_index(&x1, 0), Err(Error::ZeroIterate)));
    }

    #[test]
    fn mu_pm_examples() {
        let third = rot(Rotation::Rational(1, 3));
        assert_eq!(mu_pm(&third, 3).unwrap(), (1, 3));
        assert_eq!(mu_pm(&third, 2).unwrap(), (1, 1));
        let m = OrbitModel {
            loop_index: 4,
            degenerate: Some(DegenerateBlock { half_dim: 1, sgn: 1, nullity: 1 }),
            ..rot(Rotation::Irrational(0.5))
        };
        let m = OrbitModel { rotations: vec![], ..m };
        assert_eq!(mu_pm(&m, 2).unwrap(), (8, 9));
        assert_eq!(mu_pm(&rot(Rotation::Irrational(-0.3)), 1).unwrap(), (-1, -1));
        assert_eq!(mu_pm(&rot(Rotation::Rational(-1, 3)), 3).unwrap(), (-3, -1));
    }

    #[test]
    fn cz_and_nullity() {
        assert_eq!(cz_index(&rot(Rotation::Irrational(0.3)), 1).unwrap(), 1);
        assert!(matches!(
            cz_index(&rot(Rotation::Rational(1, 3)), 3),
            Err(Error::DegenerateIterate { k: 3, .. })
        ));
        let hyp = OrbitModel {
            rotations: vec![],
            hyperbolic_index: 2,
            hyperbolic_planes: 1,
            ..rot(Rotation::Irrational(0.1))
        };
        assert_eq!(cz_index(&hyp, 5).unwrap(), 10);
        assert_eq!(nullity(&rot(Rotation::Rational(1, 3)), 3), 1);
        assert_eq!(nullity(&rot(Rotation::Rational(1, 3)), 2), 0);
        let m = OrbitModel {
            degenerate: Some(DegenerateBlock { half_dim: 2, sgn: 0, nullity: 2 }),
            ..rot(Rotation::Rational(1, 2))
        };
        assert_eq!(nullity(&m, 4), 3);
    }

    #[test]
    fn b_correction_examples() {
        let m = OrbitModel {
            rotations: vec![],
            degenerate: Some(DegenerateBlock { half_dim: 1, sgn: 1, nullity: 1 }),
            ..rot(Rotation::Irrational(0.1))
        };
        assert_eq!(b_correction(&m, 7), 1);
        assert_eq!(b_correction(&rot(Rotation::Rational(1, 3)), 3), 0);
        assert_eq!(b_correction(&rot(Rotation::Irrational(0.3)), 1), 0);
    }

    #[test]
    fn dynamical_convexity() {
        let mut m = rot(Rotation::Irrational(0.6));
        m.loop_index = 2;
        assert!(is_dynamically_convex(&m, 1).unwrap());
        assert!(!is_dynamically_convex(&rot(Rotation::Irrational(0.3)), 1).unwrap());
        assert!(is_dynamically_convex(&m, 2).is_err());
        let golden = OrbitModel { rotations: vec![Rotation::Irrational(0.618_033_988_749_894_9)], ..m.clone() };
        let rep = verify_dc_iteration(&golden, 1, 100).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(matches!(
            verify_dc_iteration(&rot(Rotation::Irrational(0.3)), 1, 10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn floor_product_guard() {
        assert!(floor_product(2, 0.5).is_err());
        assert_eq!(floor_product(7, 0.3).unwrap().0, 2);
        assert_eq!(floor_product(-7, 0.3).unwrap().0, -3);
        let s = 2f64.sqrt() - 1.0;
        assert!((dist_to_int(2, s).unwrap() - 0.171573).abs() < 1e-6);
    }

    #[test]
    fn realizability() {
        for (h, s, u, ok) in [(1, 1, 1, true), (1, 0, 2, true), (1, 2, 0, false), (2, 1, 1, true), (1, 1, 3, false), (2, 0, 1, false)] {
            let d = DegenerateBlock { half_dim: h, sgn: s, nullity: u };
            assert_eq!(d.validate().is_ok(), ok, "{d:?}");
        }
    }

    #[test]
    fn json_shape() {
        let m = OrbitModel {
            label: "x".into(),
            loop_index: 2,
            rotations: vec![Rotation::Rational(1, 3), Rotation::Irrational(0.25)],
            hyperbolic_index: 0,
            hyperbolic_planes: 0,
            degenerate: None,
            action: Some(1.5),
        };
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["rotations"][0]["rational"], serde_json::json!([1, 3]));
        assert_eq!(v["rotations"][1]["irrational"], serde_json::json!(0.25));
        let back: OrbitModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
