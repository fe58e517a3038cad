//! Equivariant symplectic homology dimensions of the standard contact sphere
//! `S^{2n−1}` and of `ST*S^n`, plus the degree chains of shift-operator classes.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Manifold {
    Sphere { n: i64 },
    Stsn { n: i64 },
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Manifold::Sphere { n } => write!(f, "S^{}", 2 * n - 1),
            Manifold::Stsn { n } => write!(f, "ST*S^{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShTable {
    pub manifold: Manifold,
    pub degrees: BTreeMap<i64, u64>,
}

impl ShTable {
    pub fn dim(&self, k: i64) -> Option<u64> {
        self.degrees.get(&k).copied()
    }
}

/// Parses `a..b` as the inclusive range `a ..= b`.
pub fn parse_range(s: &str) -> Result<RangeInclusive<i64>> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::Input(format!("range {s:?} is not of the form a..b")))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let parse = |x: &str| {
        i64::from_str(x.trim()).map_err(|_| Error::Input(format!("bad range bound {x:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(Error::Input(format!("empty range {a}..{b}")));
    }
    Ok(a..=b)
}

pub fn sphere_sh_dims(n: i64, range: RangeInclusive<i64>) -> Result<ShTable> {
    if n < 2 {
        return Err(Error::Input(format!("sphere needs n ≥ 2, got {n}")));
    }
    let degrees = range
        .map(|k| (k, u64::from(k >= n + 1 && (k - n - 1) % 2 == 0)))
        .collect();
    Ok(ShTable { manifold: Manifold::Sphere { n }, degrees })
}

fn check_stsn(n: i64) -> Result<()> {
    if n < 3 {
        return Err(Error::Input(format!("ST*S^n needs n ≥ 3, got {n}")));
    }
    Ok(())
}

fn stsn_case(n: i64, k: i64) -> u64 {
    let m = n - 1;
    if k < m || (k - n).rem_euclid(2) == 0 {
        return 0;
    }
    if k % m == 0 {
        let j = k / m;
        if j > 1 && (n % 2 == 1 || j % 2 == 1) {
            return 2;
        }
    }
    1
}

pub fn stsn_sh_dims_cases(n: i64, range: RangeInclusive<i64>) -> Result<ShTable> {
    check_stsn(n)?;
    Ok(ShTable {
        manifold: Manifold::Stsn { n },
        degrees: range.map(|k| (k, stsn_case(n, k))).collect(),
    })
}

/// Rational homology of the oriented Grassmannian of 2-planes in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrassmannHomology {
    pub n: i64,
    pub dims: BTreeMap<i64, u64>,
}

impl GrassmannHomology {
    pub fn new(n: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Input(format!("Grassmannian needs n ≥ 2, got {n}")));
        }
        let mut dims: BTreeMap<i64, u64> = (0..n).map(|i| (2 * i, 1)).collect();
        if (n - 1) % 2 == 0 {
            *dims.entry(n - 1).or_insert(0) += 1;
        }
        Ok(GrassmannHomology { n, dims })
    }

    pub fn total(&self) -> u64 {
        self.dims.values().sum()
    }

    pub fn dim(&self, k: i64) -> u64 {
        self.dims.get(&k).copied().unwrap_or(0)
    }
}

pub fn stsn_sh_dims_morsebott(n: i64, range: RangeInclusive<i64>) -> Result<ShTable> {
    check_stsn(n)?;
    let gr = GrassmannHomology::new(n)?;
    let m = n - 1;
    let degrees = range
        .map(|k| {
            let mut d = 0;
            let mut j = 1;
            while (2 * j - 1) * m <= k {
                d += gr.dim(k - (2 * j - 1) * m);
                j += 1;
            }
            (k, d)
        })
        .collect();
    Ok(ShTable { manifold: Manifold::Stsn { n }, degrees })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub n: i64,
    pub agree: bool,
    /// `(degree, case formula, Morse–Bott sum)` where they differ.
    pub mismatches: Vec<(i64, u64, u64)>,
}

pub fn stsn_cross_check(n: i64, range: RangeInclusive<i64>) -> Result<CrossCheck> {
    let a = stsn_sh_dims_cases(n, range.clone())?;
    let b = stsn_sh_dims_morsebott(n, range)?;
    let mismatches: Vec<_> = a
        .degrees
        .iter()
        .filter_map(|(&k, &x)| {
            let y = b.degrees[&k];
            (x != y).then_some((k, x, y))
        })
        .collect();
    Ok(CrossCheck { n, agree: mismatches.is_empty(), mismatches })
}

/// Degrees of classes `w_1, w_2, …` with `D w_{i+1} = w_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DChain {
    pub degrees: Vec<i64>,
}

pub fn d_chain_sphere(n: i64, k_max: i64) -> Result<DChain> {
    if n < 2 {
        return Err(Error::Input(format!("sphere needs n ≥ 2, got {n}")));
    }
    Ok(DChain { degrees: (1..=k_max).map(|k| n + 2 * k - 1).collect() })
}

pub fn d_chain_stsn(n: i64, j: i64) -> Result<DChain> {
    check_stsn(n)?;
    if j < 1 {
        return Err(Error::Input(format!("band index j must be ≥ 1, got {j}")));
    }
    Ok(DChain { degrees: (0..n).map(|i| 2 * i + (2 * j - 1) * (n - 1)).collect() })
}
