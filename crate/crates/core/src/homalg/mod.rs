//! Exact rational homological algebra: filtered complexes, their spectral
//! sequence pages, and the collapse of the pages into one complex `(E^{r0}, ∂̄)`.
//!
//! Filtrations are increasing and `∂_r` lowers filtration by exactly `r`.

mod matrix;

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use matrix::{dot, is_zero_vec, parse_q, q, qvec, qvecs, RationalMatrix, RationalString, Q};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub degree: i64,
    pub filtration: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredComplex {
    pub generators: Vec<Generator>,
    /// Column `j` is the boundary of generator `j`.
    pub boundary: RationalMatrix,
}

#[derive(Serialize, Deserialize)]
struct BoundaryJson {
    entries: Vec<(usize, usize, RationalString)>,
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    generators: Vec<Generator>,
    boundary: BoundaryJson,
}

impl Serialize for FilteredComplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexJson {
            generators: self.generators.clone(),
            boundary: BoundaryJson {
                entries: self
                    .boundary
                    .nonzero_entries()
                    .map(|(i, j, v)| (i, j, RationalString(v.clone())))
                    .collect(),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FilteredComplex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ComplexJson::deserialize(d)?;
        let n = raw.generators.len();
        let mut boundary = RationalMatrix::zeros(n, n);
        for (i, j, v) in raw.boundary.entries {
            if i >= n || j >= n {
                return Err(serde::de::Error::custom(format!(
                    "boundary entry ({i}, {j}) outside {n} generators"
                )));
            }
            boundary[(i, j)] = v.0;
        }
        Ok(FilteredComplex { generators: raw.generators, boundary })
    }
}

fn unit(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

fn combine(coeffs: &[Q], vectors: &[&Vec<Q>], len: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); len];
    for (c, v) in coeffs.iter().zip(vectors) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v.iter()) {
            if !x.is_zero() {
                *o += c * x;
            }
        }
    }
    out
}

impl FilteredComplex {
    pub fn new(generators: Vec<Generator>, boundary: RationalMatrix) -> Result<Self> {
        let fc = FilteredComplex { generators, boundary };
        fc.validate()?;
        Ok(fc)
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.boundary.rows() != n || self.boundary.cols() != n {
            return Err(Error::Dimension(format!(
                "boundary is {}x{} for {n} generators",
                self.boundary.rows(),
                self.boundary.cols()
            )));
        }
        for (i, j, _) in self.boundary.nonzero_entries() {
            let (a, b) = (&self.generators[i], &self.generators[j]);
            if a.degree != b.degree - 1 {
                return Err(Error::Input(format!(
                    "boundary of '{}' (degree {}) hits '{}' (degree {})",
                    b.id, b.degree, a.id, a.degree
                )));
            }
            if a.filtration > b.filtration {
                return Err(Error::Filtration(format!(
                    "boundary of '{}' (filtration {}) hits '{}' (filtration {})",
                    b.id, b.filtration, a.id, a.filtration
                )));
            }
        }
        if !self.boundary.mul(&self.boundary).is_zero() {
            return Err(Error::BoundarySquare);
        }
        Ok(())
    }

    pub fn filtration_range(&self) -> Option<(i64, i64)> {
        let f = self.generators.iter().map(|g| g.filtration);
        Some((f.clone().min()?, f.max()?))
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.generators.iter().map(|g| g.degree).collect()
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        self.boundary.mul_vec(v)
    }

    /// Basis of `Z^s_{p,n} = {x ∈ F_p C_n : ∂x ∈ F_{p−s}}`, with `Z^s = F` for `s ≤ 0`.
    pub fn cycles_basis(&self, s: i64, p: i64, n: i64) -> Vec<Vec<Q>> {
        let len = self.len();
        let cols: Vec<usize> = (0..len)
            .filter(|&j| self.generators[j].degree == n && self.generators[j].filtration <= p)
            .collect();
        if s <= 0 {
            return cols.iter().map(|&j| unit(len, j)).collect();
        }
        let rows: Vec<usize> = (0..len)
            .filter(|&i| self.generators[i].degree == n - 1 && self.generators[i].filtration > p - s)
            .collect();
        let sub = RationalMatrix::from_fn(rows.len(), cols.len(), |a, b| self.boundary[(rows[a], cols[b])].clone());
        sub.kernel()
            .into_iter()
            .map(|k| {
                let mut v = vec![Q::zero(); len];
                for (c, &j) in k.into_iter().zip(&cols) {
                    v[j] = c;
                }
                v
            })
            .collect()
    }

    /// Homology dimensions of the underlying complex, by degree.
    pub fn homology_dims(&self) -> Result<BTreeMap<i64, usize>> {
        Ok(homology(&self.boundary, &self.degrees())?.dims)
    }
}

#[derive(Debug, Clone)]
struct Class {
    p: i64,
    n: i64,
    coords: Vec<Q>,
    lift: Vec<Q>,
}

#[derive(Debug, Clone)]
struct Stage {
    r: i64,
    classes: Vec<Class>,
    /// `∂_r` in the class basis.
    diff: RationalMatrix,
    /// `∂_r` in start coordinates, extended by zero off `E^r`.
    extended: RationalMatrix,
    complement: Vec<Vec<Q>>,
    image: Vec<Vec<Q>>,
}

struct CycleCache<'a> {
    fc: &'a FilteredComplex,
    map: HashMap<(i64, i64, i64), Vec<Vec<Q>>>,
}

impl CycleCache<'_> {
    fn get(&mut self, s: i64, p: i64, n: i64) -> &Vec<Vec<Q>> {
        let s = s.max(0);
        let fc = self.fc;
        self.map.entry((s, p, n)).or_insert_with(|| fc.cycles_basis(s, p, n))
    }
}

fn gram(cols: &[&Vec<Q>]) -> RationalMatrix {
    RationalMatrix::from_fn(cols.len(), cols.len(), |i, j| dot(cols[i], cols[j]))
}

fn step(
    fc: &FilteredComplex,
    cache: &mut CycleCache,
    r: i64,
    dim: usize,
    classes: &[Class],
) -> Result<(Stage, Vec<Class>)> {
    let len = fc.len();
    let k = classes.len();
    let mut groups: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        groups.entry((c.n, c.p)).or_default().push(i);
    }
    let empty = Vec::new();

    let mut diff = RationalMatrix::zeros(k, k);
    let mut shift: Vec<Vec<Q>> = vec![vec![Q::zero(); len]; k];
    for (j, c) in classes.iter().enumerate() {
        let y = fc.apply(&c.lift);
        if is_zero_vec(&y) {
            continue;
        }
        let targets = groups.get(&(c.n - 1, c.p - r)).unwrap_or(&empty);
        let a = cache.get(r - 1, c.p - r - 1, c.n - 1).clone();
        let b = cache.get(r - 1, c.p - 1, c.n).clone();
        let db: Vec<Vec<Q>> = b.iter().map(|v| fc.apply(v)).collect();
        let mut cols: Vec<Vec<Q>> = targets.iter().map(|&t| classes[t].lift.clone()).collect();
        cols.extend(a.iter().cloned());
        cols.extend(db);
        let sol = RationalMatrix::from_columns(len, &cols).solve(&y).ok_or_else(|| {
            Error::InconsistentPages(format!(
                "boundary of a class at (p={}, n={}) leaves Z^{} on page {r}",
                c.p, c.n, r
            ))
        })?;
        for (ti, &t) in targets.iter().enumerate() {
            diff[(t, j)] = sol[ti].clone();
        }
        let off = targets.len() + a.len();
        let brefs: Vec<&Vec<Q>> = b.iter().collect();
        shift[j] = combine(&sol[off..], &brefs, len);
    }

    let mut extended = RationalMatrix::zeros(dim, dim);
    let mut next = Vec::new();
    let mut complement = Vec::new();
    let mut image = Vec::new();
    for (&(n, p), g) in &groups {
        let w: Vec<&Vec<Q>> = g.iter().map(|&i| &classes[i].coords).collect();
        let gr = gram(&w);
        let targets = groups.get(&(n - 1, p - r)).unwrap_or(&empty);
        let sources = groups.get(&(n + 1, p + r)).unwrap_or(&empty);
        let dg = RationalMatrix::from_fn(targets.len(), g.len(), |a, b| diff[(targets[a], g[b])].clone());
        let e = RationalMatrix::from_fn(g.len(), sources.len(), |a, b| diff[(g[a], sources[b])].clone());

        for col in e.columns() {
            let v = combine(&col, &w, dim);
            if !is_zero_vec(&v) {
                image.push(v);
            }
        }

        let kern = dg.kernel();
        let kmat = RationalMatrix::from_columns(g.len(), &kern);
        for a in kmat.transpose().mul(&gr).kernel() {
            complement.push(combine(&a, &w, dim));
        }

        let cond = dg.stack(&e.transpose().mul(&gr));
        for a in cond.kernel() {
            let lifts: Vec<Vec<Q>> = g
                .iter()
                .map(|&i| {
                    classes[i]
                        .lift
                        .iter()
                        .zip(&shift[i])
                        .map(|(x, s)| x - s)
                        .collect()
                })
                .collect();
            let lrefs: Vec<&Vec<Q>> = lifts.iter().collect();
            next.push(Class {
                p,
                n,
                coords: combine(&a, &w, dim),
                lift: combine(&a, &lrefs, len),
            });
        }

        if !dg.is_zero() {
            let tw: Vec<&Vec<Q>> = targets.iter().map(|&t| &classes[t].coords).collect();
            let img = RationalMatrix::from_columns(dim, &dg.columns().iter().map(|c| combine(c, &tw, dim)).collect::<Vec<_>>());
            let inv = gr
                .inverse()
                .ok_or_else(|| Error::InconsistentPages(format!("page {r} basis is dependent")))?;
            let wt = RationalMatrix::from_rows(dim, &w.iter().map(|v| (*v).clone()).collect::<Vec<_>>());
            extended = extended.add(&img.mul(&inv).mul(&wt));
        }
    }
    next.sort_by_key(|c| (c.n, c.p));
    Ok((
        Stage {
            r,
            classes: classes.to_vec(),
            diff,
            extended,
            complement,
            image,
        },
        next,
    ))
}

fn last_page(fc: &FilteredComplex, r_start: i64) -> i64 {
    match fc.filtration_range() {
        Some((lo, hi)) => r_start.max(hi - lo + 1),
        None => r_start,
    }
}

/// Stages `r_start..=r_end` and the classes spanning `E^∞`.
fn build_tower(fc: &FilteredComplex, r_start: i64, start: Vec<Class>) -> Result<(Vec<Stage>, Vec<Class>)> {
    let r_end = last_page(fc, r_start);
    let dim = start.len();
    let mut cache = CycleCache { fc, map: HashMap::new() };
    let mut stages = Vec::new();
    let mut classes = start;
    for r in r_start..=r_end {
        let (stage, next) = step(fc, &mut cache, r, dim, &classes)?;
        stages.push(stage);
        classes = next;
    }
    if !stages.last().map_or(true, |s| s.diff.is_zero()) {
        return Err(Error::InconsistentPages(format!("differential on page {r_end} is non-zero")));
    }
    Ok((stages, classes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageClass {
    pub filtration: i64,
    pub degree: i64,
    #[serde(serialize_with = "qvec::serialize")]
    pub representative: Vec<Q>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BidegreeDim {
    pub p: i64,
    pub q: i64,
    pub degree: i64,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Page {
    pub r: i64,
    pub dims: Vec<BidegreeDim>,
    pub basis: Vec<PageClass>,
    pub differential: RationalMatrix,
}

impl Page {
    pub fn dim_map(&self) -> BTreeMap<(i64, i64), usize> {
        self.dims.iter().map(|d| ((d.p, d.degree), d.dim)).collect()
    }

    pub fn total_by_degree(&self) -> BTreeMap<i64, usize> {
        let mut m = BTreeMap::new();
        for d in &self.dims {
            *m.entry(d.degree).or_insert(0) += d.dim;
        }
        m
    }
}

fn page_of(stage: &Stage) -> Page {
    let mut counts: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for c in &stage.classes {
        *counts.entry((c.p, c.n)).or_insert(0) += 1;
    }
    Page {
        r: stage.r,
        dims: counts
            .into_iter()
            .map(|((p, n), dim)| BidegreeDim { p, q: n - p, degree: n, dim })
            .collect(),
        basis: stage
            .classes
            .iter()
            .map(|c| PageClass { filtration: c.p, degree: c.n, representative: c.lift.clone() })
            .collect(),
        differential: stage.diff.clone(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralPages {
    pub r0: i64,
    pub pages: Vec<Page>,
    pub stabilized_at: i64,
    #[serde(skip)]
    complex: FilteredComplex,
}

impl SpectralPages {
    pub fn page(&self, r: i64) -> Option<&Page> {
        let last = self.pages.last()?;
        if r >= last.r {
            return Some(last);
        }
        self.pages.iter().find(|p| p.r == r)
    }

    pub fn infinity(&self) -> Option<&Page> {
        self.pages.last()
    }

    pub fn complex(&self) -> &FilteredComplex {
        &self.complex
    }
}

fn stabilization(stages: &[Stage]) -> i64 {
    let mut at = stages.first().map_or(0, |s| s.r);
    for s in stages {
        if !s.diff.is_zero() {
            at = s.r + 1;
        }
    }
    at
}

pub fn pages(fc: &FilteredComplex) -> Result<SpectralPages> {
    fc.validate()?;
    let n = fc.len();
    let start = fc
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| Class { p: g.filtration, n: g.degree, coords: unit(n, i), lift: unit(n, i) })
        .collect();
    let (stages, _) = build_tower(fc, 0, start)?;
    Ok(SpectralPages {
        r0: 0,
        stabilized_at: stabilization(&stages),
        pages: stages.iter().map(page_of).collect(),
        complex: fc.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollapseStep {
    pub r: i64,
    /// `V_r`, the orthogonal complement of `ker ∂_r` inside `E^r`.
    #[serde(serialize_with = "qvecs::serialize")]
    pub complement: Vec<Vec<Q>>,
    #[serde(serialize_with = "qvecs::serialize")]
    pub image: Vec<Vec<Q>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollapsedComplex {
    pub r0: i64,
    pub basis: Vec<PageClass>,
    pub dbar: RationalMatrix,
    #[serde(serialize_with = "qvecs::serialize")]
    pub harmonic_basis: Vec<Vec<Q>>,
    pub steps: Vec<CollapseStep>,
}

impl CollapsedComplex {
    pub fn degrees(&self) -> Vec<i64> {
        self.basis.iter().map(|b| b.degree).collect()
    }
}

pub fn collapse(sp: &SpectralPages, r0: i64) -> Result<CollapsedComplex> {
    if r0 < sp.r0 {
        return Err(Error::Range(format!("r0 = {r0} precedes the first page {}", sp.r0)));
    }
    let page = sp
        .page(r0)
        .ok_or_else(|| Error::InconsistentPages("no pages".into()))?;
    let r0 = page.r.min(r0);
    let k = page.basis.len();
    let start = page
        .basis
        .iter()
        .enumerate()
        .map(|(i, b)| Class {
            p: b.filtration,
            n: b.degree,
            coords: unit(k, i),
            lift: b.representative.clone(),
        })
        .collect();
    let (stages, infinity) = build_tower(&sp.complex, r0, start)?;
    for s in &stages {
        let ours = page_of(s).dim_map();
        let theirs = sp.page(s.r).map(Page::dim_map).unwrap_or_default();
        if ours != theirs {
            return Err(Error::InconsistentPages(format!("page {} dimensions disagree", s.r)));
        }
    }
    let mut dbar = RationalMatrix::zeros(k, k);
    for s in &stages {
        dbar = dbar.add(&s.extended);
    }
    if !dbar.mul(&dbar).is_zero() {
        return Err(Error::InconsistentPages("collapsed differential does not square to zero".into()));
    }
    let harmonic_basis = infinity.into_iter().map(|c| c.coords).collect();
    Ok(CollapsedComplex {
        r0,
        basis: page.basis.clone(),
        dbar,
        harmonic_basis,
        steps: stages
            .iter()
            .map(|s| CollapseStep { r: s.r, complement: s.complement.clone(), image: s.image.clone() })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub dims: BTreeMap<i64, usize>,
    #[serde(serialize_with = "qvecs::serialize")]
    pub harmonic: Vec<Vec<Q>>,
}

/// Homology of a differential lowering the given degrees by one.
pub fn homology(mat: &RationalMatrix, degrees: &[i64]) -> Result<HomologyReport> {
    let n = degrees.len();
    if mat.rows() != n || mat.cols() != n {
        return Err(Error::Dimension(format!(
            "differential is {}x{} for {n} basis vectors",
            mat.rows(),
            mat.cols()
        )));
    }
    if let Some((i, j, _)) = mat.nonzero_entries().find(|&(i, j, _)| degrees[i] != degrees[j] - 1) {
        return Err(Error::Input(format!("entry ({i}, {j}) does not lower degree by one")));
    }
    if !mat.mul(mat).is_zero() {
        return Err(Error::BoundarySquare);
    }
    let mut by_degree: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &d) in degrees.iter().enumerate() {
        by_degree.entry(d).or_default().push(i);
    }
    let rank_from = |d: i64| -> usize {
        by_degree.get(&d).map_or(0, |cols| {
            RationalMatrix::from_fn(n, cols.len(), |i, j| mat[(i, cols[j])].clone()).rank()
        })
    };
    let dims = by_degree
        .iter()
        .map(|(&d, cols)| (d, cols.len() - rank_from(d) - rank_from(d + 1)))
        .collect();
    let harmonic = mat.stack(&mat.transpose()).kernel();
    Ok(HomologyReport { dims, harmonic })
}

/// Random filtered complex with known homology: a direct sum of isolated
/// generators and acyclic pairs, conjugated by a filtration-preserving
/// unitriangular change of basis and shuffled.
pub fn random_filtered_complex<R: Rng>(
    rng: &mut R,
    generators: usize,
    levels: i64,
    max_degree: i64,
) -> (FilteredComplex, BTreeMap<i64, usize>) {
    assert!(generators >= 1 && levels >= 1 && max_degree >= 1);
    let mut gens: Vec<(i64, i64)> = Vec::new();
    let mut pairs: Vec<(usize, usize, i64)> = Vec::new();
    let mut expected: BTreeMap<i64, usize> = BTreeMap::new();
    while gens.len() < generators {
        if generators - gens.len() >= 2 && rng.gen_bool(0.6) {
            let n = rng.gen_range(1..=max_degree);
            let fb = rng.gen_range(0..levels);
            let fa = rng.gen_range(0..=fb);
            let c = *[-2i64, -1, 1, 2].choose(rng).unwrap();
            gens.push((n - 1, fa));
            gens.push((n, fb));
            pairs.push((gens.len() - 2, gens.len() - 1, c));
        } else {
            let n = rng.gen_range(0..=max_degree);
            gens.push((n, rng.gen_range(0..levels)));
            *expected.entry(n).or_insert(0) += 1;
        }
    }
    let len = gens.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by_key(|&i| (gens[i].0, gens[i].1, i));
    let mut pos = vec![0; len];
    for (k, &i) in order.iter().enumerate() {
        pos[i] = k;
    }
    let mut d0 = RationalMatrix::zeros(len, len);
    for &(a, b, c) in &pairs {
        d0[(pos[a], pos[b])] = q(c);
    }
    let sorted: Vec<(i64, i64)> = order.iter().map(|&i| gens[i]).collect();
    let mut change = RationalMatrix::identity(len);
    for j in 0..len {
        for i in 0..j {
            if sorted[i].0 == sorted[j].0 && sorted[i].1 <= sorted[j].1 && rng.gen_bool(0.5) {
                change[(i, j)] = q(rng.gen_range(-2..=2));
            }
        }
    }
    let inv = change.inverse().expect("unitriangular");
    let d = change.mul(&d0).mul(&inv);

    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(rng);
    let boundary = RationalMatrix::from_fn(len, len, |i, j| d[(perm[i], perm[j])].clone());
    let generators = perm
        .iter()
        .enumerate()
        .map(|(k, &i)| Generator {
            id: format!("g{k}"),
            degree: sorted[i].0,
            filtration: sorted[i].1,
        })
        .collect();
    (FilteredComplex { generators, boundary }, expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gen(id: &str, degree: i64, filtration: i64) -> Generator {
        Generator { id: id.into(), degree, filtration }
    }

    fn pair() -> FilteredComplex {
        let mut d = RationalMatrix::zeros(2, 2);
        d[(0, 1)] = q(1);
        FilteredComplex::new(vec![gen("a", 0, 0), gen("b", 1, 1)], d).unwrap()
    }

    #[test]
    fn acyclic_pair() {
        let sp = pages(&pair()).unwrap();
        assert_eq!(sp.page(0).unwrap().basis.len(), 2);
        let e1 = sp.page(1).unwrap();
        assert_eq!(e1.basis.len(), 2);
        assert_eq!(e1.differential[(0, 1)], q(1));
        assert!(sp.page(2).unwrap().basis.is_empty());
        assert_eq!(sp.stabilized_at, 2);

        let c = collapse(&sp, 1).unwrap();
        assert_eq!(c.dbar[(0, 1)], q(1));
        assert!(c.harmonic_basis.is_empty());
        let h = homology(&c.dbar, &c.degrees()).unwrap();
        assert!(h.dims.values().all(|&d| d == 0));
    }

    #[test]
    fn zero_boundary() {
        let fc = FilteredComplex::new(
            vec![gen("x", 0, 0), gen("y", 1, 1), gen("z", 2, 2)],
            RationalMatrix::zeros(3, 3),
        )
        .unwrap();
        let sp = pages(&fc).unwrap();
        assert!(sp.pages.iter().all(|p| p.basis.len() == 3 && p.differential.is_zero()));
        assert_eq!(sp.stabilized_at, 0);
        let c = collapse(&sp, 0).unwrap();
        assert!(c.dbar.is_zero());
        assert_eq!(c.harmonic_basis.len(), 3);
    }

    #[test]
    fn homology_examples() {
        let h = homology(&RationalMatrix::zeros(3, 3), &[0, 0, 0]).unwrap();
        assert_eq!(h.dims[&0], 3);
        assert_eq!(h.harmonic.len(), 3);
        let mut d = RationalMatrix::zeros(2, 2);
        d[(0, 1)] = q(1);
        let h = homology(&d, &[0, 1]).unwrap();
        assert_eq!((h.dims[&0], h.dims[&1]), (0, 0));
    }

    #[test]
    fn validation() {
        let mut d = RationalMatrix::zeros(2, 2);
        d[(0, 1)] = q(1);
        let e = FilteredComplex::new(vec![gen("a", 0, 2), gen("b", 1, 1)], d.clone());
        assert!(matches!(e, Err(Error::Filtration(_))));
        let e = FilteredComplex::new(vec![gen("a", 0, 0), gen("b", 2, 1)], d);
        assert!(matches!(e, Err(Error::Input(_))));
        let mut d = RationalMatrix::zeros(3, 3);
        d[(1, 2)] = q(1);
        d[(0, 1)] = q(1);
        let e = FilteredComplex::new(vec![gen("a", 0, 0), gen("b", 1, 0), gen("c", 2, 0)], d);
        assert!(matches!(e, Err(Error::BoundarySquare)));
    }

    #[test]
    fn three_stage_zigzag() {
        // x -> y across one level, z -> w across two levels.
        let g = vec![gen("y", 0, 0), gen("x", 1, 1), gen("w", 0, 0), gen("z", 1, 2), gen("h", 1, 2)];
        let mut d = RationalMatrix::zeros(5, 5);
        d[(0, 1)] = q(1);
        d[(2, 3)] = q(3);
        let sp = pages(&FilteredComplex::new(g, d).unwrap()).unwrap();
        let sizes: Vec<usize> = sp.pages.iter().map(|p| p.basis.len()).collect();
        assert_eq!(sizes, vec![5, 5, 3, 1]);
        assert_eq!(sp.stabilized_at, 3);
        for r0 in 0..=3 {
            let c = collapse(&sp, r0).unwrap();
            assert!(c.dbar.mul(&c.dbar).is_zero());
            assert_eq!(c.harmonic_basis.len(), 1);
        }
    }

    #[test]
    fn random_complex_matches_homology() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (fc, expected) = random_filtered_complex(&mut rng, 14, 4, 3);
            fc.validate().unwrap();
            let h = fc.homology_dims().unwrap();
            for (d, &v) in &h {
                assert_eq!(v, expected.get(d).copied().unwrap_or(0));
            }
            let sp = pages(&fc).unwrap();
            let inf = sp.infinity().unwrap().total_by_degree();
            for (d, &v) in &h {
                assert_eq!(inf.get(d).copied().unwrap_or(0), v);
            }
        }
    }

    #[test]
    fn json_format() {
        let src = r#"{"generators":[{"id":"a","degree":0,"filtration":0},{"id":"b","degree":1,"filtration":1}],
                      "boundary":{"entries":[[0,1,"1/2"]]}}"#;
        let fc: FilteredComplex = serde_json::from_str(src).unwrap();
        fc.validate().unwrap();
        assert_eq!(fc.boundary[(0, 1)], parse_q("1/2").unwrap());
        let back: FilteredComplex = serde_json::from_str(&serde_json::to_string(&fc).unwrap()).unwrap();
        assert_eq!(back, fc);
    }
}
