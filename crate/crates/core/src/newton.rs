//! Newton polyhedra at the origin: exact H/V-representations, the face
//! lattice, and the diagonal invariants `sigma` and `kappa`.
//!
//! `Δ₀(f) = conv(Supp f) + ℝ₊ⁿ`. Its recession cone is the orthant, so every
//! facet normal is a nonnegative primitive integer vector `k` and the facet
//! reads `k·x ≥ N(k)`.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_dimension: usize,
    /// Cap on `2^#facets` during face enumeration.
    pub max_facet_subsets: u64,
    pub max_lattice_points: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dimension: 8,
            max_facet_subsets: 1 << 22,
            max_lattice_points: 50_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl Facet {
    pub fn nu(&self) -> i64 {
        self.normal.iter().sum()
    }

    pub fn eval(&self, x: &[i64]) -> i64 {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn is_tight(&self, x: &[i64]) -> bool {
        self.eval(x) == self.offset
    }
}

/// Canonical identity of a face: the polyhedron vertices it contains and the
/// coordinate axes in its recession cone (both sorted, 0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceKey {
    pub vertices: Vec<usize>,
    pub axes: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct NewtonPolyhedron {
    n: usize,
    vertices: Vec<Vec<i64>>,
    facets: Vec<Facet>,
    source: Polynomial,
}

impl NewtonPolyhedron {
    pub fn build(f: &Polynomial) -> Result<Self> {
        Self::build_with(f, &Limits::default())
    }

    pub fn build_with(f: &Polynomial, limits: &Limits) -> Result<Self> {
        let n = f.n();
        if n > limits.max_dimension {
            return Err(Error::DimensionTooLarge {
                n,
                cap: limits.max_dimension,
            });
        }
        let points: Vec<Vec<i64>> = f.support().map(|e| e.as_i64()).collect();
        let facets = facets_by_double_description(n, &points)?;
        let vertices = points
            .into_iter()
            .filter(|v| {
                let tight: Vec<Vec<i64>> = facets
                    .iter()
                    .filter(|fc| fc.is_tight(v))
                    .map(|fc| fc.normal.clone())
                    .collect();
                rank(&tight, n) == n
            })
            .collect();
        Ok(NewtonPolyhedron {
            n,
            vertices,
            facets,
            source: f.clone(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn source(&self) -> &Polynomial {
        &self.source
    }

    /// Whether `x` satisfies every facet inequality.
    pub fn contains(&self, x: &[i64]) -> bool {
        self.facets.iter().all(|fc| fc.eval(x) >= fc.offset)
    }

    /// `(ν(k), N(k), F(k))` for `k ∈ ℕⁿ`.
    pub fn eval_k(&self, k: &[u64]) -> (u64, i64, FaceKey) {
        assert_eq!(k.len(), self.n);
        let nu = k.iter().sum();
        let mut best = i64::MAX;
        let mut argmin = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let val: i64 = v.iter().zip(k).map(|(a, &b)| a * b as i64).sum();
            if val < best {
                best = val;
                argmin.clear();
            }
            if val == best {
                argmin.push(i);
            }
        }
        let axes = (0..self.n).filter(|&i| k[i] == 0).collect();
        (
            nu,
            best,
            FaceKey {
                vertices: argmin,
                axes,
            },
        )
    }

    /// Affine dimension of `conv(vertices) + cone(axes)`.
    pub fn face_dim(&self, key: &FaceKey) -> usize {
        let base = &self.vertices[key.vertices[0]];
        let mut rows: Vec<Vec<i64>> = key.vertices[1..]
            .iter()
            .map(|&i| self.vertices[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        for &ax in &key.axes {
            let mut e = vec![0; self.n];
            e[ax] = 1;
            rows.push(e);
        }
        rank(&rows, self.n)
    }

    /// Facets containing the face.
    pub fn active_facets(&self, key: &FaceKey) -> Vec<usize> {
        self.facets
            .iter()
            .enumerate()
            .filter(|(_, fc)| {
                key.vertices.iter().all(|&v| fc.is_tight(&self.vertices[v]))
                    && key.axes.iter().all(|&ax| fc.normal[ax] == 0)
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// The diagonal entry point `t*` (so `(t*,…,t*)` is the first diagonal
    /// point of the polyhedron) together with the facets tight there.
    pub fn diagonal_entry(&self) -> (BigRational, Vec<usize>) {
        let t_star = self
            .facets
            .iter()
            .filter(|fc| fc.offset > 0)
            .map(|fc| rational::ratio(fc.offset, fc.nu()))
            .max()
            .expect("a facet with positive offset exists because 0 ∉ Supp(f)");
        let tight = self
            .facets
            .iter()
            .enumerate()
            .filter(|(_, fc)| t_star.clone() * rational::integer(fc.nu()) == rational::integer(fc.offset))
            .map(|(i, _)| i)
            .collect();
        (t_star, tight)
    }

    pub fn sigma(&self) -> BigRational {
        self.diagonal_entry().0.recip()
    }

    pub fn sigma_data(&self) -> SigmaData {
        let (t_star, tight) = self.diagonal_entry();
        let mut k = vec![0u64; self.n];
        for &i in &tight {
            for (kj, &a) in k.iter_mut().zip(&self.facets[i].normal) {
                *kj += a as u64;
            }
        }
        let (_, _, f0) = self.eval_k(&k);
        let f0_dim = self.face_dim(&f0);
        SigmaData {
            sigma: t_star.recip(),
            t_star,
            kappa: self.n - f0_dim,
            f0_dim,
            f0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaData {
    pub sigma: BigRational,
    pub t_star: BigRational,
    pub f0: FaceKey,
    pub f0_dim: usize,
    pub kappa: usize,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub id: usize,
    pub vertex_ids: Vec<usize>,
    pub recession_axes: Vec<usize>,
    pub dim: usize,
    pub active_facet_ids: Vec<usize>,
    pub witness_k: Vec<u64>,
    pub sigma_tau: BigRational,
    pub restriction: Polynomial,
}

impl Face {
    pub fn key(&self) -> FaceKey {
        FaceKey {
            vertices: self.vertex_ids.clone(),
            axes: self.recession_axes.clone(),
        }
    }
}

/// A polyhedron together with its complete face list.
#[derive(Clone, Debug)]
pub struct FaceLattice {
    polyhedron: NewtonPolyhedron,
    faces: Vec<Face>,
    index: HashMap<FaceKey, usize>,
    sigma: SigmaData,
    f0_face_id: usize,
}

/// Enumerates every face of `p`, `Δ₀` itself included.
///
/// Each face's normal cone is generated by the normals of the facets that
/// contain it, and the sum of those normals lies in its relative interior.
/// So `F(Σ_{s∈S} k_s)` over all facet subsets `S` reaches every face.
pub fn enumerate_faces(p: &NewtonPolyhedron, limits: &Limits) -> Result<FaceLattice> {
    let nf = p.facets.len();
    let subsets = 1u128 << nf.min(127);
    if nf >= 64 || subsets > limits.max_facet_subsets as u128 {
        return Err(Error::FacetCountTooLarge {
            facets: nf,
            cap: limits.max_facet_subsets,
        });
    }
    let mut found: HashMap<FaceKey, Vec<u64>> = HashMap::new();
    for mask in 0u64..(1u64 << nf) {
        let mut k = vec![0u64; p.n];
        for (i, fc) in p.facets.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for (kj, &a) in k.iter_mut().zip(&fc.normal) {
                    *kj += a as u64;
                }
            }
        }
        let (_, _, key) = p.eval_k(&k);
        found.entry(key).or_insert(k);
    }
    let mut keyed: Vec<(usize, FaceKey, Vec<u64>)> =
        found.into_iter().map(|(key, k)| (p.face_dim(&key), key, k)).collect();
    keyed.sort();

    let mut faces = Vec::with_capacity(keyed.len());
    let mut index = HashMap::new();
    for (id, (dim, key, witness_k)) in keyed.into_iter().enumerate() {
        let active = p.active_facets(&key);
        let restriction = p
            .source
            .restrict_where(|e| {
                let x = e.as_i64();
                active.iter().all(|&i| p.facets[i].is_tight(&x))
            })
            .expect("every face contains a vertex from the support");
        let sigma_tau = NewtonPolyhedron::build_with(&restriction, limits)?.sigma();
        index.insert(key.clone(), id);
        faces.push(Face {
            id,
            vertex_ids: key.vertices,
            recession_axes: key.axes,
            dim,
            active_facet_ids: active,
            witness_k,
            sigma_tau,
            restriction,
        });
    }
    let sigma = p.sigma_data();
    let f0_face_id = index[&sigma.f0];
    Ok(FaceLattice {
        polyhedron: p.clone(),
        faces,
        index,
        sigma,
        f0_face_id,
    })
}

impl FaceLattice {
    /// Builds the polyhedron of `f` and enumerates its faces.
    pub fn of(f: &Polynomial, limits: &Limits) -> Result<Self> {
        enumerate_faces(&NewtonPolyhedron::build_with(f, limits)?, limits)
    }

    pub fn polyhedron(&self) -> &NewtonPolyhedron {
        &self.polyhedron
    }

    pub fn n(&self) -> usize {
        self.polyhedron.n
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    pub fn face_id(&self, key: &FaceKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn sigma_data(&self) -> &SigmaData {
        &self.sigma
    }

    pub fn f0_face_id(&self) -> usize {
        self.f0_face_id
    }

    pub fn whole_face_id(&self) -> usize {
        self.faces.len() - 1
    }

    /// `(ν(k), N(k), id of F(k))`.
    pub fn eval_k(&self, k: &[u64]) -> (u64, i64, usize) {
        let (nu, big_n, key) = self.polyhedron.eval_k(k);
        let id = self.index.get(&key).copied().unwrap_or_else(|| {
            panic!("F({k:?}) = {key:?} is missing from the face lattice")
        });
        (nu, big_n, id)
    }

    /// Calls `visit(k, ν, N, face id)` for every `k ∈ ℕⁿ` with `ν(k) ≤ t`,
    /// in order of increasing `ν`.
    pub fn for_each_lattice_point<F>(&self, t: u64, limits: &Limits, mut visit: F) -> Result<()>
    where
        F: FnMut(&[u64], u64, i64, usize),
    {
        let count = lattice_point_count(self.n(), t);
        if count > limits.max_lattice_points as u128 {
            return Err(Error::BudgetExceeded {
                points: count,
                cap: limits.max_lattice_points,
            });
        }
        for level in 0..=t {
            let mut comp = Compositions::new(self.n(), level);
            loop {
                let k = comp.current();
                let (nu, big_n, id) = self.eval_k(k);
                visit(k, nu, big_n, id);
                if !comp.advance() {
                    break;
                }
            }
        }
        Ok(())
    }

    /// Every `k` with `ν(k) ≤ t`, each tagged with its classification.
    pub fn lattice_points(&self, t: u64, limits: &Limits) -> Result<Vec<LatticePoint>> {
        let mut out = Vec::new();
        self.for_each_lattice_point(t, limits, |k, nu, big_n, face_id| {
            out.push(LatticePoint {
                k: k.to_vec(),
                nu,
                big_n,
                face_id,
            })
        })?;
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePoint {
    pub k: Vec<u64>,
    pub nu: u64,
    pub big_n: i64,
    pub face_id: usize,
}

/// `C(t + n, n)`: the number of `k ∈ ℕⁿ` with `ν(k) ≤ t`.
pub fn lattice_point_count(n: usize, t: u64) -> u128 {
    binomial(t as u128 + n as u128, n as u128)
}

pub(crate) fn binomial(top: u128, k: u128) -> u128 {
    let k = k.min(top.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(top - i) / (i + 1))
}

/// Compositions of `total` into `n` ordered nonnegative parts, from
/// `(total, 0, …, 0)` down to `(0, …, 0, total)`.
struct Compositions {
    parts: Vec<u64>,
}

impl Compositions {
    fn new(n: usize, total: u64) -> Self {
        let mut parts = vec![0; n];
        parts[0] = total;
        Compositions { parts }
    }

    fn current(&self) -> &[u64] {
        &self.parts
    }

    fn advance(&mut self) -> bool {
        let n = self.parts.len();
        let Some(j) = (0..n.saturating_sub(1)).rev().find(|&j| self.parts[j] > 0) else {
            return false;
        };
        self.parts[j] -= 1;
        let rest = self.parts[n - 1];
        self.parts[n - 1] = 0;
        self.parts[j + 1] = rest + 1;
        true
    }
}

/// Rank over ℚ of integer row vectors of length `n`.
fn rank(rows: &[Vec<i64>], n: usize) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| rational::integer(x)).collect())
        .collect();
    let mut r = 0;
    for col in 0..n {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let pivot = m[r][col].clone();
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let factor = m[i][col].clone() / pivot.clone();
                for j in col..n {
                    let sub = factor.clone() * m[r][j].clone();
                    m[i][j] -= sub;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

struct Ray {
    v: Vec<BigInt>,
    zeros: FixedBitSet,
}

/// Facets of `conv(points) + ℝ₊ⁿ` by the double description method.
///
/// Works in the homogenization `C = cone{(v,1)} + cone{(eᵢ,0)}` and computes
/// the extreme rays `(a, b)` of its polar `{y : y·g ≥ 0}`, adding one generator
/// at a time. Each ray with `a ≠ 0` is a facet `a·x ≥ -b`.
fn facets_by_double_description(n: usize, points: &[Vec<i64>]) -> Result<Vec<Facet>> {
    let d = n + 1;
    let mut generators: Vec<Vec<BigInt>> = Vec::with_capacity(n + points.len());
    for i in 0..n {
        let mut g = vec![BigInt::zero(); d];
        g[i] = BigInt::one();
        generators.push(g);
    }
    for p in points {
        let mut g: Vec<BigInt> = p.iter().map(|&x| BigInt::from(x)).collect();
        g.push(BigInt::one());
        generators.push(g);
    }
    let total = generators.len();

    // The first n + 1 generators are linearly independent; the cone they cut
    // out is simplicial with one ray per dropped constraint.
    let v0 = &points[0];
    let mut rays = Vec::with_capacity(d);
    for i in 0..n {
        let mut v = vec![BigInt::zero(); d];
        v[i] = BigInt::one();
        v[n] = BigInt::from(-v0[i]);
        let mut zeros = FixedBitSet::with_capacity(total);
        zeros.insert_range(0..d);
        zeros.set(i, false);
        rays.push(Ray { v, zeros });
    }
    let mut v = vec![BigInt::zero(); d];
    v[n] = BigInt::one();
    let mut zeros = FixedBitSet::with_capacity(total);
    zeros.insert_range(0..n);
    rays.push(Ray { v, zeros });

    for (c, g) in generators.iter().enumerate().skip(d) {
        let values: Vec<BigInt> = rays.iter().map(|r| dot(&r.v, g)).collect();
        let mut next = Vec::with_capacity(rays.len());
        for (r, s) in rays.iter().zip(&values) {
            if !s.is_negative() {
                let mut zeros = r.zeros.clone();
                if s.is_zero() {
                    zeros.insert(c);
                }
                next.push(Ray {
                    v: r.v.clone(),
                    zeros,
                });
            }
        }
        for (pi, sp) in values.iter().enumerate().filter(|(_, s)| s.is_positive()) {
            for (qi, sq) in values.iter().enumerate().filter(|(_, s)| s.is_negative()) {
                let mut common = rays[pi].zeros.clone();
                common.intersect_with(&rays[qi].zeros);
                if common.count_ones(..) + 2 < d {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(ri, r)| ri == pi || ri == qi || !common.is_subset(&r.zeros));
                if !adjacent {
                    continue;
                }
                let v: Vec<BigInt> = rays[qi]
                    .v
                    .iter()
                    .zip(&rays[pi].v)
                    .map(|(q, p)| sp * q - sq * p)
                    .collect();
                let mut zeros = common;
                zeros.insert(c);
                next.push(Ray {
                    v: primitive(v),
                    zeros,
                });
            }
        }
        rays = next;
    }

    let mut facets = Vec::new();
    for r in rays {
        let a = &r.v[..n];
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        let g = a.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        let (offset, rem) = (-&r.v[n]).div_rem(&g);
        if !rem.is_zero() {
            return Err(Error::InvalidInput("non-integral facet offset".into()));
        }
        let to_i64 = |x: &BigInt| x.to_i64().ok_or_else(|| Error::Overflow("facet coefficient".into()));
        let normal = a.iter().map(|x| to_i64(&(x / &g))).collect::<Result<Vec<_>>>()?;
        facets.push(Facet {
            normal,
            offset: to_i64(&offset)?,
        });
    }
    facets.sort_by(|a, b| a.normal.cmp(&b.normal).reverse().then(a.offset.cmp(&b.offset)));
    facets.dedup();
    Ok(facets)
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        v
    } else {
        v.into_iter().map(|x| x / &g).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn lattice(text: &str) -> FaceLattice {
        FaceLattice::of(&Polynomial::parse(text).unwrap(), &Limits::default()).unwrap()
    }

    fn facet(normal: &[i64], offset: i64) -> Facet {
        Facet {
            normal: normal.to_vec(),
            offset,
        }
    }

    #[test]
    fn single_monomial_polyhedron() {
        let p = NewtonPolyhedron::build(&Polynomial::parse("x*y").unwrap()).unwrap();
        assert_eq!(p.vertices(), &[vec![1, 1]]);
        assert_eq!(p.facets(), &[facet(&[1, 0], 1), facet(&[0, 1], 1)]);
    }

    #[test]
    fn two_point_polyhedron() {
        let p = NewtonPolyhedron::build(&Polynomial::parse("x^2 + y^3").unwrap()).unwrap();
        let mut verts = p.vertices().to_vec();
        verts.sort();
        assert_eq!(verts, vec![vec![0, 3], vec![2, 0]]);
        assert_eq!(
            p.facets(),
            &[facet(&[3, 2], 6), facet(&[1, 0], 0), facet(&[0, 1], 0)]
        );
    }

    #[test]
    fn interior_points_are_not_vertices() {
        // (1,1) lies above the segment from (2,0) to (0,2); (3,3) is dominated.
        let p = NewtonPolyhedron::build(&Polynomial::parse("x^2 + y^2 + x*y + x^3*y^3").unwrap()).unwrap();
        let mut verts = p.vertices().to_vec();
        verts.sort();
        assert_eq!(verts, vec![vec![0, 2], vec![2, 0]]);
        assert!(p.facets().contains(&facet(&[1, 1], 2)));
    }

    #[test]
    fn quadric_polyhedron() {
        let p = NewtonPolyhedron::build(&Polynomial::parse("x*y + z*u").unwrap()).unwrap();
        let mut verts = p.vertices().to_vec();
        verts.sort();
        assert_eq!(verts, vec![vec![0, 0, 1, 1], vec![1, 1, 0, 0]]);
        // Facets: k with min(k1+k2, k3+k4) attained on both vertices plus
        // the coordinate-type facets.
        for fc in p.facets() {
            assert!(fc.normal.iter().all(|&a| a >= 0));
            assert!(p.vertices().iter().any(|v| fc.is_tight(v)));
            assert!(p.vertices().iter().all(|v| fc.eval(v) >= fc.offset));
        }
        let mut facets = p.facets().to_vec();
        facets.sort();
        let mut expected = vec![
            facet(&[0, 0, 0, 1], 0),
            facet(&[0, 0, 1, 0], 0),
            facet(&[0, 1, 0, 0], 0),
            facet(&[1, 0, 0, 0], 0),
            facet(&[0, 1, 0, 1], 1),
            facet(&[0, 1, 1, 0], 1),
            facet(&[1, 0, 0, 1], 1),
            facet(&[1, 0, 1, 0], 1),
        ];
        expected.sort();
        assert_eq!(facets, expected);
    }

    #[test]
    fn dimension_cap() {
        let f = Polynomial::parse("x1*x9").unwrap();
        assert_eq!(
            NewtonPolyhedron::build(&f).unwrap_err(),
            Error::DimensionTooLarge { n: 9, cap: 8 }
        );
    }

    #[test]
    fn faces_of_monomial() {
        let l = lattice("x*y");
        assert_eq!(l.faces().len(), 4);
        let dims: Vec<usize> = l.faces().iter().map(|f| f.dim).collect();
        assert_eq!(dims, vec![0, 1, 1, 2]);
        let whole = l.face(l.whole_face_id());
        assert_eq!(whole.witness_k, vec![0, 0]);
        assert_eq!(whole.recession_axes, vec![0, 1]);
    }

    #[test]
    fn faces_of_two_point_support() {
        let l = lattice("x^2 + y^3");
        // two vertices, compact edge, two unbounded edges, Δ₀
        assert_eq!(l.faces().len(), 6);
        let compact = l
            .faces()
            .iter()
            .find(|f| f.dim == 1 && f.recession_axes.is_empty())
            .unwrap();
        assert_eq!(compact.vertex_ids.len(), 2);
        assert_eq!(compact.restriction.to_string(), "x^2 + y^3");
        let unbounded: Vec<String> = l
            .faces()
            .iter()
            .filter(|f| f.dim == 1 && !f.recession_axes.is_empty())
            .map(|f| f.restriction.to_string())
            .collect();
        assert_eq!(unbounded.len(), 2);
        assert!(unbounded.contains(&"y^3".to_string()));
        assert!(unbounded.contains(&"x^2".to_string()));
    }

    #[test]
    fn face_restriction_on_unbounded_edge() {
        // F(1,0) = {(0, y) : y ≥ 3}
        let l = lattice("x^2 + y^3");
        let (_, big_n, id) = l.eval_k(&[1, 0]);
        assert_eq!(big_n, 0);
        assert_eq!(l.face(id).restriction.to_string(), "y^3");
        assert_eq!(l.face(id).sigma_tau, ratio(1, 3));
    }

    #[test]
    fn eval_k_examples() {
        let l = lattice("x*y");
        let (nu, big_n, id) = l.eval_k(&[2, 3]);
        assert_eq!((nu, big_n), (5, 5));
        assert_eq!(l.face(id).dim, 0);

        let l = lattice("x*y + z*u");
        let (nu, big_n, id) = l.eval_k(&[1, 1, 1, 1]);
        assert_eq!((nu, big_n), (4, 2));
        assert_eq!(id, l.f0_face_id());

        let (nu, big_n, id) = l.eval_k(&[0, 0, 0, 0]);
        assert_eq!((nu, big_n, id), (0, 0, l.whole_face_id()));
    }

    #[test]
    fn sigma_examples() {
        let l = lattice("x*y");
        let s = l.sigma_data();
        assert_eq!((s.sigma.clone(), s.kappa, s.f0_dim), (ratio(1, 1), 2, 0));

        let l = lattice("x*y + z*u");
        let s = l.sigma_data();
        assert_eq!((s.sigma.clone(), s.kappa, s.f0_dim), (ratio(2, 1), 3, 1));
        assert_eq!(l.face(l.f0_face_id()).vertex_ids.len(), 2);

        let l = lattice("x^2 + y^3");
        let s = l.sigma_data();
        assert_eq!((s.sigma.clone(), s.t_star.clone(), s.kappa), (ratio(5, 6), ratio(6, 5), 1));

        let l = lattice("x*y + z*u + x*z + 2*y*u");
        let s = l.sigma_data();
        assert_eq!((s.sigma.clone(), s.f0_dim, s.kappa), (ratio(2, 1), 2, 2));
    }

    #[test]
    fn sigma_tau_of_vertex_uses_ambient_dimension() {
        let l = lattice("x^2 + y^3");
        let (_, _, id) = l.eval_k(&[1, 5]);
        let face = l.face(id);
        assert_eq!(face.restriction.to_string(), "x^2");
        assert_eq!(face.sigma_tau, ratio(1, 2));
    }

    #[test]
    fn lattice_point_counts() {
        let l = lattice("x*y");
        let pts = l.lattice_points(1, &Limits::default()).unwrap();
        let ks: Vec<Vec<u64>> = pts.iter().map(|p| p.k.clone()).collect();
        assert_eq!(ks, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);

        let pts = l.lattice_points(2, &Limits::default()).unwrap();
        let p11 = pts.iter().find(|p| p.k == vec![1, 1]).unwrap();
        assert_eq!(p11.big_n, 2);
        assert_eq!(l.face(p11.face_id).dim, 0);

        let l = lattice("x*y + z*u");
        assert_eq!(l.lattice_points(5, &Limits::default()).unwrap().len(), 126);
        assert_eq!(lattice_point_count(4, 5), 126);

        let tight = Limits {
            max_lattice_points: 100,
            ..Limits::default()
        };
        assert!(matches!(
            l.lattice_points(5, &tight),
            Err(Error::BudgetExceeded { points: 126, cap: 100 })
        ));
    }

    #[test]
    fn facet_subset_cap() {
        let f = Polynomial::parse("x*y + z*u").unwrap();
        let p = NewtonPolyhedron::build(&f).unwrap();
        let limits = Limits {
            max_facet_subsets: 16,
            ..Limits::default()
        };
        assert!(matches!(
            enumerate_faces(&p, &limits),
            Err(Error::FacetCountTooLarge { facets: 8, .. })
        ));
    }
}
