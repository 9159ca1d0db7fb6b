//! Exact convex-polytope kernel.
//!
//! A polytope lives here as an irredundant half-space system with primitive
//! integer normals and rational offsets,
//!
//! ```text
//! l_r(x) = <x, nu_r> - lambda_r >= 0,    r = 1..N,
//! ```
//!
//! together with its exact vertex set, computed once at construction. All
//! combinatorial predicates (feasibility, redundancy, face identification)
//! are decided in rational arithmetic; callers convert to `f64` only for
//! metric quantities.

use crate::rat::{
    self, dot_int_rat, format_rat, int_vec_to_rat, lex_cmp, norm_sq, parse_rat,
    primitive_from_rational, rat_from_f64, rat_to_f64, vec_to_f64,
};
use crate::{linalg, tol, Error, Int, Rat, Result};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

/// One half-space `<x, normal> - offset >= 0` with a primitive inward normal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<Int>,
    pub offset: Rat,
}

impl Facet {
    pub fn new(normal: Vec<Int>, offset: Rat) -> Self {
        Facet { normal, offset }
    }

    /// `l(x) = <x, normal> - offset`, exact.
    pub fn eval(&self, x: &[Rat]) -> Rat {
        dot_int_rat(&self.normal, x) - &self.offset
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (n, xi) in self.normal.iter().zip(x) {
            acc += n.to_f64().unwrap_or(0.0) * xi;
        }
        acc - rat_to_f64(&self.offset)
    }

    fn canonical(mut self) -> Result<Self> {
        if self.normal.iter().all(|x| x.is_zero()) {
            return Err(Error::InvalidInput("zero facet normal".into()));
        }
        let g = rat::content(&self.normal);
        if !g.is_one() {
            self.normal = self.normal.iter().map(|x| x / &g).collect();
            self.offset /= Rat::from_integer(g);
        }
        Ok(self)
    }
}

/// A face of dimension `k`, identified by the facets active on it and the
/// vertices it contains (indices into the parent polytope's vertex list).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub dim: usize,
    /// All facet indices whose hyperplane contains the face, sorted.
    pub active: Vec<usize>,
    /// A subset of `active` whose normals are linearly independent and span
    /// the same space (used for affine-hull projections).
    pub active_basis: Vec<usize>,
    /// Vertex indices, sorted ascending.
    pub vertices: Vec<usize>,
}

/// Bounded full-dimensional polytope in half-space representation.
#[derive(Debug)]
pub struct HPolytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Vec<Rat>>,
    /// Per vertex, the sorted indices of facets active on it.
    vertex_active: Vec<Vec<usize>>,
    faces: OnceLock<Vec<Vec<Face>>>,
    verts_f64: OnceLock<Vec<Vec<f64>>>,
    moments: OnceLock<Moments>,
}

impl Clone for HPolytope {
    fn clone(&self) -> Self {
        HPolytope {
            dim: self.dim,
            facets: self.facets.clone(),
            vertices: self.vertices.clone(),
            vertex_active: self.vertex_active.clone(),
            faces: OnceLock::new(),
            verts_f64: OnceLock::new(),
            moments: OnceLock::new(),
        }
    }
}

impl PartialEq for HPolytope {
    /// Equality as sets: same canonical facet system (order-insensitive).
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.facets.len() != other.facets.len() {
            return false;
        }
        let key = |f: &Facet| (f.normal.clone(), f.offset.clone());
        let mut a: Vec<_> = self.facets.iter().map(key).collect();
        let mut b: Vec<_> = other.facets.iter().map(key).collect();
        a.sort();
        b.sort();
        a == b
    }
}

/// Vertex representation: the exact extreme points of a polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<Vec<Rat>>,
}

impl VPolytope {
    /// Validating constructor: every listed point must be a vertex of the
    /// hull and the hull must be full-dimensional.
    pub fn new(dim: usize, vertices: Vec<Vec<Rat>>) -> Result<Self> {
        let v = VPolytope::new_unchecked(dim, vertices)?;
        let h = halfspace_reconstruction(&v)?;
        if h.vertices.len() != v.vertices.len() {
            return Err(Error::InvalidInput(
                "input contains non-vertex (interior or redundant) points".into(),
            ));
        }
        Ok(v)
    }

    pub(crate) fn new_unchecked(dim: usize, mut vertices: Vec<Vec<Rat>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidInput("vertex length != dim".into()));
        }
        vertices.sort_by(|a, b| lex_cmp(a, b));
        vertices.dedup();
        Ok(VPolytope { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.vertices
    }
}

/// Exact degree-<=2 moment data of a polytope.
#[derive(Debug, Clone)]
pub struct Moments {
    pub volume: Rat,
    pub barycenter: Vec<Rat>,
    /// Raw second moment `int_P x x^T dx`.
    pub second: Vec<Vec<Rat>>,
    /// `Var(P) = (1/|P|) int_P ||x - b||^2 dx`.
    pub variance: Rat,
}

impl HPolytope {
    /// Build a polytope from half-spaces.
    ///
    /// Canonicalizes normals to primitive integer vectors, enumerates the
    /// exact vertex set, rejects unbounded / empty / lower-dimensional
    /// systems, and drops redundant half-spaces (input order otherwise
    /// preserved).
    pub fn new(dim: usize, facets: Vec<Facet>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if facets.iter().any(|f| f.normal.len() != dim) {
            return Err(Error::InvalidInput("facet normal length != dim".into()));
        }
        let mut canon: Vec<Facet> = Vec::new();
        for f in facets {
            let f = f.canonical()?;
            if !canon.contains(&f) {
                canon.push(f);
            }
        }
        if canon.len() < dim + 1 {
            // Fewer than n+1 half-spaces can never bound a body.
            return Err(Error::Unbounded);
        }

        let vertices = enumerate_vertices(dim, &canon)?;

        // Full-dimensionality.
        if affine_rank(&vertices) < dim {
            return Err(Error::Degenerate(format!(
                "affine hull has dimension {} < {}",
                affine_rank(&vertices),
                dim
            )));
        }

        // Redundancy: a half-space contributes a facet iff its active vertex
        // set spans an affine hyperplane.
        let mut kept = Vec::new();
        for f in canon.into_iter() {
            let active: Vec<Vec<Rat>> = vertices
                .iter()
                .filter(|v| f.eval(v).is_zero())
                .cloned()
                .collect();
            if affine_rank(&active) == dim - 1 {
                kept.push(f);
            }
        }

        let vertex_active: Vec<Vec<usize>> = vertices
            .iter()
            .map(|v| {
                kept.iter()
                    .enumerate()
                    .filter(|(_, f)| f.eval(v).is_zero())
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();

        Ok(HPolytope {
            dim,
            facets: kept,
            vertices,
            vertex_active,
            faces: OnceLock::new(),
            verts_f64: OnceLock::new(),
            moments: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.vertices
    }

    pub fn vertices_f64(&self) -> &[Vec<f64>] {
        self.verts_f64
            .get_or_init(|| self.vertices.iter().map(|v| vec_to_f64(v)).collect())
    }

    pub fn vertex_active(&self) -> &[Vec<usize>] {
        &self.vertex_active
    }

    /// Exact membership.
    pub fn contains(&self, x: &[Rat]) -> bool {
        self.facets.iter().all(|f| !f.eval(x).is_negative())
    }

    /// Membership of a float point, decided exactly (every f64 is rational).
    pub fn contains_f64(&self, x: &[f64]) -> Result<bool> {
        let xr: Vec<Rat> = x
            .iter()
            .map(|&v| rat_from_f64(v))
            .collect::<Result<_>>()?;
        Ok(self.contains(&xr))
    }

    /// A strictly interior rational point (vertex average).
    pub fn interior_point(&self) -> Vec<Rat> {
        let n = Rat::from_integer(Int::from(self.vertices.len() as i64));
        let mut acc = vec![Rat::zero(); self.dim];
        for v in &self.vertices {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        acc.into_iter().map(|a| a / &n).collect()
    }

    /// Translate by a rational vector.
    pub fn translate(&self, t: &[Rat]) -> HPolytope {
        let facets = self
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                offset: &f.offset + dot_int_rat(&f.normal, t),
            })
            .collect();
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(t).map(|(x, ti)| x + ti).collect())
            .collect();
        HPolytope {
            dim: self.dim,
            facets,
            vertices,
            vertex_active: self.vertex_active.clone(),
            faces: OnceLock::new(),
            verts_f64: OnceLock::new(),
            moments: OnceLock::new(),
        }
    }

    /// Dilate about the origin by a positive rational factor.
    pub fn scale(&self, s: &Rat) -> Result<HPolytope> {
        if !s.is_positive() {
            return Err(Error::InvalidInput("scale factor must be positive".into()));
        }
        let facets = self
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                offset: &f.offset * s,
            })
            .collect();
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|x| x * s).collect())
            .collect();
        Ok(HPolytope {
            dim: self.dim,
            facets,
            vertices,
            vertex_active: self.vertex_active.clone(),
            faces: OnceLock::new(),
            verts_f64: OnceLock::new(),
            moments: OnceLock::new(),
        })
    }

    fn face_lattice(&self) -> &Vec<Vec<Face>> {
        self.faces.get_or_init(|| build_face_lattice(self))
    }

    /// Exact moment data, cached.
    pub fn moments(&self) -> &Moments {
        self.moments.get_or_init(|| compute_moments(self))
    }

    pub fn volume(&self) -> Rat {
        self.moments().volume.clone()
    }
}

// ---------------------------------------------------------------------------
// vertex enumeration

/// All feasible intersection points of `dim`-subsets of facet hyperplanes.
fn candidate_vertices(dim: usize, facets: &[Facet]) -> Vec<Vec<Rat>> {
    let n = facets.len();
    let mut out: Vec<Vec<Rat>> = Vec::new();
    let mut subset: Vec<usize> = (0..dim).collect();
    loop {
        let a: Vec<Vec<Rat>> = subset
            .iter()
            .map(|&i| int_vec_to_rat(&facets[i].normal))
            .collect();
        let b: Vec<Rat> = subset.iter().map(|&i| facets[i].offset.clone()).collect();
        if let Some(x) = linalg::solve(&a, &b) {
            if facets.iter().all(|f| !f.eval(&x).is_negative()) && !out.contains(&x) {
                out.push(x);
            }
        }
        // next combination
        let mut i = dim;
        loop {
            if i == 0 {
                return sorted_vertices(out);
            }
            i -= 1;
            if subset[i] != i + n - dim {
                subset[i] += 1;
                for j in (i + 1)..dim {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn sorted_vertices(mut v: Vec<Vec<Rat>>) -> Vec<Vec<Rat>> {
    v.sort_by(|a, b| lex_cmp(a, b));
    v
}

/// Enumerate vertices of a half-space system, or classify the failure:
/// `Empty` when infeasible, `Unbounded` when the recession cone is nontrivial.
fn enumerate_vertices(dim: usize, facets: &[Facet]) -> Result<Vec<Vec<Rat>>> {
    let normal_rows: Vec<Vec<Rat>> = facets.iter().map(|f| int_vec_to_rat(&f.normal)).collect();
    let normal_rank = linalg::rank(&normal_rows);

    if normal_rank < dim {
        // No vertices can exist. Distinguish empty from unbounded by
        // restricting to the row space: feasibility is unchanged when the
        // kernel directions are pinned to zero.
        let kernel = linalg::kernel_basis(&normal_rows);
        let mut augmented: Vec<Facet> = facets.to_vec();
        for k in kernel {
            let nv = primitive_from_rational(&k);
            augmented.push(Facet::new(nv.clone(), Rat::zero()));
            augmented.push(Facet::new(nv.iter().map(|x| -x).collect(), Rat::zero()));
        }
        let feasible = !candidate_vertices(dim, &augmented).is_empty();
        return Err(if feasible { Error::Unbounded } else { Error::Empty });
    }

    let verts = candidate_vertices(dim, facets);
    if verts.is_empty() {
        // Full-rank normals and a nonempty region would force a vertex.
        return Err(Error::Empty);
    }

    if has_recession_direction(dim, facets, &normal_rows) {
        return Err(Error::Unbounded);
    }
    Ok(verts)
}

/// Detect a nonzero direction `d` with `<nu_r, d> >= 0` for all `r`.
///
/// With full-rank normals the recession cone is pointed, so it is nontrivial
/// iff it has an extreme ray, and every extreme ray is the kernel of some
/// `dim - 1` linearly independent normals.
fn has_recession_direction(dim: usize, facets: &[Facet], normal_rows: &[Vec<Rat>]) -> bool {
    let n = facets.len();
    if dim == 1 {
        for d in [Rat::one(), -Rat::one()] {
            if facets
                .iter()
                .all(|f| !(Rat::from_integer(f.normal[0].clone()) * &d).is_negative())
            {
                return true;
            }
        }
        return false;
    }
    let k = dim - 1;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let rows: Vec<Vec<Rat>> = subset.iter().map(|&i| normal_rows[i].clone()).collect();
        let kernel = linalg::kernel_basis(&rows);
        if kernel.len() == 1 {
            for d in [kernel[0].clone(), kernel[0].iter().map(|x| -x).collect()] {
                let ok = normal_rows
                    .iter()
                    .all(|nu| !linalg::dot(nu, &d).is_negative());
                if ok {
                    return true;
                }
            }
        }
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if subset[i] != i + n - k {
                subset[i] += 1;
                for j in (i + 1)..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Affine dimension of a point set (rank of the difference matrix).
pub fn affine_rank(points: &[Vec<Rat>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = &points[0];
    let diffs: Vec<Vec<Rat>> = points[1..].iter().map(|p| linalg::sub(p, base)).collect();
    linalg::rank(&diffs)
}

// ---------------------------------------------------------------------------
// operations

/// Exact vertex set of a half-space polytope.
pub fn vertex_enumeration(p: &HPolytope) -> VPolytope {
    VPolytope {
        dim: p.dim,
        vertices: p.vertices.clone(),
    }
}

/// Irredundant half-space representation of a full-dimensional vertex set.
pub fn halfspace_reconstruction(v: &VPolytope) -> Result<HPolytope> {
    let n = v.dim;
    let pts = &v.vertices;
    if affine_rank(pts) < n {
        return Err(Error::Degenerate(format!(
            "affine hull has dimension {} < {}",
            affine_rank(pts),
            n
        )));
    }
    let m = pts.len();
    let mut facets: Vec<Facet> = Vec::new();
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        'body: {
            if n == 1 {
                // Hyperplane through one point: x = p.
                let p0 = &pts[subset[0]];
                for sign in [1i64, -1] {
                    let nu = vec![Int::from(sign)];
                    let off = if sign == 1 { p0[0].clone() } else { -p0[0].clone() };
                    let f = Facet::new(nu, off);
                    if pts.iter().all(|p| !f.eval(p).is_negative()) && !facets.contains(&f) {
                        facets.push(f);
                    }
                }
                break 'body;
            }
            let base = &pts[subset[0]];
            let diffs: Vec<Vec<Rat>> = subset[1..]
                .iter()
                .map(|&i| linalg::sub(&pts[i], base))
                .collect();
            let kernel = linalg::kernel_basis(&diffs);
            if kernel.len() != 1 {
                break 'body; // degenerate subset
            }
            let nu = primitive_from_rational(&kernel[0]);
            let off = dot_int_rat(&nu, base);
            let vals: Vec<Rat> = pts.iter().map(|p| dot_int_rat(&nu, p) - &off).collect();
            let any_neg = vals.iter().any(|x| x.is_negative());
            let any_pos = vals.iter().any(|x| x.is_positive());
            let f = if !any_neg {
                Facet::new(nu, off)
            } else if !any_pos {
                Facet::new(nu.iter().map(|x| -x).collect(), -off)
            } else {
                break 'body; // not supporting
            };
            if !facets.contains(&f) {
                facets.push(f);
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return HPolytope::new(v.dim, facets);
            }
            i -= 1;
            if subset[i] != i + m - n {
                subset[i] += 1;
                for j in (i + 1)..n {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Intersection of two polytopes; `Empty` if the interior is empty.
pub fn intersect(p: &HPolytope, q: &HPolytope) -> Result<HPolytope> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch(p.dim, q.dim));
    }
    let mut facets = p.facets.clone();
    facets.extend(q.facets.iter().cloned());
    match HPolytope::new(p.dim, facets) {
        Ok(r) => Ok(r),
        Err(Error::Degenerate(_)) | Err(Error::Empty) | Err(Error::Unbounded) => Err(Error::Empty),
        Err(e) => Err(e),
    }
}

/// Exact Lebesgue volume.
pub fn volume(p: &HPolytope) -> Rat {
    p.volume()
}

/// Exact barycenter and variance.
pub fn moments(p: &HPolytope) -> Moments {
    p.moments().clone()
}

fn compute_moments(p: &HPolytope) -> Moments {
    let n = p.dim;
    let tri = triangulate(p);
    let n_rat = Rat::from_integer(Int::from(n as i64));
    let mut volume = Rat::zero();
    let mut first = vec![Rat::zero(); n];
    let mut second = vec![vec![Rat::zero(); n]; n];
    let np1 = Rat::from_integer(Int::from((n + 1) as i64));
    let np1np2 = Rat::from_integer(Int::from(((n + 1) * (n + 2)) as i64));
    let mut factorial = Rat::one();
    for k in 2..=n {
        factorial *= Rat::from_integer(Int::from(k as i64));
    }
    let _ = n_rat;
    for simplex in &tri {
        let verts: Vec<&Vec<Rat>> = simplex.iter().map(|&i| &p.vertices[i]).collect();
        let rows: Vec<Vec<Rat>> = verts[1..]
            .iter()
            .map(|v| linalg::sub(v, verts[0]))
            .collect();
        let vol = linalg::det(&rows).abs() / &factorial;
        if vol.is_zero() {
            continue;
        }
        let mut s = vec![Rat::zero(); n];
        for v in &verts {
            for (si, x) in s.iter_mut().zip(v.iter()) {
                *si += x;
            }
        }
        // int_S x dx = |S| * (sum v_i) / (n+1)
        for (fi, si) in first.iter_mut().zip(&s) {
            *fi += &vol * si / &np1;
        }
        // int_S x x^T dx = |S|/((n+1)(n+2)) * (sum v_i v_i^T + s s^T)
        for a in 0..n {
            for b in 0..n {
                let mut acc = &s[a] * &s[b];
                for v in &verts {
                    acc += &v[a] * &v[b];
                }
                second[a][b] += &vol * acc / &np1np2;
            }
        }
        volume += vol;
    }
    let barycenter: Vec<Rat> = first.iter().map(|f| f / &volume).collect();
    let mut trace = Rat::zero();
    for (i, row) in second.iter().enumerate() {
        trace += &row[i];
    }
    let variance = trace / &volume - norm_sq(&barycenter);
    Moments {
        volume,
        barycenter,
        second,
        variance,
    }
}

/// Fan triangulation from the lexicographically smallest vertex of each face,
/// recursively. Returns simplices as vertex-index tuples of length `dim + 1`.
pub fn triangulate(p: &HPolytope) -> Vec<Vec<usize>> {
    let lattice = p.face_lattice();
    let top = Face {
        dim: p.dim,
        active: Vec::new(),
        active_basis: Vec::new(),
        vertices: (0..p.vertices.len()).collect(),
    };
    triangulate_face(&top, lattice)
}

fn triangulate_face(face: &Face, lattice: &[Vec<Face>]) -> Vec<Vec<usize>> {
    match face.dim {
        0 => vec![face.vertices.clone()],
        1 => vec![face.vertices.clone()],
        k => {
            // Vertices are stored lex-sorted, so the smallest index is the
            // lexicographically smallest vertex.
            let apex = face.vertices[0];
            let mut out = Vec::new();
            for sub in &lattice[k - 1] {
                if sub.vertices.iter().any(|&v| v == apex) {
                    continue;
                }
                if !is_subset(&sub.vertices, &face.vertices) {
                    continue;
                }
                for mut simplex in triangulate_face(sub, lattice) {
                    simplex.insert(0, apex);
                    out.push(simplex);
                }
            }
            out
        }
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    // both sorted
    let mut it = b.iter();
    'outer: for x in a {
        for y in it.by_ref() {
            match y.cmp(x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// Max pairwise vertex distance (argmax decided exactly, root taken in f64).
pub fn diameter(p: &HPolytope) -> f64 {
    let verts = &p.vertices;
    let mut best = Rat::zero();
    for i in 0..verts.len() {
        for j in (i + 1)..verts.len() {
            let d = norm_sq(&linalg::sub(&verts[i], &verts[j]));
            if d > best {
                best = d;
            }
        }
    }
    rat_to_f64(&best).sqrt()
}

/// All faces of dimension `k` (0 <= k <= dim-1).
pub fn faces(p: &HPolytope, k: usize) -> Result<Vec<Face>> {
    if k >= p.dim {
        return Err(Error::BadK { k, dim: p.dim });
    }
    Ok(p.face_lattice()[k].clone())
}

fn build_face_lattice(p: &HPolytope) -> Vec<Vec<Face>> {
    let n = p.dim;
    // Closure of the vertex active sets under intersection.
    let atoms: Vec<BTreeSet<usize>> = p
        .vertex_active
        .iter()
        .map(|a| a.iter().copied().collect())
        .collect();
    let mut closed: BTreeSet<Vec<usize>> = atoms
        .iter()
        .map(|s| s.iter().copied().collect::<Vec<_>>())
        .collect();
    loop {
        let snapshot: Vec<Vec<usize>> = closed.iter().cloned().collect();
        let before = closed.len();
        for i in 0..snapshot.len() {
            for j in (i + 1)..snapshot.len() {
                let a: BTreeSet<usize> = snapshot[i].iter().copied().collect();
                let inter: Vec<usize> = snapshot[j]
                    .iter()
                    .filter(|x| a.contains(x))
                    .copied()
                    .collect();
                closed.insert(inter);
            }
        }
        if closed.len() == before {
            break;
        }
    }

    // Each closed active set determines a face through its vertex set.
    let mut by_vertices: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for s in &closed {
        let sset: BTreeSet<usize> = s.iter().copied().collect();
        let vs: Vec<usize> = (0..p.vertices.len())
            .filter(|&vi| sset.iter().all(|f| p.vertex_active[vi].contains(f)))
            .collect();
        if vs.is_empty() {
            continue;
        }
        // Canonical active set: facets active on every vertex of the face.
        let canon: Vec<usize> = (0..p.facets.len())
            .filter(|f| vs.iter().all(|&vi| p.vertex_active[vi].contains(f)))
            .collect();
        by_vertices.entry(vs).or_insert(canon);
    }

    let mut lattice: Vec<Vec<Face>> = vec![Vec::new(); n];
    for (vs, active) in by_vertices {
        let pts: Vec<Vec<Rat>> = vs.iter().map(|&i| p.vertices[i].clone()).collect();
        let dim = affine_rank(&pts);
        if dim >= n {
            continue; // the polytope itself
        }
        let active_basis = independent_normal_subset(p, &active);
        lattice[dim].push(Face {
            dim,
            active,
            active_basis,
            vertices: vs,
        });
    }
    for level in lattice.iter_mut() {
        level.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    }
    lattice
}

/// Greedy subset of `active` whose normals are linearly independent and span
/// the space of all active normals (exact rank over the rationals).
fn independent_normal_subset(p: &HPolytope, active: &[usize]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for &i in active {
        let mut trial = rows.clone();
        trial.push(int_vec_to_rat(&p.facets[i].normal));
        if linalg::rank(&trial) == trial.len() {
            rows = trial;
            chosen.push(i);
        }
    }
    chosen
}

/// Euclidean distance from a point to the polytope (0 iff inside, decided
/// exactly; otherwise via orthogonal projection over the face lattice).
pub fn point_distance(x: &[f64], p: &HPolytope) -> Result<f64> {
    if x.len() != p.dim {
        return Err(Error::DimensionMismatch(x.len(), p.dim));
    }
    if p.contains_f64(x)? {
        return Ok(0.0);
    }
    let lattice = p.face_lattice();
    let mut best = f64::INFINITY;
    for level in lattice {
        for face in level {
            if let Some(d) = face_projection_distance(p, face, x) {
                if d < best {
                    best = d;
                }
            }
        }
    }
    Ok(best)
}

/// Distance from `x` to the affine hull of `face`, accepted only when the
/// projected point lies in the face (within tolerance). Vertices always
/// accept, so a minimum over all faces exists.
fn face_projection_distance(p: &HPolytope, face: &Face, x: &[f64]) -> Option<f64> {
    let proj = project_onto_face_hull(p, face, x)?;
    // Membership: all half-space constraints within tolerance.
    for f in &p.facets {
        if f.eval_f64(&proj) < -tol::MEMBERSHIP {
            return None;
        }
    }
    Some(linalg::dist2(x, &proj))
}

/// Orthogonal projection of `x` onto the affine hull of `face`.
pub(crate) fn project_onto_face_hull(p: &HPolytope, face: &Face, x: &[f64]) -> Option<Vec<f64>> {
    if face.dim == 0 {
        return Some(p.vertices_f64()[face.vertices[0]].clone());
    }
    let rows: Vec<Vec<f64>> = face
        .active_basis
        .iter()
        .map(|&i| {
            p.facets[i]
                .normal
                .iter()
                .map(|v| v.to_f64().unwrap_or(0.0))
                .collect()
        })
        .collect();
    if rows.is_empty() {
        return Some(x.to_vec());
    }
    let k = rows.len();
    // residual of the active equalities at x
    let resid: Vec<f64> = face
        .active_basis
        .iter()
        .map(|&i| p.facets[i].eval_f64(x))
        .collect();
    // Solve (N N^T) y = resid, then project x - N^T y.
    let mut gram = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = linalg::dot(&rows[i], &rows[j]);
        }
    }
    let y = linalg::solve(&gram, &resid)?;
    let mut proj = x.to_vec();
    for (i, row) in rows.iter().enumerate() {
        for (pj, nj) in proj.iter_mut().zip(row) {
            *pj -= y[i] * nj;
        }
    }
    Some(proj)
}

/// Distance from a point to a single face of `p` (the face as a compact
/// convex set): minimum feasible projection over the face and its subfaces.
pub fn face_distance(p: &HPolytope, face: &Face, x: &[f64]) -> f64 {
    let lattice = p.face_lattice();
    let mut best = f64::INFINITY;
    for level in lattice[..=face.dim].iter() {
        for sub in level {
            if !is_subset(&sub.vertices, &face.vertices) {
                continue;
            }
            if let Some(proj) = project_onto_face_hull(p, sub, x) {
                // Membership within the parent polytope suffices: the
                // projection already sits on the subface's hull.
                let ok = p.facets.iter().all(|f| f.eval_f64(&proj) >= -tol::MEMBERSHIP);
                if ok {
                    let d = linalg::dist2(x, &proj);
                    if d < best {
                        best = d;
                    }
                }
            }
        }
    }
    best
}

/// k-dimensional Hausdorff measure of a k-face, by the recursive cone formula
/// `H^k(F) = (1/k) * sum over facets G of F of dist(c, aff G) * H^(k-1)(G)`
/// with `c` the vertex average of `F`.
pub fn face_measure(p: &HPolytope, face: &Face) -> f64 {
    match face.dim {
        0 => 1.0,
        1 => {
            let a = &p.vertices_f64()[face.vertices[0]];
            let b = &p.vertices_f64()[face.vertices[1]];
            linalg::dist2(a, b)
        }
        k => {
            let lattice = p.face_lattice();
            let verts = p.vertices_f64();
            let mut c = vec![0.0; p.dim];
            for &vi in &face.vertices {
                for (ci, x) in c.iter_mut().zip(&verts[vi]) {
                    *ci += x;
                }
            }
            for ci in c.iter_mut() {
                *ci /= face.vertices.len() as f64;
            }
            let mut acc = 0.0;
            for sub in &lattice[k - 1] {
                if !is_subset(&sub.vertices, &face.vertices) {
                    continue;
                }
                if let Some(proj) = project_onto_face_hull(p, sub, &c) {
                    let h = linalg::dist2(&c, &proj);
                    acc += h * face_measure(p, sub);
                }
            }
            acc / k as f64
        }
    }
}

// ---------------------------------------------------------------------------
// JSON interchange

#[derive(Serialize, Deserialize)]
struct FacetJson {
    normal: Vec<i64>,
    offset: String,
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    facets: Option<Vec<FacetJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Vec<String>>>,
}

/// Parse either representation; vertex form is converted through
/// [`halfspace_reconstruction`].
pub fn from_json(s: &str) -> Result<HPolytope> {
    let j: PolytopeJson = serde_json::from_str(s)?;
    match (j.facets, j.vertices) {
        (Some(fs), _) => {
            let facets = fs
                .into_iter()
                .map(|f| {
                    Ok(Facet::new(
                        f.normal.into_iter().map(Int::from).collect(),
                        parse_rat(&f.offset)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            HPolytope::new(j.dim, facets)
        }
        (None, Some(vs)) => {
            let vertices = vs
                .into_iter()
                .map(|v| v.iter().map(|c| parse_rat(c)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let vp = VPolytope::new_unchecked(j.dim, vertices)?;
            halfspace_reconstruction(&vp)
        }
        (None, None) => Err(Error::Parse(
            "polytope JSON needs \"facets\" or \"vertices\"".into(),
        )),
    }
}

pub fn to_json(p: &HPolytope) -> serde_json::Value {
    let facets: Vec<FacetJson> = p
        .facets
        .iter()
        .map(|f| FacetJson {
            normal: f
                .normal
                .iter()
                .map(|x| x.to_i64().expect("normal entry exceeds i64"))
                .collect(),
            offset: format_rat(&f.offset),
        })
        .collect();
    serde_json::to_value(PolytopeJson {
        dim: p.dim,
        facets: Some(facets),
        vertices: None,
    })
    .expect("serialization cannot fail")
}

pub fn to_json_vertices(p: &HPolytope) -> serde_json::Value {
    let vertices: Vec<Vec<String>> = p
        .vertices
        .iter()
        .map(|v| v.iter().map(format_rat).collect())
        .collect();
    serde_json::to_value(PolytopeJson {
        dim: p.dim,
        facets: None,
        vertices: Some(vertices),
    })
    .expect("serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rat::{rat, rat_from_i64};

    fn square() -> HPolytope {
        catalog::unit_square()
    }

    fn rv(coords: &[(i64, i64)]) -> Vec<Vec<Rat>> {
        coords.iter().map(|&(n, d)| vec![rat(n, d)]).collect()
    }

    #[test]
    fn unit_square_vertices() {
        let p = square();
        let vs = vertex_enumeration(&p);
        let expect: Vec<Vec<Rat>> = vec![
            vec![rat_from_i64(0), rat_from_i64(0)],
            vec![rat_from_i64(0), rat_from_i64(1)],
            vec![rat_from_i64(1), rat_from_i64(0)],
            vec![rat_from_i64(1), rat_from_i64(1)],
        ];
        assert_eq!(vs.vertices(), &expect[..]);
        let _ = rv(&[]);
    }

    #[test]
    fn simplex_vertices() {
        let p = catalog::simplex2();
        let vs = vertex_enumeration(&p);
        assert_eq!(vs.vertices().len(), 3);
        assert!(vs.vertices().contains(&vec![rat_from_i64(1), rat_from_i64(0)]));
        assert!(vs.vertices().contains(&vec![rat_from_i64(0), rat_from_i64(1)]));
    }

    #[test]
    fn pentagon_vertices_match_bruteforce_oracle() {
        // Oracle: solve every facet pair in floats, filter by feasibility.
        let p = catalog::pentagon(&rat(1, 2)).unwrap();
        let n = p.num_facets();
        let mut oracle: Vec<Vec<f64>> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let a = vec![
                    p.facets()[i].normal.iter().map(|x| x.to_f64().unwrap()).collect::<Vec<_>>(),
                    p.facets()[j].normal.iter().map(|x| x.to_f64().unwrap()).collect::<Vec<_>>(),
                ];
                let b = vec![
                    rat_to_f64(&p.facets()[i].offset),
                    rat_to_f64(&p.facets()[j].offset),
                ];
                if let Some(x) = linalg::solve(&a, &b) {
                    let feasible = p.facets().iter().all(|f| f.eval_f64(&x) >= -1e-9);
                    let dup = oracle.iter().any(|y| linalg::dist2(y, &x) < 1e-9);
                    if feasible && !dup {
                        oracle.push(x);
                    }
                }
            }
        }
        assert_eq!(oracle.len(), 5);
        assert_eq!(p.vertices().len(), 5);
        assert!(p.vertices().contains(&vec![rat(3, 2), rat_from_i64(1)]));
        assert!(p.vertices().contains(&vec![rat_from_i64(2), rat(1, 2)]));
    }

    #[test]
    fn unbounded_empty_degenerate() {
        // Quadrant: unbounded.
        let f = vec![
            Facet::new(vec![Int::from(1), Int::from(0)], Rat::zero()),
            Facet::new(vec![Int::from(0), Int::from(1)], Rat::zero()),
            Facet::new(vec![Int::from(1), Int::from(1)], Rat::zero()),
        ];
        assert!(matches!(HPolytope::new(2, f), Err(Error::Unbounded)));

        // Infeasible: x >= 1 and x <= 0 (in a bounded box for y).
        let f = vec![
            Facet::new(vec![Int::from(1), Int::from(0)], Rat::one()),
            Facet::new(vec![Int::from(-1), Int::from(0)], Rat::zero()),
            Facet::new(vec![Int::from(0), Int::from(1)], Rat::zero()),
            Facet::new(vec![Int::from(0), Int::from(-1)], -Rat::one()),
        ];
        assert!(matches!(HPolytope::new(2, f), Err(Error::Empty)));

        // Rank-deficient infeasible: x >= 1 and x <= 0 only.
        let f = vec![
            Facet::new(vec![Int::from(1), Int::from(0)], Rat::one()),
            Facet::new(vec![Int::from(-1), Int::from(0)], Rat::zero()),
            Facet::new(vec![Int::from(1), Int::from(0)], Rat::zero()),
        ];
        assert!(matches!(HPolytope::new(2, f), Err(Error::Empty)));

        // Slab: 0 <= x <= 1 in the plane (feasible, rank-deficient).
        let f = vec![
            Facet::new(vec![Int::from(1), Int::from(0)], Rat::zero()),
            Facet::new(vec![Int::from(-1), Int::from(0)], -Rat::one()),
            Facet::new(vec![Int::from(1), Int::from(0)], -Rat::one()),
        ];
        assert!(matches!(HPolytope::new(2, f), Err(Error::Unbounded)));

        // Degenerate: square flattened to a segment.
        let f = vec![
            Facet::new(vec![Int::from(1), Int::from(0)], Rat::zero()),
            Facet::new(vec![Int::from(-1), Int::from(0)], Rat::zero()),
            Facet::new(vec![Int::from(0), Int::from(1)], Rat::zero()),
            Facet::new(vec![Int::from(0), Int::from(-1)], -Rat::one()),
        ];
        assert!(matches!(HPolytope::new(2, f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn reconstruction_round_trip_square() {
        let p = square();
        let v = vertex_enumeration(&p);
        let h = halfspace_reconstruction(&v).unwrap();
        assert_eq!(h, p);
        assert_eq!(h.num_facets(), 4);
    }

    #[test]
    fn reconstruction_scaled_simplex() {
        // 2*Delta: vertices (0,0),(2,0),(0,2) -> normals (1,0),(0,1),(-1,-1).
        let v = VPolytope::new(
            2,
            vec![
                vec![rat_from_i64(0), rat_from_i64(0)],
                vec![rat_from_i64(2), rat_from_i64(0)],
                vec![rat_from_i64(0), rat_from_i64(2)],
            ],
        )
        .unwrap();
        let h = halfspace_reconstruction(&v).unwrap();
        let mut normals: Vec<Vec<i64>> = h
            .facets()
            .iter()
            .map(|f| f.normal.iter().map(|x| x.to_i64().unwrap()).collect())
            .collect();
        normals.sort();
        assert_eq!(normals, vec![vec![-1, -1], vec![0, 1], vec![1, 0]]);
        let cut = h
            .facets()
            .iter()
            .find(|f| f.normal[0] == Int::from(-1))
            .unwrap();
        assert_eq!(cut.offset, rat_from_i64(-2));
    }

    #[test]
    fn reconstruction_rejects_degenerate_and_interior() {
        let single = VPolytope::new(2, vec![vec![Rat::zero(), Rat::zero()]]);
        assert!(matches!(single, Err(Error::Degenerate(_))));
        // Center of the square is not a vertex.
        let bad = VPolytope::new(
            2,
            vec![
                vec![rat_from_i64(0), rat_from_i64(0)],
                vec![rat_from_i64(1), rat_from_i64(0)],
                vec![rat_from_i64(0), rat_from_i64(1)],
                vec![rat_from_i64(1), rat_from_i64(1)],
                vec![rat(1, 2), rat(1, 2)],
            ],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn intersect_examples() {
        let unit = square();
        let big = catalog::box2(&rat_from_i64(2), &rat_from_i64(2));
        let i = intersect(&unit, &big).unwrap();
        assert_eq!(i, unit);

        let shifted = unit.translate(&[rat(1, 2), Rat::zero()]);
        let overlap = intersect(&unit, &shifted).unwrap();
        assert_eq!(overlap.volume(), rat(1, 2));

        let far = unit.translate(&[rat_from_i64(2), Rat::zero()]);
        assert!(matches!(intersect(&unit, &far), Err(Error::Empty)));
    }

    #[test]
    fn volumes() {
        assert_eq!(square().volume(), rat_from_i64(1));
        let two_delta = catalog::simplex2().scale(&rat_from_i64(2)).unwrap();
        assert_eq!(two_delta.volume(), rat_from_i64(2));
        // Pentagon: 2 - t^2/2 (shoelace oracle value frozen at t = 1/2).
        let p = catalog::pentagon(&rat(1, 2)).unwrap();
        assert_eq!(p.volume(), rat(15, 8));
    }

    #[test]
    fn moment_examples() {
        let m = moments(&square());
        assert_eq!(m.barycenter, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(m.variance, rat(1, 6));

        // Translation equivariance.
        let t = vec![rat_from_i64(3), rat_from_i64(-2)];
        let mt = moments(&square().translate(&t));
        assert_eq!(mt.barycenter, vec![rat(7, 2), rat(-3, 2)]);
        assert_eq!(mt.variance, rat(1, 6));

        let two_delta = catalog::simplex2().scale(&rat_from_i64(2)).unwrap();
        assert_eq!(moments(&two_delta).barycenter, vec![rat(2, 3), rat(2, 3)]);
    }

    #[test]
    fn variance_scaling() {
        let p = square();
        let base = moments(&p).variance;
        for s in [2i64, 3] {
            let sp = p.scale(&rat_from_i64(s)).unwrap();
            assert_eq!(
                moments(&sp).variance,
                &base * rat_from_i64(s * s)
            );
        }
    }

    #[test]
    fn diameter_examples() {
        assert!((diameter(&square()) - 2f64.sqrt()).abs() < 1e-15);
        let thin = catalog::box2(&rat_from_i64(1), &rat(1, 100));
        assert!((diameter(&thin) - (1.0 + 1e-4f64).sqrt()).abs() < 1e-12);
        let moved = square().translate(&[rat_from_i64(5), rat_from_i64(7)]);
        assert_eq!(diameter(&square()), diameter(&moved));
    }

    #[test]
    fn point_distance_examples() {
        let p = square();
        assert_eq!(point_distance(&[0.5, 0.5], &p).unwrap(), 0.0);
        let corner = point_distance(&[2.0, 2.0], &p).unwrap();
        assert!((corner - 2f64.sqrt()).abs() < 1e-12);
        let edge = point_distance(&[2.0, 0.5], &p).unwrap();
        assert!((edge - 1.0).abs() < 1e-12);
        assert!(matches!(
            point_distance(&[0.0], &p),
            Err(Error::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn point_distance_zero_iff_feasible() {
        let p = catalog::pentagon(&rat(1, 2)).unwrap();
        let probes = [
            [0.3, 0.4],
            [1.9, 0.9],
            [2.2, 0.1],
            [1.5, 1.0],
            [-0.1, 0.5],
        ];
        for q in probes {
            let d = point_distance(&q, &p).unwrap();
            let feasible = p.facets().iter().all(|f| f.eval_f64(&q) >= -1e-12);
            assert_eq!(d == 0.0, feasible, "probe {q:?}");
        }
    }

    #[test]
    fn face_counts() {
        let cube = catalog::cube(3);
        assert_eq!(faces(&cube, 1).unwrap().len(), 12);
        assert_eq!(faces(&cube, 0).unwrap().len(), 8);
        assert_eq!(faces(&cube, 2).unwrap().len(), 6);

        let p = catalog::pentagon(&rat(1, 2)).unwrap();
        assert_eq!(faces(&p, 0).unwrap().len(), 5);
        // Euler relation for polygons: #V = #E.
        assert_eq!(faces(&p, 0).unwrap().len(), faces(&p, 1).unwrap().len());

        assert_eq!(faces(&catalog::simplex2(), 1).unwrap().len(), 3);
        assert!(matches!(
            faces(&p, 2),
            Err(Error::BadK { k: 2, dim: 2 })
        ));
    }

    #[test]
    fn face_measures() {
        let p = square();
        let edges = faces(&p, 1).unwrap();
        for e in &edges {
            assert!((face_measure(&p, e) - 1.0).abs() < 1e-12);
        }
        let cube = catalog::cube(3);
        for f in faces(&cube, 2).unwrap() {
            assert!((face_measure(&cube, &f) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = catalog::pentagon(&rat(1, 2)).unwrap();
        let s = to_json(&p).to_string();
        let q = from_json(&s).unwrap();
        assert_eq!(p, q);
        let s2 = to_json_vertices(&p).to_string();
        let q2 = from_json(&s2).unwrap();
        assert_eq!(p, q2);
    }

    #[test]
    fn segment_kernel() {
        let seg = catalog::segment(&Rat::zero(), &rat_from_i64(2)).unwrap();
        assert_eq!(seg.volume(), rat_from_i64(2));
        assert_eq!(seg.vertices().len(), 2);
        assert_eq!(faces(&seg, 0).unwrap().len(), 2);
        let m = moments(&seg);
        assert_eq!(m.barycenter, vec![rat_from_i64(1)]);
        assert_eq!(m.variance, rat(1, 3));
    }

    #[test]
    fn monte_carlo_volume_cross_check() {
        use rand::{Rng, SeedableRng};
        let p = catalog::pentagon(&rat(1, 2)).unwrap();
        let exact = rat_to_f64(&p.volume());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000usize;
        let mut hits = 0usize;
        for _ in 0..n {
            let x = rng.gen_range(0.0..2.0);
            let y = rng.gen_range(0.0..1.0);
            if p.facets().iter().all(|f| f.eval_f64(&[x, y]) >= 0.0) {
                hits += 1;
            }
        }
        let box_vol = 2.0;
        let ratio = hits as f64 / n as f64;
        let est = ratio * box_vol;
        let sigma = box_vol * (ratio * (1.0 - ratio) / n as f64).sqrt();
        assert!(
            (exact - est).abs() <= 3.0 * sigma,
            "exact {exact} vs estimate {est} (3 sigma {})",
            3.0 * sigma
        );
    }
}
