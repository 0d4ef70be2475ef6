//! Joint numerical ranges through their support functions.
//!
//! For Hermitian X_1..X_k the support function of W = {(⟨X_1⟩, …, ⟨X_k⟩)} in
//! direction n is the top eigenvalue of Σ n_i X_i and the top eigenvector is the
//! state realising the support point.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hull::{self, Hull3, P2, P3};
use crate::linalg::{
    c, combination, eigh, expect_vec, CMat, CVec, Eigensystem, HermitianOperator,
};
use crate::nnls::nnls;
use crate::rng;

/// Unit vector in R^k.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes any nonzero vector.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Invalid("zero or non-finite direction".into()));
        }
        Ok(Self(v.into_iter().map(|x| x / n).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Fibonacci lattice on the 2-sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Direction> {
    let golden = core::f64::consts::PI * (3.0 - libm::sqrt(5.0));
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            let t = golden * i as f64;
            Direction(vec![r * libm::cos(t), r * libm::sin(t), z])
        })
        .collect()
}

pub fn circle_directions(n: usize) -> Vec<Direction> {
    (0..n)
        .map(|i| {
            let t = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
            Direction(vec![libm::cos(t), libm::sin(t)])
        })
        .collect()
}

/// Deterministic direction set for k operators: ±1 for k = 1, a circle for k = 2,
/// the Fibonacci lattice for k = 3, and the ±axes plus seeded random points above.
pub fn sweep_directions(k: usize, n: usize, seed: u64) -> Vec<Direction> {
    match k {
        0 => Vec::new(),
        1 => vec![Direction(vec![1.0]), Direction(vec![-1.0])],
        2 => circle_directions(n.max(3)),
        3 => fibonacci_sphere(n.max(4)),
        _ => {
            let mut out = Vec::new();
            for a in 0..k {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; k];
                    v[a] = s;
                    out.push(Direction(v));
                }
            }
            let mut r = rng::seeded(seed);
            while out.len() < n.max(2 * k) {
                out.push(Direction(rng::real_unit_vector(&mut r, k)));
            }
            out
        }
    }
}

fn check_ops(ops: &[HermitianOperator]) -> Result<usize> {
    let d = ops.first().ok_or_else(|| Error::Invalid("no operators".into()))?.dim();
    if ops.iter().any(|o| o.dim() != d) {
        return Err(Error::Dimension("operators differ in size".into()));
    }
    Ok(d)
}

/// Expectation vector (⟨v|X_i|v⟩)_i.
pub fn expectation_point(ops: &[HermitianOperator], v: &CVec) -> Vec<f64> {
    ops.iter().map(|o| expect_vec(o, v)).collect()
}

#[derive(Debug, Clone)]
pub struct SupportSample {
    pub direction: Direction,
    pub value: f64,
    pub point: Vec<f64>,
    pub witness: CVec,
    /// Top eigenvalue has multiplicity > 1 (relative gap below 1e-10).
    pub degenerate: bool,
    /// Dimension of the top eigenspace.
    pub multiplicity: usize,
    pub(crate) eig: Eigensystem,
}

impl SupportSample {
    /// Orthonormal basis of the top eigenspace, as columns.
    pub fn top_eigenspace(&self) -> CMat {
        let n = self.eig.values.len();
        self.eig.vectors.columns(n - self.multiplicity, self.multiplicity).into_owned()
    }
}

pub(crate) fn top_multiplicity(values: &[f64], rel: f64) -> usize {
    let n = values.len();
    let top = values[n - 1];
    let scale = values[n - 1].abs().max(values[0].abs()).max(1e-300);
    values.iter().filter(|&&v| top - v <= rel * scale).count()
}

pub fn support(ops: &[HermitianOperator], n: &Direction) -> Result<SupportSample> {
    check_ops(ops)?;
    if ops.len() != n.dim() {
        return Err(Error::Dimension(format!("{} operators, direction in R^{}", ops.len(), n.dim())));
    }
    let m = combination(ops, n.as_slice())?;
    let eig = eigh(&m);
    let witness = eig.top();
    let multiplicity = top_multiplicity(&eig.values, 1e-10);
    Ok(SupportSample {
        direction: n.clone(),
        value: eig.max(),
        point: expectation_point(ops, &witness),
        witness,
        degenerate: multiplicity > 1,
        multiplicity,
        eig,
    })
}

/// Extreme points of the image of a subspace (columns of `basis`) under the expectation map.
pub fn subspace_extreme_points(ops: &[HermitianOperator], basis: &CMat, count: usize) -> Vec<Vec<f64>> {
    let reduced: Vec<HermitianOperator> = ops
        .iter()
        .map(|o| HermitianOperator::hermitian_part(&(basis.adjoint() * o.matrix() * basis)))
        .collect();
    let dirs = sweep_directions(ops.len(), count, 0x5eed);
    let mut out = Vec::with_capacity(dirs.len());
    for d in &dirs {
        let m = combination(&reduced, d.as_slice()).expect("consistent reduced operators");
        let y = eigh(&m).top();
        out.push(expectation_point(ops, &(basis * y)));
    }
    out
}

/// Inner vertex cloud plus outer supporting half-spaces.
#[derive(Debug, Clone)]
pub struct ConvexBodyApprox {
    pub inner_vertices: Vec<Vec<f64>>,
    pub outer_halfspaces: Vec<(Direction, f64)>,
    /// False when the directions do not positively span R^k.
    pub bounded: bool,
    /// Outer half-spaces are not certified (heuristic optimizer).
    pub heuristic_outer: bool,
}

impl ConvexBodyApprox {
    pub fn dim(&self) -> usize {
        self.outer_halfspaces.first().map(|h| h.0.dim()).unwrap_or(0)
    }

    /// Largest violation of any half-space by any inner vertex (≤ 0 when inner ⊆ outer).
    pub fn max_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for x in &self.inner_vertices {
            for (n, h) in &self.outer_halfspaces {
                worst = worst.max(n.dot(x) - h);
            }
        }
        worst
    }

    pub fn outer_contains(&self, x: &[f64], tol: f64) -> bool {
        self.outer_halfspaces.iter().all(|(n, h)| n.dot(x) <= h + tol)
    }

    /// max over inner vertices of y·x
    pub fn inner_support(&self, y: &[f64]) -> f64 {
        self.inner_vertices
            .iter()
            .map(|x| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn centroid(&self) -> Vec<f64> {
        let k = self.inner_vertices.first().map(|v| v.len()).unwrap_or(0);
        let mut cen = vec![0.0; k];
        for v in &self.inner_vertices {
            for i in 0..k {
                cen[i] += v[i];
            }
        }
        let n = self.inner_vertices.len().max(1) as f64;
        cen.iter().map(|x| x / n).collect()
    }

    fn points3(&self) -> Vec<P3> {
        self.inner_vertices.iter().map(|v| [v[0], v[1], v[2]]).collect()
    }

    /// Convex hull of the inner vertices (3D bodies only).
    pub fn inner_hull(&self) -> Option<Hull3> {
        if self.dim() != 3 {
            return None;
        }
        hull::hull_3d(&self.points3())
    }

    /// Counter-clockwise boundary polygon of the inner vertices (2D bodies only).
    pub fn inner_polygon(&self) -> Option<Vec<P2>> {
        if self.dim() != 2 {
            return None;
        }
        let pts: Vec<P2> = self.inner_vertices.iter().map(|v| [v[0], v[1]]).collect();
        Some(hull::hull_2d(&pts))
    }

    /// Vertices of the outer polytope (3D, bounded, full-dimensional bodies only).
    pub fn outer_vertices(&self) -> Option<Vec<P3>> {
        if self.dim() != 3 || !self.bounded {
            return None;
        }
        let cen = self.centroid();
        let mut duals = Vec::with_capacity(self.outer_halfspaces.len());
        for (n, h) in &self.outer_halfspaces {
            let g = h - n.dot(&cen);
            if g <= 1e-12 {
                return None;
            }
            let s = n.as_slice();
            duals.push([s[0] / g, s[1] / g, s[2] / g]);
        }
        let dual_hull = hull::hull_3d(&duals)?;
        let mut verts = Vec::with_capacity(dual_hull.faces.len());
        for f in 0..dual_hull.faces.len() {
            let (m, o) = dual_hull.plane(f);
            if o <= 0.0 {
                return None;
            }
            verts.push([cen[0] + m[0] / o, cen[1] + m[1] / o, cen[2] + m[2] / o]);
        }
        Some(verts)
    }

    /// Hausdorff distances (inner, outer) from the ball of radius `r` about `center`.
    pub fn ball_hausdorff(&self, center: &[f64], r: f64) -> Option<(f64, f64)> {
        let hull = self.inner_hull()?;
        let cen: P3 = [center[0], center[1], center[2]];
        let mut min_face = f64::INFINITY;
        for f in 0..hull.faces.len() {
            let (n, o) = hull.plane(f);
            min_face = min_face.min(o - hull::dot3(n, cen));
        }
        let max_inner = self
            .inner_vertices
            .iter()
            .map(|v| hull::norm3(hull::sub3([v[0], v[1], v[2]], cen)))
            .fold(0.0f64, f64::max);
        let inner = (r - min_face).max(max_inner - r).max(0.0);
        let outer_verts = self.outer_vertices()?;
        let max_outer = outer_verts
            .iter()
            .map(|v| hull::norm3(hull::sub3(*v, cen)))
            .fold(0.0f64, f64::max);
        let min_half = self
            .outer_halfspaces
            .iter()
            .map(|(n, h)| h - n.dot(center))
            .fold(f64::INFINITY, f64::min);
        let outer = (max_outer - r).max(r - min_half).max(0.0);
        Some((inner, outer))
    }
}

/// Whether the directions positively span R^k (every ±axis is a nonnegative combination).
pub fn positively_spanning(dirs: &[Direction]) -> bool {
    let k = match dirs.first() {
        Some(d) => d.dim(),
        None => return false,
    };
    if dirs.len() < k + 1 {
        return false;
    }
    let a = DMatrix::from_fn(k, dirs.len(), |i, j| dirs[j].as_slice()[i]);
    for axis in 0..k {
        for s in [1.0, -1.0] {
            let mut b = DVector::zeros(k);
            b[axis] = s;
            let (_, r) = nnls(&a, &b);
            if r > 1e-9 {
                return false;
            }
        }
    }
    true
}

/// Direction sweep: support points inside, supporting half-spaces outside.
pub fn jnr_approximate(ops: &[HermitianOperator], dirs: &[Direction]) -> Result<ConvexBodyApprox> {
    check_ops(ops)?;
    let mut samples = Vec::with_capacity(dirs.len());
    for n in dirs {
        samples.push(support(ops, n)?);
    }
    Ok(assemble(ops, &samples))
}

/// Builds the approximation from precomputed support samples.
pub fn assemble(ops: &[HermitianOperator], samples: &[SupportSample]) -> ConvexBodyApprox {
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for s in samples {
        inner.push(s.point.clone());
        if s.degenerate {
            inner.extend(subspace_extreme_points(ops, &s.top_eigenspace(), 16));
        }
        outer.push((s.direction.clone(), s.value));
    }
    let dirs: Vec<Direction> = samples.iter().map(|s| s.direction.clone()).collect();
    ConvexBodyApprox {
        inner_vertices: inner,
        outer_halfspaces: outer,
        bounded: positively_spanning(&dirs),
        heuristic_outer: false,
    }
}

/// λ_min(center + Σ y_i G_i) ≥ −1e-9
pub fn spectrahedron_contains(
    center: &HermitianOperator,
    gens: &[HermitianOperator],
    y: &[f64],
) -> Result<bool> {
    if gens.len() != y.len() {
        return Err(Error::Dimension("generator count differs from parameter length".into()));
    }
    let mut m = center.matrix().clone();
    for (g, &yi) in gens.iter().zip(y) {
        if g.dim() != center.dim() {
            return Err(Error::Dimension("generator size differs from center".into()));
        }
        m += g.matrix().scale(yi);
    }
    Ok(eigh(&m).min() >= -1e-9)
}

/// Sampled polar membership: y·x ≤ 1 for every inner vertex x of the body.
pub fn in_sampled_polar(body: &ConvexBodyApprox, y: &[f64], tol: f64) -> bool {
    body.inner_support(y) <= 1.0 + tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceShape {
    Segment,
    Ellipse,
    /// Neither fit accepted the cloud.
    Unresolved,
}

#[derive(Debug, Clone)]
pub struct FlatFace {
    pub normal: [f64; 3],
    /// 1 for segments, 2 for ellipses.
    pub dimension: usize,
    pub shape: FaceShape,
    /// Relative gap between the top two eigenvalues at the converged normal.
    pub gap: f64,
    pub boundary: Vec<[f64; 3]>,
}

#[derive(Debug, Clone)]
pub struct JNRClassification {
    pub e: usize,
    pub s: usize,
    pub faces: Vec<FlatFace>,
    /// Largest relative gap among accepted flat normals.
    pub flat_max_gap: f64,
    /// Smallest relative gap among rejected candidate normals (∞ if none).
    pub nonflat_min_gap: f64,
}

impl JNRClassification {
    /// log10 distance of the closest candidate from the 1e-8 flatness threshold.
    pub fn confidence(&self) -> f64 {
        let a = if self.flat_max_gap > 0.0 { -8.0 - libm::log10(self.flat_max_gap) } else { f64::INFINITY };
        let b = if self.nonflat_min_gap.is_finite() {
            libm::log10(self.nonflat_min_gap) + 8.0
        } else {
            f64::INFINITY
        };
        a.min(b)
    }
}

const FLAT_GAP: f64 = 1e-8;

/// Shared eigenvector of all operators, if one exists.
pub fn common_eigenvector(ops: &[HermitianOperator]) -> Option<CVec> {
    let d = ops[0].dim();
    let scale = ops.iter().map(|o| o.matrix().norm()).fold(0.0f64, f64::max).max(1e-300);
    let coefsets = [
        [0.5377, 1.8339, -2.2588, 0.8622, 0.3188],
        [-1.3077, -0.4336, 0.3426, 3.5784, 2.7694],
        [1.4090, 1.4172, 0.6715, -1.2075, 0.7172],
    ];
    for coefs in coefsets {
        let k = ops.len();
        let cf: Vec<f64> = (0..k).map(|i| coefs[i % 5] * (1.0 + i as f64 / 7.0)).collect();
        let m = combination(ops, &cf).ok()?;
        let e = eigh(&m);
        let mut found_degenerate = false;
        for j in 0..d {
            if j + 1 < d && (e.values[j + 1] - e.values[j]).abs() < 1e-8 * scale {
                found_degenerate = true;
            }
            let v = e.vector(j);
            let ok = ops.iter().all(|o| {
                let xv = o.matrix() * &v;
                let lam = v.dotc(&xv);
                (xv - v.scale(1.0).map(|z| z * lam)).norm() < 1e-8 * scale
            });
            if ok {
                return Some(v);
            }
        }
        if !found_degenerate {
            return None;
        }
    }
    None
}

fn gram_min_eig(ops: &[&CMat]) -> f64 {
    let k = ops.len();
    let mut g = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = crate::linalg::trace_product(&ops[i].adjoint(), ops[j]).re;
        }
    }
    let norms: Vec<f64> = (0..k).map(|i| libm::sqrt(g[(i, i)].max(1e-300))).collect();
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] /= norms[i] * norms[j];
        }
    }
    g.symmetric_eigenvalues().min()
}

fn tangent_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let t1 = hull::cross3(n, a);
    let l = hull::norm3(t1);
    let t1 = [t1[0] / l, t1[1] / l, t1[2] / l];
    let t2 = hull::cross3(n, t1);
    (t1, t2)
}

struct TopPair {
    rel_gap: f64,
    f: [f64; 3],
    b: [[f64; 3]; 3],
    basis: CMat,
    top: f64,
}

fn top_pair(ops: &[HermitianOperator], n: [f64; 3]) -> TopPair {
    let m = combination(ops, &n).expect("three qutrit operators");
    let e = eigh(&m);
    let d = e.values.len();
    let spread = (e.values[d - 1] - e.values[0]).max(1e-300);
    let basis = e.vectors.columns(d - 2, 2).into_owned();
    let mut b = [[0.0; 3]; 3];
    for (i, o) in ops.iter().enumerate() {
        let r = basis.adjoint() * o.matrix() * &basis;
        b[i] = [r[(0, 1)].re, -r[(0, 1)].im, 0.5 * (r[(0, 0)].re - r[(1, 1)].re)];
    }
    let mut f = [0.0; 3];
    for i in 0..3 {
        for a in 0..3 {
            f[a] += n[i] * b[i][a];
        }
    }
    TopPair { rel_gap: (e.values[d - 1] - e.values[d - 2]) / spread, f, b, basis, top: e.values[d - 1] }
}

/// Gauss-Newton descent of the top-eigenvalue splitting over the sphere.
fn refine_degeneracy(ops: &[HermitianOperator], start: [f64; 3]) -> ([f64; 3], TopPair) {
    let mut n = start;
    let mut tp = top_pair(ops, n);
    for _ in 0..80 {
        if tp.rel_gap < 1e-14 {
            break;
        }
        let (t1, t2) = tangent_basis(n);
        let mut j = [[0.0; 2]; 3];
        for a in 0..3 {
            for i in 0..3 {
                j[a][0] += t1[i] * tp.b[i][a];
                j[a][1] += t2[i] * tp.b[i][a];
            }
        }
        let mut jtj = [[0.0; 2]; 2];
        let mut jtf = [0.0; 2];
        for a in 0..3 {
            for p in 0..2 {
                jtf[p] += j[a][p] * tp.f[a];
                for q in 0..2 {
                    jtj[p][q] += j[a][p] * j[a][q];
                }
            }
        }
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let mut dx = -(jtj[1][1] * jtf[0] - jtj[0][1] * jtf[1]) / det;
        let mut dy = -(-jtj[1][0] * jtf[0] + jtj[0][0] * jtf[1]) / det;
        let step = libm::hypot(dx, dy);
        if step > 0.3 {
            dx *= 0.3 / step;
            dy *= 0.3 / step;
        }
        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..20 {
            let cand = [
                n[0] + scale * (dx * t1[0] + dy * t2[0]),
                n[1] + scale * (dx * t1[1] + dy * t2[1]),
                n[2] + scale * (dx * t1[2] + dy * t2[2]),
            ];
            let l = hull::norm3(cand);
            let cand = [cand[0] / l, cand[1] / l, cand[2] / l];
            let ctp = top_pair(ops, cand);
            if ctp.rel_gap < tp.rel_gap {
                n = cand;
                tp = ctp;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted || step * scale < 1e-16 {
            break;
        }
    }
    (n, tp)
}

fn face_boundary(ops: &[HermitianOperator], n: [f64; 3], basis: &CMat, count: usize) -> Vec<[f64; 3]> {
    let (t1, t2) = tangent_basis(n);
    let reduced: Vec<CMat> = ops.iter().map(|o| basis.adjoint() * o.matrix() * basis).collect();
    (0..count)
        .map(|k| {
            let th = 2.0 * core::f64::consts::PI * k as f64 / count as f64;
            let (cs, sn) = (libm::cos(th), libm::sin(th));
            let mut m = CMat::zeros(2, 2);
            for i in 0..3 {
                m += reduced[i].scale(cs * t1[i] + sn * t2[i]);
            }
            let y = eigh(&m).top();
            let x = basis * y;
            let p = expectation_point(ops, &x);
            [p[0], p[1], p[2]]
        })
        .collect()
}

fn fit_face(points: &[[f64; 3]]) -> FaceShape {
    let n = points.len() as f64;
    let mut cen = [0.0; 3];
    for p in points {
        for i in 0..3 {
            cen[i] += p[i] / n;
        }
    }
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for p in points {
        let d = nalgebra::Vector3::new(p[0] - cen[0], p[1] - cen[1], p[2] - cen[2]);
        cov += d * d.transpose();
    }
    let se = nalgebra::SymmetricEigen::new(cov);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let s1 = libm::sqrt(se.eigenvalues[idx[0]].max(0.0));
    let s2 = libm::sqrt(se.eigenvalues[idx[1]].max(0.0));
    if s2 < 1e-6 * s1 || s1 == 0.0 {
        return FaceShape::Segment;
    }
    let e1 = se.eigenvectors.column(idx[0]).into_owned();
    let e2 = se.eigenvectors.column(idx[1]).into_owned();
    let rows = points.len();
    let design = DMatrix::<f64>::from_fn(rows, 6, |r, col| {
        let d = nalgebra::Vector3::new(points[r][0] - cen[0], points[r][1] - cen[1], points[r][2] - cen[2]);
        let x = d.dot(&e1) / s1;
        let y = d.dot(&e2) / s1;
        [x * x, x * y, y * y, x, y, 1.0][col]
    });
    let svd = design.svd(false, true);
    let vt = match svd.v_t {
        Some(v) => v,
        None => return FaceShape::Unresolved,
    };
    let k = (0..6)
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap_or(5);
    let coef = vt.row(k);
    let disc = coef[1] * coef[1] - 4.0 * coef[0] * coef[2];
    if disc < 0.0 {
        FaceShape::Ellipse
    } else {
        FaceShape::Unresolved
    }
}

/// Counts elliptic and segment flat faces of the numerical range of a qutrit triple.
pub fn classify_qutrit_jnr(ops: &[HermitianOperator]) -> Result<JNRClassification> {
    if ops.len() != 3 || ops.iter().any(|o| o.dim() != 3) {
        return Err(Error::Dimension("classification needs three 3x3 operators".into()));
    }
    let id = CMat::identity(3, 3);
    for i in 0..3 {
        for j in (i + 1)..3 {
            if gram_min_eig(&[&id, ops[i].matrix(), ops[j].matrix()]) < 1e-10 {
                return Err(Error::Precondition(format!(
                    "operators {i} and {j} are linearly dependent together with the identity"
                )));
            }
        }
    }
    if let Some(v) = common_eigenvector(ops) {
        let p = expectation_point(ops, &v);
        return Err(Error::CommonEigenvector(format!(
            "joint eigenvalue ({:.6}, {:.6}, {:.6}); the range is the hull of this point and a \
             qubit range on the orthogonal complement",
            p[0], p[1], p[2]
        )));
    }

    let seeds = fibonacci_sphere(400);
    let pts: Vec<[f64; 3]> = seeds.iter().map(|d| [d.0[0], d.0[1], d.0[2]]).collect();
    let gaps: Vec<f64> = pts.iter().map(|&n| top_pair(ops, n).rel_gap).collect();
    let mut starts = Vec::new();
    for i in 0..pts.len() {
        let mut nb: Vec<(f64, usize)> = (0..pts.len())
            .filter(|&j| j != i)
            .map(|j| (hull::norm3(hull::sub3(pts[i], pts[j])), j))
            .collect();
        nb.sort_by(|a, b| a.0.total_cmp(&b.0));
        if nb.iter().take(8).all(|&(_, j)| gaps[i] <= gaps[j]) {
            starts.push(pts[i]);
        }
    }

    let mut faces: Vec<FlatFace> = Vec::new();
    let mut flat_max: f64 = 0.0;
    let mut nonflat_min = f64::INFINITY;
    for s in starts {
        let (n, tp) = refine_degeneracy(ops, s);
        if tp.rel_gap >= FLAT_GAP {
            nonflat_min = nonflat_min.min(tp.rel_gap);
            continue;
        }
        if faces.iter().any(|f| hull::norm3(hull::sub3(f.normal, n)) < 1e-6) {
            continue;
        }
        flat_max = flat_max.max(tp.rel_gap);
        let boundary = face_boundary(ops, n, &tp.basis, 64);
        let shape = fit_face(&boundary);
        let _ = tp.top;
        faces.push(FlatFace {
            normal: n,
            dimension: if shape == FaceShape::Segment { 1 } else { 2 },
            shape,
            gap: tp.rel_gap,
            boundary,
        });
    }
    let e = faces.iter().filter(|f| f.shape == FaceShape::Ellipse).count();
    let s = faces.iter().filter(|f| f.shape == FaceShape::Segment).count();
    Ok(JNRClassification { e, s, faces, flat_max_gap: flat_max, nonflat_min_gap: nonflat_min })
}

/// Outcome of the one-shot discrimination test between two unitaries.
#[derive(Debug, Clone)]
pub enum Distinguishability {
    /// ⟨ψ|U†V|ψ⟩ = 0 for the returned state.
    Perfect { psi: CVec },
    /// The eigenvalue hull of U†V avoids the origin; `direction·z ≥ distance` on it.
    Impossible { direction: [f64; 2], distance: f64 },
}

fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMat::identity(n, n)).norm()
}

/// Decides whether one use of U or V can be told apart with certainty.
pub fn one_shot_distinguishable(u: &CMat, v: &CMat) -> Result<Distinguishability> {
    if u.shape() != v.shape() || u.nrows() != u.ncols() {
        return Err(Error::Dimension("unitaries must be square and of equal size".into()));
    }
    if unitarity_defect(u) > 1e-9 || unitarity_defect(v) > 1e-9 {
        return Err(Error::Invalid("input is not unitary".into()));
    }
    let m = u.adjoint() * v;
    let x = HermitianOperator::hermitian_part(&m);
    let y = HermitianOperator::hermitian_part(&(&m * c(0.0, -1.0)));
    let gen = x.matrix() + y.matrix().scale(core::f64::consts::FRAC_1_SQRT_2 * 0.7316);
    let e = eigh(&gen);
    let d = m.nrows();
    let vecs: Vec<CVec> = (0..d).map(|k| e.vector(k)).collect();
    let zs: Vec<P2> = vecs
        .iter()
        .map(|w| {
            let z = w.dotc(&(&m * w));
            [z.re, z.im]
        })
        .collect();
    let (near, dist) = hull::closest_point_2d(&zs, [0.0, 0.0]);
    if dist > 1e-12 {
        return Ok(Distinguishability::Impossible {
            direction: [near[0] / dist, near[1] / dist],
            distance: dist,
        });
    }
    // Find at most three eigenvalues whose hull holds the origin and mix their eigenvectors.
    let weights = origin_weights(&zs).ok_or_else(|| Error::Inconsistent("origin weights".into()))?;
    let mut psi = CVec::zeros(d);
    for (k, w) in weights {
        psi += vecs[k].scale(libm::sqrt(w));
    }
    let nrm = psi.norm();
    Ok(Distinguishability::Perfect { psi: psi.unscale(nrm) })
}

fn origin_weights(zs: &[P2]) -> Option<Vec<(usize, f64)>> {
    let n = zs.len();
    let tol = 1e-12;
    for (i, z) in zs.iter().enumerate() {
        if libm::hypot(z[0], z[1]) <= tol {
            return Some(vec![(i, 1.0)]);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (zs[i], zs[j]);
            let cr = a[0] * b[1] - a[1] * b[0];
            let dt = a[0] * b[0] + a[1] * b[1];
            if cr.abs() <= tol && dt < 0.0 {
                let la = libm::hypot(a[0], a[1]);
                let lb = libm::hypot(b[0], b[1]);
                return Some(vec![(i, lb / (la + lb)), (j, la / (la + lb))]);
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let (a, b, cc) = (zs[i], zs[j], zs[k]);
                let det = (b[0] - a[0]) * (cc[1] - a[1]) - (cc[0] - a[0]) * (b[1] - a[1]);
                if det.abs() < 1e-300 {
                    continue;
                }
                let l1 = ((b[0]) * (cc[1]) - (cc[0]) * (b[1])) / det;
                let l2 = ((cc[0]) * (a[1]) - (a[0]) * (cc[1])) / det;
                let l3 = 1.0 - l1 - l2;
                if l1 >= -tol && l2 >= -tol && l3 >= -tol {
                    return Some(vec![(i, l1.max(0.0)), (j, l2.max(0.0)), (k, l3.max(0.0))]);
                }
            }
        }
    }
    None
}

/// (σ_x, σ_y, σ_z)
pub fn pauli_triple() -> [HermitianOperator; 3] {
    [
        crate::linalg::pauli_op(1),
        crate::linalg::pauli_op(2),
        crate::linalg::pauli_op(3),
    ]
}

/// Tr ρ_+ ρ_− for antipodal support states.
pub fn antipodal_overlap(ops: &[HermitianOperator], n: &Direction) -> Result<f64> {
    let plus = support(ops, n)?;
    let neg = Direction(n.as_slice().iter().map(|x| -x).collect());
    let minus = support(ops, &neg)?;
    Ok(plus.witness.dotc(&minus.witness).norm_sqr())
}
