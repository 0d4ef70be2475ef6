//! Small convex-hull toolkit: 2D and 3D point clouds, plus a generic
//! simplicial hull for the low-dimensional bodies of the separable bounds.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

pub type P2 = [f64; 2];
pub type P3 = [f64; 3];

fn cross2(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull (monotone chain); collinear points dropped.
pub fn hull_2d(points: &[P2]) -> Vec<P2> {
    let mut pts: Vec<P2> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    if pts.len() < 3 {
        return pts;
    }
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs())).max(1.0);
    let eps = 1e-13 * scale * scale;
    let mut lower: Vec<P2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross2(lower[lower.len() - 2], lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<P2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(upper[upper.len() - 2], upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Closest point of the convex hull of `points` to `q`, and its distance.
pub fn closest_point_2d(points: &[P2], q: P2) -> (P2, f64) {
    let h = hull_2d(points);
    if h.len() == 1 {
        let d = dist2(h[0], q);
        return (h[0], d);
    }
    if h.len() >= 3 && contains_2d(&h, q, 0.0) {
        return (q, 0.0);
    }
    let mut best = (h[0], f64::INFINITY);
    for i in 0..h.len() {
        let a = h[i];
        let b = h[(i + 1) % h.len()];
        let ab = [b[0] - a[0], b[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        let t = if len2 > 0.0 {
            (((q[0] - a[0]) * ab[0] + (q[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let p = [a[0] + t * ab[0], a[1] + t * ab[1]];
        let d = dist2(p, q);
        if d < best.1 {
            best = (p, d);
        }
    }
    best
}

fn dist2(a: P2, b: P2) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

/// Point-in-convex-polygon test for a counter-clockwise hull, boundary included within `tol`.
pub fn contains_2d(hull: &[P2], q: P2, tol: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => dist2(hull[0], q) <= tol,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let len = dist2(a, b);
            cross2(a, b, q).abs() <= tol * len.max(1e-300)
                && dist2(a, q) + dist2(q, b) <= len + tol
        }
        n => (0..n).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            cross2(a, b, q) >= -tol * dist2(a, b)
        }),
    }
}

pub fn sub3(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn dot3(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm3(a: P3) -> f64 {
    libm::sqrt(dot3(a, a))
}

/// Triangulated 3D hull with outward unit normals.
#[derive(Debug, Clone)]
pub struct Hull3 {
    pub points: Vec<P3>,
    pub faces: Vec<[usize; 3]>,
}

impl Hull3 {
    /// Outward unit normal and offset (normal·x = offset on the face plane).
    pub fn plane(&self, f: usize) -> (P3, f64) {
        let [a, b, c] = self.faces[f];
        let n = cross3(sub3(self.points[b], self.points[a]), sub3(self.points[c], self.points[a]));
        let l = norm3(n);
        let n = [n[0] / l, n[1] / l, n[2] / l];
        (n, dot3(n, self.points[a]))
    }

    pub fn vertex_ids(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.faces.iter().flat_map(|f| f.iter().copied()).collect();
        set.into_iter().collect()
    }

    pub fn contains(&self, q: P3, tol: f64) -> bool {
        (0..self.faces.len()).all(|f| {
            let (n, o) = self.plane(f);
            dot3(n, q) <= o + tol
        })
    }
}

/// Incremental 3D hull. Returns `None` when the cloud is (numerically) planar or smaller.
pub fn hull_3d(points: &[P3]) -> Option<Hull3> {
    let n = points.len();
    if n < 4 {
        return None;
    }
    let scale = points.iter().fold(0.0f64, |m, p| m.max(norm3(*p))).max(1e-300);
    let eps = 1e-11 * scale;
    let i0 = 0;
    let i1 = (0..n).max_by(|&a, &b| {
        norm3(sub3(points[a], points[i0])).total_cmp(&norm3(sub3(points[b], points[i0])))
    })?;
    let d01 = sub3(points[i1], points[i0]);
    if norm3(d01) < eps {
        return None;
    }
    let line_dist = |k: usize| norm3(cross3(d01, sub3(points[k], points[i0]))) / norm3(d01);
    let i2 = (0..n).max_by(|&a, &b| line_dist(a).total_cmp(&line_dist(b)))?;
    if line_dist(i2) < eps {
        return None;
    }
    let nrm = cross3(d01, sub3(points[i2], points[i0]));
    let nl = norm3(nrm);
    let plane_dist = |k: usize| dot3(nrm, sub3(points[k], points[i0])) / nl;
    let i3 = (0..n).max_by(|&a, &b| plane_dist(a).abs().total_cmp(&plane_dist(b).abs()))?;
    if plane_dist(i3).abs() < eps {
        return None;
    }
    let centroid = {
        let s = [i0, i1, i2, i3].iter().fold([0.0; 3], |acc, &k| {
            [acc[0] + points[k][0], acc[1] + points[k][1], acc[2] + points[k][2]]
        });
        [s[0] / 4.0, s[1] / 4.0, s[2] / 4.0]
    };
    let orient = |f: [usize; 3]| -> [usize; 3] {
        let nn = cross3(sub3(points[f[1]], points[f[0]]), sub3(points[f[2]], points[f[0]]));
        if dot3(nn, sub3(points[f[0]], centroid)) < 0.0 {
            [f[0], f[2], f[1]]
        } else {
            f
        }
    };
    let mut faces: Vec<[usize; 3]> = vec![
        orient([i0, i1, i2]),
        orient([i0, i1, i3]),
        orient([i0, i2, i3]),
        orient([i1, i2, i3]),
    ];
    let face_dist = |f: &[usize; 3], q: P3| -> f64 {
        let nn = cross3(sub3(points[f[1]], points[f[0]]), sub3(points[f[2]], points[f[0]]));
        let l = norm3(nn);
        if l == 0.0 {
            return f64::NEG_INFINITY;
        }
        dot3(nn, sub3(q, points[f[0]])) / l
    };
    for k in 0..n {
        if k == i0 || k == i1 || k == i2 || k == i3 {
            continue;
        }
        let q = points[k];
        let visible: Vec<bool> = faces.iter().map(|f| face_dist(f, q) > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (f, &v) in faces.iter().zip(&visible) {
            if v {
                for e in 0..3 {
                    edges.insert((f[e], f[(e + 1) % 3]));
                }
            }
        }
        let horizon: Vec<(usize, usize)> =
            edges.iter().filter(|&&(a, b)| !edges.contains(&(b, a))).copied().collect();
        let mut kept: Vec<[usize; 3]> =
            faces.iter().zip(&visible).filter(|(_, &v)| !v).map(|(f, _)| *f).collect();
        for (a, b) in horizon {
            kept.push([a, b, k]);
        }
        faces = kept;
    }
    Some(Hull3 { points: points.to_vec(), faces })
}

#[derive(Debug, Clone)]
pub struct Facet {
    pub vertices: Vec<usize>,
    /// Unit outward normal; the hull satisfies normal·x ≤ offset.
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct HullN {
    pub points: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
}

fn facet_plane(points: &[Vec<f64>], verts: &[usize], inside: &[f64]) -> Option<(Vec<f64>, f64)> {
    let d = inside.len();
    let p0 = &points[verts[0]];
    let rows = nalgebra::DMatrix::from_fn(d - 1, d, |r, c| points[verts[r + 1]][c] - p0[c]);
    // generalized cross product through signed minors
    let mut n = vec![0.0; d];
    for (j, nj) in n.iter_mut().enumerate() {
        let minor = rows.clone().remove_column(j);
        let det = if d == 1 { 1.0 } else { minor.determinant() };
        *nj = if j % 2 == 0 { det } else { -det };
    }
    let len = libm::sqrt(n.iter().map(|x| x * x).sum::<f64>());
    if !(len > 0.0) {
        return None;
    }
    n.iter_mut().for_each(|x| *x /= len);
    let mut off: f64 = n.iter().zip(p0).map(|(a, b)| a * b).sum();
    let side: f64 = n.iter().zip(inside).map(|(a, b)| a * b).sum::<f64>() - off;
    if side > 0.0 {
        n.iter_mut().for_each(|x| *x = -*x);
        off = -off;
    }
    Some((n, off))
}

/// Incremental hull in R^d (d ≥ 2) with simplicial facets. `None` when the
/// cloud does not span R^d.
pub fn hull_nd(points: &[Vec<f64>]) -> Option<HullN> {
    let n = points.len();
    let d = points.first()?.len();
    if d < 2 || n < d + 1 || points.iter().any(|p| p.len() != d) {
        return None;
    }
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1e-300);
    let eps = 1e-11 * scale;
    // initial simplex: greedy distance to the affine span of the chosen points
    let mut simplex = vec![(0..n).min_by(|&a, &b| points[a][0].total_cmp(&points[b][0]))?];
    let mut span: Vec<Vec<f64>> = Vec::new();
    while simplex.len() < d + 1 {
        let base = &points[simplex[0]];
        let resid = |k: usize| -> Vec<f64> {
            let mut r: Vec<f64> = points[k].iter().zip(base).map(|(a, b)| a - b).collect();
            for u in &span {
                let p: f64 = r.iter().zip(u).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
            }
            r
        };
        let norm = |v: &[f64]| libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        let best = (0..n).max_by(|&a, &b| norm(&resid(a)).total_cmp(&norm(&resid(b))))?;
        let r = resid(best);
        let l = norm(&r);
        if l < eps {
            return None;
        }
        span.push(r.iter().map(|x| x / l).collect());
        simplex.push(best);
    }
    let inside: Vec<f64> = (0..d)
        .map(|c| simplex.iter().map(|&k| points[k][c]).sum::<f64>() / (d + 1) as f64)
        .collect();
    let mut facets = Vec::new();
    for skip in 0..=d {
        let verts: Vec<usize> = simplex.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &k)| k).collect();
        let (normal, offset) = facet_plane(points, &verts, &inside)?;
        facets.push(Facet { vertices: verts, normal, offset });
    }
    let in_simplex: BTreeSet<usize> = simplex.iter().copied().collect();
    for k in 0..n {
        if in_simplex.contains(&k) {
            continue;
        }
        let q = &points[k];
        let dist = |f: &Facet| f.normal.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() - f.offset;
        let visible: Vec<bool> = facets.iter().map(|f| dist(f) > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut ridges: alloc::collections::BTreeMap<Vec<usize>, usize> = alloc::collections::BTreeMap::new();
        for (f, _) in facets.iter().zip(&visible).filter(|(_, &v)| v) {
            for skip in 0..d {
                let mut r: Vec<usize> =
                    f.vertices.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                r.sort_unstable();
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<Facet> =
            facets.into_iter().zip(&visible).filter(|(_, &v)| !v).map(|(f, _)| f).collect();
        for (ridge, count) in ridges {
            if count != 1 {
                continue;
            }
            let mut verts = ridge;
            verts.push(k);
            if let Some((normal, offset)) = facet_plane(points, &verts, &inside) {
                kept.push(Facet { vertices: verts, normal, offset });
            }
        }
        facets = kept;
    }
    Some(HullN { points: points.to_vec(), facets })
}

/// Vertices of {x : n_i·x ≤ h_i} through the hull of the polar points
/// n_i / (h_i − n_i·c). `interior` must lie strictly inside; `None` when the
/// polytope is unbounded or the interior point is not interior.
pub fn polytope_vertices(halfspaces: &[(Vec<f64>, f64)], interior: &[f64]) -> Option<Vec<Vec<f64>>> {
    let d = interior.len();
    let mut duals = Vec::with_capacity(halfspaces.len());
    for (n, h) in halfspaces {
        let g = h - n.iter().zip(interior).map(|(a, b)| a * b).sum::<f64>();
        if g <= 1e-12 {
            return None;
        }
        duals.push(n.iter().map(|x| x / g).collect::<Vec<f64>>());
    }
    if d == 1 {
        let hi = duals.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
        let lo = duals.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        if !(hi > 0.0 && lo < 0.0) {
            return None;
        }
        return Some(vec![vec![interior[0] + 1.0 / hi], vec![interior[0] + 1.0 / lo]]);
    }
    let hull = hull_nd(&duals)?;
    let mut verts = Vec::with_capacity(hull.facets.len());
    for f in &hull.facets {
        if f.offset <= 0.0 {
            return None;
        }
        verts.push((0..d).map(|c| interior[c] + f.normal[c] / f.offset).collect());
    }
    Some(verts)
}
