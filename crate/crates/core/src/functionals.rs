//! Polylines, the weighted length `E`, the area forms `ω₀ = p₁dp₂` and
//! `ω₁ = ½r²dθ`, lifting to 3-space, and reparametrizations.

use crate::error::{Error, Result};
use crate::potential::{Potential, Vec2};

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Ordered planar polyline. For closed curves the closing segment from the
/// last vertex back to the first is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    vertices: Vec<Vec2>,
    closed: bool,
}

impl Curve {
    pub fn new(vertices: Vec<Vec2>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidCurve(format!("{} vertices, need at least 2", vertices.len())));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidCurve("non-finite vertex".into()));
        }
        if closed && (vertices[0] - vertices[vertices.len() - 1]).norm() == 0.0 {
            return Err(Error::InvalidCurve("closed curve repeats its first vertex".into()));
        }
        let c = Curve { vertices, closed };
        if c.euclid_length() <= 0.0 {
            return Err(Error::InvalidCurve("zero total length".into()));
        }
        Ok(c)
    }

    pub fn open(vertices: Vec<Vec2>) -> Result<Self> {
        Self::new(vertices, false)
    }

    pub fn closed(vertices: Vec<Vec2>) -> Result<Self> {
        Self::new(vertices, true)
    }

    /// Straight segment with `n` vertices (n ≥ 2).
    pub fn segment(a: Vec2, b: Vec2, n: usize) -> Result<Self> {
        let n = n.max(2);
        let v = (0..n).map(|i| a + (b - a) * (i as f64 / (n - 1) as f64)).collect();
        Self::open(v)
    }

    /// Counter-clockwise circle with `n` vertices starting at angle 0.
    pub fn circle(center: Vec2, radius: f64, n: usize) -> Result<Self> {
        let v = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                center + radius * Vec2::new(t.cos(), t.sin())
            })
            .collect();
        Self::closed(v)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vec2> {
        self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Vec2 {
        self.vertices[0]
    }

    pub fn last(&self) -> Vec2 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn n_segments(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    /// Segment endpoints, including the closing segment of a closed curve.
    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..self.n_segments()).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn reversed(&self) -> Curve {
        let mut v = self.vertices.clone();
        v.reverse();
        if self.closed {
            v.rotate_right(1);
        }
        Curve { vertices: v, closed: self.closed }
    }

    /// Vertex list with the closing vertex repeated for closed curves.
    pub fn traversal(&self) -> Vec<Vec2> {
        let mut v = self.vertices.clone();
        if self.closed {
            v.push(self.vertices[0]);
        }
        v
    }

    pub fn euclid_length(&self) -> f64 {
        euclid_length(self)
    }

    pub fn map<F: Fn(Vec2) -> Vec2>(&self, f: F) -> Result<Curve> {
        Curve::new(self.vertices.iter().map(|&p| f(p)).collect(), self.closed)
    }
}

/// Lifted curve in ℝ³ whose third coordinate accumulates `p₁dp₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve3 {
    vertices: Vec<Vec3>,
}

impl Curve3 {
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    /// Projection that drops the third coordinate.
    pub fn project(&self) -> Result<Curve> {
        Curve::open(self.vertices.iter().map(|v| Vec2::new(v.x, v.y)).collect())
    }

    pub fn third_delta(&self) -> f64 {
        self.vertices[self.vertices.len() - 1].z - self.vertices[0].z
    }
}

/// `E(γ) = ∫ F(γ)|γ'|`, midpoint rule per segment.
pub fn energy(curve: &Curve, potential: &Potential) -> f64 {
    curve
        .segments()
        .map(|(a, b)| potential.f((a + b) * 0.5) * (b - a).norm())
        .sum()
}

fn area_increment(a: Vec2, b: Vec2) -> f64 {
    0.5 * (a.x + b.x) * (b.y - a.y)
}

/// `𝒜(γ) = ∫ p₁ dp₂`; exact on polylines.
pub fn area(curve: &Curve) -> f64 {
    curve.segments().map(|(a, b)| area_increment(a, b)).sum()
}

/// `∫ ½ r² dθ` about `center`. Exact per straight segment (half the signed
/// cross product), which also covers segments through the center.
pub fn area_polar(curve: &Curve, center: Vec2) -> f64 {
    curve.segments().map(|(a, b)| polar_increment(a, b, center)).sum()
}

pub(crate) fn polar_increment(a: Vec2, b: Vec2, center: Vec2) -> f64 {
    let (u, v) = (a - center, b - center);
    0.5 * (u.x * v.y - u.y * v.x)
}

/// Lift with the third coordinate accumulating the same increments as [`area`].
/// Closed curves are traversed once, ending back over the first vertex.
pub fn lift(curve: &Curve, p3_start: f64) -> Curve3 {
    let pts = curve.traversal();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(pts.len());
    out.push(Vec3::new(pts[0].x, pts[0].y, p3_start));
    for w in pts.windows(2) {
        acc += area_increment(w[0], w[1]);
        out.push(Vec3::new(w[1].x, w[1].y, p3_start + acc));
    }
    Curve3 { vertices: out }
}

pub fn euclid_length(curve: &Curve) -> f64 {
    curve.segments().map(|(a, b)| (b - a).norm()).sum()
}

/// Initial sub-intervals per segment when tabulating a cumulative measure;
/// each is refined further while the density varies by more than 5%.
const SUBDIV: usize = 8;
const MAX_DEPTH: u32 = 24;

fn refine(
    q0: Vec2,
    q1: Vec2,
    d0: f64,
    d1: f64,
    depth: u32,
    density: &dyn Fn(Vec2) -> f64,
    acc: &mut f64,
    p: &mut Vec<Vec2>,
    c: &mut Vec<f64>,
) {
    let mid = (q0 + q1) * 0.5;
    let dm = density(mid);
    if depth < MAX_DEPTH && (d0 - d1).abs() > 0.05 * d0.max(d1) {
        refine(q0, mid, d0, dm, depth + 1, density, acc, p, c);
        refine(mid, q1, dm, d1, depth + 1, density, acc, p, c);
        return;
    }
    *acc += dm * (q1 - q0).norm();
    p.push(q1);
    c.push(*acc);
}

/// Cumulative table of `∫ density ds` along the traversal.
/// Returns (points, cumulative values).
fn cumulative_table(pts: &[Vec2], density: &dyn Fn(Vec2) -> f64) -> (Vec<Vec2>, Vec<f64>) {
    let mut p = Vec::with_capacity((pts.len() - 1) * SUBDIV + 1);
    let mut c = Vec::with_capacity(p.capacity());
    p.push(pts[0]);
    c.push(0.0);
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut q0 = a;
        let mut d0 = density(a);
        for k in 0..SUBDIV {
            let q1 = a + (b - a) * ((k + 1) as f64 / SUBDIV as f64);
            let d1 = density(q1);
            refine(q0, q1, d0, d1, 0, density, &mut acc, &mut p, &mut c);
            q0 = q1;
            d0 = d1;
        }
    }
    (p, c)
}

/// Points at equispaced values of a cumulative table (piecewise-linear inverse).
fn invert_table(p: &[Vec2], c: &[f64], targets: &[f64]) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(targets.len());
    let mut j = 0;
    for &t in targets {
        while j + 2 < c.len() && c[j + 1] < t {
            j += 1;
        }
        let (c0, c1) = (c[j], c[j + 1]);
        let s = if c1 > c0 { ((t - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.0 };
        out.push(p[j] + (p[j + 1] - p[j]) * s);
    }
    out
}

/// Resamples a curve so that `∫ density ds` is equal between consecutive
/// output vertices. Open curves keep their endpoints; closed curves keep
/// vertex 0 as the seam.
pub fn resample_by_density(curve: &Curve, density: &dyn Fn(Vec2) -> f64, n_out: usize) -> Result<Curve> {
    let pts = curve.traversal();
    let (p, c) = cumulative_table(&pts, density);
    let total = c[c.len() - 1];
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidCurve("resampling measure is not positive and finite".into()));
    }
    let (count, denom) = if curve.is_closed() {
        (n_out.max(3), n_out.max(3) as f64)
    } else {
        (n_out.max(2), (n_out.max(2) - 1) as f64)
    };
    let targets: Vec<f64> = (0..count).map(|i| total * i as f64 / denom).collect();
    let mut v = invert_table(&p, &c, &targets);
    if !curve.is_closed() {
        let last = v.len() - 1;
        v[0] = curve.first();
        v[last] = curve.last();
    }
    Curve::new(v, curve.is_closed())
}

fn check_interior_density(curve: &Curve, potential: &Potential) -> Result<()> {
    let v = curve.vertices();
    let range = if curve.is_closed() { 0..v.len() } else { 1..v.len() - 1 };
    for i in range {
        if potential.f(v[i]) == 0.0 && potential.well_at(v[i]).is_none() {
            return Err(Error::ZeroDensityInterior { index: i });
        }
    }
    Ok(())
}

/// Resample equispaced in degenerate arclength `ℓ`, where `F(γ)|γ'| = 1`.
pub fn reparam_degenerate_arclength(curve: &Curve, potential: &Potential, n_out: usize) -> Result<Curve> {
    check_interior_density(curve, potential)?;
    resample_by_density(curve, &|p| potential.f(p), n_out)
}

/// Cumulative degenerate arclength at each vertex of the traversal.
pub fn degenerate_arclength_at_vertices(curve: &Curve, potential: &Potential) -> Vec<f64> {
    let pts = curve.traversal();
    let mut out = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in pts.windows(2) {
        acc += potential.f((w[0] + w[1]) * 0.5) * (w[1] - w[0]).norm();
        out.push(acc);
    }
    out
}

/// Default truncation level for the equipartition parametrization, relative
/// to the largest `W` on the curve.
pub const EQUIPARTITION_CUT: f64 = 1e-8;

/// Result of the equipartition reparametrization.
#[derive(Clone, Debug)]
pub struct Equipartition {
    pub curve: Curve,
    pub y_grid: Vec<f64>,
    /// Pieces of the original curve cut off at each end (where `W < w_cut`).
    pub head_tail: Option<Curve>,
    pub end_tail: Option<Curve>,
    pub w_cut: f64,
}

/// Resample with `|γ'| = sqrt(2W(γ))` and return the matching `y` grid.
pub fn reparam_equipartition(curve: &Curve, potential: &Potential, n_out: usize) -> Result<(Curve, Vec<f64>)> {
    let e = equipartition(curve, potential, n_out, EQUIPARTITION_CUT)?;
    Ok((e.curve, e.y_grid))
}

/// Equipartition reparametrization with an explicit relative cut level.
pub fn equipartition(curve: &Curve, potential: &Potential, n_out: usize, cut_rel: f64) -> Result<Equipartition> {
    if curve.is_closed() {
        return Err(Error::InvalidCurve("equipartition needs an open curve".into()));
    }
    check_interior_density(curve, potential)?;
    let pts = curve.vertices();
    let mut wmax: f64 = 0.0;
    for w in pts.windows(2) {
        wmax = wmax.max(potential.w(w[0])).max(potential.w((w[0] + w[1]) * 0.5));
    }
    wmax = wmax.max(potential.w(curve.last()));
    let w_cut = cut_rel * wmax;

    let (head_idx, head_pt) = cut_point(pts.iter().copied(), potential, w_cut);
    let rev: Vec<Vec2> = pts.iter().rev().copied().collect();
    let (tail_idx_rev, tail_pt) = cut_point(rev.iter().copied(), potential, w_cut);
    let tail_idx = pts.len() - 1 - tail_idx_rev;
    if head_idx > tail_idx {
        return Err(Error::InvalidCurve("curve lies entirely below the equipartition cut".into()));
    }

    // truncated traversal: head_pt, pts[head_idx..=tail_idx-? ], tail_pt
    let mut core = vec![head_pt];
    for &p in &pts[head_idx..=tail_idx] {
        if (p - core[core.len() - 1]).norm() > 0.0 {
            core.push(p);
        }
    }
    if (tail_pt - core[core.len() - 1]).norm() > 0.0 {
        core.push(tail_pt);
    }
    let core_curve = Curve::open(core)?;
    let resampled = resample_by_density(&core_curve, &|p| 1.0 / (2.0 * potential.w(p)).max(w_cut).sqrt(), n_out)?;
    let mut y = Vec::with_capacity(resampled.len());
    y.push(0.0);
    let mut acc = 0.0;
    for (a, b) in resampled.segments() {
        let wm = potential.w((a + b) * 0.5).max(f64::MIN_POSITIVE);
        acc += (b - a).norm() / (2.0 * wm).sqrt();
        y.push(acc);
    }
    let head_tail = if head_idx > 0 || head_pt != pts[0] {
        let mut v: Vec<Vec2> = pts[..head_idx].to_vec();
        v.push(head_pt);
        Curve::open(v).ok()
    } else {
        None
    };
    let end_tail = if tail_idx < pts.len() - 1 || tail_pt != curve.last() {
        let mut v = vec![tail_pt];
        v.extend_from_slice(&pts[tail_idx + 1..]);
        Curve::open(v).ok()
    } else {
        None
    };
    Ok(Equipartition { curve: resampled, y_grid: y, head_tail, end_tail, w_cut })
}

/// First point along the traversal where `W` reaches `w_cut`. Returns the
/// index of the first vertex strictly past that point and the point itself.
fn cut_point(mut it: impl Iterator<Item = Vec2>, potential: &Potential, w_cut: f64) -> (usize, Vec2) {
    let first = it.next().expect("non-empty");
    if potential.w(first) >= w_cut {
        return (0, first);
    }
    let mut prev = first;
    for (i, p) in it.enumerate() {
        if potential.w(p) >= w_cut {
            // bisection on the segment prev → p
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if potential.w(prev + (p - prev) * mid) >= w_cut {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return (i + 1, prev + (p - prev) * hi);
        }
        prev = p;
    }
    (usize::MAX / 2, prev)
}

/// Distance from a point to a polyline.
pub fn point_polyline_distance(p: Vec2, curve: &Curve) -> f64 {
    curve
        .segments()
        .map(|(a, b)| {
            let d = b - a;
            let l2 = d.norm_squared();
            let t = if l2 > 0.0 { ((p - a).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
            (a + d * t - p).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between the vertex sets of two polylines,
/// measured against the other polyline's segments.
pub fn hausdorff(a: &Curve, b: &Curve) -> f64 {
    let ab = a.vertices().iter().map(|&p| point_polyline_distance(p, b)).fold(0.0, f64::max);
    let ba = b.vertices().iter().map(|&p| point_polyline_distance(p, a)).fold(0.0, f64::max);
    ab.max(ba)
}
