//! One-well radial potential `F² = r² + br⁴` in the desingularized
//! coordinates `R = r²`, `α = 4∫ω₁`, where the metric becomes
//! `√(1+bR)/2 · |(dR, dα)|`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{polar_increment, Curve};
use crate::potential::Vec2;

#[derive(Clone, Debug, PartialEq)]
pub struct DesingularizedPath {
    samples: Vec<(f64, f64)>,
    b: f64,
}

impl DesingularizedPath {
    pub fn new(samples: Vec<(f64, f64)>, b: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidCurve("path needs at least 2 samples".into()));
        }
        if samples.iter().any(|&(r, a)| !(r >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidCurve("R must be nonnegative and finite".into()));
        }
        if samples.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidCurve("repeated consecutive sample".into()));
        }
        Ok(DesingularizedPath { samples, b })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn first(&self) -> (f64, f64) {
        self.samples[0]
    }

    pub fn last(&self) -> (f64, f64) {
        self.samples[self.samples.len() - 1]
    }

    /// Joins two paths, dropping the duplicated junction sample.
    pub fn concat(&self, other: &DesingularizedPath) -> Result<Self> {
        let mut s = self.samples.clone();
        let skip = usize::from(other.samples[0] == self.last());
        s.extend_from_slice(&other.samples[skip..]);
        Self::new(s, self.b)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        crate::io::write_csv_rows(w, &["R", "alpha"], self.samples.iter().map(|&(r, a)| vec![r, a]))
    }
}

/// `R = |γ − c|²` per vertex, `α` accumulating `4ω₁`.
pub fn to_ra(curve: &Curve, center: Vec2, b: f64) -> Result<DesingularizedPath> {
    let pts = curve.traversal();
    let mut out = Vec::with_capacity(pts.len());
    let mut alpha = 0.0;
    out.push(((pts[0] - center).norm_squared(), 0.0));
    for w in pts.windows(2) {
        alpha += 4.0 * polar_increment(w[0], w[1], center);
        let s = ((w[1] - center).norm_squared(), alpha);
        if s != out[out.len() - 1] {
            out.push(s);
        }
    }
    DesingularizedPath::new(out, b)
}

/// Midpoint-rule value of `Ẽ = ∫ √(1+bR)/2 · √(R'² + α'²)`.
pub fn energy_ra(path: &DesingularizedPath) -> Result<f64> {
    let b = path.b;
    let mut e = 0.0;
    for w in path.samples.windows(2) {
        let (r0, a0) = w[0];
        let (r1, a1) = w[1];
        let d = 1.0 + b * 0.5 * (r0 + r1);
        if !(d > 0.0) {
            return Err(Error::InvalidDensity);
        }
        e += 0.5 * d.sqrt() * (r1 - r0).hypot(a1 - a0);
    }
    Ok(e)
}

fn check_c1(c1: f64) -> Result<()> {
    if !(c1.abs() <= 1.0) {
        return Err(Error::InvalidC1(c1));
    }
    Ok(())
}

fn check_b(b: f64) -> Result<()> {
    if !(b > 0.0) {
        return Err(Error::InvalidArgument(format!("b must be positive (got {b})")));
    }
    Ok(())
}

/// `f_{C₁}(R) = −(2C₁/b)√(1−C₁²+bR) + D` with `f(R₀) = 0`.
pub fn parabola_alpha(c1: f64, b: f64, r0: f64, r: f64) -> f64 {
    let s = 1.0 - c1 * c1;
    (2.0 * c1 / b) * ((s + b * r0).sqrt() - (s + b * r).sqrt())
}

/// `f'(R) = −C₁/√(1−C₁²+bR)`
pub fn parabola_slope(c1: f64, b: f64, r: f64) -> f64 {
    -c1 / (1.0 - c1 * c1 + b * r).sqrt()
}

/// Closed-form `Ẽ` of the parabola graph over `R ∈ [r_min, r0]`.
pub fn parabola_energy(c1: f64, b: f64, r0: f64, r_min: f64) -> f64 {
    let s = 1.0 - c1 * c1;
    let prim = |u: f64| (2.0 / 3.0) * u.powf(1.5) + 2.0 * c1 * c1 * u.sqrt();
    (prim(s + b * r0) - prim(s + b * r_min)) / (2.0 * b)
}

/// Area delivered by the parabola through `(R₀, 0)`: `Ã = f(0)/4`.
pub fn parabola_area(c1: f64, b: f64, r0: f64) -> f64 {
    parabola_alpha(c1, b, r0, 0.0) / 4.0
}

/// Samples of the parabola graph from `R = r0` down to `R = r_min`; the
/// grid is quadratic toward `r_min` to resolve the `√R` behaviour at the axis.
pub fn parabola_segment(c1: f64, b: f64, r0: f64, r_min: f64, n: usize) -> Result<DesingularizedPath> {
    check_c1(c1)?;
    check_b(b)?;
    if !(r0 > r_min && r_min >= 0.0) {
        return Err(Error::InvalidArgument(format!("need 0 ≤ r_min < R0 (got {r_min}, {r0})")));
    }
    let n = n.max(2);
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let r = if i == n - 1 { r_min } else { r_min + (r0 - r_min) * (1.0 - t) * (1.0 - t) };
            (r, parabola_alpha(c1, b, r0, r))
        })
        .collect();
    DesingularizedPath::new(samples, b)
}

/// Parabola geodesic from `(R₀, 0)` to the α-axis and the area `Ã` it delivers.
pub fn parabola_geodesic(c1: f64, b: f64, r0: f64, n: usize) -> Result<(DesingularizedPath, f64)> {
    let p = parabola_segment(c1, b, r0, 0.0, n)?;
    Ok((p, parabola_area(c1, b, r0)))
}

/// `√R₀ / (2√b)`
pub fn existence_threshold(r0: f64, b: f64) -> f64 {
    r0.sqrt() / (2.0 * b.sqrt())
}

/// `C₁ ∈ [−1, 1]` whose parabola delivers `Ã`. `Ã(C₁)` is odd and
/// increasing, so bisection on `[0, 1]` suffices.
pub fn solve_c1_for_area(r0: f64, a_tilde: f64, b: f64) -> Result<f64> {
    check_b(b)?;
    let thr = existence_threshold(r0, b);
    if a_tilde.abs() > thr * (1.0 + 1e-12) {
        return Err(Error::NonExistence { a_tilde, threshold: thr });
    }
    let target = a_tilde.abs();
    if target == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if parabola_area(mid, b, r0) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 {
            break;
        }
    }
    let c1 = if target >= thr { 1.0 } else { 0.5 * (lo + hi) };
    Ok(c1.copysign(a_tilde))
}

/// Default bound on both `Δθ` and `Δ ln r` between spiral vertices.
pub const SPIRAL_STEP: f64 = 0.01;

/// Planar spiral `dθ/dr = −C₁ / (r√(1−C₁²+br²))` from `r_outer` inward.
pub fn spiral_from_c1(c1: f64, b: f64, r_outer: f64, r_inner: f64, theta0: f64) -> Result<Curve> {
    spiral_with_step(c1, b, r_outer, r_inner, theta0, SPIRAL_STEP)
}

/// As [`spiral_from_c1`] with an explicit step bound. `θ(r)` is evaluated
/// from its closed-form antiderivative.
pub fn spiral_with_step(c1: f64, b: f64, r_outer: f64, r_inner: f64, theta0: f64, step: f64) -> Result<Curve> {
    check_c1(c1)?;
    check_b(b)?;
    if !(0.0 < r_inner && r_inner < r_outer) {
        return Err(Error::InvalidArgument(format!("need 0 < r_inner < r_outer (got {r_inner}, {r_outer})")));
    }
    let a = 1.0 - c1 * c1;
    let sb = b.sqrt();
    // antiderivative of 1/(r√(a+br²))
    let g = |r: f64| -> f64 {
        if a > 0.0 {
            let sa = a.sqrt();
            ((r * sb).ln() - (sa + (a + b * r * r).sqrt()).ln()) / sa
        } else {
            -1.0 / (r * sb)
        }
    };
    let g0 = g(r_outer);
    let theta = |r: f64| theta0 - c1 * (g(r) - g0);
    let mut v = vec![];
    let mut r = r_outer;
    let ln_end = r_inner.ln();
    loop {
        let th = theta(r);
        v.push(Vec2::new(r * th.cos(), r * th.sin()));
        if r <= r_inner {
            break;
        }
        let rate = c1.abs() / (a + b * r * r).sqrt();
        let h = step.min(step / rate.max(1e-300));
        let next = r.ln() - h;
        r = if next <= ln_end { r_inner } else { next.exp() };
    }
    Curve::open(v)
}

/// `λ = 2C₁`
pub fn lagrange_multiplier_radial(c1: f64) -> Result<f64> {
    check_c1(c1)?;
    Ok(2.0 * c1)
}

#[derive(Clone, Debug)]
pub struct VerticalResolution {
    pub path: DesingularizedPath,
    pub vertical_extent: f64,
    pub c1: f64,
    pub parabola_cost: f64,
    pub cost: f64,
}

/// Tangent parabola `C₁ = ±1` followed by a segment on the α-axis of
/// extent `4(|Ã| − threshold)` at the tangency point.
pub fn vertical_segment_resolution(r0: f64, a_tilde: f64, b: f64) -> Result<VerticalResolution> {
    check_b(b)?;
    let thr = existence_threshold(r0, b);
    if a_tilde.abs() <= thr {
        return Err(Error::NotInNonexistenceRegime { a_tilde, threshold: thr });
    }
    let c1 = 1.0f64.copysign(a_tilde);
    let parabola = parabola_segment(c1, b, r0, 0.0, 400)?;
    let extent = 4.0 * (a_tilde.abs() - thr);
    let (_, a_top) = parabola.last();
    let m = 50;
    let vertical: Vec<(f64, f64)> =
        (0..=m).map(|i| (0.0, a_top + c1 * extent * i as f64 / m as f64)).collect();
    let path = parabola.concat(&DesingularizedPath::new(vertical, b)?)?;
    let parabola_cost = parabola_energy(c1, b, r0, 0.0);
    Ok(VerticalResolution { path, vertical_extent: extent, c1, parabola_cost, cost: parabola_cost + extent / 2.0 })
}

/// For `−1 < b < 0`: cost of the left-opening parabola joining `(0,0)` to
/// `(0, gap)` and of the vertical segment between them.
pub fn compare_b_negative(b: f64, alpha_gap: f64) -> Result<(f64, f64)> {
    if !(b > -1.0 && b < 0.0) {
        return Err(Error::InvalidArgument(format!("need -1 < b < 0 (got {b})")));
    }
    if !(alpha_gap > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha_gap must be positive (got {alpha_gap})")));
    }
    let nb = -b;
    // gap = (4/|b|) C₁ √(1−C₁²); take the shallow branch C₁² ≥ ½
    let q = alpha_gap * nb / 4.0;
    let disc = 1.0 - 4.0 * q * q;
    if disc < 0.0 {
        return Err(Error::GapTooLarge(alpha_gap));
    }
    let s = 0.5 * (1.0 + disc.sqrt());
    let u0 = 1.0 - s;
    // density 1 + bR = s > 0 at the vertex R = u0/|b|
    let parabola = (2.0 / 3.0 * u0.powf(1.5) + 2.0 * s * u0.sqrt()) / nb;
    Ok((parabola, alpha_gap / 2.0))
}

/// Sampled left-opening parabola for `b < 0` (used for output and checks).
pub fn b_negative_path(b: f64, alpha_gap: f64, n: usize) -> Result<DesingularizedPath> {
    compare_b_negative(b, alpha_gap)?;
    let nb = -b;
    let q = alpha_gap * nb / 4.0;
    let s = 0.5 * (1.0 + (1.0 - 4.0 * q * q).sqrt());
    let c1 = s.sqrt();
    let r_max = (1.0 - s) / nb;
    let half = alpha_gap / 2.0;
    // α − gap/2 = ±(2C₁/|b|)√(1 − C₁² − |b|R)
    let n = n.max(4);
    let mut v = Vec::with_capacity(2 * n);
    for i in 0..n {
        let t = i as f64 / n as f64;
        let r = r_max * (1.0 - (1.0 - t) * (1.0 - t));
        v.push((r, half - 2.0 * c1 / nb * (1.0 - s - nb * r).max(0.0).sqrt()));
    }
    for i in (0..n).rev() {
        let t = i as f64 / n as f64;
        let r = r_max * (1.0 - (1.0 - t) * (1.0 - t));
        v.push((r, half + 2.0 * c1 / nb * (1.0 - s - nb * r).max(0.0).sqrt()));
    }
    v[0] = (0.0, 0.0);
    let last = v.len() - 1;
    v[last] = (0.0, alpha_gap);
    v.insert(n, (r_max, half));
    DesingularizedPath::new(v, b)
}

/// Parabola, vertical-segment and cost summary for a given area.
#[derive(Clone, Debug, Serialize)]
#[allow(non_snake_case)]
pub struct Figure1 {
    pub b: f64,
    pub R0: f64,
    pub A_tilde: f64,
    pub C1: f64,
    pub threshold: f64,
    pub vertical_extent: f64,
    pub parabola_cost: f64,
    pub vertical_cost: f64,
    pub total_cost: f64,
    pub b_negative: Option<BNegative>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BNegative {
    pub b: f64,
    pub alpha_gap: f64,
    pub parabola_cost: f64,
    pub vertical_cost: f64,
}

/// Builds the bundle and the (R, α) path it describes: the parabola alone
/// below the threshold, parabola plus vertical segment above it.
pub fn figure1(r0: f64, a_tilde: f64, b: f64, b_neg: Option<(f64, f64)>) -> Result<(Figure1, DesingularizedPath)> {
    let thr = existence_threshold(r0, b);
    let (c1, extent, pc, path) = if a_tilde.abs() > thr {
        let v = vertical_segment_resolution(r0, a_tilde, b)?;
        (v.c1, v.vertical_extent, v.parabola_cost, v.path)
    } else {
        let c1 = solve_c1_for_area(r0, a_tilde, b)?;
        (c1, 0.0, parabola_energy(c1, b, r0, 0.0), parabola_geodesic(c1, b, r0, 400)?.0)
    };
    let b_negative = match b_neg {
        Some((bn, gap)) => {
            let (p, v) = compare_b_negative(bn, gap)?;
            Some(BNegative { b: bn, alpha_gap: gap, parabola_cost: p, vertical_cost: v })
        }
        None => None,
    };
    Ok((
        Figure1 {
            b,
            R0: r0,
            A_tilde: a_tilde,
            C1: c1,
            threshold: thr,
            vertical_extent: extent,
            parabola_cost: pc,
            vertical_cost: extent / 2.0,
            total_cost: pc + extent / 2.0,
            b_negative,
        },
        path,
    ))
}
