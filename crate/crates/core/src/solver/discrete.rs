//! Discrete objective on free interior vertices with pinned endpoints.

use crate::functionals::{resample_by_density, Curve};
use crate::potential::{Potential, Vec2};

/// Energy of the polyline `pts` and its gradient with respect to every vertex.
pub fn energy_and_grad(pts: &[Vec2], pot: &Potential, grad: &mut [Vec2]) -> f64 {
    for g in grad.iter_mut() {
        *g = Vec2::zeros();
    }
    let mut e = 0.0;
    for k in 0..pts.len() - 1 {
        let d = pts[k + 1] - pts[k];
        let len = d.norm();
        let (f, gf) = pot.f_and_grad((pts[k] + pts[k + 1]) * 0.5);
        e += f * len;
        let u = if len > 0.0 { d / len } else { Vec2::zeros() };
        let half = gf * (0.5 * len);
        grad[k] += half - u * f;
        grad[k + 1] += half + u * f;
    }
    e
}

/// `𝒜 = Σ ½(x_k + x_{k+1})(y_{k+1} − y_k)` and its gradient.
pub fn area_and_grad(pts: &[Vec2], grad: &mut [Vec2]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for k in 0..n - 1 {
        a += 0.5 * (pts[k].x + pts[k + 1].x) * (pts[k + 1].y - pts[k].y);
    }
    for i in 0..n {
        let prev = if i > 0 { pts[i - 1] } else { pts[i] };
        let next = if i + 1 < n { pts[i + 1] } else { pts[i] };
        grad[i] = Vec2::new(0.5 * (next.y - prev.y), 0.5 * (prev.x - next.x));
    }
    a
}

/// Augmented-Lagrangian term with optional area deposits at a well of
/// vertical cost rate `c`:
/// `ψ(g) = min_t c|t − g| + μt + ρt²/2`, with `g = 𝒜 − A`.
/// Returns `(ψ, ψ'(g), t*)`; the deposit is `t* − g`.
pub fn psi(g: f64, mu: f64, rho: f64, c: f64) -> (f64, f64, f64) {
    let z = mu + rho * g;
    if z.abs() <= c {
        (mu * g + 0.5 * rho * g * g, z, g)
    } else {
        let sc = c * z.signum();
        let t = (sc - mu) / rho;
        (c * (t - g).abs() + mu * t + 0.5 * rho * t * t, sc, t)
    }
}

/// The inner objective `E + ψ(𝒜 − A)` on packed interior coordinates.
pub struct Objective<'a> {
    pub pot: &'a Potential,
    pub start: Vec2,
    pub end: Vec2,
    /// `None` for the unconstrained problem.
    pub target: Option<f64>,
    pub mu: f64,
    pub rho: f64,
    pub deposit_rate: f64,
}

impl Objective<'_> {
    pub fn unpack(&self, x: &[f64]) -> Vec<Vec2> {
        let mut v = Vec::with_capacity(x.len() / 2 + 2);
        v.push(self.start);
        v.extend(x.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])));
        v.push(self.end);
        v
    }

    pub fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let pts = self.unpack(x);
        let n = pts.len();
        let mut ge = vec![Vec2::zeros(); n];
        let mut val = energy_and_grad(&pts, self.pot, &mut ge);
        if let Some(a_t) = self.target {
            let mut ga = vec![Vec2::zeros(); n];
            let a = area_and_grad(&pts, &mut ga);
            let (p, dp, _) = psi(a - a_t, self.mu, self.rho, self.deposit_rate);
            val += p;
            for i in 0..n {
                ge[i] += ga[i] * dp;
            }
        }
        for i in 1..n - 1 {
            grad[2 * (i - 1)] = ge[i].x;
            grad[2 * (i - 1) + 1] = ge[i].y;
        }
        val
    }
}

pub fn pack(pts: &[Vec2]) -> Vec<f64> {
    pts[1..pts.len() - 1].iter().flat_map(|p| [p.x, p.y]).collect()
}

/// Pushes interior vertices out of the discs of radius `r_min` about the wells.
pub fn repel(x: &mut [f64], wells: &[Vec2], r_min: f64) {
    if r_min <= 0.0 {
        return;
    }
    for c in x.chunks_exact_mut(2) {
        for w in wells {
            let d = Vec2::new(c[0], c[1]) - w;
            let r = d.norm();
            if r < r_min {
                let u = if r > 0.0 { d / r } else { Vec2::new(0.0, 1.0) };
                let p = w + u * r_min;
                c[0] = p.x;
                c[1] = p.y;
            }
        }
    }
}

/// Interior vertices restricted to lines `c_i + s_i m_i` normal to a
/// reference polyline, which removes the tangential null directions of `E`.
pub struct NormalFrame {
    pub base: Vec<Vec2>,
    pub normals: Vec<Vec2>,
}

impl NormalFrame {
    pub fn new(pts: &[Vec2]) -> Self {
        let n = pts.len();
        let mut normals = Vec::with_capacity(n.saturating_sub(2));
        for i in 1..n - 1 {
            let mut d = pts[i + 1] - pts[i - 1];
            if d.norm() == 0.0 {
                d = (1..n).map(|k| pts[k] - pts[k - 1]).find(|d| d.norm() > 0.0).unwrap_or(Vec2::new(1.0, 0.0));
            }
            let m = Vec2::new(-d.y, d.x);
            normals.push(m / m.norm());
        }
        NormalFrame { base: pts.to_vec(), normals }
    }

    /// Packed full coordinates of the interior vertices at offsets `s`.
    pub fn place(&self, s: &[f64], x: &mut [f64]) {
        for (i, (&si, m)) in s.iter().zip(&self.normals).enumerate() {
            let p = self.base[i + 1] + m * si;
            x[2 * i] = p.x;
            x[2 * i + 1] = p.y;
        }
    }

    pub fn pull_back(&self, g: &[f64], gs: &mut [f64]) {
        for (i, m) in self.normals.iter().enumerate() {
            gs[i] = g[2 * i] * m.x + g[2 * i + 1] * m.y;
        }
    }

    /// Moves each offset out of the interval where its line enters a disc
    /// of radius `r_min` about a well.
    pub fn repel(&self, s: &mut [f64], wells: &[Vec2], r_min: f64) {
        if r_min <= 0.0 {
            return;
        }
        for (i, si) in s.iter_mut().enumerate() {
            let (c, m) = (self.base[i + 1], self.normals[i]);
            for w in wells {
                let foot = (w - c).dot(&m);
                let d2 = (c + m * foot - w).norm_squared();
                let h2 = r_min * r_min - d2;
                if h2 > 0.0 {
                    let h = h2.sqrt();
                    if (*si - foot).abs() < h {
                        *si = if *si >= foot { foot + h } else { foot - h };
                    }
                }
            }
        }
    }
}

/// Redistributes vertices along the polyline: half by Euclidean length and
/// half by `ln` distance to the nearest well, floored at `r_floor`.
pub fn monitor_resample(pts: &[Vec2], wells: &[Vec2], r_floor: f64, n: usize) -> Vec<Vec2> {
    let curve = match Curve::open(pts.to_vec()) {
        Ok(c) => c,
        Err(_) => return pts.to_vec(),
    };
    let len = curve.euclid_length();
    let near = |p: Vec2| -> f64 {
        let d = wells.iter().map(|w| (p - w).norm()).fold(f64::INFINITY, f64::min);
        1.0 / d.max(r_floor)
    };
    let density: Box<dyn Fn(Vec2) -> f64> = if wells.is_empty() {
        Box::new(|_| 1.0)
    } else {
        let mut lam = 0.0;
        for (a, b) in curve.segments() {
            for k in 0..8 {
                let t = (k as f64 + 0.5) / 8.0;
                lam += near(a + (b - a) * t) * (b - a).norm() / 8.0;
            }
        }
        Box::new(move |p| 0.5 / len + 0.5 * near(p) / lam)
    };
    match resample_by_density(&curve, &*density, n) {
        Ok(c) => c.into_vertices(),
        Err(_) => pts.to_vec(),
    }
}
