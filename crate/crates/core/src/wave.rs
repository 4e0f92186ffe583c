//! Traveling-wave profiles `−νJU' = U'' − ∇W(U)` from constrained minimizers.
//!
//! Under `|U'| = √(2W(U))` the criticality system of the curve turns into the
//! wave equation with `J = [[0, 1], [−1, 0]]` and speed `ν = √2 λ`.

use serde::Serialize;

use crate::banded::BandedSym;
use crate::error::{Error, Result};
use crate::functionals::{energy, equipartition, Curve};
use crate::potential::{Potential, Vec2};
use crate::solver::SolveResult;

/// Truncation distance from a well, relative to the well separation.
pub const TRUNCATION: f64 = 1e-4;
pub const MIN_INTERIOR: usize = 16;
/// Relative Ritz residual at which an eigenpair is accepted.
const EIGEN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct WaveProfile {
    pub y_grid: Vec<f64>,
    pub u: Vec<Vec2>,
    pub nu: f64,
    /// Multiplier of the underlying solve, unchanged.
    pub multiplier: f64,
    /// Wells reached at the start and end of the profile, if any.
    pub start_well: Option<usize>,
    pub end_well: Option<usize>,
}

impl WaveProfile {
    pub fn new(y_grid: Vec<f64>, u: Vec<Vec2>, nu: f64) -> Result<Self> {
        if y_grid.len() != u.len() || y_grid.len() < 2 {
            return Err(Error::InvalidArgument("y grid and profile must have the same length ≥ 2".into()));
        }
        if y_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("y grid must be strictly increasing".into()));
        }
        if y_grid.iter().any(|y| !y.is_finite()) || u.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidArgument("profile contains non-finite values".into()));
        }
        Ok(WaveProfile { y_grid, u, nu, multiplier: nu / std::f64::consts::SQRT_2, start_well: None, end_well: None })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn curve(&self) -> Result<Curve> {
        Curve::open(self.u.clone())
    }

    pub fn translated(&self, dy: f64) -> WaveProfile {
        let mut p = self.clone();
        p.y_grid.iter_mut().for_each(|y| *y += dy);
        p
    }

    /// `max | |ΔU|²/Δy² − 2W(mid) |` over segments.
    pub fn equipartition_defect(&self, pot: &Potential) -> f64 {
        self.u
            .windows(2)
            .zip(self.y_grid.windows(2))
            .map(|(u, y)| {
                let h = y[1] - y[0];
                ((u[1] - u[0]).norm_squared() / (h * h) - 2.0 * pot.w((u[0] + u[1]) * 0.5)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let rows = self.y_grid.iter().zip(&self.u).map(|(y, p)| vec![*y, p.x, p.y]);
        crate::io::write_csv_rows(w, &["y", "u1", "u2"], rows)
    }
}

fn jmul(v: Vec2) -> Vec2 {
    Vec2::new(v.y, -v.x)
}

/// Equipartition profile of a converged minimizer with the default number of points.
pub fn to_traveling_wave(result: &SolveResult, pot: &Potential) -> Result<WaveProfile> {
    to_traveling_wave_with(result, pot, 2 * result.curve.len())
}

pub fn to_traveling_wave_with(result: &SolveResult, pot: &Potential, n_points: usize) -> Result<WaveProfile> {
    if result.nonexistence_suspected {
        return Err(Error::NonexistenceSuspected);
    }
    if !result.converged {
        return Err(Error::NonConvergence("solve did not converge".into()));
    }
    let curve = &result.curve;
    let pts = curve.vertices();
    let radius = TRUNCATION * pot.well_separation();
    let start_well = pot.well_at(curve.first());
    let end_well = pot.well_at(curve.last());

    // interior vertices away from the end runs must stay clear of all wells
    let near = |p: Vec2| pot.wells().iter().any(|w| (p - w).norm() < radius);
    let lo = if start_well.is_some() { pts.iter().position(|&p| !near(p)).unwrap_or(pts.len()) } else { 1 };
    let hi = if end_well.is_some() { pts.iter().rposition(|&p| !near(p)).map_or(0, |i| i + 1) } else { pts.len() - 1 };
    for (i, &p) in pts.iter().enumerate().take(hi).skip(lo.max(1)) {
        if near(p) || pot.w(p) == 0.0 {
            return Err(Error::BubbleDetected { index: i });
        }
    }

    let wmax = pts.iter().map(|&p| pot.w(p)).fold(0.0, f64::max);
    let slowest = pot
        .wells()
        .iter()
        .enumerate()
        .filter_map(|(i, _)| pot.well_frame(i).ok().map(|f| f.lambda1.min(f.lambda2)))
        .fold(f64::INFINITY, f64::min);
    let cut_rel = if slowest.is_finite() && wmax > 0.0 {
        (slowest * radius).powi(2) / wmax
    } else {
        crate::functionals::EQUIPARTITION_CUT
    };
    let smooth = catmull_rom(pts, SUBDIV);
    let eq = equipartition(&smooth, pot, n_points, cut_rel)?;
    let mut profile = WaveProfile::new(eq.y_grid, eq.curve.into_vertices(), std::f64::consts::SQRT_2 * result.multiplier)?;
    profile.multiplier = result.multiplier;
    profile.start_well = start_well;
    profile.end_well = end_well;
    Ok(profile)
}

/// Points inserted per polyline segment before reparametrization.
const SUBDIV: usize = 8;

/// Centripetal Catmull–Rom interpolant through `pts`, sampled `k` times per segment.
fn catmull_rom(pts: &[Vec2], k: usize) -> Curve {
    let n = pts.len();
    let at = |i: isize| -> Vec2 {
        if i < 0 {
            pts[0] * 2.0 - pts[1]
        } else if i as usize >= n {
            pts[n - 1] * 2.0 - pts[n - 2]
        } else {
            pts[i as usize]
        }
    };
    let mut out = Vec::with_capacity((n - 1) * k + 1);
    for i in 0..n - 1 {
        let p = [at(i as isize - 1), at(i as isize), at(i as isize + 1), at(i as isize + 2)];
        let mut t = [0.0; 4];
        for j in 1..4 {
            t[j] = t[j - 1] + (p[j] - p[j - 1]).norm().sqrt().max(1e-300);
        }
        out.push(p[1]);
        for m in 1..k {
            let u = t[1] + (t[2] - t[1]) * m as f64 / k as f64;
            let lerp = |a: Vec2, b: Vec2, ta: f64, tb: f64| (a * (tb - u) + b * (u - ta)) / (tb - ta);
            let a1 = lerp(p[0], p[1], t[0], t[1]);
            let a2 = lerp(p[1], p[2], t[1], t[2]);
            let a3 = lerp(p[2], p[3], t[2], t[3]);
            let b1 = lerp(a1, a2, t[0], t[2]);
            let b2 = lerp(a2, a3, t[1], t[3]);
            out.push(lerp(b1, b2, t[1], t[2]));
        }
    }
    out.push(pts[n - 1]);
    Curve::open(out).expect("interpolant of a valid polyline")
}

/// Central first and second differences on the nonuniform grid.
fn derivatives(p: &WaveProfile, i: usize) -> (Vec2, Vec2) {
    let (hm, hp) = (p.y_grid[i] - p.y_grid[i - 1], p.y_grid[i + 1] - p.y_grid[i]);
    let (dm, dp) = (p.u[i] - p.u[i - 1], p.u[i + 1] - p.u[i]);
    let d1 = dp * (hm / (hp * (hm + hp))) + dm * (hp / (hm * (hm + hp)));
    let d2 = (dp / hp - dm / hm) * (2.0 / (hm + hp));
    (d1, d2)
}

/// Max interior `|U'' − ∇W(U) + νJU'|`, normalized by `max|∇W(U)| + |ν| max|U'|`.
pub fn wave_residual(profile: &WaveProfile, pot: &Potential) -> Result<f64> {
    let n = profile.len();
    if n < MIN_INTERIOR + 2 {
        return Err(Error::GridTooCoarse(n.saturating_sub(2)));
    }
    let (mut worst, mut gmax, mut dmax) = (0.0f64, 0.0f64, 0.0f64);
    for i in 1..n - 1 {
        let (d1, d2) = derivatives(profile, i);
        let g = pot.grad_w(profile.u[i]);
        worst = worst.max((d2 - g + jmul(d1) * profile.nu).norm());
        gmax = gmax.max(g.norm());
        dmax = dmax.max(d1.norm());
    }
    let scale = gmax + profile.nu.abs() * dmax;
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hamiltonian {
    /// `∫ ½|U'|²` on the grid.
    pub kinetic: f64,
    /// Trapezoidal `∫ W(U)` on the grid.
    pub potential: f64,
    /// Estimated contribution of the exponential tails beyond the grid.
    pub tail: f64,
}

impl Hamiltonian {
    pub fn core(&self) -> f64 {
        self.kinetic + self.potential
    }

    pub fn total(&self) -> f64 {
        self.core() + self.tail
    }
}

/// `H = ∫ ½|U'|² + W(U) dy`. Each end that approaches a well contributes a
/// tail `λ d²/√2`, where `d` is the distance left to the well and `λ` its
/// slowest rate.
pub fn hamiltonian_energy(profile: &WaveProfile, pot: &Potential) -> Hamiltonian {
    let (mut kin, mut potl) = (0.0, 0.0);
    for (u, y) in profile.u.windows(2).zip(profile.y_grid.windows(2)) {
        let h = y[1] - y[0];
        kin += 0.5 * (u[1] - u[0]).norm_squared() / h;
        potl += 0.5 * (pot.w(u[0]) + pot.w(u[1])) * h;
    }
    let tail_at = |well: Option<usize>, end: Vec2| -> f64 {
        let Some(i) = well else { return 0.0 };
        let Ok(frame) = pot.well_frame(i) else { return 0.0 };
        let d = (end - pot.wells()[i]).norm();
        frame.lambda1.min(frame.lambda2) * d * d / std::f64::consts::SQRT_2
    };
    let tail = tail_at(profile.start_well, profile.u[0]) + tail_at(profile.end_well, profile.u[profile.len() - 1]);
    Hamiltonian { kinetic: kin, potential: potl, tail }
}

/// `√2 E` of the profile's own polyline, the value `H` attains at equipartition.
pub fn sqrt2_energy(profile: &WaveProfile, pot: &Potential) -> Result<f64> {
    Ok(std::f64::consts::SQRT_2 * energy(&profile.curve()?, pot))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Largest `|cos|` in the mass inner product between `U'` and one of the
    /// returned eigenvectors.
    pub zero_mode_alignment: f64,
    #[serde(skip)]
    pub zero_mode_index: usize,
    /// That eigenvector at the interior grid points.
    #[serde(skip)]
    pub zero_mode: Vec<Vec2>,
}

/// The `k` smallest eigenvalues of the discretized `δ²H`, with homogeneous
/// Dirichlet ends, and the eigenvector best aligned with `U'`. The lumped-mass
/// pencil is symmetrized and solved by shift-invert Lanczos on its band.
pub fn second_variation_spectrum(profile: &WaveProfile, pot: &Potential, k: usize) -> Result<Spectrum> {
    let n = profile.len();
    if n < MIN_INTERIOR + 2 {
        return Err(Error::GridTooCoarse(n.saturating_sub(2)));
    }
    let m = n - 2;
    let y = &profile.y_grid;
    let h: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let mass: Vec<f64> = (1..n - 1).map(|i| 0.5 * (h[i - 1] + h[i])).collect();
    let dim = 2 * m;
    let mut a = BandedSym::zeros(dim);
    for j in 0..m {
        let i = j + 1;
        let stiff = 1.0 / h[i - 1] + 1.0 / h[i];
        let hw = pot.hess_w(profile.u[i]);
        for c in 0..2 {
            a.add(2 * j + c, 2 * j + c, stiff + mass[j] * hw[(c, c)]);
            if j + 1 < m {
                a.add(2 * j + c, 2 * (j + 1) + c, -1.0 / h[i]);
            }
        }
        a.add(2 * j + 1, 2 * j, mass[j] * 0.5 * (hw[(0, 1)] + hw[(1, 0)]));
    }
    // symmetric form M^{-1/2} A M^{-1/2}
    let s: Vec<f64> = (0..dim).map(|r| 1.0 / mass[r / 2].sqrt()).collect();
    a.scale(&s);
    let (eigenvalues, vectors) = a.lowest_eigenpairs(k.clamp(1, dim), EIGEN_TOL)?;

    let du: Vec<Vec2> = (1..n - 1).map(|i| derivatives(profile, i).0).collect();
    let du_norm = du.iter().zip(&mass).map(|(d, w)| w * d.norm_squared()).sum::<f64>().sqrt();
    let (mut best, mut best_idx, mut best_vec) = (0.0, 0, Vec::new());
    for (rank, x) in vectors.iter().enumerate() {
        let v: Vec<Vec2> = (0..m).map(|j| Vec2::new(x[2 * j] * s[2 * j], x[2 * j + 1] * s[2 * j + 1])).collect();
        let vn = v.iter().zip(&mass).map(|(d, w)| w * d.norm_squared()).sum::<f64>().sqrt();
        let dot: f64 = v.iter().zip(&du).zip(&mass).map(|((a, b), w)| w * a.dot(b)).sum();
        let cos = if vn > 0.0 && du_norm > 0.0 { (dot / (vn * du_norm)).abs() } else { 0.0 };
        if cos > best {
            best = cos;
            best_idx = rank;
            best_vec = v;
        }
    }
    Ok(Spectrum { eigenvalues, zero_mode_alignment: best, zero_mode_index: best_idx, zero_mode: best_vec })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{minimize_unconstrained, SolverConfig};

    fn double_well() -> Potential {
        Potential::polynomial(
            vec![(0.25, 4, 0), (-0.5, 2, 0), (0.25, 0, 0), (0.5, 0, 2)],
            vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)],
        )
        .unwrap()
    }

    fn exact_kink(n: usize, half: f64) -> WaveProfile {
        let y: Vec<f64> = (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
        let u = y.iter().map(|&t| Vec2::new((t / std::f64::consts::SQRT_2).tanh(), 0.0)).collect();
        WaveProfile::new(y, u, 0.0).unwrap()
    }

    #[test]
    fn exact_kink_is_a_standing_wave() {
        let p = exact_kink(801, 8.0);
        assert!(wave_residual(&p, &double_well()).unwrap() < 1e-3);
        let spec = second_variation_spectrum(&p, &double_well(), 4).unwrap();
        assert!(spec.eigenvalues[0].abs() < 1e-2, "{:?}", spec.eigenvalues);
        assert!(spec.zero_mode_alignment > 0.99);
        assert_eq!(spec.zero_mode_index, 0);
        // bound state of the kink at 3/2, continuum above the y-mass 1
        assert!((spec.eigenvalues[1] - 1.0).abs() < 0.1, "{:?}", spec.eigenvalues);
    }

    #[test]
    fn constant_profile_has_zero_residual() {
        let y: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let p = WaveProfile::new(y, vec![Vec2::new(-1.0, 0.0); 40], 0.0).unwrap();
        assert_eq!(wave_residual(&p, &double_well()).unwrap(), 0.0);
    }

    #[test]
    fn coarse_grid_rejected() {
        let p = exact_kink(17, 4.0);
        assert_eq!(wave_residual(&p, &double_well()), Err(Error::GridTooCoarse(15)));
        assert!(matches!(second_variation_spectrum(&p, &double_well(), 2), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn minimizer_profile() {
        let pot = double_well();
        let r = minimize_unconstrained(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), &pot, &SolverConfig::default())
            .unwrap();
        assert!((r.energy - 2.0 / 3.0).abs() < 1e-4);
        let p = to_traveling_wave(&r, &pot).unwrap();
        assert_eq!(p.nu, 0.0);
        assert!(p.equipartition_defect(&pot) <= 1e-4 * 2.0 * 0.0625 + 1e-12);
        let h = hamiltonian_energy(&p, &pot);
        let target = std::f64::consts::SQRT_2 * r.energy;
        assert!((h.total() - target).abs() <= 1e-3 * target, "{h:?} vs {target}");
        assert!((h.kinetic - h.potential).abs() <= 1e-3 * h.core());
        assert!(wave_residual(&p, &pot).unwrap() <= 5e-2);
        let spec = second_variation_spectrum(&p, &pot, 3).unwrap();
        assert!(spec.eigenvalues[0].abs() <= 1e-2, "{:?}", spec.eigenvalues);
        assert!(spec.zero_mode_alignment >= 0.99);
    }
}
