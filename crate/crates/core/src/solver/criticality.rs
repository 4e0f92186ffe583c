//! Euler–Lagrange residuals and multiplier estimates.
//!
//! All quantities are evaluated in flux form on the polyline's own vertices:
//! at vertex `i` the jump `[Fτ]` across the two adjacent segments and the
//! dual-cell integrals of `|γ'|∇F` and `(γ')^⊥` replace the derivatives of
//! the continuous system. This is central differencing that does not depend
//! on the parametrization.

use crate::error::{Error, Result};
use crate::functionals::Curve;
use crate::potential::{Potential, Vec2};

struct VertexTerms {
    /// `∂E/∂v_i = −[Fτ] + ½Σ|Δ|∇F`
    de: Vec2,
    /// `∂𝒜/∂v_i`
    da: Vec2,
    jump: f64,
    grad_part: f64,
}

fn vertex_terms(prev: Vec2, v: Vec2, next: Vec2, pot: &Potential) -> VertexTerms {
    let seg = |a: Vec2, b: Vec2| {
        let d = b - a;
        let len = d.norm();
        let (f, gf) = pot.f_and_grad((a + b) * 0.5);
        let tau = if len > 0.0 { d / len } else { Vec2::zeros() };
        (tau * f, gf * len)
    };
    let (ft_m, g_m) = seg(prev, v);
    let (ft_p, g_p) = seg(v, next);
    let de = ft_m - ft_p + (g_m + g_p) * 0.5;
    let da = Vec2::new(0.5 * (next.y - prev.y), 0.5 * (prev.x - next.x));
    VertexTerms { de, da, jump: (ft_p - ft_m).norm(), grad_part: 0.5 * (g_m.norm() + g_p.norm()) }
}

/// Indices and neighbours of the interior vertices (all vertices when closed).
fn interior(curve: &Curve) -> Vec<(usize, Vec2, Vec2, Vec2)> {
    let v = curve.vertices();
    let n = v.len();
    if curve.is_closed() {
        (0..n).map(|i| (i, v[(i + n - 1) % n], v[i], v[(i + 1) % n])).collect()
    } else {
        (1..n - 1).map(|i| (i, v[i - 1], v[i], v[i + 1])).collect()
    }
}

fn check_density(curve: &Curve, pot: &Potential) -> Result<()> {
    for (i, _, v, _) in interior(curve) {
        if pot.f(v) == 0.0 {
            return Err(Error::ZeroDensityInterior { index: i });
        }
    }
    Ok(())
}

/// Max over interior vertices of the normal component of
/// `−(Fτ)' + |γ'|∇F + λ(γ')^⊥`, relative to the size of its terms.
pub fn el_residual(curve: &Curve, pot: &Potential, lambda: f64) -> Result<f64> {
    Ok(el_residuals(curve, pot, lambda)?.into_iter().fold(0.0, f64::max))
}

/// Per-interior-vertex residuals behind [`el_residual`].
pub fn el_residuals(curve: &Curve, pot: &Potential, lambda: f64) -> Result<Vec<f64>> {
    check_density(curve, pot)?;
    Ok(interior(curve)
        .into_iter()
        .map(|(_, a, v, b)| {
            let t = vertex_terms(a, v, b, pot);
            let na = t.da.norm();
            let m = if na > 0.0 { t.da / na } else { Vec2::zeros() };
            let r = (t.de - t.da * lambda).dot(&m).abs();
            let scale = t.jump + t.grad_part + lambda.abs() * na;
            if scale > 0.0 {
                r / scale
            } else {
                0.0
            }
        })
        .collect())
}

/// `F²κ_g` at each interior vertex; constant (= λ) along critical curves.
pub fn vertex_multipliers(curve: &Curve, pot: &Potential) -> Result<Vec<f64>> {
    check_density(curve, pot)?;
    Ok(interior(curve)
        .into_iter()
        .map(|(_, a, v, b)| {
            let t = vertex_terms(a, v, b, pot);
            let na2 = t.da.norm_squared();
            if na2 > 0.0 {
                t.de.dot(&t.da) / na2
            } else {
                0.0
            }
        })
        .collect())
}

/// Geodesic curvature in the metric `F²δ`, signed so that counter-clockwise
/// turning is positive.
pub fn geodesic_curvature(curve: &Curve, pot: &Potential) -> Result<Vec<f64>> {
    let m = vertex_multipliers(curve, pot)?;
    Ok(interior(curve).into_iter().zip(m).map(|((_, _, v, _), l)| l / pot.w(v)).collect())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Median of `F²κ_g` and its interquartile range.
pub fn estimate_multiplier(curve: &Curve, pot: &Potential) -> Result<(f64, f64)> {
    let mut m = vertex_multipliers(curve, pot)?;
    if m.is_empty() {
        return Err(Error::InvalidCurve("no interior vertices".into()));
    }
    m.sort_by(f64::total_cmp);
    Ok((quantile(&m, 0.5), quantile(&m, 0.75) - quantile(&m, 0.25)))
}
