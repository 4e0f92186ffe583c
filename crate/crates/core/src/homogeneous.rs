//! Closed forms for the quadratic potential `W = λ₁²p₁² + λ₂²p₂²`: integral
//! curves of `V_β`, the β ↔ A correspondence, ellipses and vertical fibers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{area, energy, Curve};
use crate::ode::{integrate, OdeOptions};
use crate::potential::{Potential, Vec2};

pub fn rtilde(p: Vec2, lambda1: f64, lambda2: f64) -> f64 {
    0.5 * (lambda1 * p.x * p.x + lambda2 * p.y * p.y)
}

fn fh2(p: Vec2, l1: f64, l2: f64) -> f64 {
    l1 * l1 * p.x * p.x + l2 * l2 * p.y * p.y
}

/// `R(p) = ∇r̃ / F_H²`
pub fn field_r(p: Vec2, lambda1: f64, lambda2: f64) -> Result<Vec2> {
    let d = fh2(p, lambda1, lambda2);
    if d == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    Ok(Vec2::new(lambda1 * p.x, lambda2 * p.y) / d)
}

/// `Θ(p) = (−λ₂p₂, λ₁p₁) / F_H²`
pub fn field_theta(p: Vec2, lambda1: f64, lambda2: f64) -> Result<Vec2> {
    let d = fh2(p, lambda1, lambda2);
    if d == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    Ok(Vec2::new(-lambda2 * p.y, lambda1 * p.x) / d)
}

/// `V_β = cos β Θ − sin β R`
pub fn field_vbeta(p: Vec2, beta: f64, lambda1: f64, lambda2: f64) -> Result<Vec2> {
    Ok(beta.cos() * field_theta(p, lambda1, lambda2)? - beta.sin() * field_r(p, lambda1, lambda2)?)
}

fn check_lambdas(l1: f64, l2: f64) -> Result<()> {
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::NonPositiveEigenvalue(l1, l2));
    }
    Ok(())
}

/// Relative bound on `|Δγ|/|γ|` per integration step.
const MAX_REL_STEP: f64 = 0.01;

/// Integral curve of `V_β` from `p0` into the origin (reversed flow for
/// β < 0), stopped once `|γ| < stop_radius`; the origin is appended.
///
/// Along `V_β`, `dr̃/dℓ = −sin β`, so the flow is integrated in
/// `s = ln(r̃₀/r̃)`, where the field is `r̃ V_β / sin β`.
pub fn integrate_integral_curve(p0: Vec2, beta: f64, lambda1: f64, lambda2: f64, stop_radius: f64) -> Result<Curve> {
    check_lambdas(lambda1, lambda2)?;
    if p0.norm() == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    if !(stop_radius > 0.0) {
        return Err(Error::InvalidArgument(format!("stop_radius must be positive (got {stop_radius})")));
    }
    let sb = beta.sin();
    if beta == 0.0 || sb.abs() < 1e-14 || beta.abs() > std::f64::consts::FRAC_PI_2 + 1e-12 {
        return Err(Error::NonConvergence(format!(
            "beta = {beta}: the integral curve does not reach the origin"
        )));
    }
    let field = |y: Vec2| -> Result<Vec2> {
        Ok(field_vbeta(y, beta, lambda1, lambda2)? * (rtilde(y, lambda1, lambda2) / sb))
    };
    let max_h = |y: Vec2| {
        let v = field(y).map(|v| v.norm()).unwrap_or(f64::INFINITY);
        if v > 0.0 {
            MAX_REL_STEP * y.norm() / v
        } else {
            1.0
        }
    };
    let opts = OdeOptions { max_steps: 5_000_000, ..Default::default() };
    let sol = integrate(&field, p0, 0.0, f64::INFINITY, opts, &max_h, &|_, y| y.norm() < stop_radius)?;
    let mut v: Vec<Vec2> = sol.into_iter().map(|(_, y)| y).collect();
    v.push(Vec2::zeros());
    Curve::open(v)
}

pub fn default_stop_radius(p0: Vec2) -> f64 {
    1e-6 * p0.norm()
}

/// Area of the integral curve for `β`, measured on the polyline.
pub fn area_for_beta(p0: Vec2, beta: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    Ok(area(&integrate_integral_curve(p0, beta, lambda1, lambda2, default_stop_radius(p0))?))
}

/// Maps the extended angle `b ∈ (0, π)` to the admissible β.
fn unfold(b: f64) -> f64 {
    if b <= std::f64::consts::FRAC_PI_2 {
        b
    } else {
        b - std::f64::consts::PI
    }
}

/// Finds β with `area(γ_β) = A`. In the extended angle `b ∈ (0, π)` the
/// reversed flow for negative β continues the family and the area is
/// decreasing in `b` and affine in `cot b`, so the root is bracketed in
/// `x = cot b` and refined by Illinois regula falsi.
pub fn solve_beta_for_area(p0: Vec2, a: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    check_lambdas(lambda1, lambda2)?;
    let tol = 1e-8 * (1.0 + a.abs());
    let area_at = |x: f64| -> Result<f64> {
        let b = std::f64::consts::FRAC_PI_2 - x.atan();
        area_for_beta(p0, unfold(b), lambda1, lambda2)
    };
    let to_beta = |x: f64| unfold(std::f64::consts::FRAC_PI_2 - x.atan());
    let g0 = area_at(0.0)? - a;
    if g0.abs() <= tol {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    // area grows with x = cot b; expand the bracket geometrically
    let dir = if g0 < 0.0 { 1.0 } else { -1.0 };
    let (mut xa, mut ga) = (0.0, g0);
    let mut step = 1.0;
    let (mut xb, mut gb);
    let mut iters = 0;
    loop {
        xb = xa + dir * step;
        gb = area_at(xb)? - a;
        iters += 1;
        if gb.abs() <= tol {
            return Ok(to_beta(xb));
        }
        if gb.signum() != ga.signum() {
            break;
        }
        xa = xb;
        ga = gb;
        step *= 4.0;
        if iters > 40 {
            return Err(Error::NoRoot(format!("area {a} not attained by any beta")));
        }
    }
    let mut side = 0;
    for _ in 0..200 {
        let x = (xa * gb - xb * ga) / (gb - ga);
        let x = if x.is_finite() && (x - xa) * (x - xb) < 0.0 { x } else { 0.5 * (xa + xb) };
        let g = area_at(x)? - a;
        if g.abs() <= tol || (xb - xa).abs() <= 1e-15 * (1.0 + x.abs()) {
            return Ok(to_beta(x));
        }
        if g.signum() == gb.signum() {
            xb = x;
            gb = g;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            xa = x;
            ga = g;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NoRoot(format!("root finder budget exhausted for area {a}")))
}

/// `E(γ_β) = r̃(p₀) / |sin β|`
pub fn homogeneous_length(p0: Vec2, beta: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::ZeroBeta);
    }
    Ok(rtilde(p0, lambda1, lambda2) / beta.sin().abs())
}

/// Slope of the minimal length with respect to area, `(λ₁+λ₂) cos β`,
/// negated on the reversed branch β < 0.
pub fn length_area_slope(beta: f64, lambda1: f64, lambda2: f64) -> f64 {
    (lambda1 + lambda2) * beta.cos() * beta.signum()
}

/// The level set `r̃ = r̃(p₀)`, starting at `p₀`, traversed along `V₀`.
pub fn minimizing_ellipse(p0: Vec2, lambda1: f64, lambda2: f64, n: usize) -> Result<(Curve, f64)> {
    check_lambdas(lambda1, lambda2)?;
    if p0.norm() == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    let rt = rtilde(p0, lambda1, lambda2);
    let (a, b) = ((2.0 * rt / lambda1).sqrt(), (2.0 * rt / lambda2).sqrt());
    let t0 = (p0.y / b).atan2(p0.x / a);
    let n = n.max(3);
    let v = (0..n)
        .map(|i| {
            let t = t0 + std::f64::consts::TAU * i as f64 / n as f64;
            Vec2::new(a * t.cos(), b * t.sin())
        })
        .collect();
    let c = Curve::closed(v)?;
    let e = energy(&c, &Potential::homogeneous(lambda1, lambda2)?);
    Ok((c, e))
}

/// Distance between `(0,0,0)` and `(0,0,A)` in the lifted metric.
pub fn vertical_fiber_distance(a: f64, lambda1: f64, lambda2: f64) -> f64 {
    (lambda1 + lambda2) * a.abs()
}

/// Constant `C₀` in `r̃(p₀) cot β / (λ₁+λ₂) = A + C₀`, fitted from measured areas.
pub fn fit_c0(p0: Vec2, betas: &[f64], lambda1: f64, lambda2: f64) -> Result<f64> {
    let rt = rtilde(p0, lambda1, lambda2);
    let mut sum = 0.0;
    for &b in betas {
        sum += rt / (lambda1 + lambda2) / b.tan() - area_for_beta(p0, b, lambda1, lambda2)?;
    }
    Ok(sum / betas.len() as f64)
}

#[derive(Clone, Debug)]
pub struct HomogeneousSolution {
    pub p0: Vec2,
    pub beta: f64,
    pub curve: Curve,
    pub energy: f64,
    pub area: f64,
    pub target_area: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

#[derive(Serialize)]
pub struct HomogeneousBundle {
    pub p0: [f64; 2],
    pub beta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub energy: f64,
    pub n_vertices: usize,
}

impl HomogeneousSolution {
    pub fn bundle(&self) -> HomogeneousBundle {
        HomogeneousBundle {
            p0: [self.p0.x, self.p0.y],
            beta: self.beta,
            a: self.target_area,
            energy: self.energy,
            n_vertices: self.curve.len(),
        }
    }
}

/// Closed-form minimizer from `p0` to the origin enclosing area `A`.
pub fn solve_homogeneous(p0: Vec2, a: f64, lambda1: f64, lambda2: f64) -> Result<HomogeneousSolution> {
    let beta = solve_beta_for_area(p0, a, lambda1, lambda2)?;
    let curve = integrate_integral_curve(p0, beta, lambda1, lambda2, default_stop_radius(p0))?;
    Ok(HomogeneousSolution {
        p0,
        beta,
        energy: homogeneous_length(p0, beta, lambda1, lambda2)?,
        area: area(&curve),
        curve,
        target_area: a,
        lambda1,
        lambda2,
    })
}
