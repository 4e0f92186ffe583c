//! Initial curves: straight segments and bump perturbations of a base curve.

use crate::error::{Error, Result};
use crate::functionals::area;
use crate::functionals::Curve;
use crate::potential::Vec2;

fn normals(v: &[Vec2]) -> Vec<Vec2> {
    let n = v.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                return Vec2::zeros();
            }
            let d = v[i + 1] - v[i - 1];
            let l = d.norm();
            if l > 0.0 {
                Vec2::new(-d.y, d.x) / l
            } else {
                Vec2::zeros()
            }
        })
        .collect()
}

/// Bump profile along the normalized arclength `t`, centred near `center`.
fn profile(t: f64, center: f64) -> f64 {
    (std::f64::consts::PI * t).sin() * (-((t - center) / 0.3).powi(2)).exp()
}

/// Displaces `base` along its normals by `a·φ(t)·L` with the amplitude `a`
/// chosen so that the area equals `target`. The area is quadratic in `a`;
/// the root of smallest magnitude is used.
pub fn bump_to_area(base: &Curve, target: f64, center: f64) -> Result<Curve> {
    let v = base.vertices();
    let nrm = normals(v);
    let len = base.euclid_length();
    let mut cum = vec![0.0];
    for w in v.windows(2) {
        cum.push(cum[cum.len() - 1] + (w[1] - w[0]).norm());
    }
    let phi: Vec<f64> = cum.iter().map(|s| profile(s / len, center) * len).collect();
    let at = |a: f64| -> Result<Curve> {
        Curve::open(v.iter().zip(&nrm).zip(&phi).map(|((p, n), f)| p + n * (a * f)).collect())
    };
    let a0 = area(base);
    let (ap, am) = (area(&at(1.0)?), area(&at(-1.0)?));
    let c1 = 0.5 * (ap - am);
    let c2 = 0.5 * (ap + am) - a0;
    let c0 = a0 - target;
    let amp = if c2.abs() <= 1e-14 * c1.abs().max(1e-300) {
        if c1 == 0.0 {
            return Err(Error::InvalidCurve("bump does not change the area".into()));
        }
        -c0 / c1
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc < 0.0 {
            // the closest attainable area is at the vertex of the quadratic
            -c1 / (2.0 * c2)
        } else {
            let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
            let (r1, r2) = (q / c2, if q != 0.0 { c0 / q } else { f64::INFINITY });
            if r1.abs() < r2.abs() {
                r1
            } else {
                r2
            }
        }
    };
    at(amp)
}
