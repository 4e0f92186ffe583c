//! Adaptive Dormand–Prince 5(4) integrator for planar autonomous fields.

use crate::error::{Error, Result};
use crate::potential::Vec2;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-14, h_init: 1e-3, max_steps: 2_000_000 }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(y)` from `t0`, recording every accepted step, until
/// `stop(t, y)` holds or `t_end` is reached. `max_h(y)` caps the step size.
pub fn integrate(
    f: &dyn Fn(Vec2) -> Result<Vec2>,
    y0: Vec2,
    t0: f64,
    t_end: f64,
    opts: OdeOptions,
    max_h: &dyn Fn(Vec2) -> f64,
    stop: &dyn Fn(f64, Vec2) -> bool,
) -> Result<Vec<(f64, Vec2)>> {
    let mut out = vec![(t0, y0)];
    let (mut t, mut y) = (t0, y0);
    let mut h = opts.h_init.min(max_h(y));
    let mut k1 = f(y)?;
    for _ in 0..opts.max_steps {
        if stop(t, y) || t >= t_end {
            return Ok(out);
        }
        h = h.min(max_h(y)).min(t_end - t);
        if !(h > 0.0) || t + h == t {
            return Err(Error::NonConvergence(format!("step size underflow at t = {t}")));
        }
        let k2 = f(y + h * A21 * k1)?;
        let k3 = f(y + h * (A31 * k1 + A32 * k2))?;
        let k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
        let k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
        let k6 = f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(y_new)?;
        let err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((err_vec[i] / sc).abs());
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7;
            out.push((t, y));
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Err(Error::NonConvergence(format!("step budget of {} exhausted", opts.max_steps)))
}
