//! Diagnostics for area accumulating in shrinking neighbourhoods of wells.

use serde::Serialize;

use crate::functionals::polar_increment;
use crate::potential::{Potential, Vec2};

use super::{SolveResult, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeakageLevel {
    pub well: usize,
    pub radius: f64,
    /// Signed `ω₁`-area about the well of the curve inside the radius, plus
    /// any area deposited on the well itself.
    pub area_in: f64,
    pub arclength_in: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LeakageReport {
    pub levels: Vec<LeakageLevel>,
    pub suspected: bool,
}

impl LeakageReport {
    /// Total area held in all well neighbourhoods at the `j`-th schedule level.
    pub fn area_at_level(&self, j: usize, n_levels: usize) -> f64 {
        self.levels.iter().skip(j).step_by(n_levels).map(|l| l.area_in).sum()
    }
}

/// Ratio of consecutive `area_in` values above which area is considered
/// not to shrink with the neighbourhood.
pub const PERSISTENCE_RATIO: f64 = 0.5;
/// Relative closeness of `|λ|` to the well's vertical rate.
pub const RATE_FRACTION: f64 = 0.9;

pub fn detect_area_leakage(result: &SolveResult, pot: &Potential, config: &SolverConfig) -> LeakageReport {
    let sep = pot.well_separation();
    let radii: Vec<f64> = config.well_radius_schedule.iter().map(|r| r * sep).collect();
    let pts = result.curve.traversal();
    let floor = 1e-6 * (1.0 + result.a_target.abs());
    let mut levels = Vec::new();
    let mut suspected = false;
    for (wi, &w) in pot.wells().iter().enumerate() {
        let deposit = result.well_deposits.get(wi).copied().unwrap_or(0.0);
        let rate = pot.well_frame(wi).map(|f| f.vertical_rate()).unwrap_or(f64::INFINITY);
        let mut prev: Option<f64> = None;
        for &rho in &radii {
            let (mut a, mut l) = (deposit, 0.0);
            for s in pts.windows(2) {
                let mid = (s[0] + s[1]) * 0.5;
                if (mid - w).norm() < rho {
                    a += polar_increment(s[0], s[1], w);
                    l += (s[1] - s[0]).norm();
                }
            }
            if let Some(p) = prev {
                let persists = a.abs() > floor && p.abs() > floor && a.abs() > PERSISTENCE_RATIO * p.abs();
                if persists && result.multiplier.abs() >= RATE_FRACTION * rate {
                    suspected = true;
                }
            }
            prev = Some(a);
            levels.push(LeakageLevel { well: wi, radius: rho, area_in: a, arclength_in: l });
        }
    }
    LeakageReport { levels, suspected }
}

/// Area of the portion of `pts` within `rho` of `center`, measured with `ω₁`.
pub fn area_near(pts: &[Vec2], center: Vec2, rho: f64) -> f64 {
    pts.windows(2)
        .filter(|s| ((s[0] + s[1]) * 0.5 - center).norm() < rho)
        .map(|s| polar_increment(s[0], s[1], center))
        .sum()
}
