//! Warm-started continuation over a list of target areas.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{Potential, Vec2};

use super::{minimize_constrained, minimize_constrained_from, minimize_unconstrained, SolveResult, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct SweepRow {
    pub A: f64,
    pub energy: f64,
    pub multiplier: f64,
    /// Central difference of energy against area (both neighbours converged).
    pub slope_fd: Option<f64>,
    pub converged: bool,
    pub flagged: bool,
}

impl SweepRow {
    /// Whether `slope_fd` and `multiplier` agree to `1e-2(1 + |λ|)`.
    pub fn slope_agrees(&self) -> Option<bool> {
        self.slope_fd.map(|s| (s - self.multiplier).abs() <= 1e-2 * (1.0 + self.multiplier.abs()))
    }
}

/// Energy-minimizing curves for each area in `areas`, continued from the
/// area nearest the unconstrained minimizer outward.
pub fn area_sweep(
    p_minus: Vec2,
    p_plus: Vec2,
    areas: &[f64],
    pot: &Potential,
    cfg: &SolverConfig,
) -> Result<(Vec<SweepRow>, Vec<SolveResult>)> {
    if areas.is_empty() {
        return Err(Error::InvalidArgument("empty area list".into()));
    }
    if areas.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidArgument("areas must be finite".into()));
    }
    let mut sorted = areas.to_vec();
    if sorted.windows(2).any(|w| w[1] < w[0]) {
        log::info!("sorting area list into increasing order");
        sorted.sort_by(|a, b| a.total_cmp(b));
    }
    sorted.dedup();
    let g0 = minimize_unconstrained(p_minus, p_plus, pot, cfg)?;
    let a0 = g0.area_achieved;
    let pivot = (0..sorted.len())
        .min_by(|&i, &j| (sorted[i] - a0).abs().total_cmp(&(sorted[j] - a0).abs()))
        .unwrap();
    let first = minimize_constrained(p_minus, p_plus, sorted[pivot], pot, cfg)?;

    let chain = |idx: Vec<usize>| -> Result<Vec<(usize, SolveResult)>> {
        let mut out = Vec::with_capacity(idx.len());
        let mut prev = first.clone();
        for i in idx {
            let warm = minimize_constrained_from(&prev.curve, sorted[i], pot, cfg, prev.multiplier)?;
            let r = if warm.converged {
                warm
            } else {
                let cold = minimize_constrained(p_minus, p_plus, sorted[i], pot, cfg)?;
                if cold.converged || cold.total_cost(pot) < warm.total_cost(pot) {
                    cold
                } else {
                    warm
                }
            };
            prev = r.clone();
            out.push((i, r));
        }
        Ok(out)
    };
    let (down, up) = rayon::join(
        || chain((0..pivot).rev().collect()),
        || chain((pivot + 1..sorted.len()).collect()),
    );
    let mut results: Vec<Option<SolveResult>> = vec![None; sorted.len()];
    results[pivot] = Some(first.clone());
    for (i, r) in down?.into_iter().chain(up?) {
        results[i] = Some(r);
    }
    let results: Vec<SolveResult> = results.into_iter().map(|r| r.expect("every area solved")).collect();
    let rows = rows_from(&sorted, &results);
    Ok((rows, results))
}

fn rows_from(areas: &[f64], res: &[SolveResult]) -> Vec<SweepRow> {
    let n = areas.len();
    (0..n)
        .map(|i| {
            let slope_fd = if i > 0 && i + 1 < n && res[i - 1].converged && res[i + 1].converged {
                let (a, b) = (&res[i - 1], &res[i + 1]);
                let ta = a.energy + cost_of_deposits(a);
                let tb = b.energy + cost_of_deposits(b);
                Some((tb - ta) / (areas[i + 1] - areas[i - 1]))
            } else {
                None
            };
            SweepRow {
                A: areas[i],
                energy: res[i].energy,
                multiplier: res[i].multiplier,
                slope_fd,
                converged: res[i].converged,
                flagged: res[i].nonexistence_suspected,
            }
        })
        .collect()
}

// Deposits carry cost |λ|·|d| at saturation, where |λ| is the vertical rate.
fn cost_of_deposits(r: &SolveResult) -> f64 {
    let d = r.deposit_total().abs();
    if d == 0.0 {
        0.0
    } else {
        d * r.multiplier.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_nonfinite() {
        let pot = Potential::homogeneous(1.0, 2.0).unwrap();
        let cfg = SolverConfig::default();
        let (p, q) = (Vec2::new(1.0, 0.0), Vec2::zeros());
        assert!(area_sweep(p, q, &[], &pot, &cfg).is_err());
        assert!(area_sweep(p, q, &[f64::NAN], &pot, &cfg).is_err());
    }
}
