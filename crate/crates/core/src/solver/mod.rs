//! Discretized area-constrained minimization of `E` by an augmented
//! Lagrangian over polylines with pinned endpoints.

pub mod criticality;
pub mod discrete;
pub mod init;
pub mod lbfgs;
pub mod leakage;
pub mod sweep;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{area, energy, Curve};
use crate::potential::{Potential, Vec2};

pub use criticality::{el_residual, estimate_multiplier, geodesic_curvature, vertex_multipliers};
pub use leakage::{detect_area_leakage, LeakageLevel, LeakageReport};
pub use sweep::{area_sweep, SweepRow};

use discrete::{monitor_resample, pack, psi, repel, NormalFrame, Objective};
use lbfgs::{LbfgsOptions, LbfgsReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub n_vertices: usize,
    pub tol_grad: f64,
    pub tol_area: f64,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Neighbourhood radii for the leakage report, in units of the well separation.
    pub well_radius_schedule: Vec<f64>,
    pub seed: u64,
    /// Lets area be placed on an endpoint well at its vertical cost rate.
    pub allow_well_deposits: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_vertices: 256,
            tol_grad: 1e-8,
            tol_area: 1e-8,
            penalty_init: 1.0,
            penalty_growth: 10.0,
            max_outer: 20,
            max_inner: 5000,
            well_radius_schedule: vec![1e-1, 1e-2, 1e-3],
            seed: 0,
            allow_well_deposits: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.n_vertices < 8 {
            return bad("n_vertices must be at least 8");
        }
        if !(self.tol_grad > 0.0 && self.tol_area > 0.0 && self.penalty_init > 0.0) {
            return bad("tolerances and the initial penalty must be positive");
        }
        if !(self.penalty_growth > 1.0) {
            return bad("penalty_growth must exceed 1");
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration budgets must be positive");
        }
        let s = &self.well_radius_schedule;
        if s.is_empty() || s.iter().any(|r| !(*r > 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
            return bad("well_radius_schedule must be positive and strictly decreasing");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub curve: Curve,
    pub energy: f64,
    pub a_target: f64,
    /// Area `𝒜` of the planar curve alone.
    pub area_achieved: f64,
    /// Area placed directly on each well (index matches `Potential::wells`).
    pub well_deposits: Vec<f64>,
    /// Lagrange multiplier `λ = dE/dA` (zero for unconstrained solves).
    pub multiplier: f64,
    /// Median and interquartile range of `F²κ_g`.
    pub multiplier_fk: f64,
    pub dispersion: f64,
    pub el_residual_max: f64,
    pub leakage: LeakageReport,
    pub converged: bool,
    pub nonexistence_suspected: bool,
    pub outer_iterations: usize,
}

impl SolveResult {
    pub fn deposit_total(&self) -> f64 {
        self.well_deposits.iter().sum()
    }

    /// `E` plus the vertical cost of the deposits.
    pub fn total_cost(&self, pot: &Potential) -> f64 {
        self.energy
            + self
                .well_deposits
                .iter()
                .enumerate()
                .map(|(i, d)| d.abs() * pot.well_frame(i).map(|w| w.vertical_rate()).unwrap_or(0.0))
                .sum::<f64>()
    }

    pub fn summary(&self) -> ResultJson {
        ResultJson {
            A_target: self.a_target,
            area_achieved: self.area_achieved,
            energy: self.energy,
            multiplier: self.multiplier,
            multiplier_dispersion: self.dispersion,
            el_residual_max: self.el_residual_max,
            converged: self.converged,
            nonexistence_suspected: self.nonexistence_suspected,
            well_deposits: self.well_deposits.clone(),
            leakage: self.leakage.levels.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[allow(non_snake_case)]
pub struct ResultJson {
    pub A_target: f64,
    pub area_achieved: f64,
    pub energy: f64,
    pub multiplier: f64,
    pub multiplier_dispersion: f64,
    pub el_residual_max: f64,
    pub converged: bool,
    pub nonexistence_suspected: bool,
    pub well_deposits: Vec<f64>,
    pub leakage: Vec<LeakageLevel>,
}

/// Number of outer iterations after which vertices are redistributed.
const RESAMPLE_ROUNDS: usize = 3;
/// Repulsion radius and resampling floor, relative to the well separation.
const R_MIN: f64 = 1e-4;
/// Vertices closer than this many repulsion radii to a well are excluded
/// from the reported residual.
const RESOLVED: f64 = 10.0;
/// L-BFGS iterations between redistributions.
const CHUNK: usize = 400;
/// Relative change between chunks below which the shape is considered settled.
const FLAT: f64 = 1e-8;
const POLISH_ROUNDS: usize = 4;
const MAX_PENALTY: f64 = 1e8;

struct Setup<'a> {
    pot: &'a Potential,
    cfg: &'a SolverConfig,
    start: Vec2,
    end: Vec2,
    deposit_rate: f64,
    /// Share of deposits per well.
    deposit_split: Vec<f64>,
    r_min: f64,
}

impl<'a> Setup<'a> {
    fn new(p: Vec2, q: Vec2, pot: &'a Potential, cfg: &'a SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if !(p - q).norm().is_normal() {
            return Err(Error::InvalidArgument("endpoints must be distinct and finite".into()));
        }
        let mut split = vec![0.0; pot.wells().len()];
        let mut rate = f64::INFINITY;
        if cfg.allow_well_deposits {
            let ends: Vec<usize> = [p, q].iter().filter_map(|&e| pot.well_at(e)).collect();
            let rates: Vec<(usize, f64)> =
                ends.iter().filter_map(|&i| pot.well_frame(i).ok().map(|w| (i, w.vertical_rate()))).collect();
            if let Some(min) = rates.iter().map(|r| r.1).reduce(f64::min) {
                rate = min;
                let cheapest: Vec<usize> =
                    rates.iter().filter(|r| r.1 <= min * (1.0 + 1e-12)).map(|r| r.0).collect();
                for &i in &cheapest {
                    split[i] = 1.0 / cheapest.len() as f64;
                }
            }
        }
        Ok(Setup {
            pot,
            cfg,
            start: p,
            end: q,
            deposit_rate: rate,
            deposit_split: split,
            r_min: R_MIN * pot.well_separation(),
        })
    }

    /// Full-coordinate descent in chunks, redistributing vertices between
    /// chunks so that tangential drift cannot collapse segments.
    fn inner(&self, pts: &mut Vec<Vec2>, target: Option<f64>, mu: f64, rho: f64, repulse: bool) -> LbfgsReport {
        let obj =
            Objective { pot: self.pot, start: self.start, end: self.end, target, mu, rho, deposit_rate: self.deposit_rate };
        let wells = self.pot.wells().to_vec();
        let r_min = if repulse { self.r_min } else { 0.0 };
        let project = |x: &mut [f64]| repel(x, &wells, r_min);
        let mut used = 0;
        let mut prev = f64::INFINITY;
        loop {
            let budget = CHUNK.min(self.cfg.max_inner - used);
            let opts = LbfgsOptions { max_iter: budget, tol_grad: self.cfg.tol_grad, ..Default::default() };
            let mut x = pack(pts);
            let mut rep = lbfgs::minimize(&mut |x, g| obj.eval(x, g), &mut x, &project, opts);
            *pts = obj.unpack(&x);
            used += rep.iterations.max(1);
            let flat = (prev - rep.value).abs() <= FLAT * (1.0 + rep.value.abs());
            if rep.converged || flat || used >= self.cfg.max_inner {
                rep.iterations = used;
                return rep;
            }
            log::trace!("chunk {} value {:.16e} |g|={:.2e}", used, rep.value, rep.grad_inf);
            prev = rep.value;
            *pts = self.resample(pts);
        }
    }

    /// Descent over normal offsets from the current polyline, with the
    /// normals refreshed between rounds.
    fn polish(&self, pts: &mut Vec<Vec2>, target: Option<f64>, mu: f64, rho: f64) -> LbfgsReport {
        let obj =
            Objective { pot: self.pot, start: self.start, end: self.end, target, mu, rho, deposit_rate: self.deposit_rate };
        let mut last = None;
        for _ in 0..POLISH_ROUNDS {
            let frame = NormalFrame::new(pts);
            let mut s = vec![0.0; frame.normals.len()];
            let mut x = pack(pts);
            let mut g = vec![0.0; x.len()];
            let mut f = |s: &[f64], gs: &mut [f64]| {
                frame.place(s, &mut x);
                let v = obj.eval(&x, &mut g);
                frame.pull_back(&g, gs);
                v
            };
            let opts = LbfgsOptions { max_iter: self.cfg.max_inner, tol_grad: self.cfg.tol_grad, ..Default::default() };
            let rep = lbfgs::minimize(&mut f, &mut s, &|_: &mut [f64]| {}, opts);
            let mut x = pack(pts);
            frame.place(&s, &mut x);
            *pts = obj.unpack(&x);
            let moved = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            last = Some(rep);
            if moved <= 1e-12 {
                break;
            }
        }
        last.expect("at least one round")
    }

    fn resample(&self, pts: &[Vec2]) -> Vec<Vec2> {
        let core = RESOLVED * self.r_min;
        let mut v = pts.to_vec();
        if self.pot.well_at(self.end).is_some() {
            v = straighten_tail(&v, core);
        }
        if self.pot.well_at(self.start).is_some() {
            v.reverse();
            v = straighten_tail(&v, core);
            v.reverse();
        }
        monitor_resample(&v, self.pot.wells(), core, self.cfg.n_vertices)
    }

    fn jitter(&self, pts: &mut [Vec2]) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let scale = 1e-9 * (self.end - self.start).norm();
        let n = pts.len();
        for p in pts[1..n - 1].iter_mut() {
            *p += Vec2::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
        }
    }

    fn finish(&self, pts: Vec<Vec2>, target: Option<f64>, mu: f64, rho: f64, outer: usize) -> Result<SolveResult> {
        let curve = Curve::open(pts)?;
        let e = energy(&curve, self.pot);
        let a = area(&curve);
        let a_target = target.unwrap_or(a);
        let (multiplier, deposit, viol) = match target {
            Some(t) => {
                let g = a - t;
                let (_, dpsi, ts) = psi(g, mu, rho, self.deposit_rate);
                (-dpsi, ts - g, ts.abs())
            }
            None => (0.0, 0.0, 0.0),
        };
        let well_deposits: Vec<f64> = self.deposit_split.iter().map(|s| s * deposit).collect();
        let (lam_fk, disp) = criticality::estimate_multiplier(&curve, self.pot).unwrap_or((f64::NAN, f64::NAN));
        let el = self.resolved_residual(&curve, multiplier);
        let tol = self.cfg.tol_area * (1.0 + a_target.abs());
        let mut res = SolveResult {
            curve,
            energy: e,
            a_target,
            area_achieved: a,
            well_deposits,
            multiplier,
            multiplier_fk: lam_fk,
            dispersion: disp,
            el_residual_max: el,
            leakage: LeakageReport::default(),
            converged: viol <= tol && e.is_finite(),
            nonexistence_suspected: false,
            outer_iterations: outer,
        };
        if target.is_some() {
            res.leakage = detect_area_leakage(&res, self.pot, self.cfg);
            res.nonexistence_suspected = res.leakage.suspected;
            if !res.nonexistence_suspected && (a - a_target).abs() > tol {
                res.converged = false;
            }
        }
        Ok(res)
    }

    /// Max residual over vertices outside the unresolved cores around wells.
    fn resolved_residual(&self, curve: &Curve, lambda: f64) -> f64 {
        let core = RESOLVED * self.r_min;
        match criticality::el_residuals(curve, self.pot, lambda) {
            Ok(res) => res
                .iter()
                .zip(&curve.vertices()[1..])
                .filter(|(_, v)| self.pot.wells().iter().all(|w| (*v - w).norm() >= core))
                .map(|(r, _)| *r)
                .fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        }
    }

    /// Unconstrained descent of `E` from `init`.
    fn run_unconstrained(&self, init: Vec<Vec2>) -> Result<SolveResult> {
        let mut pts = self.resample(&init);
        self.jitter(&mut pts);
        for _ in 0..RESAMPLE_ROUNDS {
            self.inner(&mut pts, None, 0.0, 0.0, true);
            pts = self.resample(&pts);
        }
        self.inner(&mut pts, None, 0.0, 0.0, true);
        self.polish(&mut pts, None, 0.0, 0.0);
        self.finish(pts, None, 0.0, 0.0, 0)
    }

    /// Augmented-Lagrangian loop from `init`, with optional warm multiplier.
    fn run_constrained(&self, init: &[Vec2], target: f64, mu0: f64, resample: bool) -> Result<SolveResult> {
        let mut pts = if resample { self.resample(init) } else { init.to_vec() };
        if pts.len() != self.cfg.n_vertices {
            pts = self.resample(&pts);
        }
        self.jitter(&mut pts);
        let (mut mu, mut rho) = (mu0, self.cfg.penalty_init);
        let tol = self.cfg.tol_area * (1.0 + target.abs());
        let mut prev_viol = f64::INFINITY;
        let mut outer = 0;
        for k in 0..self.cfg.max_outer {
            outer = k + 1;
            let rep = self.inner(&mut pts, Some(target), mu, rho, true);
            log::debug!("outer {k}: rho={rho:.1e} {} iterations, |g|={:.2e}", rep.iterations, rep.grad_inf);
            let g = area_of(&pts) - target;
            let (_, dpsi, ts) = psi(g, mu, rho, self.deposit_rate);
            let viol = ts.abs();
            mu = dpsi;
            if k + 1 < RESAMPLE_ROUNDS && resample {
                pts = self.resample(&pts);
                continue;
            }
            if viol <= tol {
                break;
            }
            if viol > 0.25 * prev_viol {
                rho = (rho * self.cfg.penalty_growth).min(MAX_PENALTY);
            }
            prev_viol = viol;
        }
        // final polish without the repulsion discs
        for _ in 0..3 {
            let rep = self.polish(&mut pts, Some(target), mu, rho);
            log::debug!("polish: {} iterations, |g|={:.2e}", rep.iterations, rep.grad_inf);
            let g = area_of(&pts) - target;
            let (_, dpsi, ts) = psi(g, mu, rho, self.deposit_rate);
            mu = dpsi;
            if ts.abs() <= tol {
                break;
            }
        }
        self.finish(pts, Some(target), mu, rho, outer)
    }
}

/// Replaces the final stretch that stays within `core` of the last vertex
/// by a straight segment.
fn straighten_tail(pts: &[Vec2], core: f64) -> Vec<Vec2> {
    let end = pts[pts.len() - 1];
    let mut i = pts.len() - 1;
    while i > 1 && (pts[i - 1] - end).norm() < core {
        i -= 1;
    }
    let mut v = pts[..i].to_vec();
    v.push(end);
    v
}

fn area_of(pts: &[Vec2]) -> f64 {
    let mut a = 0.0;
    for k in 0..pts.len() - 1 {
        a += 0.5 * (pts[k].x + pts[k + 1].x) * (pts[k + 1].y - pts[k].y);
    }
    a
}

fn straight(p: Vec2, q: Vec2, n: usize) -> Vec<Vec2> {
    (0..n).map(|i| p + (q - p) * (i as f64 / (n - 1) as f64)).collect()
}

/// Picks the lowest total cost; near-ties go to the smaller residual.
fn better(a: &SolveResult, b: &SolveResult, pot: &Potential) -> bool {
    match (a.converged, b.converged) {
        (true, false) => return true,
        (false, true) => return false,
        _ => {}
    }
    let (ca, cb) = (a.total_cost(pot), b.total_cost(pot));
    if (ca - cb).abs() <= 1e-10 {
        a.el_residual_max < b.el_residual_max
    } else {
        ca < cb
    }
}

/// Minimizer of `E` between `p` and `q` (multi-start from the straight
/// segment and two bent curves).
pub fn minimize_unconstrained(p: Vec2, q: Vec2, pot: &Potential, cfg: &SolverConfig) -> Result<SolveResult> {
    let s = Setup::new(p, q, pot, cfg)?;
    let base = straight(p, q, cfg.n_vertices);
    let mut best: Option<SolveResult> = None;
    let bent = |sign: f64| -> Vec<Vec2> {
        let d = q - p;
        let nrm = Vec2::new(-d.y, d.x) * (0.2 * sign);
        base.iter()
            .enumerate()
            .map(|(i, &v)| v + nrm * (std::f64::consts::PI * i as f64 / (base.len() - 1) as f64).sin())
            .collect()
    };
    for init in [base.clone(), bent(1.0), bent(-1.0)] {
        let r = s.run_unconstrained(init)?;
        if best.as_ref().is_none_or(|b| better(&r, b, pot)) {
            best = Some(r);
        }
    }
    let mut r = best.expect("at least one start");
    r.converged = r.converged && r.energy.is_finite();
    if !r.energy.is_finite() {
        return Err(Error::NonConvergence("energy is not finite".into()));
    }
    Ok(r)
}

/// Bump positions (fractions of arclength) used for multi-start.
pub const BUMP_POSITIONS: [f64; 2] = [0.5, 0.3];

/// Minimizer of `E` between `p_minus` and `p_plus` subject to `𝒜 = A`.
pub fn minimize_constrained(
    p_minus: Vec2,
    p_plus: Vec2,
    a: f64,
    pot: &Potential,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if !a.is_finite() {
        return Err(Error::InvalidArgument(format!("target area {a} is not finite")));
    }
    let g0 = minimize_unconstrained(p_minus, p_plus, pot, cfg)?;
    let s = Setup::new(p_minus, p_plus, pot, cfg)?;
    let a0 = g0.area_achieved;
    if (a - a0).abs() <= cfg.tol_area * (1.0 + a.abs()) {
        return s.run_constrained(g0.curve.vertices(), a, 0.0, false);
    }
    let mut best: Option<SolveResult> = None;
    for &c in &BUMP_POSITIONS {
        let init = init::bump_to_area(&g0.curve, a, c)?;
        let r = s.run_constrained(init.vertices(), a, 0.0, true)?;
        log::debug!("start at {c}: energy {} converged {}", r.energy, r.converged);
        if best.as_ref().is_none_or(|b| better(&r, b, pot)) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Constrained solve from a given initial curve (no multi-start), with an
/// optional warm-start multiplier `λ`.
pub fn minimize_constrained_from(
    init: &Curve,
    a: f64,
    pot: &Potential,
    cfg: &SolverConfig,
    lambda0: f64,
) -> Result<SolveResult> {
    if init.is_closed() {
        return Err(Error::InvalidCurve("initial curve must be open".into()));
    }
    let s = Setup::new(init.first(), init.last(), pot, cfg)?;
    s.run_constrained(init.vertices(), a, -lambda0, init.len() != cfg.n_vertices)
}
