use std::fs;
use std::path::Path;

use degeo_core::homogeneous::{
    integrate_integral_curve, length_area_slope, minimizing_ellipse, solve_homogeneous, default_stop_radius,
};
use degeo_core::io::{save_curve_csv, write_csv_rows, write_json};
use degeo_core::radial::figure1;
use degeo_core::solver::{area_sweep, minimize_constrained, SolverConfig};
use degeo_core::wave::{hamiltonian_energy, second_variation_spectrum, to_traveling_wave, to_traveling_wave_with, wave_residual};
use degeo_core::{area, energy, Error, PotentialSpec, Result};
use serde::Serialize;

use crate::config::{point, HomogeneousConfig, HomogeneousMode, RadialConfig, SolveConfig, SweepConfig, WaveConfig};

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    /// Ran to completion but raised a mathematical flag.
    Flagged,
}

fn with_seed(mut cfg: SolverConfig, seed: Option<u64>) -> SolverConfig {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg
}

fn say(quiet: bool, msg: String) {
    if !quiet {
        println!("{msg}");
    }
}

pub fn solve(cfg: SolveConfig, out: &Path, seed: Option<u64>, quiet: bool) -> Result<Outcome> {
    let pot = cfg.potential.build()?;
    let solver = with_seed(cfg.solver, seed);
    let r = minimize_constrained(point(cfg.p_minus), point(cfg.p_plus), cfg.a, &pot, &solver)?;
    write_json(&out.join("result.json"), &r.summary())?;
    save_curve_csv(&out.join("curve.csv"), &r.curve)?;
    say(
        quiet,
        format!(
            "A={} energy={} multiplier={} converged={} nonexistence_suspected={}",
            cfg.a, r.energy, r.multiplier, r.converged, r.nonexistence_suspected
        ),
    );
    if r.nonexistence_suspected {
        Ok(Outcome::Flagged)
    } else if !r.converged {
        Err(Error::NonConvergence(format!("constrained solve at A = {} (outputs written)", cfg.a)))
    } else {
        Ok(Outcome::Clean)
    }
}

pub fn sweep(cfg: SweepConfig, out: &Path, seed: Option<u64>, quiet: bool) -> Result<Outcome> {
    let pot = cfg.potential.build()?;
    let areas = cfg.areas()?;
    let solver = with_seed(cfg.solver.clone(), seed);
    let (rows, _) = area_sweep(point(cfg.p_minus), point(cfg.p_plus), &areas, &pot, &solver)?;
    let mut w = csv::Writer::from_path(out.join("table.csv")).map_err(Error::from)?;
    w.write_record(["A", "energy", "multiplier", "slope_fd", "converged", "flagged"]).map_err(Error::from)?;
    for r in &rows {
        w.write_record([
            r.A.to_string(),
            r.energy.to_string(),
            r.multiplier.to_string(),
            r.slope_fd.map(|s| s.to_string()).unwrap_or_default(),
            r.converged.to_string(),
            r.flagged.to_string(),
        ])
        .map_err(Error::from)?;
    }
    w.flush()?;
    let flagged = rows.iter().filter(|r| r.flagged).count();
    let converged = rows.iter().filter(|r| r.converged).count();
    say(quiet, format!("{} areas: {converged} converged, {flagged} flagged", rows.len()));
    Ok(if flagged > 0 { Outcome::Flagged } else { Outcome::Clean })
}

fn homogeneous_lambdas(spec: &PotentialSpec) -> Result<(f64, f64)> {
    match spec {
        PotentialSpec::Homogeneous { lambda1, lambda2 } => {
            spec.build()?;
            Ok((*lambda1, *lambda2))
        }
        _ => Err(Error::InvalidArgument("the homogeneous command needs a homogeneous potential".into())),
    }
}

#[derive(Serialize)]
struct EllipseJson {
    p0: [f64; 2],
    energy: f64,
    area: f64,
    n_vertices: usize,
}

#[derive(Serialize)]
struct BetaJson {
    p0: [f64; 2],
    beta: f64,
    #[serde(rename = "A")]
    a: f64,
    energy: f64,
    n_vertices: usize,
}

pub fn homogeneous(cfg: HomogeneousConfig, out: &Path, quiet: bool) -> Result<Outcome> {
    let (l1, l2) = homogeneous_lambdas(&cfg.potential)?;
    let p0 = point(cfg.p0);
    match cfg.mode {
        HomogeneousMode::Ellipse => {
            let (curve, e) = minimizing_ellipse(p0, l1, l2, cfg.n)?;
            let j = EllipseJson { p0: cfg.p0, energy: e, area: area(&curve), n_vertices: curve.len() };
            write_json(&out.join("result.json"), &j)?;
            save_curve_csv(&out.join("curve.csv"), &curve)?;
            say(quiet, format!("ellipse energy={e}"));
        }
        HomogeneousMode::Beta => {
            let beta = cfg.beta.ok_or_else(|| Error::InvalidArgument("beta mode needs \"beta\"".into()))?;
            let curve = integrate_integral_curve(p0, beta, l1, l2, default_stop_radius(p0))?;
            let pot = cfg.potential.build()?;
            let e = energy(&curve, &pot);
            let j = BetaJson { p0: cfg.p0, beta, a: area(&curve), energy: e, n_vertices: curve.len() };
            write_json(&out.join("result.json"), &j)?;
            save_curve_csv(&out.join("curve.csv"), &curve)?;
            say(quiet, format!("beta={beta} energy={e}"));
        }
        HomogeneousMode::Area => match (cfg.a, &cfg.a_list) {
            (Some(a), None) => {
                let s = solve_homogeneous(p0, a, l1, l2)?;
                write_json(&out.join("result.json"), &s.bundle())?;
                save_curve_csv(&out.join("curve.csv"), &s.curve)?;
                say(quiet, format!("A={a} beta={} energy={}", s.beta, s.energy));
            }
            (None, Some(list)) => {
                let mut rows = Vec::with_capacity(list.len());
                for &a in list {
                    let s = solve_homogeneous(p0, a, l1, l2)?;
                    rows.push(vec![a, s.beta, s.energy, length_area_slope(s.beta, l1, l2)]);
                }
                write_csv_rows(fs::File::create(out.join("table.csv"))?, &["A", "beta", "energy", "dL_dA"], rows)?;
                say(quiet, format!("{} areas written", list.len()));
            }
            _ => return Err(Error::InvalidArgument("area mode needs exactly one of \"A\" and \"A_list\"".into())),
        },
    }
    Ok(Outcome::Clean)
}

pub fn radial(cfg: RadialConfig, out: &Path, quiet: bool) -> Result<Outcome> {
    let b = match &cfg.potential {
        PotentialSpec::RadialQuartic { b, .. } => *b,
        _ => return Err(Error::InvalidArgument("the radial command needs a radial_quartic potential".into())),
    };
    cfg.potential.build()?;
    let neg = cfg.b_negative.as_ref().map(|n| (n.b, n.alpha_gap));
    let (fig, path) = figure1(cfg.r0, cfg.a_tilde, b, neg)?;
    write_json(&out.join("figure1.json"), &fig)?;
    path.write_csv(fs::File::create(out.join("path.csv"))?)?;
    say(
        quiet,
        format!("C1={} threshold={} vertical_extent={} total_cost={}", fig.C1, fig.threshold, fig.vertical_extent, fig.total_cost),
    );
    Ok(Outcome::Clean)
}

#[derive(Serialize)]
struct WaveJson {
    nu: f64,
    multiplier: f64,
    wave_residual: f64,
    hamiltonian: f64,
    hamiltonian_kinetic: f64,
    hamiltonian_potential: f64,
    hamiltonian_tail: f64,
    sqrt2_energy: f64,
    n_points: usize,
}

pub fn wave(cfg: WaveConfig, out: &Path, seed: Option<u64>, quiet: bool) -> Result<Outcome> {
    let pot = cfg.potential.build()?;
    let solver = with_seed(cfg.solver, seed);
    let r = minimize_constrained(point(cfg.p_minus), point(cfg.p_plus), cfg.a, &pot, &solver)?;
    if r.nonexistence_suspected {
        say(quiet, format!("A={} is flagged as suspected non-existence; no profile written", cfg.a));
        return Ok(Outcome::Flagged);
    }
    let profile = match cfg.n_points {
        Some(n) => to_traveling_wave_with(&r, &pot, n),
        None => to_traveling_wave(&r, &pot),
    };
    let profile = match profile {
        Err(Error::BubbleDetected { index }) => {
            say(quiet, format!("curve revisits a well at vertex {index}; no profile written"));
            return Ok(Outcome::Flagged);
        }
        other => other?,
    };
    let h = hamiltonian_energy(&profile, &pot);
    let spec = second_variation_spectrum(&profile, &pot, cfg.k)?;
    let summary = WaveJson {
        nu: profile.nu,
        multiplier: profile.multiplier,
        wave_residual: wave_residual(&profile, &pot)?,
        hamiltonian: h.total(),
        hamiltonian_kinetic: h.kinetic,
        hamiltonian_potential: h.potential,
        hamiltonian_tail: h.tail,
        sqrt2_energy: std::f64::consts::SQRT_2 * r.energy,
        n_points: profile.len(),
    };
    write_json(&out.join("result.json"), &summary)?;
    save_curve_csv(&out.join("curve.csv"), &r.curve)?;
    profile.write_csv(fs::File::create(out.join("profile.csv"))?)?;
    write_json(&out.join("spectrum.json"), &spec)?;
    say(
        quiet,
        format!(
            "nu={} residual={:.3e} H={} zero_mode_alignment={}",
            summary.nu, summary.wave_residual, summary.hamiltonian, spec.zero_mode_alignment
        ),
    );
    Ok(Outcome::Clean)
}
