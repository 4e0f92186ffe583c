use degeo_core::functionals::{hausdorff, reparam_degenerate_arclength};
use degeo_core::homogeneous::{homogeneous_length, solve_beta_for_area};
use degeo_core::solver::{
    area_sweep, detect_area_leakage, minimize_constrained, minimize_constrained_from, minimize_unconstrained,
    SolverConfig,
};
use degeo_core::{Curve, Potential, Vec2};

fn p0() -> Vec2 {
    Vec2::new(1.0, 0.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn mirror(c: &Curve) -> Curve {
    c.map(|p| Vec2::new(p.x, -p.y)).unwrap()
}

#[test]
fn isotropic_geodesic_is_the_straight_segment() {
    let pot = Potential::homogeneous(1.0, 1.0).unwrap();
    let r = minimize_unconstrained(p0(), Vec2::zeros(), &pot, &SolverConfig::default()).unwrap();
    assert!((r.energy - 0.5).abs() <= 1e-3, "{}", r.energy);
    assert_eq!(r.multiplier, 0.0);
    let seg = Curve::segment(p0(), Vec2::zeros(), 64).unwrap();
    assert!(hausdorff(&r.curve, &seg) < 1e-3);
}

#[test]
fn two_well_geodesic_is_the_horizontal_segment() {
    let pot = Potential::two_well_k(2.0).unwrap();
    let (p, q) = (Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0));
    let r = minimize_unconstrained(p, q, &pot, &SolverConfig::default()).unwrap();
    let seg = Curve::segment(p, q, 64).unwrap();
    assert!(hausdorff(&r.curve, &seg) < 1e-2);
}

#[test]
fn coincident_endpoints_rejected() {
    let pot = Potential::homogeneous(1.0, 1.0).unwrap();
    assert!(minimize_unconstrained(p0(), p0(), &pot, &SolverConfig::default()).is_err());
}

#[test]
fn small_area_matches_closed_form() {
    let pot = Potential::homogeneous(1.0, 2.0).unwrap();
    let cfg = SolverConfig::default();
    let a = 0.05;
    let r = minimize_constrained(p0(), Vec2::zeros(), a, &pot, &cfg).unwrap();
    let exact = homogeneous_length(p0(), solve_beta_for_area(p0(), a, 1.0, 2.0).unwrap(), 1.0, 2.0).unwrap();
    assert!(r.converged && !r.nonexistence_suspected);
    assert!(rel(r.energy, exact) <= 1e-3, "{} {exact}", r.energy);
    assert!((r.area_achieved - a).abs() <= cfg.tol_area * (1.0 + a.abs()));
    assert!(r.el_residual_max <= 1e-2);
    assert!(r.dispersion <= 1e-2 * (1.0 + r.multiplier.abs()));
}

#[test]
fn geodesic_area_gives_zero_multiplier() {
    let pot = Potential::homogeneous(1.0, 2.0).unwrap();
    let cfg = SolverConfig::default();
    let g0 = minimize_unconstrained(p0(), Vec2::zeros(), &pot, &cfg).unwrap();
    let r = minimize_constrained(p0(), Vec2::zeros(), g0.area_achieved, &pot, &cfg).unwrap();
    assert!(r.multiplier.abs() <= 1e-3, "{}", r.multiplier);
    assert!(rel(r.energy, g0.energy) <= 1e-6);
    assert!(!r.nonexistence_suspected);
}

#[test]
fn opposite_areas_are_mirror_images() {
    let pot = Potential::homogeneous(1.0, 2.0).unwrap();
    let cfg = SolverConfig::default();
    let plus = minimize_constrained(p0(), Vec2::zeros(), 0.1, &pot, &cfg).unwrap();
    let minus = minimize_constrained(p0(), Vec2::zeros(), -0.1, &pot, &cfg).unwrap();
    assert!(rel(minus.energy, plus.energy) <= 1e-6, "{} {}", plus.energy, minus.energy);
    assert!((plus.multiplier + minus.multiplier).abs() <= 1e-3);
    assert!(hausdorff(&mirror(&plus.curve), &minus.curve) <= 1e-3);
}

#[test]
fn resolving_from_degenerate_arclength_is_stable() {
    let pot = Potential::homogeneous(1.0, 2.0).unwrap();
    let cfg = SolverConfig::default();
    let r = minimize_constrained(p0(), Vec2::zeros(), 0.1, &pot, &cfg).unwrap();
    let start = reparam_degenerate_arclength(&r.curve, &pot, cfg.n_vertices).unwrap();
    let again = minimize_constrained_from(&start, 0.1, &pot, &cfg, r.multiplier).unwrap();
    assert!(again.converged);
    assert!(rel(again.energy, r.energy) <= 1e-6, "{} {}", r.energy, again.energy);
}

#[test]
fn moderate_area_keeps_area_away_from_wells() {
    let pot = Potential::homogeneous(1.0, 1.0).unwrap();
    let cfg = SolverConfig::default();
    let r = minimize_constrained(p0(), Vec2::zeros(), 0.15, &pot, &cfg).unwrap();
    assert!(r.converged && !r.nonexistence_suspected);
    let report = detect_area_leakage(&r, &pot, &cfg);
    assert!(!report.suspected);
    let inner = report.levels.last().unwrap().area_in.abs();
    assert!(inner <= 1e-4, "{inner}");
    assert!(r.well_deposits.iter().all(|&d| d == 0.0));
}

#[test]
fn slope_stays_below_the_vertical_rate() {
    let pot = Potential::homogeneous(1.0, 2.0).unwrap();
    let areas = [0.4, 0.6, 0.8, 1.0, 1.2];
    let (rows, _) = area_sweep(p0(), Vec2::zeros(), &areas, &pot, &SolverConfig::default()).unwrap();
    let lams: Vec<f64> = rows.iter().map(|r| r.multiplier).collect();
    assert!(lams.iter().all(|&l| l > 0.0 && l < 3.0), "{lams:?}");
    assert!(lams.windows(2).all(|w| w[1] > w[0]), "{lams:?}");
    assert!(rows.iter().all(|r| r.slope_agrees() != Some(false)));
}

#[test]
fn isotropic_sweep_has_flat_slope_at_geodesic_area() {
    let pot = Potential::homogeneous(1.0, 1.0).unwrap();
    let areas: Vec<f64> = (-2..=2).map(|i| 0.02 * i as f64).collect();
    let (rows, _) = area_sweep(p0(), Vec2::zeros(), &areas, &pot, &SolverConfig::default()).unwrap();
    let mid = rows[2].slope_fd.unwrap();
    assert!(mid.abs() <= 1e-3, "{mid}");
}
