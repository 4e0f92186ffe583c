use std::path::Path;

use degeo_core::solver::SolverConfig;
use degeo_core::{Error, PotentialSpec, Result, Vec2};
use serde::Deserialize;

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn point(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub potential: PotentialSpec,
    pub p_minus: [f64; 2],
    pub p_plus: [f64; 2],
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output_dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaRange {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl AreaRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.n == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidArgument("A_range needs finite ends and n ≥ 1".into()));
        }
        if self.n == 1 {
            return Ok(vec![self.start]);
        }
        Ok((0..self.n).map(|i| self.start + (self.stop - self.start) * i as f64 / (self.n - 1) as f64).collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub potential: PotentialSpec,
    pub p_minus: [f64; 2],
    pub p_plus: [f64; 2],
    #[serde(rename = "A_list", default)]
    pub a_list: Option<Vec<f64>>,
    #[serde(rename = "A_range", default)]
    pub a_range: Option<AreaRange>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl SweepConfig {
    pub fn areas(&self) -> Result<Vec<f64>> {
        let v = match (&self.a_list, &self.a_range) {
            (Some(l), None) => l.clone(),
            (None, Some(r)) => r.values()?,
            _ => return Err(Error::InvalidArgument("give exactly one of A_list and A_range".into())),
        };
        if v.is_empty() || v.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("area list must be nonempty and finite".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Deserialize, Default, Clone, Copy, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum HomogeneousMode {
    /// Minimizer from `p0` to the well for a target area.
    #[default]
    Area,
    /// Integral curve for a given angle.
    Beta,
    /// Closed minimizing ellipse through `p0`.
    Ellipse,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousConfig {
    pub potential: PotentialSpec,
    pub p0: [f64; 2],
    #[serde(default)]
    pub mode: HomogeneousMode,
    #[serde(rename = "A", default)]
    pub a: Option<f64>,
    #[serde(rename = "A_list", default)]
    pub a_list: Option<Vec<f64>>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_ellipse_vertices")]
    pub n: usize,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_ellipse_vertices() -> usize {
    4096
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BNegativeConfig {
    pub b: f64,
    pub alpha_gap: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    pub potential: PotentialSpec,
    /// `R₀ = |p₀ − center|²`.
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(rename = "A_tilde")]
    pub a_tilde: f64,
    #[serde(default)]
    pub b_negative: Option<BNegativeConfig>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    pub potential: PotentialSpec,
    pub p_minus: [f64; 2],
    pub p_plus: [f64; 2],
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub n_points: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_k() -> usize {
    6
}
