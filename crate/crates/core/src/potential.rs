//! Potentials `W` and the conformal factor `F = sqrt(W)`.
//!
//! Three built-in families are provided: the homogeneous quadratic
//! `λ₁²p₁² + λ₂²p₂²`, the radial quartic `r² + b r⁴`, and the two-well
//! composite built from `g(r) = r² + (k²−1) r⁴` inside unit discs around
//! `(±1, 0)` and `k²` outside. User fields are supported through
//! [`CustomField`], either as a polynomial (serializable) or as closures.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Scalar field closure.
pub type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
/// Vector field closure.
pub type VectorFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
/// Matrix field closure.
pub type MatrixFn = Arc<dyn Fn(Vec2) -> Mat2 + Send + Sync>;

/// Relative step for finite-difference derivatives of closure potentials.
pub const FD_STEP: f64 = 1e-5;

/// A user-supplied field.
#[derive(Clone)]
pub enum CustomField {
    /// `W(p) = Σ c · p₁^i · p₂^j` with analytic derivatives.
    Polynomial { terms: Vec<(f64, u32, u32)> },
    /// Arbitrary closure; missing derivatives fall back to central differences.
    Closure {
        w: ScalarFn,
        grad: Option<VectorFn>,
        hess: Option<MatrixFn>,
    },
}

impl fmt::Debug for CustomField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CustomField::Polynomial { terms } => {
                f.debug_struct("Polynomial").field("terms", terms).finish()
            }
            CustomField::Closure { grad, hess, .. } => f
                .debug_struct("Closure")
                .field("analytic_grad", &grad.is_some())
                .field("analytic_hess", &hess.is_some())
                .finish(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum PotentialKind {
    Homogeneous { lambda1: f64, lambda2: f64 },
    RadialQuartic { b: f64, center: Vec2, working_radius: f64 },
    TwoWellComposite { k: f64 },
    Custom(CustomField),
}

/// Local quadratic data of a well: `W ≈ λ₁²q₁² + λ₂²q₂²` in the eigenframe.
#[derive(Clone, Debug, PartialEq)]
pub struct Well {
    pub location: Vec2,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Columns are the unit eigenvectors of the Hessian, ordered with the lambdas.
    pub frame: Mat2,
}

impl Well {
    /// Length-per-area rate of a vertical segment over this well.
    pub fn vertical_rate(&self) -> f64 {
        self.lambda1 + self.lambda2
    }
}

/// An immutable potential with its declared wells.
#[derive(Clone, Debug)]
pub struct Potential {
    kind: PotentialKind,
    wells: Vec<Vec2>,
    trust_radius: f64,
}

impl Potential {
    /// `W(p) = λ₁²p₁² + λ₂²p₂²`, single well at the origin.
    pub fn homogeneous(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 > 0.0 && lambda2 > 0.0) {
            return Err(Error::NonPositiveEigenvalue(lambda1, lambda2));
        }
        Ok(Potential {
            kind: PotentialKind::Homogeneous { lambda1, lambda2 },
            wells: vec![Vec2::zeros()],
            trust_radius: 0.1,
        })
    }

    /// `W = r² + b r⁴` about `center`, validated on the unit working disc.
    pub fn radial_quartic(b: f64, center: Vec2) -> Result<Self> {
        Self::radial_quartic_in_disc(b, center, 1.0)
    }

    /// Radial quartic validated on a disc of the given radius. Negative `b`
    /// is accepted as long as `1 + b R² > 0` on that disc.
    pub fn radial_quartic_in_disc(b: f64, center: Vec2, working_radius: f64) -> Result<Self> {
        if !b.is_finite() || !(working_radius > 0.0) {
            return Err(Error::InvalidCoefficient { b, radius: working_radius });
        }
        if b < 0.0 && 1.0 + b * working_radius * working_radius <= 0.0 {
            return Err(Error::InvalidCoefficient { b, radius: working_radius });
        }
        Ok(Potential {
            kind: PotentialKind::RadialQuartic { b, center, working_radius },
            wells: vec![center],
            trust_radius: 0.1,
        })
    }

    /// Two-well composite with wells at `(−1,0)` and `(1,0)`.
    pub fn two_well_k(k: f64) -> Result<Self> {
        if !(k > 1.0) || !k.is_finite() {
            return Err(Error::InvalidK(k));
        }
        Ok(Potential {
            kind: PotentialKind::TwoWellComposite { k },
            wells: vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)],
            trust_radius: 0.1,
        })
    }

    /// Polynomial potential with declared wells.
    pub fn polynomial(terms: Vec<(f64, u32, u32)>, wells: Vec<Vec2>) -> Result<Self> {
        Self::custom(CustomField::Polynomial { terms }, wells)
    }

    /// Closure potential; derivatives by central differences.
    pub fn from_fn<W>(w: W, wells: Vec<Vec2>) -> Result<Self>
    where
        W: Fn(Vec2) -> f64 + Send + Sync + 'static,
    {
        Self::custom(
            CustomField::Closure { w: Arc::new(w), grad: None, hess: None },
            wells,
        )
    }

    pub fn custom(field: CustomField, wells: Vec<Vec2>) -> Result<Self> {
        if wells.len() > 2 {
            return Err(Error::InvalidArgument("at most two wells are supported".into()));
        }
        Ok(Potential { kind: PotentialKind::Custom(field), wells, trust_radius: 0.1 })
    }

    /// Radius around each well inside which the quadratic Taylor form is trusted.
    pub fn with_trust_radius(mut self, r: f64) -> Self {
        self.trust_radius = r;
        self
    }

    pub fn trust_radius(&self) -> f64 {
        self.trust_radius
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            PotentialKind::Homogeneous { .. } => "homogeneous",
            PotentialKind::RadialQuartic { .. } => "radial_quartic",
            PotentialKind::TwoWellComposite { .. } => "two_well_k",
            PotentialKind::Custom(_) => "custom",
        }
    }

    pub fn wells(&self) -> &[Vec2] {
        &self.wells
    }

    /// Index of the declared well at `p`, if any (exact up to 1e-12).
    pub fn well_at(&self, p: Vec2) -> Option<usize> {
        self.wells.iter().position(|w| (w - p).norm() <= 1e-12)
    }

    /// Distance between the two wells, or 1 for single-well potentials.
    pub fn well_separation(&self) -> f64 {
        if self.wells.len() == 2 {
            (self.wells[0] - self.wells[1]).norm()
        } else {
            1.0
        }
    }

    pub fn w(&self, p: Vec2) -> f64 {
        match &self.kind {
            PotentialKind::Homogeneous { lambda1, lambda2 } => {
                lambda1 * lambda1 * p.x * p.x + lambda2 * lambda2 * p.y * p.y
            }
            PotentialKind::RadialQuartic { b, center, .. } => {
                let r2 = (p - center).norm_squared();
                r2 + b * r2 * r2
            }
            PotentialKind::TwoWellComposite { k } => {
                let (d, _) = self.nearest_two_well(p);
                let r2 = d.norm_squared();
                if r2 <= 1.0 {
                    r2 + (k * k - 1.0) * r2 * r2
                } else {
                    k * k
                }
            }
            PotentialKind::Custom(CustomField::Polynomial { terms }) => poly_eval(terms, p),
            PotentialKind::Custom(CustomField::Closure { w, .. }) => w(p),
        }
    }

    pub fn grad_w(&self, p: Vec2) -> Vec2 {
        match &self.kind {
            PotentialKind::Homogeneous { lambda1, lambda2 } => Vec2::new(
                2.0 * lambda1 * lambda1 * p.x,
                2.0 * lambda2 * lambda2 * p.y,
            ),
            PotentialKind::RadialQuartic { b, center, .. } => {
                let d = p - center;
                d * (2.0 + 4.0 * b * d.norm_squared())
            }
            PotentialKind::TwoWellComposite { k } => {
                let (d, _) = self.nearest_two_well(p);
                let r2 = d.norm_squared();
                if r2 <= 1.0 {
                    d * (2.0 + 4.0 * (k * k - 1.0) * r2)
                } else {
                    Vec2::zeros()
                }
            }
            PotentialKind::Custom(CustomField::Polynomial { terms }) => poly_grad(terms, p),
            PotentialKind::Custom(CustomField::Closure { w, grad, .. }) => match grad {
                Some(g) => g(p),
                None => fd_grad(w.as_ref(), p),
            },
        }
    }

    pub fn hess_w(&self, p: Vec2) -> Mat2 {
        match &self.kind {
            PotentialKind::Homogeneous { lambda1, lambda2 } => Mat2::new(
                2.0 * lambda1 * lambda1,
                0.0,
                0.0,
                2.0 * lambda2 * lambda2,
            ),
            PotentialKind::RadialQuartic { b, center, .. } => {
                radial_quartic_hessian(p - center, *b)
            }
            PotentialKind::TwoWellComposite { k } => {
                let (d, _) = self.nearest_two_well(p);
                if d.norm_squared() <= 1.0 {
                    radial_quartic_hessian(d, k * k - 1.0)
                } else {
                    Mat2::zeros()
                }
            }
            PotentialKind::Custom(CustomField::Polynomial { terms }) => poly_hess(terms, p),
            PotentialKind::Custom(CustomField::Closure { w, hess, .. }) => match hess {
                Some(h) => h(p),
                None => fd_hess(w.as_ref(), p),
            },
        }
    }

    /// Conformal factor `F = sqrt(W)`.
    pub fn f(&self, p: Vec2) -> f64 {
        self.w(p).max(0.0).sqrt()
    }

    /// `∇F = ∇W / (2F)`; zero where `F` vanishes.
    pub fn grad_f(&self, p: Vec2) -> Vec2 {
        let f = self.f(p);
        if f > 0.0 {
            self.grad_w(p) / (2.0 * f)
        } else {
            Vec2::zeros()
        }
    }

    /// `F` and `∇F` in one call.
    pub fn f_and_grad(&self, p: Vec2) -> (f64, Vec2) {
        let f = self.f(p);
        if f > 0.0 {
            (f, self.grad_w(p) / (2.0 * f))
        } else {
            (f, Vec2::zeros())
        }
    }

    /// Eigen-data of the Hessian at a declared well, with `λᵢ = sqrt(eigᵢ / 2)`
    /// ordered `λ₁ ≤ λ₂`.
    pub fn well_frame(&self, index: usize) -> Result<Well> {
        let location = *self.wells.get(index).ok_or(Error::NoSuchWell(index))?;
        let h = self.hess_w(location);
        let sym = (h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let (mut i0, mut i1) = (0, 1);
        if eig.eigenvalues[0] > eig.eigenvalues[1] {
            std::mem::swap(&mut i0, &mut i1);
        }
        let (e0, e1) = (eig.eigenvalues[i0], eig.eigenvalues[i1]);
        if e0 <= 1e-10 {
            return Err(Error::DegenerateHessian(e0));
        }
        let mut c0: Vec2 = eig.eigenvectors.column(i0).into_owned();
        let mut c1: Vec2 = eig.eigenvectors.column(i1).into_owned();
        c0.normalize_mut();
        c1.normalize_mut();
        // right-handed frame, first column pointing into x ≥ 0 when possible
        if c0.x < 0.0 || (c0.x == 0.0 && c0.y < 0.0) {
            c0 = -c0;
        }
        if c0.x * c1.y - c0.y * c1.x < 0.0 {
            c1 = -c1;
        }
        Ok(Well {
            location,
            lambda1: (e0 / 2.0).sqrt(),
            lambda2: (e1 / 2.0).sqrt(),
            frame: Mat2::from_columns(&[c0, c1]),
        })
    }

    /// Checks the structural invariants: `W = 0` at wells, positive definite
    /// Hessians there, `W ≥ 0` on a sample grid, and `W > 0` on a far circle.
    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.wells.iter().enumerate() {
            let v = self.w(*w);
            if v != 0.0 {
                return Err(Error::InvalidArgument(format!("W(well {i}) = {v:e} is not zero")));
            }
            self.well_frame(i)?;
        }
        let center = self.well_center();
        let far = self.far_radius();
        let grid_half = match self.kind {
            PotentialKind::RadialQuartic { working_radius, .. } => working_radius.min(far),
            _ => far,
        };
        for i in 0..=40 {
            for j in 0..=40 {
                let p = center
                    + Vec2::new(
                        grid_half * (2.0 * i as f64 / 40.0 - 1.0),
                        grid_half * (2.0 * j as f64 / 40.0 - 1.0),
                    );
                if let PotentialKind::RadialQuartic { working_radius, center: c, .. } = self.kind {
                    if (p - c).norm() > working_radius {
                        continue;
                    }
                }
                if self.w(p) < 0.0 {
                    return Err(Error::InvalidArgument(format!("W < 0 at {p:?}")));
                }
            }
        }
        let ring = match self.kind {
            PotentialKind::RadialQuartic { b, working_radius, .. } if b < 0.0 => working_radius,
            _ => far,
        };
        for i in 0..360 {
            let t = i as f64 * std::f64::consts::TAU / 360.0;
            let p = center + ring * Vec2::new(t.cos(), t.sin());
            if self.w(p) <= 0.0 {
                return Err(Error::InvalidArgument(format!("W vanishes far from the wells at {p:?}")));
            }
        }
        Ok(())
    }

    /// Radius of the circle used as a proxy for behaviour at infinity.
    pub fn far_radius(&self) -> f64 {
        let diam = if self.wells.len() == 2 { self.well_separation() } else { 1.0 };
        10.0 * diam
    }

    fn well_center(&self) -> Vec2 {
        if self.wells.is_empty() {
            return Vec2::zeros();
        }
        self.wells.iter().fold(Vec2::zeros(), |a, w| a + w) / self.wells.len() as f64
    }

    fn nearest_two_well(&self, p: Vec2) -> (Vec2, usize) {
        let dm = p - self.wells[0];
        let dp = p - self.wells[1];
        if dm.norm_squared() <= dp.norm_squared() {
            (dm, 0)
        } else {
            (dp, 1)
        }
    }

    /// Serializable description; closure potentials have none.
    pub fn to_spec(&self) -> Result<PotentialSpec> {
        Ok(match &self.kind {
            PotentialKind::Homogeneous { lambda1, lambda2 } => {
                PotentialSpec::Homogeneous { lambda1: *lambda1, lambda2: *lambda2 }
            }
            PotentialKind::RadialQuartic { b, center, working_radius } => PotentialSpec::RadialQuartic {
                b: *b,
                center: [center.x, center.y],
                working_radius: Some(*working_radius),
            },
            PotentialKind::TwoWellComposite { k } => PotentialSpec::TwoWellK { k: *k },
            PotentialKind::Custom(CustomField::Polynomial { terms }) => PotentialSpec::Custom {
                terms: terms.iter().map(|&(c, i, j)| (c, i, j)).collect(),
                wells: self.wells.iter().map(|w| [w.x, w.y]).collect(),
            },
            PotentialKind::Custom(CustomField::Closure { .. }) => {
                return Err(Error::InvalidArgument(
                    "closure potentials cannot be serialized".into(),
                ))
            }
        })
    }
}

/// JSON description `{"kind": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Homogeneous {
        lambda1: f64,
        lambda2: f64,
    },
    RadialQuartic {
        b: f64,
        center: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        working_radius: Option<f64>,
    },
    #[serde(alias = "two_well_composite")]
    TwoWellK {
        k: f64,
    },
    /// Polynomial terms `(coefficient, power of p₁, power of p₂)`.
    Custom {
        terms: Vec<(f64, u32, u32)>,
        wells: Vec<[f64; 2]>,
    },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        match self {
            PotentialSpec::Homogeneous { lambda1, lambda2 } => Potential::homogeneous(*lambda1, *lambda2),
            PotentialSpec::RadialQuartic { b, center, working_radius } => Potential::radial_quartic_in_disc(
                *b,
                Vec2::new(center[0], center[1]),
                working_radius.unwrap_or(1.0),
            ),
            PotentialSpec::TwoWellK { k } => Potential::two_well_k(*k),
            PotentialSpec::Custom { terms, wells } => Potential::polynomial(
                terms.clone(),
                wells.iter().map(|w| Vec2::new(w[0], w[1])).collect(),
            ),
        }
    }
}

impl TryFrom<&PotentialSpec> for Potential {
    type Error = Error;
    fn try_from(s: &PotentialSpec) -> Result<Self> {
        s.build()
    }
}

fn radial_quartic_hessian(d: Vec2, b: f64) -> Mat2 {
    let r2 = d.norm_squared();
    Mat2::identity() * (2.0 + 4.0 * b * r2) + d * d.transpose() * (8.0 * b)
}

fn powi(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

fn poly_eval(terms: &[(f64, u32, u32)], p: Vec2) -> f64 {
    terms.iter().map(|&(c, i, j)| c * powi(p.x, i) * powi(p.y, j)).sum()
}

fn poly_grad(terms: &[(f64, u32, u32)], p: Vec2) -> Vec2 {
    let mut g = Vec2::zeros();
    for &(c, i, j) in terms {
        if i > 0 {
            g.x += c * i as f64 * powi(p.x, i - 1) * powi(p.y, j);
        }
        if j > 0 {
            g.y += c * j as f64 * powi(p.x, i) * powi(p.y, j - 1);
        }
    }
    g
}

fn poly_hess(terms: &[(f64, u32, u32)], p: Vec2) -> Mat2 {
    let mut h = Mat2::zeros();
    for &(c, i, j) in terms {
        if i > 1 {
            h[(0, 0)] += c * (i * (i - 1)) as f64 * powi(p.x, i - 2) * powi(p.y, j);
        }
        if j > 1 {
            h[(1, 1)] += c * (j * (j - 1)) as f64 * powi(p.x, i) * powi(p.y, j - 2);
        }
        if i > 0 && j > 0 {
            let v = c * (i * j) as f64 * powi(p.x, i - 1) * powi(p.y, j - 1);
            h[(0, 1)] += v;
            h[(1, 0)] += v;
        }
    }
    h
}

fn fd_step(p: Vec2) -> f64 {
    FD_STEP * p.norm().max(1.0)
}

fn fd_grad(w: &(dyn Fn(Vec2) -> f64 + Send + Sync), p: Vec2) -> Vec2 {
    let h = fd_step(p);
    let ex = Vec2::new(h, 0.0);
    let ey = Vec2::new(0.0, h);
    Vec2::new((w(p + ex) - w(p - ex)) / (2.0 * h), (w(p + ey) - w(p - ey)) / (2.0 * h))
}

fn fd_hess(w: &(dyn Fn(Vec2) -> f64 + Send + Sync), p: Vec2) -> Mat2 {
    let h = fd_step(p);
    let ex = Vec2::new(h, 0.0);
    let ey = Vec2::new(0.0, h);
    let w0 = w(p);
    let hxx = (w(p + ex) - 2.0 * w0 + w(p - ex)) / (h * h);
    let hyy = (w(p + ey) - 2.0 * w0 + w(p - ey)) / (h * h);
    let hxy = (w(p + ex + ey) - w(p + ex - ey) - w(p - ex + ey) + w(p - ex - ey)) / (4.0 * h * h);
    Mat2::new(hxx, hxy, hxy, hyy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_hess_oracle(pot: &Potential, p: Vec2) -> Mat2 {
        let h = 1e-4;
        let mut m = Mat2::zeros();
        for c in 0..2 {
            let mut e = Vec2::zeros();
            e[c] = h;
            let col = (pot.grad_w(p + e) - pot.grad_w(p - e)) / (2.0 * h);
            m.set_column(c, &col);
        }
        m
    }

    fn builtins() -> Vec<Potential> {
        vec![
            Potential::homogeneous(1.0, 2.0).unwrap(),
            Potential::homogeneous(0.7, 3.1).unwrap(),
            Potential::radial_quartic(1.0, Vec2::zeros()).unwrap(),
            Potential::radial_quartic(3.0, Vec2::new(-1.0, 0.0)).unwrap(),
            Potential::two_well_k(2.0).unwrap(),
            Potential::two_well_k(4.0).unwrap(),
        ]
    }

    #[test]
    fn homogeneous_values() {
        let p = Potential::homogeneous(1.0, 1.0).unwrap();
        assert_eq!(p.w(Vec2::new(1.0, 0.0)), 1.0);
        let p = Potential::homogeneous(2.0, 3.0).unwrap();
        assert_eq!(p.w(Vec2::new(1.0, 1.0)), 13.0);
        assert!(matches!(
            Potential::homogeneous(0.0, 1.0),
            Err(Error::NonPositiveEigenvalue(..))
        ));
        assert!(Potential::homogeneous(1.0, -2.0).is_err());
    }

    #[test]
    fn homogeneous_hessian_eigenvalues_match_finite_differences() {
        let p = Potential::homogeneous(1.0, 2.0).unwrap();
        let fd = fd_hess_oracle(&p, Vec2::zeros());
        let mut e: Vec<f64> = SymmetricEigen::new(fd).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((e[0] - 2.0).abs() < 1e-8 && (e[1] - 8.0).abs() < 1e-8, "{e:?}");
        let h = p.hess_w(Vec2::zeros());
        assert_eq!(h, Mat2::new(2.0, 0.0, 0.0, 8.0));
    }

    #[test]
    fn radial_quartic_values() {
        let p = Potential::radial_quartic(1.0, Vec2::zeros()).unwrap();
        assert_eq!(p.w(Vec2::new(1.0, 0.0)), 2.0);
        let p = Potential::radial_quartic(3.0, Vec2::new(-1.0, 0.0)).unwrap();
        assert_eq!(p.w(Vec2::zeros()), 4.0);
        let p = Potential::radial_quartic(-0.5, Vec2::zeros()).unwrap();
        assert_eq!(p.w(Vec2::new(0.0, 1.0)), 0.5);
        assert!(matches!(
            Potential::radial_quartic(-1.0, Vec2::zeros()),
            Err(Error::InvalidCoefficient { .. })
        ));
        assert!(Potential::radial_quartic_in_disc(-0.2, Vec2::zeros(), 2.0).is_ok());
        assert!(Potential::radial_quartic_in_disc(-0.3, Vec2::zeros(), 2.0).is_err());
    }

    #[test]
    fn two_well_values() {
        let p = Potential::two_well_k(2.0).unwrap();
        assert_eq!(p.w(Vec2::zeros()), 4.0);
        assert_eq!(p.w(Vec2::new(-1.0, 0.0)), 0.0);
        assert_eq!(p.w(Vec2::new(1.0, 0.0)), 0.0);
        let p = Potential::two_well_k(3.0).unwrap();
        assert_eq!(p.w(Vec2::new(5.0, 5.0)), 9.0);
        assert!(matches!(Potential::two_well_k(1.0), Err(Error::InvalidK(_))));
        assert!(Potential::two_well_k(0.5).is_err());
    }

    #[test]
    fn two_well_boundary_derivative_is_inside_value() {
        let p = Potential::two_well_k(2.0).unwrap();
        let q = Vec2::new(-1.0, 1.0);
        // on the boundary circle of the left disc: one-sided inside value
        let g = p.grad_w(q);
        assert!((g - Vec2::new(0.0, 2.0 + 4.0 * 3.0)).norm() < 1e-12);
        assert!(p.grad_w(Vec2::new(-1.0, 1.0 + 1e-9)).norm() == 0.0);
    }

    #[test]
    fn well_frames() {
        let p = Potential::homogeneous(1.0, 2.0).unwrap();
        let w = p.well_frame(0).unwrap();
        assert!((w.lambda1 - 1.0).abs() < 1e-14 && (w.lambda2 - 2.0).abs() < 1e-14);
        assert!((w.frame - Mat2::identity()).norm() < 1e-12);

        let p = Potential::radial_quartic(1.0, Vec2::zeros()).unwrap();
        let fd = fd_hess_oracle(&p, Vec2::zeros());
        assert!((fd - Mat2::identity() * 2.0).norm() < 1e-6);
        let w = p.well_frame(0).unwrap();
        assert!((w.lambda1 - 1.0).abs() < 1e-12 && (w.lambda2 - 1.0).abs() < 1e-12);

        assert!(matches!(p.well_frame(3), Err(Error::NoSuchWell(3))));
    }

    #[test]
    fn custom_rotated_quadratic_frame() {
        // closed-form eigenvalues of [[2,4],[4,10]]: 6 ± sqrt(32)
        let (e_lo, e_hi) = (6.0 - 32f64.sqrt(), 6.0 + 32f64.sqrt());
        let field = |p: Vec2| p.x * p.x + 4.0 * p.x * p.y + 5.0 * p.y * p.y;
        let fdpot = Potential::from_fn(field, vec![Vec2::zeros()]).unwrap();
        let poly =
            Potential::polynomial(vec![(1.0, 2, 0), (4.0, 1, 1), (5.0, 0, 2)], vec![Vec2::zeros()])
                .unwrap();
        for pot in [&fdpot, &poly] {
            let w = pot.well_frame(0).unwrap();
            let (h1, h2) = (2.0 * w.lambda1 * w.lambda1, 2.0 * w.lambda2 * w.lambda2);
            assert!((h1 - e_lo).abs() / e_lo < 1e-6, "{h1} vs {e_lo}");
            assert!((h2 - e_hi).abs() / e_hi < 1e-8);
            let ortho = w.frame.transpose() * w.frame;
            assert!((ortho - Mat2::identity()).norm() < 1e-12);
            // columns are eigenvectors of the Hessian
            let h = pot.hess_w(Vec2::zeros());
            let v = w.frame.column(1).into_owned();
            assert!((h * v - v * e_hi).norm() < 1e-5);
        }
    }

    #[test]
    fn degenerate_hessian_rejected() {
        let pot = Potential::polynomial(vec![(1.0, 2, 0), (1.0, 0, 4)], vec![Vec2::zeros()]).unwrap();
        assert!(matches!(pot.well_frame(0), Err(Error::DegenerateHessian(_))));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for pot in builtins() {
            let mut checked = 0;
            while checked < 100 {
                let p = Vec2::new(rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5));
                if let PotentialKind::TwoWellComposite { .. } = pot.kind() {
                    // skip the Lipschitz seams
                    let r = (p - pot.wells()[0]).norm().min((p - pot.wells()[1]).norm());
                    if (r - 1.0).abs() < 1e-3 {
                        continue;
                    }
                }
                let h = 1e-6;
                let fd = Vec2::new(
                    (pot.w(p + Vec2::new(h, 0.0)) - pot.w(p - Vec2::new(h, 0.0))) / (2.0 * h),
                    (pot.w(p + Vec2::new(0.0, h)) - pot.w(p - Vec2::new(0.0, h))) / (2.0 * h),
                );
                let g = pot.grad_w(p);
                let scale = g.norm().max(1.0);
                assert!((fd - g).norm() / scale < 1e-6, "{} at {p:?}: {fd:?} vs {g:?}", pot.kind_name());
                checked += 1;
            }
        }
    }

    #[test]
    fn f_positive_away_from_wells() {
        for pot in builtins() {
            for i in 0..=60 {
                for j in 0..=60 {
                    let p = Vec2::new(-3.0 + 0.1 * i as f64, -3.0 + 0.1 * j as f64);
                    let dmin = pot.wells().iter().map(|w| (p - w).norm()).fold(f64::INFINITY, f64::min);
                    let f = pot.f(p);
                    assert!(f >= 0.0);
                    if dmin > 1e-6 {
                        assert!(f > 0.0, "{} vanishes at {p:?}", pot.kind_name());
                    }
                }
            }
            pot.validate().unwrap();
        }
    }

    #[test]
    fn two_well_reflection_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pot = Potential::two_well_k(3.0).unwrap();
        for _ in 0..500 {
            let p = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            assert_eq!(pot.w(p), pot.w(Vec2::new(-p.x, p.y)));
        }
    }

    #[test]
    fn homogeneous_degree_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pot = Potential::homogeneous(1.3, 0.4).unwrap();
        for _ in 0..50 {
            let p = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            for t in [0.5, 2.0, 10.0] {
                let lhs = pot.w(p * t);
                let rhs = t * t * pot.w(p);
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"kind":"homogeneous","params":{"lambda1":1.0,"lambda2":2.0}}"#;
        let spec: PotentialSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec, PotentialSpec::Homogeneous { lambda1: 1.0, lambda2: 2.0 });
        let spec: PotentialSpec =
            serde_json::from_str(r#"{"kind":"radial_quartic","params":{"b":3,"center":[-1,0]}}"#).unwrap();
        assert_eq!(spec.build().unwrap().w(Vec2::zeros()), 4.0);
        let spec: PotentialSpec = serde_json::from_str(r#"{"kind":"two_well_k","params":{"k":2}}"#).unwrap();
        let pot = spec.build().unwrap();
        assert_eq!(pot.to_spec().unwrap(), spec);
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"kind":"nope","params":{}}"#).is_err());
        let cl = Potential::from_fn(|p: Vec2| p.norm_squared(), vec![Vec2::zeros()]).unwrap();
        assert!(cl.to_spec().is_err());
    }
}
