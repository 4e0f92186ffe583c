//! Symmetric matrices with half-bandwidth 2 and their lowest eigenpairs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const BAND: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct BandedSym {
    /// `lower[r][d]` holds the entry `(r, r − 1 − d)`.
    diag: Vec<f64>,
    lower: Vec<[f64; BAND]>,
}

impl BandedSym {
    pub fn zeros(n: usize) -> Self {
        BandedSym { diag: vec![0.0; n], lower: vec![[0.0; BAND]; n] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Adds `v` at `(r, c)` and `(c, r)`; `|r − c| ≤ 2`.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let (r, c) = if r >= c { (r, c) } else { (c, r) };
        match r - c {
            0 => self.diag[r] += v,
            d if d <= BAND => self.lower[r][d - 1] += v,
            _ => panic!("entry ({r}, {c}) outside the band"),
        }
    }

    #[cfg(test)]
    fn get(&self, r: usize, c: usize) -> f64 {
        let (r, c) = if r >= c { (r, c) } else { (c, r) };
        match r - c {
            0 => self.diag[r],
            d if d <= BAND => self.lower[r][d - 1],
            _ => 0.0,
        }
    }

    /// `D A D` for diagonal `D = diag(s)`.
    pub fn scale(&mut self, s: &[f64]) {
        for r in 0..self.dim() {
            self.diag[r] *= s[r] * s[r];
            for d in 1..=BAND.min(r) {
                self.lower[r][d - 1] *= s[r] * s[r - d];
            }
        }
    }

    #[cfg(test)]
    fn mul(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for r in 0..n {
            let mut acc = self.diag[r] * x[r];
            for d in 1..=BAND {
                if r >= d {
                    acc += self.lower[r][d - 1] * x[r - d];
                }
                if r + d < n {
                    acc += self.lower[r + d][d - 1] * x[r + d];
                }
            }
            y[r] = acc;
        }
    }

    /// Lower bound on the spectrum from Gershgorin discs.
    pub fn gershgorin_min(&self) -> f64 {
        (0..self.dim())
            .map(|r| {
                let off: f64 = (1..=BAND)
                    .map(|d| {
                        let below = if r >= d { self.lower[r][d - 1].abs() } else { 0.0 };
                        let above = if r + d < self.dim() { self.lower[r + d][d - 1].abs() } else { 0.0 };
                        below + above
                    })
                    .sum();
                self.diag[r] - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Cholesky factor of `A − σI`, or `None` if it is not positive definite.
    fn cholesky(&self, sigma: f64) -> Option<Cholesky> {
        let n = self.dim();
        let mut diag = vec![0.0; n];
        let mut lower = vec![[0.0; BAND]; n];
        for i in 0..n {
            for d in (1..=BAND.min(i)).rev() {
                let j = i - d;
                let mut v = self.lower[i][d - 1];
                for k in j.saturating_sub(BAND).max(i.saturating_sub(BAND))..j {
                    v -= lower[i][i - k - 1] * lower[j][j - k - 1];
                }
                lower[i][d - 1] = v / diag[j];
            }
            let mut v = self.diag[i] - sigma;
            for d in 1..=BAND.min(i) {
                v -= lower[i][d - 1] * lower[i][d - 1];
            }
            if !(v > 0.0) {
                return None;
            }
            diag[i] = v.sqrt();
        }
        Some(Cholesky { diag, lower })
    }

    /// The `k` smallest eigenvalues in increasing order with orthonormal
    /// eigenvectors, by shift-invert Lanczos with full reorthogonalization.
    /// Runs restart in the complement of the vectors found so far until no
    /// new eigenvalue enters the lowest `k`, which recovers multiplicities.
    pub fn lowest_eigenpairs(&self, k: usize, tol: f64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        let k = k.clamp(1, n);
        let lo = self.gershgorin_min();
        let mut gap = 1e-3 * (1.0 + lo.abs());
        let (sigma, chol) = loop {
            let s = lo - gap;
            if let Some(c) = self.cholesky(s) {
                break (s, c);
            }
            gap *= 10.0;
            if !gap.is_finite() {
                return Err(Error::NonConvergence("shifted factorization failed".into()));
            }
        };

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut found: Vec<(f64, Vec<f64>)> = vec![];
        loop {
            let locked: Vec<Vec<f64>> = found.iter().map(|p| p.1.clone()).collect();
            let want = k.min(n - locked.len());
            if want == 0 {
                break;
            }
            let kth = if found.len() >= k { found[k - 1].0 } else { f64::INFINITY };
            let fresh = lanczos(&chol, sigma, want, tol, &locked, &mut rng);
            let entered = fresh.iter().any(|p| p.0 < kth - tol * (1.0 + kth.abs()));
            found.extend(fresh);
            found.sort_by(|a, b| a.0.total_cmp(&b.0));
            found.truncate(k);
            if !entered {
                break;
            }
        }
        Ok(found.into_iter().unzip())
    }
}

/// Lanczos on `(A − σI)⁻¹` restricted to the complement of `locked`.
fn lanczos(
    chol: &Cholesky,
    sigma: f64,
    k: usize,
    tol: f64,
    locked: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, Vec<f64>)> {
    let n = chol.diag.len();
    let k = k.min(n - locked.len());
    let project = |w: &mut [f64], against: &[Vec<f64>]| {
        for q in against {
            let c = dot(w, q);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    };
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project(&mut v, locked);
    normalize(&mut v);
    let mut basis: Vec<Vec<f64>> = vec![];
    let (mut alpha, mut beta): (Vec<f64>, Vec<f64>) = (vec![], vec![]);
    let mut w = vec![0.0; n];
    loop {
        chol.solve(&v, &mut w);
        let a = dot(&w, &v);
        basis.push(v.clone());
        alpha.push(a);
        for _ in 0..2 {
            project(&mut w, locked);
            project(&mut w, &basis);
        }
        let b = norm(&w);
        let m = basis.len();
        let exhausted = m + locked.len() == n || b <= 1e-14 * a.abs().max(1e-300);
        if exhausted || (m >= k && m.is_multiple_of(10)) {
            let (theta, s) = tridiagonal_eigen(&alpha, &beta);
            let top: Vec<usize> = (0..k.min(m)).map(|i| m - 1 - i).collect();
            if exhausted || top.iter().all(|&i| (b * s[(m - 1, i)]).abs() <= tol * theta[i].abs()) {
                return top
                    .iter()
                    .map(|&i| {
                        let mut x = vec![0.0; n];
                        for (j, q) in basis.iter().enumerate() {
                            x.iter_mut().zip(q).for_each(|(xv, qv)| *xv += s[(j, i)] * qv);
                        }
                        normalize(&mut x);
                        (sigma + 1.0 / theta[i], x)
                    })
                    .collect();
            }
        }
        beta.push(b);
        v = w.iter().map(|x| x / b).collect();
    }
}

struct Cholesky {
    diag: Vec<f64>,
    lower: Vec<[f64; BAND]>,
}

impl Cholesky {
    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut v = b[i];
            for d in 1..=BAND.min(i) {
                v -= self.lower[i][d - 1] * x[i - d];
            }
            x[i] = v / self.diag[i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for d in 1..=BAND {
                if i + d < n {
                    v -= self.lower[i + d][d - 1] * x[i + d];
                }
            }
            x[i] = v / self.diag[i];
        }
    }
}

/// Eigenvalues in increasing order and eigenvectors (columns) of the
/// tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |r, c| match r.abs_diff(c) {
        0 => alpha[r],
        1 => beta[r.min(c)],
        _ => 0.0,
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let s = norm(a);
    a.iter_mut().for_each(|x| *x /= s);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_band(n: usize, seed: u64) -> BandedSym {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandedSym::zeros(n);
        for r in 0..n {
            a.add(r, r, rng.gen_range(-3.0..3.0));
            for d in 1..=BAND.min(r) {
                a.add(r, r - d, rng.gen_range(-1.0..1.0));
            }
        }
        a
    }

    fn dense(a: &BandedSym) -> DMatrix<f64> {
        DMatrix::from_fn(a.dim(), a.dim(), |r, c| a.get(r, c))
    }

    #[test]
    fn matches_dense_eigensolver() {
        for (n, seed) in [(5, 1), (40, 2), (301, 3)] {
            let a = random_band(n, seed);
            let mut exact: Vec<f64> = SymmetricEigen::new(dense(&a)).eigenvalues.iter().copied().collect();
            exact.sort_by(f64::total_cmp);
            let k = 4.min(n);
            let (vals, vecs) = a.lowest_eigenpairs(k, 1e-12).unwrap();
            for i in 0..k {
                assert!((vals[i] - exact[i]).abs() <= 1e-8 * (1.0 + exact[i].abs()), "{n}: {vals:?} {exact:?}");
                let mut y = vec![0.0; n];
                a.mul(&vecs[i], &mut y);
                let res: f64 = y.iter().zip(&vecs[i]).map(|(p, q)| (p - vals[i] * q).powi(2)).sum::<f64>().sqrt();
                assert!(res <= 1e-6, "{n} {i}: {res}");
            }
        }
    }

    #[test]
    fn discrete_laplacian() {
        let n = 200;
        let mut a = BandedSym::zeros(n);
        for r in 0..n {
            a.add(r, r, 2.0);
            if r > 0 {
                a.add(r, r - 1, -1.0);
            }
        }
        let (vals, _) = a.lowest_eigenpairs(3, 1e-12).unwrap();
        for (j, v) in vals.iter().enumerate() {
            let t = (j + 1) as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64);
            assert!((v - 4.0 * t.sin().powi(2)).abs() <= 1e-12, "{j}: {v}");
        }
    }

    #[test]
    fn repeated_eigenvalues_are_all_found() {
        let n = 120;
        let mut a = BandedSym::zeros(n);
        for r in 0..n {
            a.add(r, r, 2.0);
            if r >= 2 {
                a.add(r, r - 2, -1.0);
            }
        }
        let (vals, _) = a.lowest_eigenpairs(4, 1e-12).unwrap();
        let t = |j: f64| 4.0 * (j * std::f64::consts::PI / (2.0 * 61.0)).sin().powi(2);
        let expect = [t(1.0), t(1.0), t(2.0), t(2.0)];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() <= 1e-10, "{vals:?}");
        }
    }

    #[test]
    fn scaling_and_product() {
        let a = random_band(9, 4);
        let mut b = a.clone();
        let s: Vec<f64> = (1..=9).map(|i| i as f64).collect();
        b.scale(&s);
        for r in 0..9 {
            for c in 0..9 {
                assert!((b.get(r, c) - a.get(r, c) * s[r] * s[c]).abs() <= 1e-12);
            }
        }
        let x: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; 9];
        a.mul(&x, &mut y);
        let yd = dense(&a) * nalgebra::DVector::from_vec(x);
        assert!(y.iter().zip(yd.iter()).all(|(p, q)| (p - q).abs() <= 1e-12));
    }
}
