//! Conjugate normal-inverse-gamma and normal-inverse-Wishart updates.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dist::{ln_gamma_variate, sample_gamma, std_normal};
use crate::error::{domain, ensure_positive, Result};

/// Normal-inverse-gamma prior: `sigma^2 ~ IG(a_sig, b_sig)`, `mu | sigma^2 ~ N(m0, sigma^2 / k0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    pub m0: f64,
    pub k0: f64,
    pub a_sig: f64,
    pub b_sig: f64,
}

impl Default for NigParams {
    /// `NIG(0, 0.1, 3, 1)`.
    fn default() -> Self {
        Self { m0: 0.0, k0: 0.1, a_sig: 3.0, b_sig: 1.0 }
    }
}

impl NigParams {
    pub fn new(m0: f64, k0: f64, a_sig: f64, b_sig: f64) -> Result<Self> {
        let p = Self { m0, k0, a_sig, b_sig };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.m0.is_finite() {
            return domain("NIG location must be finite");
        }
        ensure_positive("NIG k0", self.k0)?;
        ensure_positive("NIG a_sig", self.a_sig)?;
        ensure_positive("NIG b_sig", self.b_sig)
    }

    /// Posterior hyperparameters given the data.
    pub fn posterior(&self, data: &[f64]) -> NigParams {
        let n = data.len() as f64;
        if data.is_empty() {
            return *self;
        }
        let mean = data.iter().sum::<f64>() / n;
        let ss: f64 = data.iter().map(|y| (y - mean) * (y - mean)).sum();
        let kn = self.k0 + n;
        NigParams {
            m0: (self.k0 * self.m0 + n * mean) / kn,
            k0: kn,
            a_sig: self.a_sig + 0.5 * n,
            b_sig: self.b_sig + 0.5 * ss + self.k0 * n * (mean - self.m0).powi(2) / (2.0 * kn),
        }
    }

    /// Draw `(mu, sigma^2)` from this distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let var = self.b_sig / ln_gamma_variate(self.a_sig, rng).exp();
        let var = var.clamp(f64::MIN_POSITIVE, f64::MAX);
        let mu = self.m0 + (var / self.k0).sqrt() * std_normal(rng);
        (mu, var)
    }
}

/// Draw `(mu, sigma^2)` from the NIG posterior; empty data gives a prior draw.
pub fn sample_nig_posterior<R: Rng + ?Sized>(
    prior: &NigParams,
    data: &[f64],
    rng: &mut R,
) -> Result<(f64, f64)> {
    prior.validate()?;
    Ok(prior.posterior(data).sample(rng))
}

/// Normal-inverse-Wishart prior: `Sigma ~ IW(v0, Psi)`, `mu | Sigma ~ N(m0, Sigma / k0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NiwParams {
    pub m0: DVector<f64>,
    pub k0: f64,
    pub v0: f64,
    pub psi: DMatrix<f64>,
}

impl NiwParams {
    /// Zero mean, `k0 = 0.1`, `v0 = q + 1`, identity scale.
    pub fn standard(q: usize) -> Self {
        Self { m0: DVector::zeros(q), k0: 0.1, v0: q as f64 + 1.0, psi: DMatrix::identity(q, q) }
    }

    pub fn new(m0: DVector<f64>, k0: f64, v0: f64, psi: DMatrix<f64>) -> Result<Self> {
        let p = Self { m0, k0, v0, psi };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.m0.len()
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.dim();
        if q == 0 || self.psi.nrows() != q || self.psi.ncols() != q {
            return domain("NIW dimensions inconsistent");
        }
        ensure_positive("NIW k0", self.k0)?;
        if !(self.v0 > q as f64 - 1.0) {
            return domain(format!("NIW v0 must exceed q-1, got {}", self.v0));
        }
        if (&self.psi - self.psi.transpose()).abs().max() > 1e-9 * (1.0 + self.psi.abs().max()) {
            return domain("NIW scale matrix not symmetric");
        }
        if self.psi.clone().cholesky().is_none() {
            return domain("NIW scale matrix not positive definite");
        }
        Ok(())
    }

    pub fn posterior(&self, data: &[DVector<f64>]) -> NiwParams {
        if data.is_empty() {
            return self.clone();
        }
        let q = self.dim();
        let n = data.len() as f64;
        let mut mean = DVector::zeros(q);
        for y in data {
            mean += y;
        }
        mean /= n;
        let mut scatter = DMatrix::zeros(q, q);
        for y in data {
            let d = y - &mean;
            scatter += &d * d.transpose();
        }
        let kn = self.k0 + n;
        let dm = &mean - &self.m0;
        let psi = &self.psi + scatter + (&dm * dm.transpose()) * (self.k0 * n / kn);
        NiwParams {
            m0: (&self.m0 * self.k0 + mean * n) / kn,
            k0: kn,
            v0: self.v0 + n,
            psi: symmetrize(psi),
        }
    }

    /// Draw `(mu, Sigma)` from this distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (DVector<f64>, DMatrix<f64>) {
        let cov = sample_inverse_wishart(self.v0, &self.psi, rng);
        let l = cholesky_lower(&(&cov / self.k0));
        let z = DVector::from_fn(self.dim(), |_, _| std_normal(rng));
        (&self.m0 + l * z, cov)
    }
}

pub fn sample_niw_posterior<R: Rng + ?Sized>(
    prior: &NiwParams,
    data: &[DVector<f64>],
    rng: &mut R,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    prior.validate()?;
    if let Some(y) = data.iter().find(|y| y.len() != prior.dim()) {
        return domain(format!("observation of length {} for q={}", y.len(), prior.dim()));
    }
    Ok(prior.posterior(data).sample(rng))
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn cholesky_lower(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut jitter = 0.0;
    let scale = m.diagonal().abs().max().max(f64::MIN_POSITIVE);
    loop {
        let mut a = m.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += jitter;
        }
        if let Some(c) = a.cholesky() {
            return c.l();
        }
        jitter = if jitter == 0.0 { scale * 1e-12 } else { jitter * 10.0 };
    }
}

/// Inverse-Wishart draw via the Bartlett decomposition of the matching Wishart.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(
    dof: f64,
    psi: &DMatrix<f64>,
    rng: &mut R,
) -> DMatrix<f64> {
    let q = psi.nrows();
    let psi_inv = psi
        .clone()
        .try_inverse()
        .expect("scale matrix must be invertible");
    let l = cholesky_lower(&symmetrize(psi_inv));
    let mut a = DMatrix::zeros(q, q);
    for i in 0..q {
        let chi2 = 2.0 * sample_gamma(0.5 * (dof - i as f64), 1.0, rng).expect("dof > q-1");
        a[(i, i)] = chi2.sqrt();
        for j in 0..i {
            a[(i, j)] = std_normal(rng);
        }
    }
    // W = (L A)(L A)^T, so W^{-1} = (L A)^{-T} (L A)^{-1}.
    let la = l * a;
    let inv = la
        .solve_lower_triangular(&DMatrix::identity(q, q))
        .expect("triangular factor is nonsingular");
    symmetrize(inv.transpose() * inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RngHandle;

    #[test]
    fn nig_posterior_hyperparameters() {
        let prior = NigParams::new(0.0, 0.1, 3.0, 1.0).unwrap();
        let post = prior.posterior(&[1.0, 2.0, 3.0]);
        assert!((post.m0 - 6.0 / 3.1).abs() < 1e-12);
        assert!((post.k0 - 3.1).abs() < 1e-12);
        assert!((post.a_sig - 4.5).abs() < 1e-12);
        // b + 0.5*2 + 0.1*3*4/(2*3.1)
        assert!((post.b_sig - (1.0 + 1.0 + 1.2 / 6.2)).abs() < 1e-12);
    }

    #[test]
    fn nig_concentrates() {
        let prior = NigParams::new(0.0, 0.1, 3.0, 1.0).unwrap();
        let data = vec![5.0; 10_000];
        let mut rng = RngHandle::new(9, 0);
        let (mu, var) = sample_nig_posterior(&prior, &data, &mut rng).unwrap();
        assert!((mu - 5.0).abs() < 0.01);
        assert!(var < 0.01);
    }

    #[test]
    fn iw_draw_is_spd() {
        let mut rng = RngHandle::new(10, 0);
        let psi = DMatrix::identity(3, 3);
        for _ in 0..200 {
            let s = sample_inverse_wishart(4.0, &psi, &mut rng);
            assert!(s.clone().cholesky().is_some());
            assert!((&s - s.transpose()).abs().max() == 0.0);
        }
    }

    #[test]
    fn niw_validation() {
        let bad = NiwParams {
            m0: DVector::zeros(2),
            k0: 1.0,
            v0: 0.5,
            psi: DMatrix::identity(2, 2),
        };
        assert!(bad.validate().is_err());
    }
}
