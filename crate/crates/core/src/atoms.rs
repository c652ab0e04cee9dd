//! Atom parameters and base measures.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::{NigParams, NiwParams};

/// Parameters of one mixture component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Atom {
    Univariate { mu: f64, var: f64 },
    Multivariate { mu: DVector<f64>, cov: DMatrix<f64> },
}

pub type AtomSet = Vec<Atom>;

impl Atom {
    pub fn location(&self) -> f64 {
        match self {
            Atom::Univariate { mu, .. } => *mu,
            Atom::Multivariate { mu, .. } => mu[0],
        }
    }

    /// Flattened parameters: mean entries then variance / row-major covariance.
    pub fn to_flat(&self) -> Vec<f64> {
        match self {
            Atom::Univariate { mu, var } => vec![*mu, *var],
            Atom::Multivariate { mu, cov } => {
                let q = mu.len();
                let mut v = mu.iter().copied().collect::<Vec<_>>();
                for r in 0..q {
                    for c in 0..q {
                        v.push(cov[(r, c)]);
                    }
                }
                v
            }
        }
    }

    pub fn from_flat(q: usize, v: &[f64]) -> Option<Atom> {
        if q == 1 && v.len() == 2 {
            return Some(Atom::Univariate { mu: v[0], var: v[1] });
        }
        if v.len() != q + q * q {
            return None;
        }
        Some(Atom::Multivariate {
            mu: DVector::from_column_slice(&v[..q]),
            cov: DMatrix::from_row_slice(q, q, &v[q..]),
        })
    }
}

/// Base measure H from which atoms are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BaseMeasure {
    Nig(NigParams),
    Niw(NiwParams),
}

impl BaseMeasure {
    /// N(0, 1) locations with unit variance; used by the prior simulators.
    pub fn standard() -> Self {
        BaseMeasure::Nig(NigParams { m0: 0.0, k0: 1.0, a_sig: 2.0, b_sig: 1.0 })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BaseMeasure::Nig(p) => p.validate(),
            BaseMeasure::Niw(p) => p.validate(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BaseMeasure::Nig(_) => 1,
            BaseMeasure::Niw(p) => p.dim(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Atom {
        match self {
            BaseMeasure::Nig(p) => {
                let (mu, var) = p.sample(rng);
                Atom::Univariate { mu, var }
            }
            BaseMeasure::Niw(p) => {
                let (mu, cov) = p.sample(rng);
                Atom::Multivariate { mu, cov }
            }
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> AtomSet {
        (0..k).map(|_| self.sample(rng)).collect()
    }
}
