//! Grouped observations.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations of one kind, split by group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Observations {
    Univariate(Vec<Vec<f64>>),
    Multivariate { dim: usize, groups: Vec<Vec<DVector<f64>>> },
    Counts(Vec<Vec<u64>>),
}

/// J groups of observations with their external group ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupedDataset {
    pub group_names: Vec<String>,
    pub obs: Observations,
}

impl GroupedDataset {
    pub fn univariate(groups: Vec<Vec<f64>>) -> Self {
        Self { group_names: default_names(groups.len()), obs: Observations::Univariate(groups) }
    }

    pub fn multivariate(dim: usize, groups: Vec<Vec<DVector<f64>>>) -> Self {
        Self {
            group_names: default_names(groups.len()),
            obs: Observations::Multivariate { dim, groups },
        }
    }

    pub fn counts(groups: Vec<Vec<u64>>) -> Self {
        Self { group_names: default_names(groups.len()), obs: Observations::Counts(groups) }
    }

    pub fn n_groups(&self) -> usize {
        match &self.obs {
            Observations::Univariate(g) => g.len(),
            Observations::Multivariate { groups, .. } => groups.len(),
            Observations::Counts(g) => g.len(),
        }
    }

    pub fn group_len(&self, j: usize) -> usize {
        match &self.obs {
            Observations::Univariate(g) => g[j].len(),
            Observations::Multivariate { groups, .. } => groups[j].len(),
            Observations::Counts(g) => g[j].len(),
        }
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        (0..self.n_groups()).map(|j| self.group_len(j)).collect()
    }

    pub fn n_total(&self) -> usize {
        self.group_sizes().iter().sum()
    }

    /// Offset of each group's first observation in group-major order.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.group_sizes()
            .into_iter()
            .map(|n| {
                let o = acc;
                acc += n;
                o
            })
            .collect()
    }

    pub fn kind(&self) -> &'static str {
        match &self.obs {
            Observations::Univariate(_) => "univariate",
            Observations::Multivariate { .. } => "multivariate",
            Observations::Counts(_) => "count",
        }
    }

    /// Mean count per group.
    pub fn count_means(&self) -> Option<Vec<f64>> {
        match &self.obs {
            Observations::Counts(g) => Some(
                g.iter()
                    .map(|c| {
                        if c.is_empty() {
                            1.0
                        } else {
                            c.iter().sum::<u64>() as f64 / c.len() as f64
                        }
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.group_names.len() != self.n_groups() {
            return Err(Error::Validation("group names do not match group count".into()));
        }
        match &self.obs {
            Observations::Univariate(g) => {
                for (j, grp) in g.iter().enumerate() {
                    if let Some(i) = grp.iter().position(|v| !v.is_finite()) {
                        return Err(Error::Validation(format!(
                            "non-finite value in group {} at position {}",
                            self.group_names[j],
                            i + 1
                        )));
                    }
                }
            }
            Observations::Multivariate { dim, groups } => {
                for (j, grp) in groups.iter().enumerate() {
                    for (i, v) in grp.iter().enumerate() {
                        if v.len() != *dim || v.iter().any(|x| !x.is_finite()) {
                            return Err(Error::Validation(format!(
                                "bad observation in group {} at position {}",
                                self.group_names[j],
                                i + 1
                            )));
                        }
                    }
                }
            }
            Observations::Counts(_) => {}
        }
        Ok(())
    }
}

fn default_names(j: usize) -> Vec<String> {
    (1..=j).map(|i| i.to_string()).collect()
}
