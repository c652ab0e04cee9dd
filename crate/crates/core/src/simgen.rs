//! Simulation scenarios with known clustering truth.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::GroupedDataset;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::stats::{categorical, std_normal, RngHandle};

/// Common variance of the univariate scenarios.
pub const SIGMA2: f64 = 0.6;

/// Finite Gaussian mixture per group over a shared list of component means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub means: Vec<Vec<f64>>,
    /// One weight row per group over `means`.
    pub weights: Vec<Vec<f64>>,
    pub group_sizes: Vec<usize>,
    /// Component covariance is `variance * I`.
    pub variance: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn dim(&self) -> usize {
        self.means.first().map_or(1, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.means.is_empty() {
            return bad("scenario has no components".into());
        }
        let q = self.dim();
        if self.means.iter().any(|m| m.len() != q || m.iter().any(|v| !v.is_finite())) {
            return bad("component means must be finite and of equal length".into());
        }
        if self.weights.len() != self.group_sizes.len() {
            return bad("one weight row per group required".into());
        }
        for (j, w) in self.weights.iter().enumerate() {
            let s: f64 = w.iter().sum();
            if w.len() != self.means.len() || w.iter().any(|&v| v < 0.0) || (s - 1.0).abs() > 1e-12 {
                return bad(format!("weights of group {} must be a probability vector", j + 1));
            }
        }
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return bad("variance must be positive".into());
        }
        Ok(())
    }
}

/// Simulated dataset with the generating component of every observation.
#[derive(Clone, Debug, PartialEq)]
pub struct Simulated {
    pub spec: ScenarioSpec,
    pub data: GroupedDataset,
    /// Component index per observation, group-major.
    pub truth: Vec<usize>,
}

impl Simulated {
    pub fn truth_partition(&self) -> Partition {
        Partition::from_labels(&self.truth)
    }

    pub fn truth_similarity(&self) -> DMatrix<f64> {
        truth_similarity(&self.truth_partition())
    }

    /// Components generating at least one observation in group `j`.
    pub fn group_components(&self, j: usize) -> Vec<usize> {
        let start: usize = self.spec.group_sizes[..j].iter().sum();
        let mut c: Vec<usize> = self.truth[start..start + self.spec.group_sizes[j]].to_vec();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Labels first, then Gaussian draws around the labelled component.
pub fn generate(spec: &ScenarioSpec) -> Result<Simulated> {
    spec.validate()?;
    let q = spec.dim();
    let root = RngHandle::new(spec.seed, 0);
    let sd = spec.variance.sqrt();
    let mut truth = Vec::new();
    let mut points: Vec<Vec<Vec<f64>>> = Vec::with_capacity(spec.group_sizes.len());
    for (j, (&n, w)) in spec.group_sizes.iter().zip(&spec.weights).enumerate() {
        let mut rng = root.substream(j as u64);
        let mut g = Vec::with_capacity(n);
        for _ in 0..n {
            let k = categorical(w, &mut rng).expect("weights validated");
            truth.push(k);
            g.push(spec.means[k].iter().map(|m| m + sd * std_normal(&mut rng)).collect());
        }
        points.push(g);
    }
    let data = if q == 1 {
        GroupedDataset::univariate(points.into_iter().map(|g| g.into_iter().map(|v| v[0]).collect()).collect())
    } else {
        GroupedDataset::multivariate(
            q,
            points.into_iter().map(|g| g.into_iter().map(DVector::from_vec).collect()).collect(),
        )
    };
    Ok(Simulated { spec: spec.clone(), data, truth })
}

fn univariate_means(m: &[f64]) -> Vec<Vec<f64>> {
    m.iter().map(|&v| vec![v]).collect()
}

/// Two groups with four unshared clusters each.
pub fn s1_case1_spec(n: usize, seed: u64) -> ScenarioSpec {
    let q = 0.25;
    ScenarioSpec {
        name: "s1c1".into(),
        means: univariate_means(&[0.0, 4.0, 8.0, 12.0, -16.0, -12.0, -8.0, -4.0]),
        weights: vec![
            vec![q, q, q, q, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, q, q, q, q],
        ],
        group_sizes: vec![n, n],
        variance: SIGMA2,
        seed,
    }
}

/// Three groups sharing only the cluster at zero.
pub fn s1_case2_spec(n: usize, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "s1c2".into(),
        means: univariate_means(&[-4.0, -2.0, 0.0, 2.0, 4.0]),
        weights: vec![
            vec![0.0, 0.8, 0.2, 0.0, 0.0],
            vec![0.3, 0.0, 0.1, 0.6, 0.0],
            vec![0.0, 0.0, 0.2, 0.0, 0.8],
        ],
        group_sizes: vec![n; 3],
        variance: SIGMA2,
        seed,
    }
}

/// Group sizes for the nested scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NestedSizes {
    /// `n_j = n`.
    Fixed(usize),
    /// `n_j = n * j`.
    Proportional(usize),
}

/// Six groups; group `j` mixes the first `j` clusters equally.
pub fn s1_case3_spec(sizes: NestedSizes, seed: u64) -> ScenarioSpec {
    let means = [0.0, 5.0, 10.0, 13.0, 16.0, 20.0];
    let weights = (1..=6)
        .map(|j| (0..6).map(|k| if k < j { 1.0 / j as f64 } else { 0.0 }).collect())
        .collect();
    let group_sizes = (1..=6)
        .map(|j| match sizes {
            NestedSizes::Fixed(n) => n,
            NestedSizes::Proportional(n) => n * j,
        })
        .collect();
    ScenarioSpec { name: "s1c3".into(), means: univariate_means(&means), weights, group_sizes, variance: SIGMA2, seed }
}

/// Three trivariate groups with identity covariance.
pub fn s2_spec(n: usize, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "s2".into(),
        means: vec![
            vec![-6.0, 4.0, -6.0],
            vec![-3.0, 2.0, -3.0],
            vec![0.0, 0.0, 0.0],
            vec![3.0, -2.0, -3.0],
            vec![6.0, -4.0, -6.0],
        ],
        weights: vec![
            vec![0.2; 5],
            vec![0.3, 0.0, 0.5, 0.2, 0.0],
            vec![0.0, 0.6, 0.4, 0.0, 0.0],
        ],
        group_sizes: vec![n; 3],
        variance: 1.0,
        seed,
    }
}

/// One group, five equally weighted clusters.
pub fn s3_spec(n: usize, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "s3".into(),
        means: univariate_means(&[0.0, 3.0, 6.0, 9.0, 12.0]),
        weights: vec![vec![0.2; 5]],
        group_sizes: vec![n],
        variance: SIGMA2,
        seed,
    }
}

pub fn gen_s1_case1(n: usize, seed: u64) -> Result<Simulated> {
    generate(&s1_case1_spec(n, seed))
}

pub fn gen_s1_case2(n: usize, seed: u64) -> Result<Simulated> {
    generate(&s1_case2_spec(n, seed))
}

pub fn gen_s1_case3(sizes: NestedSizes, seed: u64) -> Result<Simulated> {
    generate(&s1_case3_spec(sizes, seed))
}

pub fn gen_s2(n: usize, seed: u64) -> Result<Simulated> {
    generate(&s2_spec(n, seed))
}

pub fn gen_s3(n: usize, seed: u64) -> Result<Simulated> {
    generate(&s3_spec(n, seed))
}

/// Scenario by short name with its usual sample size when `n` is `None`.
pub fn by_name(name: &str, n: Option<usize>, seed: u64) -> Result<Simulated> {
    match name {
        "s1c1" => gen_s1_case1(n.unwrap_or(200), seed),
        "s1c2" => gen_s1_case2(n.unwrap_or(100), seed),
        "s1c3" => gen_s1_case3(NestedSizes::Fixed(n.unwrap_or(150)), seed),
        "s1c3b" => gen_s1_case3(NestedSizes::Proportional(n.unwrap_or(20)), seed),
        "s2" => gen_s2(n.unwrap_or(100), seed),
        "s3" => gen_s3(n.unwrap_or(300), seed),
        other => Err(Error::Usage(format!(
            "unknown scenario {other:?}; expected s1c1, s1c2, s1c3, s1c3b, s2 or s3"
        ))),
    }
}

/// Binary co-clustering matrix of a partition.
pub fn truth_similarity(p: &Partition) -> DMatrix<f64> {
    let l = p.labels();
    DMatrix::from_fn(l.len(), l.len(), |a, b| if l[a] == l[b] { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Observations;

    #[test]
    fn case1_shape_and_means() {
        let s = gen_s1_case1(200, 5).unwrap();
        assert_eq!(s.data.n_total(), 400);
        assert_eq!(s.truth_partition().n_blocks(), 8);
        let Observations::Univariate(g) = &s.data.obs else { panic!() };
        let m1 = g[0].iter().sum::<f64>() / 200.0;
        let m2 = g[1].iter().sum::<f64>() / 200.0;
        assert!((m1 - 6.0).abs() < 1.0 && (m2 + 10.0).abs() < 1.0, "{m1} {m2}");
        assert_eq!(s, gen_s1_case1(200, 5).unwrap());
    }

    #[test]
    fn case2_occupancy() {
        let s = gen_s1_case2(100, 1).unwrap();
        let occ: Vec<usize> = (0..3).map(|j| s.group_components(j).len()).collect();
        assert_eq!(occ, vec![2, 3, 2]);
        assert!((0..3).all(|j| s.group_components(j).contains(&2)));
    }

    #[test]
    fn nested_groups() {
        let s = gen_s1_case3(NestedSizes::Proportional(40), 2).unwrap();
        assert_eq!(s.data.group_sizes(), vec![40, 80, 120, 160, 200, 240]);
        for j in 0..6 {
            assert_eq!(s.group_components(j), (0..=j).collect::<Vec<_>>());
        }
    }

    #[test]
    fn scenario2_covariance() {
        let s = gen_s2(4000, 3).unwrap();
        let Observations::Multivariate { groups, .. } = &s.data.obs else { panic!() };
        let pts: Vec<&DVector<f64>> =
            groups.iter().flatten().zip(&s.truth).filter(|(_, &k)| k == 2).map(|(p, _)| p).collect();
        let n = pts.len() as f64;
        let mean = pts.iter().fold(DVector::zeros(3), |a, p| a + *p) / n;
        let cov = pts.iter().fold(DMatrix::zeros(3, 3), |a, p| {
            let d = *p - &mean;
            a + &d * d.transpose()
        }) / (n - 1.0);
        assert!((cov - DMatrix::identity(3, 3)).amax() < 0.15);
        assert_eq!(s.group_components(1), vec![0, 2, 3]);
        assert_eq!(s.group_components(2), vec![1, 2]);
    }

    #[test]
    fn similarity_is_binary() {
        let p = Partition::from_labels(&[0, 0, 1]);
        let m = truth_similarity(&p);
        assert_eq!(m[(0, 1)], 1.0);
        assert_eq!(m[(0, 2)], 0.0);
        assert!((0..3).all(|i| m[(i, i)] == 1.0));
    }
}
