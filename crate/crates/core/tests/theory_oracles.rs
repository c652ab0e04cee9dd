//! Closed forms against hand-derived values and prior simulation.

use std::io::Write;

use plaid::atoms::BaseMeasure;
use plaid::partition::Partition;
use plaid::atoms::Atom;
use plaid::processes::{simulate_asp, simulate_fsbp, simulate_pam, PSpec, TruncationConfig};
use plaid::stats::RngHandle;
use plaid::theory::{
    conditional_mean_weight, dp_eppf, dp_expected_clusters, expected_pam_weight, fsbp_eppf,
    fsbp_expected_clusters, fsbp_mean_and_variance, fsbp_new_cluster_prob, FsbpParams,
};

fn params(p: f64, g: f64) -> FsbpParams {
    FsbpParams::new(p, g).unwrap()
}

/// Tie probability of two draws: E[f^2] / (1 - E[(1-f)^2]) with f = p V, V ~ Beta(1, gamma).
fn tie_probability(p: f64, g: f64) -> f64 {
    let m1 = p / (1.0 + g);
    let m2 = 2.0 * p * p / ((1.0 + g) * (2.0 + g));
    m2 / (1.0 - (1.0 - 2.0 * m1 + m2))
}

#[test]
fn second_draw_is_new_with_one_minus_tie_probability() {
    for &(p, g) in &[(0.5, 1.0), (0.3, 2.0), (0.9, 0.5), (1.0, 1.7)] {
        let v = fsbp_new_cluster_prob(2, &params(p, g)).unwrap();
        assert!((v - (1.0 - tie_probability(p, g))).abs() < 1e-14, "p={p} g={g}");
    }
    assert!((fsbp_new_cluster_prob(2, &params(0.5, 1.0)).unwrap() - 0.8).abs() < 1e-15);
}

#[test]
fn two_point_eppf() {
    let prm = params(0.5, 1.0);
    let joined = Partition::from_labels(&[0, 0]);
    let split = Partition::from_labels(&[0, 1]);
    assert!((fsbp_eppf(&joined, &prm).unwrap() - 0.2).abs() < 1e-14);
    assert!((fsbp_eppf(&split, &prm).unwrap() - 0.8).abs() < 1e-14);
    assert!((fsbp_expected_clusters(2, &prm).unwrap() - 1.8).abs() < 1e-14);
}

#[test]
fn dp_special_cases() {
    // Ewens: one block of three has probability 2 / ((1 + g)(2 + g)).
    let g = 1.0;
    let one = Partition::from_labels(&[0, 0, 0]);
    assert!((dp_eppf(&one, g) - 1.0 / 3.0).abs() < 1e-13);
    assert!((fsbp_eppf(&one, &params(1.0, g)).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((dp_expected_clusters(3, 1.0).unwrap() - (1.0 + 0.5 + 1.0 / 3.0)).abs() < 1e-15);
    for i in 2..12 {
        let dp = 2.0 / (2.0 + i as f64 - 1.0);
        assert!((fsbp_new_cluster_prob(i, &params(1.0, 2.0)).unwrap() - dp).abs() < 1e-12);
    }
}

#[test]
fn set_mass_variance() {
    let (m, v) = fsbp_mean_and_variance(0.5, &params(0.5, 1.0)).unwrap();
    assert_eq!(m, 0.5);
    assert!((v - 0.05).abs() < 1e-15);
    let (_, v) = fsbp_mean_and_variance(0.5, &params(1.0, 1.0)).unwrap();
    assert!((v - 0.125).abs() < 1e-15);
    for &(p, g, h) in &[(0.2, 0.7, 0.3), (0.8, 3.0, 0.9)] {
        let (_, v) = fsbp_mean_and_variance(h, &params(p, g)).unwrap();
        assert!((v - h * (1.0 - h) * tie_probability(p, g)).abs() < 1e-14);
    }
}

#[test]
fn conditional_weights() {
    assert!((conditional_mean_weight(1, &[0.4, 0.5], 0.5).unwrap() - 0.2).abs() < 1e-15);
    assert!((conditional_mean_weight(2, &[0.4, 0.5], 0.5).unwrap() - 0.5 * 0.5 * 0.8).abs() < 1e-15);
    assert!(conditional_mean_weight(3, &[0.4, 0.5], 0.5).is_err());
}

/// E[p^r] for p ~ Beta(a, b).
fn beta_moment(a: f64, b: f64, r: usize) -> f64 {
    (0..r).map(|i| (a + i as f64) / (a + b + i as f64)).product()
}

/// Mean k-th weight with random p: E[p c (1 - p c)^(k-1)], c = 1 / (1 + gamma).
fn mean_weight_by_moments(k: usize, g: f64, a: f64, b: f64) -> f64 {
    let c = 1.0 / (1.0 + g);
    let mut binom = 1.0;
    let mut s = 0.0;
    for m in 0..k {
        s += binom * (-c).powi(m as i32) * beta_moment(a, b, m + 1);
        binom = binom * (k - 1 - m) as f64 / (m + 1) as f64;
    }
    c * s
}

fn simulated_mean_weights(p: &PSpec, gamma: f64, draws: usize, seed: u64) -> Vec<(f64, f64)> {
    let cfg = TruncationConfig { n_atoms: 8, n_groups: 1, n_obs_per_group: 0 };
    let base = BaseMeasure::standard();
    let mut rng = RngHandle::new(seed, 0);
    let mut sum = [0.0f64; 5];
    let mut sq = [0.0f64; 5];
    for _ in 0..draws {
        let d = simulate_pam(p, 1.0, gamma, &cfg, &base, &mut rng).unwrap();
        for k in 0..5 {
            let w = d.group_weights[0][k];
            sum[k] += w;
            sq[k] += w * w;
        }
    }
    let n = draws as f64;
    (0..5)
        .map(|k| {
            let m = sum[k] / n;
            (m, ((sq[k] / n - m * m) / n).sqrt())
        })
        .collect()
}

#[test]
fn mean_weight_with_fixed_p_matches_prior_draws() {
    let sims = simulated_mean_weights(&PSpec::Fixed(vec![0.5]), 1.0, 100_000, 31);
    for (k, (m, se)) in sims.iter().enumerate() {
        let closed = expected_pam_weight(k + 1, 1.0, 1.0, 1.0).unwrap();
        assert!((m - closed).abs() < 4.0 * se, "k={} closed {closed} simulated {m}±{se}", k + 1);
    }
}

#[test]
fn mean_weight_with_random_p_against_prior_draws() {
    let sims = simulated_mean_weights(&PSpec::Beta { a: 1.0, b: 1.0 }, 1.0, 100_000, 32);
    let mut plug_in_ok = true;
    for (k, (m, se)) in sims.iter().enumerate() {
        let exact = mean_weight_by_moments(k + 1, 1.0, 1.0, 1.0);
        assert!((m - exact).abs() < 4.0 * se, "k={} moments {exact} simulated {m}±{se}", k + 1);
        let closed = expected_pam_weight(k + 1, 1.0, 1.0, 1.0).unwrap();
        let ok = (m - closed).abs() < 4.0 * se;
        plug_in_ok &= ok;
        let _ = writeln!(
            std::io::stderr().lock(),
            "k={} simulated {m:.5}±{se:.5} moments {exact:.5} mean-p closed form {closed:.5} {}",
            k + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(
        std::io::stderr().lock(),
        "closed-form mean weight with Beta(1, 1) p vs prior draws: {}",
        if plug_in_ok { "PASS" } else { "FAIL (exact only for fixed p)" }
    );
}

#[test]
fn conditional_mean_weight_matches_asp_draws() {
    let beta_prime = [0.3, 0.5, 0.2, 0.6, 0.4, 0.35, 0.7, 0.25, 0.5, 0.45, 0.5, 0.5];
    let atoms: Vec<Atom> = (0..beta_prime.len()).map(|k| Atom::Univariate { mu: k as f64, var: 1.0 }).collect();
    let mut rng = RngHandle::new(33, 0);
    let draws = 100_000;
    let mut sum = [0.0f64; 10];
    let mut sq = [0.0f64; 10];
    for _ in 0..draws {
        let d = simulate_asp(0.7, 2.0, &beta_prime, &atoms, &mut rng).unwrap();
        for k in 0..10 {
            let w = d.group_weights[0][k];
            sum[k] += w;
            sq[k] += w * w;
        }
    }
    for k in 0..10 {
        let m = sum[k] / draws as f64;
        let se = ((sq[k] / draws as f64 - m * m) / draws as f64).sqrt();
        let v = conditional_mean_weight(k + 1, &beta_prime, 0.7).unwrap();
        assert!((m - v).abs() < 4.0 * se, "k={} {v} vs {m}±{se}", k + 1);
    }
}

#[test]
fn set_mass_variance_matches_fsbp_draws() {
    let base = BaseMeasure::standard();
    let mut rng = RngHandle::new(34, 0);
    let draws = 10_000;
    let masses: Vec<f64> = (0..draws)
        .map(|_| {
            let d = simulate_fsbp(0.5, 1.0, 200, &base, &mut rng).unwrap();
            d.atoms.iter().zip(&d.group_weights[0]).filter(|(a, _)| a.location() < 0.0).map(|(_, w)| w).sum()
        })
        .collect();
    let n = draws as f64;
    let m = masses.iter().sum::<f64>() / n;
    let dev: Vec<f64> = masses.iter().map(|x| (x - m).powi(2)).collect();
    let var = dev.iter().sum::<f64>() / (n - 1.0);
    let se = (dev.iter().map(|d| (d - var).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let (_, v) = fsbp_mean_and_variance(0.5, &params(0.5, 1.0)).unwrap();
    assert!((var - v).abs() < 4.0 * se, "{v} vs {var}±{se}");
}
