//! Closed-form FSBP results next to their Dirichlet-process counterparts:
//! partition probabilities, new-cluster probabilities, the variance of a
//! set mass and expected cluster counts.

use plaid::partition::enumerate_partitions;
use plaid::theory::{
    dp_eppf, dp_expected_clusters, fsbp_eppf, fsbp_expected_clusters, fsbp_mean_and_variance,
    fsbp_new_cluster_prob, FsbpParams,
};

fn main() -> plaid::Result<()> {
    let params = FsbpParams::new(0.5, 1.0)?;

    println!("partitions of 4 items, p = 0.5, gamma = 1");
    let mut total = 0.0;
    for part in enumerate_partitions(4) {
        let v = fsbp_eppf(&part, &params)?;
        total += v;
        println!("  {:<14} {:.6}  (dp {:.6})", part.to_string(), v, dp_eppf(&part, 1.0));
    }
    println!("  total {total:.12}");

    println!("\nprobability that draw i starts a new cluster");
    for i in [2, 3, 5, 10, 25, 50] {
        let f = fsbp_new_cluster_prob(i, &params)?;
        println!("  i = {i:>2}: fsbp {f:.6}  dp {:.6}", 1.0 / i as f64);
    }

    println!("\nvariance of G(A) with H(A) = 0.5");
    for p in [0.3, 0.5, 0.8, 1.0] {
        let (_, v) = fsbp_mean_and_variance(0.5, &FsbpParams::new(p, 1.0)?)?;
        println!("  p = {p:.1}: {v:.6}");
    }

    println!("\nexpected clusters among n draws");
    for n in [10, 50, 100] {
        println!(
            "  n = {n:>3}: fsbp {:.3}  dp {:.3}",
            fsbp_expected_clusters(n, &params)?,
            dp_expected_clusters(n, 1.0)?
        );
    }
    Ok(())
}
