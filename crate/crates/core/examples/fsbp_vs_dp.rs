//! One group from a five-component mixture with unequal weights, fitted
//! with a fractional stick-breaking mixture and with a Dirichlet process
//! mixture.

use plaid::posterior::{ari, point_estimate};
use plaid::sampler::{run_dp_chain, run_fsbp_chain, FsbpConfig};
use plaid::simgen::gen_s3;
use plaid::stats::NigParams;

fn main() -> plaid::Result<()> {
    let sim = gen_s3(300, 4)?;
    let truth = sim.truth_partition();
    let cfg = FsbpConfig::univariate(NigParams::default()).iterations(2000, 2000).seed(4);
    for (name, trace) in [("FSBP", run_fsbp_chain(&sim.data, &cfg)?), ("DP", run_dp_chain(&sim.data, &cfg)?)] {
        let (_, point) = point_estimate(&trace)?;
        let k = trace.cluster_counts();
        let mean_k = k.iter().sum::<usize>() as f64 / k.len() as f64;
        let mean_p = trace.p.iter().map(|r| r[0]).sum::<f64>() / trace.len() as f64;
        println!(
            "{name:<5} point clusters {}  posterior mean clusters {:.2}  ARI {:.3}  mean p {:.3}",
            point.n_blocks(),
            mean_k,
            ari(&point, &truth)?,
            mean_p
        );
    }
    Ok(())
}
