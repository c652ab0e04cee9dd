//! Two groups with four clusters each and none in common. Fits the plaid
//! atoms model and its no-skipping special case, then reports which
//! clusters each group owns.
//!
//! ```text
//! cargo run --release --example two_group_fit -- [burn-in] [kept]
//! ```

use plaid::posterior::{ari, cluster_report, common_unique_from_weights};
use plaid::sampler::{run_chain, PamConfig};
use plaid::simgen::gen_s1_case1;
use plaid::stats::NigParams;

fn main() -> plaid::Result<()> {
    let mut args = std::env::args().skip(1).filter_map(|s| s.parse().ok());
    let burn = args.next().unwrap_or(2000);
    let keep = args.next().unwrap_or(2000);
    let sim = gen_s1_case1(200, 1)?;

    let cfg = PamConfig::univariate(NigParams::default()).iterations(burn, keep).seed(1);
    let trace = run_chain(&sim.data, &cfg)?;
    let report = cluster_report(&trace)?;
    println!(
        "PAM: {} clusters, ARI {:.3}, top-level acceptance {:.2}",
        report.n_clusters(),
        ari(&report.point, &sim.truth_partition())?,
        trace.acceptance.beta_prime.rate()
    );
    println!("{:>3} {:>8} {:>6} {:>7} {:>10} {:>10}", "id", "location", "n", "G1/G2", "unique G1", "unique G2");
    for c in &report.clusters {
        let g1 = c.members.iter().filter(|&&i| i < 200).count();
        println!(
            "{:>3} {:>8.2} {:>6} {:>7} {:>10.2} {:>10.2}",
            c.id,
            c.mean_location[0],
            c.members.len(),
            format!("{}/{}", g1, c.members.len() - g1),
            c.unique_prob[0],
            c.unique_prob[1]
        );
    }

    let hdp = run_chain(&sim.data, &cfg.clone().hdp(2))?;
    let ws = common_unique_from_weights(&hdp);
    let unique: usize = ws.counts.iter().map(|c| c.unique.iter().sum::<usize>()).sum();
    println!("\nHDP: {} exact-zero weights, {} unique-cluster events", hdp.zero_weight_count(), unique);
    Ok(())
}
