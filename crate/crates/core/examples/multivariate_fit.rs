//! Four groups of trivariate observations with a normal-inverse-Wishart base.

use plaid::posterior::{ari, nfd, point_estimate};
use plaid::sampler::{run_chain, PamConfig};
use plaid::simgen::gen_s2;
use plaid::stats::NiwParams;

fn main() -> plaid::Result<()> {
    let sim = gen_s2(100, 3)?;
    let cfg = PamConfig::multivariate(NiwParams::standard(3)).iterations(1500, 1500).seed(3);
    let trace = run_chain(&sim.data, &cfg)?;
    let (psm, point) = point_estimate(&trace)?;
    println!(
        "{} groups, {} observations: {} clusters, ARI {:.3}, NFD {:.3}",
        trace.n_groups(),
        trace.n_obs(),
        point.n_blocks(),
        ari(&point, &sim.truth_partition())?,
        nfd(&psm, &sim.truth_similarity())?
    );
    for j in 0..trace.n_groups() {
        println!("  group {}: true components {:?}", j + 1, sim.group_components(j));
    }
    Ok(())
}
