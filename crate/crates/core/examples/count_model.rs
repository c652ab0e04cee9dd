//! Count data through rounded Gaussian latents: three groups of counts,
//! scale factors set from the group means, latent values checked against
//! their bins.

use plaid::data::GroupedDataset;
use plaid::posterior::point_estimate;
use plaid::sampler::{count_bin, run_chain, PamConfig};
use plaid::stats::{std_normal, NigParams, RngHandle};

fn main() -> plaid::Result<()> {
    let mut rng = RngHandle::new(5, 0);
    let mut draw = |mu: f64, sd: f64| (mu + sd * std_normal(&mut rng)).max(0.0).ceil() as u64;
    let groups: Vec<Vec<u64>> = vec![
        (0..80).map(|i| if i % 2 == 0 { draw(2.0, 1.0) } else { draw(20.0, 2.0) }).collect(),
        (0..80).map(|i| if i % 2 == 0 { draw(2.0, 1.0) } else { draw(45.0, 3.0) }).collect(),
        (0..80).map(|_| draw(20.0, 2.0)).collect(),
    ];
    let data = GroupedDataset::counts(groups.clone());

    let mut cfg = PamConfig::count(NigParams::default()).iterations(1500, 1500).seed(5);
    cfg.eta = data.count_means();
    cfg.record_latent = true;
    let trace = run_chain(&data, &cfg)?;

    let flat: Vec<u64> = groups.concat();
    let outside = trace
        .latent_y
        .iter()
        .flat_map(|y| y.iter().zip(&flat))
        .filter(|(y, &x)| {
            let (lo, hi) = count_bin(x);
            !(**y >= lo && **y < hi)
        })
        .count();
    let (_, point) = point_estimate(&trace)?;
    println!("clusters {}, latent values outside their bin: {outside}", point.n_blocks());
    for j in 0..3 {
        let mean_p = trace.p.iter().map(|r| r[j]).sum::<f64>() / trace.len() as f64;
        println!("  group {}: eta {:.2}, mean p {:.3}", j + 1, cfg.eta.as_ref().unwrap()[j], mean_p);
    }
    Ok(())
}
