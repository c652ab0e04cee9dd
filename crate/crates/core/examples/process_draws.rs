//! Single draws from the truncated priors: which atoms each group keeps
//! under atom skipping, and how much mass is left beyond the truncation.

use plaid::atoms::BaseMeasure;
use plaid::processes::{simulate_cam, simulate_fsbp, simulate_pam, PSpec, TruncationConfig};
use plaid::stats::RngHandle;

fn main() -> plaid::Result<()> {
    let cfg = TruncationConfig { n_atoms: 200, n_groups: 3, n_obs_per_group: 0 };
    let base = BaseMeasure::standard();
    let mut rng = RngHandle::new(11, 0);

    let pam = simulate_pam(&PSpec::Fixed(vec![0.9, 0.5, 0.2]), 1.0, 1.0, &cfg, &base, &mut rng)?;
    println!("plaid atoms, p = 0.9 / 0.5 / 0.2");
    for j in 0..pam.n_groups() {
        let kept: Vec<usize> = (0..10).filter(|&k| !pam.skip_mask[j][k]).map(|k| k + 1).collect();
        let top: Vec<String> = pam.group_weights[j][..6].iter().map(|w| format!("{w:.3}")).collect();
        println!("  group {}: first ten atoms kept {:?}, weights {}", j + 1, kept, top.join(" "));
    }
    println!("  residual mass {:?}", pam.residuals());

    let cam = simulate_cam(1.0, 1.0, &cfg, &base, &mut rng)?;
    let same = (0..3).map(|j| cam.group_weights[j] == cam.group_weights[0]).collect::<Vec<_>>();
    println!("\ncommon atoms: groups sharing group 1's distribution {same:?}");

    let fsbp = simulate_fsbp(0.4, 1.0, 200, &base, &mut rng)?;
    let w = &fsbp.group_weights[0];
    println!("\nfractional stick-breaking, p = 0.4: first weights {:.3} {:.3} {:.3}", w[0], w[1], w[2]);
    Ok(())
}
