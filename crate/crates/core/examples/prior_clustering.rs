//! Cluster counts under CAM, HDP and two PAM priors with 500 groups of 1000
//! draws over 1000 atoms, averaged over replicate runs.
//!
//! ```text
//! cargo run --release --example prior_clustering -- [replicates]
//! ```

use plaid::processes::{prior_experiment, PriorProcess, TruncationConfig};

fn main() -> plaid::Result<()> {
    let replicates: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let cfg = TruncationConfig::default();
    let processes = [
        ("CAM", PriorProcess::Cam),
        ("HDP", PriorProcess::Hdp),
        ("PAM Beta(80,20)", PriorProcess::Pam { a: 80.0, b: 20.0 }),
        ("PAM Beta(20,80)", PriorProcess::Pam { a: 20.0, b: 80.0 }),
    ];
    println!("{:<16} {:>10} {:>10} {:>10}", "process", "per-group", "sd", "total");
    for (i, (name, proc_)) in processes.iter().enumerate() {
        let t = std::time::Instant::now();
        let s = prior_experiment(*proc_, 1.0, 1.0, &cfg, replicates, 2024 + i as u64)?;
        println!(
            "{:<16} {:>10.3} {:>10.3} {:>10.2}   ({:.1}s)",
            name,
            s.mean_per_group,
            s.mean_sd_per_group,
            s.mean_total,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
