//! The command-line workflow driven in-process: simulate, fit, rerun from
//! the manifest, summarize.

use plaid::workbench::run_cli;

fn main() {
    let dir = std::env::temp_dir().join("plaid-cli-pipeline");
    let d = |s: &str| dir.join(s).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec!["gen-data", "--scenario", "s1c1", "--seed", "7", "--out", &d("data")],
        vec!["fit", "--model", "pam", "--data", &d("data/data.csv"), "--burnin", "1000", "--keep", "1000", "--out", &d("fit")],
        vec!["fit", "--from-manifest", &d("fit/manifest.json"), "--out", &d("rerun")],
        vec!["summarize", "--trace-dir", &d("fit"), "--truth", &d("data/truth.csv"), "--metrics"],
        vec!["theory", "new-cluster-prob", "--i", "3", "--p", "0.5", "--gamma", "1"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for s in steps {
        println!("$ plaid {}", s.join(" "));
        let code = run_cli(std::iter::once("plaid".to_string()).chain(s));
        if code != 0 {
            std::process::exit(code);
        }
    }
    let a = std::fs::read(dir.join("fit/weights.csv")).unwrap();
    let b = std::fs::read(dir.join("rerun/weights.csv")).unwrap();
    println!("rerun weights identical: {}", a == b);
}
