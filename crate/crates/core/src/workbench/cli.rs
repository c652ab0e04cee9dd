use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use super::config::{
    load_config_file, merge, AcceptanceRates, ChainRecord, Manifest, RunConfig, MANIFEST_FILE,
};
use super::io::{self, fmt_f64};
use super::summary::{summarize, write_summary};
use crate::error::{Error, Result};
use crate::partition::{enumerate_partitions, Partition};
use crate::processes::{prior_replicate, PriorProcess, TruncationConfig};
use crate::sampler::{run_chain, run_dp_chain, run_fsbp_chain, ChainTrace};
use crate::simgen;
use crate::stats::RngHandle;
use crate::theory::{
    dp_eppf, dp_expected_clusters, eppf_mc_oracle, fsbp_eppf, fsbp_expected_clusters,
    fsbp_mean_and_variance, fsbp_new_cluster_prob, fsbp_set_mass_mc, new_cluster_dominates_dp,
    new_cluster_mc, FsbpParams,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PLAID_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "plaid", version, about = "Grouped clustering with atom-skipping priors")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a scenario dataset with its truth files.
    GenData(GenDataArgs),
    /// Run the posterior sampler and write trace files and a manifest.
    Fit(FitArgs),
    /// Summarize trace files into a report and tables.
    Summarize(SummarizeArgs),
    /// Simulate cluster counts under the truncated priors.
    PriorSim(PriorSimArgs),
    /// Evaluate closed-form results, optionally against simulation.
    Theory(TheoryArgs),
}

#[derive(Args, Debug)]
struct GenDataArgs {
    /// s1c1, s1c2, s1c3, s1c3b, s2 or s3.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    seed: u64,
    /// Per-group size (scenario-specific meaning).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    /// Flat JSON or TOML file of fit settings; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Rerun from a manifest written by an earlier fit.
    #[arg(long)]
    #[serde(skip)]
    from_manifest: Option<PathBuf>,
    /// pam, dpam, hdp, fsbp or dp.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    keep: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
    /// one, from-data, or comma-separated values per group.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    p_prior: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["SHAPE", "RATE"])]
    alpha0_prior: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["SHAPE", "RATE"])]
    gamma_prior: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    m0: Option<f64>,
    #[arg(long)]
    k0: Option<f64>,
    #[arg(long)]
    a_sig: Option<f64>,
    #[arg(long)]
    b_sig: Option<f64>,
    #[arg(long)]
    v0: Option<f64>,
    #[arg(long)]
    psi_scale: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    mh_eps: Option<f64>,
    #[arg(long)]
    fixed_p: Option<f64>,
    #[arg(long)]
    fixed_alpha0: Option<f64>,
    #[arg(long)]
    fixed_gamma: Option<f64>,
    /// stick or tables.
    #[arg(long)]
    concentration: Option<String>,
    #[arg(long)]
    init_clusters: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    record_latent: bool,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    /// Directory holding a chain's trace files.
    #[arg(long)]
    trace_dir: PathBuf,
    /// Chain to summarize when the directory holds several.
    #[arg(long, default_value_t = 1)]
    chain: usize,
    /// Truth labels written by gen-data.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Compute ARI, NFD and VI against the truth.
    #[arg(long)]
    metrics: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PriorSimArgs {
    /// cam, hdp or pam.
    #[arg(long)]
    process: String,
    #[arg(long, default_value_t = 500)]
    groups: usize,
    #[arg(long, default_value_t = 1000)]
    obs: usize,
    #[arg(long, default_value_t = 1000)]
    atoms: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha0: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Beta prior of the group keep probabilities (pam only).
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    p_beta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[command(subcommand)]
    item: TheoryItem,
}

#[derive(Args, Debug, Clone, Copy)]
struct TheoryCommon {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    gamma: f64,
    /// Compare with Monte Carlo; exit 4 on a discrepancy beyond 4 standard errors.
    #[arg(long)]
    check_oracle: bool,
    #[arg(long, default_value_t = 200_000)]
    sims: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum TheoryItem {
    /// Partition probabilities for every partition of n items.
    Eppf {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        c: TheoryCommon,
    },
    /// Probability that draw i is new, for draws 2..=i.
    NewClusterProb {
        #[arg(long)]
        i: usize,
        #[command(flatten)]
        c: TheoryCommon,
    },
    /// Mean and variance of G(A).
    Variance {
        #[arg(long, default_value_t = 0.5)]
        h: f64,
        #[command(flatten)]
        c: TheoryCommon,
    },
    /// Expected number of clusters among n draws, with the DP value.
    ExpectedClusters {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        c: TheoryCommon,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            super::exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenData(a) => gen_data(a),
        Command::Fit(a) => fit(a).map(|_| ()),
        Command::Summarize(a) => summarize_cmd(a),
        Command::PriorSim(a) => prior_sim(a),
        Command::Theory(a) => theory(a.item),
    }
}

fn out_dir(flag: Option<PathBuf>, fallback: &str) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let sim = simgen::by_name(&a.scenario, a.n, a.seed)?;
    let out = out_dir(a.out, "plaid-data");
    std::fs::create_dir_all(&out)?;
    io::write_dataset(&out.join("data.csv"), &sim.data)?;
    io::write_truth(&out.join("truth.csv"), &sim.data, &sim.truth)?;
    io::write_matrix(&out.join("truth_psm.csv"), &sim.truth_similarity())?;
    std::fs::write(out.join("scenario.json"), serde_json::to_string_pretty(&sim.spec)?)?;
    println!("wrote {} observations in {} groups to {}", sim.data.n_total(), sim.data.n_groups(), out.display());
    Ok(())
}

fn fit(a: FitArgs) -> Result<Manifest> {
    let mut flags = match serde_json::to_value(&a)? {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    flags.retain(|_, v| !v.is_null());
    let base = match (&a.from_manifest, &a.config) {
        (Some(_), Some(_)) => return Err(Error::Usage("use either --config or --from-manifest".into())),
        (Some(m), None) => match serde_json::to_value(Manifest::read(m)?.config)? {
            Value::Object(m) => Some(m),
            _ => None,
        },
        (None, Some(c)) => Some(load_config_file(c)?),
        (None, None) => None,
    };
    let mut cfg = merge(base, flags)?.resolve()?;
    if let Some(d) = &cfg.data {
        cfg.data = Some(
            std::fs::canonicalize(d).map_err(|e| Error::Usage(format!("cannot open {}: {e}", d.display())))?,
        );
    }
    let out = out_dir(cfg.out.clone(), "plaid-fit");
    cfg.out = Some(out.clone());
    run_fit(&cfg, &out)
}

/// Runs a resolved fit configuration, writing traces and the manifest into `out`.
pub fn run_fit(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    let data_path = cfg.data.as_ref().ok_or_else(|| Error::Usage("fit requires --data".into()))?;
    let data = io::read_dataset(data_path)?;
    let kind = cfg.model_kind()?;
    let start = Instant::now();
    let n_chains = cfg.chains;
    let (eta, runs): (Option<Vec<f64>>, Vec<(ChainTrace, f64)>) = if kind.is_single_group() {
        let base = cfg.fsbp_config(&data)?;
        let runs = (0..n_chains as u64)
            .into_par_iter()
            .map(|c| {
                let mut cc = base.clone();
                cc.stream = c;
                let t0 = Instant::now();
                let tr = if kind == super::config::ModelKind::Dp {
                    run_dp_chain(&data, &cc)?
                } else {
                    run_fsbp_chain(&data, &cc)?
                };
                Ok((tr, t0.elapsed().as_secs_f64()))
            })
            .collect::<Result<Vec<_>>>()?;
        (base.eta.map(|e| vec![e]), runs)
    } else {
        let base = cfg.pam_config(&data)?;
        let runs = (0..n_chains as u64)
            .into_par_iter()
            .map(|c| {
                let mut cc = base.clone();
                cc.stream = c;
                let t0 = Instant::now();
                let tr = run_chain(&data, &cc)?;
                Ok((tr, t0.elapsed().as_secs_f64()))
            })
            .collect::<Result<Vec<_>>>()?;
        (base.eta.clone(), runs)
    };
    std::fs::create_dir_all(out)?;
    let mut chains = Vec::with_capacity(n_chains);
    for (c, (tr, secs)) in runs.iter().enumerate() {
        let dir = if n_chains == 1 { ".".to_string() } else { format!("chain_{}", c + 1) };
        io::write_trace(&out.join(&dir), tr)?;
        chains.push(ChainRecord {
            dir,
            seed: cfg.seed,
            stream: c as u64,
            n_kept: tr.len(),
            wall_seconds: *secs,
            acceptance: tr.acceptance,
            acceptance_rates: AcceptanceRates::from(&tr.acceptance),
        });
        let k = tr.cluster_counts();
        let mean_k = k.iter().sum::<usize>() as f64 / k.len().max(1) as f64;
        println!(
            "chain {}: {} draws kept, mean clusters {:.2}, {:.1}s",
            c + 1,
            tr.len(),
            mean_k,
            secs
        );
    }
    let manifest = Manifest {
        tool: "plaid".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        model: runs.first().map(|r| r.0.model.clone()).unwrap_or_default(),
        data_kind: data.kind().into(),
        group_names: data.group_names.clone(),
        group_sizes: data.group_sizes(),
        eta,
        chains,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    manifest.write(&out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Locates the manifest and chain record for a trace directory and reads
/// the chain back.
pub fn load_chain(trace_dir: &Path, chain: usize) -> Result<(Manifest, ChainTrace)> {
    let here = trace_dir.join(MANIFEST_FILE);
    let (manifest, dir) = if here.exists() {
        let m = Manifest::read(&here)?;
        let rec = if m.chains.len() == 1 {
            m.chains[0].clone()
        } else {
            m.chains
                .get(chain.wrapping_sub(1))
                .cloned()
                .ok_or_else(|| Error::Usage(format!("chain {chain} not in 1..={}", m.chains.len())))?
        };
        (m, trace_dir.join(rec.dir))
    } else {
        let parent = trace_dir
            .parent()
            .map(|p| p.join(MANIFEST_FILE))
            .filter(|p| p.exists())
            .ok_or_else(|| Error::Usage(format!("no {MANIFEST_FILE} in or above {}", trace_dir.display())))?;
        (Manifest::read(&parent)?, trace_dir.to_path_buf())
    };
    let name = dir.file_name().map(|s| s.to_string_lossy().to_string());
    let rec = manifest
        .chains
        .iter()
        .find(|r| r.dir == "." || Some(&r.dir) == name.as_ref())
        .cloned()
        .ok_or_else(|| Error::Validation(format!("{} is not a chain of this manifest", dir.display())))?;
    let mut tr = io::read_trace(&dir, &manifest.model, &manifest.group_sizes)?;
    tr.acceptance = rec.acceptance;
    Ok((manifest, tr))
}

fn summarize_cmd(a: SummarizeArgs) -> Result<()> {
    if a.metrics && a.truth.is_none() {
        return Err(Error::Usage("--metrics needs --truth <truth.csv>".into()));
    }
    let (manifest, tr) = load_chain(&a.trace_dir, a.chain)?;
    let truth = a.truth.as_deref().map(io::read_truth).transpose()?;
    let s = summarize(&tr, &manifest.group_names, truth.as_deref())?;
    let out = a.out.unwrap_or_else(|| a.trace_dir.join("summary"));
    write_summary(&out, &s, &tr)?;
    let mut o = std::io::stdout().lock();
    writeln!(o, "model {}  draws {}  clusters {}", s.model, s.n_draws, s.n_clusters)?;
    for (g, c) in s.group_names.iter().zip(&s.clusters_per_group) {
        writeln!(o, "  group {g}: {c} clusters")?;
    }
    if let Some(m) = &s.metrics {
        writeln!(o, "  ARI {:.4}  NFD {:.4}  VI {:.4}", m.ari, m.nfd, m.vi)?;
    }
    writeln!(o, "report written to {}", out.display())?;
    Ok(())
}

#[derive(Serialize)]
struct PriorSimSummary {
    process: String,
    groups: usize,
    obs: usize,
    atoms: usize,
    alpha0: f64,
    gamma: f64,
    replicates: usize,
    seed: u64,
    mean_per_group: f64,
    mean_sd_per_group: f64,
    mean_total: f64,
}

fn prior_sim(a: PriorSimArgs) -> Result<()> {
    let process = match (a.process.as_str(), &a.p_beta) {
        ("cam", None) => PriorProcess::Cam,
        ("hdp", None) => PriorProcess::Hdp,
        ("pam", Some(v)) => PriorProcess::Pam { a: v[0], b: v[1] },
        ("pam", None) => return Err(Error::Usage("--process pam needs --p-beta A B".into())),
        ("cam" | "hdp", Some(_)) => return Err(Error::Usage("--p-beta applies to pam only".into())),
        (o, _) => return Err(Error::Usage(format!("unknown process {o:?}; expected cam, hdp or pam"))),
    };
    if a.replicates == 0 {
        return Err(Error::Usage("--replicates must be at least 1".into()));
    }
    let cfg = TruncationConfig { n_atoms: a.atoms, n_groups: a.groups, n_obs_per_group: a.obs };
    let out = out_dir(a.out, "plaid-prior");
    std::fs::create_dir_all(&out)?;
    let mut counts = csv::Writer::from_path(out.join("cluster_counts.csv"))?;
    counts.write_record(["replicate", "group", "clusters"])?;
    let mut totals = csv::Writer::from_path(out.join("cluster_totals.csv"))?;
    totals.write_record(["replicate", "mean_per_group", "sd_per_group", "total_clusters"])?;
    let (mut m_pg, mut m_sd, mut m_tot) = (0.0, 0.0, 0.0);
    for r in 0..a.replicates {
        let st = prior_replicate(process, a.alpha0, a.gamma, &cfg, a.seed, r)
            .map_err(|e| Error::Validation(e.to_string()))?;
        for (j, c) in st.per_group_counts.iter().enumerate() {
            counts.write_record([(r + 1).to_string(), (j + 1).to_string(), c.to_string()])?;
        }
        totals.write_record([
            (r + 1).to_string(),
            fmt_f64(st.mean_per_group()),
            fmt_f64(st.sd_per_group()),
            st.total_count.to_string(),
        ])?;
        m_pg += st.mean_per_group();
        m_sd += st.sd_per_group();
        m_tot += st.total_count as f64;
    }
    counts.flush()?;
    totals.flush()?;
    let n = a.replicates as f64;
    let s = PriorSimSummary {
        process: a.process,
        groups: a.groups,
        obs: a.obs,
        atoms: a.atoms,
        alpha0: a.alpha0,
        gamma: a.gamma,
        replicates: a.replicates,
        seed: a.seed,
        mean_per_group: m_pg / n,
        mean_sd_per_group: m_sd / n,
        mean_total: m_tot / n,
    };
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&s)?)?;
    println!(
        "{}: clusters per group {:.2} (SD {:.2}), total clusters {:.1}",
        s.process, s.mean_per_group, s.mean_sd_per_group, s.mean_total
    );
    Ok(())
}

fn oracle_fail(failures: &[String]) -> Result<()> {
    if failures.is_empty() {
        println!("oracle check passed");
        Ok(())
    } else {
        Err(Error::Oracle(failures.join("; ")))
    }
}

fn show_partition(p: &Partition) -> String {
    p.blocks()
        .iter()
        .map(|b| format!("{{{}}}", b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")))
        .collect()
}

fn theory(item: TheoryItem) -> Result<()> {
    match item {
        TheoryItem::Eppf { n, c } => {
            let params = FsbpParams::new(c.p, c.gamma)?;
            if n == 0 || n > 10 {
                return Err(Error::Domain("eppf table supports 1 <= n <= 10".into()));
            }
            let parts = enumerate_partitions(n);
            let oracle = if c.check_oracle {
                Some(eppf_mc_oracle(n, &params, c.sims, &mut RngHandle::new(c.seed, 0))?)
            } else {
                None
            };
            println!("partition\tfsbp\tdp");
            let mut total = 0.0;
            let mut failures = Vec::new();
            for part in &parts {
                let v = fsbp_eppf(part, &params)?;
                total += v;
                print!("{}\t{}\t{}", show_partition(part), fmt_f64(v), fmt_f64(dp_eppf(part, c.gamma)));
                if let Some(o) = &oracle {
                    let f = o.get(part).copied().unwrap_or(0.0);
                    let se = (v * (1.0 - v) / c.sims as f64).sqrt();
                    print!("\tmc {}", fmt_f64(f));
                    if (f - v).abs() > 4.0 * se {
                        failures.push(format!("{}: exact {v}, simulated {f}", show_partition(part)));
                    }
                }
                println!();
            }
            println!("sum\t{}", fmt_f64(total));
            if (total - 1.0).abs() > 1e-8 {
                failures.push(format!("probabilities sum to {total}"));
            }
            if c.check_oracle {
                oracle_fail(&failures)?;
            }
        }
        TheoryItem::NewClusterProb { i, c } => {
            let params = FsbpParams::new(c.p, c.gamma)?;
            if i < 2 {
                return Err(Error::Domain("--i must be at least 2".into()));
            }
            let mc = if c.check_oracle {
                Some(new_cluster_mc(i, &params, c.sims, &mut RngHandle::new(c.seed, 0))?)
            } else {
                None
            };
            println!("i\tfsbp\tdp\texceeds_dp");
            let mut failures = Vec::new();
            for k in 2..=i {
                let v = fsbp_new_cluster_prob(k, &params)?;
                let dp = c.gamma / (c.gamma + k as f64 - 1.0);
                print!("{k}\t{}\t{}\t{}", fmt_f64(v), fmt_f64(dp), new_cluster_dominates_dp(k, &params)?);
                if let Some(m) = &mc {
                    let (f, se) = (m.freq[k - 2], m.se[k - 2]);
                    print!("\tmc {} (se {})", fmt_f64(f), fmt_f64(se));
                    if (f - v).abs() > 4.0 * se.max(1.0 / c.sims as f64) {
                        failures.push(format!("i={k}: exact {v}, simulated {f}"));
                    }
                }
                println!();
            }
            if c.check_oracle {
                oracle_fail(&failures)?;
            }
        }
        TheoryItem::Variance { h, c } => {
            let params = FsbpParams::new(c.p, c.gamma)?;
            let (m, v) = fsbp_mean_and_variance(h, &params)?;
            println!("mean\t{}\nvariance\t{}", fmt_f64(m), fmt_f64(v));
            if c.check_oracle {
                let est = fsbp_set_mass_mc(h, &params, c.sims, &mut RngHandle::new(c.seed, 0))?;
                println!("mc mean\t{} (se {})\nmc variance\t{} (se {})", est.mean, est.se_mean, est.var, est.se_var);
                let mut failures = Vec::new();
                if (est.mean - m).abs() > 4.0 * est.se_mean {
                    failures.push(format!("mean: exact {m}, simulated {}", est.mean));
                }
                if (est.var - v).abs() > 4.0 * est.se_var {
                    failures.push(format!("variance: exact {v}, simulated {}", est.var));
                }
                oracle_fail(&failures)?;
            }
        }
        TheoryItem::ExpectedClusters { n, c } => {
            let params = FsbpParams::new(c.p, c.gamma)?;
            println!("fsbp\t{}", fmt_f64(fsbp_expected_clusters(n, &params)?));
            println!("dp\t{}", fmt_f64(dp_expected_clusters(n, c.gamma)?));
            if c.check_oracle {
                return Err(Error::Usage("expected-clusters has no oracle check".into()));
            }
        }
    }
    Ok(())
}
