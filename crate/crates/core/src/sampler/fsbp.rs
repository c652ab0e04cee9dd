//! Single-group fractional stick-breaking slice sampler and a DP baseline.

use serde::{Deserialize, Serialize};

use super::init::kmeans_labels;
use super::kernel::{initial_latent, ln_base_density, AtomCache, ObsView};
use super::{active_atoms, mh_accept, propose_reflected, xi, Acceptance, ChainTrace, Kernel};
use crate::atoms::{AtomSet, BaseMeasure};
use crate::data::GroupedDataset;
use crate::error::{Error, Result};
use crate::stats::{
    beta_unchecked, categorical_log, ln_beta_pdf, ln_gamma_pdf, open01, sample_gamma, NigParams,
    NiwParams, RngHandle,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsbpConfig {
    pub kernel: Kernel,
    pub base: BaseMeasure,
    pub p_prior: (f64, f64),
    pub gamma_prior: (f64, f64),
    pub zeta: f64,
    pub mh_eps: f64,
    pub burn_in: usize,
    pub n_keep: usize,
    pub thin: usize,
    pub seed: u64,
    pub stream: u64,
    pub eta: Option<f64>,
    pub fixed_p: Option<f64>,
    pub fixed_gamma: Option<f64>,
    pub fixed_atoms: Option<AtomSet>,
    pub init_clusters: usize,
}

impl FsbpConfig {
    fn with_base(kernel: Kernel, base: BaseMeasure) -> Self {
        Self {
            kernel,
            base,
            p_prior: (0.5, 0.5),
            gamma_prior: (3.0, 3.0),
            zeta: 0.5,
            mh_eps: 0.1,
            burn_in: 5_000,
            n_keep: 5_000,
            thin: 1,
            seed: 1,
            stream: 0,
            eta: None,
            fixed_p: None,
            fixed_gamma: None,
            fixed_atoms: None,
            init_clusters: 10,
        }
    }

    pub fn univariate(base: NigParams) -> Self {
        Self::with_base(Kernel::Univariate, BaseMeasure::Nig(base))
    }

    pub fn multivariate(base: NiwParams) -> Self {
        let q = base.dim();
        Self::with_base(Kernel::Multivariate(q), BaseMeasure::Niw(base))
    }

    pub fn count(base: NigParams) -> Self {
        Self::with_base(Kernel::Count, BaseMeasure::Nig(base))
    }

    pub fn iterations(mut self, burn_in: usize, n_keep: usize) -> Self {
        self.burn_in = burn_in;
        self.n_keep = n_keep;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let as_pam = super::PamConfig {
            kernel: self.kernel,
            base: self.base.clone(),
            p_prior: self.p_prior,
            alpha0_prior: (1.0, 1.0),
            gamma_prior: self.gamma_prior,
            zeta: self.zeta,
            mh_eps: self.mh_eps,
            burn_in: self.burn_in,
            n_keep: self.n_keep,
            thin: self.thin,
            seed: self.seed,
            stream: self.stream,
            eta: self.eta.map(|e| vec![e]),
            fixed_p: self.fixed_p.map(|p| vec![p]),
            fixed_alpha0: None,
            fixed_gamma: self.fixed_gamma,
            fixed_beta_prime: None,
            fixed_atoms: None,
            concentration: super::ConcentrationUpdate::StickConditional,
            init_clusters: self.init_clusters,
            record_latent: false,
        };
        as_pam.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsbpChainState {
    pub pi_prime: Vec<f64>,
    pub p: f64,
    pub gamma: f64,
    pub z: Vec<usize>,
    pub u: Vec<f64>,
    pub atoms: AtomSet,
    pub latent_y: Vec<f64>,
}

impl FsbpChainState {
    pub fn n_active(&self) -> usize {
        self.pi_prime.len()
    }

    /// `pi_k = p pi'_k prod_{l<k} (1 - p pi'_l)`.
    pub fn weights(&self) -> Vec<f64> {
        let mut rest = 1.0;
        self.pi_prime
            .iter()
            .map(|&v| {
                let w = self.p * v * rest;
                rest *= 1.0 - self.p * v;
                w.max(f64::MIN_POSITIVE)
            })
            .collect()
    }

    fn counts(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.n_active();
        let mut m = vec![0.0; k];
        for &l in &self.z {
            m[l] += 1.0;
        }
        let mut tail = vec![0.0; k];
        let mut acc = 0.0;
        for l in (0..k).rev() {
            tail[l] = acc;
            acc += m[l];
        }
        (m, tail)
    }
}

const S_U: u64 = 0;
const S_PI: u64 = 1;
const S_P: u64 = 2;
const S_Z: u64 = 3;
const S_Y: u64 = 4;
const S_ATOMS: u64 = 5;
const S_GAMMA: u64 = 6;
const S_INIT: u64 = u64::MAX;
const S_GROW: u64 = u64::MAX - 1;

/// FSBP mixture sampler; with `dp` set, `p` is pinned at one and the
/// fractions get exact Gibbs draws.
pub struct FsbpSampler<'a> {
    cfg: FsbpConfig,
    view: ObsView<'a>,
    chain: RngHandle,
    state: FsbpChainState,
    acceptance: Acceptance,
    dp: bool,
}

impl<'a> FsbpSampler<'a> {
    pub fn new(data: &'a GroupedDataset, cfg: FsbpConfig) -> Result<Self> {
        Self::build(data, cfg, false)
    }

    /// Dirichlet-process baseline on the same data.
    pub fn dirichlet(data: &'a GroupedDataset, mut cfg: FsbpConfig) -> Result<Self> {
        cfg.fixed_p = Some(1.0);
        Self::build(data, cfg, true)
    }

    fn build(data: &'a GroupedDataset, cfg: FsbpConfig, dp: bool) -> Result<Self> {
        cfg.validate()?;
        data.validate().map_err(|e| Error::Validation(e.to_string()))?;
        if data.n_groups() != 1 {
            return Err(Error::Validation(format!(
                "stick-breaking mixture expects one group, got {}",
                data.n_groups()
            )));
        }
        let kind_ok = matches!(
            (cfg.kernel, data.kind()),
            (Kernel::Univariate, "univariate") | (Kernel::Count, "count") | (Kernel::Multivariate(_), "multivariate")
        );
        if !kind_ok {
            return Err(Error::Validation(format!("{:?} kernel cannot model {} data", cfg.kernel, data.kind())));
        }
        let view = ObsView::new(data, &cfg.base, cfg.eta.map(|e| vec![e]))?;
        let chain = RngHandle::new(cfg.seed, cfg.stream);
        let mut s = Self {
            cfg,
            view,
            chain,
            state: FsbpChainState {
                pi_prime: Vec::new(),
                p: 1.0,
                gamma: 1.0,
                z: Vec::new(),
                u: Vec::new(),
                atoms: Vec::new(),
                latent_y: Vec::new(),
            },
            acceptance: Acceptance::default(),
            dp,
        };
        s.initialize(data.n_total());
        Ok(s)
    }

    pub fn state(&self) -> &FsbpChainState {
        &self.state
    }

    fn initialize(&mut self, n: usize) {
        let mut rng = self.chain.substream(S_INIT);
        let points: Vec<Vec<f64>> = (0..n).map(|i| self.view.init_point(0, i)).collect();
        let z = kmeans_labels(&points, self.cfg.init_clusters, &mut rng);
        let k = z.iter().max().map_or(1, |m| m + 1);
        let (ga, gb) = self.cfg.gamma_prior;
        let (pa, pb) = self.cfg.p_prior;
        let st = &mut self.state;
        st.gamma = self.cfg.fixed_gamma.unwrap_or(ga / gb);
        st.p = self.cfg.fixed_p.unwrap_or(pa / (pa + pb));
        st.z = z;
        st.u = vec![0.0; n];
        if let ObsView::Count { x, .. } = &self.view {
            st.latent_y = x[0].iter().map(|&v| initial_latent(v)).collect();
        }
        st.pi_prime = (0..k).map(|_| beta_unchecked(1.0, st.gamma, &mut rng)).collect();
        st.atoms = Vec::with_capacity(k);
        let members = self.members(k);
        let fixed = self.cfg.fixed_atoms.clone().unwrap_or_default();
        for (l, m) in members.iter().enumerate() {
            let a = match fixed.get(l) {
                Some(a) => a.clone(),
                None => self.view.sample_atom(&self.cfg.base, m, std::slice::from_ref(&self.state.latent_y), &mut rng),
            };
            self.state.atoms.push(a);
        }
    }

    fn members(&self, k: usize) -> Vec<Vec<(usize, usize)>> {
        let mut m = vec![Vec::new(); k];
        for (i, &l) in self.state.z.iter().enumerate() {
            m[l].push((0, i));
        }
        m
    }

    pub fn step_slice_u(&mut self, rng: &mut RngHandle) {
        let zeta = self.cfg.zeta;
        let mut min_u = f64::INFINITY;
        for (u, &l) in self.state.u.iter_mut().zip(&self.state.z) {
            *u = open01(rng) * xi(zeta, l);
            min_u = min_u.min(*u);
        }
        let k = active_atoms(zeta, min_u);
        let mut g = rng.substream(S_GROW);
        let st = &mut self.state;
        let cur = st.n_active();
        if k <= cur {
            st.pi_prime.truncate(k);
            st.atoms.truncate(k);
            return;
        }
        let fixed = self.cfg.fixed_atoms.as_deref().unwrap_or(&[]);
        for l in cur..k {
            st.pi_prime.push(beta_unchecked(1.0, st.gamma, &mut g));
            st.atoms.push(fixed.get(l).cloned().unwrap_or_else(|| self.cfg.base.sample(&mut g)));
        }
    }

    /// Stick fractions: reflected-uniform Metropolis, or exact Beta draws
    /// for the DP baseline.
    pub fn step_pi_prime(&mut self, rng: &mut RngHandle) {
        let (m, tail) = self.state.counts();
        let (p, gamma, eps) = (self.state.p, self.state.gamma, self.cfg.mh_eps);
        let target = |v: f64, l: usize| {
            m[l] * v.ln() + tail[l] * (-p * v).ln_1p() + (gamma - 1.0) * (-v).ln_1p()
        };
        for l in 0..self.state.n_active() {
            if self.dp {
                self.state.pi_prime[l] = beta_unchecked(1.0 + m[l], gamma + tail[l], rng);
                continue;
            }
            let cur = self.state.pi_prime[l];
            let prop = propose_reflected(cur, eps, rng);
            let ok = prop > 0.0 && prop < 1.0 && mh_accept(target(prop, l) - target(cur, l), rng);
            if ok {
                self.state.pi_prime[l] = prop;
            }
            self.acceptance.pi_prime.record(ok);
        }
    }

    /// Reflected-uniform Metropolis update of `p`.
    pub fn step_p(&mut self, rng: &mut RngHandle) {
        if self.cfg.fixed_p.is_some() {
            return;
        }
        let (m, tail) = self.state.counts();
        let (a, b) = self.cfg.p_prior;
        let pi = &self.state.pi_prime;
        let target = |p: f64| {
            let mut s = ln_beta_pdf(p, a, b);
            for l in 0..pi.len() {
                if m[l] > 0.0 {
                    s += m[l] * (p * pi[l]).ln();
                }
                if tail[l] > 0.0 {
                    s += tail[l] * (-p * pi[l]).ln_1p();
                }
            }
            s
        };
        let cur = self.state.p;
        let prop = propose_reflected(cur, self.cfg.mh_eps, rng);
        let ok = prop > 0.0 && prop < 1.0 && mh_accept(target(prop) - target(cur), rng);
        if ok {
            self.state.p = prop;
        }
        self.acceptance.p.record(ok);
    }

    pub fn step_z(&mut self, rng: &mut RngHandle) -> Result<()> {
        let zeta = self.cfg.zeta;
        let st = &mut self.state;
        let k = st.n_active();
        let caches: Vec<AtomCache> = st.atoms.iter().map(AtomCache::new).collect();
        let mut lpi = vec![0.0; k];
        let mut acc = 0.0;
        for l in 0..k {
            let f = st.p * st.pi_prime[l];
            lpi[l] = f.ln() + acc - xi(zeta, l).ln();
            acc += (-f).ln_1p();
        }
        let mut logw = Vec::with_capacity(k);
        for (i, zi) in st.z.iter_mut().enumerate() {
            let kmax = active_atoms(zeta, st.u[i]).min(k);
            logw.clear();
            logw.extend((0..kmax).map(|l| lpi[l] + self.view.ln_lik(0, i, &caches[l])));
            *zi = categorical_log(&logw, rng)
                .ok_or_else(|| Error::Invariant(format!("empty label support at observation {i}")))?;
        }
        Ok(())
    }

    pub fn step_latent_counts(&mut self, rng: &mut RngHandle) {
        if !self.view.is_count() {
            return;
        }
        let st = &mut self.state;
        for (i, (y, &l)) in st.latent_y.iter_mut().zip(&st.z).enumerate() {
            *y = self.view.sample_latent(0, i, &st.atoms[l], rng);
        }
    }

    pub fn step_atoms(&mut self, rng: &mut RngHandle) {
        let k = self.state.n_active();
        let members = self.members(k);
        let start = self.cfg.fixed_atoms.as_ref().map_or(0, Vec::len).min(k);
        for l in start..k {
            let a = self.view.sample_atom(
                &self.cfg.base,
                &members[l],
                std::slice::from_ref(&self.state.latent_y),
                &mut rng.substream(l as u64),
            );
            self.state.atoms[l] = a;
        }
    }

    /// Conjugate Gamma update given the instantiated fractions.
    pub fn step_gamma(&mut self, rng: &mut RngHandle) {
        if self.cfg.fixed_gamma.is_some() {
            return;
        }
        let (a, b) = self.cfg.gamma_prior;
        let s: f64 = self.state.pi_prime.iter().map(|v| (-v).ln_1p()).sum();
        let k = self.state.n_active() as f64;
        self.state.gamma = sample_gamma(a + k, b - s, rng).expect("positive parameters");
    }

    pub fn sweep(&mut self, t: u64) -> Result<()> {
        let it = self.chain.substream(t);
        self.step_slice_u(&mut it.substream(S_U));
        self.step_pi_prime(&mut it.substream(S_PI));
        self.step_p(&mut it.substream(S_P));
        self.step_z(&mut it.substream(S_Z))?;
        self.step_latent_counts(&mut it.substream(S_Y));
        self.step_atoms(&mut it.substream(S_ATOMS));
        self.step_gamma(&mut it.substream(S_GAMMA));
        Ok(())
    }

    pub fn log_joint(&self) -> f64 {
        let st = &self.state;
        let caches: Vec<AtomCache> = st.atoms.iter().map(AtomCache::new).collect();
        let w = st.weights();
        let mut total: f64 = st
            .z
            .iter()
            .enumerate()
            .map(|(i, &l)| self.view.ln_lik(0, i, &caches[l]) + w[l].ln())
            .sum();
        total += st.pi_prime.iter().map(|&v| ln_beta_pdf(v, 1.0, st.gamma)).sum::<f64>();
        if self.cfg.fixed_p.is_none() {
            total += ln_beta_pdf(st.p, self.cfg.p_prior.0, self.cfg.p_prior.1);
        }
        total += st.atoms.iter().map(|a| ln_base_density(&self.cfg.base, a)).sum::<f64>();
        if self.cfg.fixed_gamma.is_none() {
            total += ln_gamma_pdf(st.gamma, self.cfg.gamma_prior.0, self.cfg.gamma_prior.1);
        }
        total
    }

    pub fn run(mut self) -> Result<ChainTrace> {
        let mut trace = ChainTrace {
            model: if self.dp { "dp" } else { "fsbp" }.to_string(),
            group_sizes: vec![self.state.z.len()],
            ..Default::default()
        };
        let total = self.cfg.burn_in + self.cfg.n_keep;
        for t in 0..total {
            self.sweep(t as u64)?;
            if t >= self.cfg.burn_in && (t - self.cfg.burn_in + 1) % self.cfg.thin == 0 {
                let st = &self.state;
                trace.iterations.push(t + 1);
                trace.z.push(st.z.clone());
                trace.weights.push(vec![st.weights()]);
                trace.atoms.push(st.atoms.clone());
                trace.p.push(vec![st.p]);
                trace.gamma.push(st.gamma);
                trace.log_joint.push(self.log_joint());
            }
        }
        trace.acceptance = self.acceptance;
        Ok(trace)
    }
}

pub fn run_fsbp_chain(data: &GroupedDataset, cfg: &FsbpConfig) -> Result<ChainTrace> {
    FsbpSampler::new(data, cfg.clone())?.run()
}

/// Dirichlet-process mixture with exact Gibbs stick updates.
pub fn run_dp_chain(data: &GroupedDataset, cfg: &FsbpConfig) -> Result<ChainTrace> {
    FsbpSampler::dirichlet(data, cfg.clone())?.run()
}
