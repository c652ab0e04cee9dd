//! Plaid-atoms slice sampler.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::init::kmeans_labels;
use super::kernel::{initial_latent, ln_base_density, AtomCache, ObsView};
use super::{
    active_atoms, mh_accept, propose_reflected, xi, Acceptance, ChainTrace, ConcentrationUpdate,
    Kernel, PamConfig,
};
use crate::atoms::{Atom, AtomSet, BaseMeasure};
use crate::data::{GroupedDataset, Observations};
use crate::error::{Error, Result};
use crate::processes::{group_beta_params, BETA_FLOOR};
use crate::stats::{
    bernoulli, beta_unchecked, categorical_log, ln_beta, ln_beta_pdf, ln_gamma_pdf, open01,
    sample_gamma, std_normal, RngHandle,
};

const S_U: u64 = 0;
const S_BETA: u64 = 1;
const S_PI: u64 = 2;
const S_P: u64 = 3;
const S_Z: u64 = 4;
const S_Y: u64 = 5;
const S_ATOMS: u64 = 6;
const S_CONC: u64 = 7;
const S_INIT: u64 = u64::MAX;
const S_GROW: u64 = u64::MAX - 1;

/// Random-walk scale for `ln alpha0`.
const ALPHA0_STEP: f64 = 0.5;

/// Full sampler state at the current truncation `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PamState {
    pub beta_prime: Vec<f64>,
    /// J x K group fractions; exact zeros mark skipped atoms.
    pub pi_prime: Vec<Vec<f64>>,
    pub p: Vec<f64>,
    pub alpha0: f64,
    pub gamma: f64,
    pub z: Vec<Vec<usize>>,
    pub u: Vec<Vec<f64>>,
    pub atoms: AtomSet,
    pub latent_y: Vec<Vec<f64>>,
    pub table_counts: Vec<Vec<u64>>,
}

impl PamState {
    pub fn n_active(&self) -> usize {
        self.beta_prime.len()
    }

    pub fn n_groups(&self) -> usize {
        self.z.len()
    }

    /// Members of each active atom per group.
    pub fn counts(&self) -> Vec<Vec<usize>> {
        let k = self.n_active();
        self.z
            .iter()
            .map(|zj| {
                let mut m = vec![0usize; k];
                for &l in zj {
                    m[l] += 1;
                }
                m
            })
            .collect()
    }

    pub fn group_weights(&self, j: usize) -> Vec<f64> {
        fraction_weights(&self.pi_prime[j])
    }

    pub fn weights(&self) -> Vec<Vec<f64>> {
        (0..self.n_groups()).map(|j| self.group_weights(j)).collect()
    }

    pub fn skip_count(&self) -> usize {
        self.pi_prime.iter().flatten().filter(|&&v| v == 0.0).count()
    }
}

/// Stick weights from fractions; skipped atoms keep an exact zero and
/// underflowed ones are floored so the two stay distinguishable.
pub(crate) fn fraction_weights(fr: &[f64]) -> Vec<f64> {
    let mut rest = 1.0;
    fr.iter()
        .map(|&f| {
            let w = f * rest;
            rest *= 1.0 - f;
            if f > 0.0 && w == 0.0 {
                f64::MIN_POSITIVE
            } else {
                w
            }
        })
        .collect()
}

/// Sufficient statistics of the nonzero fractions at each atom.
struct FractionStats {
    n: Vec<f64>,
    s_ln: Vec<f64>,
    s_ln1m: Vec<f64>,
}

impl FractionStats {
    fn new(pi_prime: &[Vec<f64>], k: usize) -> Self {
        let mut s = FractionStats { n: vec![0.0; k], s_ln: vec![0.0; k], s_ln1m: vec![0.0; k] };
        for row in pi_prime {
            for (l, &v) in row.iter().enumerate() {
                if v > 0.0 {
                    s.n[l] += 1.0;
                    s.s_ln[l] += v.ln();
                    s.s_ln1m[l] += (-v).ln_1p();
                }
            }
        }
        s
    }

    /// Summed Beta log densities over atoms `from..K` given the sticks.
    fn ln_density(&self, beta_prime: &[f64], alpha0: f64, from: usize) -> f64 {
        let mut rest: f64 = beta_prime[..from].iter().map(|b| 1.0 - b).product();
        let mut total = 0.0;
        for l in from..beta_prime.len() {
            let bl = beta_prime[l] * rest;
            rest *= 1.0 - beta_prime[l];
            if self.n[l] == 0.0 {
                continue;
            }
            let a = (alpha0 * bl).max(BETA_FLOOR);
            let b = (alpha0 * rest).max(BETA_FLOOR);
            total += (a - 1.0) * self.s_ln[l] + (b - 1.0) * self.s_ln1m[l] - self.n[l] * ln_beta(a, b);
        }
        total
    }
}

fn check_kernel(kernel: Kernel, data: &GroupedDataset) -> Result<()> {
    let ok = match (&data.obs, kernel) {
        (Observations::Univariate(_), Kernel::Univariate) => true,
        (Observations::Counts(_), Kernel::Count) => true,
        (Observations::Multivariate { dim, .. }, Kernel::Multivariate(q)) => *dim == q,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Validation(format!("{:?} kernel cannot model {} data", kernel, data.kind())))
    }
}

fn check_fixed_atoms(atoms: &[Atom], base: &BaseMeasure) -> Result<()> {
    for a in atoms {
        let ok = match (a, base) {
            (Atom::Univariate { var, .. }, BaseMeasure::Nig(_)) => *var > 0.0,
            (Atom::Multivariate { mu, cov }, BaseMeasure::Niw(p)) => {
                mu.len() == p.dim() && cov.clone().cholesky().is_some()
            }
            _ => false,
        };
        if !ok {
            return Err(Error::Validation("fixed atom does not match the base measure".into()));
        }
    }
    Ok(())
}

/// Slice sampler for a plaid-atoms mixture on grouped data.
pub struct PamSampler<'a> {
    cfg: PamConfig,
    view: ObsView<'a>,
    sizes: Vec<usize>,
    chain: RngHandle,
    state: PamState,
    acceptance: Acceptance,
}

impl<'a> PamSampler<'a> {
    pub fn new(data: &'a GroupedDataset, cfg: PamConfig) -> Result<Self> {
        cfg.validate()?;
        data.validate().map_err(|e| match e {
            Error::Validation(m) => Error::Validation(m),
            other => Error::Validation(other.to_string()),
        })?;
        check_kernel(cfg.kernel, data)?;
        let view = ObsView::new(data, &cfg.base, cfg.eta.clone())?;
        let n_groups = data.n_groups();
        if n_groups == 0 {
            return Err(Error::Validation("dataset has no groups".into()));
        }
        if let Some(p) = &cfg.fixed_p {
            if p.len() != n_groups {
                return Err(Error::Validation(format!(
                    "{} fixed p values for {} groups",
                    p.len(),
                    n_groups
                )));
            }
        }
        if let Some(a) = &cfg.fixed_atoms {
            check_fixed_atoms(a, &cfg.base)?;
        }
        let chain = RngHandle::new(cfg.seed, cfg.stream);
        let sizes = data.group_sizes();
        let mut s = Self {
            cfg,
            view,
            sizes,
            chain,
            state: PamState {
                beta_prime: Vec::new(),
                pi_prime: Vec::new(),
                p: Vec::new(),
                alpha0: 1.0,
                gamma: 1.0,
                z: Vec::new(),
                u: Vec::new(),
                atoms: Vec::new(),
                latent_y: Vec::new(),
                table_counts: Vec::new(),
            },
            acceptance: Acceptance::default(),
        };
        s.initialize();
        Ok(s)
    }

    pub fn state(&self) -> &PamState {
        &self.state
    }

    pub fn config(&self) -> &PamConfig {
        &self.cfg
    }

    pub fn acceptance(&self) -> Acceptance {
        self.acceptance
    }

    fn n_fixed_beta(&self) -> usize {
        self.cfg.fixed_beta_prime.as_ref().map_or(0, Vec::len)
    }

    fn n_fixed_atoms(&self) -> usize {
        self.cfg.fixed_atoms.as_ref().map_or(0, Vec::len)
    }

    fn initialize(&mut self) {
        let mut rng = self.chain.substream(S_INIT);
        let j_count = self.sizes.len();
        let mut points = Vec::new();
        for (j, &n) in self.sizes.iter().enumerate() {
            for i in 0..n {
                points.push(self.view.init_point(j, i));
            }
        }
        let labels = kmeans_labels(&points, self.cfg.init_clusters, &mut rng);
        let k = labels.iter().max().map_or(1, |m| m + 1);
        let mut it = labels.into_iter();
        let st = &mut self.state;
        st.z = self.sizes.iter().map(|&n| it.by_ref().take(n).collect()).collect();
        st.u = self.sizes.iter().map(|&n| vec![0.0; n]).collect();
        let (ga, gb) = self.cfg.gamma_prior;
        let (aa, ab) = self.cfg.alpha0_prior;
        st.gamma = self.cfg.fixed_gamma.unwrap_or(ga / gb);
        st.alpha0 = self.cfg.fixed_alpha0.unwrap_or(aa / ab);
        let (pa, pb) = self.cfg.p_prior;
        st.p = self.cfg.fixed_p.clone().unwrap_or_else(|| vec![pa / (pa + pb); j_count]);
        st.latent_y = match &self.view {
            ObsView::Count { x, .. } => {
                x.iter().map(|g| g.iter().map(|&v| initial_latent(v)).collect()).collect()
            }
            _ => vec![Vec::new(); j_count],
        };
        let fixed_b = self.cfg.fixed_beta_prime.clone().unwrap_or_default();
        st.beta_prime = (0..k)
            .map(|l| fixed_b.get(l).copied().unwrap_or_else(|| beta_unchecked(1.0, st.gamma, &mut rng)))
            .collect();
        st.pi_prime = vec![vec![0.0; k]; j_count];
        st.table_counts = vec![vec![0; k]; j_count];
        st.atoms = Vec::with_capacity(k);
        let members = self.members(k);
        let fixed_a = self.cfg.fixed_atoms.clone().unwrap_or_default();
        for (l, m) in members.iter().enumerate() {
            let a = match fixed_a.get(l) {
                Some(a) => a.clone(),
                None => self.view.sample_atom(&self.cfg.base, m, &self.state.latent_y, &mut rng),
            };
            self.state.atoms.push(a);
        }
        self.step_pi_prime(&mut rng);
    }

    fn members(&self, k: usize) -> Vec<Vec<(usize, usize)>> {
        let mut m = vec![Vec::new(); k];
        for (j, zj) in self.state.z.iter().enumerate() {
            for (i, &l) in zj.iter().enumerate() {
                m[l].push((j, i));
            }
        }
        m
    }

    /// Grow or shrink the active arrays to `k` atoms. New entries are prior
    /// draws given the retained sticks.
    fn resize(&mut self, k: usize, rng: &mut RngHandle) {
        let cur = self.state.n_active();
        let st = &mut self.state;
        if k <= cur {
            st.beta_prime.truncate(k);
            st.atoms.truncate(k);
            for row in st.pi_prime.iter_mut() {
                row.truncate(k);
            }
            for row in st.table_counts.iter_mut() {
                row.truncate(k);
            }
            return;
        }
        let fixed_b = self.cfg.fixed_beta_prime.as_deref().unwrap_or(&[]);
        let fixed_a = self.cfg.fixed_atoms.as_deref().unwrap_or(&[]);
        for l in cur..k {
            let b = fixed_b.get(l).copied().unwrap_or_else(|| beta_unchecked(1.0, st.gamma, rng));
            st.beta_prime.push(b);
        }
        let params = group_beta_params(st.alpha0, &st.beta_prime);
        for (j, row) in st.pi_prime.iter_mut().enumerate() {
            let pj = st.p[j];
            for &(a, b) in &params[cur..k] {
                let keep = pj >= 1.0 || bernoulli(pj, rng);
                row.push(if keep { beta_unchecked(a, b, rng) } else { 0.0 });
            }
        }
        for row in st.table_counts.iter_mut() {
            row.resize(k, 0);
        }
        for l in cur..k {
            let a = fixed_a.get(l).cloned().unwrap_or_else(|| self.cfg.base.sample(rng));
            st.atoms.push(a);
        }
    }

    /// Slice variables and the stochastic truncation.
    pub fn step_slice_u(&mut self, rng: &mut RngHandle) {
        let zeta = self.cfg.zeta;
        let mut min_u = f64::INFINITY;
        for (j, (uj, zj)) in self.state.u.iter_mut().zip(&self.state.z).enumerate() {
            let mut r = rng.substream(j as u64);
            for (u, &l) in uj.iter_mut().zip(zj) {
                *u = open01(&mut r) * xi(zeta, l);
                min_u = min_u.min(*u);
            }
        }
        let k = active_atoms(zeta, min_u);
        let mut g = rng.substream(S_GROW);
        self.resize(k, &mut g);
    }

    /// Reflected-uniform Metropolis update of each top-level fraction.
    pub fn step_beta_prime(&mut self, rng: &mut RngHandle) {
        let k = self.state.n_active();
        let stats = FractionStats::new(&self.state.pi_prime, k);
        let (alpha0, gamma, eps) = (self.state.alpha0, self.state.gamma, self.cfg.mh_eps);
        for l in self.n_fixed_beta()..k {
            let cur = self.state.beta_prime[l];
            let prop = propose_reflected(cur, eps, rng);
            if !(prop > 0.0 && prop < 1.0) {
                self.acceptance.beta_prime.record(false);
                continue;
            }
            let bp = &mut self.state.beta_prime;
            let old = stats.ln_density(bp, alpha0, l) + (gamma - 1.0) * (-cur).ln_1p();
            bp[l] = prop;
            let new = stats.ln_density(bp, alpha0, l) + (gamma - 1.0) * (-prop).ln_1p();
            let ok = mh_accept(new - old, rng);
            if !ok {
                bp[l] = cur;
            }
            self.acceptance.beta_prime.record(ok);
        }
    }

    /// Group fractions: Beta for occupied atoms, spike-and-Beta otherwise.
    pub fn step_pi_prime(&mut self, rng: &mut RngHandle) {
        let params = group_beta_params(self.state.alpha0, &self.state.beta_prime);
        let k = params.len();
        let st = &mut self.state;
        let p = &st.p;
        st.pi_prime
            .par_iter_mut()
            .zip(&st.z)
            .enumerate()
            .for_each(|(j, (row, zj))| {
                let mut r = rng.substream(j as u64);
                let mut m = vec![0.0f64; k];
                for &l in zj {
                    m[l] += 1.0;
                }
                let mut tail: f64 = m.iter().sum();
                for l in 0..k {
                    tail -= m[l];
                    let (a, b) = params[l];
                    row[l] = if m[l] > 0.0 {
                        beta_unchecked(a + m[l], b + tail, &mut r)
                    } else {
                        let keep = if p[j] >= 1.0 {
                            true
                        } else {
                            let lr = if tail > 0.0 { ln_beta(a, b) - ln_beta(a, b + tail) } else { 0.0 };
                            let p_star = 1.0 / (1.0 + (1.0 - p[j]) / p[j] * lr.exp());
                            bernoulli(p_star, &mut r)
                        };
                        if keep {
                            beta_unchecked(a, b + tail, &mut r)
                        } else {
                            0.0
                        }
                    };
                }
            });
    }

    /// Conjugate update of each unfixed `p_j`.
    pub fn step_p(&mut self, rng: &mut RngHandle) {
        if self.cfg.fixed_p.is_some() {
            return;
        }
        let (a, b) = self.cfg.p_prior;
        let k = self.state.n_active() as f64;
        for (j, row) in self.state.pi_prime.iter().enumerate() {
            let m0 = row.iter().filter(|&&v| v == 0.0).count() as f64;
            let mut r = rng.substream(j as u64);
            self.state.p[j] = beta_unchecked(a + k - m0, b + m0, &mut r);
        }
    }

    /// Labels from the slice-restricted categorical.
    pub fn step_z(&mut self, rng: &mut RngHandle) -> Result<()> {
        let zeta = self.cfg.zeta;
        let k = self.state.n_active();
        let caches: Vec<AtomCache> = self.state.atoms.iter().map(AtomCache::new).collect();
        let ln_xi: Vec<f64> = (0..k).map(|l| xi(zeta, l).ln()).collect();
        let view = &self.view;
        let st = &mut self.state;
        let u = &st.u;
        st.z.par_iter_mut()
            .zip(&st.pi_prime)
            .enumerate()
            .try_for_each(|(j, (zj, row))| {
                let mut r = rng.substream(j as u64);
                let mut lpi = vec![f64::NEG_INFINITY; k];
                let mut acc = 0.0;
                for l in 0..k {
                    if row[l] > 0.0 {
                        lpi[l] = row[l].ln() + acc - ln_xi[l];
                    }
                    acc += (-row[l]).ln_1p();
                }
                let mut logw = Vec::with_capacity(k);
                for (i, zi) in zj.iter_mut().enumerate() {
                    let kmax = active_atoms(zeta, u[j][i]).min(k);
                    logw.clear();
                    for l in 0..kmax {
                        logw.push(if lpi[l].is_finite() {
                            lpi[l] + view.ln_lik(j, i, &caches[l])
                        } else {
                            f64::NEG_INFINITY
                        });
                    }
                    *zi = categorical_log(&logw, &mut r).ok_or_else(|| {
                        Error::Invariant(format!("empty label support at group {j}, observation {i}"))
                    })?;
                }
                Ok(())
            })
    }

    /// Latent Gaussian values of count observations given their labels.
    pub fn step_latent_counts(&mut self, rng: &mut RngHandle) {
        if !self.view.is_count() {
            return;
        }
        let view = &self.view;
        let atoms = &self.state.atoms;
        self.state
            .latent_y
            .par_iter_mut()
            .zip(&self.state.z)
            .enumerate()
            .for_each(|(j, (yj, zj))| {
                let mut r = rng.substream(j as u64);
                for (i, (y, &l)) in yj.iter_mut().zip(zj).enumerate() {
                    *y = view.sample_latent(j, i, &atoms[l], &mut r);
                }
            });
    }

    /// Conjugate atom updates pooling members across groups.
    pub fn step_atoms(&mut self, rng: &mut RngHandle) {
        let k = self.state.n_active();
        let members = self.members(k);
        let start = self.n_fixed_atoms().min(k);
        let view = &self.view;
        let base = &self.cfg.base;
        let latent = &self.state.latent_y;
        let fresh: Vec<Atom> = (start..k)
            .into_par_iter()
            .map(|l| view.sample_atom(base, &members[l], latent, &mut rng.substream(l as u64)))
            .collect();
        for (l, a) in (start..k).zip(fresh) {
            self.state.atoms[l] = a;
        }
    }

    /// Refresh `alpha0` and `gamma` unless fixed.
    pub fn step_concentrations(&mut self, rng: &mut RngHandle) {
        match self.cfg.concentration {
            ConcentrationUpdate::StickConditional => self.concentrations_sticks(rng),
            ConcentrationUpdate::Tables => self.concentrations_tables(rng),
        }
    }

    fn concentrations_sticks(&mut self, rng: &mut RngHandle) {
        let k = self.state.n_active();
        if self.cfg.fixed_gamma.is_none() {
            let (a, b) = self.cfg.gamma_prior;
            let s: f64 = self.state.beta_prime.iter().map(|v| (-v).ln_1p()).sum();
            self.state.gamma = sample_gamma(a + k as f64, b - s, rng).expect("positive parameters");
        }
        if self.cfg.fixed_alpha0.is_none() {
            let (a, b) = self.cfg.alpha0_prior;
            let stats = FractionStats::new(&self.state.pi_prime, k);
            let bp = &self.state.beta_prime;
            let target = |al: f64| ln_gamma_pdf(al, a, b) + al.ln() + stats.ln_density(bp, al, 0);
            let cur = self.state.alpha0;
            let prop = cur * (ALPHA0_STEP * std_normal(rng)).exp();
            let ok = prop.is_finite() && prop > 0.0 && mh_accept(target(prop) - target(cur), rng);
            if ok {
                self.state.alpha0 = prop;
            }
            self.acceptance.alpha0.record(ok);
        }
    }

    fn concentrations_tables(&mut self, rng: &mut RngHandle) {
        let counts = self.state.counts();
        let alpha0 = self.state.alpha0;
        let mut rest = 1.0;
        let beta: Vec<f64> = self
            .state
            .beta_prime
            .iter()
            .map(|&b| {
                let v = b * rest;
                rest *= 1.0 - b;
                v
            })
            .collect();
        self.state.table_counts = counts.iter().map(|m| table_counts(m, &beta, alpha0, rng)).collect();
        let w = &self.state.table_counts;
        let total_tables: u64 = w.iter().flatten().sum();
        if self.cfg.fixed_alpha0.is_none() {
            let (a, b) = self.cfg.alpha0_prior;
            let mut shape = a + total_tables as f64;
            let mut rate = b;
            for &n in &self.sizes {
                if n == 0 {
                    continue;
                }
                let n = n as f64;
                rate -= beta_unchecked(alpha0 + 1.0, n, rng).ln();
                if bernoulli(n / (n + alpha0), rng) {
                    shape -= 1.0;
                }
            }
            self.state.alpha0 = sample_gamma(shape, rate, rng).expect("positive parameters");
        }
        if self.cfg.fixed_gamma.is_none() {
            let (a, b) = self.cfg.gamma_prior;
            let dishes = (0..self.state.n_active())
                .filter(|&l| w.iter().any(|row| row[l] > 0))
                .count() as f64;
            self.state.gamma = if total_tables == 0 {
                sample_gamma(a, b, rng).expect("positive parameters")
            } else {
                let g = self.state.gamma;
                let t = total_tables as f64;
                let eta = beta_unchecked(g + 1.0, t, rng);
                let rate = b - eta.ln();
                let odds = (a + dishes - 1.0).max(0.0) / (t * rate);
                let shape = if bernoulli(odds / (1.0 + odds), rng) { a + dishes } else { a + dishes - 1.0 };
                sample_gamma(shape.max(a), rate, rng).expect("positive parameters")
            };
        }
    }

    /// One full sweep.
    pub fn sweep(&mut self, t: u64) -> Result<()> {
        let it = self.chain.substream(t);
        self.step_slice_u(&mut it.substream(S_U));
        self.step_beta_prime(&mut it.substream(S_BETA));
        self.step_pi_prime(&mut it.substream(S_PI));
        self.step_p(&mut it.substream(S_P));
        self.step_z(&mut it.substream(S_Z))?;
        self.step_latent_counts(&mut it.substream(S_Y));
        self.step_atoms(&mut it.substream(S_ATOMS));
        self.step_concentrations(&mut it.substream(S_CONC));
        if cfg!(debug_assertions) {
            self.check_invariants()?;
        }
        Ok(())
    }

    /// State validity: labels inside the truncation, slice variables below
    /// their levels, no occupied skipped atom, latent counts inside bins.
    pub fn check_invariants(&self) -> Result<()> {
        let st = &self.state;
        let k = st.n_active();
        let fail = |m: String| Err(Error::Invariant(m));
        if st.beta_prime.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return fail("top-level fraction outside (0, 1)".into());
        }
        if st.atoms.len() != k || st.pi_prime.iter().any(|r| r.len() != k) {
            return fail("active arrays disagree in length".into());
        }
        for (j, zj) in st.z.iter().enumerate() {
            for (i, &l) in zj.iter().enumerate() {
                if l >= k {
                    return fail(format!("label {l} beyond truncation {k}"));
                }
                if st.pi_prime[j][l] <= 0.0 {
                    return fail(format!("group {j} occupies skipped atom {l}"));
                }
                let u = st.u[j][i];
                if !(u > 0.0 && u <= xi(self.cfg.zeta, l)) && st.u[j][i] != 0.0 {
                    return fail(format!("slice variable outside its level at ({j}, {i})"));
                }
            }
        }
        if let ObsView::Count { x, .. } = &self.view {
            for (j, (xj, yj)) in x.iter().zip(&st.latent_y).enumerate() {
                for (i, (&xv, &y)) in xj.iter().zip(yj).enumerate() {
                    let (lo, hi) = super::count_bin(xv);
                    if !(y >= lo && y < hi) {
                        return fail(format!("latent value {y} outside the bin of count {xv} at ({j}, {i})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Log joint density at the current truncation.
    pub fn log_joint(&self) -> f64 {
        let st = &self.state;
        let caches: Vec<AtomCache> = st.atoms.iter().map(AtomCache::new).collect();
        let mut total = 0.0;
        for (j, zj) in st.z.iter().enumerate() {
            let w = st.group_weights(j);
            for (i, &l) in zj.iter().enumerate() {
                total += self.view.ln_lik(j, i, &caches[l]) + w[l].ln();
            }
        }
        let params = group_beta_params(st.alpha0, &st.beta_prime);
        for (j, row) in st.pi_prime.iter().enumerate() {
            let pj = st.p[j];
            for (&v, &(a, b)) in row.iter().zip(&params) {
                total += if v == 0.0 {
                    (1.0 - pj).ln()
                } else {
                    let lp = if pj < 1.0 { pj.ln() } else { 0.0 };
                    lp + ln_beta_pdf(v, a, b)
                };
            }
        }
        total += st.beta_prime.iter().map(|&b| ln_beta_pdf(b, 1.0, st.gamma)).sum::<f64>();
        if self.cfg.fixed_p.is_none() {
            let (a, b) = self.cfg.p_prior;
            total += st.p.iter().map(|&p| ln_beta_pdf(p, a, b)).sum::<f64>();
        }
        total += st.atoms.iter().map(|a| ln_base_density(&self.cfg.base, a)).sum::<f64>();
        if self.cfg.fixed_alpha0.is_none() {
            total += ln_gamma_pdf(st.alpha0, self.cfg.alpha0_prior.0, self.cfg.alpha0_prior.1);
        }
        if self.cfg.fixed_gamma.is_none() {
            total += ln_gamma_pdf(st.gamma, self.cfg.gamma_prior.0, self.cfg.gamma_prior.1);
        }
        total
    }

    fn record(&self, t: usize, trace: &mut ChainTrace) {
        let st = &self.state;
        trace.iterations.push(t);
        trace.z.push(st.z.iter().flatten().copied().collect());
        trace.weights.push(st.weights());
        trace.atoms.push(st.atoms.clone());
        trace.p.push(st.p.clone());
        trace.alpha0.push(st.alpha0);
        trace.gamma.push(st.gamma);
        trace.log_joint.push(self.log_joint());
        if self.cfg.record_latent && self.view.is_count() {
            trace.latent_y.push(st.latent_y.iter().flatten().copied().collect());
        }
    }

    fn model_name(&self) -> &'static str {
        let hdp = self.cfg.fixed_p.as_ref().is_some_and(|p| p.iter().all(|&v| v == 1.0));
        match (hdp, self.view.is_count()) {
            (true, _) => "hdp",
            (false, true) => "dpam",
            (false, false) => "pam",
        }
    }

    /// Burn-in then `n_keep` sweeps, keeping every `thin`-th.
    pub fn run(mut self) -> Result<ChainTrace> {
        let mut trace = ChainTrace {
            model: self.model_name().to_string(),
            group_sizes: self.sizes.clone(),
            ..Default::default()
        };
        let total = self.cfg.burn_in + self.cfg.n_keep;
        for t in 0..total {
            self.sweep(t as u64)?;
            if t >= self.cfg.burn_in && (t - self.cfg.burn_in + 1) % self.cfg.thin == 0 {
                self.record(t + 1, &mut trace);
            }
        }
        trace.acceptance = self.acceptance;
        Ok(trace)
    }
}

/// Latent table counts: `w = sum_t Bernoulli(c / (c + t - 1))` with
/// `c = alpha0 beta_k`.
pub(crate) fn table_counts(m: &[usize], beta: &[f64], alpha0: f64, rng: &mut RngHandle) -> Vec<u64> {
    m.iter()
        .zip(beta)
        .map(|(&mk, &bk)| {
            let c = alpha0 * bk;
            (0..mk).filter(|&t| bernoulli(c / (c + t as f64), rng)).count() as u64
        })
        .collect()
}

pub fn run_chain(data: &GroupedDataset, cfg: &PamConfig) -> Result<ChainTrace> {
    PamSampler::new(data, cfg.clone())?.run()
}

/// Independent chains on streams `cfg.stream, cfg.stream + 1, ...`.
pub fn run_chains(data: &GroupedDataset, cfg: &PamConfig, n_chains: usize) -> Result<Vec<ChainTrace>> {
    (0..n_chains)
        .into_par_iter()
        .map(|c| {
            let mut cc = cfg.clone();
            cc.stream = cfg.stream + c as u64;
            run_chain(data, &cc)
        })
        .collect()
}
