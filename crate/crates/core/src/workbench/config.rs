//! Fit configuration: defaults, config files and command-line overrides.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::atoms::BaseMeasure;
use crate::data::{GroupedDataset, Observations};
use crate::error::{Error, Result};
use crate::sampler::{Acceptance, ConcentrationUpdate, FsbpConfig, Kernel, PamConfig};
use crate::stats::{NigParams, NiwParams};

/// Settings of one `fit` invocation after defaults, the config file and
/// command-line flags have been merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: String,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub burnin: Option<usize>,
    pub keep: Option<usize>,
    pub thin: usize,
    pub seed: u64,
    pub chains: usize,
    /// `one`, `from-data`, or a comma-separated list with one value per group.
    pub eta: String,
    pub p_prior: [f64; 2],
    pub alpha0_prior: [f64; 2],
    pub gamma_prior: [f64; 2],
    pub m0: f64,
    pub k0: f64,
    pub a_sig: f64,
    pub b_sig: f64,
    /// Inverse-Wishart degrees of freedom; `q + 1` when unset.
    pub v0: Option<f64>,
    /// Inverse-Wishart scale is `psi_scale * I`.
    pub psi_scale: f64,
    pub zeta: f64,
    pub mh_eps: f64,
    pub fixed_p: Option<f64>,
    pub fixed_alpha0: Option<f64>,
    pub fixed_gamma: Option<f64>,
    /// `stick` or `tables`.
    pub concentration: String,
    pub init_clusters: usize,
    pub record_latent: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let nig = NigParams::default();
        Self {
            model: "pam".into(),
            data: None,
            out: None,
            burnin: None,
            keep: None,
            thin: 1,
            seed: 1,
            chains: 1,
            eta: "one".into(),
            p_prior: [0.5, 0.5],
            alpha0_prior: [3.0, 3.0],
            gamma_prior: [3.0, 3.0],
            m0: nig.m0,
            k0: nig.k0,
            a_sig: nig.a_sig,
            b_sig: nig.b_sig,
            v0: None,
            psi_scale: 1.0,
            zeta: 0.5,
            mh_eps: 0.1,
            fixed_p: None,
            fixed_alpha0: None,
            fixed_gamma: None,
            concentration: "stick".into(),
            init_clusters: 10,
            record_latent: false,
        }
    }
}

/// Which sampler a model name maps to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Pam,
    Dpam,
    Hdp,
    Fsbp,
    Dp,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "pam" => ModelKind::Pam,
            "dpam" => ModelKind::Dpam,
            "hdp" => ModelKind::Hdp,
            "fsbp" => ModelKind::Fsbp,
            "dp" => ModelKind::Dp,
            other => {
                return Err(Error::Usage(format!(
                    "unknown model {other:?}; expected pam, dpam, hdp, fsbp or dp"
                )))
            }
        })
    }

    pub fn is_single_group(self) -> bool {
        matches!(self, ModelKind::Fsbp | ModelKind::Dp)
    }
}

/// Parses a flat JSON or TOML file into a key-value map.
pub fn load_config_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{');
    let v: Value = if is_json {
        serde_json::from_str(&text).map_err(|e| Error::Validation(format!("config {}: {e}", path.display())))?
    } else {
        let t: toml::Table =
            toml::from_str(&text).map_err(|e| Error::Validation(format!("config {}: {e}", path.display())))?;
        serde_json::to_value(t)?
    };
    match v {
        Value::Object(m) => {
            if let Some((k, _)) = m.iter().find(|(_, v)| v.is_object()) {
                return Err(Error::Validation(format!("config key {k:?}: nested tables are not accepted")));
            }
            Ok(m)
        }
        _ => Err(Error::Validation("config file must hold key-value pairs".into())),
    }
}

/// Defaults, then `file`, then `flags`; unknown keys are rejected.
pub fn merge(file: Option<Map<String, Value>>, flags: Map<String, Value>) -> Result<RunConfig> {
    let Value::Object(mut m) = serde_json::to_value(RunConfig::default())? else {
        unreachable!("struct serializes to an object")
    };
    for layer in file.into_iter().chain(std::iter::once(flags)) {
        for (k, v) in layer {
            if !v.is_null() {
                m.insert(k.replace('-', "_"), v);
            }
        }
    }
    serde_json::from_value(Value::Object(m)).map_err(|e| Error::Validation(format!("configuration: {e}")))
}

impl RunConfig {
    pub fn model_kind(&self) -> Result<ModelKind> {
        ModelKind::parse(&self.model)
    }

    /// Fills model-dependent defaults and checks what can be checked
    /// without the data.
    pub fn resolve(mut self) -> Result<Self> {
        let kind = self.model_kind()?;
        let (b, k) = if kind.is_single_group() { (5_000, 5_000) } else { (10_000, 10_000) };
        self.burnin.get_or_insert(b);
        self.keep.get_or_insert(k);
        if self.data.is_none() {
            return Err(Error::Usage("fit requires --data".into()));
        }
        if self.chains == 0 {
            return Err(Error::Validation("chains must be at least 1".into()));
        }
        if !matches!(self.concentration.as_str(), "stick" | "tables") {
            return Err(Error::Validation(format!(
                "concentration must be `stick` or `tables`, got {:?}",
                self.concentration
            )));
        }
        Ok(self)
    }

    fn base(&self, data: &GroupedDataset) -> Result<BaseMeasure> {
        let bad = |e: Error| Error::Validation(e.to_string());
        Ok(match &data.obs {
            Observations::Multivariate { dim, .. } => {
                let q = *dim;
                let v0 = self.v0.unwrap_or(q as f64 + 1.0);
                BaseMeasure::Niw(
                    NiwParams::new(
                        DVector::from_element(q, self.m0),
                        self.k0,
                        v0,
                        DMatrix::identity(q, q) * self.psi_scale,
                    )
                    .map_err(bad)?,
                )
            }
            _ => BaseMeasure::Nig(NigParams::new(self.m0, self.k0, self.a_sig, self.b_sig).map_err(bad)?),
        })
    }

    fn kernel(&self, data: &GroupedDataset) -> Kernel {
        match &data.obs {
            Observations::Univariate(_) => Kernel::Univariate,
            Observations::Multivariate { dim, .. } => Kernel::Multivariate(*dim),
            Observations::Counts(_) => Kernel::Count,
        }
    }

    /// Scale factors for the count kernel, one per group.
    pub fn eta_values(&self, data: &GroupedDataset) -> Result<Option<Vec<f64>>> {
        if data.kind() != "count" {
            if self.eta != "one" {
                return Err(Error::Validation("eta applies to count data only".into()));
            }
            return Ok(None);
        }
        let j = data.n_groups();
        let v = match self.eta.as_str() {
            "one" => vec![1.0; j],
            "from-data" => data.count_means().expect("count data").into_iter().map(|m| m.max(1e-3)).collect(),
            list => {
                let v = list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| *x > 0.0 && x.is_finite())
                            .ok_or_else(|| Error::Validation(format!("eta entry {s:?} is not a positive number")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if v.len() != j {
                    return Err(Error::Validation(format!("eta has {} entries for {j} groups", v.len())));
                }
                v
            }
        };
        Ok(Some(v))
    }

    fn check_model_against(&self, data: &GroupedDataset) -> Result<ModelKind> {
        let kind = self.model_kind()?;
        let counts = data.kind() == "count";
        if kind == ModelKind::Dpam && !counts {
            return Err(Error::Validation("model dpam needs count data (`group,count` header)".into()));
        }
        if kind == ModelKind::Pam && counts {
            return Err(Error::Validation("count data: use --model dpam".into()));
        }
        if kind.is_single_group() && data.n_groups() != 1 {
            return Err(Error::Validation(format!(
                "model {} takes a single group, data has {}",
                self.model,
                data.n_groups()
            )));
        }
        Ok(kind)
    }

    pub fn pam_config(&self, data: &GroupedDataset) -> Result<PamConfig> {
        let kind = self.check_model_against(data)?;
        if kind.is_single_group() {
            return Err(Error::Usage(format!("model {} uses the FSBP sampler", self.model)));
        }
        let mut cfg = match self.kernel(data) {
            Kernel::Univariate => PamConfig::univariate(NigParams::default()),
            Kernel::Multivariate(q) => PamConfig::multivariate(NiwParams::standard(q)),
            Kernel::Count => PamConfig::count(NigParams::default()),
        };
        cfg.base = self.base(data)?;
        cfg.p_prior = (self.p_prior[0], self.p_prior[1]);
        cfg.alpha0_prior = (self.alpha0_prior[0], self.alpha0_prior[1]);
        cfg.gamma_prior = (self.gamma_prior[0], self.gamma_prior[1]);
        cfg.zeta = self.zeta;
        cfg.mh_eps = self.mh_eps;
        cfg.burn_in = self.burnin.unwrap_or(10_000);
        cfg.n_keep = self.keep.unwrap_or(10_000);
        cfg.thin = self.thin;
        cfg.seed = self.seed;
        cfg.eta = self.eta_values(data)?;
        cfg.fixed_p = match kind {
            ModelKind::Hdp => Some(vec![1.0; data.n_groups()]),
            _ => self.fixed_p.map(|p| vec![p; data.n_groups()]),
        };
        cfg.fixed_alpha0 = self.fixed_alpha0;
        cfg.fixed_gamma = self.fixed_gamma;
        cfg.concentration = if self.concentration == "tables" {
            ConcentrationUpdate::Tables
        } else {
            ConcentrationUpdate::StickConditional
        };
        cfg.init_clusters = self.init_clusters;
        cfg.record_latent = self.record_latent;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn fsbp_config(&self, data: &GroupedDataset) -> Result<FsbpConfig> {
        let kind = self.check_model_against(data)?;
        if !kind.is_single_group() {
            return Err(Error::Usage(format!("model {} uses the PAM sampler", self.model)));
        }
        let mut cfg = match self.kernel(data) {
            Kernel::Univariate => FsbpConfig::univariate(NigParams::default()),
            Kernel::Multivariate(q) => FsbpConfig::multivariate(NiwParams::standard(q)),
            Kernel::Count => FsbpConfig::count(NigParams::default()),
        };
        cfg.base = self.base(data)?;
        cfg.p_prior = (self.p_prior[0], self.p_prior[1]);
        cfg.gamma_prior = (self.gamma_prior[0], self.gamma_prior[1]);
        cfg.zeta = self.zeta;
        cfg.mh_eps = self.mh_eps;
        cfg.burn_in = self.burnin.unwrap_or(5_000);
        cfg.n_keep = self.keep.unwrap_or(5_000);
        cfg.thin = self.thin;
        cfg.seed = self.seed;
        cfg.eta = self.eta_values(data)?.map(|v| v[0]);
        cfg.fixed_p = if kind == ModelKind::Dp { Some(1.0) } else { self.fixed_p };
        cfg.fixed_gamma = self.fixed_gamma;
        cfg.init_clusters = self.init_clusters;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Per-chain entry of a run manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    /// Directory of the chain's trace files, relative to the manifest.
    pub dir: String,
    pub seed: u64,
    pub stream: u64,
    pub n_kept: usize,
    pub wall_seconds: f64,
    pub acceptance: Acceptance,
    pub acceptance_rates: AcceptanceRates,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRates {
    pub beta_prime: Option<f64>,
    pub pi_prime: Option<f64>,
    pub p: Option<f64>,
    pub alpha0: Option<f64>,
}

impl From<&Acceptance> for AcceptanceRates {
    fn from(a: &Acceptance) -> Self {
        let r = |x: crate::sampler::Rate| Some(x.rate()).filter(|v| v.is_finite());
        Self { beta_prime: r(a.beta_prime), pi_prime: r(a.pi_prime), p: r(a.p), alpha0: r(a.alpha0) }
    }
}

/// Everything needed to rerun a fit and to read its traces back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub model: String,
    pub data_kind: String,
    pub group_names: Vec<String>,
    pub group_sizes: Vec<usize>,
    pub eta: Option<Vec<f64>>,
    pub chains: Vec<ChainRecord>,
    pub wall_seconds: f64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Validation(format!("manifest {}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
