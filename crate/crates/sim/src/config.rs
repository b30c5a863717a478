//! Sweep configuration and its flat TOML file format.
//!
//! Every key is optional; missing keys take the [`SweepConfig::default`]
//! value. System parameters sit at the top level next to the sweep keys:
//!
//! ```toml
//! sweep_kind = "pmax"
//! sweep_values = [0.0, 10.0, 20.0]
//! n_realizations = 200
//! master_seed = 7
//! q_bar_values = [0.0, 1.0]
//! schemes = ["joint_opt", "frbv"]
//! m_t = 4
//! m_r = 4
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swipt_relay::{JointConfig, SystemParams};

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// `p_a = p_b = p_r = 10^(v/10)`.
    Pmax,
    /// `var_rsi_a = var_rsi_b = var_rsi_r = 10^(v/10)`.
    Rsi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Full search over the receive parameter `alpha`.
    JointOpt,
    /// Receive parameter fixed to `frbv_alpha`.
    Frbv,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::JointOpt => "joint_opt",
            Scheme::Frbv => "frbv",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        match s {
            "joint_opt" => Ok(Scheme::JointOpt),
            "frbv" => Ok(Scheme::Frbv),
            other => Err(SimError::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sweep_kind: SweepKind,
    /// Sweep points in dB, visited in the given order.
    pub sweep_values: Vec<f64>,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub q_bar_values: Vec<f64>,
    /// Template for every run; the sweep variable and `q_bar` are
    /// overwritten per point.
    pub fixed_params: SystemParams,
    pub schemes: Vec<Scheme>,
    pub frbv_alpha: f64,
    pub output_path: Option<PathBuf>,
    /// Solver settings. The FRBV value is added to the `alpha` grid anchors
    /// by [`SweepConfig::joint_config`].
    pub joint: JointConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sweep_kind: SweepKind::Pmax,
            sweep_values: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            n_realizations: 100,
            master_seed: 0,
            q_bar_values: vec![0.0],
            fixed_params: SystemParams::default(),
            schemes: vec![Scheme::JointOpt, Scheme::Frbv],
            frbv_alpha: 0.583,
            output_path: None,
            joint: JointConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> SimResult<()> {
        let bad = |msg: String| Err(SimError::Config(msg));
        if self.n_realizations < 1 {
            return bad("n_realizations must be >= 1".into());
        }
        if self.sweep_values.is_empty() {
            return bad("sweep_values must not be empty".into());
        }
        if let Some(v) = self.sweep_values.iter().find(|v| !v.is_finite()) {
            return bad(format!("sweep value {v} is not finite"));
        }
        if self.q_bar_values.is_empty() {
            return bad("q_bar_values must not be empty".into());
        }
        if let Some(q) = self.q_bar_values.iter().find(|q| !(q.is_finite() && **q >= 0.0)) {
            return bad(format!("q_bar value {q} must be finite and >= 0"));
        }
        if self.schemes.is_empty() {
            return bad("schemes must not be empty".into());
        }
        if !(0.0..=1.0).contains(&self.frbv_alpha) {
            return bad(format!("frbv_alpha = {} outside [0, 1]", self.frbv_alpha));
        }
        self.fixed_params
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        self.joint_config()
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))
    }

    /// Solver settings with `frbv_alpha` guaranteed to be on the search grid,
    /// so a joint run can never do worse than the FRBV run on the same
    /// channel.
    pub fn joint_config(&self) -> JointConfig {
        let mut cfg = self.joint.clone();
        if !cfg.alpha_grid.anchors.contains(&self.frbv_alpha) {
            cfg.alpha_grid.anchors.push(self.frbv_alpha);
        }
        cfg
    }

    pub fn from_toml_str(text: &str) -> SimResult<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        let cfg = file.into_config();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            SimError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }
}

/// On-disk layout: one flat table, unknown keys rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    sweep_kind: Option<SweepKind>,
    sweep_values: Option<Vec<f64>>,
    n_realizations: Option<usize>,
    master_seed: Option<u64>,
    q_bar_values: Option<Vec<f64>>,
    schemes: Option<Vec<Scheme>>,
    frbv_alpha: Option<f64>,
    output_path: Option<PathBuf>,
    p_a: Option<f64>,
    p_b: Option<f64>,
    p_r: Option<f64>,
    q_bar: Option<f64>,
    var_rsi_a: Option<f64>,
    var_rsi_b: Option<f64>,
    var_rsi_r: Option<f64>,
    var_proc: Option<f64>,
    m_t: Option<usize>,
    m_r: Option<usize>,
    beta: Option<f64>,
    tau: Option<u32>,
}

impl ConfigFile {
    fn into_config(self) -> SweepConfig {
        let d = SweepConfig::default();
        let p = d.fixed_params.clone();
        let fixed_params = SystemParams {
            p_a: self.p_a.unwrap_or(p.p_a),
            p_b: self.p_b.unwrap_or(p.p_b),
            p_r: self.p_r.unwrap_or(p.p_r),
            q_bar: self.q_bar.unwrap_or(p.q_bar),
            var_rsi_a: self.var_rsi_a.unwrap_or(p.var_rsi_a),
            var_rsi_b: self.var_rsi_b.unwrap_or(p.var_rsi_b),
            var_rsi_r: self.var_rsi_r.unwrap_or(p.var_rsi_r),
            var_proc: self.var_proc.unwrap_or(p.var_proc),
            m_t: self.m_t.unwrap_or(p.m_t),
            m_r: self.m_r.unwrap_or(p.m_r),
            beta: self.beta.unwrap_or(p.beta),
            tau: self.tau.unwrap_or(p.tau),
        };
        // A lone `q_bar` acts as a one-element threshold list.
        let q_bar_values = self
            .q_bar_values
            .or(self.q_bar.map(|q| vec![q]))
            .unwrap_or(d.q_bar_values);
        SweepConfig {
            sweep_kind: self.sweep_kind.unwrap_or(d.sweep_kind),
            sweep_values: self.sweep_values.unwrap_or(d.sweep_values),
            n_realizations: self.n_realizations.unwrap_or(d.n_realizations),
            master_seed: self.master_seed.unwrap_or(d.master_seed),
            q_bar_values,
            fixed_params,
            schemes: self.schemes.unwrap_or(d.schemes),
            frbv_alpha: self.frbv_alpha.unwrap_or(d.frbv_alpha),
            output_path: self.output_path,
            joint: d.joint,
        }
    }
}
