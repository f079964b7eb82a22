use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::fdm::Grid;
use crate::market::{DerivativeContract, MarketModel};
use crate::prep::FitConfig;
use crate::quantum::{AnsatzCircuit, Entangler};
use crate::vqs::EvalMode;

/// How `|V(tau_ter)>` is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evolution {
    #[default]
    Vqs,
    /// Classical explicit Euler on the same grid, encoded exactly.
    ClassicalEuler,
}

/// How `|psi_V>` is prepared.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ValueState {
    #[default]
    Exact,
    Variational {
        #[serde(default)]
        fit: FitConfig,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
}

/// Reference prices computed next to Algorithm 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparisons {
    #[serde(default = "yes")]
    pub classical: bool,
    /// Closed form, when the contract is a single-asset double knock-out call.
    #[serde(default = "yes")]
    pub analytic: bool,
    #[serde(default)]
    pub monte_carlo: Option<McConfig>,
}

fn yes() -> bool {
    true
}

impl Default for Comparisons {
    fn default() -> Self {
        Self { classical: true, analytic: true, monte_carlo: None }
    }
}

/// A complete pricing job, read from one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingJobConfig {
    pub market: MarketModel,
    pub contract: DerivativeContract,
    /// `log2 n_gr`.
    pub qubits_per_asset: usize,
    #[serde(default = "default_layers")]
    pub layers: usize,
    /// CZ layout of the ansatz.
    #[serde(default)]
    pub entangler: Entangler,
    pub dtau: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Overrides `max{A_i sqrt(u_i s0_i), A_0}`.
    #[serde(default)]
    pub a_tilde: Option<f64>,
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    /// Overrides the payoff bound `a_0 + sum a_i u_i`.
    #[serde(default)]
    pub payoff_bound: Option<f64>,
    /// Overrides the terminal-horizon rule.
    #[serde(default)]
    pub t_ter: Option<f64>,
    /// SWAP-test evaluation.
    #[serde(default = "default_mode")]
    pub mode: EvalMode,
    /// Evaluation of the VQS matrices.
    #[serde(default = "default_mode")]
    pub vqs_mode: EvalMode,
    #[serde(default = "default_lambda")]
    pub lambda_reg: f64,
    #[serde(default)]
    pub evolution: Evolution,
    #[serde(default)]
    pub value_state: ValueState,
    #[serde(default)]
    pub compare: Comparisons,
    #[serde(default)]
    pub t_sweep: Vec<f64>,
    /// Output directory for reports.
    #[serde(default)]
    pub output: Option<String>,
}

fn default_layers() -> usize {
    4
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_zeta() -> f64 {
    1.0
}

fn default_mode() -> EvalMode {
    EvalMode::Exact
}

fn default_lambda() -> f64 {
    1e-8
}

impl PricingJobConfig {
    /// Defaults for everything but the market, contract and grid.
    pub fn new(market: MarketModel, contract: DerivativeContract, qubits_per_asset: usize, dtau: f64) -> Self {
        Self {
            market,
            contract,
            qubits_per_asset,
            layers: default_layers(),
            entangler: Entangler::Ring,
            dtau,
            epsilon: default_epsilon(),
            a_tilde: None,
            zeta: default_zeta(),
            payoff_bound: None,
            t_ter: None,
            mode: EvalMode::Exact,
            vqs_mode: EvalMode::Exact,
            lambda_reg: default_lambda(),
            evolution: Evolution::Vqs,
            value_state: ValueState::Exact,
            compare: Comparisons::default(),
            t_sweep: Vec::new(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.market.validate()?;
        self.contract.validate(&self.market)?;
        if self.qubits_per_asset == 0 || self.qubits_per_asset * self.market.d() > 24 {
            return Err(PricingError::validation(format!(
                "qubits per asset must be >= 1 with at most 24 qubits in total, got {} x {}",
                self.qubits_per_asset,
                self.market.d()
            )));
        }
        if !(self.dtau > 0.0) {
            return Err(PricingError::validation("dtau must be > 0"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(PricingError::validation(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.zeta > 0.0) {
            return Err(PricingError::validation("zeta must be > 0"));
        }
        for (name, v) in [("a_tilde", self.a_tilde), ("payoff_bound", self.payoff_bound)] {
            if matches!(v, Some(x) if !(x > 0.0)) {
                return Err(PricingError::validation(format!("{name} must be > 0")));
            }
        }
        if let Some(t) = self.t_ter {
            if !(t > 0.0 && t <= self.contract.maturity) {
                return Err(PricingError::validation("t_ter must lie in (0, T]"));
            }
        }
        if let Some(t) = self.t_sweep.iter().find(|t| !(**t > 0.0 && **t <= self.contract.maturity)) {
            return Err(PricingError::validation(format!("sweep time {t} outside (0, T]")));
        }
        for mode in [self.mode, self.vqs_mode] {
            if let EvalMode::Shots { shots: 0, .. } = mode {
                return Err(PricingError::validation("shots must be >= 1"));
            }
        }
        if !(self.lambda_reg >= 0.0) {
            return Err(PricingError::validation("lambda_reg must be >= 0"));
        }
        Ok(())
    }

    pub fn ansatz(&self) -> Result<AnsatzCircuit> {
        Ok(AnsatzCircuit::new(self.grid()?.total_qubits(), self.layers)?.with_entangler(self.entangler))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::for_contract(&self.contract, self.qubits_per_asset)
    }

    pub fn a_tilde(&self) -> f64 {
        self.a_tilde.unwrap_or_else(|| self.contract.a_tilde(&self.market))
    }

    pub fn payoff_bound(&self) -> f64 {
        self.payoff_bound.unwrap_or_else(|| self.contract.payoff_bound())
    }

    /// Read a config, or the `config` block of a run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let cfg: Self = match value.get("config") {
            Some(inner) if value.get("market").is_none() => serde_json::from_value(inner.clone())?,
            _ => serde_json::from_value(value)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
