//! Experiment configuration: JSON file loading, validation, defaults, and a
//! stable content hash used for output provenance.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{DataSource, DatasetSpec, PartitionRule};
use crate::error::{Error, Result};
use crate::net::NetworkParams;

/// Everything a run needs besides the master seed. Thresholds and sweep grids
/// are in dB here (CLI-facing unit); conversion to linear happens when the
/// config is turned into `NetworkParams`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub ap_density: f64,
    pub ues_per_cell: u32,
    pub subchannels: u32,
    pub tx_power: f64,
    pub noise_power: f64,
    pub path_loss_exp: f64,
    pub sinr_threshold_db: f64,
    /// Decrement factor β of the local solver.
    pub beta: f64,
    /// Target duality gap ε for rounds-to-gap computations.
    pub epsilon: f64,
    pub dataset: DatasetSpec,
    /// Policy labels: rs, rr, pf, ns, one_shot, multi_round:<C>.
    pub policies: Vec<String>,
    pub theta_grid_db: Vec<f64>,
    pub group_grid: Vec<u32>,
    pub subchannel_grid: Vec<u32>,
    pub rounds: usize,
    pub local_passes: usize,
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ap_density: 1e-4,
            ues_per_cell: 100,
            subchannels: 10,
            tx_power: 0.2,
            noise_power: 1e-13,
            path_loss_exp: 3.8,
            sinr_threshold_db: 0.0,
            beta: 0.25,
            epsilon: 2.0,
            dataset: DatasetSpec {
                source: DataSource::SyntheticGaussian {
                    n: 200,
                    d: 5,
                    separation: 4.0,
                    label_noise: 0.05,
                },
                partition: PartitionRule::BalancedIid,
                seed: 0,
            },
            policies: vec!["rs".into(), "rr".into(), "pf".into()],
            theta_grid_db: vec![-25.0, -20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0],
            group_grid: vec![1, 2, 4, 6, 8, 10, 15, 20],
            subchannel_grid: (1..=50).collect(),
            rounds: 100,
            local_passes: 5,
            output_dir: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.network()?.validate()?;
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta must be in [0,1), got {}", self.beta)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("policy list is empty".into()));
        }
        for p in &self.policies {
            crate::net::Policy::parse(p)
                .map_err(|e| Error::Config(format!("policy {p:?}: {e}")))?;
        }
        for (name, empty) in [
            ("theta_grid_db", self.theta_grid_db.is_empty()),
            ("group_grid", self.group_grid.is_empty()),
            ("subchannel_grid", self.subchannel_grid.is_empty()),
        ] {
            if empty {
                return Err(Error::Config(format!("{name} is empty")));
            }
        }
        if self.theta_grid_db.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("theta grid contains non-finite values".into()));
        }
        if self.rounds == 0 || self.local_passes == 0 {
            return Err(Error::Config("rounds and local_passes must be >= 1".into()));
        }
        Ok(())
    }

    /// Network parameters with the threshold converted to linear scale.
    pub fn network(&self) -> Result<NetworkParams> {
        let p = NetworkParams {
            ap_density: self.ap_density,
            ues_per_cell: self.ues_per_cell,
            subchannels: self.subchannels,
            tx_power: self.tx_power,
            noise_power: self.noise_power,
            path_loss_exp: self.path_loss_exp,
            sinr_threshold: crate::net::db_to_linear(self.sinr_threshold_db),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn parsed_policies(&self) -> Result<Vec<crate::net::Policy>> {
        self.policies.iter().map(|p| crate::net::Policy::parse(p)).collect()
    }

    /// Stable hex digest of the canonical JSON encoding, used for output
    /// provenance lines.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_matches_headline_numbers() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let net = cfg.network().unwrap();
        assert_eq!(net.ap_density, 1e-4);
        assert_eq!(net.ues_per_cell, 100);
        assert_eq!(net.subchannels, 10);
        assert_eq!(net.path_loss_exp, 3.8);
        assert!((net.sinr_threshold - 1.0).abs() < 1e-12); // 0 dB
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.beta = 0.3;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn rejects_bad_fields() {
        let mut cfg = ExperimentConfig::default();
        cfg.beta = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.policies = vec!["frobnicate".into()];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.theta_grid_db.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.path_loss_exp = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"beta": 0.05}"#).unwrap();
        assert_eq!(cfg.beta, 0.05);
        assert_eq!(cfg.ues_per_cell, 100);
        cfg.validate().unwrap();
    }
}
