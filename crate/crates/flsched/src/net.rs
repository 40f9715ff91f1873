use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radio and geometry parameters of the network model.
///
/// Access points and user equipment form planar Poisson point processes of
/// density `ap_density`. Each AP serves `ues_per_cell` UEs over `subchannels`
/// orthogonal subchannels, so `G = K/N` UEs contend for each subchannel.
/// `sinr_threshold` is linear (not dB); dB conversion happens at the CLI
/// boundary only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// AP density λ, per m².
    pub ap_density: f64,
    /// UEs associated with each AP (K).
    pub ues_per_cell: u32,
    /// Orthogonal subchannels (N).
    pub subchannels: u32,
    /// UE transmit power P_ut, watts.
    pub tx_power: f64,
    /// Noise power σ², watts.
    pub noise_power: f64,
    /// Path loss exponent α, must exceed 2 for interference integrals to converge.
    pub path_loss_exp: f64,
    /// SINR decoding threshold θ, linear.
    pub sinr_threshold: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        // Interference-limited defaults: λ = 1e-4 m⁻², K = 100, N = 10,
        // α = 3.8, θ = 0 dB. P_ut and σ² make noise negligible at this density.
        NetworkParams {
            ap_density: 1e-4,
            ues_per_cell: 100,
            subchannels: 10,
            tx_power: 0.2,
            noise_power: 1e-13,
            path_loss_exp: 3.8,
            sinr_threshold: 1.0,
        }
    }
}

impl NetworkParams {
    /// Group ratio G = K/N (ceiling when N does not divide K).
    pub fn group_ratio(&self) -> u32 {
        self.ues_per_cell.div_ceil(self.subchannels)
    }

    /// Whether N divides K exactly; a false value is flagged, not fatal.
    pub fn divisible(&self) -> bool {
        self.ues_per_cell % self.subchannels == 0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ap_density > 0.0) {
            return Err(Error::InvalidParameter("ap_density must be > 0".into()));
        }
        if self.subchannels == 0 || self.ues_per_cell < self.subchannels {
            return Err(Error::InvalidParameter(
                "need K >= N >= 1 (ues_per_cell >= subchannels)".into(),
            ));
        }
        if !(self.path_loss_exp > 2.0) {
            return Err(Error::InvalidParameter(
                "path_loss_exp must exceed 2 (interference integral diverges)".into(),
            ));
        }
        if !(self.tx_power > 0.0) {
            return Err(Error::InvalidParameter("tx_power must be > 0".into()));
        }
        if self.noise_power < 0.0 {
            return Err(Error::InvalidParameter("noise_power must be >= 0".into()));
        }
        if !(self.sinr_threshold > 0.0) {
            return Err(Error::InvalidParameter("sinr_threshold must be > 0".into()));
        }
        Ok(())
    }

    /// Copy with a different linear threshold.
    pub fn with_theta(&self, theta: f64) -> Self {
        NetworkParams {
            sinr_threshold: theta,
            ..*self
        }
    }
}

/// Scheduling policy identifier shared by the analytic, Monte Carlo, and
/// training modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    /// Random scheduling: a uniform N-subset each round.
    Rs,
    /// Round robin: fixed groups cycled over G rounds. Analytic quantities
    /// refer to the scheduled round; cycle accounting multiplies rounds by G.
    Rr,
    /// Proportional fair: top N instantaneous-over-average SNR ratios.
    Pf,
    /// No scheduling: all K UEs transmit at once, G per subchannel.
    Ns,
    /// One UE per round on the full band, with a θ/N effective threshold.
    OneShot,
    /// Batched RS: C subrounds per aggregation.
    MultiRound(u32),
}

impl Policy {
    pub fn label(&self) -> String {
        match self {
            Policy::Rs => "RS".into(),
            Policy::Rr => "RR".into(),
            Policy::Pf => "PF".into(),
            Policy::Ns => "NS".into(),
            Policy::OneShot => "OneShot".into(),
            Policy::MultiRound(c) => format!("MultiRound({c})"),
        }
    }

    pub fn parse(s: &str) -> Result<Policy> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "rs" => Policy::Rs,
            "rr" => Policy::Rr,
            "pf" => Policy::Pf,
            "ns" => Policy::Ns,
            "oneshot" | "one-shot" | "one_shot" => Policy::OneShot,
            _ => {
                if let Some(rest) = lower
                    .strip_prefix("multiround(")
                    .and_then(|r| r.strip_suffix(')'))
                {
                    let c: u32 = rest.parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad MultiRound count in {t:?}"))
                    })?;
                    Policy::MultiRound(c)
                } else {
                    return Err(Error::InvalidParameter(format!("unknown policy {t:?}")));
                }
            }
        })
    }
}

/// dB → linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio → dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
