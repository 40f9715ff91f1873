//! Physical-layer Monte Carlo: Poisson point process geometry, Rayleigh
//! serving distances, thinned interferer fields, and empirical update success
//! probabilities.
//!
//! The interferer field is sampled on a finite disk whose radius scales with
//! the field density so the exclusion thinning is fully saturated at the rim;
//! the expected interference from beyond the rim is added deterministically.
//! Trials use counter-based substreams, so results are bitwise identical for a
//! fixed master seed regardless of thread count or execution order.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{NetworkParams, Policy};
use crate::rng::substream;

/// Which reading of the interferer exclusion exponent to sample.
///
/// The two differ by a factor of π inside the exponent; the standard form is
/// the default, the unscaled form (area term without the factor π) is kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum IntensityMode {
    /// Radial intensity λ(1 − exp(−(12/5)·λπx²)).
    #[default]
    StandardExclusion,
    /// Radial intensity λ(1 − exp(−(12/5)·λx²)).
    UnscaledExclusion,
}

/// One sampled uplink: serving link plus the interferer field.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Serving distance r_k, metres.
    pub serving_distance: f64,
    /// Serving fade h_k, unit-mean exponential (or an order statistic for PF).
    pub serving_fade: f64,
    /// Interferers as (distance, fade) pairs.
    pub interferers: Vec<(f64, f64)>,
    /// Deterministic far-field interference beyond the sampling disk,
    /// normalized by transmit power (same units as Σ h·d^{−α}).
    pub tail_interference: f64,
}

/// Empirical success probability with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: u64,
}

/// Serving distance draw: density f(r) = 2πλr·exp(−λπr²) (Rayleigh).
pub fn sample_serving_distance<R: Rng>(lambda: f64, rng: &mut R) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("density must be > 0".into()));
    }
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    Ok((-u.ln() / (lambda * PI)).sqrt())
}

/// Sampling-disk radius for a field of effective density `lambda_eff`: 13
/// mean point spacings, far enough that the exclusion thinning factor at the
/// rim differs from 1 by less than e^{−300}.
pub fn sim_radius(lambda_eff: f64) -> f64 {
    13.0 / (lambda_eff * PI).sqrt()
}

/// Expected interference (normalized by transmit power, unit-mean fades) from
/// a homogeneous field of density `lambda_eff` outside radius `r`:
/// 2πλ·r^{2−α}/(α−2).
pub fn expected_tail_interference(lambda_eff: f64, alpha: f64, r: f64) -> f64 {
    2.0 * PI * lambda_eff * r.powf(2.0 - alpha) / (alpha - 2.0)
}

/// Interferer field on a disk of radius `radius` under the chosen exclusion
/// mode; fades are i.i.d. unit-mean exponential. The serving distance does not
/// enter the thinned intensity (the exclusion law depends only on the field
/// geometry) but is kept in the signature for interface symmetry.
pub fn sample_interference_field<R: Rng>(
    params: &NetworkParams,
    mode: IntensityMode,
    _serving_distance: f64,
    radius: f64,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    if !(params.path_loss_exp > 2.0) {
        return Err(Error::InvalidParameter(
            "path_loss_exp must exceed 2 (divergent mean interference)".into(),
        ));
    }
    let lambda = params.ap_density;
    let mean = lambda * PI * radius * radius;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::InvalidParameter(format!("poisson: {e}")))?
            .sample(rng) as usize
    } else {
        0
    };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        // Uniform on the disk: x² uniform in [0, R²].
        let u: f64 = rng.gen::<f64>();
        let x2 = u * radius * radius;
        let keep: f64 = rng.gen();
        let exponent = match mode {
            IntensityMode::StandardExclusion => -(12.0 / 5.0) * lambda * PI * x2,
            IntensityMode::UnscaledExclusion => -(12.0 / 5.0) * lambda * x2,
        };
        if keep < -exponent.exp_m1() {
            let fade = -rng.gen_range(f64::MIN_POSITIVE..1.0f64).ln();
            out.push((x2.sqrt(), fade));
        }
    }
    Ok(out)
}

/// γ = P·h·r^{−α} / (Σ P·h_c·d_c^{−α} + σ²); infinite when the denominator
/// vanishes (no noise, empty field).
pub fn compute_sinr(real: &ChannelRealization, params: &NetworkParams) -> f64 {
    let a = params.path_loss_exp;
    let mut interference: f64 = real.tail_interference;
    for &(d, h) in &real.interferers {
        interference += h * d.powf(-a);
    }
    let num = params.tx_power * real.serving_fade * real.serving_distance.powf(-a);
    let den = params.tx_power * interference + params.noise_power;
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Per-trial ingredients of the success estimator, exposed for the diagnostic
/// dump.
#[derive(Debug, Clone, Copy)]
pub struct TrialOutcome {
    pub serving_distance: f64,
    pub serving_fade: f64,
    pub interference_power: f64,
    pub sinr: f64,
    pub selected: bool,
    pub success: bool,
}

fn run_trial(
    params: &NetworkParams,
    policy: Policy,
    mode: IntensityMode,
    master_seed: u64,
    trial: u64,
) -> Result<TrialOutcome> {
    let mut rng = substream(master_seed, trial);
    let lambda = params.ap_density;
    let g = params.group_ratio() as f64;
    let alpha = params.path_loss_exp;

    let r = sample_serving_distance(lambda, &mut rng)?;

    // Effective interferer field: thinned density λ for scheduled policies,
    // homogeneous density λG for NS (G co-channel UEs per subchannel, no
    // exclusion holds once every UE transmits).
    let (lambda_eff, thinning) = match policy {
        Policy::Ns => (lambda * g, false),
        _ => (lambda, true),
    };
    let radius = sim_radius(lambda_eff);
    let mean = lambda_eff * PI * radius * radius;
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidParameter(format!("poisson: {e}")))?
        .sample(&mut rng) as usize;
    let r2 = radius * radius;
    let mut interference = expected_tail_interference(lambda_eff, alpha, radius);
    for _ in 0..count {
        let x2 = rng.gen::<f64>() * r2;
        if thinning {
            let keep: f64 = rng.gen();
            let exponent = match mode {
                IntensityMode::StandardExclusion => -(12.0 / 5.0) * lambda * PI * x2,
                IntensityMode::UnscaledExclusion => -(12.0 / 5.0) * lambda * x2,
            };
            if keep >= -exponent.exp_m1() {
                continue;
            }
        }
        let fade = -rng.gen_range(f64::MIN_POSITIVE..1.0f64).ln();
        interference += fade * x2.powf(-alpha / 2.0);
    }

    // Serving fade: exponential, except PF where conditioning on selection
    // makes it the max of K−N+1 i.i.d. exponentials (inverse CDF draw).
    let fade = match policy {
        Policy::Pf => {
            let m = (params.ues_per_cell - params.subchannels + 1) as f64;
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            -(-u.powf(1.0 / m)).ln_1p()
        }
        _ => -rng.gen_range(f64::MIN_POSITIVE..1.0f64).ln(),
    };

    // Selection indicator and effective threshold per policy.
    let (selected, theta_eff) = match policy {
        Policy::Rs | Policy::Pf => (rng.gen::<f64>() < 1.0 / g, params.sinr_threshold),
        Policy::Rr | Policy::Ns => (true, params.sinr_threshold),
        Policy::OneShot => (
            true,
            params.sinr_threshold / params.subchannels as f64,
        ),
        Policy::MultiRound(_) => {
            return Err(Error::InvalidParameter(
                "Monte Carlo estimator covers RS/RR/PF/NS/OneShot only".into(),
            ))
        }
    };

    let num = params.tx_power * fade * r.powf(-alpha);
    let den = params.tx_power * interference + params.noise_power;
    let sinr = if den == 0.0 { f64::INFINITY } else { num / den };
    Ok(TrialOutcome {
        serving_distance: r,
        serving_fade: fade,
        interference_power: params.tx_power * interference,
        sinr,
        selected,
        success: selected && sinr > theta_eff,
    })
}

/// Decode outcome for a UE already chosen by the scheduler: one channel draw,
/// success iff the SINR clears the policy's effective threshold. Used by the
/// training loop's physical channel source.
pub fn conditional_decode(
    params: &NetworkParams,
    policy: Policy,
    mode: IntensityMode,
    master_seed: u64,
    trial: u64,
) -> Result<bool> {
    let o = run_trial(params, policy, mode, master_seed, trial)?;
    let theta_eff = match policy {
        Policy::OneShot => params.sinr_threshold / params.subchannels as f64,
        _ => params.sinr_threshold,
    };
    Ok(o.sinr > theta_eff)
}

/// Empirical update success probability over `trials` independent trials.
///
/// RR reports the scheduled-round probability; see the analytic counterpart
/// for cycle accounting.
pub fn estimate_update_success(
    params: &NetworkParams,
    policy: Policy,
    mode: IntensityMode,
    trials: u64,
    master_seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    params.validate()?;
    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            run_trial(params, policy, mode, master_seed, t)
                .map(|o| o.success as u64)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    let mean = successes as f64 / trials as f64;
    let half_width = 1.96 * (mean * (1.0 - mean) / trials as f64).sqrt();
    Ok(McEstimate {
        mean,
        half_width_95: half_width,
        trials,
    })
}

/// Delimited diagnostic dump of individual trials
/// (trial, r_k, h_k, interference_power, sinr, selected, success).
pub fn dump_realizations<W: Write>(
    params: &NetworkParams,
    policy: Policy,
    mode: IntensityMode,
    trials: u64,
    master_seed: u64,
    out: &mut W,
) -> Result<()> {
    writeln!(out, "trial\tr_k\th_k\tinterference_power\tsinr\tselected\tsuccess")?;
    for t in 0..trials {
        let o = run_trial(params, policy, mode, master_seed, t)?;
        writeln!(
            out,
            "{t}\t{:.6}\t{:.6}\t{:.6e}\t{:.6e}\t{}\t{}",
            o.serving_distance,
            o.serving_fade,
            o.interference_power,
            o.sinr,
            o.selected as u8,
            o.success as u8
        )?;
    }
    Ok(())
}
