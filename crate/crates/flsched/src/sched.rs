//! Per-round UE selection: random, round robin, proportional fair, no
//! scheduling, one-shot, and the batched multi-round variant.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::Policy;
use crate::rng::substream;

/// Stateful scheduler for one cell. Only the fields of the active policy are
/// meaningful (e.g. `pf_avg_snr` for PF, `rr_group_pointer` for RR).
#[derive(Debug, Clone)]
pub struct SchedulerState {
    pub policy: Policy,
    pub k_users: u32,
    pub n_subchannels: u32,
    /// Next RR group to serve, in [0, G).
    pub rr_group_pointer: u32,
    /// EWMA of per-UE SNR, warm-started at the analytic mean SNR.
    pub pf_avg_snr: Vec<f64>,
    /// EWMA forgetting factor.
    pub pf_forgetting: f64,
    /// Subround counter for MultiRound, in [0, C).
    pub multi_round_phase: u32,
    rng: ChaCha8Rng,
}

/// One round's selection: chosen UEs and their subchannel assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDecision {
    pub selected: Vec<u32>,
    /// (ue, subchannel) pairs; for NS each subchannel carries G UEs.
    pub assignment: Vec<(u32, u32)>,
    /// Whether the AP aggregates after this round (false only during
    /// MultiRound subrounds before the last).
    pub aggregate: bool,
}

impl SchedulerState {
    pub fn new(
        policy: Policy,
        k_users: u32,
        n_subchannels: u32,
        mean_snr: f64,
        seed: u64,
    ) -> Result<Self> {
        if n_subchannels == 0 || k_users < n_subchannels {
            return Err(Error::InvalidParameter("need K >= N >= 1".into()));
        }
        if let Policy::MultiRound(c) = policy {
            if c == 0 || k_users % c != 0 {
                return Err(Error::InvalidParameter(
                    "MultiRound count must divide K".into(),
                ));
            }
        }
        Ok(SchedulerState {
            policy,
            k_users,
            n_subchannels,
            rr_group_pointer: 0,
            pf_avg_snr: vec![mean_snr.max(f64::MIN_POSITIVE); k_users as usize],
            pf_forgetting: 0.05,
            multi_round_phase: 0,
            rng: substream(seed, 0x5c4e_d011),
        })
    }

    fn group_ratio(&self) -> u32 {
        self.k_users.div_ceil(self.n_subchannels)
    }

    /// Select UEs for round `t`. The SNR snapshot is required for PF only.
    pub fn select(&mut self, t: u64, snr_snapshot: Option<&[f64]>) -> Result<ScheduleDecision> {
        let k = self.k_users;
        let n = self.n_subchannels;
        let decision = match self.policy {
            Policy::Rs => {
                let mut idx: Vec<u32> = (0..k).collect();
                idx.shuffle(&mut self.rng);
                idx.truncate(n as usize);
                assign_one_per_channel(idx)
            }
            Policy::Rr => {
                let g = self.rr_group_pointer;
                let start = g * n;
                let selected: Vec<u32> = (start..(start + n).min(k)).collect();
                self.rr_group_pointer = (g + 1) % self.group_ratio();
                assign_one_per_channel(selected)
            }
            Policy::Pf => {
                let snap = snr_snapshot.ok_or_else(|| {
                    Error::InvalidParameter("PF selection requires an SNR snapshot".into())
                })?;
                if snap.len() != k as usize {
                    return Err(Error::InvalidParameter(format!(
                        "snapshot length {} != K = {k}",
                        snap.len()
                    )));
                }
                // Top N by instantaneous-over-average ratio; ties to the
                // lowest index for deterministic replay.
                let mut ranked: Vec<(f64, u32)> = snap
                    .iter()
                    .zip(&self.pf_avg_snr)
                    .enumerate()
                    .map(|(i, (inst, avg))| (inst / avg, i as u32))
                    .collect();
                ranked.sort_by(|a, b| {
                    b.0.partial_cmp(&a.0)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.1.cmp(&b.1))
                });
                let selected: Vec<u32> = ranked.iter().take(n as usize).map(|r| r.1).collect();
                assign_one_per_channel(selected)
            }
            Policy::Ns => {
                // Everybody transmits; deal UEs to subchannels round-robin so
                // each subchannel carries exactly G co-channel UEs.
                let selected: Vec<u32> = (0..k).collect();
                let assignment = selected.iter().map(|&u| (u, u % n)).collect();
                ScheduleDecision {
                    selected,
                    assignment,
                    aggregate: true,
                }
            }
            Policy::OneShot => {
                let u = (t % k as u64) as u32;
                ScheduleDecision {
                    selected: vec![u],
                    assignment: vec![(u, 0)],
                    aggregate: true,
                }
            }
            Policy::MultiRound(c) => {
                let mut idx: Vec<u32> = (0..k).collect();
                idx.shuffle(&mut self.rng);
                idx.truncate(n as usize);
                let mut d = assign_one_per_channel(idx);
                d.aggregate = self.multi_round_phase == c - 1;
                self.multi_round_phase = (self.multi_round_phase + 1) % c;
                d
            }
        };
        Ok(decision)
    }

    /// EWMA update ρ̄ ← (1−w)ρ̄ + wρ̃ for every UE.
    pub fn update_pf_average(&mut self, snr_snapshot: &[f64]) -> Result<()> {
        if snr_snapshot.len() != self.pf_avg_snr.len() {
            return Err(Error::InvalidParameter("snapshot length mismatch".into()));
        }
        let w = self.pf_forgetting;
        for (avg, &inst) in self.pf_avg_snr.iter_mut().zip(snr_snapshot) {
            *avg = (1.0 - w) * *avg + w * inst;
        }
        Ok(())
    }

    /// Random SNR snapshot consistent with the PF channel model: unit-mean
    /// exponential fades around the mean SNR.
    pub fn draw_snapshot<R: Rng>(&self, mean_snr: f64, rng: &mut R) -> Vec<f64> {
        (0..self.k_users)
            .map(|_| -rng.gen_range(f64::MIN_POSITIVE..1.0f64).ln() * mean_snr)
            .collect()
    }
}

fn assign_one_per_channel(selected: Vec<u32>) -> ScheduleDecision {
    let assignment = selected
        .iter()
        .enumerate()
        .map(|(ch, &u)| (u, ch as u32))
        .collect();
    ScheduleDecision {
        selected,
        assignment,
        aggregate: true,
    }
}

/// Per-UE selection counts over a window of decisions.
pub fn fairness_audit(log: &[ScheduleDecision], k_users: u32) -> Result<Vec<u64>> {
    if log.is_empty() {
        return Err(Error::InvalidParameter("empty decision log".into()));
    }
    let mut counts = vec![0u64; k_users as usize];
    for d in log {
        for &u in &d.selected {
            counts[u as usize] += 1;
        }
    }
    Ok(counts)
}
