//! Independent oracles: Monte-Carlo simulation of the group-default model
//! and brute-force search over integer group sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::optimizer::{group_probability, MIN_GROUP};
use crate::scalar::Scalar;

pub const DEFAULT_TRIALS: u64 = 1_000_000;
/// Trials per RNG stream. Stream `i` covers trials `[i * CHUNK, (i+1) * CHUNK)`.
pub const CHUNK: u64 = 1 << 16;

/// `k` i.i.d. members, each repaying with probability `p_member`; the group
/// survives only if every member does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    pub k: u64,
    pub p_member: f64,
}

impl GroupModel {
    pub fn from_family(fam: &FamilySpec<f64>, k: u64) -> Result<Self> {
        check_k(fam, k)?;
        let phi = analysis::phi(fam, k as f64)?;
        Ok(Self {
            k,
            p_member: 1.0 - phi,
        })
    }

    pub fn no_default_probability(&self) -> f64 {
        self.p_member.powi(self.k as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

fn check_k<T: Scalar>(fam: &FamilySpec<T>, k: u64) -> Result<()> {
    let kx = T::lit(k as f64);
    if k < MIN_GROUP {
        return Err(Error::InvalidRange(format!(
            "group size k = {k} must be at least {MIN_GROUP}"
        )));
    }
    if kx < fam.x_min() {
        return Err(Error::BelowDomain {
            x: k as f64,
            x_min: fam.x_min().as_f64(),
        });
    }
    Ok(())
}

/// `(1 - phi(k))^k`.
pub fn analytic_group_prob<T: Scalar>(fam: &FamilySpec<T>, k: u64) -> Result<T> {
    check_k(fam, k)?;
    group_probability(fam, k)
}

/// Monte-Carlo estimate of the group no-default probability.
///
/// Each trial draws `k` uniforms and succeeds when all fall below
/// `1 - phi(k)`. Trials are split into fixed chunks with one ChaCha8 stream
/// per chunk, so the result depends only on `seed`, never on thread count.
pub fn simulate_group(
    fam: &FamilySpec<f64>,
    k: u64,
    trials: u64,
    seed: u64,
) -> Result<SimulationEstimate> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let model = GroupModel::from_family(fam, k)?;
    Ok(simulate_model(&model, trials, seed))
}

pub fn simulate_model(model: &GroupModel, trials: u64, seed: u64) -> SimulationEstimate {
    let chunks = trials.div_ceil(CHUNK);
    let successes: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(trials - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut hits = 0u64;
            for _ in 0..n {
                let mut survived = true;
                for _ in 0..model.k {
                    let u: f64 = rng.random();
                    survived &= u < model.p_member;
                }
                hits += u64::from(survived);
            }
            hits
        })
        .sum();
    let estimate = successes as f64 / trials as f64;
    SimulationEstimate {
        estimate,
        stderr: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
        trials,
        seed,
    }
}

/// Exhaustive argmax of `(1 - phi(k))^k` over integers in `[k_min, k_max]`.
///
/// Sizes below the family domain are skipped; ties go to the smaller `k`.
pub fn brute_force_integer_argmax<T: Scalar>(
    fam: &FamilySpec<T>,
    k_min: u64,
    k_max: u64,
) -> Result<(u64, T)> {
    if k_min < MIN_GROUP || k_min >= k_max {
        return Err(Error::InvalidRange(format!(
            "need {MIN_GROUP} <= k_min < k_max, got [{k_min}, {k_max}]"
        )));
    }
    let floor = fam.x_min().ceil().to_u64().unwrap_or(k_min);
    let start = k_min.max(floor);
    if start > k_max {
        return Err(Error::InvalidRange(format!(
            "no admissible group size in [{k_min}, {k_max}] (x_min = {})",
            fam.x_min()
        )));
    }
    let mut best: Option<(u64, T)> = None;
    for k in start..=k_max {
        let p = group_probability(fam, k)?;
        if best.is_none_or(|(_, b)| p > b) {
            best = Some((k, p));
        }
    }
    Ok(best.expect("non-empty range"))
}
