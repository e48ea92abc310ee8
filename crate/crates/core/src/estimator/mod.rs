//! Sample-path estimation of potentials.
//!
//! The online estimator walks a simulated path and, at each transition
//! `s → s'` with reward `f_t`, forms the residual
//!
//! ```text
//! z_t = f_t - Σ_i r(i) ĝ(i) + ĝ(s') - ĝ(s)
//! ```
//!
//! and moves only the visited component: `ĝ(s) ← ĝ(s) + α_t z_t`. Its fixed
//! point is the solution of `(I - P + e r) g = f`, the potentials normalized
//! by `r·g = η`.

mod schedule;
mod sim;

use std::io::Write;

use nalgebra::DVector;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fmt::format_significant;
use crate::model::{diagnose_chain, ReferenceVector, RewardVector, StochasticMatrix};

pub use schedule::{StepCondition, StepSchedule};
pub use sim::{simulate_chain, ChainSampler};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub seed: u64,
    pub max_steps: u64,
    /// Stop once `‖ĝ - ĝ'‖_∞ < epsilon` between two check points.
    pub epsilon: f64,
    pub check_interval: u64,
    pub start_state: usize,
    /// Starting estimate; zeros when `None`.
    pub initial: Option<Vec<f64>>,
    /// Keep a snapshot at every check point.
    pub record_history: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            max_steps: 1_000_000,
            epsilon: 1e-4,
            check_interval: 1000,
            start_state: 0,
            initial: None,
            record_history: false,
        }
    }
}

/// State of the run at a check point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSnapshot {
    /// Number of updates performed so far.
    pub t: u64,
    /// State updated by the last step.
    pub state: usize,
    pub reward: f64,
    pub z: f64,
    pub eta_hat: f64,
    /// `‖ĝ - ĝ'‖_∞` against the previous check point.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTrace {
    pub g_hat: DVector<f64>,
    /// `r·ĝ` at termination.
    pub eta_hat: f64,
    pub steps_run: u64,
    pub converged: bool,
    pub history: Vec<TraceSnapshot>,
}

/// `z = f_t - r·ĝ + ĝ(s') - ĝ(s)`.
pub fn temporal_residual(reward: f64, r_dot_g: f64, g_state: f64, g_next: f64) -> f64 {
    reward - r_dot_g + g_next - g_state
}

/// Run the online least-squares estimator on a path simulated from `p`.
pub fn online_potentials(
    p: &StochasticMatrix,
    f: &RewardVector,
    r: &ReferenceVector,
    schedule: &StepSchedule,
    cfg: &SimulationConfig,
    tol: &Tolerances,
) -> Result<EstimateTrace> {
    let n = p.size();
    r.check(n, tol.re_tol)?;
    f.expect_len(n)?;
    if cfg.max_steps < 1 || cfg.check_interval < 1 {
        return Err(Error::InvalidParameter(
            "max_steps and check_interval must be at least 1".into(),
        ));
    }
    if !(cfg.epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {}",
            cfg.epsilon
        )));
    }
    if cfg.start_state >= n {
        return Err(Error::InvalidParameter(format!(
            "start state {} out of range for {n} states",
            cfg.start_state
        )));
    }
    let d = diagnose_chain(p, tol.edge_tol);
    if !d.irreducible {
        return Err(Error::NotIrreducible {
            closed_classes: d.num_closed_classes,
        });
    }
    if !d.aperiodic {
        return Err(Error::NotAperiodic { period: d.period });
    }

    let mut g: Vec<f64> = match &cfg.initial {
        Some(init) if init.len() != n => {
            return Err(Error::DimensionMismatch {
                what: "initial estimate",
                expected: n,
                found: init.len(),
            })
        }
        Some(init) => init.clone(),
        None => vec![0.0; n],
    };
    let weights: Vec<f64> = r.values().iter().copied().collect();
    let rewards: Vec<f64> = f.values().iter().copied().collect();
    let dot = |g: &[f64]| weights.iter().zip(g).map(|(w, x)| w * x).sum::<f64>();

    let mut sampler = ChainSampler::new(p, cfg.seed);
    let mut snapshot = g.clone();
    let mut history = Vec::new();
    let mut state = cfg.start_state;
    let mut steps_run = 0;
    let mut converged = false;

    for t in 0..cfg.max_steps {
        let alpha = schedule.checked_alpha(t)?;
        let next = sampler.next_state(state);
        let reward = rewards[state];
        let z = temporal_residual(reward, dot(&g), g[state], g[next]);
        g[state] += alpha * z;
        steps_run = t + 1;

        if steps_run % cfg.check_interval == 0 {
            let delta = g
                .iter()
                .zip(&snapshot)
                .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
            if cfg.record_history {
                history.push(TraceSnapshot {
                    t: steps_run,
                    state,
                    reward,
                    z,
                    eta_hat: dot(&g),
                    delta,
                });
            }
            if delta < cfg.epsilon {
                converged = true;
                break;
            }
            snapshot.copy_from_slice(&g);
        }
        state = next;
    }

    if g.iter().any(|v| !v.is_finite()) {
        log::warn!("online estimate diverged after {steps_run} steps");
    }
    Ok(EstimateTrace {
        eta_hat: dot(&g),
        g_hat: DVector::from_vec(g),
        steps_run,
        converged,
        history,
    })
}

/// `g̃_T = Σ_{t=0}^{T} Pᵗ f`, by `g̃_0 = f`, `g̃_k = f + P g̃_{k-1}`.
pub fn truncated_accumulated_reward(
    p: &StochasticMatrix,
    f: &RewardVector,
    horizon: usize,
) -> Result<DVector<f64>> {
    f.expect_len(p.size())?;
    let mut acc = f.values().clone();
    for _ in 0..horizon {
        acc = f.values() + p.matrix() * &acc;
    }
    Ok(acc)
}

/// Write the snapshots of `trace` as CSV with columns
/// `t,state,reward,z_t,eta_hat`; reals carry 12 significant digits.
pub fn write_trace_csv<W: Write>(trace: &EstimateTrace, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidParameter(format!("writing trace: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "state", "reward", "z_t", "eta_hat"])
        .map_err(io)?;
    for s in &trace.history {
        w.write_record([
            s.t.to_string(),
            s.state.to_string(),
            format_significant(s.reward, 12),
            format_significant(s.z, 12),
            format_significant(s.eta_hat, 12),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidParameter(format!("writing trace: {e}")))?;
    Ok(())
}
