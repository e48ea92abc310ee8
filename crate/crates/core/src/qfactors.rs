//! Q-factors of a fixed randomized policy.
//!
//! With the `(S·A) × S` transition matrix `P` and the block-diagonal
//! `S × (S·A)` policy matrix `L`, the product `P̃ = P L` is the transition
//! matrix of the chain over state-action pairs. Q-factors satisfy
//! `(I - P̃) Q = f - η e`, and for any `r` over pairs with `r·e ≠ 0`,
//! `Q = (I - P̃ + e r)⁻¹ f` is the solution with `r·Q = η`.
//!
//! Pairs are ordered state-major: `(0,0), (0,1), …, (1,0), …`.

use nalgebra::{DMatrix, DVector};

use crate::config::Tolerances;
use crate::error::Result;
use crate::gfm::{factor_shifted, Normalization};
use crate::linalg::max_abs_vec;
use crate::model::{validate_stochastic, MdpModel, ReferenceVector, RewardVector, StochasticMatrix};
use crate::report::Report;

/// `L(s, (s', a')) = 𝓛(s', a')` if `s = s'`, zero otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyMatrix {
    pub l: DMatrix<f64>,
}

/// `P((s, a), s') = p(s, a, s')`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionTransitionMatrix {
    pub p: DMatrix<f64>,
}

/// `P̃ = P L` over state-action pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateActionChain {
    pub chain: StochasticMatrix,
    pub actions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QSolution {
    pub q: DVector<f64>,
    pub eta: f64,
    pub normalization: Normalization,
    /// `g(s) = Σ_a 𝓛(s, a) Q(s, a)`.
    pub induced_g: DVector<f64>,
    /// Pairs the policy never selects. Their Q-factors are still defined, but
    /// those pairs are transient in `P̃`.
    pub zero_probability_actions: Vec<(usize, usize)>,
}

pub fn build_policy_matrix(m: &MdpModel) -> PolicyMatrix {
    let (s_count, a_count) = (m.states(), m.actions());
    let mut l = DMatrix::zeros(s_count, s_count * a_count);
    for s in 0..s_count {
        for a in 0..a_count {
            l[(s, m.pair_index(s, a))] = m.policy()[(s, a)];
        }
    }
    PolicyMatrix { l }
}

pub fn action_transition_matrix(m: &MdpModel) -> ActionTransitionMatrix {
    ActionTransitionMatrix {
        p: m.transition_matrix().clone(),
    }
}

/// `P̃((s,a),(s',a')) = p(s,a,s') 𝓛(s',a')`, the entries of `P L` (each is a
/// single product since `L` has one nonzero block per row).
pub fn build_state_action_chain(m: &MdpModel) -> StateActionChain {
    let n = m.pairs();
    let a_count = m.actions();
    let p = m.transition_matrix();
    let policy = m.policy();
    let raw = DMatrix::from_fn(n, n, |i, j| {
        let (next, next_action) = (j / a_count, j % a_count);
        p[(i, next)] * policy[(next, next_action)]
    });
    // rows of p and of the policy are exactly normalized, so P̃ rows sum to 1
    // up to rounding and validation cannot fail
    let chain = validate_stochastic(raw, 1e-9).expect("product of stochastic matrices is stochastic");
    StateActionChain {
        chain,
        actions: a_count,
    }
}

/// The chain over states induced by the policy, `P_𝓛(s, s') = Σ_a 𝓛(s,a) p(s,a,s')`,
/// with its reward `f_𝓛(s) = Σ_a 𝓛(s,a) f(s,a)`.
pub fn policy_chain(m: &MdpModel) -> (StochasticMatrix, RewardVector) {
    let l = build_policy_matrix(m).l;
    let p = &l * m.transition_matrix();
    let f = &l * m.reward_vector().values();
    let p = validate_stochastic(p, 1e-9).expect("policy mixture of stochastic rows is stochastic");
    let f = RewardVector::new(f.iter().copied().collect()).expect("rewards are finite");
    (p, f)
}

/// `Q = (I - P̃ + e r)⁻¹ f`.
///
/// `P̃` is usually reducible (pairs with zero policy probability are never
/// entered), so no irreducibility check is made; a repeated unit eigenvalue
/// shows up as `NearSingular` from the factorization instead.
pub fn qfactors_solve(m: &MdpModel, r: &ReferenceVector, tol: &Tolerances) -> Result<QSolution> {
    let chain = build_state_action_chain(m);
    let f = m.reward_vector();
    let lu = factor_shifted(chain.chain.matrix(), r, tol)?;
    let q = lu.solve(f.values());
    let zero = m.zero_probability_actions();
    if !zero.is_empty() {
        log::warn!("policy never selects the state-action pairs {zero:?}");
    }
    Ok(QSolution {
        eta: r.dot(&q),
        induced_g: induced_potentials(m, &q),
        q,
        normalization: Normalization::ReferenceEqualsEta(r.clone()),
        zero_probability_actions: zero,
    })
}

fn induced_potentials(m: &MdpModel, q: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(m.states(), |s, _| {
        (0..m.actions())
            .map(|a| m.policy()[(s, a)] * q[m.pair_index(s, a)])
            .sum()
    })
}

/// Residuals of a Q-factor solution.
///
/// * `q_definition`: `max |Q(s,a) - f(s,a) + η - Σ_{s'} p(s,a,s') g(s')|` with
///   `g` the induced potentials.
/// * `q_poisson_matrix`: `‖(I - P̃) Q - (f - η e)‖_∞` through the assembled `P̃`.
/// * `normalization`: `|r·Q - η|`.
pub fn q_consistency_report(m: &MdpModel, sol: &QSolution, tol: &Tolerances) -> Report {
    let mut report = Report::new();
    let f = m.reward_vector();
    let mut worst = 0.0_f64;
    for s in 0..m.states() {
        for a in 0..m.actions() {
            let i = m.pair_index(s, a);
            let expected: f64 = (0..m.states())
                .map(|next| m.transition(s, a, next) * sol.induced_g[next])
                .sum();
            let res = sol.q[i] - f.values()[i] + sol.eta - expected;
            worst = worst.max(res.abs());
        }
    }
    report.within("q_definition", worst, tol.poisson_tol);

    let chain = build_state_action_chain(m);
    let res =
        &sol.q - chain.chain.matrix() * &sol.q - f.values() + DVector::from_element(sol.q.len(), sol.eta);
    report.within("q_poisson_matrix", max_abs_vec(&res), tol.poisson_tol);

    let r = sol.normalization.reference();
    report.within(
        "normalization",
        (r.dot(&sol.q) - sol.normalization.target(sol.eta)).abs(),
        tol.solve_tol(m.pairs()),
    );
    report
}
