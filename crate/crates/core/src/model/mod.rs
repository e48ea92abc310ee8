//! Domain types for chains, processes and MDPs, with structural validation.
//!
//! Every matrix type here is built by a validating constructor and is
//! immutable afterwards.

mod diagnostics;
pub mod file;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{matrix_from_rows, ones};

pub use diagnostics::{diagnose_chain, diagnose_support, ChainDiagnostics};

/// Row-stochastic transition matrix of a finite discrete-time chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    p: DMatrix<f64>,
    max_correction: f64,
}

impl StochasticMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], row_tol: f64) -> Result<Self> {
        validate_stochastic(matrix_from_rows(rows, true)?, row_tol)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn size(&self) -> usize {
        self.p.nrows()
    }

    /// Largest absolute change made to any entry during validation.
    pub fn max_correction(&self) -> f64 {
        self.max_correction
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.p
    }
}

/// Check `raw` against `row_tol` and return it with every row exactly
/// renormalized.
///
/// Entries in `[-row_tol, 0)` are clamped to zero. A row whose sum is off by
/// more than `row_tol` is rejected rather than rescaled.
pub fn validate_stochastic(raw: DMatrix<f64>, row_tol: f64) -> Result<StochasticMatrix> {
    check_square_finite(&raw, row_tol)?;
    let mut p = raw;
    let mut max_correction = 0.0_f64;
    for i in 0..p.nrows() {
        let mut row: Vec<f64> = p.row(i).iter().copied().collect();
        check_probability_row(&row, i, row_tol)?;
        let before = row.clone();
        normalize_probability_row(&mut row);
        for (j, (new, old)) in row.iter().zip(&before).enumerate() {
            max_correction = max_correction.max((new - old).abs());
            p[(i, j)] = *new;
        }
    }
    Ok(StochasticMatrix { p, max_correction })
}

fn check_square_finite(raw: &DMatrix<f64>, row_tol: f64) -> Result<()> {
    if raw.nrows() != raw.ncols() {
        return Err(Error::NonSquare {
            rows: raw.nrows(),
            cols: raw.ncols(),
        });
    }
    if raw.nrows() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    if !(row_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "row tolerance must be positive, got {row_tol}"
        )));
    }
    // row-major index for error reporting
    let n = raw.ncols();
    for i in 0..raw.nrows() {
        for j in 0..n {
            let v = raw[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index: i * n + j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

fn check_probability_row(row: &[f64], i: usize, row_tol: f64) -> Result<()> {
    if let Some((j, &v)) = row.iter().enumerate().find(|(_, v)| **v < -row_tol) {
        return Err(Error::NegativeEntry {
            row: i,
            col: j,
            value: v,
        });
    }
    let sum: f64 = row.iter().sum();
    if !((sum - 1.0).abs() <= row_tol) {
        return Err(Error::RowSumViolation {
            row: i,
            sum,
            expected: 1.0,
        });
    }
    Ok(())
}

/// Clamp negatives to zero and rescale so the row sums to 1.0 in
/// left-to-right floating-point summation, exactly when some representable
/// row does and otherwise to within one ulp. A row already within two ulps of
/// 1.0 is left untouched, which makes validation idempotent.
pub(crate) fn normalize_probability_row(row: &mut [f64]) {
    const SETTLED: f64 = 2.0 * f64::EPSILON;
    for v in row.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() <= SETTLED || sum == 0.0 {
        return;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
    // walk the largest entry one ulp at a time towards an exact sum
    let largest = row
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let mut previous = f64::NAN;
    for _ in 0..256 {
        let sum: f64 = row.iter().sum();
        if sum == 1.0 {
            break;
        }
        if (sum < 1.0 && previous > 1.0) || (sum > 1.0 && previous < 1.0) {
            // stepped over 1.0; settle on the closer side
            if (sum - 1.0).abs() > (previous - 1.0).abs() {
                row[largest] = if sum < 1.0 {
                    row[largest].next_up()
                } else {
                    row[largest].next_down()
                };
            }
            break;
        }
        previous = sum;
        row[largest] = if sum < 1.0 {
            row[largest].next_up()
        } else {
            row[largest].next_down()
        };
    }
}

/// Transition rate matrix of a continuous-time process: nonnegative
/// off-diagonal rates and zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    b: DMatrix<f64>,
}

impl GeneratorMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], row_tol: f64) -> Result<Self> {
        validate_generator(matrix_from_rows(rows, true)?, row_tol)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn size(&self) -> usize {
        self.b.nrows()
    }
}

/// Check `raw` against `row_tol`; accepted rows get their diagonal reset to
/// minus the sum of the off-diagonal rates.
pub fn validate_generator(raw: DMatrix<f64>, row_tol: f64) -> Result<GeneratorMatrix> {
    check_square_finite(&raw, row_tol)?;
    let mut b = raw;
    let n = b.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && b[(i, j)] < -row_tol {
                return Err(Error::NegativeOffDiagonal {
                    row: i,
                    col: j,
                    value: b[(i, j)],
                });
            }
        }
        let sum: f64 = b.row(i).iter().sum();
        if !(sum.abs() <= row_tol) {
            return Err(Error::RowSumViolation {
                row: i,
                sum,
                expected: 0.0,
            });
        }
        let mut off = 0.0;
        for j in 0..n {
            if i != j {
                if b[(i, j)] < 0.0 {
                    b[(i, j)] = 0.0;
                }
                off += b[(i, j)];
            }
        }
        b[(i, i)] = -off;
    }
    Ok(GeneratorMatrix { b })
}

/// Per-step (or per-unit-time) reward of each state or state-action pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardVector {
    f: DVector<f64>,
}

impl RewardVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(Self {
            f: DVector::from_vec(values),
        })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.f
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Rewards multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { f: &self.f * factor }
    }

    pub(crate) fn expect_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                what: "reward vector",
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        Some((index, &value)) => Err(Error::NonFinite { index, value }),
        None => Ok(()),
    }
}

/// The row vector `r` that parameterizes the generalized fundamental matrix.
/// Any vector with `r·e ≠ 0` is admissible.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceVector {
    r: DVector<f64>,
    dot_with_ones: f64,
}

impl ReferenceVector {
    /// Default threshold on `|r·e|`.
    pub const DEFAULT_RE_TOL: f64 = 1e-12;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_tol(values, Self::DEFAULT_RE_TOL)
    }

    pub fn with_tol(values: Vec<f64>, re_tol: f64) -> Result<Self> {
        check_finite(&values)?;
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty reference vector".into()));
        }
        let r = DVector::from_vec(values);
        let dot = r.sum();
        if !(dot.abs() >= re_tol) {
            return Err(Error::ReferenceDegenerate { dot, tol: re_tol });
        }
        Ok(Self {
            r,
            dot_with_ones: dot,
        })
    }

    /// `(1/n, …, 1/n)`.
    pub fn uniform(n: usize) -> Self {
        let n = n.max(1);
        Self {
            r: DVector::from_element(n, 1.0 / n as f64),
            dot_with_ones: 1.0,
        }
    }

    /// The unit vector selecting component `index`.
    pub fn unit(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::InvalidParameter(format!(
                "unit reference index {index} out of range for length {n}"
            )));
        }
        let mut r = DVector::zeros(n);
        r[index] = 1.0;
        Ok(Self {
            r,
            dot_with_ones: 1.0,
        })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Cached `r·e`.
    pub fn dot_with_ones(&self) -> f64 {
        self.dot_with_ones
    }

    pub fn dot(&self, v: &DVector<f64>) -> f64 {
        self.r.dot(v)
    }

    pub(crate) fn check(&self, n: usize, re_tol: f64) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                what: "reference vector",
                expected: n,
                found: self.len(),
            });
        }
        if !(self.dot_with_ones.abs() >= re_tol) {
            return Err(Error::ReferenceDegenerate {
                dot: self.dot_with_ones,
                tol: re_tol,
            });
        }
        Ok(())
    }
}

/// Finite MDP under a fixed randomized policy.
///
/// Transitions are stored as the `(S·A) × S` matrix whose row `s·A + a` is
/// `p(s, a, ·)`; state-action pairs are ordered state-major throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    states: usize,
    actions: usize,
    transitions: DMatrix<f64>,
    rewards: DMatrix<f64>,
    policy: DMatrix<f64>,
}

impl MdpModel {
    /// `transitions[s][a][s']`, `rewards[s][a]`, `policy[s][a]`.
    pub fn new(
        transitions: &[Vec<Vec<f64>>],
        rewards: &[Vec<f64>],
        policy: &[Vec<f64>],
        row_tol: f64,
    ) -> Result<Self> {
        let states = transitions.len();
        if states == 0 {
            return Err(Error::InvalidParameter("MDP has no states".into()));
        }
        let actions = transitions[0].len();
        if actions == 0 {
            return Err(Error::InvalidParameter("MDP has no actions".into()));
        }
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(states * actions);
        for per_state in transitions {
            if per_state.len() != actions {
                return Err(Error::DimensionMismatch {
                    what: "actions per state",
                    expected: actions,
                    found: per_state.len(),
                });
            }
            for row in per_state {
                if row.len() != states {
                    return Err(Error::DimensionMismatch {
                        what: "transition row",
                        expected: states,
                        found: row.len(),
                    });
                }
                rows.push(row.clone());
            }
        }
        let transitions = validated_probability_rows(&rows, states, row_tol)?;
        let rewards = shaped(rewards, states, actions, "reward matrix")?;
        check_finite(rewards.as_slice())?;
        let policy = validated_probability_rows(policy, actions, row_tol)?;
        if policy.nrows() != states {
            return Err(Error::DimensionMismatch {
                what: "policy",
                expected: states,
                found: policy.nrows(),
            });
        }
        Ok(Self {
            states,
            actions,
            transitions,
            rewards,
            policy,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn pairs(&self) -> usize {
        self.states * self.actions
    }

    /// Row index of pair `(s, a)` in state-major order.
    pub fn pair_index(&self, s: usize, a: usize) -> usize {
        s * self.actions + a
    }

    pub fn transition(&self, s: usize, a: usize, next: usize) -> f64 {
        self.transitions[(self.pair_index(s, a), next)]
    }

    /// `(S·A) × S` matrix of `p(s, a, s')`.
    pub fn transition_matrix(&self) -> &DMatrix<f64> {
        &self.transitions
    }

    /// `S × A` matrix of `f(s, a)`.
    pub fn rewards(&self) -> &DMatrix<f64> {
        &self.rewards
    }

    /// `S × A` matrix of action probabilities.
    pub fn policy(&self) -> &DMatrix<f64> {
        &self.policy
    }

    /// `f(s, a)` stacked state-major.
    pub fn reward_vector(&self) -> RewardVector {
        let f = (0..self.states)
            .flat_map(|s| (0..self.actions).map(move |a| (s, a)))
            .map(|(s, a)| self.rewards[(s, a)])
            .collect();
        RewardVector {
            f: DVector::from_vec(f),
        }
    }

    /// Pairs `(s, a)` the policy never selects.
    pub fn zero_probability_actions(&self) -> Vec<(usize, usize)> {
        (0..self.states)
            .flat_map(|s| (0..self.actions).map(move |a| (s, a)))
            .filter(|&(s, a)| self.policy[(s, a)] == 0.0)
            .collect()
    }
}

fn shaped(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &'static str) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(Error::DimensionMismatch {
            what,
            expected: nrows,
            found: rows.len(),
        });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            what,
            expected: ncols,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn validated_probability_rows(rows: &[Vec<f64>], ncols: usize, row_tol: f64) -> Result<DMatrix<f64>> {
    let mut m = shaped(rows, rows.len(), ncols, "probability row")?;
    check_finite(m.as_slice())?;
    for i in 0..m.nrows() {
        let mut row: Vec<f64> = m.row(i).iter().copied().collect();
        check_probability_row(&row, i, row_tol)?;
        normalize_probability_row(&mut row);
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// `max_s |B(s,s)|`, the smallest admissible uniformization rate.
pub fn min_uniformization_rate(b: &GeneratorMatrix) -> f64 {
    b.b.diagonal().iter().fold(0.0_f64, |acc, d| acc.max(d.abs()))
}

/// `P = I + B/γ`.
pub fn uniformize(b: &GeneratorMatrix, gamma: f64, row_tol: f64) -> Result<StochasticMatrix> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "uniformization rate must be positive, got {gamma}"
        )));
    }
    let min_rate = min_uniformization_rate(b);
    if gamma < min_rate {
        return Err(Error::GammaTooSmall { gamma, min_rate });
    }
    let n = b.size();
    let p = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id + b.b[(i, j)] / gamma
    });
    validate_stochastic(p, row_tol)
}

/// `P e` for a checked stochastic matrix; handy in tests and reports.
pub fn row_sums(m: &DMatrix<f64>) -> DVector<f64> {
    m * ones(m.ncols())
}
