//! The generalized fundamental matrix `Z_r = (I - P + e r)⁻¹` of an
//! irreducible chain and the quantities it yields.
//!
//! For any row vector `r` with `r·e ≠ 0` the shifted matrix `I - P + e r` is
//! invertible, so a single linear solve gives
//!
//! * the stationary distribution, `π (I - P + e r) = r`;
//! * the performance potentials, `(I - P + e r) g = f`, normalized so that
//!   `r·g = η`.
//!
//! Nothing needs to be known about `π` beforehand. Only
//! [`fundamental_matrix`] forms an explicit inverse; the other operations
//! factor once and solve.

use nalgebra::{DMatrix, DVector};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::estimator::truncated_accumulated_reward;
use crate::linalg::{inf_norm, max_abs, max_abs_vec, one_norm, ones, shifted_matrix, LuFactorization};
use crate::model::{diagnose_chain, ReferenceVector, RewardVector, StochasticMatrix};
use crate::report::Report;
use crate::spectrum::{closest, small_spectrum, spectrum_distance, C64};

pub use crate::spectrum::{spectral_radius_estimate, SpectralRadius};

/// `Z_r` together with the reference vector that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrix {
    pub z: DMatrix<f64>,
    pub reference: ReferenceVector,
    /// `‖I - P + e r‖₁ ‖Z_r‖₁`.
    pub condition_estimate: f64,
    /// `‖(I - P + e r) Z_r - I‖_max`.
    pub residual: f64,
}

/// Which linear condition pins down the additive constant of a potential
/// vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalization {
    /// `r·g = η`.
    ReferenceEqualsEta(ReferenceVector),
    /// `r·g = -η`, the convention forced on the continuous-time solve
    /// `(B + e r) g = -f`.
    ReferenceEqualsMinusEta(ReferenceVector),
    /// `r·g = 0`.
    ReferenceZero(ReferenceVector),
}

impl Normalization {
    pub fn reference(&self) -> &ReferenceVector {
        match self {
            Normalization::ReferenceEqualsEta(r)
            | Normalization::ReferenceEqualsMinusEta(r)
            | Normalization::ReferenceZero(r) => r,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Normalization::ReferenceEqualsEta(_) => "r·g=eta",
            Normalization::ReferenceEqualsMinusEta(_) => "r·g=-eta",
            Normalization::ReferenceZero(_) => "r·g=0",
        }
    }

    /// Value `r·g` is expected to take given the average reward.
    pub fn target(&self, eta: f64) -> f64 {
        match self {
            Normalization::ReferenceEqualsEta(_) => eta,
            Normalization::ReferenceEqualsMinusEta(_) => -eta,
            Normalization::ReferenceZero(_) => 0.0,
        }
    }
}

/// Potential vector `g` (or Q-factors) with the average reward `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSolution {
    pub g: DVector<f64>,
    pub eta: f64,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub pi: DVector<f64>,
}

impl StationaryDistribution {
    /// `π·f`.
    pub fn average(&self, f: &RewardVector) -> f64 {
        self.pi.dot(f.values())
    }
}

pub(crate) fn ensure_irreducible(p: &StochasticMatrix, tol: &Tolerances) -> Result<()> {
    if tol.allow_unchecked {
        return Ok(());
    }
    let d = diagnose_chain(p, tol.edge_tol);
    if !d.irreducible {
        return Err(Error::NotIrreducible {
            closed_classes: d.num_closed_classes,
        });
    }
    Ok(())
}

fn ensure_aperiodic(p: &StochasticMatrix, tol: &Tolerances) -> Result<()> {
    let d = diagnose_chain(p, tol.edge_tol);
    if !d.irreducible {
        return Err(Error::NotIrreducible {
            closed_classes: d.num_closed_classes,
        });
    }
    if !d.aperiodic {
        return Err(Error::NotAperiodic { period: d.period });
    }
    Ok(())
}

/// Factor `I - P + e r` without any structural check on `P`.
pub(crate) fn factor_shifted(
    p: &DMatrix<f64>,
    r: &ReferenceVector,
    tol: &Tolerances,
) -> Result<LuFactorization> {
    r.check(p.nrows(), tol.re_tol)?;
    LuFactorization::factor(&shifted_matrix(p, r.values()), tol.pivot_tol)
}

/// Turn a solved row vector into a distribution: entries in
/// `[-solve_tol, 0)` become zero and the result is rescaled to sum to one.
pub(crate) fn finalize_distribution(mut pi: DVector<f64>, solve_tol: f64) -> Result<StationaryDistribution> {
    for (i, v) in pi.iter_mut().enumerate() {
        if *v < -solve_tol || !v.is_finite() {
            return Err(Error::NegativeProbability { index: i, value: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum = pi.sum();
    if sum > 0.0 {
        pi /= sum;
    }
    Ok(StationaryDistribution { pi })
}

/// `Z_r = (I - P + e r)⁻¹`, assembled column by column.
pub fn fundamental_matrix(
    p: &StochasticMatrix,
    r: &ReferenceVector,
    tol: &Tolerances,
) -> Result<FundamentalMatrix> {
    ensure_irreducible(p, tol)?;
    let lu = factor_shifted(p.matrix(), r, tol)?;
    let z = lu.inverse();
    let a = shifted_matrix(p.matrix(), r.values());
    let n = p.size();
    let residual = max_abs(&(&a * &z - DMatrix::identity(n, n)));
    Ok(FundamentalMatrix {
        condition_estimate: one_norm(&a) * one_norm(&z),
        z,
        reference: r.clone(),
        residual,
    })
}

/// Stationary distribution from `π (I - P + e r) = r`, one transposed solve.
pub fn stationary(
    p: &StochasticMatrix,
    r: &ReferenceVector,
    tol: &Tolerances,
) -> Result<StationaryDistribution> {
    ensure_irreducible(p, tol)?;
    let lu = factor_shifted(p.matrix(), r, tol)?;
    finalize_distribution(lu.solve_transpose(r.values()), tol.solve_tol(p.size()))
}

/// Potentials from `(I - P + e r) g = f`; the result satisfies `r·g = η`.
pub fn potentials(
    p: &StochasticMatrix,
    f: &RewardVector,
    r: &ReferenceVector,
    tol: &Tolerances,
) -> Result<PotentialSolution> {
    ensure_irreducible(p, tol)?;
    f.expect_len(p.size())?;
    let lu = factor_shifted(p.matrix(), r, tol)?;
    let g = lu.solve(f.values());
    Ok(PotentialSolution {
        eta: r.dot(&g),
        g,
        normalization: Normalization::ReferenceEqualsEta(r.clone()),
    })
}

/// The classical route: compute `π` first, then solve with `r = π`, so the
/// result satisfies `π·g = η`.
pub fn potentials_classic(
    p: &StochasticMatrix,
    f: &RewardVector,
    tol: &Tolerances,
) -> Result<PotentialSolution> {
    let pi = stationary(p, &ReferenceVector::uniform(p.size()), tol)?;
    let r = ReferenceVector::with_tol(pi.pi.iter().copied().collect(), tol.re_tol)?;
    potentials(p, f, &r, tol)
}

/// Shift `g` by a constant so that `r_new·g' = η`.
pub fn renormalize_potentials(
    sol: &PotentialSolution,
    r_new: &ReferenceVector,
    tol: &Tolerances,
) -> Result<PotentialSolution> {
    r_new.check(sol.g.len(), tol.re_tol)?;
    let c = (sol.eta - r_new.dot(&sol.g)) / r_new.dot_with_ones();
    Ok(PotentialSolution {
        g: sol.g.add_scalar(c),
        eta: sol.eta,
        normalization: Normalization::ReferenceEqualsEta(r_new.clone()),
    })
}

/// `‖g - f + η e - P g‖_∞`.
pub fn poisson_residual(p: &DMatrix<f64>, f: &DVector<f64>, g: &DVector<f64>, eta: f64) -> f64 {
    let res = g - f + DVector::from_element(g.len(), eta) - p * g;
    max_abs_vec(&res)
}

/// Partial sum of the Neumann series `Σ_{n=0}^{T} (P - e r)ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFundamental {
    pub z: DMatrix<f64>,
    pub terms: usize,
    /// `‖(P - e r)^{T+1}‖_∞`.
    pub residual_norm: f64,
    /// Upper bound on `‖Z_r - z‖_∞`; infinite until `residual_norm < 1`.
    pub tail_bound: f64,
}

fn series_precondition(p: &StochasticMatrix, r: &ReferenceVector, tol: &Tolerances) -> Result<DMatrix<f64>> {
    r.check(p.size(), tol.re_tol)?;
    let dot = r.dot_with_ones();
    if !(dot > tol.series_margin && dot < 2.0 - tol.series_margin) {
        return Err(Error::SeriesDivergent { dot });
    }
    ensure_aperiodic(p, tol)?;
    let n = p.size();
    let e_r = ones(n) * r.values().transpose();
    Ok(p.matrix() - e_r)
}

/// Accumulates powers of `M = P - e r` and tracks the tail bound
/// `‖M^{T+1}‖ Σ_{i≤T} ‖Mⁱ‖ / (1 - ‖M^{T+1}‖)`.
struct SeriesState {
    m: DMatrix<f64>,
    power: DMatrix<f64>,
    sum: DMatrix<f64>,
    norm_sum: f64,
    terms: usize,
}

impl SeriesState {
    fn new(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        Self {
            m,
            power: DMatrix::identity(n, n),
            sum: DMatrix::identity(n, n),
            norm_sum: 1.0,
            terms: 0,
        }
    }

    fn add_term(&mut self) {
        self.power = &self.power * &self.m;
        self.sum += &self.power;
        self.norm_sum += inf_norm(&self.power);
        self.terms += 1;
    }

    fn finish(self) -> SeriesFundamental {
        let next = inf_norm(&(&self.power * &self.m));
        let tail_bound = if next < 1.0 {
            next * self.norm_sum / (1.0 - next)
        } else {
            f64::INFINITY
        };
        SeriesFundamental {
            z: self.sum,
            terms: self.terms,
            residual_norm: next,
            tail_bound,
        }
    }
}

/// `Σ_{n=0}^{T} (P - e r)ⁿ`. Requires an aperiodic chain and
/// `0 < r·e < 2` (kept `series_margin` away from both ends).
pub fn series_fundamental(
    p: &StochasticMatrix,
    r: &ReferenceVector,
    terms: usize,
    tol: &Tolerances,
) -> Result<SeriesFundamental> {
    let mut state = SeriesState::new(series_precondition(p, r, tol)?);
    for _ in 0..terms {
        state.add_term();
    }
    Ok(state.finish())
}

/// Add series terms until the tail bound drops below `target` or
/// `max_terms` is reached.
pub fn series_fundamental_until(
    p: &StochasticMatrix,
    r: &ReferenceVector,
    target: f64,
    max_terms: usize,
    tol: &Tolerances,
) -> Result<SeriesFundamental> {
    let m = series_precondition(p, r, tol)?;
    let mut state = SeriesState::new(m);
    loop {
        let next = inf_norm(&(&state.power * &state.m));
        if next < 1.0 && next * state.norm_sum / (1.0 - next) < target {
            break;
        }
        if state.terms >= max_terms {
            break;
        }
        state.add_term();
    }
    Ok(state.finish())
}

/// Potentials as accumulated reward minus a reference level:
/// `g ≈ g̃_T - e (r·g̃_T)` with `g̃_T = Σ_{t=0}^{T} Pᵗ f`.
///
/// Requires `r·e = 1`; the returned vector satisfies `r·g = 0`. `η` is
/// reported from the stationary distribution.
pub fn potentials_reference_level(
    p: &StochasticMatrix,
    f: &RewardVector,
    r: &ReferenceVector,
    horizon: usize,
    tol: &Tolerances,
) -> Result<PotentialSolution> {
    r.check(p.size(), tol.re_tol)?;
    f.expect_len(p.size())?;
    if (r.dot_with_ones() - 1.0).abs() > tol.re_eq1_tol {
        return Err(Error::ReferenceNotDistributionLike {
            dot: r.dot_with_ones(),
        });
    }
    if horizon < 1 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    ensure_aperiodic(p, tol)?;
    let accumulated = truncated_accumulated_reward(p, f, horizon)?;
    let level = r.dot(&accumulated);
    let g = accumulated.add_scalar(-level);
    let eta = stationary(p, r, tol)?.average(f);
    Ok(PotentialSolution {
        g,
        eta,
        normalization: Normalization::ReferenceZero(r.clone()),
    })
}

/// Check the eigen-structure of `I - P + e r`.
///
/// * `shift_eigenvector`: `(I - P + e r) e = (r·e) e`, on every size.
/// * `shifted_spectrum` (S ≤ 3): the spectrum equals `{r·e} ∪ {1 - λᵢ}` where
///   `λᵢ` are the eigenvalues of `P` other than the one at 1, all taken from
///   characteristic polynomials.
pub fn verify_spectral_shift(p: &StochasticMatrix, r: &ReferenceVector, tol: &Tolerances) -> Report {
    let mut report = Report::new();
    let n = p.size();
    if r.len() != n {
        report.within("reference_length", (r.len() as f64 - n as f64).abs(), 0.0);
        return report;
    }
    let a = shifted_matrix(p.matrix(), r.values());
    let e = ones(n);
    let lhs = &a * &e;
    let residual = max_abs_vec(&(lhs - &e * r.dot_with_ones()));
    report.within("shift_eigenvector", residual, tol.solve_tol(n));

    if let (Some(shifted), Some(mut base)) = (small_spectrum(&a), small_spectrum(p.matrix())) {
        if let Some(k) = closest(&base, C64::new(1.0, 0.0)) {
            base.remove(k);
        }
        let mut predicted = vec![C64::new(r.dot_with_ones(), 0.0)];
        predicted.extend(base.iter().map(|l| C64::new(1.0, 0.0) - l));
        report.within(
            "shifted_spectrum",
            spectrum_distance(&shifted, &predicted),
            tol.spectrum_tol,
        );
    }
    report
}
