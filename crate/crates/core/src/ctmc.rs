//! Continuous-time counterparts: with a generator `B` of an ergodic process,
//! `B + e r` is invertible whenever `r·e ≠ 0`, and
//!
//! * `π = r (B + e r)⁻¹`,
//! * `g = -(B + e r)⁻¹ f` solves `-B g = f - η e`.
//!
//! Substituting the Poisson equation shows that this `g` satisfies
//! `r·g = -η`; solutions carry [`Normalization::ReferenceEqualsMinusEta`].

use nalgebra::{DMatrix, DVector};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gfm::{finalize_distribution, Normalization, PotentialSolution, StationaryDistribution};
use crate::linalg::{generator_shifted_matrix, max_abs_vec, ones, LuFactorization};
use crate::model::{
    diagnose_chain, min_uniformization_rate, uniformize, GeneratorMatrix, ReferenceVector, RewardVector,
};
use crate::report::{CheckStatus, Report};
use crate::spectrum::{closest, small_spectrum, spectrum_distance, C64};

/// Ergodicity via irreducibility of the chain uniformized at `γ = max|B(s,s)| + 1`,
/// whose strictly positive diagonal also makes it aperiodic.
pub fn ensure_ergodic(b: &GeneratorMatrix, tol: &Tolerances) -> Result<()> {
    if tol.allow_unchecked {
        return Ok(());
    }
    let p = uniformize(b, min_uniformization_rate(b) + 1.0, tol.row_tol)?;
    let d = diagnose_chain(&p, tol.edge_tol);
    if !d.irreducible {
        return Err(Error::NotErgodic {
            closed_classes: d.num_closed_classes,
        });
    }
    Ok(())
}

fn factor(b: &GeneratorMatrix, r: &ReferenceVector, tol: &Tolerances) -> Result<LuFactorization> {
    r.check(b.size(), tol.re_tol)?;
    LuFactorization::factor(&generator_shifted_matrix(b.matrix(), r.values()), tol.pivot_tol)
}

/// `π` from `π (B + e r) = r`.
pub fn ctmc_stationary(
    b: &GeneratorMatrix,
    r: &ReferenceVector,
    tol: &Tolerances,
) -> Result<StationaryDistribution> {
    ensure_ergodic(b, tol)?;
    let lu = factor(b, r, tol)?;
    finalize_distribution(lu.solve_transpose(r.values()), tol.solve_tol(b.size()))
}

/// `g = -(B + e r)⁻¹ f`, with `η = π·f`. The result satisfies `r·g = -η`.
pub fn ctmc_potentials(
    b: &GeneratorMatrix,
    f: &RewardVector,
    r: &ReferenceVector,
    tol: &Tolerances,
) -> Result<PotentialSolution> {
    ensure_ergodic(b, tol)?;
    f.expect_len(b.size())?;
    let lu = factor(b, r, tol)?;
    let g = lu.solve(&(-f.values()));
    let pi = finalize_distribution(lu.solve_transpose(r.values()), tol.solve_tol(b.size()))?;
    Ok(PotentialSolution {
        g,
        eta: pi.average(f),
        normalization: Normalization::ReferenceEqualsMinusEta(r.clone()),
    })
}

/// The classical route `g = -(B - e π)⁻¹ f`, normalized by `π·g = η`.
pub fn ctmc_potentials_classic(
    b: &GeneratorMatrix,
    f: &RewardVector,
    tol: &Tolerances,
) -> Result<PotentialSolution> {
    f.expect_len(b.size())?;
    let pi = ctmc_stationary(b, &ReferenceVector::uniform(b.size()), tol)?;
    let a = generator_shifted_matrix(b.matrix(), &(-&pi.pi));
    let lu = LuFactorization::factor(&a, tol.pivot_tol)?;
    let g = lu.solve(&(-f.values()));
    let r = ReferenceVector::with_tol(pi.pi.iter().copied().collect(), tol.re_tol)?;
    Ok(PotentialSolution {
        g,
        eta: pi.average(f),
        normalization: Normalization::ReferenceEqualsEta(r),
    })
}

/// `‖-B g - f + η e‖_∞`.
pub fn continuous_poisson_residual(b: &DMatrix<f64>, f: &DVector<f64>, g: &DVector<f64>, eta: f64) -> f64 {
    let res = -(b * g) - f + DVector::from_element(g.len(), eta);
    max_abs_vec(&res)
}

/// Check the eigen-structure of `B` and `B + e r` against the uniformization
/// rate `gamma`.
///
/// Every size gets `generator_row_sums` (`B e = 0`) and `shift_eigenvector`
/// (`(B + e r) e = (r·e) e`). Up to 3x3 the spectra are compared through
/// characteristic polynomials, and every nonzero eigenvalue of `B` must lie in
/// the open disk of radius `γ` centred at `-γ`. At the minimal `γ` a real
/// eigenvalue can sit exactly on that circle; the check then reports
/// [`CheckStatus::Boundary`] instead of passing or failing.
pub fn verify_generator_spectrum(
    b: &GeneratorMatrix,
    gamma: f64,
    r: &ReferenceVector,
    tol: &Tolerances,
) -> Report {
    let mut report = Report::new();
    let n = b.size();
    let min_rate = min_uniformization_rate(b);
    let gamma_ok = gamma > 0.0 && gamma >= min_rate;
    report.push(
        "gamma_admissible",
        if gamma_ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        gamma,
        min_rate,
    );

    let e = ones(n);
    report.within("generator_row_sums", max_abs_vec(&(b.matrix() * &e)), tol.row_tol);
    if r.len() != n {
        report.within("reference_length", (r.len() as f64 - n as f64).abs(), 0.0);
        return report;
    }
    let d = generator_shifted_matrix(b.matrix(), r.values());
    report.within(
        "shift_eigenvector",
        max_abs_vec(&(&d * &e - &e * r.dot_with_ones())),
        tol.solve_tol(n),
    );

    let (Some(mut spec_b), Some(spec_d)) = (small_spectrum(b.matrix()), small_spectrum(&d)) else {
        return report;
    };
    if let Some(k) = closest(&spec_b, C64::new(0.0, 0.0)) {
        spec_b.remove(k);
    }
    let mut predicted = vec![C64::new(r.dot_with_ones(), 0.0)];
    predicted.extend(spec_b.iter().copied());
    report.within(
        "shifted_spectrum",
        spectrum_distance(&spec_d, &predicted),
        tol.spectrum_tol,
    );

    if gamma_ok {
        let centre = C64::new(-gamma, 0.0);
        let farthest = spec_b.iter().map(|l| (l - centre).norm()).fold(0.0, f64::max);
        let excess = farthest - gamma;
        let at_min_rate = gamma <= min_rate * (1.0 + 1e-12);
        let status = if excess < -tol.spectrum_tol {
            CheckStatus::Pass
        } else if excess.abs() <= tol.spectrum_tol && at_min_rate {
            CheckStatus::Boundary
        } else {
            CheckStatus::Fail
        };
        report.push("eigenvalue_disk", status, farthest, gamma);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfm;
    use approx::assert_abs_diff_eq;

    fn generator(rows: &[&[f64]]) -> GeneratorMatrix {
        GeneratorMatrix::from_rows(rows, 1e-9).unwrap()
    }

    fn sym() -> GeneratorMatrix {
        generator(&[&[-1.0, 1.0], &[1.0, -1.0]])
    }

    fn r(v: &[f64]) -> ReferenceVector {
        ReferenceVector::new(v.to_vec()).unwrap()
    }

    fn f(v: &[f64]) -> RewardVector {
        RewardVector::new(v.to_vec()).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn stationary_examples() {
        let pi = ctmc_stationary(&sym(), &r(&[1.0, 0.0]), &tol()).unwrap();
        assert_abs_diff_eq!(pi.pi[0], 0.5, epsilon = 1e-15);
        let pi = ctmc_stationary(&generator(&[&[0.0]]), &r(&[1.0]), &tol()).unwrap();
        assert_eq!(pi.pi[0], 1.0);
        let b = generator(&[&[-2.0, 2.0], &[1.0, -1.0]]);
        let pi = ctmc_stationary(&b, &r(&[0.5, 0.5]), &tol()).unwrap();
        // oracle: πB = 0 with πe = 1 gives 2π₀ = π₁
        assert_abs_diff_eq!(pi.pi[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pi.pi[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn potentials_examples() {
        let sol = ctmc_potentials(&sym(), &f(&[1.0, 0.0]), &r(&[1.0, 0.0]), &tol()).unwrap();
        assert_abs_diff_eq!(sol.g[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.g[1], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.eta, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r(&[1.0, 0.0]).dot(&sol.g), -sol.eta, epsilon = 1e-15);
        assert_eq!(sol.normalization.label(), "r·g=-eta");

        let sol = ctmc_potentials(&generator(&[&[0.0]]), &f(&[4.0]), &r(&[1.0]), &tol()).unwrap();
        assert_eq!((sol.g[0], sol.eta), (-4.0, 4.0));

        let b = generator(&[&[-2.0, 2.0], &[1.0, -1.0]]);
        let rr = r(&[0.2, 0.6]);
        let sol = ctmc_potentials(&b, &f(&[3.0, 3.0]), &rr, &tol()).unwrap();
        for v in sol.g.iter() {
            assert_abs_diff_eq!(*v, -3.0 / 0.8, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(sol.eta, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn classic_examples() {
        let fv = f(&[1.0, 0.0]);
        let sol = ctmc_potentials_classic(&sym(), &fv, &tol()).unwrap();
        assert_abs_diff_eq!(sol.g[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.g[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.eta, 0.5, epsilon = 1e-15);
        assert!(continuous_poisson_residual(sym().matrix(), fv.values(), &sol.g, sol.eta) < 1e-14);

        let single = ctmc_potentials_classic(&generator(&[&[0.0]]), &f(&[2.0]), &tol()).unwrap();
        assert_eq!((single.g[0], single.eta), (2.0, 2.0));

        // shifting the r-normalized solution to π·g = η reproduces the classic one
        let direct = ctmc_potentials(&sym(), &fv, &r(&[1.0, 0.0]), &tol()).unwrap();
        let pi = DVector::from_vec(vec![0.5, 0.5]);
        let c = (direct.eta - pi.dot(&direct.g)) / pi.sum();
        let shifted = direct.g.add_scalar(c);
        assert_abs_diff_eq!((shifted - &sol.g).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn not_ergodic() {
        let b = generator(&[&[0.0, 0.0], &[1.0, -1.0]]);
        let b2 = generator(&[&[0.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            ensure_ergodic(&b, &tol()),
            Err(Error::NotErgodic { closed_classes: 1 })
        ));
        assert!(matches!(
            ctmc_stationary(&b2, &r(&[0.5, 0.5]), &tol()),
            Err(Error::NotErgodic { closed_classes: 2 })
        ));
    }

    #[test]
    fn spectrum_examples() {
        let rr = r(&[0.5, 0.5]);
        let rep = verify_generator_spectrum(&sym(), 1.0, &rr, &tol());
        assert_eq!(rep.get("eigenvalue_disk").unwrap().status, CheckStatus::Boundary);
        assert!(rep.passed(), "{rep}");
        let rep = verify_generator_spectrum(&sym(), 1.5, &rr, &tol());
        let disk = rep.get("eigenvalue_disk").unwrap();
        assert_eq!(disk.status, CheckStatus::Pass);
        assert_abs_diff_eq!(disk.residual, 0.5, epsilon = 1e-12);
        let rep = verify_generator_spectrum(&generator(&[&[0.0]]), 1.0, &r(&[1.0]), &tol());
        assert!(rep.passed(), "{rep}");
        let rep = verify_generator_spectrum(&sym(), 0.5, &rr, &tol());
        assert!(!rep.passed());
    }

    #[test]
    fn uniformized_chain_has_same_stationary_distribution() {
        let b = generator(&[&[-3.0, 2.0, 1.0], &[0.5, -0.5, 0.0], &[1.0, 1.0, -2.0]]);
        let rr = r(&[0.1, 0.2, 0.3]);
        let direct = ctmc_stationary(&b, &rr, &tol()).unwrap();
        for gamma in [3.0, 6.0, 30.0] {
            let p = uniformize(&b, gamma, 1e-9).unwrap();
            let via_chain = gfm::stationary(&p, &rr, &tol()).unwrap();
            assert_abs_diff_eq!((&direct.pi - via_chain.pi).amax(), 0.0, epsilon = 1e-12);
        }
    }
}
