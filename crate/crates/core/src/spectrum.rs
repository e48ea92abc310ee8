//! Spectral tools that do not need a general eigensolver: characteristic
//! polynomial roots for matrices up to 3x3, spectrum matching, and a
//! power-iteration estimate of the spectral radius.

use nalgebra::{Complex, DMatrix, DVector};

use crate::rng;

pub type C64 = Complex<f64>;

/// Largest dimension handled by [`small_spectrum`].
pub const CLOSED_FORM_MAX_DIM: usize = 3;

/// Eigenvalues of a 1x1, 2x2 or 3x3 matrix as roots of its characteristic
/// polynomial. Returns `None` for larger or non-square matrices.
pub fn small_spectrum(m: &DMatrix<f64>) -> Option<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return None;
    }
    match m.nrows() {
        1 => Some(vec![C64::new(m[(0, 0)], 0.0)]),
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            Some(quadratic_roots(-tr, det).to_vec())
        }
        3 => {
            let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
            let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
                - m[(0, 2)] * m[(2, 0)]
                + m[(1, 1)] * m[(2, 2)]
                - m[(1, 2)] * m[(2, 1)];
            let det = m.determinant();
            Some(cubic_roots(-tr, minors, -det).to_vec())
        }
        _ => None,
    }
}

/// Roots of `x² + b x + c`.
pub fn quadratic_roots(b: f64, c: f64) -> [C64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
        if q == 0.0 {
            // b = 0 and c = 0
            return [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        }
        [C64::new(q, 0.0), C64::new(c / q, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [C64::new(re, im), C64::new(re, -im)]
    }
}

/// Roots of `x³ + a x² + b x + c`: one real root by bracketed Newton, the
/// other two from the deflated quadratic.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [C64; 3] {
    let poly = |x: f64| ((x + a) * x + b) * x + c;
    let dpoly = |x: f64| (3.0 * x + 2.0 * a) * x + b;

    let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
    let (mut lo, mut hi) = (-bound, bound);
    let mut x = 0.0;
    for _ in 0..200 {
        let fx = poly(x);
        if fx == 0.0 {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dpoly(x);
        let newton = if d != 0.0 { x - fx / d } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= f64::EPSILON * (1.0 + x.abs()) {
            x = next;
            break;
        }
        x = next;
    }
    let qb = a + x;
    let qc = b + qb * x;
    let [r1, r2] = quadratic_roots(qb, qc);
    [C64::new(x, 0.0), r1, r2]
}

/// Largest distance between paired eigenvalues under the best pairing of two
/// equally sized lists (exhaustive over permutations, meant for n ≤ 3).
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut idx: Vec<usize> = (0..b.len()).collect();
    let mut best = f64::INFINITY;
    permute(&mut idx, 0, &mut |perm| {
        let worst = a
            .iter()
            .zip(perm)
            .map(|(x, &j)| (x - b[j]).norm())
            .fold(0.0, f64::max);
        best = best.min(worst);
    });
    best
}

fn permute(idx: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == idx.len() {
        visit(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, visit);
        idx.swap(k, i);
    }
}

/// Index of the element of `values` closest to `target`.
pub fn closest(values: &[C64], target: C64) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| {
            (**x - target)
                .norm()
                .partial_cmp(&(**y - target).norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
}

/// Power-iteration estimate of a spectral radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRadius {
    pub rho: f64,
    /// The per-step growth factors had not settled when iteration stopped,
    /// typically because the dominant eigenvalues form a complex pair or are
    /// close in modulus.
    pub uncertain: bool,
}

/// Estimate `ρ(M)` by normalized power iteration from a seeded random start.
///
/// The estimate is the geometric mean of the growth factors `‖M v_k‖ / ‖v_k‖`
/// over the second half of the run, i.e. the growth rate of `‖M^k v‖^{1/k}`
/// with the transient discarded. A rotating dominant pair makes individual
/// factors oscillate; the averaged rate still tends to the modulus.
pub fn spectral_radius_estimate(m: &DMatrix<f64>, iters: usize, seed: u64) -> SpectralRadius {
    let n = m.nrows();
    let iters = iters.max(1);
    if n == 0 {
        return SpectralRadius {
            rho: 0.0,
            uncertain: false,
        };
    }
    let mut rng = rng::stream(seed);
    let mut v = DVector::from_fn(n, |_, _| 2.0 * rng::unit_f64(&mut rng) - 1.0);
    let norm = v.norm();
    if norm == 0.0 {
        v = DVector::from_element(n, 1.0);
    }
    v /= v.norm();

    let mut growth = Vec::with_capacity(iters);
    for _ in 0..iters {
        let w = m * &v;
        let g = w.norm();
        if g == 0.0 || !g.is_finite() {
            return SpectralRadius {
                rho: if g == 0.0 { 0.0 } else { f64::INFINITY },
                uncertain: g != 0.0,
            };
        }
        growth.push(g);
        v = w / g;
    }
    let tail = &growth[growth.len() / 2..];
    let log_mean = tail.iter().map(|g| g.ln()).sum::<f64>() / tail.len() as f64;
    let rho = log_mean.exp();

    let quarter = &growth[growth.len() - growth.len().div_ceil(4)..];
    let (lo, hi) = quarter
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &g| (lo.min(g), hi.max(g)));
    let uncertain = rho > 0.0 && (hi - lo) / rho > 1e-6;
    SpectralRadius { rho, uncertain }
}
