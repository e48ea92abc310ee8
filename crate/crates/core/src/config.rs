/// Numerical tolerances shared by every solver.
///
/// `solve_tol` scales with the state count: the effective value for an
/// `S`-state problem is `solve_tol_per_state * S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a row sum from 1 (stochastic) or 0 (generator).
    pub row_tol: f64,
    /// An entry is an edge of the support graph iff it exceeds this value.
    pub edge_tol: f64,
    pub solve_tol_per_state: f64,
    pub poisson_tol: f64,
    /// Smallest admissible `|r·e|`.
    pub re_tol: f64,
    /// Tolerance on `r·e = 1` for the reference-level representation.
    pub re_eq1_tol: f64,
    /// Distance kept from the endpoints of `0 < r·e < 2` by the series form.
    pub series_margin: f64,
    /// Relative pivot threshold of the LU factorization.
    pub pivot_tol: f64,
    /// Agreement required between a computed spectrum and its prediction.
    pub spectrum_tol: f64,
    /// Skip the irreducibility check before direct solves.
    pub allow_unchecked: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            row_tol: 1e-9,
            edge_tol: 0.0,
            solve_tol_per_state: 1e-10,
            poisson_tol: 1e-8,
            re_tol: 1e-12,
            re_eq1_tol: 1e-9,
            series_margin: 1e-6,
            pivot_tol: 1e-12,
            spectrum_tol: 1e-8,
            allow_unchecked: false,
        }
    }
}

impl Tolerances {
    pub fn solve_tol(&self, states: usize) -> f64 {
        self.solve_tol_per_state * states.max(1) as f64
    }
}
