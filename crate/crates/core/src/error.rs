use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by model validation and by the solvers.
///
/// Row and state indices are zero-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },

    #[error("entry ({row}, {col}) = {value} is negative beyond tolerance")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("off-diagonal rate ({row}, {col}) = {value} is negative beyond tolerance")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, expected {expected} within tolerance")]
    RowSumViolation { row: usize, sum: f64, expected: f64 },

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("reference vector has r·e = {dot}, below tolerance {tol}")]
    ReferenceDegenerate { dot: f64, tol: f64 },

    #[error("reference vector has r·e = {dot}; this operation requires r·e = 1")]
    ReferenceNotDistributionLike { dot: f64 },

    #[error("pivot {pivot} at step {step} is below tolerance; the shifted matrix is numerically singular")]
    NearSingular { step: usize, pivot: f64 },

    #[error("chain is not irreducible ({closed_classes} closed classes)")]
    NotIrreducible { closed_classes: usize },

    #[error("chain has period {period}; this operation requires an aperiodic chain")]
    NotAperiodic { period: usize },

    #[error("process is not ergodic: its uniformized chain has {closed_classes} closed classes")]
    NotErgodic { closed_classes: usize },

    #[error("series diverges: r·e = {dot} is outside (0, 2)")]
    SeriesDivergent { dot: f64 },

    #[error("uniformization rate {gamma} is below the largest exit rate {min_rate}")]
    GammaTooSmall { gamma: f64, min_rate: f64 },

    #[error("step size {alpha} at t = {t} is not positive and finite")]
    ScheduleInvalid { t: u64, alpha: f64 },

    #[error("probability {value} at state {index} is negative beyond tolerance")]
    NegativeProbability { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model file: {0}")]
    ModelFormat(String),
}

impl Error {
    /// Stable identifier for the error kind, used in machine-readable output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonSquare { .. } => "NonSquare",
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::NegativeOffDiagonal { .. } => "NegativeOffDiagonal",
            Error::RowSumViolation { .. } => "RowSumViolation",
            Error::NonFinite { .. } => "NonFinite",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::ReferenceDegenerate { .. } => "ReferenceDegenerate",
            Error::ReferenceNotDistributionLike { .. } => "ReferenceNotDistributionLike",
            Error::NearSingular { .. } => "NearSingular",
            Error::NotIrreducible { .. } => "NotIrreducible",
            Error::NotAperiodic { .. } => "NotAperiodic",
            Error::NotErgodic { .. } => "NotErgodic",
            Error::SeriesDivergent { .. } => "SeriesDivergent",
            Error::GammaTooSmall { .. } => "GammaTooSmall",
            Error::ScheduleInvalid { .. } => "ScheduleInvalid",
            Error::NegativeProbability { .. } => "NegativeProbability",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::ModelFormat(_) => "ModelFormat",
        }
    }

    /// Short form with the locating index, e.g. `RowSumViolation(row=1)`.
    pub fn summary(&self) -> String {
        match self {
            Error::NegativeEntry { row, col, .. } | Error::NegativeOffDiagonal { row, col, .. } => {
                format!("{}(row={row}, col={col})", self.code())
            }
            Error::RowSumViolation { row, .. } => format!("{}(row={row})", self.code()),
            Error::NonFinite { index, .. } | Error::NegativeProbability { index, .. } => {
                format!("{}(index={index})", self.code())
            }
            Error::NearSingular { step, .. } => format!("{}(step={step})", self.code()),
            Error::NotAperiodic { period } => format!("{}(period={period})", self.code()),
            Error::DimensionMismatch { what, .. } => format!("{}({what})", self.code()),
            _ => self.code().to_string(),
        }
    }

    /// True for failures of the numerical machinery rather than of the input model.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearSingular { .. } | Error::SeriesDivergent { .. } | Error::NegativeProbability { .. }
        )
    }
}
