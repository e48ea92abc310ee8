use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// What the step sizes are known to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepCondition {
    /// `Σ α_t = ∞` and `Σ α_t² < ∞`.
    RobbinsMonro,
    /// Only `Σ α_t = ∞` with `α_t → 0`; no convergence claim is made.
    Vanishing,
    /// `Σ α_t < ∞`: steps die out too fast to reach the fixed point in general.
    Summable,
    /// Steps do not vanish.
    Constant,
    Unknown,
}

/// Step-size sequence `α_t`, indexed by global time `t = 0, 1, …`.
#[derive(Clone)]
pub enum StepSchedule {
    /// `α_t = a / (b + t)^p`.
    RobbinsMonroPower {
        a: f64,
        b: f64,
        p: f64,
    },
    Constant {
        alpha: f64,
    },
    Custom(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl StepSchedule {
    pub fn power(a: f64, b: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) || !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power schedule needs a > 0, b > 0, p > 0; got a={a}, b={b}, p={p}"
            )));
        }
        Ok(StepSchedule::RobbinsMonroPower { a, b, p })
    }

    pub fn constant(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::ScheduleInvalid { t: 0, alpha });
        }
        Ok(StepSchedule::Constant { alpha })
    }

    pub fn custom(f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        StepSchedule::Custom(Arc::new(f))
    }

    pub fn alpha(&self, t: u64) -> f64 {
        match self {
            StepSchedule::RobbinsMonroPower { a, b, p } => {
                let base = b + t as f64;
                if *p == 1.0 {
                    a / base
                } else {
                    a / base.powf(*p)
                }
            }
            StepSchedule::Constant { alpha } => *alpha,
            StepSchedule::Custom(f) => f(t),
        }
    }

    /// `α_t`, or `ScheduleInvalid` when it is not positive and finite.
    pub fn checked_alpha(&self, t: u64) -> Result<f64> {
        let alpha = self.alpha(t);
        if alpha > 0.0 && alpha.is_finite() {
            Ok(alpha)
        } else {
            Err(Error::ScheduleInvalid { t, alpha })
        }
    }

    pub fn condition(&self) -> StepCondition {
        match self {
            StepSchedule::RobbinsMonroPower { p, .. } => {
                if *p > 0.5 && *p <= 1.0 {
                    StepCondition::RobbinsMonro
                } else if *p <= 0.5 {
                    StepCondition::Vanishing
                } else {
                    StepCondition::Summable
                }
            }
            StepSchedule::Constant { .. } => StepCondition::Constant,
            StepSchedule::Custom(_) => StepCondition::Unknown,
        }
    }
}

impl Default for StepSchedule {
    /// `α_t = 1 / (10 + t)`.
    fn default() -> Self {
        StepSchedule::RobbinsMonroPower {
            a: 1.0,
            b: 10.0,
            p: 1.0,
        }
    }
}

impl fmt::Debug for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::RobbinsMonroPower { a, b, p } => {
                write!(f, "RobbinsMonroPower {{ a: {a}, b: {b}, p: {p} }}")
            }
            StepSchedule::Constant { alpha } => write!(f, "Constant {{ alpha: {alpha} }}"),
            StepSchedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_one_over_ten_plus_t() {
        let s = StepSchedule::default();
        assert_eq!(s.alpha(0), 0.1);
        assert_eq!(s.alpha(90), 0.01);
        assert_eq!(s.condition(), StepCondition::RobbinsMonro);
    }

    #[test]
    fn conditions_by_exponent() {
        assert_eq!(
            StepSchedule::power(1.0, 1.0, 0.75).unwrap().condition(),
            StepCondition::RobbinsMonro
        );
        assert_eq!(
            StepSchedule::power(1.0, 1.0, 0.5).unwrap().condition(),
            StepCondition::Vanishing
        );
        assert_eq!(
            StepSchedule::power(1.0, 1.0, 1.5).unwrap().condition(),
            StepCondition::Summable
        );
        assert_eq!(
            StepSchedule::constant(0.5).unwrap().condition(),
            StepCondition::Constant
        );
    }

    #[test]
    fn invalid_steps() {
        assert!(StepSchedule::power(1.0, 0.0, 1.0).is_err());
        assert!(StepSchedule::constant(0.0).is_err());
        let s = StepSchedule::custom(|t| if t < 3 { 0.1 } else { -1.0 });
        assert!(s.checked_alpha(2).is_ok());
        assert!(matches!(
            s.checked_alpha(3),
            Err(Error::ScheduleInvalid { t: 3, .. })
        ));
    }
}
