use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The quantity sits on the edge of an open region; neither a clear pass
    /// nor a violation.
    Boundary,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
}

/// Named verification checks with their residuals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a check that passes iff `residual <= tolerance`.
    pub fn within(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        let status = if residual <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        self.push(name, status, residual, tolerance);
    }

    pub fn push(&mut self, name: impl Into<String>, status: CheckStatus, residual: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            status,
            residual,
            tolerance,
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    /// No check failed. Boundary results do not count as failures.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<8} {:<40} residual {:.3e} (tolerance {:.1e})",
                c.status.as_str(),
                c.name,
                c.residual,
                c.tolerance
            )?;
        }
        Ok(())
    }
}
