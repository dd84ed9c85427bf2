use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    pub tol: f64,
}

/// Residual reported for checks that could not be evaluated; JSON has no
/// infinity.
pub const ERROR_RESIDUAL: f64 = f64::MAX;

impl Check {
    /// Passes when `residual <= tol`.
    pub fn within(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        let status = if residual <= tol { Status::Pass } else { Status::Fail };
        Self {
            name: name.into(),
            status,
            residual: if residual.is_finite() { residual } else { ERROR_RESIDUAL },
            tol,
        }
    }

    /// Passes when `residual > tol`: negative controls.
    pub fn exceeds(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        let mut c = Self::within(name, residual, tol);
        c.status = if residual > tol { Status::Pass } else { Status::Fail };
        c
    }

    /// Exact predicate; residual is 0 or 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::within(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn error(name: impl Into<String>, tol: f64) -> Self {
        Self {
            name: name.into(),
            status: Status::Error,
            residual: ERROR_RESIDUAL,
            tol,
        }
    }

    pub fn from_result<E>(name: &str, tol: f64, r: Result<f64, E>) -> Self {
        match r {
            Ok(v) => Self::within(name, v, tol),
            Err(_) => Self::error(name, tol),
        }
    }

    pub fn prefixed(mut self, prefix: &str) -> Self {
        self.name = format!("{prefix}.{}", self.name);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub elapsed_ms: f64,
}

impl Report {
    /// Sorts checks by name.
    pub fn new(suite: &str, seed: u64, mut checks: Vec<Check>, started: Option<Instant>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        Self {
            suite: suite.into(),
            seed,
            checks,
            elapsed_ms: started.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }
}

/// Named tolerances with defaults, overridable by `--tol name=value`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

pub const DEFAULT_TOLERANCES: [(&str, f64); 14] = [
    ("closure", 1e-8),
    ("coframe", 1e-10),
    ("constraint", 1e-8),
    ("endpoint", 1e-6),
    ("fit", 1e-6),
    ("geodesic", 1e-6),
    ("homomorphism", 1e-10),
    ("incidence", 1e-12),
    ("invariant", 1e-10),
    ("quadric", 1e-8),
    ("rank", 1e-8),
    ("reconstruction", 1e-12),
    ("symmetry", 1e-9),
    ("volume", 1e-10),
];

impl Default for Tolerances {
    fn default() -> Self {
        Self(DEFAULT_TOLERANCES.into_iter().collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    /// Apply `name=value` overrides.
    pub fn with_overrides(mut self, specs: &[String]) -> Result<Self, String> {
        for spec in specs {
            let (name, value) = spec
                .split_once('=')
                .ok_or_else(|| format!("tolerance {spec:?} is not of the form name=value"))?;
            let value: f64 = value
                .parse()
                .map_err(|_| format!("tolerance {name:?} has non-numeric value {value:?}"))?;
            if !(value.is_finite() && value >= 0.0) {
                return Err(format!("tolerance {name:?} must be finite and non-negative"));
            }
            if !self.0.contains_key(name) {
                let known: Vec<_> = self.0.keys().copied().collect();
                return Err(format!("unknown tolerance {name:?} (known: {})", known.join(", ")));
            }
            *self.0.get_mut(name).expect("checked above") = value;
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let t = Tolerances::default().with_overrides(&["symmetry=1e-6".into()]).unwrap();
        assert_eq!(t.get("symmetry"), 1e-6);
        assert!(Tolerances::default().with_overrides(&["nope=1".into()]).is_err());
        assert!(Tolerances::default().with_overrides(&["symmetry".into()]).is_err());
        assert!(Tolerances::default().with_overrides(&["symmetry=-1".into()]).is_err());
    }

    #[test]
    fn checks_sort_and_serialize() {
        let r = Report::new(
            "x",
            7,
            vec![
                Check::holds("b", true),
                Check::within("a", 2.0, 1.0),
                Check::error("c", 0.5),
            ],
            None,
        );
        assert_eq!(r.checks[0].name, "a");
        assert!(!r.passed());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.starts_with(r#"{"suite":"x","seed":7,"checks":[{"name":"a","status":"fail""#));
        assert!(json.contains(r#""status":"error""#));
    }
}
