use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SUPPORTED_SITES;
use crate::gradient::GradientMethod;
use crate::hubbard::{build_hubbard, HubbardSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Simple,
    Hubbard,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::Simple => "simple",
            ScenarioKind::Hubbard => "hubbard",
        })
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(ScenarioKind::Simple),
            "hubbard" => Ok(ScenarioKind::Hubbard),
            _ => Err(Error::config(format!(
                "unknown scenario {s:?} (expected simple or hubbard)"
            ))),
        }
    }
}

/// Partial scenario as read from a JSON document or the command line. Keys
/// mirror the CLI flags; `method` and `gamma` are lists.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<ScenarioKind>,
    pub sites: Option<usize>,
    pub reps: Option<usize>,
    pub method: Option<Vec<String>>,
    pub shots: Option<usize>,
    pub gamma: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub iterations: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub theta0: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub orbitals: Option<Vec<usize>>,
}

impl ScenarioConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `overrides` win.
    pub fn merged(self, overrides: ScenarioConfig) -> ScenarioConfig {
        ScenarioConfig {
            scenario: overrides.scenario.or(self.scenario),
            sites: overrides.sites.or(self.sites),
            reps: overrides.reps.or(self.reps),
            method: overrides.method.or(self.method),
            shots: overrides.shots.or(self.shots),
            gamma: overrides.gamma.or(self.gamma),
            eta: overrides.eta.or(self.eta),
            iterations: overrides.iterations.or(self.iterations),
            runs: overrides.runs.or(self.runs),
            seed: overrides.seed.or(self.seed),
            theta0: overrides.theta0.or(self.theta0),
            out: overrides.out.or(self.out),
            orbitals: overrides.orbitals.or(self.orbitals),
        }
    }

    /// Fills defaults and validates.
    pub fn resolve(&self) -> Result<Scenario> {
        let kind = self.scenario.unwrap_or(ScenarioKind::Simple);
        let defaults = Defaults::for_kind(kind, self.sites)?;
        let reps = self.reps.unwrap_or(defaults.reps);
        if reps == 0 {
            return Err(Error::config("reps must be at least 1"));
        }
        let n_params = match kind {
            ScenarioKind::Simple => {
                if self.sites.is_some() || self.orbitals.is_some() {
                    return Err(Error::config("sites and orbitals only apply to the hubbard scenario"));
                }
                if reps != 1 {
                    return Err(Error::config("the simple scenario has exactly one repetition"));
                }
                1
            }
            ScenarioKind::Hubbard => {
                let sites = defaults.sites.expect("hubbard defaults carry a size");
                let parts = build_hubbard(&HubbardSpec::half_filled_ring(sites, 1.0, 1.0))?
                    .parts
                    .len();
                parts * reps
            }
        };
        let methods = match &self.method {
            Some(list) => list
                .iter()
                .map(|m| m.parse().map_err(|e: Error| Error::config(e.to_string())))
                .collect::<Result<Vec<GradientMethod>>>()?,
            None => defaults.methods,
        };
        if methods.is_empty() {
            return Err(Error::config("at least one gradient method is required"));
        }
        let gammas = self.gamma.clone().unwrap_or_else(|| vec![0.0]);
        if gammas.is_empty() {
            return Err(Error::config("at least one gamma value is required"));
        }
        if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::config(format!("gamma must be finite and >= 0, got {g}")));
        }
        let shots = self.shots.unwrap_or(50_000);
        let eta = self.eta.unwrap_or(defaults.eta);
        let iterations = self.iterations.unwrap_or(50);
        let runs = self.runs.unwrap_or(5);
        if shots == 0 || iterations == 0 || runs == 0 {
            return Err(Error::config("shots, iterations and runs must be at least 1"));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::config(format!("eta must be > 0, got {eta}")));
        }
        let theta0 = match &self.theta0 {
            Some(t) if t.len() == n_params => t.clone(),
            Some(t) if t.len() == 1 => vec![t[0]; n_params],
            Some(t) => {
                return Err(Error::config(format!(
                    "theta0 has {} entries, the ansatz has {n_params} parameters",
                    t.len()
                )))
            }
            None => vec![defaults.theta0; n_params],
        };
        if theta0.iter().any(|t| !t.is_finite()) {
            return Err(Error::config("theta0 entries must be finite"));
        }
        Ok(Scenario {
            kind,
            sites: defaults.sites,
            reps,
            methods,
            shots,
            gammas,
            eta,
            iterations,
            runs,
            seed: self.seed.unwrap_or(1),
            theta0,
            orbitals: self.orbitals.clone(),
        })
    }
}

struct Defaults {
    sites: Option<usize>,
    reps: usize,
    eta: f64,
    methods: Vec<GradientMethod>,
    theta0: f64,
}

impl Defaults {
    fn for_kind(kind: ScenarioKind, sites: Option<usize>) -> Result<Self> {
        let fd = |eps: &[f64]| {
            eps.iter()
                .map(|&epsilon| GradientMethod::FiniteDifference { epsilon })
                .chain([GradientMethod::ParameterShift])
                .collect::<Vec<_>>()
        };
        Ok(match kind {
            ScenarioKind::Simple => Defaults {
                sites: None,
                reps: 1,
                eta: 0.5,
                methods: fd(&[0.2, 0.05, 0.02]),
                theta0: 2.0,
            },
            ScenarioKind::Hubbard => {
                let m = sites.unwrap_or(2);
                let (reps, eta, eps): (usize, f64, &[f64]) = match m {
                    2 => (1, 0.1, &[0.5, 0.2, 0.05]),
                    4 => (1, 0.05, &[0.1, 0.05, 0.01]),
                    6 => (2, 0.03, &[0.1, 0.05, 0.01]),
                    _ => {
                        return Err(Error::config(format!(
                            "hubbard scenario supports sites in {SUPPORTED_SITES:?}, got {m}"
                        )))
                    }
                };
                Defaults {
                    sites: Some(m),
                    reps,
                    eta,
                    methods: fd(eps),
                    theta0: 0.1,
                }
            }
        })
    }
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub sites: Option<usize>,
    pub reps: usize,
    pub methods: Vec<GradientMethod>,
    /// Shots per Pauli term per energy evaluation.
    pub shots: usize,
    /// Zero means shot noise only.
    pub gammas: Vec<f64>,
    pub eta: f64,
    pub iterations: usize,
    /// Seeded runs per cell, besides the noiseless one.
    pub runs: usize,
    pub seed: u64,
    pub theta0: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbitals: Option<Vec<usize>>,
}

impl Scenario {
    /// Directory and CSV label: `simple` or `hubbard-m<M>-r<R>`.
    pub fn name(&self) -> String {
        match self.kind {
            ScenarioKind::Simple => "simple".into(),
            ScenarioKind::Hubbard => format!("hubbard-m{}-r{}", self.sites.unwrap_or(0), self.reps),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self.kind {
            ScenarioKind::Simple => 1,
            ScenarioKind::Hubbard => 2 * self.sites.unwrap_or(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(json: &str) -> Result<Scenario> {
        serde_json::from_str::<ScenarioConfig>(json)?.resolve()
    }

    #[test]
    fn simple_defaults() {
        let s = resolve("{}").unwrap();
        assert_eq!(s.kind, ScenarioKind::Simple);
        assert_eq!((s.shots, s.eta, s.iterations, s.runs), (50_000, 0.5, 50, 5));
        assert_eq!(s.theta0, vec![2.0]);
        let names: Vec<String> = s.methods.iter().map(|m| m.to_string()).collect();
        assert_eq!(names, ["fd:0.2", "fd:0.05", "fd:0.02", "ps"]);
        assert_eq!(s.gammas, vec![0.0]);
    }

    #[test]
    fn hubbard_defaults() {
        let two = resolve(r#"{"scenario": "hubbard"}"#).unwrap();
        assert_eq!((two.sites, two.reps, two.eta), (Some(2), 1, 0.1));
        assert_eq!(two.theta0, vec![0.1, 0.1]);
        let eps: Vec<_> = two.methods.iter().filter_map(|m| m.epsilon()).collect();
        assert_eq!(eps, [0.5, 0.2, 0.05]);
        let six = resolve(r#"{"scenario": "hubbard", "sites": 6}"#).unwrap();
        assert_eq!((six.reps, six.eta, six.theta0.len()), (2, 0.03, 6));
        let eps: Vec<_> = six.methods.iter().filter_map(|m| m.epsilon()).collect();
        assert_eq!(eps, [0.1, 0.05, 0.01]);
        assert_eq!(six.gammas, vec![0.0]);
        assert_eq!(six.name(), "hubbard-m6-r2");
    }

    #[test]
    fn overrides_win() {
        let base: ScenarioConfig = serde_json::from_str(r#"{"scenario": "hubbard", "eta": 0.2, "runs": 3}"#).unwrap();
        let flags = ScenarioConfig {
            eta: Some(0.05),
            method: Some(vec!["ps".into()]),
            ..Default::default()
        };
        let s = base.merged(flags).resolve().unwrap();
        assert_eq!((s.eta, s.runs), (0.05, 3));
        assert_eq!(s.methods, vec![GradientMethod::ParameterShift]);
    }

    #[test]
    fn invalid_configs() {
        for bad in [
            r#"{"scenario": "hubbard", "sites": 5}"#,
            r#"{"scenario": "hubbard", "sites": 8}"#,
            r#"{"sites": 2}"#,
            r#"{"reps": 2}"#,
            r#"{"method": ["fd:-1"]}"#,
            r#"{"method": []}"#,
            r#"{"gamma": [-0.1]}"#,
            r#"{"eta": 0}"#,
            r#"{"runs": 0}"#,
            r#"{"theta0": [1, 2]}"#,
            r#"{"scenario": "hubbard", "theta0": [1, 2, 3]}"#,
        ] {
            assert!(matches!(resolve(bad), Err(Error::Config(_))), "{bad}");
        }
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"shotz": 3}"#).is_err());
    }

    #[test]
    fn scalar_theta0_broadcasts() {
        let s = resolve(r#"{"scenario": "hubbard", "sites": 6, "theta0": [0.2]}"#).unwrap();
        assert_eq!(s.theta0, vec![0.2; 6]);
    }
}
