//! JSON experiment description and its translation into core types.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use nikishin_hp::analysis::{Experiment, GridSpec, PerturbationSpec};
use nikishin_hp::hermite_pade::MultiIndex;
use nikishin_hp::measures::{Literal, MeasureKind, MeasureSpec, Sign};
use nikishin_hp::nikishin::SystemSpec;
use serde::Deserialize;

use crate::error::CliError;

/// A number given either as a JSON number or as a string (decimal or `0x`
/// hex), kept verbatim.
#[derive(Clone, Debug)]
pub struct Num(pub Literal);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(serde_json::Number),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Number(n) => n.to_string(),
            Raw::Text(t) => t,
        };
        Literal::new(text)
            .map(Num)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    Atoms {
        interval: [Num; 2],
        nodes: Vec<Num>,
        weights: Vec<Num>,
        #[serde(default = "positive")]
        sign: i8,
    },
    Legendre {
        interval: [Num; 2],
        node_count: usize,
        density_scale: Option<Num>,
    },
    Jacobi {
        interval: [Num; 2],
        alpha: Num,
        beta: Num,
        node_count: usize,
        density_scale: Option<Num>,
    },
}

fn positive() -> i8 {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub num_coeffs: Vec<Num>,
    pub den_coeffs: Vec<Num>,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Diagonal,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SweepConfig {
    List(Vec<Vec<usize>>),
    Rule {
        shape: Shape,
        m: usize,
        k_min: usize,
        k_max: usize,
        #[serde(default = "unit_step")]
        step: usize,
    },
}

fn unit_step() -> usize {
    1
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig::List(Vec::new())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridConfig {
    Standard {
        radius_factor: f64,
        circle_points: usize,
        segment_points: usize,
    },
    Explicit {
        points: Vec<[Num; 2]>,
    },
}

/// Report gates selectable on the command line or in the config.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Check {
    Chile,
    Ratio44,
    Orthogonality,
    Reduction,
    SignChanges,
    PoleAttraction,
    Type2,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Chile,
        Check::Ratio44,
        Check::Orthogonality,
        Check::Reduction,
        Check::SignChanges,
        Check::PoleAttraction,
        Check::Type2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Chile => "chile",
            Check::Ratio44 => "ratio44",
            Check::Orthogonality => "orthogonality",
            Check::Reduction => "reduction",
            Check::SignChanges => "sign_changes",
            Check::PoleAttraction => "pole_attraction",
            Check::Type2 => "type2",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub precision_bits: Option<u32>,
    pub system: Vec<GeneratorConfig>,
    #[serde(default)]
    pub perturbations: Vec<PerturbationConfig>,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Number of order conditions dropped (incomplete problem).
    #[serde(default)]
    pub incompleteness: usize,
    /// Declared bound on `max n_j - min n_j`; indices beyond it draw a warning.
    pub spread_bound: Option<usize>,
    pub grid: Option<GridConfig>,
    #[serde(default = "default_pole_margin")]
    pub pole_margin: f64,
    #[serde(default = "default_pole_epsilon")]
    pub pole_epsilon: f64,
    /// Empty means every check.
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Overrides of the default `2^(-P/2)` residual tolerance per check.
    #[serde(default)]
    pub tolerances: BTreeMap<Check, Num>,
    pub output_dir: Option<PathBuf>,
}

fn default_pole_margin() -> f64 {
    0.5
}

fn default_pole_epsilon() -> f64 {
    0.25
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

fn interval(iv: &[Num; 2]) -> (Literal, Literal) {
    (iv[0].0.clone(), iv[1].0.clone())
}

fn generator(g: &GeneratorConfig) -> Result<MeasureSpec, CliError> {
    let spec = match g {
        GeneratorConfig::Atoms {
            interval: iv,
            nodes,
            weights,
            sign,
        } => {
            let sign = match sign {
                1 => Sign::Positive,
                -1 => Sign::Negative,
                other => {
                    return Err(CliError::Validation(format!(
                        "atom sign must be 1 or -1, got {other}"
                    )))
                }
            };
            if nodes.len() != weights.len() {
                return Err(CliError::Validation(format!(
                    "{} nodes but {} weights",
                    nodes.len(),
                    weights.len()
                )));
            }
            MeasureSpec {
                kind: MeasureKind::Atoms {
                    nodes: nodes.iter().map(|n| n.0.clone()).collect(),
                    weights: weights.iter().map(|w| w.0.clone()).collect(),
                    sign,
                },
                interval: interval(iv),
            }
        }
        GeneratorConfig::Legendre {
            interval: iv,
            node_count,
            density_scale,
        } => MeasureSpec {
            kind: MeasureKind::LegendreDensity {
                node_count: *node_count,
                density_scale: scale_or_one(density_scale),
            },
            interval: interval(iv),
        },
        GeneratorConfig::Jacobi {
            interval: iv,
            alpha,
            beta,
            node_count,
            density_scale,
        } => MeasureSpec {
            kind: MeasureKind::JacobiDensity {
                alpha: alpha.0.clone(),
                beta: beta.0.clone(),
                node_count: *node_count,
                density_scale: scale_or_one(density_scale),
            },
            interval: interval(iv),
        },
    };
    spec.validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(spec)
}

fn scale_or_one(scale: &Option<Num>) -> Literal {
    scale
        .as_ref()
        .map_or_else(|| Literal::from_i64(1), |s| s.0.clone())
}

impl Config {
    pub fn m(&self) -> usize {
        self.system.len()
    }

    /// Core description of the problem; fails on malformed measures or
    /// perturbation counts.
    pub fn experiment(&self) -> Result<Experiment, CliError> {
        if self.system.is_empty() {
            return Err(CliError::Validation(
                "system needs at least one generator".into(),
            ));
        }
        let generators = self
            .system
            .iter()
            .map(generator)
            .collect::<Result<Vec<_>, _>>()?;
        if !self.perturbations.is_empty() && self.perturbations.len() != self.m() {
            return Err(CliError::Validation(format!(
                "{} perturbations for {} generators",
                self.perturbations.len(),
                self.m()
            )));
        }
        let perturbations = self
            .perturbations
            .iter()
            .map(|p| PerturbationSpec {
                num: p.num_coeffs.iter().map(|c| c.0.clone()).collect(),
                den: p.den_coeffs.iter().map(|c| c.0.clone()).collect(),
            })
            .collect();
        let grid = match &self.grid {
            None => GridSpec::default(),
            Some(GridConfig::Standard {
                radius_factor,
                circle_points,
                segment_points,
            }) => GridSpec::Standard {
                radius_factor: *radius_factor,
                circle_points: *circle_points,
                segment_points: *segment_points,
            },
            Some(GridConfig::Explicit { points }) => GridSpec::Explicit(
                points
                    .iter()
                    .map(|p| (p[0].0.clone(), p[1].0.clone()))
                    .collect(),
            ),
        };
        if !(self.pole_margin >= 0.0 && self.pole_margin.is_finite()) {
            return Err(CliError::Validation(
                "pole_margin must be a nonnegative number".into(),
            ));
        }
        if !(self.pole_epsilon > 0.0 && self.pole_epsilon.is_finite()) {
            return Err(CliError::Validation("pole_epsilon must be positive".into()));
        }
        Ok(Experiment {
            system: SystemSpec { generators },
            perturbations,
            grid,
            pole_margin: self.pole_margin,
        })
    }

    /// Multi-indices of the sweep in order.
    pub fn sweep(&self) -> Result<Vec<MultiIndex>, CliError> {
        let indices = match &self.sweep {
            SweepConfig::List(list) => list
                .iter()
                .map(|n| {
                    MultiIndex::new(n.clone()).map_err(|e| CliError::Validation(e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?,
            SweepConfig::Rule {
                shape: Shape::Diagonal,
                m,
                k_min,
                k_max,
                step,
            } => {
                if *step == 0 || k_min > k_max || *k_min == 0 {
                    return Err(CliError::Validation(
                        "diagonal sweep needs 1 <= k_min <= k_max and step >= 1".into(),
                    ));
                }
                if *m != self.m() {
                    return Err(CliError::Validation(format!(
                        "sweep is for m = {m} but the system has {} generators",
                        self.m()
                    )));
                }
                (*k_min..=*k_max)
                    .step_by(*step)
                    .map(|k| {
                        MultiIndex::diagonal(*m, k).map_err(|e| CliError::Validation(e.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        for n in &indices {
            if n.m() != self.m() {
                return Err(CliError::Validation(format!(
                    "multi-index {n} does not match a system of {} generators",
                    self.m()
                )));
            }
            if self.incompleteness + 1 >= n.total() && self.incompleteness > 0 {
                return Err(CliError::Validation(format!(
                    "incompleteness {} leaves no order conditions for {n}",
                    self.incompleteness
                )));
            }
        }
        Ok(indices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_their_text() {
        let cfg = parse(
            r#"{"system": [{"kind": "legendre", "interval": [-1, "0x1"], "node_count": 4,
                "density_scale": 0.1000000000000000000000000000001}]}"#,
        )
        .unwrap();
        let GeneratorConfig::Legendre {
            interval,
            density_scale,
            ..
        } = &cfg.system[0]
        else {
            panic!("wrong kind");
        };
        assert_eq!(interval[0].0.as_str(), "-1");
        assert_eq!(interval[1].0.as_str(), "0x1");
        assert_eq!(
            density_scale.as_ref().unwrap().0.as_str(),
            "0.1000000000000000000000000000001"
        );
    }

    #[test]
    fn diagonal_rule_expands() {
        let cfg = parse(
            r#"{"system": [{"kind": "legendre", "interval": [-1, 0], "node_count": 4},
                           {"kind": "legendre", "interval": [1, 3], "node_count": 4}],
                "sweep": {"shape": "diagonal", "m": 2, "k_min": 4, "k_max": 12, "step": 2}}"#,
        )
        .unwrap();
        let s = cfg.sweep().unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s[4].components(), &[12, 12]);
    }

    #[test]
    fn unknown_fields_and_bad_numbers_are_parse_errors() {
        assert!(matches!(
            parse(r#"{"system": [], "bogus": 1}"#),
            Err(CliError::Parse(_))
        ));
        assert!(matches!(
            parse(r#"{"system": [{"kind": "legendre", "interval": ["x", 0], "node_count": 4}]}"#),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn mismatched_sweep_is_a_validation_error() {
        let cfg = parse(
            r#"{"system": [{"kind": "legendre", "interval": [-1, 0], "node_count": 4}],
                "sweep": [[2, 2]]}"#,
        )
        .unwrap();
        assert!(matches!(cfg.sweep(), Err(CliError::Validation(_))));
    }

    #[test]
    fn atoms_sign_and_counts_validated() {
        let cfg = parse(
            r#"{"system": [{"kind": "atoms", "interval": [-1, 1], "nodes": [0], "weights": [1, 2]}]}"#,
        )
        .unwrap();
        assert!(matches!(cfg.experiment(), Err(CliError::Validation(_))));
        let cfg = parse(
            r#"{"system": [{"kind": "atoms", "interval": [-1, 1], "nodes": [0], "weights": [1], "sign": 2}]}"#,
        )
        .unwrap();
        assert!(matches!(cfg.experiment(), Err(CliError::Validation(_))));
    }
}
