//! Experiment configuration, read from TOML.
//!
//! ```toml
//! n = 20
//! T = 5000
//! seeds = [0, 1, 2, 3, 4]
//! epsilon = 0.1
//! output = "results.csv"
//!
//! [generator]
//! kind = "anchored"
//! anchors = [1, 2]
//! extra = 4
//!
//! [opgd]
//! oracle = "sw"
//! step = "sw-scaled"
//!
//! [[algorithms]]
//! kind = "opgd-det"
//! solver = "heuristic"
//!
//! [[algorithms]]
//! kind = "opgd-rand"
//! scheme = "mssc"
//!
//! [[algorithms]]
//! kind = "flt"
//!
//! [[algorithms]]
//! kind = "random"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{BRUTE_FORCE_MAX_N, MWU_MAX_N};
use crate::costs::{falling_factorial, DEFAULT_CONFIG_CAP, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::opgd::{OnlineConfig, StepRule};
use crate::projection::ProjectionConfig;
use crate::rounding::deterministic::{binomial, EXACT_SUBSET_CAP};
use crate::rounding::{BlockSolver, RoundingParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Each request is one uniformly drawn anchor plus `extra` other items.
    Anchored { anchors: Vec<usize>, extra: usize },
    /// A fixed instance file, shared by every seed.
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverName {
    Exact,
    Fptas,
    Heuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Mssc,
    Gmssc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    OpgdDet {
        /// Block size; defaults to the largest request size.
        #[serde(default)]
        r: Option<usize>,
        solver: SolverName,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        label: Option<String>,
    },
    OpgdRand {
        #[serde(default = "default_scheme")]
        scheme: Scheme,
        /// Overrides the scheme's scale constant.
        #[serde(default)]
        scale: Option<f64>,
        #[serde(default)]
        label: Option<String>,
    },
    Flt {
        #[serde(default)]
        label: Option<String>,
    },
    Random {
        #[serde(default)]
        label: Option<String>,
    },
    Mwu {
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        label: Option<String>,
    },
    Brute {
        #[serde(default)]
        label: Option<String>,
    },
}

fn default_alpha() -> f64 {
    0.25
}

fn default_scheme() -> Scheme {
    Scheme::Mssc
}

impl AlgorithmSpec {
    pub fn label(&self) -> String {
        let (custom, default) = match self {
            AlgorithmSpec::OpgdDet { label, .. } => (label, "opgd-det"),
            AlgorithmSpec::OpgdRand { label, .. } => (label, "opgd-rand"),
            AlgorithmSpec::Flt { label } => (label, "flt"),
            AlgorithmSpec::Random { label } => (label, "random"),
            AlgorithmSpec::Mwu { label, .. } => (label, "mwu"),
            AlgorithmSpec::Brute { label } => (label, "brute"),
        };
        custom.clone().unwrap_or_else(|| default.to_string())
    }

    pub fn block_solver(&self, default_r: usize) -> Option<BlockSolver> {
        match *self {
            AlgorithmSpec::OpgdDet { r, solver, alpha, .. } => {
                let r = r.unwrap_or(default_r);
                Some(match solver {
                    SolverName::Exact => BlockSolver::exact(r),
                    SolverName::Fptas => BlockSolver::fptas(r, alpha),
                    SolverName::Heuristic => BlockSolver::heuristic(r),
                })
            }
            _ => None,
        }
    }

    pub fn rounding_params(&self) -> Option<Result<RoundingParams>> {
        match *self {
            AlgorithmSpec::OpgdRand { scheme, scale, .. } => Some(match scale {
                Some(z) => RoundingParams::new(z),
                None => Ok(match scheme {
                    Scheme::Mssc => RoundingParams::mssc(),
                    Scheme::Gmssc => RoundingParams::gmssc(),
                }),
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleName {
    Sw,
    Fac,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepName {
    Theory,
    SwScaled,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpgdSettings {
    #[serde(default = "default_oracle")]
    pub oracle: OracleName,
    #[serde(default = "default_step")]
    pub step: StepName,
    /// Numerator of the custom step `d / (g sqrt t)`.
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub g: Option<f64>,
    #[serde(default = "default_tol")]
    pub projection_tol: f64,
    #[serde(default = "default_max_iters")]
    pub projection_max_iters: usize,
}

fn default_oracle() -> OracleName {
    OracleName::Sw
}

fn default_step() -> StepName {
    StepName::Theory
}

fn default_tol() -> f64 {
    ProjectionConfig::default().tol
}

fn default_max_iters() -> usize {
    ProjectionConfig::default().max_iters
}

impl Default for OpgdSettings {
    fn default() -> Self {
        OpgdSettings {
            oracle: default_oracle(),
            step: default_step(),
            d: None,
            g: None,
            projection_tol: default_tol(),
            projection_max_iters: default_max_iters(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    #[serde(rename = "T")]
    pub rounds: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub generator: GeneratorSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default)]
    pub opgd: OpgdSettings,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Reads and parses the file; relative instance paths are resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let GeneratorSpec::File { path: inst } = &mut cfg.generator {
            if inst.is_relative() {
                if let Some(dir) = path.parent() {
                    *inst = dir.join(&*inst);
                }
            }
        }
        Ok(cfg)
    }

    /// Anchors {1, 2} with four companions, n = 20, T = 5000, five seeds;
    /// heuristic block solver with blocks of the request size, closed-form
    /// SW subgradients.
    pub fn anchored_repro() -> Self {
        ExperimentConfig {
            n: 20,
            rounds: 5000,
            seeds: (0..5).collect(),
            epsilon: DEFAULT_EPSILON,
            generator: GeneratorSpec::Anchored {
                anchors: vec![1, 2],
                extra: 4,
            },
            algorithms: vec![
                AlgorithmSpec::Random { label: None },
                AlgorithmSpec::OpgdDet {
                    r: None,
                    solver: SolverName::Heuristic,
                    alpha: default_alpha(),
                    label: None,
                },
                AlgorithmSpec::OpgdRand {
                    scheme: Scheme::Mssc,
                    scale: None,
                    label: None,
                },
                AlgorithmSpec::Flt { label: None },
            ],
            opgd: OpgdSettings {
                step: StepName::SwScaled,
                ..OpgdSettings::default()
            },
            output: None,
        }
    }

    /// Checks every invariant that does not need the instance itself.
    /// Desk-scale violations are reported as `Error::DeskScale`.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.rounds == 0 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        let mut labels: Vec<String> = self.algorithms.iter().map(AlgorithmSpec::label).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate algorithm label {:?}", w[0])));
        }
        if let Some(l) = labels.iter().find(|l| l.contains([',', '"', '\n'])) {
            return Err(Error::Config(format!("algorithm label {l:?} contains a CSV delimiter")));
        }
        if let GeneratorSpec::Anchored { anchors, extra } = &self.generator {
            super::generate::check_anchored(self.n, anchors, *extra)?;
        }
        self.online_config()?;
        let size = self.max_request_size();
        for alg in &self.algorithms {
            if let Some(solver) = alg.block_solver(size.unwrap_or(1)) {
                solver.validate(self.n)?;
                if let crate::rounding::SolverKind::Exact = solver.kind {
                    let count = binomial(self.n, solver.r);
                    if count > EXACT_SUBSET_CAP {
                        return Err(Error::DeskScale {
                            what: "exact block search",
                            count,
                            cap: EXACT_SUBSET_CAP,
                        });
                    }
                }
            }
            if let Some(p) = alg.rounding_params() {
                p?;
            }
            match alg {
                AlgorithmSpec::Brute { .. } if self.n > BRUTE_FORCE_MAX_N => {
                    return Err(Error::DeskScale {
                        what: "brute-force permutation search",
                        count: (1..=self.n as u128).product(),
                        cap: (1..=BRUTE_FORCE_MAX_N as u128).product(),
                    });
                }
                AlgorithmSpec::Mwu { .. } if self.n > MWU_MAX_N => {
                    return Err(Error::DeskScale {
                        what: "multiplicative weights over permutations",
                        count: (1..=self.n as u128).product(),
                        cap: (1..=MWU_MAX_N as u128).product(),
                    });
                }
                AlgorithmSpec::Mwu { eta: Some(eta), .. } if !(*eta > 0.0 && eta.is_finite()) => {
                    return Err(Error::Config(format!("mwu eta must be positive, got {eta}")));
                }
                _ => {}
            }
        }
        let uses_opgd = self
            .algorithms
            .iter()
            .any(|a| matches!(a, AlgorithmSpec::OpgdDet { .. } | AlgorithmSpec::OpgdRand { .. }));
        if uses_opgd && self.opgd.oracle == OracleName::Fac {
            if let Some(size) = size {
                let count = falling_factorial(self.n, size);
                if count > DEFAULT_CONFIG_CAP {
                    return Err(Error::DeskScale {
                        what: "configurations",
                        count,
                        cap: DEFAULT_CONFIG_CAP,
                    });
                }
            }
        }
        Ok(())
    }

    /// Request size for anchored generation; `None` for instance files.
    pub fn max_request_size(&self) -> Option<usize> {
        match &self.generator {
            GeneratorSpec::Anchored { extra, .. } => Some(extra + 1),
            GeneratorSpec::File { .. } => None,
        }
    }

    pub fn online_config(&self) -> Result<OnlineConfig> {
        let step_rule = match self.opgd.step {
            StepName::Theory => StepRule::Theory,
            StepName::SwScaled => StepRule::sw_scaled(self.n, self.max_request_size().unwrap_or(self.n)),
            StepName::Custom => match (self.opgd.d, self.opgd.g) {
                (Some(d), Some(g)) if d > 0.0 && g > 0.0 && d.is_finite() && g.is_finite() => {
                    StepRule::Custom { d, g }
                }
                _ => {
                    return Err(Error::Config(
                        "custom step needs positive `d` and `g` in [opgd]".into(),
                    ))
                }
            },
        };
        let projection = ProjectionConfig {
            tol: self.opgd.projection_tol,
            max_iters: self.opgd.projection_max_iters,
        };
        projection.validate()?;
        Ok(OnlineConfig {
            epsilon: self.epsilon,
            step_rule,
            projection,
        })
    }
}
