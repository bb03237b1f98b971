//! Experiment configuration: one human-editable TOML file, every field
//! overridable from the command line.

use crate::baselines::{Nsga2Params, UniformEstimator};
use crate::engine::{AlgoParams, Variant};
use crate::error::{Error, Result};
use crate::estimation::Schedules;
use crate::problems::NoiseSpec;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const OPTIMIZER_IDS: [&str; 4] = ["mopbnb-so", "mopbnb-wr", "uniform", "nsga2"];
pub const PROBLEM_IDS: [&str; 4] = ["zdt1", "zdt2", "zdt3", "ff"];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub noise: NoiseConfig,
    pub optimizer: OptimizerConfig,
    pub run: RunConfig,
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub id: String,
    pub n: usize,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            id: "zdt1".to_string(),
            n: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Standard deviation of the multiplicative noise term.
    pub sigma: f64,
    /// Draw independent noise per objective instead of one shared draw.
    pub per_objective: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            sigma: 0.1,
            per_objective: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub id: OptimizerId,
    pub engine: EngineConfig,
    pub nsga2: Nsga2Config,
    pub uniform: UniformConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OptimizerId(pub String);

impl Default for OptimizerId {
    fn default() -> Self {
        OptimizerId("mopbnb-so".to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub delta: f64,
    pub alpha: f64,
    pub branching: u32,
    pub pruned_c: u64,
    pub r0: f64,
    pub min_branch_width: f64,
    pub wr_initial_replications: u64,
    pub wr_replication_cap: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            delta: 0.1,
            alpha: 0.1,
            branching: 2,
            pruned_c: 50,
            r0: 0.1,
            min_branch_width: 1e-3,
            wr_initial_replications: 10,
            wr_replication_cap: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Nsga2Config {
    pub population: usize,
    pub generations: u32,
    pub crossover_prob: f64,
    pub mutation_prob: Option<f64>,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
    pub replications: u64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        let p = Nsga2Params::default();
        Nsga2Config {
            population: p.population,
            generations: p.generations,
            crossover_prob: p.crossover_prob,
            mutation_prob: p.mutation_prob,
            eta_crossover: p.eta_crossover,
            eta_mutation: p.eta_mutation,
            replications: p.replications,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformConfig {
    /// "so" pools single observations in shrinking balls; "replicated"
    /// averages a fixed replication count per point.
    pub estimator: String,
    pub replications: u64,
    /// Explicit total budget. When absent, checkpoints align to a shadow
    /// single-observation run with the same seed, so equal-budget
    /// comparisons are exact.
    pub budget: Option<u64>,
}

impl Default for UniformConfig {
    fn default() -> Self {
        UniformConfig {
            estimator: "so".to_string(),
            replications: 20,
            budget: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub iterations: u32,
    pub runs: u64,
    pub base_seed: u64,
    pub out_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            iterations: 12,
            runs: 50,
            base_seed: 42,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Attach a frontier oracle and record M1/M2/M3 per iteration.
    pub attach: bool,
    pub frontier_resolution: usize,
    pub d_star: f64,
    pub delta: f64,
    pub mc_points: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            attach: true,
            frontier_resolution: 10_000,
            d_star: 0.01,
            delta: 0.1,
            mc_points: 100_000,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse("experiment config", e))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !PROBLEM_IDS.contains(&self.problem.id.as_str()) {
            return Err(Error::UnknownProblem(self.problem.id.clone()));
        }
        if !OPTIMIZER_IDS.contains(&self.optimizer.id.0.as_str()) {
            return Err(Error::UnknownOptimizer(self.optimizer.id.0.clone()));
        }
        if self.run.runs < 1 {
            return Err(Error::config("runs must be >= 1".to_string()));
        }
        if !matches!(
            self.optimizer.uniform.estimator.as_str(),
            "so" | "replicated"
        ) {
            return Err(Error::config(format!(
                "uniform estimator must be \"so\" or \"replicated\", got {:?}",
                self.optimizer.uniform.estimator
            )));
        }
        self.noise_spec()?;
        self.algo_params(0).validate()?;
        self.nsga2_params().validate()?;
        Ok(())
    }

    pub fn noise_spec(&self) -> Result<NoiseSpec> {
        let spec = NoiseSpec::new(self.noise.sigma)?;
        Ok(if self.noise.per_objective {
            spec.per_objective()
        } else {
            spec
        })
    }

    pub fn schedules(&self) -> Schedules {
        let e = &self.optimizer.engine;
        Schedules {
            r0: e.r0,
            branching: e.branching,
            pruned_c: e.pruned_c,
            delta: e.delta,
            alpha: e.alpha,
        }
    }

    /// Engine parameters for one seeded run; the variant follows the
    /// optimizer id (`mopbnb-wr` selects replications, everything else
    /// single observation).
    pub fn algo_params(&self, seed: u64) -> AlgoParams {
        let e = &self.optimizer.engine;
        AlgoParams {
            schedules: self.schedules(),
            variant: if self.optimizer.id.0 == "mopbnb-wr" {
                Variant::WithReplications
            } else {
                Variant::SingleObservation
            },
            wr_initial_replications: e.wr_initial_replications,
            wr_replication_cap: e.wr_replication_cap,
            max_iterations: self.run.iterations,
            min_branch_width: e.min_branch_width,
            rng_seed: seed,
        }
    }

    pub fn nsga2_params(&self) -> Nsga2Params {
        let c = &self.optimizer.nsga2;
        Nsga2Params {
            population: c.population,
            generations: c.generations,
            crossover_prob: c.crossover_prob,
            mutation_prob: c.mutation_prob,
            eta_crossover: c.eta_crossover,
            eta_mutation: c.eta_mutation,
            replications: c.replications,
        }
    }

    pub fn uniform_estimator(&self) -> UniformEstimator {
        match self.optimizer.uniform.estimator.as_str() {
            "replicated" => UniformEstimator::Replicated {
                replications: self.optimizer.uniform.replications,
            },
            _ => UniformEstimator::ShrinkingBall {
                schedules: self.schedules(),
            },
        }
    }
}
