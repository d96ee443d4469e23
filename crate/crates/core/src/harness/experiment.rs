//! Runs every (algorithm, seed) cell of a configuration.

use log::{info, warn};
use rayon::prelude::*;

use super::config::{AlgorithmSpec, ExperimentConfig, GeneratorSpec, OracleName};
use super::generate::generate_anchored;
use super::table::{Failure, ResultsTable};
use crate::baselines::{
    brute_force_opt, default_mwu_eta, fixed_permutation_costs, flt_greedy, mwu_permutations,
    random_perm_baseline,
};
use crate::error::{Error, Result};
use crate::instance::read_instance;
use crate::model::Instance;
use crate::opgd::{run_online, CostOracle, FacOracle, SwOracle};
use crate::rounding::Rounder;

fn instance_for(cfg: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let inst = match &cfg.generator {
        GeneratorSpec::Anchored { anchors, extra } => {
            generate_anchored(cfg.n, anchors, *extra, cfg.rounds, seed)?
        }
        GeneratorSpec::File { path } => {
            let inst = read_instance(path)?;
            if inst.n() != cfg.n {
                return Err(Error::Config(format!(
                    "instance {} has n = {}, config says {}",
                    path.display(),
                    inst.n(),
                    cfg.n
                )));
            }
            let keep = cfg.rounds.min(inst.len());
            Instance::new(inst.n(), inst.requests()[..keep].to_vec())?
        }
    };
    Ok(inst)
}

/// Per-round costs of one algorithm on one instance.
pub fn run_algorithm(cfg: &ExperimentConfig, alg: &AlgorithmSpec, inst: &Instance, seed: u64) -> Result<Vec<f64>> {
    let oracle: Box<dyn CostOracle> = match cfg.opgd.oracle {
        OracleName::Sw => Box::new(SwOracle),
        OracleName::Fac => Box::new(FacOracle { epsilon: cfg.epsilon }),
    };
    let online = |rounder: &dyn Rounder| -> Result<Vec<f64>> {
        let run = run_online(inst, oracle.as_ref(), Some(rounder), &cfg.online_config()?, seed)?;
        Ok(run
            .traces
            .iter()
            .map(|t| t.rounded_cost.expect("a rounder was supplied"))
            .collect())
    };
    match alg {
        AlgorithmSpec::OpgdDet { .. } => {
            let size = inst.requests().iter().map(|r| r.len()).max().unwrap_or(1);
            let solver = alg
                .block_solver(cfg.max_request_size().unwrap_or(size))
                .expect("deterministic entry has a solver");
            solver.validate(inst.n())?;
            online(&solver)
        }
        AlgorithmSpec::OpgdRand { .. } => {
            let params = alg.rounding_params().expect("randomized entry has params")?;
            online(&params)
        }
        AlgorithmSpec::Flt { .. } => fixed_permutation_costs(inst, &flt_greedy(inst)?),
        AlgorithmSpec::Brute { .. } => fixed_permutation_costs(inst, &brute_force_opt(inst)?.0),
        AlgorithmSpec::Random { .. } => Ok(random_perm_baseline(inst, seed)?.costs),
        AlgorithmSpec::Mwu { eta, .. } => {
            let eta = eta.unwrap_or_else(|| default_mwu_eta(inst.n(), inst.len()));
            Ok(mwu_permutations(inst, eta)?.expected_costs)
        }
    }
}

/// Runs all cells in parallel; a failing cell is recorded and does not
/// stop the others. Output order does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    let instances: Vec<(u64, Result<Instance>)> = cfg
        .seeds
        .iter()
        .map(|&s| (s, instance_for(cfg, s)))
        .collect();
    if let Some((_, Err(e))) = instances.iter().find(|(_, i)| i.is_err()) {
        if e.is_io() || matches!(cfg.generator, GeneratorSpec::File { .. }) {
            return Err(instances.into_iter().find_map(|(_, i)| i.err()).expect("found above"));
        }
    }
    let cells: Vec<(&AlgorithmSpec, u64, &Result<Instance>)> = cfg
        .algorithms
        .iter()
        .flat_map(|a| instances.iter().map(move |(s, i)| (a, *s, i)))
        .collect();
    let outcomes: Vec<(String, u64, Result<Vec<f64>>)> = cells
        .into_par_iter()
        .map(|(alg, seed, inst)| {
            let label = alg.label();
            let result = match inst {
                Ok(inst) => run_algorithm(cfg, alg, inst, seed),
                Err(e) => Err(Error::Config(e.to_string())),
            };
            info!("finished {label} seed {seed}");
            (label, seed, result)
        })
        .collect();
    let mut table = ResultsTable::default();
    for (label, seed, result) in outcomes {
        match result {
            Ok(costs) => table.push_run(&label, seed, &costs),
            Err(e) => {
                warn!("{label} seed {seed} failed: {e}");
                table.failures.push(Failure {
                    algorithm: label,
                    seed,
                    desk_scale: e.is_desk_scale(),
                    message: e.to_string(),
                });
            }
        }
    }
    table.sort();
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{OpgdSettings, SolverName};
    use crate::harness::table::csv_bytes;

    fn small(algorithms: Vec<AlgorithmSpec>) -> ExperimentConfig {
        ExperimentConfig {
            n: 10,
            rounds: 100,
            seeds: vec![1, 2],
            epsilon: 0.1,
            generator: GeneratorSpec::Anchored {
                anchors: vec![1, 2],
                extra: 3,
            },
            algorithms,
            opgd: OpgdSettings::default(),
            output: None,
        }
    }

    #[test]
    fn random_only() {
        let mut cfg = small(vec![AlgorithmSpec::Random { label: None }]);
        cfg.seeds = vec![0];
        let t = run_experiment(&cfg).unwrap();
        assert_eq!(t.rows.len(), 100);
        assert!(t.rows.iter().all(|r| (1.0..=10.0).contains(&r.cost)));
    }

    #[test]
    fn deterministic_bytes() {
        let cfg = small(vec![
            AlgorithmSpec::Random { label: None },
            AlgorithmSpec::Flt { label: None },
            AlgorithmSpec::OpgdRand {
                scheme: super::super::config::Scheme::Mssc,
                scale: None,
                label: None,
            },
            AlgorithmSpec::OpgdDet {
                r: None,
                solver: SolverName::Heuristic,
                alpha: 0.25,
                label: None,
            },
        ]);
        let a = csv_bytes(&run_experiment(&cfg).unwrap());
        let b = csv_bytes(&run_experiment(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn failures_do_not_abort() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let inst = Instance::new(
            4,
            vec![
                crate::model::Request::new(vec![0], 1).unwrap(),
                crate::model::Request::new(vec![1, 2], 2).unwrap(),
            ],
        )
        .unwrap();
        crate::instance::write_instance(&inst, &path).unwrap();
        let mut cfg = small(vec![
            AlgorithmSpec::Random { label: None },
            AlgorithmSpec::OpgdRand {
                scheme: super::super::config::Scheme::Gmssc,
                scale: None,
                label: None,
            },
        ]);
        cfg.n = 4;
        cfg.generator = GeneratorSpec::File { path };
        let t = run_experiment(&cfg).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.failures.len(), 2);
        assert!(t.failures.iter().all(|f| f.algorithm == "opgd-rand" && !f.desk_scale));
    }
}
