//! Empirical baseline behavior over seeded runs: search quality improves
//! with budget, and NSGA-II's closeness metric falls with generations.

use mopbnb::baselines::{nsga2, uniform_search, Nsga2Params, UniformEstimator, UniformParams};
use mopbnb::estimation::Schedules;
use mopbnb::exec;
use mopbnb::metrics::{m1, FrontierOracle};
use mopbnb::problems::{noisy_by_id, NoiseSpec};
use mopbnb::rng;

#[test]
fn uniform_search_improves_with_budget() {
    // sigma = 0: more points strictly improve expected closeness
    let problem = noisy_by_id("zdt1", 2, NoiseSpec::new(0.0).unwrap()).unwrap();
    let oracle = FrontierOracle::for_problem("zdt1", 2, 4000).unwrap();
    let runs = 50usize;
    let m1_at = |budget: u64| -> f64 {
        let totals: Vec<f64> = exec::map_indices(runs, |i| {
            let params = UniformParams {
                checkpoints: vec![budget],
                estimator: UniformEstimator::ShrinkingBall {
                    schedules: Schedules::default(),
                },
            };
            let t = uniform_search(&problem, &params, rng::run_seed(71, i as u64), None).unwrap();
            let est: Vec<_> = t.final_archive.iter().map(|e| e.estimate.clone()).collect();
            m1(&est, &oracle).unwrap()
        });
        totals.iter().sum::<f64>() / runs as f64
    };
    let small = m1_at(10);
    let large = m1_at(10_000);
    assert!(
        large < small,
        "mean M1 should fall with budget: 10 points -> {small:.4}, 10^4 points -> {large:.4}"
    );
}

#[test]
fn nsga2_m1_falls_between_early_and_late_generations() {
    let problem = noisy_by_id("zdt1", 2, NoiseSpec::new(0.1).unwrap()).unwrap();
    let oracle = FrontierOracle::for_problem("zdt1", 2, 4000).unwrap();
    let runs = 50usize;
    let params = Nsga2Params {
        population: 50,
        generations: 100,
        ..Default::default()
    };
    let pairs: Vec<(f64, f64)> = exec::map_indices(runs, |i| {
        let att = mopbnb::metrics::MetricAttachment {
            oracle: oracle.clone(),
            d_star: 0.01,
        };
        let t = nsga2(&problem, &params, rng::run_seed(72, i as u64), Some(&att)).unwrap();
        let at = |gen: u32| {
            t.records
                .iter()
                .find(|r| r.iteration == gen)
                .and_then(|r| r.m1)
                .expect("metric recorded")
        };
        (at(5), at(100))
    });
    let early: f64 = pairs.iter().map(|p| p.0).sum::<f64>() / runs as f64;
    let late: f64 = pairs.iter().map(|p| p.1).sum::<f64>() / runs as f64;
    assert!(
        late < early,
        "mean M1 over {runs} seeds: generation 5 -> {early:.4}, generation 100 -> {late:.4}"
    );
}
