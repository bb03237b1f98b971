//! Acceptance suite: one test per gate criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` to see them.

use mopbnb::baselines::{uniform_search, UniformEstimator, UniformParams};
use mopbnb::domain::{MixedPoint, ObjectiveVector, RegionStatus};
use mopbnb::engine::{self, AlgoParams, Variant};
use mopbnb::estimation::SampleStore;
use mopbnb::exec;
use mopbnb::harness::{self, ExperimentConfig, ResultsBundle};
use mopbnb::metrics::{estimate_y_delta, in_level_set, m1, m2, m3, FrontierOracle};
use mopbnb::pareto::{brute_force_front, non_dominated_front};
use mopbnb::problems::{noisy_by_id, NoiseSpec};
use mopbnb::rng;
use std::sync::OnceLock;
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed: {detail}");
}

#[test]
fn c1_front_extraction_oracle_equivalence() {
    use rand::Rng;
    let started = Instant::now();
    let mut rng = rng::derive(101, &[1]);
    let mut checked = 0usize;
    for case in 0..500 {
        let m = [2, 3, 4][case % 3];
        let n = rng.random_range(1..=500usize);
        let gridded = case % 4 == 0;
        let vectors: Vec<ObjectiveVector> = (0..n)
            .map(|_| {
                let vals: Vec<f64> = (0..m)
                    .map(|_| {
                        if gridded {
                            rng.random_range(0..5) as f64
                        } else {
                            rng.random_range(0.0..1.0)
                        }
                    })
                    .collect();
                ObjectiveVector::new(vals).unwrap()
            })
            .collect();
        let fast = non_dominated_front(&vectors).unwrap();
        let brute = brute_force_front(&vectors).unwrap();
        assert_eq!(fast, brute, "case {case}: N={n} m={m} gridded={gridded}");
        checked += 1;
    }
    let elapsed = started.elapsed();
    report(
        "1 (front extraction equivalence)",
        checked == 500 && elapsed.as_secs_f64() < 10.0,
        &format!(
            "{checked} instances matched brute force exactly in {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c2_theorem_1_statistical_check() {
    // deterministic mode: sigma = 0, delta = 0.1, alpha = 0.1, B = 2, K = 8
    let problem = noisy_by_id("zdt1", 2, NoiseSpec::new(0.0).unwrap()).unwrap();
    let oracle = FrontierOracle::for_problem("zdt1", 2, 10_000).unwrap();
    let threshold = estimate_y_delta(&problem, 0.1, 1_000_000, &oracle, 2024).unwrap();

    let runs = 200usize;
    let successes: Vec<bool> =
        exec::map_indices(runs, |i| {
            let mut params = AlgoParams::new(rng::run_seed(777, i as u64));
            params.max_iterations = 8;
            let mut state = engine::initialize(&problem, &params).unwrap();
            for _ in 0..8 {
                engine::iterate(&mut state, &problem, &params).unwrap();
            }
            // success: a sampled point in a never-finally-pruned (active) region
            // lies in the high-quality level set L(0.1, S)
            state.active_ids().iter().any(|&rid| {
                state.region(rid).sample_ids.iter().any(|&sid| {
                    in_level_set(&state.store.sample(sid).x, &problem, &threshold, &oracle)
                })
            })
        });
    let fraction = successes.iter().filter(|&&s| s).count() as f64 / runs as f64;
    // paper bound is 1 - alpha = 0.90; 0.855 allows a 95% binomial margin
    report(
        "2 (theorem-1 statistical check)",
        fraction >= 0.855,
        &format!(
            "success fraction {fraction:.3} over {runs} seeds (y(0.1,S) = {:.4}, need >= 0.855)",
            threshold.y_delta
        ),
    );
}

#[test]
fn c3_lemma_1_estimator_consistency() {
    // noisy ZDT1 n=2, 50 seeds, probe (0.5, 0.2) injected as a tracked
    // sample; the claim is err(k=12) <= 0.5 * err(k=3) per objective
    let problem = noisy_by_id("zdt1", 2, NoiseSpec::new(0.1).unwrap()).unwrap();
    let probe = MixedPoint::continuous_only(vec![0.5, 0.2]);
    let truth = {
        use mopbnb::problems::NoisyProblem;
        problem.true_values(&probe)
    };
    let runs = 50usize;
    let errs: Vec<([f64; 2], [f64; 2])> = exec::map_indices(runs, |i| {
        use mopbnb::problems::NoisyProblem;
        let params = AlgoParams::new(rng::run_seed(888, i as u64));
        let mut state = engine::initialize(&problem, &params).unwrap();
        // probe participates like any sample: one raw observation, estimate
        // recomputed every iteration from the current ball
        let mut stream = rng::derive(params.rng_seed, &[0xbeef, 0]);
        let raw = problem.evaluate_once(&probe, &mut stream);
        let pid = state.store.insert(probe.clone(), raw, 1);
        let home = state
            .active_ids()
            .into_iter()
            .find(|&rid| state.region(rid).contains(&probe, problem.domain()))
            .unwrap();
        state.regions[home as usize].sample_ids.push(pid);
        state.eval_count += 1;

        let mut err3 = [0.0f64; 2];
        let mut err12 = [0.0f64; 2];
        for k in 1..=12u32 {
            engine::iterate(&mut state, &problem, &params).unwrap();
            if k == 3 || k == 12 {
                let est = &state.store.sample(pid).estimate;
                let errs = [(est[0] - truth[0]).abs(), (est[1] - truth[1]).abs()];
                if k == 3 {
                    err3 = errs;
                } else {
                    err12 = errs;
                }
            }
        }
        (err3, err12)
    });
    let mean = |late: bool| -> [f64; 2] {
        let mut acc = [0.0; 2];
        for (early_err, late_err) in &errs {
            let v = if late { late_err } else { early_err };
            acc[0] += v[0];
            acc[1] += v[1];
        }
        [acc[0] / errs.len() as f64, acc[1] / errs.len() as f64]
    };
    let e3 = mean(false);
    let e12 = mean(true);
    let pass = e12[0] <= 0.5 * e3[0] && e12[1] <= 0.5 * e3[1];
    report(
        "3 (lemma-1 estimator consistency)",
        pass,
        &format!(
            "mean |err| at probe (0.5, 0.2): k=3 -> ({:.4}, {:.4}), k=12 -> ({:.4}, {:.4}); need k=12 <= 0.5 * k=3",
            e3[0], e3[1], e12[0], e12[1]
        ),
    );
}

#[test]
fn c4_evaluation_cost_gap() {
    let problem = noisy_by_id("ff", 2, NoiseSpec::new(0.1).unwrap()).unwrap();
    let mut so_counts = Vec::new();
    let mut wr_counts = Vec::new();
    for seed in [4001u64, 4002, 4003] {
        let so = engine::run(&problem, &AlgoParams::new(seed), None).unwrap();
        so_counts.push(so.total_evals);
        let wr = engine::run(
            &problem,
            &AlgoParams::new(seed).with_variant(Variant::WithReplications),
            None,
        )
        .unwrap();
        wr_counts.push(wr.total_evals);
    }
    let so_ok = so_counts.iter().all(|&c| (2_000..=20_000).contains(&c));
    let wr_ok = wr_counts.iter().all(|&c| c >= 1_000_000);
    let ratio_ok = so_counts
        .iter()
        .zip(&wr_counts)
        .all(|(&s, &w)| w as f64 / s as f64 >= 100.0);
    report(
        "4 (evaluation cost gap)",
        so_ok && wr_ok && ratio_ok,
        &format!(
            "FF n=2, 12 iterations: so evals {so_counts:?} (band [2000, 20000]), wr evals {wr_counts:?} (>= 1e6), ratios {:?}",
            so_counts
                .iter()
                .zip(&wr_counts)
                .map(|(&s, &w)| (w as f64 / s as f64).round())
                .collect::<Vec<_>>()
        ),
    );
}

fn so_config(problem: &str, base_seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.problem.id = problem.to_string();
    cfg.problem.n = 2;
    cfg.noise.sigma = 0.1;
    cfg.run.iterations = 12;
    cfg.run.runs = 50;
    cfg.run.base_seed = base_seed;
    cfg.oracle.frontier_resolution = 10_000;
    cfg
}

fn uniform_config(problem: &str, base_seed: u64) -> ExperimentConfig {
    let mut cfg = so_config(problem, base_seed);
    cfg.optimizer.id = mopbnb::harness::config::OptimizerId("uniform".to_string());
    cfg.optimizer.uniform.estimator = "so".to_string();
    cfg.optimizer.uniform.budget = None; // align to a shadow so-run per seed
    cfg
}

fn zdt1_bundles() -> &'static (ResultsBundle, ResultsBundle) {
    static BUNDLES: OnceLock<(ResultsBundle, ResultsBundle)> = OnceLock::new();
    BUNDLES.get_or_init(|| {
        let so = harness::run_experiment(&so_config("zdt1", 5001)).unwrap();
        let uni = harness::run_experiment(&uniform_config("zdt1", 5001)).unwrap();
        (so, uni)
    })
}

fn final_metric(bundle: &ResultsBundle, which: char) -> f64 {
    let row = bundle.aggregate.last().unwrap();
    match which {
        '1' => row.m1_mean.unwrap(),
        '3' => row.m3_mean.unwrap(),
        _ => unreachable!(),
    }
}

#[test]
fn c5_figure_3_trend_m1() {
    let mut lines = Vec::new();
    let mut pass = true;
    for problem in ["zdt1", "zdt2", "zdt3"] {
        let (so_m1, uni_m1) = if problem == "zdt1" {
            let (so, uni) = zdt1_bundles();
            (final_metric(so, '1'), final_metric(uni, '1'))
        } else {
            let so = harness::run_experiment(&so_config(problem, 5001)).unwrap();
            let uni = harness::run_experiment(&uniform_config(problem, 5001)).unwrap();
            (final_metric(&so, '1'), final_metric(&uni, '1'))
        };
        pass &= so_m1 <= uni_m1;
        lines.push(format!(
            "{problem}: M1 so {so_m1:.4} vs uniform {uni_m1:.4}"
        ));
    }
    // the closeness trajectory also improves within the solver's own runs
    {
        let (so, _) = zdt1_bundles();
        let first = so.aggregate.first().unwrap().m1_mean.unwrap();
        let last = so.aggregate.last().unwrap().m1_mean.unwrap();
        pass &= last < first;
        lines.push(format!("zdt1 so M1 trend {first:.4} -> {last:.4}"));
    }
    report(
        "5 (figure-3 trend: M1 at equal budgets)",
        pass,
        &format!("50 seeds, final checkpoint — {}", lines.join("; ")),
    );
}

#[test]
fn c6_figure_5_trend_m3() {
    let (so, uni) = zdt1_bundles();
    let so_m3 = final_metric(so, '3');
    let uni_m3 = final_metric(uni, '3');
    report(
        "6 (figure-5 trend: extent)",
        uni_m3 >= so_m3,
        &format!("ZDT1 n=2 final checkpoint: M3 uniform {uni_m3:.4} >= M3 so {so_m3:.4}"),
    );
}

#[test]
fn c7_metric_sanity() {
    use rand::Rng;
    let oracle = FrontierOracle::for_problem("zdt1", 2, 10_000).unwrap();
    let mut rng = rng::derive(7001, &[0]);
    let ns: Vec<ObjectiveVector> = (0..1000)
        .map(|_| {
            let t: f64 = rng.random_range(0.0..=1.0);
            ObjectiveVector::new(vec![t, 1.0 - t.sqrt()]).unwrap()
        })
        .collect();
    let m1v = m1(&ns, &oracle).unwrap();

    let m3v = m3(&[
        ObjectiveVector::new(vec![0.0, 1.0]).unwrap(),
        ObjectiveVector::new(vec![1.0, 0.0]).unwrap(),
    ]);
    let m3_expected = 2f64.sqrt().sqrt();

    let m2v = m2(
        &[
            ObjectiveVector::new(vec![0.0, 0.0]).unwrap(),
            ObjectiveVector::new(vec![1.0, 1.0]).unwrap(),
        ],
        0.01,
    );

    let pass = m1v <= 1e-3 && (m3v - m3_expected).abs() <= 1e-12 && m2v == 2.0;
    report(
        "7 (metric sanity)",
        pass,
        &format!(
            "M1 of analytic frontier sample {m1v:.2e} (<= 1e-3); M3 {m3v:.12} vs sqrt(sqrt(2)); M2 of far pair {m2v} (= 2)"
        ),
    );
}

#[test]
fn c8_reclassification_property() {
    let problem = noisy_by_id("zdt1", 2, NoiseSpec::new(0.0).unwrap()).unwrap();
    let params = AlgoParams::new(8001);
    let mut state = engine::initialize(&problem, &params).unwrap();
    for _ in 0..3 {
        engine::iterate(&mut state, &problem, &params).unwrap();
    }
    let pruned = state.pruned_ids();
    assert!(!pruned.is_empty(), "setup: a pruned region exists by k=3");
    let victim = pruned[0];
    let x =
        SampleStore::draw_uniform_in(&state.region(victim).bounds, &mut rng::derive(8002, &[0]));
    let id = state
        .store
        .insert(x, ObjectiveVector::new(vec![-1e6, -1e6]).unwrap(), state.k);
    state.regions[victim as usize].sample_ids.push(id);

    engine::iterate(&mut state, &problem, &params).unwrap();
    let region = state.region(victim);
    let children: Vec<_> = state
        .regions
        .iter()
        .filter(|r| r.parent_id == Some(victim))
        .collect();
    let pass = region.status == RegionStatus::Split
        && region.pruned_at.is_none()
        && children.len() == 2
        && children.iter().all(|c| c.status == RegionStatus::Active);
    report(
        "8 (reclassification of pruned regions)",
        pass,
        &format!(
            "pruned region {victim} with an injected dominating sample is {:?} with {} active children after one iterate",
            region.status,
            children.len()
        ),
    );
}

#[test]
fn c9_byte_identical_reproducibility() {
    let mut cfg = so_config("zdt3", 9001);
    cfg.run.runs = 4;
    cfg.run.iterations = 6;
    cfg.oracle.frontier_resolution = 2_000;

    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for dir in &dirs {
        let bundle = harness::run_experiment(&cfg).unwrap();
        harness::write_bundle(&bundle, dir.path()).unwrap();
    }
    let mut pass = true;
    let mut detail = Vec::new();
    for file in [
        "trajectories.csv",
        "archives.csv",
        "regions.csv",
        "aggregate.csv",
        "config.toml",
    ] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        let same = a == b;
        pass &= same;
        detail.push(format!(
            "{file}: {}",
            if same { "identical" } else { "DIFFERS" }
        ));
    }
    report(
        "9 (byte-identical reproducibility)",
        pass,
        &format!(
            "two executions of the same (config, seed) — {}",
            detail.join(", ")
        ),
    );
}

#[test]
fn uniform_alignment_gives_equal_budgets() {
    // supporting check for criteria 5 and 6: the uniform baseline consumes
    // the same cumulative budget as the so-run it is aligned to
    let problem = noisy_by_id("zdt1", 2, NoiseSpec::new(0.1).unwrap()).unwrap();
    let seed = rng::run_seed(5001, 0);
    let so = engine::run(&problem, &AlgoParams::new(seed), None).unwrap();
    let checkpoints: Vec<u64> = so.records.iter().map(|r| r.evals).collect();
    let uni = uniform_search(
        &problem,
        &UniformParams {
            checkpoints: checkpoints.clone(),
            estimator: UniformEstimator::ShrinkingBall {
                schedules: mopbnb::estimation::Schedules::default(),
            },
        },
        seed,
        None,
    )
    .unwrap();
    assert_eq!(
        uni.records.iter().map(|r| r.evals).collect::<Vec<_>>(),
        checkpoints
    );
}
