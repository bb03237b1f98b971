//! Comparison optimizers: uniform random search with either estimation
//! scheme, and a compact generational NSGA-II with replication-averaged
//! fitness.

use crate::domain::{BoxBounds, MixedPoint, ObjectiveVector};
use crate::engine::{ArchiveEntry, IterationRecord, RunTrajectory};
use crate::error::{Error, Result};
use crate::estimation::{radius, SampleStore, Schedules};
use crate::exec;
use crate::metrics::MetricAttachment;
use crate::pareto::ParetoArchive;
use crate::problems::NoisyProblem;
use crate::rng::{self, tag};
use rand::Rng;

/// How uniform search turns raw observations into estimates.
#[derive(Debug, Clone)]
pub enum UniformEstimator {
    /// Shrinking-ball single-observation averaging on the accumulated store,
    /// using the engine's radius schedule per checkpoint.
    ShrinkingBall { schedules: Schedules },
    /// Mean of a fixed number of replications at each point.
    Replicated { replications: u64 },
}

#[derive(Debug, Clone)]
pub struct UniformParams {
    /// Cumulative evaluation budgets at which the archive and metrics are
    /// recorded; strictly increasing. Aligning these to an engine run's
    /// per-iteration evaluation counts makes equal-budget comparisons exact.
    pub checkpoints: Vec<u64>,
    pub estimator: UniformEstimator,
}

impl UniformParams {
    pub fn validate(&self) -> Result<()> {
        if self.checkpoints.is_empty() {
            return Err(Error::config(
                "uniform search needs at least one checkpoint".to_string(),
            ));
        }
        if self.checkpoints[0] < 1 {
            return Err(Error::config(
                "uniform search budget must be >= 1".to_string(),
            ));
        }
        if self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "uniform checkpoints must strictly increase".to_string(),
            ));
        }
        if let UniformEstimator::ShrinkingBall { schedules } = &self.estimator {
            schedules.validate()?;
        }
        if let UniformEstimator::Replicated { replications } = &self.estimator {
            if *replications < 1 {
                return Err(Error::config("replications must be >= 1".to_string()));
            }
        }
        Ok(())
    }
}

/// Uniform random search over the domain, recorded at the given checkpoints.
pub fn uniform_search(
    problem: &dyn NoisyProblem,
    params: &UniformParams,
    seed: u64,
    metrics: Option<&MetricAttachment>,
) -> Result<RunTrajectory> {
    params.validate()?;
    let domain = problem.domain().clone();
    let bounds = BoxBounds::full(&domain);
    let n = domain.dim();
    let mut store = SampleStore::new(domain);
    let mut records = Vec::new();
    let mut evals = 0u64;
    let mut archive = ParetoArchive::default();

    for (idx, &budget) in params.checkpoints.iter().enumerate() {
        let k = idx as u32 + 1;
        let (r_k, point_target) = match &params.estimator {
            UniformEstimator::ShrinkingBall { schedules } => {
                (Some(radius(k, n, schedules)), budget)
            }
            UniformEstimator::Replicated { replications } => {
                // at least one new point per checkpoint keeps counts strict
                let target = (budget / replications).max(store.len() as u64 + 1);
                (None, target)
            }
        };
        while (store.len() as u64) < point_target {
            let id = store.len() as u64;
            let mut stream = rng::derive(seed, &[tag::SAMPLE, id]);
            let x = SampleStore::draw_uniform_in(&bounds, &mut stream);
            match &params.estimator {
                UniformEstimator::ShrinkingBall { .. } => {
                    let obs = problem.evaluate_once(&x, &mut stream);
                    store.insert(x, obs, k);
                    evals += 1;
                }
                UniformEstimator::Replicated { replications } => {
                    let m = problem.objectives();
                    let mut sums = vec![0.0; m];
                    for _ in 0..*replications {
                        let obs = problem.evaluate_once(&x, &mut stream);
                        for (s, v) in sums.iter_mut().zip(obs.values()) {
                            *s += v;
                        }
                    }
                    store.insert_replicated(x, sums, *replications, k);
                    evals += replications;
                }
            }
        }
        if let UniformEstimator::ShrinkingBall { .. } = &params.estimator {
            store.recompute_estimates(r_k.unwrap());
        }
        let candidates: Vec<(u64, ObjectiveVector)> = store
            .samples()
            .iter()
            .map(|s| (s.id, s.estimate.clone()))
            .collect();
        archive = ParetoArchive::from_candidates(&candidates)?;
        let (m1v, m2v, m3v) = match metrics {
            Some(att) => att.evaluate(&archive.vectors()),
            None => (None, None, None),
        };
        records.push(IterationRecord {
            iteration: k,
            evals,
            active_regions: 0,
            pruned_regions: 0,
            archive_size: archive.len(),
            r_k,
            n_k: Some(store.len() as u64),
            m1: m1v,
            m2: m2v,
            m3: m3v,
        });
    }

    let final_archive = archive
        .entries
        .iter()
        .map(|(sid, est)| ArchiveEntry {
            sample_id: *sid,
            x: store.sample(*sid).x.clone(),
            estimate: est.clone(),
        })
        .collect();
    Ok(RunTrajectory {
        run_id: 0,
        seed,
        optimizer: "uniform".to_string(),
        records,
        final_archive,
        final_regions: Vec::new(),
        total_evals: evals,
    })
}

#[derive(Debug, Clone)]
pub struct Nsga2Params {
    pub population: usize,
    pub generations: u32,
    pub crossover_prob: f64,
    /// Per-gene mutation probability; defaults to `1/n`.
    pub mutation_prob: Option<f64>,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
    /// Fitness replications per evaluated individual.
    pub replications: u64,
}

impl Default for Nsga2Params {
    fn default() -> Self {
        Nsga2Params {
            population: 50,
            generations: 100,
            crossover_prob: 0.9,
            mutation_prob: None,
            eta_crossover: 20.0,
            eta_mutation: 20.0,
            replications: 20,
        }
    }
}

impl Nsga2Params {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return Err(Error::config(format!(
                "population must be even and >= 4, got {}",
                self.population
            )));
        }
        if self.generations < 1 {
            return Err(Error::config("generations must be >= 1".to_string()));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(Error::config(
                "crossover probability must be in [0, 1]".to_string(),
            ));
        }
        if let Some(pm) = self.mutation_prob {
            if !(0.0..=1.0).contains(&pm) {
                return Err(Error::config(
                    "mutation probability must be in [0, 1]".to_string(),
                ));
            }
        }
        if self.replications < 1 {
            return Err(Error::config(
                "fitness replications must be >= 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Deb's fast non-dominated sorting: ranked fronts, best first.
pub fn fast_non_dominated_sort(vectors: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = vectors.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if crate::domain::dominates(&vectors[i], &vectors[j]) {
                dominated_by[i].push(j);
                domination_count[j] += 1;
            } else if crate::domain::dominates(&vectors[j], &vectors[i]) {
                dominated_by[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

/// Crowding distance within one front; boundary points get the infinite
/// sentinel so they are always retained.
pub fn crowding_distances(front: &[usize], vectors: &[ObjectiveVector]) -> Vec<f64> {
    let len = front.len();
    let mut dist = vec![0.0f64; len];
    if len <= 2 {
        return vec![f64::INFINITY; len];
    }
    let m = vectors[front[0]].len();
    for obj in 0..m {
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&a, &b| vectors[front[a]][obj].total_cmp(&vectors[front[b]][obj]));
        let lo = vectors[front[order[0]]][obj];
        let hi = vectors[front[order[len - 1]]][obj];
        dist[order[0]] = f64::INFINITY;
        dist[order[len - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..len - 1 {
                let prev = vectors[front[order[w - 1]]][obj];
                let next = vectors[front[order[w + 1]]][obj];
                dist[order[w]] += (next - prev) / (hi - lo);
            }
        }
    }
    dist
}

struct Individual {
    id: u64,
    x: MixedPoint,
    fitness: ObjectiveVector,
}

fn evaluate_batch(
    problem: &dyn NoisyProblem,
    xs: Vec<(u64, MixedPoint)>,
    replications: u64,
    seed: u64,
) -> Vec<Individual> {
    let m = problem.objectives();
    let results = exec::map(&xs, |(id, x)| {
        let mut stream = rng::derive(seed, &[tag::FITNESS, *id]);
        let mut sums = vec![0.0; m];
        for _ in 0..replications {
            let obs = problem.evaluate_once(x, &mut stream);
            for (s, v) in sums.iter_mut().zip(obs.values()) {
                *s += v;
            }
        }
        ObjectiveVector::new(sums.into_iter().map(|s| s / replications as f64).collect())
            .expect("finite fitness")
    });
    xs.into_iter()
        .zip(results)
        .map(|((id, x), fitness)| Individual { id, x, fitness })
        .collect()
}

fn sbx_gene(y1: f64, y2: f64, lo: f64, hi: f64, eta: f64, u: f64) -> (f64, f64) {
    if (y1 - y2).abs() < 1e-14 {
        return (y1, y2);
    }
    let (ylo, yhi) = if y1 < y2 { (y1, y2) } else { (y2, y1) };
    let spread = yhi - ylo;
    let q = |beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
        }
    };
    let beta_lo = 1.0 + 2.0 * (ylo - lo) / spread;
    let beta_hi = 1.0 + 2.0 * (hi - yhi) / spread;
    let c1 = 0.5 * ((ylo + yhi) - q(beta_lo) * spread);
    let c2 = 0.5 * ((ylo + yhi) + q(beta_hi) * spread);
    (c1.clamp(lo, hi), c2.clamp(lo, hi))
}

fn polynomial_mutation(y: f64, lo: f64, hi: f64, eta: f64, u: f64) -> f64 {
    let span = hi - lo;
    let d1 = (y - lo) / span;
    let d2 = (hi - y) / span;
    let pow = 1.0 / (eta + 1.0);
    let delta = if u < 0.5 {
        let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
        val.powf(pow) - 1.0
    } else {
        let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - val.powf(pow)
    };
    (y + delta * span).clamp(lo, hi)
}

/// Standard generational NSGA-II: fast non-dominated sorting, crowding
/// truncation, binary tournament on (rank, crowding), simulated-binary
/// crossover and polynomial mutation on continuous genes, uniform reset
/// mutation on integer genes.
pub fn nsga2(
    problem: &dyn NoisyProblem,
    params: &Nsga2Params,
    seed: u64,
    metrics: Option<&MetricAttachment>,
) -> Result<RunTrajectory> {
    params.validate()?;
    let domain = problem.domain().clone();
    let bounds = BoxBounds::full(&domain);
    let pop_size = params.population;
    let pm = params.mutation_prob.unwrap_or(1.0 / domain.dim() as f64);
    let mut next_id = 0u64;
    let mut evals = 0u64;
    let mut records = Vec::new();

    let spawn = |count: usize, next_id: &mut u64| -> Vec<(u64, MixedPoint)> {
        (0..count)
            .map(|_| {
                let id = *next_id;
                *next_id += 1;
                let mut stream = rng::derive(seed, &[tag::SAMPLE, id]);
                (id, SampleStore::draw_uniform_in(&bounds, &mut stream))
            })
            .collect()
    };

    let mut population = evaluate_batch(
        problem,
        spawn(pop_size, &mut next_id),
        params.replications,
        seed,
    );
    evals += pop_size as u64 * params.replications;

    let record = |generation: u32,
                  population: &[Individual],
                  evals: u64,
                  records: &mut Vec<IterationRecord>| {
        let vectors: Vec<ObjectiveVector> = population.iter().map(|i| i.fitness.clone()).collect();
        let front = &fast_non_dominated_sort(&vectors)[0];
        let archive: Vec<ObjectiveVector> = front.iter().map(|&i| vectors[i].clone()).collect();
        let (m1v, m2v, m3v) = match metrics {
            Some(att) => att.evaluate(&archive),
            None => (None, None, None),
        };
        records.push(IterationRecord {
            iteration: generation,
            evals,
            active_regions: 0,
            pruned_regions: 0,
            archive_size: archive.len(),
            r_k: None,
            n_k: None,
            m1: m1v,
            m2: m2v,
            m3: m3v,
        });
    };
    record(0, &population, evals, &mut records);

    for generation in 1..=params.generations {
        let vectors: Vec<ObjectiveVector> = population.iter().map(|i| i.fitness.clone()).collect();
        let fronts = fast_non_dominated_sort(&vectors);
        let mut rank = vec![0usize; population.len()];
        let mut crowd = vec![0.0f64; population.len()];
        for (r, front) in fronts.iter().enumerate() {
            let d = crowding_distances(front, &vectors);
            for (&i, &di) in front.iter().zip(&d) {
                rank[i] = r;
                crowd[i] = di;
            }
        }

        let mut gen_rng = rng::derive(seed, &[tag::GENERATION, generation as u64]);
        let tournament = |rng: &mut rand_chacha::ChaCha8Rng| -> usize {
            let a = rng.random_range(0..population.len());
            let b = rng.random_range(0..population.len());
            if rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] > crowd[b]) {
                a
            } else {
                b
            }
        };

        let mut offspring_points: Vec<(u64, MixedPoint)> = Vec::with_capacity(pop_size);
        while offspring_points.len() < pop_size {
            let pa = &population[tournament(&mut gen_rng)].x;
            let pb = &population[tournament(&mut gen_rng)].x;
            let (mut ca, mut cb) = (pa.clone(), pb.clone());
            if gen_rng.random_range(0.0..1.0) < params.crossover_prob {
                for (g, &(lo, hi)) in bounds.continuous.iter().enumerate() {
                    if gen_rng.random_range(0.0..1.0) < 0.5 {
                        let u = gen_rng.random_range(0.0..1.0);
                        let (c1, c2) = sbx_gene(
                            ca.continuous[g],
                            cb.continuous[g],
                            lo,
                            hi,
                            params.eta_crossover,
                            u,
                        );
                        ca.continuous[g] = c1;
                        cb.continuous[g] = c2;
                    }
                }
                for g in 0..bounds.integer.len() {
                    if gen_rng.random_range(0.0..1.0) < 0.5 {
                        std::mem::swap(&mut ca.integer[g], &mut cb.integer[g]);
                    }
                }
            }
            for child in [&mut ca, &mut cb] {
                for (g, &(lo, hi)) in bounds.continuous.iter().enumerate() {
                    if gen_rng.random_range(0.0..1.0) < pm {
                        let u = gen_rng.random_range(0.0..1.0);
                        child.continuous[g] = polynomial_mutation(
                            child.continuous[g],
                            lo,
                            hi,
                            params.eta_mutation,
                            u,
                        );
                    }
                }
                for (g, &(lo, hi)) in bounds.integer.iter().enumerate() {
                    if gen_rng.random_range(0.0..1.0) < pm {
                        child.integer[g] = gen_rng.random_range(lo..=hi);
                    }
                }
            }
            for child in [ca, cb] {
                if offspring_points.len() < pop_size {
                    let id = next_id;
                    next_id += 1;
                    offspring_points.push((id, child));
                }
            }
        }
        let offspring = evaluate_batch(problem, offspring_points, params.replications, seed);
        evals += pop_size as u64 * params.replications;

        // (mu + lambda) selection over parents and offspring
        let mut combined = population;
        combined.extend(offspring);
        let all_vectors: Vec<ObjectiveVector> =
            combined.iter().map(|i| i.fitness.clone()).collect();
        let fronts = fast_non_dominated_sort(&all_vectors);
        let mut chosen: Vec<usize> = Vec::with_capacity(pop_size);
        for front in &fronts {
            if chosen.len() + front.len() <= pop_size {
                chosen.extend(front);
            } else {
                let d = crowding_distances(front, &all_vectors);
                let mut order: Vec<usize> = (0..front.len()).collect();
                order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(front[a].cmp(&front[b])));
                chosen.extend(
                    order
                        .iter()
                        .take(pop_size - chosen.len())
                        .map(|&w| front[w]),
                );
                break;
            }
        }
        chosen.sort_unstable();
        let keep: std::collections::HashSet<usize> = chosen.into_iter().collect();
        population = combined
            .into_iter()
            .enumerate()
            .filter_map(|(i, ind)| keep.contains(&i).then_some(ind))
            .collect();

        record(generation, &population, evals, &mut records);
    }

    let vectors: Vec<ObjectiveVector> = population.iter().map(|i| i.fitness.clone()).collect();
    let front = fast_non_dominated_sort(&vectors).remove(0);
    let final_archive: Vec<ArchiveEntry> = front
        .iter()
        .map(|&i| ArchiveEntry {
            sample_id: population[i].id,
            x: population[i].x.clone(),
            estimate: population[i].fitness.clone(),
        })
        .collect();
    Ok(RunTrajectory {
        run_id: 0,
        seed,
        optimizer: "nsga2".to_string(),
        records,
        final_archive,
        final_regions: Vec::new(),
        total_evals: evals,
    })
}
