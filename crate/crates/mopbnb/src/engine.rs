//! The branch-and-bound main loop: uniform sampling per subregion,
//! estimation, non-dominated front identification, pruning with
//! reclassification, branching, and termination.
//!
//! Two variants share the loop. Single observation (`so`) evaluates each
//! sample once and estimates through shrinking-ball averages; the
//! replication variant (`wr`) estimates each sample by the running mean of
//! repeated evaluations, topped up every iteration to the current
//! replication schedule.

use crate::domain::{BoxBounds, DomainSpec, MixedPoint, ObjectiveVector, RegionStatus, Subregion};
use crate::error::{Error, Result};
use crate::estimation::{radius, replication_schedule, sample_target, SampleStore, Schedules};
use crate::exec;
use crate::metrics::MetricAttachment;
use crate::pareto::ParetoArchive;
use crate::problems::NoisyProblem;
use crate::rng::{self, tag};
use rand::Rng;
use std::collections::HashSet;

/// Estimation variant of the algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// One noisy observation per sample, shrinking-ball estimation.
    SingleObservation,
    /// Replication means at each sample, growing per-iteration schedule.
    WithReplications,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::SingleObservation => "so",
            Variant::WithReplications => "wr",
        }
    }
}

/// Full parameterization of one run.
#[derive(Debug, Clone)]
pub struct AlgoParams {
    pub schedules: Schedules,
    pub variant: Variant,
    /// Initial replication count R1 (wr variant).
    pub wr_initial_replications: u64,
    /// Upper bound on replications per point (wr variant).
    pub wr_replication_cap: u64,
    pub max_iterations: u32,
    /// Normalized width below which a region counts as unbranchable.
    pub min_branch_width: f64,
    pub rng_seed: u64,
}

impl AlgoParams {
    pub fn new(seed: u64) -> Self {
        AlgoParams {
            schedules: Schedules::default(),
            variant: Variant::SingleObservation,
            wr_initial_replications: 10,
            wr_replication_cap: 1000,
            max_iterations: 12,
            min_branch_width: 1e-3,
            rng_seed: seed,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.schedules.validate()?;
        if self.max_iterations < 1 {
            return Err(Error::config("max_iterations must be >= 1".to_string()));
        }
        if !(self.min_branch_width.is_finite() && self.min_branch_width > 0.0) {
            return Err(Error::config("min_branch_width must be > 0".to_string()));
        }
        if self.wr_initial_replications < 1 {
            return Err(Error::config(
                "wr initial replications must be >= 1".to_string(),
            ));
        }
        if self.wr_replication_cap < self.wr_initial_replications {
            return Err(Error::config(
                "wr replication cap must be >= the initial count".to_string(),
            ));
        }
        Ok(())
    }
}

/// Mutable state of a run between iterations.
pub struct AlgoState {
    /// Iteration about to execute (1-based).
    pub k: u32,
    /// alpha_k = alpha / B^k; decays once per iteration.
    pub alpha_k: f64,
    /// Region arena; leaves carry `Active` or `Pruned`, branched interior
    /// nodes become `Split`. Ids equal arena indices.
    pub regions: Vec<Subregion>,
    pub store: SampleStore,
    pub archive: ParetoArchive,
    /// Total simulation calls so far, replications included.
    pub eval_count: u64,
}

impl AlgoState {
    pub fn leaf_ids(&self) -> Vec<u64> {
        self.regions
            .iter()
            .filter(|r| r.status != RegionStatus::Split)
            .map(|r| r.id)
            .collect()
    }

    pub fn active_ids(&self) -> Vec<u64> {
        self.regions
            .iter()
            .filter(|r| r.status == RegionStatus::Active)
            .map(|r| r.id)
            .collect()
    }

    pub fn pruned_ids(&self) -> Vec<u64> {
        self.regions
            .iter()
            .filter(|r| r.status == RegionStatus::Pruned)
            .map(|r| r.id)
            .collect()
    }

    pub fn region(&self, id: u64) -> &Subregion {
        &self.regions[id as usize]
    }
}

/// Whether a region may be branched: its widest normalized dimension exceeds
/// `min_branch_width`, or some integer dimension still has at least `b`
/// values. Integer ranges of width one are unsplittable.
pub fn is_branchable(
    bounds: &BoxBounds,
    b: u32,
    min_branch_width: f64,
    domain: &DomainSpec,
) -> bool {
    let widest = bounds.widest_dim(domain, false).map_or(0.0, |(_, w)| w);
    widest > min_branch_width
        || bounds
            .integer
            .iter()
            .any(|&(lo, hi)| (hi - lo + 1) as u64 >= b as u64)
}

/// Splits the widest normalized splittable dimension (ties toward the lowest
/// index) into `b` equal-measure parts. Integer dimensions split into at
/// most `b` contiguous as-equal-as-possible ranges; fewer children come back
/// when the range has fewer than `b` values.
pub fn branch_box(bounds: &BoxBounds, b: u32, domain: &DomainSpec) -> Vec<BoxBounds> {
    let (dim, _) = bounds
        .widest_dim(domain, true)
        .expect("branch_box called on an unsplittable region");
    let n1 = bounds.continuous.len();
    if dim < n1 {
        let (lo, hi) = bounds.continuous[dim];
        let mut edges: Vec<f64> = (0..=b)
            .map(|i| lo + (hi - lo) * i as f64 / b as f64)
            .collect();
        edges[b as usize] = hi; // keep the inherited upper bound exact
        edges
            .windows(2)
            .map(|w| {
                let mut child = bounds.clone();
                child.continuous[dim] = (w[0], w[1]);
                child
            })
            .collect()
    } else {
        let (lo, hi) = bounds.integer[dim - n1];
        let count = (hi - lo + 1) as u64;
        let parts = (b as u64).min(count);
        let base = count / parts;
        let rem = count % parts;
        let mut start = lo;
        (0..parts)
            .map(|j| {
                let size = base + if j < rem { 1 } else { 0 };
                let mut child = bounds.clone();
                child.integer[dim - n1] = (start, start + size as i64 - 1);
                start += size as i64;
                child
            })
            .collect()
    }
}

/// Step 0: validate parameters and split the domain once into B children.
pub fn initialize(problem: &dyn NoisyProblem, params: &AlgoParams) -> Result<AlgoState> {
    params.validate()?;
    let domain = problem.domain().clone();
    let root_bounds = BoxBounds::full(&domain);
    let b = params.schedules.branching;
    if !is_branchable(&root_bounds, b, params.min_branch_width, &domain) {
        return Err(Error::config(
            "domain is unsplittable under the given branching factor and minimum width".to_string(),
        ));
    }
    let mut root = Subregion::new(0, None, root_bounds.clone());
    root.status = RegionStatus::Split;
    let mut regions = vec![root];
    for child_bounds in branch_box(&root_bounds, b, &domain) {
        let id = regions.len() as u64;
        regions.push(Subregion::new(id, Some(0), child_bounds));
    }
    Ok(AlgoState {
        k: 1,
        alpha_k: params.schedules.alpha / b as f64,
        regions,
        store: SampleStore::new(domain),
        archive: ParetoArchive::default(),
        eval_count: 0,
    })
}

struct NewSample {
    region: u64,
    id: u64,
    x: MixedPoint,
    replication_sum: Vec<f64>,
    replications: u64,
}

/// Where one new sample goes: a specific active region, or the pruned
/// union, resolved by a volume-weighted draw so the pruned space is
/// sampled uniformly.
#[derive(Clone, Copy)]
enum DrawSite {
    Region(u64),
    PrunedUnion,
}

/// One full iteration: sample, estimate, identify the front, then prune,
/// branch, and reclassify every region. Active regions are each filled to
/// the current target; the pruned regions share a small collective budget
/// that keeps estimation supported near pruned boundaries.
pub fn iterate(
    state: &mut AlgoState,
    problem: &dyn NoisyProblem,
    params: &AlgoParams,
) -> Result<()> {
    let k = state.k;
    let sched = &params.schedules;
    let domain = problem.domain().clone();
    let n = domain.dim();
    let seed = params.rng_seed;
    let wr_reps =
        replication_schedule(k, params.wr_initial_replications, params.wr_replication_cap);

    // Step 1a (wr): top existing samples up to the current schedule
    if params.variant == Variant::WithReplications {
        for id in 0..state.store.len() as u64 {
            let have = state.store.sample(id).replications;
            if have < wr_reps {
                let mut stream = rng::derive(seed, &[tag::REPLICATION, id, k as u64]);
                state
                    .store
                    .add_replications(id, problem, wr_reps - have, &mut stream);
                state.eval_count += wr_reps - have;
            }
        }
    }

    // Step 1b: uniform sampling. Active regions fill to n_k each; pruned
    // regions share a collective total of k*c points drawn uniformly over
    // their union.
    let mut specs: Vec<(DrawSite, u64)> = Vec::new();
    let mut next_id = state.store.len() as u64;
    for rid in state.active_ids() {
        let region = state.region(rid);
        let target = sample_target(k, region.status, state.alpha_k, sched);
        let have = region.sample_ids.len() as u64;
        for _ in have..target {
            specs.push((DrawSite::Region(rid), next_id));
            next_id += 1;
        }
    }
    let pruned_ids = state.pruned_ids();
    let mut pruned_cumulative: Vec<(u64, f64)> = Vec::with_capacity(pruned_ids.len());
    if !pruned_ids.is_empty() {
        let domain_ref = problem.domain();
        let mut acc = 0.0;
        for &rid in &pruned_ids {
            acc += state.region(rid).bounds.normalized_volume(domain_ref);
            pruned_cumulative.push((rid, acc));
        }
        let have: u64 = pruned_ids
            .iter()
            .map(|&rid| state.region(rid).sample_ids.len() as u64)
            .sum();
        let target = sample_target(k, RegionStatus::Pruned, state.alpha_k, sched);
        for _ in have..target.max(have) {
            specs.push((DrawSite::PrunedUnion, next_id));
            next_id += 1;
        }
    }
    let pruned_total_volume = pruned_cumulative.last().map_or(0.0, |&(_, v)| v);
    let variant = params.variant;
    let regions = &state.regions;
    let m = problem.objectives();
    let drawn: Vec<NewSample> = exec::map(&specs, |&(site, sid)| {
        let mut stream = rng::derive(seed, &[tag::SAMPLE, sid]);
        let rid = match site {
            DrawSite::Region(rid) => rid,
            DrawSite::PrunedUnion => {
                let u: f64 = stream.random_range(0.0..pruned_total_volume);
                let idx = pruned_cumulative.partition_point(|&(_, acc)| acc <= u);
                pruned_cumulative[idx.min(pruned_cumulative.len() - 1)].0
            }
        };
        let x = SampleStore::draw_uniform_in(&regions[rid as usize].bounds, &mut stream);
        let (replications, replication_sum) = match variant {
            Variant::SingleObservation => {
                let obs = problem.evaluate_once(&x, &mut stream);
                (1, obs.values().to_vec())
            }
            Variant::WithReplications => {
                let mut sums = vec![0.0; m];
                for _ in 0..wr_reps {
                    let obs = problem.evaluate_once(&x, &mut stream);
                    for (s, v) in sums.iter_mut().zip(obs.values()) {
                        *s += v;
                    }
                }
                (wr_reps, sums)
            }
        };
        NewSample {
            region: rid,
            id: sid,
            x,
            replication_sum,
            replications,
        }
    });
    for ns in drawn {
        let id = state
            .store
            .insert_replicated(ns.x, ns.replication_sum, ns.replications, k);
        debug_assert_eq!(id, ns.id);
        state.regions[ns.region as usize].sample_ids.push(id);
        state.eval_count += ns.replications;
    }

    // Step 2: estimation (so recomputes every stored sample at the current
    // radius; wr estimates are already the running replication means)
    if params.variant == Variant::SingleObservation {
        state.store.recompute_estimates(radius(k, n, sched));
    }

    // Step 3: non-dominated front over all stored samples' estimates
    let candidates: Vec<(u64, ObjectiveVector)> = state
        .store
        .samples()
        .iter()
        .map(|s| (s.id, s.estimate.clone()))
        .collect();
    state.archive = ParetoArchive::from_candidates(&candidates)?;

    // Step 4: prune, branch, reclassify
    let archive_ids: HashSet<u64> = state.archive.entries.iter().map(|(id, _)| *id).collect();
    let b = sched.branching;
    for rid in state.leaf_ids() {
        let region = &state.regions[rid as usize];
        let has_front_member = region
            .sample_ids
            .iter()
            .any(|sid| archive_ids.contains(sid));
        let branchable = is_branchable(&region.bounds, b, params.min_branch_width, &domain);
        match (region.status, has_front_member) {
            (RegionStatus::Active, true) => {
                if branchable {
                    split_region(state, rid, b, &domain);
                }
            }
            (RegionStatus::Active, false) => {
                let region = &mut state.regions[rid as usize];
                region.status = RegionStatus::Pruned;
                region.pruned_at = Some(k);
            }
            (RegionStatus::Pruned, true) => {
                let region = &mut state.regions[rid as usize];
                region.status = RegionStatus::Active;
                region.pruned_at = None;
                if branchable {
                    split_region(state, rid, b, &domain);
                }
            }
            (RegionStatus::Pruned, false) => {}
            (RegionStatus::Split, _) => unreachable!("leaf_ids never yields split regions"),
        }
    }

    state.alpha_k /= b as f64;
    state.k += 1;
    Ok(())
}

fn split_region(state: &mut AlgoState, rid: u64, b: u32, domain: &DomainSpec) {
    let bounds = state.regions[rid as usize].bounds.clone();
    let sample_ids = std::mem::take(&mut state.regions[rid as usize].sample_ids);
    state.regions[rid as usize].status = RegionStatus::Split;
    let children = branch_box(&bounds, b, domain);
    let first_child = state.regions.len() as u64;
    for child_bounds in children {
        let id = state.regions.len() as u64;
        state
            .regions
            .push(Subregion::new(id, Some(rid), child_bounds));
    }
    // reattribute the parent's samples to the containing child
    let last_child = state.regions.len() as u64;
    for sid in sample_ids {
        let x = &state.store.sample(sid).x;
        let mut placed = false;
        for cid in first_child..last_child {
            if state.regions[cid as usize].bounds.contains(x, domain) {
                state.regions[cid as usize].sample_ids.push(sid);
                placed = true;
                break;
            }
        }
        debug_assert!(placed, "sample {sid} fell outside every child on split");
    }
}

/// One row of a run trajectory.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: u32,
    pub evals: u64,
    pub active_regions: usize,
    pub pruned_regions: usize,
    pub archive_size: usize,
    pub r_k: Option<f64>,
    pub n_k: Option<u64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub m3: Option<f64>,
}

/// A member of the final archive: the sampled point and its estimate.
#[derive(Debug, Clone)]
pub struct ArchiveEntry {
    pub sample_id: u64,
    pub x: MixedPoint,
    pub estimate: ObjectiveVector,
}

/// Per-iteration records plus the final archive and region tree of one
/// seeded run.
#[derive(Debug, Clone)]
pub struct RunTrajectory {
    pub run_id: u64,
    pub seed: u64,
    pub optimizer: String,
    pub records: Vec<IterationRecord>,
    pub final_archive: Vec<ArchiveEntry>,
    pub final_regions: Vec<Subregion>,
    pub total_evals: u64,
}

/// Runs to completion: iterates until `k` exceeds `max_iterations` or every
/// active region is unbranchable. The surviving active regions are the
/// Pareto-set approximation.
pub fn run(
    problem: &dyn NoisyProblem,
    params: &AlgoParams,
    metrics: Option<&MetricAttachment>,
) -> Result<RunTrajectory> {
    run_with_observer(problem, params, metrics, |_| {})
}

/// [`run`] with a per-iteration hook observing the full state; the last
/// invocation sees the final state.
pub fn run_with_observer(
    problem: &dyn NoisyProblem,
    params: &AlgoParams,
    metrics: Option<&MetricAttachment>,
    mut observe: impl FnMut(&AlgoState),
) -> Result<RunTrajectory> {
    let mut state = initialize(problem, params)?;
    let n = problem.domain().dim();
    let mut records = Vec::new();
    loop {
        let executing = state.k;
        let alpha_k = state.alpha_k;
        iterate(&mut state, problem, params)?;
        let (m1v, m2v, m3v) = match metrics {
            Some(att) => att.evaluate(&state.archive.vectors()),
            None => (None, None, None),
        };
        records.push(IterationRecord {
            iteration: executing,
            evals: state.eval_count,
            active_regions: state.active_ids().len(),
            pruned_regions: state.pruned_ids().len(),
            archive_size: state.archive.len(),
            r_k: Some(radius(executing, n, &params.schedules)),
            n_k: Some(sample_target(
                executing,
                RegionStatus::Active,
                alpha_k,
                &params.schedules,
            )),
            m1: m1v,
            m2: m2v,
            m3: m3v,
        });
        observe(&state);
        if executing >= params.max_iterations {
            break;
        }
        let all_unbranchable = state.active_ids().iter().all(|&rid| {
            !is_branchable(
                &state.region(rid).bounds,
                params.schedules.branching,
                params.min_branch_width,
                problem.domain(),
            )
        });
        if all_unbranchable {
            break;
        }
    }
    let final_archive = state
        .archive
        .entries
        .iter()
        .map(|(sid, est)| ArchiveEntry {
            sample_id: *sid,
            x: state.store.sample(*sid).x.clone(),
            estimate: est.clone(),
        })
        .collect();
    Ok(RunTrajectory {
        run_id: 0,
        seed: params.rng_seed,
        optimizer: format!("mopbnb-{}", params.variant.label()),
        records,
        final_archive,
        final_regions: state.regions.clone(),
        total_evals: state.eval_count,
    })
}
