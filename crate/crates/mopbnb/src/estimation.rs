//! Function-value estimation.
//!
//! The single-observation scheme evaluates each sampled point once and
//! estimates objectives by averaging the raw observations of every stored
//! sample within a shrinking ball (normalized radius `r_k = r0 / B^(k/n)`).
//! Balls pool samples globally across subregion boundaries. The replication
//! alternative estimates each point by the running mean of repeated
//! evaluations at the point itself.

use crate::domain::{DomainSpec, MixedPoint, ObjectiveVector, RegionStatus};
use crate::error::{Error, Result};
use crate::exec;
use crate::problems::NoisyProblem;
use rand::{Rng, RngCore};
use std::collections::HashMap;

/// One sampled point: its single raw observation per objective (written once
/// at creation) and its current per-objective estimate (recomputed every
/// iteration at the current radius).
#[derive(Debug, Clone)]
pub struct Sample {
    pub id: u64,
    pub x: MixedPoint,
    pub raw: ObjectiveVector,
    pub estimate: ObjectiveVector,
    pub born_at: u32,
    /// Replication bookkeeping for the wr variant; 1 for single observation.
    pub replications: u64,
    pub replication_sum: Vec<f64>,
}

/// User-chosen schedule constants.
#[derive(Debug, Clone, Copy)]
pub struct Schedules {
    /// Initial ball radius in normalized units.
    pub r0: f64,
    /// Branching factor B.
    pub branching: u32,
    /// Pruned-region sampling constant c: a pruned region holds k*c samples.
    pub pruned_c: u64,
    /// Closeness parameter of the quality analysis.
    pub delta: f64,
    /// Confidence parameter; alpha_k = alpha / B^k decays each iteration.
    pub alpha: f64,
}

impl Default for Schedules {
    fn default() -> Self {
        Schedules {
            r0: 0.1,
            branching: 2,
            pruned_c: 50,
            delta: 0.1,
            alpha: 0.1,
        }
    }
}

impl Schedules {
    pub fn validate(&self) -> Result<()> {
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(Error::config(format!("r0 must be > 0, got {}", self.r0)));
        }
        if self.branching < 2 {
            return Err(Error::config(format!(
                "branching factor must be >= 2, got {}",
                self.branching
            )));
        }
        if self.pruned_c < 1 {
            return Err(Error::config(
                "pruned-region constant c must be >= 1".to_string(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!(
                "delta must be in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Ball radius on iteration `k` for an `n`-dimensional domain:
/// `r0 * B^(-k/n)`. Higher dimension shrinks slower.
pub fn radius(k: u32, n: usize, s: &Schedules) -> f64 {
    s.r0 * (s.branching as f64).powf(-(k as f64) / n as f64)
}

/// Total sample target on iteration `k`: each active region holds
/// `ceil(ln(alpha_k) / ln(1 - delta))` points, and the pruned regions
/// collectively hold `k * c` (a small support for neighborhood estimation
/// near pruned boundaries; a per-region quota would dwarf the active-side
/// budget once pruned boxes accumulate). The engine draws only the positive
/// difference from the current count.
pub fn sample_target(k: u32, status: RegionStatus, alpha_k: f64, s: &Schedules) -> u64 {
    match status {
        RegionStatus::Pruned => k as u64 * s.pruned_c,
        _ => {
            let v = alpha_k.ln() / (1.0 - s.delta).ln();
            // alpha_k = (1-delta)^t must give exactly t; absorb float dust
            let r = v.round();
            let v = if (v - r).abs() < 1e-9 { r } else { v.ceil() };
            v as u64
        }
    }
}

/// Replication count per point on iteration `k` for the wr variant:
/// geometric growth from `r1`, capped. The growth rule itself is a
/// configuration choice and is recorded in run metadata.
pub fn replication_schedule(k: u32, r1: u64, cap: u64) -> u64 {
    let doubled = if k >= 64 {
        u64::MAX
    } else {
        r1.saturating_mul(1u64 << (k - 1).min(63))
    };
    doubled.min(cap)
}

/// Mean of `reps` independent single-draw evaluations at `x`.
pub fn estimate_wr(
    x: &MixedPoint,
    problem: &dyn NoisyProblem,
    reps: u64,
    rng: &mut dyn RngCore,
) -> ObjectiveVector {
    assert!(reps >= 1);
    let m = problem.objectives();
    let mut sums = vec![0.0; m];
    for _ in 0..reps {
        let obs = problem.evaluate_once(x, rng);
        for (s, v) in sums.iter_mut().zip(obs.values()) {
            *s += v;
        }
    }
    ObjectiveVector::new(sums.into_iter().map(|s| s / reps as f64).collect()).expect("finite mean")
}

/// Uniform-grid spatial index over normalized coordinates. Exact: a query
/// returns precisely the samples within the radius. Cell width always stays
/// at or above the query radius so a one-ring neighbor scan suffices; the
/// grid is rebuilt when the radius halves.
struct GridIndex {
    cell: f64,
    cells: HashMap<Vec<i32>, Vec<u32>>,
}

impl GridIndex {
    fn new(cell: f64) -> Self {
        GridIndex {
            cell,
            cells: HashMap::new(),
        }
    }

    fn key(&self, coords: &[f64]) -> Vec<i32> {
        coords
            .iter()
            .map(|&c| (c / self.cell).floor() as i32)
            .collect()
    }

    fn insert(&mut self, coords: &[f64], idx: u32) {
        self.cells.entry(self.key(coords)).or_default().push(idx);
    }
}

/// Append-only store of every sample ever drawn, with radius queries.
pub struct SampleStore {
    domain: DomainSpec,
    samples: Vec<Sample>,
    /// Normalized coordinates, `dim` entries per sample.
    norm: Vec<f64>,
    grid: Option<GridIndex>,
}

impl SampleStore {
    pub fn new(domain: DomainSpec) -> Self {
        SampleStore {
            domain,
            samples: Vec::new(),
            norm: Vec::new(),
            grid: None,
        }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn sample(&self, id: u64) -> &Sample {
        &self.samples[id as usize]
    }

    pub fn sample_mut(&mut self, id: u64) -> &mut Sample {
        &mut self.samples[id as usize]
    }

    fn coords(&self, idx: usize) -> &[f64] {
        let d = self.domain.dim();
        &self.norm[idx * d..(idx + 1) * d]
    }

    /// Inserts a sample with its single raw observation; the estimate starts
    /// as the raw value. Returns the new id (ids are dense and ordered).
    pub fn insert(&mut self, x: MixedPoint, raw: ObjectiveVector, born_at: u32) -> u64 {
        let sum = raw.values().to_vec();
        self.insert_replicated(x, sum, 1, born_at)
    }

    /// Inserts a sample already carrying `replications` accumulated
    /// observations (wr variant); raw and estimate are their mean.
    pub fn insert_replicated(
        &mut self,
        x: MixedPoint,
        replication_sum: Vec<f64>,
        replications: u64,
        born_at: u32,
    ) -> u64 {
        assert!(replications >= 1);
        let id = self.samples.len() as u64;
        let coords = self.domain.normalize(&x);
        if let Some(grid) = &mut self.grid {
            grid.insert(&coords, id as u32);
        }
        self.norm.extend_from_slice(&coords);
        let mean = ObjectiveVector::new(
            replication_sum
                .iter()
                .map(|v| v / replications as f64)
                .collect(),
        )
        .expect("finite mean");
        self.samples.push(Sample {
            id,
            x,
            raw: mean.clone(),
            estimate: mean,
            born_at,
            replications,
            replication_sum,
        });
        id
    }

    fn ensure_grid(&mut self, r: f64) {
        let rebuild = match &self.grid {
            None => true,
            Some(g) => r < g.cell / 2.0,
        };
        if rebuild {
            let mut grid = GridIndex::new(r);
            let d = self.domain.dim();
            for i in 0..self.samples.len() {
                let coords = &self.norm[i * d..(i + 1) * d];
                grid.insert(coords, i as u32);
            }
            self.grid = Some(grid);
        }
    }

    /// Indices of all samples within normalized distance `r` of `center`
    /// (closed ball). Falls back to a linear scan when the grid does not
    /// cover the query; both paths are exact.
    pub fn ball_indices(&self, center: &[f64], r: f64) -> Vec<u32> {
        let d = self.domain.dim();
        assert_eq!(center.len(), d, "dimension mismatch");
        let grid = match &self.grid {
            Some(g) if r <= g.cell => g,
            _ => return self.ball_linear(center, r),
        };
        // a one-ring scan is exact because cell width >= r
        let neighbor_cells = 3usize.checked_pow(d as u32);
        let mut out = Vec::new();
        match neighbor_cells {
            Some(nc) if nc <= grid.cells.len().max(64) => {
                let base = grid.key(center);
                let mut offset = vec![-1i32; d];
                loop {
                    let key: Vec<i32> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
                    if let Some(members) = grid.cells.get(&key) {
                        self.filter_by_distance(members, center, r, &mut out);
                    }
                    // odometer over {-1, 0, 1}^d
                    let mut dim = 0;
                    loop {
                        if dim == d {
                            out.sort_unstable();
                            return out;
                        }
                        offset[dim] += 1;
                        if offset[dim] > 1 {
                            offset[dim] = -1;
                            dim += 1;
                        } else {
                            break;
                        }
                    }
                }
            }
            _ => {
                // high dimension: visiting occupied cells beats enumerating 3^d neighbors
                let base = grid.key(center);
                for (key, members) in &grid.cells {
                    if key.iter().zip(&base).all(|(k, b)| (k - b).abs() <= 1) {
                        self.filter_by_distance(members, center, r, &mut out);
                    }
                }
                out.sort_unstable();
                out
            }
        }
    }

    fn filter_by_distance(&self, members: &[u32], center: &[f64], r: f64, out: &mut Vec<u32>) {
        let r2 = r * r;
        for &m in members {
            let c = self.coords(m as usize);
            let d2: f64 = c.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= r2 {
                out.push(m);
            }
        }
    }

    fn ball_linear(&self, center: &[f64], r: f64) -> Vec<u32> {
        let r2 = r * r;
        (0..self.samples.len() as u32)
            .filter(|&i| {
                let c = self.coords(i as usize);
                let d2: f64 = c.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= r2
            })
            .collect()
    }

    /// Per-objective mean of raw observations within distance `r` of sample
    /// `id`. The ball always contains the sample itself.
    pub fn estimate_so(&self, id: u64, r: f64) -> ObjectiveVector {
        let center = self.coords(id as usize);
        let ball = self.ball_indices(center, r);
        debug_assert!(!ball.is_empty());
        self.mean_of(&ball)
    }

    /// Ball-average estimate at an arbitrary point; `None` when no stored
    /// sample lies within the radius.
    pub fn estimate_at(&self, x: &MixedPoint, r: f64) -> Option<ObjectiveVector> {
        let coords = self.domain.normalize(x);
        let ball = self.ball_indices(&coords, r);
        if ball.is_empty() {
            None
        } else {
            Some(self.mean_of(&ball))
        }
    }

    fn mean_of(&self, ids: &[u32]) -> ObjectiveVector {
        let m = self.samples[ids[0] as usize].raw.len();
        let mut sums = vec![0.0; m];
        for &i in ids {
            for (s, v) in sums.iter_mut().zip(self.samples[i as usize].raw.values()) {
                *s += v;
            }
        }
        let n = ids.len() as f64;
        ObjectiveVector::new(sums.into_iter().map(|s| s / n).collect()).expect("finite mean")
    }

    /// Recomputes the estimate of every stored sample at radius `r`,
    /// fanning out across threads; results merge in sample-id order.
    pub fn recompute_estimates(&mut self, r: f64) {
        self.ensure_grid(r);
        let estimates = exec::map_indices(self.samples.len(), |i| self.estimate_so(i as u64, r));
        for (s, e) in self.samples.iter_mut().zip(estimates) {
            s.estimate = e;
        }
    }

    /// Sequential reference of [`recompute_estimates`], for the benchmark
    /// suite comparing the parallel path against the fallback.
    pub fn recompute_estimates_seq(&mut self, r: f64) {
        self.ensure_grid(r);
        let estimates =
            exec::map_indices_seq(self.samples.len(), |i| self.estimate_so(i as u64, r));
        for (s, e) in self.samples.iter_mut().zip(estimates) {
            s.estimate = e;
        }
    }

    /// Adds replications to a sample (wr variant): raw and estimate become
    /// the running mean over all replications so far.
    pub fn add_replications(
        &mut self,
        id: u64,
        problem: &dyn NoisyProblem,
        count: u64,
        rng: &mut dyn RngCore,
    ) {
        if count == 0 {
            return;
        }
        let s = &mut self.samples[id as usize];
        for _ in 0..count {
            let obs = problem.evaluate_once(&s.x, rng);
            for (acc, v) in s.replication_sum.iter_mut().zip(obs.values()) {
                *acc += v;
            }
        }
        s.replications += count;
        let mean = ObjectiveVector::new(
            s.replication_sum
                .iter()
                .map(|v| v / s.replications as f64)
                .collect(),
        )
        .expect("finite mean");
        s.raw = mean.clone();
        s.estimate = mean;
    }

    /// Uniform draw inside a box of this store's domain.
    pub fn draw_uniform_in(bounds: &crate::domain::BoxBounds, rng: &mut impl Rng) -> MixedPoint {
        let continuous = bounds
            .continuous
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        let integer = bounds
            .integer
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect();
        MixedPoint {
            continuous,
            integer,
        }
    }
}
