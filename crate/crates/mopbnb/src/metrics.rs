//! Solution-quality measures: closeness (M1), distribution (M2), extent
//! (M3), the objective-space distance to the true efficient frontier, and
//! Monte Carlo estimation of the high-quality level set threshold.
//!
//! Everything here is oracle-side: distances use true objective values and a
//! dense frontier grid. Optimizers never see these functions.

use crate::domain::{MixedPoint, ObjectiveVector};
use crate::error::{Error, Result};
use crate::estimation::SampleStore;
use crate::exec;
use crate::pareto::non_dominated_front;
use crate::problems::{true_frontier, NoisyProblem};
use crate::rng;

/// Dense grid approximation of the true efficient frontier.
#[derive(Debug, Clone)]
pub struct FrontierOracle {
    points: Vec<ObjectiveVector>,
    problem_id: String,
    resolution: usize,
    /// Maximum gap between consecutive grid points; bounds the
    /// discretization error of [`FrontierOracle::distance`].
    spacing: f64,
}

impl FrontierOracle {
    pub fn new(
        mut points: Vec<ObjectiveVector>,
        problem_id: &str,
        resolution: usize,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::config(
                "frontier oracle must be non-empty".to_string(),
            ));
        }
        let front = non_dominated_front(&points)?;
        if front.len() != points.len() {
            return Err(Error::config(
                "frontier oracle contains dominated points".to_string(),
            ));
        }
        points.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let spacing = points
            .windows(2)
            .map(|w| euclid(&w[0], &w[1]))
            .fold(0.0f64, f64::max);
        Ok(FrontierOracle {
            points,
            problem_id: problem_id.to_string(),
            resolution,
            spacing,
        })
    }

    pub fn for_problem(problem_id: &str, n: usize, resolution: usize) -> Result<Self> {
        let pts = true_frontier(problem_id, n, resolution)?;
        FrontierOracle::new(pts, problem_id, resolution)
    }

    pub fn points(&self) -> &[ObjectiveVector] {
        &self.points
    }

    pub fn problem_id(&self) -> &str {
        &self.problem_id
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Minimum Euclidean distance from `v` to the frontier grid.
    ///
    /// Bi-objective grids are sorted by the first objective, so the search
    /// expands outward from the insertion point and stops once the first
    /// coordinate alone exceeds the best distance; other dimensions fall
    /// back to a linear scan. Both paths are exact over the grid.
    pub fn distance(&self, v: &ObjectiveVector) -> f64 {
        assert_eq!(
            v.len(),
            self.points[0].len(),
            "objective dimension mismatch against frontier oracle"
        );
        if v.len() != 2 {
            return self
                .points
                .iter()
                .map(|p| euclid(p, v))
                .fold(f64::INFINITY, f64::min);
        }
        let pos = self.points.partition_point(|p| p[0] < v[0]);
        let mut best = f64::INFINITY;
        let (mut left, mut right) = (pos as isize - 1, pos);
        loop {
            let mut advanced = false;
            if right < self.points.len() {
                let p = &self.points[right];
                let dx = p[0] - v[0];
                if dx * dx < best {
                    best = best.min(euclid2(p, v));
                    right += 1;
                    advanced = true;
                }
            }
            if left >= 0 {
                let p = &self.points[left as usize];
                let dx = p[0] - v[0];
                if dx * dx < best {
                    best = best.min(euclid2(p, v));
                    left -= 1;
                    advanced = true;
                }
            }
            if !advanced {
                return best.sqrt();
            }
        }
    }
}

fn euclid2(a: &ObjectiveVector, b: &ObjectiveVector) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn euclid(a: &ObjectiveVector, b: &ObjectiveVector) -> f64 {
    euclid2(a, b).sqrt()
}

/// Distance of one objective vector to the frontier.
pub fn distance_to_frontier(v: &ObjectiveVector, oracle: &FrontierOracle) -> f64 {
    oracle.distance(v)
}

/// M1: mean distance of the non-dominated set to the true frontier.
pub fn m1(ns: &[ObjectiveVector], oracle: &FrontierOracle) -> Result<f64> {
    if ns.is_empty() {
        return Err(Error::config(
            "M1 requires a non-empty solution set".to_string(),
        ));
    }
    let distances = exec::map(ns, |v| oracle.distance(v));
    Ok(distances.iter().sum::<f64>() / ns.len() as f64)
}

/// M2: for each solution, the number of others farther than `d_star`,
/// averaged with the `1/(|NS|-1)` normalization. A singleton set scores 0.
pub fn m2(ns: &[ObjectiveVector], d_star: f64) -> f64 {
    if ns.len() <= 1 {
        return 0.0;
    }
    let d2 = d_star * d_star;
    let counts = exec::map_indices(ns.len(), |i| {
        ns.iter().filter(|q| euclid2(&ns[i], q) > d2).count() as f64
    });
    counts.iter().sum::<f64>() / (ns.len() - 1) as f64
}

/// M3: square root of the maximum pairwise distance (extent).
pub fn m3(ns: &[ObjectiveVector]) -> f64 {
    if ns.len() <= 1 {
        return 0.0;
    }
    let mut max2 = 0.0f64;
    for i in 0..ns.len() {
        for j in i + 1..ns.len() {
            max2 = max2.max(euclid2(&ns[i], &ns[j]));
        }
    }
    max2.sqrt().sqrt()
}

/// Frontier oracle plus the pairing threshold, attached to runs that should
/// record metric trajectories.
pub struct MetricAttachment {
    pub oracle: FrontierOracle,
    pub d_star: f64,
}

impl MetricAttachment {
    pub fn evaluate(&self, ns: &[ObjectiveVector]) -> (Option<f64>, Option<f64>, Option<f64>) {
        if ns.is_empty() {
            return (None, None, None);
        }
        (
            m1(ns, &self.oracle).ok(),
            Some(m2(ns, self.d_star)),
            Some(m3(ns)),
        )
    }
}

/// The delta-quantile of the distance distribution `D(X)` for `X` uniform on
/// the domain, and the induced level-set membership test.
#[derive(Debug, Clone)]
pub struct QualityThreshold {
    pub delta: f64,
    pub y_delta: f64,
    pub mc_points: usize,
    pub rng_seed: u64,
}

/// Estimates `y(delta, S)` by Monte Carlo: draw `mc_points` uniform domain
/// points, compute their true-value distance to the frontier, and return
/// the smallest order statistic whose empirical CDF reaches `delta`.
pub fn estimate_y_delta(
    problem: &dyn NoisyProblem,
    delta: f64,
    mc_points: usize,
    oracle: &FrontierOracle,
    seed: u64,
) -> Result<QualityThreshold> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!(
            "delta must be in (0, 1), got {delta}"
        )));
    }
    if mc_points < 10_000 {
        return Err(Error::config(format!(
            "quality threshold estimation needs >= 10^4 Monte Carlo points, got {mc_points}"
        )));
    }
    let mut stream = rng::derive(seed, &[rng::tag::QUALITY_MC]);
    let bounds = crate::domain::BoxBounds::full(problem.domain());
    let points: Vec<MixedPoint> = (0..mc_points)
        .map(|_| SampleStore::draw_uniform_in(&bounds, &mut stream))
        .collect();
    let mut distances = exec::map(&points, |x| oracle.distance(&problem.true_values(x)));
    distances.sort_by(f64::total_cmp);
    let idx = ((delta * mc_points as f64).ceil() as usize).clamp(1, mc_points) - 1;
    Ok(QualityThreshold {
        delta,
        y_delta: distances[idx],
        mc_points,
        rng_seed: seed,
    })
}

/// Whether `x` belongs to the high-quality level set `L(delta, S)`:
/// `D(x) <= y(delta, S)` with `D` computed from true values.
pub fn in_level_set(
    x: &MixedPoint,
    problem: &dyn NoisyProblem,
    threshold: &QualityThreshold,
    oracle: &FrontierOracle,
) -> bool {
    oracle.distance(&problem.true_values(x)) <= threshold.y_delta
}
