//! Benchmark problems and the noisy-evaluation contract.
//!
//! Optimizers only ever see [`NoisyProblem::evaluate_once`]; the deterministic
//! components and [`NoisyProblem::true_values`] exist for metric oracles and
//! tests. Noise is multiplicative: `g(x, xi) = f0(x) * (1 + xi)` with
//! `xi ~ N(0, sigma^2)`, one draw shared across the objectives of a call
//! (optionally independent per objective).

use crate::domain::{DomainSpec, MixedPoint, ObjectiveVector};
use crate::error::{Error, Result};
use crate::pareto::non_dominated_front;
use rand::RngCore;
use rand_distr::{Distribution, Normal};

/// A black-box problem whose objectives can only be observed with noise.
pub trait NoisyProblem: Sync + Send {
    fn domain(&self) -> &DomainSpec;

    /// Objective count `m`.
    fn objectives(&self) -> usize;

    /// One noisy observation per objective from a single simulation draw.
    fn evaluate_once(&self, x: &MixedPoint, rng: &mut dyn RngCore) -> ObjectiveVector;

    /// Noise-free objective values. Available for benchmark problems only and
    /// used exclusively by metric oracles and tests, never by an optimizer.
    fn true_values(&self, x: &MixedPoint) -> ObjectiveVector;
}

/// A problem with exactly computable objectives, used as the deterministic
/// component under the noise wrapper.
pub trait DeterministicProblem: Sync + Send {
    fn id(&self) -> &'static str;
    fn domain(&self) -> &DomainSpec;
    fn objectives(&self) -> usize {
        2
    }
    fn evaluate(&self, x: &MixedPoint) -> ObjectiveVector;
}

fn assert_in_domain(p: &dyn DeterministicProblem, x: &MixedPoint) {
    assert!(
        p.domain().contains(x),
        "{} evaluated outside its domain: {:?}",
        p.id(),
        x
    );
}

/// Shared ZDT structure: `f2 = g * h(f1, g)` with
/// `g = 1 + 9 * sum_{i>=2} x_i / (n - 1)`.
fn zdt_g(x: &[f64]) -> f64 {
    let n = x.len();
    1.0 + 9.0 * x[1..].iter().sum::<f64>() / (n as f64 - 1.0)
}

macro_rules! zdt_problem {
    ($name:ident, $id:literal, $h:expr) => {
        pub struct $name {
            domain: DomainSpec,
        }

        impl $name {
            pub fn new(n: usize) -> Result<Self> {
                if n < 2 {
                    return Err(Error::config(format!("{} requires n >= 2, got {n}", $id)));
                }
                Ok(Self {
                    domain: DomainSpec::cube(0.0, 1.0, n)?,
                })
            }
        }

        impl DeterministicProblem for $name {
            fn id(&self) -> &'static str {
                $id
            }

            fn domain(&self) -> &DomainSpec {
                &self.domain
            }

            fn evaluate(&self, x: &MixedPoint) -> ObjectiveVector {
                assert_in_domain(self, x);
                let xs = &x.continuous;
                let f1 = xs[0];
                let g = zdt_g(xs);
                let h: fn(f64, f64) -> f64 = $h;
                ObjectiveVector::new(vec![f1, g * h(f1, g)]).expect("finite objectives")
            }
        }
    };
}

zdt_problem!(Zdt1, "zdt1", |f1, g| 1.0 - (f1 / g).sqrt());
zdt_problem!(Zdt2, "zdt2", |f1, g| 1.0 - (f1 / g) * (f1 / g));
zdt_problem!(Zdt3, "zdt3", |f1, g| {
    1.0 - (f1 / g).sqrt() - (f1 / g) * (10.0 * std::f64::consts::PI * f1).sin()
});

/// Fonseca and Fleming: two shifted Gaussian bumps on `[-4, 4]^n`; the Pareto
/// set is the diagonal segment `x_1 = ... = x_n` in `[-1/sqrt(n), 1/sqrt(n)]`.
pub struct Ff {
    domain: DomainSpec,
}

impl Ff {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::config(format!("ff requires n >= 2, got {n}")));
        }
        Ok(Ff {
            domain: DomainSpec::cube(-4.0, 4.0, n)?,
        })
    }
}

impl DeterministicProblem for Ff {
    fn id(&self) -> &'static str {
        "ff"
    }

    fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn evaluate(&self, x: &MixedPoint) -> ObjectiveVector {
        assert_in_domain(self, x);
        let n = x.continuous.len() as f64;
        let shift = 1.0 / n.sqrt();
        let (mut s1, mut s2) = (0.0, 0.0);
        for &xi in &x.continuous {
            s1 += (xi - shift) * (xi - shift);
            s2 += (xi + shift) * (xi + shift);
        }
        ObjectiveVector::new(vec![1.0 - (-s1).exp(), 1.0 - (-s2).exp()]).expect("finite objectives")
    }
}

/// Distribution of the noise term `xi`.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    /// Standard deviation of `xi` (N(0, 0.1) is read as sigma = 0.1).
    pub sigma: f64,
    /// Draw an independent `xi` per objective instead of one per evaluation.
    pub per_objective: bool,
}

impl NoiseSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::config(format!(
                "noise sigma must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(NoiseSpec {
            sigma,
            per_objective: false,
        })
    }

    pub fn per_objective(mut self) -> Self {
        self.per_objective = true;
        self
    }
}

/// Multiplicative-noise wrapper turning a deterministic problem into a
/// [`NoisyProblem`].
pub struct WithNoise {
    base: Box<dyn DeterministicProblem>,
    noise: NoiseSpec,
    dist: Normal<f64>,
}

pub fn with_noise(base: Box<dyn DeterministicProblem>, noise: NoiseSpec) -> WithNoise {
    let dist = Normal::new(0.0, noise.sigma).expect("valid sigma");
    WithNoise { base, noise, dist }
}

impl WithNoise {
    pub fn noise(&self) -> NoiseSpec {
        self.noise
    }

    pub fn base_id(&self) -> &'static str {
        self.base.id()
    }
}

impl NoisyProblem for WithNoise {
    fn domain(&self) -> &DomainSpec {
        self.base.domain()
    }

    fn objectives(&self) -> usize {
        self.base.objectives()
    }

    fn evaluate_once(&self, x: &MixedPoint, rng: &mut dyn RngCore) -> ObjectiveVector {
        let truth = self.base.evaluate(x);
        let mut xi = self.dist.sample(rng);
        let values = truth
            .values()
            .iter()
            .map(|f0| {
                let v = f0 * (1.0 + xi);
                if self.noise.per_objective {
                    xi = self.dist.sample(rng);
                }
                v
            })
            .collect();
        ObjectiveVector::new(values).expect("finite observation")
    }

    fn true_values(&self, x: &MixedPoint) -> ObjectiveVector {
        self.base.evaluate(x)
    }
}

/// Problem registry keyed by string id.
pub fn deterministic_by_id(id: &str, n: usize) -> Result<Box<dyn DeterministicProblem>> {
    match id {
        "zdt1" => Ok(Box::new(Zdt1::new(n)?)),
        "zdt2" => Ok(Box::new(Zdt2::new(n)?)),
        "zdt3" => Ok(Box::new(Zdt3::new(n)?)),
        "ff" => Ok(Box::new(Ff::new(n)?)),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

pub fn noisy_by_id(id: &str, n: usize, noise: NoiseSpec) -> Result<WithNoise> {
    Ok(with_noise(deterministic_by_id(id, n)?, noise))
}

/// Dense sampling of the true efficient frontier, for metric oracles.
///
/// ZDT frontiers are the image of `x_1` on a uniform grid with `g = 1`
/// (ZDT3 filtered to its non-dominated subset); the FF frontier is the image
/// of the diagonal segment `x_i = t`, `t` in `[-1/sqrt(n), 1/sqrt(n)]`.
pub fn true_frontier(
    problem_id: &str,
    n: usize,
    resolution: usize,
) -> Result<Vec<ObjectiveVector>> {
    if resolution < 2 {
        return Err(Error::config(format!(
            "frontier resolution must be >= 2, got {resolution}"
        )));
    }
    let grid = |lo: f64, hi: f64| {
        (0..resolution).map(move |i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
    };
    let pts: Vec<ObjectiveVector> = match problem_id {
        "zdt1" => grid(0.0, 1.0)
            .map(|t| ObjectiveVector::new(vec![t, 1.0 - t.sqrt()]).unwrap())
            .collect(),
        "zdt2" => grid(0.0, 1.0)
            .map(|t| ObjectiveVector::new(vec![t, 1.0 - t * t]).unwrap())
            .collect(),
        "zdt3" => {
            let raw: Vec<ObjectiveVector> = grid(0.0, 1.0)
                .map(|t| {
                    let f2 = 1.0 - t.sqrt() - t * (10.0 * std::f64::consts::PI * t).sin();
                    ObjectiveVector::new(vec![t, f2]).unwrap()
                })
                .collect();
            // the sine term makes parts of the g = 1 curve dominated
            let keep = non_dominated_front(&raw)?;
            keep.into_iter().map(|i| raw[i].clone()).collect()
        }
        "ff" => {
            if n < 2 {
                return Err(Error::config("ff requires n >= 2".to_string()));
            }
            let shift = 1.0 / (n as f64).sqrt();
            let nf = n as f64;
            grid(-shift, shift)
                .map(|t| {
                    let f1 = 1.0 - (-nf * (t - shift) * (t - shift)).exp();
                    let f2 = 1.0 - (-nf * (t + shift) * (t + shift)).exp();
                    ObjectiveVector::new(vec![f1, f2]).unwrap()
                })
                .collect()
        }
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::brute_force_front;
    use rand::Rng;

    fn pt(xs: &[f64]) -> MixedPoint {
        MixedPoint::continuous_only(xs.to_vec())
    }

    fn assert_close(v: &ObjectiveVector, expect: &[f64], tol: f64) {
        for (a, b) in v.values().iter().zip(expect) {
            assert!((a - b).abs() <= tol, "{:?} vs {:?}", v.values(), expect);
        }
    }

    #[test]
    fn zdt1_anchor_points() {
        let p = Zdt1::new(3).unwrap();
        assert_close(&p.evaluate(&pt(&[0.0, 0.0, 0.0])), &[0.0, 1.0], 1e-15);
        assert_close(&p.evaluate(&pt(&[1.0, 0.0, 0.0])), &[1.0, 0.0], 1e-15);
    }

    #[test]
    fn zdt2_midpoint() {
        let p = Zdt2::new(4).unwrap();
        assert_close(&p.evaluate(&pt(&[0.5, 0.0, 0.0, 0.0])), &[0.5, 0.75], 1e-15);
    }

    #[test]
    fn zdt3_sine_vanishes_at_half() {
        let p = Zdt3::new(2).unwrap();
        // sin(5*pi) = 0, so f2 = 1 - sqrt(0.5)
        assert_close(
            &p.evaluate(&pt(&[0.5, 0.0])),
            &[0.5, 1.0 - 0.5f64.sqrt()],
            1e-12,
        );
    }

    #[test]
    fn ff_anchor_and_center() {
        for n in [2usize, 3, 7] {
            let p = Ff::new(n).unwrap();
            let shift = 1.0 / (n as f64).sqrt();
            let plus = pt(&vec![shift; n]);
            assert_close(&p.evaluate(&plus), &[0.0, 1.0 - (-4.0f64).exp()], 1e-12);
            let zero = pt(&vec![0.0; n]);
            let e1 = 1.0 - (-1.0f64).exp();
            assert_close(&p.evaluate(&zero), &[e1, e1], 1e-12);
        }
    }

    #[test]
    fn ff_symmetry_swaps_objectives() {
        let p = Ff::new(2).unwrap();
        let a = p.evaluate(&pt(&[0.3, -0.1]));
        let b = p.evaluate(&pt(&[-0.3, 0.1]));
        assert!((a[0] - b[1]).abs() < 1e-14);
        assert!((a[1] - b[0]).abs() < 1e-14);
    }

    #[test]
    #[should_panic(expected = "outside its domain")]
    fn out_of_domain_evaluation_panics() {
        let p = Zdt1::new(2).unwrap();
        p.evaluate(&pt(&[1.5, 0.0]));
    }

    #[test]
    fn zero_noise_equals_base() {
        let p = noisy_by_id("zdt1", 3, NoiseSpec::new(0.0).unwrap()).unwrap();
        let mut rng = crate::rng::derive(1, &[0]);
        for _ in 0..20 {
            let x = pt(&[
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
            ]);
            assert_eq!(
                p.evaluate_once(&x, &mut rng).values(),
                p.true_values(&x).values()
            );
        }
    }

    #[test]
    fn multiplicative_noise_fixes_zero_objective() {
        // f1(0, ..) = 0 for ZDT1, so the first observation is exactly 0
        let p = noisy_by_id("zdt1", 2, NoiseSpec::new(0.3).unwrap()).unwrap();
        let mut rng = crate::rng::derive(2, &[0]);
        let x = pt(&[0.0, 0.7]);
        for _ in 0..50 {
            assert_eq!(p.evaluate_once(&x, &mut rng)[0], 0.0);
        }
    }

    #[test]
    fn shared_draw_correlates_objectives() {
        let p = noisy_by_id("zdt1", 2, NoiseSpec::new(0.1).unwrap()).unwrap();
        let mut rng = crate::rng::derive(3, &[0]);
        let x = pt(&[0.4, 0.5]);
        let truth = p.true_values(&x);
        for _ in 0..20 {
            let obs = p.evaluate_once(&x, &mut rng);
            let rel0 = obs[0] / truth[0] - 1.0;
            let rel1 = obs[1] / truth[1] - 1.0;
            assert!(
                (rel0 - rel1).abs() < 1e-12,
                "shared xi must move both objectives equally"
            );
        }
    }

    #[test]
    fn per_objective_mode_decorrelates() {
        let p = with_noise(
            deterministic_by_id("zdt1", 2).unwrap(),
            NoiseSpec::new(0.1).unwrap().per_objective(),
        );
        let mut rng = crate::rng::derive(4, &[0]);
        let x = pt(&[0.4, 0.5]);
        let truth = p.true_values(&x);
        let equal = (0..50).all(|_| {
            let obs = p.evaluate_once(&x, &mut rng);
            ((obs[0] / truth[0]) - (obs[1] / truth[1])).abs() < 1e-12
        });
        assert!(!equal);
    }

    #[test]
    fn sample_mean_converges_to_truth() {
        // CLT bound: mean of 1e5 draws within 3 * sigma * |f0| / sqrt(1e5)
        let p = noisy_by_id("zdt1", 2, NoiseSpec::new(0.1).unwrap()).unwrap();
        let mut rng = crate::rng::derive(5, &[0]);
        let x = pt(&[0.6, 0.3]);
        let truth = p.true_values(&x);
        let draws = 100_000;
        let mut sums = [0.0; 2];
        for _ in 0..draws {
            let obs = p.evaluate_once(&x, &mut rng);
            sums[0] += obs[0];
            sums[1] += obs[1];
        }
        for l in 0..2 {
            let mean = sums[l] / draws as f64;
            let bound = 3.0 * 0.1 * truth[l].abs() / (draws as f64).sqrt();
            assert!(
                (mean - truth[l]).abs() <= bound,
                "objective {l}: {mean} vs {}",
                truth[l]
            );
        }
    }

    #[test]
    fn frontier_anchor_values() {
        let f = true_frontier("zdt1", 2, 3).unwrap();
        assert_eq!(f.len(), 3);
        assert_close(&f[0], &[0.0, 1.0], 1e-15);
        assert_close(&f[1], &[0.5, 1.0 - 0.5f64.sqrt()], 1e-15);
        assert_close(&f[2], &[1.0, 0.0], 1e-15);

        let f2 = true_frontier("zdt2", 2, 5).unwrap();
        assert_close(&f2[0], &[0.0, 1.0], 1e-15);
        assert_close(f2.last().unwrap(), &[1.0, 0.0], 1e-15);

        let ff = true_frontier("ff", 2, 101).unwrap();
        let e1 = 1.0 - (-1.0f64).exp();
        let mid = &ff[50]; // t = 0
        assert_close(mid, &[e1, e1], 1e-12);
    }

    #[test]
    fn frontiers_internally_non_dominated() {
        for id in ["zdt1", "zdt2", "zdt3", "ff"] {
            let f = true_frontier(id, 2, 400).unwrap();
            let front = brute_force_front(&f).unwrap();
            assert_eq!(front.len(), f.len(), "{id} frontier has dominated points");
        }
    }

    #[test]
    fn interior_points_dominated_by_frontier() {
        // any x with sum_{i>=2} x_i > 0 is dominated by the frontier point
        // sharing its x_1, since g > 1 lifts f2
        let p = Zdt1::new(3).unwrap();
        let mut rng = crate::rng::derive(6, &[0]);
        for _ in 0..200 {
            let x1 = rng.random_range(0.0..1.0);
            let x = pt(&[x1, rng.random_range(0.01..1.0), rng.random_range(0.0..1.0)]);
            let v = p.evaluate(&x);
            let on_front = ObjectiveVector::new(vec![x1, 1.0 - x1.sqrt()]).unwrap();
            assert!(crate::domain::dominates(&on_front, &v));
        }
    }

    #[test]
    fn registry_rejects_unknown_ids() {
        assert!(matches!(
            deterministic_by_id("zdt9", 2),
            Err(Error::UnknownProblem(_))
        ));
        assert!(true_frontier("nope", 2, 10).is_err());
    }
}
