//! Geometry of the mixed continuous/integer search space: points, boxes,
//! normalized distance, and Pareto dominance.
//!
//! All box membership uses half-open intervals `[lo, hi)` on continuous
//! dimensions, except that the face touching the domain's global upper bound
//! is closed. Integer ranges are inclusive. Together these make every
//! recursive partition of the domain exact: each domain point belongs to
//! exactly one leaf box.

use crate::error::{Error, Result};

/// Bounds of the feasible box domain: `n1` continuous dimensions followed by
/// `n2` integer dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    continuous: Vec<(f64, f64)>,
    integer: Vec<(i64, i64)>,
}

impl DomainSpec {
    pub fn new(continuous: Vec<(f64, f64)>, integer: Vec<(i64, i64)>) -> Result<Self> {
        if continuous.is_empty() && integer.is_empty() {
            return Err(Error::config("domain must have at least one dimension"));
        }
        for &(lo, hi) in &continuous {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::config(format!(
                    "continuous bounds must satisfy lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        for &(lo, hi) in &integer {
            if lo > hi {
                return Err(Error::config(format!(
                    "integer bounds must satisfy lower <= upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(DomainSpec {
            continuous,
            integer,
        })
    }

    /// Hypercube `[lo, hi]^n`, all dimensions continuous.
    pub fn cube(lo: f64, hi: f64, n: usize) -> Result<Self> {
        DomainSpec::new(vec![(lo, hi); n], Vec::new())
    }

    pub fn continuous_bounds(&self) -> &[(f64, f64)] {
        &self.continuous
    }

    pub fn integer_bounds(&self) -> &[(i64, i64)] {
        &self.integer
    }

    pub fn n1(&self) -> usize {
        self.continuous.len()
    }

    pub fn n2(&self) -> usize {
        self.integer.len()
    }

    /// Total dimension count `n = n1 + n2`.
    pub fn dim(&self) -> usize {
        self.continuous.len() + self.integer.len()
    }

    pub fn contains(&self, x: &MixedPoint) -> bool {
        x.continuous.len() == self.n1()
            && x.integer.len() == self.n2()
            && x.continuous
                .iter()
                .zip(&self.continuous)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
            && x.integer
                .iter()
                .zip(&self.integer)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Affinely rescales every coordinate to `[0, 1]` by its domain bounds.
    /// Integer dimensions with `lower == upper` map to 0.
    pub fn normalize(&self, x: &MixedPoint) -> Vec<f64> {
        debug_assert_eq!(x.continuous.len(), self.n1());
        debug_assert_eq!(x.integer.len(), self.n2());
        let mut out = Vec::with_capacity(self.dim());
        for (&v, &(lo, hi)) in x.continuous.iter().zip(&self.continuous) {
            out.push((v - lo) / (hi - lo));
        }
        for (&v, &(lo, hi)) in x.integer.iter().zip(&self.integer) {
            if lo == hi {
                out.push(0.0);
            } else {
                out.push((v - lo) as f64 / (hi - lo) as f64);
            }
        }
        out
    }
}

/// A candidate solution with continuous and integer coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPoint {
    pub continuous: Vec<f64>,
    pub integer: Vec<i64>,
}

impl MixedPoint {
    pub fn continuous_only(continuous: Vec<f64>) -> Self {
        MixedPoint {
            continuous,
            integer: Vec::new(),
        }
    }

    /// Validated construction: dimensions must match `domain` and every
    /// coordinate must lie within its bounds.
    pub fn new_in(domain: &DomainSpec, continuous: Vec<f64>, integer: Vec<i64>) -> Result<Self> {
        if continuous.len() != domain.n1() || integer.len() != domain.n2() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: continuous.len() + integer.len(),
            });
        }
        let p = MixedPoint {
            continuous,
            integer,
        };
        if !domain.contains(&p) {
            return Err(Error::config(format!("point {p:?} outside domain bounds")));
        }
        Ok(p)
    }
}

/// Euclidean distance between two points after rescaling every dimension to
/// `[0, 1]` by its domain bounds. One radius is then meaningful across
/// heterogeneous scales and mixed variable kinds.
pub fn normalized_distance(a: &MixedPoint, b: &MixedPoint, domain: &DomainSpec) -> f64 {
    let na = domain.normalize(a);
    let nb = domain.normalize(b);
    normalized_distance_coords(&na, &nb)
}

pub(crate) fn normalized_distance_coords(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A vector of `m >= 2` finite objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::config(format!(
                "objective vector needs m >= 2 entries, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config(format!(
                "non-finite objective value in {values:?}"
            )));
        }
        Ok(ObjectiveVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for ObjectiveVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Pareto dominance for minimization: `u` dominates `v` when `u <= v` in
/// every objective and `u < v` in at least one.
///
/// Panics on length mismatch; vectors compared within a run always share `m`.
pub fn dominates(u: &ObjectiveVector, v: &ObjectiveVector) -> bool {
    assert_eq!(u.len(), v.len(), "objective vector length mismatch");
    dominates_slices(u.values(), v.values())
}

pub(crate) fn dominates_slices(u: &[f64], v: &[f64]) -> bool {
    let mut strict = false;
    for (a, b) in u.iter().zip(v) {
        if a > b {
            return false;
        }
        if a < b {
            strict = true;
        }
    }
    strict
}

/// Classification of a subregion in the branch-and-bound partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionStatus {
    Active,
    Pruned,
    /// Branched into children; no longer a leaf of the partition.
    Split,
}

/// Axis-aligned sub-box of the domain: per-dimension continuous intervals
/// (half-open, see module docs) and inclusive integer ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    pub continuous: Vec<(f64, f64)>,
    pub integer: Vec<(i64, i64)>,
}

impl BoxBounds {
    /// The whole domain as one box.
    pub fn full(domain: &DomainSpec) -> Self {
        BoxBounds {
            continuous: domain.continuous_bounds().to_vec(),
            integer: domain.integer_bounds().to_vec(),
        }
    }

    /// Membership under the partition convention: continuous `[lo, hi)` with
    /// the global upper face closed, integer ranges inclusive.
    pub fn contains(&self, x: &MixedPoint, domain: &DomainSpec) -> bool {
        assert_eq!(
            x.continuous.len(),
            self.continuous.len(),
            "dimension mismatch"
        );
        assert_eq!(x.integer.len(), self.integer.len(), "dimension mismatch");
        for ((&v, &(lo, hi)), &(_, dom_hi)) in x
            .continuous
            .iter()
            .zip(&self.continuous)
            .zip(domain.continuous_bounds())
        {
            let upper_ok = if hi == dom_hi { v <= hi } else { v < hi };
            if !(v >= lo && upper_ok) {
                return false;
            }
        }
        x.integer
            .iter()
            .zip(&self.integer)
            .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Width of dimension `dim` (continuous dims first, then integer) after
    /// rescaling by the domain bounds. Integer width is `(hi - lo) / range`.
    pub fn normalized_width(&self, dim: usize, domain: &DomainSpec) -> f64 {
        let n1 = self.continuous.len();
        if dim < n1 {
            let (lo, hi) = self.continuous[dim];
            let (dlo, dhi) = domain.continuous_bounds()[dim];
            (hi - lo) / (dhi - dlo)
        } else {
            let (lo, hi) = self.integer[dim - n1];
            let (dlo, dhi) = domain.integer_bounds()[dim - n1];
            if dlo == dhi {
                0.0
            } else {
                (hi - lo) as f64 / (dhi - dlo) as f64
            }
        }
    }

    /// Fraction of the domain's measure covered by this box: the product of
    /// normalized widths, with integer dimensions counting lattice values.
    pub fn normalized_volume(&self, domain: &DomainSpec) -> f64 {
        let mut v = 1.0;
        for (&(lo, hi), &(dlo, dhi)) in self.continuous.iter().zip(domain.continuous_bounds()) {
            v *= (hi - lo) / (dhi - dlo);
        }
        for (&(lo, hi), &(dlo, dhi)) in self.integer.iter().zip(domain.integer_bounds()) {
            v *= (hi - lo + 1) as f64 / (dhi - dlo + 1) as f64;
        }
        v
    }

    /// Widest normalized dimension and its width; ties break toward the
    /// lowest index. Considers only splittable dimensions when
    /// `splittable_only` (integer dims need at least two values).
    pub fn widest_dim(&self, domain: &DomainSpec, splittable_only: bool) -> Option<(usize, f64)> {
        let n1 = self.continuous.len();
        let mut best: Option<(usize, f64)> = None;
        for dim in 0..self.continuous.len() + self.integer.len() {
            if splittable_only && dim >= n1 {
                let (lo, hi) = self.integer[dim - n1];
                if hi - lo < 1 {
                    continue;
                }
            }
            let w = self.normalized_width(dim, domain);
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((dim, w));
            }
        }
        best
    }
}

/// A node of the recursive partition: a box plus its classification,
/// lineage, and the ids of the samples currently attributed to it.
#[derive(Debug, Clone)]
pub struct Subregion {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub bounds: BoxBounds,
    pub status: RegionStatus,
    /// Iteration at which the region was pruned; cleared on reclassification.
    pub pruned_at: Option<u32>,
    pub sample_ids: Vec<u64>,
}

impl Subregion {
    pub fn new(id: u64, parent_id: Option<u64>, bounds: BoxBounds) -> Self {
        Subregion {
            id,
            parent_id,
            bounds,
            status: RegionStatus::Active,
            pruned_at: None,
            sample_ids: Vec::new(),
        }
    }

    pub fn contains(&self, x: &MixedPoint, domain: &DomainSpec) -> bool {
        self.bounds.contains(x, domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(xs: &[f64]) -> MixedPoint {
        MixedPoint::continuous_only(xs.to_vec())
    }

    fn obj(vs: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(vs.to_vec()).unwrap()
    }

    #[test]
    fn contains_interior_point() {
        let domain = DomainSpec::cube(0.0, 1.0, 2).unwrap();
        let region = Subregion::new(0, None, BoxBounds::full(&domain));
        assert!(region.contains(&pt(&[0.5, 0.5]), &domain));
    }

    #[test]
    fn contains_boundary_belongs_to_right_sibling() {
        let domain = DomainSpec::cube(0.0, 1.0, 2).unwrap();
        let left = Subregion::new(
            0,
            None,
            BoxBounds {
                continuous: vec![(0.0, 0.5), (0.0, 1.0)],
                integer: vec![],
            },
        );
        let right = Subregion::new(
            1,
            None,
            BoxBounds {
                continuous: vec![(0.5, 1.0), (0.0, 1.0)],
                integer: vec![],
            },
        );
        let x = pt(&[0.5, 0.2]);
        assert!(!left.contains(&x, &domain));
        assert!(right.contains(&x, &domain));
    }

    #[test]
    fn contains_global_upper_face_closed() {
        let domain = DomainSpec::cube(0.0, 1.0, 2).unwrap();
        let upper = Subregion::new(
            0,
            None,
            BoxBounds {
                continuous: vec![(0.5, 1.0), (0.5, 1.0)],
                integer: vec![],
            },
        );
        assert!(upper.contains(&pt(&[1.0, 1.0]), &domain));
    }

    #[test]
    fn integer_membership_inclusive() {
        let domain = DomainSpec::new(vec![], vec![(0, 4)]).unwrap();
        let region = Subregion::new(
            0,
            None,
            BoxBounds {
                continuous: vec![],
                integer: vec![(0, 2)],
            },
        );
        let p = |v| MixedPoint {
            continuous: vec![],
            integer: vec![v],
        };
        assert!(region.contains(&p(0), &domain));
        assert!(region.contains(&p(2), &domain));
        assert!(!region.contains(&p(3), &domain));
    }

    #[test]
    fn normalized_distance_identity() {
        let domain = DomainSpec::cube(0.0, 10.0, 2).unwrap();
        let a = pt(&[3.0, 7.0]);
        assert_eq!(normalized_distance(&a, &a, &domain), 0.0);
    }

    #[test]
    fn normalized_distance_full_range_corners() {
        let domain = DomainSpec::cube(0.0, 10.0, 2).unwrap();
        let d = normalized_distance(&pt(&[0.0, 0.0]), &pt(&[10.0, 10.0]), &domain);
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalized_distance_ff_scale() {
        // [-4, 4]^2: a step of 0.8 along one axis is 0.1 of the range.
        let domain = DomainSpec::cube(-4.0, 4.0, 2).unwrap();
        let d = normalized_distance(&pt(&[0.0, 0.0]), &pt(&[0.8, 0.0]), &domain);
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn normalized_distance_degenerate_integer_dim() {
        let domain = DomainSpec::new(vec![(0.0, 1.0)], vec![(3, 3)]).unwrap();
        let a = MixedPoint {
            continuous: vec![0.2],
            integer: vec![3],
        };
        let b = MixedPoint {
            continuous: vec![0.7],
            integer: vec![3],
        };
        assert!((normalized_distance(&a, &b, &domain) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dominates_examples() {
        assert!(dominates(&obj(&[1.0, 2.0]), &obj(&[2.0, 3.0])));
        assert!(!dominates(&obj(&[1.0, 2.0]), &obj(&[1.0, 2.0])));
        assert!(!dominates(&obj(&[1.0, 3.0]), &obj(&[2.0, 2.0])));
    }

    #[test]
    fn dominates_irreflexive_and_transitive() {
        let mut rng = crate::rng::derive(7, &[99]);
        use rand::Rng;
        for _ in 0..500 {
            let m = rng.random_range(2..5usize);
            let a: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
            // b worsens a in some coordinates, c worsens b
            let b: Vec<f64> = a
                .iter()
                .map(|&v| {
                    v + if rng.random_bool(0.7) {
                        rng.random_range(0.0..0.5)
                    } else {
                        0.0
                    }
                })
                .collect();
            let c: Vec<f64> = b
                .iter()
                .map(|&v| {
                    v + if rng.random_bool(0.7) {
                        rng.random_range(0.0..0.5)
                    } else {
                        0.0
                    }
                })
                .collect();
            let (a, b, c) = (obj(&a), obj(&b), obj(&c));
            assert!(!dominates(&a, &a));
            if dominates(&a, &b) && dominates(&b, &c) {
                assert!(dominates(&a, &c));
            }
        }
    }

    #[test]
    fn normalized_distance_is_a_metric() {
        use rand::Rng;
        let domain = DomainSpec::new(vec![(0.0, 3.0), (-2.0, 2.0)], vec![(0, 5)]).unwrap();
        let mut rng = crate::rng::derive(11, &[100]);
        let sample = |rng: &mut rand_chacha::ChaCha8Rng| MixedPoint {
            continuous: vec![rng.random_range(0.0..3.0), rng.random_range(-2.0..2.0)],
            integer: vec![rng.random_range(0..=5)],
        };
        for _ in 0..500 {
            let (a, b, c) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
            let dab = normalized_distance(&a, &b, &domain);
            let dba = normalized_distance(&b, &a, &domain);
            let dac = normalized_distance(&a, &c, &domain);
            let dcb = normalized_distance(&c, &b, &domain);
            assert!((dab - dba).abs() <= 1e-12);
            assert!(dab <= dac + dcb + 1e-12);
        }
    }

    #[test]
    fn objective_vector_rejects_bad_input() {
        assert!(ObjectiveVector::new(vec![1.0]).is_err());
        assert!(ObjectiveVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(ObjectiveVector::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn domain_validation() {
        assert!(DomainSpec::new(vec![], vec![]).is_err());
        assert!(DomainSpec::new(vec![(1.0, 1.0)], vec![]).is_err());
        assert!(DomainSpec::new(vec![], vec![(4, 2)]).is_err());
        assert!(DomainSpec::new(vec![(0.0, 1.0)], vec![(2, 2)]).is_ok());
    }

    #[test]
    fn widest_dim_prefers_lowest_index_on_ties() {
        let domain = DomainSpec::cube(0.0, 1.0, 2).unwrap();
        let b = BoxBounds::full(&domain);
        assert_eq!(b.widest_dim(&domain, true), Some((0, 1.0)));
    }
}
