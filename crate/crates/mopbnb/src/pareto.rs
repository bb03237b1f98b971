//! Extraction of the non-dominated subset of a finite set of objective
//! vectors. All copies of a duplicated non-dominated vector are retained, so
//! every region that produced an equally good point keeps its front member.

use crate::domain::{dominates_slices, ObjectiveVector};
use crate::error::{Error, Result};

/// The current non-dominated sample set: `(sample_id, estimated objectives)`
/// pairs, none of which dominates another.
#[derive(Debug, Clone, Default)]
pub struct ParetoArchive {
    pub entries: Vec<(u64, ObjectiveVector)>,
}

impl ParetoArchive {
    /// Rebuilds the archive as the non-dominated front of `candidates`.
    pub fn from_candidates(candidates: &[(u64, ObjectiveVector)]) -> Result<Self> {
        let vectors: Vec<ObjectiveVector> = candidates.iter().map(|(_, v)| v.clone()).collect();
        let front = non_dominated_front(&vectors)?;
        Ok(ParetoArchive {
            entries: front.into_iter().map(|i| candidates[i].clone()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_sample(&self, id: u64) -> bool {
        self.entries.iter().any(|(sid, _)| *sid == id)
    }

    pub fn vectors(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|(_, v)| v.clone()).collect()
    }
}

fn check_uniform_m(vectors: &[ObjectiveVector]) -> Result<usize> {
    let m = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: bad.len(),
        });
    }
    Ok(m)
}

/// Indices of the vectors not dominated by any other, in ascending order.
///
/// Bi-objective inputs use a sort-and-sweep; three or more objectives fall
/// back to a pairwise scan. Duplicates of a non-dominated vector are all
/// returned. Empty input yields an empty set.
pub fn non_dominated_front(vectors: &[ObjectiveVector]) -> Result<Vec<usize>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let m = check_uniform_m(vectors)?;
    if m == 2 {
        Ok(front_sweep_2d(vectors))
    } else {
        Ok(front_pairwise(vectors))
    }
}

/// Sort by the first objective (ties by the second), sweep keeping the
/// running minimum of the second objective. A point survives iff its group's
/// minimal second objective beats every strictly-smaller-f1 point.
fn front_sweep_2d(vectors: &[ObjectiveVector]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (&vectors[a], &vectors[b]);
        va[0].total_cmp(&vb[0]).then(va[1].total_cmp(&vb[1]))
    });

    let mut selected = Vec::new();
    let mut best_f2 = f64::INFINITY; // min f2 among points with strictly smaller f1
    let mut i = 0;
    while i < order.len() {
        // group of equal f1
        let f1 = vectors[order[i]][0];
        let mut j = i;
        while j < order.len() && vectors[order[j]][0] == f1 {
            j += 1;
        }
        // within the group the sort put minimal f2 first; only its ties survive
        let group_min_f2 = vectors[order[i]][1];
        if group_min_f2 < best_f2 {
            for &idx in &order[i..j] {
                if vectors[idx][1] == group_min_f2 {
                    selected.push(idx);
                }
            }
            best_f2 = group_min_f2;
        }
        i = j;
    }
    selected.sort_unstable();
    selected
}

fn front_pairwise(vectors: &[ObjectiveVector]) -> Vec<usize> {
    (0..vectors.len())
        .filter(|&i| {
            !vectors
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && dominates_slices(other.values(), vectors[i].values()))
        })
        .collect()
}

/// All-pairs reference implementation, kept independent of
/// [`non_dominated_front`] as the equivalence oracle.
pub fn brute_force_front(vectors: &[ObjectiveVector]) -> Result<Vec<usize>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    check_uniform_m(vectors)?;
    let mut keep = Vec::new();
    for i in 0..vectors.len() {
        let mut dominated = false;
        for j in 0..vectors.len() {
            if i != j && dominates_slices(vectors[j].values(), vectors[i].values()) {
                dominated = true;
                break;
            }
        }
        if !dominated {
            keep.push(i);
        }
    }
    Ok(keep)
}
