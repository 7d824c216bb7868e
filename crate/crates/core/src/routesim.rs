//! Longest-common-substring similarity over location sequences.
//!
//! Similarity is the length of the longest contiguous run of locations two
//! trajectories share, matched by exact location-name equality over the
//! whole-trajectory sequence (journey boundaries ignored).

use crate::domain::ConsumerProfile;
use crate::Error;

/// Length of the longest contiguous run common to both sequences.
/// Dynamic programming over a rolling row, O(|a| * |b|) time, O(|b|) space.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut current = vec![0usize; b.len() + 1];
    let mut best = 0;
    for item in a {
        for (j, other) in b.iter().enumerate() {
            current[j + 1] = if item == other { prev[j] + 1 } else { 0 };
            best = best.max(current[j + 1]);
        }
        std::mem::swap(&mut prev, &mut current);
    }
    best
}

/// Ranks candidate routes by shared-subroute length against a target route,
/// descending, ties by device id. A candidate with the target's own id is
/// excluded.
pub fn rank_by_shared_route(
    target_id: &str,
    target_route: &[String],
    candidates: &[(String, Vec<String>)],
    k: usize,
) -> Result<Vec<(String, usize)>, Error> {
    if candidates.is_empty() {
        return Err(Error::EmptyRankPopulation);
    }
    let mut scored: Vec<(String, usize)> = candidates
        .iter()
        .filter(|(id, _)| id != target_id)
        .map(|(id, route)| (id.clone(), lcs_length(target_route, route)))
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}

/// Ranks the population by shared-subroute length against `target`,
/// descending, ties by device id. The target itself is excluded.
pub fn top_k_similar(
    target: &ConsumerProfile,
    population: &[ConsumerProfile],
    k: usize,
) -> Result<Vec<(String, usize)>, Error> {
    let candidates: Vec<(String, Vec<String>)> = population
        .iter()
        .map(|p| (p.device_id.clone(), p.trajectory_locations()))
        .collect();
    rank_by_shared_route(&target.device_id, &target.trajectory_locations(), &candidates, k)
}
