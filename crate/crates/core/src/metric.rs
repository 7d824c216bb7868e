//! Pattern distance and the five-component composite consumer distance.
//!
//! The composite distance averages five components with equal weight 0.20:
//! the scaled pattern distance plus the absolute differences of the four
//! min-max-scaled numeric features. All components lie in [0, 1], so the
//! total does as well. It is symmetric with d(x, x) = 0; the triangle
//! inequality is not claimed.

use crate::domain::{ConsumerProfile, PatternCounts};
use crate::features::{scale, ScalerParams};

/// Raw distance between two journey-pattern count maps: the summed counts of
/// patterns unique to either side, plus half the absolute count difference
/// for every shared pattern.
pub fn pattern_distance_raw(a: &PatternCounts, b: &PatternCounts) -> f64 {
    let mut distance = 0.0;
    let mut left = a.iter().peekable();
    let mut right = b.iter().peekable();
    loop {
        match (left.peek(), right.peek()) {
            (Some(&(ka, &ca)), Some(&(kb, &cb))) => match ka.cmp(kb) {
                std::cmp::Ordering::Less => {
                    distance += f64::from(ca);
                    left.next();
                }
                std::cmp::Ordering::Greater => {
                    distance += f64::from(cb);
                    right.next();
                }
                std::cmp::Ordering::Equal => {
                    distance += f64::from(ca.abs_diff(cb)) / 2.0;
                    left.next();
                    right.next();
                }
            },
            (Some(&(_, &ca)), None) => {
                distance += f64::from(ca);
                left.next();
            }
            (None, Some(&(_, &cb))) => {
                distance += f64::from(cb);
                right.next();
            }
            (None, None) => break,
        }
    }
    distance
}

fn total_count(map: &PatternCounts) -> f64 {
    map.values().map(|&c| f64::from(c)).sum()
}

/// Pattern distance scaled to [0, 1] by the combined journey counts of the
/// pair. Disjoint maps reach exactly 1; two empty maps are at distance 0.
pub fn pattern_distance_scaled(a: &PatternCounts, b: &PatternCounts) -> f64 {
    let total = total_count(a) + total_count(b);
    if total == 0.0 {
        return 0.0;
    }
    pattern_distance_raw(a, b) / total
}

/// The composite consumer distance: 0.2 times the sum of the scaled pattern
/// distance and the four absolute scaled feature differences.
pub fn composite_distance(a: &ConsumerProfile, b: &ConsumerProfile, scaler: &ScalerParams) -> f64 {
    let fa = scale(&a.features, scaler);
    let fb = scale(&b.features, scaler);
    let mut sum = pattern_distance_scaled(&a.pattern_counts, &b.pattern_counts);
    for i in 0..4 {
        sum += (fa[i] - fb[i]).abs();
    }
    0.2 * sum
}
