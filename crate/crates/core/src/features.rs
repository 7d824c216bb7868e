//! The four numeric clustering features and population min-max scaling.

use serde::{Deserialize, Serialize};

use crate::domain::{FeatureVector, Journey, OfflineRestLocation};
use crate::Error;

const MS_PER_DAY: f64 = 86_400_000.0;

/// Computes the numeric feature vector for one consumer.
///
/// Journey frequency is journeys per day over the trajectory span (first to
/// last event). A degenerate zero-length span is treated as a single day.
/// The rest-location divisor is floored at one so consumers without any rest
/// locations stay representable.
pub fn compute_features(journeys: &[Journey], orls: &[OfflineRestLocation]) -> FeatureVector {
    if journeys.is_empty() {
        return FeatureVector::zero();
    }
    let journey_count = journeys.len() as f64;
    let avg_duration =
        journeys.iter().map(|j| j.duration_ms() as f64).sum::<f64>() / journey_count;
    let span_ms = journeys[journeys.len() - 1].last_timestamp_ms() - journeys[0].first_timestamp_ms();
    let span_days = if span_ms > 0 { span_ms as f64 / MS_PER_DAY } else { 1.0 };
    let locations_per_journey = journeys
        .iter()
        .map(|j| j.location_sequence().len() as f64)
        .sum::<f64>()
        / journey_count;
    FeatureVector {
        avg_journey_duration_ms: avg_duration,
        journey_frequency_per_day: journey_count / span_days,
        locations_per_journey,
        journeys_per_orl: journey_count / orls.len().max(1) as f64,
    }
}

/// Per-feature minimum and maximum over a population, in the fixed component
/// order of [`FeatureVector::as_array`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mins: [f64; 4],
    pub maxs: [f64; 4],
}

/// Fits min-max bounds over a population of feature vectors.
pub fn fit_scaler(vectors: &[FeatureVector]) -> Result<ScalerParams, Error> {
    let mut iter = vectors.iter();
    let first = iter.next().ok_or(Error::EmptyPopulation)?.as_array();
    let mut params = ScalerParams {
        mins: first,
        maxs: first,
    };
    for v in iter {
        for (i, x) in v.as_array().into_iter().enumerate() {
            params.mins[i] = params.mins[i].min(x);
            params.maxs[i] = params.maxs[i].max(x);
        }
    }
    Ok(params)
}

/// Scales one feature vector to `[0, 1]^4` against fitted bounds. Values
/// outside the fitted range clamp; a degenerate feature (min == max) maps
/// to zero.
pub fn scale(v: &FeatureVector, params: &ScalerParams) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (i, x) in v.as_array().into_iter().enumerate() {
        let range = params.maxs[i] - params.mins[i];
        out[i] = if range > 0.0 {
            ((x - params.mins[i]) / range).clamp(0.0, 1.0)
        } else {
            0.0
        };
    }
    out
}
