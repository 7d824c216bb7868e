//! Per-device assembly: raw observations in, a consumer profile out.
//!
//! Split in two so staged callers can persist the intermediate event
//! stream: [`preprocess_device`] yields the filtered split events, and
//! [`derive_artifacts`] turns events into the labelled profile.

use serde::{Deserialize, Serialize};

use crate::domain::{ConsumerProfile, TrajectoryEvent, WirelessObservation};
use crate::features::compute_features;
use crate::preprocess::{
    apply_trajectory_filters, extract_journeys, filter_impossible, sort_observations,
    split_events, DiscardReason, DiscardedObservation, PreprocessConfig, TrajectoryVerdict,
};
use crate::semantics::{
    build_journey_string, condense_journeys, detect_orls, label_home_work, score_orls,
    CondensedJourneyEntry, JourneyAnnotation, ScoringConfig,
};

/// Outcome of the observation-level stage for one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PreprocessOutcome {
    /// The trajectory passed all validity filters.
    Kept(Vec<TrajectoryEvent>),
    Discarded(DiscardReason),
}

/// Sorts, drops impossible overlaps, splits into events and applies the
/// trajectory validity filters.
pub fn preprocess_device(
    mut observations: Vec<WirelessObservation>,
    config: &PreprocessConfig,
) -> (PreprocessOutcome, Vec<DiscardedObservation>) {
    sort_observations(&mut observations);
    let (kept, discarded) = filter_impossible(observations);
    let events = split_events(&kept);
    match apply_trajectory_filters(&events, config) {
        TrajectoryVerdict::Keep => (PreprocessOutcome::Kept(events), discarded),
        TrajectoryVerdict::Discard(reason) => (PreprocessOutcome::Discarded(reason), discarded),
    }
}

/// A device that survived the trajectory filters, with everything derived
/// from its event stream.
#[derive(Debug, Clone)]
pub struct DeviceArtifacts {
    pub profile: ConsumerProfile,
    pub annotation: JourneyAnnotation,
    pub condensed: Vec<CondensedJourneyEntry>,
}

/// Journeys, rest locations, labels, journey strings, condensed list and
/// features for one already-preprocessed device.
pub fn derive_artifacts(
    device_id: &str,
    events: &[TrajectoryEvent],
    preprocess: &PreprocessConfig,
    scoring: &ScoringConfig,
) -> DeviceArtifacts {
    let journeys = extract_journeys(events, preprocess.max_gap_in_journey_ms);
    let orls = detect_orls(events, preprocess.min_rest_for_orl_ms);
    let orls = score_orls(orls, events, scoring);
    let labels = label_home_work(&orls);
    let annotation = build_journey_string(&journeys, &labels);
    let condensed = condense_journeys(&journeys, scoring.timezone);
    let features = compute_features(&journeys, &orls);
    let profile = ConsumerProfile {
        device_id: device_id.to_string(),
        journeys,
        orls,
        labels,
        pattern_counts: annotation.pattern_counts.clone(),
        features,
    };
    DeviceArtifacts {
        profile,
        annotation,
        condensed,
    }
}

/// Outcome of processing one device end to end.
#[derive(Debug, Clone)]
pub enum DeviceOutcome {
    Kept(Box<DeviceArtifacts>),
    Discarded(DiscardReason),
}

/// Runs both stages in order.
pub fn process_device(
    device_id: &str,
    observations: Vec<WirelessObservation>,
    preprocess: &PreprocessConfig,
    scoring: &ScoringConfig,
) -> (DeviceOutcome, Vec<DiscardedObservation>) {
    let (outcome, discarded) = preprocess_device(observations, preprocess);
    match outcome {
        PreprocessOutcome::Kept(events) => (
            DeviceOutcome::Kept(Box::new(derive_artifacts(
                device_id, &events, preprocess, scoring,
            ))),
            discarded,
        ),
        PreprocessOutcome::Discarded(reason) => (DeviceOutcome::Discarded(reason), discarded),
    }
}
