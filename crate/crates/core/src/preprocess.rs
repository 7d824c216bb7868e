//! Raw observations to filtered event streams and journeys.
//!
//! Stages run per device: drop physically impossible overlaps, split each
//! surviving observation into entry/exit points, apply the trajectory-level
//! validity filters, then cut the event stream into journeys wherever the
//! gap between consecutive events exceeds the configured maximum.

use serde::{Deserialize, Serialize};

use crate::domain::{EventKind, Journey, TrajectoryEvent, WirelessObservation};

/// Thresholds controlling preprocessing. Defaults follow the standard run
/// parameters: 80-minute journey gap, 30-minute rest threshold, 10-location
/// minimum, 1-day minimum span, and a 2000-01-01T00:00Z timestamp cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub max_gap_in_journey_ms: i64,
    pub min_rest_for_orl_ms: i64,
    pub min_trajectory_length: usize,
    pub min_days_data: u32,
    pub earliest_valid_timestamp_ms: i64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            max_gap_in_journey_ms: 1000 * 60 * 80,
            min_rest_for_orl_ms: 1000 * 60 * 30,
            min_trajectory_length: 10,
            min_days_data: 1,
            // The cutoff parameter is nominally in milliseconds but its
            // standard value (946684800) only makes sense as seconds:
            // interpreted as ms it would fall inside 1970. We use the
            // 2000-01-01T00:00Z instant in milliseconds.
            earliest_valid_timestamp_ms: 946_684_800_000,
        }
    }
}

/// An observation removed by [`filter_impossible`], with the conflicting
/// observation it overlapped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscardedObservation {
    pub observation: WirelessObservation,
    pub conflicts_with: String,
}

/// Drops observations that would require the customer to be in two places at
/// once: if the previous kept observation exits strictly after the next one
/// enters and the locations differ, the next one is discarded. Same-location
/// overlaps are kept and split later. The scan continues comparing against
/// the last surviving observation.
///
/// Input must be sorted by entry time.
pub fn filter_impossible(
    observations: Vec<WirelessObservation>,
) -> (Vec<WirelessObservation>, Vec<DiscardedObservation>) {
    let mut kept: Vec<WirelessObservation> = Vec::with_capacity(observations.len());
    let mut discarded = Vec::new();
    for obs in observations {
        match kept.last() {
            Some(prev) if prev.exit_ms > obs.entry_ms && prev.location != obs.location => {
                discarded.push(DiscardedObservation {
                    conflicts_with: prev.observation_id.clone(),
                    observation: obs,
                });
            }
            _ => kept.push(obs),
        }
    }
    (kept, discarded)
}

/// Sorts observations of one device by entry time, breaking ties by exit
/// time then observation id so the pipeline is deterministic.
pub fn sort_observations(observations: &mut [WirelessObservation]) {
    observations.sort_by(|a, b| {
        (a.entry_ms, a.exit_ms, &a.observation_id).cmp(&(b.entry_ms, b.exit_ms, &b.observation_id))
    });
}

/// Splits each observation into one entry and one exit event and returns the
/// merged chronological stream. Overlapping ranges (a phone inside both a WAP
/// and a BLE zone) interleave instead of being dropped. Ties are ordered
/// entry-before-exit, then by observation id.
pub fn split_events(observations: &[WirelessObservation]) -> Vec<TrajectoryEvent> {
    let mut events = Vec::with_capacity(observations.len() * 2);
    for obs in observations {
        events.push(TrajectoryEvent {
            source_observation_id: obs.observation_id.clone(),
            kind: EventKind::Entry,
            location: obs.location.clone(),
            timestamp_ms: obs.entry_ms,
        });
        events.push(TrajectoryEvent {
            source_observation_id: obs.observation_id.clone(),
            kind: EventKind::Exit,
            location: obs.location.clone(),
            timestamp_ms: obs.exit_ms,
        });
    }
    events.sort_by(|a, b| {
        (a.timestamp_ms, a.kind, &a.source_observation_id).cmp(&(
            b.timestamp_ms,
            b.kind,
            &b.source_observation_id,
        ))
    });
    events
}

/// Why a whole trajectory was removed, in the order the filters run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscardReason {
    BeforeEpochCutoff,
    TooFewPoints,
    TooShortSpan,
}

impl DiscardReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiscardReason::BeforeEpochCutoff => "before_epoch_cutoff",
            DiscardReason::TooFewPoints => "too_few_points",
            DiscardReason::TooShortSpan => "too_short_span",
        }
    }
}

/// Outcome of the trajectory-level validity filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryVerdict {
    Keep,
    Discard(DiscardReason),
}

/// Applies the trajectory validity filters to a device's split events.
/// The first failing filter wins, checked in this order: any timestamp
/// before the epoch cutoff removes the whole trajectory, then too few
/// points, then a span shorter than the minimum number of days.
pub fn apply_trajectory_filters(
    events: &[TrajectoryEvent],
    config: &PreprocessConfig,
) -> TrajectoryVerdict {
    if events
        .iter()
        .any(|e| e.timestamp_ms < config.earliest_valid_timestamp_ms)
    {
        return TrajectoryVerdict::Discard(DiscardReason::BeforeEpochCutoff);
    }
    if events.len() < config.min_trajectory_length {
        return TrajectoryVerdict::Discard(DiscardReason::TooFewPoints);
    }
    let span_ms = match (events.first(), events.last()) {
        (Some(first), Some(last)) => last.timestamp_ms - first.timestamp_ms,
        _ => 0,
    };
    if span_ms < i64::from(config.min_days_data) * 86_400_000 {
        return TrajectoryVerdict::Discard(DiscardReason::TooShortSpan);
    }
    TrajectoryVerdict::Keep
}

/// Greedy single pass over consecutive event pairs: a gap strictly greater
/// than `max_gap_ms` starts a new journey. Concatenating the journeys
/// reproduces the input.
pub fn extract_journeys(events: &[TrajectoryEvent], max_gap_ms: i64) -> Vec<Journey> {
    let mut journeys = Vec::new();
    let mut current: Vec<TrajectoryEvent> = Vec::new();
    for event in events {
        if let Some(last) = current.last() {
            if event.timestamp_ms - last.timestamp_ms > max_gap_ms {
                journeys.push(
                    Journey::new(std::mem::take(&mut current), max_gap_ms)
                        .expect("segment satisfies journey invariants by construction"),
                );
            }
        }
        current.push(event.clone());
    }
    if !current.is_empty() {
        journeys.push(
            Journey::new(current, max_gap_ms)
                .expect("segment satisfies journey invariants by construction"),
        );
    }
    journeys
}
