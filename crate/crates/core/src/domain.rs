//! Shared domain types and their invariants.
//!
//! Everything here is immutable after construction; constructors reject
//! invariant violations so downstream stages can rely on well-formed values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Kind of wireless device a record was captured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BeaconKind {
    Wap,
    Ble,
}

impl BeaconKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "WAP" => Some(BeaconKind::Wap),
            "BLE" => Some(BeaconKind::Ble),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BeaconKind::Wap => "WAP",
            BeaconKind::Ble => "BLE",
        }
    }
}

/// One raw (beacon, location, entry-time, exit-time) record for a device.
///
/// Timestamps are epoch milliseconds UTC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WirelessObservation {
    pub device_id: String,
    pub observation_id: String,
    pub beacon_id: String,
    pub beacon_kind: BeaconKind,
    /// Region within the location (e.g. a set of turnstiles). Carried but not
    /// used in any computation; rest locations are keyed on `location`.
    pub region_id: String,
    pub location: String,
    pub entry_ms: i64,
    pub exit_ms: i64,
}

impl WirelessObservation {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        device_id: impl Into<String>,
        observation_id: impl Into<String>,
        beacon_id: impl Into<String>,
        beacon_kind: BeaconKind,
        region_id: impl Into<String>,
        location: impl Into<String>,
        entry_ms: i64,
        exit_ms: i64,
    ) -> Result<Self, Error> {
        let observation_id = observation_id.into();
        let location = location.into();
        if entry_ms > exit_ms {
            return Err(Error::EntryAfterExit {
                observation_id,
                entry: entry_ms,
                exit: exit_ms,
            });
        }
        if location.is_empty() {
            return Err(Error::EmptyLocation(observation_id));
        }
        Ok(Self {
            device_id: device_id.into(),
            observation_id,
            beacon_id: beacon_id.into(),
            beacon_kind,
            region_id: region_id.into(),
            location,
            entry_ms,
            exit_ms,
        })
    }
}

/// Why an observation failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvalidReason {
    EntryAfterExit,
    EmptyLocation,
    BeforeEarliestTimestamp,
}

impl InvalidReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            InvalidReason::EntryAfterExit => "entry_after_exit",
            InvalidReason::EmptyLocation => "empty_location",
            InvalidReason::BeforeEarliestTimestamp => "before_earliest_timestamp",
        }
    }
}

/// Verdict of [`validate_observation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationVerdict {
    Valid,
    Invalid(InvalidReason),
}

/// Checks a raw record against the row-level validity rules. Checks run in a
/// fixed order: entry/exit ordering, location presence, timestamp cutoff.
pub fn validate_observation(
    obs: &WirelessObservation,
    earliest_valid_ms: i64,
) -> ObservationVerdict {
    if obs.entry_ms > obs.exit_ms {
        return ObservationVerdict::Invalid(InvalidReason::EntryAfterExit);
    }
    if obs.location.is_empty() {
        return ObservationVerdict::Invalid(InvalidReason::EmptyLocation);
    }
    if obs.entry_ms < earliest_valid_ms || obs.exit_ms < earliest_valid_ms {
        return ObservationVerdict::Invalid(InvalidReason::BeforeEarliestTimestamp);
    }
    ObservationVerdict::Valid
}

/// Whether a trajectory event marks an entry into or an exit from a location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Entry,
    Exit,
}

/// A single timestamped entry-or-exit event, produced by splitting an
/// observation. Keeps the id of the observation it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub source_observation_id: String,
    pub kind: EventKind,
    pub location: String,
    pub timestamp_ms: i64,
}

/// A maximal chronological run of events whose inter-event gaps never exceed
/// the configured journey threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Journey {
    events: Vec<TrajectoryEvent>,
    location_sequence: Vec<String>,
}

impl Journey {
    /// Builds a journey, rejecting unordered events or gaps above `max_gap_ms`.
    /// The location sequence merges consecutive duplicate locations.
    pub fn new(events: Vec<TrajectoryEvent>, max_gap_ms: i64) -> Result<Self, Error> {
        if events.is_empty() {
            return Err(Error::EmptyJourney);
        }
        for (i, pair) in events.windows(2).enumerate() {
            let gap = pair[1].timestamp_ms - pair[0].timestamp_ms;
            if gap < 0 {
                return Err(Error::UnorderedEvents(i + 1));
            }
            if gap > max_gap_ms {
                return Err(Error::JourneyGapExceeded {
                    index: i + 1,
                    gap_ms: gap,
                    max_ms: max_gap_ms,
                });
            }
        }
        let mut location_sequence: Vec<String> = Vec::new();
        for event in &events {
            if location_sequence.last() != Some(&event.location) {
                location_sequence.push(event.location.clone());
            }
        }
        Ok(Self {
            events,
            location_sequence,
        })
    }

    pub fn events(&self) -> &[TrajectoryEvent] {
        &self.events
    }

    /// Locations visited, with consecutive duplicates merged.
    pub fn location_sequence(&self) -> &[String] {
        &self.location_sequence
    }

    pub fn first_timestamp_ms(&self) -> i64 {
        self.events[0].timestamp_ms
    }

    pub fn last_timestamp_ms(&self) -> i64 {
        self.events[self.events.len() - 1].timestamp_ms
    }

    /// Last event timestamp minus first; zero for single-event journeys.
    pub fn duration_ms(&self) -> i64 {
        self.last_timestamp_ms() - self.first_timestamp_ms()
    }
}

/// A location with the rest durations observed there, candidate for the
/// home/work labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfflineRestLocation {
    pub location: String,
    /// Gaps between an exit from and the next entry to this location, in
    /// chronological order. Every entry exceeds the rest threshold.
    pub rest_durations_ms: Vec<i64>,
    pub home_score: u32,
    pub work_score: u32,
}

impl OfflineRestLocation {
    pub fn total_rest_ms(&self) -> i64 {
        self.rest_durations_ms.iter().sum()
    }

    /// Rest durations in hours, rounded to two decimals for reporting.
    pub fn rest_durations_hours(&self) -> Vec<f64> {
        self.rest_durations_ms
            .iter()
            .map(|&ms| (ms as f64 / 3_600_000.0 * 100.0).round() / 100.0)
            .collect()
    }
}

/// Semantic label of a location for one consumer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocationLabel {
    Home,
    Work,
    OtherOrl,
    Unknown,
}

impl LocationLabel {
    /// Single-character token used in journey-pattern strings.
    pub fn token(&self) -> char {
        match self {
            LocationLabel::Home => 'H',
            LocationLabel::Work => 'W',
            LocationLabel::OtherOrl => 'O',
            LocationLabel::Unknown => 'U',
        }
    }
}

/// Per-consumer labelling of locations. Locations absent from the map are
/// `Unknown`; at most one location is `Home` and at most one is `Work`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    labels: BTreeMap<String, LocationLabel>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, location: String, label: LocationLabel) {
        self.labels.insert(location, label);
    }

    pub fn get(&self, location: &str) -> LocationLabel {
        self.labels
            .get(location)
            .copied()
            .unwrap_or(LocationLabel::Unknown)
    }

    pub fn token(&self, location: &str) -> char {
        self.get(location).token()
    }

    pub fn home(&self) -> Option<&str> {
        self.find(LocationLabel::Home)
    }

    pub fn work(&self) -> Option<&str> {
        self.find(LocationLabel::Work)
    }

    fn find(&self, wanted: LocationLabel) -> Option<&str> {
        self.labels
            .iter()
            .find(|(_, &l)| l == wanted)
            .map(|(loc, _)| loc.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &LocationLabel)> {
        self.labels.iter()
    }
}

/// Map from a journey-pattern token string (e.g. "HUW") to the number of
/// journeys that produced it.
pub type PatternCounts = BTreeMap<String, u32>;

/// The four numeric clustering features of one consumer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Mean journey duration in milliseconds.
    pub avg_journey_duration_ms: f64,
    /// Journeys per day over the trajectory span.
    pub journey_frequency_per_day: f64,
    /// Mean number of distinct consecutive locations per journey.
    pub locations_per_journey: f64,
    /// Journey count divided by rest-location count (floored at one).
    pub journeys_per_orl: f64,
}

impl FeatureVector {
    pub fn zero() -> Self {
        Self {
            avg_journey_duration_ms: 0.0,
            journey_frequency_per_day: 0.0,
            locations_per_journey: 0.0,
            journeys_per_orl: 0.0,
        }
    }

    /// Fixed component order used by scaling, the composite distance and PCA:
    /// journey frequency, locations per journey, average duration, journeys
    /// per rest location.
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.journey_frequency_per_day,
            self.locations_per_journey,
            self.avg_journey_duration_ms,
            self.journeys_per_orl,
        ]
    }
}

/// Everything the pipeline knows about one consumer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumerProfile {
    pub device_id: String,
    pub journeys: Vec<Journey>,
    pub orls: Vec<OfflineRestLocation>,
    pub labels: LabelMap,
    pub pattern_counts: PatternCounts,
    pub features: FeatureVector,
}

impl ConsumerProfile {
    /// Whole-trajectory location sequence with consecutive duplicates merged;
    /// journey boundaries are ignored. This is the matching unit for route
    /// similarity.
    pub fn trajectory_locations(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for journey in &self.journeys {
            for loc in journey.location_sequence() {
                if out.last() != Some(loc) {
                    out.push(loc.clone());
                }
            }
        }
        out
    }
}
