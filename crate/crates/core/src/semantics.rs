//! Offline rest locations, home/work labelling and journey rendering.
//!
//! A rest is a gap between an exit from and the next entry to the same
//! location that exceeds the rest threshold; locations with at least one
//! rest are candidates for the home and work labels. Scoring follows the
//! commute-window heuristic: modal entry/exit hours falling inside the
//! morning or evening windows add 3, and the two top rest locations by
//! total rest duration and by event count add 2 each.

use std::collections::BTreeMap;

use chrono::{TimeZone, Timelike, Utc};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::domain::{
    EventKind, Journey, LabelMap, LocationLabel, OfflineRestLocation, PatternCounts,
    TrajectoryEvent,
};

/// Scoring windows and increments. Hours are local to `timezone` and the
/// windows are half-open: `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringConfig {
    pub evening_window: (u32, u32),
    pub morning_window: (u32, u32),
    pub window_score: u32,
    pub duration_score: u32,
    pub frequency_score: u32,
    pub timezone: Tz,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            evening_window: (17, 21),
            morning_window: (5, 10),
            window_score: 3,
            duration_score: 2,
            frequency_score: 2,
            timezone: chrono_tz::Europe::London,
        }
    }
}

/// Hour of day (0-23) of an epoch-millisecond timestamp in the given zone.
pub fn local_hour(timestamp_ms: i64, tz: Tz) -> u32 {
    Utc.timestamp_millis_opt(timestamp_ms)
        .single()
        .expect("timestamp within representable range")
        .with_timezone(&tz)
        .hour()
}

fn in_window(hour: u32, window: (u32, u32)) -> bool {
    hour >= window.0 && hour < window.1
}

/// Scans each location's events in order and records a rest for every
/// (exit, next-same-location-entry) pair whose gap exceeds `min_rest_ms`.
/// Exit-exit pairs (a missed entry) record nothing. Locations with at least
/// one rest come back as rest locations, ordered by first appearance.
pub fn detect_orls(events: &[TrajectoryEvent], min_rest_ms: i64) -> Vec<OfflineRestLocation> {
    let mut order: Vec<&str> = Vec::new();
    let mut per_location: BTreeMap<&str, Vec<&TrajectoryEvent>> = BTreeMap::new();
    for event in events {
        let slot = per_location.entry(event.location.as_str()).or_default();
        if slot.is_empty() {
            order.push(event.location.as_str());
        }
        slot.push(event);
    }

    let mut orls = Vec::new();
    for location in order {
        let events_here = &per_location[location];
        let mut rests = Vec::new();
        for pair in events_here.windows(2) {
            if pair[0].kind == EventKind::Exit && pair[1].kind == EventKind::Entry {
                let gap = pair[1].timestamp_ms - pair[0].timestamp_ms;
                if gap > min_rest_ms {
                    rests.push(gap);
                }
            }
        }
        if !rests.is_empty() {
            orls.push(OfflineRestLocation {
                location: location.to_string(),
                rest_durations_ms: rests,
                home_score: 0,
                work_score: 0,
            });
        }
    }
    orls
}

/// Most frequent hour-of-day bucket, ties resolved toward the earliest hour.
fn modal_hour(hours: impl Iterator<Item = u32>) -> Option<u32> {
    let mut counts = [0u32; 24];
    let mut seen = false;
    for h in hours {
        counts[h as usize] += 1;
        seen = true;
    }
    if !seen {
        return None;
    }
    let mut best = 0;
    for h in 1..24 {
        if counts[h] > counts[best] {
            best = h;
        }
    }
    Some(best as u32)
}

/// Populates home and work scores on the detected rest locations.
///
/// Window scores use the modal local hour of all entry and exit events at
/// the location. The two locations with the largest summed rest duration and
/// the two with the most events each gain the duration and frequency bonus
/// on both scores.
pub fn score_orls(
    mut orls: Vec<OfflineRestLocation>,
    events: &[TrajectoryEvent],
    cfg: &ScoringConfig,
) -> Vec<OfflineRestLocation> {
    let mut entry_hours: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    let mut exit_hours: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    let mut event_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for event in events {
        let hour = local_hour(event.timestamp_ms, cfg.timezone);
        match event.kind {
            EventKind::Entry => entry_hours.entry(&event.location).or_default().push(hour),
            EventKind::Exit => exit_hours.entry(&event.location).or_default().push(hour),
        }
        *event_counts.entry(&event.location).or_default() += 1;
    }

    for orl in &mut orls {
        let modal_exit = modal_hour(
            exit_hours
                .get(orl.location.as_str())
                .into_iter()
                .flatten()
                .copied(),
        );
        let modal_entry = modal_hour(
            entry_hours
                .get(orl.location.as_str())
                .into_iter()
                .flatten()
                .copied(),
        );
        if let Some(h) = modal_exit {
            if in_window(h, cfg.evening_window) {
                orl.work_score += cfg.window_score;
            }
            if in_window(h, cfg.morning_window) {
                orl.home_score += cfg.window_score;
            }
        }
        if let Some(h) = modal_entry {
            if in_window(h, cfg.morning_window) {
                orl.work_score += cfg.window_score;
            }
            if in_window(h, cfg.evening_window) {
                orl.home_score += cfg.window_score;
            }
        }
    }

    // Top two by summed rest duration, then by event count; ties go to the
    // lexicographically smaller location so scoring is order-independent.
    let mut by_duration: Vec<usize> = (0..orls.len()).collect();
    by_duration.sort_by(|&a, &b| {
        orls[b]
            .total_rest_ms()
            .cmp(&orls[a].total_rest_ms())
            .then_with(|| orls[a].location.cmp(&orls[b].location))
    });
    for &i in by_duration.iter().take(2) {
        orls[i].home_score += cfg.duration_score;
        orls[i].work_score += cfg.duration_score;
    }

    let mut by_events: Vec<usize> = (0..orls.len()).collect();
    by_events.sort_by(|&a, &b| {
        let ca = event_counts.get(orls[a].location.as_str()).copied().unwrap_or(0);
        let cb = event_counts.get(orls[b].location.as_str()).copied().unwrap_or(0);
        cb.cmp(&ca).then_with(|| orls[a].location.cmp(&orls[b].location))
    });
    for &i in by_events.iter().take(2) {
        orls[i].home_score += cfg.frequency_score;
        orls[i].work_score += cfg.frequency_score;
    }

    orls
}

/// Picks the home rest location as the highest home score and the work rest
/// location as the highest work score excluding home. Remaining rest
/// locations are labelled as such; everywhere else is unknown. Score ties
/// break toward the larger total rest duration, then the lexicographically
/// smaller location name.
pub fn label_home_work(orls: &[OfflineRestLocation]) -> LabelMap {
    let mut labels = LabelMap::new();
    if orls.is_empty() {
        return labels;
    }

    let pick = |score: &dyn Fn(&OfflineRestLocation) -> u32, exclude: Option<&str>| {
        orls.iter()
            .filter(|o| Some(o.location.as_str()) != exclude)
            .max_by(|a, b| {
                score(a)
                    .cmp(&score(b))
                    .then_with(|| a.total_rest_ms().cmp(&b.total_rest_ms()))
                    .then_with(|| b.location.cmp(&a.location))
            })
            .map(|o| o.location.clone())
    };

    let home = pick(&|o| o.home_score, None);
    if let Some(home) = &home {
        labels.insert(home.clone(), LocationLabel::Home);
    }
    let work = pick(&|o| o.work_score, home.as_deref());
    if let Some(work) = &work {
        labels.insert(work.clone(), LocationLabel::Work);
    }
    for orl in orls {
        if labels.get(&orl.location) == LocationLabel::Unknown {
            labels.insert(orl.location.clone(), LocationLabel::OtherOrl);
        }
    }
    labels
}

/// The journey-pattern string of one consumer plus the per-pattern counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JourneyAnnotation {
    /// Token strings per journey joined with '|', e.g. "H|HW|WUH".
    pub journey_string: String,
    pub pattern_counts: PatternCounts,
}

/// Maps each journey's location sequence to its H/W/O/U tokens and joins the
/// per-journey strings with '|'. Also accumulates the pattern count map.
pub fn build_journey_string(journeys: &[Journey], labels: &LabelMap) -> JourneyAnnotation {
    let mut pattern_counts = PatternCounts::new();
    let mut parts = Vec::with_capacity(journeys.len());
    for journey in journeys {
        let pattern: String = journey
            .location_sequence()
            .iter()
            .map(|loc| labels.token(loc))
            .collect();
        *pattern_counts.entry(pattern.clone()).or_insert(0) += 1;
        parts.push(pattern);
    }
    JourneyAnnotation {
        journey_string: parts.join("|"),
        pattern_counts,
    }
}

/// One row of the condensed journey list: a route and how often it was
/// travelled in the morning and in the afternoon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CondensedJourneyEntry {
    pub route: Vec<String>,
    pub am_count: u32,
    pub pm_count: u32,
}

/// Groups journeys by route. A journey counts as AM when its first event
/// starts before noon local time. Entries are ordered by total count
/// descending, ties by first occurrence.
pub fn condense_journeys(journeys: &[Journey], tz: Tz) -> Vec<CondensedJourneyEntry> {
    let mut entries: Vec<CondensedJourneyEntry> = Vec::new();
    let mut index_of: BTreeMap<&[String], usize> = BTreeMap::new();
    for journey in journeys {
        let is_am = local_hour(journey.first_timestamp_ms(), tz) < 12;
        let idx = match index_of.get(journey.location_sequence()) {
            Some(&i) => i,
            None => {
                entries.push(CondensedJourneyEntry {
                    route: journey.location_sequence().to_vec(),
                    am_count: 0,
                    pm_count: 0,
                });
                index_of.insert(journey.location_sequence(), entries.len() - 1);
                entries.len() - 1
            }
        };
        if is_am {
            entries[idx].am_count += 1;
        } else {
            entries[idx].pm_count += 1;
        }
    }
    entries.sort_by_key(|e| std::cmp::Reverse(e.am_count + e.pm_count));
    entries
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOUR: i64 = 3_600_000;
    const MIN: i64 = 60_000;

    fn ev(kind: EventKind, loc: &str, ts: i64) -> TrajectoryEvent {
        TrajectoryEvent {
            source_observation_id: "o".into(),
            kind,
            location: loc.into(),
            timestamp_ms: ts,
        }
    }

    fn utc_cfg() -> ScoringConfig {
        ScoringConfig {
            timezone: chrono_tz::UTC,
            ..ScoringConfig::default()
        }
    }

    #[test]
    fn rest_over_threshold_is_recorded_in_hours() {
        // Exit A, other-location noise in between, re-entry 8.4 hours later.
        let t = 1_000_000 * HOUR;
        let gap = (8.4 * HOUR as f64) as i64;
        let events = vec![
            ev(EventKind::Entry, "A", t - 5 * MIN),
            ev(EventKind::Exit, "A", t),
            ev(EventKind::Entry, "B", t + HOUR),
            ev(EventKind::Exit, "B", t + HOUR + 5 * MIN),
            ev(EventKind::Entry, "A", t + gap),
            ev(EventKind::Exit, "A", t + gap + 5 * MIN),
        ];
        let orls = detect_orls(&events, 30 * MIN);
        assert_eq!(orls.len(), 1);
        assert_eq!(orls[0].location, "A");
        assert_eq!(orls[0].rest_durations_hours(), vec![8.4]);
    }

    #[test]
    fn gap_below_threshold_is_not_a_rest() {
        let events = vec![
            ev(EventKind::Exit, "A", 0),
            ev(EventKind::Entry, "A", 20 * MIN),
        ];
        assert!(detect_orls(&events, 30 * MIN).is_empty());
    }

    #[test]
    fn exit_followed_by_exit_records_nothing() {
        let events = vec![
            ev(EventKind::Exit, "A", 0),
            ev(EventKind::Exit, "A", 10 * HOUR),
            ev(EventKind::Entry, "A", 10 * HOUR + MIN),
        ];
        assert!(detect_orls(&events, 30 * MIN).is_empty());
    }

    #[test]
    fn boundary_rest_requires_strictly_greater_gap() {
        let events = vec![
            ev(EventKind::Exit, "A", 0),
            ev(EventKind::Entry, "A", 30 * MIN),
            ev(EventKind::Exit, "A", 31 * MIN),
            ev(EventKind::Entry, "A", 61 * MIN + 1),
        ];
        let orls = detect_orls(&events, 30 * MIN);
        assert_eq!(orls.len(), 1);
        assert_eq!(orls[0].rest_durations_ms, vec![30 * MIN + 1]);
    }

    /// Builds events at `loc` whose entries sit in `entry_hour` and exits in
    /// `exit_hour` (UTC), with one long rest so the location becomes an ORL.
    fn orl_events(loc: &str, entry_hour: i64, exit_hour: i64, days: i64) -> Vec<TrajectoryEvent> {
        let mut events = Vec::new();
        for d in 0..days {
            let day = d * 24 * HOUR;
            let entry = day + entry_hour * HOUR;
            let exit = day + exit_hour * HOUR;
            if entry <= exit {
                events.push(ev(EventKind::Entry, loc, entry));
                events.push(ev(EventKind::Exit, loc, exit));
            } else {
                events.push(ev(EventKind::Exit, loc, exit));
                events.push(ev(EventKind::Entry, loc, entry));
            }
        }
        events.sort_by_key(|e| e.timestamp_ms);
        events
    }

    #[test]
    fn morning_exit_and_evening_entry_score_home() {
        // Modal exit hour 8, modal entry hour 18: both home signals.
        let events = orl_events("A", 18, 8, 4);
        let orls = score_orls(detect_orls(&events, 30 * MIN), &events, &utc_cfg());
        assert_eq!(orls.len(), 1);
        // 3 + 3 from windows, plus 2 + 2 as the only rest location.
        assert_eq!(orls[0].home_score, 10);
        assert_eq!(orls[0].work_score, 4);
    }

    #[test]
    fn evening_exit_and_morning_entry_score_work() {
        let events = orl_events("B", 8, 18, 4);
        let orls = score_orls(detect_orls(&events, 30 * MIN), &events, &utc_cfg());
        assert_eq!(orls[0].work_score, 10);
        assert_eq!(orls[0].home_score, 4);
    }

    #[test]
    fn single_orl_receives_both_bonuses() {
        let events = orl_events("A", 12, 13, 3);
        let orls = score_orls(detect_orls(&events, 30 * MIN), &events, &utc_cfg());
        assert_eq!(orls.len(), 1);
        // No window hits; duration and frequency bonuses only.
        assert_eq!(orls[0].home_score, 4);
        assert_eq!(orls[0].work_score, 4);
    }

    #[test]
    fn window_boundaries_are_half_open() {
        assert!(in_window(17, (17, 21)));
        assert!(!in_window(21, (17, 21)));
        assert!(in_window(5, (5, 10)));
        assert!(!in_window(10, (5, 10)));
    }

    #[test]
    fn modal_hour_tie_breaks_toward_earliest() {
        assert_eq!(modal_hour([7, 18, 18, 7].into_iter()), Some(7));
        assert_eq!(modal_hour(std::iter::empty()), None);
    }

    #[test]
    fn no_orls_leaves_home_and_work_unlabelled() {
        let labels = label_home_work(&[]);
        assert_eq!(labels.home(), None);
        assert_eq!(labels.work(), None);
    }

    #[test]
    fn single_orl_labels_home_only() {
        let orls = vec![OfflineRestLocation {
            location: "A".into(),
            rest_durations_ms: vec![2 * HOUR],
            home_score: 4,
            work_score: 4,
        }];
        let labels = label_home_work(&orls);
        assert_eq!(labels.home(), Some("A"));
        assert_eq!(labels.work(), None);
    }

    #[test]
    fn score_tie_breaks_by_total_rest_duration() {
        let orls = vec![
            OfflineRestLocation {
                location: "Short".into(),
                rest_durations_ms: vec![HOUR],
                home_score: 7,
                work_score: 3,
            },
            OfflineRestLocation {
                location: "Long".into(),
                rest_durations_ms: vec![10 * HOUR],
                home_score: 7,
                work_score: 3,
            },
        ];
        let labels = label_home_work(&orls);
        assert_eq!(labels.home(), Some("Long"));
        assert_eq!(labels.work(), Some("Short"));
    }

    #[test]
    fn work_excludes_the_home_location() {
        // One location tops both scores; work must fall to the runner-up.
        let orls = vec![
            OfflineRestLocation {
                location: "A".into(),
                rest_durations_ms: vec![10 * HOUR],
                home_score: 10,
                work_score: 10,
            },
            OfflineRestLocation {
                location: "B".into(),
                rest_durations_ms: vec![HOUR],
                home_score: 2,
                work_score: 7,
            },
        ];
        let labels = label_home_work(&orls);
        assert_eq!(labels.home(), Some("A"));
        assert_eq!(labels.work(), Some("B"));
        assert_ne!(labels.home(), labels.work());
    }

    fn journey(locs: &[&str], start: i64) -> Journey {
        let events: Vec<_> = locs
            .iter()
            .enumerate()
            .map(|(i, loc)| ev(EventKind::Entry, loc, start + i as i64 * MIN))
            .collect();
        Journey::new(events, 80 * MIN).unwrap()
    }

    fn hw_labels() -> LabelMap {
        let mut labels = LabelMap::new();
        labels.insert("Home".into(), LocationLabel::Home);
        labels.insert("Work".into(), LocationLabel::Work);
        labels
    }

    #[test]
    fn journey_tokens_concatenate() {
        let annotation =
            build_journey_string(&[journey(&["Home", "X", "Work"], 0)], &hw_labels());
        assert_eq!(annotation.journey_string, "HUW");
        assert_eq!(annotation.pattern_counts.get("HUW"), Some(&1));
    }

    #[test]
    fn journeys_join_with_bars() {
        let annotation = build_journey_string(
            &[journey(&["Home"], 0), journey(&["Home", "Work"], 10 * HOUR)],
            &hw_labels(),
        );
        assert_eq!(annotation.journey_string, "H|HW");
    }

    #[test]
    fn empty_journey_list_renders_empty_string() {
        let annotation = build_journey_string(&[], &hw_labels());
        assert_eq!(annotation.journey_string, "");
        assert!(annotation.pattern_counts.is_empty());
    }

    #[test]
    fn pattern_counts_sum_to_journey_count() {
        let journeys = vec![
            journey(&["Home", "Work"], 0),
            journey(&["Home", "Work"], 24 * HOUR),
            journey(&["Work", "Home"], 48 * HOUR),
        ];
        let annotation = build_journey_string(&journeys, &hw_labels());
        let total: u32 = annotation.pattern_counts.values().sum();
        assert_eq!(total as usize, journeys.len());
        assert_eq!(annotation.journey_string.matches('|').count(), journeys.len() - 1);
    }

    #[test]
    fn condense_counts_am_and_pm() {
        let journeys = vec![
            journey(&["A", "B"], 8 * HOUR),
            journey(&["A", "B"], 24 * HOUR + 8 * HOUR),
            journey(&["A", "B"], 48 * HOUR + 18 * HOUR),
        ];
        let condensed = condense_journeys(&journeys, chrono_tz::UTC);
        assert_eq!(condensed.len(), 1);
        assert_eq!(condensed[0].route, ["A", "B"]);
        assert_eq!(condensed[0].am_count, 2);
        assert_eq!(condensed[0].pm_count, 1);
    }

    #[test]
    fn noon_counts_as_pm() {
        let condensed = condense_journeys(&[journey(&["A"], 12 * HOUR)], chrono_tz::UTC);
        assert_eq!(condensed[0].am_count, 0);
        assert_eq!(condensed[0].pm_count, 1);
    }

    #[test]
    fn condense_of_no_journeys_is_empty() {
        assert!(condense_journeys(&[], chrono_tz::UTC).is_empty());
    }

    #[test]
    fn condense_orders_by_total_then_first_occurrence() {
        let journeys = vec![
            journey(&["A"], HOUR),              // seen first, total 1
            journey(&["B", "C"], 5 * HOUR),     // total 2
            journey(&["B", "C"], 30 * HOUR),
            journey(&["D"], 55 * HOUR),         // total 1, after A
        ];
        let condensed = condense_journeys(&journeys, chrono_tz::UTC);
        assert_eq!(condensed[0].route, ["B", "C"]);
        assert_eq!(condensed[1].route, ["A"]);
        assert_eq!(condensed[2].route, ["D"]);
    }

    #[test]
    fn scaling_rest_durations_preserves_labels() {
        let base = vec![
            OfflineRestLocation {
                location: "A".into(),
                rest_durations_ms: vec![9 * HOUR, 11 * HOUR],
                home_score: 7,
                work_score: 5,
            },
            OfflineRestLocation {
                location: "B".into(),
                rest_durations_ms: vec![8 * HOUR],
                home_score: 7,
                work_score: 5,
            },
        ];
        let scaled: Vec<_> = base
            .iter()
            .map(|o| OfflineRestLocation {
                rest_durations_ms: o.rest_durations_ms.iter().map(|d| d * 7).collect(),
                ..o.clone()
            })
            .collect();
        assert_eq!(label_home_work(&base), label_home_work(&scaled));
    }
}
