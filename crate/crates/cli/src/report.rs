//! Per-consumer report shape and the human-readable rendering.

use serde::{Deserialize, Serialize};

use semtraj::domain::{FeatureVector, PatternCounts};
use semtraj::profile::DeviceArtifacts;
use semtraj::semantics::CondensedJourneyEntry;

/// One consumer's pipeline output, persisted as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumerReport {
    pub device_id: String,
    pub home: Option<String>,
    pub work: Option<String>,
    pub orls: Vec<OrlReport>,
    pub journey_string: String,
    pub condensed: Vec<CondensedReportEntry>,
    pub pattern_counts: PatternCounts,
    /// Whole-trajectory location sequence, the unit for route similarity.
    pub trajectory_locations: Vec<String>,
    pub journey_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrlReport {
    pub location: String,
    /// Hours, rounded to two decimals.
    pub durations_hours: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensedReportEntry {
    pub route: Vec<String>,
    pub am: u32,
    pub pm: u32,
}

impl ConsumerReport {
    pub fn from_artifacts(artifacts: &DeviceArtifacts) -> Self {
        let profile = &artifacts.profile;
        Self {
            device_id: profile.device_id.clone(),
            home: profile.labels.home().map(str::to_string),
            work: profile.labels.work().map(str::to_string),
            orls: profile
                .orls
                .iter()
                .map(|orl| OrlReport {
                    location: orl.location.clone(),
                    durations_hours: orl.rest_durations_hours(),
                })
                .collect(),
            journey_string: artifacts.annotation.journey_string.clone(),
            condensed: artifacts
                .condensed
                .iter()
                .map(|e: &CondensedJourneyEntry| CondensedReportEntry {
                    route: e.route.clone(),
                    am: e.am_count,
                    pm: e.pm_count,
                })
                .collect(),
            pattern_counts: profile.pattern_counts.clone(),
            trajectory_locations: profile.trajectory_locations(),
            journey_count: profile.journeys.len(),
            features: None,
        }
    }
}

/// Formats hours the way the condensed tables do: up to two decimals with
/// trailing zeros trimmed (8.4, 24.08, 48).
pub fn format_hours(hours: f64) -> String {
    let text = format!("{hours:.2}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text.is_empty() {
        "0".to_string()
    } else {
        text.to_string()
    }
}

/// Renders the tabular per-consumer report: labels, rest durations in
/// hours, the condensed journey list with AM/PM counts, and the journey
/// string.
pub fn render_consumer(report: &ConsumerReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("device: {}\n", report.device_id));
    let home = report.home.as_deref().unwrap_or("unlabelled");
    let work = report.work.as_deref().unwrap_or("unlabelled");
    out.push_str(&format!("home: {home}, work: {work}\n"));

    out.push_str("orls:\n");
    if report.orls.is_empty() {
        out.push_str("  (none)\n");
    }
    for orl in &report.orls {
        let durations: Vec<String> = orl.durations_hours.iter().map(|&h| format_hours(h)).collect();
        out.push_str(&format!("  {}: {}\n", orl.location, durations.join("; ")));
    }

    out.push_str("journeys:\n");
    for entry in &report.condensed {
        out.push_str(&format!(
            "  {}  AM ({}), PM ({})\n",
            entry.route.join(" → "),
            entry.am,
            entry.pm
        ));
    }
    out.push_str(&format!("journey string: {}\n", report.journey_string));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(route: &[&str], am: u32, pm: u32) -> CondensedReportEntry {
        CondensedReportEntry {
            route: route.iter().map(|s| s.to_string()).collect(),
            am,
            pm,
        }
    }

    fn base_report() -> ConsumerReport {
        ConsumerReport {
            device_id: "dev-1".into(),
            home: None,
            work: None,
            orls: Vec::new(),
            journey_string: String::new(),
            condensed: Vec::new(),
            pattern_counts: PatternCounts::new(),
            trajectory_locations: Vec::new(),
            journey_count: 0,
            features: None,
        }
    }

    #[test]
    fn condensed_line_matches_table_layout() {
        let mut report = base_report();
        report.condensed = vec![entry(&["A", "B"], 2, 0)];
        let text = render_consumer(&report);
        assert!(text.contains("A → B  AM (2), PM (0)"), "{text}");
    }

    #[test]
    fn missing_labels_render_unlabelled() {
        let text = render_consumer(&base_report());
        assert!(text.contains("home: unlabelled, work: unlabelled"), "{text}");
    }

    #[test]
    fn hours_trim_trailing_zeros() {
        assert_eq!(format_hours(8.4), "8.4");
        assert_eq!(format_hours(24.08), "24.08");
        assert_eq!(format_hours(48.0), "48");
        assert_eq!(format_hours(0.0), "0");
    }

    #[test]
    fn single_journey_string_has_no_separator() {
        let mut report = base_report();
        report.journey_string = "HW".into();
        report.journey_count = 1;
        let text = render_consumer(&report);
        assert!(text.contains("journey string: HW\n"));
        assert_eq!(report.journey_string.matches('|').count(), 0);
    }
}
