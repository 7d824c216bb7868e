//! Observation ingestion: CSV and JSON readers with a rejects channel.
//!
//! CSV header: device_id,observation_id,beacon_id,beacon_kind,region_id,
//! location,entry_ms,exit_ms. Malformed rows are collected with a reason
//! instead of aborting the run.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use semtraj::domain::{BeaconKind, WirelessObservation};

/// Observations grouped per device, the unit every stage consumes.
pub type GroupedObservations = BTreeMap<String, Vec<WirelessObservation>>;

pub const OBSERVATION_HEADER: [&str; 8] = [
    "device_id",
    "observation_id",
    "beacon_id",
    "beacon_kind",
    "region_id",
    "location",
    "entry_ms",
    "exit_ms",
];

/// A row that failed ingestion, with its 1-based line number.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
    pub raw: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Json,
}

impl InputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "json" => Ok(InputFormat::Json),
            other => anyhow::bail!("unknown format {other:?}, expected csv or json"),
        }
    }
}

/// Reads observations grouped per device, plus the rejected rows.
pub fn ingest(
    path: &Path,
    format: InputFormat,
) -> Result<(GroupedObservations, Vec<RejectedRow>)> {
    match format {
        InputFormat::Csv => ingest_csv(path),
        InputFormat::Json => ingest_json(path),
    }
}

fn group(
    observations: impl IntoIterator<Item = WirelessObservation>,
) -> GroupedObservations {
    let mut grouped = GroupedObservations::new();
    for obs in observations {
        grouped.entry(obs.device_id.clone()).or_default().push(obs);
    }
    grouped
}

fn parse_record(record: &csv::StringRecord) -> Result<WirelessObservation, String> {
    if record.len() != OBSERVATION_HEADER.len() {
        return Err(format!(
            "expected {} fields, got {}",
            OBSERVATION_HEADER.len(),
            record.len()
        ));
    }
    let field = |i: usize| record.get(i).unwrap_or_default().trim();
    let beacon_kind = BeaconKind::parse(field(3))
        .ok_or_else(|| format!("unknown beacon_kind {:?}", field(3)))?;
    let entry_ms: i64 = field(6)
        .parse()
        .map_err(|_| format!("bad entry_ms {:?}", field(6)))?;
    let exit_ms: i64 = field(7)
        .parse()
        .map_err(|_| format!("bad exit_ms {:?}", field(7)))?;
    if entry_ms > exit_ms {
        return Err("entry_after_exit".to_string());
    }
    if field(5).is_empty() {
        return Err("empty_location".to_string());
    }
    WirelessObservation::new(
        field(0),
        field(1),
        field(2),
        beacon_kind,
        field(4),
        field(5),
        entry_ms,
        exit_ms,
    )
    .map_err(|e| e.to_string())
}

fn ingest_csv(
    path: &Path,
) -> Result<(GroupedObservations, Vec<RejectedRow>)> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    {
        let headers = reader.headers().context("reading CSV header")?;
        let expected: Vec<&str> = OBSERVATION_HEADER.to_vec();
        let got: Vec<&str> = headers.iter().collect();
        anyhow::ensure!(
            got == expected,
            "unexpected CSV header {:?}, expected {:?}",
            got,
            expected
        );
    }

    let mut observations = Vec::new();
    let mut rejects = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2; // header is line 1
        let record = record.with_context(|| format!("reading line {line}"))?;
        match parse_record(&record) {
            Ok(obs) => observations.push(obs),
            Err(reason) => rejects.push(RejectedRow {
                line,
                reason,
                raw: record.iter().collect::<Vec<_>>().join(","),
            }),
        }
    }
    Ok((group(observations), rejects))
}

fn ingest_json(
    path: &Path,
) -> Result<(GroupedObservations, Vec<RejectedRow>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw: Vec<serde_json::Value> =
        serde_json::from_str(&text).context("parsing JSON observation array")?;
    let mut observations = Vec::new();
    let mut rejects = Vec::new();
    for (i, value) in raw.into_iter().enumerate() {
        match serde_json::from_value::<WirelessObservation>(value.clone()) {
            Ok(obs) if obs.entry_ms > obs.exit_ms => rejects.push(RejectedRow {
                line: i as u64 + 1,
                reason: "entry_after_exit".to_string(),
                raw: value.to_string(),
            }),
            Ok(obs) if obs.location.is_empty() => rejects.push(RejectedRow {
                line: i as u64 + 1,
                reason: "empty_location".to_string(),
                raw: value.to_string(),
            }),
            Ok(obs) => observations.push(obs),
            Err(e) => rejects.push(RejectedRow {
                line: i as u64 + 1,
                reason: e.to_string(),
                raw: value.to_string(),
            }),
        }
    }
    Ok((group(observations), rejects))
}

/// Writes observations as the canonical CSV, devices in sorted order.
pub fn write_observations_csv(path: &Path, observations: &GroupedObservations) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(OBSERVATION_HEADER)?;
    for device_observations in observations.values() {
        for obs in device_observations {
            writer.write_record([
                obs.device_id.as_str(),
                obs.observation_id.as_str(),
                obs.beacon_id.as_str(),
                obs.beacon_kind.as_str(),
                obs.region_id.as_str(),
                obs.location.as_str(),
                &obs.entry_ms.to_string(),
                &obs.exit_ms.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn write_rejects_csv(path: &Path, rejects: &[RejectedRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(["line", "reason", "raw"])?;
    for reject in rejects {
        writer.write_record([&reject.line.to_string(), &reject.reason, &reject.raw])?;
    }
    writer.flush()?;
    Ok(())
}
