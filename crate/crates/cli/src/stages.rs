//! Pipeline stages and run-directory artifacts.
//!
//! Every stage reads and writes files in a run directory so the pipeline
//! can run end to end or one stage at a time. All outputs are deterministic
//! for a given input and configuration: devices iterate in sorted order,
//! maps are ordered, and nothing records wall-clock time.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use semtraj::cluster::{dbscan, ClusterAssignment};
use semtraj::domain::{ConsumerProfile, LabelMap, TrajectoryEvent, WirelessObservation};
use semtraj::features::{fit_scaler, ScalerParams};
use semtraj::metric::composite_distance;
use semtraj::preprocess::DiscardedObservation;
use semtraj::profile::{derive_artifacts, preprocess_device, PreprocessOutcome};
use semtraj::reduce::{pca_fit, project, zscore_normalize};

use crate::config::RunConfig;
use crate::report::ConsumerReport;

pub const OBSERVATIONS_FILE: &str = "observations.csv";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";
pub const REJECTS_FILE: &str = "rejects.csv";
pub const EVENTS_FILE: &str = "events.json";
pub const DISCARDED_DEVICES_FILE: &str = "discarded_devices.csv";
pub const DISCARDED_OBSERVATIONS_FILE: &str = "discarded_observations.csv";
pub const REPORTS_FILE: &str = "reports.json";
pub const SCALER_FILE: &str = "scaler.json";
pub const FEATURES_FILE: &str = "features.csv";
pub const ASSIGNMENT_FILE: &str = "assignment.csv";
pub const CHART_FILE: &str = "chart.csv";
pub const SCATTER_FILE: &str = "scatter.svg";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Kept events per device plus the discard log.
pub struct PreprocessStage {
    pub events: BTreeMap<String, Vec<TrajectoryEvent>>,
    pub device_discards: Vec<(String, &'static str)>,
    pub observation_discards: Vec<(String, DiscardedObservation)>,
    pub devices_in: usize,
    /// Devices that passed the filters, before sampling.
    pub devices_kept: usize,
}

/// Filters every device and samples up to `MAX_NUM_TRAJECTORIES` of the
/// survivors without replacement, seeded by the run seed.
pub fn stage_preprocess(
    observations: BTreeMap<String, Vec<WirelessObservation>>,
    config: &RunConfig,
) -> PreprocessStage {
    let devices_in = observations.len();
    let preprocess = config.preprocess();
    let mut events = BTreeMap::new();
    let mut device_discards = Vec::new();
    let mut observation_discards = Vec::new();

    for (device_id, device_observations) in observations {
        let (outcome, dropped) = preprocess_device(device_observations, &preprocess);
        for d in dropped {
            observation_discards.push((device_id.clone(), d));
        }
        match outcome {
            PreprocessOutcome::Kept(device_events) => {
                events.insert(device_id, device_events);
            }
            PreprocessOutcome::Discarded(reason) => {
                device_discards.push((device_id, reason.as_str()));
            }
        }
    }

    let devices_kept = events.len();
    let events = sample_devices(events, config.max_num_trajectories, config.seed);
    PreprocessStage {
        events,
        device_discards,
        observation_discards,
        devices_in,
        devices_kept,
    }
}

/// Uniform sample without replacement over sorted device ids.
fn sample_devices(
    events: BTreeMap<String, Vec<TrajectoryEvent>>,
    max: usize,
    seed: u64,
) -> BTreeMap<String, Vec<TrajectoryEvent>> {
    if events.len() <= max {
        return events;
    }
    let mut entries: Vec<(String, Vec<TrajectoryEvent>)> = events.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..max {
        let j = rng.gen_range(i..entries.len());
        entries.swap(i, j);
    }
    entries.truncate(max);
    entries.into_iter().collect()
}

/// Derives reports for every kept device. Features are attached here as
/// well when `with_features` is set; the `label` subcommand leaves them out
/// for the dedicated features stage.
pub fn stage_label(
    events: &BTreeMap<String, Vec<TrajectoryEvent>>,
    config: &RunConfig,
) -> Result<Vec<ConsumerReport>> {
    let preprocess = config.preprocess();
    let scoring = config.scoring()?;
    Ok(events
        .iter()
        .map(|(device_id, device_events)| {
            let artifacts = derive_artifacts(device_id, device_events, &preprocess, &scoring);
            ConsumerReport::from_artifacts(&artifacts)
        })
        .collect())
}

/// Attaches feature vectors to the reports and fits the population scaler.
pub fn stage_features(
    events: &BTreeMap<String, Vec<TrajectoryEvent>>,
    reports: &mut [ConsumerReport],
    config: &RunConfig,
) -> Result<Option<ScalerParams>> {
    let preprocess = config.preprocess();
    let scoring = config.scoring()?;
    for report in reports.iter_mut() {
        let device_events = events
            .get(&report.device_id)
            .with_context(|| format!("no events for {}", report.device_id))?;
        let artifacts = derive_artifacts(&report.device_id, device_events, &preprocess, &scoring);
        report.features = Some(artifacts.profile.features);
    }
    let vectors: Vec<_> = reports.iter().filter_map(|r| r.features).collect();
    if vectors.is_empty() {
        return Ok(None);
    }
    Ok(Some(fit_scaler(&vectors).expect("non-empty population")))
}

/// Minimal profile carrying exactly what the composite distance reads.
fn metric_profile(report: &ConsumerReport) -> Result<ConsumerProfile> {
    Ok(ConsumerProfile {
        device_id: report.device_id.clone(),
        journeys: Vec::new(),
        orls: Vec::new(),
        labels: LabelMap::new(),
        pattern_counts: report.pattern_counts.clone(),
        features: report
            .features
            .with_context(|| format!("{} has no features; run the features stage", report.device_id))?,
    })
}

/// Clusters the population with the composite distance.
pub fn stage_cluster(
    reports: &[ConsumerReport],
    scaler: &ScalerParams,
    config: &RunConfig,
) -> Result<ClusterAssignment> {
    let profiles: Vec<ConsumerProfile> = reports
        .iter()
        .map(metric_profile)
        .collect::<Result<_>>()?;
    let params = config.dbscan();
    Ok(dbscan(
        &profiles,
        |a, b| composite_distance(a, b, scaler),
        &params,
    ))
}

/// 2-D chart coordinates per device.
pub struct ChartData {
    pub rows: Vec<(String, f64, f64, i64)>,
}

/// Normalizes the feature matrix, fits the principal components and
/// projects to two dimensions, pairing each point with its cluster id
/// (-1 for noise). Populations of fewer than two devices chart empty.
pub fn stage_project(
    reports: &[ConsumerReport],
    assignment: &ClusterAssignment,
) -> Result<ChartData> {
    if reports.len() < 2 {
        return Ok(ChartData { rows: Vec::new() });
    }
    let matrix: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| {
            r.features
                .map(|f| f.as_array().to_vec())
                .with_context(|| format!("{} has no features", r.device_id))
        })
        .collect::<Result<_>>()?;
    let (normalized, _) = zscore_normalize(&matrix)?;
    let pca = pca_fit(&normalized)?;
    let coords = project(&normalized, &pca, 2)?;
    let rows = reports
        .iter()
        .zip(coords)
        .enumerate()
        .map(|(i, (report, coord))| {
            let cluster = assignment
                .clusters
                .get(i)
                .copied()
                .flatten()
                .map(|c| c as i64)
                .unwrap_or(-1);
            (report.device_id.clone(), coord[0], coord[1], cluster)
        })
        .collect();
    Ok(ChartData { rows })
}

pub fn write_events(path: &Path, events: &BTreeMap<String, Vec<TrajectoryEvent>>) -> Result<()> {
    write_json(path, events)
}

pub fn read_events(path: &Path) -> Result<BTreeMap<String, Vec<TrajectoryEvent>>> {
    read_json(path)
}

pub fn write_device_discards(path: &Path, discards: &[(String, &'static str)]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["device_id", "reason"])?;
    for (device, reason) in discards {
        writer.write_record([device.as_str(), reason])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_observation_discards(
    path: &Path,
    discards: &[(String, DiscardedObservation)],
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["device_id", "observation_id", "reason", "conflicts_with"])?;
    for (device, discard) in discards {
        writer.write_record([
            device.as_str(),
            discard.observation.observation_id.as_str(),
            "impossible_overlap",
            discard.conflicts_with.as_str(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_features_csv(path: &Path, reports: &[ConsumerReport]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "device_id",
        "journey_frequency_per_day",
        "locations_per_journey",
        "avg_journey_duration_ms",
        "journeys_per_orl",
    ])?;
    for report in reports {
        if let Some(features) = report.features {
            let row = features.as_array();
            writer.write_record([
                report.device_id.as_str(),
                &row[0].to_string(),
                &row[1].to_string(),
                &row[2].to_string(),
                &row[3].to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn write_assignment_csv(
    path: &Path,
    reports: &[ConsumerReport],
    assignment: &ClusterAssignment,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["device_id", "cluster_id", "role"])?;
    for (report, (cluster, role)) in reports
        .iter()
        .zip(assignment.clusters.iter().zip(&assignment.roles))
    {
        let cluster_id = cluster.map(|c| c as i64).unwrap_or(-1);
        writer.write_record([
            report.device_id.as_str(),
            &cluster_id.to_string(),
            role.as_str(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_chart_csv(path: &Path, chart: &ChartData) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["device_id", "pc1", "pc2", "cluster_id"])?;
    for (device, pc1, pc2, cluster) in &chart.rows {
        writer.write_record([
            device.as_str(),
            &pc1.to_string(),
            &pc2.to_string(),
            &cluster.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Self-contained SVG scatter of the projected population, one colour per
/// cluster, grey for noise.
pub fn write_scatter_svg(path: &Path, chart: &ChartData) -> Result<()> {
    let (width, height, margin) = (800.0, 600.0, 40.0);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if !chart.rows.is_empty() {
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for (_, x, y, _) in &chart.rows {
            min_x = min_x.min(*x);
            max_x = max_x.max(*x);
            min_y = min_y.min(*y);
            max_y = max_y.max(*y);
        }
        let span_x = (max_x - min_x).max(1e-9);
        let span_y = (max_y - min_y).max(1e-9);
        for (_, x, y, cluster) in &chart.rows {
            let px = margin + (x - min_x) / span_x * (width - 2.0 * margin);
            let py = height - margin - (y - min_y) / span_y * (height - 2.0 * margin);
            let colour = if *cluster < 0 {
                "#bbbbbb"
            } else {
                PALETTE[(*cluster as usize) % PALETTE.len()]
            };
            svg.push_str(&format!(
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2.5\" fill=\"{colour}\" fill-opacity=\"0.7\"/>\n"
            ));
        }
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// The run manifest: parameters, input reference and stage counts. A rerun
/// from the same manifest and input reproduces every artifact byte for
/// byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub parameters: RunConfig,
    pub input: String,
    pub counts: RunCounts,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunCounts {
    pub devices_ingested: usize,
    pub rows_rejected: usize,
    pub observations_discarded_impossible: usize,
    pub devices_discarded: BTreeMap<String, usize>,
    pub devices_kept: usize,
    pub devices_sampled: usize,
    pub clusters: usize,
    pub noise: usize,
}

/// Runs preprocess through projection on already-ingested observations and
/// writes every artifact into `out`.
pub fn run_pipeline(
    observations: BTreeMap<String, Vec<WirelessObservation>>,
    rows_rejected: usize,
    input_name: &str,
    config: &RunConfig,
    out: &Path,
) -> Result<RunManifest> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating run directory {}", out.display()))?;

    let devices_ingested = observations.len();
    let pre = stage_preprocess(observations, config);
    write_events(&out.join(EVENTS_FILE), &pre.events)?;
    write_device_discards(&out.join(DISCARDED_DEVICES_FILE), &pre.device_discards)?;
    write_observation_discards(
        &out.join(DISCARDED_OBSERVATIONS_FILE),
        &pre.observation_discards,
    )?;

    let mut reports = stage_label(&pre.events, config)?;
    let scaler = stage_features(&pre.events, &mut reports, config)?;
    write_features_csv(&out.join(FEATURES_FILE), &reports)?;

    let assignment = match &scaler {
        Some(scaler) => {
            write_json(&out.join(SCALER_FILE), scaler)?;
            stage_cluster(&reports, scaler, config)?
        }
        None => ClusterAssignment {
            clusters: Vec::new(),
            roles: Vec::new(),
            cluster_count: 0,
        },
    };
    write_assignment_csv(&out.join(ASSIGNMENT_FILE), &reports, &assignment)?;

    let chart = stage_project(&reports, &assignment)?;
    write_chart_csv(&out.join(CHART_FILE), &chart)?;
    write_scatter_svg(&out.join(SCATTER_FILE), &chart)?;

    write_json(&out.join(REPORTS_FILE), &reports)?;

    let mut devices_discarded: BTreeMap<String, usize> = BTreeMap::new();
    for (_, reason) in &pre.device_discards {
        *devices_discarded.entry(reason.to_string()).or_default() += 1;
    }
    let manifest = RunManifest {
        parameters: config.clone(),
        input: input_name.to_string(),
        counts: RunCounts {
            devices_ingested,
            rows_rejected,
            observations_discarded_impossible: pre.observation_discards.len(),
            devices_discarded,
            devices_kept: pre.devices_kept,
            devices_sampled: pre.events.len(),
            clusters: assignment.cluster_count,
            noise: assignment.noise_count(),
        },
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}
