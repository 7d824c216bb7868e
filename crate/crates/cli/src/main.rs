//! Command-line tool for the semantic trajectory mining pipeline.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use semtraj::routesim::rank_by_shared_route;
use semtraj::synth::{generate, SynthConfig};

use semtraj_cli::config::RunConfig;
use semtraj_cli::ingest::{ingest, write_observations_csv, write_rejects_csv, InputFormat};
use semtraj_cli::report::{render_consumer, ConsumerReport};
use semtraj_cli::stages::{
    self, read_events, read_json, run_pipeline, stage_cluster, stage_features, stage_label,
    stage_preprocess, stage_project, write_assignment_csv, write_chart_csv, write_device_discards,
    write_events, write_features_csv, write_json, write_observation_discards, write_scatter_svg,
    RunManifest,
};

#[derive(Parser)]
#[command(name = "semtraj", about = "Semantic trajectory mining for wireless station data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Run configuration file (JSON, standard parameter names).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output run directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configured SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides MAX_NUM_TRAJECTORIES.
    #[arg(long)]
    sample: Option<usize>,
}

impl CommonRunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(sample) = self.sample {
            config.max_num_trajectories = sample;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic observation corpus with ground truth.
    Synth {
        #[command(flatten)]
        run: CommonRunArgs,
        #[arg(long, default_value_t = 50)]
        regular: usize,
        #[arg(long, default_value_t = 10)]
        multi_leg: usize,
        #[arg(long, default_value_t = 5)]
        shift: usize,
        #[arg(long, default_value_t = 10)]
        sporadic: usize,
        #[arg(long, default_value_t = 28)]
        days: u32,
        #[arg(long, default_value_t = 0.0)]
        dropout: f64,
        #[arg(long, default_value_t = 0.6)]
        missing_exit: f64,
        #[arg(long, default_value_t = 0.05)]
        blackspot: f64,
    },
    /// Parse an observation file, collecting malformed rows.
    Ingest {
        #[command(flatten)]
        run: CommonRunArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Filter observations and write the kept event streams.
    Preprocess {
        #[command(flatten)]
        run: CommonRunArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Detect rest locations, label home/work and render journey strings.
    Label {
        #[command(flatten)]
        run: CommonRunArgs,
    },
    /// Compute clustering features and fit the population scaler.
    Features {
        #[command(flatten)]
        run: CommonRunArgs,
    },
    /// Cluster consumers with DBSCAN over the composite distance.
    Cluster {
        #[command(flatten)]
        run: CommonRunArgs,
    },
    /// Project features to two dimensions for charting.
    Project {
        #[command(flatten)]
        run: CommonRunArgs,
    },
    /// Print the report for one consumer.
    Report {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        device: String,
    },
    /// Rank consumers by shared subroute length against a target.
    Similar {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        device: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Run every stage: ingest, preprocess, label, features, cluster,
    /// project, reports, manifest.
    Pipeline {
        #[command(flatten)]
        run: CommonRunArgs,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Rerun from a previous run's manifest (parameters and input).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth {
            run,
            regular,
            multi_leg,
            shift,
            sporadic,
            days,
            dropout,
            missing_exit,
            blackspot,
        } => {
            let config = run.load()?;
            let synth = SynthConfig {
                regular_commuters: regular,
                multi_leg_commuters: multi_leg,
                shift_workers: shift,
                sporadic_travellers: sporadic,
                days,
                event_dropout_prob: dropout,
                missing_exit_prob: missing_exit,
                blackspot_gap_prob: blackspot,
                seed: config.seed,
                timezone: config.timezone()?,
                ..SynthConfig::default()
            };
            let output = generate(&synth)?;
            std::fs::create_dir_all(&run.out)?;
            write_observations_csv(&run.out.join(stages::OBSERVATIONS_FILE), &output.observations)?;
            write_json(&run.out.join(stages::GROUND_TRUTH_FILE), &output.manifest)?;
            let total: usize = output.observations.values().map(Vec::len).sum();
            println!(
                "generated {} observations for {} agents into {}",
                total,
                output.manifest.agents.len(),
                run.out.display()
            );
            Ok(())
        }
        Command::Ingest { run, input, format } => {
            let format = InputFormat::parse(&format)?;
            let (observations, rejects) = ingest(&input, format)?;
            std::fs::create_dir_all(&run.out)?;
            write_observations_csv(&run.out.join(stages::OBSERVATIONS_FILE), &observations)?;
            write_rejects_csv(&run.out.join(stages::REJECTS_FILE), &rejects)?;
            let total: usize = observations.values().map(Vec::len).sum();
            println!(
                "ingested {} observations across {} devices ({} rows rejected)",
                total,
                observations.len(),
                rejects.len()
            );
            Ok(())
        }
        Command::Preprocess { run, input, format } => {
            let config = run.load()?;
            let format = InputFormat::parse(&format)?;
            let (observations, rejects) = ingest(&input, format)?;
            std::fs::create_dir_all(&run.out)?;
            write_rejects_csv(&run.out.join(stages::REJECTS_FILE), &rejects)?;
            let pre = stage_preprocess(observations, &config);
            write_events(&run.out.join(stages::EVENTS_FILE), &pre.events)?;
            write_device_discards(
                &run.out.join(stages::DISCARDED_DEVICES_FILE),
                &pre.device_discards,
            )?;
            write_observation_discards(
                &run.out.join(stages::DISCARDED_OBSERVATIONS_FILE),
                &pre.observation_discards,
            )?;
            println!(
                "kept {} of {} devices ({} discarded, {} sampled)",
                pre.devices_kept,
                pre.devices_in,
                pre.device_discards.len(),
                pre.events.len()
            );
            Ok(())
        }
        Command::Label { run } => {
            let config = run.load()?;
            let events = read_events(&run.out.join(stages::EVENTS_FILE))?;
            let reports = stage_label(&events, &config)?;
            write_json(&run.out.join(stages::REPORTS_FILE), &reports)?;
            println!("labelled {} consumers", reports.len());
            Ok(())
        }
        Command::Features { run } => {
            let config = run.load()?;
            let events = read_events(&run.out.join(stages::EVENTS_FILE))?;
            let mut reports: Vec<ConsumerReport> = read_json(&run.out.join(stages::REPORTS_FILE))?;
            let scaler = stage_features(&events, &mut reports, &config)?;
            write_json(&run.out.join(stages::REPORTS_FILE), &reports)?;
            write_features_csv(&run.out.join(stages::FEATURES_FILE), &reports)?;
            if let Some(scaler) = scaler {
                write_json(&run.out.join(stages::SCALER_FILE), &scaler)?;
            }
            println!("computed features for {} consumers", reports.len());
            Ok(())
        }
        Command::Cluster { run } => {
            let config = run.load()?;
            let reports: Vec<ConsumerReport> = read_json(&run.out.join(stages::REPORTS_FILE))?;
            let scaler = read_json(&run.out.join(stages::SCALER_FILE))?;
            let assignment = stage_cluster(&reports, &scaler, &config)?;
            write_assignment_csv(&run.out.join(stages::ASSIGNMENT_FILE), &reports, &assignment)?;
            println!(
                "clustered {} consumers into {} clusters with {} noise",
                reports.len(),
                assignment.cluster_count,
                assignment.noise_count()
            );
            Ok(())
        }
        Command::Project { run } => {
            let _ = run.load()?;
            let reports: Vec<ConsumerReport> = read_json(&run.out.join(stages::REPORTS_FILE))?;
            let assignment = read_assignment(&run.out.join(stages::ASSIGNMENT_FILE), &reports)?;
            let chart = stage_project(&reports, &assignment)?;
            write_chart_csv(&run.out.join(stages::CHART_FILE), &chart)?;
            write_scatter_svg(&run.out.join(stages::SCATTER_FILE), &chart)?;
            println!("projected {} consumers", chart.rows.len());
            Ok(())
        }
        Command::Report { out, device } => {
            let reports: Vec<ConsumerReport> = read_json(&out.join(stages::REPORTS_FILE))?;
            let report = reports
                .iter()
                .find(|r| r.device_id == device)
                .with_context(|| format!("unknown device {device}"))?;
            print!("{}", render_consumer(report));
            Ok(())
        }
        Command::Similar { out, device, k } => {
            anyhow::ensure!(k >= 1, "k must be at least 1");
            let reports: Vec<ConsumerReport> = read_json(&out.join(stages::REPORTS_FILE))?;
            let target = reports
                .iter()
                .find(|r| r.device_id == device)
                .with_context(|| format!("unknown device {device}"))?;
            let candidates: Vec<(String, Vec<String>)> = reports
                .iter()
                .map(|r| (r.device_id.clone(), r.trajectory_locations.clone()))
                .collect();
            let ranked = rank_by_shared_route(
                &target.device_id,
                &target.trajectory_locations,
                &candidates,
                k,
            )?;
            println!("rank,device_id,score");
            for (i, (id, score)) in ranked.iter().enumerate() {
                println!("{},{},{}", i + 1, id, score);
            }
            Ok(())
        }
        Command::Pipeline {
            run,
            input,
            format,
            manifest,
        } => {
            let (config, input_path) = match (&manifest, &input) {
                (Some(manifest_path), maybe_input) => {
                    let previous: RunManifest = read_json(manifest_path)?;
                    let input_path = maybe_input
                        .clone()
                        .unwrap_or_else(|| PathBuf::from(&previous.input));
                    let mut config = previous.parameters;
                    if let Some(seed) = run.seed {
                        config.seed = seed;
                    }
                    config.validate()?;
                    (config, input_path)
                }
                (None, Some(input)) => (run.load()?, input.clone()),
                (None, None) => anyhow::bail!("pipeline needs --input or --manifest"),
            };
            let format = InputFormat::parse(&format)?;
            let (observations, rejects) = ingest(&input_path, format)?;
            std::fs::create_dir_all(&run.out)?;
            write_observations_csv(&run.out.join(stages::OBSERVATIONS_FILE), &observations)?;
            write_rejects_csv(&run.out.join(stages::REJECTS_FILE), &rejects)?;
            let manifest = run_pipeline(
                observations,
                rejects.len(),
                &input_path.display().to_string(),
                &config,
                &run.out,
            )?;
            println!(
                "pipeline complete: {} devices sampled, {} clusters, {} noise -> {}",
                manifest.counts.devices_sampled,
                manifest.counts.clusters,
                manifest.counts.noise,
                run.out.display()
            );
            Ok(())
        }
    }
}

/// Rebuilds a cluster assignment from the persisted CSV, aligned to the
/// report order.
fn read_assignment(
    path: &Path,
    reports: &[ConsumerReport],
) -> Result<semtraj::cluster::ClusterAssignment> {
    use semtraj::cluster::{ClusterAssignment, PointRole};
    let mut by_device: BTreeMap<String, (Option<usize>, PointRole)> = BTreeMap::new();
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    for record in reader.records() {
        let record = record?;
        let device = record.get(0).unwrap_or_default().to_string();
        let cluster: i64 = record.get(1).unwrap_or_default().parse()?;
        let role = match record.get(2).unwrap_or_default() {
            "core" => PointRole::Core,
            "border" => PointRole::Border,
            _ => PointRole::Noise,
        };
        let cluster = if cluster < 0 {
            None
        } else {
            Some(cluster as usize)
        };
        by_device.insert(device, (cluster, role));
    }
    let mut clusters = Vec::with_capacity(reports.len());
    let mut roles = Vec::with_capacity(reports.len());
    for report in reports {
        let (cluster, role) = by_device
            .get(&report.device_id)
            .copied()
            .with_context(|| format!("{} missing from assignment", report.device_id))?;
        clusters.push(cluster);
        roles.push(role);
    }
    let cluster_count = clusters.iter().flatten().map(|c| c + 1).max().unwrap_or(0);
    Ok(ClusterAssignment {
        clusters,
        roles,
        cluster_count,
    })
}
