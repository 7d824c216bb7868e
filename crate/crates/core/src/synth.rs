//! Seeded synthetic wireless-observation generator with ground truth.
//!
//! Agents follow one of four archetypes: regular commuters (direct home to
//! work and back), multi-leg commuters (interchange stations and a midday
//! excursion that plants a third rest location), shift workers (an inverted
//! schedule that commutes inside the evening and morning windows, the bait
//! for reversed labelling), and sporadic travellers (one-off trips to fresh
//! stations, never resting anywhere).
//!
//! Generated data reproduces the incompleteness phenomena of real feeds:
//! per-observation dropout, short in-station radio gaps, and the stuck-exit
//! quirk where a missed exit is recorded against a much later re-entry so a
//! single observation appears to span many hours.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use chrono_tz::Tz;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{BeaconKind, WirelessObservation};
use crate::Error;

/// Agent archetype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Archetype {
    RegularCommuter,
    MultiLegCommuter,
    ShiftWorker,
    SporadicTraveller,
}

impl Archetype {
    pub fn as_str(&self) -> &'static str {
        match self {
            Archetype::RegularCommuter => "regular_commuter",
            Archetype::MultiLegCommuter => "multi_leg_commuter",
            Archetype::ShiftWorker => "shift_worker",
            Archetype::SporadicTraveller => "sporadic_traveller",
        }
    }
}

/// Generator configuration. Probabilities apply per observation (dropout),
/// per station visit (blackspot gap) and per rest opportunity (stuck exit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub stations: Vec<String>,
    pub regular_commuters: usize,
    pub multi_leg_commuters: usize,
    pub shift_workers: usize,
    pub sporadic_travellers: usize,
    /// Calendar days simulated; commuters travel on weekdays.
    pub days: u32,
    pub event_dropout_prob: f64,
    pub missing_exit_prob: f64,
    pub blackspot_gap_prob: f64,
    pub seed: u64,
    #[serde(with = "tz_serde")]
    pub timezone: Tz,
}

mod tz_serde {
    use chrono_tz::Tz;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(tz: &Tz, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(tz.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Tz, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// Fifty generated station names, S001 through S050.
pub fn default_stations() -> Vec<String> {
    (1..=50).map(|i| format!("S{i:03}")).collect()
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            stations: default_stations(),
            regular_commuters: 50,
            multi_leg_commuters: 10,
            shift_workers: 5,
            sporadic_travellers: 10,
            days: 28,
            event_dropout_prob: 0.0,
            missing_exit_prob: 0.6,
            blackspot_gap_prob: 0.05,
            seed: 42,
            timezone: chrono_tz::Europe::London,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), Error> {
        for (name, value) in [
            ("event_dropout_prob", self.event_dropout_prob),
            ("missing_exit_prob", self.missing_exit_prob),
            ("blackspot_gap_prob", self.blackspot_gap_prob),
        ] {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        if self.days < 1 {
            return Err(Error::InvalidConfig("days must be at least 1".into()));
        }
        if self.stations.len() < 8 {
            return Err(Error::InvalidConfig(
                "need at least 8 stations to assign archetype routes".into(),
            ));
        }
        Ok(())
    }
}

/// Ground truth for one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTruth {
    pub device_id: String,
    pub archetype: Archetype,
    pub home: Option<String>,
    pub work: Option<String>,
    /// Stations on the planted commute route, home end first.
    pub route: Vec<String>,
}

/// Ground truth for a generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthManifest {
    pub seed: u64,
    pub days: u32,
    pub agents: Vec<AgentTruth>,
}

/// A generated corpus: observations per device plus the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub observations: BTreeMap<String, Vec<WirelessObservation>>,
    pub manifest: GroundTruthManifest,
}

/// First simulated day; a Monday, so `day % 7 < 5` selects weekdays.
const START_DATE: (i32, u32, u32) = (2018, 4, 9);

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent per-agent stream derived from the corpus seed and the agent
/// index, so agents can be generated in any order or in parallel.
fn agent_rng(seed: u64, agent_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(agent_index + 1)))
}

/// Epoch milliseconds of local wall-clock time on simulated day `day`.
fn local_ms(tz: Tz, day: u32, hour: u32, minute: u32, second: u32) -> i64 {
    use chrono::TimeZone;
    let date = NaiveDate::from_ymd_opt(START_DATE.0, START_DATE.1, START_DATE.2)
        .expect("valid base date")
        + chrono::Duration::days(i64::from(day));
    let naive = date
        .and_hms_opt(hour + minute / 60, minute % 60, second)
        .expect("valid wall-clock time");
    tz.from_local_datetime(&naive)
        .earliest()
        .expect("commute hours never fall in a DST gap")
        .timestamp_millis()
}

/// One station visit before quirks are applied.
#[derive(Debug, Clone)]
struct Visit {
    location: String,
    arrive_ms: i64,
    leave_ms: i64,
}

/// An agent's planned visits plus the visit pairs eligible for the
/// stuck-exit merge (an exit recorded against a later re-entry at the same
/// station).
#[derive(Debug, Default)]
struct VisitPlan {
    visits: Vec<Visit>,
    merge_pairs: Vec<(usize, usize)>,
}

impl VisitPlan {
    fn push(&mut self, location: &str, arrive_ms: i64, leave_ms: i64) -> usize {
        self.visits.push(Visit {
            location: location.to_string(),
            arrive_ms,
            leave_ms,
        });
        self.visits.len() - 1
    }
}

fn is_weekday(day: u32) -> bool {
    day % 7 < 5
}

struct CommuterShape {
    intermediates: Vec<String>,
    /// Detection probability per intermediate pass, (morning, evening).
    intermediate_detection: (f64, f64),
    lunch_station: Option<String>,
}

impl CommuterShape {
    fn direct() -> Self {
        Self {
            intermediates: Vec::new(),
            intermediate_detection: (0.0, 0.0),
            lunch_station: None,
        }
    }
}

/// Plans a commuting agent. Mornings depart home inside the 05:00-10:00
/// window and evenings re-enter home inside 17:00-21:00. The work visit and
/// the overnight home stay are stuck-exit candidates; days with a midday
/// excursion keep their work visits separate.
fn plan_commuter(
    rng: &mut ChaCha8Rng,
    home: &str,
    work: &str,
    shape: &CommuterShape,
    days: u32,
    tz: Tz,
) -> VisitPlan {
    let mut plan = VisitPlan::default();
    let mut pending_home_arrival: Option<usize> = None;

    for day in 0..days {
        if !is_weekday(day) {
            continue;
        }
        let lunch_today = shape.lunch_station.is_some() && day % 7 % 2 == 1; // Tue and Thu

        // Morning: home -> (intermediates) -> work.
        let home_arrive = local_ms(tz, day, 7, 30 + rng.gen_range(0..20), rng.gen_range(0..60));
        let home_leave = home_arrive + i64::from(rng.gen_range(180..300)) * 1000;
        let home_departure = plan.push(home, home_arrive, home_leave);
        if let Some(evening_arrival) = pending_home_arrival.take() {
            plan.merge_pairs.push((evening_arrival, home_departure));
        }
        let mut cursor = home_leave;
        for station in &shape.intermediates {
            cursor += i64::from(rng.gen_range(6..10)) * 60_000;
            if rng.gen_bool(shape.intermediate_detection.0) {
                let leave = cursor + i64::from(rng.gen_range(60..150)) * 1000;
                plan.push(station, cursor, leave);
                cursor = leave;
            }
        }
        // Total home-to-work travel keeps the arrival inside hour 8
        // whatever happened at the interchanges.
        let work_arrive =
            home_leave + i64::from(rng.gen_range(28..37)) * 60_000 + (cursor - home_leave) / 4;
        let work_leave_am = work_arrive + i64::from(rng.gen_range(180..300)) * 1000;
        let work_arrival = plan.push(work, work_arrive, work_leave_am);

        // Midday excursion: work -> lunch stop -> back, resting near the
        // lunch station long enough to plant a rest there.
        if lunch_today {
            if let Some(lunch) = &shape.lunch_station {
                let out_arrive =
                    local_ms(tz, day, 12, 28 + rng.gen_range(0..6), rng.gen_range(0..60));
                let out_leave = out_arrive + 4 * 60_000;
                plan.push(work, out_arrive, out_leave);
                let lunch_arrive = out_leave + 18 * 60_000;
                let lunch_leave = lunch_arrive + 4 * 60_000;
                plan.push(lunch, lunch_arrive, lunch_leave);
                let back_arrive = lunch_leave + i64::from(rng.gen_range(40..55)) * 60_000;
                let back_leave = back_arrive + 4 * 60_000;
                plan.push(lunch, back_arrive, back_leave);
                let work_back = back_leave + 18 * 60_000;
                plan.push(work, work_back, work_back + 4 * 60_000);
            }
        }

        // Evening: work -> (intermediates, reversed) -> home. Departure and
        // arrival jitters stay within 80 minutes of each other so the
        // evening stays one journey.
        let work_arrive_pm = local_ms(tz, day, 17, 25 + rng.gen_range(0..20), rng.gen_range(0..60));
        let work_leave_pm = work_arrive_pm + i64::from(rng.gen_range(180..300)) * 1000;
        let work_departure = plan.push(work, work_arrive_pm, work_leave_pm);
        if !lunch_today {
            plan.merge_pairs.push((work_arrival, work_departure));
        }
        let mut cursor = work_leave_pm;
        for station in shape.intermediates.iter().rev() {
            cursor += i64::from(rng.gen_range(6..10)) * 60_000;
            if rng.gen_bool(shape.intermediate_detection.1) {
                let leave = cursor + i64::from(rng.gen_range(60..150)) * 1000;
                plan.push(station, cursor, leave);
                cursor = leave;
            }
        }
        // Arrivals home sit inside hour 18 so the evening-entry signal has
        // a single modal bucket.
        let earliest = cursor + i64::from(rng.gen_range(18..26)) * 60_000;
        let scheduled = local_ms(tz, day, 18, 10 + rng.gen_range(0..30), rng.gen_range(0..60));
        let home_arrive_pm = earliest.max(scheduled);
        let home_leave_pm = home_arrive_pm + i64::from(rng.gen_range(180..300)) * 1000;
        pending_home_arrival = Some(plan.push(home, home_arrive_pm, home_leave_pm));
    }
    plan
}

/// Plans a night-shift agent: departs home in the evening window, rests at
/// the work station overnight, returns home in the morning window and rests
/// at home through the day. The commute hours land exactly where the
/// opposite labels score, so the labelling heuristic reverses home and work
/// for this archetype.
fn plan_shift_worker(rng: &mut ChaCha8Rng, home: &str, work: &str, days: u32, tz: Tz) -> VisitPlan {
    let mut plan = VisitPlan::default();
    let mut pending_work_arrival: Option<usize> = None;
    let mut pending_home_arrival: Option<usize> = None;

    for day in 0..days {
        if !is_weekday(day) {
            continue;
        }
        // Morning: end of the previous night's shift, work -> home.
        if pending_work_arrival.is_some() {
            let work_arrive_am = local_ms(tz, day, 6, rng.gen_range(0..15), rng.gen_range(0..60));
            let work_leave_am = work_arrive_am + i64::from(rng.gen_range(180..300)) * 1000;
            let work_departure = plan.push(work, work_arrive_am, work_leave_am);
            if let Some(arrival) = pending_work_arrival.take() {
                plan.merge_pairs.push((arrival, work_departure));
            }
            let home_arrive_am = work_leave_am + i64::from(rng.gen_range(25..33)) * 60_000;
            let home_leave_am = home_arrive_am + i64::from(rng.gen_range(180..300)) * 1000;
            pending_home_arrival = Some(plan.push(home, home_arrive_am, home_leave_am));
        }

        // Evening: home -> work for the night shift.
        let home_arrive_pm = local_ms(tz, day, 18, 25 + rng.gen_range(0..20), rng.gen_range(0..60));
        let home_leave_pm = home_arrive_pm + i64::from(rng.gen_range(180..300)) * 1000;
        let home_departure = plan.push(home, home_arrive_pm, home_leave_pm);
        if let Some(arrival) = pending_home_arrival.take() {
            plan.merge_pairs.push((arrival, home_departure));
        }
        let work_arrive_pm = home_leave_pm + i64::from(rng.gen_range(28..38)) * 60_000;
        let work_leave_pm = work_arrive_pm + i64::from(rng.gen_range(180..300)) * 1000;
        pending_work_arrival = Some(plan.push(work, work_arrive_pm, work_leave_pm));
    }
    plan
}

/// Plans a sporadic traveller: a handful of one-off trips at arbitrary
/// hours, each through stations the agent has never used before, so no
/// location ever accumulates a rest.
fn plan_sporadic(rng: &mut ChaCha8Rng, stations: &[String], days: u32, tz: Tz) -> VisitPlan {
    let mut plan = VisitPlan::default();
    let mut pool: Vec<&String> = stations.iter().collect();
    for i in (1..pool.len()).rev() {
        pool.swap(i, rng.gen_range(0..=i));
    }
    let mut pool = pool.into_iter();

    let trips = rng.gen_range(4..=9u32);
    for trip in 0..trips {
        // The first trip starts on day 0 and the last on the final day so
        // the trajectory always spans the simulated window.
        let day = if trip == 0 {
            0
        } else if trip == trips - 1 {
            days - 1
        } else {
            rng.gen_range(0..days)
        };
        let hour = rng.gen_range(6..22);
        let mut cursor = local_ms(tz, day, hour, rng.gen_range(0..50), rng.gen_range(0..60));
        let stops = rng.gen_range(2..=5usize);
        for _ in 0..stops {
            let Some(station) = pool.next() else {
                return plan;
            };
            let leave = cursor + i64::from(rng.gen_range(90..240)) * 1000;
            plan.push(station, cursor, leave);
            cursor = leave + i64::from(rng.gen_range(8..22)) * 60_000;
        }
    }
    plan
}

/// Converts a visit plan into observations, applying the stuck-exit merge
/// per candidate pair, a sub-30-minute radio gap per surviving visit, and
/// per-observation dropout. Observation ids are assigned in chronological
/// order after all quirks.
fn emit_observations(
    plan: VisitPlan,
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    device_id: &str,
) -> Vec<WirelessObservation> {
    let n = plan.visits.len();
    let mut merged_into: Vec<Option<usize>> = vec![None; n];
    let mut consumed: Vec<bool> = vec![false; n];
    for &(first, second) in &plan.merge_pairs {
        if cfg.missing_exit_prob > 0.0 && rng.gen_bool(cfg.missing_exit_prob) {
            merged_into[first] = Some(second);
            consumed[second] = true;
        }
    }

    // (location, entry, exit) spans after merging.
    let mut spans: Vec<(String, i64, i64)> = Vec::with_capacity(n);
    for (i, visit) in plan.visits.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        match merged_into[i] {
            Some(j) => spans.push((
                visit.location.clone(),
                visit.arrive_ms,
                plan.visits[j].leave_ms,
            )),
            None => {
                let dwell = visit.leave_ms - visit.arrive_ms;
                if cfg.blackspot_gap_prob > 0.0
                    && dwell >= 150_000
                    && rng.gen_bool(cfg.blackspot_gap_prob)
                {
                    // Radio shadow inside the station: two short spans with
                    // a gap well under the rest threshold.
                    let first_end = visit.arrive_ms + dwell / 3;
                    let gap = i64::from(rng.gen_range(30..90)) * 1000;
                    spans.push((visit.location.clone(), visit.arrive_ms, first_end));
                    spans.push((
                        visit.location.clone(),
                        (first_end + gap).min(visit.leave_ms - 1000),
                        visit.leave_ms,
                    ));
                } else {
                    spans.push((visit.location.clone(), visit.arrive_ms, visit.leave_ms));
                }
            }
        }
    }

    let mut kept: Vec<(String, i64, i64, BeaconKind)> = Vec::with_capacity(spans.len());
    for (location, entry, exit) in spans {
        let kind = if rng.gen_bool(0.5) {
            BeaconKind::Wap
        } else {
            BeaconKind::Ble
        };
        if cfg.event_dropout_prob > 0.0 && rng.gen_bool(cfg.event_dropout_prob) {
            continue;
        }
        kept.push((location, entry, exit, kind));
    }
    kept.sort_by(|a, b| (a.1, a.2, &a.0).cmp(&(b.1, b.2, &b.0)));

    kept.into_iter()
        .enumerate()
        .map(|(i, (location, entry, exit, kind))| {
            WirelessObservation::new(
                device_id,
                format!("{device_id}-{i:05}"),
                format!("{}-{}", kind.as_str(), location),
                kind,
                format!("R-{location}"),
                location,
                entry,
                exit,
            )
            .expect("generated observations are well-formed")
        })
        .collect()
}

fn pick_distinct<'a>(rng: &mut ChaCha8Rng, stations: &'a [String], n: usize) -> Vec<&'a String> {
    let mut indices: Vec<usize> = (0..stations.len()).collect();
    for i in (1..indices.len()).rev() {
        indices.swap(i, rng.gen_range(0..=i));
    }
    indices.truncate(n);
    indices.into_iter().map(|i| &stations[i]).collect()
}

/// Generates a corpus. Deterministic for a given configuration: running
/// twice yields identical observations and manifest.
pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput, Error> {
    cfg.validate()?;
    let mut observations = BTreeMap::new();
    let mut agents = Vec::new();
    let mut agent_index: u64 = 0;

    let archetypes = [
        (Archetype::RegularCommuter, cfg.regular_commuters),
        (Archetype::MultiLegCommuter, cfg.multi_leg_commuters),
        (Archetype::ShiftWorker, cfg.shift_workers),
        (Archetype::SporadicTraveller, cfg.sporadic_travellers),
    ];

    for (archetype, count) in archetypes {
        for _ in 0..count {
            let device_id = format!("dev-{agent_index:05}");
            let mut rng = agent_rng(cfg.seed, agent_index);
            let (plan, truth) = plan_agent(archetype, &device_id, &mut rng, cfg);
            let obs = emit_observations(plan, &mut rng, cfg, &device_id);
            observations.insert(device_id, obs);
            agents.push(truth);
            agent_index += 1;
        }
    }

    Ok(SynthOutput {
        observations,
        manifest: GroundTruthManifest {
            seed: cfg.seed,
            days: cfg.days,
            agents,
        },
    })
}

fn plan_agent(
    archetype: Archetype,
    device_id: &str,
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
) -> (VisitPlan, AgentTruth) {
    match archetype {
        Archetype::RegularCommuter => {
            let picks = pick_distinct(rng, &cfg.stations, 2);
            let (home, work) = (picks[0].clone(), picks[1].clone());
            let plan = plan_commuter(
                rng,
                &home,
                &work,
                &CommuterShape::direct(),
                cfg.days,
                cfg.timezone,
            );
            let route = vec![home.clone(), work.clone()];
            (
                plan,
                AgentTruth {
                    device_id: device_id.to_string(),
                    archetype,
                    home: Some(home),
                    work: Some(work),
                    route,
                },
            )
        }
        Archetype::MultiLegCommuter => {
            let picks = pick_distinct(rng, &cfg.stations, 4);
            let (home, work) = (picks[0].clone(), picks[1].clone());
            let shape = CommuterShape {
                intermediates: vec![picks[2].clone()],
                intermediate_detection: (0.6, 0.2),
                lunch_station: Some(picks[3].clone()),
            };
            let plan = plan_commuter(rng, &home, &work, &shape, cfg.days, cfg.timezone);
            let route = vec![home.clone(), picks[2].clone(), work.clone()];
            (
                plan,
                AgentTruth {
                    device_id: device_id.to_string(),
                    archetype,
                    home: Some(home),
                    work: Some(work),
                    route,
                },
            )
        }
        Archetype::ShiftWorker => {
            let picks = pick_distinct(rng, &cfg.stations, 2);
            let (home, work) = (picks[0].clone(), picks[1].clone());
            let plan = plan_shift_worker(rng, &home, &work, cfg.days, cfg.timezone);
            let route = vec![home.clone(), work.clone()];
            (
                plan,
                AgentTruth {
                    device_id: device_id.to_string(),
                    archetype,
                    home: Some(home),
                    work: Some(work),
                    route,
                },
            )
        }
        Archetype::SporadicTraveller => {
            let plan = plan_sporadic(rng, &cfg.stations, cfg.days, cfg.timezone);
            (
                plan,
                AgentTruth {
                    device_id: device_id.to_string(),
                    archetype,
                    home: None,
                    work: None,
                    route: Vec::new(),
                },
            )
        }
    }
}

pub mod fixtures {
    //! Fourteen seeded labelling scenarios with hand-derived expectations,
    //! mirroring the manually-inspected trajectory shapes: five commuter
    //! variants, five problematic variants (sparse, interchange dominance,
    //! inverted hours, too short, no rest locations) and four more regular
    //! shapes. Thirteen label correctly; the inverted-hours scenario is
    //! expected to come out reversed, reproducing the known failure mode of
    //! the window heuristic.

    use super::*;

    /// What the labelling stage is expected to produce for a fixture.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum LabelExpectation {
        /// Home and work match the ground truth.
        MatchesTruth,
        /// Home and work come out swapped (the documented failure mode).
        Reversed,
        /// No rest locations, so neither label is assigned.
        Unlabelled,
        /// The trajectory fails the validity filters.
        FilteredOut,
    }

    /// One labelled scenario.
    pub struct LabelFixture {
        pub name: &'static str,
        pub truth: AgentTruth,
        pub observations: Vec<WirelessObservation>,
        pub expectation: LabelExpectation,
        /// Exact journey string under the ground-truth labels, present when
        /// the scenario is deterministic enough to pin one.
        pub expected_journey_string: Option<String>,
    }

    /// Swaps the H and W tokens of a journey string.
    pub fn swap_home_work(journey_string: &str) -> String {
        journey_string
            .chars()
            .map(|c| match c {
                'H' => 'W',
                'W' => 'H',
                other => other,
            })
            .collect()
    }

    fn quirks(seed: u64, missing_exit_prob: f64, dropout: f64) -> SynthConfig {
        SynthConfig {
            regular_commuters: 0,
            multi_leg_commuters: 0,
            shift_workers: 0,
            sporadic_travellers: 0,
            event_dropout_prob: dropout,
            missing_exit_prob,
            blackspot_gap_prob: 0.0,
            seed,
            ..SynthConfig::default()
        }
    }

    fn truth(device: &str, archetype: Archetype, route: &[&str]) -> AgentTruth {
        AgentTruth {
            device_id: device.to_string(),
            archetype,
            home: route.first().map(|s| s.to_string()),
            work: route.last().map(|s| s.to_string()),
            route: route.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn weekdays(days: u32) -> impl Iterator<Item = u32> {
        (0..days).filter(|d| is_weekday(*d))
    }

    fn direct_string(days: u32) -> String {
        let parts: Vec<&str> = weekdays(days).flat_map(|_| ["HW", "WH"]).collect();
        parts.join("|")
    }

    #[allow(clippy::too_many_arguments)]
    fn commuter_fixture(
        name: &'static str,
        device: &str,
        seed: u64,
        days: u32,
        shape: CommuterShape,
        missing_exit: f64,
        dropout: f64,
        route: &[&str],
        expected: Option<String>,
    ) -> LabelFixture {
        let cfg = quirks(seed, missing_exit, dropout);
        let mut rng = agent_rng(seed, 0);
        let home = route[0];
        let work = route[route.len() - 1];
        let plan = plan_commuter(&mut rng, home, work, &shape, days, cfg.timezone);
        let observations = emit_observations(plan, &mut rng, &cfg, device);
        LabelFixture {
            name,
            truth: truth(device, Archetype::RegularCommuter, route),
            observations,
            expectation: LabelExpectation::MatchesTruth,
            expected_journey_string: expected,
        }
    }

    /// Direct commuter whose full route was captured exactly once, on the
    /// second Wednesday morning; every other journey sees endpoints only.
    fn single_capture_fixture(device: &str, seed: u64, days: u32) -> LabelFixture {
        let cfg = quirks(seed, 0.6, 0.0);
        let tz = cfg.timezone;
        let mut rng = agent_rng(seed, 0);
        let (home, work, i1, i2) = ("S011", "S012", "S013", "S014");
        let capture_day = 9; // second Wednesday

        let mut plan = VisitPlan::default();
        let mut pending_home_arrival: Option<usize> = None;
        let mut expected = Vec::new();
        for day in 0..days {
            if !is_weekday(day) {
                continue;
            }
            let home_arrive = local_ms(tz, day, 7, 30 + rng.gen_range(0..15), rng.gen_range(0..60));
            let home_leave = home_arrive + 240_000;
            let departure = plan.push(home, home_arrive, home_leave);
            if let Some(arrival) = pending_home_arrival.take() {
                plan.merge_pairs.push((arrival, departure));
            }
            if day == capture_day {
                plan.push(i1, home_leave + 7 * 60_000, home_leave + 8 * 60_000);
                plan.push(i2, home_leave + 14 * 60_000, home_leave + 15 * 60_000);
                expected.push("HUUW".to_string());
            } else {
                expected.push("HW".to_string());
            }
            let work_arrive = home_leave + 29 * 60_000;
            let work_arrival = plan.push(work, work_arrive, work_arrive + 240_000);

            let work_arrive_pm = local_ms(tz, day, 17, 25 + rng.gen_range(0..15), rng.gen_range(0..60));
            let work_departure = plan.push(work, work_arrive_pm, work_arrive_pm + 240_000);
            plan.merge_pairs.push((work_arrival, work_departure));
            let home_arrive_pm = local_ms(tz, day, 18, 10 + rng.gen_range(0..20), rng.gen_range(0..60));
            pending_home_arrival = Some(plan.push(home, home_arrive_pm, home_arrive_pm + 240_000));
            expected.push("WH".to_string());
        }
        let observations = emit_observations(plan, &mut rng, &cfg, device);
        LabelFixture {
            name: "commuter_route_captured_once",
            truth: truth(device, Archetype::RegularCommuter, &[home, work]),
            observations,
            expectation: LabelExpectation::MatchesTruth,
            expected_journey_string: Some(expected.join("|")),
        }
    }

    /// A handful of short hops inside one afternoon: too few points to pass
    /// the validity filters.
    fn too_short_fixture(device: &str) -> LabelFixture {
        let tz = chrono_tz::Europe::London;
        let mut observations = Vec::new();
        for (i, station) in ["S021", "S022", "S023", "S024"].iter().enumerate() {
            let arrive = local_ms(tz, 0, 14, i as u32 * 12, 0);
            observations.push(
                WirelessObservation::new(
                    device,
                    format!("{device}-{i:05}"),
                    format!("WAP-{station}"),
                    BeaconKind::Wap,
                    format!("R-{station}"),
                    *station,
                    arrive,
                    arrive + 120_000,
                )
                .expect("fixture observations are well-formed"),
            );
        }
        LabelFixture {
            name: "too_short_trajectory",
            truth: truth(device, Archetype::SporadicTraveller, &[]),
            observations,
            expectation: LabelExpectation::FilteredOut,
            expected_journey_string: None,
        }
    }

    /// Builds the full fourteen-scenario suite.
    pub fn label_fixture_suite() -> Vec<LabelFixture> {
        let mut suite = Vec::new();

        // Commuter shapes.
        suite.push(commuter_fixture(
            "direct_commuter",
            "fx-01",
            101,
            14,
            CommuterShape::direct(),
            0.6,
            0.0,
            &["S001", "S002"],
            Some(direct_string(14)),
        ));
        suite.push(commuter_fixture(
            "direct_commuter_second",
            "fx-02",
            102,
            21,
            CommuterShape::direct(),
            0.6,
            0.0,
            &["S003", "S004"],
            Some(direct_string(21)),
        ));
        let lunch_days: Vec<u32> = weekdays(14).filter(|d| d % 7 % 2 == 1).collect();
        let excursion_expected: Vec<&str> = weekdays(14)
            .flat_map(|d| {
                if lunch_days.contains(&d) {
                    vec!["HW", "WOW", "WH"]
                } else {
                    vec!["HW", "WH"]
                }
            })
            .collect();
        suite.push(commuter_fixture(
            "midday_excursion_commuter",
            "fx-03",
            103,
            14,
            CommuterShape {
                intermediates: Vec::new(),
                intermediate_detection: (0.0, 0.0),
                lunch_station: Some("S007".to_string()),
            },
            0.6,
            0.0,
            &["S005", "S006"],
            Some(excursion_expected.join("|")),
        ));
        suite.push(single_capture_fixture("fx-04", 104, 14));
        suite.push(commuter_fixture(
            "partial_route_commuter",
            "fx-05",
            105,
            21,
            CommuterShape {
                intermediates: vec!["S017".to_string(), "S018".to_string()],
                intermediate_detection: (0.5, 0.15),
                lunch_station: None,
            },
            0.6,
            0.0,
            &["S015", "S016"],
            None,
        ));

        // Problematic shapes.
        suite.push(commuter_fixture(
            "sparse_commuter",
            "fx-06",
            106,
            10,
            CommuterShape::direct(),
            0.6,
            0.35,
            &["S031", "S032"],
            None,
        ));
        let bait_expected: Vec<&str> = weekdays(14).flat_map(|_| ["HOW", "WH"]).collect();
        suite.push(commuter_fixture(
            "interchange_dominance_commuter",
            "fx-07",
            107,
            14,
            CommuterShape {
                intermediates: vec!["S035".to_string()],
                intermediate_detection: (1.0, 0.0),
                lunch_station: None,
            },
            0.6,
            0.0,
            &["S033", "S034"],
            Some(bait_expected.join("|")),
        ));
        suite.push({
            let cfg = quirks(108, 0.6, 0.0);
            let mut rng = agent_rng(108, 0);
            let (home, work) = ("S041", "S042");
            let days = 14;
            let plan = plan_shift_worker(&mut rng, home, work, days, cfg.timezone);
            let observations = emit_observations(plan, &mut rng, &cfg, "fx-08");
            // Day 0 has only the evening outbound journey; every later
            // weekday adds the morning return first.
            let mut expected = vec!["HW".to_string()];
            for _ in weekdays(days).skip(1) {
                expected.push("WH".to_string());
                expected.push("HW".to_string());
            }
            LabelFixture {
                name: "inverted_hours_shift_worker",
                truth: truth("fx-08", Archetype::ShiftWorker, &[home, work]),
                observations,
                expectation: LabelExpectation::Reversed,
                expected_journey_string: Some(expected.join("|")),
            }
        });
        suite.push(too_short_fixture("fx-09"));
        suite.push({
            let cfg = quirks(110, 0.0, 0.0);
            let mut rng = agent_rng(110, 0);
            let plan = plan_sporadic(&mut rng, &cfg.stations, 7, cfg.timezone);
            let observations = emit_observations(plan, &mut rng, &cfg, "fx-10");
            LabelFixture {
                name: "wandering_no_rest_locations",
                truth: truth("fx-10", Archetype::SporadicTraveller, &[]),
                observations,
                expectation: LabelExpectation::Unlabelled,
                expected_journey_string: None,
            }
        });

        // Further regular shapes.
        suite.push(commuter_fixture(
            "direct_commuter_long_window",
            "fx-11",
            111,
            35,
            CommuterShape::direct(),
            0.6,
            0.0,
            &["S043", "S044"],
            Some(direct_string(35)),
        ));
        suite.push(commuter_fixture(
            "direct_commuter_with_dropout",
            "fx-12",
            112,
            21,
            CommuterShape::direct(),
            0.6,
            0.2,
            &["S045", "S046"],
            None,
        ));
        suite.push(commuter_fixture(
            "multi_leg_with_excursion",
            "fx-13",
            113,
            21,
            CommuterShape {
                intermediates: vec!["S049".to_string()],
                intermediate_detection: (0.6, 0.2),
                lunch_station: Some("S050".to_string()),
            },
            0.6,
            0.0,
            &["S047", "S048"],
            None,
        ));
        suite.push(commuter_fixture(
            "commuter_every_exit_stuck",
            "fx-14",
            114,
            14,
            CommuterShape::direct(),
            1.0,
            0.0,
            &["S008", "S009"],
            Some(direct_string(14)),
        ));

        suite
    }
}
