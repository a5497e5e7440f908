//! Per-building power availability for the Base, controlled-outage (CO) and
//! rolling-outage (RO-DI damaged, RO-HI hardened) scenarios.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::Population;
use crate::rng::labeled_stream;
use crate::weather::format_timestamp;

/// Slack applied before flooring `availability · n_groups`, so that e.g.
/// `1/3 · 3` counts as one full group.
const GROUP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "base")]
    Base,
    #[serde(rename = "co")]
    Co,
    #[serde(rename = "ro-di")]
    RoDi,
    #[serde(rename = "ro-hi")]
    RoHi,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Base, Scenario::Co, Scenario::RoDi, Scenario::RoHi];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Base => "base",
            Scenario::Co => "co",
            Scenario::RoDi => "ro-di",
            Scenario::RoHi => "ro-hi",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scenario::Base => "Base",
            Scenario::Co => "CO",
            Scenario::RoDi => "RO-DI",
            Scenario::RoHi => "RO-HI",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str().eq_ignore_ascii_case(s) || sc.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}; expected base, co, ro-di or ro-hi")))
    }
}

/// Half-open event window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventWindow {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl EventWindow {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Self {
        Self { start, end }
    }

    /// Number of `dt`-second steps; the window must hold at least one whole
    /// step and be a multiple of `dt`.
    pub fn steps(&self, dt: i64) -> Result<usize> {
        if dt <= 0 {
            return Err(Error::Config(format!("time step must be > 0, got {dt}")));
        }
        let span = (self.end - self.start).num_seconds();
        if span <= 0 {
            return Err(Error::Range(format!(
                "event window [{}, {}) is empty",
                format_timestamp(self.start),
                format_timestamp(self.end)
            )));
        }
        if span % dt != 0 {
            return Err(Error::Range(format!("event window of {span} s is not a multiple of {dt} s")));
        }
        Ok((span / dt) as usize)
    }

    pub fn hours(&self) -> f64 {
        (self.end - self.start).num_seconds() as f64 / 3600.0
    }
}

/// Fraction of supply available per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilitySeries {
    pub slot_hours: f64,
    pub fractions: Vec<f64>,
}

impl AvailabilitySeries {
    pub fn new(slot_hours: f64, fractions: Vec<f64>) -> Result<Self> {
        let s = Self { slot_hours, fractions };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(slot_hours: f64, fraction: f64, slots: usize) -> Result<Self> {
        Self::new(slot_hours, vec![fraction; slots])
    }

    /// Builds a series from `(slot index, fraction)` pairs covering slots
    /// `0..n` exactly once each, in any order.
    pub fn from_pairs(slot_hours: f64, pairs: &[(usize, f64)]) -> Result<Self> {
        let mut fractions = vec![None; pairs.len()];
        for &(slot, f) in pairs {
            match fractions.get_mut(slot) {
                Some(cell @ None) => *cell = Some(f),
                Some(Some(_)) => return Err(Error::Config(format!("availability slot {slot} given twice"))),
                None => {
                    return Err(Error::Config(format!(
                        "availability slot {slot} leaves a gap; slots must be 0..{}",
                        pairs.len()
                    )))
                }
            }
        }
        Self::new(slot_hours, fractions.into_iter().map(Option::unwrap).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slot_hours > 0.0 && self.slot_hours.is_finite()) {
            return Err(Error::Config(format!("slot_hours must be > 0, got {}", self.slot_hours)));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::Config(format!("availability {f} outside [0, 1]")));
        }
        Ok(())
    }

    /// Slot length in whole seconds; errors if it is not a multiple of `dt`.
    pub fn slot_steps(&self, dt: i64) -> Result<usize> {
        let secs = self.slot_hours * 3600.0;
        if secs.fract() != 0.0 || (secs as i64) % dt != 0 {
            return Err(Error::Config(format!(
                "slot length {} h is not a whole multiple of the {dt} s time step",
                self.slot_hours
            )));
        }
        Ok((secs as i64 / dt) as usize)
    }
}

/// How the CO shed set is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShedSpec {
    /// Explicit building ids.
    Ids(Vec<u32>),
    /// Seeded uniform sample of this fraction of residential buildings.
    ResidentialFraction(f64),
}

impl Default for ShedSpec {
    fn default() -> Self {
        ShedSpec::Ids(Vec::new())
    }
}

/// Resolves a [`ShedSpec`] against the population.
pub fn resolve_shed_set(pop: &Population, spec: &ShedSpec, seed: u64) -> Result<BTreeSet<u32>> {
    match spec {
        ShedSpec::Ids(ids) => Ok(ids.iter().copied().collect()),
        ShedSpec::ResidentialFraction(f) => {
            if !(0.0..=1.0).contains(f) {
                return Err(Error::Config(format!("shed fraction {f} outside [0, 1]")));
            }
            let residential: Vec<u32> = pop.residential().map(|b| b.id).collect();
            let k = (f * residential.len() as f64).round() as usize;
            let mut rng = labeled_stream(seed, "shed");
            Ok(index::sample(&mut rng, residential.len(), k)
                .into_iter()
                .map(|i| residential[i])
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerScheduleSet {
    pub scenario: Scenario,
    pub window: EventWindow,
    /// Seconds per step.
    pub dt: i64,
    pub schedules: BTreeMap<u32, Vec<bool>>,
    pub isolated_ids: BTreeSet<u32>,
}

impl PowerScheduleSet {
    pub fn steps(&self) -> usize {
        self.schedules.values().next().map_or(0, Vec::len)
    }

    pub fn schedule(&self, id: u32) -> Option<&[bool]> {
        self.schedules.get(&id).map(Vec::as_slice)
    }

    /// Checks the structural invariants against the population.
    pub fn validate(&self, pop: &Population) -> Result<()> {
        let n = self.window.steps(self.dt)?;
        for b in &pop.buildings {
            let s = self
                .schedules
                .get(&b.id)
                .ok_or_else(|| Error::Mismatch(format!("building {} has no schedule", b.id)))?;
            if s.len() != n {
                return Err(Error::Mismatch(format!("building {} schedule has {} steps, expected {n}", b.id, s.len())));
            }
        }
        if self.schedules.len() != pop.len() {
            return Err(Error::Mismatch("schedules reference unknown buildings".into()));
        }
        if let Some(id) = self.isolated_ids.iter().find(|id| !self.schedules.contains_key(id)) {
            return Err(Error::Mismatch(format!("isolated id {id} is not in the population")));
        }
        Ok(())
    }
}

/// Picks `round(fault_fraction · n)` buildings uniformly without replacement.
pub fn select_isolated(pop: &Population, fault_fraction: f64, seed: u64) -> Result<BTreeSet<u32>> {
    if !(0.0..1.0).contains(&fault_fraction) {
        return Err(Error::Config(format!("fault_fraction {fault_fraction} outside [0, 1)")));
    }
    let n = pop.len();
    let k = (fault_fraction * n as f64).round() as usize;
    let mut rng = labeled_stream(seed, "isolation");
    Ok(index::sample(&mut rng, n, k)
        .into_iter()
        .map(|i| pop.buildings[i].id)
        .collect())
}

fn uniform_set(
    scenario: Scenario,
    pop: &Population,
    window: EventWindow,
    dt: i64,
    dark: &BTreeSet<u32>,
    isolated_ids: BTreeSet<u32>,
) -> Result<PowerScheduleSet> {
    let n = window.steps(dt)?;
    let schedules = pop
        .buildings
        .iter()
        .map(|b| (b.id, vec![!dark.contains(&b.id); n]))
        .collect();
    Ok(PowerScheduleSet {
        scenario,
        window,
        dt,
        schedules,
        isolated_ids,
    })
}

pub fn build_base_schedule(pop: &Population, window: EventWindow, dt: i64) -> Result<PowerScheduleSet> {
    uniform_set(Scenario::Base, pop, window, dt, &BTreeSet::new(), BTreeSet::new())
}

/// Buildings in the shed set or the faulted section lose power for the whole
/// window; everyone else keeps it.
pub fn build_controlled_outage(
    pop: &Population,
    window: EventWindow,
    dt: i64,
    shed_set: &BTreeSet<u32>,
    fault_fraction: f64,
    seed: u64,
) -> Result<PowerScheduleSet> {
    let known: BTreeSet<u32> = pop.ids().collect();
    if let Some(id) = shed_set.iter().find(|id| !known.contains(id)) {
        return Err(Error::Config(format!("shed set names unknown building {id}")));
    }
    let isolated = select_isolated(pop, fault_fraction, seed)?;
    let dark = shed_set.union(&isolated).copied().collect();
    uniform_set(Scenario::Co, pop, window, dt, &dark, isolated)
}

/// Residential ids split into `n_groups` equal-count consumption tiers,
/// heaviest consumers first. Ties go to the lower id first.
pub fn rolling_groups(pop: &Population, n_groups: usize) -> Vec<Vec<u32>> {
    let mut res: Vec<(f64, u32)> = pop.residential().map(|b| (b.avg_annual_kwh, b.id)).collect();
    res.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let total = res.len();
    let mut groups = vec![Vec::new(); n_groups];
    for (i, (_, id)) in res.into_iter().enumerate() {
        groups[i * n_groups / total.max(1)].push(id);
    }
    groups
}

/// Per slot, `k = floor(availability · n_groups)` residential groups are
/// served. Served groups rotate round-robin from slot to slot. Commercial
/// buildings stay powered; isolated buildings are dark unless `hardened`.
#[allow(clippy::too_many_arguments)]
pub fn build_rolling_outage(
    pop: &Population,
    window: EventWindow,
    dt: i64,
    n_groups: usize,
    availability: &AvailabilitySeries,
    hardened: bool,
    fault_fraction: f64,
    seed: u64,
) -> Result<PowerScheduleSet> {
    if n_groups < 2 {
        return Err(Error::Config(format!("rolling outage needs at least 2 groups, got {n_groups}")));
    }
    availability.validate()?;
    let n = window.steps(dt)?;
    let per_slot = availability.slot_steps(dt)?;
    let n_slots = n.div_ceil(per_slot);
    if availability.fractions.len() < n_slots {
        return Err(Error::Range(format!(
            "availability covers {} slots, the window needs {n_slots}",
            availability.fractions.len()
        )));
    }

    let groups = rolling_groups(pop, n_groups);
    let mut group_on = vec![vec![true; n_slots]; n_groups];
    let mut pointer = 0usize;
    for (slot, &a) in availability.fractions[..n_slots].iter().enumerate() {
        let k = ((a * n_groups as f64 + GROUP_EPS).floor() as usize).min(n_groups);
        if k == n_groups {
            continue;
        }
        for (g, on) in group_on.iter_mut().enumerate() {
            on[slot] = (g + n_groups - pointer) % n_groups < k;
        }
        pointer = (pointer + k) % n_groups;
    }

    let isolated = if hardened {
        BTreeSet::new()
    } else {
        select_isolated(pop, fault_fraction, seed)?
    };
    let mut group_of = BTreeMap::new();
    for (g, ids) in groups.iter().enumerate() {
        for &id in ids {
            group_of.insert(id, g);
        }
    }
    let schedules = pop
        .buildings
        .iter()
        .map(|b| {
            let series = if isolated.contains(&b.id) {
                vec![false; n]
            } else if let Some(&g) = group_of.get(&b.id) {
                (0..n).map(|i| group_on[g][i / per_slot]).collect()
            } else {
                vec![true; n]
            };
            (b.id, series)
        })
        .collect();
    Ok(PowerScheduleSet {
        scenario: if hardened { Scenario::RoHi } else { Scenario::RoDi },
        window,
        dt,
        schedules,
        isolated_ids: isolated,
    })
}

/// Longest unpowered run, in hours.
pub fn max_contiguous_off(schedule: &[bool], dt: i64) -> f64 {
    let mut best = 0usize;
    let mut run = 0usize;
    for &on in schedule {
        run = if on { 0 } else { run + 1 };
        best = best.max(run);
    }
    (best as i64 * dt) as f64 / 3600.0
}

pub fn unpowered_hours(schedule: &[bool], dt: i64) -> f64 {
    (schedule.iter().filter(|&&on| !on).count() as i64 * dt) as f64 / 3600.0
}

pub const SCHEDULE_COLUMNS: [&str; 3] = ["building_id", "slot_start", "powered"];

/// Run-length form: one row each time a building's state changes (plus the
/// window start). A row's state holds until the building's next row or the
/// end of the window.
pub fn write_schedule_csv<W: Write>(set: &PowerScheduleSet, writer: W) -> Result<()> {
    let wrap = |e: csv::Error| Error::Runtime(format!("schedule CSV: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SCHEDULE_COLUMNS).map_err(wrap)?;
    for (id, series) in &set.schedules {
        let id = id.to_string();
        let mut prev = None;
        for (i, &on) in series.iter().enumerate() {
            if prev != Some(on) {
                let t = set.window.start + Duration::seconds(set.dt * i as i64);
                w.write_record([id.as_str(), &format_timestamp(t), if on { "true" } else { "false" }])
                    .map_err(wrap)?;
                prev = Some(on);
            }
        }
    }
    w.flush().map_err(|e| Error::Runtime(format!("schedule CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::{synthesize_population, BuildingKind, PopulationSpec};
    use chrono::TimeZone;

    fn feeder() -> Population {
        synthesize_population(&PopulationSpec::default(), 1).unwrap()
    }

    fn small() -> Population {
        let spec = PopulationSpec {
            counts: [(BuildingKind::SingleFamily, 30), (BuildingKind::Office, 3)].into_iter().collect(),
            ..Default::default()
        };
        synthesize_population(&spec, 2).unwrap()
    }

    fn window(hours: i64) -> EventWindow {
        let start = Utc.with_ymd_and_hms(2021, 2, 15, 0, 0, 0).unwrap();
        EventWindow::new(start, start + Duration::hours(hours))
    }

    #[test]
    fn base_is_all_powered() {
        let pop = feeder();
        let set = build_base_schedule(&pop, window(96), 300).unwrap();
        assert_eq!(set.schedules.len(), 1403);
        assert!(set.schedules.values().all(|s| s.len() == 1152 && s.iter().all(|&on| on)));
        assert!(set.isolated_ids.is_empty());
        set.validate(&pop).unwrap();
    }

    #[test]
    fn empty_window_is_an_error() {
        assert!(matches!(build_base_schedule(&small(), window(0), 300), Err(Error::Range(_))));
    }

    #[test]
    fn isolation_size_and_determinism() {
        let pop = feeder();
        assert!(select_isolated(&pop, 0.0, 1).unwrap().is_empty());
        let a = select_isolated(&pop, 0.034, 1).unwrap();
        let b = select_isolated(&pop, 0.034, 2).unwrap();
        assert_eq!(a.len(), 48);
        assert_eq!(b.len(), 48);
        assert_ne!(a, b);
        assert_eq!(a, select_isolated(&pop, 0.034, 1).unwrap());
        assert!(select_isolated(&pop, 1.0, 1).is_err());
    }

    #[test]
    fn degenerate_co_is_base() {
        let pop = small();
        let co = build_controlled_outage(&pop, window(24), 300, &BTreeSet::new(), 0.0, 1).unwrap();
        let base = build_base_schedule(&pop, window(24), 300).unwrap();
        assert_eq!(co.schedules, base.schedules);
    }

    #[test]
    fn co_shedding_all_residential() {
        let pop = small();
        let shed: BTreeSet<u32> = pop.residential().map(|b| b.id).collect();
        let co = build_controlled_outage(&pop, window(24), 300, &shed, 0.0, 1).unwrap();
        for b in &pop.buildings {
            let s = co.schedule(b.id).unwrap();
            assert!(s.iter().all(|&on| on == !b.is_residential()));
        }
    }

    #[test]
    fn co_unknown_shed_id() {
        let pop = small();
        let shed = [9999].into_iter().collect();
        assert!(build_controlled_outage(&pop, window(24), 300, &shed, 0.0, 1).is_err());
    }

    #[test]
    fn full_availability_is_base() {
        let pop = small();
        let a = AvailabilitySeries::constant(1.0, 1.0, 24).unwrap();
        let ro = build_rolling_outage(&pop, window(24), 300, 3, &a, true, 0.034, 1).unwrap();
        let base = build_base_schedule(&pop, window(24), 300).unwrap();
        assert_eq!(ro.schedules, base.schedules);
    }

    #[test]
    fn one_group_at_a_time_gives_two_hour_outages() {
        let pop = feeder();
        let a = AvailabilitySeries::constant(1.0, 1.0 / 3.0, 96).unwrap();
        let ro = build_rolling_outage(&pop, window(96), 300, 3, &a, true, 0.034, 1).unwrap();
        for b in &pop.buildings {
            let s = ro.schedule(b.id).unwrap();
            let expect = if b.is_residential() { 2.0 } else { 0.0 };
            assert_eq!(max_contiguous_off(s, 300), expect, "building {}", b.id);
        }
    }

    #[test]
    fn groups_are_tiered_by_consumption() {
        let pop = feeder();
        let groups = rolling_groups(&pop, 3);
        let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![436, 436, 436]);
        let kwh = |id: u32| pop.get(id).unwrap().avg_annual_kwh;
        let min0 = groups[0].iter().map(|&id| kwh(id)).fold(f64::INFINITY, f64::min);
        let max1 = groups[1].iter().map(|&id| kwh(id)).fold(0.0, f64::max);
        assert!(min0 >= max1);
    }

    #[test]
    fn slots_must_fit_the_step() {
        let a = AvailabilitySeries::constant(0.1, 0.5, 1000).unwrap();
        assert!(build_rolling_outage(&small(), window(24), 300, 3, &a, true, 0.0, 1).is_err());
        let short = AvailabilitySeries::constant(1.0, 0.5, 23).unwrap();
        assert!(matches!(
            build_rolling_outage(&small(), window(24), 300, 3, &short, true, 0.0, 1),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn damaged_isolation_is_dark_all_window() {
        let pop = feeder();
        let a = AvailabilitySeries::constant(1.0, 1.0 / 3.0, 96).unwrap();
        let di = build_rolling_outage(&pop, window(96), 300, 3, &a, false, 0.034, 5).unwrap();
        assert_eq!(di.isolated_ids.len(), 48);
        for id in &di.isolated_ids {
            assert_eq!(max_contiguous_off(di.schedule(*id).unwrap(), 300), 96.0);
        }
        assert_eq!(di.isolated_ids, select_isolated(&pop, 0.034, 5).unwrap());
    }

    #[test]
    fn availability_pairs() {
        let a = AvailabilitySeries::from_pairs(1.0, &[(1, 0.5), (0, 0.2)]).unwrap();
        assert_eq!(a.fractions, vec![0.2, 0.5]);
        assert!(AvailabilitySeries::from_pairs(1.0, &[(0, 0.5), (2, 0.2)]).is_err());
        assert!(AvailabilitySeries::from_pairs(1.0, &[(0, 1.5)]).is_err());
    }

    #[test]
    fn max_off_examples() {
        assert_eq!(max_contiguous_off(&[true; 12], 3600), 0.0);
        assert_eq!(max_contiguous_off(&vec![false; 96 * 12], 300), 96.0);
        let alternating: Vec<bool> = (0..48).map(|h| h % 2 == 0).collect();
        assert_eq!(max_contiguous_off(&alternating, 3600), 1.0);
    }

    #[test]
    fn shed_fraction_is_residential_only() {
        let pop = feeder();
        let shed = resolve_shed_set(&pop, &ShedSpec::ResidentialFraction(0.1), 3).unwrap();
        assert_eq!(shed.len(), 131);
        assert!(shed.iter().all(|&id| pop.get(id).unwrap().is_residential()));
    }

    #[test]
    fn scenario_names() {
        for sc in Scenario::ALL {
            assert_eq!(sc.as_str().parse::<Scenario>().unwrap(), sc);
            assert_eq!(sc.label().parse::<Scenario>().unwrap(), sc);
        }
        assert!("blackout".parse::<Scenario>().is_err());
    }

    #[test]
    fn schedule_csv_is_run_length() {
        let pop = small();
        let a = AvailabilitySeries::constant(1.0, 1.0 / 3.0, 3).unwrap();
        let ro = build_rolling_outage(&pop, window(3), 300, 3, &a, true, 0.0, 1).unwrap();
        let mut buf = Vec::new();
        write_schedule_csv(&ro, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "building_id,slot_start,powered");
        // groups 0 and 2 change state once, group 1 twice; commercial never
        assert_eq!(text.lines().count(), 1 + 10 * 2 + 10 * 3 + 10 * 2 + 3);
    }
}
