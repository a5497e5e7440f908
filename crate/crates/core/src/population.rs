//! Building and occupant population: synthesis from a [`PopulationSpec`],
//! CSV persistence and invariant checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::LogNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::{TruncNormalParams, TruncatedNormal};
use crate::rng::labeled_stream;

/// Weight-sum tolerance for categorical mixes.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildingKind {
    SingleFamily,
    MultiFamily,
    MobileHome,
    Office,
    WarehouseStorage,
    BigBox,
    StripMall,
    Education,
    FoodService,
    FoodSales,
    Lodging,
    Healthcare,
    LowOccupancy,
}

impl BuildingKind {
    pub const ALL: [BuildingKind; 13] = [
        BuildingKind::SingleFamily,
        BuildingKind::MultiFamily,
        BuildingKind::MobileHome,
        BuildingKind::Office,
        BuildingKind::WarehouseStorage,
        BuildingKind::BigBox,
        BuildingKind::StripMall,
        BuildingKind::Education,
        BuildingKind::FoodService,
        BuildingKind::FoodSales,
        BuildingKind::Lodging,
        BuildingKind::Healthcare,
        BuildingKind::LowOccupancy,
    ];

    pub fn is_residential(self) -> bool {
        matches!(
            self,
            BuildingKind::SingleFamily | BuildingKind::MultiFamily | BuildingKind::MobileHome
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BuildingKind::SingleFamily => "single_family",
            BuildingKind::MultiFamily => "multi_family",
            BuildingKind::MobileHome => "mobile_home",
            BuildingKind::Office => "office",
            BuildingKind::WarehouseStorage => "warehouse_storage",
            BuildingKind::BigBox => "big_box",
            BuildingKind::StripMall => "strip_mall",
            BuildingKind::Education => "education",
            BuildingKind::FoodService => "food_service",
            BuildingKind::FoodSales => "food_sales",
            BuildingKind::Lodging => "lodging",
            BuildingKind::Healthcare => "healthcare",
            BuildingKind::LowOccupancy => "low_occupancy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Residential,
    SmallCi,
    MediumCi,
    LargeCi,
}

impl Sector {
    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Residential => "residential",
            Sector::SmallCi => "small_ci",
            Sector::MediumCi => "medium_ci",
            Sector::LargeCi => "large_ci",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BuildingClass {
    pub kind: BuildingKind,
    pub sector: Sector,
}

/// Kind → sector assignment. Residential kinds always map to
/// [`Sector::Residential`]; commercial kinds map to a C&I size class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SectorMap(pub BTreeMap<BuildingKind, Sector>);

impl Default for SectorMap {
    fn default() -> Self {
        use BuildingKind::*;
        let map = BuildingKind::ALL
            .iter()
            .map(|&k| {
                let s = match k {
                    SingleFamily | MultiFamily | MobileHome => Sector::Residential,
                    WarehouseStorage | StripMall | FoodService | FoodSales | LowOccupancy => {
                        Sector::SmallCi
                    }
                    Office | Education | Lodging => Sector::MediumCi,
                    BigBox | Healthcare => Sector::LargeCi,
                };
                (k, s)
            })
            .collect();
        SectorMap(map)
    }
}

impl SectorMap {
    pub fn sector(&self, kind: BuildingKind) -> Sector {
        self.0.get(&kind).copied().unwrap_or_else(|| SectorMap::default().0[&kind])
    }

    pub fn validate(&self) -> Result<()> {
        for (&kind, &sector) in &self.0 {
            if kind.is_residential() != (sector == Sector::Residential) {
                return Err(Error::Config(format!(
                    "sector_map: {} cannot map to {}",
                    kind.as_str(),
                    sector.as_str()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Insulation {
    Little,
    Poor,
    BelowAverage,
    Average,
    AboveAverage,
    Good,
    VeryGood,
}

impl Insulation {
    /// Ordered from least to most insulated.
    pub const ALL: [Insulation; 7] = [
        Insulation::Little,
        Insulation::Poor,
        Insulation::BelowAverage,
        Insulation::Average,
        Insulation::AboveAverage,
        Insulation::Good,
        Insulation::VeryGood,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Insulation::Little => "little",
            Insulation::Poor => "poor",
            Insulation::BelowAverage => "below_average",
            Insulation::Average => "average",
            Insulation::AboveAverage => "above_average",
            Insulation::Good => "good",
            Insulation::VeryGood => "very_good",
        }
    }
}

/// Envelope conductance and lumped heat capacity per unit floor area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalIntegrity {
    /// W/(m²·°C)
    pub ua_per_m2: f64,
    /// J/(m²·°C)
    pub mass_per_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InsulationTable(pub BTreeMap<Insulation, ThermalIntegrity>);

impl Default for InsulationTable {
    fn default() -> Self {
        let ua = [3.6, 2.8, 2.2, 1.7, 1.3, 1.0, 0.75];
        InsulationTable(
            Insulation::ALL
                .iter()
                .zip(ua)
                .map(|(&i, ua_per_m2)| {
                    (
                        i,
                        ThermalIntegrity {
                            ua_per_m2,
                            mass_per_m2: 200_000.0,
                        },
                    )
                })
                .collect(),
        )
    }
}

impl InsulationTable {
    pub fn get(&self, insulation: Insulation) -> Result<ThermalIntegrity> {
        self.0.get(&insulation).copied().ok_or_else(|| {
            Error::Config(format!("insulation_table has no row for {}", insulation.as_str()))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatingFuel {
    Electric,
    GasWithElectricBlower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncomeBracket {
    Low,
    Median,
    High,
}

/// One customer premise. Field names double as the population CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub id: u32,
    pub kind: BuildingKind,
    pub sector: Sector,
    pub insulation: Insulation,
    pub heating_fuel: HeatingFuel,
    /// m²
    pub floor_area: f64,
    /// W/°C
    pub ua: f64,
    /// J/°C
    pub thermal_mass: f64,
    /// W
    pub hvac_heat_capacity: f64,
    /// °C
    pub setpoint: f64,
    /// °C
    pub deadband: f64,
    pub n_occupants: u32,
    pub n_workers: u32,
    pub job_requires_power: bool,
    /// kWh/year
    pub avg_annual_kwh: f64,
    pub annual_income_bracket: Option<IncomeBracket>,
    pub backup: bool,
}

impl Building {
    pub fn class(&self) -> BuildingClass {
        BuildingClass {
            kind: self.kind,
            sector: self.sector,
        }
    }

    pub fn is_residential(&self) -> bool {
        self.sector == Sector::Residential
    }
}

pub const POPULATION_COLUMNS: [&str; 17] = [
    "id",
    "kind",
    "sector",
    "insulation",
    "heating_fuel",
    "floor_area",
    "ua",
    "thermal_mass",
    "hvac_heat_capacity",
    "setpoint",
    "deadband",
    "n_occupants",
    "n_workers",
    "job_requires_power",
    "avg_annual_kwh",
    "annual_income_bracket",
    "backup",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub buildings: Vec<Building>,
    pub total_occupants: u64,
    /// Seed used for synthesis; `None` for populations read from a file.
    pub seed_used: Option<u64>,
}

impl Population {
    pub fn new(buildings: Vec<Building>, seed_used: Option<u64>) -> Self {
        let total_occupants = buildings.iter().map(|b| u64::from(b.n_occupants)).sum();
        Self {
            buildings,
            total_occupants,
            seed_used,
        }
    }

    pub fn len(&self) -> usize {
        self.buildings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buildings.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.buildings.iter().map(|b| b.id)
    }

    pub fn get(&self, id: u32) -> Option<&Building> {
        self.buildings.iter().find(|b| b.id == id)
    }

    pub fn residential(&self) -> impl Iterator<Item = &Building> {
        self.buildings.iter().filter(|b| b.is_residential())
    }
}

/// Per-sector-group pair of values (residential vs. commercial).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitValue {
    pub residential: f64,
    pub commercial: f64,
}

/// Recipe for synthesizing a population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSpec {
    pub counts: BTreeMap<BuildingKind, u32>,
    pub insulation_weights: BTreeMap<Insulation, f64>,
    /// Weights for 1, 2, … residential occupants.
    pub occupant_weights: Vec<f64>,
    pub residential_floor_area: TruncNormalParams,
    pub commercial_floor_area: TruncNormalParams,
    /// Probability that a resident works from home during the event.
    pub work_from_home_probability: f64,
    /// Inclusive worker-count range for commercial buildings.
    pub commercial_workers: [u32; 2],
    pub job_requires_power: SplitValue,
    pub electric_heat_fraction: f64,
    /// Probability that a C&I building has backup generation.
    pub backup_probability: f64,
    pub setpoint: f64,
    pub deadband: f64,
    /// kWh/(m²·year) before lognormal scatter.
    pub kwh_per_m2: SplitValue,
    pub kwh_log_sigma: f64,
    /// Heating design outdoor temperature (°C) used to size HVAC capacity.
    pub hvac_design_outdoor: f64,
    pub hvac_oversize: f64,
    pub insulation_table: InsulationTable,
    pub sector_map: SectorMap,
    pub income_bracket: IncomeBracket,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        let mut counts = BTreeMap::new();
        counts.insert(BuildingKind::SingleFamily, 1000);
        counts.insert(BuildingKind::MultiFamily, 250);
        counts.insert(BuildingKind::MobileHome, 58);
        // 95 commercial buildings spread evenly over the ten C&I kinds
        for (i, kind) in BuildingKind::ALL.iter().filter(|k| !k.is_residential()).enumerate() {
            counts.insert(*kind, if i < 5 { 10 } else { 9 });
        }
        let insulation_weights = Insulation::ALL
            .iter()
            .zip([0.05, 0.15, 0.20, 0.25, 0.17, 0.12, 0.06])
            .map(|(&i, w)| (i, w))
            .collect();
        Self {
            counts,
            insulation_weights,
            occupant_weights: vec![0.27, 0.34, 0.15, 0.14, 0.06, 0.04],
            residential_floor_area: TruncNormalParams::new(160.0, 45.0, 60.0, 400.0),
            commercial_floor_area: TruncNormalParams::new(1500.0, 600.0, 300.0, 5000.0),
            work_from_home_probability: 0.3,
            commercial_workers: [5, 40],
            job_requires_power: SplitValue {
                residential: 0.8,
                commercial: 1.0,
            },
            electric_heat_fraction: 0.6,
            backup_probability: 0.1,
            setpoint: 20.0,
            deadband: 1.0,
            kwh_per_m2: SplitValue {
                residential: 75.0,
                commercial: 200.0,
            },
            kwh_log_sigma: 0.25,
            hvac_design_outdoor: -15.0,
            hvac_oversize: 1.5,
            insulation_table: InsulationTable::default(),
            sector_map: SectorMap::default(),
            income_bracket: IncomeBracket::Median,
        }
    }
}

fn check_weights(name: &str, weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Config(format!("{name}: no weights given")));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Config(format!("{name}: weights must be finite and >= 0")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::Config(format!("{name}: weights sum to {sum}, expected 1")));
    }
    Ok(())
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<()> {
        let total: u64 = self.counts.values().map(|&c| u64::from(c)).sum();
        if total == 0 {
            return Err(Error::Config("population spec has zero buildings".into()));
        }
        if total > u64::from(u32::MAX) {
            return Err(Error::Config("population spec has too many buildings".into()));
        }
        let weights: Vec<f64> = self.insulation_weights.values().copied().collect();
        check_weights("insulation_weights", &weights)?;
        check_weights("occupant_weights", &self.occupant_weights)?;
        for (&ins, &w) in &self.insulation_weights {
            if w > 0.0 {
                let row = self.insulation_table.get(ins)?;
                if !(row.ua_per_m2 > 0.0 && row.mass_per_m2 > 0.0) {
                    return Err(Error::Config(format!(
                        "insulation_table row {} must have positive ua and mass",
                        ins.as_str()
                    )));
                }
            }
        }
        self.residential_floor_area.validate()?;
        self.commercial_floor_area.validate()?;
        if self.residential_floor_area.min <= 0.0 || self.commercial_floor_area.min <= 0.0 {
            return Err(Error::Config("floor area windows must be strictly positive".into()));
        }
        check_probability("work_from_home_probability", self.work_from_home_probability)?;
        check_probability("job_requires_power.residential", self.job_requires_power.residential)?;
        check_probability("job_requires_power.commercial", self.job_requires_power.commercial)?;
        check_probability("electric_heat_fraction", self.electric_heat_fraction)?;
        check_probability("backup_probability", self.backup_probability)?;
        if self.commercial_workers[0] > self.commercial_workers[1] {
            return Err(Error::Config("commercial_workers range is empty".into()));
        }
        if !(self.deadband > 0.0) || !self.setpoint.is_finite() {
            return Err(Error::Config("setpoint must be finite and deadband > 0".into()));
        }
        if !(self.kwh_per_m2.residential > 0.0 && self.kwh_per_m2.commercial > 0.0) {
            return Err(Error::Config("kwh_per_m2 must be > 0".into()));
        }
        if !(self.kwh_log_sigma >= 0.0 && self.kwh_log_sigma.is_finite()) {
            return Err(Error::Config("kwh_log_sigma must be >= 0".into()));
        }
        if !(self.hvac_oversize > 0.0) || self.hvac_design_outdoor >= self.setpoint {
            return Err(Error::Config(
                "hvac sizing needs oversize > 0 and design outdoor temperature below setpoint".into(),
            ));
        }
        self.sector_map.validate()
    }
}

/// Builds a population deterministically from `(spec, seed)`. Buildings get
/// ids `1..=n` in [`BuildingKind::ALL`] order.
pub fn synthesize_population(spec: &PopulationSpec, seed: u64) -> Result<Population> {
    spec.validate()?;
    let mut rng = labeled_stream(seed, "population");

    let insulation_classes: Vec<Insulation> = spec.insulation_weights.keys().copied().collect();
    let insulation_weights: Vec<f64> = spec.insulation_weights.values().copied().collect();
    let insulation_dist = WeightedIndex::new(&insulation_weights)
        .map_err(|e| Error::Config(format!("insulation_weights: {e}")))?;
    let occupant_dist = WeightedIndex::new(&spec.occupant_weights)
        .map_err(|e| Error::Config(format!("occupant_weights: {e}")))?;
    let res_area = TruncatedNormal::new(spec.residential_floor_area)?;
    let com_area = TruncatedNormal::new(spec.commercial_floor_area)?;
    let kwh_scatter = LogNormal::new(0.0, spec.kwh_log_sigma)
        .map_err(|e| Error::Config(format!("kwh_log_sigma: {e}")))?;

    let mut buildings = Vec::new();
    let mut next_id = 1u32;
    for kind in BuildingKind::ALL {
        let count = spec.counts.get(&kind).copied().unwrap_or(0);
        let sector = spec.sector_map.sector(kind);
        let residential = kind.is_residential();
        for _ in 0..count {
            let insulation = insulation_classes[insulation_dist.sample(&mut rng)];
            let integrity = spec.insulation_table.get(insulation)?;
            let floor_area = if residential {
                res_area.sample(&mut rng)
            } else {
                com_area.sample(&mut rng)
            };
            let heating_fuel = if rng.random::<f64>() < spec.electric_heat_fraction {
                HeatingFuel::Electric
            } else {
                HeatingFuel::GasWithElectricBlower
            };
            let (n_occupants, n_workers) = if residential {
                let occupants = occupant_dist.sample(&mut rng) as u32 + 1;
                let workers = (0..occupants)
                    .filter(|_| rng.random::<f64>() < spec.work_from_home_probability)
                    .count() as u32;
                (occupants, workers)
            } else {
                let [lo, hi] = spec.commercial_workers;
                let workers = rng.random_range(lo..=hi);
                (workers, workers)
            };
            let p_power = if residential {
                spec.job_requires_power.residential
            } else {
                spec.job_requires_power.commercial
            };
            let job_requires_power = rng.random::<f64>() < p_power;
            let backup = !residential && rng.random::<f64>() < spec.backup_probability;
            let intensity = if residential {
                spec.kwh_per_m2.residential
            } else {
                spec.kwh_per_m2.commercial
            };
            let avg_annual_kwh = floor_area * intensity * kwh_scatter.sample(&mut rng);

            let ua = integrity.ua_per_m2 * floor_area;
            buildings.push(Building {
                id: next_id,
                kind,
                sector,
                insulation,
                heating_fuel,
                floor_area,
                ua,
                thermal_mass: integrity.mass_per_m2 * floor_area,
                hvac_heat_capacity: ua * (spec.setpoint - spec.hvac_design_outdoor) * spec.hvac_oversize,
                setpoint: spec.setpoint,
                deadband: spec.deadband,
                n_occupants,
                n_workers,
                job_requires_power,
                avg_annual_kwh,
                annual_income_bracket: residential.then_some(spec.income_bracket),
                backup,
            });
            next_id += 1;
        }
    }
    Ok(Population::new(buildings, Some(seed)))
}

/// One failed invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// `None` for population-level checks.
    pub building_id: Option<u32>,
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.building_id {
            Some(id) => write!(f, "building {id}: {}: {}", self.field, self.message),
            None => write!(f, "population: {}: {}", self.field, self.message),
        }
    }
}

pub fn validate_population(pop: &Population) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for b in &pop.buildings {
        let mut bad = |field: &'static str, message: String| {
            out.push(Violation {
                building_id: Some(b.id),
                field,
                message,
            })
        };
        if !seen.insert(b.id) {
            bad("id", "duplicate id".into());
        }
        if !(b.ua > 0.0 && b.ua.is_finite()) {
            bad("ua", format!("must be > 0, got {}", b.ua));
        }
        if !(b.thermal_mass > 0.0 && b.thermal_mass.is_finite()) {
            bad("thermal_mass", format!("must be > 0, got {}", b.thermal_mass));
        }
        if !(b.avg_annual_kwh > 0.0 && b.avg_annual_kwh.is_finite()) {
            bad("avg_annual_kwh", format!("must be > 0, got {}", b.avg_annual_kwh));
        }
        if !(b.floor_area > 0.0 && b.floor_area.is_finite()) {
            bad("floor_area", format!("must be > 0, got {}", b.floor_area));
        }
        if !(b.hvac_heat_capacity >= 0.0 && b.hvac_heat_capacity.is_finite()) {
            bad("hvac_heat_capacity", format!("must be >= 0, got {}", b.hvac_heat_capacity));
        }
        if !b.setpoint.is_finite() {
            bad("setpoint", "must be finite".into());
        }
        if !(b.deadband > 0.0 && b.deadband.is_finite()) {
            bad("deadband", format!("must be > 0, got {}", b.deadband));
        }
        if b.kind.is_residential() != (b.sector == Sector::Residential) {
            bad(
                "sector",
                format!("{} is inconsistent with kind {}", b.sector.as_str(), b.kind.as_str()),
            );
        }
    }
    let total: u64 = pop.buildings.iter().map(|b| u64::from(b.n_occupants)).sum();
    if total != pop.total_occupants {
        out.push(Violation {
            building_id: None,
            field: "total_occupants",
            message: format!("{} but buildings sum to {total}", pop.total_occupants),
        });
    }
    if pop.buildings.is_empty() {
        out.push(Violation {
            building_id: None,
            field: "buildings",
            message: "zero buildings".into(),
        });
    }
    out
}

pub fn write_population_csv<W: Write>(pop: &Population, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for b in &pop.buildings {
        w.serialize(b).map_err(|e| Error::Runtime(format!("population CSV: {e}")))?;
    }
    w.flush().map_err(|e| Error::Runtime(format!("population CSV: {e}")))?;
    Ok(())
}

pub fn save_population(pop: &Population, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Output {
        path: path.to_owned(),
        source,
    })?;
    write_population_csv(pop, std::io::BufWriter::new(file))
}

/// Parses a population CSV. `source` names the input in error messages.
pub fn read_population_csv<R: Read>(reader: R, source: &str) -> Result<Population> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::ingestion(source, Some(1), None, e.to_string()))?
        .clone();
    for column in POPULATION_COLUMNS {
        if !headers.iter().any(|h| h == column) {
            return Err(Error::ingestion(source, Some(1), Some(column), "missing column"));
        }
    }
    let mut buildings = Vec::new();
    let mut ids = BTreeSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            Error::ingestion(source, e.position().map(|p| p.line()), None, e.to_string())
        })?;
        let building: Building = record
            .deserialize(Some(&headers))
            .map_err(|e| csv_error(source, &headers, &record, e))?;
        if !ids.insert(building.id) {
            return Err(Error::ingestion(
                source,
                Some(buildings.len() as u64 + 2),
                Some("id"),
                format!("duplicate building id {}", building.id),
            ));
        }
        buildings.push(building);
    }
    if buildings.is_empty() {
        return Err(Error::ingestion(source, None, None, "zero buildings"));
    }
    Ok(Population::new(buildings, None))
}

pub fn load_population(path: &Path) -> Result<Population> {
    let file = File::open(path).map_err(|source| Error::Input {
        path: path.to_owned(),
        source,
    })?;
    read_population_csv(std::io::BufReader::new(file), &path.display().to_string())
}

fn csv_error(source: &str, headers: &csv::StringRecord, record: &csv::StringRecord, e: csv::Error) -> Error {
    let row = record.position().map(|p| p.line());
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => {
            let column = err
                .field()
                .and_then(|i| headers.get(i as usize))
                .or_else(|| bad_enum_column(headers, record));
            Error::ingestion(source, row, column, err.kind().to_string())
        }
        _ => Error::ingestion(source, row, None, e.to_string()),
    }
}

/// Unknown enum variants are reported without a field index; find the
/// offending categorical column by parsing each one on its own.
fn bad_enum_column<'h>(headers: &'h csv::StringRecord, record: &csv::StringRecord) -> Option<&'h str> {
    fn parses<'de, T: Deserialize<'de>>(value: &'de str) -> bool {
        T::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(value)).is_ok()
    }
    headers.iter().zip(record.iter()).find_map(|(h, v)| {
        let ok = match h {
            "kind" => parses::<BuildingKind>(v),
            "sector" => parses::<Sector>(v),
            "insulation" => parses::<Insulation>(v),
            "heating_fuel" => parses::<HeatingFuel>(v),
            "annual_income_bracket" => v.is_empty() || parses::<IncomeBracket>(v),
            _ => true,
        };
        (!ok).then_some(h)
    })
}
