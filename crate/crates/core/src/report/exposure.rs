use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::hazard::{mean_relative_risk, RRModel, RrWindow};
use crate::population::{load_population, Insulation, Population};
use crate::thermal::ExposureTrace;
use crate::valuation::nearest_rank;
use crate::weather::parse_timestamp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingExposureSummary {
    pub building_id: u32,
    pub insulation: Insulation,
    pub mean_t_in: f64,
    pub min_t_in: f64,
    pub mean_rr: f64,
}

/// Statistics over the buildings of one insulation class. Quartiles are of
/// the per-building mean temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub insulation: Insulation,
    pub n_buildings: usize,
    pub mean_t_in: f64,
    pub min_t_in: f64,
    pub q1_t_in: f64,
    pub median_t_in: f64,
    pub q3_t_in: f64,
    pub mean_rr: f64,
}

pub fn building_summaries(
    pop: &Population,
    traces: &[ExposureTrace],
    rr: &RRModel,
    window: RrWindow,
) -> Result<Vec<BuildingExposureSummary>> {
    let by_id: BTreeMap<u32, &ExposureTrace> = traces.iter().map(|t| (t.building_id, t)).collect();
    pop.buildings
        .iter()
        .map(|b| {
            let t = by_id
                .get(&b.id)
                .ok_or_else(|| Error::Mismatch(format!("no exposure trace for building {}", b.id)))?;
            Ok(BuildingExposureSummary {
                building_id: b.id,
                insulation: b.insulation,
                mean_t_in: t.mean_t_in(),
                min_t_in: t.min_t_in(),
                mean_rr: mean_relative_risk(t, rr, window),
            })
        })
        .collect()
}

/// Groups building summaries by insulation class, least insulated first.
/// Classes without buildings are omitted.
pub fn class_summaries(buildings: &[BuildingExposureSummary]) -> Vec<ClassSummary> {
    Insulation::ALL
        .iter()
        .filter_map(|&ins| {
            let members: Vec<&BuildingExposureSummary> = buildings.iter().filter(|b| b.insulation == ins).collect();
            if members.is_empty() {
                return None;
            }
            let n = members.len() as f64;
            let mut means: Vec<f64> = members.iter().map(|b| b.mean_t_in).collect();
            means.sort_by(f64::total_cmp);
            Some(ClassSummary {
                insulation: ins,
                n_buildings: members.len(),
                mean_t_in: means.iter().sum::<f64>() / n,
                min_t_in: members.iter().map(|b| b.min_t_in).fold(f64::INFINITY, f64::min),
                q1_t_in: nearest_rank(&means, 25.0),
                median_t_in: nearest_rank(&means, 50.0),
                q3_t_in: nearest_rank(&means, 75.0),
                mean_rr: members.iter().map(|b| b.mean_rr).sum::<f64>() / n,
            })
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct ExposureRow {
    building_id: u32,
    timestamp: String,
    t_in_c: f64,
    powered: bool,
    hvac_kw: f64,
}

/// Reads `exposure.csv` back into traces (rows grouped by building, in file
/// order).
pub fn read_exposure_csv(path: &Path) -> Result<Vec<ExposureTrace>> {
    let source = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Input {
            path: path.to_owned(),
            source,
        },
        other => Error::Runtime(format!("{other:?}")),
    })?;
    let mut traces: Vec<ExposureTrace> = Vec::new();
    let mut index: BTreeMap<u32, usize> = BTreeMap::new();
    for row in rdr.deserialize::<ExposureRow>() {
        let row = row.map_err(|e| Error::ingestion(&source, e.position().map(|p| p.line()), None, e.to_string()))?;
        let ts = parse_timestamp(&row.timestamp)
            .ok_or_else(|| Error::ingestion(&source, None, Some("timestamp"), format!("bad timestamp {:?}", row.timestamp)))?;
        let i = *index.entry(row.building_id).or_insert_with(|| {
            traces.push(ExposureTrace {
                building_id: row.building_id,
                start: ts,
                dt: 0,
                t_in: Vec::new(),
                powered: Vec::new(),
                hvac_electric_kw: Vec::new(),
            });
            traces.len() - 1
        });
        let t = &mut traces[i];
        if t.t_in.len() == 1 {
            t.dt = (ts - t.start).num_seconds();
        }
        t.t_in.push(row.t_in_c);
        t.powered.push(row.powered);
        t.hvac_electric_kw.push(row.hvac_kw);
    }
    if traces.is_empty() {
        return Err(Error::ingestion(&source, None, None, "no exposure rows"));
    }
    Ok(traces)
}

pub const BUILDING_EXPOSURE_FILE: &str = "exposure_by_building.csv";
pub const CLASS_EXPOSURE_FILE: &str = "exposure_by_class.csv";

fn write_rows<T: Serialize, W: Write>(rows: &[T], writer: W, what: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Runtime(format!("{what}: {e}")))?;
    }
    w.flush().map_err(|e| Error::Runtime(format!("{what}: {e}")))
}

/// Reads a finished run directory and writes per-building and
/// per-insulation-class exposure summaries next to it.
pub fn export_exposure(run_dir: &Path) -> Result<Vec<ClassSummary>> {
    let exposure = run_dir.join("exposure.csv");
    if !exposure.exists() {
        return Err(Error::Input {
            path: exposure,
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "run has no exposure traces"),
        });
    }
    let cfg_path = run_dir.join("config.json");
    let text = fs::read_to_string(&cfg_path).map_err(|source| Error::Input {
        path: cfg_path.clone(),
        source,
    })?;
    let cfg = ScenarioConfig::from_json(&text, &cfg_path.display().to_string())?;
    let models = cfg.hazard.resolve()?;
    let pop = load_population(&run_dir.join("population.csv"))?;
    let traces = read_exposure_csv(&exposure)?;

    let buildings = building_summaries(&pop, &traces, &models.rr, models.rr_window)?;
    let classes = class_summaries(&buildings);
    let create = |name: &str| {
        let path = run_dir.join(name);
        fs::File::create(&path)
            .map(std::io::BufWriter::new)
            .map_err(|source| Error::Output { path, source })
    };
    write_rows(&buildings, create(BUILDING_EXPOSURE_FILE)?, "building exposure CSV")?;
    write_rows(&classes, create(CLASS_EXPOSURE_FILE)?, "class exposure CSV")?;
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(id: u32, ins: Insulation, t: f64) -> BuildingExposureSummary {
        BuildingExposureSummary {
            building_id: id,
            insulation: ins,
            mean_t_in: t,
            min_t_in: t - 1.0,
            mean_rr: 1.0 + (20.0 - t) / 100.0,
        }
    }

    #[test]
    fn classes_partition_the_buildings() {
        let b = vec![
            summary(1, Insulation::Little, 10.0),
            summary(2, Insulation::Little, 12.0),
            summary(3, Insulation::Good, 16.0),
        ];
        let c = class_summaries(&b);
        assert_eq!(c.len(), 2);
        assert_eq!(c.iter().map(|c| c.n_buildings).sum::<usize>(), 3);
        assert_eq!(c[0].insulation, Insulation::Little);
        assert_eq!(c[0].mean_t_in, 11.0);
        assert_eq!(c[0].min_t_in, 9.0);
    }
}
