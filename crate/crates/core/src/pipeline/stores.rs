//! CSV stores passed between pipeline stages.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};
use crate::indices::DenominatorStats;
use crate::kv::{format_f64, format_timestamp, parse_timestamp};
use crate::ponds::PondObservation;
use crate::raster::{BandName, BandSet, GeoTransform, Raster};

pub const CATALOG_FILE: &str = "catalog.csv";
pub const OBSERVATIONS_FILE: &str = "observations.csv";
pub const CROPS_FILE: &str = "crops.csv";
pub const SCENES_FILE: &str = "scenes.csv";
pub const CALIBRATION_FILE: &str = "calibration.txt";
pub const RHO_FILE: &str = "rho.csv";
pub const RHO_PER_POND_FILE: &str = "rho_per_pond.csv";

/// Bands kept for each pond crop.
pub const CROP_BANDS: [BandName; 6] = [
    BandName::B1,
    BandName::B2,
    BandName::G,
    BandName::R,
    BandName::Nir,
    BandName::T,
];

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Reader::from_reader(file))
}

fn field(rec: &csv::StringRecord, i: usize, row: usize) -> Result<&str> {
    rec.get(i).ok_or_else(|| Error::MalformedRow {
        row,
        reason: format!("missing column {}", i + 1),
    })
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, row: usize) -> Result<T> {
    let raw = field(rec, i, row)?;
    raw.parse().map_err(|_| Error::MalformedRow {
        row,
        reason: format!("cannot parse `{raw}` in column {}", i + 1),
    })
}

fn parse_time(rec: &csv::StringRecord, i: usize, row: usize) -> Result<DateTime<Utc>> {
    parse_timestamp(field(rec, i, row)?).map_err(|e| Error::MalformedRow {
        row,
        reason: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneStatus {
    Ok,
    Invalid,
}

impl SceneStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SceneStatus::Ok => "ok",
            SceneStatus::Invalid => "invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    /// Empty when the header could not be read.
    pub scene_id: String,
    pub acquired_at: Option<DateTime<Utc>>,
    /// Relative to the scene source root.
    pub path: String,
    pub bands: Vec<BandName>,
    pub status: SceneStatus,
    pub reason: String,
}

pub fn write_catalog(entries: &[CatalogEntry], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["scene_id", "acquired_at", "path", "bands", "status", "reason"])?;
    for e in entries {
        let bands: Vec<&str> = e.bands.iter().map(|b| b.as_str()).collect();
        w.write_record([
            e.scene_id.as_str(),
            &e.acquired_at.map(|t| format_timestamp(&t)).unwrap_or_default(),
            &e.path,
            &bands.join(" "),
            e.status.as_str(),
            &e.reason,
        ])?;
    }
    finish(w, path)
}

pub fn read_catalog(path: &Path) -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let status = match field(&rec, 4, row)? {
            "ok" => SceneStatus::Ok,
            "invalid" => SceneStatus::Invalid,
            other => {
                return Err(Error::MalformedRow {
                    row,
                    reason: format!("unknown status `{other}`"),
                })
            }
        };
        let when = field(&rec, 1, row)?;
        out.push(CatalogEntry {
            scene_id: field(&rec, 0, row)?.to_string(),
            acquired_at: if when.is_empty() { None } else { Some(parse_time(&rec, 1, row)?) },
            path: field(&rec, 2, row)?.to_string(),
            bands: field(&rec, 3, row)?
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_>>()?,
            status,
            reason: field(&rec, 5, row)?.to_string(),
        });
    }
    Ok(out)
}

const OBS_HEADER: [&str; 10] = [
    "pond_id",
    "scene_id",
    "acquired_at",
    "index_kind",
    "mu",
    "sigma",
    "valid_pixels",
    "width",
    "height",
    "clipped",
];

pub fn write_observations(obs: &[PondObservation], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(OBS_HEADER)?;
    for o in obs {
        w.write_record([
            o.pond_id.as_str(),
            &o.scene_id,
            &format_timestamp(&o.acquired_at),
            o.index_kind.label(),
            &format_f64(o.mu),
            &format_f64(o.sigma),
            &o.valid_pixels.to_string(),
            &o.width.to_string(),
            &o.height.to_string(),
            if o.clipped { "true" } else { "false" },
        ])?;
    }
    finish(w, path)
}

/// Observations without their in-memory crops.
pub fn read_observations(path: &Path) -> Result<Vec<PondObservation>> {
    let mut out = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        out.push(PondObservation {
            pond_id: field(&rec, 0, row)?.to_string(),
            scene_id: field(&rec, 1, row)?.to_string(),
            acquired_at: parse_time(&rec, 2, row)?,
            index_kind: field(&rec, 3, row)?.parse()?,
            crop: None,
            mu: parse(&rec, 4, row)?,
            sigma: parse(&rec, 5, row)?,
            valid_pixels: parse(&rec, 6, row)?,
            width: parse(&rec, 7, row)?,
            height: parse(&rec, 8, row)?,
            clipped: parse(&rec, 9, row)?,
        });
    }
    Ok(out)
}

/// Whole-scene facts the report needs to re-evaluate crops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneRecord {
    pub acquired_at: DateTime<Utc>,
    pub width: usize,
    pub height: usize,
    /// Geotransform of the pan-sharpened grid.
    pub geo: GeoTransform,
    pub stats: DenominatorStats,
}

pub fn write_scenes(scenes: &BTreeMap<String, SceneRecord>, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "scene_id",
        "acquired_at",
        "width",
        "height",
        "origin_x",
        "origin_y",
        "pixel_size_x",
        "pixel_size_y",
        "sum_g",
        "sum_rn",
        "count",
    ])?;
    for (id, s) in scenes {
        w.write_record([
            id.as_str(),
            &format_timestamp(&s.acquired_at),
            &s.width.to_string(),
            &s.height.to_string(),
            &format_f64(s.geo.origin_x),
            &format_f64(s.geo.origin_y),
            &format_f64(s.geo.pixel_size_x),
            &format_f64(s.geo.pixel_size_y),
            &format_f64(s.stats.sum_g),
            &format_f64(s.stats.sum_rn),
            &s.stats.count.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn read_scenes(path: &Path) -> Result<BTreeMap<String, SceneRecord>> {
    let mut out = BTreeMap::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let geo = GeoTransform::new(
            parse(&rec, 4, row)?,
            parse(&rec, 5, row)?,
            parse(&rec, 6, row)?,
            parse(&rec, 7, row)?,
        )?;
        out.insert(
            field(&rec, 0, row)?.to_string(),
            SceneRecord {
                acquired_at: parse_time(&rec, 1, row)?,
                width: parse(&rec, 2, row)?,
                height: parse(&rec, 3, row)?,
                geo,
                stats: DenominatorStats {
                    sum_g: parse(&rec, 8, row)?,
                    sum_rn: parse(&rec, 9, row)?,
                    count: parse(&rec, 10, row)?,
                },
            },
        );
    }
    Ok(out)
}

/// Pan-sharpened bands of one pond window; `row0`, `col0` locate it in the
/// scene grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CropRecord {
    pub scene_id: String,
    pub pond_id: String,
    pub row0: usize,
    pub col0: usize,
    pub bands: BandSet,
}

/// One row per pixel; empty cells are nodata.
pub fn write_crops(crops: &[CropRecord], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["scene_id", "pond_id", "row", "col"];
    header.extend(CROP_BANDS.iter().map(|b| b.as_str()));
    w.write_record(&header)?;
    for c in crops {
        let rasters: Vec<&Raster> = CROP_BANDS.iter().map(|b| c.bands.band(*b)).collect::<Result<_>>()?;
        let (width, height) = c.bands.dims();
        for r in 0..height {
            for col in 0..width {
                let mut rec = vec![
                    c.scene_id.clone(),
                    c.pond_id.clone(),
                    (c.row0 + r).to_string(),
                    (c.col0 + col).to_string(),
                ];
                rec.extend(rasters.iter().map(|x| x.get(r, col).map(format_f64).unwrap_or_default()));
                w.write_record(&rec)?;
            }
        }
    }
    finish(w, path)
}

pub fn read_crops(path: &Path, scenes: &BTreeMap<String, SceneRecord>) -> Result<Vec<CropRecord>> {
    type Pixels = Vec<(usize, usize, [Option<f64>; 6])>;
    let mut groups: Vec<((String, String), Pixels)> = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let key = (field(&rec, 0, row)?.to_string(), field(&rec, 1, row)?.to_string());
        let mut vals = [None; 6];
        for (b, v) in vals.iter_mut().enumerate() {
            if !field(&rec, 4 + b, row)?.is_empty() {
                *v = Some(parse(&rec, 4 + b, row)?);
            }
        }
        let px = (parse(&rec, 2, row)?, parse(&rec, 3, row)?, vals);
        match groups.last_mut() {
            Some((k, list)) if *k == key => list.push(px),
            _ => groups.push((key, vec![px])),
        }
    }

    let mut out = Vec::with_capacity(groups.len());
    for ((scene_id, pond_id), pixels) in groups {
        let scene = scenes
            .get(&scene_id)
            .ok_or_else(|| Error::invalid("crops", format!("scene `{scene_id}` missing from scene store")))?;
        let row0 = pixels.iter().map(|p| p.0).min().unwrap_or(0);
        let col0 = pixels.iter().map(|p| p.1).min().unwrap_or(0);
        let rows = pixels.iter().map(|p| p.0).max().unwrap_or(0) + 1 - row0;
        let cols = pixels.iter().map(|p| p.1).max().unwrap_or(0) + 1 - col0;
        if pixels.len() != rows * cols {
            return Err(Error::invalid("crops", format!("{scene_id}/{pond_id} is not a full rectangle")));
        }
        let index: BTreeMap<(usize, usize), &[Option<f64>; 6]> =
            pixels.iter().map(|(r, c, v)| ((r - row0, c - col0), v)).collect();
        let bands = CROP_BANDS
            .iter()
            .enumerate()
            .map(|(b, name)| (*name, Raster::from_fn(cols, rows, |r, c| index[&(r, c)][b])))
            .collect();
        let resolution = scene.geo.pixel_size_x;
        out.push(CropRecord {
            bands: BandSet::new(&scene_id, scene.acquired_at, scene.geo.offset(row0, col0), resolution, bands)?,
            scene_id,
            pond_id,
            row0,
            col0,
        });
    }
    Ok(out)
}
