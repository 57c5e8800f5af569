//! Pond registry, lab reports, crop statistics and lab-to-scene alignment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};
use crate::indices::IndexKind;
use crate::kv::{format_f64, format_timestamp, parse_timestamp};
use crate::raster::{GeoPoint, Raster};

/// Minimum lab samples per pond before it takes part in calibration.
pub const MIN_SAMPLES: usize = 20;
/// Maximum gap between a scene and the lab sample paired with it.
pub const WINDOW_DAYS: f64 = 5.0;
/// Side of the square window cropped around each pond center, in meters.
pub const CROP_SIDE_M: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PondKind {
    Frac,
    Irrigation,
    Playa,
    Other,
}

impl PondKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PondKind::Frac => "frac",
            PondKind::Irrigation => "irrigation",
            PondKind::Playa => "playa",
            PondKind::Other => "other",
        }
    }
}

impl FromStr for PondKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "frac" => Ok(PondKind::Frac),
            "irrigation" => Ok(PondKind::Irrigation),
            "playa" => Ok(PondKind::Playa),
            "other" | "" => Ok(PondKind::Other),
            other => Err(Error::invalid("kind", format!("unknown pond kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PondSite {
    pub pond_id: String,
    /// Approximate pond center in projected meters.
    pub center: GeoPoint,
    pub kind: PondKind,
}

/// Pond sites keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PondRegistry {
    sites: BTreeMap<String, PondSite>,
}

impl PondRegistry {
    pub fn new(sites: impl IntoIterator<Item = PondSite>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for site in sites {
            if site.pond_id.is_empty() {
                return Err(Error::invalid("pond_id", "empty pond id"));
            }
            if map.contains_key(&site.pond_id) {
                return Err(Error::DuplicatePond(site.pond_id));
            }
            map.insert(site.pond_id.clone(), site);
        }
        Ok(PondRegistry { sites: map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    /// Parses `pond_id,x_m,y_m,kind`.
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MalformedRow {
                    row: 0,
                    reason: format!("missing column `{name}`"),
                })
        };
        let (ci, cx, cy) = (col("pond_id")?, col("x_m")?, col("y_m")?);
        let ck = header.iter().position(|h| h == "kind");

        let mut sites = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec?;
            let field = |c: usize| rec.get(c).unwrap_or("");
            let num = |c: usize, name: &str| {
                field(c)
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::MalformedRow {
                        row,
                        reason: format!("bad {name} `{}`", field(c)),
                    })
            };
            let kind = match ck {
                Some(c) => field(c).parse().map_err(|e: Error| Error::MalformedRow {
                    row,
                    reason: e.to_string(),
                })?,
                None => PondKind::Other,
            };
            sites.push(PondSite {
                pond_id: field(ci).to_string(),
                center: GeoPoint::new(num(cx, "x_m")?, num(cy, "y_m")?),
                kind,
            });
        }
        Self::new(sites)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["pond_id", "x_m", "y_m", "kind"])?;
        for s in self.sites.values() {
            w.write_record([
                s.pond_id.as_str(),
                &format_f64(s.center.x),
                &format_f64(s.center.y),
                s.kind.as_str(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn get(&self, pond_id: &str) -> Result<&PondSite> {
        self.sites
            .get(pond_id)
            .ok_or_else(|| Error::UnknownPond(pond_id.to_string()))
    }

    pub fn contains(&self, pond_id: &str) -> bool {
        self.sites.contains_key(pond_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PondSite> {
        self.sites.values()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Keeps only the listed ponds; unknown ids are an error.
    pub fn restrict(&self, ids: &[String]) -> Result<PondRegistry> {
        let sites = ids.iter().map(|id| self.get(id).cloned()).collect::<Result<Vec<_>>>()?;
        PondRegistry::new(sites)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabParameter {
    Ph,
    Conductivity,
    Turbidity,
    DissolvedOxygen,
    Temperature,
    H2s,
    Depth,
}

impl LabParameter {
    pub const ALL: [LabParameter; 7] = [
        LabParameter::Ph,
        LabParameter::Conductivity,
        LabParameter::Turbidity,
        LabParameter::DissolvedOxygen,
        LabParameter::Temperature,
        LabParameter::H2s,
        LabParameter::Depth,
    ];

    /// Column name in the lab CSV.
    pub fn column(self) -> &'static str {
        match self {
            LabParameter::Ph => "ph",
            LabParameter::Conductivity => "conductivity_uS_cm",
            LabParameter::Turbidity => "turbidity_NTU",
            LabParameter::DissolvedOxygen => "dissolved_oxygen_mg_L",
            LabParameter::Temperature => "temperature_C",
            LabParameter::H2s => "h2s_mg_L",
            LabParameter::Depth => "depth_m",
        }
    }

    /// Short name used in configs and reports.
    pub fn name(self) -> &'static str {
        match self {
            LabParameter::Ph => "ph",
            LabParameter::Conductivity => "conductivity",
            LabParameter::Turbidity => "turbidity",
            LabParameter::DissolvedOxygen => "dissolved_oxygen",
            LabParameter::Temperature => "temperature",
            LabParameter::H2s => "h2s",
            LabParameter::Depth => "depth",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for LabParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LabParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LabParameter::ALL
            .into_iter()
            .find(|p| p.name() == s || p.column() == s)
            .ok_or_else(|| Error::invalid("lab parameter", format!("unknown parameter `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabSample {
    pub pond_id: String,
    pub sampled_at: DateTime<Utc>,
    values: [Option<f64>; 7],
}

impl LabSample {
    pub fn new(pond_id: impl Into<String>, sampled_at: DateTime<Utc>) -> Self {
        LabSample {
            pond_id: pond_id.into(),
            sampled_at,
            values: [None; 7],
        }
    }

    pub fn with(mut self, param: LabParameter, value: f64) -> Self {
        self.set(param, Some(value));
        self
    }

    pub fn get(&self, param: LabParameter) -> Option<f64> {
        self.values[param.index()]
    }

    pub fn set(&mut self, param: LabParameter, value: Option<f64>) {
        self.values[param.index()] = value;
    }
}

/// Observed range of one lab parameter across a report file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }
}

/// Parsed lab reports with per-parameter min-max ranges over the whole file.
#[derive(Debug, Clone, PartialEq)]
pub struct LabReport {
    samples: Vec<LabSample>,
    ranges: BTreeMap<LabParameter, ColumnRange>,
}

impl LabReport {
    /// Sorts per pond by time; duplicate (pond, timestamp) pairs are rejected.
    pub fn new(mut samples: Vec<LabSample>) -> Result<Self> {
        samples.sort_by(|a, b| (&a.pond_id, a.sampled_at).cmp(&(&b.pond_id, b.sampled_at)));
        for w in samples.windows(2) {
            if w[0].pond_id == w[1].pond_id && w[0].sampled_at == w[1].sampled_at {
                return Err(Error::DuplicateSample {
                    pond_id: w[0].pond_id.clone(),
                    timestamp: format_timestamp(&w[0].sampled_at),
                });
            }
        }
        let mut ranges = BTreeMap::new();
        for p in LabParameter::ALL {
            let mut vals = samples.iter().filter_map(|s| s.get(p));
            if let Some(first) = vals.next() {
                let (min, max) = vals.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
                ranges.insert(p, ColumnRange { min, max });
            }
        }
        Ok(LabReport { samples, ranges })
    }

    pub fn samples(&self) -> &[LabSample] {
        &self.samples
    }

    pub fn range(&self, param: LabParameter) -> Result<ColumnRange> {
        match self.ranges.get(&param) {
            None => Err(Error::EmptyColumn(param.name().to_string())),
            Some(r) if r.max - r.min <= 0.0 => Err(Error::ConstantColumn(param.name().to_string())),
            Some(r) => Ok(*r),
        }
    }

    /// Min-max rescaled value in [0, 1]; `Ok(None)` when the cell is missing.
    pub fn normalized(&self, sample: &LabSample, param: LabParameter) -> Result<Option<f64>> {
        match sample.get(param) {
            None => Ok(None),
            Some(v) => Ok(Some(self.range(param)?.normalize(v))),
        }
    }

    /// Parameters whose normalization is defined.
    pub fn usable_parameters(&self) -> Vec<LabParameter> {
        LabParameter::ALL.into_iter().filter(|p| self.range(*p).is_ok()).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        write_lab_csv(file, &self.samples)
    }
}

pub fn lab_header() -> Vec<&'static str> {
    let mut h = vec!["pond_id", "sampled_at"];
    h.extend(LabParameter::ALL.iter().map(|p| p.column()));
    h
}

pub fn write_lab_csv(writer: impl Write, samples: &[LabSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(lab_header())?;
    for s in samples {
        let mut rec = vec![s.pond_id.clone(), format_timestamp(&s.sampled_at)];
        rec.extend(LabParameter::ALL.iter().map(|p| s.get(*p).map(format_f64).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<lab csv>", e))
}

pub fn parse_lab_reports(path: &Path) -> Result<LabReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_lab_reports_from(file)
}

/// Reads the lab CSV schema. Row numbers in errors count data rows from 1.
pub fn parse_lab_reports_from(reader: impl Read) -> Result<LabReport> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let mut cols = Vec::new();
    for name in lab_header() {
        let c = header.iter().position(|h| h == name).ok_or_else(|| Error::MalformedRow {
            row: 0,
            reason: format!("missing column `{name}`"),
        })?;
        cols.push(c);
    }

    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let bad = |reason: String| Error::MalformedRow { row, reason };
        let pond_id = &rec[cols[0]];
        if pond_id.is_empty() {
            return Err(bad("empty pond_id".into()));
        }
        let sampled_at = parse_timestamp(&rec[cols[1]]).map_err(|e| bad(e.to_string()))?;
        let mut sample = LabSample::new(pond_id, sampled_at);
        for (p, &c) in LabParameter::ALL.iter().zip(&cols[2..]) {
            let cell = &rec[c];
            if cell.is_empty() {
                continue;
            }
            let v = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("bad {} value `{cell}`", p.column())))?;
            sample.set(*p, Some(v));
        }
        samples.push(sample);
    }
    LabReport::new(samples)
}

/// Order-independent sum: values are sorted before accumulation so any
/// permutation of the same pixels gives bit-identical results.
fn stable_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Mean and population standard deviation of the valid pixels.
pub fn crop_stats(crop: &Raster) -> Result<(f64, f64)> {
    let mut vals: Vec<f64> = crop.valid_values().collect();
    if vals.is_empty() {
        return Err(Error::EmptyCrop);
    }
    let n = vals.len() as f64;
    vals.sort_by(f64::total_cmp);
    // anchoring at the minimum makes uniform crops come back exact
    let base = vals[0];
    let mut shifted: Vec<f64> = vals.iter().map(|v| v - base).collect();
    let mu = base + stable_sum(&mut shifted) / n;
    let mut sq: Vec<f64> = vals.iter().map(|v| (v - mu) * (v - mu)).collect();
    let sigma = (stable_sum(&mut sq) / n).sqrt();
    Ok((mu, sigma))
}

/// Ponds with at least `min_count` samples (inclusive).
pub fn filter_ponds(samples: &[LabSample], min_count: usize) -> BTreeSet<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in samples {
        *counts.entry(&s.pond_id).or_default() += 1;
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n >= min_count)
        .map(|(id, _)| id.to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PondObservation {
    pub pond_id: String,
    pub scene_id: String,
    pub acquired_at: DateTime<Utc>,
    pub index_kind: IndexKind,
    /// Index values over the pond window, when kept in memory.
    pub crop: Option<Raster>,
    pub mu: f64,
    pub sigma: f64,
    pub valid_pixels: usize,
    pub width: usize,
    pub height: usize,
    pub clipped: bool,
}

impl PondObservation {
    pub fn from_crop(
        pond_id: &str,
        scene_id: &str,
        acquired_at: DateTime<Utc>,
        index_kind: IndexKind,
        crop: Raster,
        clipped: bool,
    ) -> Result<Self> {
        let (mu, sigma) = crop_stats(&crop)?;
        Ok(PondObservation {
            pond_id: pond_id.to_string(),
            scene_id: scene_id.to_string(),
            acquired_at,
            index_kind,
            mu,
            sigma,
            valid_pixels: crop.valid_count(),
            width: crop.width(),
            height: crop.height(),
            clipped,
            crop: Some(crop),
        })
    }

    fn sort_key(&self) -> (&str, DateTime<Utc>, &str, &str) {
        (&self.pond_id, self.acquired_at, &self.scene_id, self.index_kind.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub observation: PondObservation,
    pub sample: LabSample,
    /// Sample time minus acquisition time, in days.
    pub gap_days: f64,
}

pub fn gap_days(from: DateTime<Utc>, to: DateTime<Utc>) -> f64 {
    let d = to - from;
    match d.num_microseconds() {
        Some(us) => us as f64 / 86_400e6,
        None => d.num_seconds() as f64 / 86_400.0,
    }
}

/// Pairs each observation with the nearest sample of the same pond within
/// `window_days` (inclusive). Ties go to the earlier sample. Output is sorted
/// by pond, acquisition time, scene and index kind.
pub fn align_timeseries(
    observations: &[PondObservation],
    samples: &[LabSample],
    window_days: f64,
) -> Vec<AlignedPair> {
    let mut by_pond: BTreeMap<&str, Vec<&LabSample>> = BTreeMap::new();
    for s in samples {
        by_pond.entry(&s.pond_id).or_default().push(s);
    }
    for list in by_pond.values_mut() {
        list.sort_by_key(|s| s.sampled_at);
    }

    let mut obs: Vec<&PondObservation> = observations.iter().collect();
    obs.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    let mut out = Vec::new();
    for o in obs {
        let Some(list) = by_pond.get(o.pond_id.as_str()) else {
            continue;
        };
        let mut best: Option<(&LabSample, f64)> = None;
        for s in list {
            let gap = gap_days(o.acquired_at, s.sampled_at);
            if gap.abs() > window_days {
                continue;
            }
            // strict comparison keeps the earlier sample on ties
            if best.is_none_or(|(_, g)| gap.abs() < g.abs()) {
                best = Some((s, gap));
            }
        }
        if let Some((s, gap)) = best {
            out.push(AlignedPair {
                observation: o.clone(),
                sample: s.clone(),
                gap_days: gap,
            });
        }
    }
    out
}
