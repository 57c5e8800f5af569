//! Baseline comparison tables, per-pond time series and map sequences.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calibrate::mse;
use crate::error::{Error, Result};
use crate::indices::{render_index_map, IndexKind, IndexResult};
use crate::kv::{format_f64, format_timestamp, parse_timestamp};
use crate::ponds::{align_timeseries, AlignedPair, LabParameter, LabReport, PondObservation, PondRegistry};

/// MSE of each method (rows) against the normalized target per pond (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub target: LabParameter,
    pub methods: Vec<String>,
    pub ponds: Vec<String>,
    /// `cells[m][p]`.
    pub cells: Vec<Vec<f64>>,
}

impl ComparisonTable {
    pub fn get(&self, method: &str, pond: &str) -> Option<f64> {
        let m = self.methods.iter().position(|x| x == method)?;
        let p = self.ponds.iter().position(|x| x == pond)?;
        Some(self.cells[m][p])
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["method".to_string()];
        header.extend(self.ponds.iter().cloned());
        w.write_record(&header)?;
        for (m, row) in self.methods.iter().zip(&self.cells) {
            let mut rec = vec![m.clone()];
            rec.extend(row.iter().map(|v| format_f64(*v)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Which ponds a table covers.
#[derive(Debug, Clone, PartialEq)]
pub enum PondSelection {
    All,
    Ids(Vec<String>),
    /// `k` ponds drawn without replacement by a ChaCha8 generator seeded
    /// with `seed`; fewer when fewer are available.
    Random { k: usize, seed: u64 },
}

/// Resolves a selection against the available ponds; the result is sorted.
pub fn select_ponds(available: &BTreeSet<String>, selection: &PondSelection) -> Result<Vec<String>> {
    let mut out: Vec<String> = match selection {
        PondSelection::All => available.iter().cloned().collect(),
        PondSelection::Ids(ids) => {
            for id in ids {
                if !available.contains(id) {
                    return Err(Error::UnknownPond(id.clone()));
                }
            }
            ids.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
        }
        PondSelection::Random { k, seed } => {
            let pool: Vec<&String> = available.iter().collect();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            pool.choose_multiple(&mut rng, (*k).min(pool.len())).map(|s| (*s).clone()).collect()
        }
    };
    out.sort();
    Ok(out)
}

/// Cell (m, p) is the MSE between method m's crop means and the normalized
/// `target` over pond p's aligned pairs. Pairs whose lab cell is missing are
/// skipped.
pub fn build_comparison(
    methods: &[IndexKind],
    pairs: &[AlignedPair],
    lab: &LabReport,
    target: LabParameter,
    ponds: &[String],
) -> Result<ComparisonTable> {
    let mut series: BTreeMap<(&str, &IndexKind), Vec<(f64, f64)>> = BTreeMap::new();
    let mut seen_ponds = BTreeSet::new();
    for p in pairs {
        seen_ponds.insert(p.observation.pond_id.as_str());
        if let Some(v) = lab.normalized(&p.sample, target)? {
            series
                .entry((&p.observation.pond_id, &p.observation.index_kind))
                .or_default()
                .push((p.observation.mu, v));
        }
    }
    // Canonical summation order so cells do not depend on pair order.
    let series: BTreeMap<_, (Vec<f64>, Vec<f64>)> = series
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            (k, v.into_iter().unzip())
        })
        .collect();
    let mut cells = Vec::with_capacity(methods.len());
    for m in methods {
        let mut row = Vec::with_capacity(ponds.len());
        for pond in ponds {
            if !seen_ponds.contains(pond.as_str()) {
                return Err(Error::EmptyPond(pond.clone()));
            }
            let (x, y) = series
                .get(&(pond.as_str(), m))
                .filter(|(x, _)| !x.is_empty())
                .ok_or_else(|| Error::MethodUnavailable {
                    method: m.label().to_string(),
                    pond_id: pond.clone(),
                })?;
            row.push(mse(y, x)?);
        }
        cells.push(row);
    }
    Ok(ComparisonTable {
        target,
        methods: methods.iter().map(|m| m.label().to_string()).collect(),
        ponds: ponds.to_vec(),
        cells,
    })
}

pub const TIMESERIES_HEADER: [&str; 8] = [
    "acquired_at",
    "index_kind",
    "mu",
    "sigma",
    "lab_parameter",
    "lab_value_raw",
    "lab_value_norm",
    "gap_days",
];

/// One line of an exported time series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeseriesRow {
    pub acquired_at: DateTime<Utc>,
    pub index_kind: IndexKind,
    pub mu: f64,
    pub sigma: f64,
    pub lab: Option<TimeseriesLab>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeseriesLab {
    pub parameter: LabParameter,
    pub raw: f64,
    pub normalized: f64,
    pub gap_days: f64,
}

/// Rows for one pond: every observation, with lab cells filled when it
/// aligns with a sample and its kind has a target in `targets`.
pub fn timeseries_rows(
    pond_id: &str,
    observations: &[PondObservation],
    lab: &LabReport,
    targets: &BTreeMap<IndexKind, LabParameter>,
    window_days: f64,
) -> Result<Vec<TimeseriesRow>> {
    let mut obs: Vec<PondObservation> = observations.iter().filter(|o| o.pond_id == pond_id).cloned().collect();
    obs.sort_by(|a, b| {
        (a.acquired_at, a.index_kind.label(), &a.scene_id).cmp(&(b.acquired_at, b.index_kind.label(), &b.scene_id))
    });
    let samples: Vec<_> = lab.samples().iter().filter(|s| s.pond_id == pond_id).cloned().collect();
    let aligned = align_timeseries(&obs, &samples, window_days);
    let by_obs: BTreeMap<(&str, &str), &AlignedPair> = aligned
        .iter()
        .map(|p| ((p.observation.scene_id.as_str(), p.observation.index_kind.label()), p))
        .collect();

    let mut rows = Vec::with_capacity(obs.len());
    for o in &obs {
        let mut lab_cells = None;
        if let (Some(pair), Some(param)) =
            (by_obs.get(&(o.scene_id.as_str(), o.index_kind.label())), targets.get(&o.index_kind))
        {
            if let (Some(raw), Ok(Some(norm))) = (pair.sample.get(*param), lab.normalized(&pair.sample, *param)) {
                lab_cells = Some(TimeseriesLab {
                    parameter: *param,
                    raw,
                    normalized: norm,
                    gap_days: pair.gap_days,
                });
            }
        }
        rows.push(TimeseriesRow {
            acquired_at: o.acquired_at,
            index_kind: o.index_kind.clone(),
            mu: o.mu,
            sigma: o.sigma,
            lab: lab_cells,
        });
    }
    Ok(rows)
}

/// Writes `pond_id`'s time series as CSV and returns the row count.
pub fn export_timeseries(
    pond_id: &str,
    registry: &PondRegistry,
    observations: &[PondObservation],
    lab: &LabReport,
    targets: &BTreeMap<IndexKind, LabParameter>,
    window_days: f64,
    path: &Path,
) -> Result<usize> {
    registry.get(pond_id)?;
    let rows = timeseries_rows(pond_id, observations, lab, targets, window_days)?;
    write_timeseries(&rows, path)?;
    Ok(rows.len())
}

pub fn write_timeseries(rows: &[TimeseriesRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(TIMESERIES_HEADER)?;
    for r in rows {
        let mut rec = vec![
            format_timestamp(&r.acquired_at),
            r.index_kind.label().to_string(),
            format_f64(r.mu),
            format_f64(r.sigma),
        ];
        match &r.lab {
            Some(l) => rec.extend([
                l.parameter.name().to_string(),
                format_f64(l.raw),
                format_f64(l.normalized),
                format_f64(l.gap_days),
            ]),
            None => rec.extend(std::iter::repeat_n(String::new(), 4)),
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimeseriesRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |reason: String| Error::MalformedRow { row: i + 1, reason };
        let num = |c: usize| rec[c].parse::<f64>().map_err(|_| bad(format!("bad number `{}`", &rec[c])));
        let lab = if rec[4].is_empty() {
            None
        } else {
            Some(TimeseriesLab {
                parameter: rec[4].parse()?,
                raw: num(5)?,
                normalized: num(6)?,
                gap_days: num(7)?,
            })
        };
        rows.push(TimeseriesRow {
            acquired_at: parse_timestamp(&rec[0])?,
            index_kind: rec[1].parse()?,
            mu: num(2)?,
            sigma: num(3)?,
            lab,
        });
    }
    Ok(rows)
}

/// One rendered map of a pond at one acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFrame {
    pub scene_id: String,
    pub acquired_at: DateTime<Utc>,
    pub result: IndexResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub scene_id: String,
    pub acquired_at: DateTime<Utc>,
    pub file: String,
    pub index_kind: String,
    /// Set when the map has no valid pixel and renders all black.
    pub all_nodata: bool,
}

/// Renders each frame to `<dir>/<scene_id>_<kind>.png` (plus legend) and
/// writes `<dir>/manifest.csv` sorted by acquisition time.
pub fn export_map_sequence(pond_id: &str, frames: &[MapFrame], dir: &Path) -> Result<Vec<ManifestEntry>> {
    if frames.is_empty() {
        return Err(Error::EmptyPond(pond_id.to_string()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut order: Vec<&MapFrame> = frames.iter().collect();
    order.sort_by(|a, b| {
        (a.acquired_at, &a.scene_id, a.result.kind.label()).cmp(&(b.acquired_at, &b.scene_id, b.result.kind.label()))
    });

    let mut entries = Vec::with_capacity(order.len());
    for f in order {
        let file = format!("{}_{}.png", f.scene_id, f.result.kind.label());
        render_index_map(&f.result, &dir.join(&file))?;
        entries.push(ManifestEntry {
            scene_id: f.scene_id.clone(),
            acquired_at: f.acquired_at,
            file,
            index_kind: f.result.kind.label().to_string(),
            all_nodata: f.result.raster.valid_count() == 0,
        });
    }

    let path: PathBuf = dir.join("manifest.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["scene_id", "acquired_at", "file", "index_kind", "all_nodata"])?;
    for e in &entries {
        w.write_record([
            e.scene_id.as_str(),
            &format_timestamp(&e.acquired_at),
            &e.file,
            &e.index_kind,
            if e.all_nodata { "true" } else { "false" },
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ponds::{LabSample, PondKind, PondSite};
    use crate::raster::{GeoPoint, Raster};
    use chrono::{Duration, TimeZone};

    fn t(d: i64) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap() + Duration::days(d)
    }

    fn obs(pond: &str, d: i64, kind: IndexKind, mu: f64) -> PondObservation {
        let mut o =
            PondObservation::from_crop(pond, &format!("S{d:03}"), t(d), kind, Raster::filled(1, 1, mu), false).unwrap();
        o.mu = mu;
        o
    }

    fn lab(values: &[(i64, f64)]) -> LabReport {
        LabReport::new(
            values
                .iter()
                .map(|(d, v)| LabSample::new("P1", t(*d)).with(LabParameter::Turbidity, *v))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn perfect_method_scores_zero() {
        let report = lab(&[(0, 0.0), (10, 5.0), (20, 10.0)]);
        let obs: Vec<_> = [(0, 0.0), (10, 0.5), (20, 1.0)].iter().map(|(d, m)| obs("P1", *d, IndexKind::WqeiT, *m)).collect();
        let pairs = align_timeseries(&obs, report.samples(), 5.0);
        let table =
            build_comparison(&[IndexKind::WqeiT], &pairs, &report, LabParameter::Turbidity, &["P1".into()]).unwrap();
        assert_eq!(table.get("WQEI_T", "P1"), Some(0.0));

        let missing = build_comparison(&[IndexKind::WqeiC], &pairs, &report, LabParameter::Turbidity, &["P1".into()]);
        assert!(matches!(missing, Err(Error::MethodUnavailable { .. })));
        let empty = build_comparison(&[IndexKind::WqeiT], &pairs, &report, LabParameter::Turbidity, &["P9".into()]);
        assert!(matches!(empty, Err(Error::EmptyPond(_))));
    }

    #[test]
    fn seeded_selection_is_stable() {
        let pool: BTreeSet<String> = (1..=10).map(|i| format!("P{i:02}")).collect();
        let sel = PondSelection::Random { k: 5, seed: 42 };
        let a = select_ponds(&pool, &sel).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a, select_ponds(&pool, &sel).unwrap());
        assert_eq!(select_ponds(&pool, &PondSelection::Random { k: 50, seed: 1 }).unwrap().len(), 10);
        assert!(select_ponds(&pool, &PondSelection::Ids(vec!["X".into()])).is_err());
    }

    #[test]
    fn timeseries_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let registry = PondRegistry::new([PondSite {
            pond_id: "P1".into(),
            center: GeoPoint::new(0.0, 0.0),
            kind: PondKind::Frac,
        }])
        .unwrap();
        let report = lab(&[(0, 1.0), (10, 3.0)]);
        let observations: Vec<_> = [(1, 0.2), (9, 0.4), (30, 0.1)]
            .iter()
            .map(|(d, m)| obs("P1", *d, IndexKind::WqeiT, *m))
            .collect();
        let targets = BTreeMap::from([(IndexKind::WqeiT, LabParameter::Turbidity)]);
        let path = dir.path().join("ts.csv");
        let n = export_timeseries("P1", &registry, &observations, &report, &targets, 5.0, &path).unwrap();
        assert_eq!(n, 3);
        let rows = read_timeseries(&path).unwrap();
        assert_eq!(rows.iter().filter(|r| r.lab.is_none()).count(), 1);
        assert_eq!(rows[0].lab.as_ref().unwrap().gap_days, -1.0);
        assert_eq!(rows[1].lab.as_ref().unwrap().normalized, 1.0);

        let empty = dir.path().join("empty.csv");
        assert_eq!(export_timeseries("P1", &registry, &[], &report, &targets, 5.0, &empty).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&empty).unwrap().lines().count(), 1);
        assert!(matches!(
            export_timeseries("P7", &registry, &[], &report, &targets, 5.0, &empty),
            Err(Error::UnknownPond(_))
        ));
    }

    #[test]
    fn map_sequence_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let frame = |d: i64, raster: Raster| MapFrame {
            scene_id: format!("S{d}"),
            acquired_at: t(d),
            result: IndexResult {
                kind: IndexKind::WqeiC,
                raster,
                denominator: None,
                clamp_count: 0,
            },
        };
        let frames = vec![
            frame(30, Raster::filled(2, 2, 0.5)),
            frame(10, Raster::all_nodata(2, 2)),
            frame(20, Raster::filled(2, 2, -0.5)),
            frame(0, Raster::filled(2, 2, 0.0)),
        ];
        let entries = export_map_sequence("P1", &frames, dir.path()).unwrap();
        assert_eq!(entries.len(), 4);
        assert!(entries.windows(2).all(|w| w[0].acquired_at <= w[1].acquired_at));
        assert!(entries[1].all_nodata);
        let manifest = std::fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
        assert_eq!(manifest.lines().count(), 5);
        for e in &entries {
            assert!(dir.path().join(&e.file).exists());
        }
        assert!(export_map_sequence("P1", &[], dir.path()).is_err());
    }
}
