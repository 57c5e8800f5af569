//! End-to-end stages behind the `wqei` binary: ingest, index, calibrate,
//! report, plus synthetic dataset generation. Each stage reads the stores
//! written by the previous one from the output directory, so stages can be
//! rerun independently.

mod config;
mod source;
pub mod stores;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use rayon::prelude::*;

use crate::calibrate::{
    fit_coefficients, index_series, match_index_to_parameter, CalibrationResult, FitSample, MatchResult,
};
use crate::error::{Error, Result};
use crate::indices::{evaluate_window, DenominatorStats, IndexCoefficients, IndexKind};
use crate::kv::{format_f64, KeyValues};
use crate::ponds::{
    align_timeseries, filter_ponds, parse_lab_reports, AlignedPair, LabParameter, LabReport, PondObservation,
    PondRegistry,
};
use crate::preprocess::brovey_pansharpen;
use crate::raster::{crop_window, BandSet};
use crate::report::{build_comparison, export_map_sequence, export_timeseries, select_ponds, MapFrame, PondSelection};
use crate::synth::{self, SynthOptions};

pub use config::{CoefficientMode, Overrides, PipelineConfig, SourceSpec};
pub use source::{LocalSource, RemoteSource, SceneRef, SceneSource, Validated, REQUIRED_BANDS};
use stores::*;

/// Process exit status per failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Usage = 1,
    Ingest = 2,
    Index = 3,
    Calibrate = 4,
    Report = 5,
}

#[derive(Debug, thiserror::Error)]
#[error("{stage:?} failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl PipelineError {
    pub fn exit_code(&self) -> u8 {
        self.stage as u8
    }
}

type StageResult<T> = std::result::Result<T, PipelineError>;

trait InStage<T> {
    fn stage(self, stage: Stage) -> StageResult<T>;
}

impl<T> InStage<T> for Result<T> {
    fn stage(self, stage: Stage) -> StageResult<T> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

fn make_source(cfg: &PipelineConfig) -> Box<dyn SceneSource> {
    match &cfg.scene_source {
        SourceSpec::Local(root) => Box::new(LocalSource::new(root)),
        SourceSpec::Remote(provider) => Box::new(RemoteSource {
            provider: provider.clone(),
        }),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Index kinds the index stage computes, WQEI first.
pub fn index_kinds(cfg: &PipelineConfig) -> Vec<IndexKind> {
    let mut kinds = vec![IndexKind::WqeiT, IndexKind::WqeiC];
    kinds.extend(cfg.baseline_names.iter().map(|n| IndexKind::Baseline(n.clone())));
    kinds
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestSummary {
    pub ok: usize,
    pub invalid: usize,
}

/// Lists and validates every scene, writing `catalog.csv`. Unreadable
/// scenes are recorded as invalid rather than failing the stage.
pub fn cmd_ingest(cfg: &PipelineConfig) -> StageResult<IngestSummary> {
    let source = make_source(cfg);
    let refs = source.list().stage(Stage::Ingest)?;
    let validated: Vec<Validated> = refs.par_iter().map(|r| source.validate(r)).collect();

    let mut entries: Vec<CatalogEntry> = validated
        .into_iter()
        .map(|v| CatalogEntry {
            scene_id: v.scene_id.unwrap_or_default(),
            acquired_at: v.acquired_at,
            path: v.scene_ref.path,
            bands: v.bands,
            status: if v.problem.is_some() { SceneStatus::Invalid } else { SceneStatus::Ok },
            reason: v.problem.unwrap_or_default(),
        })
        .collect();
    entries.sort_by(|a, b| {
        (a.acquired_at.is_none(), a.acquired_at, &a.scene_id, &a.path).cmp(&(
            b.acquired_at.is_none(),
            b.acquired_at,
            &b.scene_id,
            &b.path,
        ))
    });
    let mut seen = BTreeSet::new();
    for e in entries.iter_mut().filter(|e| e.status == SceneStatus::Ok) {
        if !seen.insert(e.scene_id.clone()) {
            e.status = SceneStatus::Invalid;
            e.reason = format!("duplicate scene id {}", e.scene_id);
        }
    }
    for e in entries.iter().filter(|e| e.status == SceneStatus::Invalid) {
        warn!("scene {} rejected: {}", e.path, e.reason);
    }

    create_dir(&cfg.output).stage(Stage::Ingest)?;
    write_catalog(&entries, &cfg.output.join(CATALOG_FILE)).stage(Stage::Ingest)?;
    let ok = entries.iter().filter(|e| e.status == SceneStatus::Ok).count();
    let summary = IngestSummary {
        ok,
        invalid: entries.len() - ok,
    };
    info!("ingest: {} usable, {} invalid", summary.ok, summary.invalid);
    Ok(summary)
}

struct SceneOutput {
    scene_id: String,
    record: SceneRecord,
    observations: Vec<PondObservation>,
    crops: Vec<CropRecord>,
}

fn index_scene(
    cfg: &PipelineConfig,
    source: &dyn SceneSource,
    registry: &PondRegistry,
    entry: &CatalogEntry,
    kinds: &[IndexKind],
    coeffs: &IndexCoefficients,
) -> Result<SceneOutput> {
    let (meta, bands) = source.load(&SceneRef {
        path: entry.path.clone(),
    })?;
    if meta.scene_id != entry.scene_id {
        return Err(Error::invalid(
            "scene_id",
            format!("catalog says {}, header says {}", entry.scene_id, meta.scene_id),
        ));
    }
    let sharp = brovey_pansharpen(&bands, &cfg.brovey)?;
    let stats = DenominatorStats::from_bands(&sharp)?;
    let (width, height) = sharp.dims();

    let mut observations = Vec::new();
    let mut crops = Vec::new();
    for site in registry.iter() {
        let crop = match crop_window(&sharp, site.center, cfg.crop_side_m) {
            Ok(c) => c,
            Err(e) => {
                debug!("{}: pond {} skipped: {e}", entry.scene_id, site.pond_id);
                continue;
            }
        };
        for kind in kinds {
            let res = evaluate_window(&crop.bands, kind, coeffs, &stats, cfg.denominator, &cfg.baselines)?;
            match PondObservation::from_crop(
                &site.pond_id,
                &meta.scene_id,
                meta.acquired_at,
                kind.clone(),
                res.raster,
                crop.clipped,
            ) {
                Ok(mut o) => {
                    o.crop = None;
                    observations.push(o);
                }
                Err(Error::EmptyCrop) => debug!("{}: {kind} empty over pond {}", entry.scene_id, site.pond_id),
                Err(e) => return Err(e),
            }
        }
        crops.push(CropRecord {
            scene_id: meta.scene_id.clone(),
            pond_id: site.pond_id.clone(),
            row0: crop.window.row0,
            col0: crop.window.col0,
            bands: crop.bands,
        });
    }
    Ok(SceneOutput {
        scene_id: meta.scene_id,
        record: SceneRecord {
            acquired_at: meta.acquired_at,
            width,
            height,
            geo: sharp.geo,
            stats,
        },
        observations,
        crops,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSummary {
    pub scenes: usize,
    pub failed: usize,
    pub observations: usize,
}

/// Pan-sharpens each catalogued scene, computes every index over every pond
/// window, and writes the observation, crop and scene stores. A failing
/// scene is logged and skipped; the stage fails only when all do.
pub fn cmd_index(cfg: &PipelineConfig) -> StageResult<IndexSummary> {
    let catalog = read_catalog(&cfg.output.join(CATALOG_FILE)).stage(Stage::Index)?;
    let registry = cfg.registry().stage(Stage::Index)?;
    let source = make_source(cfg);
    let kinds = index_kinds(cfg);
    let coeffs = cfg.index_coefficients();

    let usable: Vec<&CatalogEntry> = catalog.iter().filter(|e| e.status == SceneStatus::Ok).collect();
    let outputs: Vec<Result<SceneOutput>> = usable
        .par_iter()
        .map(|e| index_scene(cfg, source.as_ref(), &registry, e, &kinds, &coeffs))
        .collect();

    let mut observations = Vec::new();
    let mut crops = Vec::new();
    let mut scenes = BTreeMap::new();
    let mut failed = 0;
    for (entry, out) in usable.iter().zip(outputs) {
        match out {
            Ok(out) => {
                observations.extend(out.observations);
                crops.extend(out.crops);
                scenes.insert(out.scene_id, out.record);
            }
            Err(e) => {
                warn!("scene {} failed: {e}", entry.scene_id);
                failed += 1;
            }
        }
    }
    if !usable.is_empty() && failed == usable.len() {
        return Err(PipelineError {
            stage: Stage::Index,
            source: Error::invalid("scenes", format!("all {failed} catalogued scenes failed")),
        });
    }
    observations.sort_by(|a, b| {
        (&a.pond_id, a.acquired_at, &a.scene_id, &a.index_kind).cmp(&(
            &b.pond_id,
            b.acquired_at,
            &b.scene_id,
            &b.index_kind,
        ))
    });

    let out = &cfg.output;
    write_observations(&observations, &out.join(OBSERVATIONS_FILE)).stage(Stage::Index)?;
    write_crops(&crops, &out.join(CROPS_FILE)).stage(Stage::Index)?;
    write_scenes(&scenes, &out.join(SCENES_FILE)).stage(Stage::Index)?;
    let summary = IndexSummary {
        scenes: scenes.len(),
        failed,
        observations: observations.len(),
    };
    info!(
        "index: {} scenes, {} failed, {} observations",
        summary.scenes, summary.failed, summary.observations
    );
    Ok(summary)
}

/// Lab report restricted to ponds with at least `min_samples` samples.
fn usable_lab(cfg: &PipelineConfig) -> Result<(LabReport, BTreeSet<String>)> {
    let lab = parse_lab_reports(&cfg.lab_reports)?;
    let ponds = filter_ponds(lab.samples(), cfg.min_samples);
    if ponds.is_empty() {
        return Err(Error::invalid(
            "lab_reports",
            format!("no pond has at least {} lab samples", cfg.min_samples),
        ));
    }
    Ok((lab, ponds))
}

fn fit_samples(
    pairs: &[AlignedPair],
    kind: &IndexKind,
    target: LabParameter,
    lab: &LabReport,
    crops: &BTreeMap<(String, String), BandSet>,
    scenes: &BTreeMap<String, SceneRecord>,
) -> Result<Vec<FitSample>> {
    let mut out = Vec::new();
    for p in pairs.iter().filter(|p| &p.observation.index_kind == kind) {
        let o = &p.observation;
        let (Some(v), Some(crop), Some(scene)) = (
            lab.normalized(&p.sample, target)?,
            crops.get(&(o.scene_id.clone(), o.pond_id.clone())),
            scenes.get(&o.scene_id),
        ) else {
            continue;
        };
        out.push(FitSample {
            crop: crop.clone(),
            scene: scene.stats,
            target: v,
        });
    }
    Ok(out)
}

fn write_rho(matching: &MatchResult, dir: &Path) -> Result<()> {
    let path = dir.join(RHO_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["index_kind", "parameter", "rho", "n_pairs", "assigned"])?;
    for ((kind, param), rho) in &matching.rho {
        let assigned = matching.assignment.get(kind) == Some(param);
        w.write_record([
            kind.label(),
            param.name(),
            &format_f64(*rho),
            &matching.n_pairs.get(&(kind.clone(), *param)).copied().unwrap_or(0).to_string(),
            if assigned { "true" } else { "false" },
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(RHO_PER_POND_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["pond_id", "index_kind", "parameter", "rho"])?;
    for ((pond, kind, param), rho) in &matching.per_pond {
        w.write_record([pond.as_str(), kind.label(), param.name(), &format_f64(*rho)])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

/// Matches each index to its best-correlated lab parameter, then fits the
/// WQEI coefficients (or scores the literal ones) and writes
/// `calibration.txt`, `rho.csv` and `rho_per_pond.csv`.
pub fn cmd_calibrate(cfg: &PipelineConfig) -> StageResult<CalibrationResult> {
    let run = || -> Result<(CalibrationResult, KeyValues)> {
        let out = &cfg.output;
        let (lab, ponds) = usable_lab(cfg)?;
        let observations: Vec<PondObservation> = read_observations(&out.join(OBSERVATIONS_FILE))?
            .into_iter()
            .filter(|o| ponds.contains(&o.pond_id))
            .collect();
        let pairs = align_timeseries(&observations, lab.samples(), cfg.window_days);
        let matching = match_index_to_parameter(&pairs, &lab)?;
        for kind in [IndexKind::WqeiT, IndexKind::WqeiC] {
            if !matching.assignment.contains_key(&kind) {
                return Err(Error::NoUsableColumn(kind.label().to_string()));
            }
        }

        let scenes = read_scenes(&out.join(SCENES_FILE))?;
        let crops: BTreeMap<(String, String), BandSet> = read_crops(&out.join(CROPS_FILE), &scenes)?
            .into_iter()
            .map(|c| ((c.scene_id, c.pond_id), c.bands))
            .collect();

        let mut coeffs = match &cfg.coefficients {
            CoefficientMode::Fit => IndexCoefficients::unit(),
            CoefficientMode::Literal(c) => *c,
        };
        let mut mse = BTreeMap::new();
        let mut extra = KeyValues::new();
        for kind in [IndexKind::WqeiT, IndexKind::WqeiC] {
            let target = matching.assignment[&kind];
            let samples = fit_samples(&pairs, &kind, target, &lab, &crops, &scenes)?;
            extra.set(format!("samples.{}", kind.label()), samples.len());
            match cfg.coefficients {
                CoefficientMode::Fit => {
                    let fit = fit_coefficients(&samples, &kind, &coeffs, cfg.denominator, &cfg.search)?;
                    info!(
                        "calibrate: {kind} vs {} objective {:e} after {} cycles",
                        target.name(),
                        fit.mse,
                        fit.cycles
                    );
                    coeffs = fit.coefficients;
                    mse.insert(kind, fit.mse);
                }
                CoefficientMode::Literal(_) => {
                    let series = index_series(&samples, &kind, &coeffs, cfg.denominator)?;
                    let targets: Vec<f64> = samples.iter().map(|s| s.target).collect();
                    mse.insert(kind, cfg.search.objective.evaluate(&targets, &series)?);
                }
            }
        }

        let result = CalibrationResult {
            n_pairs: pairs.iter().filter(|p| p.observation.index_kind == IndexKind::WqeiT).count(),
            matching,
            fitted: coeffs,
            mse,
            mode: match cfg.coefficients {
                CoefficientMode::Fit => "fit".into(),
                CoefficientMode::Literal(_) => "literal".into(),
            },
        };
        extra.set("objective", cfg.search.objective.as_str());
        extra.set("ponds", ponds.iter().cloned().collect::<Vec<_>>().join(","));
        Ok((result, extra))
    };
    let (result, extra) = run().stage(Stage::Calibrate)?;

    let write = || -> Result<()> {
        let mut kv = result.to_kv();
        for (k, v) in extra.iter() {
            kv.set(k, v);
        }
        let path = cfg.output.join(CALIBRATION_FILE);
        std::fs::write(&path, kv.render()).map_err(|e| Error::io(&path, e))?;
        write_rho(&result.matching, &cfg.output)
    };
    write().stage(Stage::Calibrate)?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub run_dir: PathBuf,
    pub table_ponds: Vec<String>,
    pub exported_ponds: Vec<String>,
    pub tables: Vec<PathBuf>,
}

fn copy(from: &Path, to: &Path) -> Result<()> {
    std::fs::copy(from, to).map(|_| ()).map_err(|e| Error::io(from, e))
}

/// Re-evaluates the WQEI indices with the calibrated coefficients and writes
/// comparison tables, per-pond time series and map sequences under
/// `report/<run_id>/`.
pub fn cmd_report(cfg: &PipelineConfig) -> StageResult<ReportSummary> {
    report(cfg).stage(Stage::Report)
}

fn report(cfg: &PipelineConfig) -> Result<ReportSummary> {
    let out = &cfg.output;
    let cal_path = out.join(CALIBRATION_FILE);
    let cal_text = std::fs::read_to_string(&cal_path).map_err(|e| Error::io(&cal_path, e))?;
    let cal = KeyValues::parse(&cal_text)?;
    let coeffs = CalibrationResult::coefficients_from_kv(&cal)?;
    let assignment = CalibrationResult::assignment_from_kv(&cal)?;

    let registry = cfg.registry()?;
    let (lab, passing) = usable_lab(cfg)?;
    let stored = read_observations(&out.join(OBSERVATIONS_FILE))?;
    let scenes = read_scenes(&out.join(SCENES_FILE))?;
    let crops = read_crops(&out.join(CROPS_FILE), &scenes)?;

    let clipped: BTreeMap<(&str, &str), bool> = stored
        .iter()
        .map(|o| ((o.pond_id.as_str(), o.scene_id.as_str()), o.clipped))
        .collect();
    let wqei = [IndexKind::WqeiT, IndexKind::WqeiC];
    let mut observations: Vec<PondObservation> = stored
        .iter()
        .filter(|o| !wqei.contains(&o.index_kind))
        .cloned()
        .collect();
    let mut frames: BTreeMap<String, Vec<MapFrame>> = BTreeMap::new();
    for c in &crops {
        let scene = &scenes[&c.scene_id];
        for kind in &wqei {
            let res = evaluate_window(&c.bands, kind, &coeffs, &scene.stats, cfg.denominator, &cfg.baselines)?;
            let was_clipped = clipped.get(&(c.pond_id.as_str(), c.scene_id.as_str())).copied().unwrap_or(false);
            match PondObservation::from_crop(
                &c.pond_id,
                &c.scene_id,
                scene.acquired_at,
                kind.clone(),
                res.raster.clone(),
                was_clipped,
            ) {
                Ok(mut o) => {
                    o.crop = None;
                    observations.push(o);
                }
                Err(Error::EmptyCrop) => {}
                Err(e) => return Err(e),
            }
            frames.entry(c.pond_id.clone()).or_default().push(MapFrame {
                scene_id: c.scene_id.clone(),
                acquired_at: scene.acquired_at,
                result: res,
            });
        }
    }

    let run_dir = out.join("report").join(&cfg.run_id);
    let tables_dir = run_dir.join("tables");
    create_dir(&tables_dir)?;

    let passing_obs: Vec<PondObservation> = observations
        .iter()
        .filter(|o| passing.contains(&o.pond_id))
        .cloned()
        .collect();
    let pairs = align_timeseries(&passing_obs, lab.samples(), cfg.window_days);
    let available: BTreeSet<String> = pairs.iter().map(|p| p.observation.pond_id.clone()).collect();
    let selection = match &cfg.ponds {
        Some(ids) => PondSelection::Ids(ids.clone()),
        None => PondSelection::Random {
            k: cfg.report_k,
            seed: cfg.seed,
        },
    };
    let table_ponds = select_ponds(&available, &selection)?;

    let mut tables = Vec::new();
    for kind in &wqei {
        let Some(target) = assignment.get(kind) else {
            continue;
        };
        let mut methods = vec![kind.clone()];
        methods.extend(cfg.baseline_names.iter().map(|n| IndexKind::Baseline(n.clone())));
        let table = build_comparison(&methods, &pairs, &lab, *target, &table_ponds)?;
        let path = tables_dir.join(format!("{}_{}.csv", kind.label(), target.name()));
        table.write_csv(&path)?;
        tables.push(path);
    }
    for name in [RHO_FILE, RHO_PER_POND_FILE] {
        copy(&out.join(name), &tables_dir.join(name))?;
    }

    let exported: Vec<String> = match &cfg.ponds {
        Some(ids) => ids.clone(),
        None => registry
            .iter()
            .map(|s| s.pond_id.clone())
            .filter(|id| observations.iter().any(|o| &o.pond_id == id))
            .collect(),
    };
    for pond in &exported {
        let dir = run_dir.join("ponds").join(pond);
        create_dir(&dir)?;
        export_timeseries(
            pond,
            &registry,
            &observations,
            &lab,
            &assignment,
            cfg.window_days,
            &dir.join("timeseries.csv"),
        )?;
        if let Some(f) = frames.get(pond) {
            export_map_sequence(pond, f, &dir.join("maps"))?;
        }
    }

    let mut run = KeyValues::new();
    run.set("run_id", &cfg.run_id);
    run.set("seed", cfg.seed);
    run.set("version", env!("CARGO_PKG_VERSION"));
    for (k, v) in cal.iter().filter(|(k, _)| k.starts_with("coefficients.")) {
        run.set(k, v);
    }
    for (kind, param) in &assignment {
        run.set(format!("assignment.{}", kind.label()), param.name());
    }
    run.set("tables.ponds", table_ponds.join(","));
    run.set("ponds.exported", exported.join(","));
    for (k, v) in cfg.raw.iter() {
        run.set(format!("config.{k}"), v);
    }
    let path = run_dir.join("run.txt");
    std::fs::write(&path, run.render()).map_err(|e| Error::io(&path, e))?;
    info!("report: {} tables, {} ponds exported", tables.len(), exported.len());

    Ok(ReportSummary {
        run_dir,
        table_ponds,
        exported_ponds: exported,
        tables,
    })
}

/// All four stages in order.
pub fn cmd_run(cfg: &PipelineConfig) -> StageResult<ReportSummary> {
    cmd_ingest(cfg)?;
    cmd_index(cfg)?;
    cmd_calibrate(cfg)?;
    cmd_report(cfg)
}

/// Generates a synthetic dataset (scenes, registry, lab reports, truth and
/// a ready-to-run config) under `dir`.
pub fn cmd_synth(opts: &SynthOptions, dir: &Path) -> StageResult<PathBuf> {
    let ds = synth::synth_dataset(opts).stage(Stage::Usage)?;
    synth::write_dataset(&ds, dir).stage(Stage::Report)?;
    info!("synth: {} scenes, {} ponds in {}", ds.scenes.len(), ds.registry.len(), dir.display());
    Ok(dir.join(synth::CONFIG_FILE))
}
