use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::calibrate::SearchSpec;
use crate::error::{Error, Result};
use crate::indices::{BaselineRegistry, DenominatorMode, IndexCoefficients};
use crate::kv::KeyValues;
use crate::ponds::{PondRegistry, CROP_SIDE_M, MIN_SAMPLES, WINDOW_DAYS};
use crate::preprocess::BroveyWeights;
use crate::raster::BandName;

/// Where scenes come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Local(PathBuf),
    /// `remote:<provider>`; declared but not implemented.
    Remote(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientMode {
    Fit,
    Literal(IndexCoefficients),
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub ponds: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub scene_source: SourceSpec,
    pub pond_registry: PathBuf,
    pub lab_reports: PathBuf,
    pub coefficients: CoefficientMode,
    pub brovey: BroveyWeights,
    pub search: SearchSpec,
    pub output: PathBuf,
    pub seed: u64,
    pub baselines: BaselineRegistry,
    /// Baselines computed alongside the two WQEI indices.
    pub baseline_names: Vec<String>,
    pub denominator: DenominatorMode,
    pub min_samples: usize,
    pub window_days: f64,
    pub crop_side_m: f64,
    pub report_k: usize,
    pub run_id: String,
    pub ponds: Option<Vec<String>>,
    /// The config file as read, echoed into reports.
    pub raw: KeyValues,
}

const KNOWN_KEYS: [&str; 15] = [
    "scene_source",
    "pond_registry",
    "lab_reports",
    "coefficients",
    "seed",
    "output",
    "index.baselines",
    "wqei_t.denominator",
    "calibrate.min_samples",
    "calibrate.window_days",
    "crop.side_m",
    "report.k",
    "run_id",
    "search.max_cycles",
    "search.tol",
];

fn known_key(key: &str) -> bool {
    KNOWN_KEYS.contains(&key)
        || key == "search.objective"
        || key.starts_with("synth.")
        || key.starts_with("brovey.weights.")
        || (key.starts_with("baseline.") && key.ends_with(".formula"))
        || matches!(
            key,
            "coefficients.alpha" | "coefficients.beta" | "coefficients.gamma" | "coefficients.theta"
        )
        || ["alpha", "beta", "gamma", "theta"].iter().any(|c| {
            ["lo", "hi", "grid_points"]
                .iter()
                .any(|f| key == format!("search.{c}.{f}"))
        })
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_kv(KeyValues::parse(&text)?, base, overrides)
    }

    /// Builds and fully validates a config; relative paths resolve
    /// against `base`.
    pub fn from_kv(kv: KeyValues, base: &Path, overrides: &Overrides) -> Result<Self> {
        if let Some((key, _)) = kv.iter().find(|(k, _)| !known_key(k)) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }

        let scene_source = match kv.require("scene_source")? {
            s if s.starts_with("remote:") => SourceSpec::Remote(s["remote:".len()..].to_string()),
            s => {
                let dir = resolve(base, s);
                if !dir.is_dir() {
                    return Err(Error::Config(format!("scene_source {} is not a directory", dir.display())));
                }
                SourceSpec::Local(dir)
            }
        };
        let existing = |key: &str| -> Result<PathBuf> {
            let p = resolve(base, kv.require(key)?);
            if !p.is_file() {
                return Err(Error::Config(format!("{key} {} does not exist", p.display())));
            }
            Ok(p)
        };
        let pond_registry = existing("pond_registry")?;
        let lab_reports = existing("lab_reports")?;

        let coefficients = match kv.get("coefficients").unwrap_or("fit") {
            "fit" => CoefficientMode::Fit,
            "published" => CoefficientMode::Literal(IndexCoefficients::published()),
            "literal" => {
                let c = IndexCoefficients::new(
                    kv.parse_required("coefficients.alpha")?,
                    kv.parse_required("coefficients.beta")?,
                    kv.parse_required("coefficients.gamma")?,
                    kv.parse_required("coefficients.theta")?,
                )?;
                if [c.alpha(), c.beta()].iter().any(|v| *v <= 0.0) {
                    return Err(Error::Config("literal coefficients must be positive".into()));
                }
                CoefficientMode::Literal(c)
            }
            other => return Err(Error::Config(format!("coefficients = `{other}`, expected fit|literal|published"))),
        };

        let weights: BTreeMap<BandName, f64> = kv
            .with_prefix("brovey.weights.")
            .map(|(band, v)| {
                let w = v
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("brovey.weights.{band}"), "not a number"))?;
                Ok((band.parse::<BandName>()?, w))
            })
            .collect::<Result<_>>()?;
        let brovey = if weights.is_empty() {
            BroveyWeights::default()
        } else {
            BroveyWeights::new(weights)?
        };

        let mut baselines = BaselineRegistry::default();
        let extra: Vec<(String, String)> = kv
            .with_prefix("baseline.")
            .map(|(k, v)| (k.trim_end_matches(".formula").to_string(), v.to_string()))
            .collect();
        for (name, formula) in &extra {
            baselines.register(name, formula)?;
        }
        let baseline_names: Vec<String> = match kv.get("index.baselines") {
            None => baselines.names().map(str::to_string).collect(),
            Some("none") | Some("") => Vec::new(),
            Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        };
        for name in &baseline_names {
            baselines.get(name)?;
        }

        let seed = match overrides.seed {
            Some(s) => s,
            None => kv.parse_or("seed", 0u64)?,
        };
        let output = match &overrides.output {
            Some(p) => p.clone(),
            None => resolve(base, kv.get("output").unwrap_or("out")),
        };
        let window_days: f64 = kv.parse_or("calibrate.window_days", WINDOW_DAYS)?;
        let crop_side_m: f64 = kv.parse_or("crop.side_m", CROP_SIDE_M)?;
        if !(window_days >= 0.0 && window_days.is_finite()) {
            return Err(Error::Config("calibrate.window_days must be non-negative".into()));
        }
        if !(crop_side_m > 0.0 && crop_side_m.is_finite()) {
            return Err(Error::Config("crop.side_m must be positive".into()));
        }

        let registry = PondRegistry::load(&pond_registry)?;
        if registry.is_empty() {
            return Err(Error::Config("pond registry is empty".into()));
        }
        if let Some(ids) = &overrides.ponds {
            for id in ids {
                registry.get(id)?;
            }
        }

        Ok(PipelineConfig {
            scene_source,
            pond_registry,
            lab_reports,
            coefficients,
            brovey,
            search: SearchSpec::from_config(&kv)?,
            output,
            seed,
            baselines,
            baseline_names,
            denominator: kv.parse_or("wqei_t.denominator", DenominatorMode::Mean)?,
            min_samples: kv.parse_or("calibrate.min_samples", MIN_SAMPLES)?,
            window_days,
            crop_side_m,
            report_k: kv.parse_or("report.k", 5usize)?,
            run_id: kv.get("run_id").map(str::to_string).unwrap_or_else(|| format!("run-{seed}")),
            ponds: overrides.ponds.clone(),
            raw: kv,
        })
    }

    /// Coefficients the index stage uses: literal ones when given, else all
    /// ones, the neutral starting point for matching.
    pub fn index_coefficients(&self) -> IndexCoefficients {
        match &self.coefficients {
            CoefficientMode::Literal(c) => *c,
            CoefficientMode::Fit => IndexCoefficients::unit(),
        }
    }

    pub fn registry(&self) -> Result<PondRegistry> {
        PondRegistry::load(&self.pond_registry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (tempfile::TempDir, KeyValues) {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("scenes")).unwrap();
        std::fs::write(dir.path().join("ponds.csv"), "pond_id,x_m,y_m,kind\nP1,0,0,frac\n").unwrap();
        std::fs::write(dir.path().join("lab.csv"), "").unwrap();
        let kv = KeyValues::parse("scene_source = scenes\npond_registry = ponds.csv\nlab_reports = lab.csv\n").unwrap();
        (dir, kv)
    }

    #[test]
    fn defaults_and_overrides() {
        let (dir, kv) = fixture();
        let cfg = PipelineConfig::from_kv(kv.clone(), dir.path(), &Overrides::default()).unwrap();
        assert_eq!(cfg.coefficients, CoefficientMode::Fit);
        assert_eq!(cfg.run_id, "run-0");
        assert_eq!(cfg.baseline_names.len(), 5);
        assert_eq!(cfg.output, dir.path().join("out"));

        let o = Overrides {
            seed: Some(9),
            output: Some("/tmp/x".into()),
            ponds: Some(vec!["P1".into()]),
        };
        let cfg = PipelineConfig::from_kv(kv, dir.path(), &o).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.run_id, "run-9");
    }

    #[test]
    fn rejects_bad_configs() {
        let (dir, kv) = fixture();
        let with = |k: &str, v: &str| {
            let mut kv = kv.clone();
            kv.set(k, v);
            PipelineConfig::from_kv(kv, dir.path(), &Overrides::default())
        };
        assert!(with("mystery", "1").is_err());
        assert!(with("lab_reports", "nope.csv").is_err());
        assert!(with("coefficients", "literal").is_err());
        assert!(with("brovey.weights.R", "2").is_err());
        assert!(with("index.baselines", "SI9").is_err());
        assert!(with("search.gamma.lo", "20").is_err());
        assert!(with("baseline.RATIO.formula", "NIR / R").is_ok());
        let bad_pond = Overrides {
            ponds: Some(vec!["P9".into()]),
            ..Overrides::default()
        };
        assert!(PipelineConfig::from_kv(kv.clone(), dir.path(), &bad_pond).is_err());
        let remote = with("scene_source", "remote:landsat").unwrap();
        assert_eq!(remote.scene_source, SourceSpec::Remote("landsat".into()));
    }
}
