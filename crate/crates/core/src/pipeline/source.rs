use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};
use crate::raster::{BandName, BandSet};
use crate::scene_io::{self, SceneMetadata, HEADER_FILE};

/// Bands every scene must provide for the index stage.
pub const REQUIRED_BANDS: [BandName; 7] = [
    BandName::B1,
    BandName::B2,
    BandName::G,
    BandName::R,
    BandName::Nir,
    BandName::T,
    BandName::Pan,
];

/// A scene as listed by a source, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneRef {
    /// Location relative to the source root.
    pub path: String,
}

/// Outcome of validating one listed scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub scene_ref: SceneRef,
    pub scene_id: Option<String>,
    pub acquired_at: Option<DateTime<Utc>>,
    pub bands: Vec<BandName>,
    /// `None` when the scene is usable.
    pub problem: Option<String>,
}

pub trait SceneSource: Send + Sync {
    /// Candidate scenes, sorted by path.
    fn list(&self) -> Result<Vec<SceneRef>>;

    fn load(&self, scene: &SceneRef) -> Result<(SceneMetadata, BandSet)>;

    /// Loads the scene fully and checks the required bands are present.
    fn validate(&self, scene: &SceneRef) -> Validated {
        let mut out = Validated {
            scene_ref: scene.clone(),
            scene_id: None,
            acquired_at: None,
            bands: Vec::new(),
            problem: None,
        };
        match self.load(scene) {
            Ok((meta, bands)) => {
                out.scene_id = Some(meta.scene_id);
                out.acquired_at = Some(meta.acquired_at);
                out.bands = bands.names().collect();
                let missing: Vec<&str> = REQUIRED_BANDS
                    .iter()
                    .filter(|b| !bands.has(**b))
                    .map(|b| b.as_str())
                    .collect();
                if !missing.is_empty() {
                    out.problem = Some(format!("missing bands {}", missing.join(" ")));
                }
            }
            Err(e) => out.problem = Some(e.to_string()),
        }
        out
    }
}

/// Scene directories (each holding a header and band files) under one root.
#[derive(Debug, Clone)]
pub struct LocalSource {
    root: PathBuf,
}

impl LocalSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        LocalSource { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

impl SceneSource for LocalSource {
    fn list(&self) -> Result<Vec<SceneRef>> {
        let entries = std::fs::read_dir(&self.root).map_err(|e| Error::io(&self.root, e))?;
        let mut out = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.root, e))?;
            let path = entry.path();
            if path.is_dir() && path.join(HEADER_FILE).is_file() {
                out.push(SceneRef {
                    path: entry.file_name().to_string_lossy().into_owned(),
                });
            }
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(out)
    }

    fn load(&self, scene: &SceneRef) -> Result<(SceneMetadata, BandSet)> {
        scene_io::load_scene_with_metadata(&self.root.join(&scene.path))
    }
}

/// Placeholder for a network archive; every call fails.
#[derive(Debug, Clone)]
pub struct RemoteSource {
    pub provider: String,
}

impl SceneSource for RemoteSource {
    fn list(&self) -> Result<Vec<SceneRef>> {
        Err(Error::Unsupported(format!("remote scene source `{}`", self.provider)))
    }

    fn load(&self, _scene: &SceneRef) -> Result<(SceneMetadata, BandSet)> {
        self.list().map(|_| unreachable!())
    }
}
