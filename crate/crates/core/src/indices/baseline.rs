use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::raster::{BandSet, Raster};

use super::formula::Formula;

/// Built-in comparison indices from the remote-sensing literature.
const BUILTINS: [(&str, &str); 5] = [
    // normalized difference vegetation index
    ("NDVI", "(NIR - R) / (NIR + R)"),
    // normalized difference salinity index
    ("NDSI", "(R - NIR) / (R + NIR)"),
    // soil-adjusted vegetation index, L = 0.5
    ("SAVI", "1.5 * (NIR - R) / (NIR + R + 0.5)"),
    // modified soil-adjusted vegetation index
    ("MSAVI", "(2 * NIR + 1 - sqrt((2 * NIR + 1) ^ 2 - 8 * (NIR - R))) / 2"),
    // vegetation soil salinity index
    ("VSSI", "2 * G - 5 * (R + NIR)"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRegistry {
    entries: BTreeMap<String, Formula>,
}

impl Default for BaselineRegistry {
    fn default() -> Self {
        let entries = BUILTINS
            .iter()
            .map(|(name, src)| (name.to_string(), Formula::parse(src).expect("builtin formula")))
            .collect();
        BaselineRegistry { entries }
    }
}

impl BaselineRegistry {
    pub fn empty() -> Self {
        BaselineRegistry {
            entries: BTreeMap::new(),
        }
    }

    /// Adds or replaces an entry.
    pub fn register(&mut self, name: &str, formula: &str) -> Result<()> {
        if name.is_empty() || name == "WQEI_T" || name == "WQEI_C" {
            return Err(Error::invalid("baseline name", format!("`{name}` is reserved")));
        }
        self.entries.insert(name.to_string(), Formula::parse(formula)?);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Formula> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::UnknownBaseline(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn evaluate(&self, name: &str, bands: &BandSet) -> Result<Raster> {
        let formula = self.get(name)?;
        let rasters = formula
            .required_bands()
            .into_iter()
            .map(|b| bands.band(b).map(|r| (b, r)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let (w, h) = bands.dims();
        Ok(Raster::from_fn(w, h, |r, c| {
            formula.eval(&|b| rasters.get(&b).and_then(|ras| ras.get(r, c)))
        }))
    }
}

pub fn baseline_index(registry: &BaselineRegistry, name: &str, bands: &BandSet) -> Result<Raster> {
    registry.evaluate(name, bands)
}
