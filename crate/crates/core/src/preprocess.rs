//! Band normalization, bilinear upsampling and Brovey pan-sharpening.
//!
//! The Brovey ratio is taken on reflectance. Z-scoring is available as a
//! separate step but is not part of the sharpening path, since the ratio
//! of z-scores divides by values near zero.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::raster::{BandName, BandSet, Raster};
use crate::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandStats {
    mean: f64,
    std: f64,
}

impl BandStats {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(Error::invalid("std", "must be positive and finite"));
        }
        Ok(BandStats { mean, std })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalizationStats {
    pub bands: BTreeMap<BandName, BandStats>,
}

impl NormalizationStats {
    pub fn get(&self, band: BandName) -> Result<&BandStats> {
        self.bands
            .get(&band)
            .ok_or_else(|| Error::MissingBand(band.to_string()))
    }
}

/// Pooled mean and population standard deviation of every band over all
/// valid pixels of all scenes.
pub fn compute_dataset_stats(scenes: &[BandSet]) -> Result<NormalizationStats> {
    if scenes.is_empty() {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    let mut names: Vec<BandName> = scenes.iter().flat_map(|s| s.names()).collect();
    names.sort();
    names.dedup();

    let mut out = NormalizationStats::default();
    for band in names {
        let rasters: Vec<&Raster> = scenes.iter().filter_map(|s| s.band(band).ok()).collect();
        let n: usize = rasters.iter().map(|r| r.valid_count()).sum();
        if n < 2 {
            return Err(Error::TooShort { need: 2, got: n });
        }
        let mean = rasters.iter().flat_map(|r| r.valid_values()).sum::<f64>() / n as f64;
        let var = rasters
            .iter()
            .flat_map(|r| r.valid_values())
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n as f64;
        if var <= 0.0 {
            return Err(Error::ZeroVariance(band.to_string()));
        }
        out.bands.insert(band, BandStats::new(mean, var.sqrt())?);
    }
    Ok(out)
}

pub fn zscore_normalize(band: &Raster, stats: &BandStats) -> Raster {
    band.map(|v| Some((v - stats.mean) / stats.std))
}

/// Z-scores every band that has statistics; other bands pass through.
pub fn normalize_band_set(band_set: &BandSet, stats: &NormalizationStats) -> Result<BandSet> {
    let bands = band_set
        .bands()
        .iter()
        .map(|(&name, r)| {
            let out = match stats.bands.get(&name) {
                Some(s) => zscore_normalize(r, s),
                None => r.clone(),
            };
            (name, out)
        })
        .collect();
    BandSet::new(
        band_set.scene_id.clone(),
        band_set.acquired_at,
        band_set.geo,
        band_set.resolution_m,
        bands,
    )
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Source coordinate of output index `j` under pixel-center alignment,
/// clamped to the input edge. Returns (lower index, fraction).
#[inline]
fn source_coord(j: usize, factor: usize, n: usize) -> (usize, f64) {
    let u = ((j as f64 + 0.5) / factor as f64 - 0.5).clamp(0.0, (n - 1) as f64);
    let i0 = u.floor() as usize;
    (i0, u - i0 as f64)
}

/// Bilinear upsampling by an integer factor with pixel-center alignment.
/// An output pixel is nodata when any input carrying nonzero weight is.
pub fn upsample_bilinear(band: &Raster, factor: usize) -> Result<Raster> {
    if factor == 0 {
        return Err(Error::ZeroFactor);
    }
    let (w, h) = band.dims();
    if w == 0 || h == 0 {
        return Ok(band.clone());
    }
    let cols: Vec<(usize, f64)> = (0..w * factor).map(|j| source_coord(j, factor, w)).collect();
    let rows: Vec<(usize, f64)> = (0..h * factor).map(|i| source_coord(i, factor, h)).collect();

    let row_value = |r: usize, (c0, fx): (usize, f64)| -> Option<f64> {
        let a = band.get(r, c0)?;
        if fx == 0.0 {
            Some(a)
        } else {
            Some(lerp(a, band.get(r, c0 + 1)?, fx))
        }
    };

    Ok(Raster::from_fn(w * factor, h * factor, |i, j| {
        let (r0, fy) = rows[i];
        let top = row_value(r0, cols[j])?;
        if fy == 0.0 {
            Some(top)
        } else {
            Some(lerp(top, row_value(r0 + 1, cols[j])?, fy))
        }
    }))
}

/// Per-band weights of the multispectral sum that PAN is compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct BroveyWeights(BTreeMap<BandName, f64>);

impl Default for BroveyWeights {
    fn default() -> Self {
        BroveyWeights(
            [BandName::R, BandName::G, BandName::B1, BandName::B2]
                .into_iter()
                .map(|b| (b, 0.25))
                .collect(),
        )
    }
}

impl BroveyWeights {
    /// Weights must be nonnegative, cover R, G, B1 and B2, name only
    /// multispectral bands, and sum to one.
    pub fn new(weights: BTreeMap<BandName, f64>) -> Result<Self> {
        for (&band, &w) in &weights {
            if !BandName::MULTISPECTRAL.contains(&band) {
                return Err(Error::InvalidWeights(format!("{band} is not a multispectral band")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidWeights(format!("weight for {band} is {w}")));
            }
        }
        for band in [BandName::R, BandName::G, BandName::B1, BandName::B2] {
            if !weights.contains_key(&band) {
                return Err(Error::InvalidWeights(format!("no weight for {band}")));
            }
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
        }
        Ok(BroveyWeights(weights))
    }

    pub fn get(&self, band: BandName) -> f64 {
        self.0.get(&band).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (BandName, f64)> + '_ {
        self.0.iter().map(|(&b, &w)| (b, w))
    }
}

/// Brovey sharpening to the PAN grid. Every non-PAN band is upsampled 2x;
/// multispectral bands are then scaled by `PAN / sum_j w_j * up_j`. Thermal
/// is upsampled only. PAN is consumed.
pub fn brovey_pansharpen(band_set: &BandSet, weights: &BroveyWeights) -> Result<BandSet> {
    let pan = band_set.band(BandName::Pan)?;

    let mut upsampled = BTreeMap::new();
    for (&name, raster) in band_set.bands() {
        if name != BandName::Pan {
            upsampled.insert(name, upsample_bilinear(raster, 2)?);
        }
    }
    for (band, w) in weights.iter() {
        if w > 0.0 && !upsampled.contains_key(&band) {
            return Err(Error::MissingBand(band.to_string()));
        }
    }
    let (w, h) = pan.dims();
    let weighted: Vec<(&Raster, f64)> = weights
        .iter()
        .filter(|(_, wt)| *wt > 0.0)
        .map(|(b, wt)| (&upsampled[&b], wt))
        .collect();

    let ratio = Raster::from_fn(w, h, |r, c| {
        let p = pan.get(r, c)?;
        let mut sum = 0.0;
        for (raster, wt) in &weighted {
            sum += wt * raster.get(r, c)?;
        }
        if sum <= EPSILON {
            None
        } else {
            Some(p / sum)
        }
    });

    let mut out = BTreeMap::new();
    for (name, up) in upsampled {
        let sharpened = if BandName::MULTISPECTRAL.contains(&name) {
            Raster::from_fn(w, h, |r, c| Some(up.get(r, c)? * ratio.get(r, c)?))
        } else {
            up
        };
        out.insert(name, sharpened);
    }
    BandSet::new(
        band_set.scene_id.clone(),
        band_set.acquired_at,
        band_set.geo.refined(2),
        band_set.resolution_m / 2.0,
        out,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoTransform;
    use chrono::{TimeZone, Utc};

    fn set_of(bands: Vec<(BandName, Raster)>, res: f64) -> BandSet {
        let geo = GeoTransform::new(0.0, 0.0, res, -res).unwrap();
        BandSet::new("t", Utc.timestamp_opt(0, 0).unwrap(), geo, res, bands.into_iter().collect()).unwrap()
    }

    #[test]
    fn dataset_stats() {
        let constant = set_of(vec![(BandName::R, Raster::filled(2, 2, 0.5))], 30.0);
        assert!(matches!(
            compute_dataset_stats(std::slice::from_ref(&constant)),
            Err(Error::ZeroVariance(_))
        ));

        let two = set_of(
            vec![(BandName::R, Raster::new(2, 1, vec![0.0, 1.0]).unwrap())],
            30.0,
        );
        let s = compute_dataset_stats(&[two]).unwrap();
        let r = s.get(BandName::R).unwrap();
        assert_eq!((r.mean(), r.std()), (0.5, 0.5));

        let a = set_of(vec![(BandName::R, Raster::filled(1, 1, 0.0))], 30.0);
        let b = set_of(vec![(BandName::R, Raster::filled(1, 1, 1.0))], 30.0);
        let s = compute_dataset_stats(&[a, b]).unwrap();
        let r = s.get(BandName::R).unwrap();
        assert_eq!((r.mean(), r.std()), (0.5, 0.5));

        assert!(compute_dataset_stats(&[]).is_err());
    }

    #[test]
    fn zscore() {
        let stats = BandStats::new(0.5, 0.5).unwrap();
        let r = Raster::new(3, 1, vec![0.0, 1.0, 0.5]).unwrap();
        assert_eq!(zscore_normalize(&r, &stats).values(), &[-1.0, 1.0, 0.0]);
        let s2 = BandStats::new(0.2, 0.1).unwrap();
        let v = zscore_normalize(&Raster::filled(1, 1, 0.3), &s2).get(0, 0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(BandStats::new(0.0, 0.0).is_err());
    }

    #[test]
    fn upsample_examples() {
        let one = Raster::filled(1, 1, 3.0);
        let up = upsample_bilinear(&one, 2).unwrap();
        assert_eq!(up.dims(), (2, 2));
        assert!(up.values().iter().all(|&v| v == 3.0));

        let ramp = Raster::new(2, 1, vec![0.0, 1.0]).unwrap();
        let up = upsample_bilinear(&ramp, 2).unwrap();
        assert_eq!(up.dims(), (4, 2));
        assert_eq!(&up.values()[..4], &[0.0, 0.25, 0.75, 1.0]);

        let r = Raster::new(3, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        assert_eq!(upsample_bilinear(&r, 1).unwrap(), r);
        assert!(matches!(upsample_bilinear(&r, 0), Err(Error::ZeroFactor)));
    }

    #[test]
    fn upsample_propagates_nodata() {
        let r = Raster::with_mask(3, 1, vec![0.0, 0.0, 1.0], vec![false, true, false]).unwrap();
        let up = upsample_bilinear(&r, 2).unwrap();
        // output col 0 clamps onto input 0 alone; cols 1..=4 touch input 1
        assert_eq!(up.get(0, 0), Some(0.0));
        for c in 1..5 {
            assert_eq!(up.get(0, c), None);
        }
        assert_eq!(up.get(0, 5), Some(1.0));
    }

    fn uniform(r: f64, g: f64, b1: f64, b2: f64, pan: f64) -> BandSet {
        set_of(
            vec![
                (BandName::R, Raster::filled(2, 2, r)),
                (BandName::G, Raster::filled(2, 2, g)),
                (BandName::B1, Raster::filled(2, 2, b1)),
                (BandName::B2, Raster::filled(2, 2, b2)),
                (BandName::Nir, Raster::filled(2, 2, 0.05)),
                (BandName::T, Raster::filled(2, 2, 0.6)),
                (BandName::Pan, Raster::filled(4, 4, pan)),
            ],
            30.0,
        )
    }

    #[test]
    fn brovey_ratio_two() {
        let out = brovey_pansharpen(&uniform(0.2, 0.3, 0.1, 0.1, 0.35), &BroveyWeights::default()).unwrap();
        assert_eq!(out.resolution_m, 15.0);
        assert_eq!(out.dims(), (4, 4));
        assert!(!out.has(BandName::Pan));
        for v in out.band(BandName::R).unwrap().valid_values() {
            assert!((v - 0.4).abs() < 1e-12);
        }
        for v in out.band(BandName::T).unwrap().valid_values() {
            assert_eq!(v, 0.6);
        }
    }

    #[test]
    fn brovey_zero_sum_is_nodata() {
        let out = brovey_pansharpen(&uniform(0.0, 0.0, 0.0, 0.0, 0.3), &BroveyWeights::default()).unwrap();
        assert_eq!(out.band(BandName::R).unwrap().valid_count(), 0);
        assert_eq!(out.band(BandName::T).unwrap().valid_count(), 16);
    }

    #[test]
    fn brovey_errors() {
        let no_pan = set_of(vec![(BandName::R, Raster::filled(2, 2, 0.1))], 30.0);
        assert!(matches!(
            brovey_pansharpen(&no_pan, &BroveyWeights::default()),
            Err(Error::MissingBand(b)) if b == "PAN"
        ));
        let mut w = BTreeMap::new();
        w.insert(BandName::R, 0.5);
        w.insert(BandName::G, 0.5);
        assert!(BroveyWeights::new(w.clone()).is_err());
        w.insert(BandName::B1, -0.1);
        w.insert(BandName::B2, 0.1);
        assert!(BroveyWeights::new(w).is_err());
        let mut t = BTreeMap::new();
        for b in [BandName::R, BandName::G, BandName::B1, BandName::B2, BandName::T] {
            t.insert(b, 0.2);
        }
        assert!(BroveyWeights::new(t).is_err());
    }
}
