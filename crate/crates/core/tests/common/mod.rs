//! Fixtures and an independent single-pixel reference for the index kernels.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wqei_core::raster::{BandName, BandSet, GeoTransform, Raster};

/// Plain transcription of the index formulas on one pixel. Kept free of any
/// library code so it can serve as a reference.
pub mod oracle {
    const EPS: f64 = 1e-9;

    #[derive(Debug, Clone, Copy)]
    pub struct Px {
        pub b1: f64,
        pub b2: f64,
        pub g: f64,
        pub r: f64,
        pub nir: f64,
        pub t: f64,
    }

    impl Px {
        pub fn blue(&self) -> f64 {
            (self.b1 + self.b2) / 2.0
        }
    }

    pub fn imp(p: &Px) -> Option<f64> {
        let den = p.r + p.nir;
        if den <= EPS {
            None
        } else {
            Some((p.r - p.nir) / den - (p.blue().sqrt() + p.r))
        }
    }

    pub fn algae(p: &Px) -> Option<f64> {
        let den = p.g + p.r;
        if den <= EPS {
            None
        } else {
            Some((p.g - p.r) / den)
        }
    }

    pub fn amp(p: &Px) -> Option<f64> {
        Some(imp(p)? * algae(p)?)
    }

    pub fn sal(p: &Px, gamma: f64) -> f64 {
        (p.g + p.blue()) - gamma * (p.r + p.nir)
    }

    /// Scene-level scalar from the valid (G, R, NIR) pixels, mean form.
    pub fn denominator(pixels: &[Option<(f64, f64, f64)>], alpha: f64, beta: f64) -> f64 {
        let valid: Vec<(f64, f64, f64)> = pixels.iter().flatten().copied().collect();
        let n = valid.len() as f64;
        let mean_g = valid.iter().map(|v| v.0).sum::<f64>() / n;
        let mean_rn = valid.iter().map(|v| v.1 + v.2).sum::<f64>() / n;
        alpha * mean_g - beta * mean_rn
    }

    pub fn wqei_t(p: &Px, denominator: f64) -> Option<f64> {
        Some(amp(p)? / denominator)
    }

    /// Clamped value and whether clamping changed it.
    pub fn wqei_c(p: &Px, gamma: f64, theta: f64) -> Option<(f64, bool)> {
        let den = p.nir + p.r + p.g + p.blue();
        if p.t <= EPS || den <= EPS {
            return None;
        }
        let raw = ((p.g + p.blue()) - (gamma * (p.r + p.nir)).powf(theta / p.t)) / den;
        if !raw.is_finite() {
            return None;
        }
        Some((raw.clamp(-1.0, 1.0), !(-1.0..=1.0).contains(&raw)))
    }
}

pub const INDEX_BANDS: [BandName; 6] = [
    BandName::B1,
    BandName::B2,
    BandName::G,
    BandName::R,
    BandName::Nir,
    BandName::T,
];

pub fn geo() -> GeoTransform {
    GeoTransform::new(500_000.0, 4_000_000.0, 30.0, -30.0).unwrap()
}

/// Random `size` x `size` scene with reflective bands in [0, 1), thermal in
/// [0.05, 1) and about `nodata_frac` of each band masked independently.
pub fn random_bands(seed: u64, size: usize, nodata_frac: f64) -> BandSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bands = BTreeMap::new();
    for name in INDEX_BANDS {
        let n = size * size;
        let lo = if name == BandName::T { 0.05 } else { 0.0 };
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(lo..1.0)).collect();
        let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(nodata_frac)).collect();
        bands.insert(name, Raster::with_mask(size, size, values, mask).unwrap());
    }
    let t = Utc.with_ymd_and_hms(2021, 6, 1, 10, 0, 0).unwrap();
    BandSet::new(format!("R{seed}"), t, geo(), 30.0, bands).unwrap()
}

/// The pixel at flat index `i`, or `None` when any of `required` is nodata
/// there. Other bands that are nodata read as NaN.
pub fn pixel_with(bands: &BandSet, i: usize, required: &[BandName]) -> Option<oracle::Px> {
    let get = |b: BandName| match bands.band(b).unwrap().at(i) {
        Some(v) => Some(v),
        None if required.contains(&b) => None,
        None => Some(f64::NAN),
    };
    Some(oracle::Px {
        b1: get(BandName::B1)?,
        b2: get(BandName::B2)?,
        g: get(BandName::G)?,
        r: get(BandName::R)?,
        nir: get(BandName::Nir)?,
        t: get(BandName::T)?,
    })
}

/// The pixel at flat index `i` when every index band is valid there.
pub fn pixel(bands: &BandSet, i: usize) -> Option<oracle::Px> {
    pixel_with(bands, i, &INDEX_BANDS)
}

/// Per-pixel (G, R, NIR) triples feeding the scene denominator.
pub fn denominator_inputs(bands: &BandSet) -> Vec<Option<(f64, f64, f64)>> {
    let g = bands.band(BandName::G).unwrap();
    let r = bands.band(BandName::R).unwrap();
    let nir = bands.band(BandName::Nir).unwrap();
    (0..g.len())
        .map(|i| Some((g.at(i)?, r.at(i)?, nir.at(i)?)))
        .collect()
}

/// Compares a raster against reference values: nodata must coincide and
/// valid pixels agree to `tol`. Returns the largest deviation.
pub fn compare(raster: &Raster, expected: &[Option<f64>], tol: f64) -> Result<f64, String> {
    if raster.len() != expected.len() {
        return Err(format!("length {} vs {}", raster.len(), expected.len()));
    }
    let mut worst: f64 = 0.0;
    for (i, e) in expected.iter().enumerate() {
        match (raster.at(i), e) {
            (Some(a), Some(b)) => {
                let d = (a - b).abs();
                if d > tol {
                    return Err(format!("pixel {i}: {a} vs {b}"));
                }
                worst = worst.max(d);
            }
            (None, None) => {}
            (a, b) => return Err(format!("pixel {i}: nodata mismatch {a:?} vs {b:?}")),
        }
    }
    Ok(worst)
}

/// Bitwise equality of two rasters, nodata masks included.
pub fn bit_identical(a: &Raster, b: &Raster) -> bool {
    a.dims() == b.dims()
        && a.nodata_mask() == b.nodata_mask()
        && a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Recursively lists the files under `dir` relative to it, sorted.
pub fn list_files(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    fn walk(root: &std::path::Path, dir: &std::path::Path, out: &mut Vec<std::path::PathBuf>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

/// Decoded RGB pixels of a PNG.
pub fn png_pixels(path: &std::path::Path) -> (u32, u32, Vec<u8>) {
    let decoder = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(path).unwrap()));
    let mut reader = decoder.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    buf.truncate(info.buffer_size());
    (info.width, info.height, buf)
}
