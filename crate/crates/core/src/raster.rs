//! Raster containers, georeferencing and windowed cropping.
//!
//! A [`Raster`] is a row-major grid of `f64` with a per-pixel nodata mask.
//! Values stored under the mask are always `0.0`, so two rasters compare
//! equal exactly when their valid pixels and masks agree.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    values: Vec<f64>,
    nodata: Vec<bool>,
}

impl Raster {
    /// A fully valid raster. Every value must be finite.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let nodata = vec![false; values.len()];
        Self::with_mask(width, height, values, nodata)
    }

    pub fn with_mask(
        width: usize,
        height: usize,
        mut values: Vec<f64>,
        nodata: Vec<bool>,
    ) -> Result<Self> {
        let len = width * height;
        if values.len() != len {
            return Err(Error::SizeMismatch {
                what: "raster values".into(),
                expected: len,
                actual: values.len(),
            });
        }
        if nodata.len() != len {
            return Err(Error::SizeMismatch {
                what: "nodata mask".into(),
                expected: len,
                actual: nodata.len(),
            });
        }
        for (v, &masked) in values.iter_mut().zip(&nodata) {
            if masked {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(Error::NonFinite("raster".into()));
            }
        }
        Ok(Raster {
            width,
            height,
            values,
            nodata,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| Some(value))
    }

    pub fn all_nodata(width: usize, height: usize) -> Self {
        Self::from_fn(width, height, |_, _| None)
    }

    /// Builds a raster from a per-pixel function. `None` and non-finite
    /// results become nodata.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Option<f64>) -> Self {
        let len = width * height;
        let mut values = Vec::with_capacity(len);
        let mut nodata = Vec::with_capacity(len);
        for row in 0..height {
            for col in 0..width {
                match f(row, col) {
                    Some(v) if v.is_finite() => {
                        values.push(v);
                        nodata.push(false);
                    }
                    _ => {
                        values.push(0.0);
                        nodata.push(true);
                    }
                }
            }
        }
        Raster {
            width,
            height,
            values,
            nodata,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodata_mask(&self) -> &[bool] {
        &self.nodata
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        if row >= self.height || col >= self.width {
            return None;
        }
        self.at(row * self.width + col)
    }

    /// Value at a flat row-major index, `None` when masked.
    #[inline]
    pub fn at(&self, idx: usize) -> Option<f64> {
        if self.nodata[idx] {
            None
        } else {
            Some(self.values[idx])
        }
    }

    pub fn valid_count(&self) -> usize {
        self.nodata.iter().filter(|&&m| !m).count()
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.nodata)
            .filter(|(_, &m)| !m)
            .map(|(&v, _)| v)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> Option<f64>) -> Raster {
        Raster::from_fn(self.width, self.height, |r, c| self.get(r, c).and_then(&mut f))
    }

    /// Sub-window copy. The window must lie inside the raster.
    pub fn window(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Raster {
        assert!(row0 + rows <= self.height && col0 + cols <= self.width);
        Raster::from_fn(cols, rows, |r, c| self.get(row0 + r, col0 + c))
    }

    pub fn transpose(&self) -> Raster {
        Raster::from_fn(self.height, self.width, |r, c| self.get(c, r))
    }

    /// Writes `tile` into this raster with its top-left corner at (row0, col0).
    pub fn paste(&mut self, tile: &Raster, row0: usize, col0: usize) {
        assert!(row0 + tile.height <= self.height && col0 + tile.width <= self.width);
        for r in 0..tile.height {
            let dst = (row0 + r) * self.width + col0;
            let src = r * tile.width;
            self.values[dst..dst + tile.width].copy_from_slice(&tile.values[src..src + tile.width]);
            self.nodata[dst..dst + tile.width].copy_from_slice(&tile.nodata[src..src + tile.width]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub x: f64,
    pub y: f64,
}

impl GeoPoint {
    pub fn new(x: f64, y: f64) -> Self {
        GeoPoint { x, y }
    }
}

/// North-up affine transform: `x = origin_x + col * pixel_size_x`,
/// `y = origin_y + row * pixel_size_y` at the pixel's top-left corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoTransform {
    pub origin_x: f64,
    pub origin_y: f64,
    pub pixel_size_x: f64,
    pub pixel_size_y: f64,
}

impl GeoTransform {
    pub fn new(origin_x: f64, origin_y: f64, pixel_size_x: f64, pixel_size_y: f64) -> Result<Self> {
        if !(pixel_size_x > 0.0 && pixel_size_x.is_finite()) {
            return Err(Error::invalid("geotransform", "pixel_size_x must be positive"));
        }
        if pixel_size_y == 0.0 || !pixel_size_y.is_finite() {
            return Err(Error::invalid("geotransform", "pixel_size_y must be nonzero"));
        }
        if !origin_x.is_finite() || !origin_y.is_finite() {
            return Err(Error::invalid("geotransform", "origin must be finite"));
        }
        Ok(GeoTransform {
            origin_x,
            origin_y,
            pixel_size_x,
            pixel_size_y,
        })
    }

    /// Geo coordinate of the center of pixel (row, col).
    pub fn pixel_to_geo(&self, row: usize, col: usize) -> GeoPoint {
        GeoPoint {
            x: self.origin_x + (col as f64 + 0.5) * self.pixel_size_x,
            y: self.origin_y + (row as f64 + 0.5) * self.pixel_size_y,
        }
    }

    /// Pixel containing `point` in a `width` x `height` grid.
    pub fn geo_to_pixel(&self, point: GeoPoint, width: usize, height: usize) -> Result<(usize, usize)> {
        let col = ((point.x - self.origin_x) / self.pixel_size_x).floor();
        let row = ((point.y - self.origin_y) / self.pixel_size_y).floor();
        // NaN fails every comparison below
        if col >= 0.0 && row >= 0.0 && col < width as f64 && row < height as f64 {
            Ok((row as usize, col as usize))
        } else {
            Err(Error::OutOfExtent {
                x: point.x,
                y: point.y,
            })
        }
    }

    /// Transform of a grid whose top-left pixel is (row0, col0) of this one.
    pub fn offset(&self, row0: usize, col0: usize) -> GeoTransform {
        GeoTransform {
            origin_x: self.origin_x + col0 as f64 * self.pixel_size_x,
            origin_y: self.origin_y + row0 as f64 * self.pixel_size_y,
            ..*self
        }
    }

    /// Transform of the same footprint with pixels `factor` times smaller.
    pub fn refined(&self, factor: usize) -> GeoTransform {
        GeoTransform {
            pixel_size_x: self.pixel_size_x / factor as f64,
            pixel_size_y: self.pixel_size_y / factor as f64,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BandName {
    B1,
    B2,
    G,
    R,
    Nir,
    Pan,
    T,
}

impl BandName {
    pub const ALL: [BandName; 7] = [
        BandName::B1,
        BandName::B2,
        BandName::G,
        BandName::R,
        BandName::Nir,
        BandName::Pan,
        BandName::T,
    ];

    /// Bands that Brovey sharpening rescales.
    pub const MULTISPECTRAL: [BandName; 5] = [
        BandName::B1,
        BandName::B2,
        BandName::G,
        BandName::R,
        BandName::Nir,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BandName::B1 => "B1",
            BandName::B2 => "B2",
            BandName::G => "G",
            BandName::R => "R",
            BandName::Nir => "NIR",
            BandName::Pan => "PAN",
            BandName::T => "T",
        }
    }

    /// Nominal center wavelength in µm.
    pub fn wavelength_um(self) -> f64 {
        match self {
            BandName::B1 => 0.44,
            BandName::B2 => 0.48,
            BandName::G => 0.55,
            BandName::R => 0.65,
            BandName::Nir => 0.86,
            BandName::Pan => 0.59,
            BandName::T => 10.8,
        }
    }

    /// Everything except thermal.
    pub fn is_reflective(self) -> bool {
        self != BandName::T
    }
}

impl fmt::Display for BandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BandName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BandName::ALL
            .iter()
            .copied()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::UnknownBand(s.to_string()))
    }
}

/// Co-registered bands of one acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    pub scene_id: String,
    pub acquired_at: DateTime<Utc>,
    pub geo: GeoTransform,
    pub resolution_m: f64,
    bands: BTreeMap<BandName, Raster>,
}

impl BandSet {
    pub fn new(
        scene_id: impl Into<String>,
        acquired_at: DateTime<Utc>,
        geo: GeoTransform,
        resolution_m: f64,
        bands: BTreeMap<BandName, Raster>,
    ) -> Result<Self> {
        if !(resolution_m > 0.0 && resolution_m.is_finite()) {
            return Err(Error::invalid("resolution_m", "must be positive"));
        }
        let mut dims: Option<(usize, usize)> = None;
        for (name, raster) in bands.iter().filter(|(n, _)| **n != BandName::Pan) {
            match dims {
                None => dims = Some(raster.dims()),
                Some(d) if d != raster.dims() => {
                    return Err(Error::SizeMismatch {
                        what: format!("band {name}"),
                        expected: d.0 * d.1,
                        actual: raster.len(),
                    })
                }
                _ => {}
            }
        }
        if let (Some((w, h)), Some(pan)) = (dims, bands.get(&BandName::Pan)) {
            if pan.dims() != (2 * w, 2 * h) {
                return Err(Error::SizeMismatch {
                    what: "band PAN".into(),
                    expected: 4 * w * h,
                    actual: pan.len(),
                });
            }
        }
        Ok(BandSet {
            scene_id: scene_id.into(),
            acquired_at,
            geo,
            resolution_m,
            bands,
        })
    }

    /// (width, height) of the non-PAN grid.
    pub fn dims(&self) -> (usize, usize) {
        self.bands
            .iter()
            .find(|(n, _)| **n != BandName::Pan)
            .map(|(_, r)| r.dims())
            .or_else(|| self.bands.get(&BandName::Pan).map(|p| (p.width() / 2, p.height() / 2)))
            .unwrap_or((0, 0))
    }

    pub fn band(&self, name: BandName) -> Result<&Raster> {
        self.bands
            .get(&name)
            .ok_or_else(|| Error::MissingBand(name.to_string()))
    }

    pub fn has(&self, name: BandName) -> bool {
        self.bands.contains_key(&name)
    }

    pub fn bands(&self) -> &BTreeMap<BandName, Raster> {
        &self.bands
    }

    pub fn names(&self) -> impl Iterator<Item = BandName> + '_ {
        self.bands.keys().copied()
    }

    pub fn into_bands(self) -> BTreeMap<BandName, Raster> {
        self.bands
    }

    pub fn pixel_to_geo(&self, row: usize, col: usize) -> GeoPoint {
        self.geo.pixel_to_geo(row, col)
    }

    pub fn geo_to_pixel(&self, point: GeoPoint) -> Result<(usize, usize)> {
        let (w, h) = self.dims();
        self.geo.geo_to_pixel(point, w, h)
    }

    /// Same bands restricted to the inclusive pixel rectangle.
    fn sub_window(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> BandSet {
        let bands = self
            .bands
            .iter()
            .map(|(&name, r)| {
                let cropped = if name == BandName::Pan {
                    r.window(2 * row0, 2 * col0, 2 * rows, 2 * cols)
                } else {
                    r.window(row0, col0, rows, cols)
                };
                (name, cropped)
            })
            .collect();
        BandSet {
            scene_id: self.scene_id.clone(),
            acquired_at: self.acquired_at,
            geo: self.geo.offset(row0, col0),
            resolution_m: self.resolution_m,
            bands,
        }
    }
}

/// Pixel rectangle in the parent grid, top-left inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelWindow {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crop {
    pub bands: BandSet,
    pub window: PixelWindow,
    /// Set when the requested square hit a scene edge.
    pub clipped: bool,
}

/// Side length in pixels of a square covering `side_m` meters. Even counts
/// grow by one so the center pixel sits in the middle.
pub fn window_pixels(side_m: f64, resolution_m: f64) -> usize {
    let n = (side_m / resolution_m - 1e-9).ceil().max(1.0) as usize;
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// Square crop of every band around the pixel containing `center`.
pub fn crop_window(band_set: &BandSet, center: GeoPoint, side_m: f64) -> Result<Crop> {
    if !(side_m > 0.0 && side_m.is_finite()) {
        return Err(Error::InvalidWindow(side_m));
    }
    let (width, height) = band_set.dims();
    let (row, col) = band_set.geo_to_pixel(center)?;
    let half = window_pixels(side_m, band_set.resolution_m) / 2;

    let row0 = row.saturating_sub(half);
    let col0 = col.saturating_sub(half);
    let row1 = (row + half).min(height - 1);
    let col1 = (col + half).min(width - 1);
    let clipped = row < half || col < half || row + half >= height || col + half >= width;

    let window = PixelWindow {
        row0,
        col0,
        rows: row1 - row0 + 1,
        cols: col1 - col0 + 1,
    };
    let bands = band_set.sub_window(window.row0, window.col0, window.rows, window.cols);

    let any_valid = bands
        .bands
        .iter()
        .filter(|(n, _)| **n != BandName::Pan)
        .any(|(_, r)| r.valid_count() > 0);
    if !any_valid {
        return Err(Error::WindowAllNodata);
    }
    Ok(Crop {
        bands,
        window,
        clipped,
    })
}
