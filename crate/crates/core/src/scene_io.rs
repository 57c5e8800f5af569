//! On-disk scene directories: a `scene.hdr` key/value header plus one raw
//! little-endian `u16` DN file per band.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};
use crate::kv::{format_f64, format_timestamp, parse_timestamp, KeyValues};
use crate::raster::{BandName, BandSet, GeoTransform, Raster};

pub const HEADER_FILE: &str = "scene.hdr";

/// Fraction of clamped reflective pixels above which a load fails.
const MAX_CLAMPED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct BandScaling {
    pub file: String,
    pub dn_scale: f64,
    pub dn_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneMetadata {
    pub scene_id: String,
    pub acquired_at: DateTime<Utc>,
    pub width: usize,
    pub height: usize,
    pub resolution_m: f64,
    pub geo: GeoTransform,
    pub nodata_dn: u16,
    pub bands: BTreeMap<BandName, BandScaling>,
}

impl SceneMetadata {
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        let scene_id = kv.require("scene_id")?.to_string();
        let acquired_at = parse_timestamp(kv.require("acquired_at")?)?;
        let width: usize = kv.parse_required("width")?;
        let height: usize = kv.parse_required("height")?;
        let resolution_m: f64 = kv.parse_required("resolution_m")?;
        let nodata_dn: u16 = kv.parse_required("nodata_dn")?;

        let gt: Vec<f64> = kv
            .require("geotransform")?
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::invalid("geotransform", "expected six decimals"))?;
        if gt.len() != 6 {
            return Err(Error::invalid("geotransform", "expected six decimals"));
        }
        if gt[2] != 0.0 || gt[4] != 0.0 {
            return Err(Error::Unsupported("rotated geotransform".into()));
        }
        let geo = GeoTransform::new(gt[0], gt[3], gt[1], gt[5])?;

        let mut names = Vec::new();
        for (rest, _) in kv.with_prefix("band.") {
            let (name, _field) = rest
                .split_once('.')
                .ok_or_else(|| Error::invalid(format!("band.{rest}"), "expected band.<NAME>.<field>"))?;
            let band: BandName = name.parse()?;
            if !names.contains(&band) {
                names.push(band);
            }
        }
        let mut bands = BTreeMap::new();
        for band in names {
            let prefix = format!("band.{band}");
            let file = kv.require(&format!("{prefix}.file"))?.to_string();
            let dn_scale: f64 = kv.parse_required(&format!("{prefix}.dn_scale"))?;
            let dn_offset: f64 = kv.parse_required(&format!("{prefix}.dn_offset"))?;
            if !(dn_scale > 0.0 && dn_scale.is_finite()) || !dn_offset.is_finite() {
                return Err(Error::invalid(format!("{prefix}.dn_scale"), "scale must be positive"));
            }
            bands.insert(
                band,
                BandScaling {
                    file,
                    dn_scale,
                    dn_offset,
                },
            );
        }

        Ok(SceneMetadata {
            scene_id,
            acquired_at,
            width,
            height,
            resolution_m,
            geo,
            nodata_dn,
            bands,
        })
    }

    pub fn render(&self) -> String {
        let mut kv = KeyValues::new();
        kv.set("scene_id", &self.scene_id);
        kv.set("acquired_at", format_timestamp(&self.acquired_at));
        kv.set("width", self.width);
        kv.set("height", self.height);
        kv.set("resolution_m", self.resolution_m);
        kv.set(
            "geotransform",
            format!(
                "{} {} 0 {} 0 {}",
                self.geo.origin_x, self.geo.pixel_size_x, self.geo.origin_y, self.geo.pixel_size_y
            ),
        );
        kv.set("nodata_dn", self.nodata_dn);
        for (band, s) in &self.bands {
            kv.set(format!("band.{band}.file"), &s.file);
            kv.set(format!("band.{band}.dn_scale"), format_f64(s.dn_scale));
            kv.set(format!("band.{band}.dn_offset"), format_f64(s.dn_offset));
        }
        kv.render()
    }

    pub fn band_dims(&self, band: BandName) -> (usize, usize) {
        if band == BandName::Pan {
            (2 * self.width, 2 * self.height)
        } else {
            (self.width, self.height)
        }
    }

    /// 12-bit scaling (`DN / 4095`) for every listed band, files named `<band>.bin`.
    pub fn twelve_bit(
        scene_id: impl Into<String>,
        acquired_at: DateTime<Utc>,
        width: usize,
        height: usize,
        geo: GeoTransform,
        bands: impl IntoIterator<Item = BandName>,
    ) -> Self {
        let bands = bands
            .into_iter()
            .map(|b| {
                (
                    b,
                    BandScaling {
                        file: format!("{b}.bin"),
                        dn_scale: 1.0 / 4095.0,
                        dn_offset: 0.0,
                    },
                )
            })
            .collect();
        SceneMetadata {
            scene_id: scene_id.into(),
            acquired_at,
            width,
            height,
            resolution_m: geo.pixel_size_x,
            geo,
            nodata_dn: u16::MAX,
            bands,
        }
    }
}

pub fn read_header(dir: &Path) -> Result<SceneMetadata> {
    let path = dir.join(HEADER_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    SceneMetadata::parse(&text)
}

pub fn read_dn(path: &Path, expected: usize) -> Result<Vec<u16>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 2 != 0 || bytes.len() / 2 != expected {
        return Err(Error::SizeMismatch {
            what: path.display().to_string(),
            expected,
            actual: bytes.len() / 2,
        });
    }
    Ok(bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect())
}

pub fn write_dn(path: &Path, dns: &[u16]) -> Result<()> {
    let bytes: Vec<u8> = dns.iter().flat_map(|d| d.to_le_bytes()).collect();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn dn_to_raster(
    band: BandName,
    dns: &[u16],
    dims: (usize, usize),
    scaling: &BandScaling,
    nodata_dn: u16,
) -> Result<Raster> {
    let mut clamped = 0usize;
    let mut values = Vec::with_capacity(dns.len());
    let mut mask = Vec::with_capacity(dns.len());
    for &dn in dns {
        if dn == nodata_dn {
            values.push(0.0);
            mask.push(true);
            continue;
        }
        let v = dn as f64 * scaling.dn_scale + scaling.dn_offset;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("band {band}")));
        }
        let v = if band.is_reflective() && !(0.0..=1.0).contains(&v) {
            clamped += 1;
            v.clamp(0.0, 1.0)
        } else {
            v
        };
        values.push(v);
        mask.push(false);
    }
    if clamped as f64 > MAX_CLAMPED_FRACTION * dns.len() as f64 {
        return Err(Error::ScaleOutOfRange {
            band: band.to_string(),
            count: clamped,
            total: dns.len(),
        });
    }
    Raster::with_mask(dims.0, dims.1, values, mask)
}

pub fn load_scene(dir: &Path) -> Result<BandSet> {
    load_scene_with_metadata(dir).map(|(_, bands)| bands)
}

pub fn load_scene_with_metadata(dir: &Path) -> Result<(SceneMetadata, BandSet)> {
    let meta = read_header(dir)?;
    let mut bands = BTreeMap::new();
    for (&band, scaling) in &meta.bands {
        let dims = meta.band_dims(band);
        let dns = read_dn(&dir.join(&scaling.file), dims.0 * dims.1)?;
        bands.insert(band, dn_to_raster(band, &dns, dims, scaling, meta.nodata_dn)?);
    }
    let set = BandSet::new(
        meta.scene_id.clone(),
        meta.acquired_at,
        meta.geo,
        meta.resolution_m,
        bands,
    )?;
    Ok((meta, set))
}

fn encode(raster: &Raster, scaling: &BandScaling, nodata_dn: u16) -> Vec<u16> {
    (0..raster.len())
        .map(|i| match raster.at(i) {
            None => nodata_dn,
            Some(v) => {
                let dn = ((v - scaling.dn_offset) / scaling.dn_scale)
                    .round()
                    .clamp(0.0, u16::MAX as f64) as u16;
                if dn != nodata_dn {
                    dn
                } else if dn == u16::MAX {
                    dn - 1
                } else {
                    dn + 1
                }
            }
        })
        .collect()
}

fn encoded_bands(band_set: &BandSet, meta: &SceneMetadata) -> Result<Vec<(BandName, Vec<u16>)>> {
    band_set
        .bands()
        .iter()
        .map(|(&band, raster)| {
            let scaling = meta
                .bands
                .get(&band)
                .ok_or_else(|| Error::MissingBand(band.to_string()))?;
            let dims = meta.band_dims(band);
            if raster.dims() != dims {
                return Err(Error::SizeMismatch {
                    what: format!("band {band}"),
                    expected: dims.0 * dims.1,
                    actual: raster.len(),
                });
            }
            Ok((band, encode(raster, scaling, meta.nodata_dn)))
        })
        .collect()
}

/// Quantizes every band back to DNs with the metadata's scaling and writes
/// the directory. Valid pixels never collide with the nodata sentinel.
pub fn save_scene(band_set: &BandSet, meta: &SceneMetadata, dir: &Path) -> Result<()> {
    let encoded = encoded_bands(band_set, meta)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (band, dns) in encoded {
        write_dn(&dir.join(&meta.bands[&band].file), &dns)?;
    }
    let path = dir.join(HEADER_FILE);
    fs::write(&path, meta.render()).map_err(|e| Error::io(&path, e))
}

/// The band set exactly as `load_scene` would return it after `save_scene`.
pub fn round_trip(band_set: &BandSet, meta: &SceneMetadata) -> Result<BandSet> {
    let mut bands = BTreeMap::new();
    for (band, dns) in encoded_bands(band_set, meta)? {
        let raster = dn_to_raster(band, &dns, meta.band_dims(band), &meta.bands[&band], meta.nodata_dn)?;
        bands.insert(band, raster);
    }
    BandSet::new(
        meta.scene_id.clone(),
        meta.acquired_at,
        meta.geo,
        meta.resolution_m,
        bands,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn header(extra: &str, skip: &str) -> String {
        let lines = [
            "scene_id = LC08_TEST",
            "acquired_at = 2020-05-01T17:00:00Z",
            "width = 4",
            "height = 4",
            "resolution_m = 30",
            "geotransform = 1000 30 0 2000 0 -30",
            "nodata_dn = 0",
        ];
        let mut out: String = lines
            .iter()
            .filter(|l| !l.starts_with(skip) || skip.is_empty())
            .map(|l| format!("{l}\n"))
            .collect();
        for b in ["B1", "B2", "G", "R", "NIR", "T"] {
            out.push_str(&format!(
                "band.{b}.file = {b}.bin\nband.{b}.dn_scale = 0.000244200244200244\nband.{b}.dn_offset = 0\n"
            ));
        }
        out.push_str(extra);
        out
    }

    fn write_fixture(dir: &Path, hdr: &str, dn: u16, count: usize) {
        fs::write(dir.join(HEADER_FILE), hdr).unwrap();
        for b in ["B1", "B2", "G", "R", "NIR", "T"] {
            write_dn(&dir.join(format!("{b}.bin")), &vec![dn; count]).unwrap();
        }
    }

    #[test]
    fn loads_and_scales_twelve_bit() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), &header("", ""), 4095, 16);
        let set = load_scene(dir.path()).unwrap();
        assert_eq!(set.dims(), (4, 4));
        let r = set.band(BandName::R).unwrap();
        for v in r.valid_values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert_eq!(set.geo.origin_x, 1000.0);
        assert_eq!(set.acquired_at, Utc.with_ymd_and_hms(2020, 5, 1, 17, 0, 0).unwrap());
    }

    #[test]
    fn missing_geotransform() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), &header("", "geotransform"), 100, 16);
        match load_scene(dir.path()) {
            Err(Error::MissingHeaderKey(k)) => assert_eq!(k, "geotransform"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), &header("", ""), 100, 16);
        write_dn(&dir.path().join("R.bin"), &[100u16; 17]).unwrap();
        assert!(matches!(load_scene(dir.path()), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn unknown_band() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), &header("band.SWIR.file = s.bin\n", ""), 100, 16);
        assert!(matches!(load_scene(dir.path()), Err(Error::UnknownBand(b)) if b == "SWIR"));
    }

    #[test]
    fn nodata_sentinel_and_scale_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), &header("", ""), 0, 16);
        let set = load_scene(dir.path()).unwrap();
        assert_eq!(set.band(BandName::G).unwrap().valid_count(), 0);

        // DN 5000 with 1/4095 exceeds 1.0 on every pixel
        write_fixture(dir.path(), &header("", ""), 5000, 16);
        assert!(matches!(load_scene(dir.path()), Err(Error::ScaleOutOfRange { .. })));
    }
}
