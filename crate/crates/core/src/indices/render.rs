use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kv::{format_f64, KeyValues};
use crate::raster::Raster;

use super::IndexResult;

/// Linear blue (-1) to white (0) to red (+1); values outside [-1, 1] saturate.
pub fn ramp_color(v: f64) -> [u8; 3] {
    let v = v.clamp(-1.0, 1.0);
    let fade = |t: f64| (255.0 * (1.0 - t)).round() as u8;
    if v < 0.0 {
        let c = fade(-v);
        [c, c, 255]
    } else {
        let c = fade(v);
        [255, c, c]
    }
}

/// Row-major RGB8 buffer; nodata is black.
pub fn render_rgb(raster: &Raster) -> Vec<u8> {
    let mut out = Vec::with_capacity(raster.len() * 3);
    for idx in 0..raster.len() {
        match raster.at(idx) {
            Some(v) => out.extend_from_slice(&ramp_color(v)),
            None => out.extend_from_slice(&[0, 0, 0]),
        }
    }
    out
}

pub fn write_png(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|e| Error::Png(e.to_string()))?;
    writer.write_image_data(rgb).map_err(|e| Error::Png(e.to_string()))?;
    writer.finish().map_err(|e| Error::Png(e.to_string()))
}

/// Writes the PNG and a `<path>.legend.txt` sidecar; returns the sidecar path.
pub fn render_index_map(result: &IndexResult, path: &Path) -> Result<PathBuf> {
    let raster = &result.raster;
    write_png(path, raster.width(), raster.height(), &render_rgb(raster))?;

    let valid: Vec<f64> = raster.valid_values().collect();
    let fmt_opt = |v: Option<f64>| v.map(format_f64).unwrap_or_else(|| "nan".to_string());
    let min = valid.iter().copied().reduce(f64::min);
    let max = valid.iter().copied().reduce(f64::max);

    let mut kv = KeyValues::new();
    kv.set("index", result.kind.label());
    kv.set("ramp", "blue(-1) white(0) red(+1); nodata black");
    kv.set("min", fmt_opt(min));
    kv.set("max", fmt_opt(max));
    kv.set("clamp_count", result.clamp_count.to_string());
    kv.set("valid_pixels", valid.len().to_string());
    kv.set("nodata_pixels", (raster.len() - valid.len()).to_string());

    let mut legend = path.as_os_str().to_owned();
    legend.push(".legend.txt");
    let legend = PathBuf::from(legend);
    std::fs::write(&legend, kv.render()).map_err(|e| Error::io(&legend, e))?;
    Ok(legend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::IndexKind;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp_color(-1.0), [0, 0, 255]);
        assert_eq!(ramp_color(0.0), [255, 255, 255]);
        assert_eq!(ramp_color(1.0), [255, 0, 0]);
        assert_eq!(ramp_color(7.0), [255, 0, 0]);
        assert_eq!(ramp_color(-0.5), [128, 128, 255]);
    }

    #[test]
    fn two_by_two_lookup() {
        let r = Raster::new(2, 2, vec![-1.0, 0.0, 0.0, 1.0]).unwrap();
        let rgb = render_rgb(&r);
        assert_eq!(rgb, vec![0, 0, 255, 255, 255, 255, 255, 255, 255, 255, 0, 0]);
    }

    #[test]
    fn png_round_trip_and_legend() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let raster = Raster::from_fn(3, 2, |r, c| if r == 1 && c == 2 { None } else { Some(0.0) });
        let res = IndexResult {
            kind: IndexKind::WqeiC,
            raster,
            denominator: None,
            clamp_count: 4,
        };
        let legend = render_index_map(&res, &path).unwrap();

        let decoder = png::Decoder::new(std::io::BufReader::new(File::open(&path).unwrap()));
        let mut reader = decoder.read_info().unwrap();
        let mut buf = vec![0; reader.output_buffer_size().unwrap()];
        let info = reader.next_frame(&mut buf).unwrap();
        assert_eq!((info.width, info.height), (3, 2));
        assert_eq!(&buf[..3], &[255, 255, 255]);
        assert_eq!(&buf[15..18], &[0, 0, 0]);

        let kv = KeyValues::parse(&std::fs::read_to_string(legend).unwrap()).unwrap();
        assert_eq!(kv.get("clamp_count"), Some("4"));
        assert_eq!(kv.get("nodata_pixels"), Some("1"));
    }

    #[test]
    fn unwritable_path() {
        let res = IndexResult {
            kind: IndexKind::WqeiT,
            raster: Raster::filled(1, 1, 0.0),
            denominator: Some(1.0),
            clamp_count: 0,
        };
        assert!(render_index_map(&res, Path::new("/nonexistent/dir/x.png")).is_err());
    }
}
