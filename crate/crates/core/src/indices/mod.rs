//! Water-quality enhanced indices for turbidity (`WQEI_T`) and
//! conductivity/salinity (`WQEI_C`), their intermediate terms, a registry
//! of baseline indices, and colour-ramp rendering.
//!
//! All kernels consume reflectance in `[0, 1]`. `B` is the mean of `B1`
//! and `B2`; a pixel is nodata if either is. Every guarded denominator
//! uses [`EPSILON`](crate::EPSILON).

mod baseline;
mod formula;
mod render;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{BandName, BandSet, Raster};
use crate::EPSILON;

pub use baseline::{baseline_index, BaselineRegistry};
pub use formula::Formula;
pub use render::{ramp_color, render_index_map, render_rgb, write_png};

/// Learnable scalars of both indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexCoefficients {
    alpha: f64,
    beta: f64,
    gamma: f64,
    theta: f64,
}

impl IndexCoefficients {
    pub fn new(alpha: f64, beta: f64, gamma: f64, theta: f64) -> Result<Self> {
        if ![alpha, beta, gamma, theta].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidCoefficients("coefficients must be finite".into()));
        }
        if gamma <= 0.0 || theta <= 0.0 {
            return Err(Error::InvalidCoefficients(format!(
                "gamma and theta must be positive (gamma={gamma}, theta={theta})"
            )));
        }
        Ok(IndexCoefficients {
            alpha,
            beta,
            gamma,
            theta,
        })
    }

    /// alpha = 2.74, beta = 4.89, gamma = 1.8, theta = 2.
    pub fn published() -> Self {
        IndexCoefficients {
            alpha: 2.74,
            beta: 4.89,
            gamma: 1.8,
            theta: 2.0,
        }
    }

    /// All ones, the starting point used for index-to-parameter matching.
    pub fn unit() -> Self {
        IndexCoefficients {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            theta: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexKind {
    WqeiT,
    WqeiC,
    Baseline(String),
}

impl IndexKind {
    pub fn label(&self) -> &str {
        match self {
            IndexKind::WqeiT => "WQEI_T",
            IndexKind::WqeiC => "WQEI_C",
            IndexKind::Baseline(name) => name,
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "WQEI_T" => IndexKind::WqeiT,
            "WQEI_C" => IndexKind::WqeiC,
            "" => return Err(Error::invalid("index_kind", "empty")),
            other => IndexKind::Baseline(other.to_string()),
        })
    }
}

/// How the scalar `WQEI_T` denominator aggregates `alpha*G - beta*(R+NIR)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenominatorMode {
    /// Mean over valid pixels; keeps the index independent of image size.
    #[default]
    Mean,
    /// Plain sum over valid pixels.
    Sum,
}

impl FromStr for DenominatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(DenominatorMode::Mean),
            "sum" => Ok(DenominatorMode::Sum),
            other => Err(Error::invalid("wqei_t.denominator", format!("`{other}` is not mean|sum"))),
        }
    }
}

/// Sums that determine the `WQEI_T` denominator for any coefficients:
/// `alpha * mean(G) - beta * mean(R + NIR)` over pixels where G, R and NIR
/// are all valid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenominatorStats {
    pub sum_g: f64,
    pub sum_rn: f64,
    pub count: usize,
}

impl DenominatorStats {
    pub fn from_bands(bands: &BandSet) -> Result<Self> {
        let g = bands.band(BandName::G)?;
        let r = bands.band(BandName::R)?;
        let nir = bands.band(BandName::Nir)?;
        let mut stats = DenominatorStats {
            sum_g: 0.0,
            sum_rn: 0.0,
            count: 0,
        };
        for i in 0..g.len() {
            if let (Some(g), Some(r), Some(n)) = (g.at(i), r.at(i), nir.at(i)) {
                stats.sum_g += g;
                stats.sum_rn += r + n;
                stats.count += 1;
            }
        }
        Ok(stats)
    }

    pub fn mean_g(&self) -> f64 {
        self.sum_g / self.count as f64
    }

    pub fn mean_rn(&self) -> f64 {
        self.sum_rn / self.count as f64
    }

    pub fn denominator(&self, coeffs: &IndexCoefficients, mode: DenominatorMode) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::DegenerateDenominator(0.0));
        }
        let d = match mode {
            DenominatorMode::Mean => coeffs.alpha * self.mean_g() - coeffs.beta * self.mean_rn(),
            DenominatorMode::Sum => coeffs.alpha * self.sum_g - coeffs.beta * self.sum_rn,
        };
        if !d.is_finite() || d.abs() <= EPSILON {
            return Err(Error::DegenerateDenominator(d));
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexResult {
    pub kind: IndexKind,
    pub raster: Raster,
    /// The scalar `WQEI_T` denominator; `None` for other kinds.
    pub denominator: Option<f64>,
    pub clamp_count: usize,
}

/// Scalar per-pixel forms of the index terms.
pub mod pixel {
    use crate::EPSILON;

    #[inline]
    pub fn imp_detected(r: f64, nir: f64, b: f64) -> Option<f64> {
        let s = r + nir;
        if s <= EPSILON {
            return None;
        }
        Some((r - nir) / s - (b.sqrt() + r))
    }

    #[inline]
    pub fn algae_similarity(g: f64, r: f64) -> Option<f64> {
        let s = g + r;
        if s <= EPSILON {
            return None;
        }
        Some((g - r) / s)
    }

    #[inline]
    pub fn amp_sig(r: f64, nir: f64, b: f64, g: f64) -> Option<f64> {
        Some(imp_detected(r, nir, b)? * algae_similarity(g, r)?)
    }

    #[inline]
    pub fn sal_detect(g: f64, b: f64, r: f64, nir: f64, gamma: f64) -> f64 {
        (g + b) - gamma * (r + nir)
    }

    /// Raw (unclamped) `WQEI_C`; `None` for a guarded singularity.
    #[inline]
    pub fn wqei_c_raw(g: f64, b: f64, r: f64, nir: f64, t: f64, gamma: f64, theta: f64) -> Option<f64> {
        if t <= EPSILON {
            return None;
        }
        let sum = nir + r + g + b;
        if sum <= EPSILON {
            return None;
        }
        let v = ((g + b) - (gamma * (r + nir)).powf(theta / t)) / sum;
        v.is_finite().then_some(v)
    }

    /// Clamps to `[-1, 1]`, reporting whether the value moved.
    #[inline]
    pub fn clamp_unit(v: f64) -> (f64, bool) {
        if v > 1.0 {
            (1.0, true)
        } else if v < -1.0 {
            (-1.0, true)
        } else {
            (v, false)
        }
    }
}

/// Borrowed bands of one scene for pixel lookups; `blue` is `mean(B1, B2)`.
struct View<'a> {
    width: usize,
    height: usize,
    b1: Option<&'a Raster>,
    b2: Option<&'a Raster>,
    g: Option<&'a Raster>,
    r: Option<&'a Raster>,
    nir: Option<&'a Raster>,
    t: Option<&'a Raster>,
}

impl<'a> View<'a> {
    fn new(bands: &'a BandSet, required: &[BandName]) -> Result<Self> {
        for &b in required {
            bands.band(b)?;
        }
        let (width, height) = bands.dims();
        Ok(View {
            width,
            height,
            b1: bands.band(BandName::B1).ok(),
            b2: bands.band(BandName::B2).ok(),
            g: bands.band(BandName::G).ok(),
            r: bands.band(BandName::R).ok(),
            nir: bands.band(BandName::Nir).ok(),
            t: bands.band(BandName::T).ok(),
        })
    }

    #[inline]
    fn get(band: Option<&Raster>, i: usize) -> Option<f64> {
        band?.at(i)
    }

    #[inline]
    fn blue(&self, i: usize) -> Option<f64> {
        Some((Self::get(self.b1, i)? + Self::get(self.b2, i)?) / 2.0)
    }

    #[inline]
    fn g(&self, i: usize) -> Option<f64> {
        Self::get(self.g, i)
    }
    #[inline]
    fn r(&self, i: usize) -> Option<f64> {
        Self::get(self.r, i)
    }
    #[inline]
    fn nir(&self, i: usize) -> Option<f64> {
        Self::get(self.nir, i)
    }
    #[inline]
    fn t(&self, i: usize) -> Option<f64> {
        Self::get(self.t, i)
    }

    fn map(&self, f: impl Fn(usize) -> Option<f64>) -> Raster {
        let w = self.width;
        Raster::from_fn(w, self.height, |r, c| f(r * w + c))
    }
}

const TURBIDITY_BANDS: [BandName; 5] = [BandName::R, BandName::G, BandName::Nir, BandName::B1, BandName::B2];
const SALINITY_BANDS: [BandName; 6] = [
    BandName::R,
    BandName::G,
    BandName::Nir,
    BandName::B1,
    BandName::B2,
    BandName::T,
];

/// `(R - NIR) / (R + NIR) - (sqrt(B) + R)`.
pub fn imp_detected(bands: &BandSet) -> Result<Raster> {
    let v = View::new(bands, &[BandName::R, BandName::Nir, BandName::B1, BandName::B2])?;
    Ok(v.map(|i| pixel::imp_detected(v.r(i)?, v.nir(i)?, v.blue(i)?)))
}

/// `(G - R) / (G + R)`.
pub fn algae_similarity(bands: &BandSet) -> Result<Raster> {
    let v = View::new(bands, &[BandName::G, BandName::R])?;
    Ok(v.map(|i| pixel::algae_similarity(v.g(i)?, v.r(i)?)))
}

/// Elementwise product of [`imp_detected`] and [`algae_similarity`].
pub fn amp_sig(bands: &BandSet) -> Result<Raster> {
    let v = View::new(bands, &TURBIDITY_BANDS)?;
    Ok(v.map(|i| pixel::amp_sig(v.r(i)?, v.nir(i)?, v.blue(i)?, v.g(i)?)))
}

/// `(G + B) - gamma * (R + NIR)`.
pub fn sal_detect(bands: &BandSet, gamma: f64) -> Result<Raster> {
    let v = View::new(bands, &TURBIDITY_BANDS)?;
    Ok(v.map(|i| Some(pixel::sal_detect(v.g(i)?, v.blue(i)?, v.r(i)?, v.nir(i)?, gamma))))
}

/// Turbidity index: `amp_sig` over the scalar denominator of the whole
/// input (mean of `alpha*G - beta*(R+NIR)`).
pub fn wqei_t(bands: &BandSet, coeffs: &IndexCoefficients) -> Result<IndexResult> {
    wqei_t_with_mode(bands, coeffs, DenominatorMode::Mean)
}

pub fn wqei_t_with_mode(bands: &BandSet, coeffs: &IndexCoefficients, mode: DenominatorMode) -> Result<IndexResult> {
    let d = DenominatorStats::from_bands(bands)?.denominator(coeffs, mode)?;
    wqei_t_with_denominator(bands, d)
}

/// `WQEI_T` with a denominator computed elsewhere, e.g. over the full scene
/// when `bands` is a pond crop.
pub fn wqei_t_with_denominator(bands: &BandSet, denominator: f64) -> Result<IndexResult> {
    let v = View::new(bands, &TURBIDITY_BANDS)?;
    let (w, h) = bands.dims();
    let raster = wqei_t_region(&v, denominator, 0, 0, h, w);
    Ok(IndexResult {
        kind: IndexKind::WqeiT,
        raster,
        denominator: Some(denominator),
        clamp_count: 0,
    })
}

fn wqei_t_region(v: &View, d: f64, row0: usize, col0: usize, rows: usize, cols: usize) -> Raster {
    let w = v.width;
    Raster::from_fn(cols, rows, |r, c| {
        let i = (row0 + r) * w + col0 + c;
        Some(pixel::amp_sig(v.r(i)?, v.nir(i)?, v.blue(i)?, v.g(i)?)? / d)
    })
}

fn wqei_c_region(v: &View, coeffs: &IndexCoefficients, row0: usize, col0: usize, rows: usize, cols: usize) -> (Raster, usize) {
    let w = v.width;
    let mut clamped = 0;
    let raster = Raster::from_fn(cols, rows, |r, c| {
        let i = (row0 + r) * w + col0 + c;
        let raw = pixel::wqei_c_raw(
            v.g(i)?,
            v.blue(i)?,
            v.r(i)?,
            v.nir(i)?,
            v.t(i)?,
            coeffs.gamma,
            coeffs.theta,
        )?;
        let (out, moved) = pixel::clamp_unit(raw);
        clamped += moved as usize;
        Some(out)
    });
    (raster, clamped)
}

fn check_thermal(bands: &BandSet) -> Result<()> {
    let t = bands.band(BandName::T)?;
    let total = t.len();
    let bad = (0..total).filter(|&i| matches!(t.at(i), Some(v) if v <= EPSILON)).count();
    if 2 * bad > total {
        return Err(Error::ThermalScale { bad, total });
    }
    Ok(())
}

/// Salinity/conductivity index
/// `[(G + B) - (gamma (R + NIR))^(theta / T)] / (NIR + R + G + B)`,
/// clamped to `[-1, 1]`. `T` is thermal in scaled `[0, 1]` units.
pub fn wqei_c(bands: &BandSet, coeffs: &IndexCoefficients) -> Result<IndexResult> {
    let v = View::new(bands, &SALINITY_BANDS)?;
    check_thermal(bands)?;
    let (w, h) = bands.dims();
    let (raster, clamp_count) = wqei_c_region(&v, coeffs, 0, 0, h, w);
    Ok(IndexResult {
        kind: IndexKind::WqeiC,
        raster,
        denominator: None,
        clamp_count,
    })
}

/// Same result as the whole-image kernels, evaluated on `tile` x `tile`
/// blocks in parallel and stitched. The `WQEI_T` denominator is computed
/// over the full image first.
pub fn compute_tiled(
    bands: &BandSet,
    kind: &IndexKind,
    coeffs: &IndexCoefficients,
    tile: usize,
) -> Result<IndexResult> {
    if tile == 0 {
        return Err(Error::invalid("tile", "must be positive"));
    }
    let (w, h) = bands.dims();
    let denominator = match kind {
        IndexKind::WqeiT => Some(DenominatorStats::from_bands(bands)?.denominator(coeffs, DenominatorMode::Mean)?),
        IndexKind::WqeiC => {
            check_thermal(bands)?;
            None
        }
        IndexKind::Baseline(name) => return Err(Error::Unsupported(format!("tiled baseline {name}"))),
    };
    let v = match kind {
        IndexKind::WqeiT => View::new(bands, &TURBIDITY_BANDS)?,
        _ => View::new(bands, &SALINITY_BANDS)?,
    };

    let origins: Vec<(usize, usize)> = (0..h)
        .step_by(tile)
        .flat_map(|r| (0..w).step_by(tile).map(move |c| (r, c)))
        .collect();
    let tiles: Vec<(usize, usize, Raster, usize)> = origins
        .par_iter()
        .map(|&(r0, c0)| {
            let rows = tile.min(h - r0);
            let cols = tile.min(w - c0);
            let (raster, clamped) = match denominator {
                Some(d) => (wqei_t_region(&v, d, r0, c0, rows, cols), 0),
                None => wqei_c_region(&v, coeffs, r0, c0, rows, cols),
            };
            (r0, c0, raster, clamped)
        })
        .collect();

    let mut raster = Raster::all_nodata(w, h);
    let mut clamp_count = 0;
    for (r0, c0, t, clamped) in &tiles {
        raster.paste(t, *r0, *c0);
        clamp_count += clamped;
    }
    Ok(IndexResult {
        kind: kind.clone(),
        raster,
        denominator,
        clamp_count,
    })
}

/// Evaluates `kind` on a window of a scene. `scene` carries the whole-scene
/// sums so `WQEI_T` uses the same denominator it would on the full image.
pub fn evaluate_window(
    window: &BandSet,
    kind: &IndexKind,
    coeffs: &IndexCoefficients,
    scene: &DenominatorStats,
    mode: DenominatorMode,
    baselines: &BaselineRegistry,
) -> Result<IndexResult> {
    match kind {
        IndexKind::WqeiT => wqei_t_with_denominator(window, scene.denominator(coeffs, mode)?),
        IndexKind::WqeiC => wqei_c(window, coeffs),
        IndexKind::Baseline(name) => Ok(IndexResult {
            kind: kind.clone(),
            raster: baselines.evaluate(name, window)?,
            denominator: None,
            clamp_count: 0,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoTransform;
    use chrono::{TimeZone, Utc};
    use std::collections::BTreeMap;

    /// Uniform 2x2 scene; `b` is used for both B1 and B2.
    fn uniform(r: f64, nir: f64, g: f64, b: f64, t: f64) -> BandSet {
        let geo = GeoTransform::new(0.0, 0.0, 15.0, -15.0).unwrap();
        let mut bands = BTreeMap::new();
        for (name, v) in [
            (BandName::R, r),
            (BandName::Nir, nir),
            (BandName::G, g),
            (BandName::B1, b),
            (BandName::B2, b),
            (BandName::T, t),
        ] {
            bands.insert(name, Raster::filled(2, 2, v));
        }
        BandSet::new("u", Utc.timestamp_opt(0, 0).unwrap(), geo, 15.0, bands).unwrap()
    }

    fn first(r: &Raster) -> Option<f64> {
        r.get(0, 0)
    }

    #[test]
    fn imp_detected_examples() {
        let v = first(&imp_detected(&uniform(0.1, 0.1, 0.2, 0.04, 0.5)).unwrap()).unwrap();
        assert!((v + 0.3).abs() < 1e-12);
        let v = first(&imp_detected(&uniform(0.3, 0.1, 0.2, 0.01, 0.5)).unwrap()).unwrap();
        assert!((v - 0.1).abs() < 1e-12);
        assert_eq!(first(&imp_detected(&uniform(0.0, 0.0, 0.2, 0.01, 0.5)).unwrap()), None);
    }

    #[test]
    fn algae_examples() {
        assert_eq!(first(&algae_similarity(&uniform(0.2, 0.1, 0.2, 0.1, 0.5)).unwrap()), Some(0.0));
        let v = first(&algae_similarity(&uniform(0.1, 0.1, 0.3, 0.1, 0.5)).unwrap()).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert_eq!(first(&algae_similarity(&uniform(0.0, 0.1, 0.0, 0.1, 0.5)).unwrap()), None);
    }

    #[test]
    fn amp_sig_examples() {
        // imp = 0.1 (R=0.3, NIR=0.1, B=0.01); algae with G=0.9 gives (0.6/1.2) = 0.5
        let v = first(&amp_sig(&uniform(0.3, 0.1, 0.9, 0.01, 0.5)).unwrap()).unwrap();
        assert!((v - 0.05).abs() < 1e-12);
        assert_eq!(first(&amp_sig(&uniform(0.2, 0.1, 0.2, 0.01, 0.5)).unwrap()), Some(0.0));

        let mut s = uniform(0.3, 0.1, 0.9, 0.01, 0.5).into_bands();
        s.insert(BandName::G, Raster::with_mask(2, 2, vec![0.9; 4], vec![true, false, false, false]).unwrap());
        let geo = GeoTransform::new(0.0, 0.0, 15.0, -15.0).unwrap();
        let s = BandSet::new("m", Utc.timestamp_opt(0, 0).unwrap(), geo, 15.0, s).unwrap();
        let a = amp_sig(&s).unwrap();
        assert_eq!(a.get(0, 0), None);
        assert!(a.get(0, 1).is_some());
    }

    #[test]
    fn wqei_t_published_example() {
        let res = wqei_t(&uniform(0.1, 0.1, 0.3, 0.01, 0.5), &IndexCoefficients::published()).unwrap();
        let d = res.denominator.unwrap();
        assert!((d + 0.156).abs() < 1e-12);
        // imp = -0.2, algae = 0.5, numerator = -0.1
        let expect = -0.1 / -0.156;
        for v in res.raster.valid_values() {
            assert!((v - expect).abs() < 1e-12);
        }
        assert!((expect - 0.641).abs() < 1e-3);
    }

    #[test]
    fn wqei_t_zero_numerator_and_degenerate() {
        let res = wqei_t(&uniform(0.2, 0.1, 0.2, 0.01, 0.5), &IndexCoefficients::published()).unwrap();
        assert!(res.raster.valid_values().all(|v| v == 0.0));
        // alpha*G == beta*(R+NIR) with alpha=beta=1
        let c = IndexCoefficients::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            wqei_t(&uniform(0.1, 0.1, 0.2, 0.01, 0.5), &c),
            Err(Error::DegenerateDenominator(_))
        ));
    }

    #[test]
    fn sum_mode_scales_with_area() {
        let s = uniform(0.1, 0.1, 0.3, 0.01, 0.5);
        let c = IndexCoefficients::published();
        let mean = wqei_t_with_mode(&s, &c, DenominatorMode::Mean).unwrap();
        let sum = wqei_t_with_mode(&s, &c, DenominatorMode::Sum).unwrap();
        let (m, s) = (first(&mean.raster).unwrap(), first(&sum.raster).unwrap());
        assert!((m / s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sal_detect_examples() {
        let v = first(&sal_detect(&uniform(0.1, 0.1, 0.3, 0.1, 0.5), 1.8).unwrap()).unwrap();
        assert!((v - 0.04).abs() < 1e-12);
        let v = first(&sal_detect(&uniform(0.1, 0.1, 0.3, 0.1, 0.5), 0.0).unwrap()).unwrap();
        assert!((v - 0.4).abs() < 1e-12);
        assert_eq!(first(&sal_detect(&uniform(0.0, 0.0, 0.0, 0.0, 0.5), 1.8).unwrap()), Some(0.0));
        let geo = GeoTransform::new(0.0, 0.0, 15.0, -15.0).unwrap();
        let mut only_g = BTreeMap::new();
        only_g.insert(BandName::G, Raster::filled(1, 1, 0.1));
        let s = BandSet::new("x", Utc.timestamp_opt(0, 0).unwrap(), geo, 15.0, only_g).unwrap();
        assert!(matches!(sal_detect(&s, 1.0), Err(Error::MissingBand(_))));
    }

    #[test]
    fn wqei_c_examples() {
        let c = IndexCoefficients::published();
        // gamma (R + NIR) = 1 -> numerator G + B - 1 for any T
        let rn = 1.0 / 1.8;
        for t in [0.2, 0.5, 0.9] {
            let res = wqei_c(&uniform(rn / 2.0, rn / 2.0, 0.3, 0.1, t), &c).unwrap();
            let expect = (0.4 - 1.0) / (rn + 0.4);
            assert!((first(&res.raster).unwrap() - expect).abs() < 1e-12);
        }
        // theta / T = 1
        let res = wqei_c(&uniform(0.1, 0.1, 0.3, 0.1, 2.0), &c).unwrap();
        let v = first(&res.raster).unwrap();
        assert!((v - 0.04 / 0.6).abs() < 1e-12);
        assert!((v - 0.0667).abs() < 1e-4);

        let res = wqei_c(&uniform(0.0, 0.0, 0.0, 0.0, 0.5), &c).unwrap();
        assert_eq!(res.raster.valid_count(), 0);
    }

    #[test]
    fn wqei_c_clamps_and_thermal_guard() {
        let c = IndexCoefficients::new(1.0, 1.0, 3.0, 2.0).unwrap();
        // base = 3 * 0.9 = 2.7, exponent 20 -> far below -1
        let res = wqei_c(&uniform(0.45, 0.45, 0.1, 0.05, 0.1), &c).unwrap();
        assert_eq!(first(&res.raster), Some(-1.0));
        assert_eq!(res.clamp_count, 4);

        assert!(matches!(
            wqei_c(&uniform(0.1, 0.1, 0.3, 0.1, 0.0), &IndexCoefficients::published()),
            Err(Error::ThermalScale { bad: 4, total: 4 })
        ));
    }

    #[test]
    fn coefficient_validation() {
        assert!(IndexCoefficients::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(IndexCoefficients::new(1.0, 1.0, 1.0, -2.0).is_err());
        assert!(IndexCoefficients::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert_eq!("WQEI_T".parse::<IndexKind>().unwrap(), IndexKind::WqeiT);
        assert_eq!("NDVI".parse::<IndexKind>().unwrap(), IndexKind::Baseline("NDVI".into()));
    }
}
