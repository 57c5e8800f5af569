//! Synthetic scenes and pond time series with known ground truth.
//!
//! The spectral response model is deliberately simple. Clear water is bright
//! in blue and dark in NIR; suspended sediment lifts red more than green;
//! dissolved salts brighten every band and cool the surface; warm water
//! reflects less. Every constant lives in [`fixture`] and is a fixture
//! choice that respects those orderings, not a measurement.
//!
//! Lab values are the index response at the generating coefficients,
//! evaluated on the noise-free version of each scene, then mapped to lab
//! units. Calibration therefore has an exact answer to recover.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indices::{self, BaselineRegistry, DenominatorMode, DenominatorStats, IndexCoefficients, IndexKind};
use crate::kv::{format_f64, format_timestamp, KeyValues};
use crate::ponds::{crop_stats, write_lab_csv, LabParameter, LabSample, PondKind, PondRegistry, PondSite};
use crate::preprocess::{brovey_pansharpen, BroveyWeights};
use crate::raster::{crop_window, BandName, BandSet, GeoPoint, GeoTransform, Raster};
use crate::scene_io::{self, SceneMetadata};

/// Fixture constants of the synthetic response model.
pub mod fixture {
    /// Reflectance of one pixel in B1, B2, G, R, NIR order.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Spectrum {
        pub b1: f64,
        pub b2: f64,
        pub g: f64,
        pub r: f64,
        pub nir: f64,
    }

    pub const CLEAR_WATER: Spectrum = Spectrum {
        b1: 0.08,
        b2: 0.07,
        g: 0.06,
        r: 0.03,
        nir: 0.01,
    };

    /// Dry soil: reflectance rising toward NIR.
    pub const SOIL: Spectrum = Spectrum {
        b1: 0.12,
        b2: 0.14,
        g: 0.18,
        r: 0.24,
        nir: 0.32,
    };

    /// Per unit turbidity.
    pub const TURBIDITY_LIFT_R: f64 = 0.3;
    pub const TURBIDITY_LIFT_G: f64 = 0.15;
    pub const TURBIDITY_LIFT_NIR: f64 = 0.1;
    /// Per unit salinity, on every reflective band.
    pub const SALINITY_LIFT: f64 = 0.1;
    /// Per unit salinity, on the thermal band.
    pub const SALINITY_COOLING: f64 = 0.2;
    /// Per unit temperature, on every reflective band.
    pub const TEMPERATURE_DIMMING: f64 = 0.1;

    /// Lab turbidity in NTU per unit of normalized truth.
    pub const NTU_PER_UNIT: f64 = 200.0;
    /// Lab conductivity in uS/cm per unit of normalized truth.
    pub const US_CM_PER_UNIT: f64 = 5000.0;

    /// Native multispectral pixel size; PAN is twice as fine.
    pub const RESOLUTION_M: f64 = 30.0;
    /// Ponds are uniform squares of `2 * POND_HALF_PX + 1` native pixels.
    pub const POND_HALF_PX: usize = 3;
    /// Native pixels between neighbouring pond centers.
    pub const POND_SPACING_PX: usize = 12;
    pub const ORIGIN_X: f64 = 500_000.0;
    pub const ORIGIN_Y: f64 = 4_000_000.0;
    pub const REVISIT_DAYS: i64 = 16;
    /// Lab visits relative to each acquisition, in hours. The first is the
    /// one nearest the scene.
    pub const LAB_OFFSETS_H: [i64; 3] = [24, -72, 96];

    /// Ranges of the random trajectory.
    pub const TURBIDITY_RANGE: (f64, f64) = (0.2, 1.0);
    pub const SALINITY_RANGE: (f64, f64) = (0.1, 0.9);
    pub const TEMPERATURE_RANGE: (f64, f64) = (0.35, 0.9);
}

use fixture::Spectrum;

/// Noise-free water reflectance and scaled thermal value.
pub fn water_pixel(turbidity: f64, salinity: f64, temperature: f64) -> (Spectrum, f64) {
    use fixture::*;
    let shift = SALINITY_LIFT * salinity - TEMPERATURE_DIMMING * temperature;
    let s = Spectrum {
        b1: CLEAR_WATER.b1 + shift,
        b2: CLEAR_WATER.b2 + shift,
        g: CLEAR_WATER.g + TURBIDITY_LIFT_G * turbidity + shift,
        r: CLEAR_WATER.r + TURBIDITY_LIFT_R * turbidity + shift,
        nir: CLEAR_WATER.nir + TURBIDITY_LIFT_NIR * turbidity + shift,
    };
    (s, temperature - SALINITY_COOLING * salinity)
}

/// Ground truth of one scene. Land pixels carry only a temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthMap {
    pub turbidity: Raster,
    pub salinity: Raster,
    pub temperature: Raster,
    pub water_mask: Vec<bool>,
}

impl TruthMap {
    /// All land at one temperature.
    pub fn land(width: usize, height: usize, temperature: f64) -> Self {
        TruthMap {
            turbidity: Raster::filled(width, height, 0.0),
            salinity: Raster::filled(width, height, 0.0),
            temperature: Raster::filled(width, height, temperature),
            water_mask: vec![false; width * height],
        }
    }

    /// All water with uniform properties.
    pub fn water(width: usize, height: usize, turbidity: f64, salinity: f64, temperature: f64) -> Self {
        TruthMap {
            turbidity: Raster::filled(width, height, turbidity),
            salinity: Raster::filled(width, height, salinity),
            temperature: Raster::filled(width, height, temperature),
            water_mask: vec![true; width * height],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.turbidity.dims()
    }

    /// Paints a uniform water square of side `2 * half + 1` centred on
    /// (row, col), clipped to the map.
    pub fn paint_pond(&mut self, row: usize, col: usize, half: usize, point: TruthPoint) {
        let (w, h) = self.dims();
        let (r0, c0) = (row.saturating_sub(half), col.saturating_sub(half));
        let (r1, c1) = ((row + half).min(h - 1), (col + half).min(w - 1));
        let rows = r1 - r0 + 1;
        let cols = c1 - c0 + 1;
        self.turbidity.paste(&Raster::filled(cols, rows, point.turbidity), r0, c0);
        self.salinity.paste(&Raster::filled(cols, rows, point.salinity), r0, c0);
        self.temperature.paste(&Raster::filled(cols, rows, point.temperature), r0, c0);
        for r in r0..=r1 {
            for c in c0..=c1 {
                self.water_mask[r * w + c] = true;
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let dims = self.dims();
        if self.salinity.dims() != dims || self.temperature.dims() != dims || self.water_mask.len() != dims.0 * dims.1
        {
            return Err(Error::SizeMismatch {
                what: "truth map layers".into(),
                expected: dims.0 * dims.1,
                actual: self.water_mask.len(),
            });
        }
        for layer in [&self.turbidity, &self.salinity, &self.temperature] {
            if layer.valid_count() != layer.len() {
                return Err(Error::NonFinite("truth map".into()));
            }
        }
        Ok(())
    }
}

/// Water properties of one pond at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthPoint {
    pub turbidity: f64,
    pub salinity: f64,
    pub temperature: f64,
}

/// Identity and placement of a synthetic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFrame {
    pub scene_id: String,
    pub acquired_at: DateTime<Utc>,
    pub geo: GeoTransform,
}

impl SceneFrame {
    pub fn new(scene_id: impl Into<String>, acquired_at: DateTime<Utc>) -> Self {
        SceneFrame {
            scene_id: scene_id.into(),
            acquired_at,
            geo: default_geo(),
        }
    }
}

fn default_geo() -> GeoTransform {
    GeoTransform::new(fixture::ORIGIN_X, fixture::ORIGIN_Y, fixture::RESOLUTION_M, -fixture::RESOLUTION_M)
        .expect("fixture geotransform")
}

/// Renders a truth map to reflectance. Gaussian noise is added after the
/// physics and before clamping to `[0, 1]`; PAN is the equal-weight sum of
/// B1, B2, G and R replicated onto the 2x grid, with its own noise.
pub fn synth_scene(truth: &TruthMap, frame: &SceneFrame, seed: u64, noise_sigma: f64) -> Result<BandSet> {
    truth.validate()?;
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::invalid("noise_sigma", format!("must be finite and non-negative, got {noise_sigma}")));
    }
    let (w, h) = truth.dims();
    let n = w * h;
    let mut clean: BTreeMap<BandName, Vec<f64>> = BandName::MULTISPECTRAL
        .iter()
        .chain([BandName::T].iter())
        .map(|b| (*b, Vec::with_capacity(n)))
        .collect();
    for i in 0..n {
        let temp = truth.temperature.at(i).unwrap_or(0.0);
        let (s, t) = if truth.water_mask[i] {
            water_pixel(
                truth.turbidity.at(i).unwrap_or(0.0),
                truth.salinity.at(i).unwrap_or(0.0),
                temp,
            )
        } else {
            (fixture::SOIL, temp)
        };
        for (band, v) in [
            (BandName::B1, s.b1),
            (BandName::B2, s.b2),
            (BandName::G, s.g),
            (BandName::R, s.r),
            (BandName::Nir, s.nir),
            (BandName::T, t),
        ] {
            clean.get_mut(&band).expect("band").push(v);
        }
    }

    let pan_weights = BroveyWeights::default();
    let pan_clean: Vec<f64> = (0..4 * n)
        .map(|i| {
            let (r, c) = (i / (2 * w), i % (2 * w));
            let j = (r / 2) * w + c / 2;
            pan_weights.iter().map(|(b, wt)| wt * clean[&b][j]).sum()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if noise_sigma > 0.0 {
        Some(Normal::new(0.0, noise_sigma).map_err(|e| Error::invalid("noise_sigma", e.to_string()))?)
    } else {
        None
    };
    let mut finish = |values: Vec<f64>| -> Vec<f64> {
        values
            .into_iter()
            .map(|v| {
                let v = match &noise {
                    Some(d) => v + d.sample(&mut rng),
                    None => v,
                };
                v.clamp(0.0, 1.0)
            })
            .collect()
    };

    let mut bands = BTreeMap::new();
    for (band, values) in clean {
        bands.insert(band, Raster::new(w, h, finish(values))?);
    }
    bands.insert(BandName::Pan, Raster::new(2 * w, 2 * h, finish(pan_clean))?);
    BandSet::new(frame.scene_id.clone(), frame.acquired_at, frame.geo, fixture::RESOLUTION_M, bands)
}

/// How pond properties evolve across scenes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trajectory {
    /// Independent draws from the fixture ranges for every pond and scene.
    Random,
    /// Turbidity rises linearly from `from` to `to` at fixed salinity and
    /// temperature, identical for every pond.
    TurbidityRamp {
        from: f64,
        to: f64,
        salinity: f64,
        temperature: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub coefficients: IndexCoefficients,
    pub n_scenes: usize,
    pub n_ponds: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    pub trajectory: Trajectory,
    pub start: DateTime<Utc>,
    /// Side of the pond crop used to evaluate the truth response.
    pub crop_side_m: f64,
    pub mode: DenominatorMode,
}

impl SynthOptions {
    pub fn new(coefficients: IndexCoefficients, n_scenes: usize, seed: u64, noise_sigma: f64) -> Self {
        SynthOptions {
            coefficients,
            n_scenes,
            n_ponds: 5,
            seed,
            noise_sigma,
            trajectory: Trajectory::Random,
            start: Utc.with_ymd_and_hms(2020, 1, 6, 17, 0, 0).unwrap(),
            crop_side_m: crate::ponds::CROP_SIDE_M,
            mode: DenominatorMode::Mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub bands: BandSet,
    pub metadata: SceneMetadata,
    /// Pond id to the generating properties.
    pub truth: BTreeMap<String, TruthPoint>,
    /// Pond id to the noise-free `WQEI_T` and `WQEI_C` crop means at the
    /// generating coefficients.
    pub response: BTreeMap<String, (f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub options: SynthOptions,
    pub registry: PondRegistry,
    pub scenes: Vec<SyntheticScene>,
    pub lab: Vec<LabSample>,
}

/// Scene size in native pixels for `n_ponds` laid out on a square grid.
fn layout(n_ponds: usize) -> (usize, Vec<(usize, usize)>) {
    let per_row = (1..).find(|k| k * k >= n_ponds.max(1)).unwrap_or(1);
    let side = per_row * fixture::POND_SPACING_PX + 4;
    let first = 2 + fixture::POND_SPACING_PX / 2;
    let centers = (0..n_ponds)
        .map(|i| (first + (i / per_row) * fixture::POND_SPACING_PX, first + (i % per_row) * fixture::POND_SPACING_PX))
        .collect();
    (side, centers)
}

fn scene_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64 + 1)
}

/// Noise-free response of every pond: crop means of `WQEI_T` and `WQEI_C`
/// after quantization and pan-sharpening, exactly as the pipeline sees them.
fn truth_response(
    clean: &BandSet,
    meta: &SceneMetadata,
    registry: &PondRegistry,
    opts: &SynthOptions,
) -> Result<BTreeMap<String, (f64, f64)>> {
    let stored = scene_io::round_trip(clean, meta)?;
    let sharp = brovey_pansharpen(&stored, &BroveyWeights::default())?;
    let stats = DenominatorStats::from_bands(&sharp)?;
    let none = BaselineRegistry::empty();
    let mut out = BTreeMap::new();
    for site in registry.iter() {
        let crop = crop_window(&sharp, site.center, opts.crop_side_m)?;
        let mut mu = [0.0; 2];
        for (slot, kind) in mu.iter_mut().zip([IndexKind::WqeiT, IndexKind::WqeiC]) {
            let res = indices::evaluate_window(&crop.bands, &kind, &opts.coefficients, &stats, opts.mode, &none)?;
            *slot = crop_stats(&res.raster)?.0;
        }
        out.insert(site.pond_id.clone(), (mu[0], mu[1]));
    }
    Ok(out)
}

/// A drifting pond time series with lab samples derived from the index
/// response at `opts.coefficients`:
///
/// * conductivity = 5000 * ((mu_C + 1) / 2 + noise)
/// * turbidity = 200 * (minmax(mu_T) + noise), min-max over the dataset
///
/// Each scene gets three lab visits per pond, all inside the alignment
/// window. Other lab parameters are independent random draws.
pub fn synth_dataset(opts: &SynthOptions) -> Result<SyntheticDataset> {
    if opts.n_scenes < 2 {
        return Err(Error::invalid("n_scenes", "need at least 2 scenes"));
    }
    if opts.n_ponds == 0 {
        return Err(Error::invalid("n_ponds", "need at least 1 pond"));
    }
    let (side, centers) = layout(opts.n_ponds);
    let geo = default_geo();
    let sites: Vec<PondSite> = centers
        .iter()
        .enumerate()
        .map(|(i, &(r, c))| {
            let kind = [PondKind::Frac, PondKind::Irrigation, PondKind::Playa, PondKind::Other][i % 4];
            // the corner shared by the four PAN pixels at the native center
            let p = geo.pixel_to_geo(r, c);
            PondSite {
                pond_id: format!("P{:02}", i + 1),
                center: GeoPoint::new(p.x, p.y),
                kind,
            }
        })
        .collect();
    let registry = PondRegistry::new(sites)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut plan = Vec::with_capacity(opts.n_scenes);
    for k in 0..opts.n_scenes {
        let land_temp = rng.random_range(fixture::TEMPERATURE_RANGE.0..=fixture::TEMPERATURE_RANGE.1);
        let mut points = BTreeMap::new();
        for site in registry.iter() {
            let point = match opts.trajectory {
                Trajectory::Random => TruthPoint {
                    turbidity: rng.random_range(fixture::TURBIDITY_RANGE.0..=fixture::TURBIDITY_RANGE.1),
                    salinity: rng.random_range(fixture::SALINITY_RANGE.0..=fixture::SALINITY_RANGE.1),
                    temperature: rng.random_range(fixture::TEMPERATURE_RANGE.0..=fixture::TEMPERATURE_RANGE.1),
                },
                Trajectory::TurbidityRamp {
                    from,
                    to,
                    salinity,
                    temperature,
                } => TruthPoint {
                    turbidity: from + (to - from) * k as f64 / (opts.n_scenes - 1) as f64,
                    salinity,
                    temperature,
                },
            };
            points.insert(site.pond_id.clone(), point);
        }
        plan.push((land_temp, points));
    }

    let scenes: Vec<SyntheticScene> = plan
        .into_par_iter()
        .enumerate()
        .map(|(k, (land_temp, points))| {
            let mut truth = TruthMap::land(side, side, land_temp);
            for (site, &(r, c)) in registry.iter().zip(&centers) {
                truth.paint_pond(r, c, fixture::POND_HALF_PX, points[&site.pond_id]);
            }
            let frame = SceneFrame {
                scene_id: format!("SYN{:04}_{:03}", opts.seed % 10_000, k + 1),
                acquired_at: opts.start + Duration::days(fixture::REVISIT_DAYS * k as i64),
                geo,
            };
            let bands_with_pan = BandName::ALL;
            let metadata =
                SceneMetadata::twelve_bit(&frame.scene_id, frame.acquired_at, side, side, geo, bands_with_pan);
            let clean = synth_scene(&truth, &frame, 0, 0.0)?;
            let response = truth_response(&clean, &metadata, &registry, opts)?;
            let bands = if opts.noise_sigma > 0.0 {
                synth_scene(&truth, &frame, scene_seed(opts.seed, k), opts.noise_sigma)?
            } else {
                clean
            };
            Ok(SyntheticScene {
                bands,
                metadata,
                truth: points,
                response,
            })
        })
        .collect::<Result<_>>()?;

    let (t_lo, t_hi) = scenes
        .iter()
        .flat_map(|s| s.response.values().map(|r| r.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let t_span = if t_hi > t_lo { t_hi - t_lo } else { 1.0 };

    let mut lab_rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5EED_1AB5);
    let noise = Normal::new(0.0, opts.noise_sigma.max(0.0)).map_err(|e| Error::invalid("noise_sigma", e.to_string()))?;
    let mut lab = Vec::new();
    for scene in &scenes {
        for site in registry.iter() {
            let (mu_t, mu_c) = scene.response[&site.pond_id];
            let turb = (mu_t - t_lo) / t_span;
            let cond = (mu_c + 1.0) / 2.0;
            for offset in fixture::LAB_OFFSETS_H {
                let mut jitter = || if opts.noise_sigma > 0.0 { noise.sample(&mut lab_rng) } else { 0.0 };
                let (dt, dc) = (jitter(), jitter());
                let sample = LabSample::new(&site.pond_id, scene.bands.acquired_at + Duration::hours(offset))
                    .with(LabParameter::Turbidity, fixture::NTU_PER_UNIT * (turb + dt))
                    .with(LabParameter::Conductivity, fixture::US_CM_PER_UNIT * (cond + dc))
                    .with(LabParameter::Ph, lab_rng.random_range(6.5..8.5))
                    .with(LabParameter::DissolvedOxygen, lab_rng.random_range(4.0..10.0))
                    .with(LabParameter::Temperature, 5.0 + 30.0 * lab_rng.random_range(0.0..1.0))
                    .with(LabParameter::H2s, lab_rng.random_range(0.0..0.5))
                    .with(LabParameter::Depth, lab_rng.random_range(0.5..3.0));
                lab.push(sample);
            }
        }
    }
    lab.sort_by(|a, b| (&a.pond_id, a.sampled_at).cmp(&(&b.pond_id, b.sampled_at)));

    Ok(SyntheticDataset {
        options: opts.clone(),
        registry,
        scenes,
        lab,
    })
}

/// [`synth_dataset`] with default layout and a random trajectory.
pub fn synth_pond_series(
    coeffs: IndexCoefficients,
    n_scenes: usize,
    seed: u64,
    noise_sigma: f64,
) -> Result<SyntheticDataset> {
    synth_dataset(&SynthOptions::new(coeffs, n_scenes, seed, noise_sigma))
}

/// File names inside a written dataset directory.
pub const SCENES_DIR: &str = "scenes";
pub const REGISTRY_FILE: &str = "ponds.csv";
pub const LAB_FILE: &str = "lab.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const CONFIG_FILE: &str = "wqei.conf";

/// Writes scenes, registry, lab CSV, truth table and a pipeline config.
pub fn write_dataset(ds: &SyntheticDataset, dir: &Path) -> Result<()> {
    let scenes_dir = dir.join(SCENES_DIR);
    std::fs::create_dir_all(&scenes_dir).map_err(|e| Error::io(&scenes_dir, e))?;
    for s in &ds.scenes {
        scene_io::save_scene(&s.bands, &s.metadata, &scenes_dir.join(&s.metadata.scene_id))?;
    }
    ds.registry.write(&dir.join(REGISTRY_FILE))?;

    let lab_path = dir.join(LAB_FILE);
    let file = std::fs::File::create(&lab_path).map_err(|e| Error::io(&lab_path, e))?;
    write_lab_csv(file, &ds.lab)?;

    let truth_path = dir.join(TRUTH_FILE);
    let mut w = csv::Writer::from_path(&truth_path)?;
    w.write_record([
        "scene_id",
        "acquired_at",
        "pond_id",
        "turbidity",
        "salinity",
        "temperature",
        "wqei_t_mu",
        "wqei_c_mu",
    ])?;
    for s in &ds.scenes {
        for (pond, p) in &s.truth {
            let (mt, mc) = s.response[pond];
            w.write_record([
                s.metadata.scene_id.clone(),
                format_timestamp(&s.metadata.acquired_at),
                pond.clone(),
                format_f64(p.turbidity),
                format_f64(p.salinity),
                format_f64(p.temperature),
                format_f64(mt),
                format_f64(mc),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&truth_path, e))?;

    let c = &ds.options.coefficients;
    let mut kv = KeyValues::new();
    kv.set("scene_source", SCENES_DIR);
    kv.set("pond_registry", REGISTRY_FILE);
    kv.set("lab_reports", LAB_FILE);
    kv.set("coefficients", "fit");
    kv.set("seed", ds.options.seed);
    kv.set("output", "out");
    kv.set("synth.alpha", format_f64(c.alpha()));
    kv.set("synth.beta", format_f64(c.beta()));
    kv.set("synth.gamma", format_f64(c.gamma()));
    kv.set("synth.theta", format_f64(c.theta()));
    kv.set("synth.noise_sigma", format_f64(ds.options.noise_sigma));
    kv.set("synth.n_scenes", ds.options.n_scenes);
    kv.set("synth.n_ponds", ds.options.n_ponds);
    let conf = dir.join(CONFIG_FILE);
    std::fs::write(&conf, kv.render()).map_err(|e| Error::io(&conf, e))
}

/// Crop means of `kind` for one pond whose properties step through
/// `points`, each in its own noise-free scene of `land_temperature` soil.
pub fn response_sweep(
    points: &[TruthPoint],
    kind: &IndexKind,
    coeffs: &IndexCoefficients,
    land_temperature: f64,
) -> Result<Vec<f64>> {
    let (side, centers) = layout(1);
    let (r, c) = centers[0];
    let geo = default_geo();
    let center = geo.pixel_to_geo(r, c);
    let none = BaselineRegistry::empty();
    points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut truth = TruthMap::land(side, side, land_temperature);
            truth.paint_pond(r, c, fixture::POND_HALF_PX, *p);
            let frame = SceneFrame::new(format!("SWEEP_{k:02}"), Utc.timestamp_opt(0, 0).unwrap());
            let sharp = brovey_pansharpen(&synth_scene(&truth, &frame, 0, 0.0)?, &BroveyWeights::default())?;
            let stats = DenominatorStats::from_bands(&sharp)?;
            let crop = crop_window(&sharp, center, crate::ponds::CROP_SIDE_M)?;
            let res = indices::evaluate_window(&crop.bands, kind, coeffs, &stats, DenominatorMode::Mean, &none)?;
            Ok(crop_stats(&res.raster)?.0)
        })
        .collect()
}
