//! Matching indices to lab parameters by Pearson correlation, and fitting
//! index coefficients by MSE minimization.
//!
//! The fit searches a coarse grid first, then refines one coefficient at a
//! time with golden-section search inside a one-grid-step bracket around the
//! incumbent, cycling over the coefficients until the objective stops
//! improving.

use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indices::{self, BaselineRegistry, DenominatorMode, DenominatorStats, IndexCoefficients, IndexKind};
use crate::kv::{format_f64, KeyValues};
use crate::ponds::{crop_stats, AlignedPair, LabParameter, LabReport};
use crate::raster::BandSet;

/// Fewest aligned pairs accepted by [`fit_coefficients`].
pub const MIN_FIT_PAIRS: usize = 10;

/// Pearson correlation with the population convention, clamped to [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooShort { need: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::ConstantSeries);
    }
    let rho = sxy / (sxx.sqrt() * syy.sqrt());
    if !rho.is_finite() {
        return Err(Error::ConstantSeries);
    }
    Ok(rho.clamp(-1.0, 1.0))
}

pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64)
}

/// Residual MSE after an ordinary least-squares fit `y ~ a + b x`.
/// A constant `x` reduces to the intercept-only fit.
pub fn regression_mse(y: &[f64], x: &[f64]) -> Result<f64> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch(y.len(), x.len()));
    }
    if y.is_empty() {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    let n = y.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let resid = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - my - slope * (a - mx);
            e * e
        })
        .sum::<f64>();
    Ok(resid / n)
}

/// Correlations of each index against each lab parameter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    pub assignment: BTreeMap<IndexKind, LabParameter>,
    /// Pooled correlations.
    pub rho: BTreeMap<(IndexKind, LabParameter), f64>,
    /// Number of pairs behind each pooled correlation.
    pub n_pairs: BTreeMap<(IndexKind, LabParameter), usize>,
    pub per_pond: BTreeMap<(String, IndexKind, LabParameter), f64>,
}

fn column(pairs: &[&AlignedPair], lab: &LabReport, param: LabParameter) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for p in pairs {
        if let Some(v) = lab.normalized(&p.sample, param)? {
            x.push(p.observation.mu);
            y.push(v);
        }
    }
    Ok((x, y))
}

/// Pools aligned pairs across ponds and assigns each index kind the lab
/// parameter with the largest |rho|. Missing lab cells are dropped pairwise;
/// columns that are constant, empty or shorter than two pairs are skipped.
pub fn match_index_to_parameter(pairs: &[AlignedPair], lab: &LabReport) -> Result<MatchResult> {
    let mut by_kind: BTreeMap<&IndexKind, Vec<&AlignedPair>> = BTreeMap::new();
    for p in pairs {
        by_kind.entry(&p.observation.index_kind).or_default().push(p);
    }
    if by_kind.is_empty() {
        return Err(Error::NoUsableColumn("any index".into()));
    }

    let mut out = MatchResult::default();
    for (kind, group) in by_kind {
        let mut best: Option<(LabParameter, f64)> = None;
        for param in LabParameter::ALL {
            let Ok((x, y)) = column(&group, lab, param) else {
                continue;
            };
            let Ok(rho) = pearson(&x, &y) else {
                continue;
            };
            out.rho.insert((kind.clone(), param), rho);
            out.n_pairs.insert((kind.clone(), param), x.len());
            if best.is_none_or(|(_, b)| rho.abs() > b.abs()) {
                best = Some((param, rho));
            }

            let mut ponds: BTreeMap<&str, Vec<&AlignedPair>> = BTreeMap::new();
            for p in &group {
                ponds.entry(&p.observation.pond_id).or_default().push(p);
            }
            for (pond, sub) in ponds {
                if let Ok((px, py)) = column(&sub, lab, param) {
                    if let Ok(r) = pearson(&px, &py) {
                        out.per_pond.insert((pond.to_string(), kind.clone(), param), r);
                    }
                }
            }
        }
        match best {
            Some((param, _)) => {
                out.assignment.insert(kind.clone(), param);
            }
            None => return Err(Error::NoUsableColumn(kind.label().to_string())),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitObjective {
    /// MSE left after regressing the target on the index series, so only
    /// the shape of the series matters, not its scale or offset.
    #[default]
    Regressed,
    /// Plain MSE between the index series and the target.
    Direct,
}

impl FromStr for FitObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regressed" => Ok(FitObjective::Regressed),
            "direct" => Ok(FitObjective::Direct),
            other => Err(Error::invalid("search.objective", format!("`{other}` is not regressed|direct"))),
        }
    }
}

impl FitObjective {
    pub fn as_str(self) -> &'static str {
        match self {
            FitObjective::Regressed => "regressed",
            FitObjective::Direct => "direct",
        }
    }

    pub fn evaluate(self, target: &[f64], series: &[f64]) -> Result<f64> {
        match self {
            FitObjective::Regressed => regression_mse(target, series),
            FitObjective::Direct => mse(target, series),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
}

impl AxisSpec {
    pub fn new(lo: f64, hi: f64, grid_points: usize) -> Self {
        AxisSpec { lo, hi, grid_points }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidSearch(format!("{name}: need lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidSearch(format!("{name}: grid_points must be at least 2")));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.grid_points - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.grid_points)
            .map(|i| if i + 1 == self.grid_points { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpec {
    pub alpha: AxisSpec,
    pub beta: AxisSpec,
    pub gamma: AxisSpec,
    pub theta: AxisSpec,
    pub max_cycles: usize,
    pub tol: f64,
    pub objective: FitObjective,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            alpha: AxisSpec::new(0.0, 10.0, 20),
            beta: AxisSpec::new(0.0, 10.0, 20),
            gamma: AxisSpec::new(0.0, 10.0, 20),
            theta: AxisSpec::new(0.1, 10.0, 20),
            max_cycles: 100,
            tol: 1e-8,
            objective: FitObjective::Regressed,
        }
    }
}

impl SearchSpec {
    pub fn validate(&self) -> Result<()> {
        self.alpha.validate("alpha")?;
        self.beta.validate("beta")?;
        self.gamma.validate("gamma")?;
        self.theta.validate("theta")?;
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidSearch(format!("tol must be finite and non-negative, got {}", self.tol)));
        }
        Ok(())
    }

    /// Reads `search.<coef>.{lo,hi,grid_points}`, `search.max_cycles`,
    /// `search.tol` and `search.objective`, falling back to defaults.
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        let d = SearchSpec::default();
        let axis = |name: &str, def: AxisSpec| -> Result<AxisSpec> {
            Ok(AxisSpec {
                lo: kv.parse_or(&format!("search.{name}.lo"), def.lo)?,
                hi: kv.parse_or(&format!("search.{name}.hi"), def.hi)?,
                grid_points: kv.parse_or(&format!("search.{name}.grid_points"), def.grid_points)?,
            })
        };
        let spec = SearchSpec {
            alpha: axis("alpha", d.alpha)?,
            beta: axis("beta", d.beta)?,
            gamma: axis("gamma", d.gamma)?,
            theta: axis("theta", d.theta)?,
            max_cycles: kv.parse_or("search.max_cycles", d.max_cycles)?,
            tol: kv.parse_or("search.tol", d.tol)?,
            objective: kv.parse_or("search.objective", d.objective)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_config(&self, kv: &mut KeyValues) {
        for (name, a) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma), ("theta", self.theta)] {
            kv.set(format!("search.{name}.lo"), format_f64(a.lo));
            kv.set(format!("search.{name}.hi"), format_f64(a.hi));
            kv.set(format!("search.{name}.grid_points"), a.grid_points);
        }
        kv.set("search.max_cycles", self.max_cycles);
        kv.set("search.tol", format_f64(self.tol));
        kv.set("search.objective", self.objective.as_str());
    }
}

/// One pond crop paired with its normalized lab target.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSample {
    /// Pan-sharpened bands over the pond window.
    pub crop: BandSet,
    /// Whole-scene sums behind the `WQEI_T` denominator.
    pub scene: DenominatorStats,
    pub target: f64,
}

/// Crop mean of `kind` for every sample under `coeffs`.
pub fn index_series(
    samples: &[FitSample],
    kind: &IndexKind,
    coeffs: &IndexCoefficients,
    mode: DenominatorMode,
) -> Result<Vec<f64>> {
    if let IndexKind::Baseline(name) = kind {
        return Err(Error::Unsupported(format!("baseline `{name}` has no coefficients to fit")));
    }
    let none = BaselineRegistry::empty();
    samples
        .iter()
        .map(|s| {
            let res = indices::evaluate_window(&s.crop, kind, coeffs, &s.scene, mode, &none)?;
            Ok(crop_stats(&res.raster)?.0)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub coefficients: IndexCoefficients,
    pub mse: f64,
    /// Best objective value on the coarse grid.
    pub grid_mse: f64,
    pub cycles: usize,
    pub evaluations: usize,
}

struct Problem<'a> {
    samples: &'a [FitSample],
    targets: Vec<f64>,
    kind: &'a IndexKind,
    base: IndexCoefficients,
    mode: DenominatorMode,
    objective: FitObjective,
}

impl Problem<'_> {
    fn coeffs(&self, p: [f64; 2]) -> Result<IndexCoefficients> {
        let b = &self.base;
        match self.kind {
            IndexKind::WqeiT => IndexCoefficients::new(p[0], p[1], b.gamma(), b.theta()),
            _ => IndexCoefficients::new(b.alpha(), b.beta(), p[0], p[1]),
        }
    }

    /// Objective value, or +inf for candidates that cannot be evaluated.
    fn eval(&self, p: [f64; 2]) -> f64 {
        self.coeffs(p)
            .and_then(|c| index_series(self.samples, self.kind, &c, self.mode))
            .and_then(|series| {
                if series.iter().all(|v| v.is_finite()) {
                    self.objective.evaluate(&self.targets, &series)
                } else {
                    Ok(f64::INFINITY)
                }
            })
            .ok()
            .filter(|v| v.is_finite())
            .unwrap_or(f64::INFINITY)
    }
}

fn better(a: (f64, [f64; 2]), b: (f64, [f64; 2])) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => (a.1[0], a.1[1]).partial_cmp(&(b.1[0], b.1[1])) == Some(std::cmp::Ordering::Less),
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `f` over [lo, hi]. Returns the best point
/// seen, including `x0` with value `f0`.
fn golden(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, x0: f64, f0: f64, evals: &mut usize) -> (f64, f64) {
    let mut best = (x0, f0);
    let take = |x: f64, fx: f64, best: &mut (f64, f64)| {
        if fx < best.1 {
            *best = (x, fx);
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    *evals += 2;
    take(c, fc, &mut best);
    take(d, fd, &mut best);
    let stop = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
    for _ in 0..200 {
        if (b - a).abs() <= stop {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            take(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            take(d, fd, &mut best);
        }
        *evals += 1;
    }
    best
}

/// Fits the two coefficients of `kind` (alpha, beta for `WQEI_T`; gamma,
/// theta for `WQEI_C`) holding the other two at `base`.
pub fn fit_coefficients(
    samples: &[FitSample],
    kind: &IndexKind,
    base: &IndexCoefficients,
    mode: DenominatorMode,
    spec: &SearchSpec,
) -> Result<FitOutcome> {
    spec.validate()?;
    if samples.len() < MIN_FIT_PAIRS {
        return Err(Error::TooFewPairs {
            need: MIN_FIT_PAIRS,
            got: samples.len(),
        });
    }
    let axes = match kind {
        IndexKind::WqeiT => [spec.alpha, spec.beta],
        IndexKind::WqeiC => [spec.gamma, spec.theta],
        IndexKind::Baseline(name) => {
            return Err(Error::Unsupported(format!("baseline `{name}` has no coefficients to fit")))
        }
    };
    let problem = Problem {
        samples,
        targets: samples.iter().map(|s| s.target).collect(),
        kind,
        base: *base,
        mode,
        objective: spec.objective,
    };

    let (g0, g1) = (axes[0].grid(), axes[1].grid());
    let candidates: Vec<[f64; 2]> = g0.iter().flat_map(|&a| g1.iter().map(move |&b| [a, b])).collect();
    let values: Vec<f64> = candidates.par_iter().map(|p| problem.eval(*p)).collect();
    let mut evaluations = candidates.len();

    let mut best = (f64::INFINITY, [f64::NAN; 2]);
    for (v, p) in values.iter().zip(&candidates) {
        if v.is_finite() && (!best.0.is_finite() || better((*v, *p), best)) {
            best = (*v, *p);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NoFiniteCandidate);
    }
    let grid_mse = best.0;

    let mut cycles = 0;
    while cycles < spec.max_cycles {
        cycles += 1;
        let before = best.0;
        for axis in 0..2 {
            let spec_axis = axes[axis];
            let step = spec_axis.step();
            let x0 = best.1[axis];
            let lo = (x0 - step).max(spec_axis.lo);
            let hi = (x0 + step).min(spec_axis.hi);
            let point = best.1;
            let f = |x: f64| {
                let mut p = point;
                p[axis] = x;
                problem.eval(p)
            };
            let (x, fx) = golden(&f, lo, hi, x0, best.0, &mut evaluations);
            if fx < best.0 {
                best.1[axis] = x;
                best.0 = fx;
            }
        }
        if before - best.0 < spec.tol {
            break;
        }
    }

    Ok(FitOutcome {
        coefficients: problem.coeffs(best.1)?,
        mse: best.0,
        grid_mse,
        cycles,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub matching: MatchResult,
    pub fitted: IndexCoefficients,
    /// Objective value per fitted index kind.
    pub mse: BTreeMap<IndexKind, f64>,
    pub n_pairs: usize,
    /// Whether the coefficients came from fitting or from the config.
    pub mode: String,
}

impl CalibrationResult {
    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("coefficients.mode", &self.mode);
        kv.set("coefficients.alpha", format_f64(self.fitted.alpha()));
        kv.set("coefficients.beta", format_f64(self.fitted.beta()));
        kv.set("coefficients.gamma", format_f64(self.fitted.gamma()));
        kv.set("coefficients.theta", format_f64(self.fitted.theta()));
        kv.set("n_pairs", self.n_pairs);
        for (kind, param) in &self.matching.assignment {
            kv.set(format!("assignment.{}", kind.label()), param.name());
        }
        for ((kind, param), rho) in &self.matching.rho {
            kv.set(format!("rho.{}.{}", kind.label(), param.name()), format_f64(*rho));
        }
        for (kind, v) in &self.mse {
            kv.set(format!("mse.{}", kind.label()), format_f64(*v));
        }
        kv
    }

    /// Reads back the fitted coefficients written by [`Self::to_kv`].
    pub fn coefficients_from_kv(kv: &KeyValues) -> Result<IndexCoefficients> {
        IndexCoefficients::new(
            kv.parse_required("coefficients.alpha")?,
            kv.parse_required("coefficients.beta")?,
            kv.parse_required("coefficients.gamma")?,
            kv.parse_required("coefficients.theta")?,
        )
    }

    /// Assignment per index kind read back from a calibration file.
    pub fn assignment_from_kv(kv: &KeyValues) -> Result<BTreeMap<IndexKind, LabParameter>> {
        kv.with_prefix("assignment.")
            .map(|(k, v)| Ok((k.parse()?, v.parse()?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ponds::{LabSample, PondObservation};
    use crate::raster::Raster;
    use chrono::{Duration, TimeZone, Utc};

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::LengthMismatch(2, 1))));
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ConstantSeries)));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(Error::TooShort { .. })));
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 2.0], &[2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(mse(&[0.0], &[3.0]).unwrap(), 9.0);
        assert!(mse(&[], &[]).is_err());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn regression_mse_ignores_affine_scale() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        assert!(regression_mse(&y, &x).unwrap() < 1e-28);
        let flat = regression_mse(&[0.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(flat, 0.25);
    }

    fn pair(pond: &str, d: i64, mu: f64, lab: LabSample) -> AlignedPair {
        let t = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap() + Duration::days(d);
        let mut o = PondObservation::from_crop(pond, "s", t, IndexKind::WqeiT, Raster::filled(1, 1, mu), false).unwrap();
        o.mu = mu;
        AlignedPair {
            observation: o,
            sample: lab,
            gap_days: 0.0,
        }
    }

    #[test]
    fn matching_picks_largest_magnitude() {
        let t0 = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
        let mus = [0.1, 0.4, 0.2, 0.9, 0.5];
        let mut samples = Vec::new();
        let mut pairs = Vec::new();
        for (i, mu) in mus.iter().enumerate() {
            let s = LabSample::new("P", t0 + Duration::days(i as i64))
                .with(LabParameter::Turbidity, 100.0 - 50.0 * mu)
                .with(LabParameter::Ph, [7.0, 7.4, 7.1, 7.0, 7.3][i]);
            samples.push(s.clone());
            pairs.push(pair("P", i as i64, *mu, s));
        }
        let lab = LabReport::new(samples).unwrap();
        let m = match_index_to_parameter(&pairs, &lab).unwrap();
        assert_eq!(m.assignment[&IndexKind::WqeiT], LabParameter::Turbidity);
        assert!((m.rho[&(IndexKind::WqeiT, LabParameter::Turbidity)] + 1.0).abs() < 1e-12);
        assert!(m.per_pond.contains_key(&("P".to_string(), IndexKind::WqeiT, LabParameter::Turbidity)));
    }

    #[test]
    fn matching_without_usable_columns() {
        let t0 = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
        let samples: Vec<_> =
            (0..3).map(|i| LabSample::new("P", t0 + Duration::days(i)).with(LabParameter::Ph, 7.0)).collect();
        let pairs: Vec<_> = samples.iter().enumerate().map(|(i, s)| pair("P", i as i64, i as f64, s.clone())).collect();
        let lab = LabReport::new(samples).unwrap();
        assert!(matches!(match_index_to_parameter(&pairs, &lab), Err(Error::NoUsableColumn(_))));
    }

    #[test]
    fn search_spec_validation() {
        let mut spec = SearchSpec::default();
        assert!(spec.validate().is_ok());
        assert_eq!(spec.theta.grid().len(), 20);
        assert_eq!(*spec.alpha.grid().last().unwrap(), 10.0);
        spec.gamma.lo = 5.0;
        spec.gamma.hi = 5.0;
        assert!(matches!(spec.validate(), Err(Error::InvalidSearch(_))));
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let mut n = 0;
        let f = |x: f64| (x - 1.3) * (x - 1.3);
        let (x, fx) = golden(&f, 0.0, 2.0, 0.0, f(0.0), &mut n);
        assert!((x - 1.3).abs() < 1e-6, "{x}");
        assert!(fx < 1e-12);
    }
}
