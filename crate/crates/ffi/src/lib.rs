//! C interface to `wqei-core`.
//!
//! Scenes and rasters cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function. Every fallible call returns
//! a [`WqeiStatus`]; on failure, [`wqei_last_error`] describes what went
//! wrong on the calling thread. Nodata pixels are exported as NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wqei_core::calibrate;
use wqei_core::error::Error;
use wqei_core::indices::{self, IndexCoefficients};
use wqei_core::preprocess::{brovey_pansharpen, BroveyWeights};
use wqei_core::raster::{BandSet, Raster};
use wqei_core::scene_io;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WqeiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    InvalidData = 4,
    Computation = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// The four index coefficients.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WqeiCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
}

/// A loaded scene. Opaque to C.
pub struct WqeiScene {
    bands: BandSet,
}

/// A computed index raster. Opaque to C.
pub struct WqeiRaster {
    raster: Raster,
    clamp_count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NUL bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WqeiStatus {
    match e {
        Error::Io { .. } => WqeiStatus::Io,
        Error::InvalidValue { .. } | Error::InvalidCoefficients(_) | Error::InvalidWeights(_) => {
            WqeiStatus::InvalidArgument
        }
        Error::DegenerateDenominator(_)
        | Error::ThermalScale { .. }
        | Error::LengthMismatch(..)
        | Error::TooShort { .. }
        | Error::ConstantSeries
        | Error::NonFinite(_) => WqeiStatus::Computation,
        _ => WqeiStatus::InvalidData,
    }
}

fn fail(status: WqeiStatus, message: impl Into<String>) -> WqeiStatus {
    set_error(message.into());
    status
}

/// Runs `f`, recording its error and turning panics into [`WqeiStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), WqeiStatus>) -> WqeiStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WqeiStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(WqeiStatus::Panic, "internal panic"),
    }
}

fn core_err(e: Error) -> WqeiStatus {
    let status = status_of(&e);
    fail(status, e.to_string())
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), WqeiStatus> {
    if p.is_null() {
        Err(fail(WqeiStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// Slice view of a caller buffer; `len` of zero accepts a null pointer.
unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], WqeiStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

fn coefficients(c: &WqeiCoefficients) -> Result<IndexCoefficients, WqeiStatus> {
    IndexCoefficients::new(c.alpha, c.beta, c.gamma, c.theta).map_err(core_err)
}

/// Message for the last failed call on this thread, or null when the last
/// call succeeded. Valid until the next call into this library.
#[no_mangle]
pub extern "C" fn wqei_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wqei_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Published coefficient values.
#[no_mangle]
pub extern "C" fn wqei_coefficients_published() -> WqeiCoefficients {
    let c = IndexCoefficients::published();
    WqeiCoefficients {
        alpha: c.alpha(),
        beta: c.beta(),
        gamma: c.gamma(),
        theta: c.theta(),
    }
}

/// Loads the scene directory at `path` into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wqei_scene_load(path: *const c_char, out: *mut *mut WqeiScene) -> WqeiStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(WqeiStatus::InvalidArgument, "path is not valid UTF-8"))?;
        let bands = scene_io::load_scene(Path::new(path)).map_err(core_err)?;
        *out = Box::into_raw(Box::new(WqeiScene { bands }));
        Ok(())
    })
}

/// Pan-sharpens `scene` with equal Brovey weights into a new scene.
///
/// # Safety
/// `scene` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn wqei_scene_pansharpen(scene: *const WqeiScene, out: *mut *mut WqeiScene) -> WqeiStatus {
    guard(|| {
        non_null(scene, "scene")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let bands = brovey_pansharpen(&(*scene).bands, &BroveyWeights::default()).map_err(core_err)?;
        *out = Box::into_raw(Box::new(WqeiScene { bands }));
        Ok(())
    })
}

/// Grid size of the multispectral bands.
///
/// # Safety
/// `scene` must come from this library; `width` and `height` be writable.
#[no_mangle]
pub unsafe extern "C" fn wqei_scene_dims(scene: *const WqeiScene, width: *mut usize, height: *mut usize) -> WqeiStatus {
    guard(|| {
        non_null(scene, "scene")?;
        non_null(width, "width")?;
        non_null(height, "height")?;
        let (w, h) = (*scene).bands.dims();
        *width = w;
        *height = h;
        Ok(())
    })
}

/// Releases a scene. Null is ignored.
///
/// # Safety
/// `scene` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wqei_scene_free(scene: *mut WqeiScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// `WQEI_T` over the whole scene, with the denominator taken from the scene.
///
/// # Safety
/// `scene` must come from this library, `coeffs` be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wqei_compute_t(
    scene: *const WqeiScene,
    coeffs: *const WqeiCoefficients,
    out: *mut *mut WqeiRaster,
) -> WqeiStatus {
    guard(|| {
        non_null(scene, "scene")?;
        non_null(coeffs, "coeffs")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let res = indices::wqei_t(&(*scene).bands, &coefficients(&*coeffs)?).map_err(core_err)?;
        *out = Box::into_raw(Box::new(WqeiRaster {
            raster: res.raster,
            clamp_count: res.clamp_count,
        }));
        Ok(())
    })
}

/// `WQEI_C` over the whole scene, clamped to [-1, 1].
///
/// # Safety
/// `scene` must come from this library, `coeffs` be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wqei_compute_c(
    scene: *const WqeiScene,
    coeffs: *const WqeiCoefficients,
    out: *mut *mut WqeiRaster,
) -> WqeiStatus {
    guard(|| {
        non_null(scene, "scene")?;
        non_null(coeffs, "coeffs")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let res = indices::wqei_c(&(*scene).bands, &coefficients(&*coeffs)?).map_err(core_err)?;
        *out = Box::into_raw(Box::new(WqeiRaster {
            raster: res.raster,
            clamp_count: res.clamp_count,
        }));
        Ok(())
    })
}

/// Raster size and the number of pixels moved by clamping.
///
/// # Safety
/// `raster` must come from this library; each out pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn wqei_raster_info(
    raster: *const WqeiRaster,
    width: *mut usize,
    height: *mut usize,
    clamp_count: *mut usize,
) -> WqeiStatus {
    guard(|| {
        non_null(raster, "raster")?;
        let r = &*raster;
        let (w, h) = r.raster.dims();
        for (p, v) in [(width, w), (height, h), (clamp_count, r.clamp_count)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Copies the row-major pixels into `buf`, nodata as NaN. `len` must be at
/// least width * height.
///
/// # Safety
/// `raster` must come from this library and `buf` hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn wqei_raster_copy(raster: *const WqeiRaster, buf: *mut f64, len: usize) -> WqeiStatus {
    guard(|| {
        non_null(raster, "raster")?;
        let r = &(*raster).raster;
        if len < r.len() {
            return Err(fail(
                WqeiStatus::BufferTooSmall,
                format!("buffer holds {len} values, raster has {}", r.len()),
            ));
        }
        non_null(buf, "buf")?;
        let dst = std::slice::from_raw_parts_mut(buf, r.len());
        for (i, d) in dst.iter_mut().enumerate() {
            *d = r.at(i).unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Releases a raster. Null is ignored.
///
/// # Safety
/// `raster` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wqei_raster_free(raster: *mut WqeiRaster) {
    if !raster.is_null() {
        drop(Box::from_raw(raster));
    }
}

/// Pearson correlation of two series of length `n`.
///
/// # Safety
/// `x` and `y` must hold `n` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn wqei_pearson(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> WqeiStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = calibrate::pearson(slice(x, n, "x")?, slice(y, n, "y")?).map_err(core_err)?;
        Ok(())
    })
}

/// Mean squared error between `y` and `yhat`, both of length `n`.
///
/// # Safety
/// `y` and `yhat` must hold `n` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn wqei_mse(y: *const f64, yhat: *const f64, n: usize, out: *mut f64) -> WqeiStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = calibrate::mse(slice(y, n, "y")?, slice(yhat, n, "yhat")?).map_err(core_err)?;
        Ok(())
    })
}
