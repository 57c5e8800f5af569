use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use wqei_core::indices::{self, IndexCoefficients};
use wqei_core::scene_io;
use wqei_core::synth::{synth_dataset, write_dataset, SynthOptions};
use wqei_ffi::*;

fn scene_dir(tmp: &Path) -> PathBuf {
    let mut opts = SynthOptions::new(IndexCoefficients::published(), 2, 11, 0.01);
    opts.n_ponds = 2;
    let ds = synth_dataset(&opts).unwrap();
    write_dataset(&ds, tmp).unwrap();
    tmp.join("scenes").join(&ds.scenes[0].bands.scene_id)
}

fn last_error() -> String {
    let p = wqei_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn load(path: &Path) -> *mut WqeiScene {
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut scene = ptr::null_mut();
    assert_eq!(wqei_scene_load(c.as_ptr(), &mut scene), WqeiStatus::Ok);
    scene
}

unsafe fn values(raster: *const WqeiRaster) -> Vec<f64> {
    let (mut w, mut h) = (0, 0);
    assert_eq!(wqei_raster_info(raster, &mut w, &mut h, ptr::null_mut()), WqeiStatus::Ok);
    let mut buf = vec![0.0; w * h];
    assert_eq!(wqei_raster_copy(raster, buf.as_mut_ptr(), buf.len()), WqeiStatus::Ok);
    buf
}

#[test]
fn indices_match_the_library() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = scene_dir(tmp.path());
    let bands = scene_io::load_scene(&dir).unwrap();
    let published = IndexCoefficients::published();
    unsafe {
        let scene = load(&dir);
        let (mut w, mut h) = (0, 0);
        assert_eq!(wqei_scene_dims(scene, &mut w, &mut h), WqeiStatus::Ok);
        assert_eq!((w, h), bands.dims());

        let coeffs = wqei_coefficients_published();
        assert_eq!(coeffs.gamma, published.gamma());

        let mut t = ptr::null_mut();
        assert_eq!(wqei_compute_t(scene, &coeffs, &mut t), WqeiStatus::Ok);
        let expected = indices::wqei_t(&bands, &published).unwrap().raster;
        let got = values(t);
        for (i, v) in got.iter().enumerate() {
            match expected.at(i) {
                Some(e) => assert_eq!(v.to_bits(), e.to_bits()),
                None => assert!(v.is_nan()),
            }
        }

        let mut c = ptr::null_mut();
        assert_eq!(wqei_compute_c(scene, &coeffs, &mut c), WqeiStatus::Ok);
        let expected = indices::wqei_c(&bands, &published).unwrap();
        let mut clamped = usize::MAX;
        assert_eq!(wqei_raster_info(c, ptr::null_mut(), ptr::null_mut(), &mut clamped), WqeiStatus::Ok);
        assert_eq!(clamped, expected.clamp_count);
        assert!(values(c).iter().filter(|v| !v.is_nan()).all(|v| (-1.0..=1.0).contains(v)));

        let mut sharp = ptr::null_mut();
        assert_eq!(wqei_scene_pansharpen(scene, &mut sharp), WqeiStatus::Ok);
        let (mut sw, mut sh) = (0, 0);
        assert_eq!(wqei_scene_dims(sharp, &mut sw, &mut sh), WqeiStatus::Ok);
        assert_eq!((sw, sh), (2 * w, 2 * h));

        wqei_raster_free(t);
        wqei_raster_free(c);
        wqei_scene_free(sharp);
        wqei_scene_free(scene);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut scene = ptr::null_mut();
        assert_eq!(wqei_scene_load(ptr::null(), &mut scene), WqeiStatus::NullPointer);
        assert!(last_error().contains("path"));

        let missing = CString::new("/nonexistent/scene").unwrap();
        assert_eq!(wqei_scene_load(missing.as_ptr(), &mut scene), WqeiStatus::Io);
        assert!(scene.is_null());
        assert!(!last_error().is_empty());

        let tmp = tempfile::tempdir().unwrap();
        let s = load(&scene_dir(tmp.path()));
        assert!(wqei_last_error().is_null());
        let bad = WqeiCoefficients { alpha: f64::NAN, beta: 1.0, gamma: 1.0, theta: 1.0 };
        let mut r = ptr::null_mut();
        assert_eq!(wqei_compute_t(s, &bad, &mut r), WqeiStatus::InvalidArgument);
        assert!(r.is_null());

        let coeffs = wqei_coefficients_published();
        assert_eq!(wqei_compute_t(s, &coeffs, &mut r), WqeiStatus::Ok);
        let mut small = [0.0; 3];
        assert_eq!(wqei_raster_copy(r, small.as_mut_ptr(), small.len()), WqeiStatus::BufferTooSmall);
        wqei_raster_free(r);
        wqei_scene_free(s);

        wqei_scene_free(ptr::null_mut());
        wqei_raster_free(ptr::null_mut());
    }
}

#[test]
fn statistics_agree_with_hand_values() {
    let x = [1.0, 2.0, 3.0, 4.0];
    let y = [2.0, 4.0, 6.0, 8.5];
    let mut out = 0.0;
    unsafe {
        assert_eq!(wqei_mse(x.as_ptr(), y.as_ptr(), 4, &mut out), WqeiStatus::Ok);
        assert!((out - (1.0 + 4.0 + 9.0 + 20.25) / 4.0).abs() < 1e-12);

        assert_eq!(wqei_pearson(x.as_ptr(), x.as_ptr(), 4, &mut out), WqeiStatus::Ok);
        assert!((out - 1.0).abs() < 1e-12);

        let flat = [1.0; 4];
        assert_eq!(wqei_pearson(x.as_ptr(), flat.as_ptr(), 4, &mut out), WqeiStatus::Computation);
        assert_eq!(wqei_mse(x.as_ptr(), y.as_ptr(), 4, ptr::null_mut()), WqeiStatus::NullPointer);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(wqei_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/wqei.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["wqei_scene_load", "wqei_compute_t", "wqei_compute_c", "wqei_last_error", "WQEI_STATUS_PANIC"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("probe.c");
    std::fs::write(&src, "#include \"wqei.h\"\nint main(void) { WqeiCoefficients c = wqei_coefficients_published(); return c.alpha > 0 ? 0 : 1; }\n").unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "header failed to compile"),
        Err(e) => eprintln!("skipping C compile check: {e}"),
    }
}
