use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use rmt_lab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rmt_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn header_is_generated_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/rmt_lab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["rmt_spectrum_sample", "rmt_trajectory_free", "RMT_STATUS_BUFFER_TOO_SMALL", "typedef struct RmtSpectrum"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // Syntax check only, skipped if no C compiler is on PATH.
    let probe = "#include \"rmt_lab.h\"\nint main(void) { RmtSpectrum *s = 0; return (int)rmt_spectrum_len(s); }\n";
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(&src, probe).unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(header.parent().unwrap()).arg(&src).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(e) => eprintln!("cc unavailable, skipping compile check: {e}"),
    }
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("capi");
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn spectrum_roundtrip() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(rmt_spectrum_sample(RmtEnsemble::Gue, 64, 0, 7, 0, true, &mut h), RmtStatus::Ok);
        assert_eq!(rmt_spectrum_len(h), 64);
        assert!(!rmt_spectrum_is_complex(h));
        let mut re = vec![0.0; 64];
        let mut small = vec![0.0; 10];
        assert_eq!(rmt_spectrum_copy(h, small.as_mut_ptr(), ptr::null_mut(), 10), RmtStatus::BufferTooSmall);
        assert_eq!(rmt_spectrum_copy(h, re.as_mut_ptr(), ptr::null_mut(), 64), RmtStatus::Ok);
        assert!(re.windows(2).all(|w| w[0] <= w[1]));
        let mut d = 0.0;
        assert_eq!(rmt_spectrum_bl_distance(h, RmtLaw::Semicircle, 0.0, &mut d), RmtStatus::Ok);
        assert!(d > 0.0 && d < 0.2);
        rmt_spectrum_free(h);

        // same (seed, stream) reproduces the draw
        let mut h2 = ptr::null_mut();
        rmt_spectrum_sample(RmtEnsemble::Gue, 64, 0, 7, 0, true, &mut h2);
        let mut again = vec![0.0; 64];
        rmt_spectrum_copy(h2, again.as_mut_ptr(), ptr::null_mut(), 64);
        assert_eq!(re, again);
        rmt_spectrum_free(h2);
    }
}

#[test]
fn complex_spectrum_needs_imaginary_buffer() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(rmt_spectrum_sample(RmtEnsemble::Ginibre, 16, 0, 1, 3, true, &mut h), RmtStatus::Ok);
        assert!(rmt_spectrum_is_complex(h));
        let (mut re, mut im) = (vec![0.0; 16], vec![0.0; 16]);
        assert_eq!(rmt_spectrum_copy(h, re.as_mut_ptr(), ptr::null_mut(), 16), RmtStatus::NullPointer);
        assert_eq!(rmt_spectrum_copy(h, re.as_mut_ptr(), im.as_mut_ptr(), 16), RmtStatus::Ok);
        assert!(im.iter().any(|v| *v != 0.0));
        let mut d = 0.0;
        assert_eq!(rmt_spectrum_bl_distance(h, RmtLaw::Semicircle, 0.0, &mut d), RmtStatus::Domain);
        rmt_spectrum_free(h);
    }
}

#[test]
fn invalid_inputs_report_status_and_message() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(rmt_spectrum_sample(RmtEnsemble::Gue, 0, 0, 1, 0, false, &mut h), RmtStatus::InvalidArgument);
        assert!(h.is_null());
        assert!(last_error().starts_with("invalid-argument"));
        assert_eq!(rmt_spectrum_sample(RmtEnsemble::Gue, 4, 0, 1, 0, false, ptr::null_mut()), RmtStatus::NullPointer);
        assert_eq!(rmt_spectrum_len(ptr::null()), 0);
        rmt_spectrum_free(ptr::null_mut());
        rmt_trajectory_free(ptr::null_mut());
        let mut v = 0.0;
        assert_eq!(rmt_hole_probability(3.0, 5, &mut v, ptr::null_mut()), RmtStatus::Domain);
        assert!(last_error().starts_with("truncation-too-small"));
        assert_eq!(rmt_gumbel_rescale(1.0, 10, &mut v), RmtStatus::Domain);
    }
}

#[test]
fn scalar_functions() {
    unsafe {
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(rmt_semicircle_stieltjes(0.0, 1.0, &mut re, &mut im), RmtStatus::Ok);
        // S(i) = (i − i√5)/2
        assert!(re.abs() < 1e-14 && (im - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
        let (mut lp, mut tail) = (0.0, 1.0);
        assert_eq!(rmt_hole_probability(3.0, 0, &mut lp, &mut tail), RmtStatus::Ok);
        assert!((lp + 34.56960594606603).abs() < 1e-9 && tail < 1e-10);
        let mut f = 0.0;
        assert_eq!(rmt_free_energy_limit(1.0, &mut f), RmtStatus::Ok);
        assert!((f + 0.25 * 2f64.ln() + 0.375).abs() < 1e-15);
        let mut k = 0.0;
        assert_eq!(rmt_gue_kernel(1, 0.0, 0.0, &mut k), RmtStatus::Ok);
        assert!((k - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-14);
        let v = CStr::from_ptr(rmt_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn trajectory_handle() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(rmt_dyson_simulate(2, 8, 0.5, 1e-2, 5, 11, &mut t), RmtStatus::Ok);
        assert_eq!(rmt_trajectory_len(t), 5);
        assert_eq!(rmt_trajectory_particles(t), 8);
        let mut pos = vec![0.0; 8];
        let mut time = 0.0;
        assert_eq!(rmt_trajectory_state(t, 4, &mut time, pos.as_mut_ptr(), 8), RmtStatus::Ok);
        assert!((time - 0.5).abs() < 1e-12);
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(rmt_trajectory_state(t, 5, &mut time, pos.as_mut_ptr(), 8), RmtStatus::InvalidArgument);
        rmt_trajectory_free(t);
        assert_eq!(rmt_dyson_simulate(3, 8, 0.5, 1e-2, 5, 11, &mut t), RmtStatus::InvalidArgument);
    }
}
