use std::ffi::{CStr, CString};
use std::ptr;

use dmu_ffi::*;

fn last_error() -> String {
    let p = dmu_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn poly(re: &[f64]) -> *mut DmuPoly {
    let im = vec![0.0; re.len()];
    let mut p = ptr::null_mut();
    let s = unsafe { dmu_poly_new(re.as_ptr(), im.as_ptr(), re.len(), &mut p) };
    assert_eq!(s, DmuStatus::Ok);
    p
}

fn measure(angles: &[f64], masses: &[f64]) -> *mut DmuMeasure {
    let mut m = ptr::null_mut();
    let s = unsafe { dmu_measure_new(angles.as_ptr(), masses.as_ptr(), angles.len(), &mut m) };
    assert_eq!(s, DmuStatus::Ok);
    m
}

fn coeffs(p: *const DmuPoly) -> Vec<f64> {
    let mut n = 0;
    unsafe {
        assert_eq!(dmu_poly_len(p, &mut n), DmuStatus::Ok);
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(dmu_poly_coeffs(p, re.as_mut_ptr(), im.as_mut_ptr(), n), DmuStatus::Ok);
        assert!(im.iter().all(|&x| x.abs() < 1e-14));
        re
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(dmu_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn norm_of_z_at_one_atom() {
    let (mu, f) = (measure(&[0.0], &[1.0]), poly(&[0.0, 1.0]));
    let (mut n, mut h, mut d) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(dmu_norm(mu, f, &mut n, &mut h, &mut d), DmuStatus::Ok);
        assert_eq!((n, h, d), (2.0, 1.0, 1.0));
        assert_eq!(dmu_norm(mu, f, &mut n, ptr::null_mut(), ptr::null_mut()), DmuStatus::Ok);
        let mut local = 0.0;
        let z5 = poly(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(dmu_local_dirichlet(z5, 1.3, &mut local), DmuStatus::Ok);
        assert!((local - 5.0).abs() < 1e-12);
        dmu_poly_free(z5);
        dmu_poly_free(f);
        dmu_measure_free(mu);
    }
}

#[test]
fn decompose_z_cubed() {
    let (mu, f) = (measure(&[0.0], &[1.0]), poly(&[0.0, 0.0, 0.0, 1.0]));
    let (mut p, mut g) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(dmu_decompose(mu, f, &mut p, &mut g), DmuStatus::Ok);
        let (pc, gc) = (coeffs(p), coeffs(g));
        assert_eq!(pc.len(), 1);
        assert!((pc[0] - 1.0).abs() < 1e-14);
        assert_eq!(gc.len(), 3);
        assert!(gc.iter().all(|c| (c - 1.0).abs() < 1e-14));

        let (mut re, mut im) = ([0.0; 1], [0.0; 1]);
        assert_eq!(
            dmu_poly_coeffs(g, re.as_mut_ptr(), im.as_mut_ptr(), 1),
            DmuStatus::BufferTooSmall
        );
        for q in [p, g, f] {
            dmu_poly_free(q);
        }
        dmu_measure_free(mu);
    }
}

#[test]
fn truncated_kernel_is_hermitian() {
    let mu = measure(&[0.0, std::f64::consts::PI], &[1.0, 0.5]);
    let mut k = ptr::null_mut();
    unsafe {
        assert_eq!(dmu_kernel_new(mu, 60, 0.5, &mut k), DmuStatus::Ok);
        let mut n = 0;
        assert_eq!(dmu_kernel_degree(k, &mut n), DmuStatus::Ok);
        assert_eq!(n, 60);
        let (w, z) = ((0.3, -0.2), (-0.1, 0.4));
        let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(dmu_kernel_eval(k, w.0, w.1, z.0, z.1, &mut a, &mut b), DmuStatus::Ok);
        assert_eq!(dmu_kernel_eval(k, z.0, z.1, w.0, w.1, &mut c, &mut d), DmuStatus::Ok);
        assert!((a - c).abs() < 1e-12 && (b + d).abs() < 1e-12);
        let (mut nsq, mut kw, mut kwi) = (0.0, 0.0, 0.0);
        assert_eq!(dmu_kernel_norm_sq(k, w.0, w.1, &mut nsq), DmuStatus::Ok);
        assert_eq!(dmu_kernel_eval(k, w.0, w.1, w.0, w.1, &mut kw, &mut kwi), DmuStatus::Ok);
        assert!((nsq - kw).abs() < 1e-14 && kwi.abs() < 1e-12);
        dmu_kernel_free(k);
        dmu_measure_free(mu);
    }
}

#[test]
fn one_atom_kernel_is_closed_form() {
    let mu = measure(&[0.0], &[1.0]);
    let mut k = ptr::null_mut();
    unsafe {
        assert_eq!(dmu_kernel_new(mu, 0, 0.9, &mut k), DmuStatus::Ok);
        let mut n = 7;
        assert_eq!(dmu_kernel_degree(k, &mut n), DmuStatus::Ok);
        assert_eq!(n, 0);
        // k_0 = 1 - conj(b(0)) b = 1 since b(0) = 0.
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(dmu_kernel_eval(k, 0.0, 0.0, 0.5, 0.5, &mut a, &mut b), DmuStatus::Ok);
        assert!((a - 1.0).abs() < 1e-15 && b.abs() < 1e-15);
        assert_eq!(dmu_kernel_eval(k, 1.0, 0.0, 0.5, 0.5, &mut a, &mut b), DmuStatus::OutsideDisk);
        assert!(last_error().contains("outside the open unit disk"));
        dmu_kernel_free(k);
        dmu_measure_free(mu);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(dmu_poly_new(ptr::null(), ptr::null(), 3, &mut p), DmuStatus::NullPointer);
        assert!(last_error().contains("null"));
        let nan = [f64::NAN];
        assert_eq!(dmu_poly_new(nan.as_ptr(), nan.as_ptr(), 1, &mut p), DmuStatus::InvalidArgument);

        let mut m = ptr::null_mut();
        let dup = [0.5, 0.5];
        assert_eq!(
            dmu_measure_new(dup.as_ptr(), [1.0, 1.0].as_ptr(), 2, &mut m),
            DmuStatus::InvalidArgument
        );
        assert!(last_error().contains("coincide"));
        assert_eq!(dmu_measure_new(ptr::null(), ptr::null(), 0, &mut m), DmuStatus::InvalidArgument);

        let mut n = 0.0;
        assert_eq!(dmu_norm(ptr::null(), ptr::null(), &mut n, ptr::null_mut(), ptr::null_mut()), DmuStatus::NullPointer);

        let mut out = ptr::null_mut();
        let bad = CString::new(r#"{"family":"area","scale":1,"extra":2}"#).unwrap();
        assert_eq!(dmu_carleson_json(bad.as_ptr(), ptr::null(), ptr::null(), &mut out), DmuStatus::Parse);
        assert!(out.is_null());
        dmu_string_free(ptr::null_mut());
        dmu_poly_free(ptr::null_mut());
    }
}

#[test]
fn carleson_scans_through_json() {
    let nu = CString::new(r#"{"family":"radial_power","alpha":0.5,"theta":0}"#).unwrap();
    let mu = CString::new(r#"{"atoms":[{"angle":0,"mass":1}]}"#).unwrap();
    let cfg = CString::new(r#"{"n_zeta":16,"k_min":1,"k_max":12,"rho":1.5}"#).unwrap();
    let verdict = |s: *mut std::ffi::c_char| -> String {
        let v: serde_json::Value =
            serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
        unsafe { dmu_string_free(s) };
        v["verdict"].as_str().unwrap().to_string()
    };
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(dmu_carleson_json(nu.as_ptr(), ptr::null(), cfg.as_ptr(), &mut out), DmuStatus::Ok);
        assert_eq!(verdict(out), "diverging");
        assert_eq!(dmu_carleson_json(nu.as_ptr(), mu.as_ptr(), cfg.as_ptr(), &mut out), DmuStatus::Ok);
        assert_eq!(verdict(out), "bounded");
        let rcfg = CString::new(
            r#"{"n_angles":16,"k_min":1,"k_max":12,"rho":1.5,"offset":0,"degree":null}"#,
        )
        .unwrap();
        assert_eq!(dmu_rkt_json(nu.as_ptr(), mu.as_ptr(), rcfg.as_ptr(), &mut out), DmuStatus::Ok);
        assert_eq!(verdict(out), "bounded");
    }
}

#[test]
fn last_error_is_thread_local() {
    let mut p = std::ptr::null_mut();
    assert_eq!(unsafe { dmu_poly_new(ptr::null(), ptr::null(), 1, &mut p) }, DmuStatus::NullPointer);
    let t = std::thread::spawn(|| {
        assert!(dmu_last_error_message().is_null());
    });
    t.join().unwrap();
}
