use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use arboreal_ffi::*;

const FREE2: &str = "gens: a b\nbackend: free\n";

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { arb_string_free(s) };
    out
}

fn last_error() -> String {
    let p = arb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn group(text: &str) -> *mut ArbGroup {
    let mut g = ptr::null_mut();
    let t = cstr(text);
    assert_eq!(unsafe { arb_presentation_parse(t.as_ptr(), &mut g) }, ArbStatus::Ok);
    g
}

#[test]
fn normal_form_and_delta() {
    let g = group(FREE2);
    let mut s = ptr::null_mut();
    let w = cstr("a b b' a a'");
    assert_eq!(unsafe { arb_normal_form(g, w.as_ptr(), &mut s) }, ArbStatus::Ok);
    assert_eq!(take(s), "a");
    let (mut n, mut d) = (-1, -1);
    assert_eq!(unsafe { arb_delta(g, 3, &mut n, &mut d) }, ArbStatus::Ok);
    assert_eq!((n, d), (0, 1));
    unsafe { arb_presentation_free(g) };
}

#[test]
fn fold_and_measure() {
    let g = group(FREE2);
    let gens = cstr("ab,ab'");
    let mut core = ptr::null_mut();
    assert_eq!(unsafe { arb_core_from_generators(g, gens.as_ptr(), &mut core) }, ArbStatus::Ok);
    assert_eq!(unsafe { arb_core_size(core) }, 4);
    let (mut folded, mut moves) = (ptr::null_mut(), 0usize);
    assert_eq!(unsafe { arb_core_fold_to_minimal(g, core, 2, 6, 100, &mut folded, &mut moves) }, ArbStatus::Ok);
    assert_eq!(unsafe { arb_core_size(folded) }, 3);
    assert_eq!(moves, 1);
    let (mut n, mut d) = (-1, -1);
    assert_eq!(unsafe { arb_core_measure_qi(g, folded, 6, &mut n, &mut d) }, ArbStatus::Ok);
    assert_eq!((n, d), (0, 1));
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { arb_core_to_json(g, folded, &mut json) }, ArbStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert!(v.get("edges").is_some());
    unsafe {
        arb_core_free(core);
        arb_core_free(folded);
        arb_presentation_free(g);
    }
    assert_eq!(unsafe { arb_core_size(ptr::null()) }, 0);
}

#[test]
fn membership() {
    let g = group(FREE2);
    let gens = cstr("aa,b");
    let mut out = false;
    let yes = cstr("b a a b'");
    assert_eq!(unsafe { arb_stallings_member(g, gens.as_ptr(), yes.as_ptr(), &mut out) }, ArbStatus::Ok);
    assert!(out);
    let no = cstr("a");
    assert_eq!(unsafe { arb_stallings_member(g, gens.as_ptr(), no.as_ptr(), &mut out) }, ArbStatus::Ok);
    assert!(!out);
    unsafe { arb_presentation_free(g) };
}

#[test]
fn errors_are_reported() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { arb_presentation_parse(ptr::null(), &mut g) }, ArbStatus::InvalidArgument);
    assert!(last_error().contains("null"));
    let bad = cstr("gens: a\nbackend: nonsense\n");
    assert_eq!(unsafe { arb_presentation_parse(bad.as_ptr(), &mut g) }, ArbStatus::Validation);
    assert!(g.is_null());

    let g = group(FREE2);
    let w = cstr("x");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { arb_normal_form(g, w.as_ptr(), &mut s) }, ArbStatus::Validation);
    assert!(s.is_null());
    assert!(!last_error().is_empty());
    unsafe { arb_presentation_free(g) };

    let surface = group("gens: a b c d\nbackend: dehn\nrel: a b a' b' c d c' d'\n");
    let (gens, word, mut out) = (cstr("a"), cstr("a"), false);
    assert_eq!(unsafe { arb_stallings_member(surface, gens.as_ptr(), word.as_ptr(), &mut out) }, ArbStatus::Validation);
    unsafe { arb_presentation_free(surface) };
}

#[test]
fn errors_are_thread_local() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { arb_presentation_parse(ptr::null(), &mut g) }, ArbStatus::InvalidArgument);
    let other = std::thread::spawn(|| arb_last_error_message().is_null()).join().unwrap();
    assert!(other);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/arboreal.h")
}

#[test]
fn header_declares_everything() {
    let h = std::fs::read_to_string(header()).unwrap();
    for f in [
        "arb_presentation_parse",
        "arb_presentation_free",
        "arb_normal_form",
        "arb_delta",
        "arb_core_from_generators",
        "arb_core_fold_to_minimal",
        "arb_core_size",
        "arb_core_measure_qi",
        "arb_core_to_json",
        "arb_core_free",
        "arb_stallings_member",
        "arb_last_error_message",
        "arb_string_free",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(header())
        .status()
    else {
        eprintln!("no C compiler found, header not compiled");
        return;
    };
    assert!(status.success());
}
