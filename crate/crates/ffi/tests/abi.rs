use std::ffi::{c_char, CStr, CString};
use std::ptr;

use fdexplain_ffi::*;

const TRIANGLE: &str = "var x in {0,1,2}; var y in {0,1,2}; var z in {0,1,2};\n\
    constraint x < y; constraint y < z; constraint z < x;\n";

fn last_error() -> String {
    unsafe { CStr::from_ptr(fdx_last_error_message()) }.to_string_lossy().into_owned()
}

fn take(s: *mut c_char) -> String {
    let owned = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { fdx_string_free(s) };
    owned
}

fn parse(src: &str, mode: FdxMode) -> *mut FdxModel {
    let src = CString::new(src).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fdx_model_parse(src.as_ptr(), mode, &mut m) }, FdxStatus::Ok, "{}", last_error());
    m
}

fn propagate(m: *const FdxModel, strategy: FdxStrategy, stop: bool) -> *mut FdxResult {
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { fdx_propagate(m, strategy, 7, stop, &mut r) }, FdxStatus::Ok, "{}", last_error());
    r
}

#[test]
fn triangle_round_trip() {
    let m = parse(TRIANGLE, FdxMode::Full);
    let (mut vars, mut rules) = (0, 0);
    unsafe {
        assert_eq!(fdx_model_var_count(m, &mut vars), FdxStatus::Ok);
        assert_eq!(fdx_model_rule_count(m, &mut rules), FdxStatus::Ok);
    }
    assert_eq!((vars, rules), (3, 6));

    let z = CString::new("z").unwrap();
    let mut zi = 0;
    let mut name = ptr::null_mut();
    unsafe {
        assert_eq!(fdx_model_var_index(m, z.as_ptr(), &mut zi), FdxStatus::Ok);
        assert_eq!(fdx_model_var_name(m, zi, &mut name), FdxStatus::Ok);
    }
    assert_eq!(take(name), "z");

    let r = propagate(m, FdxStrategy::Worklist, true);
    let (mut failed, mut var, mut steps) = (false, usize::MAX, 0);
    unsafe {
        assert_eq!(fdx_result_failed(r, &mut failed, &mut var), FdxStatus::Ok);
        assert_eq!(fdx_result_steps(r, &mut steps), FdxStatus::Ok);
    }
    assert!(failed);
    assert_eq!((var, steps), (zi, 5));

    let mut trace = ptr::null_mut();
    assert_eq!(unsafe { fdx_result_trace(r, &mut trace) }, FdxStatus::Ok);
    assert!(take(trace).starts_with("1\tr1\tx=2\t0\n"));
    unsafe {
        fdx_result_free(r);
        fdx_model_free(m);
    }
}

#[test]
fn explanations_as_text_and_dot() {
    let m = parse(TRIANGLE, FdxMode::Full);
    let r = propagate(m, FdxStrategy::Worklist, false);
    let x = CString::new("x").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fdx_result_explain(r, x.as_ptr(), 0, FdxFormat::Text, &mut s) }, FdxStatus::Ok);
    assert_eq!(take(s), "(0, x) [(0, r6)]\n");
    assert_eq!(unsafe { fdx_result_explain(r, x.as_ptr(), 0, FdxFormat::Dot, &mut s) }, FdxStatus::Ok);
    assert!(take(s).starts_with("digraph explanation {"));

    assert_eq!(unsafe { fdx_result_explain(r, x.as_ptr(), 9, FdxFormat::Text, &mut s) }, FdxStatus::InvalidArgument);
    assert!(s.is_null());
    let w = CString::new("w").unwrap();
    assert_eq!(unsafe { fdx_result_explain(r, w.as_ptr(), 0, FdxFormat::Text, &mut s) }, FdxStatus::NotFound);
    unsafe {
        fdx_result_free(r);
        fdx_model_free(m);
    }
}

#[test]
fn kept_values_are_not_withdrawn() {
    let m = parse("var x in {0,1};\nvar y in {0,1};\nconstraint table(x, y) { (0,0), (0,1), (1,1) };\n", FdxMode::Full);
    let r = propagate(m, FdxStrategy::Random, false);
    let mut len = 0;
    let mut buf = [0i64; 1];
    unsafe {
        assert_eq!(fdx_result_domain(r, 0, ptr::null_mut(), 0, &mut len), FdxStatus::BufferTooSmall);
        assert_eq!(len, 2);
        assert_eq!(fdx_result_domain(r, 0, buf.as_mut_ptr(), 1, &mut len), FdxStatus::BufferTooSmall);
    }
    let mut buf = [0i64; 4];
    assert_eq!(unsafe { fdx_result_domain(r, 1, buf.as_mut_ptr(), 4, &mut len) }, FdxStatus::Ok);
    assert_eq!(&buf[..len], &[0, 1]);
    assert_eq!(unsafe { fdx_result_domain(r, 5, buf.as_mut_ptr(), 4, &mut len) }, FdxStatus::NotFound);

    let x = CString::new("x").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fdx_result_explain(r, x.as_ptr(), 1, FdxFormat::Text, &mut s) }, FdxStatus::NotWithdrawn);
    assert!(last_error().contains("not withdrawn"));
    unsafe {
        fdx_result_free(r);
        fdx_model_free(m);
    }
}

#[test]
fn bounds_mode_on_offsets() {
    let m = parse("var x in {0,1,2,3,4};\nvar y in {1,3};\nconstraint x = y + 1;\n", FdxMode::Bounds);
    let r = propagate(m, FdxStrategy::RoundRobin, false);
    let mut buf = [0i64; 5];
    let mut len = 0;
    assert_eq!(unsafe { fdx_result_domain(r, 0, buf.as_mut_ptr(), 5, &mut len) }, FdxStatus::Ok);
    // interval reasoning keeps 3 although y has no 2
    assert_eq!(&buf[..len], &[2, 3, 4]);
    unsafe {
        fdx_result_free(r);
        fdx_model_free(m);
    }
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("var x in {};").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fdx_model_parse(bad.as_ptr(), FdxMode::Full, &mut m) }, FdxStatus::Parse);
    assert!(m.is_null());
    assert!(last_error().contains("empty domain"), "{}", last_error());

    assert_eq!(unsafe { fdx_model_parse(ptr::null(), FdxMode::Full, &mut m) }, FdxStatus::NullPointer);
    let invalid = [0xffu8 as c_char, 0];
    assert_eq!(unsafe { fdx_model_parse(invalid.as_ptr(), FdxMode::Full, &mut m) }, FdxStatus::InvalidUtf8);

    let mut n = 0;
    assert_eq!(unsafe { fdx_model_var_count(ptr::null(), &mut n) }, FdxStatus::NullPointer);
    let ok = parse(TRIANGLE, FdxMode::Full);
    assert_eq!(unsafe { fdx_model_var_count(ok, &mut n) }, FdxStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe {
        fdx_model_free(ok);
        fdx_model_free(ptr::null_mut());
        fdx_result_free(ptr::null_mut());
        fdx_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fdexplain.h")).unwrap();
    for item in [
        "typedef struct FdxModel FdxModel;",
        "FDX_STATUS_NOT_WITHDRAWN",
        "fdx_model_parse(",
        "fdx_propagate(",
        "fdx_result_explain(",
        "fdx_result_domain(",
        "fdx_string_free(",
        "fdx_last_error_message(",
    ] {
        assert!(header.contains(item), "header lacks {item}");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let Ok(cc) = which("cc") else {
        eprintln!("no C compiler on PATH, skipping");
        return;
    };
    // test binaries live next to the library in deps/
    let exe = std::env::current_exe().unwrap();
    let deps = exe.parent().unwrap();
    let Some(lib) = [deps.join("libfdexplain_ffi.a"), deps.parent().unwrap().join("libfdexplain_ffi.a")]
        .into_iter()
        .find(|p| p.exists())
    else {
        eprintln!("static library not built, skipping");
        return;
    };
    let root = env!("CARGO_MANIFEST_DIR");
    let dir = tempfile_dir();
    let bin = dir.join("smoke");
    let status = std::process::Command::new(cc)
        .arg(format!("{root}/tests/c/smoke.c"))
        .arg(format!("-I{root}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout), "(0, x) [(0, r6)]\n");
    std::fs::remove_dir_all(dir).ok();
}

fn which(name: &str) -> Result<std::path::PathBuf, ()> {
    std::env::var_os("PATH")
        .and_then(|paths| std::env::split_paths(&paths).map(|p| p.join(name)).find(|p| p.is_file()))
        .ok_or(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("fdexplain-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
