use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use colorsim_ffi::*;

unsafe fn last_error() -> String {
    CStr::from_ptr(colorsim_last_error()).to_string_lossy().into_owned()
}

#[test]
fn color_gnp_through_handles() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(colorsim_instance_gnp(300, 0.05, 4, &mut inst), ColorsimStatus::Ok);
        let n = colorsim_instance_n(inst);
        assert_eq!(n, 300);
        for model in [ColorsimModel::Clique, ColorsimModel::Mpc, ColorsimModel::Bidding] {
            let mut res = ptr::null_mut();
            assert_eq!(colorsim_color(inst, model, 1, 0.5, &mut res), ColorsimStatus::Ok);
            assert_eq!(colorsim_result_valid(res), 1);
            let mut buf = vec![0u64; n];
            assert_eq!(colorsim_result_colors(res, buf.as_mut_ptr(), n), ColorsimStatus::Ok);
            assert!(buf.iter().all(|&c| c != COLORSIM_UNCOLORED));
            let trace = CStr::from_ptr(colorsim_result_trace(res)).to_str().unwrap();
            assert!(serde_json::from_str::<serde_json::Value>(trace).is_ok());
            colorsim_result_free(res);
        }
        colorsim_instance_free(inst);
    }
}

#[test]
fn explicit_lists() {
    unsafe {
        // path 0-1-2, vertex 1 may only take color 5
        let edges = [0u32, 1, 1, 2];
        let offsets = [0usize, 2, 3, 5];
        let colors = [5u64, 6, 5, 5, 7];
        let mut inst = ptr::null_mut();
        let s = colorsim_instance_from_lists(3, edges.as_ptr(), 2, offsets.as_ptr(), colors.as_ptr(), &mut inst);
        // vertex 1 has degree 2 and one color: not a (deg+1)-list instance
        assert_eq!(s, ColorsimStatus::InvalidInstance, "{}", last_error());
        assert!(!last_error().is_empty());

        let colors = [5u64, 6, 5, 6, 7, 5, 7];
        let offsets = [0usize, 2, 5, 7];
        let s = colorsim_instance_from_lists(3, edges.as_ptr(), 2, offsets.as_ptr(), colors.as_ptr(), &mut inst);
        assert_eq!(s, ColorsimStatus::Ok, "{}", last_error());
        assert!(last_error().is_empty());
        let mut res = ptr::null_mut();
        assert_eq!(colorsim_color(inst, ColorsimModel::Clique, 0, 0.5, &mut res), ColorsimStatus::Ok);
        assert_eq!(colorsim_result_valid(res), 1);
        colorsim_result_free(res);
        colorsim_instance_free(inst);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(
            colorsim_instance_from_edges(2, ptr::null(), 1, &mut inst),
            ColorsimStatus::NullPointer
        );
        let edges = [0u32, 9];
        assert_eq!(
            colorsim_instance_from_edges(2, edges.as_ptr(), 1, &mut inst),
            ColorsimStatus::InvalidArgument
        );
        assert_eq!(
            colorsim_color(ptr::null(), ColorsimModel::Clique, 0, 0.5, &mut ptr::null_mut()),
            ColorsimStatus::NullPointer
        );
        let edges = [0u32, 1];
        assert_eq!(colorsim_instance_from_edges(2, edges.as_ptr(), 1, &mut inst), ColorsimStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(
            colorsim_color(inst, ColorsimModel::Mpc, 0, 1.5, &mut res),
            ColorsimStatus::InvalidArgument
        );
        let mut c = 0;
        assert_eq!(colorsim_lca_color(inst, 0, 5, &mut c, ptr::null_mut()), ColorsimStatus::InvalidArgument);
        assert_eq!(colorsim_lca_color(inst, 0, 1, &mut c, ptr::null_mut()), ColorsimStatus::Ok);
        assert!(c <= 1);
        colorsim_instance_free(inst);
        colorsim_instance_free(ptr::null_mut());
        colorsim_result_free(ptr::null_mut());
    }
}

#[test]
fn lca_answers_match_global_bidding() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(colorsim_instance_good(400, 16, 3, &mut inst), ColorsimStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(colorsim_color(inst, ColorsimModel::Bidding, 3, 0.5, &mut res), ColorsimStatus::Ok);
        let mut buf = vec![0u64; 400];
        colorsim_result_colors(res, buf.as_mut_ptr(), 400);
        for v in [0u32, 17, 399] {
            let (mut c, mut probes) = (0, 0);
            assert_eq!(colorsim_lca_color(inst, 3, v, &mut c, &mut probes), ColorsimStatus::Ok);
            assert_eq!(c, buf[v as usize]);
            assert!(probes > 0);
        }
        colorsim_result_free(res);
        colorsim_instance_free(inst);
    }
}

fn find_staticlib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    [deps.parent()?, deps]
        .iter()
        .map(|d| d.join("libcolorsim_ffi.a"))
        .find(|p| p.exists())
}

#[test]
fn c_smoke_program() {
    let Some(lib) = find_staticlib() else {
        eprintln!("staticlib not built; skipping");
        return;
    };
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status();
    let Ok(status) = status else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke exited {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("ok\n"));
}
