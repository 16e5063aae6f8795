//! C ABI.
//!
//! Instances and results are opaque heap handles released with their
//! `_free` function. Every call returns a `ColorsimStatus`; on failure the
//! message is available from `colorsim_last_error` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use colorsim::bidding::{color_with_bidding, generate_good_instance, BiddingKnobs, GoodSpec};
use colorsim::clique::{run_clique_coloring, CliqueConfig};
use colorsim::graph::{
    gnp, validate_coloring, Coloring, Graph, ListColoringInstance, Palette, Vertex,
};
use colorsim::lca::{lca_color, LcaConfig, LcaOracle};
use colorsim::mpc::{run_mpc_coloring, MpcConfig};
use colorsim::Error;

/// Marks an uncolored vertex in `colorsim_result_colors`.
pub const COLORSIM_UNCOLORED: u64 = u64::MAX;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInstance = 3,
    Io = 4,
    PaletteExhausted = 5,
    OverloadedVertex = 6,
    MemoryExceeded = 7,
    QueryBudgetExceeded = 8,
    Unresolved = 9,
    BufferTooSmall = 10,
    Panic = 11,
    Other = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorsimModel {
    Clique = 0,
    Mpc = 1,
    Bidding = 2,
}

/// Opaque list-coloring instance.
pub struct ColorsimInstance {
    inner: ListColoringInstance,
}

/// Opaque coloring plus its JSON trace.
pub struct ColorsimResult {
    colors: Vec<u64>,
    trace: CString,
    valid: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes stripped");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ColorsimStatus {
    match e {
        Error::InvalidInstance(_) | Error::InfeasibleSpec(_) | Error::InfeasibleParameters(_) => {
            ColorsimStatus::InvalidInstance
        }
        Error::InvalidVertex { .. } | Error::Parameter(_) | Error::Config(_) => {
            ColorsimStatus::InvalidArgument
        }
        Error::Io { .. } | Error::Parse { .. } => ColorsimStatus::Io,
        Error::PaletteExhausted(_) => ColorsimStatus::PaletteExhausted,
        Error::OverloadedVertex { .. } => ColorsimStatus::OverloadedVertex,
        Error::MemoryExceeded { .. } => ColorsimStatus::MemoryExceeded,
        Error::QueryBudgetExceeded { .. } => ColorsimStatus::QueryBudgetExceeded,
        Error::UnresolvedVertices(_) => ColorsimStatus::Unresolved,
        _ => ColorsimStatus::Other,
    }
}

/// Runs `f`, mapping errors and panics to a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (ColorsimStatus, String)>) -> ColorsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ColorsimStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ColorsimStatus::Panic
        }
    }
}

fn lift(e: Error) -> (ColorsimStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ColorsimStatus, String) {
    (ColorsimStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (ColorsimStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_instance(out: *mut *mut ColorsimInstance, inner: ListColoringInstance) {
    *out = Box::into_raw(Box::new(ColorsimInstance { inner }));
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn colorsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a graph on `n` vertices from `m` edges stored as pairs in
/// `edges[2m]`. Every vertex gets the palette `{0, ..., Δ}`.
///
/// # Safety
/// `edges` must point to `2 * m` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn colorsim_instance_from_edges(
    n: usize,
    edges: *const u32,
    m: usize,
    out: *mut *mut ColorsimInstance,
) -> ColorsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let flat = slice(edges, 2 * m, "edges")?;
        let g = Graph::from_edges(n, flat.chunks_exact(2).map(|e| (e[0], e[1]))).map_err(lift)?;
        out_instance(out, ListColoringInstance::uniform(g));
        Ok(())
    })
}

/// Like `colorsim_instance_from_edges` with explicit palettes in CSR form:
/// vertex `v` owns `colors[offsets[v] .. offsets[v + 1]]`.
///
/// # Safety
/// `offsets` must hold `n + 1` values and `colors` `offsets[n]` values.
#[no_mangle]
pub unsafe extern "C" fn colorsim_instance_from_lists(
    n: usize,
    edges: *const u32,
    m: usize,
    offsets: *const usize,
    colors: *const u64,
    out: *mut *mut ColorsimInstance,
) -> ColorsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let flat = slice(edges, 2 * m, "edges")?;
        let offs = slice(offsets, n + 1, "offsets")?;
        if offs.windows(2).any(|w| w[0] > w[1]) {
            return Err((ColorsimStatus::InvalidArgument, "offsets must be non-decreasing".into()));
        }
        let cols = slice(colors, offs[n], "colors")?;
        let g = Graph::from_edges(n, flat.chunks_exact(2).map(|e| (e[0], e[1]))).map_err(lift)?;
        let pals: Vec<Palette> = offs
            .windows(2)
            .map(|w| Palette::new(cols[w[0]..w[1]].iter().copied()))
            .collect();
        let inst = ListColoringInstance::with_inferred_floor(g, pals).map_err(lift)?;
        out_instance(out, inst);
        Ok(())
    })
}

/// G(n, p) with uniform `{0, ..., Δ}` palettes.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn colorsim_instance_gnp(
    n: usize,
    p: f64,
    seed: u64,
    out: *mut *mut ColorsimInstance,
) -> ColorsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = gnp(n, p, seed).map_err(lift)?;
        out_instance(out, ListColoringInstance::uniform(g));
        Ok(())
    })
}

/// Synthetic bidding-ready instance: degree at most `delta`, palettes of
/// `2 * delta + 1` colors.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn colorsim_instance_good(
    n: usize,
    delta: usize,
    seed: u64,
    out: *mut *mut ColorsimInstance,
) -> ColorsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let knobs = BiddingKnobs::default();
        let spec = GoodSpec::new(n, delta, knobs.c0, knobs.beta);
        let inst = generate_good_instance(&spec, seed)
            .and_then(|g| g.to_list_instance())
            .map_err(lift)?;
        out_instance(out, inst);
        Ok(())
    })
}

/// # Safety
/// `instance` must come from a constructor above and not be freed.
#[no_mangle]
pub unsafe extern "C" fn colorsim_instance_n(instance: *const ColorsimInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.n())
}

/// # Safety
/// `instance` must come from a constructor above and not be freed.
#[no_mangle]
pub unsafe extern "C" fn colorsim_instance_max_degree(instance: *const ColorsimInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.max_degree())
}

/// # Safety
/// `instance` must be null or come from a constructor above; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn colorsim_instance_free(instance: *mut ColorsimInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

fn run(inst: &ListColoringInstance, model: ColorsimModel, seed: u64, alpha: f64) -> Result<(Coloring, String), Error> {
    Ok(match model {
        ColorsimModel::Clique => {
            let (c, t) = run_clique_coloring(inst, &CliqueConfig::default(), seed)?;
            (c, serde_json::to_string(&t).expect("trace serializes"))
        }
        ColorsimModel::Mpc => {
            let (c, t) = run_mpc_coloring(inst, alpha, &MpcConfig::default(), seed)?;
            (c, serde_json::to_string(&t).expect("trace serializes"))
        }
        ColorsimModel::Bidding => {
            let (c, t) = color_with_bidding(inst, &BiddingKnobs::default(), seed)?;
            (c, serde_json::to_string(&t).expect("trace serializes"))
        }
    })
}

/// Colors `instance` with the chosen pipeline and default constants.
/// `alpha` is read by the MPC model only.
///
/// # Safety
/// `instance` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn colorsim_color(
    instance: *const ColorsimInstance,
    model: ColorsimModel,
    seed: u64,
    alpha: f64,
    out: *mut *mut ColorsimResult,
) -> ColorsimStatus {
    guard(|| {
        let inst = &instance.as_ref().ok_or_else(|| null("instance"))?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let (coloring, trace) = run(inst, model, seed, alpha).map_err(lift)?;
        let valid = validate_coloring(inst, &coloring).is_valid_total();
        let colors = coloring
            .as_slice()
            .iter()
            .map(|c| c.unwrap_or(COLORSIM_UNCOLORED))
            .collect();
        let trace = CString::new(trace).expect("JSON has no nul bytes");
        *out = Box::into_raw(Box::new(ColorsimResult { colors, trace, valid }));
        Ok(())
    })
}

/// Answers one vertex through the query oracle. `probes` may be null.
///
/// # Safety
/// `instance` must be live and `color` writable.
#[no_mangle]
pub unsafe extern "C" fn colorsim_lca_color(
    instance: *const ColorsimInstance,
    seed: u64,
    vertex: u32,
    color: *mut u64,
    probes: *mut u64,
) -> ColorsimStatus {
    guard(|| {
        let inst = &instance.as_ref().ok_or_else(|| null("instance"))?.inner;
        if color.is_null() {
            return Err(null("color"));
        }
        let oracle = LcaOracle::new(inst, seed);
        let a = lca_color(&oracle, vertex as Vertex, &LcaConfig::default()).map_err(lift)?;
        *color = a.color;
        if !probes.is_null() {
            *probes = a.queries.total();
        }
        Ok(())
    })
}

/// # Safety
/// `result` must be live.
#[no_mangle]
pub unsafe extern "C" fn colorsim_result_n(result: *const ColorsimResult) -> usize {
    result.as_ref().map_or(0, |r| r.colors.len())
}

/// 1 if the coloring is proper, total and respects every palette.
///
/// # Safety
/// `result` must be live.
#[no_mangle]
pub unsafe extern "C" fn colorsim_result_valid(result: *const ColorsimResult) -> i32 {
    result.as_ref().map_or(0, |r| i32::from(r.valid))
}

/// Copies the colors into `buf`, `COLORSIM_UNCOLORED` marking gaps.
///
/// # Safety
/// `result` must be live and `buf` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn colorsim_result_colors(
    result: *const ColorsimResult,
    buf: *mut u64,
    len: usize,
) -> ColorsimStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if len < r.colors.len() {
            return Err((
                ColorsimStatus::BufferTooSmall,
                format!("need {} slots, got {len}", r.colors.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(r.colors.as_ptr(), buf, r.colors.len());
        Ok(())
    })
}

/// JSON trace, owned by `result`.
///
/// # Safety
/// `result` must be live; the string dies with it.
#[no_mangle]
pub unsafe extern "C" fn colorsim_result_trace(result: *const ColorsimResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.trace.as_ptr())
}

/// # Safety
/// `result` must be null or live; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn colorsim_result_free(result: *mut ColorsimResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
