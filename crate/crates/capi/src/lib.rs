//! C ABI over the rexplore engine.
//!
//! Graphs travel as opaque handles; results cross the boundary as
//! NUL-terminated JSON strings the caller frees with [`rx_string_free`].
//! Functions return [`RxStatus`]; on any non-OK status the thread-local
//! message from [`rx_last_error`] describes the failure. The exploration
//! entry point uses the deterministic lexical reward oracle, so bindings
//! stay fully offline.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rexplore::graph::{build_graph, load_graph, save_graph, BuildConfig};
use rexplore::mcts::{explore, ExplorationConfig};
use rexplore::reward::LexicalOracle;
use rexplore::search::{search_class, search_code, search_method};
use rexplore::KnowledgeGraph;

/// Opaque graph handle.
pub struct RxGraph {
    inner: KnowledgeGraph,
}

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RxStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    GraphError = 3,
    ExploreError = 4,
    SearchError = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(sanitized).unwrap_or_default());
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// is valid until the next API call on the same thread.
#[no_mangle]
pub extern "C" fn rx_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Crate version as a static string; never freed by the caller.
#[no_mangle]
pub extern "C" fn rx_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// # Safety
/// `ptr` must be NULL or a NUL-terminated string valid for reads.
unsafe fn required_str<'a>(ptr: *const c_char) -> Result<&'a str, RxStatus> {
    if ptr.is_null() {
        set_error("argument must not be NULL".to_string());
        return Err(RxStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".to_string());
        RxStatus::InvalidUtf8
    })
}

unsafe fn optional_str<'a>(ptr: *const c_char) -> Result<Option<&'a str>, RxStatus> {
    if ptr.is_null() {
        return Ok(None);
    }
    required_str(ptr).map(Some)
}

fn graph_ref<'a>(graph: *const RxGraph) -> Result<&'a KnowledgeGraph, RxStatus> {
    if graph.is_null() {
        set_error("graph handle must not be NULL".to_string());
        return Err(RxStatus::NullArgument);
    }
    Ok(unsafe { &(*graph).inner })
}

fn return_string(out: *mut *mut c_char, text: String) -> RxStatus {
    if out.is_null() {
        set_error("output pointer must not be NULL".to_string());
        return RxStatus::NullArgument;
    }
    let sanitized = text.replace('\0', " ");
    let cstring = CString::new(sanitized).unwrap_or_default();
    unsafe { *out = cstring.into_raw() };
    RxStatus::Ok
}

fn guarded(body: impl FnOnce() -> RxStatus) -> RxStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            RxStatus::Panic
        }
    }
}

/// Parse a source tree into a graph handle.
///
/// # Safety
/// `root` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rx_graph_build(root: *const c_char, out: *mut *mut RxGraph) -> RxStatus {
    guarded(|| {
        let root = match required_str(root) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("output pointer must not be NULL".to_string());
            return RxStatus::NullArgument;
        }
        match build_graph(Path::new(root), &BuildConfig::default()) {
            Ok(graph) => {
                *out = Box::into_raw(Box::new(RxGraph { inner: graph }));
                RxStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                RxStatus::GraphError
            }
        }
    })
}

/// Load a graph file produced by `rx_graph_save` or the CLI.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rx_graph_load(path: *const c_char, out: *mut *mut RxGraph) -> RxStatus {
    guarded(|| {
        let path = match required_str(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("output pointer must not be NULL".to_string());
            return RxStatus::NullArgument;
        }
        match load_graph(Path::new(path)) {
            Ok(graph) => {
                *out = Box::into_raw(Box::new(RxGraph { inner: graph }));
                RxStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                RxStatus::GraphError
            }
        }
    })
}

/// Write the graph to a file.
///
/// # Safety
/// `graph` must come from this API; `path` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rx_graph_save(graph: *const RxGraph, path: *const c_char) -> RxStatus {
    guarded(|| {
        let g = match graph_ref(graph) {
            Ok(g) => g,
            Err(status) => return status,
        };
        let path = match required_str(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match save_graph(g, Path::new(path)) {
            Ok(()) => RxStatus::Ok,
            Err(e) => {
                set_error(e.to_string());
                RxStatus::GraphError
            }
        }
    })
}

/// Release a graph handle. NULL is a no-op.
///
/// # Safety
/// `graph` must come from this API and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rx_graph_free(graph: *mut RxGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Total node count; zero for a NULL handle.
///
/// # Safety
/// `graph` must be NULL or come from this API.
#[no_mangle]
pub unsafe extern "C" fn rx_graph_node_count(graph: *const RxGraph) -> u64 {
    graph_ref(graph).map(|g| g.node_count() as u64).unwrap_or(0)
}

/// Function-call edge count; zero for a NULL handle.
///
/// # Safety
/// `graph` must be NULL or come from this API.
#[no_mangle]
pub unsafe extern "C" fn rx_graph_call_edge_count(graph: *const RxGraph) -> u64 {
    graph_ref(graph)
        .map(|g| g.call_edge_count() as u64)
        .unwrap_or(0)
}

fn stats_json(graph: &KnowledgeGraph) -> String {
    serde_json::json!({
        "root_path": graph.root_path(),
        "nodes": graph.node_count(),
        "contains_edges": graph.contains_edge_count(),
        "call_edges": graph.call_edge_count(),
        "diagnostics": graph.diagnostics(),
    })
    .to_string()
}

/// Node and edge counts as a JSON string.
///
/// # Safety
/// Pointers must satisfy the usual contracts; free the result with
/// `rx_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rx_graph_stats_json(
    graph: *const RxGraph,
    out: *mut *mut c_char,
) -> RxStatus {
    guarded(|| {
        let g = match graph_ref(graph) {
            Ok(g) => g,
            Err(status) => return status,
        };
        return_string(out, stats_json(g))
    })
}

fn search_result_to_json(results: &[rexplore::SearchResult]) -> String {
    serde_json::to_string(results).expect("search results serialize")
}

/// # Safety
/// Pointers must satisfy the usual contracts; free the result with
/// `rx_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rx_search_class_json(
    graph: *const RxGraph,
    name: *const c_char,
    out: *mut *mut c_char,
) -> RxStatus {
    guarded(|| {
        let g = match graph_ref(graph) {
            Ok(g) => g,
            Err(status) => return status,
        };
        let name = match required_str(name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match search_class(g, name) {
            Ok(results) => return_string(out, search_result_to_json(&results)),
            Err(e) => {
                set_error(e.to_string());
                RxStatus::SearchError
            }
        }
    })
}

/// `scope` may be NULL for an unscoped search.
///
/// # Safety
/// Pointers must satisfy the usual contracts; free the result with
/// `rx_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rx_search_method_json(
    graph: *const RxGraph,
    name: *const c_char,
    scope: *const c_char,
    out: *mut *mut c_char,
) -> RxStatus {
    guarded(|| {
        let g = match graph_ref(graph) {
            Ok(g) => g,
            Err(status) => return status,
        };
        let name = match required_str(name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let scope = match optional_str(scope) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match search_method(g, name, scope) {
            Ok(results) => return_string(out, search_result_to_json(&results)),
            Err(e) => {
                set_error(e.to_string());
                RxStatus::SearchError
            }
        }
    })
}

/// # Safety
/// Pointers must satisfy the usual contracts; free the result with
/// `rx_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rx_search_code_json(
    graph: *const RxGraph,
    fragment: *const c_char,
    out: *mut *mut c_char,
) -> RxStatus {
    guarded(|| {
        let g = match graph_ref(graph) {
            Ok(g) => g,
            Err(status) => return status,
        };
        let fragment = match required_str(fragment) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match search_code(g, fragment) {
            Ok(results) => return_string(out, search_result_to_json(&results)),
            Err(e) => {
                set_error(e.to_string());
                RxStatus::SearchError
            }
        }
    })
}

/// Run exploration with the deterministic lexical oracle and return the
/// report as JSON. Pass zero for `max_iterations`, `max_seconds` or
/// `reward_threshold` to keep the defaults (600 / 300 s / 6).
///
/// # Safety
/// Pointers must satisfy the usual contracts; free the result with
/// `rx_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rx_explore_lexical_json(
    graph: *const RxGraph,
    issue: *const c_char,
    max_iterations: u64,
    max_seconds: f64,
    reward_threshold: u8,
    out: *mut *mut c_char,
) -> RxStatus {
    guarded(|| {
        let g = match graph_ref(graph) {
            Ok(g) => g,
            Err(status) => return status,
        };
        let issue = match required_str(issue) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mut config = ExplorationConfig::default();
        if max_iterations > 0 {
            config.max_iterations = max_iterations;
        }
        if max_seconds > 0.0 {
            config.max_seconds = max_seconds;
        }
        if reward_threshold > 0 {
            config.reward_threshold = reward_threshold;
        }
        let mut oracle = LexicalOracle;
        match explore(g, issue, &mut oracle, config) {
            Ok(report) => return_string(out, report.to_json()),
            Err(e) => {
                set_error(e.to_string());
                RxStatus::ExploreError
            }
        }
    })
}

/// Free a string returned by this API. NULL is a no-op.
///
/// # Safety
/// `s` must come from this API and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
