//! C ABI over `relaycache`.
//!
//! Topologies are opaque heap handles created by `rc_topology_*` constructors
//! and released with `rc_topology_free`. Every fallible call returns an
//! `RcStatus`; on failure `rc_last_error` yields a message for the calling
//! thread, valid until that thread's next call into the library.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use relaycache::baselines::{self, Baseline};
use relaycache::dynamic::solve_dynamic;
use relaycache::rlnc::verify_end_to_end;
use relaycache::routing::{compute_loads, solve_delivery_time, solve_maxlink};
use relaycache::{Error, PlacementConfig, Topology};

/// Opaque topology handle.
pub struct RcTopology {
    inner: Topology,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Infeasible = 5,
    Solver = 6,
    Unsupported = 7,
    BufferTooSmall = 8,
    DecodeFailed = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcBaseline {
    Mds = 0,
    Mgl = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RcStatus {
    match e {
        Error::Io { .. } => RcStatus::Io,
        Error::Parse { .. } | Error::Csv(_) => RcStatus::Parse,
        Error::Unreachable { .. } | Error::InfeasibleAllocation(_) | Error::NoAllocation(_) => RcStatus::Infeasible,
        Error::SolverStalled(_) | Error::MalformedProblem(_) => RcStatus::Solver,
        Error::UnsupportedTopology(_) | Error::UnsupportedMemory { .. } => RcStatus::Unsupported,
        Error::DynamicStep { source, .. } => status_of(source),
        _ => RcStatus::InvalidArgument,
    }
}

struct Failure(RcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RcStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, clearing the last error on success and recording it otherwise.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RcStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            RcStatus::Panic
        }
    }
}

unsafe fn topology_ref<'a>(topology: *const RcTopology) -> Result<&'a Topology, Failure> {
    topology.as_ref().map(|t| &t.inner).ok_or_else(|| null("topology"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn publish(out: *mut *mut RcTopology, topology: Topology) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(RcTopology { inner: topology })), "out")
}

/// Copies `loads` into a caller buffer of `len` doubles; `loads` may be null
/// to skip the copy.
unsafe fn write_loads(loads: &[f64], out: *mut f64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Ok(());
    }
    if len < loads.len() {
        return Err(Failure(
            RcStatus::BufferTooSmall,
            format!("load buffer holds {len} values, {} needed", loads.len()),
        ));
    }
    ptr::copy_nonoverlapping(loads.as_ptr(), out, loads.len());
    Ok(())
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_string)
        .map_err(|_| Failure(RcStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

fn placement(topology: &Topology, replication: usize, file_bits: u64) -> Result<PlacementConfig, Failure> {
    let k = topology.num_users();
    Ok(PlacementConfig::with_replication(k, k, replication, file_bits)?)
}

/// Message describing the last failed call on this thread, or null.
#[no_mangle]
pub extern "C" fn rc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Random topology: each of `num_users` users picks `degree` of `num_relays`
/// relays uniformly without replacement.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_random(
    num_relays: usize,
    num_users: usize,
    degree: usize,
    seed: u64,
    out: *mut *mut RcTopology,
) -> RcStatus {
    guard(|| publish(out, Topology::random_uniform(num_relays, num_users, degree, seed)?))
}

/// Combination network: one user per `degree`-subset of the relays.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_combination(
    num_relays: usize,
    degree: usize,
    out: *mut *mut RcTopology,
) -> RcStatus {
    guard(|| publish(out, Topology::combination(num_relays, degree)?))
}

/// Builds a topology from a flat list: user `k` connects to the 0-based
/// relays `relays[offsets[k]..offsets[k + 1]]`; `offsets` has
/// `num_users + 1` entries.
///
/// # Safety
/// `offsets` must point to `num_users + 1` values and `relays` to
/// `offsets[num_users]` values.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_from_lists(
    num_relays: usize,
    num_users: usize,
    offsets: *const usize,
    relays: *const usize,
    out: *mut *mut RcTopology,
) -> RcStatus {
    guard(|| {
        if offsets.is_null() {
            return Err(null("offsets"));
        }
        let offsets = std::slice::from_raw_parts(offsets, num_users + 1);
        let total = offsets[num_users];
        if total > 0 && relays.is_null() {
            return Err(null("relays"));
        }
        let flat = if total == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(relays, total)
        };
        let mut lists = Vec::with_capacity(num_users);
        for w in offsets.windows(2) {
            if w[0] > w[1] || w[1] > total {
                return Err(Failure(RcStatus::InvalidArgument, "offsets not monotone".into()));
            }
            lists.push(flat[w[0]..w[1]].to_vec());
        }
        publish(out, Topology::new(num_relays, lists)?)
    })
}

/// Reads a topology JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_load(path: *const c_char, out: *mut *mut RcTopology) -> RcStatus {
    guard(|| {
        let path = path_arg(path)?;
        publish(out, Topology::load(path)?)
    })
}

/// Writes a topology JSON file.
///
/// # Safety
/// `topology` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_save(topology: *const RcTopology, path: *const c_char) -> RcStatus {
    guard(|| {
        let t = topology_ref(topology)?;
        Ok(t.save(path_arg(path)?)?)
    })
}

/// Sets the fronthaul and edge link capacities.
///
/// # Safety
/// `topology` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_set_capacities(topology: *mut RcTopology, fronthaul: f64, edge: f64) -> RcStatus {
    guard(|| {
        let handle = topology.as_mut().ok_or_else(|| null("topology"))?;
        handle.inner = handle.inner.clone().with_capacities(fronthaul, edge)?;
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `topology` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_free(topology: *mut RcTopology) {
    if !topology.is_null() {
        drop(Box::from_raw(topology));
    }
}

/// # Safety
/// `topology` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_num_relays(topology: *const RcTopology) -> usize {
    topology.as_ref().map_or(0, |t| t.inner.num_relays())
}

/// # Safety
/// `topology` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_num_users(topology: *const RcTopology) -> usize {
    topology.as_ref().map_or(0, |t| t.inner.num_users())
}

/// Number of relays serving 0-based `user`, or 0 when out of range.
///
/// # Safety
/// `topology` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_topology_user_degree(topology: *const RcTopology, user: usize) -> usize {
    match topology.as_ref() {
        Some(t) if user < t.inner.num_users() => t.inner.relays_of(user).len(),
        _ => 0,
    }
}

/// Minimum max-link load in message units for replication `t`. Per-relay
/// loads are copied into `loads` (capacity `loads_len`) unless it is null.
///
/// # Safety
/// Pointers must be valid; `loads` must hold `loads_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_solve_maxlink(
    topology: *const RcTopology,
    replication: usize,
    out_objective: *mut f64,
    loads: *mut f64,
    loads_len: usize,
) -> RcStatus {
    guard(|| {
        let t = topology_ref(topology)?;
        let p = placement(t, replication, 1)?;
        let (z, alloc) = solve_maxlink(t, &p.multicast_groups())?;
        write_loads(&alloc.relay_loads(), loads, loads_len)?;
        write_out(out_objective, z, "out_objective")
    })
}

/// Minimum delivery time in channel uses for files of `file_bits` bits,
/// using the handle's link capacities.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rc_solve_delivery_time(
    topology: *const RcTopology,
    replication: usize,
    file_bits: u64,
    out_time: *mut f64,
) -> RcStatus {
    guard(|| {
        let t = topology_ref(topology)?;
        let p = placement(t, replication, file_bits)?;
        let (time, _) = solve_delivery_time(t, &p.multicast_groups(), &p)?;
        write_out(out_time, time, "out_time")
    })
}

/// Grouped sequential approximation with `num_groups` groups.
///
/// # Safety
/// Pointers must be valid; `loads` must hold `loads_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_solve_dynamic(
    topology: *const RcTopology,
    replication: usize,
    num_groups: usize,
    seed: u64,
    out_objective: *mut f64,
    loads: *mut f64,
    loads_len: usize,
) -> RcStatus {
    guard(|| {
        let t = topology_ref(topology)?;
        let p = placement(t, replication, 1)?;
        let sol = solve_dynamic(t, &p.multicast_groups(), num_groups, seed)?;
        write_loads(&sol.relay_loads, loads, loads_len)?;
        write_out(out_objective, sol.objective, "out_objective")
    })
}

/// Max-link load of a fixed baseline allocation; requires every user to
/// have exactly `degree` relays.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rc_baseline_maxlink(
    topology: *const RcTopology,
    scheme: RcBaseline,
    degree: usize,
    replication: usize,
    out_objective: *mut f64,
) -> RcStatus {
    guard(|| {
        let t = topology_ref(topology)?;
        let p = placement(t, replication, 1)?;
        let b = match scheme {
            RcBaseline::Mds => Baseline::Mds,
            RcBaseline::Mgl => Baseline::Mgl,
        };
        let alloc = baselines::allocation(b, t, &p.multicast_groups(), degree)?;
        let report = compute_loads(t, &alloc, &p);
        write_out(out_objective, report.max_relay_load(), "out_objective")
    })
}

/// Delivers random files of `file_bytes` bytes over the LP allocation with
/// `packets` coded packets per message and checks every user's file.
/// Returns `RC_STATUS_DECODE_FAILED` if any user could not decode.
///
/// # Safety
/// Pointers must be valid; `out_resamples` may be null.
#[no_mangle]
pub unsafe extern "C" fn rc_verify(
    topology: *const RcTopology,
    replication: usize,
    packets: usize,
    file_bytes: usize,
    seed: u64,
    out_resamples: *mut usize,
) -> RcStatus {
    guard(|| {
        let t = topology_ref(topology)?;
        let p = placement(t, replication, (file_bytes as u64).max(1) * 8)?;
        let (_, alloc) = solve_maxlink(t, &p.multicast_groups())?;
        let report = verify_end_to_end(t, &p, &p.worst_case_demands(), &alloc, packets, file_bytes, seed)?;
        if !out_resamples.is_null() {
            out_resamples.write(report.resample_events);
        }
        if report.all_decoded() {
            Ok(())
        } else {
            Err(Failure(RcStatus::DecodeFailed, "some users could not decode".into()))
        }
    })
}
