//! C ABI over the revineq library.
//!
//! Every fallible function returns a `RevineqStatus` whose values match the
//! exit codes of the command-line tool. On failure the message is available
//! from `revineq_last_error_message` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use revineq::cli::{self, Command, RunConfig};
use revineq::error::{Error, ErrorClass, Origin};
use revineq::group::{GroupPoint, HomogeneousGroup, NormKind, QuasiNorm, Weight};
use revineq::inequalities::verify_reverse_hardy;
use revineq::quadrature::{sphere_measure, QuadratureSpec, Scheme};
use revineq::trials::{make_profile, FamilyTag, TrialFamily};

/// Status codes. 0 to 3 coincide with the exit codes of the CLI.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RevineqStatus {
    Ok = 0,
    /// An inequality or self-check failed its margin.
    MarginFailed = 1,
    /// Invalid argument, configuration or null pointer.
    InvalidInput = 2,
    /// Divergent, degenerate or non-finite computation.
    Numerical = 3,
    /// A panic was caught at the boundary.
    Internal = 4,
}

/// Opaque handle to a homogeneous group with a quasi-norm.
pub struct RevineqGeometry {
    norm: QuasiNorm,
}

/// Quadrature settings; `scheme` is 0 for Monte Carlo and 1 for the tensor grid.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RevineqQuadrature {
    pub scheme: u32,
    pub samples: usize,
    pub nodes_per_axis: usize,
    pub seed: u64,
}

/// Flat copy of a verification report.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RevineqReport {
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub analytic_constant: f64,
    pub margin: f64,
    pub combined_stderr: f64,
    pub sphere_measure: f64,
    pub sphere_stderr: f64,
    pub samples_used: u64,
    pub pass: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

const ORIGIN: Origin = Origin::new("ffi", "call");

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> RevineqStatus {
    match cli::exit_code(err) {
        cli::EXIT_NUMERICAL => RevineqStatus::Numerical,
        _ => match err.class() {
            ErrorClass::Input => RevineqStatus::InvalidInput,
            ErrorClass::Numerical => RevineqStatus::Numerical,
        },
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<RevineqStatus, Error>) -> RevineqStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(e)) => {
            let status = status_of(&e);
            set_error(e.to_string());
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("[ffi] internal error: {msg}"));
            RevineqStatus::Internal
        }
    }
}

fn null_error(what: &str) -> Error {
    Error::parameter(ORIGIN, format!("{what} is null"))
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Error> {
    if s.is_null() {
        return Err(null_error(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Error::parameter(ORIGIN, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `g` is null or a handle from `revineq_geometry_new*` not yet freed.
unsafe fn geometry<'a>(g: *const RevineqGeometry) -> Result<&'a RevineqGeometry, Error> {
    g.as_ref().ok_or_else(|| null_error("geometry"))
}

/// # Safety
/// `x` is null or points to `len` readable doubles.
unsafe fn point(geo: &RevineqGeometry, x: *const f64, len: usize) -> Result<GroupPoint, Error> {
    if x.is_null() {
        return Err(null_error("point"));
    }
    let dim = geo.norm.dim();
    if len != dim {
        return Err(Error::Shape {
            origin: ORIGIN,
            expected: dim,
            actual: len,
        });
    }
    GroupPoint::new(std::slice::from_raw_parts(x, len).to_vec())
}

fn parse_norm(name: &str) -> Result<NormKind, Error> {
    match name {
        "euclidean" => Ok(NormKind::Euclidean),
        "koranyi" => Ok(NormKind::Koranyi),
        "cygan" => Ok(NormKind::Cygan),
        "anisotropic" => Ok(NormKind::Anisotropic),
        _ => Err(Error::parameter(ORIGIN, format!("unknown norm `{name}`"))),
    }
}

fn spec_of(q: &RevineqQuadrature) -> Result<QuadratureSpec, Error> {
    let scheme = match q.scheme {
        0 => Scheme::MonteCarlo,
        1 => Scheme::TensorGrid,
        s => return Err(Error::parameter(ORIGIN, format!("unknown quadrature scheme {s}"))),
    };
    let spec = QuadratureSpec {
        scheme,
        samples: q.samples,
        nodes_per_axis: q.nodes_per_axis,
        seed: q.seed,
        ..QuadratureSpec::default()
    };
    spec.validate()?;
    Ok(spec)
}

fn write_out<T>(out: *mut T, value: T) -> Result<(), Error> {
    if out.is_null() {
        return Err(null_error("output pointer"));
    }
    // SAFETY: checked non-null; the caller provides writable storage.
    unsafe { out.write(value) };
    Ok(())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn revineq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn revineq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default quadrature settings.
#[no_mangle]
pub extern "C" fn revineq_quadrature_default() -> RevineqQuadrature {
    let d = QuadratureSpec::default();
    RevineqQuadrature {
        scheme: 0,
        samples: d.samples,
        nodes_per_axis: d.nodes_per_axis,
        seed: d.seed,
    }
}

/// Creates `abelian` R^n or `heisenberg` H^n with the named norm; a null
/// `norm` selects euclidean or koranyi respectively.
///
/// # Safety
/// `group` and `norm` are null or NUL-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn revineq_geometry_new(
    group: *const c_char,
    n: usize,
    norm: *const c_char,
    out: *mut *mut RevineqGeometry,
) -> RevineqStatus {
    guard(|| {
        let group = match read_str(group, "group")? {
            "abelian" => HomogeneousGroup::abelian(n)?,
            "heisenberg" => HomogeneousGroup::heisenberg(n)?,
            other => return Err(Error::parameter(ORIGIN, format!("unknown group `{other}`"))),
        };
        let kind = if norm.is_null() {
            if group.has_unit_weights() {
                NormKind::Euclidean
            } else {
                NormKind::Koranyi
            }
        } else {
            parse_norm(read_str(norm, "norm")?)?
        };
        let norm = QuasiNorm::new(Arc::new(group), kind)?;
        write_out(out, Box::into_raw(Box::new(RevineqGeometry { norm })))?;
        Ok(RevineqStatus::Ok)
    })
}

/// Creates the graded abelian group with weights `num[i] / den[i]` and the
/// anisotropic gauge.
///
/// # Safety
/// `num` and `den` point to `len` readable values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn revineq_geometry_new_graded(
    num: *const u64,
    den: *const u64,
    len: usize,
    out: *mut *mut RevineqGeometry,
) -> RevineqStatus {
    guard(|| {
        if num.is_null() || den.is_null() {
            return Err(null_error("weights"));
        }
        let num = std::slice::from_raw_parts(num, len);
        let den = std::slice::from_raw_parts(den, len);
        let weights = num
            .iter()
            .zip(den)
            .map(|(&a, &b)| Weight::new(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        let group = HomogeneousGroup::graded(weights)?;
        let norm = QuasiNorm::new(Arc::new(group), NormKind::Anisotropic)?;
        write_out(out, Box::into_raw(Box::new(RevineqGeometry { norm })))?;
        Ok(RevineqStatus::Ok)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `g` is null or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn revineq_geometry_free(g: *mut RevineqGeometry) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Topological dimension N of the chart, or 0 for a null handle.
///
/// # Safety
/// `g` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn revineq_geometry_dim(g: *const RevineqGeometry) -> usize {
    g.as_ref().map_or(0, |g| g.norm.dim())
}

/// Homogeneous dimension Q, or NaN for a null handle.
///
/// # Safety
/// `g` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn revineq_geometry_homogeneous_dimension(g: *const RevineqGeometry) -> f64 {
    g.as_ref().map_or(f64::NAN, |g| g.norm.q())
}

/// `|x|`.
///
/// # Safety
/// `x` points to `len` doubles and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn revineq_quasi_norm(
    g: *const RevineqGeometry,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RevineqStatus {
    guard(|| {
        let geo = geometry(g)?;
        let v = geo.norm.eval(&point(geo, x, len)?)?;
        write_out(out, v)?;
        Ok(RevineqStatus::Ok)
    })
}

/// `out = D_s(x)`; `out` may alias `x`.
///
/// # Safety
/// `x` points to `len` doubles and `out` to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn revineq_dilate(
    g: *const RevineqGeometry,
    s: f64,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RevineqStatus {
    guard(|| {
        let geo = geometry(g)?;
        let y = geo.norm.group().dilate(s, &point(geo, x, len)?)?;
        copy_point(&y, out)
    })
}

/// `out = x y`; `out` may alias either input.
///
/// # Safety
/// `x`, `y` point to `len` doubles and `out` to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn revineq_group_mul(
    g: *const RevineqGeometry,
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> RevineqStatus {
    guard(|| {
        let geo = geometry(g)?;
        let z = geo.norm.group().mul(&point(geo, x, len)?, &point(geo, y, len)?)?;
        copy_point(&z, out)
    })
}

fn copy_point(p: &GroupPoint, out: *mut f64) -> Result<RevineqStatus, Error> {
    if out.is_null() {
        return Err(null_error("output pointer"));
    }
    // SAFETY: checked non-null; the caller provides `len` writable doubles.
    unsafe { ptr::copy(p.coords().as_ptr(), out, p.dim()) };
    Ok(RevineqStatus::Ok)
}

/// Measure of the unit quasi-sphere with its standard error.
///
/// # Safety
/// `quad`, `value` and `stderr` are valid pointers.
#[no_mangle]
pub unsafe extern "C" fn revineq_sphere_measure(
    g: *const RevineqGeometry,
    quad: *const RevineqQuadrature,
    value: *mut f64,
    stderr: *mut f64,
) -> RevineqStatus {
    guard(|| {
        let geo = geometry(g)?;
        let spec = spec_of(quad.as_ref().ok_or_else(|| null_error("quadrature"))?)?;
        let m = sphere_measure(&geo.norm, &spec)?;
        write_out(value, m.value)?;
        write_out(stderr, m.stderr)?;
        Ok(RevineqStatus::Ok)
    })
}

/// Reverse Hardy inequality for the one-parameter trial family `family`
/// (`exp_decay`, `power_decay`, `gaussian`, `smooth_bump`) at `param`.
/// Returns `Ok` on pass and `MarginFailed` otherwise; `out` is filled in
/// both cases.
///
/// # Safety
/// `family` is a NUL-terminated string; `quad` and `out` are valid pointers.
#[no_mangle]
pub unsafe extern "C" fn revineq_verify_reverse_hardy(
    g: *const RevineqGeometry,
    family: *const c_char,
    param: f64,
    p: f64,
    quad: *const RevineqQuadrature,
    out: *mut RevineqReport,
) -> RevineqStatus {
    guard(|| {
        let geo = geometry(g)?;
        let tag: FamilyTag = read_str(family, "family")?.parse()?;
        let spec = spec_of(quad.as_ref().ok_or_else(|| null_error("quadrature"))?)?;
        let f = make_profile(&TrialFamily::new(tag), &[param])?;
        let r = verify_reverse_hardy(&f, p, &geo.norm, &spec)?;
        write_out(
            out,
            RevineqReport {
                lhs: r.lhs,
                rhs: r.rhs,
                lhs_stderr: r.lhs_stderr,
                rhs_stderr: r.rhs_stderr,
                ratio: r.ratio,
                ratio_stderr: r.ratio_stderr,
                analytic_constant: r.analytic_constant,
                margin: r.margin(),
                combined_stderr: r.combined_stderr(),
                sphere_measure: r.sphere_measure,
                sphere_stderr: r.sphere_stderr,
                samples_used: r.samples_used as u64,
                pass: r.pass(),
            },
        )?;
        Ok(if r.pass() { RevineqStatus::Ok } else { RevineqStatus::MarginFailed })
    })
}

/// Runs a CLI command (`verify`, `estimate`, `sweep`, `axioms`) on a JSON
/// run configuration. The report is returned through `report_json` (free it
/// with `revineq_string_free`); when `out_dir` is non-null every artifact is
/// also written there. A negative `seed` keeps the configured seeds.
///
/// # Safety
/// `config_json` and `command` are NUL-terminated strings, `out_dir` is null
/// or one, and `report_json` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn revineq_run_config_json(
    config_json: *const c_char,
    command: *const c_char,
    seed: i64,
    out_dir: *const c_char,
    report_json: *mut *mut c_char,
) -> RevineqStatus {
    guard(|| {
        if !report_json.is_null() {
            report_json.write(ptr::null_mut());
        }
        let text = read_str(config_json, "config_json")?;
        let command = match read_str(command, "command")? {
            "verify" => Command::Verify,
            "estimate" => Command::Estimate,
            "sweep" => Command::Sweep,
            "axioms" => Command::Axioms,
            other => return Err(Error::parameter(ORIGIN, format!("unknown command `{other}`"))),
        };
        let seed = u64::try_from(seed).ok();
        let config = RunConfig::from_json_str(text)?.resolve(seed)?;
        let artifacts = cli::run(command, &config)?;
        if !out_dir.is_null() {
            artifacts.write(Path::new(read_str(out_dir, "out_dir")?))?;
        }
        if !report_json.is_null() {
            let c = CString::new(artifacts.report_json).map_err(|_| Error::evaluation(ORIGIN, "report has NUL"))?;
            report_json.write(c.into_raw());
        }
        Ok(match artifacts.exit_code {
            cli::EXIT_PASS => RevineqStatus::Ok,
            cli::EXIT_MARGIN => RevineqStatus::MarginFailed,
            cli::EXIT_CONFIG => RevineqStatus::InvalidInput,
            _ => RevineqStatus::Numerical,
        })
    })
}

/// Frees a string returned by this library; null is ignored.
///
/// # Safety
/// `s` is null or a string from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn revineq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
