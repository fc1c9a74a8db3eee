//! C ABI for the sketching library.
//!
//! Complex arrays are passed as interleaved `(re, im)` doubles in row-major
//! order, so an `n×d` complex matrix occupies `2·n·d` doubles. Every fallible
//! function returns an [`NsStatus`]; on failure a one-line message is kept in
//! thread-local storage and can be read with [`ns_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DMatrix;
use num_complex::Complex64;

use nonpsd_sketch::linalg::{CMat, CVec};
use nonpsd_sketch::lpreg::{sketch_and_solve, SketchSolveParams};
use nonpsd_sketch::optim::{newton_cg, newton_mr, trust_region, HessianScheme, OptConfig, OptStatus};
use nonpsd_sketch::problem::{FiniteSumProblem, Loss};
use nonpsd_sketch::sampling::{approx_leverage_scores, exact_leverage_scores, ApproxParams};
use nonpsd_sketch::vmv::TensorSketchState;
use nonpsd_sketch::SketchError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    InvalidInput = 1,
    RankDeficient = 2,
    Budget = 3,
    Parse = 4,
    Config = 5,
    Io = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsLoss {
    Nlls = 0,
    Tukey = 1,
    Quadratic = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsMethod {
    NewtonCg = 0,
    NewtonMr = 1,
    TrustRegion = 2,
}

/// Outcome of [`ns_optimize`]. `status` follows the order converged,
/// max iterations, budget exhausted, line search failed, radius underflow.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NsOptSummary {
    pub status: u32,
    pub iterations: usize,
    pub oracle_calls: f64,
    pub final_objective: f64,
    pub final_grad_norm: f64,
}

/// Opaque finite-sum problem.
pub struct NsProblem {
    inner: FiniteSumProblem,
}

/// Opaque TensorSketch accumulator.
pub struct NsTensorSketch {
    inner: TensorSketchState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &SketchError) -> NsStatus {
    match e {
        SketchError::InvalidInput(_) => NsStatus::InvalidInput,
        SketchError::RankDeficient(_) => NsStatus::RankDeficient,
        SketchError::Budget(_) => NsStatus::Budget,
        SketchError::Parse { .. } => NsStatus::Parse,
        SketchError::Config(_) => NsStatus::Config,
        SketchError::Io(_) => NsStatus::Io,
    }
}

enum Failure {
    Lib(SketchError),
    Null(&'static str),
}

impl From<SketchError> for Failure {
    fn from(e: SketchError) -> Self {
        Failure::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            NsStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(format!("{}: {}", e.code(), e.to_string().replace('\n', " ")));
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("E_NULL_POINTER: {name} is null"));
            NsStatus::NullPointer
        }
        Err(_) => {
            set_error("E_PANIC: internal panic".to_string());
            NsStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, name: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

fn complex_entries(raw: &[f64]) -> Vec<Complex64> {
    raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

unsafe fn cmat_arg(ptr: *const f64, rows: usize, cols: usize, name: &'static str) -> Result<CMat, Failure> {
    let raw = slice(ptr, 2 * rows * cols, name)?;
    Ok(CMat::from_row_major(rows, cols, complex_entries(raw))?)
}

unsafe fn cvec_arg(ptr: *const f64, len: usize, name: &'static str) -> Result<CVec, Failure> {
    Ok(CVec::new(complex_entries(slice(ptr, 2 * len, name)?)))
}

fn write_complex(out: &mut [f64], v: &[Complex64]) {
    for (dst, z) in out.chunks_exact_mut(2).zip(v) {
        dst[0] = z.re;
        dst[1] = z.im;
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn ns_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Exact leverage scores of a complex `rows×cols` matrix into `out[rows]`.
///
/// # Safety
/// `b` must hold `2·rows·cols` doubles and `out` `rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_leverage_scores(b: *const f64, rows: usize, cols: usize, out: *mut f64) -> NsStatus {
    guard(|| {
        let m = cmat_arg(b, rows, cols, "b")?;
        let out = slice_mut(out, rows, "out")?;
        out.copy_from_slice(&exact_leverage_scores(&m)?);
        Ok(())
    })
}

/// Approximate leverage scores; zero `embed_rows` or `jl_cols` selects the default.
///
/// # Safety
/// As for [`ns_leverage_scores`].
#[no_mangle]
pub unsafe extern "C" fn ns_approx_leverage_scores(
    b: *const f64,
    rows: usize,
    cols: usize,
    embed_rows: usize,
    jl_cols: usize,
    seed: u64,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        let m = cmat_arg(b, rows, cols, "b")?;
        let out = slice_mut(out, rows, "out")?;
        let mut params = ApproxParams::defaults(rows, cols);
        if embed_rows > 0 {
            params.embed_rows = embed_rows;
        }
        if jl_cols > 0 {
            params.jl_cols = jl_cols;
        }
        out.copy_from_slice(&approx_leverage_scores(&m, params, seed)?);
        Ok(())
    })
}

/// Creates a real finite-sum problem from a row-major `n×d` matrix and `n` labels.
///
/// # Safety
/// `a` must hold `n·d` doubles, `labels` `n` doubles, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_problem_new(
    a: *const f64,
    n: usize,
    d: usize,
    labels: *const f64,
    loss: NsLoss,
    lambda: f64,
    out: *mut *mut NsProblem,
) -> NsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let raw = slice(a, n * d, "a")?;
        let labels = slice(labels, n, "labels")?.to_vec();
        let loss = match loss {
            NsLoss::Nlls => Loss::NllsClassification,
            NsLoss::Tukey => Loss::TukeyBiweight,
            NsLoss::Quadratic => Loss::Quadratic,
        };
        let inner = FiniteSumProblem::new(DMatrix::from_row_slice(n, d, raw), labels, loss, lambda)?;
        *out = Box::into_raw(Box::new(NsProblem { inner }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from [`ns_problem_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ns_problem_free(p: *mut NsProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Runs one optimizer from `x = 0`. `scheme` is a name such as `"LS"`,
/// `"RN-MX"`, `"Full"` or `"LS-Det(0.5)"`. The final iterate is written to
/// `x_out[d]` when non-null.
///
/// # Safety
/// `p` must be a live problem, `scheme` a NUL-terminated string, `x_out`
/// null or valid for `d` doubles, `summary` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ns_optimize(
    p: *const NsProblem,
    method: NsMethod,
    scheme: *const c_char,
    sample_size: usize,
    max_outer: usize,
    grad_tol: f64,
    seed: u64,
    x_out: *mut f64,
    summary: *mut NsOptSummary,
) -> NsStatus {
    guard(|| {
        let problem = &p.as_ref().ok_or(Failure::Null("problem"))?.inner;
        if scheme.is_null() {
            return Err(Failure::Null("scheme"));
        }
        let name = CStr::from_ptr(scheme).to_string_lossy();
        let scheme = HessianScheme::parse(&name)
            .ok_or_else(|| SketchError::Config(format!("unknown scheme {name:?}")))?;
        let cfg = OptConfig { scheme, sample_size, max_outer, grad_tol, seed, ..OptConfig::default() };
        let trace = match method {
            NsMethod::NewtonCg => newton_cg(problem, &cfg),
            NsMethod::NewtonMr => newton_mr(problem, &cfg),
            NsMethod::TrustRegion => trust_region(problem, &cfg),
        }?;
        if !x_out.is_null() {
            std::slice::from_raw_parts_mut(x_out, problem.d()).copy_from_slice(&trace.x);
        }
        if let Some(s) = summary.as_mut() {
            let last = trace.records.last();
            *s = NsOptSummary {
                status: match trace.status {
                    OptStatus::Converged => 0,
                    OptStatus::MaxIterations => 1,
                    OptStatus::BudgetExhausted => 2,
                    OptStatus::LineSearchFailed => 3,
                    OptStatus::RadiusUnderflow => 4,
                },
                iterations: last.map_or(0, |r| r.iter),
                oracle_calls: last.map_or(0.0, |r| r.oracle_calls),
                final_objective: last.map_or(f64::NAN, |r| r.objective),
                final_grad_norm: last.map_or(f64::NAN, |r| r.grad_norm),
            };
        }
        Ok(())
    })
}

/// Sketch-and-solve complex ℓp regression `min ‖Ax − b‖_p`; pass
/// `p = INFINITY` for the max norm. `size` is the block height `t` for finite
/// `p` and the sign count `s` for `p = ∞`. Writes `xhat[d]` (interleaved).
///
/// # Safety
/// `a` must hold `2·n·d` doubles, `b` `2·n`, `xhat` `2·d`.
#[no_mangle]
pub unsafe extern "C" fn ns_lp_sketch_solve(
    a: *const f64,
    n: usize,
    d: usize,
    b: *const f64,
    p: f64,
    size: usize,
    seed: u64,
    xhat: *mut f64,
) -> NsStatus {
    guard(|| {
        let am = cmat_arg(a, n, d, "a")?;
        let bv = cvec_arg(b, n, "b")?;
        let out = slice_mut(xhat, 2 * d, "xhat")?;
        let r = sketch_and_solve(&am, &bv, p, &SketchSolveParams::new(size, seed))?;
        write_complex(out, r.xhat.as_slice());
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_tensor_sketch_new(k: usize, seed: u64, out: *mut *mut NsTensorSketch) -> NsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let inner = TensorSketchState::new(k, seed)?;
        *out = Box::into_raw(Box::new(NsTensorSketch { inner }));
        Ok(())
    })
}

/// Adds the pair `(a, b)`, both complex of length `d`.
///
/// # Safety
/// `ts` must be live; `a` and `b` must hold `2·d` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_tensor_sketch_ingest(
    ts: *mut NsTensorSketch,
    a: *const f64,
    b: *const f64,
    d: usize,
) -> NsStatus {
    guard(|| {
        let ts = ts.as_mut().ok_or(Failure::Null("sketch"))?;
        ts.inner.ingest(&cvec_arg(a, d, "a")?, &cvec_arg(b, d, "b")?)?;
        Ok(())
    })
}

/// Estimates `uᵀ(AᵀB)v` from the ingested pairs into `out[2]` as `(re, im)`.
///
/// # Safety
/// `ts` must be live; `u` and `v` must hold `2·d` doubles, `out` 2 doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_tensor_sketch_estimate(
    ts: *const NsTensorSketch,
    u: *const f64,
    v: *const f64,
    d: usize,
    out: *mut f64,
) -> NsStatus {
    guard(|| {
        let ts = ts.as_ref().ok_or(Failure::Null("sketch"))?;
        let out = slice_mut(out, 2, "out")?;
        let z = ts.inner.estimate(&cvec_arg(u, d, "u")?, &cvec_arg(v, d, "v")?)?;
        write_complex(out, &[z]);
        Ok(())
    })
}

/// # Safety
/// `ts` must come from [`ns_tensor_sketch_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ns_tensor_sketch_free(ts: *mut NsTensorSketch) {
    if !ts.is_null() {
        drop(Box::from_raw(ts));
    }
}
