//! C ABI over `rmt_lab`.
//!
//! Every fallible call returns an [`RmtStatus`]; on failure the message is kept per
//! thread and read back with [`rmt_last_error_message`]. Spectra and trajectories are
//! opaque heap handles released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rmt_lab::dyson::{simulate, Family, InitialCondition, SdeConfig, TrajectoryRecord};
use rmt_lab::ensembles::{eigenvalues_complex, eigenvalues_hermitian, sample_ginibre, sample_goe, sample_gue, sample_wishart, Spectrum};
use rmt_lab::kernels::{gue_kernel, gumbel_rescale, hole_probability};
use rmt_lab::ldp::{f_constant, selberg_log_z};
use rmt_lab::measures::{bl_distance, semicircle_stieltjes, EmpiricalMeasure, ReferenceLaw, SignedAtoms};
use rmt_lab::rng::RngStream;
use rmt_lab::{Complex64, Error};

const REFERENCE_CELLS: usize = 4096;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    BufferTooSmall = 3,
    /// Input outside the domain where the quantity is defined or supported.
    Domain = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtEnsemble {
    Gue = 0,
    Goe = 1,
    Ginibre = 2,
    Wishart = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtLaw {
    /// Semicircle on [−2, 2].
    Semicircle = 0,
    /// Marchenko–Pastur; `param` is the ratio c.
    MarchenkoPastur = 1,
    /// Stationary OU law; `param` is θ.
    OuLimit = 2,
}

/// Opaque eigenvalue sample.
pub struct RmtSpectrum {
    inner: Spectrum,
}

/// Opaque particle trajectory.
pub struct RmtTrajectory {
    inner: TrajectoryRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> RmtStatus {
    if err.is_numerical() {
        return RmtStatus::Numerical;
    }
    match err {
        Error::InvalidArgument(_) | Error::Io(_) => RmtStatus::InvalidArgument,
        _ => RmtStatus::Domain,
    }
}

/// Run `f`, translating errors and panics to a status and recording the message.
fn guard(f: impl FnOnce() -> Result<(), (RmtStatus, String)>) -> RmtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            RmtStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            RmtStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (RmtStatus, String)>;
}

impl<T> IntoFfi<T> for rmt_lab::Result<T> {
    fn ffi(self) -> Result<T, (RmtStatus, String)> {
        self.map_err(|e| (status_of(&e), format!("{}: {e}", e.kind())))
    }
}

fn null(what: &str) -> (RmtStatus, String) {
    (RmtStatus::NullPointer, format!("null pointer: {what}"))
}

/// # Safety
/// `p` is null or valid for a write of `T`.
unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), (RmtStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Message for the most recent failure on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rmt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rmt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Draw one matrix from `ensemble` with stream (seed, stream_id) and store its spectrum.
/// `m` is read only for Wishart. With `normalize` set, eigenvalues are divided by √n
/// (Wishart is already normalized).
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_sample(
    ensemble: RmtEnsemble,
    n: usize,
    m: usize,
    seed: u64,
    stream_id: u64,
    normalize: bool,
    out: *mut *mut RmtSpectrum,
) -> RmtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut rng = RngStream::new(seed, stream_id);
        let spec = match ensemble {
            RmtEnsemble::Gue => eigenvalues_hermitian(&sample_gue(n, &mut rng).ffi()?),
            RmtEnsemble::Goe => eigenvalues_hermitian(&sample_goe(n, &mut rng).ffi()?),
            RmtEnsemble::Ginibre => eigenvalues_complex(&sample_ginibre(n, &mut rng).ffi()?),
            RmtEnsemble::Wishart => eigenvalues_hermitian(&sample_wishart(n, m, &mut rng).ffi()?),
        }
        .ffi()?;
        let spec = if normalize && ensemble != RmtEnsemble::Wishart { spec.rescaled(1.0 / (n as f64).sqrt()) } else { spec };
        out.write(Box::into_raw(Box::new(RmtSpectrum { inner: spec })));
        Ok(())
    })
}

/// Number of eigenvalues, or 0 for a null handle.
///
/// # Safety
/// `spectrum` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_len(spectrum: *const RmtSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.inner.len())
}

/// True when the spectrum is complex (Ginibre).
///
/// # Safety
/// `spectrum` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_is_complex(spectrum: *const RmtSpectrum) -> bool {
    spectrum.as_ref().is_some_and(|s| s.inner.complex().is_some())
}

/// Copy eigenvalues into `re` (and `im`, which may be null for real spectra);
/// both buffers hold `capacity` doubles. Real spectra write zeros to `im`.
///
/// # Safety
/// `spectrum` is a live handle; `re` (and non-null `im`) are valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_copy(spectrum: *const RmtSpectrum, re: *mut f64, im: *mut f64, capacity: usize) -> RmtStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        if re.is_null() {
            return Err(null("re"));
        }
        let n = s.inner.len();
        if capacity < n {
            return Err((RmtStatus::BufferTooSmall, format!("capacity {capacity} < length {n}")));
        }
        let re = std::slice::from_raw_parts_mut(re, n);
        let mut im = if im.is_null() { None } else { Some(std::slice::from_raw_parts_mut(im, n)) };
        match (s.inner.real(), s.inner.complex()) {
            (Some(v), _) => {
                re.copy_from_slice(v);
                if let Some(im) = im.as_mut() {
                    im.fill(0.0);
                }
            }
            (_, Some(v)) => {
                let im = im.ok_or_else(|| null("im (complex spectrum)"))?;
                for (k, z) in v.iter().enumerate() {
                    re[k] = z.re;
                    im[k] = z.im;
                }
            }
            _ => unreachable!("spectrum is real or complex"),
        }
        Ok(())
    })
}

/// Bounded-Lipschitz distance between a real spectrum's ESD and a reference law.
///
/// # Safety
/// `spectrum` is a live handle; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_bl_distance(spectrum: *const RmtSpectrum, law: RmtLaw, param: f64, out: *mut f64) -> RmtStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let values = s
            .inner
            .real()
            .ok_or((RmtStatus::Domain, "bl distance needs a real spectrum".to_string()))?;
        let law = match law {
            RmtLaw::Semicircle => ReferenceLaw::Semicircle,
            RmtLaw::MarchenkoPastur => ReferenceLaw::MarchenkoPastur { c: param },
            RmtLaw::OuLimit => ReferenceLaw::OuLimit { theta: param },
        };
        law.validate().ffi()?;
        let esd = EmpiricalMeasure::new(values.to_vec()).ffi()?;
        let d = bl_distance(&SignedAtoms::from(&esd), &SignedAtoms::from_law(&law, REFERENCE_CELLS).ffi()?).ffi()?;
        write_out(out, d.value, "out")
    })
}

/// Release a spectrum handle; null is ignored.
///
/// # Safety
/// `spectrum` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_free(spectrum: *mut RmtSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Zero-start Dyson motion with `beta` ∈ {1, 2}, recording `records` evenly spaced
/// states up to `t_end`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rmt_dyson_simulate(
    beta: u8,
    n: usize,
    t_end: f64,
    dt_max: f64,
    records: usize,
    seed: u64,
    out: *mut *mut RmtTrajectory,
) -> RmtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if records == 0 {
            return Err((RmtStatus::InvalidArgument, "records must be positive".into()));
        }
        let times = (1..=records).map(|k| t_end * k as f64 / records as f64).collect();
        let config = SdeConfig::new(Family::Dyson { beta }, n, dt_max, t_end, times).ffi()?;
        let mut rng = RngStream::new(seed, 0);
        let traj = simulate(&config, &mut rng, InitialCondition::ZeroStart).ffi()?;
        out.write(Box::into_raw(Box::new(RmtTrajectory { inner: traj })));
        Ok(())
    })
}

/// Number of recorded states, or 0 for a null handle.
///
/// # Safety
/// `trajectory` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmt_trajectory_len(trajectory: *const RmtTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.inner.states.len())
}

/// Particle count, or 0 for a null handle.
///
/// # Safety
/// `trajectory` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmt_trajectory_particles(trajectory: *const RmtTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.inner.config.n)
}

/// Copy recorded state `index` (time and ordered positions).
///
/// # Safety
/// `trajectory` is a live handle; `time` is valid for a write; `positions` for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn rmt_trajectory_state(
    trajectory: *const RmtTrajectory,
    index: usize,
    time: *mut f64,
    positions: *mut f64,
    capacity: usize,
) -> RmtStatus {
    guard(|| {
        let t = trajectory.as_ref().ok_or_else(|| null("trajectory"))?;
        let st = t
            .inner
            .states
            .get(index)
            .ok_or_else(|| (RmtStatus::InvalidArgument, format!("index {index} out of range")))?;
        if positions.is_null() {
            return Err(null("positions"));
        }
        if capacity < st.positions.len() {
            return Err((RmtStatus::BufferTooSmall, format!("capacity {capacity} < {}", st.positions.len())));
        }
        std::slice::from_raw_parts_mut(positions, st.positions.len()).copy_from_slice(&st.positions);
        write_out(time, st.t, "time")
    })
}

/// Release a trajectory handle; null is ignored.
///
/// # Safety
/// `trajectory` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmt_trajectory_free(trajectory: *mut RmtTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// GUE kernel K_N(x, y) with Hermite-function normalization.
///
/// # Safety
/// `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rmt_gue_kernel(n: usize, x: f64, y: f64, out: *mut f64) -> RmtStatus {
    guard(|| write_out(out, gue_kernel(n, x, y).ffi()?, "out"))
}

/// S(z) = ∫ dσ(x)/(z − x) for the semicircle on [−2, 2], z off the real axis.
///
/// # Safety
/// `out_re` and `out_im` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rmt_semicircle_stieltjes(re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> RmtStatus {
    guard(|| {
        if out_im.is_null() {
            return Err(null("out_im"));
        }
        let s = semicircle_stieltjes(Complex64::new(re, im)).ffi()?;
        write_out(out_re, s.re, "out_re")?;
        out_im.write(s.im);
        Ok(())
    })
}

/// log of the probability that the infinite Ginibre process has no point in |z| < r;
/// `truncation` 0 selects the default product length.
///
/// # Safety
/// `out_log_prob` is valid for a write; `out_tail_bound` is null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rmt_hole_probability(r: f64, truncation: usize, out_log_prob: *mut f64, out_tail_bound: *mut f64) -> RmtStatus {
    guard(|| {
        let h = hole_probability(r, (truncation > 0).then_some(truncation)).ffi()?;
        write_out(out_log_prob, h.log_prob, "out_log_prob")?;
        if !out_tail_bound.is_null() {
            out_tail_bound.write(h.tail_bound);
        }
        Ok(())
    })
}

/// log Z for Z = ∫ |Δ(λ)|^β exp(−(N/2)|λ|²) dλ over ℝ^N.
///
/// # Safety
/// `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rmt_selberg_log_z(n: usize, beta: f64, out: *mut f64) -> RmtStatus {
    guard(|| write_out(out, selberg_log_z(n, beta).ffi()?, "out"))
}

/// Large-N limit of (1/N²) log Z.
///
/// # Safety
/// `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rmt_free_energy_limit(beta: f64, out: *mut f64) -> RmtStatus {
    guard(|| write_out(out, f_constant(beta).ffi()?, "out"))
}

/// Affine Gumbel rescaling of a Ginibre spectral radius ρ (divided by √N) at size N.
///
/// # Safety
/// `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rmt_gumbel_rescale(rho: f64, n: usize, out: *mut f64) -> RmtStatus {
    guard(|| write_out(out, gumbel_rescale(rho, n).ffi()?, "out"))
}
