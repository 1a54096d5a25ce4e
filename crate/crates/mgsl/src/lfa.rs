//! Discrete Fourier analysis engine: sweeps the wavenumber lattice,
//! computes amplification and smoothing factors, searches the maximal
//! stable pseudo-CFL and optimizes (c*, eta) against the smoothing factor.

use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;

use crate::config::{AnalysisCase, HfSet, ModeSetChoice};
use crate::error::{Error, Result};

use crate::linalg::{
    cidentity, complexify, spectral_radius4, spectral_radius_upper_bound, CMat4, RMat4,
};
use crate::precond::{exact_symbol, Framing, PrecondKind, SgsSymbolParts};
use crate::smoothers::{
    amplification_matrix_with, rosenbrock_reference_matrix, SchemeKind, SmootherScheme,
    StageInverse,
};
use crate::symbols::{
    dissipation_matrix, fourth_difference_symbol, second_difference_symbol,
    spectral_radii, Direction, GridSpec, Mode, PhasePair,
};

/// Stability acceptance threshold: distinguishes neutral constant modes
/// from genuine growth.
pub const STABILITY_TOL: f64 = 1e-8;

/// Ceiling for the maximal-c* search; entries stable there are reported as
/// unbounded.
pub const CFL_CEILING: f64 = 1e6;

pub fn spectral_radius_4x4(m: &CMat4) -> Result<f64> {
    spectral_radius4(m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisResult {
    pub amplification: f64,
    pub smoothing: f64,
    pub stable: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CflBound {
    Bounded(f64),
    Unbounded,
}

impl CflBound {
    pub fn as_finite(&self) -> Option<f64> {
        match self {
            CflBound::Bounded(v) => Some(*v),
            CflBound::Unbounded => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizeResult {
    pub cstar_opt: f64,
    pub eta_opt: f64,
    pub rho_opt: f64,
    pub smoothing_opt: f64,
    /// The optimum sits at the top of the c* grid (reported as `>ceiling`
    /// when that equals the stability ceiling).
    pub cstar_at_ceiling: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumRecord {
    pub theta_x: f64,
    pub theta_y: f64,
    pub eigenvalues: [Complex64; 4],
    pub rho: f64,
}

/// Fully resolved per-configuration data with the phase-independent pieces
/// hoisted out of the lattice sweep.
pub struct Pipeline {
    grid: GridSpec,
    mode: Mode,
    steady: bool,
    scheme: SmootherScheme,
    precond: PrecondKind,
    framing: Framing,
    eta: f64,
    dt_star: f64,
    mode_set: ModeSetChoice,
    hf_set: HfSet,
    // flux Jacobians and dissipation weighting at the frozen state
    a: RMat4,
    b: RMat4,
    m: RMat4,
    sgs: Option<SgsSymbolParts>,
    // per-wavenumber tables
    sin_x: Vec<f64>,
    cos_x: Vec<f64>,
    sin_y: Vec<f64>,
    cos_y: Vec<f64>,
    // dissipation scalar contribution per direction, already divided by the
    // cell width of that direction
    visc_x: Vec<f64>,
    visc_y: Vec<f64>,
    k_x: Vec<i64>,
    k_y: Vec<i64>,
}

impl Pipeline {
    pub fn new(case: &AnalysisCase) -> Result<Self> {
        let state = case.state.resolve()?;
        let scheme = SmootherScheme::registry(&case.scheme)?;
        let grid = case.grid();
        let mode = case.resolved_mode(&state, &grid);
        let dt_star = case.dt_star(&grid, &state);
        if !(case.eta > 0.0 && case.eta <= 1.0) && scheme.is_w_framing() {
            return Err(Error::Config(format!("eta = {} outside (0, 1]", case.eta)));
        }
        let framing = if scheme.is_w_framing() {
            Framing::Aw { eta: case.eta }
        } else {
            Framing::Aerk
        };
        let a = crate::euler::flux_jacobian(&state, [1.0, 0.0]);
        let b = crate::euler::flux_jacobian(&state, [0.0, 1.0]);
        let m = dissipation_matrix(&state, case.energy_weighting);
        let sgs = if matches!(case.precond, PrecondKind::Sgs | PrecondKind::Exact)
            && scheme.kind != SchemeKind::Rosenbrock
        {
            Some(SgsSymbolParts::new(&state, &grid, mode, case.d)?)
        } else {
            None
        };

        let wavenumbers = |n: usize| -> Vec<i64> {
            (0..n).map(|ix| ix as i64 - n as i64 / 2 + 1).collect()
        };
        let k_x = wavenumbers(grid.n_x);
        let k_y = wavenumbers(grid.n_y);
        let thetas = |ks: &[i64], n: usize| -> Vec<f64> {
            ks.iter()
                .map(|&k| 2.0 * std::f64::consts::PI * k as f64 / n as f64)
                .collect()
        };
        let th_x = thetas(&k_x, grid.n_x);
        let th_y = thetas(&k_y, grid.n_y);
        // dissipation radii: optionally boosted by the multidimensional
        // correction, applied to the dissipation only (the pseudo time step
        // uses the plain acoustic reference speed)
        let (rx_eps, ry_eps) = spectral_radii(&state, case.spectral_correction);
        let coeffs = |t: f64, dir: Direction| -> (f64, f64) {
            let r = match dir {
                Direction::X => rx_eps,
                Direction::Y => ry_eps,
            };
            let raw =
                crate::symbols::sensor_ratio(&state, t, case.sensor_denominator, case.regularizer);
            let s = (case.kappa2 * raw).min(0.25);
            let e2 = s * r;
            let e4 = if case.eps4_subtract {
                (case.kappa4 * r - 2.0 * e2).max(0.0)
            } else {
                case.kappa4 * r
            };
            (e2, e4)
        };
        let visc_table = |ths: &[f64], dir: Direction, width: f64| -> Vec<f64> {
            ths.iter()
                .map(|&t| {
                    let (e2, e4) = coeffs(t, dir);
                    (e2 * second_difference_symbol(t) + e4 * fourth_difference_symbol(t)) / width
                })
                .collect()
        };
        let visc_x = visc_table(&th_x, Direction::X, grid.dx);
        let visc_y = match case.coupling {
            crate::symbols::Coupling::PerDirection => visc_table(&th_y, Direction::Y, grid.dy),
            crate::symbols::Coupling::Shared => {
                // the x-direction pair drives both stencil directions
                th_y.iter()
                    .map(|&t| {
                        let (e2, e4) = coeffs(t, Direction::X);
                        (e2 * second_difference_symbol(t) + e4 * fourth_difference_symbol(t))
                            / grid.dy
                    })
                    .collect()
            }
        };
        Ok(Self {
            grid,
            mode,
            steady: matches!(mode, Mode::Steady),
            scheme,
            precond: case.precond,
            framing,
            eta: case.eta,
            dt_star,
            mode_set: case.resolved_mode_set(),
            hf_set: case.hf_set,
            a,
            b,
            m,
            sgs,
            sin_x: th_x.iter().map(|t| t.sin()).collect(),
            cos_x: th_x.iter().map(|t| t.cos()).collect(),
            sin_y: th_y.iter().map(|t| t.sin()).collect(),
            cos_y: th_y.iter().map(|t| t.cos()).collect(),
            visc_x,
            visc_y,
            k_x,
            k_y,
        })
    }

    pub fn lattice_dims(&self) -> (usize, usize) {
        (self.grid.n_x, self.grid.n_y)
    }

    pub fn theta(&self, ix: usize, iy: usize) -> PhasePair {
        PhasePair::from_wavenumbers(self.k_x[ix], self.k_y[iy], self.grid.n_x, self.grid.n_y)
    }

    fn is_zero_mode(&self, ix: usize, iy: usize) -> bool {
        self.k_x[ix] == 0 && self.k_y[iy] == 0
    }

    fn mode_included(&self, ix: usize, iy: usize) -> bool {
        match self.mode_set {
            ModeSetChoice::All => true,
            ModeSetChoice::SkipKyZero => self.k_y[iy] != 0,
            ModeSetChoice::SkipAxes => self.k_x[ix] != 0 && self.k_y[iy] != 0,
            ModeSetChoice::Auto => unreachable!("resolved at construction"),
        }
    }

    fn is_high_frequency(&self, ix: usize, iy: usize) -> bool {
        let hx = 4 * self.k_x[ix].unsigned_abs() as usize >= self.grid.n_x;
        let hy = 4 * self.k_y[iy].unsigned_abs() as usize >= self.grid.n_y;
        match self.hf_set {
            HfSet::XStrict => 4 * self.k_x[ix].unsigned_abs() as usize > self.grid.n_x,
            HfSet::Union => hx || hy,
            HfSet::Both => hx && hy,
            HfSet::XOnly => hx,
            HfSet::YOnly => hy,
        }
    }

    fn hc(&self, ix: usize, iy: usize) -> CMat4 {
        let cx = Complex64::new(0.0, self.sin_x[ix] / self.grid.dx);
        let cy = Complex64::new(0.0, self.sin_y[iy] / self.grid.dy);
        let mut h = complexify(&self.a) * cx + complexify(&self.b) * cy;
        let shift = self.mode.time_shift();
        if shift != 0.0 {
            for i in 0..4 {
                h[(i, i)] += Complex64::new(shift, 0.0);
            }
        }
        h
    }

    fn hv(&self, ix: usize, iy: usize) -> CMat4 {
        let sigma = self.visc_x[ix] + self.visc_y[iy];
        complexify(&self.m) * Complex64::new(sigma, 0.0)
    }

    /// The amplification matrix at one lattice phase.
    pub fn g_matrix(&self, ix: usize, iy: usize) -> Result<CMat4> {
        if self.steady && self.is_zero_mode(ix, iy) {
            // the constant mode carries zero residual in steady mode, so no
            // scheme updates it regardless of the preconditioner
            return Ok(cidentity());
        }
        let hc = self.hc(ix, iy);
        let hv = self.hv(ix, iy);
        if self.scheme.kind == SchemeKind::Rosenbrock {
            return rosenbrock_reference_matrix(&self.scheme, &hc, &hv, self.eta, self.dt_star);
        }
        match self.precond {
            PrecondKind::None => Ok(amplification_matrix_with(
                &self.scheme,
                &hc,
                &hv,
                &StageInverse::Identity,
                self.dt_star,
            )),
            PrecondKind::Sgs => {
                let parts = self.sgs.as_ref().expect("sgs parts built for sgs preconditioner");
                let ex_m = Complex64::new(self.cos_x[ix], -self.sin_x[ix]);
                let ey_m = Complex64::new(self.cos_y[iy], -self.sin_y[iy]);
                let applier =
                    parts.factored_from_shifts(self.framing, self.dt_star, ex_m, ey_m)?;
                Ok(amplification_matrix_with(
                    &self.scheme,
                    &hc,
                    &hv,
                    &StageInverse::Factored(&applier),
                    self.dt_star,
                ))
            }
            PrecondKind::Exact => {
                // exact inverse of the first-order flux-split Jacobian
                // approximation (the operator SGS only approximates)
                let parts = self.sgs.as_ref().expect("parts built for exact preconditioner");
                let ex_m = Complex64::new(self.cos_x[ix], -self.sin_x[ix]);
                let ey_m = Complex64::new(self.cos_y[iy], -self.sin_y[iy]);
                let (l, d, u) = parts.triple_j_from_shifts(ex_m, ey_m);
                let p = exact_symbol(self.framing, self.dt_star, &(l + d + u));
                let inv = StageInverse::from_matrix(&p).map_err(|_| Error::SingularPreconditioner)?;
                Ok(amplification_matrix_with(&self.scheme, &hc, &hv, &inv, self.dt_star))
            }
        }
    }
}

/// Maxima accumulated over (part of) the lattice.
#[derive(Clone, Copy, Debug, Default)]
struct SweepAcc {
    rho_all: f64,
    rho_hf: f64,
}

impl SweepAcc {
    fn merge(&mut self, other: &SweepAcc) {
        self.rho_all = self.rho_all.max(other.rho_all);
        self.rho_hf = self.rho_hf.max(other.rho_hf);
    }
}

#[derive(Clone, Copy, Debug)]
struct SweepLimits {
    /// Abort once the all-mode maximum exceeds this.
    abort_all_above: Option<f64>,
    /// Abort once the high-frequency maximum exceeds this.
    abort_hf_above: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
struct SweepOutcome {
    acc: SweepAcc,
    aborted: bool,
}

fn worker_count() -> usize {
    if let Ok(v) = std::env::var("MGSL_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn sweep_rows(
    pipe: &Pipeline,
    rows: impl Iterator<Item = usize>,
    limits: &SweepLimits,
    abort_flag: &AtomicBool,
) -> Result<SweepOutcome> {
    let (nx, _) = pipe.lattice_dims();
    let mut acc = SweepAcc::default();
    for iy in rows {
        if abort_flag.load(Ordering::Relaxed) {
            return Ok(SweepOutcome { acc, aborted: true });
        }
        for ix in 0..nx {
            if !pipe.mode_included(ix, iy) {
                continue;
            }
            if pipe.steady && pipe.is_zero_mode(ix, iy) {
                // neutral constant mode; never damped, never counted
                continue;
            }
            let hf = pipe.is_high_frequency(ix, iy);
            let g = pipe.g_matrix(ix, iy)?;
            // skip the eigensolve when a cheap norm bound shows this phase
            // cannot raise any running maximum (rho_hf <= rho_all, so the
            // smaller target suffices for high-frequency phases)
            let bound = spectral_radius_upper_bound(&g);
            let need = if hf { acc.rho_hf } else { acc.rho_all };
            if bound > need {
                let rho = spectral_radius4(&g)?;
                acc.rho_all = acc.rho_all.max(rho);
                if hf {
                    acc.rho_hf = acc.rho_hf.max(rho);
                }
            }
            if let Some(t) = limits.abort_all_above {
                if acc.rho_all > t {
                    abort_flag.store(true, Ordering::Relaxed);
                    return Ok(SweepOutcome { acc, aborted: true });
                }
            }
            if let Some(t) = limits.abort_hf_above {
                if acc.rho_hf > t {
                    abort_flag.store(true, Ordering::Relaxed);
                    return Ok(SweepOutcome { acc, aborted: true });
                }
            }
        }
    }
    Ok(SweepOutcome { acc, aborted: false })
}

fn sweep(pipe: &Pipeline, limits: SweepLimits) -> Result<SweepOutcome> {
    let (_, ny) = pipe.lattice_dims();
    let workers = worker_count().min(ny);
    let abort = AtomicBool::new(false);
    if workers <= 1 {
        return sweep_rows(pipe, 0..ny, &limits, &abort);
    }
    let mut outcome = SweepOutcome { acc: SweepAcc::default(), aborted: false };
    let results: Vec<Result<SweepOutcome>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let limits = &limits;
            let abort = &abort;
            handles.push(scope.spawn(move || {
                sweep_rows(pipe, (w..ny).step_by(workers), limits, abort)
            }));
        }
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    for r in results {
        let o = r?;
        outcome.acc.merge(&o.acc);
        outcome.aborted |= o.aborted;
    }
    Ok(outcome)
}

/// Amplification and smoothing factor in one lattice sweep.
pub fn factors(case: &AnalysisCase) -> Result<AnalysisResult> {
    let pipe = Pipeline::new(case)?;
    let out = sweep(&pipe, SweepLimits { abort_all_above: None, abort_hf_above: None })?;
    Ok(AnalysisResult {
        amplification: out.acc.rho_all,
        smoothing: out.acc.rho_hf,
        stable: out.acc.rho_all <= 1.0 + STABILITY_TOL,
    })
}

/// Max over the full discrete lattice of the spectral radius of G.
pub fn amplification_factor(case: &AnalysisCase) -> Result<f64> {
    Ok(factors(case)?.amplification)
}

/// Max over the high-frequency lattice modes, max(|Tx|, |Ty|) >= pi/2.
pub fn smoothing_factor(case: &AnalysisCase) -> Result<f64> {
    Ok(factors(case)?.smoothing)
}

fn is_stable(case: &AnalysisCase, cstar: f64) -> Result<bool> {
    let mut probe = case.clone();
    probe.cstar = cstar;
    let pipe = Pipeline::new(&probe)?;
    let out = sweep(
        &pipe,
        SweepLimits { abort_all_above: Some(1.0 + STABILITY_TOL), abort_hf_above: None },
    )?;
    Ok(!out.aborted && out.acc.rho_all <= 1.0 + STABILITY_TOL)
}

fn round_two_significant(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(x.abs().log10().floor() as i32 - 1);
    (x / scale).round() * scale
}

/// Largest stable c*: doubling from 1 to the ceiling, then bisection to two
/// significant digits. `Unbounded` when the ceiling itself is stable.
pub fn max_stable_cfl(case: &AnalysisCase) -> Result<CflBound> {
    // a stable ceiling short-circuits the doubling phase
    if is_stable(case, CFL_CEILING)? {
        return Ok(CflBound::Unbounded);
    }
    let mut lo = 1.0;
    if !is_stable(case, lo)? {
        // search below one; the tables bottom out at c* = 1
        let mut probe = lo / 2.0;
        let mut found = None;
        while probe >= 1e-3 {
            if is_stable(case, probe)? {
                found = Some(probe);
                break;
            }
            probe /= 2.0;
        }
        match found {
            Some(v) => {
                let (flo, fhi) = bisect_boundary(case, v, v * 2.0)?;
                let _ = fhi;
                return Ok(CflBound::Bounded(round_two_significant(flo)));
            }
            None => return Ok(CflBound::Bounded(0.0)),
        }
    }
    let mut hi = lo;
    loop {
        hi *= 2.0;
        if hi >= CFL_CEILING {
            hi = CFL_CEILING;
            break;
        }
        if !is_stable(case, hi)? {
            break;
        }
        lo = hi;
    }
    let (flo, _fhi) = bisect_boundary(case, lo, hi)?;
    Ok(CflBound::Bounded(round_two_significant(flo)))
}

fn bisect_boundary(case: &AnalysisCase, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    while hi - lo > 0.005 * lo {
        let mid = 0.5 * (lo + hi);
        if is_stable(case, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Exhaustive grid search minimizing the smoothing factor among stable
/// candidates. Ties prefer smaller c*, then smaller eta.
pub fn optimize(
    case: &AnalysisCase,
    cstar_grid: &[f64],
    eta_grid: &[f64],
) -> Result<Option<OptimizeResult>> {
    if cstar_grid.is_empty() || eta_grid.is_empty() {
        return Err(Error::Config("empty search grid".into()));
    }
    let mut best: Option<OptimizeResult> = None;
    for &cstar in cstar_grid {
        for &eta in eta_grid {
            let mut cand = case.clone();
            cand.cstar = cstar;
            cand.eta = eta;
            let pipe = Pipeline::new(&cand)?;
            let prune = best.as_ref().map(|b| b.smoothing_opt);
            let out = sweep(
                &pipe,
                SweepLimits {
                    abort_all_above: Some(1.0 + STABILITY_TOL),
                    abort_hf_above: prune,
                },
            )?;
            if out.aborted {
                continue; // unstable, or provably no better than the incumbent
            }
            if out.acc.rho_all > 1.0 + STABILITY_TOL {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => out.acc.rho_hf < b.smoothing_opt,
            };
            if better {
                best = Some(OptimizeResult {
                    cstar_opt: cstar,
                    eta_opt: eta,
                    rho_opt: out.acc.rho_all,
                    smoothing_opt: out.acc.rho_hf,
                    cstar_at_ceiling: false,
                });
            }
        }
    }
    if let Some(b) = best.as_mut() {
        b.cstar_at_ceiling = b.cstar_opt == *cstar_grid.last().unwrap()
            && cstar_grid.len() > 1
            && b.cstar_opt >= CFL_CEILING;
    }
    Ok(best)
}

/// Eigenvalue records for every lattice phase.
pub fn spectrum_dump(case: &AnalysisCase) -> Result<Vec<SpectrumRecord>> {
    let pipe = Pipeline::new(case)?;
    let (nx, ny) = pipe.lattice_dims();
    let mut records = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let g = pipe.g_matrix(ix, iy)?;
            let evs = crate::linalg::eigenvalues4(&g)?;
            let rho = evs.iter().map(|e| e.norm()).fold(0.0, f64::max);
            let phase = pipe.theta(ix, iy);
            records.push(SpectrumRecord {
                theta_x: phase.theta_x,
                theta_y: phase.theta_y,
                eigenvalues: evs,
                rho,
            });
        }
    }
    Ok(records)
}
