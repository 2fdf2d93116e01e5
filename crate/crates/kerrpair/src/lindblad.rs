//! Time integration of the RWA master equation with trajectory sampling.
//!
//! The right-hand side is assembled matrix-free from the precomputed sparse
//! operator set. At zero gain the two-quantum loss never repopulates upper
//! Fock sectors, so once every sector above some total occupation has decayed
//! below a threshold the integration continues on the smaller per-mode cutoff
//! that contains those sectors; the long dephasing tail then runs on the
//! manifold block alone. Shrinking is skipped whenever thermal upward flow
//! over the remaining horizon could repopulate the discarded sectors above
//! the threshold.

use crate::entangle::{bloch_extract, negativity, BlochRecord};
use crate::error::{KerrError, Result};
use crate::fock::{trace_re, DensityMatrix, TruncatedSpace};
use crate::model::GeneratorRwa;
use crate::rk::{Dopri5, OdeRhs};
use crate::scalar::{re, C, CMat, Scalar};

/// Adaptive-integration and sampling controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T: Scalar> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Cap on the adaptive step; `None` resolves to 0.1/lambda.
    pub max_step: Option<T>,
    pub t_final: T,
    pub sample_count: usize,
    /// Geometric sample spacing for long-horizon saturation runs.
    pub log_sampling: bool,
    /// Drop decayed upper Fock sectors during the run.
    pub auto_shrink: bool,
    /// Largest entry magnitude a sector may carry and still be dropped.
    pub shrink_threshold: T,
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn new(t_final: T, sample_count: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol: re::<T>(1e-8),
            abs_tol: re::<T>(1e-10),
            max_step: None,
            t_final,
            sample_count,
            log_sampling: false,
            auto_shrink: true,
            shrink_threshold: re::<T>(1e-13),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.rel_tol < T::one()) {
            return Err(KerrError::Domain("rel_tol must lie in (0, 1)".into()));
        }
        if self.abs_tol <= T::zero() {
            return Err(KerrError::Domain("abs_tol must be positive".into()));
        }
        if self.t_final <= T::zero() {
            return Err(KerrError::Domain("t_final must be positive".into()));
        }
        if self.sample_count < 2 {
            return Err(KerrError::Domain("sample_count must be at least 2".into()));
        }
        if let Some(h) = self.max_step {
            if h <= T::zero() {
                return Err(KerrError::Domain("max_step must be positive".into()));
            }
        }
        if self.shrink_threshold <= T::zero() {
            return Err(KerrError::Domain("shrink_threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn sample_times(&self) -> Vec<T> {
        let n = self.sample_count;
        let mut times = Vec::with_capacity(n);
        times.push(T::zero());
        if self.log_sampling {
            let t_min = self.t_final * re::<T>(1e-6);
            let denom = re::<T>((n - 2).max(1) as f64);
            for k in 1..n {
                let expo = re::<T>((n - 1 - k) as f64) / denom;
                times.push(self.t_final * (t_min / self.t_final).powf(expo));
            }
        } else {
            let denom = re::<T>((n - 1) as f64);
            for k in 1..n - 1 {
                times.push(self.t_final * re::<T>(k as f64) / denom);
            }
            times.push(self.t_final);
        }
        times
    }
}

/// Run-level diagnostics accumulated over all samples.
#[derive(Debug, Clone, Copy)]
pub struct RunDiagnostics<T: Scalar> {
    pub max_trace_dev: T,
    pub min_eigenvalue: T,
    pub parity_drift: T,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
    /// Smallest per-mode cutoff the run was reduced to.
    pub min_active_cutoff: usize,
    /// Total population discarded by cutoff reductions.
    pub dropped_weight: T,
    /// Whether the run was redone with tolerances tightened one decade.
    pub tolerance_tightened: bool,
}

/// Sampled observables plus the final state of one integration.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    pub times: Vec<T>,
    pub records: Vec<BlochRecord<T>>,
    pub final_state: DensityMatrix<T>,
    pub diagnostics: RunDiagnostics<T>,
}

/// Full right-hand side of the RWA master equation on a density matrix.
pub fn rhs_rwa<T: Scalar>(gen: &GeneratorRwa<T>, rho: &DensityMatrix<T>) -> Result<CMat<T>> {
    let dim = gen.space().total_dim();
    if rho.space().total_dim() != dim {
        return Err(KerrError::DimensionMismatch { left: rho.space().total_dim(), right: dim });
    }
    let mut out = CMat::<T>::zeros(dim, dim);
    let mut scratch = CMat::<T>::zeros(dim, dim);
    gen.apply_rhs(rho.matrix(), &mut out, &mut scratch);
    Ok(out)
}

struct RwaOde<'a, T: Scalar> {
    gen: &'a GeneratorRwa<T>,
    scratch: CMat<T>,
}

impl<T: Scalar> OdeRhs<T> for RwaOde<'_, T> {
    fn eval(&mut self, _t: T, y: &CMat<T>, out: &mut CMat<T>) {
        self.gen.apply_rhs(y, out, &mut self.scratch);
    }
}

/// Integrate the master equation and sample `cfg.sample_count` records.
///
/// The integrator state is never touched by sampling hygiene: each record is
/// extracted from a Hermitized, trace-renormalized copy, so trace drift and
/// positivity stay measurable.
pub fn evolve<T: Scalar>(
    gen: &GeneratorRwa<T>,
    rho0: &DensityMatrix<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let traj = evolve_once(gen, rho0, cfg, false)?;
    if traj.diagnostics.max_trace_dev <= re::<T>(1e-8) {
        return Ok(traj);
    }
    // drift check failed: tighten one decade and rerun
    let tight = IntegratorConfig {
        rel_tol: cfg.rel_tol / re::<T>(10.0),
        abs_tol: cfg.abs_tol / re::<T>(10.0),
        ..*cfg
    };
    evolve_once(gen, rho0, &tight, true)
}

fn evolve_once<T: Scalar>(
    gen: &GeneratorRwa<T>,
    rho0: &DensityMatrix<T>,
    cfg: &IntegratorConfig<T>,
    tightened: bool,
) -> Result<Trajectory<T>> {
    let full_space = *gen.space();
    if rho0.space() != &full_space {
        return Err(KerrError::DimensionMismatch {
            left: rho0.space().total_dim(),
            right: full_space.total_dim(),
        });
    }
    let lambda = gen.params().lambda;
    let max_step = cfg.max_step.unwrap_or_else(|| {
        if lambda > T::zero() {
            re::<T>(0.1) / lambda
        } else {
            cfg.t_final / re::<T>(100.0)
        }
    });

    let times = cfg.sample_times();
    let mut records: Vec<BlochRecord<T>> = Vec::with_capacity(times.len());

    let mut active = ActiveState::full(gen, rho0.matrix().clone());
    let mut integ = Dopri5::new(
        active.dim(),
        cfg.rel_tol,
        cfg.abs_tol,
        max_step,
        max_step * re::<T>(1e-6),
    );

    let mut diag = RunDiagnostics {
        max_trace_dev: T::zero(),
        min_eigenvalue: T::one(),
        parity_drift: T::zero(),
        steps_accepted: 0,
        steps_rejected: 0,
        rhs_evals: 0,
        min_active_cutoff: full_space.cutoff_per_mode(),
        dropped_weight: T::zero(),
        tolerance_tightened: tightened,
    };

    let mut t = T::zero();
    let mut p_even0 = T::zero();
    for (si, &ts) in times.iter().enumerate() {
        if ts > t {
            let scratch = active.scratch();
            let gen_ref = active.local_gen.as_ref().unwrap_or(gen);
            let mut ode = RwaOde { gen: gen_ref, scratch };
            let status = integ.integrate_to(&mut ode, &mut t, &mut active.rho, ts);
            let RwaOde { scratch, .. } = ode;
            active.scratch_buf = Some(scratch);
            status?;
        }

        let mut rec = active.sample(ts)?;
        if si == 0 {
            p_even0 = rec.p_even;
        }
        rec.time = ts;
        diag.max_trace_dev = diag.max_trace_dev.max(rec.trace_dev);
        diag.min_eigenvalue = diag.min_eigenvalue.min(rec.min_eig);
        diag.parity_drift = diag.parity_drift.max((rec.p_even - p_even0).abs());
        records.push(rec);

        if cfg.auto_shrink && si + 1 < times.len() {
            if let Some(dropped) =
                active.try_shrink(gen, cfg.shrink_threshold, cfg.t_final - t)?
            {
                diag.dropped_weight += dropped;
                diag.min_active_cutoff =
                    diag.min_active_cutoff.min(active.space.cutoff_per_mode());
                let h = integ.suggested_step();
                let stats = integ.stats;
                integ = Dopri5::new(active.dim(), cfg.rel_tol, cfg.abs_tol, max_step, h);
                integ.stats = stats;
            }
        }
    }

    diag.steps_accepted = integ.stats.accepted;
    diag.steps_rejected = integ.stats.rejected;
    diag.rhs_evals = integ.stats.rhs_evals;

    let final_state = active.final_state(&full_space)?;
    Ok(Trajectory { times, records, final_state, diagnostics: diag })
}

/// Working state at the current active cutoff.
struct ActiveState<T: Scalar> {
    space: TruncatedSpace,
    rho: CMat<T>,
    local_gen: Option<GeneratorRwa<T>>,
    scratch_buf: Option<CMat<T>>,
}

impl<T: Scalar> ActiveState<T> {
    fn full(gen: &GeneratorRwa<T>, rho: CMat<T>) -> Self {
        Self { space: *gen.space(), rho, local_gen: None, scratch_buf: None }
    }

    fn dim(&self) -> usize {
        self.space.total_dim()
    }

    fn scratch(&mut self) -> CMat<T> {
        let dim = self.dim();
        match self.scratch_buf.take() {
            Some(buf) if buf.nrows() == dim => buf,
            _ => CMat::zeros(dim, dim),
        }
    }

    /// Hermitize + renormalize a copy and extract one record.
    fn sample(&self, ts: T) -> Result<BlochRecord<T>> {
        let half = C::new(re::<T>(0.5), T::zero());
        let mut m = (&self.rho + self.rho.adjoint()) * half;
        let tr = trace_re(&m);
        let trace_dev = (tr - T::one()).abs();
        if !(tr > T::zero()) {
            return Err(KerrError::InvalidState(format!(
                "trace collapsed to {} during integration",
                tr.to_f64()
            )));
        }
        m /= C::new(tr, T::zero());
        let dm = DensityMatrix::from_raw(self.space, m);
        let mut rec = bloch_extract(&dm);
        rec.time = ts;
        rec.trace_dev = trace_dev;
        rec.negativity = negativity(&dm)?;
        Ok(rec)
    }

    /// Reduce the per-mode cutoff if every sector above some total occupation
    /// has decayed below the threshold and thermal upward flow cannot refill
    /// it over the remaining horizon. Returns the dropped population.
    fn try_shrink(
        &mut self,
        full: &GeneratorRwa<T>,
        threshold: T,
        t_remaining: T,
    ) -> Result<Option<T>> {
        let m_act = self.space.cutoff_per_mode();
        if m_act <= 2 {
            return Ok(None);
        }
        let max_sector = 2 * (m_act - 1);
        let mut sector_weight = vec![T::zero(); max_sector + 1];
        for col in 0..self.dim() {
            let nc = self.space.total_quanta(col);
            for row in 0..self.dim() {
                let sector = self.space.total_quanta(row).max(nc);
                let mag = self.rho[(row, col)].re.abs() + self.rho[(row, col)].im.abs();
                sector_weight[sector] = sector_weight[sector].max(mag);
            }
        }
        let mut n_keep = max_sector;
        while n_keep > 1 && sector_weight[n_keep] < threshold {
            n_keep -= 1;
        }
        let m_new = (n_keep + 1).max(2);
        if m_new >= m_act {
            return Ok(None);
        }

        // thermal upward flow out of the kept block over the remaining run
        let gain = full.rate_absorption();
        if gain > T::zero() {
            let ladder = re::<T>(((n_keep + 1) * (n_keep + 2)) as f64) * re::<T>(2.0);
            if gain * ladder * t_remaining >= threshold / re::<T>(10.0) {
                return Ok(None);
            }
        }

        let new_space = TruncatedSpace::two_mode(m_new)?;
        let mut small = CMat::<T>::zeros(new_space.total_dim(), new_space.total_dim());
        for n in 0..m_new {
            for i in 0..m_new {
                for np in 0..m_new {
                    for ip in 0..m_new {
                        small[(new_space.index(n, i), new_space.index(np, ip))] =
                            self.rho[(self.space.index(n, i), self.space.index(np, ip))];
                    }
                }
            }
        }
        let mut dropped = T::zero();
        for k in 0..self.dim() {
            let (n, i) = self.space.unindex(k);
            if n >= m_new || i >= m_new {
                dropped += self.rho[(k, k)].re.abs();
            }
        }

        self.local_gen = Some(full.with_cutoff(m_new)?);
        self.space = new_space;
        self.rho = small;
        self.scratch_buf = None;
        Ok(Some(dropped))
    }

    /// Embed the working state back into the full space, Hermitized and
    /// renormalized.
    fn final_state(&self, full_space: &TruncatedSpace) -> Result<DensityMatrix<T>> {
        let mut out = CMat::<T>::zeros(full_space.total_dim(), full_space.total_dim());
        let m_act = self.space.cutoff_per_mode();
        for n in 0..m_act {
            for i in 0..m_act {
                for np in 0..m_act {
                    for ip in 0..m_act {
                        out[(full_space.index(n, i), full_space.index(np, ip))] =
                            self.rho[(self.space.index(n, i), self.space.index(np, ip))];
                    }
                }
            }
        }
        let half = C::new(re::<T>(0.5), T::zero());
        let herm = (&out + out.adjoint()) * half;
        let tr = trace_re(&herm);
        if !(tr > T::zero()) {
            return Err(KerrError::InvalidState("final state has non-positive trace".into()));
        }
        Ok(DensityMatrix::from_raw(*full_space, herm / C::new(tr, T::zero())))
    }
}
