//! Wangsness-Bloch-Redfield propagation of the full (non-RWA) master
//! equation in the eigenbasis of the lab-frame Hamiltonian.
//!
//! The generator uses the time-independent eigenbasis form
//! drho/dt = -i[diag(E), rho] + sum_m ([Lam_m rho, S_m] + [S_m, rho Lam_m†])
//! with (Lam_m)_{jk} = gamma(E_k - E_j)/2 (S_m)_{jk}: the one-sided Fourier
//! transform filters the coupling operator at the Bohr frequencies, emission
//! entries keep the column state above the row state. The time stepper works
//! in the interaction picture of diag(E), where the commutator term becomes
//! an entrywise phase on the operators; this removes the omega0-scale phase
//! rotation from the state and is algebraically the same equation.

use crate::entangle::{bloch_extract, negativity, BlochRecord};
use crate::error::{KerrError, Result};
use crate::fock::{
    embed_mode1, embed_mode2, hermiticity_error, ladder_lower, trace_re, DensityMatrix,
    TruncatedSpace,
};
use crate::lindblad::{IntegratorConfig, RunDiagnostics, Trajectory};
use crate::model::{hamiltonian_lab, rate_gamma, BathSpectrum, SystemParams};
use crate::rk::{Dopri5, OdeRhs};
use crate::scalar::{re, C, CMat, CVec, Scalar};
use nalgebra::linalg::SymmetricEigen;

/// Sorted eigendecomposition of the lab-frame Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenSystem<T: Scalar> {
    energies: Vec<T>,
    vectors: CMat<T>,
    space: TruncatedSpace,
}

impl<T: Scalar> EigenSystem<T> {
    pub fn diagonalize(h: &CMat<T>, space: TruncatedSpace) -> Result<Self> {
        let dim = space.total_dim();
        if h.nrows() != dim || h.ncols() != dim {
            return Err(KerrError::DimensionMismatch { left: h.nrows(), right: dim });
        }
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let energies: Vec<T> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = CMat::<T>::zeros(dim, dim);
        for (col, &k) in order.iter().enumerate() {
            vectors.column_mut(col).copy_from(&eig.eigenvectors.column(k));
        }

        let sys = Self { energies, vectors, space };
        let tol = re::<T>(1e-10).max(T::default_epsilon() * re::<T>(1e4));
        let scale = sys.energies.iter().fold(T::one(), |a, e| a.max(e.abs()));
        let mut residual = T::zero();
        let reconstructed = &sys.vectors
            * CMat::from_fn(dim, dim, |r, c| {
                if r == c {
                    C::new(sys.energies[r], T::zero())
                } else {
                    C::new(T::zero(), T::zero())
                }
            })
            * sys.vectors.adjoint();
        for (a, b) in reconstructed.iter().zip(h.iter()) {
            residual = residual.max((a - b).norm_sqr().sqrt());
        }
        if residual > tol * scale {
            return Err(KerrError::EigenResidual {
                residual: (residual / scale).to_f64(),
                tolerance: tol.to_f64(),
            });
        }
        let gram = sys.vectors.adjoint() * &sys.vectors;
        let mut ortho = T::zero();
        for r in 0..dim {
            for c in 0..dim {
                let want = if r == c { T::one() } else { T::zero() };
                ortho = ortho.max((gram[(r, c)] - C::new(want, T::zero())).norm_sqr().sqrt());
            }
        }
        if ortho > tol {
            return Err(KerrError::EigenResidual {
                residual: ortho.to_f64(),
                tolerance: tol.to_f64(),
            });
        }
        Ok(sys)
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn vectors(&self) -> &CMat<T> {
        &self.vectors
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    /// V† m V
    pub fn to_eigenbasis(&self, m: &CMat<T>) -> CMat<T> {
        self.vectors.adjoint() * m * &self.vectors
    }

    /// V m V†
    pub fn from_eigenbasis(&self, m: &CMat<T>) -> CMat<T> {
        &self.vectors * m * self.vectors.adjoint()
    }
}

/// Precomputed operator set for the Redfield right-hand side.
pub struct GeneratorRedfield<T: Scalar> {
    eigensystem: EigenSystem<T>,
    coupling_ops_eigen: [CMat<T>; 2],
    lambda_ops: [CMat<T>; 2],
    params: SystemParams<T>,
}

/// Diagonal-limit rate: the omega -> 0 limit of kappa(omega) N(omega),
/// Gamma0 T / (2 omega0) for T > 0 and zero at T = 0.
fn rate_at_zero<T: Scalar>(spectrum: &BathSpectrum<T>) -> T {
    spectrum.gamma0 * spectrum.temperature / (re::<T>(2.0) * spectrum.omega0)
}

/// Diagonalize the lab Hamiltonian and build S_m and Lam_m in its eigenbasis.
pub fn build_redfield<T: Scalar>(
    params: &SystemParams<T>,
    space: TruncatedSpace,
) -> Result<GeneratorRedfield<T>> {
    if space.num_modes() != 2 {
        return Err(KerrError::Domain("the Redfield generator needs a two-mode space".into()));
    }
    let h = hamiltonian_lab(params, &space)?;
    let eigensystem = EigenSystem::diagonalize(&h, space)?;

    let m = space.cutoff_per_mode();
    let a = ladder_lower::<T>(m)?;
    let x = &a.adjoint() + &a;
    let s_single = &x * &x;
    let s_fock = [embed_mode1(&space, &s_single), embed_mode2(&space, &s_single)];

    let dim = space.total_dim();
    let mut coupling_ops_eigen: [CMat<T>; 2] =
        [CMat::zeros(dim, dim), CMat::zeros(dim, dim)];
    let mut lambda_ops: [CMat<T>; 2] = [CMat::zeros(dim, dim), CMat::zeros(dim, dim)];
    let gammas = [params.gamma1, params.gamma2];
    let half = re::<T>(0.5);
    for mode in 0..2 {
        let s_eig = eigensystem.to_eigenbasis(&s_fock[mode]);
        let bath = params.bath_spectrum(gammas[mode]);
        let mut lam = CMat::<T>::zeros(dim, dim);
        for j in 0..dim {
            for k in 0..dim {
                let bohr = eigensystem.energies[k] - eigensystem.energies[j];
                let rate = if bohr == T::zero() {
                    rate_at_zero(&bath)
                } else {
                    rate_gamma(&bath, bohr)?
                };
                lam[(j, k)] = s_eig[(j, k)] * C::new(half * rate, T::zero());
            }
        }
        coupling_ops_eigen[mode] = s_eig;
        lambda_ops[mode] = lam;
    }

    Ok(GeneratorRedfield { eigensystem, coupling_ops_eigen, lambda_ops, params: *params })
}

impl<T: Scalar> GeneratorRedfield<T> {
    pub fn eigensystem(&self) -> &EigenSystem<T> {
        &self.eigensystem
    }

    /// S_m = (a_m† + a_m)^2 rotated to the eigenbasis.
    pub fn coupling_ops_eigen(&self) -> &[CMat<T>; 2] {
        &self.coupling_ops_eigen
    }

    /// Half-Fourier-filtered coupling operators Lam_m.
    pub fn lambda_ops(&self) -> &[CMat<T>; 2] {
        &self.lambda_ops
    }

    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }
}

/// Right-hand side of the Redfield equation for `rho` expressed in the
/// eigenbasis: -i[diag(E), rho] + sum_m ([Lam_m rho, S_m] + [S_m, rho Lam_m†]).
pub fn rhs_redfield<T: Scalar>(
    gen: &GeneratorRedfield<T>,
    rho: &DensityMatrix<T>,
) -> Result<CMat<T>> {
    let dim = gen.eigensystem.space().total_dim();
    if rho.space().total_dim() != dim {
        return Err(KerrError::DimensionMismatch { left: rho.space().total_dim(), right: dim });
    }
    let r = rho.matrix();
    let mut out = CMat::<T>::zeros(dim, dim);
    for j in 0..dim {
        for k in 0..dim {
            let de = gen.eigensystem.energies[j] - gen.eigensystem.energies[k];
            out[(j, k)] = r[(j, k)] * C::new(T::zero(), -de);
        }
    }
    for mode in 0..2 {
        let s = &gen.coupling_ops_eigen[mode];
        let lam = &gen.lambda_ops[mode];
        let a = lam * r;
        let b = r * lam.adjoint();
        out += &a * s - s * &a + s * &b - &b * s;
    }
    Ok(out)
}

/// out += alpha * a * b on square column-major matrices.
fn gemm_acc<T: Scalar>(out: &mut CMat<T>, alpha: C<T>, a: &CMat<T>, b: &CMat<T>) {
    let n = a.nrows();
    let a_s = a.as_slice();
    let b_s = b.as_slice();
    let o_s = out.as_mut_slice();
    for j in 0..n {
        let out_col = &mut o_s[j * n..(j + 1) * n];
        let b_col = &b_s[j * n..(j + 1) * n];
        for (k, bkj) in b_col.iter().enumerate() {
            let w = alpha * *bkj;
            if w.re == T::zero() && w.im == T::zero() {
                continue;
            }
            let a_col = &a_s[k * n..(k + 1) * n];
            for (o, av) in out_col.iter_mut().zip(a_col) {
                *o += *av * w;
            }
        }
    }
}

/// Interaction-picture right-hand side: the commutator with diag(E) is
/// absorbed into entrywise phases on S and Lam. For Hermitian states the
/// second commutator is the adjoint of the first,
/// [S, rho Lam†] = [Lam rho, S]†, so only three products per mode are formed.
struct RedfieldIpOde<'a, T: Scalar> {
    gen: &'a GeneratorRedfield<T>,
    phases: Vec<C<T>>,
    s_t: CMat<T>,
    l_t: CMat<T>,
    prod: CMat<T>,
    comm: CMat<T>,
}

impl<'a, T: Scalar> RedfieldIpOde<'a, T> {
    fn new(gen: &'a GeneratorRedfield<T>) -> Self {
        let dim = gen.eigensystem.space().total_dim();
        Self {
            gen,
            phases: vec![C::new(T::zero(), T::zero()); dim],
            s_t: CMat::zeros(dim, dim),
            l_t: CMat::zeros(dim, dim),
            prod: CMat::zeros(dim, dim),
            comm: CMat::zeros(dim, dim),
        }
    }

    /// out_{jk} = e^{i(E_j - E_k)t} op_{jk}
    fn mask(phases: &[C<T>], op: &CMat<T>, out: &mut CMat<T>) {
        let n = phases.len();
        let op_s = op.as_slice();
        let out_s = out.as_mut_slice();
        for k in 0..n {
            let pk = phases[k].conj();
            let col = k * n;
            for j in 0..n {
                out_s[col + j] = op_s[col + j] * phases[j] * pk;
            }
        }
    }
}

impl<T: Scalar> OdeRhs<T> for RedfieldIpOde<'_, T> {
    fn eval(&mut self, t: T, y: &CMat<T>, out: &mut CMat<T>) {
        let zero = C::new(T::zero(), T::zero());
        let one = C::new(T::one(), T::zero());
        for (p, e) in self.phases.iter_mut().zip(self.gen.eigensystem.energies.iter()) {
            let (s, c) = (*e * t).sin_cos();
            *p = C::new(c, s);
        }
        out.fill(zero);
        let n = self.phases.len();
        for mode in 0..2 {
            Self::mask(&self.phases, &self.gen.coupling_ops_eigen[mode], &mut self.s_t);
            Self::mask(&self.phases, &self.gen.lambda_ops[mode], &mut self.l_t);
            self.prod.fill(zero);
            gemm_acc(&mut self.prod, one, &self.l_t, y);
            self.comm.fill(zero);
            gemm_acc(&mut self.comm, one, &self.prod, &self.s_t);
            gemm_acc(&mut self.comm, -one, &self.s_t, &self.prod);
            // out += comm + comm†
            let c_s = self.comm.as_slice();
            let o_s = out.as_mut_slice();
            for k in 0..n {
                for j in 0..n {
                    o_s[k * n + j] += c_s[k * n + j] + c_s[j * n + k].conj();
                }
            }
        }
    }
}

/// Integrate the Redfield equation from a Fock-basis initial state; samples
/// are rotated back to the Fock basis before observable extraction.
pub fn evolve_redfield<T: Scalar>(
    gen: &GeneratorRedfield<T>,
    rho0: &DensityMatrix<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let space = *gen.eigensystem.space();
    if rho0.space() != &space {
        return Err(KerrError::DimensionMismatch {
            left: rho0.space().total_dim(),
            right: space.total_dim(),
        });
    }
    let dim = space.total_dim();
    let lambda = gen.params.lambda;
    // in the interaction picture the fastest retained phases sit at the
    // dissipator's Bohr frequencies, so the cap only guards sampling
    let max_step = cfg.max_step.unwrap_or_else(|| {
        let by_lambda =
            if lambda > T::zero() { re::<T>(0.1) / lambda } else { cfg.t_final };
        by_lambda.min(cfg.t_final / re::<T>(4.0))
    });

    let times = cfg.sample_times();
    let mut records: Vec<BlochRecord<T>> = Vec::with_capacity(times.len());
    let mut sigma = gen.eigensystem.to_eigenbasis(rho0.matrix());
    let mut integ = Dopri5::new(dim, cfg.rel_tol, cfg.abs_tol, max_step, re::<T>(1e-3));
    let mut ode = RedfieldIpOde::new(gen);

    let mut diag = RunDiagnostics {
        max_trace_dev: T::zero(),
        min_eigenvalue: T::one(),
        parity_drift: T::zero(),
        steps_accepted: 0,
        steps_rejected: 0,
        rhs_evals: 0,
        min_active_cutoff: space.cutoff_per_mode(),
        dropped_weight: T::zero(),
        tolerance_tightened: false,
    };

    let mut t = T::zero();
    let mut p_even0 = T::zero();
    let half = C::new(re::<T>(0.5), T::zero());
    for (si, &ts) in times.iter().enumerate() {
        if ts > t {
            integ.integrate_to(&mut ode, &mut t, &mut sigma, ts)?;
        }
        // undo the interaction picture, rotate back to the Fock basis
        let mut eig_frame = sigma.clone();
        for (p, e) in ode.phases.iter_mut().zip(gen.eigensystem.energies.iter()) {
            let (s, c) = (*e * ts).sin_cos();
            *p = C::new(c, -s);
        }
        RedfieldIpOde::<T>::mask(&ode.phases, &sigma, &mut eig_frame);
        let fock = gen.eigensystem.from_eigenbasis(&eig_frame);

        let m = (&fock + fock.adjoint()) * half;
        let tr = trace_re(&m);
        let trace_dev = (tr - T::one()).abs();
        if !(tr > T::zero()) {
            return Err(KerrError::InvalidState("trace collapsed during integration".into()));
        }
        let dm = DensityMatrix::from_raw(space, m / C::new(tr, T::zero()));
        let mut rec = bloch_extract(&dm);
        rec.time = ts;
        rec.trace_dev = trace_dev;
        rec.negativity = negativity(&dm)?;
        if si == 0 {
            p_even0 = rec.p_even;
        }
        diag.max_trace_dev = diag.max_trace_dev.max(rec.trace_dev);
        diag.min_eigenvalue = diag.min_eigenvalue.min(rec.min_eig);
        diag.parity_drift = diag.parity_drift.max((rec.p_even - p_even0).abs());
        records.push(rec);
    }

    diag.steps_accepted = integ.stats.accepted;
    diag.steps_rejected = integ.stats.rejected;
    diag.rhs_evals = integ.stats.rhs_evals;

    // final state back in the Fock basis
    let mut eig_frame = sigma.clone();
    RedfieldIpOde::<T>::mask(&ode.phases, &sigma, &mut eig_frame);
    let fock = gen.eigensystem.from_eigenbasis(&eig_frame);
    let herm = (&fock + fock.adjoint()) * half;
    let tr = trace_re(&herm);
    let final_state = DensityMatrix::from_raw(space, herm / C::new(tr, T::zero()));

    Ok(Trajectory { times, records, final_state, diagnostics: diag })
}
