//! Truncated Fock spaces, ladder operators, coherent states, and the tensor
//! products that assemble two-mode operators and states.
//!
//! Basis convention for two modes: |n,i> maps to the flat index n*M + i,
//! i.e. mode 1 is the slow (outer) index. Truncation is a hard wall: the
//! lowering operator still maps |M-1> -> sqrt(M-1)|M-2>, while raising out
//! of the top level gives zero.

use crate::error::{KerrError, Result};
use crate::scalar::{re, C, CMat, CVec, Scalar};

/// A Fock space truncated to `cutoff_per_mode` levels per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedSpace {
    cutoff_per_mode: usize,
    num_modes: usize,
}

impl TruncatedSpace {
    pub fn single_mode(cutoff: usize) -> Result<Self> {
        Self::new(cutoff, 1)
    }

    pub fn two_mode(cutoff: usize) -> Result<Self> {
        Self::new(cutoff, 2)
    }

    fn new(cutoff: usize, num_modes: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(KerrError::InvalidDimension { dim: cutoff });
        }
        Ok(Self { cutoff_per_mode: cutoff, num_modes })
    }

    pub fn cutoff_per_mode(&self) -> usize {
        self.cutoff_per_mode
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn total_dim(&self) -> usize {
        self.cutoff_per_mode.pow(self.num_modes as u32)
    }

    /// Flat index of the basis state |n,i>.
    pub fn index(&self, n: usize, i: usize) -> usize {
        debug_assert!(self.num_modes == 2);
        debug_assert!(n < self.cutoff_per_mode && i < self.cutoff_per_mode);
        n * self.cutoff_per_mode + i
    }

    /// Inverse of [`TruncatedSpace::index`].
    pub fn unindex(&self, idx: usize) -> (usize, usize) {
        debug_assert!(self.num_modes == 2);
        (idx / self.cutoff_per_mode, idx % self.cutoff_per_mode)
    }

    /// Total occupation n + i of the flat basis index.
    pub fn total_quanta(&self, idx: usize) -> usize {
        let (n, i) = self.unindex(idx);
        n + i
    }
}

/// Single-mode lowering operator a with <n-1|a|n> = sqrt(n).
pub fn ladder_lower<T: Scalar>(dim: usize) -> Result<CMat<T>> {
    if dim < 2 {
        return Err(KerrError::InvalidDimension { dim });
    }
    let mut a = CMat::<T>::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C::new(re::<T>(n as f64).sqrt(), T::zero());
    }
    Ok(a)
}

/// Single-mode raising operator a† (adjoint of [`ladder_lower`]).
pub fn ladder_raise<T: Scalar>(dim: usize) -> Result<CMat<T>> {
    Ok(ladder_lower::<T>(dim)?.adjoint())
}

/// Single-mode number operator a†a = diag(0, 1, ..., dim-1).
pub fn number_op<T: Scalar>(dim: usize) -> CMat<T> {
    CMat::from_fn(dim, dim, |r, c| {
        if r == c {
            C::new(re::<T>(r as f64), T::zero())
        } else {
            C::new(T::zero(), T::zero())
        }
    })
}

/// Kronecker product with the left factor on the slow (outer) index.
pub fn tensor_product<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// Embed a single-mode operator as op ⊗ I on the two-mode space.
pub fn embed_mode1<T: Scalar>(space: &TruncatedSpace, op: &CMat<T>) -> CMat<T> {
    let m = space.cutoff_per_mode();
    debug_assert_eq!(op.nrows(), m);
    tensor_product(op, &CMat::identity(m, m))
}

/// Embed a single-mode operator as I ⊗ op on the two-mode space.
pub fn embed_mode2<T: Scalar>(space: &TruncatedSpace, op: &CMat<T>) -> CMat<T> {
    let m = space.cutoff_per_mode();
    debug_assert_eq!(op.nrows(), m);
    tensor_product(&CMat::identity(m, m), op)
}

/// A pure state on a truncated space.
#[derive(Debug, Clone)]
pub struct StateVector<T: Scalar> {
    space: TruncatedSpace,
    amplitudes: CVec<T>,
    norm_deficit: T,
}

impl<T: Scalar> StateVector<T> {
    /// Normalizes the amplitudes; the pre-normalization deviation of the
    /// squared norm from one is kept as a truncation diagnostic.
    pub fn new(space: TruncatedSpace, amplitudes: CVec<T>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(KerrError::DimensionMismatch {
                left: amplitudes.len(),
                right: space.total_dim(),
            });
        }
        let norm_sq: T = amplitudes.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if norm_sq <= T::zero() {
            return Err(KerrError::InvalidState("zero state vector".into()));
        }
        let scale = C::new(T::one() / norm_sq.sqrt(), T::zero());
        Ok(Self {
            space,
            amplitudes: amplitudes * scale,
            norm_deficit: T::one() - norm_sq,
        })
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVec<T> {
        &self.amplitudes
    }

    /// 1 - |psi|^2 before renormalization (weight lost to the cutoff).
    pub fn norm_deficit(&self) -> T {
        self.norm_deficit
    }
}

/// Truncated coherent state |alpha> with c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!).
pub fn coherent_state<T: Scalar>(alpha: C<T>, cutoff: usize) -> Result<StateVector<T>> {
    let space = TruncatedSpace::single_mode(cutoff)?;
    let mut amps = CVec::<T>::zeros(cutoff);
    let half = re::<T>(0.5);
    let mut c = C::new((-alpha.norm_sqr() * half).exp(), T::zero());
    amps[0] = c;
    for n in 1..cutoff {
        c = c * alpha / C::new(re::<T>(n as f64).sqrt(), T::zero());
        amps[n] = c;
    }
    StateVector::new(space, amps)
}

/// A density matrix with enforced Hermiticity and unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix<T: Scalar> {
    space: TruncatedSpace,
    matrix: CMat<T>,
}

/// Hermiticity acceptance for constructed states; 1e-10 at f64 precision.
pub(crate) fn hermiticity_tol<T: Scalar>() -> T {
    re::<T>(1e-10).max(T::default_epsilon() * re::<T>(500.0))
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates Hermiticity and normalizes the trace to one.
    pub fn new(space: TruncatedSpace, matrix: CMat<T>) -> Result<Self> {
        let dim = space.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(KerrError::DimensionMismatch { left: matrix.nrows(), right: dim });
        }
        let herm_err = hermiticity_error(&matrix);
        if herm_err > hermiticity_tol::<T>() {
            return Err(KerrError::InvalidState(format!(
                "not Hermitian: max |rho - rho†| = {:e}",
                herm_err.to_f64()
            )));
        }
        let tr = trace_re(&matrix);
        if tr <= T::zero() || !tr.is_finite() {
            return Err(KerrError::InvalidState("trace must be positive and finite".into()));
        }
        let matrix = matrix / C::new(tr, T::zero());
        Ok(Self { space, matrix })
    }

    /// Wraps solver-internal matrices without re-validating.
    pub(crate) fn from_raw(space: TruncatedSpace, matrix: CMat<T>) -> Self {
        Self { space, matrix }
    }

    /// Projector |psi><psi| onto a pure state.
    pub fn from_pure(psi: &StateVector<T>) -> Self {
        let m = psi.amplitudes() * psi.amplitudes().adjoint();
        Self { space: *psi.space(), matrix: m }
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn trace(&self) -> T {
        trace_re(&self.matrix)
    }

    pub fn hermiticity_error(&self) -> T {
        hermiticity_error(&self.matrix)
    }

    /// Smallest eigenvalue of the (Hermitized) matrix.
    pub fn min_eigenvalue(&self) -> T {
        min_eigenvalue(&self.matrix)
    }
}

/// Product state rho = |psi1 ⊗ psi2><psi1 ⊗ psi2| on the two-mode space.
pub fn product_density<T: Scalar>(
    psi1: &StateVector<T>,
    psi2: &StateVector<T>,
) -> Result<DensityMatrix<T>> {
    if psi1.space().num_modes() != 1 || psi2.space().num_modes() != 1 {
        return Err(KerrError::InvalidState("product_density takes single-mode states".into()));
    }
    let m1 = psi1.space().cutoff_per_mode();
    let m2 = psi2.space().cutoff_per_mode();
    if m1 != m2 {
        return Err(KerrError::DimensionMismatch { left: m1, right: m2 });
    }
    let space = TruncatedSpace::two_mode(m1)?;
    let joint = psi1.amplitudes().kronecker(psi2.amplitudes());
    let matrix = &joint * joint.adjoint();
    Ok(DensityMatrix { space, matrix })
}

/// Real part of the trace.
pub fn trace_re<T: Scalar>(m: &CMat<T>) -> T {
    let mut tr = T::zero();
    for k in 0..m.nrows().min(m.ncols()) {
        tr += m[(k, k)].re;
    }
    tr
}

/// Max entrywise |m - m†|.
pub fn hermiticity_error<T: Scalar>(m: &CMat<T>) -> T {
    let mut worst = T::zero();
    for j in 0..m.ncols() {
        for i in 0..=j {
            let d = m[(i, j)] - m[(j, i)].conj();
            worst = worst.max(d.norm_sqr().sqrt());
        }
    }
    worst
}

/// Smallest eigenvalue of the Hermitized matrix (m + m†)/2.
pub fn min_eigenvalue<T: Scalar>(m: &CMat<T>) -> T {
    let half = C::new(re::<T>(0.5), T::zero());
    let herm = (m + m.adjoint()) * half;
    let eig = nalgebra::linalg::SymmetricEigen::new(herm);
    let mut lowest = eig.eigenvalues[0];
    for ev in eig.eigenvalues.iter().skip(1) {
        lowest = lowest.min(*ev);
    }
    lowest
}
