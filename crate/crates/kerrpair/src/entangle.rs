//! State analysis: partial transpose, negativity, parity populations,
//! Bloch-vector extraction, and the steady-state negativity diagnostics.

use crate::error::{KerrError, Result};
use crate::fock::{min_eigenvalue, DensityMatrix, TruncatedSpace};
use crate::scalar::{re, C, CMat, Scalar};
use nalgebra::linalg::SymmetricEigen;

/// Eigenvalue noise floor when summing the negative spectrum; keeps round-off
/// from registering as entanglement.
pub(crate) fn negativity_floor<T: Scalar>() -> T {
    re::<T>(1e-12).max(T::default_epsilon() * re::<T>(4.0))
}

/// Manifold observables, populations, and diagnostics at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochRecord<T: Scalar> {
    pub time: T,
    pub p00: T,
    pub p10: T,
    pub p01: T,
    /// s = P01 + P10
    pub s: T,
    /// u = rho_{01,10} + rho_{10,01}
    pub u: T,
    /// v = -i (rho_{10,01} - rho_{01,10})
    pub v: T,
    /// w = P10 - P01
    pub w: T,
    pub negativity: T,
    pub p_even: T,
    pub p_odd: T,
    pub trace_dev: T,
    pub min_eig: T,
}

/// Partial transpose with respect to one oscillator:
/// (rho^{T1})_{(n,i),(n',i')} = rho_{(n',i),(n,i')}.
pub fn partial_transpose<T: Scalar>(rho: &DensityMatrix<T>, subsystem: usize) -> Result<CMat<T>> {
    if rho.space().num_modes() != 2 {
        return Err(KerrError::Domain("partial transpose needs a two-mode state".into()));
    }
    if subsystem != 1 && subsystem != 2 {
        return Err(KerrError::BadSubsystem(subsystem));
    }
    let space = *rho.space();
    let m = rho.matrix();
    let dim = space.total_dim();
    let mut out = CMat::<T>::zeros(dim, dim);
    for col in 0..dim {
        let (np, ip) = space.unindex(col);
        for row in 0..dim {
            let (n, i) = space.unindex(row);
            let val = if subsystem == 1 {
                m[(space.index(np, i), space.index(n, ip))]
            } else {
                m[(space.index(n, ip), space.index(np, i))]
            };
            out[(row, col)] = val;
        }
    }
    Ok(out)
}

/// Negativity N = |sum of negative eigenvalues of rho^{T1}|; zero for any
/// separable state.
pub fn negativity<T: Scalar>(rho: &DensityMatrix<T>) -> Result<T> {
    let pt = partial_transpose(rho, 1)?;
    Ok(negativity_from_pt(&pt))
}

pub(crate) fn negativity_from_pt<T: Scalar>(pt: &CMat<T>) -> T {
    let eig = SymmetricEigen::new(pt.clone());
    let floor = -negativity_floor::<T>();
    let mut acc = T::zero();
    for ev in eig.eigenvalues.iter() {
        if *ev < floor {
            acc += *ev;
        }
    }
    -acc
}

/// Populations of even and odd total occupation, (P_even, P_odd).
pub fn parity_populations<T: Scalar>(rho: &DensityMatrix<T>) -> (T, T) {
    let space = rho.space();
    let m = rho.matrix();
    let mut even = T::zero();
    let mut odd = T::zero();
    for k in 0..space.total_dim() {
        let p = m[(k, k)].re;
        if space.total_quanta(k) % 2 == 0 {
            even += p;
        } else {
            odd += p;
        }
    }
    (even, odd)
}

/// Reads the manifold matrix elements over {|0,0>, |0,1>, |1,0>} and fills
/// everything except `time` and `negativity` (left zero for the caller).
pub fn bloch_extract<T: Scalar>(rho: &DensityMatrix<T>) -> BlochRecord<T> {
    let space = rho.space();
    let m = rho.matrix();
    let i00 = space.index(0, 0);
    let i01 = space.index(0, 1);
    let i10 = space.index(1, 0);
    let p00 = m[(i00, i00)].re;
    let p01 = m[(i01, i01)].re;
    let p10 = m[(i10, i10)].re;
    let c10_01 = m[(i10, i01)];
    let (p_even, p_odd) = parity_populations(rho);
    let two = re::<T>(2.0);
    BlochRecord {
        time: T::zero(),
        p00,
        p10,
        p01,
        s: p01 + p10,
        u: two * c10_01.re,
        v: two * c10_01.im,
        w: p10 - p01,
        negativity: T::zero(),
        p_even,
        p_odd,
        trace_dev: (rho.trace() - T::one()).abs(),
        min_eig: min_eigenvalue(rho.matrix()),
    }
}

/// Assemble a state supported on {|0,0>, |0,1>, |1,0>} with exchange
/// coherence rho_{10,01}; populations must sum to one.
pub fn manifold_state<T: Scalar>(
    p00: T,
    p01: T,
    p10: T,
    coherence: C<T>,
    cutoff: usize,
) -> Result<DensityMatrix<T>> {
    let space = TruncatedSpace::two_mode(cutoff)?;
    let mut m = CMat::<T>::zeros(space.total_dim(), space.total_dim());
    m[(space.index(0, 0), space.index(0, 0))] = C::new(p00, T::zero());
    m[(space.index(0, 1), space.index(0, 1))] = C::new(p01, T::zero());
    m[(space.index(1, 0), space.index(1, 0))] = C::new(p10, T::zero());
    m[(space.index(1, 0), space.index(0, 1))] = coherence;
    m[(space.index(0, 1), space.index(1, 0))] = coherence.conj();
    DensityMatrix::new(space, m)
}

/// Both sides of the quartic-root identity for manifold states: the product
/// of the four eigenvalues of the partially transposed block over
/// {|0,0>, |0,1>, |1,0>, |1,1>} against -|rho_{01,10}|^2 P10 P01.
pub fn vieta_product<T: Scalar>(rho: &DensityMatrix<T>) -> Result<(T, T)> {
    let space = *rho.space();
    if space.num_modes() != 2 {
        return Err(KerrError::Domain("vieta_product needs a two-mode state".into()));
    }
    let m = rho.matrix();
    let manifold = [space.index(0, 0), space.index(0, 1), space.index(1, 0)];
    let mut leak = T::zero();
    for k in 0..space.total_dim() {
        if !manifold.contains(&k) {
            leak += m[(k, k)].re.abs();
        }
    }
    if leak > re::<T>(1e-6) {
        return Err(KerrError::ManifoldLeak { leak: leak.to_f64() });
    }

    let pt = partial_transpose(rho, 1)?;
    let block_idx =
        [space.index(0, 0), space.index(0, 1), space.index(1, 0), space.index(1, 1)];
    let mut block = CMat::<T>::zeros(4, 4);
    for (r, &br) in block_idx.iter().enumerate() {
        for (c, &bc) in block_idx.iter().enumerate() {
            block[(r, c)] = pt[(br, bc)];
        }
    }
    let eig = SymmetricEigen::new(block);
    let lhs = eig.eigenvalues.iter().fold(T::one(), |acc, ev| acc * *ev);

    let coh = m[(space.index(0, 1), space.index(1, 0))];
    let p10 = m[(space.index(1, 0), space.index(1, 0))].re;
    let p01 = m[(space.index(0, 1), space.index(0, 1))].re;
    let rhs = -coh.norm_sqr() * p10 * p01;
    Ok((lhs, rhs))
}

/// Asymptotic negativity of the dephased steady state,
/// (P_odd - 1 + sqrt((P_odd - 1)^2 + P_odd^2)) / 2.
pub fn asymptotic_negativity<T: Scalar>(p_odd: T) -> Result<T> {
    if !(T::zero()..=T::one()).contains(&p_odd) {
        return Err(KerrError::Domain("p_odd must lie in [0, 1]".into()));
    }
    let shifted = p_odd - T::one();
    Ok((shifted + (shifted * shifted + p_odd * p_odd).sqrt()) / re::<T>(2.0))
}
