//! Physical ingredients of the coupled-oscillator model: parameters, Ohmic
//! bath rates, lab-frame and RWA Hamiltonians, and the dissipators entering
//! the master equation.
//!
//! Units: hbar = k_B = m = 1 throughout; omega0 = 1 is the default time unit.

use crate::error::{KerrError, Result};
use crate::fock::{
    embed_mode1, embed_mode2, ladder_lower, number_op, tensor_product, TruncatedSpace,
};
use crate::scalar::{re, C, CMat, Scalar};
use crate::sparse::SparseOp;

/// Physical parameters of the two-oscillator system.
///
/// The frequencies are symmetric (omega1 = omega2 = omega0). Anharmonicities
/// and dissipation strengths may differ per mode; the RWA generator requires
/// gamma1 = gamma2, the Redfield solver does not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T: Scalar> {
    pub omega0: T,
    pub mu1: T,
    pub mu2: T,
    pub lambda: T,
    pub gamma1: T,
    pub gamma2: T,
    pub temperature: T,
}

impl<T: Scalar> SystemParams<T> {
    pub fn new(
        omega0: T,
        mu1: T,
        mu2: T,
        lambda: T,
        gamma1: T,
        gamma2: T,
        temperature: T,
    ) -> Result<Self> {
        if omega0 <= T::zero() {
            return Err(KerrError::Domain("omega0 must be positive".into()));
        }
        // lambda = 0 is admitted so a run can continue with the coupling
        // switched off; negative couplings are not part of the model.
        if lambda < T::zero() {
            return Err(KerrError::Domain("lambda must be non-negative".into()));
        }
        if gamma1 < T::zero() || gamma2 < T::zero() {
            return Err(KerrError::Domain("dissipation strengths must be non-negative".into()));
        }
        if temperature < T::zero() {
            return Err(KerrError::Domain("temperature must be non-negative".into()));
        }
        Ok(Self { omega0, mu1, mu2, lambda, gamma1, gamma2, temperature })
    }

    /// Symmetric setup: mu1 = mu2 = mu and gamma1 = gamma2 = gamma0.
    pub fn symmetric(omega0: T, mu: T, lambda: T, gamma0: T, temperature: T) -> Result<Self> {
        Self::new(omega0, mu, mu, lambda, gamma0, gamma0, temperature)
    }

    /// RWA validity expects lambda << omega0; violations are warnings, not errors.
    pub fn is_weak_coupling(&self) -> bool {
        self.lambda < self.omega0 / re::<T>(10.0)
    }

    pub fn bath_spectrum(&self, gamma: T) -> BathSpectrum<T> {
        BathSpectrum { gamma0: gamma, omega0: self.omega0, temperature: self.temperature }
    }
}

/// Ohmic spectral density kappa(omega) = Gamma0 * omega / (2 omega0) with a
/// thermal occupation at temperature T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpectrum<T: Scalar> {
    pub gamma0: T,
    pub omega0: T,
    pub temperature: T,
}

impl<T: Scalar> BathSpectrum<T> {
    pub fn new(gamma0: T, omega0: T, temperature: T) -> Self {
        Self { gamma0, omega0, temperature }
    }

    /// kappa(omega) for omega >= 0; kappa(0) = 0 (Ohmic limit).
    pub fn kappa(&self, omega: T) -> T {
        if omega <= T::zero() {
            T::zero()
        } else {
            self.gamma0 * omega / (re::<T>(2.0) * self.omega0)
        }
    }
}

/// Bose-Einstein occupation N(omega) = 1 / (e^{omega/T} - 1); exactly 0 at T = 0.
pub fn bose_einstein<T: Scalar>(omega: T, temperature: T) -> Result<T> {
    if omega <= T::zero() {
        return Err(KerrError::Domain(
            "Bose-Einstein occupation needs omega > 0; negative frequencies are \
             handled by the caller via detailed balance"
                .into(),
        ));
    }
    if temperature == T::zero() {
        return Ok(T::zero());
    }
    Ok(T::one() / (omega / temperature).exp_m1())
}

/// One-sided-Fourier dissipation rate at a signed frequency:
/// emission kappa(omega)[N + 1] for omega > 0, absorption kappa(|omega|) N for
/// omega < 0.
pub fn rate_gamma<T: Scalar>(spectrum: &BathSpectrum<T>, omega: T) -> Result<T> {
    if omega == T::zero() {
        return Err(KerrError::Domain("rate_gamma is undefined at omega = 0".into()));
    }
    if omega > T::zero() {
        let n = bose_einstein(omega, spectrum.temperature)?;
        Ok(spectrum.kappa(omega) * (n + T::one()))
    } else {
        let n = bose_einstein(-omega, spectrum.temperature)?;
        Ok(spectrum.kappa(-omega) * n)
    }
}

/// Cross-dissipator rates Upsilon± = gamma(lambda) ± gamma(-lambda).
///
/// The difference collapses algebraically to kappa(lambda); computing it that
/// way avoids cancellation at high occupation. lambda = 0 gives (0, 0).
pub fn upsilons<T: Scalar>(spectrum: &BathSpectrum<T>, lambda: T) -> Result<(T, T)> {
    if lambda < T::zero() {
        return Err(KerrError::Domain("coupling frequency must be non-negative".into()));
    }
    if lambda == T::zero() {
        return Ok((T::zero(), T::zero()));
    }
    let kappa = spectrum.kappa(lambda);
    let n = bose_einstein(lambda, spectrum.temperature)?;
    let two = re::<T>(2.0);
    Ok((kappa * (two * n + T::one()), kappa))
}

/// Oscillator Hamiltonian in RWA:
/// sum_m [(omega0 + mu_m) n_m + mu_m n_m^2] + (lambda/2)(a1† a2 + a2† a1).
pub fn hamiltonian_rwa<T: Scalar>(
    params: &SystemParams<T>,
    space: &TruncatedSpace,
) -> Result<CMat<T>> {
    require_two_modes(space)?;
    let m = space.cutoff_per_mode();
    let n = number_op::<T>(m);
    let nn = &n * &n;
    let a = ladder_lower::<T>(m)?;
    let ad = a.adjoint();

    let mode = |mu: T| -> CMat<T> {
        &n * C::new(params.omega0 + mu, T::zero()) + &nn * C::new(mu, T::zero())
    };
    let half_lambda = C::new(params.lambda / re::<T>(2.0), T::zero());
    let coupling = (tensor_product(&ad, &a) + tensor_product(&a, &ad)) * half_lambda;

    Ok(embed_mode1(space, &mode(params.mu1)) + embed_mode2(space, &mode(params.mu2)) + coupling)
}

/// Lab-frame system Hamiltonian:
/// sum_m [p_m^2/2 + omega0^2 q_m^2/2 + (2 mu_m/3) q_m^4] + omega0 lambda q1 q2,
/// with q = (a† + a)/sqrt(2 omega0) and p = i sqrt(omega0/2)(a† - a).
pub fn hamiltonian_lab<T: Scalar>(
    params: &SystemParams<T>,
    space: &TruncatedSpace,
) -> Result<CMat<T>> {
    require_two_modes(space)?;
    let m = space.cutoff_per_mode();
    let w = params.omega0;
    let a = ladder_lower::<T>(m)?;
    let ad = a.adjoint();
    let x_plus = &ad + &a; // sqrt(2 omega0) * q
    let x_minus = &ad - &a;
    let x_plus_sq = &x_plus * &x_plus;

    let quarter_w = C::new(w / re::<T>(4.0), T::zero());
    let mode = |mu: T| -> CMat<T> {
        // p^2/2 = -(w/4)(a† - a)^2, w^2 q^2 / 2 = (w/4)(a† + a)^2
        let harmonic = (&x_plus_sq - &x_minus * &x_minus) * quarter_w;
        let quartic_scale = re::<T>(2.0) * mu / (re::<T>(3.0) * re::<T>(4.0) * w * w);
        harmonic + &x_plus_sq * &x_plus_sq * C::new(quartic_scale, T::zero())
    };

    // sqrt(omega1 omega2) lambda q1 q2 = (lambda/2)(a1† + a1)(a2† + a2) for equal omegas
    let coupling =
        tensor_product(&x_plus, &x_plus) * C::new(params.lambda / re::<T>(2.0), T::zero());

    Ok(embed_mode1(space, &mode(params.mu1)) + embed_mode2(space, &mode(params.mu2)) + coupling)
}

/// Dissipation superoperator L[X] rho = -1/2 X X† rho - 1/2 rho X X† + X† rho X.
///
/// Note the sandwich convention: for X = a†a† this describes two-quantum loss.
pub fn lindblad_apply<T: Scalar>(x: &CMat<T>, rho: &CMat<T>) -> Result<CMat<T>> {
    if x.nrows() != x.ncols() || x.nrows() != rho.nrows() || rho.nrows() != rho.ncols() {
        return Err(KerrError::DimensionMismatch { left: x.nrows(), right: rho.nrows() });
    }
    let half = C::new(re::<T>(0.5), T::zero());
    let xxd = x * x.adjoint();
    Ok(x.adjoint() * rho * x - (&xxd * rho + rho * &xxd) * half)
}

/// Integration frame for the RWA propagator. `Rotating` drops the common
/// omega0 (n1 + n2) term; manifold coherences and the negativity are
/// unaffected, while the fastest retained timescale relaxes from 1/omega0
/// to the mu and lambda scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    #[default]
    Rotating,
    LabPhase,
}

/// The four operators of the Upsilon- block of the cross dissipator,
/// prebuilt on the two-mode space: D = n1 - n2 and J = a1†a2 - a2†a1.
#[derive(Debug, Clone)]
pub struct UpsilonMinusBlock<T: Scalar> {
    pub dj: CMat<T>,
    pub j: CMat<T>,
    pub jdag_d: CMat<T>,
    pub d: CMat<T>,
}

struct Sandwich<T: Scalar> {
    weight: C<T>,
    left: SparseOp<T>,
    right: SparseOp<T>,
}

/// Precomputed operator set defining the RWA master equation.
pub struct GeneratorRwa<T: Scalar> {
    space: TruncatedSpace,
    params: SystemParams<T>,
    frame: Frame,
    hamiltonian: CMat<T>,
    jump_set: Vec<(CMat<T>, T)>,
    upsilon_block: UpsilonMinusBlock<T>,
    rate_emission: T,
    rate_absorption: T,
    upsilon_plus: T,
    upsilon_minus: T,
    // matrix-free fast path: rhs = G rho + rho G† + sum_k w_k A_k rho B_k
    g: SparseOp<T>,
    g_adj: SparseOp<T>,
    sandwiches: Vec<Sandwich<T>>,
}

impl<T: Scalar> GeneratorRwa<T> {
    pub fn build(params: &SystemParams<T>, space: TruncatedSpace, frame: Frame) -> Result<Self> {
        require_two_modes(&space)?;
        if params.gamma1 != params.gamma2 {
            return Err(KerrError::AsymmetricRates);
        }
        let m = space.cutoff_per_mode();
        let bath = params.bath_spectrum(params.gamma1);
        let two_omega = re::<T>(2.0) * params.omega0;
        let rate_emission = rate_gamma(&bath, two_omega)?;
        let rate_absorption = rate_gamma(&bath, -two_omega)?;
        let (upsilon_plus, upsilon_minus) = upsilons(&bath, params.lambda)?;

        let a = ladder_lower::<T>(m)?;
        let ad = a.adjoint();
        let aa = &a * &a;
        let n = number_op::<T>(m);
        let n1 = embed_mode1(&space, &n);
        let n2 = embed_mode2(&space, &n);
        let d = &n1 - &n2;
        let j = tensor_product(&ad, &a) - tensor_product(&a, &ad);

        let hamiltonian = hamiltonian_rwa(params, &space)?;
        let theta = match frame {
            Frame::Rotating => params.omega0,
            Frame::LabPhase => T::zero(),
        };
        let h_frame = &hamiltonian - (&n1 + &n2) * C::new(theta, T::zero());

        let jump_set: Vec<(CMat<T>, T)> = vec![
            (embed_mode1(&space, &aa), rate_absorption),
            (embed_mode2(&space, &aa), rate_absorption),
            (embed_mode1(&space, &aa.adjoint()), rate_emission),
            (embed_mode2(&space, &aa.adjoint()), rate_emission),
            (d.clone(), upsilon_plus),
        ];

        let upsilon_block = UpsilonMinusBlock {
            dj: &d * &j,
            j: j.clone(),
            jdag_d: j.adjoint() * &d,
            d: d.clone(),
        };

        // one-sided part: G = -i H' - 1/2 sum_k rate_k X_k X_k† - (Y-/2) D J
        let half = re::<T>(0.5);
        let mut g = &h_frame * C::new(T::zero(), -T::one());
        for (x, rate) in &jump_set {
            if *rate != T::zero() {
                g += x * x.adjoint() * C::new(-half * *rate, T::zero());
            }
        }
        g += &upsilon_block.dj * C::new(-half * upsilon_minus, T::zero());

        let mut sandwiches = Vec::new();
        for (x, rate) in &jump_set {
            if *rate != T::zero() {
                sandwiches.push(Sandwich {
                    weight: C::new(*rate, T::zero()),
                    left: SparseOp::from_dense(&x.adjoint()),
                    right: SparseOp::from_dense(x),
                });
            }
        }
        if upsilon_minus != T::zero() {
            let w = C::new(half * upsilon_minus, T::zero());
            sandwiches.push(Sandwich {
                weight: w,
                left: SparseOp::from_dense(&j),
                right: SparseOp::from_dense(&d),
            });
            sandwiches.push(Sandwich {
                weight: w,
                left: SparseOp::from_dense(&d),
                right: SparseOp::from_dense(&j.adjoint()),
            });
        }

        let g_adj = SparseOp::from_dense(&g.adjoint());
        let g = SparseOp::from_dense(&g);

        Ok(Self {
            space,
            params: *params,
            frame,
            hamiltonian,
            jump_set,
            upsilon_block,
            rate_emission,
            rate_absorption,
            upsilon_plus,
            upsilon_minus,
            g,
            g_adj,
            sandwiches,
        })
    }

    /// Rebuild the same physics on a smaller per-mode cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        Self::build(&self.params, TruncatedSpace::two_mode(cutoff)?, self.frame)
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// The literal RWA Hamiltonian (including the omega0 (n1 + n2) term).
    pub fn hamiltonian_rwa(&self) -> &CMat<T> {
        &self.hamiltonian
    }

    /// Jump operators with their rates: (a1a1, a2a2) at the absorption rate,
    /// (a1†a1†, a2†a2†) at the emission rate, and n1 - n2 at Upsilon+.
    pub fn jump_set(&self) -> &[(CMat<T>, T)] {
        &self.jump_set
    }

    pub fn upsilon_minus_block(&self) -> &UpsilonMinusBlock<T> {
        &self.upsilon_block
    }

    pub fn upsilon_plus(&self) -> T {
        self.upsilon_plus
    }

    pub fn upsilon_minus(&self) -> T {
        self.upsilon_minus
    }

    pub fn rate_emission(&self) -> T {
        self.rate_emission
    }

    pub fn rate_absorption(&self) -> T {
        self.rate_absorption
    }

    /// Matrix-free right-hand side of the RWA master equation; `out` receives
    /// the full generator action, `scratch` must have the same shape.
    pub(crate) fn apply_rhs(&self, rho: &CMat<T>, out: &mut CMat<T>, scratch: &mut CMat<T>) {
        let zero = C::new(T::zero(), T::zero());
        let one = C::new(T::one(), T::zero());
        out.fill(zero);
        self.g.acc_left(one, rho, out);
        self.g_adj.acc_right(one, rho, out);
        for s in &self.sandwiches {
            scratch.fill(zero);
            s.left.acc_left(one, rho, scratch);
            s.right.acc_right(s.weight, scratch, out);
        }
    }
}

/// Cross dissipator D12(lambda), verbatim:
/// Y+ L[n1 - n2] rho - (Y-/2)[D J rho - J rho D + rho J† D - D rho J†].
pub fn cross_dissipator_apply<T: Scalar>(
    gen: &GeneratorRwa<T>,
    rho: &CMat<T>,
) -> Result<CMat<T>> {
    let dim = gen.space.total_dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(KerrError::DimensionMismatch { left: rho.nrows(), right: dim });
    }
    let blk = &gen.upsilon_block;
    let jdag = blk.j.adjoint();
    let minus_part = &blk.dj * rho - &blk.j * rho * &blk.d + rho * &blk.jdag_d
        - &blk.d * rho * &jdag;
    Ok(lindblad_apply(&blk.d, rho)? * C::new(gen.upsilon_plus, T::zero())
        - minus_part * C::new(gen.upsilon_minus / re::<T>(2.0), T::zero()))
}

fn require_two_modes(space: &TruncatedSpace) -> Result<()> {
    if space.num_modes() != 2 {
        return Err(KerrError::Domain("this operation needs a two-mode space".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    type M = CMat<f64>;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn fig1_params() -> SystemParams<f64> {
        SystemParams::symmetric(1.0, 1e-3, 5e-4, 1e-3, 0.0).unwrap()
    }

    fn random_hermitian(seed: &[f64], n: usize) -> M {
        let raw = M::from_fn(n, n, |r, q| c(seed[2 * (r * n + q)], seed[2 * (r * n + q) + 1]));
        (&raw + raw.adjoint()) * c(0.5, 0.0)
    }

    #[test]
    fn bose_einstein_zero_temperature() {
        assert_eq!(bose_einstein(2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bose_einstein_closed_form() {
        let n = bose_einstein(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(n, 1.0 / (1.0_f64.exp() - 1.0), epsilon = 1e-14);
        assert_abs_diff_eq!(n, 0.581977, epsilon = 1e-6);
    }

    #[test]
    fn bose_einstein_classical_limit() {
        let n: f64 = bose_einstein(1.0, 1e6).unwrap();
        assert!((n - 1e6).abs() / 1e6 < 1e-3);
    }

    #[test]
    fn bose_einstein_rejects_nonpositive_frequency() {
        assert!(bose_einstein(0.0, 1.0).is_err());
        assert!(bose_einstein(-1.0, 1.0).is_err());
    }

    #[test]
    fn rate_gamma_paper_values() {
        let bath = BathSpectrum::new(1e-3, 1.0, 0.0);
        assert_abs_diff_eq!(rate_gamma(&bath, 2.0).unwrap(), 1e-3, epsilon = 1e-18);
        assert_eq!(rate_gamma(&bath, -2.0).unwrap(), 0.0);
        // Ohmic density at the coupling frequency
        assert_abs_diff_eq!(rate_gamma(&bath, 5e-4).unwrap(), 2.5e-7, epsilon = 1e-20);
        assert!(rate_gamma(&bath, 0.0).is_err());
    }

    #[test]
    fn upsilons_zero_temperature_equal() {
        let bath = BathSpectrum::new(1e-3, 1.0, 0.0);
        let (up, um) = upsilons(&bath, 5e-4).unwrap();
        assert_abs_diff_eq!(up, 2.5e-7, epsilon = 1e-20);
        assert_eq!(up, um);
    }

    #[test]
    fn upsilons_temperature_regimes() {
        // lambda << k_B T: Y+ > Y-
        let hot = BathSpectrum::new(1e-3, 1.0, 1.0);
        let (up, um) = upsilons(&hot, 5e-4).unwrap();
        assert!(up > um);
        // lambda >> k_B T: Y+ ~ Y-
        let cold = BathSpectrum::new(1e-3, 1.0, 1e-6);
        let (up, um) = upsilons(&cold, 5e-4).unwrap();
        assert!(up / um - 1.0 < 1e-3);
    }

    #[test]
    fn upsilons_switched_off_coupling() {
        let bath = BathSpectrum::new(1e-3, 1.0, 0.5);
        assert_eq!(upsilons(&bath, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rwa_hamiltonian_bare_number_diagonal() {
        let params = SystemParams::symmetric(1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let space = TruncatedSpace::two_mode(2).unwrap();
        let h = hamiltonian_rwa(&params, &space).unwrap();
        let expect = [0.0, 1.0, 1.0, 2.0];
        for k in 0..4 {
            for l in 0..4 {
                let want = if k == l { expect[k] } else { 0.0 };
                assert_abs_diff_eq!(h[(k, l)].re, want, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn rwa_hamiltonian_coupling_element() {
        let params = fig1_params();
        let space = TruncatedSpace::two_mode(4).unwrap();
        let h = hamiltonian_rwa(&params, &space).unwrap();
        let el = h[(space.index(1, 0), space.index(0, 1))];
        assert_abs_diff_eq!(el.re, params.lambda / 2.0, epsilon = 1e-18);
        assert_eq!(el.im, 0.0);
    }

    #[test]
    fn rwa_hamiltonian_kerr_diagonal() {
        let params = fig1_params();
        let space = TruncatedSpace::two_mode(4).unwrap();
        let h = hamiltonian_rwa(&params, &space).unwrap();
        let idx = space.index(2, 0);
        assert_abs_diff_eq!(h[(idx, idx)].re, 2.006, epsilon = 1e-12);
    }

    #[test]
    fn rwa_hamiltonian_conserves_total_number() {
        let params = fig1_params();
        let space = TruncatedSpace::two_mode(5).unwrap();
        let h = hamiltonian_rwa(&params, &space).unwrap();
        let m = space.cutoff_per_mode();
        let ntot = embed_mode1(&space, &number_op::<f64>(m)) + embed_mode2(&space, &number_op(m));
        let comm = &h * &ntot - &ntot * &h;
        assert_eq!(comm.map(|x| x.norm()).max(), 0.0);
    }

    #[test]
    fn lab_hamiltonian_harmonic_spectrum() {
        let params = SystemParams::symmetric(1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let space = TruncatedSpace::two_mode(12).unwrap();
        let h = hamiltonian_lab(&params, &space).unwrap();
        let eig = nalgebra::linalg::SymmetricEigen::new(h);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // two-mode spectrum n1 + n2 + 1; degeneracies 1, 2, 3, ...
        let expect = [1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0, 4.0, 4.0, 4.0];
        for (k, want) in expect.iter().enumerate() {
            assert_abs_diff_eq!(ev[k], want, epsilon = 1e-9);
        }
    }

    #[test]
    fn lab_quartic_diagonal_matches_kerr_form() {
        // number-conserving part of (2mu/3) q^4 at omega0 = 1 is mu (n + n^2) + const
        let mu = 1e-3;
        let with = SystemParams::symmetric(1.0, mu, 0.0, 0.0, 0.0).unwrap();
        let without = SystemParams::symmetric(1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let space = TruncatedSpace::two_mode(9).unwrap();
        let dq = hamiltonian_lab(&with, &space).unwrap() - hamiltonian_lab(&without, &space).unwrap();
        let c0 = dq[(0, 0)].re; // additive constant, mu/2 per mode
        for n in 0..5 {
            let idx = space.index(n, 0);
            assert_abs_diff_eq!(
                dq[(idx, idx)].re - c0,
                mu * (n as f64 + (n * n) as f64),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn lab_coupling_two_quantum_element() {
        let params = fig1_params();
        let space = TruncatedSpace::two_mode(4).unwrap();
        let zero_lambda = SystemParams { lambda: 0.0, ..params };
        let dh = hamiltonian_lab(&params, &space).unwrap()
            - hamiltonian_lab(&zero_lambda, &space).unwrap();
        let el = dh[(space.index(0, 0), space.index(1, 1))];
        assert_abs_diff_eq!(el.re, params.lambda / 2.0, epsilon = 1e-18);
    }

    #[test]
    fn lab_minus_rwa_is_identity_on_low_block() {
        // number-conserving part of H_lab minus H_RWA restricted to the
        // {|0,0>, |0,1>, |1,0>, |1,1>} block is a multiple of the identity
        let params = fig1_params();
        let space = TruncatedSpace::two_mode(8).unwrap();
        let lab = hamiltonian_lab(&params, &space).unwrap();
        let rwa = hamiltonian_rwa(&params, &space).unwrap();
        let block = [space.index(0, 0), space.index(0, 1), space.index(1, 0), space.index(1, 1)];
        let shift = lab[(block[0], block[0])].re - rwa[(block[0], block[0])].re;
        for &x in &block {
            for &y in &block {
                let same_sector = space.total_quanta(x) == space.total_quanta(y);
                let lab_nc = if same_sector { lab[(x, y)] } else { c(0.0, 0.0) };
                let want = if x == y { rwa[(x, y)] + c(shift, 0.0) } else { rwa[(x, y)] };
                assert_abs_diff_eq!((lab_nc - want).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let params = fig1_params();
        let space = TruncatedSpace::two_mode(6).unwrap();
        let h1 = hamiltonian_rwa(&params, &space).unwrap();
        let h2 = hamiltonian_lab(&params, &space).unwrap();
        assert!(crate::fock::hermiticity_error(&h1) < 1e-12);
        assert!(crate::fock::hermiticity_error(&h2) < 1e-12);
    }

    #[test]
    fn lindblad_identity_jump_is_null() {
        let n = 4;
        let x = M::identity(n, n);
        let rho = M::identity(n, n) * c(1.0 / n as f64, 0.0);
        let out = lindblad_apply(&x, &rho).unwrap();
        assert_eq!(out.map(|v| v.norm()).max(), 0.0);
    }

    #[test]
    fn lindblad_two_quantum_loss_rate() {
        // L[a†a†] on |2><2| (M = 4): population arrives at |0> at rate 2
        let a = ladder_lower::<f64>(4).unwrap();
        let x = a.adjoint() * a.adjoint();
        let mut rho = M::zeros(4, 4);
        rho[(2, 2)] = c(1.0, 0.0);
        let out = lindblad_apply(&x, &rho).unwrap();
        assert_abs_diff_eq!(out[(0, 0)].re, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(out[(2, 2)].re, -2.0, epsilon = 1e-13);
    }

    #[test]
    fn generator_rejects_asymmetric_rates() {
        let params = SystemParams::new(1.0, 1e-3, 1e-3, 5e-4, 1e-3, 2e-3, 0.0).unwrap();
        let space = TruncatedSpace::two_mode(4).unwrap();
        assert!(matches!(
            GeneratorRwa::build(&params, space, Frame::Rotating),
            Err(KerrError::AsymmetricRates)
        ));
    }

    #[test]
    fn generator_gain_rates_vanish_at_zero_temperature() {
        let gen =
            GeneratorRwa::build(&fig1_params(), TruncatedSpace::two_mode(4).unwrap(), Frame::Rotating)
                .unwrap();
        assert_eq!(gen.rate_absorption(), 0.0);
        assert!(gen.rate_emission() > 0.0);
        for (_, rate) in gen.jump_set() {
            assert!(*rate >= 0.0);
        }
    }

    #[test]
    fn cross_dissipator_dephasing_of_exchange_coherence() {
        // Y+ part on |1,0><0,1| acts as -2 Y+ rho
        let params = SystemParams::symmetric(1.0, 1e-3, 5e-4, 1e-3, 0.4).unwrap();
        let space = TruncatedSpace::two_mode(3).unwrap();
        let gen = GeneratorRwa::build(&params, space, Frame::Rotating).unwrap();
        let mut rho = M::zeros(9, 9);
        rho[(space.index(1, 0), space.index(0, 1))] = c(1.0, 0.0);
        // isolate the Y+ part by subtracting the verbatim Y- block
        let full = cross_dissipator_apply(&gen, &rho).unwrap();
        let blk = gen.upsilon_minus_block();
        let jdag = blk.j.adjoint();
        let minus = (&blk.dj * &rho - &blk.j * &rho * &blk.d + &rho * &blk.jdag_d
            - &blk.d * &rho * &jdag)
            * c(gen.upsilon_minus() / 2.0, 0.0);
        let plus_part = full + minus;
        let expect = &rho * c(-2.0 * gen.upsilon_plus(), 0.0);
        assert!((&plus_part - &expect).map(|x| x.norm()).max() < 1e-18);
    }

    #[test]
    fn cross_dissipator_feeds_exchange_coherence_from_diagonal_state() {
        // On a diagonal swap-symmetric state the Y- block leaves every
        // population untouched and seeds the |1,0><0,1| coherence at rate
        // -Y- (P01 + P10). That seed is what drives u toward -P_odd in the
        // steady state; it does not cancel.
        let params = SystemParams::symmetric(1.0, 1e-3, 5e-4, 1e-3, 0.2).unwrap();
        let space = TruncatedSpace::two_mode(3).unwrap();
        let gen = GeneratorRwa::build(&params, space, Frame::Rotating).unwrap();
        let (p01, p10) = (0.3, 0.3);
        let mut rho = M::zeros(9, 9);
        rho[(space.index(0, 0), space.index(0, 0))] = c(0.4, 0.0);
        rho[(space.index(0, 1), space.index(0, 1))] = c(p01, 0.0);
        rho[(space.index(1, 0), space.index(1, 0))] = c(p10, 0.0);
        let blk = gen.upsilon_minus_block();
        let jdag = blk.j.adjoint();
        let minus = (&blk.dj * &rho - &blk.j * &rho * &blk.d + &rho * &blk.jdag_d
            - &blk.d * &rho * &jdag)
            * c(-gen.upsilon_minus() / 2.0, 0.0);
        for k in 0..9 {
            assert_eq!(minus[(k, k)], c(0.0, 0.0));
        }
        let cdot = minus[(space.index(1, 0), space.index(0, 1))];
        assert_abs_diff_eq!(cdot.re, -gen.upsilon_minus() * (p01 + p10), epsilon = 1e-20);
        assert_eq!(cdot.im, 0.0);
    }

    #[test]
    fn cross_dissipator_annihilates_dephased_steady_state() {
        // Full cross dissipator on the long-time state (P10 = P01 = s/2,
        // rho_{10,01} = -s/2) gives zero at T = 0 where Y+ = Y-.
        let params = fig1_params();
        let space = TruncatedSpace::two_mode(3).unwrap();
        let gen = GeneratorRwa::build(&params, space, Frame::Rotating).unwrap();
        let s = 0.44;
        let mut rho = M::zeros(9, 9);
        rho[(space.index(0, 0), space.index(0, 0))] = c(1.0 - s, 0.0);
        rho[(space.index(0, 1), space.index(0, 1))] = c(s / 2.0, 0.0);
        rho[(space.index(1, 0), space.index(1, 0))] = c(s / 2.0, 0.0);
        rho[(space.index(1, 0), space.index(0, 1))] = c(-s / 2.0, 0.0);
        rho[(space.index(0, 1), space.index(1, 0))] = c(-s / 2.0, 0.0);
        let out = cross_dissipator_apply(&gen, &rho).unwrap();
        assert!(out.map(|x| x.norm()).max() < 1e-20);
    }

    #[test]
    fn fast_rhs_matches_verbatim_equation() {
        // G rho + rho G† + sandwiches == -i[H', rho] + sum_m L terms + D12
        let params = SystemParams::symmetric(1.0, 1e-3, 5e-4, 1e-3, 0.3).unwrap();
        let space = TruncatedSpace::two_mode(3).unwrap();
        let n = space.total_dim();
        for frame in [Frame::Rotating, Frame::LabPhase] {
            let gen = GeneratorRwa::build(&params, space, frame).unwrap();
            let seed: Vec<f64> = (0..2 * n * n).map(|k| ((k * 2654435761 % 997) as f64) / 997.0 - 0.5).collect();
            let rho = random_hermitian(&seed, n);

            let mut fast = M::zeros(n, n);
            let mut scratch = M::zeros(n, n);
            gen.apply_rhs(&rho, &mut fast, &mut scratch);

            let m1 = embed_mode1(&space, &number_op::<f64>(3));
            let m2 = embed_mode2(&space, &number_op::<f64>(3));
            let theta = match frame {
                Frame::Rotating => params.omega0,
                Frame::LabPhase => 0.0,
            };
            let h = gen.hamiltonian_rwa() - (m1 + m2) * c(theta, 0.0);
            let mut verbatim = (&h * &rho - &rho * &h) * c(0.0, -1.0);
            for (x, rate) in gen.jump_set().iter().take(4) {
                verbatim += lindblad_apply(x, &rho).unwrap() * c(*rate, 0.0);
            }
            verbatim += cross_dissipator_apply(&gen, &rho).unwrap();

            let diff = (&fast - &verbatim).map(|x| x.norm()).max();
            assert!(diff < 5e-14, "frame {frame:?}: diff = {diff:e}");
        }
    }

    proptest! {
        #[test]
        fn detailed_balance(omega in 0.05f64..4.0, temp in 0.05f64..8.0) {
            let bath = BathSpectrum::new(1e-3, 1.0, temp);
            let up = rate_gamma(&bath, omega).unwrap();
            let down = rate_gamma(&bath, -omega).unwrap();
            let ratio = up / down;
            let boltzmann = (omega / temp).exp();
            prop_assert!((ratio / boltzmann - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lindblad_apply_is_traceless_and_hermitian(seed in prop::collection::vec(-1.0f64..1.0, 2 * 16 + 2 * 16)) {
            let n = 4;
            let x = M::from_fn(n, n, |r, q| c(seed[2 * (r * n + q)], seed[2 * (r * n + q) + 1]));
            let rho = random_hermitian(&seed[2 * n * n..], n);
            let out = lindblad_apply(&x, &rho).unwrap();
            let tr: C<f64> = (0..n).map(|k| out[(k, k)]).sum();
            prop_assert!(tr.norm() < 1e-12);
            prop_assert!(crate::fock::hermiticity_error(&out) < 1e-12);
        }

        #[test]
        fn cross_dissipator_traceless_and_hermitian(seed in prop::collection::vec(-1.0f64..1.0, 2 * 81)) {
            // the verbatim Y- block must annihilate the trace and preserve
            // Hermiticity; confirmed numerically at M = 3 as the oracle
            let params = SystemParams::symmetric(1.0, 1e-3, 5e-4, 1e-3, 0.25).unwrap();
            let space = TruncatedSpace::two_mode(3).unwrap();
            let gen = GeneratorRwa::build(&params, space, Frame::Rotating).unwrap();
            let rho = random_hermitian(&seed, 9);
            let out = cross_dissipator_apply(&gen, &rho).unwrap();
            let tr: C<f64> = (0..9).map(|k| out[(k, k)]).sum();
            prop_assert!(tr.norm() < 1e-18);
            prop_assert!(crate::fock::hermiticity_error(&out) < 1e-18);
        }
    }
}
