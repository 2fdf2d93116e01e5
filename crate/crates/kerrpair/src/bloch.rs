//! Closed-form manifold dynamics in the weak-dephasing limit
//! (lambda >> Y+ = Y- = Y): the reference solutions the propagators are
//! validated against, and the source of the cone trajectory.

use crate::entangle::asymptotic_negativity;
use crate::error::{KerrError, Result};
use crate::scalar::{re, Scalar};

/// Initial manifold data for the closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochInitial<T: Scalar> {
    pub s0: T,
    pub u0: T,
    pub v0: T,
    pub w0: T,
    pub p_odd: T,
    pub lambda: T,
    pub upsilon: T,
}

impl<T: Scalar> BlochInitial<T> {
    /// s0 is pinned to P_odd (it is a constant of motion).
    pub fn new(u0: T, v0: T, w0: T, p_odd: T, lambda: T, upsilon: T) -> Result<Self> {
        if lambda <= T::zero() {
            return Err(KerrError::Domain("lambda must be positive".into()));
        }
        if upsilon < T::zero() {
            return Err(KerrError::Domain("upsilon must be non-negative".into()));
        }
        let len_sq = u0 * u0 + v0 * v0 + w0 * w0;
        if len_sq > p_odd * p_odd + re::<T>(1e-9) {
            return Err(KerrError::Domain(
                "Bloch vector length exceeds the odd-population radius".into(),
            ));
        }
        Ok(Self { s0: p_odd, u0, v0, w0, p_odd, lambda, upsilon })
    }
}

/// Closed-form (s, u, v, w) at time t:
/// s = P_odd,
/// w = e^{-Yt} [w0 cos(lambda t) - v0 sin(lambda t)],
/// u = P_odd (e^{-2Yt} - 1) + u0 e^{-2Yt},
/// v = e^{-Yt} [v0 cos(lambda t) + w0 sin(lambda t)].
pub fn bloch_solution<T: Scalar>(init: &BlochInitial<T>, t: T) -> (T, T, T, T) {
    let decay = (-init.upsilon * t).exp();
    let decay2 = decay * decay;
    let (sin, cos) = (init.lambda * t).sin_cos();
    let s = init.p_odd;
    let w = decay * (init.w0 * cos - init.v0 * sin);
    let u = init.p_odd * (decay2 - T::one()) + init.u0 * decay2;
    let v = decay * (init.v0 * cos + init.w0 * sin);
    (s, u, v, w)
}

/// Asymptotic negativity for two equally displaced oscillators; here so the
/// oracle module is self-contained for cross-module checks.
pub fn steady_negativity_two_displaced<T: Scalar>(p_odd: T) -> Result<T> {
    asymptotic_negativity(p_odd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig1_init() -> BlochInitial<f64> {
        BlochInitial::new(0.05, -0.2, 0.35, 0.432, 5e-4, 2.5e-7).unwrap()
    }

    #[test]
    fn initial_condition_recovered_at_t_zero() {
        let init = fig1_init();
        let (s, u, v, w) = bloch_solution(&init, 0.0);
        assert_eq!((s, u, v, w), (init.s0, init.u0, init.v0, init.w0));
    }

    #[test]
    fn long_time_limit_is_dephased_state() {
        let init = fig1_init();
        let t = 50.0 / init.upsilon;
        let (s, u, v, w) = bloch_solution(&init, t);
        assert_eq!(s, init.p_odd);
        assert_abs_diff_eq!(u, -init.p_odd, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_dephasing_traces_a_circle() {
        let init = BlochInitial::<f64>::new(0.1, -0.2, 0.3, 0.5, 5e-4, 0.0).unwrap();
        let radius = (init.w0 * init.w0 + init.v0 * init.v0).sqrt();
        for k in 0..40 {
            let t = k as f64 * 400.0;
            let (_, u, v, w) = bloch_solution(&init, t);
            assert_abs_diff_eq!((w * w + v * v).sqrt(), radius, epsilon = 1e-12);
            assert_eq!(u, init.u0);
        }
    }

    #[test]
    fn cone_decay_identity() {
        // sqrt(w^2 + v^2) = e^{-Yt} sqrt(w0^2 + v0^2), the cone of the
        // Bloch trajectory
        let init = fig1_init();
        let radius0 = (init.w0 * init.w0 + init.v0 * init.v0).sqrt();
        for k in 0..60 {
            let t = k as f64 * 1.7e5;
            let (_, _, v, w) = bloch_solution(&init, t);
            let expect = (-init.upsilon * t).exp() * radius0;
            assert_abs_diff_eq!((w * w + v * v).sqrt(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn central_differences_satisfy_the_bloch_ode() {
        // ds/dt = 0, du/dt = -2Y(u + P_odd), dw/dt = -Yw - lambda v,
        // dv/dt = -Yv + lambda w, to relative 1e-8
        let init = fig1_init();
        let h = 1e-4 / init.lambda;
        let scale = init.lambda * init.p_odd;
        for k in 1..50 {
            let t = k as f64 * 3.1e5;
            let (s, u, v, w) = bloch_solution(&init, t);
            let plus = bloch_solution(&init, t + h);
            let minus = bloch_solution(&init, t - h);
            let ds = (plus.0 - minus.0) / (2.0 * h);
            let du = (plus.1 - minus.1) / (2.0 * h);
            let dv = (plus.2 - minus.2) / (2.0 * h);
            let dw = (plus.3 - minus.3) / (2.0 * h);
            assert_eq!(s, init.p_odd);
            assert_abs_diff_eq!(ds, 0.0, epsilon = 1e-8 * scale);
            assert_abs_diff_eq!(
                du,
                -2.0 * init.upsilon * (u + init.p_odd),
                epsilon = 1e-8 * scale
            );
            assert_abs_diff_eq!(dw, -init.upsilon * w - init.lambda * v, epsilon = 1e-8 * scale);
            assert_abs_diff_eq!(dv, -init.upsilon * v + init.lambda * w, epsilon = 1e-8 * scale);
        }
    }

    #[test]
    fn steady_negativity_examples() {
        assert_eq!(steady_negativity_two_displaced(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(steady_negativity_two_displaced(1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            steady_negativity_two_displaced(0.49084).unwrap(),
            0.09899,
            epsilon = 5e-5
        );
    }

    #[test]
    fn rejects_unphysical_initial_data() {
        assert!(BlochInitial::<f64>::new(0.9, 0.0, 0.0, 0.4, 5e-4, 0.0).is_err());
        assert!(BlochInitial::<f64>::new(0.0, 0.0, 0.0, 0.4, 0.0, 1e-7).is_err());
        assert!(BlochInitial::<f64>::new(0.0, 0.0, 0.0, 0.4, 5e-4, -1e-7).is_err());
    }
}
