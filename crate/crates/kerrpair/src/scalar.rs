//! Scalar abstraction: the whole library is generic over the real scalar
//! type, with `f64` as the default used by the CLI and the paper runs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// Real scalar the simulator is generic over (`f32` or `f64`).
pub trait Scalar:
    nalgebra::RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive
{
    fn to_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: nalgebra::RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive
{
}

/// Complex number over a generic scalar.
pub type C<T> = Complex<T>;
/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex vector.
pub type CVec<T> = DVector<Complex<T>>;

/// Shorthand for lossless-enough conversion of literal constants.
#[inline]
pub(crate) fn re<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant conversion")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::linalg::SymmetricEigen;

    fn hermitian_eigen_smoke<T: Scalar>() -> (T, T) {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let m = CMat::<T>::from_row_slice(
            2,
            2,
            &[
                C::new(T::one(), T::zero()),
                C::new(T::zero(), T::one()),
                C::new(T::zero(), -T::one()),
                C::new(T::one(), T::zero()),
            ],
        );
        let eig = SymmetricEigen::new(m);
        let mut ev: Vec<T> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (ev[0], ev[1])
    }

    #[test]
    fn symmetric_eigen_is_generic_over_scalar() {
        let (a, b) = hermitian_eigen_smoke::<f64>();
        assert!((a - 0.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        let (a, b) = hermitian_eigen_smoke::<f32>();
        assert!((a - 0.0).abs() < 1e-5 && (b - 2.0).abs() < 1e-5);
    }
}
