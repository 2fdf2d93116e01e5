//! Embedded adaptive Dormand-Prince 5(4) over dense complex matrices, with
//! FSAL reuse and per-entry mixed absolute/relative error control.

use crate::error::{KerrError, Result};
use crate::scalar::{re, C, CMat, Scalar};

/// Right-hand side dy/dt = f(t, y). Implementors own their scratch space.
pub trait OdeRhs<T: Scalar> {
    fn eval(&mut self, t: T, y: &CMat<T>, out: &mut CMat<T>);
}

const STAGES: usize = 7;

// Dormand-Prince tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const CS: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B: [f64; 6] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// b - b*: embedded 4th-order error weights (last entry belongs to k7)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_CONSECUTIVE_REJECTS: usize = 60;

#[derive(Debug, Default, Clone, Copy)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

pub struct Dopri5<T: Scalar> {
    rel_tol: T,
    abs_tol: T,
    max_step: T,
    h: T,
    k: Vec<CMat<T>>,
    y_stage: CMat<T>,
    y_new: CMat<T>,
    fsal_ready: bool,
    pub stats: StepStats,
}

impl<T: Scalar> Dopri5<T> {
    pub fn new(dim: usize, rel_tol: T, abs_tol: T, max_step: T, h0: T) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_step,
            h: h0.min(max_step),
            k: (0..STAGES).map(|_| CMat::zeros(dim, dim)).collect(),
            y_stage: CMat::zeros(dim, dim),
            y_new: CMat::zeros(dim, dim),
            fsal_ready: false,
            stats: StepStats::default(),
        }
    }

    /// Current adaptive step suggestion; survives across sample boundaries.
    pub fn suggested_step(&self) -> T {
        self.h
    }

    /// Advance (t, y) to exactly t_end.
    pub fn integrate_to<R: OdeRhs<T>>(
        &mut self,
        rhs: &mut R,
        t: &mut T,
        y: &mut CMat<T>,
        t_end: T,
    ) -> Result<()> {
        let one = T::one();
        let safety = re::<T>(0.9);
        let shrink_floor = re::<T>(0.2);
        let growth_cap = re::<T>(10.0);
        let fifth = re::<T>(0.2);
        let mut consecutive_rejects = 0usize;

        while *t < t_end {
            let remaining = t_end - *t;
            let suggestion = self.h.min(self.max_step);
            // clip to the boundary; never stretch beyond the suggestion, or a
            // rejected boundary step would be retried at full width forever
            let hit_end = remaining <= suggestion;
            let h = if hit_end { remaining } else { suggestion };
            if *t + h == *t {
                return Err(KerrError::StepUnderflow { t_last: (*t).to_f64() });
            }

            if !self.fsal_ready {
                rhs.eval(*t, y, &mut self.k[0]);
                self.stats.rhs_evals += 1;
                self.fsal_ready = true;
            }

            for s in 1..STAGES - 1 {
                self.stage_input(y, s, h);
                let ts = *t + re::<T>(CS[s - 1]) * h;
                self.eval_into_k(rhs, s, ts, Buffer::Stage);
            }

            self.combine_solution(y, h);
            // k7 at (t + h, y_new) for the error estimate and FSAL
            self.eval_into_k(rhs, 6, *t + h, Buffer::Solution);
            let err = self.error_ratio(y, h);

            if err <= one {
                consecutive_rejects = 0;
                self.stats.accepted += 1;
                *t = if hit_end { t_end } else { *t + h };
                std::mem::swap(y, &mut self.y_new);
                self.k.swap(0, 6);
                // boundary-clipped steps keep the previous suggestion so a
                // sliver step cannot inflate it
                if !hit_end {
                    let fac = if err == T::zero() {
                        growth_cap
                    } else {
                        (safety * err.powf(-fifth)).clamp(shrink_floor, growth_cap)
                    };
                    self.h = (h * fac).min(self.max_step);
                }
            } else {
                self.stats.rejected += 1;
                consecutive_rejects += 1;
                if consecutive_rejects > MAX_CONSECUTIVE_REJECTS {
                    return Err(KerrError::StepUnderflow { t_last: (*t).to_f64() });
                }
                self.h = h * (safety * err.powf(-fifth)).clamp(shrink_floor, one);
                // k[0] still holds f(t, y)
            }
        }
        Ok(())
    }

    fn eval_into_k<R: OdeRhs<T>>(&mut self, rhs: &mut R, slot: usize, t: T, from: Buffer) {
        // take the input buffer out so rhs can borrow it alongside k[slot]
        let input = match from {
            Buffer::Stage => std::mem::replace(&mut self.y_stage, CMat::zeros(0, 0)),
            Buffer::Solution => std::mem::replace(&mut self.y_new, CMat::zeros(0, 0)),
        };
        rhs.eval(t, &input, &mut self.k[slot]);
        match from {
            Buffer::Stage => self.y_stage = input,
            Buffer::Solution => self.y_new = input,
        }
        self.stats.rhs_evals += 1;
    }

    /// y_stage = y + h * sum_j a[s][j] k_j
    fn stage_input(&mut self, y: &CMat<T>, s: usize, h: T) {
        let row = &A[s - 1];
        let y_s = y.as_slice();
        let out = self.y_stage.as_mut_slice();
        out.copy_from_slice(y_s);
        for (j, &a) in row.iter().enumerate().take(s) {
            if a == 0.0 {
                continue;
            }
            let w = C::new(re::<T>(a) * h, T::zero());
            for (o, k) in out.iter_mut().zip(self.k[j].as_slice()) {
                *o += w * *k;
            }
        }
    }

    /// y_new = y + h * sum_j b_j k_j (b7 = 0)
    fn combine_solution(&mut self, y: &CMat<T>, h: T) {
        let y_s = y.as_slice();
        let out = self.y_new.as_mut_slice();
        out.copy_from_slice(y_s);
        for (j, &b) in B.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let w = C::new(re::<T>(b) * h, T::zero());
            for (o, k) in out.iter_mut().zip(self.k[j].as_slice()) {
                *o += w * *k;
            }
        }
    }

    /// max-entry ratio of the embedded error estimate to the local tolerance
    fn error_ratio(&self, y: &CMat<T>, h: T) -> T {
        let n = y.len();
        let y_s = y.as_slice();
        let yn_s = self.y_new.as_slice();
        let mag = |z: C<T>| z.re.abs() + z.im.abs();
        let mut worst = T::zero();
        for idx in 0..n {
            let mut e = C::new(T::zero(), T::zero());
            for (j, &w) in E.iter().enumerate() {
                if w != 0.0 {
                    e += self.k[j].as_slice()[idx] * C::new(re::<T>(w) * h, T::zero());
                }
            }
            let scale = self.abs_tol + self.rel_tol * mag(y_s[idx]).max(mag(yn_s[idx]));
            worst = worst.max(mag(e) / scale);
        }
        worst
    }
}

#[derive(Clone, Copy)]
enum Buffer {
    Stage,
    Solution,
}
