//! Dormand–Prince 5(4) with local error control for autonomous linear systems.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10 }
    }
}

impl Tolerances {
    pub fn tightened(self, factor: f64) -> Self {
        Self { rtol: self.rtol / factor, atol: self.atol / factor }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive stepper. Keeps its step size and the first-same-as-last stage
/// between calls so that sampling on a grid does not restart the controller.
pub struct Dopri5 {
    tol: Tolerances,
    h: Option<f64>,
    k: [Vec<C64>; 7],
    fsal_valid: bool,
    scratch: Vec<C64>,
    y_new: Vec<C64>,
    pub stats: StepStats,
}

impl Dopri5 {
    pub fn new(n: usize, tol: Tolerances) -> Self {
        let z = || vec![C64::new(0.0, 0.0); n];
        Self {
            tol,
            h: None,
            k: [z(), z(), z(), z(), z(), z(), z()],
            fsal_valid: false,
            scratch: z(),
            y_new: z(),
            stats: StepStats::default(),
        }
    }

    fn error_scale(&self, a: C64, b: C64) -> f64 {
        self.tol.atol + self.tol.rtol * a.norm().max(b.norm())
    }

    fn initial_step<F>(&mut self, rhs: &F, y: &[C64], span: f64) -> f64
    where
        F: Fn(&[C64], &mut [C64]),
    {
        let n = y.len() as f64;
        let d0 = (y.iter().map(|v| (v.norm() / self.error_scale(*v, *v)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (y.iter().zip(&self.k[0]).map(|(v, f)| (f.norm() / self.error_scale(*v, *v)).powi(2)).sum::<f64>() / n).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        for ((s, v), f) in self.scratch.iter_mut().zip(y).zip(&self.k[0]) {
            *s = v + f * h0;
        }
        let mut f1 = vec![C64::new(0.0, 0.0); y.len()];
        rhs(&self.scratch, &mut f1);
        self.stats.evaluations += 1;
        let d2 = (y
            .iter()
            .zip(f1.iter().zip(&self.k[0]))
            .map(|(v, (a, b))| ((a - b).norm() / self.error_scale(*v, *v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 5.0) };
        (100.0 * h0).min(h1).min(span)
    }

    /// Integrates `y' = rhs(y)` from `t` to `t_end` in place.
    pub fn advance<F>(&mut self, rhs: &F, y: &mut [C64], t: f64, t_end: f64) -> Result<()>
    where
        F: Fn(&[C64], &mut [C64]),
    {
        let span = t_end - t;
        if span <= 0.0 {
            return Ok(());
        }
        if !self.fsal_valid {
            rhs(y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.fsal_valid = true;
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(rhs, y, span),
        };
        let mut t = t;
        let h_min = 1e-14 * t_end.abs().max(1.0);
        let mut last_rejected = false;
        while t < t_end {
            let remaining = t_end - t;
            let final_step = h >= remaining * (1.0 - 1e-12);
            let h_try = if final_step { remaining } else { h };
            if h_try < h_min && !final_step {
                return Err(Error::StepSizeUnderflow { t, h: h_try });
            }
            let err = self.try_step(rhs, y, h_try);
            if err <= 1.0 {
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                t = if final_step { t_end } else { t + h_try };
                self.stats.accepted += 1;
                let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
                fac = fac.clamp(0.2, 5.0);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                last_rejected = false;
                // do not let the forced final step shrink the controller's step
                if !final_step || h_try * fac > h {
                    h = h_try * fac;
                }
            } else {
                self.stats.rejected += 1;
                last_rejected = true;
                h = h_try * (0.9 * err.powf(-0.2)).max(0.2);
                if h < h_min {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
            }
        }
        self.h = Some(h);
        Ok(())
    }

    /// One trial step of size `h`; stores the candidate in `y_new` and the new
    /// derivative in `k[6]`. Returns the scaled error norm.
    fn try_step<F>(&mut self, rhs: &F, y: &[C64], h: f64) -> f64
    where
        F: Fn(&[C64], &mut [C64]),
    {
        let n = y.len();
        let stage = |scratch: &mut Vec<C64>, k: &[Vec<C64>; 7], coeffs: &[(usize, f64)]| {
            for i in 0..n {
                let mut acc = y[i];
                for &(j, a) in coeffs {
                    acc += k[j][i] * (a * h);
                }
                scratch[i] = acc;
            }
        };
        stage(&mut self.scratch, &self.k, &[(0, A21)]);
        rhs(&self.scratch, &mut self.k[1]);
        stage(&mut self.scratch, &self.k, &[(0, A31), (1, A32)]);
        rhs(&self.scratch, &mut self.k[2]);
        stage(&mut self.scratch, &self.k, &[(0, A41), (1, A42), (2, A43)]);
        rhs(&self.scratch, &mut self.k[3]);
        stage(&mut self.scratch, &self.k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        rhs(&self.scratch, &mut self.k[4]);
        stage(&mut self.scratch, &self.k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        rhs(&self.scratch, &mut self.k[5]);
        stage(&mut self.y_new, &self.k, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
        rhs(&self.y_new, &mut self.k[6]);
        self.stats.evaluations += 6;

        let mut sum = 0.0;
        #[allow(clippy::needless_range_loop)] // seven stage vectors indexed in lockstep
        for i in 0..n {
            let e = (self.k[0][i] * E1
                + self.k[2][i] * E3
                + self.k[3][i] * E4
                + self.k[4][i] * E5
                + self.k[5][i] * E6
                + self.k[6][i] * E7)
                * h;
            let sc = self.error_scale(y[i], self.y_new[i]);
            sum += (e.norm() / sc).powi(2);
        }
        (sum / n as f64).sqrt()
    }
}
