//! The Gaussian pulse and the d'Alembert solution of
//! `∂t u + ∂x v = 0`, `∂t v + c² ∂x u = 0` with `v(0, ·) = 0`.

use std::fmt;
use std::sync::Arc;

/// `exp(-100 (x - 3/2)²)`.
pub fn gaussian_u0(x: f64) -> f64 {
    let d = x - 1.5;
    (-100.0 * d * d).exp()
}

#[derive(Clone)]
pub struct WaveProblem {
    pub speed: f64,
    pub final_time: f64,
    initial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for WaveProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveProblem")
            .field("speed", &self.speed)
            .field("final_time", &self.final_time)
            .finish_non_exhaustive()
    }
}

impl WaveProblem {
    pub fn new(speed: f64, final_time: f64, initial: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            speed,
            final_time,
            initial: Arc::new(initial),
        }
    }

    /// Gaussian pulse, `c = 1/2`, `T = 1.5625`.
    pub fn gaussian() -> Self {
        Self::new(0.5, 1.5625, gaussian_u0)
    }

    pub fn u0(&self, x: f64) -> f64 {
        (self.initial)(x)
    }

    /// `(u0(x - ct) + u0(x + ct)) / 2`
    pub fn exact_u(&self, t: f64, x: f64) -> f64 {
        let s = self.speed * t;
        0.5 * (self.u0(x - s) + self.u0(x + s))
    }

    /// `c (u0(x - ct) - u0(x + ct)) / 2`
    pub fn exact_v(&self, t: f64, x: f64) -> f64 {
        let s = self.speed * t;
        0.5 * self.speed * (self.u0(x - s) - self.u0(x + s))
    }
}
