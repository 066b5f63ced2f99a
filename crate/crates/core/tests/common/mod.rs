//! Independent reference computations shared by the integration tests and
//! the acceptance runner. Nothing here calls the library's weight table,
//! ghost layout or solver.

#![allow(dead_code)]

/// Children of one cell average, written out from the interpolation rule.
pub fn refine(left: f64, parent: f64, right: f64) -> (f64, f64) {
    let slope = (right - left) / 8.0;
    (parent - slope, parent + slope)
}

/// Weights `C_{gap,m}`, `m = -2..=2`, by brute force: refine a unit cell
/// datum `gap` times, shift by `velocity` finest cells, average back.
pub fn composed_weights(velocity: i32, gap: u32) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (slot, m) in (-2i64..=2).enumerate() {
        // level-0 cells -r..=r, datum 1 at cell m
        let r = 6i64;
        let mut first = -r;
        let mut cells: Vec<f64> = (-r..=r).map(|k| if k == m { 1.0 } else { 0.0 }).collect();
        for _ in 0..gap {
            let mut fine = Vec::with_capacity(2 * cells.len());
            for w in cells.windows(3) {
                let (e, o) = refine(w[0], w[1], w[2]);
                fine.push(e);
                fine.push(o);
            }
            first = 2 * (first + 1);
            cells = fine;
        }
        // finest cells covered by coarse cell 0, read after the shift
        let n = 1i64 << gap;
        let at = |j: i64| cells[(j - first) as usize];
        let moved: f64 = (0..n).map(|j| at(j - velocity as i64)).sum::<f64>() / n as f64;
        let before = if m == 0 { 1.0 } else { 0.0 };
        out[slot] = (moved - before) * n as f64;
    }
    out
}

/// Parameters of the reference D1Q3 loop.
#[derive(Debug, Clone, Copy)]
pub struct PlainD1q3 {
    pub wave_speed: f64,
    pub lattice_velocity: f64,
    pub relaxation: f64,
}

impl PlainD1q3 {
    /// Uniform collide and stream with copied end cells. Returns `(f0, f1, f2)`.
    pub fn run(&self, u0: &[f64], steps: usize) -> [Vec<f64>; 3] {
        let (c, lam, p) = (self.wave_speed, self.lattice_velocity, self.relaxation);
        let n = u0.len();
        let mut f0: Vec<f64> = u0.iter().map(|u| u * (1.0 - c * c / (lam * lam))).collect();
        let mut f1: Vec<f64> = u0.iter().map(|u| u * c * c / (2.0 * lam * lam)).collect();
        let mut f2 = f1.clone();
        for _ in 0..steps {
            for k in 0..n {
                let m0 = f0[k] + f1[k] + f2[k];
                let m1 = lam * (f1[k] - f2[k]);
                let m2 = 0.5 * lam * lam * (f1[k] + f2[k]);
                let m2 = (1.0 - p) * m2 + p * 0.5 * c * c * m0;
                let s = 2.0 * m2 / (lam * lam);
                let d = m1 / lam;
                f0[k] = m0 - s;
                f1[k] = 0.5 * (s + d);
                f2[k] = 0.5 * (s - d);
            }
            let mut g1 = vec![0.0; n];
            let mut g2 = vec![0.0; n];
            for k in 0..n {
                g1[k] = f1[k.saturating_sub(1)];
                g2[k] = f2[(k + 1).min(n - 1)];
            }
            f1 = g1;
            f2 = g2;
        }
        [f0, f1, f2]
    }
}

/// Average of `a + b x + c x^2` over `[x0, x1]`.
pub fn quadratic_average(coef: [f64; 3], x0: f64, x1: f64) -> f64 {
    // midpoint value plus the curvature term; differencing the primitive
    // cancels badly for narrow cells
    let (mid, w) = (0.5 * (x0 + x1), x1 - x0);
    coef[0] + coef[1] * mid + coef[2] * (mid * mid + w * w / 12.0)
}

/// Value of the last finest child of cell `k` after `gap` refinements,
/// given the cell averages of `k-1, k, k+1, k+2`.
pub fn last_descendant(window: [f64; 4], gap: u32) -> f64 {
    let mut w = window;
    for _ in 0..gap {
        let (e0, o0) = refine(w[0], w[1], w[2]);
        let (e1, o1) = refine(w[1], w[2], w[3]);
        w = [e0, o0, e1, o1];
    }
    w[1]
}

/// Value of the first finest child of cell `k` after `gap` refinements,
/// given the cell averages of `k-2, k-1, k, k+1`.
pub fn first_descendant(window: [f64; 4], gap: u32) -> f64 {
    let mut w = window;
    for _ in 0..gap {
        let (e0, o0) = refine(w[0], w[1], w[2]);
        let (e1, o1) = refine(w[1], w[2], w[3]);
        w = [e0, o0, e1, o1];
    }
    w[2]
}

/// Reference values for `l_jump = 1`: `(l_max, E_ref, E_jump, D_jump_refl)`.
pub const BENCHMARK_LJUMP1: [(u32, f64, f64, f64); 4] = [
    (8, 3.78e-2, 3.80e-2, 8.90e-7),
    (9, 1.92e-2, 1.93e-2, 5.95e-8),
    (10, 9.70e-3, 9.71e-3, 3.86e-9),
    (11, 4.87e-3, 4.87e-3, 2.46e-10),
];
