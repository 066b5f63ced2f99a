//! Normalized L1 errors and differences on the uniform finest grid, and
//! convergence rates between consecutive refinements.

use crate::error::{Error, Result};
use crate::exact::WaveProblem;
use crate::mesh::{aligned_index, cell_center, cell_width, LeafField, MultiLevelGrid};
use crate::multiresolution::reconstruct;

/// `Σ_k Δx |v_k|`.
pub fn l1_norm(values: &[f64], dx: f64) -> f64 {
    values.iter().map(|v| v.abs()).sum::<f64>() * dx
}

fn l1_distance(a: &[f64], b: &[f64], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx
}

/// Finest-grid comparison context at one time: the exact solution sampled at
/// finest cell centers and its L1 norm, which normalizes every quantity.
#[derive(Debug, Clone)]
pub struct Comparison {
    level: u32,
    first: i64,
    exact: Vec<f64>,
    norm: f64,
}

impl Comparison {
    pub fn new(problem: &WaveProblem, t: f64, x_lo: f64, x_hi: f64, level: u32) -> Result<Self> {
        let first = aligned_index("x_lo", x_lo, level)?;
        let end = aligned_index("x_hi", x_hi, level)?;
        let exact: Vec<f64> = (first..end).map(|k| problem.exact_u(t, cell_center(level, k))).collect();
        let norm = l1_norm(&exact, cell_width(level));
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::InvalidParameter("exact solution has zero norm".into()));
        }
        Ok(Self {
            level,
            first,
            exact,
            norm,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `‖u(t, ·)‖_{1,Δx}`
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn exact(&self) -> &[f64] {
        &self.exact
    }

    fn dx(&self) -> f64 {
        cell_width(self.level)
    }

    fn check_grid(&self, grid: &MultiLevelGrid) -> Result<()> {
        if grid.finest_level() != self.level {
            return Err(Error::InvalidParameter(format!(
                "grid l_max = {} but comparison is at level {}",
                grid.finest_level(),
                self.level
            )));
        }
        Ok(())
    }

    /// Leaf field refined to the finest grid.
    pub fn finest(&self, grid: &MultiLevelGrid, field: &LeafField) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        let values = reconstruct(grid, field, self.level)?;
        if values.len() != self.exact.len() {
            return Err(Error::Dimension {
                expected: self.exact.len(),
                got: values.len(),
            });
        }
        Ok(values)
    }

    /// `‖û - u‖ / ‖u‖`
    pub fn error_vs_exact(&self, grid: &MultiLevelGrid, field: &LeafField) -> Result<f64> {
        let values = self.finest(grid, field)?;
        Ok(l1_distance(&values, &self.exact, self.dx()) / self.norm)
    }

    /// `‖û - u_ref‖ / ‖u‖` with `reference` already on the finest grid.
    pub fn diff_vs_ref(&self, grid: &MultiLevelGrid, field: &LeafField, reference: &[f64]) -> Result<f64> {
        if reference.len() != self.exact.len() {
            return Err(Error::Dimension {
                expected: self.exact.len(),
                got: reference.len(),
            });
        }
        let values = self.finest(grid, field)?;
        Ok(l1_distance(&values, reference, self.dx()) / self.norm)
    }

    /// L1 difference restricted to the finest leaves `C ⊂ [x_lo, jump_x]`
    /// (the interface-adjacent cell included), normalized. Read directly
    /// from the leaves, so the left part must be at `l_max`.
    pub fn reflected_diff(&self, grid: &MultiLevelGrid, field: &LeafField, reference: &[f64]) -> Result<f64> {
        self.check_grid(grid)?;
        let jump_x = grid
            .interface()
            .ok_or_else(|| Error::InvalidParameter("mesh has no interface".into()))?;
        let end = aligned_index("jump_x", jump_x, self.level)?;
        let seg = field
            .segment(self.level)
            .filter(|s| s.first == self.first && s.cells().end >= end)
            .ok_or_else(|| Error::InvalidParameter("left subdomain is not at the finest level".into()))?;
        let n = (end - self.first) as usize;
        if reference.len() < n {
            return Err(Error::Dimension {
                expected: self.exact.len(),
                got: reference.len(),
            });
        }
        Ok(l1_distance(&seg.values[..n], &reference[..n], self.dx()) / self.norm)
    }
}

/// `log2(e_{i-1} / e_i)` for each consecutive pair.
pub fn convergence_rates(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter("need at least two values".into()));
    }
    if let Some(&bad) = values.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidRate(bad));
    }
    Ok(values.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Rate between two values, `None` when undefined.
pub fn rate(previous: f64, current: f64) -> Option<f64> {
    convergence_rates(&[previous, current]).ok().map(|r| r[0])
}

/// The six normalized quantities at `t = T` for one `(l_max, l_jump)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub l_max: u32,
    pub l_jump: u32,
    pub e_ref: f64,
    pub e_coarse: f64,
    pub d_coarse: f64,
    pub e_jump: f64,
    pub d_jump: f64,
    pub d_jump_refl: f64,
    /// Rates vs the row with `l_max - 1`, in the order of [`values`](Self::values).
    pub rates: [Option<f64>; 6],
}

impl ErrorReport {
    pub const NAMES: [&'static str; 6] = ["E_ref", "E_coarse", "D_coarse", "E_jump", "D_jump", "D_jump_refl"];

    pub fn values(&self) -> [f64; 6] {
        [self.e_ref, self.e_coarse, self.d_coarse, self.e_jump, self.d_jump, self.d_jump_refl]
    }

    /// Fills `rates` against a coarser row.
    pub fn set_rates_from(&mut self, previous: &ErrorReport) {
        let (p, c) = (previous.values(), self.values());
        for i in 0..6 {
            self.rates[i] = rate(p[i], c[i]);
        }
    }
}
