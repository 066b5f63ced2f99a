//! Prediction, projection and the transport weights they induce.
//!
//! Prediction refines a cell average into its two children using the
//! parent's immediate neighbours:
//!
//! ```text
//! even = parent + (left - right) / 8
//! odd  = parent - (left - right) / 8
//! ```
//!
//! which is exact on cell averages of quadratics. Projection is the mean of
//! the two children. Advecting the iterated prediction of a level-`ℓ` field
//! by one finest cell and projecting back gives the five-point update
//!
//! ```text
//! f_k(t + Δt) = f*_k + 2^-Δℓ Σ_{m=-2..2} C_{Δℓ,m} f*_{k+m}
//! ```
//!
//! whose weights obey a fixed 5×5 recursion in `Δℓ`.

use crate::error::{Error, Result};
use crate::mesh::{aligned_index, LeafField, Layout, MultiLevelGrid, Transfer};

/// `C_{Δℓ} = RECURSION · C_{Δℓ-1}`, rows and columns ordered `m = -2..=2`.
#[rustfmt::skip]
const RECURSION: [[f64; 5]; 5] = [
    [0.0, -0.125, 0.0,  0.0,   0.0],
    [2.0,  1.125, 0.0, -0.125, 0.0],
    [0.0,  1.125, 2.0,  1.125, 0.0],
    [0.0, -0.125, 0.0,  1.125, 2.0],
    [0.0,  0.0,   0.0, -0.125, 0.0],
];

/// Weights `(C_{Δℓ,-2}, ..., C_{Δℓ,2})` for dimensionless velocity
/// `velocity` seen from a cell `level_gap` levels below the finest.
pub fn compute_weights(velocity: i32, level_gap: u32) -> Result<[f64; 5]> {
    if velocity.abs() > 1 {
        return Err(Error::InvalidParameter(format!(
            "velocity {velocity} leaves the five-point stencil"
        )));
    }
    // the rest population superposes +1 and -1 on m = 0
    let mut w = [0.0; 5];
    if velocity != 0 {
        w[(2 - velocity) as usize] = 1.0;
        w[2] = -1.0;
    }
    for _ in 0..level_gap {
        let mut next = [0.0; 5];
        for (row, out) in RECURSION.iter().zip(next.iter_mut()) {
            *out = row.iter().zip(&w).map(|(a, b)| a * b).sum();
        }
        w = next;
    }
    Ok(w)
}

/// Per-velocity, per-level-gap weight table.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportWeights {
    /// `[alpha][gap]`
    table: Vec<Vec<[f64; 5]>>,
}

impl TransportWeights {
    pub fn new(velocities: &[i32], max_gap: u32) -> Result<Self> {
        let table = velocities
            .iter()
            .map(|&c| (0..=max_gap).map(|gap| compute_weights(c, gap)).collect())
            .collect::<Result<_>>()?;
        Ok(Self { table })
    }

    pub fn max_gap(&self) -> u32 {
        self.table.first().map_or(0, |t| t.len() as u32 - 1)
    }

    pub fn weights(&self, alpha: usize, gap: u32) -> &[f64; 5] {
        &self.table[alpha][gap as usize]
    }

    /// Coefficients of `f*_{k-2..=k+2}` in the updated `f_k`: the identity
    /// plus `2^-Δℓ C_{Δℓ}`. With `Δℓ = 0` this is an exact shift.
    pub fn update_stencil(&self, alpha: usize, gap: u32) -> [f64; 5] {
        let scale = 2f64.powi(-(gap as i32));
        let mut s = self.weights(alpha, gap).map(|c| scale * c);
        s[2] += 1.0;
        s
    }
}

/// Children `(even, odd)` of `parent` given its two neighbours.
#[inline]
pub fn predict(left: f64, parent: f64, right: f64) -> (f64, f64) {
    let d = 0.125 * (left - right);
    (parent + d, parent - d)
}

#[inline]
pub fn project(even: f64, odd: f64) -> f64 {
    0.5 * (even + odd)
}

/// Mean of `2^d` values as `d` rounds of [`project`], so constants are
/// reproduced exactly.
pub fn nested_mean(values: &[f64]) -> f64 {
    match values.len() {
        0 => f64::NAN,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            project(nested_mean(a), nested_mean(b))
        }
    }
}

/// Applies ghost fills in order to one flat storage vector.
pub fn apply_transfers(transfers: &[Transfer], values: &mut [f64]) {
    for t in transfers {
        match *t {
            Transfer::Copy { dst, src } => values[dst] = values[src],
            Transfer::Project { dst, first, len } => {
                values[dst] = nested_mean(&values[first..first + len])
            }
            Transfer::Predict {
                dst,
                left,
                parent,
                right,
                odd,
            } => {
                let (e, o) = predict(values[left], values[parent], values[right]);
                values[dst] = if odd { o } else { e };
            }
        }
    }
}

/// Fills every ghost of `grid` in `values` (one population in flat storage)
/// from the real cells: domain-end copies, averages of finer leaves and
/// predictions, in dependency order.
pub fn update_ghosts(grid: &MultiLevelGrid, values: &mut [f64]) -> Result<()> {
    if values.len() != grid.storage_len() {
        return Err(Error::Dimension {
            expected: grid.storage_len(),
            got: values.len(),
        });
    }
    apply_transfers(grid.transfers(), values);
    Ok(())
}

/// Refines a leaf field to the uniform grid at `target_level` with the same
/// fills used for ghosts. Returns one value per target-level cell of the
/// domain, left to right.
pub fn reconstruct(grid: &MultiLevelGrid, field: &LeafField, target_level: u32) -> Result<Vec<f64>> {
    let leaves = grid.leaves();
    if leaves.iter().any(|l| l.level > target_level) {
        return Err(Error::InvalidParameter(format!(
            "target level {target_level} is coarser than a leaf"
        )));
    }
    let lo = aligned_index("x_lo", grid.x_lo(), target_level)?;
    let hi = aligned_index("x_hi", grid.x_hi(), target_level)?;
    let layout = Layout::resolve(lo..hi, target_level, leaves, (lo..hi).map(|k| (target_level, k)))?;

    let mut storage = vec![0.0; layout.len];
    for seg in &field.segments {
        let block = layout
            .blocks
            .iter()
            .find(|b| b.level == seg.level && b.real == seg.cells())
            .ok_or_else(|| Error::InvalidParameter(format!("field segment at level {} does not match the mesh", seg.level)))?;
        storage[block.real_flat()].copy_from_slice(&seg.values);
    }
    apply_transfers(&layout.transfers, &mut storage);

    let top = layout.blocks.last().expect("target level block");
    Ok((lo..hi).map(|k| storage[top.flat(k)]).collect())
}
