//! Moment-space lattice Boltzmann algebra.
//!
//! A scheme is defined by its integer velocities `c_α`, the lattice velocity
//! `λ`, an invertible moment matrix `M`, a diagonal relaxation matrix `S` and
//! an equilibrium map taking the conserved moments to the full vector of
//! equilibrium moments. Collision reads
//!
//! ```text
//! m  = M f
//! f* = M⁻¹ ((I - S) m + S m_eq(m_0, ..., m_{qc-1}))
//! ```
//!
//! and is applied cell by cell. Conserved moments are the leading `q_c`
//! slots and carry a zero relaxation rate.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Upper bound on `q`; collision works on stack buffers of this size.
pub const MAX_VELOCITIES: usize = 32;

type EquilibriumFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

#[derive(Clone)]
pub struct SchemeSpec {
    velocities: Vec<i32>,
    lattice_velocity: f64,
    /// Row-major `q × q`.
    moment_matrix: Vec<f64>,
    /// Row-major `q × q`, computed once at construction.
    inverse: Vec<f64>,
    relaxation: Vec<f64>,
    conserved_count: usize,
    equilibrium: Arc<EquilibriumFn>,
}

impl fmt::Debug for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchemeSpec")
            .field("velocities", &self.velocities)
            .field("lattice_velocity", &self.lattice_velocity)
            .field("moment_matrix", &self.moment_matrix)
            .field("relaxation", &self.relaxation)
            .field("conserved_count", &self.conserved_count)
            .finish_non_exhaustive()
    }
}

impl SchemeSpec {
    /// Builds a scheme from its defining data.
    ///
    /// `moment_matrix` is row-major. The equilibrium callback receives the
    /// `q_c` conserved moments and writes all `q` equilibrium moments; it must
    /// leave the conserved slots unchanged, which is probed here on the unit
    /// vectors of the conserved space.
    pub fn new<E>(
        velocities: Vec<i32>,
        lattice_velocity: f64,
        moment_matrix: Vec<f64>,
        relaxation: Vec<f64>,
        conserved_count: usize,
        equilibrium: E,
    ) -> Result<Self>
    where
        E: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let q = velocities.len();
        if q == 0 || q > MAX_VELOCITIES {
            return Err(Error::InvalidParameter(format!(
                "velocity count {q} outside 1..={MAX_VELOCITIES}"
            )));
        }
        if !(lattice_velocity > 0.0 && lattice_velocity.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lattice velocity {lattice_velocity} must be positive"
            )));
        }
        if moment_matrix.len() != q * q {
            return Err(Error::Dimension {
                expected: q * q,
                got: moment_matrix.len(),
            });
        }
        if relaxation.len() != q {
            return Err(Error::Dimension {
                expected: q,
                got: relaxation.len(),
            });
        }
        if conserved_count > q {
            return Err(Error::InvalidParameter(format!(
                "{conserved_count} conserved moments for {q} velocities"
            )));
        }
        for (i, &s) in relaxation.iter().enumerate() {
            let ok = if i < conserved_count {
                s == 0.0
            } else {
                s > 0.0 && s <= 2.0
            };
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "relaxation rate s_{i} = {s} (conserved slots need 0, others (0, 2])"
                )));
            }
        }

        let inverse = invert(&moment_matrix, q)?;
        let spec = Self {
            velocities,
            lattice_velocity,
            moment_matrix,
            inverse,
            relaxation,
            conserved_count,
            equilibrium: Arc::new(equilibrium),
        };
        spec.check_equilibrium()?;
        Ok(spec)
    }

    fn check_equilibrium(&self) -> Result<()> {
        let qc = self.conserved_count;
        let mut conserved = vec![0.0; qc];
        let mut eq = vec![0.0; self.q()];
        for j in 0..qc {
            conserved.iter_mut().for_each(|c| *c = 0.0);
            conserved[j] = 1.0;
            (self.equilibrium)(&conserved, &mut eq);
            if eq[..qc] != conserved[..] {
                return Err(Error::InvalidParameter(
                    "equilibrium map alters the conserved moments".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.velocities.len()
    }

    pub fn velocities(&self) -> &[i32] {
        &self.velocities
    }

    pub fn lattice_velocity(&self) -> f64 {
        self.lattice_velocity
    }

    pub fn relaxation(&self) -> &[f64] {
        &self.relaxation
    }

    pub fn conserved_count(&self) -> usize {
        self.conserved_count
    }

    /// Entry `(row, col)` of `M`.
    pub fn moment_entry(&self, row: usize, col: usize) -> f64 {
        self.moment_matrix[row * self.q() + col]
    }

    /// Entry `(row, col)` of the cached `M⁻¹`.
    pub fn inverse_entry(&self, row: usize, col: usize) -> f64 {
        self.inverse[row * self.q() + col]
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.q() {
            return Err(Error::Dimension {
                expected: self.q(),
                got: len,
            });
        }
        Ok(())
    }

    /// `m = M f`.
    pub fn moments(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        let mut m = vec![0.0; self.q()];
        mat_vec(&self.moment_matrix, f, &mut m);
        Ok(m)
    }

    /// `f = M⁻¹ m`.
    pub fn populations(&self, m: &[f64]) -> Result<Vec<f64>> {
        self.check_len(m.len())?;
        let mut f = vec![0.0; self.q()];
        mat_vec(&self.inverse, m, &mut f);
        Ok(f)
    }

    /// Relaxes a moment vector in place. Conserved slots are never written.
    pub fn relax_moments(&self, m: &mut [f64]) {
        let qc = self.conserved_count;
        let mut eq = [0.0; MAX_VELOCITIES];
        let eq = &mut eq[..self.q()];
        (self.equilibrium)(&m[..qc], eq);
        for i in qc..self.q() {
            let s = self.relaxation[i];
            m[i] = (1.0 - s) * m[i] + s * eq[i];
        }
    }

    /// Post-collision populations.
    pub fn collide(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        let mut out = f.to_vec();
        self.collide_in_place(&mut out);
        Ok(out)
    }

    /// Hot-loop variant of [`collide`](Self::collide); `f.len()` must be `q`.
    #[inline]
    pub fn collide_in_place(&self, f: &mut [f64]) {
        debug_assert_eq!(f.len(), self.q());
        let mut m = [0.0; MAX_VELOCITIES];
        let m = &mut m[..self.q()];
        mat_vec(&self.moment_matrix, f, m);
        self.relax_moments(m);
        mat_vec(&self.inverse, m, f);
    }

    /// Equilibrium moments for the given conserved moments.
    pub fn equilibrium_moments(&self, conserved: &[f64]) -> Result<Vec<f64>> {
        if conserved.len() != self.conserved_count {
            return Err(Error::Dimension {
                expected: self.conserved_count,
                got: conserved.len(),
            });
        }
        let mut eq = vec![0.0; self.q()];
        (self.equilibrium)(conserved, &mut eq);
        Ok(eq)
    }

    /// Populations at equilibrium for the given conserved moments.
    pub fn equilibrium_populations(&self, conserved: &[f64]) -> Result<Vec<f64>> {
        let eq = self.equilibrium_moments(conserved)?;
        self.populations(&eq)
    }

    /// The D1Q3 scheme for the first-order wave system
    /// `∂t u + ∂x v = 0`, `∂t v + c² ∂x u = 0`.
    ///
    /// Velocities `(0, 1, -1)`, moments `u = f0 + f1 + f2`,
    /// `v = λ (f1 - f2)`, `w = λ²/2 (f1 + f2)`, relaxation `diag(0, 0, p)`
    /// and `w_eq = c² u / 2`.
    pub fn d1q3_wave(wave_speed: f64, lattice_velocity: f64, relaxation: f64) -> Result<Self> {
        if !(wave_speed > 0.0 && wave_speed < lattice_velocity) {
            return Err(Error::InvalidParameter(format!(
                "wave speed {wave_speed} must lie in (0, λ = {lattice_velocity})"
            )));
        }
        if !(relaxation > 0.0 && relaxation <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "relaxation rate {relaxation} must lie in (0, 2]"
            )));
        }
        let l = lattice_velocity;
        let c2 = wave_speed * wave_speed;
        #[rustfmt::skip]
        let m = vec![
            1.0, 1.0,           1.0,
            0.0, l,             -l,
            0.0, l * l / 2.0,   l * l / 2.0,
        ];
        Self::new(
            vec![0, 1, -1],
            lattice_velocity,
            m,
            vec![0.0, 0.0, relaxation],
            2,
            move |conserved, eq| {
                eq[0] = conserved[0];
                eq[1] = conserved[1];
                eq[2] = 0.5 * c2 * conserved[0];
            },
        )
    }
}

#[inline]
fn mat_vec(a: &[f64], x: &[f64], y: &mut [f64]) {
    let n = x.len();
    for (row, yi) in a.chunks_exact(n).zip(y.iter_mut()) {
        *yi = row.iter().zip(x).fold(0.0, |acc, (a, x)| acc + a * x);
    }
}

fn invert(a: &[f64], q: usize) -> Result<Vec<f64>> {
    if q == 3 {
        return invert3(a);
    }
    let m = DMatrix::from_row_slice(q, q, a);
    let inv = m.try_inverse().ok_or(Error::SingularMatrix)?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(inv.transpose().as_slice().to_vec())
}

/// Adjugate formula.
fn invert3(a: &[f64]) -> Result<Vec<f64>> {
    let [a00, a01, a02, a10, a11, a12, a20, a21, a22] = a[..9] else {
        unreachable!()
    };
    let c00 = a11 * a22 - a12 * a21;
    let c01 = a12 * a20 - a10 * a22;
    let c02 = a10 * a21 - a11 * a20;
    let det = a00 * c00 + a01 * c01 + a02 * c02;
    let scale: f64 = (0..3)
        .map(|r| a[3 * r..3 * r + 3].iter().map(|v| v * v).sum::<f64>().sqrt())
        .product();
    if det == 0.0 || !det.is_finite() || det.abs() <= 1e-14 * scale {
        return Err(Error::SingularMatrix);
    }
    let inv_det = 1.0 / det;
    Ok(vec![
        c00 * inv_det,
        (a02 * a21 - a01 * a22) * inv_det,
        (a01 * a12 - a02 * a11) * inv_det,
        c01 * inv_det,
        (a00 * a22 - a02 * a20) * inv_det,
        (a02 * a10 - a00 * a12) * inv_det,
        c02 * inv_det,
        (a01 * a20 - a00 * a21) * inv_det,
        (a00 * a11 - a01 * a10) * inv_det,
    ])
}
