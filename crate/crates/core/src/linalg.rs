//! Jacobi-preconditioned conjugate gradients for the implicit diffusion
//! systems `(I - dt div(c grad .)) x = b` shared by the forward and adjoint
//! sweeps. With `c > 0` the matrix is a symmetric M-matrix.

use crate::error::{Error, Result};
use crate::mesh::{dot, FluxStencil, ScalarField};

/// Relative residual target of every implicit solve.
pub const CG_TOLERANCE: f64 = 1e-10;

pub struct ImplicitDiffusion {
    stencil: FluxStencil,
    dt: f64,
    inv_diag: Vec<f64>,
}

impl ImplicitDiffusion {
    pub fn new(coefficient: &ScalarField, dt: f64) -> Self {
        let stencil = FluxStencil::new(coefficient);
        let inv_diag = stencil.diagonal().iter().map(|&a| 1.0 / (1.0 - dt * a)).collect();
        Self { stencil, dt, inv_diag }
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.stencil.apply_into(x, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = xi - self.dt * *o;
        }
    }

    /// Solves for `x`, starting from `guess`.
    pub fn solve(&self, rhs: &ScalarField, guess: &ScalarField) -> Result<ScalarField> {
        let disc = *rhs.disc();
        let n = disc.nodes();
        let b = rhs.values();
        let b_norm = dot(b, b).sqrt();
        if b_norm == 0.0 {
            return Ok(ScalarField::zeros(disc));
        }
        let target = CG_TOLERANCE * b_norm;
        let max_iter = 10 * n;

        let mut x = guess.values().to_vec();
        let mut ax = vec![0.0; n];
        self.apply_into(&x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let mut res = dot(&r, &r).sqrt();
        if !res.is_finite() {
            return Err(Error::LinearSolver { residual: f64::NAN, iterations: 0 });
        }
        let mut z: Vec<f64> = r.iter().zip(&self.inv_diag).map(|(ri, di)| ri * di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let mut it = 0;
        while res > target {
            if it == max_iter {
                return Err(Error::LinearSolver { residual: res / b_norm, iterations: it });
            }
            self.apply_into(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            res = dot(&r, &r).sqrt();
            if !res.is_finite() {
                return Err(Error::LinearSolver { residual: f64::NAN, iterations: it });
            }
            for k in 0..n {
                z[k] = r[k] * self.inv_diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
            it += 1;
        }
        ScalarField::from_values(disc, x)
    }
}
