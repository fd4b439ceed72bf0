//! Seeded smooth random space-time functions for gradient checks and Taylor
//! tests. The function is drawn once in continuous form and can be sampled
//! on any grid, so refinement studies see the same direction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::mesh::{Discretization, SpaceTimeField};

const MODES: usize = 3;

#[derive(Clone, Debug)]
pub struct SmoothRandom {
    seed: u64,
    /// `coef[kx][ky] = (c0, c1, c2)`: time polynomial of mode `(kx+1, ky+1)`.
    coef: [[[f64; 3]; MODES]; MODES],
}

impl SmoothRandom {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coef = [[[0.0; 3]; MODES]; MODES];
        for (kx, row) in coef.iter_mut().enumerate() {
            for (ky, c) in row.iter_mut().enumerate() {
                let decay = 1.0 / ((kx + ky + 1) as f64).powi(2);
                for v in c.iter_mut() {
                    *v = decay * rng.gen_range(-1.0..1.0);
                }
            }
        }
        Self { seed, coef }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Value at `(x, y)` and normalized time `s = t / T`.
    pub fn eval(&self, x: f64, y: f64, s: f64) -> f64 {
        let mut v = 0.0;
        for (kx, row) in self.coef.iter().enumerate() {
            let sx = ((kx + 1) as f64 * PI * x).sin();
            for (ky, c) in row.iter().enumerate() {
                let sy = ((ky + 1) as f64 * PI * y).sin();
                v += sx * sy * (c[0] + c[1] * s + c[2] * s * s);
            }
        }
        v
    }

    pub fn sample(&self, disc: &Discretization, scale: f64) -> SpaceTimeField {
        let t_final = disc.t_final();
        SpaceTimeField::from_fn(*disc, |x, y, t| scale * self.eval(x, y, t / t_final))
    }
}
