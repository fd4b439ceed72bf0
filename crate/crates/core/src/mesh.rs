//! Uniform space-time grid on the unit square with homogeneous Dirichlet
//! boundaries, the nodal fields living on it, and the discrete operators
//! every other module is assembled from.
//!
//! Fields store interior nodes only. Node `(i, j)` sits at
//! `((i + 1) hx, (j + 1) hy)` and is stored at index `j * nx + i`
//! (x runs fastest). Any neighbour outside the interior is a boundary node
//! whose value is zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    nx: usize,
    ny: usize,
    nt: usize,
    t_final: f64,
}

impl Discretization {
    pub fn new(nx: usize, ny: usize, nt: usize, t_final: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 interior nodes per axis, got {nx}x{ny}"
            )));
        }
        if nt < 2 {
            return Err(Error::InvalidGrid(format!("need nt >= 2, got {nt}")));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {t_final}")));
        }
        for n in [nx, ny] {
            let h = 1.0 / (n + 1) as f64;
            if h * (n + 1) as f64 != 1.0 {
                return Err(Error::InvalidGrid(format!(
                    "spacing 1/{} is not exactly representable; pick another node count",
                    n + 1
                )));
            }
        }
        Ok(Self { nx, ny, nt, t_final })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn t_final(&self) -> f64 {
        self.t_final
    }
    pub fn hx(&self) -> f64 {
        1.0 / (self.nx + 1) as f64
    }
    pub fn hy(&self) -> f64 {
        1.0 / (self.ny + 1) as f64
    }
    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }
    /// Number of interior nodes.
    pub fn nodes(&self) -> usize {
        self.nx * self.ny
    }
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }
    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.hx()
    }
    pub fn y(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.hy()
    }
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Trapezoidal weight of time level `n` (without the `dt` factor).
    pub fn time_weight(&self, n: usize) -> f64 {
        if n == 0 || n == self.nt {
            0.5
        } else {
            1.0
        }
    }

    /// Same grid with space and time resolution doubled.
    pub fn refined(&self) -> Result<Self> {
        Self::new(2 * self.nx + 1, 2 * self.ny + 1, 2 * self.nt, self.t_final)
    }

    /// Iterator over `(k, x, y)` for every interior node.
    pub fn node_coords(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.ny).flat_map(move |j| {
            (0..self.nx).map(move |i| (self.index(i, j), self.x(i), self.y(j)))
        })
    }
}

/// Values of a scalar function at the interior nodes of one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    disc: Discretization,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(disc: Discretization) -> Self {
        Self { disc, values: vec![0.0; disc.nodes()] }
    }

    pub fn constant(disc: Discretization, c: f64) -> Self {
        Self { disc, values: vec![c; disc.nodes()] }
    }

    pub fn from_values(disc: Discretization, values: Vec<f64>) -> Result<Self> {
        if values.len() != disc.nodes() {
            return Err(Error::InvalidGrid(format!(
                "expected {} nodal values, got {}",
                disc.nodes(),
                values.len()
            )));
        }
        Ok(Self { disc, values })
    }

    pub fn from_fn(disc: Discretization, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = disc.node_coords().map(|(_, x, y)| f(x, y)).collect();
        Self { disc, values }
    }

    pub fn disc(&self) -> &Discretization {
        &self.disc
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.disc.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { disc: self.disc, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Nodewise combination of two fields; panics on grid mismatch, use
    /// [`check_same`] first at API boundaries.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.disc, other.disc, "grid mismatch");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { disc: self.disc, values }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Self) {
        assert_eq!(self.disc, x.disc, "grid mismatch");
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    /// Discrete L²(Ω) inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.disc, other.disc, "grid mismatch");
        dot(&self.values, &other.values) * self.disc.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A scalar field at every time level `0..=nt`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    disc: Discretization,
    frames: Vec<ScalarField>,
}

impl SpaceTimeField {
    pub fn zeros(disc: Discretization) -> Self {
        Self { disc, frames: vec![ScalarField::zeros(disc); disc.nt() + 1] }
    }

    pub fn from_frames(disc: Discretization, frames: Vec<ScalarField>) -> Result<Self> {
        if frames.len() != disc.nt() + 1 {
            return Err(Error::InvalidGrid(format!(
                "expected {} frames, got {}",
                disc.nt() + 1,
                frames.len()
            )));
        }
        if frames.iter().any(|f| *f.disc() != disc) {
            return Err(Error::MismatchedGrids);
        }
        Ok(Self { disc, frames })
    }

    pub fn from_fn(disc: Discretization, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let frames = (0..=disc.nt())
            .map(|n| {
                let t = disc.t(n);
                ScalarField::from_fn(disc, |x, y| f(x, y, t))
            })
            .collect();
        Self { disc, frames }
    }

    /// Same spatial field at every level.
    pub fn steady(field: &ScalarField) -> Self {
        Self { disc: *field.disc(), frames: vec![field.clone(); field.disc().nt() + 1] }
    }

    pub fn disc(&self) -> &Discretization {
        &self.disc
    }
    pub fn frames(&self) -> &[ScalarField] {
        &self.frames
    }
    pub fn frame(&self, n: usize) -> &ScalarField {
        &self.frames[n]
    }
    pub fn frame_mut(&mut self, n: usize) -> &mut ScalarField {
        &mut self.frames[n]
    }
    pub fn set_frame(&mut self, n: usize, frame: ScalarField) {
        assert_eq!(*frame.disc(), self.disc, "grid mismatch");
        self.frames[n] = frame;
    }

    /// Values of one node across all time levels.
    pub fn trace(&self, k: usize) -> Vec<f64> {
        self.frames.iter().map(|f| f.values()[k]).collect()
    }

    pub fn set_trace(&mut self, k: usize, series: &[f64]) {
        assert_eq!(series.len(), self.frames.len());
        for (frame, &v) in self.frames.iter_mut().zip(series) {
            frame.values_mut()[k] = v;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Copy) -> Self {
        Self { disc: self.disc, frames: self.frames.iter().map(|fr| fr.map(f)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Copy) -> Self {
        assert_eq!(self.disc, other.disc, "grid mismatch");
        let frames = self.frames.iter().zip(&other.frames).map(|(a, b)| a.zip_map(b, f)).collect();
        Self { disc: self.disc, frames }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        assert_eq!(self.disc, x.disc, "grid mismatch");
        for (s, v) in self.frames.iter_mut().zip(&x.frames) {
            s.axpy(a, v);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> f64 {
        self.frames.iter().fold(0.0, |m, f| m.max(f.max_abs()))
    }

    /// Discrete L²(Q_T) inner product with trapezoidal time weights; the
    /// pairing in which reduced gradients are expressed.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.disc, other.disc, "grid mismatch");
        let d = self.disc;
        self.frames
            .iter()
            .zip(&other.frames)
            .enumerate()
            .map(|(n, (a, b))| d.time_weight(n) * a.inner(b))
            .sum::<f64>()
            * d.dt()
    }

    /// Norm induced by [`SpaceTimeField::inner`].
    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn check_same(a: &Discretization, b: &Discretization) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::MismatchedGrids)
    }
}

/// Face coefficients of the five-point flux stencil `div(c grad .)`.
///
/// Interior faces carry the arithmetic mean of the two adjacent nodal
/// coefficients, boundary faces the value of the interior node.
#[derive(Clone, Debug)]
pub struct FluxStencil {
    disc: Discretization,
    west: Vec<f64>,
    east: Vec<f64>,
    south: Vec<f64>,
    north: Vec<f64>,
}

impl FluxStencil {
    pub fn new(c: &ScalarField) -> Self {
        let disc = *c.disc();
        let (nx, ny) = (disc.nx(), disc.ny());
        let cv = c.values();
        let n = disc.nodes();
        let (mut west, mut east, mut south, mut north) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for j in 0..ny {
            for i in 0..nx {
                let k = disc.index(i, j);
                let ck = cv[k];
                west[k] = if i > 0 { 0.5 * (ck + cv[k - 1]) } else { ck };
                east[k] = if i + 1 < nx { 0.5 * (ck + cv[k + 1]) } else { ck };
                south[k] = if j > 0 { 0.5 * (ck + cv[k - nx]) } else { ck };
                north[k] = if j + 1 < ny { 0.5 * (ck + cv[k + nx]) } else { ck };
            }
        }
        Self { disc, west, east, south, north }
    }

    pub fn disc(&self) -> &Discretization {
        &self.disc
    }

    /// `out = div(c grad v)` on raw nodal slices.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let d = &self.disc;
        let (nx, ny) = (d.nx(), d.ny());
        let ihx2 = 1.0 / (d.hx() * d.hx());
        let ihy2 = 1.0 / (d.hy() * d.hy());
        for j in 0..ny {
            for i in 0..nx {
                let k = d.index(i, j);
                let vk = v[k];
                let vw = if i > 0 { v[k - 1] } else { 0.0 };
                let ve = if i + 1 < nx { v[k + 1] } else { 0.0 };
                let vs = if j > 0 { v[k - nx] } else { 0.0 };
                let vn = if j + 1 < ny { v[k + nx] } else { 0.0 };
                out[k] = (self.west[k] * (vw - vk) + self.east[k] * (ve - vk)) * ihx2
                    + (self.south[k] * (vs - vk) + self.north[k] * (vn - vk)) * ihy2;
            }
        }
    }

    pub fn apply(&self, v: &ScalarField) -> ScalarField {
        assert_eq!(*v.disc(), self.disc, "grid mismatch");
        let mut out = ScalarField::zeros(self.disc);
        self.apply_into(v.values(), out.values_mut());
        out
    }

    /// Diagonal entries of the stencil (all non-positive for c >= 0).
    pub fn diagonal(&self) -> Vec<f64> {
        let d = &self.disc;
        let ihx2 = 1.0 / (d.hx() * d.hx());
        let ihy2 = 1.0 / (d.hy() * d.hy());
        (0..d.nodes())
            .map(|k| -(self.west[k] + self.east[k]) * ihx2 - (self.south[k] + self.north[k]) * ihy2)
            .collect()
    }
}

/// Five-point flux-form `div(c grad v)`. `c` need not be positive; the
/// operator is linear in both arguments.
pub fn div_coeff_grad(c: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
    check_same(c.disc(), v.disc())?;
    Ok(FluxStencil::new(c).apply(v))
}

/// Centered differences of `v` along x and y, zero-extended at the boundary.
fn centered_gradient(v: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let d = v.disc();
    let (nx, ny) = (d.nx(), d.ny());
    let (i2hx, i2hy) = (0.5 / d.hx(), 0.5 / d.hy());
    let vv = v.values();
    let mut gx = vec![0.0; d.nodes()];
    let mut gy = vec![0.0; d.nodes()];
    for j in 0..ny {
        for i in 0..nx {
            let k = d.index(i, j);
            let vw = if i > 0 { vv[k - 1] } else { 0.0 };
            let ve = if i + 1 < nx { vv[k + 1] } else { 0.0 };
            let vs = if j > 0 { vv[k - nx] } else { 0.0 };
            let vn = if j + 1 < ny { vv[k + nx] } else { 0.0 };
            gx[k] = (ve - vw) * i2hx;
            gy[k] = (vn - vs) * i2hy;
        }
    }
    (gx, gy)
}

/// Nodewise `grad a . grad b` with centered differences.
pub fn grad_dot(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    check_same(a.disc(), b.disc())?;
    let (ax, ay) = centered_gradient(a);
    let (bx, by) = centered_gradient(b);
    let values = (0..a.disc().nodes()).map(|k| ax[k] * bx[k] + ay[k] * by[k]).collect();
    ScalarField::from_values(*a.disc(), values)
}

/// Discrete `L^p(Q_T)` norm with trapezoidal time weights.
pub fn lp_norm_qt(v: &SpaceTimeField, exponent: f64) -> Result<f64> {
    if !(exponent >= 1.0) {
        return Err(Error::InvalidParameter(format!("norm exponent must be >= 1, got {exponent}")));
    }
    let d = v.disc();
    let sum: f64 = v
        .frames()
        .iter()
        .enumerate()
        .map(|(n, fr)| {
            d.time_weight(n) * fr.values().iter().map(|x| x.abs().powf(exponent)).sum::<f64>()
        })
        .sum();
    Ok((sum * d.dt() * d.cell_area()).powf(1.0 / exponent))
}

/// Forward time differences `(v^{n+1} - v^n)/dt` for `n < nt`; the last
/// frame repeats frame `nt - 1` and carries no quadrature weight.
pub fn time_forward_diff(v: &SpaceTimeField) -> SpaceTimeField {
    let d = *v.disc();
    let inv_dt = 1.0 / d.dt();
    let mut frames: Vec<ScalarField> = v
        .frames()
        .windows(2)
        .map(|w| w[1].zip_map(&w[0], |a, b| (a - b) * inv_dt))
        .collect();
    let last = frames[frames.len() - 1].clone();
    frames.push(last);
    SpaceTimeField { disc: d, frames }
}

/// Rectangle-rule L²(Q_T) norm over the `nt` time intervals, i.e. frames
/// `0..nt` with weight `dt` and the final frame ignored. Pairs with
/// [`time_forward_diff`].
pub fn interval_l2_norm(v: &SpaceTimeField) -> f64 {
    let d = v.disc();
    let sum: f64 = v.frames()[..d.nt()].iter().map(|fr| dot(fr.values(), fr.values())).sum();
    (sum * d.dt() * d.cell_area()).sqrt()
}
