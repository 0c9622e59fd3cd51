//! Sampled-field substrate: centered uniform periodic grids on R^d, the
//! hbar-Fourier and symplectic Fourier transforms, inner products, and
//! band-limited (Fourier) shifting.
//!
//! Conventions fixed here and used everywhere else:
//! * axis j of a d-dimensional grid carries N points x_k = -L_j/2 + k dx_j,
//!   dx_j = L_j / N (centered, periodic);
//! * fields are stored row-major with axis 0 slowest;
//! * integrals are rectangle-rule sums with weight prod(dx_j);
//! * DFT bin k of axis j represents the centered mode q = k - N/2 with
//!   frequency mu = (2 pi / L_j) q, i.e. the usual fftshift reordering.

use crate::error::{MoyalError, Result};
use crate::symplectic::HbarContext;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::Arc;

pub type C64 = Complex64;

/// Uniform centered periodic grid descriptor for R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dims: usize,
    points: usize,
    extents: Vec<f64>,
}

impl GridSpec {
    pub fn new(dims: usize, points: usize, extents: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(MoyalError::InvalidGrid("dims must be >= 1".into()));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(MoyalError::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        if extents.len() != dims {
            return Err(MoyalError::InvalidGrid(format!(
                "{} extents for {} dims",
                extents.len(),
                dims
            )));
        }
        if extents.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(MoyalError::InvalidGrid("extents must be positive".into()));
        }
        Ok(Self { dims, points, extents })
    }

    /// All axes share the same extent L.
    pub fn uniform(dims: usize, points: usize, extent: f64) -> Result<Self> {
        Self::new(dims, points, vec![extent; dims])
    }

    /// Grid on which the discrete Heisenberg-Weyl system is exact:
    /// L = sqrt(2 pi hbar N), so that 2 pi hbar N / L^2 = 1 and phase-space
    /// translations land on whole grid steps.
    pub fn weyl_exact(dims: usize, points: usize, hbar: f64) -> Result<Self> {
        Self::uniform(dims, points, (2.0 * PI * hbar * points as f64).sqrt())
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extents[axis]
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.points as f64
    }

    /// Quadrature weight prod(dx_j).
    pub fn weight(&self) -> f64 {
        (0..self.dims).map(|a| self.spacing(a)).product()
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, axis: usize, index: usize) -> f64 {
        -self.extents[axis] / 2.0 + self.spacing(axis) * index as f64
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.points).map(|k| self.coord(axis, k)).collect()
    }

    /// Flat index -> per-axis indices (row-major, axis 0 slowest).
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dims];
        for a in (0..self.dims).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &k)| self.coord(a, k))
            .collect()
    }

    /// Containment condition for mapping the dual grid back onto this one:
    /// 2 pi hbar N / L >= L on every axis.
    pub fn check_dual_containment(&self, hbar: f64) -> Result<()> {
        for a in 0..self.dims {
            let l = self.extents[a];
            let dual_extent = 2.0 * PI * hbar * self.points as f64 / l;
            if dual_extent < l * (1.0 - 1e-12) {
                return Err(MoyalError::InvalidGrid(format!(
                    "dual extent {dual_extent:.4} < extent {l:.4} on axis {a}; grid too coarse for hbar = {hbar}"
                )));
            }
        }
        Ok(())
    }
}

/// Complex-valued function sampled on a GridSpec; the carrier for psi, phi,
/// A, B and Psi.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<C64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(MoyalError::DimensionMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(MoyalError::NonFinite("SampledField".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self { grid, values: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn grid(&self) -> &GridSpec {
        self.grid_ref()
    }

    fn grid_ref(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn scale(&self, c: C64) -> SampledField {
        SampledField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &SampledField) -> Result<SampledField> {
        check_same_grid(self, other)?;
        Ok(SampledField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        check_same_grid(self, other)?;
        Ok(SampledField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn conj(&self) -> SampledField {
        SampledField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Max-norm of the difference, for test residuals.
    pub fn max_diff(&self, other: &SampledField) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

pub fn check_same_grid(a: &SampledField, b: &SampledField) -> Result<()> {
    if a.grid != b.grid {
        return Err(MoyalError::GridMismatch(
            "fields live on different grids".into(),
        ));
    }
    Ok(())
}

/// Sample a pointwise function on all grid nodes.
pub fn sample<F: Fn(&[f64]) -> C64 + Sync>(f: F, grid: &GridSpec) -> Result<SampledField> {
    let vals: Vec<C64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| f(&grid.node(flat)))
        .collect();
    if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(MoyalError::NonFinite("sample".into()));
    }
    SampledField::new(grid.clone(), vals)
}

/// Riemann-sum L^2 pairing (a|b) = sum a conj(b) prod(dx); linear in the
/// first argument, conjugate in the second.
pub fn inner_product(a: &SampledField, b: &SampledField) -> Result<C64> {
    check_same_grid(a, b)?;
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.values.iter().zip(b.values.iter()) {
        acc += x * y.conj();
    }
    Ok(acc * a.grid.weight())
}

pub fn l2_norm(a: &SampledField) -> f64 {
    let s: f64 = a.values.iter().map(|v| v.norm_sqr()).sum();
    (s * a.grid.weight()).sqrt()
}

// ---------------------------------------------------------------------------
// axis machinery
// ---------------------------------------------------------------------------

/// Apply a dense N x N kernel along `axis` of a row-major array with N points
/// per axis. out[..., m, ...] = sum_j K[m*N + j] in[..., j, ...].
fn apply_dense_axis(values: &[C64], dims: usize, points: usize, axis: usize, kernel: &[C64]) -> Vec<C64> {
    let n = points;
    // stride of the axis and number of (outer, inner) line positions
    let inner: usize = n.pow((dims - 1 - axis) as u32);
    let outer: usize = values.len() / (n * inner);
    let mut out = vec![C64::new(0.0, 0.0); values.len()];
    out.par_chunks_mut(n * inner)
        .enumerate()
        .for_each(|(o, chunk)| {
            let base = o * n * inner;
            let _ = o;
            for i in 0..inner {
                // gather the line
                let mut line = vec![C64::new(0.0, 0.0); n];
                for j in 0..n {
                    line[j] = values[base + j * inner + i];
                }
                for m in 0..n {
                    let krow = &kernel[m * n..(m + 1) * n];
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..n {
                        acc += krow[j] * line[j];
                    }
                    chunk[m * inner + i] = acc;
                }
            }
        });
    debug_assert_eq!(outer * n * inner, values.len());
    out
}

thread_local! {
    static PLANNER: std::cell::RefCell<FftPlanner<f64>> = std::cell::RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// In-place FFT of one contiguous line. Forward is unnormalized, inverse
/// carries the 1/N factor.
pub(crate) fn fft_line(line: &mut [C64], inverse: bool) {
    let n = line.len();
    let fft = plan(n, inverse);
    fft.process(line);
    if inverse {
        let norm = 1.0 / n as f64;
        for v in line.iter_mut() {
            *v *= norm;
        }
    }
}

/// In-place complex FFT along `axis`. Forward is unnormalized, inverse
/// carries the 1/N factor (numpy convention).
pub(crate) fn fft_axis(values: &mut [C64], dims: usize, points: usize, axis: usize, inverse: bool) {
    let n = points;
    let inner: usize = n.pow((dims - 1 - axis) as u32);
    let fft = plan(n, inverse);
    let norm = if inverse { 1.0 / n as f64 } else { 1.0 };
    values
        .par_chunks_mut(n * inner)
        .for_each(|chunk| {
            let mut line = vec![C64::new(0.0, 0.0); n];
            for i in 0..inner {
                for j in 0..n {
                    line[j] = chunk[j * inner + i];
                }
                fft.process(&mut line);
                for j in 0..n {
                    chunk[j * inner + i] = line[j] * norm;
                }
            }
        });
}

/// Centered mode frequencies (2 pi / L_axis) * (k - N/2).
pub(crate) fn mode_freqs(grid: &GridSpec, axis: usize) -> Vec<f64> {
    let n = grid.points();
    let l = grid.extent(axis);
    (0..n).map(|k| 2.0 * PI / l * (k as isize - (n / 2) as isize) as f64).collect()
}

/// Mode coefficients a_q with f(x) = sum_q a_q e^{i mu_q . x} over centered
/// modes, all axes.
pub(crate) fn mode_coeffs(field: &SampledField) -> Vec<C64> {
    let g = field.grid();
    let n = g.points();
    let d = g.dims();
    let mut work = field.values().to_vec();
    for axis in 0..d {
        fft_axis(&mut work, d, n, axis, false);
    }
    let scale = 1.0 / (n as f64).powi(d as i32);
    // reorder to centered bins and fix the -L/2 offset phase per axis
    let mut out = vec![C64::new(0.0, 0.0); work.len()];
    let mut phases: Vec<Vec<C64>> = Vec::with_capacity(d);
    for axis in 0..d {
        let mus = mode_freqs(g, axis);
        let l = g.extent(axis);
        phases.push(mus.iter().map(|mu| C64::from_polar(1.0, mu * l / 2.0)).collect());
    }
    for (flat, slot) in out.iter_mut().enumerate() {
        // centered index -> fft bin per axis
        let idx = g.unravel(flat);
        let mut src = 0usize;
        let mut ph = C64::new(1.0, 0.0);
        for (axis, &k) in idx.iter().enumerate() {
            let bin = (k + n / 2) % n;
            src = src * n + bin;
            ph *= phases[axis][k];
        }
        *slot = work[src] * scale * ph;
    }
    out
}

/// Rebuild samples from centered mode coefficients.
pub(crate) fn from_modes(grid: &GridSpec, modes: &[C64]) -> SampledField {
    let n = grid.points();
    let d = grid.dims();
    let mut work = vec![C64::new(0.0, 0.0); modes.len()];
    let mut phases: Vec<Vec<C64>> = Vec::with_capacity(d);
    for axis in 0..d {
        let mus = mode_freqs(grid, axis);
        let l = grid.extent(axis);
        phases.push(mus.iter().map(|mu| C64::from_polar(1.0, -mu * l / 2.0)).collect());
    }
    for flat in 0..modes.len() {
        let idx = grid.unravel(flat);
        let mut dst = 0usize;
        let mut ph = C64::new(1.0, 0.0);
        for (axis, &k) in idx.iter().enumerate() {
            let bin = (k + n / 2) % n;
            dst = dst * n + bin;
            ph *= phases[axis][k];
        }
        work[dst] = modes[flat] * ph;
    }
    let count = n as f64;
    for axis in 0..d {
        fft_axis(&mut work, d, n, axis, true);
    }
    let scale = count.powi(d as i32);
    SampledField {
        grid: grid.clone(),
        values: work.into_iter().map(|v| v * scale).collect(),
    }
}

/// Band-limited 2x upsample on the same domain (per axis), periodic.
/// Returns data on a grid with 2N points per axis.
pub(crate) fn upsample2(values: &[C64], dims: usize, points: usize) -> Vec<C64> {
    let mut cur = values.to_vec();
    let mut shape = vec![points; dims];
    for axis in 0..dims {
        cur = upsample2_axis(&cur, &shape, axis);
        shape[axis] *= 2;
    }
    cur
}

fn shape_strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

fn fft_axis_shaped(values: &mut [C64], shape: &[usize], axis: usize, inverse: bool) {
    let n = shape[axis];
    let strides = shape_strides(shape);
    let stride = strides[axis];
    let total: usize = shape.iter().product();
    let fft = plan(n, inverse);
    let norm = if inverse { 1.0 / n as f64 } else { 1.0 };
    let lines = total / n;
    let mut scratch: Vec<C64> = vec![C64::new(0.0, 0.0); n];
    for line in 0..lines {
        // decompose line index into (outer, inner)
        let outer = line / stride;
        let inner = line % stride;
        let base = outer * stride * n + inner;
        for j in 0..n {
            scratch[j] = values[base + j * stride];
        }
        fft.process(&mut scratch);
        for j in 0..n {
            values[base + j * stride] = scratch[j] * norm;
        }
    }
}

fn upsample2_axis(values: &[C64], shape: &[usize], axis: usize) -> Vec<C64> {
    let n = shape[axis];
    let mut work = values.to_vec();
    fft_axis_shaped(&mut work, shape, axis, false);
    let mut out_shape = shape.to_vec();
    out_shape[axis] = 2 * n;
    let out_total: usize = out_shape.iter().product();
    let mut spread = vec![C64::new(0.0, 0.0); out_total];
    let in_strides = shape_strides(shape);
    let out_strides = shape_strides(&out_shape);
    let half = n / 2;
    let total: usize = shape.iter().product();
    for flat in 0..total {
        // per-axis index
        let mut rem = flat;
        let mut oflat = 0usize;
        let mut bin = 0usize;
        for (a, (&st_in, &st_out)) in in_strides.iter().zip(out_strides.iter()).enumerate() {
            let k = rem / st_in;
            rem %= st_in;
            let ko = if a == axis { usize::MAX } else { k };
            if a == axis {
                bin = k;
            } else {
                oflat += ko * st_out;
            }
        }
        let v = work[flat];
        let st_out = out_strides[axis];
        if bin < half {
            spread[oflat + bin * st_out] += v;
        } else if bin == half {
            spread[oflat + half * st_out] += v * 0.5;
            spread[oflat + (2 * n - half) * st_out] += v * 0.5;
        } else {
            spread[oflat + (bin + n) * st_out] += v;
        }
    }
    fft_axis_shaped(&mut spread, &out_shape, axis, true);
    for v in spread.iter_mut() {
        *v *= 2.0;
    }
    spread
}

/// Embed into the doubled domain [-L, L) with zeros, per axis.
pub(crate) fn extend2(values: &[C64], shape: &[usize]) -> (Vec<C64>, Vec<usize>) {
    let mut cur = values.to_vec();
    let mut cur_shape = shape.to_vec();
    for axis in 0..shape.len() {
        let n = cur_shape[axis];
        let mut out_shape = cur_shape.clone();
        out_shape[axis] = 2 * n;
        let out_total: usize = out_shape.iter().product();
        let mut out = vec![C64::new(0.0, 0.0); out_total];
        let in_strides = shape_strides(&cur_shape);
        let out_strides = shape_strides(&out_shape);
        let total: usize = cur_shape.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let mut oflat = 0usize;
            for (a, (&st_in, &st_out)) in in_strides.iter().zip(out_strides.iter()).enumerate() {
                let k = rem / st_in;
                rem %= st_in;
                let ko = if a == axis { k + n / 2 } else { k };
                oflat += ko * st_out;
            }
            out[oflat] = cur[flat];
        }
        cur = out;
        cur_shape = out_shape;
    }
    (cur, cur_shape)
}

// ---------------------------------------------------------------------------
// transforms
// ---------------------------------------------------------------------------

fn dense_fourier_kernel(grid: &GridSpec, axis: usize, hbar: f64, sign: f64) -> Vec<C64> {
    let n = grid.points();
    let xs = grid.axis_coords(axis);
    let scale = grid.spacing(axis) / (2.0 * PI * hbar).sqrt();
    let mut k = vec![C64::new(0.0, 0.0); n * n];
    for m in 0..n {
        for j in 0..n {
            k[m * n + j] = C64::from_polar(scale, sign * xs[m] * xs[j] / hbar);
        }
    }
    k
}

/// Unitary hbar-Fourier transform sampled back on the same centered grid:
/// F psi(k) = (2 pi hbar)^{-d/2} sum_j e^{-i k . x_j / hbar} psi(x_j) dx,
/// evaluated by exact quadrature on every axis. `inverse` applies the
/// conjugate kernel.
pub fn hbar_fourier(psi: &SampledField, ctx: &HbarContext, inverse: bool) -> Result<SampledField> {
    let g = psi.grid().clone();
    if g.dims() != ctx.n {
        return Err(MoyalError::DimensionMismatch(format!(
            "hbar_fourier expects d = n = {}, field has d = {}",
            ctx.n,
            g.dims()
        )));
    }
    g.check_dual_containment(ctx.hbar)?;
    Ok(hbar_fourier_any(psi, ctx.hbar, inverse))
}

/// Same transform without the d = n restriction (used on phase-space fields).
pub(crate) fn hbar_fourier_any(psi: &SampledField, hbar: f64, inverse: bool) -> SampledField {
    let g = psi.grid().clone();
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut vals = psi.values().to_vec();
    for axis in 0..g.dims() {
        let k = dense_fourier_kernel(&g, axis, hbar, sign);
        vals = apply_dense_axis(&vals, g.dims(), g.points(), axis, &k);
    }
    SampledField { grid: g, values: vals }
}

/// Symplectic Fourier transform on R^{2n}:
/// F_sigma A(z0) = (2 pi hbar)^{-n} sum_{z'} e^{-i sigma(z0, z')/hbar} A(z') dz'.
/// sigma(z0,z') = p0 . x' - p' . x0, so x'-axes see the forward kernel
/// (producing p0) and p'-axes the conjugate kernel (producing x0), followed
/// by the axis swap that restores (x0, p0) ordering. Involutive.
pub fn symplectic_fourier(a: &SampledField, ctx: &HbarContext) -> Result<SampledField> {
    let g = a.grid().clone();
    let n = ctx.n;
    if g.dims() != 2 * n {
        return Err(MoyalError::DimensionMismatch(format!(
            "symplectic_fourier expects d = 2n = {}, field has d = {}",
            2 * n,
            g.dims()
        )));
    }
    g.check_dual_containment(ctx.hbar)?;
    for i in 0..n {
        if (g.extent(i) - g.extent(n + i)).abs() > 1e-12 * g.extent(i) {
            return Err(MoyalError::InvalidGrid(
                "conjugate axes must share their extent for the symplectic transform".into(),
            ));
        }
    }
    let mut vals = a.values().to_vec();
    for i in 0..n {
        let kf = dense_fourier_kernel(&g, i, ctx.hbar, -1.0);
        vals = apply_dense_axis(&vals, g.dims(), g.points(), i, &kf);
        let ki = dense_fourier_kernel(&g, n + i, ctx.hbar, 1.0);
        vals = apply_dense_axis(&vals, g.dims(), g.points(), n + i, &ki);
    }
    // axes currently hold (p0_1..p0_n, x0_1..x0_n); swap each conjugate pair
    let np = g.points();
    let mut out = vec![C64::new(0.0, 0.0); vals.len()];
    let d = g.dims();
    for flat in 0..vals.len() {
        let idx = g.unravel(flat);
        let mut src = 0usize;
        for a_axis in 0..d {
            let swapped = if a_axis < n { a_axis + n } else { a_axis - n };
            src = src * np + idx[swapped];
        }
        out[flat] = vals[src];
    }
    Ok(SampledField { grid: g, values: out })
}

/// Band-limited periodic shift: out(x) = in(x - delta). Wrap-around at the
/// boundary is the documented periodic behavior.
pub fn fourier_shift(field: &SampledField, delta: &[f64]) -> Result<SampledField> {
    let g = field.grid().clone();
    if delta.len() != g.dims() {
        return Err(MoyalError::DimensionMismatch(format!(
            "{} shift components for {} axes",
            delta.len(),
            g.dims()
        )));
    }
    for (a, d) in delta.iter().enumerate() {
        if d.abs() > g.extent(a) / 2.0 + 1e-12 {
            return Err(MoyalError::ShiftOutOfRange { shift: *d, limit: g.extent(a) / 2.0 });
        }
    }
    let n = g.points();
    let mut vals = field.values().to_vec();
    for axis in 0..g.dims() {
        if delta[axis] == 0.0 {
            continue;
        }
        fft_axis(&mut vals, g.dims(), n, axis, false);
        let l = g.extent(axis);
        // fft bin frequencies (unshifted order), nyquist symmetrized
        let mut ph = vec![C64::new(1.0, 0.0); n];
        for (k, p) in ph.iter_mut().enumerate() {
            let q = if k <= n / 2 - 1 { k as f64 } else { k as f64 - n as f64 };
            let freq = 2.0 * PI * q / l;
            if k == n / 2 {
                *p = C64::new((freq * delta[axis]).cos(), 0.0);
            } else {
                *p = C64::from_polar(1.0, -freq * delta[axis]);
            }
        }
        // note: bin n/2 is its own conjugate partner, hence the cosine
        let inner: usize = n.pow((g.dims() - 1 - axis) as u32);
        vals.par_chunks_mut(n * inner).for_each(|chunk| {
            for j in 0..n {
                for i in 0..inner {
                    chunk[j * inner + i] *= ph[j];
                }
            }
        });
        fft_axis(&mut vals, g.dims(), n, axis, true);
    }
    Ok(SampledField { grid: g, values: vals })
}
