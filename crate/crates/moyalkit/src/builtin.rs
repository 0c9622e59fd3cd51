//! Builtin field generators: every scenario input can be produced without
//! external data. Names and parameters are part of the CLI contract.

use crate::error::{MoyalError, Result};
use crate::grid::{l2_norm, sample, C64, GridSpec, SampledField};
use crate::math::erf_step;
use crate::symplectic::HbarContext;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// L2-normalized Gaussian on R^1: width s, coherent-state phase (x0, p0).
pub fn gaussian1d(grid: &GridSpec, hbar: f64, x0: f64, p0: f64, s: f64) -> Result<SampledField> {
    if grid.dims() != 1 {
        return Err(MoyalError::DimensionMismatch("gaussian1d expects d = 1".into()));
    }
    if !(s > 0.0) {
        return Err(MoyalError::ParamOutOfRange(format!("width s = {s}")));
    }
    sample(
        |x| {
            let dx = x[0] - x0;
            C64::from_polar(
                (PI * s * s).powf(-0.25) * (-dx * dx / (2.0 * s * s)).exp(),
                p0 * (x[0] - x0 / 2.0) / hbar,
            )
        },
        grid,
    )
}

/// Standard Gaussian (pi hbar)^{-1/4} e^{-x^2/(2 hbar)}.
pub fn standard_gaussian(grid: &GridSpec, hbar: f64) -> Result<SampledField> {
    gaussian1d(grid, hbar, 0.0, 0.0, hbar.sqrt())
}

/// Squeezed Gaussian on phase space: exp(-M z . z / (2 hbar)) for symmetric
/// positive-definite M, amplitude-normalized to 1 at the center.
pub fn squeezed_phase_gaussian(
    grid: &GridSpec,
    hbar: f64,
    m: &DMatrix<f64>,
) -> Result<SampledField> {
    if grid.dims() != m.nrows() {
        return Err(MoyalError::DimensionMismatch(
            "shape matrix size differs from grid dims".into(),
        ));
    }
    let dev = (m - m.transpose()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if dev > 1e-12 {
        return Err(MoyalError::NonSymmetric(dev));
    }
    let m = m.clone();
    sample(
        |z| {
            let zv = nalgebra::DVector::from_column_slice(z);
            C64::new((-(&m * &zv).dot(&zv) / (2.0 * hbar)).exp(), 0.0)
        },
        grid,
    )
}

/// Isotropic phase-space Gaussian amplitude exp(-|z - c|^2 / (2 s^2)).
pub fn phase_gaussian(grid: &GridSpec, cx: f64, cp: f64, s: f64) -> Result<SampledField> {
    if grid.dims() != 2 {
        return Err(MoyalError::DimensionMismatch("phase_gaussian expects d = 2".into()));
    }
    sample(
        |z| {
            C64::new(
                (-((z[0] - cx).powi(2) + (z[1] - cp).powi(2)) / (2.0 * s * s)).exp(),
                0.0,
            )
        },
        grid,
    )
}

/// The triangle function max(0, 1 - |x|).
pub fn triangle(grid: &GridSpec) -> Result<SampledField> {
    if grid.dims() != 1 {
        return Err(MoyalError::DimensionMismatch("triangle expects d = 1".into()));
    }
    sample(|x| C64::new((1.0 - x[0].abs()).max(0.0), 0.0), grid)
}

/// Monomial x^a p^b times a flat erf-plateau envelope: 1 to within ~1e-9 on
/// |z_i| <= c - 4.1 w, decayed below ~1e-10 by |z_i| >= c + 4.6 w, per axis.
pub fn enveloped_monomial(
    grid: &GridSpec,
    ax: u32,
    bp: u32,
    c: f64,
    w: f64,
) -> Result<SampledField> {
    if grid.dims() != 2 {
        return Err(MoyalError::DimensionMismatch("enveloped_monomial expects d = 2".into()));
    }
    sample(
        |z| {
            let env = erf_step(z[0], c, w) * erf_step(z[1], c, w);
            C64::new(z[0].powi(ax as i32) * z[1].powi(bp as i32) * env, 0.0)
        },
        grid,
    )
}

/// Quadratic Hamiltonian (1/2) M z.z + m.z saturated to a plateau `cap`
/// outside the radial erf step (c, w); used for spectral and propagation
/// tests where rolling the symbol to zero would create spurious low states.
pub fn plateau_quadratic(
    grid: &GridSpec,
    quad: &crate::starexp::QuadraticHamiltonian,
    c: f64,
    w: f64,
    cap: f64,
) -> Result<SampledField> {
    if grid.dims() != quad.m_mat.nrows() {
        return Err(MoyalError::DimensionMismatch(
            "hamiltonian dims differ from grid".into(),
        ));
    }
    let quad = quad.clone();
    sample(
        |z| {
            let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let s = erf_step(r, c, w);
            C64::new(quad.eval(z) * s + cap * (1.0 - s), 0.0)
        },
        grid,
    )
}

/// Harmonic-oscillator plateau Hamiltonian (x^2 + p^2)/2 with the default
/// envelope for a given grid: transition centered between the state region
/// and the boundary.
pub fn plateau_harmonic(grid: &GridSpec, c: f64, w: f64, cap: f64) -> Result<SampledField> {
    sample(
        |z| {
            let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
            let s = erf_step(r, c, w);
            C64::new(0.5 * (z[0] * z[0] + z[1] * z[1]) * s + cap * (1.0 - s), 0.0)
        },
        grid,
    )
}

/// Seeded random mixture of Gaussians on R^1, L2-normalized.
pub fn gaussian_mixture1d(
    grid: &GridSpec,
    hbar: f64,
    seed: u64,
    terms: usize,
) -> Result<SampledField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = SampledField::zeros(grid.clone());
    // ranges keep the boundary mass below ~1e-13 on the desk grid so the
    // corpus honors the decay contract of the spectral transforms
    for _ in 0..terms.max(1) {
        let x0: f64 = rng.gen_range(-0.4..0.4);
        let p0: f64 = rng.gen_range(-0.4..0.4);
        let s: f64 = rng.gen_range(0.95..1.05);
        let amp = C64::new(rng.gen_range(0.3..1.0), rng.gen_range(-0.3..0.3));
        acc = acc.add(&gaussian1d(grid, hbar, x0, p0, s)?.scale(amp))?;
    }
    let nrm = l2_norm(&acc);
    Ok(acc.scale(C64::new(1.0 / nrm, 0.0)))
}

/// Seeded random mixture of phase-space Gaussians.
pub fn gaussian_mixture_phase(
    grid: &GridSpec,
    seed: u64,
    terms: usize,
) -> Result<SampledField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = SampledField::zeros(grid.clone());
    for _ in 0..terms.max(1) {
        let cx: f64 = rng.gen_range(-1.0..1.0);
        let cp: f64 = rng.gen_range(-1.0..1.0);
        let s: f64 = rng.gen_range(0.8..1.1);
        let amp = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        acc = acc.add(&phase_gaussian(grid, cx, cp, s)?.scale(amp))?;
    }
    Ok(acc)
}

/// Named builtin dispatch used by scenarios; parameters come from the
/// scenario table with sensible defaults.
pub fn generate(
    name: &str,
    grid: &GridSpec,
    ctx: &HbarContext,
    params: &std::collections::BTreeMap<String, f64>,
) -> Result<SampledField> {
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    match name {
        "gaussian" => gaussian1d(
            grid,
            ctx.hbar,
            get("x0", 0.0),
            get("p0", 0.0),
            get("s", ctx.hbar.sqrt()),
        ),
        "standard_gaussian" => standard_gaussian(grid, ctx.hbar),
        "triangle" => triangle(grid),
        "phase_gaussian" => phase_gaussian(grid, get("cx", 0.0), get("cp", 0.0), get("s", 1.0)),
        "squeezed" => {
            let a = get("a", 1.0);
            let b = get("b", 1.0);
            let c = get("c", 0.0);
            let m = DMatrix::from_row_slice(2, 2, &[a, c, c, b]);
            squeezed_phase_gaussian(grid, ctx.hbar, &m)
        }
        "enveloped_monomial" => enveloped_monomial(
            grid,
            get("ax", 1.0) as u32,
            get("bp", 0.0) as u32,
            get("c", grid.extent(0) / 4.0 + 3.28),
            get("w", 0.8),
        ),
        "plateau_harmonic" => plateau_harmonic(
            grid,
            get("c", 7.8),
            get("w", 0.9),
            get("cap", 12.0),
        ),
        "mixture" => gaussian_mixture1d(
            grid,
            ctx.hbar,
            get("seed", 1.0) as u64,
            get("terms", 3.0) as usize,
        ),
        "phase_mixture" => {
            gaussian_mixture_phase(grid, get("seed", 1.0) as u64, get("terms", 3.0) as usize)
        }
        "unit" => sample(|_| C64::new(1.0, 0.0), grid),
        other => Err(MoyalError::Scenario(format!("unknown builtin generator: {other}"))),
    }
}
