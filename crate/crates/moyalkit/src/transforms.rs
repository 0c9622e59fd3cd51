//! The transform zoo: cross-Wigner transform, windowed wave-packet transform
//! and its adjoint, the 2pi-convention STFT, Heisenberg-Weyl operators,
//! phase-space translations, and metaplectic generator actions.
//!
//! The Wigner/wave-packet transforms embed fields into a doubled domain
//! before forming correlation profiles; without this the periodic model puts
//! a ghost copy of the transform at half-period offsets.

use crate::error::{MoyalError, Result};
use crate::grid::{
    check_same_grid, extend2, fourier_shift, hbar_fourier, l2_norm, mode_coeffs,
    mode_freqs, upsample2, C64, GridSpec, SampledField,
};
use crate::symplectic::{HbarContext, PhasePoint};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;

/// L2-normalized window for wave-packet transforms.
#[derive(Debug, Clone)]
pub struct Window {
    phi: SampledField,
}

impl Window {
    /// Wraps a window, enforcing ||phi||_2 = 1 within 1e-10.
    pub fn new(phi: SampledField) -> Result<Self> {
        let norm = l2_norm(&phi);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(MoyalError::ParamOutOfRange(format!(
                "window norm {norm:.12} != 1"
            )));
        }
        Ok(Self { phi })
    }

    /// Normalizes the field to unit L2 norm first.
    pub fn normalized(phi: SampledField) -> Result<Self> {
        let norm = l2_norm(&phi);
        if norm == 0.0 {
            return Err(MoyalError::ParamOutOfRange("window is zero".into()));
        }
        Ok(Self { phi: phi.scale(C64::new(1.0 / norm, 0.0)) })
    }

    pub fn field(&self) -> &SampledField {
        &self.phi
    }
}

fn require_n1(ctx: &HbarContext) -> Result<()> {
    if ctx.n != 1 {
        return Err(MoyalError::UnsupportedDof(ctx.n));
    }
    Ok(())
}

/// Grid for phase-space fields built from a configuration grid: the product
/// grid with the same extent on both axes.
pub fn phase_grid(config: &GridSpec) -> Result<GridSpec> {
    if config.dims() != 1 {
        return Err(MoyalError::DimensionMismatch(
            "phase_grid expects a 1d configuration grid".into(),
        ));
    }
    GridSpec::uniform(2, config.points(), config.extent(0))
}

/// Cross-Wigner transform
/// W(psi,phi)(x,p) = (2 pi hbar)^{-1} int e^{-i p y/hbar} psi(x+y/2) conj(phi(x-y/2)) dy,
/// with the y quadrature on 2N points of spacing dx over [-L, L) and the
/// half-point evaluations taken from band-limited interpolation on the
/// doubled, zero-embedded domain.
pub fn cross_wigner(
    psi: &SampledField,
    phi: &SampledField,
    ctx: &HbarContext,
) -> Result<SampledField> {
    require_n1(ctx)?;
    check_same_grid(psi, phi)?;
    let g = psi.grid().clone();
    if g.dims() != 1 {
        return Err(MoyalError::DimensionMismatch(
            "cross_wigner expects configuration-space fields".into(),
        ));
    }
    let n = g.points();
    let l = g.extent(0);
    let dx = g.spacing(0);
    let hbar = ctx.hbar;

    let (pe, _) = extend2(psi.values(), &[n]);
    let (fe, _) = extend2(phi.values(), &[n]);
    let p2 = upsample2(&pe, 1, 2 * n); // 4N samples on [-L, L), spacing dx/2
    let f2 = upsample2(&fe, 1, 2 * n);

    let xs = g.axis_coords(0);
    // E[m][k] = exp(-i x_m y_k / hbar) dx / (2 pi hbar), y_k = -L + k dx
    let ys: Vec<f64> = (0..2 * n).map(|k| -l + dx * k as f64).collect();
    let scale = dx / (2.0 * PI * hbar);
    let out_grid = phase_grid(&g)?;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let mut prof = vec![C64::new(0.0, 0.0); 2 * n];
        for k in 0..2 * n {
            let ip = (2 * j + k) % (4 * n);
            let im = (2 * j + 2 * n - k) % (4 * n);
            prof[k] = p2[ip] * f2[im].conj();
        }
        for (m, slot) in row.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..2 * n {
                acc += C64::from_polar(1.0, -xs[m] * ys[k] / hbar) * prof[k];
            }
            *slot = acc * scale;
        }
    });
    SampledField::new(out_grid, out)
}

/// Windowed wave-packet transform W_phi psi = (2 pi hbar)^{n/2} W(psi, phi);
/// an isometry of L^2(R) into L^2(R^2).
pub fn wave_packet(phi: &Window, psi: &SampledField, ctx: &HbarContext) -> Result<SampledField> {
    let w = cross_wigner(psi, phi.field(), ctx)?;
    Ok(w.scale(C64::new((2.0 * PI * ctx.hbar).powf(ctx.n as f64 / 2.0), 0.0)))
}

/// Adjoint of the wave-packet transform:
/// W_phi^* Psi(x) = (2/(pi hbar))^{1/2} iint e^{2 i p (x-y)/hbar} phi(2y-x) Psi(y,p) dp dy.
pub fn wave_packet_adjoint(
    phi: &Window,
    psi_phase: &SampledField,
    ctx: &HbarContext,
) -> Result<SampledField> {
    require_n1(ctx)?;
    let gp = psi_phase.grid().clone();
    if gp.dims() != 2 {
        return Err(MoyalError::DimensionMismatch(
            "wave_packet_adjoint expects a phase-space field".into(),
        ));
    }
    let g = phi.field().grid().clone();
    let n = g.points();
    if gp.points() != n || (gp.extent(0) - g.extent(0)).abs() > 1e-12 {
        return Err(MoyalError::GridMismatch(
            "phase grid does not match the window grid".into(),
        ));
    }
    let hbar = ctx.hbar;
    let xs = g.axis_coords(0);
    let (phe, _) = extend2(phi.field().values(), &[n]); // 2N coarse samples on [-L, L)
    let c = (2.0 / (PI * hbar)).sqrt() * g.spacing(0) * gp.spacing(1);
    let vals = psi_phase.values();
    let out: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for lidx in 0..n {
                // I(y_l) = sum_m Psi[l, m] e^{2 i p_m (x_j - y_l)/hbar}
                let dxl = xs[j] - xs[lidx];
                let mut inner = C64::new(0.0, 0.0);
                for m in 0..n {
                    inner += vals[lidx * n + m] * C64::from_polar(1.0, 2.0 * xs[m] * dxl / hbar);
                }
                // 2 y_l - x_j on the doubled domain: index 2l - j + N/2 (mod 2N)
                let widx = (2 * lidx + 2 * n + n / 2 - j) % (2 * n);
                acc += phe[widx] * inner;
            }
            acc * c
        })
        .collect();
    SampledField::new(g, out)
}

/// Short-time Fourier transform in the 2pi convention:
/// V_phi psi(x, w) = int e^{-2 pi i w x'} psi(x') conj(phi(x'-x)) dx'.
/// Output on the product grid with frequency spacing 1/L (extent N/L).
pub fn stft(phi: &SampledField, psi: &SampledField) -> Result<SampledField> {
    check_same_grid(psi, phi)?;
    let g = psi.grid().clone();
    if g.dims() != 1 {
        return Err(MoyalError::DimensionMismatch(
            "stft expects configuration-space fields".into(),
        ));
    }
    let n = g.points();
    let l = g.extent(0);
    let dx = g.spacing(0);
    let out_grid = GridSpec::new(2, n, vec![l, n as f64 / l])?;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    // window translate by x_j via fourier_shift (exact rolls at grid steps)
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let shift = g.coord(0, j);
            let phs = fourier_shift(phi, &[shift]).expect("in-range window translate");
            let prof: Vec<C64> = psi
                .values()
                .iter()
                .zip(phs.values().iter())
                .map(|(a, b)| a * b.conj())
                .collect();
            // V[j, m] = dx * (-1)^q * DFT_bin(q), q = m - N/2
            let mut line = prof;
            crate::grid::fft_line(&mut line, false);
            let mut row = vec![C64::new(0.0, 0.0); n];
            for m in 0..n {
                let q = m as isize - (n / 2) as isize;
                let bin = q.rem_euclid(n as isize) as usize;
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                row[m] = line[bin] * sign * dx;
            }
            row
        })
        .collect();
    for (j, row) in rows.into_iter().enumerate() {
        out[j * n..(j + 1) * n].copy_from_slice(&row);
    }
    SampledField::new(out_grid, out)
}

/// Heisenberg-Weyl operator
/// T(z0) psi(x) = e^{(i/hbar)(p0.x - p0.x0/2)} psi(x - x0).
pub fn heisenberg_weyl(
    z0: &PhasePoint,
    psi: &SampledField,
    ctx: &HbarContext,
) -> Result<SampledField> {
    let g = psi.grid().clone();
    if z0.dof() != g.dims() || z0.dof() != ctx.n {
        return Err(MoyalError::DimensionMismatch(
            "heisenberg_weyl: phase point / field / context dims differ".into(),
        ));
    }
    let shifted = fourier_shift(psi, &z0.x)?;
    let half: f64 = z0.p.iter().zip(z0.x.iter()).map(|(p, x)| p * x).sum::<f64>() / 2.0;
    let mut vals = shifted.into_values();
    for (flat, v) in vals.iter_mut().enumerate() {
        let node = g.node(flat);
        let px: f64 = z0.p.iter().zip(node.iter()).map(|(p, x)| p * x).sum();
        *v *= C64::from_polar(1.0, (px - half) / ctx.hbar);
    }
    SampledField::new(g, vals)
}

/// Phase-space translation
/// T~(z0) B(z) = e^{(i/hbar) sigma(z0, z)} B(z - z0/2).
pub fn phase_translation(
    z0: &PhasePoint,
    b: &SampledField,
    ctx: &HbarContext,
) -> Result<SampledField> {
    let g = b.grid().clone();
    let n = ctx.n;
    if g.dims() != 2 * n || z0.dof() != n {
        return Err(MoyalError::DimensionMismatch(
            "phase_translation: field must live on R^{2n}".into(),
        ));
    }
    let mut half = Vec::with_capacity(2 * n);
    half.extend(z0.x.iter().map(|v| v / 2.0));
    half.extend(z0.p.iter().map(|v| v / 2.0));
    let shifted = fourier_shift(b, &half)?;
    let mut vals = shifted.into_values();
    for (flat, v) in vals.iter_mut().enumerate() {
        let node = g.node(flat);
        // sigma(z0, z) = p0 . x_z - p_z . x0
        let mut s = 0.0;
        for i in 0..n {
            s += z0.p[i] * node[i] - node[n + i] * z0.x[i];
        }
        *v *= C64::from_polar(1.0, s / ctx.hbar);
    }
    SampledField::new(g, vals)
}

/// One generator of the metaplectic group.
#[derive(Debug, Clone)]
pub enum MetaToken {
    /// Modified hbar-Fourier transform i^{-n/2} F, projecting onto J.
    FourierJ,
    /// Chirp multiplication by e^{(i/hbar) P x . x}, P symmetric.
    Chirp(DMatrix<f64>),
    /// Unitary change of variables i^m sqrt(|det L|) psi(L x).
    Dilation { l: DMatrix<f64>, m: i32 },
}

/// Finite sequence of generator tokens, applied left to right.
#[derive(Debug, Clone)]
pub struct MetaplecticWord {
    tokens: Vec<MetaToken>,
}

impl MetaplecticWord {
    pub fn new(tokens: Vec<MetaToken>) -> Result<Self> {
        for t in &tokens {
            match t {
                MetaToken::Chirp(p) => {
                    let dev = (p - p.transpose()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    if dev > 1e-12 {
                        return Err(MoyalError::NonSymmetric(dev));
                    }
                }
                MetaToken::Dilation { l, .. } => {
                    if l.nrows() != l.ncols() {
                        return Err(MoyalError::NonSquare { rows: l.nrows(), cols: l.ncols() });
                    }
                    let det = l.determinant();
                    if det.abs() <= 1e-12 {
                        return Err(MoyalError::ParamOutOfRange(format!(
                            "dilation matrix is singular (det = {det:.3e})"
                        )));
                    }
                }
                MetaToken::FourierJ => {}
            }
        }
        Ok(Self { tokens })
    }

    pub fn tokens(&self) -> &[MetaToken] {
        &self.tokens
    }

    /// Projection of the word on Sp(2n, R): product of the generator
    /// projections in application order. Note the implemented chirp
    /// e^{(i/hbar) P x.x} projects onto [[I, 0], [2P, I]].
    pub fn projection(&self, n: usize) -> DMatrix<f64> {
        let mut s = DMatrix::identity(2 * n, 2 * n);
        for t in &self.tokens {
            let gen = match t {
                MetaToken::FourierJ => crate::symplectic::standard_j(n),
                MetaToken::Chirp(p) => {
                    let mut m = DMatrix::identity(2 * n, 2 * n);
                    m.view_mut((n, 0), (n, n)).copy_from(&(p * 2.0));
                    m
                }
                MetaToken::Dilation { l, .. } => {
                    let mut m = DMatrix::zeros(2 * n, 2 * n);
                    let linv = l.clone().try_inverse().expect("validated invertible");
                    m.view_mut((0, 0), (n, n)).copy_from(&linv);
                    m.view_mut((n, n), (n, n)).copy_from(&l.transpose());
                    m
                }
            };
            s = gen * s;
        }
        s
    }
}

/// Applies the word's tokens left to right to a configuration-space field.
pub fn metaplectic_apply(
    word: &MetaplecticWord,
    psi: &SampledField,
    ctx: &HbarContext,
) -> Result<SampledField> {
    let g = psi.grid().clone();
    if g.dims() != ctx.n {
        return Err(MoyalError::DimensionMismatch(
            "metaplectic_apply expects a configuration-space field".into(),
        ));
    }
    let mut cur = psi.clone();
    for t in word.tokens() {
        cur = match t {
            MetaToken::FourierJ => {
                let f = hbar_fourier(&cur, ctx, false)?;
                // i^{-n/2}, principal branch
                f.scale(C64::from_polar(1.0, -PI / 4.0 * ctx.n as f64))
            }
            MetaToken::Chirp(p) => {
                if p.nrows() != ctx.n {
                    return Err(MoyalError::DimensionMismatch(
                        "chirp matrix does not match n".into(),
                    ));
                }
                let mut vals = cur.values().to_vec();
                for (flat, v) in vals.iter_mut().enumerate() {
                    let x = g.node(flat);
                    let mut q = 0.0;
                    for i in 0..ctx.n {
                        for k in 0..ctx.n {
                            q += p[(i, k)] * x[i] * x[k];
                        }
                    }
                    *v *= C64::from_polar(1.0, q / ctx.hbar);
                }
                SampledField::new(g.clone(), vals)?
            }
            MetaToken::Dilation { l, m } => dilate(&cur, l, *m)?,
        };
    }
    Ok(cur)
}

/// i^m sqrt(|det L|) psi(L x), resampled by trigonometric interpolation.
fn dilate(psi: &SampledField, l: &DMatrix<f64>, m: i32) -> Result<SampledField> {
    let g = psi.grid().clone();
    let d = g.dims();
    if l.nrows() != d {
        return Err(MoyalError::DimensionMismatch(
            "dilation matrix does not match field dims".into(),
        ));
    }
    // reject if the map pulls mass from outside the covered extent
    let mut expand = 0.0f64;
    for flat in [0usize, g.len() - 1] {
        let x = g.node(flat);
        let lx = l * nalgebra::DVector::from_vec(x.clone());
        for a in 0..d {
            expand = expand.max(lx[a].abs() / (g.extent(a) / 2.0));
        }
    }
    if expand > 1.0 + 1e-9 {
        // allowed only if the field has decayed by the pre-image boundary
        let mut boundary_mass = 0.0f64;
        for flat in 0..g.len() {
            let x = g.node(flat);
            let inside = (0..d).all(|a| {
                let lim = g.extent(a) / (2.0 * expand);
                x[a].abs() <= lim
            });
            if !inside {
                boundary_mass = boundary_mass.max(psi.values()[flat].norm());
            }
        }
        if boundary_mass > 1e-8 * psi.max_abs().max(1e-300) {
            return Err(MoyalError::ParamOutOfRange(format!(
                "dilation pushes mass (level {boundary_mass:.3e}) outside the grid"
            )));
        }
    }
    let modes = mode_coeffs(psi);
    let scale = l.determinant().abs().sqrt();
    let phase = C64::from_polar(1.0, PI / 2.0 * m as f64); // i^m
    let freqs: Vec<Vec<f64>> = (0..d).map(|a| mode_freqs(&g, a)).collect();
    let npts = g.points();
    let vals: Vec<C64> = (0..g.len())
        .into_par_iter()
        .map(|flat| {
            let x = g.node(flat);
            let lx = l * nalgebra::DVector::from_vec(x);
            let mut acc = C64::new(0.0, 0.0);
            for (mflat, c) in modes.iter().enumerate() {
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let mut ph = 0.0;
                let mut rem = mflat;
                for a in (0..d).rev() {
                    let k = rem % npts;
                    rem /= npts;
                    ph += freqs[a][k] * lx[a];
                }
                acc += c * C64::from_polar(1.0, ph);
            }
            acc * scale * phase
        })
        .collect();
    SampledField::new(g, vals)
}

/// Orthogonal projection P_phi = W_phi W_phi^* onto the range of the
/// wave-packet transform.
pub fn wavepacket_projector(
    phi: &Window,
    psi_phase: &SampledField,
    ctx: &HbarContext,
) -> Result<SampledField> {
    let back = wave_packet_adjoint(phi, psi_phase, ctx)?;
    wave_packet(phi, &back, ctx)
}
