//! The Moyal/twisted product engine, Bopp operator application, Weyl and
//! tau quantizers, the inverse Weyl symbol, and the Moyal bracket.
//!
//! The star product is the phase-space translation expansion
//!   A (*) B = (2 pi hbar)^{-n} sum_{z0} A_sigma(z0) Ttilde(z0) B  dz0
//! quadratured over the reciprocal z0 lattice (spacing 2 pi hbar / L), where
//! it coincides with the exact product of the trigonometric interpolants:
//! each lattice point corresponds to one Fourier mode of A, and
//!   e^{i mu.z} (*) e^{i nu.z} = e^{i (mu+nu).z} e^{-(i hbar/2)(mu_x nu_p - mu_p nu_x)}.
//! The pair sum collapses against the output modes (s = qx+kx, t = qp+kp)
//! to separable chirps, so one product costs O(N^3 log N):
//!   C[s,t] = sum_{jx,jp} a[jx,jp] e^{-i alpha t jx} e^{+i alpha s jp} b[s-jx, t-jp],
//! alpha = 2 pi^2 hbar / L^2, evaluated with FFT convolutions along jp.
//!
//! Quantization uses the same lattice: z0(mu) = (-hbar mu_p, hbar mu_x) and
//!   T(z0) = e^{-i p0 x0 / 2 hbar} diag(e^{i p0 x / hbar}) Shift(x0).
//! On grids with kappa = 2 pi hbar N / L^2 = 1 both z0 components are whole
//! grid steps and the discrete Weyl system is exact: quantize is a
//! *-homomorphism to machine precision, adjoints pair, and the trace pairing
//! a_mu = tr(T(z0(mu))^+ K)/N inverts it. `GridSpec::weyl_exact` builds such
//! grids.

use crate::error::{MoyalError, Result};
use crate::grid::{
    check_same_grid, fft_line, from_modes, mode_coeffs, C64, GridSpec, SampledField,
};
use crate::symplectic::HbarContext;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Phase-space symbol: a sampled field on R^{2n} together with its context.
#[derive(Debug, Clone)]
pub struct Symbol {
    pub field: SampledField,
    pub ctx: HbarContext,
}

impl Symbol {
    pub fn new(field: SampledField, ctx: HbarContext) -> Result<Self> {
        if field.grid().dims() != 2 * ctx.n {
            return Err(MoyalError::DimensionMismatch(format!(
                "symbol must live on R^{{2n}} = R^{}, field has d = {}",
                2 * ctx.n,
                field.grid().dims()
            )));
        }
        Ok(Self { field, ctx })
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }
}

fn require_n1(ctx: &HbarContext) -> Result<()> {
    if ctx.n != 1 {
        return Err(MoyalError::UnsupportedDof(ctx.n));
    }
    Ok(())
}

fn check_pair(a: &Symbol, b: &Symbol) -> Result<()> {
    if a.ctx != b.ctx {
        return Err(MoyalError::GridMismatch("symbols carry different contexts".into()));
    }
    check_same_grid(&a.field, &b.field)
}

/// Core engine: star product of two phase-space fields at the given hbar.
/// Deterministic: rows of the unfolded mode matrix are computed in parallel
/// but each is a fixed-order serial sum, and the fold runs serially.
pub(crate) fn star_engine(
    a_field: &SampledField,
    b_field: &SampledField,
    hbar: f64,
) -> Result<SampledField> {
    let g = a_field.grid().clone();
    let n = g.points();
    let l = g.extent(0);
    let a = mode_coeffs(a_field);
    let b = mode_coeffs(b_field);
    let alpha = 2.0 * PI * PI * hbar / (l * l);
    let m = 2 * n; // linear-convolution FFT length along jp
    let rows = 2 * n - 1;

    // The output-mode chirp splits along qs = q(jx) + q(kx):
    //   e^{i a qs qjp} = e^{i a qjx qjp} e^{i a qkx qjp},
    // so the first factor rides with A's rows, and rewriting the second via
    // qjp = qt - qkp moves it onto B's rows plus a pure t-domain phase:
    //   big[s,t] = sum_{jx+kx=s} e^{i a qt (qkx - qjx)} (A'[jx] conv B'[kx])[t]
    // with A'[jx,jp] = a e^{i a qjx qjp}, B'[kx,kp] = b e^{-i a qkx qkp}.
    let qv = |idx: usize| idx as f64 - (n / 2) as f64;
    let fa: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|jx| {
            let mut line = vec![C64::new(0.0, 0.0); m];
            let step = C64::from_polar(1.0, alpha * qv(jx));
            let mut ph = C64::from_polar(1.0, alpha * qv(jx) * qv(0));
            for jp in 0..n {
                line[jp] = a[jx * n + jp] * ph;
                ph *= step;
            }
            fft_line(&mut line, false);
            line
        })
        .collect();
    let fb: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|kx| {
            let mut line = vec![C64::new(0.0, 0.0); m];
            let step = C64::from_polar(1.0, -alpha * qv(kx));
            let mut ph = C64::from_polar(1.0, -alpha * qv(kx) * qv(0));
            for kp in 0..n {
                line[kp] = b[kx * n + kp] * ph;
                ph *= step;
            }
            fft_line(&mut line, false);
            line
        })
        .collect();

    // phase table e^{i alpha qt d} for d = qkx - qjx in [-(N-1), N-1]
    let tphase: Vec<Vec<C64>> = (0..2 * n - 1)
        .into_par_iter()
        .map(|didx| {
            let d = didx as f64 - (n - 1) as f64;
            let step = C64::from_polar(1.0, alpha * d);
            let mut ph = C64::from_polar(1.0, alpha * d * (-(n as f64)));
            let mut row = vec![C64::new(0.0, 0.0); rows];
            for slot in row.iter_mut() {
                *slot = ph;
                ph *= step;
            }
            row
        })
        .collect();

    let big: Vec<Vec<C64>> = (0..rows)
        .into_par_iter()
        .map(|si| {
            let jx_lo = si.saturating_sub(n - 1);
            let jx_hi = (si + 1).min(n);
            let mut row_acc = vec![C64::new(0.0, 0.0); rows];
            let mut conv = vec![C64::new(0.0, 0.0); m];
            for jx in jx_lo..jx_hi {
                let kx = si - jx;
                let (far, fbr) = (&fa[jx], &fb[kx]);
                for k in 0..m {
                    conv[k] = far[k] * fbr[k];
                }
                fft_line(&mut conv, true);
                // d = qkx - qjx = kx - jx; table offset by n-1
                let trow = &tphase[(kx + n - 1) - jx];
                for ti in 0..rows {
                    row_acc[ti] += conv[ti] * trow[ti];
                }
            }
            row_acc
        })
        .collect();

    // fold true modes back into the centered window (exact at sample points)
    let mut ch = vec![C64::new(0.0, 0.0); n * n];
    let fold = |qi: isize| -> usize { (qi + (n / 2) as isize).rem_euclid(n as isize) as usize };
    for (si, row) in big.iter().enumerate() {
        let fs = fold(si as isize - n as isize);
        for (ti, v) in row.iter().enumerate() {
            let ft = fold(ti as isize - n as isize);
            ch[fs * n + ft] += v;
        }
    }
    Ok(from_modes(&g, &ch))
}

/// Moyal product A (*)_hbar B.
pub fn moyal_star(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    require_n1(&a.ctx)?;
    check_pair(a, b)?;
    let field = star_engine(&a.field, &b.field, a.ctx.hbar)?;
    Ok(Symbol { field, ctx: a.ctx })
}

/// Twisted product A # B: the Moyal product at hbar = 1/(2 pi), same code path.
pub fn twisted_product(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    require_n1(&a.ctx)?;
    check_pair(a, b)?;
    let ctx = HbarContext::new(1.0 / (2.0 * PI), a.ctx.n)?;
    let field = star_engine(&a.field, &b.field, ctx.hbar)?;
    Ok(Symbol { field, ctx })
}

/// Bopp operator action: A~ (Psi) = A (*) Psi, treating Psi as the right factor.
pub fn bopp_apply(a: &Symbol, psi: &SampledField) -> Result<SampledField> {
    require_n1(&a.ctx)?;
    if psi.grid() != a.grid() {
        return Err(MoyalError::GridMismatch("bopp_apply operand grid differs".into()));
    }
    star_engine(&a.field, psi, a.ctx.hbar)
}

/// Moyal bracket (A (*) B - B (*) A) / (i hbar); the sign is fixed so that
/// bracket(x, p) = +1 (the hbar -> 0 limit is the Poisson bracket).
pub fn moyal_bracket(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    let ab = moyal_star(a, b)?;
    let ba = moyal_star(b, a)?;
    let diff = ab.field.sub(&ba.field)?;
    let field = diff.scale(C64::new(0.0, -1.0 / a.ctx.hbar)); // 1/(i hbar)
    Ok(Symbol { field, ctx: a.ctx })
}

/// Pointwise evaluator for the Bopp symbol A(z - J zeta / 2) on doubled
/// phase space, backed by trigonometric interpolation of A.
pub struct BoppSymbol {
    modes: Vec<C64>,
    grid: GridSpec,
    n: usize,
}

impl BoppSymbol {
    pub fn new(a: &Symbol) -> Result<Self> {
        require_n1(&a.ctx)?;
        Ok(Self {
            modes: mode_coeffs(&a.field),
            grid: a.grid().clone(),
            n: a.ctx.n,
        })
    }

    /// Evaluate at (z, zeta), both length 2n. Fails outside the grid extent.
    pub fn eval(&self, z: &[f64], zeta: &[f64]) -> Result<C64> {
        let n = self.n;
        if z.len() != 2 * n || zeta.len() != 2 * n {
            return Err(MoyalError::DimensionMismatch(
                "bopp symbol query must have 2n components".into(),
            ));
        }
        // w = z - J zeta / 2; J(x,p) = (p, -x)
        let mut w = vec![0.0; 2 * n];
        for i in 0..n {
            w[i] = z[i] - zeta[n + i] / 2.0;
            w[n + i] = z[n + i] + zeta[i] / 2.0;
        }
        for (axis, wi) in w.iter().enumerate() {
            if wi.abs() > self.grid.extent(axis) / 2.0 + 1e-12 {
                return Err(MoyalError::ParamOutOfRange(format!(
                    "query component {wi:.3} outside extent on axis {axis}"
                )));
            }
        }
        let npts = self.grid.points();
        let freqs: Vec<Vec<f64>> = (0..2 * n)
            .map(|a| crate::grid::mode_freqs(&self.grid, a))
            .collect();
        let mut acc = C64::new(0.0, 0.0);
        for (mflat, c) in self.modes.iter().enumerate() {
            let mut ph = 0.0;
            let mut rem = mflat;
            for a in (0..2 * n).rev() {
                let k = rem % npts;
                rem /= npts;
                ph += freqs[a][k] * w[a];
            }
            acc += c * C64::from_polar(1.0, ph);
        }
        Ok(acc)
    }
}

/// Dense operator on configuration-grid vectors.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub entries: DMatrix<C64>,
    pub ctx: HbarContext,
    pub grid: GridSpec,
}

impl OperatorMatrix {
    pub fn apply(&self, psi: &SampledField) -> Result<SampledField> {
        if psi.grid() != &self.grid {
            return Err(MoyalError::GridMismatch("operator grid differs from field grid".into()));
        }
        let v = nalgebra::DVector::from_column_slice(psi.values());
        let out = &self.entries * v;
        SampledField::new(self.grid.clone(), out.iter().cloned().collect())
    }

    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.grid != other.grid {
            return Err(MoyalError::GridMismatch("operator grids differ".into()));
        }
        Ok(OperatorMatrix {
            entries: &self.entries * &other.entries,
            ctx: self.ctx,
            grid: self.grid.clone(),
        })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let h = &self.entries - self.entries.adjoint();
        h.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn max_entry_diff(&self, other: &OperatorMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Eigenvalues of the hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        let es = nalgebra::SymmetricEigen::new(h);
        let mut ev: Vec<f64> = es.eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn try_inverse(&self) -> Result<OperatorMatrix> {
        let inv = self
            .entries
            .clone()
            .try_inverse()
            .ok_or_else(|| MoyalError::NonFinite("operator inverse (singular)".into()))?;
        Ok(OperatorMatrix { entries: inv, ctx: self.ctx, grid: self.grid.clone() })
    }
}

/// Configuration grid underlying a phase grid (axis 0 extent, same N).
fn config_grid(phase: &GridSpec) -> Result<GridSpec> {
    GridSpec::uniform(1, phase.points(), phase.extent(0))
}

/// Weyl quantization: the Heisenberg-Weyl operator sum over the reciprocal
/// z0 lattice. Exact (and a *-homomorphism) on kappa = 1 grids; agrees with
/// tau_quantize(A, 1/2) on decaying symbols.
pub fn weyl_quantize(a: &Symbol) -> Result<OperatorMatrix> {
    require_n1(&a.ctx)?;
    let g = a.grid().clone();
    let n = g.points();
    let l = g.extent(0);
    let hbar = a.ctx.hbar;
    let am = mode_coeffs(&a.field);
    let alpha = 2.0 * PI * PI * hbar / (l * l);
    let xs = g.axis_coords(0);
    let q = |idx: usize| idx as isize - (n / 2) as isize;

    // Dg[qp][a] = sum_qx a[qx,qp] e^{i alpha qx qp} e^{i (2pi/L) qx x_a}
    let dg: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|ip| {
            let qp = q(ip) as f64;
            let mut row = vec![C64::new(0.0, 0.0); n];
            for (aidx, slot) in row.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for ix in 0..n {
                    let qx = q(ix) as f64;
                    let ph = alpha * qx * qp + 2.0 * PI / l * qx * xs[aidx];
                    acc += am[ix * n + ip] * C64::from_polar(1.0, ph);
                }
                *slot = acc;
            }
            row
        })
        .collect();

    let mut k = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut cbuf = vec![C64::new(0.0, 0.0); n];
    for ip in 0..n {
        let x0 = -hbar * 2.0 * PI / l * q(ip) as f64;
        shift_profile(&mut cbuf, n, l, x0);
        let dgr = &dg[ip];
        for aidx in 0..n {
            let da = dgr[aidx];
            for bidx in 0..n {
                let d = (aidx + n - bidx) % n;
                k[(aidx, bidx)] += da * cbuf[d];
            }
        }
    }
    Ok(OperatorMatrix { entries: k, ctx: a.ctx, grid: config_grid(&g)? })
}

/// c[d] = band-limited shift profile: Shift(x0)[a, b] = c[(a - b) mod N].
fn shift_profile(out: &mut [C64], n: usize, l: f64, x0: f64) {
    let dx = l / n as f64;
    for (kidx, slot) in out.iter_mut().enumerate() {
        let kq = if kidx <= n / 2 - 1 { kidx as f64 } else { kidx as f64 - n as f64 };
        let freq = 2.0 * PI * kq / (n as f64 * dx);
        *slot = C64::from_polar(1.0, -freq * x0);
    }
    fft_line(out, true);
}

/// tau-ordered quantization: kernel
/// K(x, y) = (2 pi hbar)^{-1} sum_p e^{i p (x - y)/hbar} A((1-tau) x + tau y, p) dp
/// with p on the centered dual lattice (spacing 2 pi hbar / L), the midpoint
/// taken along the short periodic arc, A trig-interpolated, and the dx
/// quadrature weight folded in so the matrix acts by plain matvec.
pub fn tau_quantize(a: &Symbol, tau: f64) -> Result<OperatorMatrix> {
    require_n1(&a.ctx)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(MoyalError::ParamOutOfRange(format!("tau = {tau} outside [0, 1]")));
    }
    let g = a.grid().clone();
    let n = g.points();
    let l = g.extent(0);
    let dx = g.spacing(0);
    let hbar = a.ctx.hbar;
    let am = mode_coeffs(&a.field);
    let q: Vec<f64> = (0..n).map(|i| i as f64 - (n / 2) as f64).collect();
    // Separating the kernel phases keeps everything O(N^3):
    //   K[a, b] = cpref sum_ix PX[a][ix] PD[d][ix] G[ix][d],  d = centered(a - b),
    //   G[ix][d] = sum_m Ahat1[ix][m] e^{i (2pi/L) q_m d dx},
    //   Ahat1[ix][m] = sum_qp a[ix,qp] e^{i (2pi/L) q_qp p'_m},
    //   PX[a][ix] = e^{i (2pi/L) q_ix x_a},  PD[d][ix] = e^{-i (2pi/L) q_ix tau d dx}.
    let unit = 2.0 * PI / l;
    let ahat1: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|ix| {
            let mut row = vec![C64::new(0.0, 0.0); n];
            for (midx, slot) in row.iter_mut().enumerate() {
                // e^{i (2pi/L) q_qp p'_m}: recurrence over qp
                let theta = unit * (2.0 * PI * hbar / l) * q[midx];
                let step = C64::from_polar(1.0, theta);
                let mut ph = C64::from_polar(1.0, theta * q[0]);
                let mut acc = C64::new(0.0, 0.0);
                for ipq in 0..n {
                    acc += am[ix * n + ipq] * ph;
                    ph *= step;
                }
                *slot = acc;
            }
            row
        })
        .collect();
    let cpref = (2.0 * PI * hbar / l) * dx / (2.0 * PI * hbar);
    let xs = g.axis_coords(0);
    // G[ix][didx], d = didx - N/2 in [-N/2, N/2)
    let gmat: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|ix| {
            let mut row = vec![C64::new(0.0, 0.0); n];
            for (didx, slot) in row.iter_mut().enumerate() {
                let d = didx as f64 - (n / 2) as f64;
                let theta = unit * d * dx * (2.0 * PI * hbar / l) / (2.0 * PI / l) / hbar;
                // e^{i dx d p'_m / hbar} with p'_m = (2pi hbar/L) q_m:
                // theta_m = (2pi/L) q_m d dx
                let step = C64::from_polar(1.0, unit * d * dx);
                let mut ph = C64::from_polar(1.0, unit * d * dx * q[0]);
                let _ = theta;
                let mut acc = C64::new(0.0, 0.0);
                for midx in 0..n {
                    acc += ahat1[ix][midx] * ph;
                    ph *= step;
                }
                *slot = acc;
            }
            row
        })
        .collect();
    // assemble per separation class
    let cols: Vec<(usize, Vec<C64>)> = (0..n)
        .into_par_iter()
        .map(|didx| {
            let d = didx as f64 - (n / 2) as f64;
            // H[ix] = PD[d][ix] G[ix][didx]
            let step = C64::from_polar(1.0, -unit * tau * d * dx);
            let mut ph = C64::from_polar(1.0, -unit * tau * d * dx * q[0]);
            let mut h = vec![C64::new(0.0, 0.0); n];
            for ix in 0..n {
                h[ix] = gmat[ix][didx] * ph;
                ph *= step;
            }
            // K[a, (a-d) mod N] = cpref sum_ix PX[a][ix] h[ix]
            let mut col = vec![C64::new(0.0, 0.0); n];
            for (aidx, slot) in col.iter_mut().enumerate() {
                let stepa = C64::from_polar(1.0, unit * xs[aidx]);
                let mut pha = C64::from_polar(1.0, unit * xs[aidx] * q[0]);
                let mut acc = C64::new(0.0, 0.0);
                for ix in 0..n {
                    acc += pha * h[ix];
                    pha *= stepa;
                }
                *slot = acc * cpref;
            }
            (didx, col)
        })
        .collect();
    let mut k = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (didx, col) in cols.iter() {
        let d = *didx as isize - (n / 2) as isize;
        for (aidx, v) in col.iter().enumerate() {
            let b = ((aidx as isize - d).rem_euclid(n as isize)) as usize;
            k[(aidx, b)] = *v;
        }
    }
    Ok(OperatorMatrix { entries: k, ctx: a.ctx, grid: config_grid(&g)? })
}

/// Inverse of `weyl_quantize` by the trace pairing
/// a_mu = tr(T(z0(mu))^+ K) / N;  exact on kappa = 1 grids.
pub fn inverse_weyl_symbol(k: &OperatorMatrix) -> Result<Symbol> {
    require_n1(&k.ctx)?;
    let n = k.grid.points();
    let l = k.grid.extent(0);
    let hbar = k.ctx.hbar;
    let phase_grid = GridSpec::uniform(2, n, l)?;
    let alpha = 2.0 * PI * PI * hbar / (l * l);
    let xs = k.grid.axis_coords(0);
    let q = |idx: usize| idx as isize - (n / 2) as isize;
    let entries = &k.entries;
    let cols: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|ip| {
            let x0 = -hbar * 2.0 * PI / l * q(ip) as f64;
            let mut cbuf = vec![C64::new(0.0, 0.0); n];
            shift_profile(&mut cbuf, n, l, x0);
            // Kc[a] = sum_b conj(c[(a-b)%N]) K[a,b]
            let mut kc = vec![C64::new(0.0, 0.0); n];
            for aidx in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for bidx in 0..n {
                    acc += cbuf[(aidx + n - bidx) % n].conj() * entries[(aidx, bidx)];
                }
                kc[aidx] = acc;
            }
            // a[qx, qp=ip] = conj(tw e^{i p0 x_a/h}) . Kc / N
            let qp = q(ip) as f64;
            let mut col = vec![C64::new(0.0, 0.0); n];
            for (ix, slot) in col.iter_mut().enumerate() {
                let qx = q(ix) as f64;
                let mut acc = C64::new(0.0, 0.0);
                for aidx in 0..n {
                    let ph = alpha * qx * qp + 2.0 * PI / l * qx * xs[aidx];
                    acc += C64::from_polar(1.0, -ph) * kc[aidx];
                }
                *slot = acc / n as f64;
            }
            col
        })
        .collect();
    let mut modes = vec![C64::new(0.0, 0.0); n * n];
    for (ip, col) in cols.iter().enumerate() {
        for (ix, v) in col.iter().enumerate() {
            modes[ix * n + ip] = *v;
        }
    }
    let field = from_modes(&phase_grid, &modes);
    Symbol::new(field, k.ctx)
}

/// Direct double-quadrature of the integral star-product form, the
/// small-grid oracle: O(N^6); exact against the engine on kappa = 2 grids
/// (L^2 = pi hbar N).
pub fn star_direct_smallgrid(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    require_n1(&a.ctx)?;
    check_pair(a, b)?;
    let g = a.grid().clone();
    let n = g.points();
    if n > 16 {
        return Err(MoyalError::ParamOutOfRange(
            "the direct quadrature oracle is restricted to N <= 16".into(),
        ));
    }
    let hbar = a.ctx.hbar;
    let xs = g.axis_coords(0);
    let c = (PI * hbar).powi(-2) * g.weight() * g.weight();
    let av = a.field.values();
    let bv = b.field.values();
    let vals: Vec<C64> = (0..n * n)
        .into_par_iter()
        .map(|flat| {
            let j = flat / n;
            let m = flat % n;
            let (zx, zp) = (xs[j], xs[m]);
            let mut acc = C64::new(0.0, 0.0);
            for j1 in 0..n {
                for m1 in 0..n {
                    let a1 = av[j1 * n + m1];
                    if a1.norm_sqr() == 0.0 {
                        continue;
                    }
                    let (ux, up) = (zx - xs[j1], zp - xs[m1]);
                    for j2 in 0..n {
                        for m2 in 0..n {
                            let (vx, vp) = (zx - xs[j2], zp - xs[m2]);
                            // sigma(u, v) = u_p v_x - v_p u_x
                            let s = up * vx - vp * ux;
                            acc += a1 * bv[j2 * n + m2] * C64::from_polar(1.0, -2.0 * s / hbar);
                        }
                    }
                }
            }
            acc * c
        })
        .collect();
    let field = SampledField::new(g, vals)?;
    Symbol::new(field, a.ctx)
}

/// Literal translation-expansion sum over the reciprocal z0 lattice using
/// `phase_translation`; small grids only (test cross-check for the engine).
pub fn star_via_translations(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    require_n1(&a.ctx)?;
    check_pair(a, b)?;
    let g = a.grid().clone();
    let n = g.points();
    if n > 32 {
        return Err(MoyalError::ParamOutOfRange(
            "the translation-sum cross-check is restricted to N <= 32".into(),
        ));
    }
    let hbar = a.ctx.hbar;
    let am = mode_coeffs(&a.field);
    let l = g.extent(0);
    let mut acc = SampledField::zeros(g.clone());
    for ix in 0..n {
        for ip in 0..n {
            let coeff = am[ix * n + ip];
            if coeff.norm() < 1e-300 {
                continue;
            }
            let qx = ix as f64 - (n / 2) as f64;
            let qp = ip as f64 - (n / 2) as f64;
            // z0(mu) = (-hbar mu_p, hbar mu_x)
            let z0 = crate::symplectic::PhasePoint::of2(
                -hbar * 2.0 * PI / l * qp,
                hbar * 2.0 * PI / l * qx,
            );
            let t = crate::transforms::phase_translation(&z0, &b.field, &a.ctx)?;
            acc = acc.add(&t.scale(coeff))?;
        }
    }
    Symbol::new(acc, a.ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample;
    use approx::assert_abs_diff_eq;

    fn ctx() -> HbarContext {
        HbarContext::desk()
    }

    fn gauss2(g: &GridSpec, cx: f64, cp: f64, s: f64) -> SampledField {
        sample(
            |z| {
                C64::new(
                    (-((z[0] - cx).powi(2) + (z[1] - cp).powi(2)) / (2.0 * s * s)).exp(),
                    0.0,
                )
            },
            g,
        )
        .unwrap()
    }

    #[test]
    fn unit_times_b_is_b() {
        let g = GridSpec::uniform(2, 64, 16.0).unwrap();
        let one = Symbol::new(sample(|_| C64::new(1.0, 0.0), &g).unwrap(), ctx()).unwrap();
        let b = Symbol::new(gauss2(&g, 0.4, -0.3, 1.1), ctx()).unwrap();
        let ob = moyal_star(&one, &b).unwrap();
        assert!(ob.field.max_diff(&b.field) < 1e-13);
    }

    #[test]
    fn ground_projector_idempotent() {
        let g = GridSpec::uniform(2, 64, 16.0).unwrap();
        let w0 = Symbol::new(
            sample(
                |z| C64::new(PI.recip() * (-(z[0] * z[0] + z[1] * z[1])).exp(), 0.0),
                &g,
            )
            .unwrap(),
            ctx(),
        )
        .unwrap();
        let ww = moyal_star(&w0, &w0).unwrap();
        let scaled = w0.field.scale(C64::new(1.0 / (2.0 * PI), 0.0));
        assert!(ww.field.max_diff(&scaled) < 1e-7);
    }

    #[test]
    fn twisted_is_star_at_special_hbar() {
        let g = GridSpec::uniform(2, 32, 12.0).unwrap();
        let a = Symbol::new(gauss2(&g, 0.3, -0.2, 0.9), ctx()).unwrap();
        let b = Symbol::new(gauss2(&g, -0.4, 0.5, 1.0), ctx()).unwrap();
        let tw = twisted_product(&a, &b).unwrap();
        let ctx2 = HbarContext::new(1.0 / (2.0 * PI), 1).unwrap();
        let a2 = Symbol::new(a.field.clone(), ctx2).unwrap();
        let b2 = Symbol::new(b.field.clone(), ctx2).unwrap();
        let st = moyal_star(&a2, &b2).unwrap();
        assert_eq!(tw.field.max_diff(&st.field), 0.0);
        // unit element passes through
        let one = Symbol::new(sample(|_| C64::new(1.0, 0.0), &g).unwrap(), ctx()).unwrap();
        let ob = twisted_product(&one, &b).unwrap();
        assert!(ob.field.max_diff(&b.field) < 1e-13);
    }

    #[test]
    fn conjugation_reverses_factors() {
        let g = GridSpec::uniform(2, 64, 16.0).unwrap();
        let mut av = gauss2(&g, 0.5, -0.4, 1.2);
        for (i, v) in av.values_mut().iter_mut().enumerate() {
            *v *= C64::from_polar(1.0, 0.3 * (i % 7) as f64 / 7.0);
        }
        let a = Symbol::new(gauss2(&g, 0.5, -0.4, 1.2), ctx()).unwrap();
        let b = Symbol::new(gauss2(&g, -0.3, 0.6, 0.9), ctx()).unwrap();
        let lhs = moyal_star(
            &Symbol::new(a.field.conj(), ctx()).unwrap(),
            &Symbol::new(b.field.conj(), ctx()).unwrap(),
        )
        .unwrap();
        let rhs = moyal_star(&b, &a).unwrap().field.conj();
        assert!(lhs.field.max_diff(&rhs) < 1e-9);
    }

    #[test]
    fn bracket_antisymmetric() {
        let g = GridSpec::uniform(2, 32, 12.0).unwrap();
        let a = Symbol::new(gauss2(&g, 0.3, -0.2, 0.9), ctx()).unwrap();
        let br = moyal_bracket(&a, &a).unwrap();
        assert!(br.field.max_abs() < 1e-10);
    }

    #[test]
    fn engine_matches_translation_sum() {
        let ctx1 = ctx();
        let g = GridSpec::weyl_exact(2, 32, ctx1.hbar).unwrap();
        let a = Symbol::new(gauss2(&g, 0.3, -0.2, 0.9), ctx1).unwrap();
        let b = Symbol::new(gauss2(&g, -0.4, 0.5, 1.0), ctx1).unwrap();
        let fast = moyal_star(&a, &b).unwrap();
        let slow = star_via_translations(&a, &b).unwrap();
        assert!(fast.field.max_diff(&slow.field) < 1e-11);
    }

    #[test]
    fn engine_matches_direct_quadrature_on_commensurate_grid() {
        // L^2 = pi hbar N: the direct (star) quadrature is exact
        let ctx1 = ctx();
        let n = 16;
        let l = (PI * ctx1.hbar * n as f64).sqrt();
        let g = GridSpec::uniform(2, n, l).unwrap();
        let a = Symbol::new(gauss2(&g, 0.2, -0.1, 0.7), ctx1).unwrap();
        let b = Symbol::new(gauss2(&g, -0.3, 0.25, 0.8), ctx1).unwrap();
        let fast = moyal_star(&a, &b).unwrap();
        let direct = star_direct_smallgrid(&a, &b).unwrap();
        assert!(fast.field.max_diff(&direct.field) < 1e-12);
    }

    #[test]
    fn quantize_unit_is_identity() {
        let ctx1 = ctx();
        let g = GridSpec::weyl_exact(2, 64, ctx1.hbar).unwrap();
        let one = Symbol::new(sample(|_| C64::new(1.0, 0.0), &g).unwrap(), ctx1).unwrap();
        let k = weyl_quantize(&one).unwrap();
        let id = DMatrix::<C64>::identity(64, 64);
        let diff = (&k.entries - id).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        assert!(diff < 1e-12);
    }

    #[test]
    fn quantize_x_symbol_is_multiplication() {
        let ctx1 = ctx();
        let g = GridSpec::weyl_exact(2, 64, ctx1.hbar).unwrap();
        let l = g.extent(0);
        let (c, w) = (l / 4.0 + 3.0, 0.7);
        let a = Symbol::new(
            sample(|z| C64::new(z[0] * crate::math::erf_step(z[0], c, w), 0.0), &g).unwrap(),
            ctx1,
        )
        .unwrap();
        let k = weyl_quantize(&a).unwrap();
        assert!(k.hermiticity_defect() < 1e-9);
        let xs = k.grid.axis_coords(0);
        for j in 0..64 {
            if xs[j].abs() <= l / 4.0 {
                assert!((k.entries[(j, j)] - C64::new(xs[j], 0.0)).norm() < 1e-6);
            }
            for b in 0..64 {
                if b != j {
                    assert!(k.entries[(j, b)].norm() < 1e-9);
                }
            }
        }
        // tau route agrees (two distinct quadratures)
        let kt = tau_quantize(&a, 0.5).unwrap();
        assert!(k.max_entry_diff(&kt) < 1e-8);
    }

    #[test]
    fn tau_ordering_commutator() {
        // A = x p (enveloped): the tau = 0 and tau = 1 orderings differ by
        // the canonical commutator, i hbar times the identity on localized
        // states
        let ctx1 = ctx();
        let g = GridSpec::weyl_exact(2, 64, ctx1.hbar).unwrap();
        let l = g.extent(0);
        let (c, w) = (l / 4.0 + 3.28, 0.8);
        let a = Symbol::new(
            sample(
                |z| {
                    let env = crate::math::erf_step(z[0], c, w) * crate::math::erf_step(z[1], c, w);
                    C64::new(z[0] * z[1] * env, 0.0)
                },
                &g,
            )
            .unwrap(),
            ctx1,
        )
        .unwrap();
        let k0 = tau_quantize(&a, 0.0).unwrap();
        let k1 = tau_quantize(&a, 1.0).unwrap();
        let gc = k0.grid.clone();
        let psi = sample(
            |x| {
                let dx: f64 = x[0] - 0.5;
                C64::from_polar(PI.powf(-0.25) * (-dx * dx / 2.0).exp(), -0.3 * x[0])
            },
            &gc,
        )
        .unwrap();
        let lhs = k0.apply(&psi).unwrap().sub(&k1.apply(&psi).unwrap()).unwrap();
        let expect = psi.scale(C64::new(0.0, ctx1.hbar));
        assert!(lhs.max_diff(&expect) < 1e-5, "{}", lhs.max_diff(&expect));
    }

    #[test]
    fn tau_outside_range_rejected() {
        let ctx1 = ctx();
        let g = GridSpec::weyl_exact(2, 32, ctx1.hbar).unwrap();
        let a = Symbol::new(gauss2(&g, 0.0, 0.0, 1.0), ctx1).unwrap();
        assert!(tau_quantize(&a, 1.2).is_err());
    }

    #[test]
    fn inverse_of_identity_is_unit() {
        let ctx1 = ctx();
        let g = GridSpec::weyl_exact(1, 64, ctx1.hbar).unwrap();
        let k = OperatorMatrix {
            entries: DMatrix::identity(64, 64),
            ctx: ctx1,
            grid: g,
        };
        let a = inverse_weyl_symbol(&k).unwrap();
        let one = sample(|_| C64::new(1.0, 0.0), a.grid()).unwrap();
        assert!(a.field.max_diff(&one) < 1e-12);
    }

    #[test]
    fn quantize_round_trip() {
        let ctx1 = ctx();
        let g = GridSpec::weyl_exact(2, 64, ctx1.hbar).unwrap();
        let a = Symbol::new(gauss2(&g, 0.4, -0.6, 1.1), ctx1).unwrap();
        let k = weyl_quantize(&a).unwrap();
        let back = inverse_weyl_symbol(&k).unwrap();
        assert!(back.field.max_diff(&a.field) < 1e-12);
    }

    #[test]
    fn bopp_symbol_evaluator() {
        let ctx1 = ctx();
        let g = GridSpec::uniform(2, 32, 12.0).unwrap();
        let a = Symbol::new(gauss2(&g, 0.0, 0.0, 0.8), ctx1).unwrap();
        let bs = BoppSymbol::new(&a).unwrap();
        // zeta = 0 -> A(z)
        let v = bs.eval(&[0.7, -0.4], &[0.0, 0.0]).unwrap();
        let expect = (-((0.7f64).powi(2) + (0.4f64).powi(2)) / (2.0 * 0.64)).exp();
        assert_abs_diff_eq!(v.re, expect, epsilon = 1e-9);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-9);
        // radial symbol: A(0 - J zeta/2) = A(|zeta|/2 pattern)
        let v = bs.eval(&[0.0, 0.0], &[0.8, -0.6]).unwrap();
        let expect = (-(0.25 * (0.8f64 * 0.8 + 0.6 * 0.6)) / (2.0 * 0.64)).exp();
        assert_abs_diff_eq!(v.re, expect, epsilon = 1e-9);
        // out-of-extent query rejected
        assert!(bs.eval(&[10.0, 0.0], &[0.0, 0.0]).is_err());
    }
}
