//! Truncated-grid estimators for the weighted modulation-space norms: the
//! symbol-class norm on phase space (sup over window position, integral over
//! frequency), the wavefunction norms via the STFT, weighted L^q norms, and
//! the window-rescaling inequality check.
//!
//! These are estimators, not certified norms: every report carries a tail
//! estimate for the mass outside the frequency window.

use crate::error::{MoyalError, Result};
use crate::grid::{fft_line, l2_norm, C64, GridSpec, SampledField};
use crate::star::Symbol;
use crate::transforms::{stft, Window};
use rayon::prelude::*;

/// Polynomial weight (1 + |.|^2)^{s/2}; arity distinguishes phase-space
/// weights (2n arguments) from doubled-phase-space weights (4n arguments).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weight {
    pub s: f64,
    pub arity: WeightArity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightArity {
    Phase { n: usize },
    Doubled { n: usize },
}

impl Weight {
    pub fn new(s: f64, arity: WeightArity) -> Result<Self> {
        if s < 0.0 || !s.is_finite() {
            return Err(MoyalError::ParamOutOfRange(format!("weight exponent s = {s}")));
        }
        Ok(Self { s, arity })
    }

    pub fn args(&self) -> usize {
        match self.arity {
            WeightArity::Phase { n } => 2 * n,
            WeightArity::Doubled { n } => 4 * n,
        }
    }
}

/// v_s(point) = (1 + |point|^2)^{s/2}.
pub fn weight_eval(w: &Weight, point: &[f64]) -> Result<f64> {
    if point.len() != w.args() {
        return Err(MoyalError::DimensionMismatch(format!(
            "weight expects {} arguments, got {}",
            w.args(),
            point.len()
        )));
    }
    let r2: f64 = point.iter().map(|v| v * v).sum();
    Ok((1.0 + r2).powf(w.s / 2.0))
}

/// Integrability exponent q >= 1 or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn validate(&self) -> Result<()> {
        match self {
            Exponent::Finite(q) if *q >= 1.0 && q.is_finite() => Ok(()),
            Exponent::Infinity => Ok(()),
            Exponent::Finite(q) => {
                Err(MoyalError::ParamOutOfRange(format!("q = {q} must be >= 1")))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Exponent::Finite(q) => format!("{q}"),
            Exponent::Infinity => "inf".into(),
        }
    }
}

/// One norm estimate: the value plus the bookkeeping the estimator carries.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub value: f64,
    pub window_id: String,
    pub points: usize,
    pub extent: f64,
    pub s: f64,
    pub q: Option<Exponent>,
    pub truncation_tail: f64,
    pub drift: Option<f64>,
}

impl NormReport {
    pub fn csv_header() -> &'static str {
        "value,window_id,N,L,s,q,tail,drift"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{},{},{},{},{},{:.6e},{}",
            self.value,
            self.window_id,
            self.points,
            self.extent,
            self.s,
            self.q.as_ref().map(|q| q.label()).unwrap_or_default(),
            self.truncation_tail,
            self.drift.map(|d| format!("{d:.6e}")).unwrap_or_default(),
        )
    }
}

/// Weighted L^q norm of a phase-space field:
/// (sum |v_s Psi|^q dz)^{1/q}, or the grid sup at q = infinity.
pub fn lsq_norm(psi: &SampledField, q: Exponent, s: f64) -> Result<f64> {
    q.validate()?;
    let g = psi.grid();
    if g.dims() % 2 != 0 {
        return Err(MoyalError::DimensionMismatch(
            "lsq_norm expects a phase-space field".into(),
        ));
    }
    let w = Weight::new(s, WeightArity::Phase { n: g.dims() / 2 })?;
    match q {
        Exponent::Infinity => {
            let mut sup = 0.0f64;
            for (flat, v) in psi.values().iter().enumerate() {
                let vs = weight_eval(&w, &g.node(flat))?;
                sup = sup.max(v.norm() * vs);
            }
            Ok(sup)
        }
        Exponent::Finite(qv) => {
            let mut acc = 0.0f64;
            for (flat, v) in psi.values().iter().enumerate() {
                let vs = weight_eval(&w, &g.node(flat))?;
                acc += (v.norm() * vs).powf(qv);
            }
            Ok((acc * g.weight()).powf(1.0 / qv))
        }
    }
}

/// Default estimator window on the phase grid: unit L2-normalized Gaussian
/// matched to the grid scale.
pub fn default_phase_window(grid: &GridSpec) -> Result<SampledField> {
    if grid.dims() != 2 {
        return Err(MoyalError::DimensionMismatch(
            "default_phase_window expects a 2d phase grid".into(),
        ));
    }
    let raw = crate::grid::sample(
        |z| C64::new((-(z[0] * z[0] + z[1] * z[1]) / 2.0).exp(), 0.0),
        grid,
    )?;
    let nrm = l2_norm(&raw);
    Ok(raw.scale(C64::new(1.0 / nrm, 0.0)))
}

/// Symbol-class norm estimator:
/// int sup_z [ |V_Phi A(z, zeta)| v_s(z, zeta) ] dzeta
/// with V_Phi the 2pi-convention STFT of the phase-space symbol, zeta on the
/// frequency lattice (spacing 1/L per axis), the sup taken over all window
/// positions, and the tail estimated from the outermost frequency shells.
pub fn msinf1_norm(a: &Symbol, window: &SampledField, s: f64) -> Result<NormReport> {
    if a.ctx.n != 1 {
        return Err(MoyalError::UnsupportedDof(a.ctx.n));
    }
    let g = a.grid().clone();
    if window.grid() != &g {
        return Err(MoyalError::GridMismatch("window grid differs from symbol grid".into()));
    }
    let n = g.points();
    let l = g.extent(0);
    let dx2 = g.weight();
    let w = Weight::new(s, WeightArity::Doubled { n: 1 })?;
    let xs = g.axis_coords(0);
    let zf: Vec<f64> = (0..n).map(|k| (k as isize - (n / 2) as isize) as f64 / l).collect();
    let av = a.field.values();
    let wv = window.values();

    // sup over window positions of |V| v_s per frequency; window positions
    // are independent and max is exactly associative, so the parallel
    // reduction is deterministic at any thread count. Work on squared
    // magnitudes to keep sqrt out of the inner loops.
    let wconj: Vec<C64> = wv.iter().map(|v| v.conj()).collect();
    struct Scratch {
        prod: Vec<C64>,
        tr: Vec<C64>,
        sup2: Vec<f64>,
    }
    let sup2 = (0..n * n)
        .into_par_iter()
        .fold(
            || Scratch {
                prod: vec![C64::new(0.0, 0.0); n * n],
                tr: vec![C64::new(0.0, 0.0); n * n],
                sup2: vec![0.0f64; n * n],
            },
            |mut sc, pos| {
                let jx = pos / n;
                let jp = pos % n;
                // A(z') conj(Phi(z' - z)): integer roll of the window
                let sx = jx + n - n / 2;
                let sp = jp + n - n / 2;
                for r in 0..n {
                    let wr = ((r + 2 * n - sx) % n) * n;
                    let base = r * n;
                    for cidx in 0..n {
                        let wc = (cidx + 2 * n - sp) % n;
                        sc.prod[base + cidx] = av[base + cidx] * wconj[wr + wc];
                    }
                }
                // 2d fft: rows in place, transpose, rows again; the result is
                // index-transposed, which the max update absorbs
                for r in 0..n {
                    fft_line(&mut sc.prod[r * n..(r + 1) * n], false);
                }
                for r in 0..n {
                    for cidx in 0..n {
                        sc.tr[cidx * n + r] = sc.prod[r * n + cidx];
                    }
                }
                for r in 0..n {
                    fft_line(&mut sc.tr[r * n..(r + 1) * n], false);
                }
                // tr[bb * n + ba] now holds bin (ba, bb)
                let vsz = 1.0 + xs[jx] * xs[jx] + xs[jp] * xs[jp];
                for ka in 0..n {
                    let ba = (ka + n / 2) % n;
                    for kb in 0..n {
                        let bb = (kb + n / 2) % n;
                        let mag2 = sc.tr[bb * n + ba].norm_sqr();
                        let vs2 = if s == 0.0 {
                            1.0
                        } else {
                            (vsz + zf[ka] * zf[ka] + zf[kb] * zf[kb]).powf(s)
                        };
                        let cand = mag2 * vs2;
                        let slot = &mut sc.sup2[ka * n + kb];
                        if cand > *slot {
                            *slot = cand;
                        }
                    }
                }
                sc
            },
        )
        .map(|sc| sc.sup2)
        .reduce(
            || vec![0.0f64; n * n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    if *y > *x {
                        *x = *y;
                    }
                }
                a
            },
        );
    let sup: Vec<f64> = sup2.iter().map(|v| v.sqrt() * dx2).collect();
    let _ = w;

    let dzeta = 1.0 / (l * l);
    let value: f64 = sup.iter().sum::<f64>() * dzeta;

    // tail: geometric continuation of the outermost frequency shells
    let shell_sum = |ring: usize| -> f64 {
        let lo = ring;
        let hi = n - 1 - ring;
        let mut acc = 0.0;
        for k in 0..n {
            if k < lo || k > hi {
                continue;
            }
            acc += sup[lo * n + k] + sup[hi * n + k];
            if k != lo && k != hi {
                acc += sup[k * n + lo] + sup[k * n + hi];
            }
        }
        acc * dzeta
    };
    let s_last = shell_sum(0);
    let s_prev = shell_sum(1);
    let ratio = if s_prev > 0.0 { (s_last / s_prev).min(0.95) } else { 0.0 };
    let tail = if ratio > 0.0 { s_last * ratio / (1.0 - ratio) } else { 0.0 };
    if tail > 0.1 * value {
        return Err(MoyalError::TailTooLarge { tail, value });
    }
    Ok(NormReport {
        value,
        window_id: "phase-gaussian".into(),
        points: n,
        extent: l,
        s,
        q: None,
        truncation_tail: tail,
        drift: None,
    })
}

/// Wavefunction modulation norm || v_s V_phi psi ||_{L^q} via the STFT.
pub fn msq_norm(
    psi: &SampledField,
    window: &Window,
    q: Exponent,
    s: f64,
) -> Result<NormReport> {
    q.validate()?;
    let v = stft(window.field(), psi)?;
    let g = v.grid().clone();
    // the STFT grid is anisotropic (x extent L, frequency extent N/L); the
    // weight runs over (x, omega) jointly
    let w = Weight::new(s, WeightArity::Phase { n: 1 })?;
    let value = match q {
        Exponent::Infinity => {
            let mut sup = 0.0f64;
            for (flat, val) in v.values().iter().enumerate() {
                let vs = weight_eval(&w, &g.node(flat))?;
                sup = sup.max(val.norm() * vs);
            }
            sup
        }
        Exponent::Finite(qv) => {
            let mut acc = 0.0f64;
            for (flat, val) in v.values().iter().enumerate() {
                let vs = weight_eval(&w, &g.node(flat))?;
                acc += (val.norm() * vs).powf(qv);
            }
            (acc * g.weight()).powf(1.0 / qv)
        }
    };
    // tail from the outermost frequency columns
    let n = g.points();
    let col_mass = |m: usize| -> f64 {
        (0..n).map(|j| v.values()[j * n + m].norm()).sum::<f64>()
    };
    let s_last = col_mass(0) + col_mass(n - 1);
    let s_prev = col_mass(1) + col_mass(n - 2);
    let ratio = if s_prev > 0.0 { (s_last / s_prev).min(0.95) } else { 0.0 };
    let tail = if ratio > 0.0 {
        s_last * ratio / (1.0 - ratio) * g.weight()
    } else {
        0.0
    };
    Ok(NormReport {
        value,
        window_id: "config-window".into(),
        points: psi.grid().points(),
        extent: psi.grid().extent(0),
        s,
        q: Some(q),
        truncation_tail: tail,
        drift: None,
    })
}

/// Report for the window-rescaling inequality
/// ||A_lambda|| <= max(1, lambda^{2s}) ||A||^{Phi_{1/lambda}}.
#[derive(Debug, Clone)]
pub struct ScalingBoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Checks the rescaling bound with the rescaled window on the right.
/// lambda is restricted to [1/4, 4] for grid representability.
pub fn scaling_norm_bound_check(a: &Symbol, lambda: f64, s: f64) -> Result<ScalingBoundReport> {
    if !(0.25..=4.0).contains(&lambda) {
        return Err(MoyalError::ParamOutOfRange(format!(
            "lambda = {lambda} outside [1/4, 4]"
        )));
    }
    let g = a.grid().clone();
    // A_lambda(z) = A(lambda z), sampled by trig interpolation
    let modes = crate::grid::mode_coeffs(&a.field);
    let n = g.points();
    let freqs: Vec<Vec<f64>> = (0..2).map(|ax| crate::grid::mode_freqs(&g, ax)).collect();
    let vals: Vec<C64> = (0..g.len())
        .into_par_iter()
        .map(|flat| {
            let z = g.node(flat);
            let (zx, zp) = (lambda * z[0], lambda * z[1]);
            if zx.abs() > g.extent(0) / 2.0 || zp.abs() > g.extent(1) / 2.0 {
                return C64::new(0.0, 0.0);
            }
            let mut acc = C64::new(0.0, 0.0);
            for (mflat, c) in modes.iter().enumerate() {
                let kx = mflat / n;
                let kp = mflat % n;
                acc += c * C64::from_polar(1.0, freqs[0][kx] * zx + freqs[1][kp] * zp);
            }
            acc
        })
        .collect();
    let a_l = Symbol::new(SampledField::new(g.clone(), vals)?, a.ctx)?;
    let phi = default_phase_window(&g)?;
    // companion window is the raw rescale Phi(z/lambda) (no renormalization:
    // that is what the change of variables produces); the constant must cover
    // both orientations of the weight rescaling, hence the symmetric form
    let nrm0 = {
        let w0 = crate::grid::sample(
            |z| C64::new((-(z[0] * z[0] + z[1] * z[1]) / 2.0).exp(), 0.0),
            &g,
        )?;
        l2_norm(&w0)
    };
    let phi_l = crate::grid::sample(
        |z| {
            C64::new(
                (-((z[0] / lambda).powi(2) + (z[1] / lambda).powi(2)) / 2.0).exp() / nrm0,
                0.0,
            )
        },
        &g,
    )?;
    let c = lambda.powf(2.0 * s).max(lambda.powf(-2.0 * s)).max(1.0);
    let lhs = msinf1_norm(&a_l, &phi, s)?.value;
    let rhs = c * msinf1_norm(a, &phi_l, s)?.value;
    Ok(ScalingBoundReport { lhs, rhs, ok: lhs <= rhs + 1e-6 * rhs.abs().max(1.0) })
}
