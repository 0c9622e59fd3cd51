//! Star-exponential propagation: truncated series, 4th-order explicit time
//! stepping of the phase-space evolution equation i hbar dPsi/dt = H (*) Psi,
//! and the configuration-space reference path through the dense matrix
//! exponential of the quantized Hamiltonian.

use crate::error::{MoyalError, Result};
use crate::grid::{inner_product, l2_norm, C64, SampledField};
use crate::star::{bopp_apply, weyl_quantize, OperatorMatrix, Symbol};
use crate::transforms::{wave_packet, Window};
use nalgebra::{DMatrix, DVector};

/// H(z) = (1/2) M z . z + m . z with M symmetric.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    pub m_mat: DMatrix<f64>,
    pub m_vec: DVector<f64>,
}

impl QuadraticHamiltonian {
    pub fn new(m_mat: DMatrix<f64>, m_vec: DVector<f64>) -> Result<Self> {
        if m_mat.nrows() != m_mat.ncols() {
            return Err(MoyalError::NonSquare { rows: m_mat.nrows(), cols: m_mat.ncols() });
        }
        let dev = (&m_mat - m_mat.transpose())
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        if dev > 1e-12 {
            return Err(MoyalError::NonSymmetric(dev));
        }
        if m_vec.len() != m_mat.nrows() {
            return Err(MoyalError::DimensionMismatch(
                "linear term length differs from matrix size".into(),
            ));
        }
        Ok(Self { m_mat, m_vec })
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let zv = DVector::from_column_slice(z);
        0.5 * (&self.m_mat * &zv).dot(&zv) + self.m_vec.dot(&zv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMethod {
    Series,
    Stepper,
    Intertwined,
}

/// Outcome of a phase-space propagation.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub psi_t: SampledField,
    pub t: f64,
    pub steps: usize,
    pub norm_drift: f64,
    pub method: PropagationMethod,
    /// Last-term norm for the series; per-step diagnostics for the stepper.
    pub truncation_indicator: f64,
    pub diagnostics: Vec<StepDiagnostic>,
}

/// One per-step record: time, L2 norm, energy expectation.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostic {
    pub t: f64,
    pub norm: f64,
    pub energy: f64,
}

impl StepDiagnostic {
    pub fn csv_header() -> &'static str {
        "t,norm,energy"
    }

    pub fn csv_row(&self) -> String {
        format!("{:.9},{:.12e},{:.12e}", self.t, self.norm, self.energy)
    }
}

/// Truncated star-exponential series
/// sum_{k<=K} (1/k!) (t / (i hbar))^k Htilde^k Psi0
/// via repeated Bopp application. Reports the last-term norm; errors out if
/// partial-sum terms grow for five consecutive orders.
pub fn star_exp_series(
    h: &Symbol,
    psi0: &SampledField,
    t: f64,
    k_max: usize,
) -> Result<PropagationResult> {
    if k_max > 64 {
        return Err(MoyalError::ParamOutOfRange(format!("K = {k_max} exceeds 64")));
    }
    let norm0 = l2_norm(psi0);
    let mut acc = psi0.clone();
    let mut term = psi0.clone();
    let mut last_norm = l2_norm(&term);
    let mut grow_streak = 0usize;
    let factor = C64::new(0.0, -t / h.ctx.hbar); // t / (i hbar)
    for k in 1..=k_max {
        let ht = bopp_apply(h, &term)?;
        term = ht.scale(factor / k as f64);
        let tn = l2_norm(&term);
        if tn > last_norm {
            grow_streak += 1;
            if grow_streak >= 5 {
                return Err(MoyalError::DivergentSeries(grow_streak));
            }
        } else {
            grow_streak = 0;
        }
        last_norm = tn;
        acc = acc.add(&term)?;
    }
    let drift = (l2_norm(&acc) - norm0).abs();
    Ok(PropagationResult {
        psi_t: acc,
        t,
        steps: k_max,
        norm_drift: drift,
        method: PropagationMethod::Series,
        truncation_indicator: last_norm,
        diagnostics: Vec::new(),
    })
}

/// Classical 4th-order explicit stepper for i hbar dPsi/dt = H (*) Psi.
/// Preconditions: dt <= 0.01 hbar / max|H| and t/dt <= 1e5; aborts if the
/// L2 norm drifts by more than 1e-3.
pub fn star_exp_propagate(
    h: &Symbol,
    psi0: &SampledField,
    t: f64,
    dt: f64,
) -> Result<PropagationResult> {
    let hmax = h.field.max_abs();
    let bound = 0.01 * h.ctx.hbar / hmax.max(1e-300);
    if dt > bound * (1.0 + 1e-12) || dt <= 0.0 {
        return Err(MoyalError::CflViolation { dt, bound });
    }
    let steps = (t / dt).round().max(1.0) as usize;
    if steps as f64 > 1e5 {
        return Err(MoyalError::ParamOutOfRange(format!(
            "t/dt = {} exceeds 1e5 steps",
            steps
        )));
    }
    let dt = t / steps as f64;
    let norm0 = l2_norm(psi0);
    let minus_i_over_h = C64::new(0.0, -1.0 / h.ctx.hbar);
    let mut psi = psi0.clone();
    let mut diagnostics = Vec::with_capacity(steps + 1);
    for step in 0..steps {
        let hk = bopp_apply(h, &psi)?;
        let k1 = hk.scale(minus_i_over_h);
        // energy expectation from the same application: (H*Psi | Psi)/||Psi||^2
        let nrm = l2_norm(&psi);
        let energy = if nrm > 0.0 {
            (inner_product(&hk, &psi)?.re) / (nrm * nrm)
        } else {
            0.0
        };
        diagnostics.push(StepDiagnostic { t: step as f64 * dt, norm: nrm, energy });

        let half = C64::new(dt / 2.0, 0.0);
        let y2 = psi.add(&k1.scale(half))?;
        let k2 = bopp_apply(h, &y2)?.scale(minus_i_over_h);
        let y3 = psi.add(&k2.scale(half))?;
        let k3 = bopp_apply(h, &y3)?.scale(minus_i_over_h);
        let y4 = psi.add(&k3.scale(C64::new(dt, 0.0)))?;
        let k4 = bopp_apply(h, &y4)?.scale(minus_i_over_h);
        let mut upd = k1;
        upd = upd.add(&k2.scale(C64::new(2.0, 0.0)))?;
        upd = upd.add(&k3.scale(C64::new(2.0, 0.0)))?;
        upd = upd.add(&k4)?;
        psi = psi.add(&upd.scale(C64::new(dt / 6.0, 0.0)))?;

        let drift = (l2_norm(&psi) - norm0).abs();
        if drift > 1e-3 {
            return Err(MoyalError::NormDriftExceeded { drift, threshold: 1e-3 });
        }
    }
    let nrm = l2_norm(&psi);
    diagnostics.push(StepDiagnostic { t, norm: nrm, energy: diagnostics.last().map(|d| d.energy).unwrap_or(0.0) });
    Ok(PropagationResult {
        norm_drift: (nrm - norm0).abs(),
        psi_t: psi,
        t,
        steps,
        method: PropagationMethod::Stepper,
        truncation_indicator: dt,
        diagnostics,
    })
}

/// Dense matrix exponential exp(-i t K / hbar) by Pade-13 scaling and
/// squaring.
pub fn matrix_exponential(k: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    let a = &k.entries * C64::new(0.0, -t / k.ctx.hbar);
    let e = expm(&a)?;
    Ok(OperatorMatrix { entries: e, ctx: k.ctx, grid: k.grid.clone() })
}

/// Evolution operator applied to a configuration-space state:
/// psi_t = exp(-i t quantize(H)/hbar) psi0.
pub fn schrodinger_evolve(h: &Symbol, psi0: &SampledField, t: f64) -> Result<SampledField> {
    if psi0.grid().points() > 256 {
        return Err(MoyalError::ParamOutOfRange(
            "dense evolution restricted to N <= 256".into(),
        ));
    }
    let k = weyl_quantize(h)?;
    let u = matrix_exponential(&k, t)?;
    u.apply(psi0)
}

/// Sup-norm residual of the intertwining relation between phase-space
/// propagation of W_phi psi0 and the configuration-space evolution:
/// || Exp(Ht) W_phi psi0  -  W_phi U_t psi0 ||_inf.
pub fn exp_intertwine_residual(
    h: &Symbol,
    phi: &Window,
    psi0: &SampledField,
    t: f64,
    dt: f64,
) -> Result<f64> {
    let wp = wave_packet(phi, psi0, &h.ctx)?;
    let fwd = star_exp_propagate(h, &wp, t, dt)?;
    let psi_t = schrodinger_evolve(h, psi0, t)?;
    let reference = wave_packet(phi, &psi_t, &h.ctx)?;
    Ok(fwd.psi_t.max_diff(&reference))
}

/// Pade-13 scaling-and-squaring matrix exponential.
fn expm(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    if !norm1.is_finite() {
        return Err(MoyalError::NonFinite("matrix exponential".into()));
    }
    let theta13 = 5.371_920_351_148_152;
    let s = if norm1 > theta13 {
        (norm1 / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(0.5f64.powi(s), 0.0);
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (&a6 * C64::new(B[13], 0.0) + &a4 * C64::new(B[11], 0.0) + &a2 * C64::new(B[9], 0.0))
        + &a6 * C64::new(B[7], 0.0)
        + &a4 * C64::new(B[5], 0.0)
        + &a2 * C64::new(B[3], 0.0)
        + &id * C64::new(B[1], 0.0);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * C64::new(B[12], 0.0) + &a4 * C64::new(B[10], 0.0) + &a2 * C64::new(B[8], 0.0))
        + &a6 * C64::new(B[6], 0.0)
        + &a4 * C64::new(B[4], 0.0)
        + &a2 * C64::new(B[2], 0.0)
        + &id * C64::new(B[0], 0.0);
    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .ok_or_else(|| MoyalError::NonFinite("matrix exponential solve".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}
