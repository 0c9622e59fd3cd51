//! Small numeric helpers shared by the builtin generators and tests.

use std::f64::consts::PI;

/// Complementary error function, machine accuracy: Maclaurin series below
/// x = 2.5, backward-evaluated continued fraction beyond.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        return 1.0 - erf_series(x);
    }
    // erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut tail = x;
    for k in (1..=100u32).rev() {
        tail = x + (k as f64 / 2.0) / tail;
    }
    (-x * x).exp() / PI.sqrt() / tail
}

pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        -erf(-x)
    } else if x < 2.5 {
        erf_series(x)
    } else {
        1.0 - erfc(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/sqrt(pi) sum_k (-1)^k x^{2k+1} / (k! (2k+1)), |x| <= 2.5;
    // worst-case cancellation there costs ~2 digits, still ~1e-14 absolute
    let x2 = x * x;
    let mut term = x;
    let mut acc = x;
    for k in 1..80 {
        term *= -x2 / k as f64;
        let add = term / (2 * k + 1) as f64;
        acc += add;
        if add.abs() < 1e-18 * acc.abs().max(1e-30) {
            break;
        }
    }
    2.0 / PI.sqrt() * acc
}

/// Smooth plateau step built from error functions: 1 inside |x| < c, rolling
/// to 0 across a transition of scale w.
pub fn erf_step(x: f64, c: f64, w: f64) -> f64 {
    0.5 * (erf((c - x) / w) + erf((c + x) / w))
}
