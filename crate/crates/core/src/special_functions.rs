//! Modified Bessel functions of the second kind, `K_n(x)`, for integer
//! orders `0..=MAX_ORDER`.
//!
//! `K_0` and `K_1` come from their power series for `x <= 2` and from Steed's
//! continued fraction (already scaled by `e^x`) above that. Higher orders use
//! the upward recurrence `K_{n+1} = K_{n-1} + (2n/x) K_n`, which is stable for
//! this family. All work happens on `e^x K_n(x)`, so ratios stay finite for
//! arguments far beyond the point where `K_n` itself underflows.

use crate::error::{Error, Result};

/// Highest supported order.
pub const MAX_ORDER: u32 = 8;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_4;
const SERIES_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselRequest {
    pub order: u32,
    pub argument: f64,
    /// Return `e^x K_n(x)` instead of `K_n(x)`.
    pub scaled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselStatus {
    Normal,
    /// The unscaled value is below the smallest positive double; `value` is 0.
    Underflow,
    /// The value exceeds the largest double; `value` is infinite.
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue {
    pub value: f64,
    pub status: BesselStatus,
}

fn check(order: u32, x: f64) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order: order as i32,
            max: MAX_ORDER,
        });
    }
    if !(x > 0.0) || x.is_infinite() {
        return Err(Error::domain("x", x, "x > 0, finite"));
    }
    Ok(())
}

/// `e^x K_0(x)` and `e^x K_1(x)`.
fn k0_k1_scaled(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        let (k0, k1) = k0_k1_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k0_k1_steed(x)
    }
}

/// Power series for small arguments (unscaled).
fn k0_k1_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // I_0, and the harmonic-weighted sum for K_0
    let mut term = 1.0; // q^k / (k!)^2
    let mut i0 = 1.0;
    let mut k0_sum = 0.0;
    let mut harmonic = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        k0_sum += term * harmonic;
        if term < 1e-18 * i0 {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_sum;

    // I_1, and sum_k q^k/(k!(k+1)!) [psi(k+1) + psi(k+2)]
    let mut term = 1.0; // q^k / (k! (k+1)!)
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k+2)
    let mut i1_sum = term;
    let mut k1_sum = term * (psi_k1 + psi_k2);
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        psi_k1 = psi_k2;
        psi_k2 += 1.0 / (kf + 1.0);
        i1_sum += term;
        k1_sum += term * (psi_k1 + psi_k2);
        if term < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * k1_sum;
    (k0, k1)
}

/// Steed's continued fraction (Temme's CF2) for order zero, returning
/// `e^x K_0(x)` and `e^x K_1(x)`. Converges quickly for `x >= 2`.
fn k0_k1_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25; // 1/4 - mu^2 with mu = 0
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = delh;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 0.25 * f64::EPSILON {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `e^x K_n(x)` for all `n` in `0..=max_order`.
pub fn bessel_k_scaled_sequence(max_order: u32, x: f64) -> Result<Vec<f64>> {
    check(max_order, x)?;
    let (k0, k1) = k0_k1_scaled(x);
    let mut out = Vec::with_capacity(max_order as usize + 1);
    out.push(k0);
    if max_order >= 1 {
        out.push(k1);
    }
    for n in 1..max_order as usize {
        let next = out[n - 1] + (2.0 * n as f64 / x) * out[n];
        out.push(next);
    }
    Ok(out)
}

/// `e^x K_n(x)`.
pub fn bessel_k_scaled(order: u32, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled_sequence(order, x)?[order as usize])
}

/// `K_n(x)`; returns 0 once the value underflows.
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    Ok(evaluate(BesselRequest {
        order,
        argument: x,
        scaled: false,
    })?
    .value)
}

/// `ln K_n(x)`, finite for every supported argument.
pub fn ln_bessel_k(order: u32, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(order, x)?.ln() - x)
}

pub fn evaluate(req: BesselRequest) -> Result<BesselValue> {
    let scaled = bessel_k_scaled(req.order, req.argument)?;
    let value = if req.scaled {
        scaled
    } else {
        scaled * (-req.argument).exp()
    };
    let status = if value.is_infinite() {
        BesselStatus::Overflow
    } else if value == 0.0 || (!req.scaled && value < f64::MIN_POSITIVE) {
        BesselStatus::Underflow
    } else {
        BesselStatus::Normal
    };
    let value = if status == BesselStatus::Underflow {
        0.0
    } else {
        value
    };
    Ok(BesselValue { value, status })
}

/// `K_num(x) / K_den(x)`, computed from scaled values so the exponentials
/// cancel.
pub fn bessel_k_ratio(num_order: u32, den_order: u32, x: f64) -> Result<f64> {
    let seq = bessel_k_scaled_sequence(num_order.max(den_order), x)?;
    Ok(seq[num_order as usize] / seq[den_order as usize])
}

/// Ratio for signed orders using `K_{-n} = K_n`.
pub fn bessel_k_ratio_signed(num_order: i32, den_order: i32, x: f64) -> Result<f64> {
    let map = |n: i32| -> Result<u32> {
        let m = n.unsigned_abs();
        if m > MAX_ORDER {
            Err(Error::UnsupportedOrder {
                order: n,
                max: MAX_ORDER,
            })
        } else {
            Ok(m)
        }
    };
    bessel_k_ratio(map(num_order)?, map(den_order)?, x)
}
