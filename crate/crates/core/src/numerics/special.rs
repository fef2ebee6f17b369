use crate::math::{exp, sqrt, PI};
use crate::{Error, Result};

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Modified Bessel function of the first kind, `I_0` or `I_1`.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    let scaled = bessel_i_scaled(order, x)?;
    Ok(if x <= SERIES_LIMIT {
        series(order, x)
    } else {
        scaled * exp(x)
    })
}

/// `e^{-x} I_n(x)`, finite for all `x ≥ 0`.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::domain("order", order as f64, "Bessel order 0 or 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain("x", x, "x >= 0"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x <= SERIES_LIMIT {
        series(order, x) * exp(-x)
    } else {
        asymptotic_scaled(order, x)
    })
}

const SERIES_LIMIT: f64 = 50.0;

// Σ (x/2)^{2k+n} / (k! (k+n)!); every term is positive so there is no
// cancellation.
fn series(order: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let n = order as f64;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (kf + n));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

// e^{-x} I_n(x) ~ (2πx)^{-1/2} Σ_k (-1)^k Π_{j≤k} (4n² − (2j−1)²) / (k! (8x)^k)
fn asymptotic_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / sqrt(2.0 * PI * x)
}
