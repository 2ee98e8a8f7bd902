use std::sync::OnceLock;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Positive zero of Ei as a double-double `X0_HI + X0_LO`.
const X0_HI: f64 = 0.372_507_410_781_366_6;
const X0_LO: f64 = 1.314_018_341_438_602_8e-17;
/// Half-width of the interval around the zero served by the Taylor expansion.
const ROOT_RADIUS: f64 = 0.15;
const ROOT_TERMS: usize = 48;

/// Principal-value exponential integral `Ei(x) = −PV∫_{−x}^{∞} e^{−t}/t dt`.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::EiDivergence);
    }
    if x.is_nan() {
        return Err(Error::Domain("Ei of NaN".into()));
    }
    Ok(if x < 0.0 {
        -e1(-x)
    } else if (x - X0_HI).abs() < ROOT_RADIUS {
        near_root(x)
    } else if x <= 40.0 {
        series(x)
    } else {
        asymptotic(x)
    })
}

/// `E₁(y) = ∫_y^∞ e^{−t}/t dt` for `y > 0`.
fn e1(y: f64) -> f64 {
    if y <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -y / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - y.ln() - sum
    } else {
        // modified Lentz evaluation of the continued fraction
        let tiny = 1e-300;
        let mut b = y + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-y).exp()
    }
}

fn series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..500 {
        term *= x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add < 1e-18 * sum {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

fn asymptotic(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 1..100 {
        let next = term * k as f64 / x;
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    x.exp() / x * sum
}

/// Taylor coefficients `a_n = Ei⁽ⁿ⁾(x₀)/n!` at the zero, using
/// `dᵐ/dxᵐ (eˣ/x) / m! = eˣ Σ_j (−1)ʲ / ((m−j)! x^{j+1})`.
fn root_coefficients() -> &'static [f64; ROOT_TERMS] {
    static COEFFS: OnceLock<[f64; ROOT_TERMS]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let x = X0_HI;
        let ex = x.exp();
        let mut a = [0.0; ROOT_TERMS];
        for (n, slot) in a.iter_mut().enumerate().skip(1) {
            let m = n - 1;
            let mut inv_fact = 1.0;
            let mut g = 0.0;
            // j = m … 0 so that 1/(m−j)! grows with the loop
            for j in (0..=m).rev() {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                g += sign * inv_fact / x.powi(j as i32 + 1);
                inv_fact /= (m - j + 1) as f64;
            }
            *slot = ex * g / n as f64;
        }
        a
    })
}

fn near_root(x: f64) -> f64 {
    let a = root_coefficients();
    let t = (x - X0_HI) - X0_LO;
    let mut acc = 0.0;
    for c in a.iter().rev() {
        acc = acc * t + c;
    }
    acc
}
