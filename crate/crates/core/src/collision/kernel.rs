use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Finite-time resonance kernel `K_T(x) = |Δ_T(x)|² / (2πT)` with
/// `Δ_T(x) = (e^{ixT} − 1)/(ix)`, i.e. `2 sin²(xT/2) / (π T x²)`.
///
/// `K_T(0) = T/(2π)`, `∫ K_T dx = 1`, and `K_T → δ` as `T → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadenedKernel {
    averaging_time: f64,
}

impl BroadenedKernel {
    pub fn new(averaging_time: f64) -> Result<Self> {
        if !(averaging_time > 0.0 && averaging_time.is_finite()) {
            return Err(Error::Domain(format!("averaging time must be positive, got {averaging_time}")));
        }
        Ok(Self { averaging_time })
    }

    pub fn averaging_time(&self) -> f64 {
        self.averaging_time
    }

    #[inline]
    pub fn weight(&self, mismatch: f64) -> f64 {
        let t = self.averaging_time;
        let half = 0.5 * mismatch * t;
        if half.abs() < 1e-4 {
            // sin²(u)/u² = 1 − u²/3 + 2u⁴/45
            let u2 = half * half;
            return t / (2.0 * PI) * (1.0 - u2 / 3.0 + 2.0 * u2 * u2 / 45.0);
        }
        let s = half.sin();
        2.0 * s * s / (PI * t * mismatch * mismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let k = BroadenedKernel::new(10.0).unwrap();
        assert!((k.weight(0.0) - 10.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((k.weight(0.0) - 1.591_549_430_918_953).abs() < 1e-12);
        assert!(k.weight(2.0 * PI / 10.0) < 1e-30);
        assert!(BroadenedKernel::new(0.0).is_err());
    }

    #[test]
    fn kernel_is_continuous_even_and_nonnegative() {
        let k = BroadenedKernel::new(3.7).unwrap();
        let u = 2e-4 / 3.7;
        let lo = k.weight(u * 0.999_999);
        let hi = k.weight(u * 1.000_001);
        assert!((lo - hi).abs() < 1e-9 * lo);
        for i in 0..1000 {
            let x = -50.0 + 0.1 * i as f64;
            assert!(k.weight(x) >= 0.0);
            assert_eq!(k.weight(x), k.weight(-x));
        }
    }

    #[test]
    fn kernel_window_mass() {
        // After x = 2u/T the mass is ∫ sin²u/(π u²) du over [-50, 50]; the
        // independent check is a fine composite Simpson rule in u.
        let t = 10.0;
        let k = BroadenedKernel::new(t).unwrap();
        let a = 100.0 / t;
        let n = 400_000;
        let h = 2.0 * a / n as f64;
        let mut s = k.weight(-a) + k.weight(a);
        for i in 1..n {
            let x = -a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * k.weight(x);
        }
        let mass = s * h / 3.0;
        assert!((mass - 0.9937).abs() < 5e-5, "mass {mass}");
    }
}
