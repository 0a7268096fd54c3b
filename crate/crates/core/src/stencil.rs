//! Quadratic Lagrange weights on three equispaced nodes `0, 1, 2` (in units of
//! `h`), evaluated at a fractional offset `ϑ ∈ [0, 1)` from the first node.

use crate::error::{Error, Result};

/// Value, first- and second-derivative weights for the three stencil nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilCoefficients {
    pub value: [f64; 3],
    /// Scaled by `1/h`.
    pub first: [f64; 3],
    /// Scaled by `1/h²`.
    pub second: [f64; 3],
}

pub fn lagrange_coeffs(theta: f64, h: f64) -> Result<StencilCoefficients> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Argument(format!("stencil offset {theta} outside [0, 1)")));
    }
    if !(h > 0.0) {
        return Err(Error::Argument(format!("grid spacing {h} must be positive")));
    }
    let t = theta;
    Ok(StencilCoefficients {
        value: [0.5 * (1.0 - t) * (2.0 - t), t * (2.0 - t), 0.5 * t * (t - 1.0)],
        first: [
            (2.0 * t - 3.0) / (2.0 * h),
            2.0 * (1.0 - t) / h,
            (2.0 * t - 1.0) / (2.0 * h),
        ],
        second: [1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_node() {
        let c = lagrange_coeffs(0.0, 0.3).unwrap();
        assert_eq!(c.value, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn midpoint() {
        let c = lagrange_coeffs(0.5, 1.0).unwrap();
        assert_eq!(c.value, [0.375, 0.75, -0.125]);
    }

    #[test]
    fn second_derivative_is_constant() {
        for (t, h) in [(0.0, 1.0), (0.3, 0.1), (0.99, 0.025)] {
            let c = lagrange_coeffs(t, h).unwrap();
            let scaled: Vec<f64> = c.second.iter().map(|w| w * h * h).collect();
            for (a, b) in scaled.iter().zip([1.0, -2.0, 1.0]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_offset_outside_unit_interval() {
        assert!(lagrange_coeffs(1.0, 1.0).is_err());
        assert!(lagrange_coeffs(-1e-3, 1.0).is_err());
        assert!(lagrange_coeffs(f64::NAN, 1.0).is_err());
        assert!(lagrange_coeffs(0.5, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn polynomial_exactness(t in 0.0f64..1.0, h in 1e-3f64..1.0) {
            let c = lagrange_coeffs(t, h).unwrap();
            let m = [0.0, 1.0, 2.0];
            let dot = |w: &[f64; 3], f: &dyn Fn(f64) -> f64| w.iter().zip(m).map(|(w, m)| w * f(m)).sum::<f64>();
            prop_assert!((dot(&c.value, &|_| 1.0) - 1.0).abs() < 1e-13);
            prop_assert!((dot(&c.value, &|m| m) - t).abs() < 1e-13);
            prop_assert!((dot(&c.value, &|m| m * m) - t * t).abs() < 1e-13);
            // derivatives in physical units of the quadratic (m h)²
            prop_assert!((dot(&c.first, &|_| 1.0) * h).abs() < 1e-13);
            prop_assert!((dot(&c.first, &|m| m * h) - 1.0).abs() < 1e-12);
            prop_assert!((dot(&c.first, &|m| (m * h).powi(2)) - 2.0 * t * h).abs() < 1e-12);
            prop_assert!((dot(&c.second, &|_| 1.0) * h * h).abs() < 1e-13);
            prop_assert!((dot(&c.second, &|m| (m * h).powi(2)) - 2.0).abs() < 1e-10);
        }
    }
}
