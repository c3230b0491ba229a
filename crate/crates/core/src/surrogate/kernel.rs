use super::SurrogateError;

/// Thin plate spline `r^2 ln r`, extended continuously by `0` at `r = 0`.
pub fn kernel_eval(r: f64) -> Result<f64, SurrogateError> {
    if r.is_nan() || r < 0.0 {
        return Err(SurrogateError::NegativeRadius(r));
    }
    Ok(if r == 0.0 { 0.0 } else { r * r * r.ln() })
}

/// `d/dr (r^2 ln r) = 2 r ln r + r`, with the limit `0` at `r = 0`.
pub fn kernel_deriv(r: f64) -> Result<f64, SurrogateError> {
    if r.is_nan() || r < 0.0 {
        return Err(SurrogateError::NegativeRadius(r));
    }
    Ok(if r == 0.0 { 0.0 } else { 2.0 * r * r.ln() + r })
}

// Hot-path forms in terms of the squared radius; they avoid the square root.

/// `phi(r)` given `r^2`: `r^2 ln r = 0.5 * r^2 * ln(r^2)`.
#[inline(always)]
pub(crate) fn phi_sq(r2: f64) -> f64 {
    if r2 > 0.0 {
        0.5 * r2 * r2.ln()
    } else {
        0.0
    }
}

/// `phi'(r) / r` given `r^2`: `2 ln r + 1 = ln(r^2) + 1`.
#[inline(always)]
pub(crate) fn dphi_over_r_sq(r2: f64) -> f64 {
    if r2 > 0.0 {
        r2.ln() + 1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_eval(0.0).unwrap(), 0.0);
        assert_eq!(kernel_eval(1.0).unwrap(), 0.0);
        assert!((kernel_eval(E).unwrap() - E * E).abs() < 1e-12);
        assert!((kernel_eval(E).unwrap() - 7.389056).abs() < 1e-6);
    }

    #[test]
    fn kernel_derivative_values() {
        assert_eq!(kernel_deriv(0.0).unwrap(), 0.0);
        assert!((kernel_deriv(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((kernel_deriv(E).unwrap() - 3.0 * E).abs() < 1e-12);
        assert!((kernel_deriv(E).unwrap() - 8.154845).abs() < 1e-6);
    }

    #[test]
    fn negative_radius_is_a_domain_error() {
        assert!(matches!(
            kernel_eval(-1e-3),
            Err(SurrogateError::NegativeRadius(_))
        ));
        assert!(kernel_deriv(-2.0).is_err());
        assert!(kernel_eval(f64::NAN).is_err());
    }

    #[test]
    fn squared_forms_agree() {
        for &r in &[1e-6, 0.3, 1.0, 2.5, 40.0] {
            let r2: f64 = r * r;
            assert!((phi_sq(r2) - kernel_eval(r).unwrap()).abs() <= 1e-12 * (1.0 + r2));
            let expect = kernel_deriv(r).unwrap() / r;
            assert!((dphi_over_r_sq(r2) - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &r in &[0.2, 1.0, 3.7] {
            let h = 1e-6;
            let fd = (kernel_eval(r + h).unwrap() - kernel_eval(r - h).unwrap()) / (2.0 * h);
            assert!((fd - kernel_deriv(r).unwrap()).abs() < 1e-6);
        }
    }
}
