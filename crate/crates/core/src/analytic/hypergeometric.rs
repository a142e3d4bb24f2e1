//! Terminating Gauss hypergeometric series `₂F₁(a, b; c; z)` with `a` a
//! nonpositive integer.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn check_parameters(a: i64, c_is_bad: impl Fn(i64) -> bool) -> Result<usize> {
    if a > 0 {
        return Err(Error::UnsupportedParameter(format!(
            "series only terminates for nonpositive integer a, got a = {a}"
        )));
    }
    let terms = a.unsigned_abs() as usize;
    // (c)_k vanishes for some k <= |a| when c is a nonpositive integer above a.
    if (0..terms as i64).any(c_is_bad) {
        return Err(Error::UnsupportedParameter(format!(
            "c is a nonpositive integer reached by the series (a = {a})"
        )));
    }
    Ok(terms)
}

/// `Σ_{k=0}^{|a|} (a)_k (b)_k / ((c)_k k!) z^k`.
///
/// Summed from `k = 0` upward with Kahan compensation while tracking an
/// a-priori rounding bound. When cancellation makes that bound exceed
/// `1e-13` relative, the polynomial is re-evaluated exactly at the given
/// floating-point inputs and rounded once.
pub fn hyp2f1_terminating(a: i64, b: f64, c: f64, z: f64) -> Result<f64> {
    let terms = check_parameters(a, |k| c + k as f64 == 0.0)?;
    let af = a as f64;
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    let mut term = 1.0f64;
    let mut abs_sum = 1.0f64;
    for k in 0..terms {
        let kf = k as f64;
        term *= (af + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        abs_sum += term.abs();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let bound = 6.0 * (terms as f64 + 1.0) * f64::EPSILON * abs_sum;
    if sum.is_finite() && abs_sum.is_finite() && bound <= 1e-13 * sum.abs() {
        return Ok(sum);
    }
    exact_at(a, b, c, z)
}

fn exact_at(a: i64, b: f64, c: f64, z: f64) -> Result<f64> {
    let q = |x: f64| {
        BigRational::from_float(x)
            .ok_or_else(|| Error::DomainError(format!("hypergeometric argument {x} is not finite")))
    };
    let z = q(z)?;
    let coeffs = terminating_coefficients(a, &q(b)?, &q(c)?)?;
    let mut acc = BigRational::zero();
    for coeff in coeffs.iter().rev() {
        acc = acc * &z + coeff;
    }
    Ok(acc.to_f64().unwrap_or(f64::NAN))
}

/// Exact series coefficients: entry `k` is `(a)_k (b)_k / ((c)_k k!)`.
pub fn terminating_coefficients(a: i64, b: &BigRational, c: &BigRational) -> Result<Vec<BigRational>> {
    let terms = check_parameters(a, |k| (c + BigRational::from_integer(k.into())).is_zero())?;
    let a = BigRational::from_integer(a.into());
    let mut out = Vec::with_capacity(terms + 1);
    let mut coeff = BigRational::one();
    out.push(coeff.clone());
    for k in 0..terms {
        let kq = BigRational::from_integer((k as i64).into());
        let num = (&a + &kq) * (b + &kq);
        let den = (c + &kq) * (&kq + BigRational::one());
        coeff = coeff * num / den;
        out.push(coeff.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_single_term_series() {
        for &(b, c, z) in &[(0.3, 1.7, -2.0), (-4.0, 0.5, 0.9), (12.0, 3.0, 1e3)] {
            assert_eq!(hyp2f1_terminating(0, b, c, z).unwrap(), 1.0);
            let one_term = hyp2f1_terminating(-1, b, c, z).unwrap();
            assert!((one_term - (1.0 - b * z / c)).abs() <= 1e-15 * (1.0 + (b * z / c).abs()));
        }
    }

    #[test]
    fn binomial_identity_at_one() {
        // ₂F₁(-2, 1; 1; z) = (1 - z)²
        assert_eq!(hyp2f1_terminating(-2, 1.0, 1.0, 1.0).unwrap(), 0.0);
        let z = 0.37;
        assert!((hyp2f1_terminating(-2, 1.0, 1.0, z).unwrap() - (1.0 - z) * (1.0 - z)).abs() < 1e-16);
    }

    #[test]
    fn rejects_non_terminating_and_bad_c() {
        assert!(matches!(hyp2f1_terminating(2, 1.0, 1.0, 0.5), Err(Error::UnsupportedParameter(_))));
        assert!(matches!(hyp2f1_terminating(-3, 1.0, -1.0, 0.5), Err(Error::UnsupportedParameter(_))));
        // c = -3 is only reached after the series has terminated.
        assert!(hyp2f1_terminating(-3, 1.0, -3.0, 0.5).is_ok());
    }

    #[test]
    fn cancellation_falls_back_to_exact() {
        // (1 - z)^25 near z = 1 cancels almost completely in the series.
        let z = 0.999;
        let v = hyp2f1_terminating(-25, 1.0, 1.0, z).unwrap();
        let want = (1.0f64 - z).powi(25);
        assert!((v - want).abs() <= 1e-12 * want, "{v} vs {want}");
        assert!(matches!(hyp2f1_terminating(-3, 1.0, 1.0, f64::NAN), Err(Error::DomainError(_))));
    }

    #[test]
    fn exact_coefficients_match_float() {
        let b = BigRational::new((-7).into(), 2.into());
        let c = BigRational::new(5.into(), 3.into());
        let coeffs = terminating_coefficients(-4, &b, &c).unwrap();
        assert_eq!(coeffs.len(), 5);
        let z = 0.25f64;
        let exact: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, q)| num_traits::ToPrimitive::to_f64(q).unwrap() * z.powi(k as i32))
            .sum();
        let float = hyp2f1_terminating(-4, -3.5, 5.0 / 3.0, z).unwrap();
        assert!((exact - float).abs() < 1e-14);
    }
}
