//! One-point eigenvalue density of the fixed-trace Wishart ensemble.
//!
//! The density is a sum over `i = 1..=n` of
//! `K_i μ^{i+α-1} (1-μ)^{nm-α-i-1} [(n-i) F(-n) - n F(1-n)]` where
//! `F(a) = ₂F₁(a, i-nm+α; α+1; μ/(μ-1)) / Γ(α+1)`. The terms alternate in
//! sign and cancel by many orders of magnitude once `n` reaches a few tens, so
//! the sum is collected exactly: after pulling out the common factor
//! `K_1 μ^α (1-μ)^{nm-α-2n-1} / Γ(α+1)`, what remains is a homogeneous
//! polynomial `Σ_d e_d μ^d (1-μ)^{2n-1-d}` with rational coefficients. Only
//! the common factor goes through log-gamma arithmetic.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::hypergeometric::terminating_coefficients;
use crate::ensembles::{Beta, EnsembleParams};
use crate::error::{Error, Result};

/// Default grid size for [`DensityCurve`].
pub const DEFAULT_GRID_POINTS: usize = 2000;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `ln |x|` for arbitrarily large integers.
fn ln_abs(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 960 {
        return x.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact `(numerator, denominator)` of a finite float, denominator > 0.
fn float_to_ratio(x: f64) -> (BigInt, BigInt) {
    let r = BigRational::from_float(x).expect("finite float");
    (r.numer().clone(), r.denom().clone())
}

/// Precomputed eigenvalue density for one parameter set.
#[derive(Clone, Debug)]
pub struct EigenvalueDensity {
    params: EnsembleParams,
    /// Integer coefficients `E_d = L·e_d` for `d = low..=high`.
    coeffs: Vec<BigInt>,
    /// Total exponent of μ: α + lowest surviving degree.
    mu_power: f64,
    /// Total exponent of (1-μ).
    nu_power: f64,
    /// Degree of the remaining homogeneous polynomial.
    degree: usize,
    /// ln of `|K_1| / (Γ(α+1) L)`.
    log_scale: f64,
    /// Sign of `K_1`.
    sign: f64,
}

impl EigenvalueDensity {
    pub fn new(params: &EnsembleParams) -> Result<Self> {
        let n = params.n() as i64;
        let m = params.m() as i64;
        if params.beta() != Beta::Complex {
            return Err(Error::UnsupportedParameter(
                "eigenvalue density is only available for beta = 2; the same expression with the \
                 real-case alpha does not integrate to one"
                    .into(),
            ));
        }
        if n < 2 {
            return Err(Error::DomainError(
                "n = 1 has the single eigenvalue 1; no continuous density".into(),
            ));
        }
        let nm = n * m;
        let beta = params.beta().as_u8() as i64;
        let alpha = BigRational::new(BigInt::from(beta * (m - n + 1) - 2), BigInt::from(2));
        let alpha_f = params.alpha();
        let c = &alpha + q(1);

        let total_degree = (2 * n - 1) as usize;
        let mut e = vec![BigRational::zero(); total_degree + 1];

        // ratio = K_i / K_1, advanced in i.
        let mut ratio = BigRational::one();
        for i in 1..=n {
            if i > 1 {
                // K_i/K_{i-1} = -(n-i+1)/(i-1) · (nm-α-i)/(i+α)
                let step = q(-(n - i + 1)) * (q(nm - i) - &alpha) / (q(i - 1) * (&alpha + q(i)));
                ratio *= step;
            }
            let b = q(i - nm) + &alpha;
            for (a, weight) in [(-n, n - i), (1 - n, -n)] {
                if weight == 0 {
                    continue;
                }
                let w = &ratio * q(weight);
                for (k, t) in terminating_coefficients(a, &b, &c)?.into_iter().enumerate() {
                    let d = (i - 1) as usize + k;
                    let term = &w * t;
                    if k % 2 == 0 {
                        e[d] += term;
                    } else {
                        e[d] -= term;
                    }
                }
            }
        }

        let low = e.iter().position(|x| !x.is_zero());
        let Some(low) = low else {
            return Err(Error::DomainError(format!("density vanishes identically for {params}")));
        };
        let high = e.iter().rposition(|x| !x.is_zero()).unwrap();
        let lcm = e[low..=high].iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let coeffs: Vec<BigInt> = e[low..=high]
            .iter()
            .map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();

        let nm_f = nm as f64;
        let n_f = n as f64;
        let log_k1 = ln_gamma(m as f64 + 1.0) + ln_gamma(nm_f)
            - n_f.ln()
            - ln_gamma(n_f)
            - ln_gamma(alpha_f + 2.0)
            - ln_gamma(nm_f - alpha_f - 1.0);
        let log_scale = log_k1 - ln_gamma(alpha_f + 1.0) - ln_abs(&lcm);

        Ok(Self {
            params: *params,
            coeffs,
            mu_power: alpha_f + low as f64,
            nu_power: nm_f - alpha_f - 2.0 * n_f - 1.0 + (total_degree - high) as f64,
            degree: high - low,
            log_scale,
            sign: -1.0,
        })
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    /// Density at `μ = num/den` with `0 <= num <= den`. Endpoints return the
    /// limiting value (zero, finite, or `+∞` for an integrable singularity).
    pub fn eval_ratio(&self, num: &BigInt, den: &BigInt) -> f64 {
        debug_assert!(den.is_positive() && !num.is_negative() && num <= den);
        let rest = den - num;
        let mut acc = BigInt::zero();
        let mut nu_pow = BigInt::one();
        // Σ_j E_j num^j rest^{deg-j}, Horner in num with rest powers carried along.
        for coeff in self.coeffs.iter().rev() {
            acc = acc * num + coeff * &nu_pow;
            nu_pow *= &rest;
        }
        if acc.is_zero() {
            return 0.0;
        }
        let poly_sign = if acc.sign() == Sign::Minus { -1.0 } else { 1.0 };
        let log_poly = ln_abs(&acc) - self.degree as f64 * ln_abs(den);

        let ratio_f64 = |x: &BigInt| BigRational::new(x.clone(), den.clone()).to_f64().unwrap();
        let (mu, one_minus) = (ratio_f64(num), ratio_f64(&rest));
        let logs = if mu <= 0.5 {
            (mu.ln(), (-mu).ln_1p())
        } else {
            ((-one_minus).ln_1p(), one_minus.ln())
        };
        let mut log_val = self.log_scale + log_poly;
        for (part, power, log_part) in [(num, self.mu_power, logs.0), (&rest, self.nu_power, logs.1)] {
            if power == 0.0 {
                continue;
            }
            if part.is_zero() {
                return if power > 0.0 { 0.0 } else { f64::INFINITY };
            }
            log_val += power * log_part;
        }
        self.sign * poly_sign * log_val.exp()
    }

    /// Density at `μ ∈ (0, 1)`.
    pub fn eval(&self, mu: f64) -> Result<f64> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::DomainError(format!("eigenvalue {mu} outside (0, 1)")));
        }
        let (num, den) = float_to_ratio(mu);
        Ok(self.eval_ratio(&num, &den))
    }

    pub fn finite_at_zero(&self) -> bool {
        self.mu_power >= 0.0
    }

    pub fn finite_at_one(&self) -> bool {
        self.nu_power >= 0.0
    }

    /// Samples the density on `points` uniformly spaced abscissae. Both
    /// endpoints are included when the density is finite there; otherwise
    /// the grid starts (or stops) one step inside the interval.
    pub fn curve(&self, points: usize) -> Result<DensityCurve> {
        if points < 3 {
            return Err(Error::DomainError("density curve needs at least 3 points".into()));
        }
        let include_lo = self.finite_at_zero();
        let include_hi = self.finite_at_one();
        let intervals = points - 1 + usize::from(!include_lo) + usize::from(!include_hi);
        let first = usize::from(!include_lo);
        let den = BigInt::from(intervals);
        let mut abscissae = Vec::with_capacity(points);
        let mut ordinates = Vec::with_capacity(points);
        for j in first..first + points {
            abscissae.push(j as f64 / intervals as f64);
            ordinates.push(self.eval_ratio(&BigInt::from(j), &den));
        }
        Ok(DensityCurve { abscissae, ordinates, includes_zero: include_lo, includes_one: include_hi })
    }

    /// Samples the density on `points` abscissae placed for the composite
    /// trapezoid: local spacing follows `|p''|^(-1/3)` (estimated on a pilot
    /// grid `μ = s²` that resolves the hard edge), with convex and concave
    /// stretches weighted so their opposite-signed errors cancel against the
    /// quadrature value of the integral. Endpoint handling is as in
    /// [`EigenvalueDensity::curve`].
    pub fn curve_equidistributed(&self, points: usize) -> Result<DensityCurve> {
        if points < 3 {
            return Err(Error::DomainError("density curve needs at least 3 points".into()));
        }
        let include_lo = self.finite_at_zero();
        let include_hi = self.finite_at_one();
        let pilot_n = 20 * points;
        let lo = if include_lo { 0.0 } else { (0.5 / pilot_n as f64).powi(2) };
        let hi = if include_hi { 1.0 } else { 1.0 - 0.5 / pilot_n as f64 };
        let xs: Vec<f64> = (0..=pilot_n)
            .map(|i| {
                let s = i as f64 / pilot_n as f64;
                lo + (hi - lo) * s * s
            })
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| self.eval_at(x)).collect();

        // Signed p'' from three-point divided differences.
        let mut d2 = vec![0.0; xs.len()];
        for i in 1..xs.len() - 1 {
            let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            d2[i] = 2.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0) / (h0 + h1);
        }
        let last = xs.len() - 1;
        d2[0] = d2[1];
        d2[last] = d2[last - 1];

        let target = self.integrate(lo, hi, 0);
        let build = |convex_weight: f64| -> DensityCurve {
            let abscissae = place(&xs, &d2, convex_weight, points);
            let ordinates = abscissae.iter().map(|&x| self.eval_at(x)).collect();
            DensityCurve { abscissae, ordinates, includes_zero: include_lo, includes_one: include_hi }
        };
        // Secant on ln(weight); the error changes sign between small and
        // large convex weights.
        let mut best = build(1.0);
        let mut best_err = best.integral() - target;
        let (mut x0, mut e0) = (0.0f64, best_err);
        let mut x1: f64 = if e0 > 0.0 { -0.1 } else { 0.1 };
        for _ in 0..12 {
            let curve = build(x1.exp());
            let e1 = curve.integral() - target;
            if e1.abs() < best_err.abs() {
                best = curve;
                best_err = e1;
            }
            if best_err.abs() < 1e-9 || e1 == e0 {
                break;
            }
            let x2 = (x1 - e1 * (x1 - x0) / (e1 - e0)).clamp(-2.0, 2.0);
            (x0, e0, x1) = (x1, e1, x2);
        }
        if best.abscissae.len() != points {
            return Err(Error::DomainError(format!("could not place {points} distinct abscissae")));
        }
        Ok(best)
    }

    fn eval_at(&self, mu: f64) -> f64 {
        let (num, den) = float_to_ratio(mu);
        self.eval_ratio(&num, &den)
    }
}

/// Inverts the cumulative monitor `w·|p''|^(1/3)` (`w` applies where
/// `p'' > 0`), plus a 5% uniform floor so flat tails keep some points.
fn place(xs: &[f64], d2: &[f64], convex_weight: f64, points: usize) -> Vec<f64> {
    let last = xs.len() - 1;
    let monitor: Vec<f64> =
        d2.iter().map(|&v| v.abs().cbrt() * if v > 0.0 { convex_weight } else { 1.0 }).collect();
    let mut cumulative = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        cumulative[i] = cumulative[i - 1] + 0.5 * (monitor[i] + monitor[i - 1]) * (xs[i] - xs[i - 1]);
    }
    let (lo, hi) = (xs[0], xs[last]);
    let floor = 0.05 * cumulative[last] / (hi - lo);
    for i in 1..xs.len() {
        cumulative[i] += floor * (xs[i] - lo);
    }
    let total = cumulative[last];
    let mut out = Vec::with_capacity(points);
    let mut j = 0;
    for k in 0..points {
        let target = total * k as f64 / (points - 1) as f64;
        while j + 1 < last && cumulative[j + 1] < target {
            j += 1;
        }
        let span = cumulative[j + 1] - cumulative[j];
        let t = if span > 0.0 { ((target - cumulative[j]) / span).clamp(0.0, 1.0) } else { 0.0 };
        out.push(xs[j] + t * (xs[j + 1] - xs[j]));
    }
    out[0] = lo;
    out[points - 1] = hi;
    out.dedup();
    out
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the three-term
/// recurrence).
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order as f64;
    let mut out = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

impl EigenvalueDensity {
    /// `∫₀¹ μ^k p(μ) dμ`; see [`EigenvalueDensity::integrate`].
    pub fn moment(&self, k: i32) -> f64 {
        self.integrate(0.0, 1.0, k)
    }

    /// `∫_a^b μ^k p(μ) dμ` for `0 <= a < b <= 1`, by 20-point Gauss-Legendre
    /// panels on a mesh graded geometrically towards both endpoints of
    /// `[0, 1]` (down to 1e-14), so the hard-edge structure at `μ ~ n⁻³` is
    /// resolved. Panels touching 0 or 1 use `μ = a t²` (mirrored at 1) to
    /// absorb an inverse-square-root singularity.
    pub fn integrate(&self, a: f64, b: f64, k: i32) -> f64 {
        assert!(0.0 <= a && a < b && b <= 1.0, "invalid interval [{a}, {b}]");
        let rule = gauss_legendre(20);
        let f = |mu: f64| -> f64 { self.eval_at(mu) * mu.powi(k) };
        let mut breaks = vec![a];
        breaks.extend(graded_mesh().into_iter().filter(|&x| x > a && x < b));
        breaks.push(b);

        let panel = |lo: f64, hi: f64| -> f64 {
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
        };
        // ∫₀^h f(μ) dμ = ∫₀¹ 2 h t f(h t²) dt, and the mirror image at 1.
        let edge = |h: f64, at_one: bool| -> f64 {
            rule.iter()
                .map(|&(x, w)| {
                    let t = 0.5 * (x + 1.0);
                    let mu = if at_one { 1.0 - h * t * t } else { h * t * t };
                    w * 2.0 * h * t * f(mu)
                })
                .sum::<f64>()
                * 0.5
        };

        breaks
            .windows(2)
            .map(|w| {
                if w[0] == 0.0 {
                    edge(w[1], false)
                } else if w[1] == 1.0 {
                    edge(1.0 - w[0], true)
                } else {
                    panel(w[0], w[1])
                }
            })
            .sum()
    }
}

/// Interior breakpoints: 1e-14 .. 1e-2 geometric, 98 uniform panels across
/// the bulk, then mirrored towards 1.
fn graded_mesh() -> Vec<f64> {
    let mut breaks = Vec::with_capacity(130);
    for e in (2..=14).rev() {
        breaks.push(10f64.powi(-e));
    }
    let inner = 98;
    for j in 1..inner {
        breaks.push(0.01 + 0.98 * j as f64 / inner as f64);
    }
    for e in 2..=14 {
        breaks.push(1.0 - 10f64.powi(-e));
    }
    breaks
}

/// `p(μ)` for the complex (β = 2) fixed-trace ensemble.
pub fn eig_density(params: &EnsembleParams, mu: f64) -> Result<f64> {
    EigenvalueDensity::new(params)?.eval(mu)
}

/// Density sampled on a grid (uniform or equidistributed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub abscissae: Vec<f64>,
    pub ordinates: Vec<f64>,
    /// Whether the grid starts at μ = 0 (else one step inside).
    pub includes_zero: bool,
    /// Whether the grid ends at μ = 1 (else one step inside).
    pub includes_one: bool,
}

impl DensityCurve {
    pub fn uniform(params: &EnsembleParams, points: usize) -> Result<Self> {
        EigenvalueDensity::new(params)?.curve(points)
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    fn trapezoid(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let vals: Vec<f64> = self.abscissae.iter().zip(&self.ordinates).map(|(&x, &y)| f(x, y)).collect();
        self.abscissae.windows(2).zip(vals.windows(2)).map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1])).sum()
    }

    /// Composite trapezoid ∫ p(μ) dμ over the grid.
    pub fn integral(&self) -> f64 {
        self.trapezoid(|_, y| y)
    }

    /// Composite trapezoid ∫ μ p(μ) dμ over the grid.
    pub fn first_moment(&self) -> f64 {
        self.trapezoid(|x, y| x * y)
    }

    pub fn min_ordinate(&self) -> f64 {
        self.ordinates.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: u8, n: usize, m: usize) -> EnsembleParams {
        EnsembleParams::new(beta, n, m).unwrap()
    }

    #[test]
    fn equidistributed_trapezoid_is_normalized() {
        for (n, m) in [(25, 29), (2, 3), (5, 5)] {
            let d = EigenvalueDensity::new(&params(2, n, m)).unwrap();
            let c = d.curve_equidistributed(2000).unwrap();
            assert_eq!(c.len(), 2000);
            assert!(c.abscissae.windows(2).all(|w| w[1] > w[0]));
            assert!((c.integral() - 1.0).abs() < 1e-6, "n={n} m={m}: {}", c.integral());
            assert!((c.first_moment() - 1.0 / n as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        let d = EigenvalueDensity::new(&params(2, 2, 2)).unwrap();
        assert_eq!(d.eval(0.5).unwrap(), 0.0);
        assert!((d.eval(0.25).unwrap() - 0.75).abs() < 1e-14);
        for k in 1..50 {
            let mu = k as f64 / 50.0;
            let want = 3.0 * (2.0 * mu - 1.0).powi(2);
            assert!((d.eval(mu).unwrap() - want).abs() < 1e-12, "mu = {mu}");
        }
    }

    #[test]
    fn endpoints_use_limits() {
        let d = EigenvalueDensity::new(&params(2, 2, 2)).unwrap();
        assert!(d.finite_at_zero() && d.finite_at_one());
        let one = BigInt::one();
        assert!((d.eval_ratio(&BigInt::zero(), &one) - 3.0).abs() < 1e-12);
        assert!((d.eval_ratio(&one, &one) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let d = EigenvalueDensity::new(&params(2, 3, 4)).unwrap();
        for mu in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(d.eval(mu), Err(Error::DomainError(_))));
        }
        assert!(EigenvalueDensity::new(&params(2, 1, 3)).is_err());
    }

    #[test]
    fn matches_high_precision_reference() {
        // Values from an independent 60-digit evaluation of the K_i sum.
        let cases = [
            (5, 7, 0.01, 4.763052524082865),
            (5, 7, 0.1, 2.254496297656985),
            (25, 25, 0.01, 15.040881115406643),
            (25, 25, 0.04, 6.784782551015739),
            (25, 31, 0.04, 7.431311198016761),
            (25, 31, 0.2, 6.3417879679876e-12),
        ];
        for (n, m, mu, want) in cases {
            let got = eig_density(&params(2, n, m), mu).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "n={n} m={m} mu={mu}: {got} vs {want}");
        }
    }

    #[test]
    fn normalization_and_mean_eigenvalue() {
        for n in [2usize, 5, 25] {
            for m in [n, n + 2, n + 6] {
                let d = EigenvalueDensity::new(&params(2, n, m)).unwrap();
                let norm = d.moment(0);
                let mean = d.moment(1);
                assert!((norm - 1.0).abs() < 1e-6, "n={n} m={m} norm={norm}");
                assert!((mean - 1.0 / n as f64).abs() < 1e-6, "n={n} m={m} mean={mean}");
            }
        }
    }

    #[test]
    fn real_case_is_rejected() {
        assert!(matches!(EigenvalueDensity::new(&params(1, 3, 3)), Err(Error::UnsupportedParameter(_))));
    }

    #[test]
    fn curve_trapezoid_on_smooth_densities() {
        for (n, m) in [(2, 2), (2, 4), (5, 11)] {
            let c = DensityCurve::uniform(&params(2, n, m), DEFAULT_GRID_POINTS).unwrap();
            assert_eq!(c.len(), DEFAULT_GRID_POINTS);
            assert!(c.includes_zero && c.includes_one);
            assert!((c.integral() - 1.0).abs() < 1e-6, "n={n} m={m}");
            assert!(c.min_ordinate() >= -1e-9);
        }
    }

    #[test]
    fn curve_is_nonnegative_at_kicked_top_sizes() {
        for m in [25, 27, 29, 31] {
            let c = DensityCurve::uniform(&params(2, 25, m), DEFAULT_GRID_POINTS).unwrap();
            assert!(c.min_ordinate() >= -1e-9);
            assert!((c.first_moment() - 1.0 / 25.0).abs() < 1e-5);
        }
    }
}
