//! Interactions and their partial-wave kernels `V_l(p, p')`.
//!
//! A kernel is the Legendre projection of the Fourier-transformed potential,
//! `V_l(p, p') = 2π ∫_{-1}^{1} P_l(t) V_FT(sqrt(p² + p'² - 2 p p' t)) dt`.
//! Gaussian and Yukawa interactions have closed forms; anything else goes
//! through adaptive Gauss-Legendre quadrature of that integral.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::specfun;

const MODULE: &str = "potentials";

/// Shared real function of one real variable.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An interaction, given by its radial form and/or its Fourier transform.
#[derive(Clone)]
pub enum Potential {
    /// `V(r) = -a exp(-b² r²)`.
    Gaussian { a: f64, b: f64 },
    /// `V(r) = -a exp(-b r) / r`.
    Yukawa { a: f64, b: f64 },
    /// User-supplied `V_FT(k)` and, optionally, `V(r)` for radial observables.
    Custom { v_ft: RealFn, v_r: Option<RealFn> },
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Gaussian { a, b } => write!(f, "Gaussian {{ a: {a}, b: {b} }}"),
            Potential::Yukawa { a, b } => write!(f, "Yukawa {{ a: {a}, b: {b} }}"),
            Potential::Custom { v_r, .. } => {
                write!(
                    f,
                    "Custom {{ v_r: {} }}",
                    if v_r.is_some() { "yes" } else { "no" }
                )
            }
        }
    }
}

fn check_strength_range(name: &str, a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
        return Err(Error::config(
            MODULE,
            format!("{name} potential needs a > 0 and b > 0, got a = {a}, b = {b}"),
        ));
    }
    Ok(())
}

impl Potential {
    pub fn gaussian(a: f64, b: f64) -> Result<Self> {
        check_strength_range("Gaussian", a, b)?;
        Ok(Potential::Gaussian { a, b })
    }

    /// `b = 0` (bare Coulomb) is rejected: the kernel diagonal diverges.
    pub fn yukawa(a: f64, b: f64) -> Result<Self> {
        check_strength_range("Yukawa", a, b)?;
        Ok(Potential::Yukawa { a, b })
    }

    pub fn custom<F>(v_ft: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Potential::Custom {
            v_ft: Arc::new(v_ft),
            v_r: None,
        }
    }

    pub fn custom_with_radial<F, G>(v_ft: F, v_r: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Potential::Custom {
            v_ft: Arc::new(v_ft),
            v_r: Some(Arc::new(v_r)),
        }
    }

    /// Fourier transform `V_FT(k)`.
    pub fn fourier(&self, k: f64) -> f64 {
        match self {
            Potential::Gaussian { a, b } => vft_gaussian(k, *a, *b),
            Potential::Yukawa { a, b } => vft_yukawa(k, *a, *b),
            Potential::Custom { v_ft, .. } => v_ft(k),
        }
    }

    /// `V(r)` in configuration space.
    pub fn radial_value(&self, r: f64) -> Result<f64> {
        match self {
            Potential::Gaussian { a, b } => Ok(-a * (-(b * r).powi(2)).exp()),
            Potential::Yukawa { a, b } => Ok(-a * (-b * r).exp() / r),
            Potential::Custom { v_r: Some(v), .. } => Ok(v(r)),
            Potential::Custom { v_r: None, .. } => Err(Error::unsupported(
                MODULE,
                "radial observable requested but the custom potential has no V(r)",
            )),
        }
    }

    pub fn has_radial_form(&self) -> bool {
        !matches!(self, Potential::Custom { v_r: None, .. })
    }

    pub fn kernel(&self, l: usize) -> PartialWaveKernel {
        PartialWaveKernel {
            l,
            potential: self.clone(),
        }
    }
}

/// `V_l(p, p')` for one partial wave.
#[derive(Debug, Clone)]
pub struct PartialWaveKernel {
    l: usize,
    potential: Potential,
}

impl PartialWaveKernel {
    pub fn l(&self) -> usize {
        self.l
    }

    /// Evaluate at `p, p' > 0`. Arguments are put in canonical order first,
    /// so `evaluate(p, q) == evaluate(q, p)` bit for bit.
    pub fn evaluate(&self, p: f64, q: f64) -> Result<f64> {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        match &self.potential {
            Potential::Gaussian { a, b } => Ok(partial_wave_gaussian(self.l, p, q, *a, *b)),
            Potential::Yukawa { a, b } => partial_wave_yukawa(self.l, p, q, *a, *b),
            Potential::Custom { v_ft, .. } => partial_wave_numeric(self.l, p, q, |k| v_ft(k)),
        }
    }
}

/// `-a / (8 π^{3/2} b³) exp(-k² / 4b²)`.
pub fn vft_gaussian(k: f64, a: f64, b: f64) -> f64 {
    -a / (8.0 * PI.powf(1.5) * b.powi(3)) * (-k * k / (4.0 * b * b)).exp()
}

/// `-(1 / 2π²) a / (b² + k²)`.
pub fn vft_yukawa(k: f64, a: f64, b: f64) -> f64 {
    -a / (2.0 * PI * PI * (b * b + k * k))
}

/// Below this value of `p p' / 2b²` the Gaussian kernel is summed as a
/// positive power series; above it the exponential-integral form is used.
const GAUSS_SERIES_LIMIT: f64 = 30.0;

/// `½ ∫_{-1}^{1} P_l(t) e^{z t} dt` (the modified spherical Bessel function
/// `i_l(z)`) by its power series. All terms are positive.
fn legendre_exp_moment_series(l: usize, z: f64) -> f64 {
    // i_l(z) = z^l/(2l+1)!! Σ_k (z²/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    let mut lead = 1.0;
    for k in 1..=l {
        lead *= z / (2.0 * k as f64 + 1.0);
    }
    let y = 0.5 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= y / (k as f64 * (2.0 * (l + k) as f64 + 1.0));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    lead * sum
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Analytic Gaussian kernel.
///
/// In terms of `z = p p' / 2b²`,
/// `V_l = a / (2^{l+2} √π b³) e^{-(p²+p'²)/4b²} Σ_{k=0}^{[l/2]} (-1)^k C(l,k) C(2l-2k,l)
///        [E_{2k-l}(-z) + (-1)^{l-2k} E_{2k-l}(z)]`.
///
/// The leading sign is positive. With the closed-form continuation of
/// `E_{-n}` at negative argument, `∫_{-1}^{1} t^n e^{zt} dt = -[E_{-n}(-z) +
/// (-1)^n E_{-n}(z)]`, so a negative prefactor would give a repulsive
/// kernel; direct quadrature of the projection integral fixes the sign.
///
/// The exponentials are folded into `e^{-(p∓p')²/4b²}` to avoid overflow,
/// and for small `z`, where the bracket cancels catastrophically, the same
/// quantity is summed as the series of `i_l(z)`.
pub fn partial_wave_gaussian(l: usize, p: f64, q: f64, a: f64, b: f64) -> f64 {
    let b2 = b * b;
    let z = p * q / (2.0 * b2);
    if z < GAUSS_SERIES_LIMIT {
        // 2π · V_FT prefactor · 2 i_l(z)
        let gauss = (-(p * p + q * q) / (4.0 * b2)).exp();
        return -a / (2.0 * PI.sqrt() * b2 * b) * gauss * legendre_exp_moment_series(l, z);
    }
    let mut near = 0.0; // multiplies e^{-(p-q)²/4b²}, from E(-z)
    let mut far = 0.0; // multiplies e^{-(p+q)²/4b²}, from E(+z)
    for k in 0..=l / 2 {
        let coef = binomial(l, k) * binomial(2 * l - 2 * k, l);
        let coef = if k % 2 == 0 { coef } else { -coef };
        let order = (l - 2 * k) as u32;
        // e^{-z}... ⇒ E_{-n}(-z) = e^{z} S_n(-z), E_{-n}(z) = e^{-z} S_n(z)
        near += coef * specfun::exp_integral_nonpos_scaled(order, -z);
        let parity = if (l - 2 * k).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        far += coef * parity * specfun::exp_integral_nonpos_scaled(order, z);
    }
    let pref = a / (2f64.powi(l as i32 + 2) * PI.sqrt() * b2 * b);
    let near_exp = (-(p - q).powi(2) / (4.0 * b2)).exp();
    let far_exp = (-(p + q).powi(2) / (4.0 * b2)).exp();
    pref * (near_exp * near + far_exp * far)
}

/// Analytic Yukawa kernel `-(a / π p p') Q_l((b² + p² + p'²) / 2pp')`.
pub fn partial_wave_yukawa(l: usize, p: f64, q: f64, a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::domain(
            MODULE,
            "Yukawa kernel needs b > 0 (b = 0 puts Q_l on its singularity at p = p')",
        ));
    }
    let pq2 = 2.0 * p * q;
    let x = (b * b + p * p + q * q) / pq2;
    let x_minus_1 = (b * b + (p - q).powi(2)) / pq2;
    let ql = specfun::legendre_q_with_gap(l, x, x_minus_1)?;
    Ok(-a / (PI * p * q) * ql)
}

/// Projection integral evaluated by Gauss-Legendre quadrature in `t`,
/// doubling the order from 32 until two successive estimates agree to
/// 1e-12 relative (or 1e-15 absolute). Gives up after 1024 points.
pub fn partial_wave_numeric<F>(l: usize, p: f64, q: f64, v_ft: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    // returns the estimate and the magnitude scale 2π Σ w |P_l V_FT|
    let estimate = |level: usize| -> (f64, f64) {
        let (nodes, weights) = specfun::gauss_legendre_cached(level);
        let mut sum = 0.0;
        let mut scale = 0.0;
        for (&t, &w) in nodes.iter().zip(weights) {
            let k = (p * p + q * q - 2.0 * p * q * t).max(0.0).sqrt();
            let term = w * specfun::legendre_p(l, t) * v_ft(k);
            sum += term;
            scale += term.abs();
        }
        (2.0 * PI * sum, 2.0 * PI * scale)
    };
    let (mut previous, _) = estimate(0);
    for level in 1..6 {
        let (current, scale) = estimate(level);
        if !current.is_finite() {
            break;
        }
        // the absolute floor is taken relative to the integrand magnitude so
        // that vanishing projections converge despite roundoff
        let diff = (current - previous).abs();
        if diff <= 1e-12 * current.abs() || diff <= 1e-15 * scale.max(1.0) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::numerical(
        MODULE,
        format!("partial_wave_numeric(l={l}, p={p}, p'={q})"),
        "angular quadrature did not converge with 1024 points",
    ))
}

/// `V(r)` of a [`Potential`]; see [`Potential::radial_value`].
pub fn radial_value(spec: &Potential, r: f64) -> Result<f64> {
    spec.radial_value(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent check of the Gaussian kernel at l = 0:
    /// -(a/(√π b p p')) e^{-(p²+p'²)/4b²} sinh(p p'/2b²).
    fn gaussian_s_wave(p: f64, q: f64, a: f64, b: f64) -> f64 {
        -(a / (PI.sqrt() * b * p * q))
            * (-(p * p + q * q) / (4.0 * b * b)).exp()
            * (p * q / (2.0 * b * b)).sinh()
    }

    #[test]
    fn fourier_transforms() {
        assert_relative_eq!(vft_gaussian(0.0, 1.0, 1.0), -0.02244839, epsilon = 1e-8);
        assert_relative_eq!(
            vft_gaussian(2.0, 1.0, 1.0),
            -0.02244839 * (-1f64).exp(),
            epsilon = 1e-8
        );
        assert!(vft_gaussian(50.0, 1.0, 1.0).abs() < 1e-200);
        assert_relative_eq!(vft_yukawa(0.0, 1.0, 1.0), -0.05066059, epsilon = 1e-8);
        assert_relative_eq!(vft_yukawa(1.0, 1.0, 1.0), -0.02533030, epsilon = 1e-8);
        let big = vft_yukawa(1e4, 1.0, 1.0) * 1e8;
        assert_relative_eq!(big, -1.0 / (2.0 * PI * PI), max_relative = 1e-7);
    }

    #[test]
    fn gaussian_kernel_examples() {
        let v = partial_wave_gaussian(0, 1.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(v, -0.1783179174, epsilon = 1e-10);
        assert_relative_eq!(v, gaussian_s_wave(1.0, 1.0, 1.0, 1.0), max_relative = 1e-14);
        // p → 0⁺: sinh(y)/y → 1
        let tiny = partial_wave_gaussian(0, 1e-12, 1.0, 1.0, 1.0);
        assert!(tiny.is_finite());
        assert_relative_eq!(
            tiny,
            -(-0.25f64).exp() / (2.0 * PI.sqrt()),
            max_relative = 1e-10
        );
        let numeric = partial_wave_numeric(1, 1.0, 1.0, |k| vft_gaussian(k, 1.0, 1.0)).unwrap();
        assert_relative_eq!(
            partial_wave_gaussian(1, 1.0, 1.0, 1.0, 1.0),
            numeric,
            max_relative = 1e-10
        );
    }

    #[test]
    fn gaussian_branches_agree_at_switch() {
        // both evaluation routes around z = GAUSS_SERIES_LIMIT
        for l in 0..=4 {
            let b: f64 = 1.0;
            let p = (2.0 * GAUSS_SERIES_LIMIT).sqrt();
            let below = partial_wave_gaussian(l, p * 0.999_999, p, 1.0, b);
            let above = partial_wave_gaussian(l, p * 1.000_001, p, 1.0, b);
            assert_relative_eq!(below, above, max_relative = 1e-5);
            let s_wave = gaussian_s_wave(p * 1.000_001, p, 1.0, b);
            if l == 0 {
                assert_relative_eq!(above, s_wave, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn gaussian_kernel_far_off_diagonal_does_not_overflow() {
        let v = partial_wave_gaussian(1, 90.0, 80.0, 15.0, 1.0);
        assert!(v.is_finite());
        assert!(v < 0.0);
        let w = partial_wave_gaussian(1, 90.0, 1.0, 15.0, 1.0);
        assert!(w.is_finite());
    }

    #[test]
    fn yukawa_kernel_examples() {
        let v0 = partial_wave_yukawa(0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v0, -5f64.ln() / (2.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(v0, -0.2561499994, epsilon = 1e-10);
        let v1 = partial_wave_yukawa(1, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            v1,
            -(1.5 * 0.5 * 5f64.ln() - 1.0) / PI,
            max_relative = 1e-13
        );
        assert_relative_eq!(v1, -0.0659151129, epsilon = 1e-10);
        assert!(partial_wave_yukawa(0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(Potential::yukawa(1.0, 0.0).is_err());
    }

    #[test]
    fn numeric_kernel_examples() {
        let g = partial_wave_numeric(0, 1.0, 1.0, |k| vft_gaussian(k, 1.0, 1.0)).unwrap();
        assert_relative_eq!(g, -0.1783179174, epsilon = 1e-10);
        assert_relative_eq!(g, gaussian_s_wave(1.0, 1.0, 1.0, 1.0), epsilon = 1e-10);
        let y = partial_wave_numeric(0, 1.0, 1.0, |k| vft_yukawa(k, 1.0, 1.0)).unwrap();
        assert_relative_eq!(y, -5f64.ln() / (2.0 * PI), epsilon = 1e-10);
        for l in 1..4 {
            let c = partial_wave_numeric(l, 0.7, 1.3, |_| 2.5).unwrap();
            assert!(c.abs() < 1e-14, "l={l} c={c}");
        }
    }

    #[test]
    fn numeric_kernel_reports_non_convergence() {
        let err = partial_wave_numeric(0, 1.0, 1.0, |k| (1e4 * k).sin() * 1e3).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
    }

    #[test]
    fn analytic_and_numeric_kernels_agree_on_grid() {
        let grid = [0.2, 0.5, 1.0, 2.0, 5.0];
        for l in 0..=2 {
            for &p in &grid {
                for &q in &grid {
                    let ga = partial_wave_gaussian(l, p, q, 1.0, 1.0);
                    let gn = partial_wave_numeric(l, p, q, |k| vft_gaussian(k, 1.0, 1.0)).unwrap();
                    assert_relative_eq!(ga, gn, max_relative = 1e-9);
                    let ya = partial_wave_yukawa(l, p, q, 1.0, 1.0).unwrap();
                    let yn = partial_wave_numeric(l, p, q, |k| vft_yukawa(k, 1.0, 1.0)).unwrap();
                    assert_relative_eq!(ya, yn, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn s_wave_kernels_are_attractive() {
        let grid = [0.01, 0.2, 1.0, 7.0, 40.0];
        for &p in &grid {
            for &q in &grid {
                assert!(partial_wave_gaussian(0, p, q, 1.0, 1.0) < 0.0 || (p - q).abs() > 20.0);
                assert!(partial_wave_yukawa(0, p, q, 1.0, 1.0).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn kernel_symmetry_is_exact() {
        let pots = [
            Potential::gaussian(3.0, 1.0).unwrap(),
            Potential::yukawa(10.0, 1.0).unwrap(),
            Potential::custom(|k| -1.0 / (1.0 + k * k).powi(2)),
        ];
        for pot in &pots {
            for l in 0..3 {
                let kern = pot.kernel(l);
                for &(p, q) in &[(0.1, 3.0), (0.37, 0.91), (2.5, 11.0)] {
                    assert_eq!(kern.evaluate(p, q).unwrap(), kern.evaluate(q, p).unwrap());
                }
            }
        }
    }

    #[test]
    fn radial_values() {
        let g = Potential::gaussian(15.0, 1.0).unwrap();
        assert_relative_eq!(g.radial_value(1e-12).unwrap(), -15.0, epsilon = 1e-12);
        let y = Potential::yukawa(10.0, 1.0).unwrap();
        assert_relative_eq!(
            y.radial_value(1.0).unwrap(),
            -10.0 / std::f64::consts::E,
            epsilon = 1e-12
        );
        let g3 = Potential::gaussian(3.0, 1.0).unwrap();
        assert_relative_eq!(radial_value(&g3, 1.0).unwrap(), -1.1036383, epsilon = 1e-7);
        let c = Potential::custom(|k| -1.0 / (1.0 + k * k));
        assert!(matches!(
            c.radial_value(1.0),
            Err(Error::Unsupported { .. })
        ));
    }
}
