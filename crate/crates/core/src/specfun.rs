//! Special functions used by the mesh and by the analytic partial-wave kernels.
//!
//! Everything here is a pure function of real scalars. The Laguerre routines
//! are written so that meshes up to [`MAX_MESH`] points never overflow: the
//! polynomial recurrence is carried with a running log-scale, and weights
//! switch to the logarithm domain once the direct formula would overflow.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const MODULE: &str = "specfun";

/// Largest supported Laguerre mesh.
pub const MAX_MESH: usize = 512;

/// Largest order accepted by [`legendre_q`].
pub const MAX_Q_ORDER: usize = 8;

const STALL_TOLERANCE: f64 = 1e-11;
const NEWTON_MAX_ITER: usize = 100;
const RESCALE_AT: f64 = 1e150;

/// Compensated (Neumaier) summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Accumulate `a b` including the rounding error of the product.
    pub(crate) fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.carry += a.mul_add(b, -p);
        self.add(p);
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Dot product accurate to about one rounding of the result (compensated
/// products and sums).
pub fn dot_compensated(a: &[f64], b: &[f64]) -> f64 {
    let mut s = CompensatedSum::default();
    for (x, y) in a.iter().zip(b) {
        s.add_product(*x, *y);
    }
    s.value()
}

/// Laguerre polynomial `L_n(x)` by the three-term upward recurrence.
pub fn laguerre_value(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 - x) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `L_n(x)` and `L_{n-1}(x)` sharing the common factor `exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledLaguerre {
    pub ln: f64,
    pub ln_minus_1: f64,
    pub log_scale: f64,
}

pub(crate) fn laguerre_scaled(n: usize, x: f64) -> ScaledLaguerre {
    if n == 0 {
        return ScaledLaguerre {
            ln: 1.0,
            ln_minus_1: 0.0,
            log_scale: 0.0,
        };
    }
    let mut p0 = 1.0;
    let mut p1 = 1.0 - x;
    let mut log_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 - x) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
        if p1.abs() > RESCALE_AT {
            p0 /= RESCALE_AT;
            p1 /= RESCALE_AT;
            log_scale += RESCALE_AT.ln();
        }
    }
    ScaledLaguerre {
        ln: p1,
        ln_minus_1: p0,
        log_scale,
    }
}

/// Newton step `L_n(x) / L_n'(x)`, using `x L_n' = n (L_n - L_{n-1})`.
fn laguerre_newton_step(n: usize, x: f64) -> f64 {
    let s = laguerre_scaled(n, x);
    x * s.ln / (n as f64 * (s.ln - s.ln_minus_1))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn new(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let lo = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo }
    }

    fn renormalize(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        Self::renormalize(s.hi, s.lo + self.lo + o.lo)
    }

    fn sub(self, o: Self) -> Self {
        self.add(Self {
            hi: -o.hi,
            lo: -o.lo,
        })
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Self::renormalize(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        Self::renormalize(p, e + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Self {
        let q = self.hi / b;
        // remainder self - q b, exactly representable up to the lo term
        let r = self.sub(Self::new(q).mul_f64(b));
        Self::renormalize(q, r.hi / b)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// `L_n(x)` and `L_{n-1}(x)` with the recurrence carried in double-double,
/// both divided by `exp(log_scale)`.
fn laguerre_extended(n: usize, x: f64) -> (DoubleDouble, DoubleDouble, f64) {
    let xd = DoubleDouble::new(x);
    let mut p0 = DoubleDouble::new(1.0);
    let mut p1 = DoubleDouble::two_sum(1.0, -x);
    let mut log_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let a = DoubleDouble::new(2.0 * kf + 1.0).sub(xd);
        let p2 = a.mul(p1).sub(p0.mul_f64(kf)).div_f64(kf + 1.0);
        p0 = p1;
        p1 = p2;
        if p1.hi.abs() > RESCALE_AT {
            p0 = p0.div_f64(RESCALE_AT);
            p1 = p1.div_f64(RESCALE_AT);
            log_scale += RESCALE_AT.ln();
        }
    }
    (p1, p0, log_scale)
}

/// Newton step with the extended recurrence, accurate where the plain one
/// has already lost the root to cancellation (small zeros of high-degree
/// polynomials).
fn laguerre_newton_step_extended(n: usize, x: f64) -> f64 {
    let (ln, lm, _) = laguerre_extended(n, x);
    let ln = ln.value();
    x * ln / (n as f64 * (ln - lm.value()))
}

/// Zeros of `L_n`, strictly increasing.
///
/// Newton iteration on the recurrence, seeded with the usual asymptotic
/// guesses (each root extrapolated from the two preceding ones) and polished
/// to machine precision.
pub fn laguerre_zeros(n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_MESH {
        return Err(Error::domain(
            MODULE,
            format!("Laguerre mesh size must be in 1..={MAX_MESH}, got {n}"),
        ));
    }
    let nf = n as f64;
    let mut zeros: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let guess = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => zeros[0] + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                let prev = zeros[i - 1];
                prev + (1.0 + 2.55 * ai) / (1.9 * ai) * (prev - zeros[i - 2])
            }
        };
        let root = polish_laguerre_root(n, guess, i)?;
        if let Some(&prev) = zeros.last() {
            if root <= prev {
                return Err(Error::numerical(
                    MODULE,
                    format!("laguerre_zeros(n={n}), root #{}", i + 1),
                    format!("Newton iteration fell back onto an earlier root ({root} <= {prev})"),
                ));
            }
        }
        zeros.push(root);
    }
    Ok(zeros)
}

fn polish_laguerre_root(n: usize, guess: f64, index: usize) -> Result<f64> {
    let mut x = guess;
    let mut last_step = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let dx = laguerre_newton_step(n, x);
        if !dx.is_finite() {
            break;
        }
        // near small roots of large-n polynomials the recurrence noise sets a
        // floor well above one ulp; stop once the steps no longer shrink
        if dx.abs() <= STALL_TOLERANCE * x.abs() && dx.abs() >= 0.5 * last_step {
            return Ok(settle_root(n, x));
        }
        x -= dx;
        last_step = dx.abs();
        if dx.abs() <= 4.0 * f64::EPSILON * x.abs() {
            return Ok(settle_root(n, x));
        }
    }
    Err(Error::numerical(
        MODULE,
        format!("laguerre_zeros(n={n}), root #{}", index + 1),
        "Newton iteration did not converge",
    ))
}

/// Final Newton steps in extended precision.
fn settle_root(n: usize, mut x: f64) -> f64 {
    for _ in 0..3 {
        let dx = laguerre_newton_step_extended(n, x);
        if !dx.is_finite() {
            break;
        }
        x -= dx;
        if dx.abs() <= f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}

/// `ln(n!)` by compensated summation of `ln k`.
pub fn ln_factorial(n: usize) -> f64 {
    let mut s = CompensatedSum::default();
    for k in 2..=n {
        s.add((k as f64).ln());
    }
    s.value()
}

/// `ln Γ(x)` for `x > 0`. Exact log-sum for small positive integers,
/// Lanczos (g = 7) elsewhere.
pub fn ln_gamma(x: f64) -> f64 {
    if (1.0..=1024.0).contains(&x) && x.fract() == 0.0 {
        return ln_factorial(x as usize - 1);
    }
    if x < 0.5 {
        // reflection
        let s = (std::f64::consts::PI * x).sin().abs();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Weights `λ_i` of the quadrature `∫_0^∞ g(x) dx ≈ Σ λ_i g(x_i)`:
/// `λ_i = x_i e^{x_i} / ((N+1) L_{N+1}(x_i))²`, with `L_{N+1}` from the
/// extended recurrence. Where the direct product would overflow the same
/// expression is evaluated in the log domain.
pub fn laguerre_weights(zeros: &[f64]) -> Result<Vec<f64>> {
    let n = zeros.len();
    if n == 0 {
        return Err(Error::domain(MODULE, "empty zero set"));
    }
    let np1 = (n + 1) as f64;
    zeros
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let (l_next, _, log_scale) = laguerre_extended(n + 1, xi);
            let d = np1 * l_next.value();
            let w = if log_scale == 0.0 && xi < 600.0 {
                xi * xi.exp() / (d * d)
            } else {
                let mut s = CompensatedSum::default();
                s.add(xi);
                s.add(xi.ln());
                s.add(-2.0 * d.abs().ln());
                s.add(-2.0 * log_scale);
                s.value().exp()
            };
            if w.is_finite() && w > 0.0 {
                Ok(w)
            } else {
                Err(Error::numerical(
                    MODULE,
                    format!("laguerre_weights(n={n}), node #{}", i + 1),
                    format!("weight is not finite and positive ({w})"),
                ))
            }
        })
        .collect()
}

/// `e^{z} E_{-n}(z) = n! z^{-(n+1)} Σ_{k=0}^{n} z^k / k!`, valid for any
/// nonzero real `z`.
pub fn exp_integral_nonpos_scaled(n: u32, z: f64) -> f64 {
    // Σ_{j=0}^{n} n!/(n-j)! z^{-(j+1)}
    let mut term = 1.0 / z;
    let mut sum = term;
    for j in 0..n {
        term *= f64::from(n - j) / z;
        sum += term;
    }
    sum
}

/// Exponential integral `E_m(z)` for integer order `m <= 0`, through the
/// closed form of its analytic continuation. Defined for negative `z` too.
pub fn exp_integral_nonpos(m: i32, z: f64) -> Result<f64> {
    if m > 0 {
        return Err(Error::domain(
            MODULE,
            format!("exp_integral_nonpos needs order m <= 0, got {m}"),
        ));
    }
    if z == 0.0 {
        return Err(Error::domain(MODULE, "E_m(z) has a pole at z = 0"));
    }
    Ok((-z).exp() * exp_integral_nonpos_scaled(m.unsigned_abs(), z))
}

/// Legendre polynomial `P_l(t)`; the recurrence is valid for any real `t`.
pub fn legendre_p(l: usize, t: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 1..l {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Closed form `Q_l(x) = P_l(x) Q_0(x) - W_{l-1}(x)` with
/// `W_{l-1} = Σ_{k=1}^{l} P_{k-1} P_{l-k} / k`. Accurate close to `x = 1`,
/// cancels badly as `x` grows.
pub fn legendre_q_closed_form(l: usize, x: f64, x_minus_1: f64) -> f64 {
    let q0 = 0.5 * (2.0 / x_minus_1).ln_1p();
    let w: f64 = (1..=l)
        .map(|k| legendre_p(k - 1, x) * legendre_p(l - k, x) / k as f64)
        .sum();
    legendre_p(l, x) * q0 - w
}

/// Backward (Miller) recurrence for `Q_l`, normalized on `Q_0`.
fn legendre_q_backward(l: usize, x: f64, x_minus_1: f64) -> f64 {
    let q0 = 0.5 * (2.0 / x_minus_1).ln_1p();
    if l == 0 {
        return q0;
    }
    // Q_{k+1}/Q_k -> ρ = x - sqrt(x²-1); start far enough that ρ^{2m} < 1e-18.
    let root = (x_minus_1 * (x + 1.0)).sqrt();
    let neg_ln_rho = (x + root).ln();
    let extra = (21.0 / neg_ln_rho).ceil() as usize + 10;
    let top = l + extra;
    let mut q_up = 0.0; // Q_{k+1}
    let mut q_k = 1e-30; // Q_k, arbitrary normalization
    let mut q_l = 0.0;
    for k in (1..=top).rev() {
        let kf = k as f64;
        let q_down = ((2.0 * kf + 1.0) * x * q_k - (kf + 1.0) * q_up) / kf;
        q_up = q_k;
        q_k = q_down;
        if k - 1 == l {
            q_l = q_k;
        }
        if q_k.abs() > RESCALE_AT {
            q_k /= RESCALE_AT;
            q_up /= RESCALE_AT;
            q_l /= RESCALE_AT;
        }
    }
    q_l * q0 / q_k
}

/// Legendre function of the second kind `Q_l(x)` for `x > 1`, `l <= 8`.
pub fn legendre_q(l: usize, x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::domain(
            MODULE,
            format!("Q_l(x) requires x > 1, got {x}"),
        ));
    }
    legendre_q_with_gap(l, x, x - 1.0)
}

/// As [`legendre_q`], with `x - 1` supplied by the caller so that arguments
/// very close to 1 keep full relative precision.
pub fn legendre_q_with_gap(l: usize, x: f64, x_minus_1: f64) -> Result<f64> {
    if l > MAX_Q_ORDER {
        return Err(Error::domain(
            MODULE,
            format!("Q_l is implemented for l <= {MAX_Q_ORDER}, got {l}"),
        ));
    }
    if !(x_minus_1 > 0.0) {
        return Err(Error::domain(
            MODULE,
            format!("Q_l(x) requires x > 1, got x - 1 = {x_minus_1}"),
        ));
    }
    if x_minus_1 <= 1e-3 {
        Ok(legendre_q_closed_form(l, x, x_minus_1))
    } else {
        Ok(legendre_q_backward(l, x, x_minus_1))
    }
}

/// Spherical Bessel function of the first kind `j_l(x)`, `x >= 0`.
///
/// Upward recurrence from `j_0`, `j_1` when `x > l`; otherwise normalized
/// downward (Miller) recurrence, with the leading power-series term for tiny
/// arguments.
pub fn spherical_bessel_j(l: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let j1 = s / (x * x) - c / x;
    if l == 1 {
        return j1;
    }
    if x > l as f64 {
        let mut a = j0;
        let mut b = j1;
        for k in 1..l {
            let next = (2.0 * k as f64 + 1.0) / x * b - a;
            a = b;
            b = next;
        }
        return b;
    }
    if x < 1e-3 {
        // x^l/(2l+1)!! (1 - x²/(2(2l+3)))
        let mut v = 1.0;
        for k in 1..=l {
            v *= x / (2.0 * k as f64 + 1.0);
        }
        return v * (1.0 - x * x / (2.0 * (2.0 * l as f64 + 3.0)));
    }
    let top = l + (40.0 * l as f64).sqrt() as usize + 20;
    let mut up = 0.0;
    let mut cur = 1e-300;
    let mut at_l = 0.0;
    let mut at_1 = 0.0;
    for k in (1..=top).rev() {
        let down = (2.0 * k as f64 + 1.0) / x * cur - up;
        up = cur;
        cur = down;
        if k - 1 == l {
            at_l = cur;
        }
        if k - 1 == 1 {
            at_1 = cur;
        }
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            up /= RESCALE_AT;
            at_l /= RESCALE_AT;
            at_1 /= RESCALE_AT;
        }
    }
    // cur now holds the unnormalized j_0; normalize with the larger of j_0, j_1
    if j0.abs() >= j1.abs() {
        at_l * j0 / cur
    } else {
        at_l * j1 / at_1
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..NEWTON_MAX_ITER {
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * z * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let (pn, pnm1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
            dp = nf * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule with `32 · 2^k` points (`k = 0..=5`), computed once.
pub(crate) fn gauss_legendre_cached(level: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: [OnceLock<(Vec<f64>, Vec<f64>)>; 6] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    RULES[level].get_or_init(|| gauss_legendre(32 << level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre_value(0, 5.0), 1.0);
        assert_eq!(laguerre_value(1, 2.0), -1.0);
        // 1 - 2x + x²/2 at x = 2
        assert_relative_eq!(laguerre_value(2, 2.0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn scaled_laguerre_matches_plain() {
        for &x in &[0.3, 4.0, 25.0, 80.0] {
            let s = laguerre_scaled(30, x);
            let v = s.ln * s.log_scale.exp();
            assert_relative_eq!(v, laguerre_value(30, x), max_relative = 1e-12);
        }
    }

    #[test]
    fn small_zero_sets() {
        assert_eq!(laguerre_zeros(1).unwrap(), vec![1.0]);
        let z2 = laguerre_zeros(2).unwrap();
        assert_relative_eq!(z2[0], 2.0 - 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(z2[1], 2.0 + 2f64.sqrt(), epsilon = 1e-14);
        let z3 = laguerre_zeros(3).unwrap();
        for (got, want) in z3.iter().zip([0.4157745568, 2.2942803603, 6.2899450829]) {
            assert_relative_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn zeros_are_positive_and_strictly_increasing() {
        for n in [2usize, 7, 40, 128, 200] {
            let z = laguerre_zeros(n).unwrap();
            assert!(z[0] > 0.0);
            assert!(z.windows(2).all(|w| w[0] < w[1]), "n={n}");
            // all zeros lie below 4n + 2
            assert!(*z.last().unwrap() < 4.0 * n as f64 + 2.0);
        }
    }

    #[test]
    fn zeros_match_jacobi_matrix_eigenvalues() {
        // Golub-Welsch: diagonal 2k+1, off-diagonal k
        for n in [3usize, 8, 16, 30] {
            let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    (2 * i + 1) as f64
                } else if i.abs_diff(j) == 1 {
                    i.max(j) as f64
                } else {
                    0.0
                }
            });
            let mut eig: Vec<f64> = jacobi
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            eig.sort_by(f64::total_cmp);
            for (got, want) in laguerre_zeros(n).unwrap().iter().zip(&eig) {
                assert_relative_eq!(*got, *want, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn weights_integrate_moments_exactly() {
        // ∫ x^m e^{-x} dx = m! for m < 2n
        for n in [1usize, 5, 20, 50, 200] {
            let z = laguerre_zeros(n).unwrap();
            let w = laguerre_weights(&z).unwrap();
            for m in 0..(2 * n).min(12) {
                let got: f64 = z
                    .iter()
                    .zip(&w)
                    .map(|(x, lam)| lam * (-x).exp() * x.powi(m as i32))
                    .sum();
                let want: f64 = (1..=m).map(|k| k as f64).product();
                assert_relative_eq!(got, want, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn zero_set_rejects_bad_sizes() {
        assert!(laguerre_zeros(0).is_err());
        assert!(laguerre_zeros(MAX_MESH + 1).is_err());
    }

    #[test]
    fn small_weight_sets() {
        let w1 = laguerre_weights(&laguerre_zeros(1).unwrap()).unwrap();
        assert_relative_eq!(w1[0], std::f64::consts::E, epsilon = 1e-14);
        let z2 = laguerre_zeros(2).unwrap();
        let w2 = laguerre_weights(&z2).unwrap();
        // classical weights (2 ± √2)/4 times e^{x}
        let s2 = 2f64.sqrt();
        assert_relative_eq!(w2[0], (2.0 + s2) / 4.0 * z2[0].exp(), max_relative = 1e-14);
        assert_relative_eq!(w2[1], (2.0 - s2) / 4.0 * z2[1].exp(), max_relative = 1e-14);
        assert_relative_eq!(w2[0], 1.533326, epsilon = 1e-6);
        assert_relative_eq!(w2[1], 4.450957, epsilon = 1e-6);
    }

    #[test]
    fn ln_gamma_against_factorials() {
        assert_relative_eq!(ln_gamma(5.0), 24f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            epsilon = 1e-14
        );
        assert_relative_eq!(ln_gamma(10.5), ln_gamma(9.5) + 9.5f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(ln_gamma(0.25), 1.2880225246980774, epsilon = 1e-13);
    }

    #[test]
    fn exp_integral_values() {
        assert_relative_eq!(
            exp_integral_nonpos(0, 1.0).unwrap(),
            0.3678794412,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            exp_integral_nonpos(-1, 1.0).unwrap(),
            0.7357588824,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            exp_integral_nonpos(0, -0.5).unwrap(),
            -3.2974425414,
            epsilon = 1e-10
        );
        assert!(exp_integral_nonpos(0, 0.0).is_err());
        assert!(exp_integral_nonpos(1, 1.0).is_err());
    }

    #[test]
    fn exp_integral_zero_order_identity() {
        for k in -100..=100 {
            if k == 0 {
                continue;
            }
            let z = k as f64 * 0.1;
            let v = exp_integral_nonpos(0, z).unwrap() * z * z.exp();
            assert_relative_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn exp_integral_matches_integral_definition() {
        // E_{-n}(z) = ∫_1^∞ t^n e^{-zt} dt for z > 0; check n = 2 at z = 3 by
        // the antiderivative e^{-z}(1/z + 2/z² + 2/z³).
        let z: f64 = 3.0;
        let want = (-z).exp() * (1.0 / z + 2.0 / (z * z) + 2.0 / (z * z * z));
        assert_relative_eq!(
            exp_integral_nonpos(-2, z).unwrap(),
            want,
            max_relative = 1e-15
        );
    }

    #[test]
    fn legendre_p_values() {
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert_eq!(legendre_p(1, 0.3), 0.3);
        assert_relative_eq!(legendre_p(2, 0.5), -0.125, epsilon = 1e-16);
        assert_relative_eq!(
            legendre_p(3, 0.2),
            0.5 * (5.0 * 0.008 - 3.0 * 0.2),
            epsilon = 1e-16
        );
    }

    #[test]
    fn legendre_q_values() {
        assert_relative_eq!(legendre_q(0, 2.0).unwrap(), 0.5493061443, epsilon = 1e-10);
        assert_relative_eq!(legendre_q(1, 2.0).unwrap(), 0.0986122887, epsilon = 1e-10);
        // 5.5 · ½ ln 3 - 3
        assert_relative_eq!(
            legendre_q(2, 2.0).unwrap(),
            0.0211837938373,
            epsilon = 1e-12
        );
        assert!(legendre_q(0, 1.0).is_err());
        assert!(legendre_q(0, 0.5).is_err());
        assert!(legendre_q(9, 2.0).is_err());
    }

    #[test]
    fn legendre_q_closed_form_and_recurrence_agree() {
        for l in 0..=3 {
            for &x in &[1.0005, 1.002, 1.1, 1.5, 2.0, 3.0] {
                let a = legendre_q_closed_form(l, x, x - 1.0);
                let b = legendre_q_backward(l, x, x - 1.0);
                assert_relative_eq!(a, b, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn legendre_q_large_argument_asymptotics() {
        // Q_l(x) ~ l!/((2l+1)!! x^{l+1}) for large x
        let x: f64 = 1e5;
        for (l, dfact) in [(1usize, 3.0), (2, 15.0), (3, 105.0)] {
            let lf: f64 = (1..=l).map(|k| k as f64).product();
            let want = lf / dfact / x.powi(l as i32 + 1);
            assert_relative_eq!(legendre_q(l, x).unwrap(), want, max_relative = 1e-8);
        }
    }

    #[test]
    fn spherical_bessel_values() {
        assert_eq!(spherical_bessel_j(0, 0.0), 1.0);
        assert!(spherical_bessel_j(0, std::f64::consts::PI).abs() < 1e-15);
        assert_relative_eq!(spherical_bessel_j(1, 1.0), 0.3011686789, epsilon = 1e-10);
        assert_eq!(spherical_bessel_j(3, 0.0), 0.0);
    }

    #[test]
    fn spherical_bessel_closed_forms() {
        for k in 1..400 {
            let x = k as f64 * 0.05;
            let (s, c) = x.sin_cos();
            let j0 = s / x;
            let j1 = s / (x * x) - c / x;
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            assert_relative_eq!(spherical_bessel_j(0, x), j0, epsilon = 1e-12);
            assert_relative_eq!(spherical_bessel_j(1, x), j1, epsilon = 1e-12);
            assert_relative_eq!(spherical_bessel_j(2, x), j2, epsilon = 1e-12);
        }
    }

    #[test]
    fn spherical_bessel_small_argument_high_order() {
        // j_5(x) ≈ x^5/10395 (1 - x²/26) for small x
        let x: f64 = 0.01;
        let want = x.powi(5) / 10395.0 * (1.0 - x * x / 26.0 + x.powi(4) / (8.0 * 13.0 * 15.0));
        assert_relative_eq!(spherical_bessel_j(5, x), want, max_relative = 1e-12);
        // downward-recurrence regime, checked against upward recurrence from
        // the closed forms at an argument where both are stable enough
        let x = 4.5;
        let mut a = spherical_bessel_j(0, x);
        let mut b = spherical_bessel_j(1, x);
        for k in 1..5 {
            let next = (2.0 * k as f64 + 1.0) / x * b - a;
            a = b;
            b = next;
        }
        assert_relative_eq!(spherical_bessel_j(5, x), b, max_relative = 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (t, w) = gauss_legendre(32);
        let s: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(10)).sum();
        assert_relative_eq!(s, 2.0 / 11.0, epsilon = 1e-15);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
    }
}
