//! Wavefunctions and mean values from momentum-space mesh coefficients.
//!
//! Momentum observables collapse to `Σ C_j² U(h x_j)` by the Lagrange
//! conditions. Radial observables go through the `r²` matrix: since
//! `r² = -∇²_p`, its mesh representation is
//! `P_ij = (t_ij + l(l+1) δ_ij / x_i²) / h²`, and `K(r)` is obtained by
//! applying `K(sqrt(·))` to the spectrum of `P`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::LaguerreMesh;
use crate::solver::{symmetric_eigen, BoundState, Problem};
use crate::specfun::spherical_bessel_j;

const MODULE: &str = "observables";

/// Eigenvalues of `P` in `[-CLAMP, 0)` are set to zero.
const CLAMP: f64 = 1e-9;

/// `P̄(p) = Σ C_j f_j(p/h) / (sqrt(h) p)`; at `p = 0` the analytic limit.
pub fn wavefunction_momentum(state: &BoundState, p: f64) -> f64 {
    let mesh = &state.mesh;
    let h = mesh.scale();
    if p == 0.0 {
        let s: f64 = state
            .coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| c * mesh.lagrange_slope_at_origin(j))
            .sum();
        return s / h.powf(1.5);
    }
    let x = p / h;
    let s: f64 = state
        .coefficients
        .iter()
        .enumerate()
        .map(|(j, c)| c * mesh.lagrange_function(j, x))
        .sum();
    s / (h.sqrt() * p)
}

/// `u(p) = p P̄(p)`.
pub fn reduced_wavefunction_momentum(state: &BoundState, p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    p * wavefunction_momentum(state, p)
}

/// Position-space radial function from the mesh Fourier-Bessel sum
/// `R̄(r) = (-1)^l sqrt(2/π) h^{3/2} Σ C_i sqrt(λ_i) x_i j_l(h x_i r)`.
/// No smoothing: beyond some radius this oscillates unphysically.
pub fn wavefunction_position(state: &BoundState, r: f64) -> f64 {
    let mesh = &state.mesh;
    let h = mesh.scale();
    let s: f64 = state
        .coefficients
        .iter()
        .zip(mesh.nodes().iter().zip(mesh.weights()))
        .map(|(c, (&x, &w))| c * w.sqrt() * x * spherical_bessel_j(state.l, h * x * r))
        .sum();
    let sign = if state.l.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (2.0 / PI).sqrt() * h.powf(1.5) * s
}

/// `u(r) = r R̄(r)`.
pub fn reduced_wavefunction_position(state: &BoundState, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    r * wavefunction_position(state, r)
}

/// `<U(p)> = Σ C_j² U(h x_j)`.
pub fn expval_momentum<U: Fn(f64) -> f64>(state: &BoundState, u: U) -> Result<f64> {
    let mut sum = 0.0;
    for (j, (c, p)) in state
        .coefficients
        .iter()
        .zip(state.mesh.scaled_nodes())
        .enumerate()
    {
        let v = u(p);
        if !v.is_finite() {
            return Err(Error::numerical(
                MODULE,
                format!("expval_momentum node #{} (p = {p})", j + 1),
                format!("observable is not finite ({v})"),
            ));
        }
        sum += c * c * v;
    }
    Ok(sum)
}

/// Approximate matrix of `-d²/dx²` between regularized Laguerre functions:
/// off-diagonal `(-1)^{i-j} (x_i x_j)^{-1/2} (x_i + x_j) / (x_i - x_j)²`,
/// diagonal `(4 + (4N+2) x_i - x_i²) / (12 x_i²)`.
pub fn build_t_matrix(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let nf = n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        let (xi, xj) = (nodes[i], nodes[j]);
        if i == j {
            (4.0 + (4.0 * nf + 2.0) * xi - xi * xi) / (12.0 * xi * xi)
        } else {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * (xi + xj) / ((xi * xj).sqrt() * (xi - xj).powi(2))
        }
    })
}

/// The `r²` matrix of a momentum mesh in one partial wave, with its
/// spectral factorization `P = S diag(P^D) Sᵀ`.
#[derive(Debug, Clone)]
pub struct RadialOperatorCalculus {
    pub t: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub transform: DMatrix<f64>,
    pub l: usize,
    mesh: Arc<LaguerreMesh>,
}

/// Build `P_ij = (t_ij + l(l+1) δ_ij / x_i²) / h²` and diagonalize it.
pub fn build_position_calculus(
    mesh: &Arc<LaguerreMesh>,
    l: usize,
) -> Result<RadialOperatorCalculus> {
    let t = build_t_matrix(mesh.nodes());
    let h2 = mesh.scale().powi(2);
    let centrifugal = (l * (l + 1)) as f64;
    let mut p = t.clone();
    for (i, x) in mesh.nodes().iter().enumerate() {
        p[(i, i)] += centrifugal / (x * x);
    }
    p /= h2;
    let spec = symmetric_eigen(&p, "position calculus: eigen-decomposition of r² matrix")?;
    let mut eigenvalues = spec.values;
    for (k, v) in eigenvalues.iter_mut().enumerate() {
        if *v < -CLAMP {
            return Err(Error::numerical(
                MODULE,
                format!("r² matrix eigenvalue #{}", k + 1),
                format!("negative eigenvalue {v} (r² must be positive)"),
            ));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(RadialOperatorCalculus {
        t,
        p,
        eigenvalues,
        transform: spec.vectors,
        l,
        mesh: Arc::clone(mesh),
    })
}

impl RadialOperatorCalculus {
    /// Matrix of `K(r)`: `S diag(K(sqrt(P^D_k))) Sᵀ`.
    pub fn operator_matrix<K: Fn(f64) -> f64>(&self, k: K) -> Result<DMatrix<f64>> {
        let n = self.eigenvalues.len();
        let mut diag = Vec::with_capacity(n);
        for (idx, &ev) in self.eigenvalues.iter().enumerate() {
            let v = k(ev.sqrt());
            if !v.is_finite() {
                return Err(Error::numerical(
                    MODULE,
                    format!(
                        "expval_radial spectral point #{} (r = {})",
                        idx + 1,
                        ev.sqrt()
                    ),
                    format!("observable is not finite ({v})"),
                ));
            }
            diag.push(v);
        }
        let s = &self.transform;
        let scaled = DMatrix::from_fn(n, n, |i, c| s[(i, c)] * diag[c]);
        Ok(scaled * s.transpose())
    }

    pub fn mesh(&self) -> &Arc<LaguerreMesh> {
        &self.mesh
    }
}

fn quadratic_form(c: &[f64], m: &DMatrix<f64>) -> f64 {
    let n = c.len();
    let mut sum = 0.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| m[(i, j)] * c[j]).sum();
        sum += c[i] * row;
    }
    sum
}

fn check_compatible(state: &BoundState, calculus: &RadialOperatorCalculus) -> Result<()> {
    if state.l != calculus.l || *state.mesh != *calculus.mesh {
        return Err(Error::config(
            MODULE,
            "radial calculus was built for a different mesh or partial wave than the state",
        ));
    }
    Ok(())
}

/// `<K(r)> = Σ_ij C_i C_j K_ij` with `K = S diag(K(sqrt(P^D))) Sᵀ`.
pub fn expval_radial<K: Fn(f64) -> f64>(
    state: &BoundState,
    calculus: &RadialOperatorCalculus,
    k: K,
) -> Result<f64> {
    check_compatible(state, calculus)?;
    let km = calculus.operator_matrix(k)?;
    Ok(quadratic_form(&state.coefficients, &km))
}

/// `<r²>` directly from `P`, bypassing the factorization.
pub fn expval_r_squared(state: &BoundState, calculus: &RadialOperatorCalculus) -> Result<f64> {
    check_compatible(state, calculus)?;
    Ok(quadratic_form(&state.coefficients, &calculus.p))
}

/// Energy consistency check: the eigenvalue against `<T(p)> + <V(r)>`
/// evaluated through the two independent observable routes.
#[derive(Debug, Clone, Copy)]
pub struct Consistency {
    pub eigenvalue: f64,
    pub kinetic: f64,
    pub potential: f64,
}

impl Consistency {
    pub fn mean_hamiltonian(&self) -> f64 {
        self.kinetic + self.potential
    }

    pub fn residual(&self) -> f64 {
        (self.eigenvalue - self.mean_hamiltonian()).abs()
    }
}

pub fn hamiltonian_consistency(state: &BoundState, problem: &Problem) -> Result<Consistency> {
    let calculus = build_position_calculus(&state.mesh, state.l)?;
    hamiltonian_consistency_with(state, problem, &calculus)
}

pub fn hamiltonian_consistency_with(
    state: &BoundState,
    problem: &Problem,
    calculus: &RadialOperatorCalculus,
) -> Result<Consistency> {
    if !problem.potential.has_radial_form() {
        return Err(Error::unsupported(
            MODULE,
            "consistency check needs V(r), which the custom potential does not provide",
        ));
    }
    let kinetic = expval_momentum(state, |p| problem.kinetics.value(p))?;
    let pot = &problem.potential;
    let potential = expval_radial(state, calculus, |r| {
        if r == 0.0 {
            // V(0⁺); Gaussian finite, Yukawa would be singular
            pot.radial_value(f64::MIN_POSITIVE).unwrap_or(f64::NAN)
        } else {
            pot.radial_value(r).unwrap_or(f64::NAN)
        }
    })?;
    Ok(Consistency {
        eigenvalue: state.energy,
        kinetic,
        potential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::Kinetics;
    use crate::potentials::Potential;
    use crate::solver::solve;
    use approx::assert_relative_eq;

    fn gaussian_ground(n: usize, h: f64) -> (Problem, BoundState) {
        let p = Problem::new(
            Kinetics::dimensionless(),
            Potential::gaussian(15.0, 1.0).unwrap(),
            0,
            n,
            h,
        )
        .unwrap();
        let s = solve(&p).unwrap().remove(0);
        (p, s)
    }

    #[test]
    fn t_matrix_small_cases() {
        let t1 = build_t_matrix(&[1.0]);
        assert_relative_eq!(t1[(0, 0)], 0.75, epsilon = 1e-15);
        let mesh = LaguerreMesh::new(2, 1.0).unwrap();
        let t2 = build_t_matrix(mesh.nodes());
        assert_relative_eq!(t2[(0, 1)], -0.3535534, epsilon = 1e-7);
        let mesh = LaguerreMesh::new(50, 1.0).unwrap();
        let t = build_t_matrix(mesh.nodes());
        assert_eq!(t, t.transpose());
    }

    #[test]
    fn s_wave_calculus_is_scaled_t() {
        let mesh = Arc::new(LaguerreMesh::new(10, 0.5).unwrap());
        let c = build_position_calculus(&mesh, 0).unwrap();
        assert_eq!(c.p, &c.t / 0.25);
    }

    #[test]
    fn r_squared_spectrum_is_nonnegative_and_transform_orthogonal() {
        for n in [10, 20, 50] {
            for l in [0, 1] {
                let mesh = Arc::new(LaguerreMesh::new(n, 0.5).unwrap());
                let c = build_position_calculus(&mesh, l).unwrap();
                assert!(c.eigenvalues.iter().all(|&v| v >= 0.0));
                let s = &c.transform;
                let err = (s * s.transpose() - DMatrix::<f64>::identity(n, n)).amax();
                assert!(err <= 1e-11, "n={n} l={l} err={err}");
            }
        }
    }

    #[test]
    fn unit_observables() {
        let (_, s) = gaussian_ground(20, 0.5);
        assert_eq!(
            expval_momentum(&s, |_| 1.0).unwrap(),
            s.coefficients.iter().map(|c| c * c).sum::<f64>()
        );
        let calc = build_position_calculus(&s.mesh, 0).unwrap();
        assert_relative_eq!(
            expval_radial(&s, &calc, |_| 1.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_node_indicator_collapses_to_coefficient() {
        let (_, s) = gaussian_ground(20, 0.5);
        let nodes: Vec<f64> = s.mesh.scaled_nodes().collect();
        for (j, &pj) in nodes.iter().enumerate() {
            let v = expval_momentum(&s, |p| if p == pj { 1.0 } else { 0.0 }).unwrap();
            assert_eq!(v, s.coefficients[j].powi(2));
        }
    }

    #[test]
    fn r_squared_two_routes_agree() {
        let (_, s) = gaussian_ground(30, 0.5);
        let calc = build_position_calculus(&s.mesh, 0).unwrap();
        let via_spectrum = expval_radial(&s, &calc, |r| r * r).unwrap();
        let direct = expval_r_squared(&s, &calc).unwrap();
        assert_relative_eq!(via_spectrum, direct, epsilon = 1e-10);
    }

    #[test]
    fn momentum_wavefunction_at_nodes_and_normalization() {
        let (_, s) = gaussian_ground(20, 0.5);
        let h = s.mesh.scale();
        for (j, (&x, &w)) in s.mesh.nodes().iter().zip(s.mesh.weights()).enumerate() {
            let u = reduced_wavefunction_momentum(&s, h * x);
            assert_relative_eq!(
                u,
                s.coefficients[j] / (h.sqrt() * w.sqrt()),
                max_relative = 1e-9
            );
        }
        let norm = s
            .mesh
            .quadrature(|x| reduced_wavefunction_momentum(&s, h * x).powi(2) * h)
            .unwrap();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn ground_state_momentum_wavefunction_has_no_nodes() {
        let (_, s) = gaussian_ground(20, 0.5);
        let samples: Vec<f64> = (1..200)
            .map(|k| reduced_wavefunction_momentum(&s, k as f64 * 0.05))
            .collect();
        assert!(samples.iter().all(|&u| u > 0.0));
        let peak = samples
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
            .0;
        assert!(samples[..peak].windows(2).all(|w| w[1] > w[0]));
        assert!(samples[peak..].windows(2).all(|w| w[1] < w[0]));
        assert!(wavefunction_momentum(&s, 0.0).is_finite());
    }

    #[test]
    fn position_wavefunction_at_origin() {
        let (_, s) = gaussian_ground(20, 0.5);
        let h: f64 = 0.5;
        let want: f64 = (2.0 / PI).sqrt()
            * h.powf(1.5)
            * s.coefficients
                .iter()
                .zip(s.mesh.nodes().iter().zip(s.mesh.weights()))
                .map(|(c, (x, w))| c * w.sqrt() * x)
                .sum::<f64>();
        assert_relative_eq!(wavefunction_position(&s, 0.0), want, max_relative = 1e-14);
        let p1 = Problem::new(
            Kinetics::dimensionless(),
            Potential::gaussian(15.0, 1.0).unwrap(),
            1,
            20,
            0.5,
        )
        .unwrap();
        let s1 = solve(&p1).unwrap().remove(0);
        assert_eq!(wavefunction_position(&s1, 0.0), 0.0);
    }

    #[test]
    fn free_problem_consistency_is_exact() {
        let pot = Potential::custom_with_radial(|_| 0.0, |_| 0.0);
        let p = Problem::new(Kinetics::dimensionless(), pot, 0, 10, 1.0).unwrap();
        let h = crate::solver::assemble_hamiltonian(&p).unwrap();
        let spec = crate::solver::solve_spectrum(&h).unwrap();
        // no bound states; take the lowest eigenvector as a test state
        let state = BoundState {
            energy: spec.values[0],
            coefficients: spec.vector(0),
            n: 0,
            l: 0,
            mesh: Arc::clone(p.mesh()),
        };
        let c = hamiltonian_consistency(&state, &p).unwrap();
        assert!(c.residual() < 1e-12);
    }

    #[test]
    fn mismatched_calculus_is_rejected() {
        let (_, s) = gaussian_ground(20, 0.5);
        let other = Arc::new(LaguerreMesh::new(20, 0.4).unwrap());
        let calc = build_position_calculus(&other, 0).unwrap();
        assert!(expval_radial(&s, &calc, |r| r).is_err());
    }
}
