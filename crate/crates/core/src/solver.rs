//! Momentum-space Lagrange-mesh Hamiltonian and its bound states.
//!
//! With the expansion `P(p) = Σ C_j f_j(p/h) / (sqrt(h) p)` and Gauss
//! quadrature, the integral eigenequation becomes the symmetric matrix
//! problem
//!
//! `H_ij = T(h² x_i²) δ_ij + h³ sqrt(λ_i λ_j) x_i x_j V_l(h x_i, h x_j)`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::mesh::LaguerreMesh;
use crate::potentials::Potential;
use crate::specfun::{dot_compensated, CompensatedSum};

const MODULE: &str = "solver";

/// Correction sweeps applied to each selected eigenpair.
const REFINE_SWEEPS: usize = 2;

/// A two-body problem in one partial wave on a given mesh.
#[derive(Debug, Clone)]
pub struct Problem {
    pub kinetics: Kinetics,
    pub potential: Potential,
    pub l: usize,
    mesh: Arc<LaguerreMesh>,
}

impl Problem {
    pub fn new(
        kinetics: Kinetics,
        potential: Potential,
        l: usize,
        n: usize,
        h: f64,
    ) -> Result<Self> {
        let mesh = LaguerreMesh::new(n, h)?;
        Ok(Self::on_mesh(kinetics, potential, l, Arc::new(mesh)))
    }

    pub fn on_mesh(
        kinetics: Kinetics,
        potential: Potential,
        l: usize,
        mesh: Arc<LaguerreMesh>,
    ) -> Self {
        Self {
            kinetics,
            potential,
            l,
            mesh,
        }
    }

    pub fn mesh(&self) -> &Arc<LaguerreMesh> {
        &self.mesh
    }
}

/// Dense symmetric Hamiltonian matrix.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    matrix: DMatrix<f64>,
}

impl HamiltonianMatrix {
    /// Wrap an arbitrary matrix; it must be square, finite and exactly
    /// symmetric.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::config(MODULE, "Hamiltonian matrix must be square"));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..n {
                let v = matrix[(i, j)];
                if !v.is_finite() {
                    return Err(Error::numerical(
                        MODULE,
                        format!("H[{}][{}]", i + 1, j + 1),
                        "matrix entry is not finite",
                    ));
                }
                if v != matrix[(j, i)] {
                    return Err(Error::config(
                        MODULE,
                        "Hamiltonian matrix must be symmetric",
                    ));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }
}

/// Assemble `H` for `problem`. The kernel is evaluated once per unordered
/// pair `i <= j` and mirrored; rows are filled in parallel, each entry
/// independently, so the result does not depend on the thread count.
pub fn assemble_hamiltonian(problem: &Problem) -> Result<HamiltonianMatrix> {
    let mesh = &problem.mesh;
    let n = mesh.len();
    let h = mesh.scale();
    let x = mesh.nodes();
    let sqrt_w: Vec<f64> = mesh.weights().iter().map(|w| w.sqrt()).collect();
    let kernel = problem.potential.kernel(problem.l);
    let h3 = h * h * h;

    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let v = kernel.evaluate(h * x[i], h * x[j]).map_err(|e| {
                        Error::numerical(
                            MODULE,
                            format!("kernel V_{}(h x_{}, h x_{})", problem.l, i + 1, j + 1),
                            e.to_string(),
                        )
                    })?;
                    let mut hij = h3 * sqrt_w[i] * sqrt_w[j] * x[i] * x[j] * v;
                    if i == j {
                        hij += problem.kinetics.value(h * x[i]);
                    }
                    if !hij.is_finite() {
                        return Err(Error::numerical(
                            MODULE,
                            format!("H[{}][{}]", i + 1, j + 1),
                            format!("matrix entry is not finite ({hij})"),
                        ));
                    }
                    Ok(hij)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut matrix = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + k;
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(HamiltonianMatrix { matrix })
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// (columns).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

/// Symmetric eigendecomposition (Householder tridiagonalization followed by
/// implicit-shift QR), sorted ascending. Exact ties are broken by the index
/// of the largest-magnitude component.
pub(crate) fn symmetric_eigen(matrix: &DMatrix<f64>, site: &str) -> Result<Spectrum> {
    let n = matrix.nrows();
    let eig = SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 0).ok_or_else(|| {
        Error::numerical(
            MODULE,
            site.to_string(),
            "symmetric eigen-iteration did not converge",
        )
    })?;
    let argmax = |k: usize| -> usize {
        eig.eigenvectors
            .column(k)
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, v)| {
                if v.abs() > best.1 {
                    (i, v.abs())
                } else {
                    best
                }
            })
            .0
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then_with(|| argmax(a).cmp(&argmax(b)))
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok(Spectrum { values, vectors })
}

/// Improve eigenpair `k` of `matrix` by first-order corrections computed
/// from a compensated residual, using the rest of the spectrum to solve the
/// correction equation. Removes the `eps ||H|| / gap` eigenvector error left
/// by the dense solver, which matters for the stiff low-lying states.
pub(crate) fn refine_eigenpair(
    matrix: &DMatrix<f64>,
    spectrum: &Spectrum,
    k: usize,
) -> (f64, Vec<f64>) {
    let n = matrix.nrows();
    let mut v = spectrum.vector(k);
    normalize(&mut v);
    let mut lambda = spectrum.values[k];
    let floor = 1e-12 * spectrum.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for _ in 0..REFINE_SWEEPS {
        let r: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = CompensatedSum::default();
                for j in 0..n {
                    s.add_product(matrix[(i, j)], v[j]);
                }
                s.add_product(-lambda, v[i]);
                s.value()
            })
            .collect();
        let mut correction = vec![0.0; n];
        for m in 0..n {
            if m == k {
                continue;
            }
            let gap = lambda - spectrum.values[m];
            if gap.abs() <= floor {
                continue;
            }
            let u = spectrum.vectors.column(m);
            let y: f64 = u.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / gap;
            for (c, a) in correction.iter_mut().zip(u.iter()) {
                *c += y * a;
            }
        }
        for (a, c) in v.iter_mut().zip(&correction) {
            *a += c;
        }
        let norm = dot_compensated(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        lambda = rayleigh_quotient(matrix, &v);
    }
    (lambda, v)
}

/// `vᵀ H v` for unit `v`, compensated.
fn rayleigh_quotient(matrix: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = CompensatedSum::default();
    for i in 0..n {
        for j in 0..n {
            s.add_product(matrix[(i, j)] * v[i], v[j]);
        }
    }
    s.value()
}

pub fn solve_spectrum(h: &HamiltonianMatrix) -> Result<Spectrum> {
    symmetric_eigen(&h.matrix, "solve_spectrum")
}

/// A normalized eigenstate of a momentum-space problem.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub energy: f64,
    pub coefficients: Vec<f64>,
    /// Radial excitation, assigned by energy rank within the partial wave.
    pub n: usize,
    pub l: usize,
    pub mesh: Arc<LaguerreMesh>,
}

/// Flip `v` so that its first significant component is positive. Components
/// below `1e-8 · max|v|` are treated as zero.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub(crate) fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Keep the eigenpairs whose energy lies inside the kinetic bound-state
/// window (open interval), refined against `matrix`. An empty result is not
/// an error.
pub fn select_bound_states(
    matrix: &HamiltonianMatrix,
    spectrum: &Spectrum,
    kinetics: &Kinetics,
    l: usize,
    mesh: &Arc<LaguerreMesh>,
) -> Result<Vec<BoundState>> {
    let (lo, hi) = kinetics.bound_window()?;
    let states = spectrum
        .values
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > lo && e < hi)
        .enumerate()
        .map(|(rank, (k, _))| {
            let (energy, mut c) = refine_eigenpair(&matrix.matrix, spectrum, k);
            fix_sign(&mut c);
            BoundState {
                energy,
                coefficients: c,
                n: rank,
                l,
                mesh: Arc::clone(mesh),
            }
        })
        .collect();
    Ok(states)
}

/// Assemble, diagonalize and select in one call.
pub fn solve(problem: &Problem) -> Result<Vec<BoundState>> {
    let h = assemble_hamiltonian(problem)?;
    let spectrum = solve_spectrum(&h)?;
    select_bound_states(&h, &spectrum, &problem.kinetics, problem.l, &problem.mesh)
}

/// Physical energy `E = b² ε / 2μ` from the dimensionless eigenvalue.
pub fn scale_energy(epsilon: f64, mu: f64, b: f64) -> f64 {
    b * b * epsilon / (2.0 * mu)
}

/// Dimensionless Gaussian coupling `g = 2 μ a / b²`.
pub fn gaussian_coupling(mu: f64, a: f64, b: f64) -> f64 {
    2.0 * mu * a / (b * b)
}

/// Dimensionless Yukawa coupling `g = 2 μ a / b`.
pub fn yukawa_coupling(mu: f64, a: f64, b: f64) -> f64 {
    2.0 * mu * a / b
}
