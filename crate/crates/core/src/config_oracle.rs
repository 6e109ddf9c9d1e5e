//! Configuration-space Lagrange-mesh solver, used as an independent check on
//! momentum-space results. Nonrelativistic kinetics only.
//!
//! `H_ij = (t_ij + l(l+1) δ_ij / x_i²) / (2 μ h_r²) + V(h_r x_i) δ_ij`,
//! with the same regularized-Laguerre `t_ij` as the position calculus.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::mesh::LaguerreMesh;
use crate::observables::build_t_matrix;
use crate::potentials::Potential;
use crate::solver::{fix_sign, refine_eigenpair, symmetric_eigen};
use crate::specfun::CompensatedSum;

const MODULE: &str = "config_oracle";

#[derive(Debug, Clone)]
pub struct ConfigProblem {
    pub potential: Potential,
    pub l: usize,
    pub mu: f64,
    mesh: Arc<LaguerreMesh>,
}

impl ConfigProblem {
    /// `h_r` carries units of length.
    pub fn new(potential: Potential, l: usize, mu: f64, n: usize, h_r: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::config(
                MODULE,
                format!("reduced mass must be positive, got {mu}"),
            ));
        }
        if !potential.has_radial_form() {
            return Err(Error::unsupported(
                MODULE,
                "configuration-space solve needs V(r), which the custom potential does not provide",
            ));
        }
        let mesh = LaguerreMesh::new(n, h_r)?;
        Ok(Self {
            potential,
            l,
            mu,
            mesh: Arc::new(mesh),
        })
    }

    /// Build from a kinetic specification; only nonrelativistic kinetics
    /// are accepted.
    pub fn from_kinetics(
        kinetics: &Kinetics,
        potential: Potential,
        l: usize,
        n: usize,
        h_r: f64,
    ) -> Result<Self> {
        match kinetics.reduced_mass() {
            Some(mu) => Self::new(potential, l, mu, n, h_r),
            None => Err(Error::unsupported(
                MODULE,
                "the configuration-space oracle handles nonrelativistic kinetics only",
            )),
        }
    }

    pub fn mesh(&self) -> &Arc<LaguerreMesh> {
        &self.mesh
    }

    /// `(t_ij + l(l+1) δ_ij / x_i²) / h_r²`, the mesh matrix of `p²`.
    pub fn momentum_squared_matrix(&self) -> DMatrix<f64> {
        let mut m = build_t_matrix(self.mesh.nodes());
        let centrifugal = (self.l * (self.l + 1)) as f64;
        for (i, x) in self.mesh.nodes().iter().enumerate() {
            m[(i, i)] += centrifugal / (x * x);
        }
        m / self.mesh.scale().powi(2)
    }

    pub fn hamiltonian(&self) -> Result<DMatrix<f64>> {
        let mut h = self.momentum_squared_matrix() / (2.0 * self.mu);
        for (i, r) in self.mesh.scaled_nodes().enumerate() {
            let v = self.potential.radial_value(r)?;
            if !v.is_finite() {
                return Err(Error::numerical(
                    MODULE,
                    format!("V(h_r x_{}) at r = {r}", i + 1),
                    "potential is not finite",
                ));
            }
            h[(i, i)] += v;
        }
        Ok(h)
    }
}

#[derive(Debug, Clone)]
pub struct ConfigState {
    pub energy: f64,
    pub coefficients: Vec<f64>,
    pub n: usize,
    pub l: usize,
    pub mesh: Arc<LaguerreMesh>,
}

impl ConfigState {
    /// `u(r) = Σ C_j f_j(r / h_r) / sqrt(h_r)`.
    pub fn reduced_wavefunction(&self, r: f64) -> f64 {
        let h = self.mesh.scale();
        let x = r / h;
        let s: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.mesh.lagrange_function(j, x))
            .sum();
        s / h.sqrt()
    }

    /// `<K(r)> = Σ C_j² K(h_r x_j)`.
    pub fn expval_radial<K: Fn(f64) -> f64>(&self, k: K) -> f64 {
        self.coefficients
            .iter()
            .zip(self.mesh.scaled_nodes())
            .map(|(c, r)| c * c * k(r))
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct ConfigSolution {
    pub eigenvalues: Vec<f64>,
    /// Eigenstates with negative energy, ordered by energy.
    pub states: Vec<ConfigState>,
}

pub fn solve_config(problem: &ConfigProblem) -> Result<ConfigSolution> {
    let h = problem.hamiltonian()?;
    let spectrum = symmetric_eigen(&h, "config_oracle: eigen-decomposition")?;
    let states = spectrum
        .values
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < 0.0)
        .enumerate()
        .map(|(rank, (k, _))| {
            let (energy, mut c) = refine_eigenpair(&h, &spectrum, k);
            fix_sign(&mut c);
            ConfigState {
                energy,
                coefficients: c,
                n: rank,
                l: problem.l,
                mesh: Arc::clone(&problem.mesh),
            }
        })
        .collect();
    Ok(ConfigSolution {
        eigenvalues: spectrum.values,
        states,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ConfigObservables {
    pub mean_r: f64,
    pub mean_potential: f64,
    pub mean_p2: f64,
}

impl ConfigObservables {
    /// `<p²>/2μ + <V>`.
    pub fn mean_hamiltonian(&self, mu: f64) -> f64 {
        self.mean_p2 / (2.0 * mu) + self.mean_potential
    }
}

pub fn config_observables(
    state: &ConfigState,
    problem: &ConfigProblem,
) -> Result<ConfigObservables> {
    let mean_r = state.expval_radial(|r| r);
    let mut mean_potential = 0.0;
    for (c, r) in state.coefficients.iter().zip(state.mesh.scaled_nodes()) {
        mean_potential += c * c * problem.potential.radial_value(r)?;
    }
    let p2 = problem.momentum_squared_matrix();
    let c = &state.coefficients;
    let n = c.len();
    let mut mean_p2 = CompensatedSum::default();
    for i in 0..n {
        for j in 0..n {
            mean_p2.add_product(c[i] * p2[(i, j)], c[j]);
        }
    }
    let mean_p2 = mean_p2.value();
    Ok(ConfigObservables {
        mean_r,
        mean_potential,
        mean_p2,
    })
}
