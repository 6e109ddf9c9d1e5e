//! Benchmark tables: ground and excited states of the Gaussian and Yukawa
//! test Hamiltonians with the observables used to judge convergence.

use std::sync::Arc;

use rayon::prelude::*;

use crate::config_oracle::{config_observables, solve_config, ConfigProblem};
use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::observables::{build_position_calculus, expval_momentum, expval_radial};
use crate::potentials::Potential;
use crate::solver::{solve, BoundState, Problem};

const MODULE: &str = "tables";

/// Mean values of a momentum-space state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateReport {
    pub energy: f64,
    pub mean_p2: f64,
    pub mean_p4: f64,
    pub mean_r: f64,
    pub mean_potential: f64,
    pub mean_kinetic: f64,
}

impl StateReport {
    /// `<T> + <V>`, to be compared with `energy`.
    pub fn mean_hamiltonian(&self) -> f64 {
        self.mean_kinetic + self.mean_potential
    }
}

pub fn report(state: &BoundState, problem: &Problem) -> Result<StateReport> {
    let calculus = build_position_calculus(&state.mesh, state.l)?;
    let pot = &problem.potential;
    Ok(StateReport {
        energy: state.energy,
        mean_p2: expval_momentum(state, |p| p * p)?,
        mean_p4: expval_momentum(state, |p| p.powi(4))?,
        mean_r: expval_radial(state, &calculus, |r| r)?,
        mean_potential: expval_radial(state, &calculus, |r| {
            pot.radial_value(r.max(f64::MIN_POSITIVE))
                .unwrap_or(f64::NAN)
        })?,
        mean_kinetic: expval_momentum(state, |p| problem.kinetics.value(p))?,
    })
}

/// One numeric cell: row quantity, column label, value.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub quantity: &'static str,
    pub column: String,
    pub value: f64,
}

fn cell(quantity: &'static str, column: &str, value: f64) -> TableCell {
    TableCell {
        quantity,
        column: column.to_string(),
        value,
    }
}

/// Momentum-space state `(n, l)` of `problem`.
pub fn momentum_state(problem: &Problem, n: usize) -> Result<BoundState> {
    let mut states = solve(problem)?;
    if n >= states.len() {
        return Err(Error::numerical(
            MODULE,
            format!(
                "state (n={n}, l={}) on N={}, h={}",
                problem.l,
                problem.mesh().len(),
                problem.mesh().scale()
            ),
            format!("only {} bound state(s) found", states.len()),
        ));
    }
    Ok(states.swap_remove(n))
}

/// Gaussian `q² - 15 exp(-x²)` ground state. Configuration space with
/// `N = 100, h = 0.4`; momentum space with `h = 0.5`, `N = 10, 20, 50`.
pub fn table1() -> Result<Vec<TableCell>> {
    let pot = Potential::gaussian(15.0, 1.0)?;
    let conf = ConfigProblem::new(pot.clone(), 0, 0.5, 100, 0.4)?;
    let sol = solve_config(&conf)?;
    let cs = sol.states.first().ok_or_else(|| {
        Error::numerical(MODULE, "table 1, configuration space", "no bound state")
    })?;
    let co = config_observables(cs, &conf)?;
    let mut cells = vec![
        cell("epsilon", "conf", cs.energy),
        cell("q2", "conf", co.mean_p2),
        cell("x", "conf", co.mean_r),
        cell("U", "conf", co.mean_potential),
        cell("H", "conf", co.mean_hamiltonian(0.5)),
    ];
    let mom: Vec<(usize, StateReport)> = [10usize, 20, 50]
        .par_iter()
        .map(|&n| {
            let problem = Problem::new(Kinetics::dimensionless(), pot.clone(), 0, n, 0.5)?;
            let s = momentum_state(&problem, 0)?;
            Ok((n, report(&s, &problem)?))
        })
        .collect::<Result<_>>()?;
    for (n, r) in mom {
        let col = format!("mom N={n}");
        cells.extend([
            cell("epsilon", &col, r.energy),
            cell("q2", &col, r.mean_p2),
            cell("q4", &col, r.mean_p4),
            cell("x", &col, r.mean_r),
            cell("U", &col, r.mean_potential),
            cell("H", &col, r.mean_hamiltonian()),
        ]);
    }
    Ok(cells)
}

/// Spinless Salpeter, Gaussian `a = 3, b = 1`, `m1 = m2 = 1`, momentum
/// space with `h = 0.5`, `N = 10, 20, 50`.
pub fn table2() -> Result<Vec<TableCell>> {
    let pot = Potential::gaussian(3.0, 1.0)?;
    let kin = Kinetics::salpeter(1.0, 1.0)?;
    let rows: Vec<(usize, StateReport, f64)> = [10usize, 20, 50]
        .par_iter()
        .map(|&n| {
            let problem = Problem::new(kin.clone(), pot.clone(), 0, n, 0.5)?;
            let s = momentum_state(&problem, 0)?;
            let one_body = expval_momentum(&s, |p| (p * p + 1.0).sqrt())?;
            Ok((n, report(&s, &problem)?, one_body))
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (n, r, one_body) in rows {
        let col = format!("mom N={n}");
        cells.extend([
            cell("E", &col, r.energy),
            cell("sqrt(p2+m2)", &col, one_body),
            cell("p4", &col, r.mean_p4),
            cell("r", &col, r.mean_r),
            cell("U", &col, r.mean_potential),
            cell("H", &col, r.mean_hamiltonian()),
        ]);
    }
    Ok(cells)
}

/// The three Yukawa `q² - 10 e^{-x}/x` states with `N = 200`:
/// `(n, l, h_conf, h_mom)`.
pub const TABLE3_STATES: [(usize, usize, f64, f64); 3] =
    [(0, 0, 0.02, 0.8), (1, 0, 0.05, 1.0), (0, 1, 0.05, 0.5)];

pub fn table3() -> Result<Vec<TableCell>> {
    let pot = Potential::yukawa(10.0, 1.0)?;
    let columns: Vec<Vec<TableCell>> = TABLE3_STATES
        .par_iter()
        .map(|&(n, l, h_conf, h_mom)| {
            let conf = ConfigProblem::new(pot.clone(), l, 0.5, 200, h_conf)?;
            let sol = solve_config(&conf)?;
            let cs = sol.states.get(n).ok_or_else(|| {
                Error::numerical(
                    MODULE,
                    format!("table 3, configuration state ({n},{l})"),
                    "state not bound",
                )
            })?;
            let co = config_observables(cs, &conf)?;
            let ccol = format!("conf ({n},{l})");
            let problem = Problem::on_mesh(
                Kinetics::dimensionless(),
                pot.clone(),
                l,
                Arc::new(crate::mesh::LaguerreMesh::new(200, h_mom)?),
            );
            let s = momentum_state(&problem, n)?;
            let r = report(&s, &problem)?;
            let mcol = format!("mom ({n},{l})");
            Ok(vec![
                cell("epsilon", &ccol, cs.energy),
                cell("q2", &ccol, co.mean_p2),
                cell("U", &ccol, co.mean_potential),
                cell("H", &ccol, co.mean_hamiltonian(0.5)),
                cell("epsilon", &mcol, r.energy),
                cell("q2", &mcol, r.mean_p2),
                cell("U", &mcol, r.mean_potential),
                cell("H", &mcol, r.mean_hamiltonian()),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(columns.into_iter().flatten().collect())
}

pub fn table(which: u8) -> Result<Vec<TableCell>> {
    match which {
        1 => table1(),
        2 => table2(),
        3 => table3(),
        other => Err(Error::config(
            MODULE,
            format!("no table {other}; expected 1, 2 or 3"),
        )),
    }
}
