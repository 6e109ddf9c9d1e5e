//! Kinetic energy `T(p²)`. In momentum space it acts by plain multiplication.

use std::fmt;

use crate::error::{Error, Result};
use crate::potentials::RealFn;

const MODULE: &str = "kinetics";

#[derive(Clone)]
pub enum Kinetics {
    /// `p² / 2μ`, `μ = m1 m2 / (m1 + m2)`. Eigenvalues are binding energies.
    Nonrelativistic { m1: f64, m2: f64 },
    /// `sqrt(p² + m1²) + sqrt(p² + m2²)`. Eigenvalues are masses.
    Salpeter { m1: f64, m2: f64 },
    /// Arbitrary `t(p²)` with a caller-provided bound-state window.
    Custom {
        t: RealFn,
        window: Option<(f64, f64)>,
    },
}

impl fmt::Debug for Kinetics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kinetics::Nonrelativistic { m1, m2 } => {
                write!(f, "Nonrelativistic {{ m1: {m1}, m2: {m2} }}")
            }
            Kinetics::Salpeter { m1, m2 } => write!(f, "Salpeter {{ m1: {m1}, m2: {m2} }}"),
            Kinetics::Custom { window, .. } => write!(f, "Custom {{ window: {window:?} }}"),
        }
    }
}

fn check_masses(m1: f64, m2: f64) -> Result<()> {
    if !(m1 > 0.0 && m1.is_finite() && m2 > 0.0 && m2.is_finite()) {
        return Err(Error::config(
            MODULE,
            format!("masses must be positive, got m1 = {m1}, m2 = {m2}"),
        ));
    }
    Ok(())
}

impl Kinetics {
    pub fn nonrelativistic(m1: f64, m2: f64) -> Result<Self> {
        check_masses(m1, m2)?;
        Ok(Kinetics::Nonrelativistic { m1, m2 })
    }

    /// Unit masses, `μ = 1/2`: `T = p²`, the dimensionless Hamiltonian
    /// `q² + U(x)`.
    pub fn dimensionless() -> Self {
        Kinetics::Nonrelativistic { m1: 1.0, m2: 1.0 }
    }

    pub fn salpeter(m1: f64, m2: f64) -> Result<Self> {
        check_masses(m1, m2)?;
        Ok(Kinetics::Salpeter { m1, m2 })
    }

    pub fn custom<F>(t: F, window: Option<(f64, f64)>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Kinetics::Custom {
            t: std::sync::Arc::new(t),
            window,
        }
    }

    pub fn reduced_mass(&self) -> Option<f64> {
        match self {
            Kinetics::Nonrelativistic { m1, m2 } => Some(m1 * m2 / (m1 + m2)),
            _ => None,
        }
    }

    pub fn is_nonrelativistic(&self) -> bool {
        matches!(self, Kinetics::Nonrelativistic { .. })
    }

    /// `T` at momentum `p`.
    pub fn value(&self, p: f64) -> f64 {
        let p2 = p * p;
        match self {
            Kinetics::Nonrelativistic { m1, m2 } => p2 * (m1 + m2) / (2.0 * m1 * m2),
            Kinetics::Salpeter { m1, m2 } => (p2 + m1 * m1).sqrt() + (p2 + m2 * m2).sqrt(),
            Kinetics::Custom { t, .. } => t(p2),
        }
    }

    /// Energy interval identifying bound states.
    pub fn bound_window(&self) -> Result<(f64, f64)> {
        match self {
            Kinetics::Nonrelativistic { .. } => Ok((f64::NEG_INFINITY, 0.0)),
            Kinetics::Salpeter { m1, m2 } => Ok((0.0, m1 + m2)),
            Kinetics::Custom {
                window: Some(w), ..
            } => Ok(*w),
            Kinetics::Custom { window: None, .. } => Err(Error::config(
                MODULE,
                "custom kinetic operator needs an explicit bound-state window",
            )),
        }
    }
}

pub fn kinetic_value(spec: &Kinetics, p: f64) -> f64 {
    spec.value(p)
}

pub fn bound_window(spec: &Kinetics) -> Result<(f64, f64)> {
    spec.bound_window()
}
