//! Explicit SSP Runge-Kutta time integration of the semidiscrete systems.

mod residual;

use std::sync::Arc;

use crate::diagnostics::{constraint_drift, energy, l2_error_components, DriftKind};
use crate::error::{invalid, Error, Result};
use crate::mesh::Mesh;
use crate::operators::{divfree_init, l2_project, l2_project_scalar};
use crate::spaces::{DiscreteComplex, Family, Field, QuadratureOrders};
use crate::systems::{FluxFamily, FluxSpec, SystemDef, TestCase};

pub use residual::Discretization;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeIntegrator {
    pub order: usize,
    pub cfl: f64,
}

impl TimeIntegrator {
    /// Order `k + 1` with CFL 0.5, 0.33, 0.2 for `k = 0, 1, 2`.
    pub fn default_for_degree(k: usize) -> TimeIntegrator {
        let cfl = match k {
            0 => 0.5,
            1 => 0.33,
            _ => 0.2,
        };
        TimeIntegrator { order: (k + 1).min(3), cfl }
    }
}

/// One step of the SSP Runge-Kutta scheme of the given order.
pub fn ssp_rk_step<F>(order: usize, mut rhs: F, y: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut k = vec![0.0; n];
    rhs(y, &mut k)?;
    let mut y1: Vec<f64> = y.iter().zip(&k).map(|(a, b)| a + dt * b).collect();
    match order {
        1 => Ok(y1),
        2 => {
            rhs(&y1, &mut k)?;
            for i in 0..n {
                y1[i] = 0.5 * y[i] + 0.5 * (y1[i] + dt * k[i]);
            }
            Ok(y1)
        }
        3 => {
            rhs(&y1, &mut k)?;
            let y2: Vec<f64> = (0..n).map(|i| 0.75 * y[i] + 0.25 * (y1[i] + dt * k[i])).collect();
            rhs(&y2, &mut k)?;
            Ok((0..n).map(|i| y[i] / 3.0 + 2.0 / 3.0 * (y2[i] + dt * k[i])).collect())
        }
        _ => Err(invalid(format!("SSP Runge-Kutta order {order} (supported: 1, 2, 3)"))),
    }
}

/// `dt = cfl * h_min / (2 lambda_max)` with `h_min = sqrt(min cell area)`.
/// The factor 2 is the space dimension: the CFL numbers are per direction.
pub fn compute_dt(mesh: &Mesh, lambda_max: f64, integ: &TimeIntegrator) -> Result<f64> {
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(invalid(format!("wave speed must be positive, got {lambda_max}")));
    }
    if !(integ.cfl > 0.0) {
        return Err(invalid(format!("CFL must be positive, got {}", integ.cfl)));
    }
    Ok(integ.cfl * mesh.h_min() / (2.0 * lambda_max))
}

/// Step sizes covering `[0, t_final]`, the last one clipped to land exactly
/// on `t_final`.
pub fn step_sizes(t_final: f64, dt: f64) -> Vec<f64> {
    if !(t_final > 0.0) || !(dt > 0.0) {
        return Vec::new();
    }
    let n = ((t_final / dt) * (1.0 - 1e-10)).ceil().max(1.0) as usize;
    let mut out = vec![dt; n];
    out[n - 1] = t_final - (n - 1) as f64 * dt;
    out
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub scalar: Option<Field>,
    pub vector: Field,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    L2Projection,
    /// Vector unknown from the projected potential, for the induction cases.
    DivergenceFree,
}

/// What to record during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probes {
    /// Record every `stride` steps (and always at the last step).
    pub stride: usize,
    pub drift: bool,
    pub energy: bool,
    pub errors: bool,
}

impl Default for Probes {
    fn default() -> Self {
        Probes { stride: 1, drift: true, energy: true, errors: true }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: TestCase,
    pub degree: usize,
    pub vector_family: Family,
    pub flux: FluxSpec,
    pub integrator: TimeIntegrator,
    pub init: InitKind,
    pub t_final: f64,
    pub probes: Probes,
    pub quadrature: Option<QuadratureOrders>,
}

impl RunConfig {
    /// Defaults: the case's final time, the degree's integrator, L2
    /// initialization and probes at every step.
    pub fn new(case: TestCase, degree: usize, vector_family: Family, flux: FluxFamily) -> RunConfig {
        RunConfig {
            flux: FluxSpec::for_system(flux, &case.system),
            t_final: case.t_final(),
            case,
            degree,
            vector_family,
            integrator: TimeIntegrator::default_for_degree(degree),
            init: InitKind::L2Projection,
            probes: Probes::default(),
            quadrature: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub steps: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    pub drift: Vec<f64>,
    /// Energy divided by its initial value.
    pub energy: Vec<f64>,
    pub initial_energy: f64,
    /// Named L2 errors at the final time, when the case has an exact solution.
    pub errors: Vec<(String, f64)>,
    pub state: SolverState,
    pub h_min: f64,
}

pub fn drift_kind(system: &SystemDef) -> DriftKind {
    match system {
        SystemDef::Wave { .. } => DriftKind::AdjointCurl,
        _ => DriftKind::AdjointDiv,
    }
}

fn variable_names(system: &SystemDef) -> [&'static str; 3] {
    match system {
        SystemDef::Wave { .. } => ["p", "u_x", "u_y"],
        SystemDef::Maxwell { .. } => ["b", "e_x", "e_y"],
        SystemDef::Induction { .. } => ["", "u_x", "u_y"],
    }
}

/// Initial flat state for a case.
pub fn initial_state(disc: &Discretization, case: &TestCase, init: InitKind) -> Result<Vec<f64>> {
    let mut y = Vec::with_capacity(disc.len());
    if let Some(sc) = &disc.scalar {
        y.extend(l2_project_scalar(sc, |x| case.scalar_exact(x, 0.0))?.coeffs);
    }
    let u = match init {
        InitKind::L2Projection => l2_project(&disc.vector, |x| case.vector_exact(x, 0.0))?,
        InitKind::DivergenceFree => {
            if case.potential([0.0, 0.0]).is_none() {
                return Err(invalid(format!("case {} has no potential", case.id.name())));
            }
            if disc.vector.family.family != Family::VectorCurlOptimal {
                return Err(invalid("divergence-free initialization needs the curl-optimal space"));
            }
            divfree_init(|x| case.potential(x).unwrap_or(0.0), &disc.vector, &disc.complex.cellface)?
        }
    };
    y.extend(u.coeffs);
    Ok(y)
}

/// Runs a test case on a mesh and records the requested diagnostics.
pub fn run_case(cfg: &RunConfig, mesh: Arc<Mesh>) -> Result<RunResult> {
    let orders = cfg.quadrature.unwrap_or_else(|| QuadratureOrders::for_degree(cfg.degree));
    let complex = DiscreteComplex::with_orders(mesh.clone(), cfg.degree, orders)?;
    let disc = Discretization::new(cfg.case.system, cfg.flux, complex, cfg.vector_family)?;
    let lambda = disc.max_speed();
    let dt = compute_dt(&mesh, lambda, &cfg.integrator)?;
    let mut y = initial_state(&disc, &cfg.case, cfg.init)?;
    let u0 = disc.vector_field(&y);
    let kind = drift_kind(&cfg.case.system);
    let e0 = energy(&u0)?;
    let mut times = vec![0.0];
    let mut drift = Vec::new();
    let mut energies = Vec::new();
    if cfg.probes.drift {
        drift.push(0.0);
    }
    if cfg.probes.energy {
        energies.push(1.0);
    }
    let steps = step_sizes(cfg.t_final, dt);
    let stride = cfg.probes.stride.max(1);
    let mut t = 0.0;
    for (i, &h) in steps.iter().enumerate() {
        y = ssp_rk_step(cfg.integrator.order, |a, b| disc.rhs(a, b), &y, h)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: i + 1 });
        }
        t = if i + 1 == steps.len() { cfg.t_final } else { t + h };
        if (i + 1) % stride == 0 || i + 1 == steps.len() {
            times.push(t);
            let u = disc.vector_field(&y);
            if cfg.probes.drift {
                drift.push(constraint_drift(&u, &u0, kind, &disc.complex.potentials)?);
            }
            if cfg.probes.energy {
                let e = energy(&u)?;
                energies.push(if e0 > 0.0 { e / e0 } else { e });
            }
        }
    }
    let state = SolverState { scalar: disc.scalar_field(&y), vector: disc.vector_field(&y), time: t };
    let mut errors = Vec::new();
    if cfg.probes.errors {
        let names = variable_names(&cfg.case.system);
        let case = cfg.case;
        let tf = t;
        if let Some(s) = &state.scalar {
            let e = l2_error_components(s, |x| [case.scalar_exact(x, tf), 0.0])?;
            errors.push((names[0].to_string(), e[0]));
        }
        let e = l2_error_components(&state.vector, |x| case.vector_exact(x, tf))?;
        errors.push((names[1].to_string(), e[0]));
        errors.push((names[2].to_string(), e[1]));
    }
    Ok(RunResult {
        steps: steps.len(),
        dt,
        times,
        drift,
        energy: energies,
        initial_energy: e0,
        errors,
        state,
        h_min: mesh.h_min(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_leaves_state_unchanged() {
        for order in 1..=3 {
            let y = vec![1.0, -2.0, 3.5];
            let out = ssp_rk_step(order, |_, k: &mut [f64]| {
                k.iter_mut().for_each(|v| *v = 0.0);
                Ok(())
            }, &y, 0.1)
            .unwrap();
            assert_eq!(out, y);
        }
    }

    #[test]
    fn rejects_order_four() {
        assert!(ssp_rk_step(4, |_, _| Ok(()), &[1.0], 0.1).is_err());
    }

    #[test]
    fn step_count_without_clipping() {
        let s = step_sizes(3.0, 0.05);
        assert_eq!(s.len(), 60);
        assert!(s.iter().all(|&h| (h - 0.05).abs() < 1e-12));
    }

    #[test]
    fn last_step_is_clipped() {
        let s = step_sizes(1.0, 0.3);
        assert_eq!(s.len(), 4);
        assert!((s[3] - 0.1).abs() < 1e-12);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_step_from_cfl() {
        let mesh = crate::mesh::generate_cartesian(10, 10, 1.0, 1.0).unwrap();
        let dt = compute_dt(&mesh, 1.0, &TimeIntegrator::default_for_degree(0)).unwrap();
        assert!((dt - 0.025).abs() < 1e-15);
        let dt = compute_dt(&mesh, 2.0, &TimeIntegrator::default_for_degree(2)).unwrap();
        assert!((dt - 0.005).abs() < 1e-15);
        assert!(compute_dt(&mesh, 0.0, &TimeIntegrator::default_for_degree(0)).is_err());
    }

    #[test]
    fn third_order_step_matches_taylor() {
        let y = ssp_rk_step(3, |y, k: &mut [f64]| {
            k[0] = -y[0];
            Ok(())
        }, &[1.0], 0.1)
        .unwrap();
        assert!((y[0] - (1.0 - 0.1 + 0.005 - 0.1f64.powi(3) / 6.0)).abs() < 1e-15);
        assert!((y[0] - (-0.1f64).exp()).abs() < 5e-6);
    }

    #[test]
    fn default_integrators() {
        assert_eq!(TimeIntegrator::default_for_degree(0), TimeIntegrator { order: 1, cfl: 0.5 });
        assert_eq!(TimeIntegrator::default_for_degree(1), TimeIntegrator { order: 2, cfl: 0.33 });
        assert_eq!(TimeIntegrator::default_for_degree(2), TimeIntegrator { order: 3, cfl: 0.2 });
    }
}
