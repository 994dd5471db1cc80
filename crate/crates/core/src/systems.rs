//! The wave, Maxwell and induction systems, their numerical fluxes, and the
//! analytic test cases.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Prescribed advecting field of the induction equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdvectingField {
    Constant([f64; 2]),
    /// `omega * (cy - y, x - cx)`
    Rotation { center: [f64; 2], omega: f64 },
}

impl AdvectingField {
    pub fn at(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            AdvectingField::Constant(b) => b,
            AdvectingField::Rotation { center, omega } => [omega * (center[1] - x[1]), omega * (x[0] - center[0])],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    Wave,
    Maxwell,
    Induction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemDef {
    /// `p_t + div u = 0`, `u_t + c^2 grad p = 0`
    Wave { c: f64 },
    /// `b_t + curl e = 0`, `e_t + c^2 grad_perp b = 0`
    Maxwell { c: f64 },
    /// `u_t + grad_perp(b . u_perp) + b div u = 0`
    Induction { b: AdvectingField },
}

/// Which component of the vector flux carries the central part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxDirection {
    Normal,
    Tangential,
}

impl SystemDef {
    pub fn kind(&self) -> SystemKind {
        match self {
            SystemDef::Wave { .. } => SystemKind::Wave,
            SystemDef::Maxwell { .. } => SystemKind::Maxwell,
            SystemDef::Induction { .. } => SystemKind::Induction,
        }
    }

    pub fn has_scalar(&self) -> bool {
        !matches!(self, SystemDef::Induction { .. })
    }

    pub fn direction(&self) -> FluxDirection {
        match self {
            SystemDef::Wave { .. } => FluxDirection::Normal,
            _ => FluxDirection::Tangential,
        }
    }

    /// Scalar flux potential `g` at a point.
    #[inline]
    pub fn potential(&self, scalar: f64, u: [f64; 2], x: [f64; 2]) -> f64 {
        match self {
            SystemDef::Wave { c } | SystemDef::Maxwell { c } => c * c * scalar,
            SystemDef::Induction { b } => {
                let b = b.at(x);
                // b . u_perp with u_perp = (-u_y, u_x)
                -b[0] * u[1] + b[1] * u[0]
            }
        }
    }

    /// Largest wave speed over the given points.
    pub fn max_speed<'a>(&self, points: impl IntoIterator<Item = &'a [f64; 2]>) -> f64 {
        match self {
            SystemDef::Wave { c } | SystemDef::Maxwell { c } => c.abs(),
            SystemDef::Induction { b } => points
                .into_iter()
                .map(|&x| {
                    let v = b.at(x);
                    v[0].hypot(v[1])
                })
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluxFamily {
    /// Restricted diffusion matching the system: normal for the wave system,
    /// tangential otherwise.
    Godunov,
    LaxFriedrich,
    LfNormalDiffusion,
    LfTangentialDiffusion,
}

impl FluxFamily {
    pub fn parse(s: &str) -> Result<FluxFamily> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "godunov" => Ok(FluxFamily::Godunov),
            "lax_friedrich" | "laxfriedrich" | "lf" => Ok(FluxFamily::LaxFriedrich),
            "lf_normal" | "lfnormal" | "lf_normal_diffusion" => Ok(FluxFamily::LfNormalDiffusion),
            "lf_tangential" | "lftangential" | "lf_tangential_diffusion" => Ok(FluxFamily::LfTangentialDiffusion),
            _ => Err(invalid(format!("unknown flux `{s}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FluxFamily::Godunov => "godunov",
            FluxFamily::LaxFriedrich => "lax_friedrich",
            FluxFamily::LfNormalDiffusion => "lf_normal",
            FluxFamily::LfTangentialDiffusion => "lf_tangential",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSpec {
    pub family: FluxFamily,
    pub lambda: f64,
}

impl FluxSpec {
    /// Flux with the system's wave speed as diffusion coefficient. Induction
    /// fluxes use the local advection speed per side instead.
    pub fn for_system(family: FluxFamily, system: &SystemDef) -> FluxSpec {
        let lambda = match system {
            SystemDef::Wave { c } | SystemDef::Maxwell { c } => c.abs(),
            SystemDef::Induction { .. } => 0.0,
        };
        FluxSpec { family, lambda }
    }

    /// Whether the diffusion direction preserves the system's constraint.
    pub fn preserves_constraint(&self, system: &SystemDef) -> bool {
        match self.family {
            FluxFamily::Godunov => true,
            FluxFamily::LaxFriedrich => false,
            FluxFamily::LfNormalDiffusion => system.direction() == FluxDirection::Normal,
            FluxFamily::LfTangentialDiffusion => system.direction() == FluxDirection::Tangential,
        }
    }
}

fn check_normal(n: [f64; 2]) -> Result<()> {
    if ((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("normal ({}, {}) is not a unit vector", n[0], n[1])));
    }
    Ok(())
}

/// Vector flux `(g_L + g_R)/2 m + lambda/2 P (u_L - u_R)` where `m` is `n` or
/// `n_perp = (-n_y, n_x)` and `P` is the diffusion projector of the family.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn vector_flux(
    family: FluxFamily,
    lambda: f64,
    g_l: f64,
    g_r: f64,
    u_l: [f64; 2],
    u_r: [f64; 2],
    n: [f64; 2],
    direction: FluxDirection,
) -> [f64; 2] {
    let g = 0.5 * (g_l + g_r);
    let m = match direction {
        FluxDirection::Normal => n,
        FluxDirection::Tangential => [-n[1], n[0]],
    };
    let d = [u_l[0] - u_r[0], u_l[1] - u_r[1]];
    let dn = d[0] * n[0] + d[1] * n[1];
    let normal = [dn * n[0], dn * n[1]];
    let diff = match (family, direction) {
        (FluxFamily::LaxFriedrich, _) => d,
        (FluxFamily::LfNormalDiffusion, _) | (FluxFamily::Godunov, FluxDirection::Normal) => normal,
        (FluxFamily::LfTangentialDiffusion, _) | (FluxFamily::Godunov, FluxDirection::Tangential) => {
            [d[0] - normal[0], d[1] - normal[1]]
        }
    };
    let h = 0.5 * lambda;
    [g * m[0] + h * diff[0], g * m[1] + h * diff[1]]
}

/// Checked form of [`vector_flux`].
pub fn vector_numerical_flux(
    spec: &FluxSpec,
    g_l: f64,
    g_r: f64,
    u_l: [f64; 2],
    u_r: [f64; 2],
    n: [f64; 2],
    direction: FluxDirection,
) -> Result<[f64; 2]> {
    check_normal(n)?;
    Ok(vector_flux(spec.family, spec.lambda, g_l, g_r, u_l, u_r, n, direction))
}

/// Upwind flux of the scalar equation: `avg(u) . n + c/2 (p_L - p_R)` for the
/// wave system, `avg(e) . n_perp + c/2 (b_L - b_R)` for Maxwell.
#[inline]
pub fn scalar_flux(system: &SystemDef, p_l: f64, p_r: f64, u_l: [f64; 2], u_r: [f64; 2], n: [f64; 2]) -> f64 {
    let avg = [0.5 * (u_l[0] + u_r[0]), 0.5 * (u_l[1] + u_r[1])];
    match system {
        SystemDef::Wave { c } => avg[0] * n[0] + avg[1] * n[1] + 0.5 * c * (p_l - p_r),
        SystemDef::Maxwell { c } => -avg[0] * n[1] + avg[1] * n[0] + 0.5 * c * (p_l - p_r),
        SystemDef::Induction { .. } => 0.0,
    }
}

/// Checked form of [`scalar_flux`]; the family does not enter the scalar flux.
pub fn scalar_numerical_flux(
    system: &SystemDef,
    _spec: &FluxSpec,
    left: (f64, [f64; 2]),
    right: (f64, [f64; 2]),
    n: [f64; 2],
) -> Result<f64> {
    if !system.has_scalar() {
        return Err(invalid("the induction system has no scalar unknown"));
    }
    check_normal(n)?;
    Ok(scalar_flux(system, left.0, right.0, left.1, right.1, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    MaxwellStationary,
    MaxwellWavetrain,
    MaxwellWavetrainPlusVortex,
    WaveStationary,
    WaveWavetrain,
    WaveWavetrainPlusVortex,
    InductionRotatingLoop,
    InductionDiscontinuousLoop,
}

impl CaseId {
    pub const ALL: [CaseId; 8] = [
        CaseId::MaxwellStationary,
        CaseId::MaxwellWavetrain,
        CaseId::MaxwellWavetrainPlusVortex,
        CaseId::WaveStationary,
        CaseId::WaveWavetrain,
        CaseId::WaveWavetrainPlusVortex,
        CaseId::InductionRotatingLoop,
        CaseId::InductionDiscontinuousLoop,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CaseId::MaxwellStationary => "maxwell_stationary",
            CaseId::MaxwellWavetrain => "maxwell_wavetrain",
            CaseId::MaxwellWavetrainPlusVortex => "maxwell_wavetrain_plus_vortex",
            CaseId::WaveStationary => "wave_stationary",
            CaseId::WaveWavetrain => "wave_wavetrain",
            CaseId::WaveWavetrainPlusVortex => "wave_wavetrain_plus_vortex",
            CaseId::InductionRotatingLoop => "induction_rotating_loop",
            CaseId::InductionDiscontinuousLoop => "induction_discontinuous_loop",
        }
    }

    pub fn parse(s: &str) -> Result<CaseId> {
        CaseId::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| invalid(format!("unknown case `{s}`")))
    }
}

/// Parameters of a test case. `omega = None` derives the frequency from the
/// wave numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseParams {
    pub c: f64,
    pub k_par: f64,
    pub k_perp: f64,
    pub omega: Option<f64>,
    pub k0: f64,
    pub alpha: f64,
    pub r0: f64,
    pub center: [f64; 2],
    /// Parameters of the compact vortex added to the wave trains.
    pub vortex_k0: f64,
    pub vortex_alpha: f64,
    pub vortex_r0: f64,
    pub vortex_center: [f64; 2],
    pub t_final: f64,
}

impl CaseParams {
    pub fn defaults(id: CaseId) -> CaseParams {
        let base = CaseParams {
            c: 1.0,
            k_par: 2.0,
            k_perp: 2.0,
            omega: None,
            k0: 0.0,
            alpha: 4.0,
            r0: 0.15,
            center: [0.5, 0.5],
            vortex_k0: 100.0,
            vortex_alpha: 4.0,
            vortex_r0: 0.35,
            vortex_center: [0.5, 0.5],
            t_final: 1.0,
        };
        match id {
            CaseId::MaxwellStationary | CaseId::WaveStationary => CaseParams { t_final: 3.0, ..base },
            CaseId::InductionRotatingLoop => {
                CaseParams { k0: 2.0, alpha: 4.0, r0: 0.125, center: [0.5, 0.75], t_final: PI, ..base }
            }
            CaseId::InductionDiscontinuousLoop => CaseParams { k0: 0.01, r0: 0.3, t_final: 2.0, ..base },
            _ => base,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestCase {
    pub id: CaseId,
    pub system: SystemDef,
    pub params: CaseParams,
    /// Angular frequency of the wave trains.
    pub omega: f64,
}

/// Rotation center and unit angular speed of the rotating-loop field.
pub const ROTATION_CENTER: [f64; 2] = [0.5, 0.5];

pub fn make_test_case(id: CaseId, params: Option<CaseParams>) -> Result<TestCase> {
    let p = params.unwrap_or_else(|| CaseParams::defaults(id));
    if !(p.c > 0.0) {
        return Err(invalid("wave speed must be positive"));
    }
    let derived = PI * p.c * (p.k_par * p.k_par + p.k_perp * p.k_perp).sqrt();
    let omega = match p.omega {
        Some(w) if (w - derived).abs() > 1e-12 * derived.max(1.0) => {
            return Err(Error::InvalidArgument(format!(
                "omega = {w} violates omega^2 = pi^2 c^2 (k_par^2 + k_perp^2) (expected {derived})"
            )))
        }
        _ => derived,
    };
    let system = match id {
        CaseId::MaxwellStationary | CaseId::MaxwellWavetrain | CaseId::MaxwellWavetrainPlusVortex => {
            SystemDef::Maxwell { c: p.c }
        }
        CaseId::WaveStationary | CaseId::WaveWavetrain | CaseId::WaveWavetrainPlusVortex => SystemDef::Wave { c: p.c },
        CaseId::InductionRotatingLoop => {
            SystemDef::Induction { b: AdvectingField::Rotation { center: ROTATION_CENTER, omega: 1.0 } }
        }
        CaseId::InductionDiscontinuousLoop => SystemDef::Induction { b: AdvectingField::Constant([1.0, 1.0]) },
    };
    Ok(TestCase { id, system, params: p, omega })
}

/// `exp(-alpha / (1 - r^2))` and its gradient factor for `r < 1`, else zeros.
fn bump(alpha: f64, rb2: f64) -> (f64, f64) {
    if rb2 >= 1.0 {
        return (0.0, 0.0);
    }
    let s = 1.0 - rb2;
    let e = (-alpha / s).exp();
    (e, e / (s * s))
}

impl TestCase {
    fn local(&self, x: [f64; 2], center: [f64; 2], r0: f64) -> (f64, f64, f64) {
        let xb = (x[0] - center[0]) / r0;
        let yb = (x[1] - center[1]) / r0;
        (xb, yb, xb * xb + yb * yb)
    }

    fn vortex(&self, x: [f64; 2], rotated: bool) -> [f64; 2] {
        let p = &self.params;
        let (xb, yb, rb2) = self.local(x, p.vortex_center, p.vortex_r0);
        let (_, f) = bump(p.vortex_alpha, rb2);
        let a = 2.0 * p.vortex_k0 * p.vortex_alpha * f;
        if rotated {
            [-a * yb, a * xb]
        } else {
            [a * xb, a * yb]
        }
    }

    /// Scalar unknown (`p` or `b`) at a point of the fundamental domain.
    pub fn scalar_exact(&self, x: [f64; 2], t: f64) -> f64 {
        let p = &self.params;
        let (kpar, kperp, w, c2) = (p.k_par * PI, p.k_perp * PI, self.omega, p.c * p.c);
        match self.id {
            CaseId::MaxwellWavetrain | CaseId::MaxwellWavetrainPlusVortex => {
                w / c2 * (kperp * x[1]).cos() * (kpar * x[0] - w * t).sin()
            }
            CaseId::WaveWavetrain | CaseId::WaveWavetrainPlusVortex => {
                w / c2 * (kperp * x[1] - w * t).sin() * (kpar * x[0]).cos()
            }
            _ => 0.0,
        }
    }

    /// Vector unknown (`u` or `e`) at a point of the fundamental domain.
    pub fn vector_exact(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let p = &self.params;
        let (kpar, kperp, w) = (p.k_par * PI, p.k_perp * PI, self.omega);
        match self.id {
            CaseId::MaxwellStationary | CaseId::WaveStationary => {
                let (xb, yb, rb2) = self.local(x, p.center, p.r0);
                let e = (-0.5 * rb2).exp();
                if self.id == CaseId::MaxwellStationary {
                    [xb * e, yb * e]
                } else {
                    [-yb * e, xb * e]
                }
            }
            CaseId::MaxwellWavetrain | CaseId::MaxwellWavetrainPlusVortex => {
                let th = kpar * x[0] - w * t;
                let mut v = [-kperp * (kperp * x[1]).sin() * th.cos(), kpar * (kperp * x[1]).cos() * th.sin()];
                if self.id == CaseId::MaxwellWavetrainPlusVortex {
                    let a = self.vortex(x, false);
                    v = [v[0] + a[0], v[1] + a[1]];
                }
                v
            }
            CaseId::WaveWavetrain | CaseId::WaveWavetrainPlusVortex => {
                let ph = kperp * x[1] - w * t;
                let mut v = [kpar * ph.cos() * (kpar * x[0]).sin(), kperp * ph.sin() * (kpar * x[0]).cos()];
                if self.id == CaseId::WaveWavetrainPlusVortex {
                    let a = self.vortex(x, true);
                    v = [v[0] + a[0], v[1] + a[1]];
                }
                v
            }
            CaseId::InductionRotatingLoop => {
                // R(-t) u0(R(t) x) about the rotation center.
                let (s, c) = t.sin_cos();
                let d = [x[0] - ROTATION_CENTER[0], x[1] - ROTATION_CENTER[1]];
                let y = [ROTATION_CENTER[0] + c * d[0] - s * d[1], ROTATION_CENTER[1] + s * d[0] + c * d[1]];
                let u = self.loop_field(y);
                [c * u[0] + s * u[1], -s * u[0] + c * u[1]]
            }
            CaseId::InductionDiscontinuousLoop => {
                let b = match self.system {
                    SystemDef::Induction { b } => b.at(x),
                    _ => [0.0, 0.0],
                };
                let y = [(x[0] + b[0] * t).rem_euclid(1.0), (x[1] + b[1] * t).rem_euclid(1.0)];
                self.loop_field(y)
            }
        }
    }

    fn loop_field(&self, x: [f64; 2]) -> [f64; 2] {
        let p = &self.params;
        let (xb, yb, rb2) = self.local(x, p.center, p.r0);
        match self.id {
            CaseId::InductionRotatingLoop => {
                let (_, f) = bump(p.alpha, rb2);
                let a = 2.0 * p.k0 * p.alpha * f;
                [-a * yb, a * xb]
            }
            _ => {
                if rb2 < 1.0 {
                    [-p.k0 * yb, p.k0 * xb]
                } else {
                    [0.0, 0.0]
                }
            }
        }
    }

    /// Potential `f0` with `grad_perp f0` equal to the initial vector field,
    /// for the induction cases.
    pub fn potential(&self, x: [f64; 2]) -> Option<f64> {
        let p = &self.params;
        let (_, _, rb2) = self.local(x, p.center, p.r0);
        match self.id {
            CaseId::InductionRotatingLoop => Some(-p.k0 * p.r0 * bump(p.alpha, rb2).0),
            CaseId::InductionDiscontinuousLoop => Some(0.5 * p.k0 * p.r0 * rb2.min(1.0)),
            _ => None,
        }
    }

    pub fn t_final(&self) -> f64 {
        self.params.t_final
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trips() {
        for id in CaseId::ALL {
            assert_eq!(CaseId::parse(id.name()).unwrap(), id);
        }
        assert!(CaseId::parse("euler_vortex").is_err());
        for f in [FluxFamily::Godunov, FluxFamily::LaxFriedrich, FluxFamily::LfNormalDiffusion, FluxFamily::LfTangentialDiffusion] {
            assert_eq!(FluxFamily::parse(f.name()).unwrap(), f);
        }
    }

    #[test]
    fn non_unit_normal_is_rejected() {
        let spec = FluxSpec { family: FluxFamily::Godunov, lambda: 1.0 };
        assert!(vector_numerical_flux(&spec, 0.0, 0.0, [0.0; 2], [0.0; 2], [1.0, 1.0], FluxDirection::Normal).is_err());
    }

    #[test]
    fn induction_has_no_scalar_flux() {
        let sys = SystemDef::Induction { b: AdvectingField::Constant([1.0, 1.0]) };
        let spec = FluxSpec { family: FluxFamily::Godunov, lambda: 1.0 };
        assert!(scalar_numerical_flux(&sys, &spec, (0.0, [0.0; 2]), (0.0, [0.0; 2]), [1.0, 0.0]).is_err());
    }

    #[test]
    fn loop_potential_matches_field() {
        for id in [CaseId::InductionRotatingLoop, CaseId::InductionDiscontinuousLoop] {
            let tc = make_test_case(id, None).unwrap();
            let h = 1e-6;
            for x in [[0.52, 0.78], [0.45, 0.7], [0.6, 0.55]] {
                let f = |y: [f64; 2]| tc.potential(y).unwrap();
                let dx = (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h);
                let dy = (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h);
                let u = tc.vector_exact(x, 0.0);
                assert!((u[0] + dy).abs() < 1e-6 && (u[1] - dx).abs() < 1e-6, "{id:?}");
            }
        }
    }
}
