//! Configuration-driven commands: mesh generation, single runs, convergence
//! studies and the operator property suite.

mod output;
mod properties;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};
use serde::Serialize;

use crate::diagnostics::ConvergenceTable;
use crate::error::{invalid, Error, Result};
use crate::mesh::{generate_cartesian, generate_perturbed_quad, load_mesh, save_mesh, split_into_triangles, Mesh};
use crate::solver::{run_case, InitKind, Probes, RunConfig, RunResult, TimeIntegrator};
use crate::spaces::Family;
use crate::systems::{make_test_case, CaseId, FluxFamily, FluxSpec, SystemDef};

pub use output::{drift_csv, energy_csv, errors_csv, vtk_fields};
pub use properties::{is_affine, property_suite, PropertyCheck};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    Cartesian,
    Perturbed,
    Triangles,
}

impl MeshKind {
    pub fn parse(s: &str) -> Result<MeshKind> {
        match s {
            "cartesian" => Ok(MeshKind::Cartesian),
            "perturbed" => Ok(MeshKind::Perturbed),
            "triangles" => Ok(MeshKind::Triangles),
            _ => Err(invalid(format!("unknown mesh kind `{s}` (cartesian, perturbed, triangles)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MeshSource {
    Generated { kind: MeshKind, nx: usize, ny: usize, perturb: f64, seed: u64 },
    File(PathBuf),
}

/// Builds a generated mesh on the unit torus. Triangle meshes split a
/// perturbed quad mesh with the same seed.
pub fn generate_mesh(kind: MeshKind, nx: usize, ny: usize, perturb: f64, seed: u64) -> Result<Mesh> {
    match kind {
        MeshKind::Cartesian => generate_cartesian(nx, ny, 1.0, 1.0),
        MeshKind::Perturbed => generate_perturbed_quad(nx, ny, perturb, seed),
        MeshKind::Triangles => split_into_triangles(&generate_perturbed_quad(nx, ny, perturb, seed)?, seed),
    }
}

impl MeshSource {
    pub fn build(&self) -> Result<Mesh> {
        match self {
            MeshSource::Generated { kind, nx, ny, perturb, seed } => generate_mesh(*kind, *nx, *ny, *perturb, *seed),
            MeshSource::File(p) => load_mesh(&fs::read_to_string(p)?),
        }
    }
}

pub fn parse_space(s: &str) -> Result<Family> {
    match s.to_ascii_lowercase().as_str() {
        "dbdiv" => Ok(Family::VectorDivOptimal),
        "dbcurl" => Ok(Family::VectorCurlOptimal),
        "dq" | "tensor" => Ok(Family::VectorTensor),
        _ => Err(invalid(format!("unknown space `{s}` (dBdiv, dBcurl, dQ)"))),
    }
}

pub fn space_name(f: Family) -> &'static str {
    match f {
        Family::VectorDivOptimal => "dBdiv",
        Family::VectorCurlOptimal => "dBcurl",
        Family::VectorTensor => "dQ",
        _ => "other",
    }
}

/// A validated configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub case: CaseId,
    pub mesh: MeshSource,
    pub space: Family,
    pub degree: usize,
    pub flux: FluxFamily,
    pub rk_order: usize,
    pub cfl: f64,
    pub t_final: f64,
    pub stride: usize,
    pub out: Option<PathBuf>,
    /// Mesh sizes `nx = ny` for convergence studies.
    pub ladder: Vec<usize>,
    pub init: InitKind,
    /// Every key as given, for the manifest.
    pub entries: BTreeMap<String, String>,
}

const KEYS: [&str; 17] = [
    "case", "mesh.kind", "mesh.nx", "mesh.ny", "mesh.file", "mesh.perturb", "mesh.seed", "space", "degree", "flux",
    "rk_order", "cfl", "t_final", "stride", "out", "ladder", "init",
];

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| invalid(format!("invalid value `{v}` for `{key}`")))
}

/// Parses `key=value` lines with `#` comments. Returns the configuration
/// and any warnings about physically inconsistent choices.
pub fn parse_config(text: &str) -> Result<(AppConfig, Vec<String>)> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, message: format!("expected key=value, got `{line}`") })?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Parse { line: i + 1, message: format!("unknown key `{k}`") });
        }
        if entries.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Parse { line: i + 1, message: format!("duplicate key `{k}`") });
        }
    }
    let get = |k: &str| entries.get(k).map(String::as_str);
    let required = |k: &str| get(k).ok_or_else(|| invalid(format!("missing required key `{k}`")));

    let case = CaseId::parse(required("case")?)?;
    let mesh = match (get("mesh.file"), get("mesh.kind")) {
        (Some(_), Some(_)) => return Err(invalid("give either mesh.file or mesh.kind, not both")),
        (Some(f), None) => MeshSource::File(PathBuf::from(f)),
        (None, Some(kind)) => {
            let kind = MeshKind::parse(kind)?;
            let nx: usize = number("mesh.nx", required("mesh.nx")?)?;
            let ny = match get("mesh.ny") {
                Some(v) => number("mesh.ny", v)?,
                None => nx,
            };
            let perturb = match get("mesh.perturb") {
                Some(v) => number("mesh.perturb", v)?,
                None if kind == MeshKind::Cartesian => 0.0,
                None => 0.2,
            };
            let seed = get("mesh.seed").map(|v| number("mesh.seed", v)).transpose()?.unwrap_or(42);
            MeshSource::Generated { kind, nx, ny, perturb, seed }
        }
        (None, None) => return Err(invalid("missing required key `mesh.kind` (or `mesh.file`)")),
    };
    let space = parse_space(required("space")?)?;
    let degree: usize = number("degree", required("degree")?)?;
    if degree > 2 {
        return Err(Error::Unsupported(format!("degree {degree} (supported: 0, 1, 2)")));
    }
    let flux = FluxFamily::parse(required("flux")?)?;
    let defaults = TimeIntegrator::default_for_degree(degree);
    let rk_order = get("rk_order").map(|v| number("rk_order", v)).transpose()?.unwrap_or(defaults.order);
    if !(1..=3).contains(&rk_order) {
        return Err(invalid(format!("rk_order {rk_order} (supported: 1, 2, 3)")));
    }
    let cfl: f64 = get("cfl").map(|v| number("cfl", v)).transpose()?.unwrap_or(defaults.cfl);
    if !(cfl > 0.0) {
        return Err(invalid("cfl must be positive"));
    }
    let test_case = make_test_case(case, None)?;
    let t_final: f64 = get("t_final").map(|v| number("t_final", v)).transpose()?.unwrap_or(test_case.t_final());
    if !(t_final > 0.0) {
        return Err(invalid("t_final must be positive"));
    }
    let stride = get("stride").map(|v| number("stride", v)).transpose()?.unwrap_or(1usize).max(1);
    let out = get("out").map(PathBuf::from);
    let ladder = match get("ladder") {
        Some(v) => v.split(',').map(|s| number::<usize>("ladder", s.trim())).collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let is_induction = matches!(test_case.system, SystemDef::Induction { .. });
    let init = match get("init") {
        Some("divfree") => InitKind::DivergenceFree,
        Some("l2") => InitKind::L2Projection,
        Some(v) => return Err(invalid(format!("unknown init `{v}` (divfree, l2)"))),
        None if is_induction && space == Family::VectorCurlOptimal => InitKind::DivergenceFree,
        None => InitKind::L2Projection,
    };
    if init == InitKind::DivergenceFree && !(is_induction && space == Family::VectorCurlOptimal) {
        return Err(invalid("init=divfree needs an induction case and the dBcurl space"));
    }

    let mut warnings = Vec::new();
    let spec = FluxSpec::for_system(flux, &test_case.system);
    if !spec.preserves_constraint(&test_case.system) {
        let what = match test_case.system {
            SystemDef::Wave { .. } => "the adjoint curl",
            _ => "the adjoint divergence",
        };
        warnings.push(format!("flux {} does not preserve {what} for case {}", flux.name(), case.name()));
    }
    let natural = match test_case.system {
        SystemDef::Wave { .. } => Family::VectorDivOptimal,
        _ => Family::VectorCurlOptimal,
    };
    if space != natural {
        warnings.push(format!("space {} does not preserve the constraint of case {}", space_name(space), case.name()));
    }
    let cfg = AppConfig {
        case,
        mesh,
        space,
        degree,
        flux,
        rk_order,
        cfl,
        t_final,
        stride,
        out,
        ladder,
        init,
        entries,
    };
    Ok((cfg, warnings))
}

impl AppConfig {
    pub fn run_config(&self) -> Result<RunConfig> {
        let case = make_test_case(self.case, None)?;
        let mut rc = RunConfig::new(case, self.degree, self.space, self.flux);
        rc.integrator = TimeIntegrator { order: self.rk_order, cfl: self.cfl };
        rc.t_final = self.t_final;
        rc.init = self.init;
        rc.probes = Probes { stride: self.stride, ..Probes::default() };
        Ok(rc)
    }

    fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf).or_else(|| self.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a BTreeMap<String, String>,
    resolved: Resolved,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<RunSummary>,
}

#[derive(Debug, Serialize)]
struct Resolved {
    case: &'static str,
    mesh: MeshSource,
    space: &'static str,
    degree: usize,
    flux: &'static str,
    rk_order: usize,
    cfl: f64,
    t_final: f64,
    stride: usize,
    init: &'static str,
    ladder: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    n_cells: usize,
    h_min: f64,
    dt: f64,
    steps: usize,
    initial_energy: f64,
}

fn manifest_json(cfg: &AppConfig, command: &str, run: Option<RunSummary>) -> Result<String> {
    let m = Manifest {
        program: "dgcomplex",
        version: VERSION,
        command,
        config: &cfg.entries,
        resolved: Resolved {
            case: cfg.case.name(),
            mesh: cfg.mesh.clone(),
            space: space_name(cfg.space),
            degree: cfg.degree,
            flux: cfg.flux.name(),
            rk_order: cfg.rk_order,
            cfl: cfg.cfl,
            t_final: cfg.t_final,
            stride: cfg.stride,
            init: match cfg.init {
                InitKind::DivergenceFree => "divfree",
                InitKind::L2Projection => "l2",
            },
            ladder: cfg.ladder.clone(),
        },
        run,
    };
    serde_json::to_string_pretty(&m).map_err(|e| invalid(format!("manifest serialization: {e}")))
}

fn write(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::write(dir.join(name), content)?;
    Ok(())
}

/// Writes `mesh.txt` and returns the validation report.
pub fn cmd_mesh_gen(cfg: &AppConfig, out: Option<&Path>) -> Result<crate::mesh::ValidationReport> {
    let dir = cfg.out_dir(out);
    fs::create_dir_all(&dir)?;
    let mesh = cfg.mesh.build()?;
    let report = mesh.validate();
    write(&dir, "mesh.txt", &save_mesh(&mesh))?;
    write(&dir, "manifest.json", &manifest_json(cfg, "mesh-gen", None)?)?;
    info!("mesh with {} cells written to {}", mesh.n_cells(), dir.display());
    Ok(report)
}

/// Runs one case and writes the CSV series, the fields and the manifest.
pub fn cmd_run(cfg: &AppConfig, out: Option<&Path>) -> Result<RunResult> {
    let dir = cfg.out_dir(out);
    fs::create_dir_all(&dir)?;
    let mesh = Arc::new(cfg.mesh.build()?);
    let rc = cfg.run_config()?;
    info!("running {} on {} cells", cfg.case.name(), mesh.n_cells());
    let result = run_case(&rc, mesh.clone())?;
    write(&dir, "drift.csv", &drift_csv(&result))?;
    write(&dir, "energy.csv", &energy_csv(&result))?;
    write(&dir, "errors.csv", &errors_csv(&result))?;
    write(&dir, "fields.vtk", &vtk_fields(&result.state, cfg.case.name()))?;
    let summary = RunSummary {
        n_cells: mesh.n_cells(),
        h_min: mesh.h_min(),
        dt: result.dt,
        steps: result.steps,
        initial_energy: result.initial_energy,
    };
    write(&dir, "manifest.json", &manifest_json(cfg, "run", Some(summary))?)?;
    Ok(result)
}

/// Runs the case on every ladder mesh and writes `table.csv`.
pub fn cmd_convergence(cfg: &AppConfig, out: Option<&Path>) -> Result<ConvergenceTable> {
    let (kind, perturb, seed) = match &cfg.mesh {
        MeshSource::Generated { kind, perturb, seed, .. } => (*kind, *perturb, *seed),
        MeshSource::File(_) => return Err(invalid("convergence studies need a generated mesh kind")),
    };
    if cfg.ladder.len() < 2 {
        return Err(invalid("convergence studies need a ladder of at least two sizes"));
    }
    let dir = cfg.out_dir(out);
    fs::create_dir_all(&dir)?;
    let mut rc = cfg.run_config()?;
    rc.probes = Probes { stride: usize::MAX, drift: false, energy: false, errors: true };
    let mut hs = Vec::new();
    let mut errors = Vec::new();
    let mut names = Vec::new();
    for &n in &cfg.ladder {
        let mesh = Arc::new(generate_mesh(kind, n, n, perturb, seed)?);
        info!("convergence run on {n}x{n}");
        let r = run_case(&rc, mesh)?;
        names = r.errors.iter().map(|(n, _)| n.clone()).collect();
        hs.push(r.h_min);
        errors.push(r.errors.iter().map(|(_, e)| *e).collect());
    }
    let table = ConvergenceTable::new(names, &hs, &errors)?;
    write(&dir, "table.csv", &table.to_csv())?;
    write(&dir, "manifest.json", &manifest_json(cfg, "convergence", None)?)?;
    Ok(table)
}

/// Runs the property suite on the configured mesh and writes
/// `properties.json`.
pub fn cmd_properties(cfg: &AppConfig, out: Option<&Path>) -> Result<Vec<PropertyCheck>> {
    let dir = cfg.out_dir(out);
    fs::create_dir_all(&dir)?;
    let mesh = Arc::new(cfg.mesh.build()?);
    let seed = match cfg.mesh {
        MeshSource::Generated { seed, .. } => seed,
        MeshSource::File(_) => 42,
    };
    let checks = property_suite(mesh, &[0, 1, 2], seed)?;
    let json = serde_json::to_string_pretty(&checks).map_err(|e| invalid(format!("report serialization: {e}")))?;
    write(&dir, "properties.json", &json)?;
    for c in checks.iter().filter(|c| !c.passed) {
        warn!("property {} (k={}) failed: residual {:e} > {:e}", c.name, c.degree, c.residual, c.tolerance);
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "case=wave_stationary\nmesh.kind=cartesian\nmesh.nx=10\nmesh.ny=10\nspace=dBdiv\ndegree=2\nflux=godunov";

    #[test]
    fn defaults_follow_the_degree() {
        let (cfg, warnings) = parse_config(BASE).unwrap();
        assert_eq!(cfg.cfl, 0.2);
        assert_eq!(cfg.rk_order, 3);
        assert_eq!(cfg.t_final, 3.0);
        assert!(warnings.is_empty());
    }

    #[test]
    fn rejects_degree_three_and_unknown_keys() {
        assert!(parse_config(&BASE.replace("degree=2", "degree=3")).is_err());
        assert!(parse_config(&format!("{BASE}\ncolour=blue")).is_err());
        assert!(parse_config(&BASE.replace("flux=godunov", "flux=roe")).is_err());
        assert!(parse_config(&BASE.replace("case=wave_stationary\n", "")).is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# a run\n\n{BASE}  # trailing\n");
        assert!(parse_config(&text).is_ok());
    }

    #[test]
    fn warns_on_wrong_diffusion_direction() {
        let text = BASE.replace("wave_stationary", "maxwell_stationary").replace("dBdiv", "dBcurl").replace("godunov", "lf_normal");
        let (_, warnings) = parse_config(&text).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("lf_normal"));
    }

    #[test]
    fn divfree_init_is_the_induction_default() {
        let text = "case=induction_rotating_loop\nmesh.kind=triangles\nmesh.nx=4\nspace=dBcurl\ndegree=1\nflux=lf_tangential";
        let (cfg, _) = parse_config(text).unwrap();
        assert_eq!(cfg.init, InitKind::DivergenceFree);
        assert!(parse_config(&format!("{BASE}\ninit=divfree")).is_err());
    }
}
