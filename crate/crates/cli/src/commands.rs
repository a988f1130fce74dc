//! The four subcommands. Each writes its report to `out` and returns the
//! outcome; file outputs go to the path given.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use isogeo_core::hypersurface::HypersurfaceError;
use isogeo_core::projection::{self, ProjectionError};
use isogeo_core::{linspace, ConditionReport, CurveError, FrenetFrame, SurfaceParam, ValidationReport};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, Scalar, Scene};

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("degenerate frame: {0}")]
    Degenerate(String),
    #[error("validation failed: {}", .0.join(", "))]
    Validation(Vec<String>),
    #[error("writing {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error("writing report: {0}")]
    Report(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Output { .. } | CliError::Report(_) => EXIT_IO,
        }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        if e.is_degenerate() {
            CliError::Degenerate(e.to_string())
        } else {
            CliError::Config(e.into())
        }
    }
}

impl From<HypersurfaceError> for CliError {
    fn from(e: HypersurfaceError) -> Self {
        match e {
            HypersurfaceError::Curve(c) => c.into(),
            e => CliError::Config(e.into()),
        }
    }
}

impl From<ProjectionError> for CliError {
    fn from(e: ProjectionError) -> Self {
        match e {
            ProjectionError::Surface(h) => h.into(),
            e => CliError::Config(ConfigError::Value { field: "projection".into(), message: e.to_string() }),
        }
    }
}

/// One row of `frenet` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRow {
    pub s: f64,
    pub t: [f64; 4],
    pub n: [f64; 4],
    pub b: [f64; 4],
    pub e: [f64; 4],
    pub kappa: f64,
    pub tau: f64,
    pub sigma: f64,
    pub mu: i8,
    pub det: f64,
}

impl From<&FrenetFrame> for FrameRow {
    fn from(f: &FrenetFrame) -> Self {
        FrameRow {
            s: f.s,
            t: f.t.to_array(),
            n: f.n.to_array(),
            b: f.b.to_array(),
            e: f.e.to_array(),
            kappa: f.kappa,
            tau: f.tau,
            sigma: f.sigma,
            mu: f.mu,
            det: f.det(),
        }
    }
}

fn tuple(v: [f64; 4]) -> String {
    format!("({:?}, {:?}, {:?}, {:?})", v[0], v[1], v[2], v[3])
}

/// `frenet`: frames at the requested `s` values, or on the `n_s` grid.
pub fn frenet(scene: &Scene, s_list: &[Scalar], json: bool, out: &mut dyn Write) -> Result<Vec<FrameRow>, CliError> {
    let curve = scene.curve();
    let s_values = if s_list.is_empty() {
        linspace(curve.s_min(), curve.s_max(), scene.grid.n_s)
    } else {
        s_list.iter().map(|s| s.resolve("--s")).collect::<Result<Vec<_>, _>>()?
    };
    if let Some(&s) = s_values.iter().find(|&&s| !curve.contains(s)) {
        return Err(ConfigError::from(CurveError::OutOfDomain { s, s_min: curve.s_min(), s_max: curve.s_max() }).into());
    }
    let mut rows = Vec::with_capacity(s_values.len());
    for s in s_values {
        rows.push(FrameRow::from(&curve.frenet_frame(s)?));
    }
    if json {
        serde_json::to_writer_pretty(&mut *out, &rows).map_err(io::Error::from)?;
        writeln!(out)?;
    } else {
        for r in &rows {
            writeln!(
                out,
                "s = {:?}  kappa = {:?}  tau = {:?}  sigma = {:?}  mu = {}  det = {:?}",
                r.s, r.kappa, r.tau, r.sigma, r.mu, r.det
            )?;
            for (name, v) in [("t", r.t), ("n", r.n), ("b", r.b), ("e", r.e)] {
                writeln!(out, "  {name} = {}", tuple(v))?;
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateOutput {
    pub pass: bool,
    pub checker: Option<ConditionReport>,
    pub validation: ValidationReport,
}

impl ValidateOutput {
    /// Failed clause names, checker first, prefixed by their origin.
    pub fn failed(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checker
            .iter()
            .flat_map(|c| c.failed().into_iter().map(move |n| format!("{}.{n}", c.kind)))
            .collect();
        out.extend(self.validation.failed_clauses().into_iter().map(|n| format!("theorem.{n}")));
        out
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// `validate`: the type-specific checker (separable bundles only) and the
/// generic φ/parallelism validation. Fails unless both pass; the report is
/// written either way.
pub fn validate(scene: &Scene, json: bool, out: &mut dyn Write) -> Result<ValidateOutput, CliError> {
    let n = scene.grid.n_s;
    let validation = scene.patch.validate_isogeodesic(n, scene.tolerances)?;
    let checker = scene.patch.check_conditions(n, scene.tolerances.exact);
    let pass = validation.theorem_pass && checker.as_ref().is_none_or(ConditionReport::pass);
    let report = ValidateOutput { pass, checker, validation };

    if json {
        serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::from)?;
        writeln!(out)?;
    } else {
        write_pretty(&report, out)?;
    }
    if report.pass {
        Ok(report)
    } else {
        Err(CliError::Validation(report.failed()))
    }
}

fn write_pretty(r: &ValidateOutput, out: &mut dyn Write) -> io::Result<()> {
    match &r.checker {
        None => writeln!(out, "checker: none (generic bundle)")?,
        Some(c) => {
            writeln!(out, "checker ({}): {}", c.kind, status(c.pass()))?;
            for clause in &c.clauses {
                write!(out, "  {:<20} {}  residual {:?}", clause.name, status(clause.pass), clause.residual)?;
                match &clause.detail {
                    Some(d) => writeln!(out, "  ({d})")?,
                    None => writeln!(out)?,
                }
            }
        }
    }
    let v = &r.validation;
    writeln!(out, "theorem: {}", status(v.theorem_pass))?;
    writeln!(out, "  samples                  {}", v.rows.len())?;
    writeln!(out, "  anchor_vanishing_max     {:?}", v.anchor_vanishing_max)?;
    writeln!(out, "  phi1_max                 {:?}", v.phi1_max)?;
    writeln!(out, "  phi2_min_abs             {:?}", v.phi2_min_abs)?;
    writeln!(out, "  phi2_sign_change         {}", v.phi2_sign_change)?;
    writeln!(out, "  phi3_max                 {:?}", v.phi3_max)?;
    writeln!(out, "  phi4_max                 {:?}", v.phi4_max)?;
    writeln!(out, "  parallelism_residual_max {:?}", v.parallelism_residual_max)?;
    let failed = r.failed();
    writeln!(out, "failed: {}", if failed.is_empty() { "none".to_string() } else { failed.join(", ") })?;
    writeln!(out, "verdict: {}", status(r.pass))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Obj,
    Csv,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

/// Vertex and face counts of a written mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshCounts {
    pub vertices: usize,
    pub faces: usize,
}

/// `project`: samples the projected surface over `s` and the free parameter.
pub fn project(scene: &Scene, path: &Path, format: Format, out: &mut dyn Write) -> Result<MeshCounts, CliError> {
    let proj = scene.projection()?;
    let n_free = match proj.fixed_param {
        SurfaceParam::U => scene.grid.n_v,
        SurfaceParam::V => scene.grid.n_u,
    };
    let grid = projection::sample(&scene.patch, &proj, scene.grid.n_s, n_free)?;
    let mut file = create(path)?;
    let written = match format {
        Format::Obj => projection::export_obj(&grid, &mut file),
        Format::Csv => projection::export_csv(&grid, &mut file),
    };
    written.map_err(|source| CliError::Output { path: path.to_path_buf(), source })?;
    let counts = MeshCounts { vertices: grid.vertices().len(), faces: grid.face_count() };
    writeln!(out, "vertices: {}", counts.vertices)?;
    writeln!(out, "faces: {}", counts.faces)?;
    Ok(counts)
}

/// `sample`: raw 4D points over the full `(s, u, v)` lattice. Returns the row
/// count.
pub fn sample(scene: &Scene, path: &Path, out: &mut dyn Write) -> Result<usize, CliError> {
    let g = scene.grid;
    let samples = projection::sample_lattice(&scene.patch, g.n_s, g.n_u, g.n_v)?;
    let mut file = create(path)?;
    projection::export_points_csv(&samples, &mut file)
        .map_err(|source| CliError::Output { path: path.to_path_buf(), source })?;
    writeln!(out, "rows: {}", samples.len())?;
    Ok(samples.len())
}
