//! Parallel projection of a patch into a coordinate 3-space, lattice sampling
//! and mesh/CSV export.
//!
//! One surface parameter is pinned, the other stays free together with `s`;
//! the resulting 2-parameter surface in 4-space is projected by deleting one
//! ambient coordinate.

use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypersurface::{HypersurfaceError, HypersurfacePatch};
use crate::linspace;

/// Ambient coordinate, in order `(x, y, z, w) = (c1, c2, c3, c4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
    W,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
            Axis::W => 3,
        }
    }
}

impl FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            "w" => Ok(Axis::W),
            _ => Err(format!("unknown axis `{s}`")),
        }
    }
}

/// Surface parameter other than `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceParam {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub drop_axis: Axis,
    pub fixed_param: SurfaceParam,
    pub fixed_value: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("fixed value {value} lies outside [{min}, {max}]")]
    FixedValueOutOfRange { value: f64, min: f64, max: f64 },
    #[error("grid needs at least 2 samples per axis, got {rows}x{cols}")]
    GridTooSmall { rows: usize, cols: usize },
    #[error("grid has {got} vertices, expected {rows}x{cols}")]
    VertexCount { rows: usize, cols: usize, got: usize },
    #[error(transparent)]
    Surface(#[from] HypersurfaceError),
}

impl Projection {
    /// Interval of the free parameter.
    fn free_range(&self, patch: &HypersurfacePatch) -> (f64, f64) {
        let d = patch.domain();
        match self.fixed_param {
            SurfaceParam::U => (d.v_min, d.v_max),
            SurfaceParam::V => (d.u_min, d.u_max),
        }
    }

    fn check(&self, patch: &HypersurfacePatch) -> Result<(), ProjectionError> {
        let d = patch.domain();
        let (min, max) = match self.fixed_param {
            SurfaceParam::U => (d.u_min, d.u_max),
            SurfaceParam::V => (d.v_min, d.v_max),
        };
        if self.fixed_value >= min && self.fixed_value <= max {
            Ok(())
        } else {
            Err(ProjectionError::FixedValueOutOfRange { value: self.fixed_value, min, max })
        }
    }

    fn uv(&self, free: f64) -> (f64, f64) {
        match self.fixed_param {
            SurfaceParam::U => (self.fixed_value, free),
            SurfaceParam::V => (free, self.fixed_value),
        }
    }
}

/// Drops coordinate `axis` from `p`, keeping the order of the rest.
pub fn drop_coordinate(p: [f64; 4], axis: Axis) -> [f64; 3] {
    let k = axis.index();
    let mut out = [0.0; 3];
    let mut j = 0;
    for (i, &x) in p.iter().enumerate() {
        if i != k {
            out[j] = x;
            j += 1;
        }
    }
    out
}

pub fn project_point(
    patch: &HypersurfacePatch,
    proj: &Projection,
    s: f64,
    free: f64,
) -> Result<[f64; 3], ProjectionError> {
    proj.check(patch)?;
    let (u, v) = proj.uv(free);
    let p = patch.surface_point(s, u, v)?;
    Ok(drop_coordinate(p.to_array(), proj.drop_axis))
}

/// Row-major lattice of projected points; row `i` holds `s_i`, column `j` the
/// free parameter value `w_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    rows: usize,
    cols: usize,
    vertices: Vec<[f64; 3]>,
    params: Vec<(f64, f64)>,
}

impl SampleGrid {
    pub fn new(
        rows: usize,
        cols: usize,
        vertices: Vec<[f64; 3]>,
        params: Vec<(f64, f64)>,
    ) -> Result<Self, ProjectionError> {
        if rows < 2 || cols < 2 {
            return Err(ProjectionError::GridTooSmall { rows, cols });
        }
        if vertices.len() != rows * cols || params.len() != rows * cols {
            return Err(ProjectionError::VertexCount { rows, cols, got: vertices.len() });
        }
        Ok(Self { rows, cols, vertices, params })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    /// `(s, free)` for each vertex.
    pub fn params(&self) -> &[(f64, f64)] {
        &self.params
    }

    pub fn vertex(&self, row: usize, col: usize) -> [f64; 3] {
        self.vertices[row * self.cols + col]
    }

    pub fn face_count(&self) -> usize {
        2 * (self.rows - 1) * (self.cols - 1)
    }

    /// Triangles with 1-based vertex indices. Each lattice cell is split along
    /// its `(i, j) -> (i+1, j+1)` diagonal.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let idx = |i: usize, j: usize| i * self.cols + j + 1;
        let mut out = Vec::with_capacity(self.face_count());
        for i in 0..self.rows - 1 {
            for j in 0..self.cols - 1 {
                out.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
                out.push([idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)]);
            }
        }
        out
    }
}

/// Samples `n_s × n_free` points over `[s_min, s_max]` and the free
/// parameter's interval, endpoints included.
pub fn sample(
    patch: &HypersurfacePatch,
    proj: &Projection,
    n_s: usize,
    n_free: usize,
) -> Result<SampleGrid, ProjectionError> {
    if n_s < 2 || n_free < 2 {
        return Err(ProjectionError::GridTooSmall { rows: n_s, cols: n_free });
    }
    proj.check(patch)?;
    let (lo, hi) = proj.free_range(patch);
    let free = linspace(lo, hi, n_free);
    let s_values = linspace(patch.curve().s_min(), patch.curve().s_max(), n_s);
    let mut vertices = Vec::with_capacity(n_s * n_free);
    let mut params = Vec::with_capacity(n_s * n_free);
    for &s in &s_values {
        for &w in &free {
            vertices.push(project_point(patch, proj, s, w)?);
            params.push((s, w));
        }
    }
    SampleGrid::new(n_s, n_free, vertices, params)
}

/// Formats `x` like C's `%.{digits}g`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let precision = digits.max(1) - 1;
    let sci = format!("{:.*e}", precision, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (precision as i32 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Wavefront OBJ with `v` and `f` records only.
pub fn export_obj<W: Write>(grid: &SampleGrid, mut out: W) -> io::Result<()> {
    for p in grid.vertices() {
        writeln!(
            out,
            "v {} {} {}",
            format_significant(p[0], 9),
            format_significant(p[1], 9),
            format_significant(p[2], 9)
        )?;
    }
    for [a, b, c] in grid.triangles() {
        writeln!(out, "f {a} {b} {c}")?;
    }
    out.flush()
}

pub const GRID_CSV_HEADER: &str = "s,param,x,y,z";
pub const POINTS_CSV_HEADER: &str = "s,u,v,x,y,z,w";

/// CSV with header `s,param,x,y,z`, one row per vertex. Numbers use the
/// shortest representation that reads back to the same double.
pub fn export_csv<W: Write>(grid: &SampleGrid, mut out: W) -> io::Result<()> {
    writeln!(out, "{GRID_CSV_HEADER}")?;
    for (p, (s, w)) in grid.vertices().iter().zip(grid.params()) {
        writeln!(out, "{s},{w},{},{},{}", p[0], p[1], p[2])?;
    }
    out.flush()
}

/// A raw surface point with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub point: [f64; 4],
}

/// Evaluates the patch on the full `n_s × n_u × n_v` lattice, `s` outermost.
pub fn sample_lattice(
    patch: &HypersurfacePatch,
    n_s: usize,
    n_u: usize,
    n_v: usize,
) -> Result<Vec<SurfaceSample>, ProjectionError> {
    if n_s < 2 || n_u < 2 || n_v < 2 {
        return Err(ProjectionError::GridTooSmall { rows: n_s, cols: n_u.min(n_v) });
    }
    let d = patch.domain();
    let us = linspace(d.u_min, d.u_max, n_u);
    let vs = linspace(d.v_min, d.v_max, n_v);
    let mut out = Vec::with_capacity(n_s * n_u * n_v);
    for s in linspace(patch.curve().s_min(), patch.curve().s_max(), n_s) {
        for &u in &us {
            for &v in &vs {
                let point = patch.surface_point(s, u, v)?.to_array();
                out.push(SurfaceSample { s, u, v, point });
            }
        }
    }
    Ok(out)
}

/// CSV with header `s,u,v,x,y,z,w`.
pub fn export_points_csv<W: Write>(samples: &[SurfaceSample], mut out: W) -> io::Result<()> {
    writeln!(out, "{POINTS_CSV_HEADER}")?;
    for q in samples {
        let [x, y, z, w] = q.point;
        writeln!(out, "{},{},{},{x},{y},{z},{w}", q.s, q.u, q.v)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> SampleGrid {
        SampleGrid::new(
            2,
            2,
            vec![[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.5]],
            vec![(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0, 9), "0");
        assert_eq!(format_significant(1.0, 9), "1");
        assert_eq!(format_significant(-2.5, 9), "-2.5");
        assert_eq!(format_significant(std::f64::consts::PI, 9), "3.14159265");
        assert_eq!(format_significant(123456789.4, 9), "123456789");
        assert_eq!(format_significant(1234567891.0, 9), "1.23456789e+09");
        assert_eq!(format_significant(0.0001234, 9), "0.0001234");
        assert_eq!(format_significant(0.00001234, 9), "1.234e-05");
        assert_eq!(format_significant(-1e-300, 9), "-1e-300");
        assert_eq!(format_significant(0.1 + 0.2, 9), "0.3");
    }

    #[test]
    fn obj_of_single_cell() {
        let mut buf = Vec::new();
        export_obj(&small_grid(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "v 0 0 0\nv 0 1 0\nv 1 0 0\nv 1 1 0.5\nf 1 2 4\nf 1 4 3\n");
    }

    #[test]
    fn csv_of_single_cell() {
        let mut buf = Vec::new();
        export_csv(&small_grid(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "s,param,x,y,z");
        assert_eq!(lines[4], "1,1,1,1,0.5");
    }

    #[test]
    fn grid_shape_is_checked() {
        assert!(matches!(
            SampleGrid::new(1, 2, vec![[0.0; 3]; 2], vec![(0.0, 0.0); 2]),
            Err(ProjectionError::GridTooSmall { .. })
        ));
        assert!(matches!(
            SampleGrid::new(2, 2, vec![[0.0; 3]; 3], vec![(0.0, 0.0); 4]),
            Err(ProjectionError::VertexCount { .. })
        ));
    }

    #[test]
    fn dropping_keeps_order() {
        let p = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(drop_coordinate(p, Axis::X), [2.0, 3.0, 4.0]);
        assert_eq!(drop_coordinate(p, Axis::Z), [1.0, 2.0, 4.0]);
        assert_eq!(drop_coordinate(p, Axis::W), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn triangle_indices_in_range() {
        let g = SampleGrid::new(3, 4, vec![[0.0; 3]; 12], vec![(0.0, 0.0); 12]).unwrap();
        let tris = g.triangles();
        assert_eq!(tris.len(), g.face_count());
        assert!(tris.iter().flatten().all(|&i| (1..=12).contains(&i)));
    }
}
