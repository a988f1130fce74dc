//! Scene files: JSON with expression strings in `s`, `u`, `v`.

use std::fs;
use std::path::{Path, PathBuf};

use isogeo_core::expr::ParseError;
use isogeo_core::hypersurface::HypersurfaceError;
use isogeo_core::marching::MarchingError;
use isogeo_core::{
    parse, CurveError, CurveSpec, Expr, Factors, HypersurfacePatch, MarchingScale, ParamBox, Projection,
    Tolerances,
};
use isogeo_core::{Axis, SurfaceParam};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed scene: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {source}")]
    Expr { field: String, source: ParseError },
    #[error("field `{field}` must be a constant, found a function of {vars}")]
    NotConstant { field: String, vars: String },
    #[error("field `{field}`: {message}")]
    Value { field: String, message: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Marching(#[from] MarchingError),
    #[error(transparent)]
    Patch(#[from] HypersurfaceError),
    #[error("the scene has no `projection` section")]
    MissingProjection,
}

/// A number, or a constant expression such as `"2*pi"` or `"1/8"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    pub fn resolve(&self, field: &str) -> Result<f64, ConfigError> {
        let x = match self {
            Scalar::Number(x) => *x,
            Scalar::Expr(src) => {
                let e = expression(field, src)?;
                let vars = e.variables();
                if !vars.is_empty() {
                    let vars = vars.iter().map(|v| v.name()).collect::<Vec<_>>().join(", ");
                    return Err(ConfigError::NotConstant { field: field.to_string(), vars });
                }
                e.eval(0.0, 0.0, 0.0)
                    .map_err(|e| ConfigError::Value { field: field.to_string(), message: e.to_string() })?
            }
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(ConfigError::Value { field: field.to_string(), message: format!("{x} is not finite") })
        }
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Number(x)
    }
}

fn expression(field: &str, src: &str) -> Result<Expr, ConfigError> {
    parse(src).map_err(|source| ConfigError::Expr { field: field.to_string(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub g: String,
    pub h: String,
    pub l: String,
    pub s_min: Scalar,
    pub s_max: Scalar,
}

/// Parameter-side and `s`-side factor strings of a separable bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    pub lambda: String,
    pub mu: String,
    pub nu: String,
    pub xi: String,
    #[serde(rename = "X")]
    pub x: String,
    #[serde(rename = "Y")]
    pub y: String,
    #[serde(rename = "Z")]
    pub z: String,
    #[serde(rename = "W")]
    pub w: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum MarchingConfig {
    #[serde(rename = "generic")]
    Generic { alpha: String, beta: String, gamma: String, delta: String },
    #[serde(rename = "typeA")]
    TypeA(FactorConfig),
    #[serde(rename = "typeB")]
    TypeB(FactorConfig),
    #[serde(rename = "typeC")]
    TypeC(FactorConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorConfig {
    pub u0: Scalar,
    pub v0: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub u_min: Scalar,
    pub u_max: Scalar,
    pub v_min: Scalar,
    pub v_max: Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "GridConfig::default_n_s")]
    pub n_s: usize,
    #[serde(default = "GridConfig::default_n_uv")]
    pub n_u: usize,
    #[serde(default = "GridConfig::default_n_uv")]
    pub n_v: usize,
}

impl GridConfig {
    fn default_n_s() -> usize {
        64
    }

    fn default_n_uv() -> usize {
        16
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_s: Self::default_n_s(), n_u: Self::default_n_uv(), n_v: Self::default_n_uv() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionConfig {
    pub drop_axis: Axis,
    pub fixed_param: SurfaceParam,
    pub fixed_value: Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub exact: Option<f64>,
    pub parallel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub curve: CurveConfig,
    pub marching: MarchingConfig,
    pub anchor: AnchorConfig,
    pub domain: DomainConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceConfig>,
}

/// A scene with every expression parsed and every invariant checked.
#[derive(Debug, Clone)]
pub struct Scene {
    pub patch: HypersurfacePatch,
    pub grid: GridConfig,
    pub projection: Option<Projection>,
    pub tolerances: Tolerances,
}

impl Scene {
    pub fn projection(&self) -> Result<Projection, ConfigError> {
        self.projection.ok_or(ConfigError::MissingProjection)
    }

    pub fn curve(&self) -> &CurveSpec {
        self.patch.curve()
    }
}

impl SceneConfig {
    pub fn from_json(src: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src =
            fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&src)
    }

    pub fn marching_scale(&self) -> Result<MarchingScale, ConfigError> {
        let factors = |f: &FactorConfig| -> Result<Factors, ConfigError> {
            let e = |name: &str, src: &str| expression(&format!("marching.{name}"), src);
            Ok(Factors {
                lambda: e("lambda", &f.lambda)?,
                mu: e("mu", &f.mu)?,
                nu: e("nu", &f.nu)?,
                xi: e("xi", &f.xi)?,
                x: e("X", &f.x)?,
                y: e("Y", &f.y)?,
                z: e("Z", &f.z)?,
                w: e("W", &f.w)?,
            })
        };
        Ok(match &self.marching {
            MarchingConfig::Generic { alpha, beta, gamma, delta } => MarchingScale::generic(
                expression("marching.alpha", alpha)?,
                expression("marching.beta", beta)?,
                expression("marching.gamma", gamma)?,
                expression("marching.delta", delta)?,
            ),
            MarchingConfig::TypeA(f) => MarchingScale::type_a(factors(f)?)?,
            MarchingConfig::TypeB(f) => MarchingScale::type_b(factors(f)?)?,
            MarchingConfig::TypeC(f) => MarchingScale::type_c(factors(f)?)?,
        })
    }

    pub fn build(&self) -> Result<Scene, ConfigError> {
        let c = &self.curve;
        let curve = CurveSpec::new(
            expression("curve.g", &c.g)?,
            expression("curve.h", &c.h)?,
            expression("curve.l", &c.l)?,
            c.s_min.resolve("curve.s_min")?,
            c.s_max.resolve("curve.s_max")?,
        )?;
        let d = &self.domain;
        let domain = ParamBox {
            u_min: d.u_min.resolve("domain.u_min")?,
            u_max: d.u_max.resolve("domain.u_max")?,
            v_min: d.v_min.resolve("domain.v_min")?,
            v_max: d.v_max.resolve("domain.v_max")?,
        };
        let u0 = self.anchor.u0.resolve("anchor.u0")?;
        let v0 = self.anchor.v0.resolve("anchor.v0")?;
        let patch = HypersurfacePatch::new(curve, self.marching_scale()?, domain, u0, v0)?;

        let g = self.grid;
        for (field, n) in [("grid.n_s", g.n_s), ("grid.n_u", g.n_u), ("grid.n_v", g.n_v)] {
            if n < 2 {
                return Err(ConfigError::Value { field: field.into(), message: format!("need at least 2, got {n}") });
            }
        }

        let projection = match &self.projection {
            None => None,
            Some(p) => {
                let fixed_value = p.fixed_value.resolve("projection.fixed_value")?;
                let (lo, hi) = match p.fixed_param {
                    SurfaceParam::U => (domain.u_min, domain.u_max),
                    SurfaceParam::V => (domain.v_min, domain.v_max),
                };
                if !(lo..=hi).contains(&fixed_value) {
                    return Err(ConfigError::Value {
                        field: "projection.fixed_value".into(),
                        message: format!("{fixed_value} lies outside [{lo}, {hi}]"),
                    });
                }
                Some(Projection { drop_axis: p.drop_axis, fixed_param: p.fixed_param, fixed_value })
            }
        };

        let mut tolerances = Tolerances::default();
        if let Some(t) = self.tolerances {
            for (field, value, slot) in [
                ("tolerances.exact", t.exact, &mut tolerances.exact),
                ("tolerances.parallel", t.parallel, &mut tolerances.parallel),
            ] {
                if let Some(x) = value {
                    if !(x.is_finite() && x >= 0.0) {
                        return Err(ConfigError::Value { field: field.into(), message: format!("invalid tolerance {x}") });
                    }
                    *slot = x;
                }
            }
        }

        Ok(Scene { patch, grid: g, projection, tolerances })
    }
}

/// Reads and builds a scene in one step.
pub fn load_scene(path: &Path) -> Result<Scene, ConfigError> {
    SceneConfig::load(path)?.build()
}
