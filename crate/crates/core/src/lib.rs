//! Hypersurface families in the 4D Galilean space that contain a prescribed
//! curve as a common isogeodesic.
//!
//! The pipeline, bottom up:
//!
//! - [`gvec`]: degenerate scalar product, ternary cross product, determinant.
//! - [`expr`]: parser and symbolic differentiator for `s`, `u`, `v` expressions.
//! - [`curve`]: admissible curves and their Frenet apparatus.
//! - [`marching`]: marching-scale bundles and the separable-type checkers.
//! - [`hypersurface`]: the family itself, its partials, the isotropic normal
//!   and the φ-coefficient validation.
//! - [`projection`]: coordinate projection, lattice sampling, OBJ/CSV export.

// `!(a < b)` is deliberate where NaN must take the failing branch; the
// expression constructors are named after the operations they build.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait, clippy::redundant_guards)]

pub mod curve;
pub mod expr;
pub mod gvec;
pub mod hypersurface;
pub mod marching;
pub mod projection;

pub use curve::{CurveError, CurveSpec, FrenetFrame, FrenetResiduals};
pub use expr::{parse, Expr, Var};
pub use gvec::{det4, gcross, gdot, gnorm, GalileanVec4};
pub use hypersurface::{HypersurfaceError, HypersurfacePatch, ParamBox, Tolerances, ValidationReport};
pub use marching::{ConditionReport, Factors, MarchingScale, Separation};
pub use projection::{Axis, Projection, SampleGrid, SurfaceParam};

/// `n` evenly spaced values from `a` to `b`, both endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}
