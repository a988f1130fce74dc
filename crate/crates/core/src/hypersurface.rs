//! The hypersurface family `R(s,u,v) = r(s) + αt + βn + γb + δe` and its
//! isogeodesic validation.
//!
//! `u` and `v` are the two free surface parameters, `(u0, v0)` the anchor at
//! which the family interpolates the curve.

use serde::Serialize;
use thiserror::Error;

use crate::curve::{CurveError, CurveSpec, FrenetFrame};
use crate::expr::{EvalError, Expr, Var};
use crate::gvec::{gcross, gnorm, GalileanVec4};
use crate::linspace;
use crate::marching::{ConditionReport, MarchingScale};

/// Default tolerance for quantities that vanish structurally.
pub const TOL_EXACT: f64 = 1e-9;
/// Default tolerance for the geometric parallelism residual.
pub const TOL_PARALLEL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub exact: f64,
    pub parallel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { exact: TOL_EXACT, parallel: TOL_PARALLEL }
    }
}

/// Parameter box `[u_min, u_max] × [v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamBox {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl ParamBox {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypersurfaceError {
    #[error("degenerate parameter box {0:?}")]
    EmptyBox(ParamBox),
    #[error("anchor ({u0}, {v0}) lies outside the parameter box")]
    AnchorOutsideBox { u0: f64, v0: f64 },
    #[error("point ({s}, {u}, {v}) lies outside the domain")]
    OutsideDomain { s: f64, u: f64, v: f64 },
    #[error("at least two samples are required, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("evaluating marching-scale functions at s = {s}: {source}")]
    Eval { s: f64, source: EvalError },
}

impl HypersurfaceError {
    pub fn is_degenerate_frame(&self) -> bool {
        matches!(self, HypersurfaceError::Curve(e) if e.is_degenerate())
    }
}

/// Symbolic coefficients and their first partials, prepared once per patch.
#[derive(Debug, Clone)]
struct Coefficients {
    value: [Expr; 4],
    ds: [Expr; 4],
    du: [Expr; 4],
    dv: [Expr; 4],
}

impl Coefficients {
    fn new(value: [Expr; 4]) -> Self {
        let d = |var| [0, 1, 2, 3].map(|i: usize| value[i].diff(var));
        let (ds, du, dv) = (d(Var::S), d(Var::U), d(Var::V));
        Self { value, ds, du, dv }
    }
}

fn eval4(e: &[Expr; 4], s: f64, u: f64, v: f64) -> Result<[f64; 4], HypersurfaceError> {
    let mut out = [0.0; 4];
    for (o, x) in out.iter_mut().zip(e) {
        *o = x.eval(s, u, v).map_err(|source| HypersurfaceError::Eval { s, source })?;
    }
    Ok(out)
}

/// One member of the hypersurface family over `[s_min, s_max] × box`.
#[derive(Debug, Clone)]
pub struct HypersurfacePatch {
    curve: CurveSpec,
    ms: MarchingScale,
    domain: ParamBox,
    u0: f64,
    v0: f64,
    coeffs: Coefficients,
}

impl HypersurfacePatch {
    pub fn new(
        curve: CurveSpec,
        ms: MarchingScale,
        domain: ParamBox,
        u0: f64,
        v0: f64,
    ) -> Result<Self, HypersurfaceError> {
        if !(domain.u_min < domain.u_max && domain.v_min < domain.v_max) {
            return Err(HypersurfaceError::EmptyBox(domain));
        }
        if !domain.contains(u0, v0) {
            return Err(HypersurfaceError::AnchorOutsideBox { u0, v0 });
        }
        let coeffs = Coefficients::new(ms.to_generic());
        Ok(Self { curve, ms, domain, u0, v0, coeffs })
    }

    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    pub fn marching(&self) -> &MarchingScale {
        &self.ms
    }

    pub fn domain(&self) -> ParamBox {
        self.domain
    }

    pub fn anchor(&self) -> (f64, f64) {
        (self.u0, self.v0)
    }

    fn check_point(&self, s: f64, u: f64, v: f64) -> Result<(), HypersurfaceError> {
        if self.curve.contains(s) && self.domain.contains(u, v) {
            Ok(())
        } else {
            Err(HypersurfaceError::OutsideDomain { s, u, v })
        }
    }

    /// `(α, β, γ, δ)` at a point.
    pub fn coefficients(&self, s: f64, u: f64, v: f64) -> Result<[f64; 4], HypersurfaceError> {
        self.ms.eval(s, u, v).map_err(|source| HypersurfaceError::Eval { s, source })
    }

    /// The s-partials `(α_s, β_s, γ_s, δ_s)` at a point.
    pub fn s_partials(&self, s: f64, u: f64, v: f64) -> Result<[f64; 4], HypersurfaceError> {
        eval4(&self.coeffs.ds, s, u, v)
    }

    pub fn surface_point(&self, s: f64, u: f64, v: f64) -> Result<GalileanVec4, HypersurfaceError> {
        self.check_point(s, u, v)?;
        let frame = self.curve.frenet_frame(s)?;
        let c = self.coefficients(s, u, v)?;
        Ok(self.curve.point(s)? + frame.combine(c))
    }

    fn partials_with_frame(
        &self,
        frame: &FrenetFrame,
        s: f64,
        u: f64,
        v: f64,
    ) -> Result<[[f64; 4]; 3], HypersurfaceError> {
        let [alpha, beta, gamma, delta] = eval4(&self.coeffs.value, s, u, v)?;
        let [a_s, b_s, g_s, d_s] = eval4(&self.coeffs.ds, s, u, v)?;
        let (kappa, tau, sigma) = (frame.kappa, frame.tau, frame.sigma);
        let r_s = [
            1.0 + a_s,
            alpha * kappa + b_s - gamma * tau,
            beta * tau + g_s - delta * sigma,
            gamma * sigma + d_s,
        ];
        Ok([r_s, eval4(&self.coeffs.du, s, u, v)?, eval4(&self.coeffs.dv, s, u, v)?])
    }

    /// Coordinates of `R_s`, `R_u`, `R_v` in the frame `(t, n, b, e)`, from
    /// symbolic partials of the marching-scale functions and the Frenet
    /// equations.
    pub fn partials_frame(&self, s: f64, u: f64, v: f64) -> Result<[[f64; 4]; 3], HypersurfaceError> {
        self.check_point(s, u, v)?;
        let frame = self.curve.frenet_frame(s)?;
        self.partials_with_frame(&frame, s, u, v)
    }

    fn normal_with_frame(
        &self,
        frame: &FrenetFrame,
        s: f64,
        u: f64,
        v: f64,
    ) -> Result<GalileanVec4, HypersurfaceError> {
        let [r_s, r_u, r_v] = self.partials_with_frame(frame, s, u, v)?;
        Ok(gcross(frame.combine(r_s), frame.combine(r_u), frame.combine(r_v)))
    }

    /// `η = R_s ∧ R_u ∧ R_v`.
    pub fn isotropic_normal(&self, s: f64, u: f64, v: f64) -> Result<GalileanVec4, HypersurfaceError> {
        self.check_point(s, u, v)?;
        let frame = self.curve.frenet_frame(s)?;
        self.normal_with_frame(&frame, s, u, v)
    }

    fn phi_with_frame(&self, frame: &FrenetFrame, s: f64) -> Result<[f64; 4], HypersurfaceError> {
        let (u0, v0) = (self.u0, self.v0);
        let [_, b_u, g_u, d_u] = eval4(&self.coeffs.du, s, u0, v0)?;
        let [_, b_v, g_v, d_v] = eval4(&self.coeffs.dv, s, u0, v0)?;
        // t coordinate of η; zero because the cross product is isotropic
        let phi1 = self.normal_with_frame(frame, s, u0, v0)?.c1;
        Ok([
            phi1,
            g_u * d_v - g_v * d_u,
            b_u * d_v - b_v * d_u,
            b_u * g_v - b_v * g_u,
        ])
    }

    /// `(φ1, φ2, φ3, φ4)` at `(s, u0, v0)`, with `η = φ1 t - φ2 n + φ3 b - φ4 e`
    /// at the anchor.
    pub fn phi_coefficients(&self, s: f64) -> Result<[f64; 4], HypersurfaceError> {
        self.check_point(s, self.u0, self.v0)?;
        let frame = self.curve.frenet_frame(s)?;
        self.phi_with_frame(&frame, s)
    }

    /// Runs the type-specific checker (if any) on the grid used by
    /// [`validate_isogeodesic`](Self::validate_isogeodesic).
    pub fn check_conditions(&self, s_samples: usize, tol: f64) -> Option<ConditionReport> {
        let grid = linspace(self.curve.s_min(), self.curve.s_max(), s_samples);
        self.ms.check(self.u0, self.v0, &grid, tol)
    }

    /// Evaluates the isogeodesic conditions on `s_samples` evenly spaced
    /// values of `s` (endpoints included).
    ///
    /// Three checks per sample: the coefficients vanish at the anchor; the
    /// φ-coefficients satisfy `φ2 ≠ 0`, `φ3 = φ4 = 0`; and, independently, the
    /// normalized `η` at the anchor coincides with `±n`.
    pub fn validate_isogeodesic(
        &self,
        s_samples: usize,
        tol: Tolerances,
    ) -> Result<ValidationReport, HypersurfaceError> {
        if s_samples < 2 {
            return Err(HypersurfaceError::TooFewSamples(s_samples));
        }
        let (u0, v0) = (self.u0, self.v0);
        let mut rows = Vec::with_capacity(s_samples);
        for s in linspace(self.curve.s_min(), self.curve.s_max(), s_samples) {
            let frame = self.curve.frenet_frame(s)?;
            let anchor = self.coefficients(s, u0, v0)?;
            let phi = self.phi_with_frame(&frame, s)?;
            let eta = self.normal_with_frame(&frame, s, u0, v0)?;
            let len = gnorm(eta);
            let unit = if len == 0.0 { GalileanVec4::ZERO } else { eta.scale(1.0 / len) };
            let parallel = gnorm(unit - frame.n).min(gnorm(unit + frame.n));
            rows.push(SampleRow {
                s,
                phi,
                anchor_max: anchor.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
                parallel_residual: parallel,
            });
        }
        Ok(ValidationReport::from_rows(rows, tol))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SampleRow {
    pub s: f64,
    pub phi: [f64; 4],
    /// Largest `|α|, |β|, |γ|, |δ|` at the anchor.
    pub anchor_max: f64,
    pub parallel_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ValidationReport {
    pub theorem_pass: bool,
    pub anchor_vanishing_max: f64,
    pub phi1_max: f64,
    pub phi2_min_abs: f64,
    pub phi2_sign_change: bool,
    pub phi3_max: f64,
    pub phi4_max: f64,
    pub parallelism_residual_max: f64,
    pub tolerances: Tolerances,
    pub rows: Vec<SampleRow>,
}

impl ValidationReport {
    fn from_rows(rows: Vec<SampleRow>, tol: Tolerances) -> Self {
        let max_of = |f: &dyn Fn(&SampleRow) -> f64| rows.iter().map(f).fold(0.0_f64, f64::max);
        let anchor_vanishing_max = max_of(&|r| r.anchor_max);
        let phi1_max = max_of(&|r| r.phi[0].abs());
        let phi3_max = max_of(&|r| r.phi[2].abs());
        let phi4_max = max_of(&|r| r.phi[3].abs());
        let parallelism_residual_max = max_of(&|r| r.parallel_residual);
        let phi2_min_abs = rows.iter().map(|r| r.phi[1].abs()).fold(f64::INFINITY, f64::min);

        let signs: Vec<f64> = rows
            .iter()
            .map(|r| r.phi[1])
            .filter(|x| x.abs() > tol.exact)
            .map(f64::signum)
            .collect();
        let phi2_sign_change = signs.windows(2).any(|w| w[0] != w[1]);

        let theorem_pass = anchor_vanishing_max <= tol.exact
            && phi3_max <= tol.exact
            && phi4_max <= tol.exact
            && phi2_min_abs > tol.exact
            && !phi2_sign_change
            && parallelism_residual_max <= tol.parallel;

        Self {
            theorem_pass,
            anchor_vanishing_max,
            phi1_max,
            phi2_min_abs,
            phi2_sign_change,
            phi3_max,
            phi4_max,
            parallelism_residual_max,
            tolerances: tol,
            rows,
        }
    }

    /// Names of the failed conditions, in a fixed order.
    pub fn failed_clauses(&self) -> Vec<&'static str> {
        let t = self.tolerances;
        let mut out = Vec::new();
        if self.anchor_vanishing_max > t.exact {
            out.push("anchor_vanishing");
        }
        if !(self.phi2_min_abs > t.exact) || self.phi2_sign_change {
            out.push("phi2");
        }
        if self.phi3_max > t.exact {
            out.push("phi3");
        }
        if self.phi4_max > t.exact {
            out.push("phi4");
        }
        if self.parallelism_residual_max > t.parallel {
            out.push("parallelism");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::marching::Factors;
    use std::f64::consts::{PI, SQRT_2};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn curve(a: f64, b: f64) -> CurveSpec {
        CurveSpec::new(p("cos(s)"), p("sqrt(2)*sin(s)"), p("cos(s)"), a, b).unwrap()
    }

    fn unit_box() -> ParamBox {
        ParamBox { u_min: 0.0, u_max: 1.0, v_min: 0.0, v_max: 1.0 }
    }

    fn generic(items: [&str; 4], a: f64, b: f64, u0: f64, v0: f64) -> HypersurfacePatch {
        let [al, be, ga, de] = items.map(p);
        HypersurfacePatch::new(curve(a, b), MarchingScale::generic(al, be, ga, de), unit_box(), u0, v0)
            .unwrap()
    }

    fn type_a_patch() -> HypersurfacePatch {
        generic(["v*u*(v-0.5)", "0", "v*u", "v-0.5"], 0.0, 2.0 * PI, 0.0, 0.5)
    }

    fn type_b_patch() -> HypersurfacePatch {
        let f = Factors {
            lambda: p("0"),
            mu: p("0"),
            nu: p("s+u"),
            xi: p("s*(u-1)"),
            x: p("0"),
            y: p("0"),
            z: p("v-0"),
            w: p("1"),
        };
        HypersurfacePatch::new(curve(PI, 3.0 * PI), MarchingScale::type_b(f).unwrap(), unit_box(), 1.0, 0.0)
            .unwrap()
    }

    #[test]
    fn anchor_points_lie_on_curve() {
        let patch = type_a_patch();
        for s in [0.0, 1.0, 4.0] {
            assert_eq!(patch.surface_point(s, 0.0, 0.5).unwrap(), patch.curve().point(s).unwrap());
        }
    }

    #[test]
    fn type_a_point_matches_closed_form() {
        let patch = type_a_patch();
        let (s, u, v): (f64, f64, f64) = (1.1, 0.3, 0.8);
        let a = v * u * (v - 0.5);
        let g = v * u;
        let d = v - 0.5;
        let expected = [
            s + a,
            s.cos() - a * s.sin() + g * s.sin() / SQRT_2 - d / SQRT_2,
            SQRT_2 * s.sin() + SQRT_2 * a * s.cos() - g * s.cos(),
            s.cos() - a * s.sin() + g * s.sin() / SQRT_2 + d / SQRT_2,
        ];
        let got = patch.surface_point(s, u, v).unwrap().to_array();
        for i in 0..4 {
            assert!((got[i] - expected[i]).abs() < 1e-12, "{i}: {got:?}");
        }
    }

    #[test]
    fn type_b_point_at_two_pi() {
        let patch = type_b_patch();
        let s = 2.0 * PI;
        let gamma = (2.0 * PI + 1.0) / 8.0;
        // r(2π) = (2π, 1, 0, 1), b(2π) = (0, 0, -1, 0)
        let expected = [s, 1.0, -gamma, 1.0];
        let got = patch.surface_point(s, 1.0, 0.125).unwrap().to_array();
        for i in 0..4 {
            assert!((got[i] - expected[i]).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn partials_at_anchor_reduce_to_tangent() {
        let patch = type_b_patch();
        for s in [PI, 5.0, 3.0 * PI] {
            let [r_s, ..] = patch.partials_frame(s, 1.0, 0.0).unwrap();
            assert_eq!(r_s, [1.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn zero_bundle_partials_and_normal() {
        let patch = generic(["0", "0", "0", "0"], 0.0, 1.0, 0.5, 0.5);
        let [r_s, r_u, r_v] = patch.partials_frame(0.4, 0.2, 0.9).unwrap();
        assert_eq!(r_s, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(r_u, [0.0; 4]);
        assert_eq!(r_v, [0.0; 4]);
        assert_eq!(patch.isotropic_normal(0.4, 0.2, 0.9).unwrap(), GalileanVec4::ZERO);
    }

    #[test]
    fn type_a_partials_at_anchor() {
        let patch = type_a_patch();
        let [_, r_u, r_v] = patch.partials_frame(2.0, 0.0, 0.5).unwrap();
        // α_u = v(v-1/2) = 0, γ_u = v = 1/2; α_v = u(2v - 1/2) = 0, γ_v = u = 0, δ_v = 1
        assert_eq!(r_u, [0.0, 0.0, 0.5, 0.0]);
        assert_eq!(r_v, [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn normal_at_type_a_anchor_is_parallel_to_principal_normal() {
        let patch = type_a_patch();
        for s in [0.0, 0.5, 3.0] {
            let eta = patch.isotropic_normal(s, 0.0, 0.5).unwrap();
            assert_eq!(eta.c1, 0.0);
            let unit = eta.scale(1.0 / gnorm(eta));
            let n = patch.curve().frenet_frame(s).unwrap().n;
            assert!(gnorm(unit - n).min(gnorm(unit + n)) < 1e-9);
        }
    }

    #[test]
    fn phi_values() {
        let patch = type_a_patch();
        for s in [0.0, 2.0, 6.0] {
            let phi = patch.phi_coefficients(s).unwrap();
            assert_eq!(phi, [0.0, 0.5, 0.0, 0.0]);
        }
        let patch = type_b_patch();
        for s in [PI, 7.0, 3.0 * PI] {
            let phi = patch.phi_coefficients(s).unwrap();
            assert_eq!(phi[0], 0.0);
            assert!((phi[1] + s * (s + 1.0)).abs() < 1e-12);
            assert_eq!(&phi[2..], &[0.0, 0.0]);
        }
    }

    #[test]
    fn validation_passes_and_fails() {
        let report = type_a_patch().validate_isogeodesic(64, Tolerances::default()).unwrap();
        assert!(report.theorem_pass, "{:?}", report.failed_clauses());
        assert_eq!(report.rows.len(), 64);

        let degenerate = generic(["v*u*v", "0", "v*u", "v"], 0.0, 2.0 * PI, 0.0, 0.0);
        let report = degenerate.validate_isogeodesic(64, Tolerances::default()).unwrap();
        assert!(!report.theorem_pass);
        assert_eq!(report.phi2_min_abs, 0.0);
        assert!(report.failed_clauses().contains(&"phi2"));

        let swapped = generic(["v*u*(v-0.5)", "v*u", "0", "v-0.5"], 0.0, 2.0 * PI, 0.0, 0.5);
        let report = swapped.validate_isogeodesic(64, Tolerances::default()).unwrap();
        assert!(!report.theorem_pass);
        let failed = report.failed_clauses();
        assert!(failed.contains(&"phi2") && failed.contains(&"phi3"), "{failed:?}");
    }

    #[test]
    fn sign_change_of_phi2_fails() {
        // γ = (s - 1) u, δ = v: φ2 = s - 1 changes sign inside [0, 2]
        let patch = generic(["0", "0", "(s - 1.0001)*u", "v"], 0.0, 2.0, 0.0, 0.0);
        let report = patch.validate_isogeodesic(8, Tolerances::default()).unwrap();
        assert!(report.phi2_min_abs > 1e-9);
        assert!(report.phi2_sign_change);
        assert!(!report.theorem_pass);
    }

    #[test]
    fn constructor_and_grid_errors() {
        let ms = || MarchingScale::generic(p("0"), p("0"), p("0"), p("0"));
        let bad = ParamBox { u_min: 1.0, u_max: 1.0, v_min: 0.0, v_max: 1.0 };
        assert!(matches!(
            HypersurfacePatch::new(curve(0.0, 1.0), ms(), bad, 1.0, 0.5),
            Err(HypersurfaceError::EmptyBox(_))
        ));
        assert!(matches!(
            HypersurfacePatch::new(curve(0.0, 1.0), ms(), unit_box(), 2.0, 0.5),
            Err(HypersurfaceError::AnchorOutsideBox { .. })
        ));
        let patch = generic(["0", "0", "0", "0"], 0.0, 1.0, 0.5, 0.5);
        assert!(matches!(patch.validate_isogeodesic(1, Tolerances::default()), Err(HypersurfaceError::TooFewSamples(1))));
        assert!(matches!(patch.surface_point(0.5, 1.5, 0.5), Err(HypersurfaceError::OutsideDomain { .. })));
    }

    #[test]
    fn degenerate_frame_aborts_validation() {
        let line = CurveSpec::new(p("0"), p("0"), p("0"), 0.0, 1.0).unwrap();
        let patch = HypersurfacePatch::new(
            line,
            MarchingScale::generic(p("0"), p("0"), p("u"), p("v")),
            unit_box(),
            0.0,
            0.0,
        )
        .unwrap();
        let err = patch.validate_isogeodesic(4, Tolerances::default()).unwrap_err();
        assert!(err.is_degenerate_frame());
    }
}
