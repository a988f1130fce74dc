//! Admissible curves `r(s) = (s, g(s), h(s), l(s))` and their Frenet apparatus.
//!
//! The first coordinate is the literal parameter, so `s` is the Galilean arc
//! length by construction. Derivatives up to order four of `g`, `h` and `l` are
//! prepared symbolically when the curve is built: the second binormal needs
//! third derivatives and the third curvature needs the derivative of the
//! binormal, hence fourth derivatives.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr, Var};
use crate::gvec::{det4, gcross, gdot, gnorm, GalileanVec4};

/// Threshold below which the first curvature is treated as zero.
pub const KAPPA_TOL: f64 = 1e-9;
/// Threshold below which the second curvature is treated as zero.
pub const TAU_TOL: f64 = 1e-9;

/// Highest derivative order available from [`CurveSpec::derivatives`].
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("component `{component}` depends on `{var}`; only `s` is allowed")]
    ForeignVariable { component: &'static str, var: Var },
    #[error("empty parameter interval [{s_min}, {s_max}]")]
    EmptyInterval { s_min: f64, s_max: f64 },
    #[error("s = {s} lies outside [{s_min}, {s_max}]")]
    OutOfDomain { s: f64, s_min: f64, s_max: f64 },
    #[error("derivative order {0} exceeds the supported maximum of 4")]
    OrderTooHigh(usize),
    #[error("first curvature {kappa:e} at s = {s} is below tolerance")]
    DegenerateCurvature { s: f64, kappa: f64 },
    #[error("second curvature {tau:e} at s = {s} is below tolerance")]
    DegenerateTorsion { s: f64, tau: f64 },
    #[error("evaluating the curve at s = {s}: {source}")]
    Eval { s: f64, source: EvalError },
}

impl CurveError {
    /// True for the two frame degeneracy errors.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, CurveError::DegenerateCurvature { .. } | CurveError::DegenerateTorsion { .. })
    }
}

/// An admissible curve on `[s_min, s_max]`.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    components: [Expr; 3],
    /// `derivs[k][i]` is the k-th derivative of component i.
    derivs: Vec<[Expr; 3]>,
    s_min: f64,
    s_max: f64,
}

const COMPONENT_NAMES: [&str; 3] = ["g", "h", "l"];

impl CurveSpec {
    pub fn new(g: Expr, h: Expr, l: Expr, s_min: f64, s_max: f64) -> Result<Self, CurveError> {
        let components = [g, h, l];
        for (e, name) in components.iter().zip(COMPONENT_NAMES) {
            if let Some(var) = e.variables().into_iter().find(|&v| v != Var::S) {
                return Err(CurveError::ForeignVariable { component: name, var });
            }
        }
        if !(s_min < s_max) || !s_min.is_finite() || !s_max.is_finite() {
            return Err(CurveError::EmptyInterval { s_min, s_max });
        }
        let mut derivs = vec![components.clone()];
        for k in 1..=MAX_ORDER {
            let prev = &derivs[k - 1];
            let next = [prev[0].diff(Var::S), prev[1].diff(Var::S), prev[2].diff(Var::S)];
            derivs.push(next);
        }
        Ok(Self { components, derivs, s_min, s_max })
    }

    pub fn components(&self) -> &[Expr; 3] {
        &self.components
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.s_min && s <= self.s_max
    }

    fn check_domain(&self, s: f64) -> Result<(), CurveError> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(CurveError::OutOfDomain { s, s_min: self.s_min, s_max: self.s_max })
        }
    }

    /// Isotropic part `(g⁽ᵏ⁾, h⁽ᵏ⁾, l⁽ᵏ⁾)` of the k-th derivative, without the
    /// domain check.
    fn component_derivative(&self, k: usize, s: f64) -> Result<[f64; 3], CurveError> {
        let d = &self.derivs[k];
        let ev = |e: &Expr| e.eval(s, 0.0, 0.0).map_err(|source| CurveError::Eval { s, source });
        Ok([ev(&d[0])?, ev(&d[1])?, ev(&d[2])?])
    }

    pub fn point(&self, s: f64) -> Result<GalileanVec4, CurveError> {
        self.check_domain(s)?;
        let [g, h, l] = self.component_derivative(0, s)?;
        Ok(GalileanVec4::from_array_unchecked([s, g, h, l]))
    }

    /// `r⁽ᵏ⁾(s)` for `k = 0..=order`.
    pub fn derivatives(&self, s: f64, order: usize) -> Result<Vec<GalileanVec4>, CurveError> {
        if order > MAX_ORDER {
            return Err(CurveError::OrderTooHigh(order));
        }
        self.check_domain(s)?;
        (0..=order)
            .map(|k| {
                let first = match k {
                    0 => s,
                    1 => 1.0,
                    _ => 0.0,
                };
                let [a, b, c] = self.component_derivative(k, s)?;
                Ok(GalileanVec4::from_array_unchecked([first, a, b, c]))
            })
            .collect()
    }

    /// Frenet apparatus at `s`.
    ///
    /// With `a = r''` (isotropic), the unit vectors and their derivatives
    /// follow from the derivatives of `a`:
    /// `n = a/κ`, `b = n'/τ`, `σ = <b', e>`, where `κ = |a|`, `τ = |n'|`.
    pub fn frenet_frame(&self, s: f64) -> Result<FrenetFrame, CurveError> {
        let d = self.derivatives(s, MAX_ORDER)?;
        let t = d[1];
        let a = d[2];
        let da = d[3];
        let dda = d[4];

        let kappa = gnorm(a);
        if !(kappa > KAPPA_TOL) {
            return Err(CurveError::DegenerateCurvature { s, kappa });
        }
        let n = a.scale(1.0 / kappa);

        // κ' and κ'' from κ² = <a, a>
        let dkappa = gdot(a, da) / kappa;
        let ddkappa = (gdot(da, da) + gdot(a, dda)) / kappa - dkappa * dkappa / kappa;

        let dn = da.scale(1.0 / kappa) - a.scale(dkappa / (kappa * kappa));
        let ddn = dda.scale(1.0 / kappa) - da.scale(2.0 * dkappa / (kappa * kappa))
            + a.scale(2.0 * dkappa * dkappa / (kappa * kappa * kappa) - ddkappa / (kappa * kappa));

        let tau = gnorm(dn);
        if !(tau > TAU_TOL) {
            return Err(CurveError::DegenerateTorsion { s, tau });
        }
        let b = dn.scale(1.0 / tau);
        let dtau = gdot(dn, ddn) / tau;
        let db = ddn.scale(1.0 / tau) - dn.scale(dtau / (tau * tau));

        let cross = gcross(t, n, b);
        let mu: i8 = if det4(t, n, b, cross) >= 0.0 { 1 } else { -1 };
        let e = cross.scale(f64::from(mu));
        let sigma = gdot(db, e);

        Ok(FrenetFrame { s, t, n, b, e, kappa, tau, sigma, mu })
    }

    /// Central-difference check of the Frenet equations at `s` with step `h`.
    pub fn verify_frenet_odes(&self, s: f64, h: f64) -> Result<FrenetResiduals, CurveError> {
        let lo = self.frenet_frame(s - h)?;
        let mid = self.frenet_frame(s)?;
        let hi = self.frenet_frame(s + h)?;
        let diff = |f: fn(&FrenetFrame) -> GalileanVec4| (f(&hi) - f(&lo)).scale(1.0 / (2.0 * h));
        let dt = diff(|f| f.t);
        let dn = diff(|f| f.n);
        let db = diff(|f| f.b);
        let de = diff(|f| f.e);
        Ok(FrenetResiduals {
            tangent: (dt - mid.kappa * mid.n).max_abs(),
            normal: (dn - mid.tau * mid.b).max_abs(),
            binormal: (db + mid.tau * mid.n - mid.sigma * mid.e).max_abs(),
            second_binormal: (de + mid.sigma * mid.b).max_abs(),
        })
    }
}

/// Tangent, principal normal, first and second binormal, and the three
/// curvatures at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrenetFrame {
    pub s: f64,
    pub t: GalileanVec4,
    pub n: GalileanVec4,
    pub b: GalileanVec4,
    pub e: GalileanVec4,
    pub kappa: f64,
    pub tau: f64,
    pub sigma: f64,
    /// Sign applied to `t ∧ n ∧ b` so that `det(t, n, b, e) = +1`.
    pub mu: i8,
}

impl FrenetFrame {
    pub fn det(&self) -> f64 {
        det4(self.t, self.n, self.b, self.e)
    }

    /// Ambient vector with frame coordinates `c` in the basis `(t, n, b, e)`.
    pub fn combine(&self, c: [f64; 4]) -> GalileanVec4 {
        c[0] * self.t + c[1] * self.n + c[2] * self.b + c[3] * self.e
    }

    /// Frame coordinates of `x`. The `t` coordinate is `x.c1`; the rest are
    /// Galilean projections of the isotropic remainder on `n`, `b`, `e`.
    pub fn decompose(&self, x: GalileanVec4) -> [f64; 4] {
        let ct = x.c1;
        let rest = x - ct * self.t;
        [ct, gdot(rest, self.n), gdot(rest, self.b), gdot(rest, self.e)]
    }
}

/// Max-norm residuals of `t' - κn`, `n' - τb`, `b' + τn - σe` and `e' + σb`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrenetResiduals {
    pub tangent: f64,
    pub normal: f64,
    pub binormal: f64,
    pub second_binormal: f64,
}

impl FrenetResiduals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.tangent, self.normal, self.binormal, self.second_binormal]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn helix() -> CurveSpec {
        CurveSpec::new(
            parse("cos(s)").unwrap(),
            parse("sqrt(2)*sin(s)").unwrap(),
            parse("cos(s)").unwrap(),
            -10.0,
            10.0,
        )
        .unwrap()
    }

    fn close(a: GalileanVec4, b: [f64; 4], tol: f64) -> bool {
        (a - GalileanVec4::from_array(b).unwrap()).max_abs() <= tol
    }

    #[test]
    fn first_derivative_at_origin() {
        let d = helix().derivatives(0.0, 1).unwrap();
        assert!(close(d[1], [1.0, 0.0, SQRT_2, 0.0], 1e-15));
    }

    #[test]
    fn higher_derivatives_have_zero_first_component() {
        let d = helix().derivatives(1.3, 4).unwrap();
        assert_eq!(d[0].c1, 1.3);
        assert_eq!(d[1].c1, 1.0);
        assert!(d[2..].iter().all(|x| x.c1 == 0.0));
    }

    #[test]
    fn third_derivative_at_quarter_turn() {
        // (cos s, √2 sin s, cos s)''' = (sin s, -√2 cos s, sin s)
        let d = helix().derivatives(FRAC_PI_2, 3).unwrap();
        assert!(close(d[3], [0.0, 1.0, 0.0, 1.0], 1e-15));
    }

    #[test]
    fn frame_matches_closed_form() {
        let c = helix();
        for s in [0.0, FRAC_PI_4, FRAC_PI_2, PI, 1.5 * PI, -2.2] {
            let f = c.frenet_frame(s).unwrap();
            let r = 1.0 / SQRT_2;
            assert!(close(f.t, [1.0, -s.sin(), SQRT_2 * s.cos(), -s.sin()], 1e-12));
            assert!(close(f.n, [0.0, -r * s.cos(), -s.sin(), -r * s.cos()], 1e-12));
            assert!(close(f.b, [0.0, r * s.sin(), -s.cos(), r * s.sin()], 1e-12));
            assert!(close(f.e, [0.0, -r, 0.0, r], 1e-12));
            assert!((f.kappa - SQRT_2).abs() < 1e-12);
            assert!((f.tau - 1.0).abs() < 1e-12);
            assert!(f.sigma.abs() < 1e-12);
            assert!((f.det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn straight_line_has_no_frame() {
        let zero = || parse("0").unwrap();
        let c = CurveSpec::new(zero(), zero(), zero(), 0.0, 1.0).unwrap();
        assert!(matches!(c.frenet_frame(0.5), Err(CurveError::DegenerateCurvature { .. })));
    }

    #[test]
    fn curvature_degeneracies() {
        let c = CurveSpec::new(
            parse("cos(s)").unwrap(),
            parse("sin(s)").unwrap(),
            parse("0").unwrap(),
            0.0,
            1.0,
        )
        .unwrap();
        // circle: n' = (sin, -cos, 0), so τ = 1
        let f = c.frenet_frame(0.5).unwrap();
        assert!((f.tau - 1.0).abs() < 1e-12);
        let parabola = CurveSpec::new(
            parse("s^2").unwrap(),
            parse("0").unwrap(),
            parse("0").unwrap(),
            0.0,
            1.0,
        )
        .unwrap();
        assert!(matches!(parabola.frenet_frame(0.5), Err(CurveError::DegenerateTorsion { .. })));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let s = || parse("s").unwrap();
        assert!(matches!(
            CurveSpec::new(s(), parse("u").unwrap(), s(), 0.0, 1.0),
            Err(CurveError::ForeignVariable { component: "h", var: Var::U })
        ));
        assert!(matches!(CurveSpec::new(s(), s(), s(), 1.0, 1.0), Err(CurveError::EmptyInterval { .. })));
        let c = CurveSpec::new(s(), s(), s(), 0.0, 1.0).unwrap();
        assert!(matches!(c.point(2.0), Err(CurveError::OutOfDomain { .. })));
        assert!(matches!(c.derivatives(0.5, 5), Err(CurveError::OrderTooHigh(5))));
    }

    #[test]
    fn frenet_odes_hold_for_helix() {
        let r = helix().verify_frenet_odes(0.9, 1e-4).unwrap();
        assert!(r.max() < 1e-6, "{r:?}");
        assert!(r.second_binormal < 1e-10);
    }

    #[test]
    fn decompose_inverts_combine() {
        let f = helix().frenet_frame(0.4).unwrap();
        let c = [0.3, -1.2, 2.5, 0.7];
        let back = f.decompose(f.combine(c));
        for i in 0..4 {
            assert!((back[i] - c[i]).abs() < 1e-14);
        }
    }
}
