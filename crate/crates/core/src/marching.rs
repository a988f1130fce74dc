//! Marching-scale function bundles `(α, β, γ, δ)` and the type-specific
//! isogeodesic conditions.
//!
//! A bundle is either given directly ([`MarchingScale::Generic`]) or in one of
//! three separable forms where each coefficient is a product of an `s`-side
//! factor (`λ, μ, ν, ξ`) and a parameter-side factor (`X, Y, Z, W`):
//!
//! | variant | `s`-side factors in | parameter-side factors in |
//! |---------|---------------------|---------------------------|
//! | A       | `s`                 | `u, v`                    |
//! | B       | `s, u`              | `v`                       |
//! | C       | `s, v`              | `u`                       |
//!
//! The checkers evaluate every clause with symbolic partials at the anchor
//! `(u0, v0)`; pointwise conditions on `s` are tested on a discrete grid.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Separation {
    TypeA,
    TypeB,
    TypeC,
}

impl Separation {
    fn s_side_vars(self) -> &'static [Var] {
        match self {
            Separation::TypeA => &[Var::S],
            Separation::TypeB => &[Var::S, Var::U],
            Separation::TypeC => &[Var::S, Var::V],
        }
    }

    fn param_side_vars(self) -> &'static [Var] {
        match self {
            Separation::TypeA => &[Var::U, Var::V],
            Separation::TypeB => &[Var::V],
            Separation::TypeC => &[Var::U],
        }
    }
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Separation::TypeA => "typeA",
            Separation::TypeB => "typeB",
            Separation::TypeC => "typeC",
        })
    }
}

/// Factors of a separable bundle: `α = λX`, `β = μY`, `γ = νZ`, `δ = ξW`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factors {
    pub lambda: Expr,
    pub mu: Expr,
    pub nu: Expr,
    pub xi: Expr,
    pub x: Expr,
    pub y: Expr,
    pub z: Expr,
    pub w: Expr,
}

impl Factors {
    fn s_side(&self) -> [(&'static str, &Expr); 4] {
        [("lambda", &self.lambda), ("mu", &self.mu), ("nu", &self.nu), ("xi", &self.xi)]
    }

    fn param_side(&self) -> [(&'static str, &Expr); 4] {
        [("X", &self.x), ("Y", &self.y), ("Z", &self.z), ("W", &self.w)]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarchingError {
    #[error("factor `{factor}` of a {kind} bundle may not depend on `{var}`")]
    ForeignVariable { kind: Separation, factor: &'static str, var: Var },
    #[error("factor `{factor}` of a typeA bundle is identically zero")]
    ZeroFactor { factor: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarchingScale {
    Generic { alpha: Expr, beta: Expr, gamma: Expr, delta: Expr },
    Separable { kind: Separation, factors: Factors },
}

impl MarchingScale {
    pub fn generic(alpha: Expr, beta: Expr, gamma: Expr, delta: Expr) -> Self {
        MarchingScale::Generic { alpha, beta, gamma, delta }
    }

    /// Checks the variable restrictions of `kind`. For type A the `s`-side
    /// factors must also not be the zero constant, since the family is only
    /// defined for factors that are not identically zero.
    pub fn separable(kind: Separation, factors: Factors) -> Result<Self, MarchingError> {
        let check = |pairs: [(&'static str, &Expr); 4], allowed: &[Var]| {
            for (factor, e) in pairs {
                if let Some(var) = e.variables().into_iter().find(|v| !allowed.contains(v)) {
                    return Err(MarchingError::ForeignVariable { kind, factor, var });
                }
            }
            Ok(())
        };
        check(factors.s_side(), kind.s_side_vars())?;
        check(factors.param_side(), kind.param_side_vars())?;
        if kind == Separation::TypeA {
            if let Some((factor, _)) = factors.s_side().into_iter().find(|(_, e)| e.is_zero()) {
                return Err(MarchingError::ZeroFactor { factor });
            }
        }
        Ok(MarchingScale::Separable { kind, factors })
    }

    pub fn type_a(factors: Factors) -> Result<Self, MarchingError> {
        Self::separable(Separation::TypeA, factors)
    }

    pub fn type_b(factors: Factors) -> Result<Self, MarchingError> {
        Self::separable(Separation::TypeB, factors)
    }

    pub fn type_c(factors: Factors) -> Result<Self, MarchingError> {
        Self::separable(Separation::TypeC, factors)
    }

    pub fn kind(&self) -> Option<Separation> {
        match self {
            MarchingScale::Generic { .. } => None,
            MarchingScale::Separable { kind, .. } => Some(*kind),
        }
    }

    /// The four coefficients as expressions in `(s, u, v)`.
    pub fn to_generic(&self) -> [Expr; 4] {
        match self {
            MarchingScale::Generic { alpha, beta, gamma, delta } => {
                [alpha.clone(), beta.clone(), gamma.clone(), delta.clone()]
            }
            MarchingScale::Separable { factors: f, .. } => [
                Expr::mul(f.lambda.clone(), f.x.clone()),
                Expr::mul(f.mu.clone(), f.y.clone()),
                Expr::mul(f.nu.clone(), f.z.clone()),
                Expr::mul(f.xi.clone(), f.w.clone()),
            ],
        }
    }

    /// `(α, β, γ, δ)` at one point. Separable bundles are evaluated factor by
    /// factor.
    pub fn eval(&self, s: f64, u: f64, v: f64) -> Result<[f64; 4], EvalError> {
        match self {
            MarchingScale::Generic { alpha, beta, gamma, delta } => Ok([
                alpha.eval(s, u, v)?,
                beta.eval(s, u, v)?,
                gamma.eval(s, u, v)?,
                delta.eval(s, u, v)?,
            ]),
            MarchingScale::Separable { factors: f, .. } => {
                let prod = |a: &Expr, b: &Expr| Ok::<_, EvalError>(a.eval(s, u, v)? * b.eval(s, u, v)?);
                Ok([
                    prod(&f.lambda, &f.x)?,
                    prod(&f.mu, &f.y)?,
                    prod(&f.nu, &f.z)?,
                    prod(&f.xi, &f.w)?,
                ])
            }
        }
    }

    /// Runs the checker matching the variant. `None` for generic bundles.
    pub fn check(&self, u0: f64, v0: f64, s_grid: &[f64], tol: f64) -> Option<ConditionReport> {
        match self {
            MarchingScale::Generic { .. } => None,
            MarchingScale::Separable { kind, factors } => Some(match kind {
                Separation::TypeA => check_type_a(factors, u0, v0, s_grid, tol),
                Separation::TypeB => check_type_b(factors, u0, v0, s_grid, tol),
                Separation::TypeC => check_type_c(factors, u0, v0, s_grid, tol),
            }),
        }
    }
}

/// Free function form of [`MarchingScale::eval`].
pub fn eval_marching(ms: &MarchingScale, s: f64, u: f64, v: f64) -> Result<[f64; 4], EvalError> {
    ms.eval(s, u, v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub pass: bool,
    /// Magnitude that decided the clause: the worst violation for "= 0"
    /// clauses, the smallest magnitude for "≠ 0" clauses.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub kind: Separation,
    pub isoparametric_ok: bool,
    /// Value of the nondegeneracy expression (smallest magnitude over the grid
    /// for types B and C).
    pub phi2_witness: f64,
    pub phi3_ok: bool,
    pub phi4_ok: bool,
    pub clauses: Vec<Clause>,
}

impl ConditionReport {
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.clauses.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

/// Collects clauses; evaluation failures turn into failed clauses plus one
/// trailing `evaluation` clause.
#[derive(Default)]
struct Clauses {
    list: Vec<Clause>,
    errors: BTreeSet<String>,
}

impl Clauses {
    fn push(&mut self, name: &'static str, outcome: Result<(bool, f64), EvalError>) -> bool {
        let (pass, residual) = match outcome {
            Ok(r) => r,
            Err(e) => {
                self.errors.insert(e.to_string());
                (false, f64::NAN)
            }
        };
        self.list.push(Clause { name, pass, residual, detail: None });
        pass
    }

    fn finish(mut self) -> Vec<Clause> {
        if !self.errors.is_empty() {
            let detail = self.errors.into_iter().collect::<Vec<_>>().join("; ");
            self.list.push(Clause { name: "evaluation", pass: false, residual: f64::NAN, detail: Some(detail) });
        }
        self.list
    }
}

/// Max over the grid of `|f(s)|`; passes when at most `tol`.
fn vanishes_on_grid(
    grid: &[f64],
    tol: f64,
    f: impl Fn(f64) -> Result<f64, EvalError>,
) -> Result<(bool, f64), EvalError> {
    let mut worst = 0.0_f64;
    for &s in grid {
        worst = worst.max(f(s)?.abs());
    }
    Ok((worst <= tol, worst))
}

/// Nonvanishing on the grid: every sample exceeds `tol` in magnitude and the
/// sign never flips between samples. Returns the sample of smallest
/// magnitude.
fn nonzero_on_grid(
    grid: &[f64],
    tol: f64,
    f: impl Fn(f64) -> Result<f64, EvalError>,
) -> Result<(bool, f64), EvalError> {
    let mut witness = f64::INFINITY;
    let mut sign = 0.0;
    let mut flipped = false;
    for &s in grid {
        let x = f(s)?;
        if x.abs() < witness.abs() {
            witness = x;
        }
        if x.abs() > tol {
            if sign != 0.0 && x.signum() != sign {
                flipped = true;
            }
            sign = x.signum();
        }
    }
    Ok((witness.abs() > tol && !flipped, witness))
}

/// Per-sample disjunction: for every `s`, at least one alternative has all its
/// members within `tol`. The residual is the worst over `s` of the best
/// alternative.
fn any_alternative_on_grid<const N: usize>(
    grid: &[f64],
    tol: f64,
    f: impl Fn(f64) -> Result<[Vec<f64>; N], EvalError>,
) -> Result<(bool, f64), EvalError> {
    let mut worst = 0.0_f64;
    for &s in grid {
        let alternatives = f(s)?;
        let best = alternatives
            .iter()
            .map(|members| members.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    Ok((worst <= tol, worst))
}

fn jacobian(a: &Expr, b: &Expr, u0: f64, v0: f64) -> Result<f64, EvalError> {
    let au = a.diff(Var::U).eval(0.0, u0, v0)?;
    let av = a.diff(Var::V).eval(0.0, u0, v0)?;
    let bu = b.diff(Var::U).eval(0.0, u0, v0)?;
    let bv = b.diff(Var::V).eval(0.0, u0, v0)?;
    Ok(au * bv - av * bu)
}

/// Type A: `λ(s)X(u,v)` etc.
///
/// Clauses: `X = Y = Z = W = 0` at the anchor; `ν(s) ≠ 0` and `ξ(s) ≠ 0` on the
/// grid; `Z_u W_v - Z_v W_u ≠ 0` at the anchor; and for every `s` both
/// `μ(s) = 0 ∨ Y_u W_v - Y_v W_u = 0` and `μ(s) = 0 ∨ Y_u Z_v - Y_v Z_u = 0`.
pub fn check_type_a(f: &Factors, u0: f64, v0: f64, grid: &[f64], tol: f64) -> ConditionReport {
    let mut c = Clauses::default();
    let at_anchor = |e: &Expr| e.eval(0.0, u0, v0);

    let iso = c.push(
        "anchor_vanishing",
        (|| {
            let worst = [&f.x, &f.y, &f.z, &f.w]
                .into_iter()
                .map(at_anchor)
                .try_fold(0.0_f64, |m, x| x.map(|x| m.max(x.abs())))?;
            Ok((worst <= tol, worst))
        })(),
    );
    c.push("nu_nonzero", nonzero_on_grid(grid, tol, |s| f.nu.eval(s, u0, v0)));
    c.push("xi_nonzero", nonzero_on_grid(grid, tol, |s| f.xi.eval(s, u0, v0)));

    let zw = jacobian(&f.z, &f.w, u0, v0);
    let witness = zw.as_ref().copied().unwrap_or(f64::NAN);
    c.push("zw_nondegenerate", zw.map(|j| (j.abs() > tol, j)));

    let y_alternative = |other: &Expr| -> Result<(bool, f64), EvalError> {
        let j = jacobian(&f.y, other, u0, v0)?;
        any_alternative_on_grid(grid, tol, |s| Ok([vec![f.mu.eval(s, u0, v0)?], vec![j]]))
    };
    let phi3 = c.push("mu_or_yw_jacobian", y_alternative(&f.w));
    let phi4 = c.push("mu_or_yz_jacobian", y_alternative(&f.z));

    ConditionReport {
        kind: Separation::TypeA,
        isoparametric_ok: iso,
        phi2_witness: witness,
        phi3_ok: phi3,
        phi4_ok: phi4,
        clauses: c.finish(),
    }
}

/// Types B and C share their clause structure; `side` is the variable of the
/// parameter-side factors and `cross` the extra variable of the `s`-side
/// factors.
fn check_split(
    kind: Separation,
    f: &Factors,
    u0: f64,
    v0: f64,
    grid: &[f64],
    tol: f64,
) -> ConditionReport {
    let (side, cross) = match kind {
        Separation::TypeB => (Var::V, Var::U),
        Separation::TypeC => (Var::U, Var::V),
        Separation::TypeA => unreachable!("type A has its own checker"),
    };
    let mut c = Clauses::default();
    let ev = |e: &Expr, s: f64| e.eval(s, u0, v0);

    let iso = c.push(
        "anchor_vanishing",
        vanishes_on_grid(grid, tol, |s| {
            let products = [
                ev(&f.lambda, s)? * ev(&f.x, s)?,
                ev(&f.mu, s)? * ev(&f.y, s)?,
                ev(&f.nu, s)? * ev(&f.z, s)?,
                ev(&f.xi, s)? * ev(&f.w, s)?,
            ];
            Ok(products.into_iter().fold(0.0, |m: f64, x| m.max(x.abs())))
        }),
    );

    // Type B: ν_u ξ Z W' - ν ξ_u W Z'   (' = d/dv)
    // Type C: ν ξ_v Z' W - ν_v ξ Z W'   (' = d/du)
    let (nu_x, xi_x) = (f.nu.diff(cross), f.xi.diff(cross));
    let (dz, dw) = (f.z.diff(side), f.w.diff(side));
    let nondegeneracy = |s: f64| -> Result<f64, EvalError> {
        let (nu, xi, z, w) = (ev(&f.nu, s)?, ev(&f.xi, s)?, ev(&f.z, s)?, ev(&f.w, s)?);
        let (nu_x, xi_x, dz, dw) = (ev(&nu_x, s)?, ev(&xi_x, s)?, ev(&dz, s)?, ev(&dw, s)?);
        Ok(match kind {
            Separation::TypeB => nu_x * xi * z * dw - nu * xi_x * w * dz,
            _ => nu * xi_x * dz * w - nu_x * xi * z * dw,
        })
    };
    let nondeg = nonzero_on_grid(grid, tol, nondegeneracy);
    let witness = nondeg.as_ref().map(|r| r.1).unwrap_or(f64::NAN);
    c.push("nondegenerate", nondeg);

    // β_x = μ_x Y and β_side = μ Y' must both vanish at the anchor.
    let mu_x = f.mu.diff(cross);
    let dy = f.y.diff(side);
    let y_ok = c.push(
        "y_mu_alternatives",
        any_alternative_on_grid(grid, tol, |s| {
            let (y, dy, mu, mu_x) = (ev(&f.y, s)?, ev(&dy, s)?, ev(&f.mu, s)?, ev(&mu_x, s)?);
            Ok([vec![y, mu], vec![dy, y], vec![dy, mu_x], vec![mu, mu_x]])
        }),
    );

    ConditionReport {
        kind,
        isoparametric_ok: iso,
        phi2_witness: witness,
        phi3_ok: y_ok,
        phi4_ok: y_ok,
        clauses: c.finish(),
    }
}

/// Type B: `λ(s,u)X(v)` etc.
///
/// Clauses: the four products vanish at the anchor for every grid `s`;
/// `ν_u ξ Z W' - ν ξ_u W Z' ≠ 0` on the grid; and for every `s` one of
/// `Y = μ = 0`, `Y' = Y = 0`, `Y' = μ_u = 0`, `μ = μ_u = 0`.
pub fn check_type_b(f: &Factors, u0: f64, v0: f64, grid: &[f64], tol: f64) -> ConditionReport {
    check_split(Separation::TypeB, f, u0, v0, grid, tol)
}

/// Type C: `λ(s,v)X(u)` etc., the mirror of type B with `u` and `v` exchanged.
/// The nondegeneracy expression is `ν ξ_v Z' W - ν_v ξ Z W'`.
pub fn check_type_c(f: &Factors, u0: f64, v0: f64, grid: &[f64], tol: f64) -> ConditionReport {
    check_split(Separation::TypeC, f, u0, v0, grid, tol)
}
