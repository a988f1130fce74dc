use isogeo_core::expr::{parse, parse_raw, BinaryOp, UnaryOp};
use isogeo_core::{Expr, Var};
use proptest::prelude::*;

fn un(op: UnaryOp, a: Expr) -> Expr {
    Expr::Unary(op, Box::new(a))
}

fn bin(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    Expr::Binary(op, Box::new(a), Box::new(b))
}

/// `1 + x*x`, positive everywhere.
fn positive(x: Expr) -> Expr {
    bin(BinaryOp::Add, Expr::Const(1.0), bin(BinaryOp::Mul, x.clone(), x))
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(Expr::Const),
        (1u8..=4).prop_map(|k| Expr::Const(k as f64)),
        prop_oneof![Just(Var::S), Just(Var::U), Just(Var::V)].prop_map(Expr::Var),
    ]
}

/// Unsimplified trees that are defined on all of `[-1, 1]³`: divisions,
/// logarithms and roots only see arguments bounded away from their
/// singularities.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinaryOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinaryOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinaryOp::Mul, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinaryOp::Div, a, positive(b))),
            inner.clone().prop_map(|a| un(UnaryOp::Neg, a)),
            inner.clone().prop_map(|a| un(UnaryOp::Sin, a)),
            inner.clone().prop_map(|a| un(UnaryOp::Cos, a)),
            inner.clone().prop_map(|a| un(UnaryOp::Tan, un(UnaryOp::Sin, a))),
            inner.clone().prop_map(|a| un(UnaryOp::Exp, un(UnaryOp::Cos, a))),
            inner.clone().prop_map(|a| un(UnaryOp::Ln, positive(a))),
            inner.prop_map(|a| un(UnaryOp::Sqrt, positive(a))),
        ]
    })
}

fn point() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
}

fn var() -> impl Strategy<Value = Var> {
    prop_oneof![Just(Var::S), Just(Var::U), Just(Var::V)]
}

fn shifted(p: (f64, f64, f64), var: Var, h: f64) -> (f64, f64, f64) {
    match var {
        Var::S => (p.0 + h, p.1, p.2),
        Var::U => (p.0, p.1 + h, p.2),
        Var::V => (p.0, p.1, p.2 + h),
    }
}

fn at(e: &Expr, p: (f64, f64, f64)) -> f64 {
    e.eval(p.0, p.1, p.2).expect("generated expressions are defined on the sample box")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn derivative_matches_central_difference(e in expr(), p in point(), var in var()) {
        let h = 1e-5;
        let fd = (at(&e, shifted(p, var, h)) - at(&e, shifted(p, var, -h))) / (2.0 * h);
        let d = at(&e.diff(var), p);
        prop_assert!((fd - d).abs() <= 1e-6_f64.max(1e-6 * d.abs()), "{e}: fd {fd} vs {d}");
    }

    #[test]
    fn print_parse_round_trip(e in expr(), p in point()) {
        let printed = e.to_string();
        let back = parse_raw(&printed).unwrap();
        let x = at(&e, p);
        prop_assert!((at(&back, p) - x).abs() <= 1e-12 * (1.0 + x.abs()), "{printed}");
        let again = parse(&back.to_string()).unwrap();
        prop_assert!((at(&again, p) - x).abs() <= 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn folding_preserves_values(e in expr(), p in point()) {
        let x = at(&e, p);
        let y = at(&e.simplified(), p);
        prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "{e}: {x} vs {y}");
        prop_assert!(e.simplified().size() <= e.size());
    }

    #[test]
    fn diff_is_linear(a in expr(), b in expr(), ka in -3.0..3.0f64, kb in -3.0..3.0f64, p in point(), var in var()) {
        let combo = Expr::add(Expr::mul(Expr::Const(ka), a.clone()), Expr::mul(Expr::Const(kb), b.clone()));
        let lhs = at(&combo.diff(var), p);
        let rhs = ka * at(&a.diff(var), p) + kb * at(&b.diff(var), p);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn repeated_diff_matches_diff_n(e in expr(), p in point(), var in var()) {
        let mut d = e.clone();
        for _ in 0..3 {
            d = d.diff(var);
        }
        let x = at(&d, p);
        prop_assert!((at(&e.diff_n(var, 3), p) - x).abs() <= 1e-12 * (1.0 + x.abs()));
    }
}
