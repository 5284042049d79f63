//! The q-gamma integral identity approaching its classical beta-integral limit.

use std::time::Instant;

use qseries::error::Side;
use qseries::identities::Registry;
use qseries::param::{ParamExpr, QPoint};
use qseries::qgamma::{classical_gamma, gamma_quotient_lhs, integral_form_rhs_stepped};
use qseries::real::{PrecisionCtx, Real};

fn point(q: Option<&str>) -> QPoint {
    [("a", "0.2"), ("b", "0.8"), ("z", "0.3")]
        .into_iter()
        .fold(QPoint::new(q), |p, (k, v)| {
            p.with(k, ParamExpr::Literal(v.into()))
        })
}

fn rel(a: &Real, b: &Real) -> f64 {
    ((a - b) / b.clone()).abs().to_f64()
}

/// Quadratic extrapolation to `h = 0`.
fn extrapolate(h: &[f64; 3], f: &[Real]) -> Real {
    let mut out = Real::zero(f[0].bits());
    for i in 0..3 {
        let w: f64 = (0..3).filter(|&j| j != i).map(|j| h[j] / (h[j] - h[i])).product();
        out += &f[i] * &Real::from_f64(w, f[0].bits());
    }
    out
}

#[test]
fn both_sides_tend_to_the_beta_integral() {
    let start = Instant::now();
    let c = PrecisionCtx::new(20).unwrap();
    let qs = ["0.9", "0.99", "0.999"];
    let h = [0.1, 0.01, 0.001];
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for q in qs {
        let p = point(Some(q));
        let l = gamma_quotient_lhs(&p, &c).unwrap().value;
        let r = integral_form_rhs_stepped(&p, &c).unwrap().value;
        assert!(rel(&r, &l) < 1e-15, "q = {q}: sides differ by {:e}", rel(&r, &l));
        lhs.push(l);
        rhs.push(r);
    }

    let classical = Registry::global().get("eq-5.12").unwrap();
    let c30 = PrecisionCtx::new(30).unwrap();
    let beta = classical_gamma(&c30.parse("0.6").unwrap(), &c30).unwrap();
    let limit_lhs = classical.eval_side(Side::Lhs, &point(None), &c30).unwrap().value / beta.clone();
    let limit_rhs = classical.eval_side(Side::Rhs, &point(None), &c30).unwrap().value / beta;

    let ext_l = extrapolate(&h, &lhs);
    let ext_r = extrapolate(&h, &rhs);
    for (name, ext) in [("lhs", &ext_l), ("rhs", &ext_r)] {
        for limit in [&limit_lhs, &limit_rhs] {
            let d = rel(ext, limit);
            assert!(
                d < 1e-4,
                "{name} extrapolates to {} vs {}: {d:e}",
                ext.to_f64(),
                limit.to_f64()
            );
        }
    }
    // Plain values approach the limit monotonically in this range.
    let gaps: Vec<f64> = lhs.iter().map(|v| rel(v, &limit_lhs)).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "gaps {gaps:?}");
    eprintln!("q -> 1 check took {:.1} s", start.elapsed().as_secs_f64());
}

#[test]
fn stepped_route_agrees_with_registered_rhs() {
    let c = PrecisionCtx::new(30).unwrap();
    let p = point(Some("0.7"));
    let registered = Registry::global()
        .get("thm-5.3")
        .unwrap()
        .eval_side(Side::Rhs, &p, &c)
        .unwrap()
        .value;
    let stepped = integral_form_rhs_stepped(&p, &c).unwrap().value;
    assert!(rel(&stepped, &registered) < 1e-28);
}
