//! Power products `prod a_n^(x^n)`, their convergence region over
//! `x in [-1, 1)`, and the Cauchy-product geometric-mean limits.

use serde::Serialize;

use crate::accum::AnalysisParams;
use crate::convtests::HypothesisCheck;
use crate::error::{Error, Result};
use crate::numerics::{rel_dev, signed_power, NeumaierSum};
use crate::seq::{PosSeq, RealSeq};
use crate::verdict::{classify_log_window, Verdict, VerdictKind};

/// A formal power product `a_0 a_1^x a_2^(x^2) ...` (origin 0), or the
/// origin-1 form `prod b_k^(x^k)` starting at k = 1.
#[derive(Clone)]
pub struct PowerProduct {
    pub base: PosSeq,
    pub x: f64,
}

impl PowerProduct {
    pub fn new(base: PosSeq, x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("x must be finite, got {x}")));
        }
        Ok(PowerProduct { base, x })
    }
}

/// Evaluate the power product over the first `n_max` factors: the log sum
/// `sum x^n log a_n` with `x^n` from [`signed_power`] (exact parity at
/// `x = -1`, renormalized iterative powers otherwise), classified by the
/// usual windowed analysis.
pub fn eval_power_product(pp: &PowerProduct, params: &AnalysisParams) -> Result<Verdict> {
    let origin = pp.base.origin();
    let n_max = params.n_max;
    let from = n_max - params.window;
    let mut acc = NeumaierSum::new();
    let mut window = Vec::with_capacity((params.window + 1) as usize);
    for k in 1..=n_max {
        let idx = origin + k - 1;
        let c = signed_power(pp.x, idx);
        acc.add(c * pp.base.log_term(idx)?);
        if k >= from {
            window.push(acc.value());
        }
    }
    Ok(classify_log_window(&window, n_max, params.eps))
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionScanReport {
    pub hypotheses: Vec<HypothesisCheck>,
    /// Per-grid-point verdicts.
    pub rows: Vec<(f64, Verdict)>,
    /// True when every grid point in [-1, 1) converged.
    pub all_converge_in_region: bool,
}

/// Scan the convergence region of `prod b_k^(x^k)` over a grid of `x`.
///
/// When the base satisfies the bounded-partial-sums ratio condition (or is
/// strictly increasing to 1, which implies it), every `x in [-1, 1)` must
/// converge.
pub fn power_region_scan(
    base: &PosSeq,
    grid: &[f64],
    params: &AnalysisParams,
) -> Result<RegionScanReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty x grid".into()));
    }
    let origin = base.origin();
    let n_max = params.n_max;
    let from = n_max - params.window;

    // ratio condition: sum |log(b_k / b_(k+1))| settles
    let mut ratio_abs = NeumaierSum::new();
    let mut ratio_window = Vec::with_capacity((params.window + 1) as usize);
    // Cor-form hypothesis: strictly increasing to 1
    let mut increasing = HypothesisCheck::ok("b strictly increasing", "checked up to the horizon");
    let mut prev = 0.0f64;
    let mut last = 0.0f64;
    for k in 1..=n_max {
        let idx = origin + k - 1;
        let b = base.term(idx)?;
        if b <= prev && increasing.holds {
            increasing = HypothesisCheck::fail(
                "b strictly increasing",
                Some(idx),
                format!("b_{idx} = {b} after {prev}"),
            );
        }
        prev = b;
        last = b;
        let next = base.term(idx + 1)?;
        ratio_abs.add((b / next).ln().abs());
        if k >= from {
            ratio_window.push(ratio_abs.value());
        }
    }
    let ratio_verdict = classify_log_window(&ratio_window, n_max, params.eps);
    let mut hypotheses = vec![
        if ratio_verdict.kind == VerdictKind::Converges {
            HypothesisCheck::ok(
                "prod mmod(b_n/b_(n+1)) converges",
                format!("mmod-log mass {:.6e}", ratio_abs.value()),
            )
        } else {
            HypothesisCheck::fail(
                "prod mmod(b_n/b_(n+1)) converges",
                None,
                format!("verdict {:?}", ratio_verdict.kind),
            )
        },
        increasing,
    ];
    hypotheses.push(if (last - 1.0).abs() < 0.05 {
        HypothesisCheck::ok("b_n -> 1", format!("b at the horizon is {last}"))
    } else {
        HypothesisCheck::fail("b_n -> 1", None, format!("b at the horizon is {last}"))
    });

    let mut rows = Vec::with_capacity(grid.len());
    let mut all_converge_in_region = true;
    for &x in grid {
        let v = eval_power_product(&PowerProduct::new(base.clone(), x)?, params)?;
        if (-1.0..1.0).contains(&x) && v.kind != VerdictKind::Converges {
            all_converge_in_region = false;
        }
        rows.push((x, v));
    }
    Ok(RegionScanReport {
        hypotheses,
        rows,
        all_converge_in_region,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyMeansReport {
    /// Limits A and B of the two factor products.
    pub a_limit: f64,
    pub b_limit: f64,
    /// `A_n^(1/n)`, `B_n^(1/n)`, `C_n^(1/n)`, `c_n^(1/n)` at the horizon.
    pub an_root: f64,
    pub bn_root: f64,
    pub cn_root: f64,
    pub c_term_root: f64,
    /// Largest relative deviation of `C_n = (prod A_k)(prod B_k)` across the
    /// checkpoints (two independent accumulation routes).
    pub identity_max_dev: f64,
    /// Largest relative deviation between a freshly-summed `log c_n` and the
    /// running `SA_n + SB_n` at the checkpoints.
    pub c_term_max_dev: f64,
    pub limits_ok: bool,
    pub identity_ok: bool,
    pub eps: f64,
}

/// Cauchy-product means: with `c_n = a_0 b_n a_1 b_(n-1) ... a_n b_0` and
/// `C_n = prod c_k`, checks the structural identity
/// `C_n = A_0 A_1 ... A_n B_0 B_1 ... B_n` and the limits
/// `A_n^(1/n) -> 1`, `B_n^(1/n) -> 1`, `C_n^(1/n) -> AB`, `c_n^(1/n) -> 1`.
pub fn cauchy_product_means(
    a: &PosSeq,
    b: &PosSeq,
    params: &AnalysisParams,
    eps: f64,
) -> Result<CauchyMeansReport> {
    // precondition: both products converge
    for (name, s) in [("a", a), ("b", b)] {
        let v = crate::accum::estimate_convergence(s, params)?;
        if !v.converges() {
            return Err(Error::Precondition(format!(
                "cauchy means need prod {name}_n to converge; verdict was {:?}",
                v.kind
            )));
        }
    }
    let n_max = params.n_max;
    let oa = a.origin();
    let ob = b.origin();
    let la = |k: u64| a.log_term(oa + k);
    let lb = |k: u64| b.log_term(ob + k);

    let mut sa = NeumaierSum::new(); // log A_n
    let mut sb = NeumaierSum::new(); // log B_n
    let mut c_joint = NeumaierSum::new(); // sum (SA_k + SB_k): log C_n, route 1
    let mut c_a = NeumaierSum::new(); // sum SA_k: route 2, A half
    let mut c_b = NeumaierSum::new(); // sum SB_k: route 2, B half
    let mut identity_max_dev = 0.0f64;
    let mut c_term_max_dev = 0.0f64;
    let mut last_c_term = 0.0f64;

    for n in 0..n_max {
        sa.add(la(n)?);
        sb.add(lb(n)?);
        let log_cn = sa.value() + sb.value();
        last_c_term = log_cn;
        c_joint.add(log_cn);
        c_a.add(sa.value());
        c_b.add(sb.value());

        let at_checkpoint = (n + 1).is_power_of_two() || n + 1 == n_max;
        if at_checkpoint {
            // route 2 for the structural identity
            let dev = (c_joint.value() - (c_a.value() + c_b.value())).exp_m1().abs();
            identity_max_dev = identity_max_dev.max(dev);
            // fresh pairwise sum of log c_n = sum_j (log a_j + log b_(n-j))
            let mut fresh = NeumaierSum::new();
            for j in 0..=n {
                fresh.add(la(j)? + lb(n - j)?);
            }
            let dev = (fresh.value() - log_cn).exp_m1().abs();
            c_term_max_dev = c_term_max_dev.max(dev);
        }
    }

    let nf = n_max as f64;
    let a_limit = sa.value().exp();
    let b_limit = sb.value().exp();
    let an_root = (sa.value() / nf).exp();
    let bn_root = (sb.value() / nf).exp();
    let cn_root = (c_joint.value() / nf).exp();
    let c_term_root = (last_c_term / nf).exp();

    let limits_ok = (an_root - 1.0).abs() <= eps
        && (bn_root - 1.0).abs() <= eps
        && rel_dev(cn_root, a_limit * b_limit) <= eps
        && (c_term_root - 1.0).abs() <= eps;
    let identity_ok = identity_max_dev <= 1e-10 && c_term_max_dev <= 1e-10;
    Ok(CauchyMeansReport {
        a_limit,
        b_limit,
        an_root,
        bn_root,
        cn_root,
        c_term_root,
        identity_max_dev,
        c_term_max_dev,
        limits_ok,
        identity_ok,
        eps,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanLimitReport {
    pub expected: f64,
    pub final_mean: f64,
    pub abs_dev: f64,
    pub pass: bool,
    pub hypotheses: Vec<HypothesisCheck>,
}

/// Check that the weighted geometric mean of `a` approaches the expected
/// limit `K` (requires `a_n -> K` and a divergent weight sum).
pub fn mean_limit_check(
    a: &PosSeq,
    weights: &RealSeq,
    expected: f64,
    n_max: u64,
    eps: f64,
) -> Result<MeanLimitReport> {
    if !(expected.is_finite() && expected > 0.0) {
        return Err(Error::InvalidInput(format!(
            "expected limit must be a positive real, got {expected}"
        )));
    }
    let g = crate::accum::weighted_geometric_means(
        a,
        weights,
        n_max,
        (n_max / 16).max(1),
        crate::numerics::Precision::Fast,
    )?;
    let origin = a.origin();
    let a_final = a.term(origin + n_max - 1)?;
    let mut hypotheses = vec![if rel_dev(a_final, expected) < 0.05 {
        HypothesisCheck::ok("a_n -> K", format!("a at the horizon is {a_final}"))
    } else {
        HypothesisCheck::fail("a_n -> K", None, format!("a at the horizon is {a_final}"))
    }];
    hypotheses.push(if g.weights_divergent {
        HypothesisCheck::ok("sum t_n = +inf", "weight sum still grows at the horizon")
    } else {
        HypothesisCheck::fail(
            "sum t_n = +inf",
            None,
            g.diagnostic.clone().unwrap_or_default(),
        )
    });
    let abs_dev = (g.final_value - expected).abs();
    let all_hold = hypotheses.iter().all(|h| h.holds);
    Ok(MeanLimitReport {
        expected,
        final_mean: g.final_value,
        abs_dev,
        pass: all_hold && abs_dev <= eps,
        hypotheses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::RealSeq as RS;

    fn params(n: u64) -> AnalysisParams {
        AnalysisParams::with_horizon(n)
    }

    const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

    #[test]
    fn factorial_base_at_x_one_gives_e_to_the_e() {
        // a_n = exp(1/n!) for n = 0..=30, origin 0; sum 1/n! = e
        let mut values = Vec::new();
        let mut fact = 1.0f64;
        for n in 0..=30u64 {
            if n > 0 {
                fact *= n as f64;
            }
            values.push((1.0 / fact).exp());
        }
        let base = PosSeq::from_values(values).unwrap().with_origin(0).unwrap();
        let pp = PowerProduct::new(base, 1.0).unwrap();
        let v = eval_power_product(&pp, &AnalysisParams::new(1e-9, 31, 15, crate::numerics::Precision::Fast).unwrap()).unwrap();
        assert_eq!(v.kind, VerdictKind::Converges);
        let want = std::f64::consts::E.exp();
        assert!(rel_dev(v.limit_estimate.unwrap(), want) < 1e-10);
    }

    #[test]
    fn x_zero_keeps_only_the_leading_factor() {
        let base = PosSeq::from_values(vec![5.0, 9.0, 9.0, 9.0, 9.0, 9.0, 9.0, 9.0, 9.0, 9.0])
            .unwrap()
            .with_origin(0)
            .unwrap();
        let pp = PowerProduct::new(base, 0.0).unwrap();
        let v = eval_power_product(&pp, &AnalysisParams::new(1e-9, 10, 8, crate::numerics::Precision::Fast).unwrap()).unwrap();
        assert_eq!(v.kind, VerdictKind::Converges);
        assert!(rel_dev(v.limit_estimate.unwrap(), 5.0) < 1e-14);
    }

    #[test]
    fn constant_one_base_is_one_everywhere() {
        let base = PosSeq::from_expr_str("1").unwrap();
        for x in [-1.0, -0.5, 0.0, 0.5, 0.99] {
            let pp = PowerProduct::new(base.clone(), x).unwrap();
            let v = eval_power_product(&pp, &params(1000)).unwrap();
            assert_eq!(v.kind, VerdictKind::Converges);
            assert_eq!(v.limit_estimate, Some(1.0));
        }
    }

    #[test]
    fn power_product_matches_exponentiated_view_exactly() {
        let base = PosSeq::from_expr_str("n/(n+1)").unwrap();
        let x = -0.75;
        let pp = PowerProduct::new(base.clone(), x).unwrap();
        let direct = eval_power_product(&pp, &params(5000)).unwrap();

        let view = PosSeq::exponentiated(base, RS::powers(x));
        let via_view = crate::accum::estimate_convergence(&view, &params(5000)).unwrap();
        // two code paths, one value
        assert_eq!(direct.limit_estimate, via_view.limit_estimate);
    }

    #[test]
    fn wallis_point_of_the_region_scan() {
        let base = PosSeq::from_expr_str("n/(n+1)").unwrap();
        let r = power_region_scan(&base, &[-1.0, -0.5, 0.0, 0.5, 0.9], &params(400_000)).unwrap();
        assert!(r.hypotheses.iter().all(|h| h.holds), "{:#?}", r.hypotheses);
        assert!(r.all_converge_in_region);
        let at_minus_one = &r.rows[0].1;
        assert!((at_minus_one.limit_estimate.unwrap() - HALF_PI).abs() < 1e-4);
    }

    #[test]
    fn endpoint_x_equals_one_diverges_to_zero() {
        let base = PosSeq::from_expr_str("n/(n+1)").unwrap();
        let r = power_region_scan(&base, &[1.0], &params(200_000)).unwrap();
        assert_eq!(r.rows[0].1.kind, VerdictKind::DivergesToZero);
        // the region flag only speaks about [-1, 1)
        assert!(r.all_converge_in_region);
    }

    #[test]
    fn cauchy_means_geometric_example() {
        // a_n = b_n = exp(2^-n) from n = 0: A = B = e^2, C_n^(1/n) -> e^4
        let base = PosSeq::from_expr_str("exp((1/2)^n)")
            .unwrap()
            .with_origin(0)
            .unwrap();
        let r = cauchy_product_means(&base, &base, &params(100_000), 1e-2).unwrap();
        assert!(r.identity_ok, "identity dev {}", r.identity_max_dev);
        assert!(r.limits_ok, "roots: {} {} {} {}", r.an_root, r.bn_root, r.cn_root, r.c_term_root);
        assert!(rel_dev(r.cn_root, 4.0f64.exp()) < 1e-2);
        assert!(rel_dev(r.a_limit, 2.0f64.exp()) < 1e-6);
    }

    #[test]
    fn cauchy_means_trivial_example() {
        let base = PosSeq::from_expr_str("1").unwrap().with_origin(0).unwrap();
        let r = cauchy_product_means(&base, &base, &params(10_000), 1e-2).unwrap();
        assert_eq!(r.a_limit, 1.0);
        assert_eq!(r.cn_root, 1.0);
        assert_eq!(r.identity_max_dev, 0.0);
    }

    #[test]
    fn cauchy_means_precondition() {
        let bad = PosSeq::from_expr_str("1+1/(n+1)").unwrap().with_origin(0).unwrap();
        match cauchy_product_means(&bad, &bad, &params(10_000), 1e-2) {
            Err(Error::Precondition(_)) => {}
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn mean_limit_examples() {
        let a = PosSeq::from_expr_str("2 + 1/n").unwrap();
        let r = mean_limit_check(&a, &RS::constant(1.0), 2.0, 100_000, 1e-2).unwrap();
        assert!(r.pass, "dev {}", r.abs_dev);

        // faster weights tighten the mean
        let r = mean_limit_check(&a, &RS::from_expr_str("n").unwrap(), 2.0, 100_000, 1e-3).unwrap();
        assert!(r.pass, "dev {}", r.abs_dev);

        let constant = PosSeq::from_expr_str("2").unwrap();
        let r = mean_limit_check(&constant, &RS::constant(1.0), 2.0, 10_000, 1e-12).unwrap();
        assert!(r.pass);
    }
}
