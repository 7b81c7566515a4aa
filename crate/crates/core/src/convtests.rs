//! Convergence tests: root-type sufficiency, condensation, alternating
//! products, Cesaro product means, and the bounded-partial-sums test with
//! its summation-by-parts identity.
//!
//! Every test reports its hypothesis checks explicitly. Hypotheses are
//! asymptotic, so they are certified up to the horizon and recorded as
//! assumptions, never silently trusted.

use serde::Serialize;

use crate::accum::{run_trajectory, AnalysisParams};
use crate::error::{Error, Result};
use crate::numerics::{CompensatedSum, NeumaierSum, Precision};
use crate::seq::{PosSeq, RealSeq};
use crate::verdict::{classify_log_window, Verdict, VerdictKind};

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub holds: bool,
    /// Index of the first violation, when one was found.
    pub witness: Option<u64>,
    pub note: String,
}

impl HypothesisCheck {
    pub(crate) fn ok(name: &str, note: impl Into<String>) -> Self {
        HypothesisCheck {
            name: name.into(),
            holds: true,
            witness: None,
            note: note.into(),
        }
    }

    pub(crate) fn fail(name: &str, witness: Option<u64>, note: impl Into<String>) -> Self {
        HypothesisCheck {
            name: name.into(),
            holds: false,
            witness,
            note: note.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuxEstimate {
    pub name: String,
    pub value: f64,
}

/// Uniform wrapper for test outcomes: the conclusion is only asserted when
/// every hypothesis check holds.
#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    pub test: String,
    pub hypotheses: Vec<HypothesisCheck>,
    pub conclusion: Option<Verdict>,
    pub aux: Vec<AuxEstimate>,
}

impl TestReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }
}

/// Does the partial-sum stream of `t` still grow at the horizon? Convergent
/// weight sums collapse their latest increment.
fn weights_look_divergent(t_quarter: f64, t_half: f64, t_full: f64) -> bool {
    (t_full - t_half) > 0.6 * (t_half - t_quarter)
}

// ---------------------------------------------------------------------------
// Root-type test
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct RootTypeReport {
    pub report: TestReport,
    /// Log-domain tail estimates of `a_n^(1/t_n)`.
    pub liminf_ratio: f64,
    pub limsup_ratio: f64,
    pub ratio_stable: bool,
}

/// Sufficient test: when `a_n^(1/t_n)` has finite positive liminf/limsup and
/// `sum t_n` converges, the product converges. One-sided variants apply when
/// all factors sit on one side of 1.
pub fn root_type_test(
    a: &PosSeq,
    t: &RealSeq,
    params: &AnalysisParams,
) -> Result<RootTypeReport> {
    let n_max = params.n_max;
    let origin = a.origin();
    let mut hyp = Vec::new();

    // weights positive + sum convergent
    let mut t_sum = NeumaierSum::new();
    let (mut t_quarter, mut t_half) = (0.0, 0.0);
    let mut t_positive = HypothesisCheck::ok("t_n > 0", "checked up to the horizon");
    // ratio stats over the tail window, in log domain
    let from = n_max - params.window;
    let mut lr_min1 = f64::INFINITY;
    let mut lr_max1 = f64::NEG_INFINITY;
    let mut lr_min2 = f64::INFINITY;
    let mut lr_max2 = f64::NEG_INFINITY;
    let half = from + params.window / 2;
    let mut all_ge_one = true;
    let mut all_le_one = true;

    for k in 1..=n_max {
        let idx = origin + k - 1;
        let tv = t.value_at(idx)?;
        if tv <= 0.0 && t_positive.holds {
            t_positive = HypothesisCheck::fail("t_n > 0", Some(idx), format!("t_{idx} = {tv}"));
        }
        t_sum.add(tv.max(0.0));
        if k == n_max / 4 {
            t_quarter = t_sum.value();
        }
        if k == n_max / 2 {
            t_half = t_sum.value();
        }
        let la = a.log_term(idx)?;
        all_ge_one &= la >= 0.0;
        all_le_one &= la <= 0.0;
        if k >= from && tv > 0.0 {
            let lr = la / tv;
            if k < half {
                lr_min1 = lr_min1.min(lr);
                lr_max1 = lr_max1.max(lr);
            } else {
                lr_min2 = lr_min2.min(lr);
                lr_max2 = lr_max2.max(lr);
            }
        }
    }
    hyp.push(t_positive);
    let t_divergent = weights_look_divergent(t_quarter, t_half, t_sum.value());
    hyp.push(if t_divergent {
        HypothesisCheck::fail(
            "sum t_n converges",
            None,
            "weight sum still grows at the horizon",
        )
    } else {
        HypothesisCheck::ok("sum t_n converges", "increments collapse at the horizon")
    });

    // stability: both half-window extreme bands agree
    let stable = (lr_max1 - lr_max2).abs() <= 0.05 * (1.0 + lr_max2.abs())
        && (lr_min1 - lr_min2).abs() <= 0.05 * (1.0 + lr_min2.abs());
    let liminf_ratio = lr_min2;
    let limsup_ratio = lr_max2;
    // one-sided relaxations: factors >= 1 only need the limsup, factors <= 1
    // only the liminf
    let upper_needed = !all_le_one;
    let lower_needed = !all_ge_one;
    let upper_ok = !upper_needed || (stable && limsup_ratio.is_finite());
    let lower_ok = !lower_needed || (stable && liminf_ratio.is_finite() && liminf_ratio > -700.0);

    let mut report = TestReport {
        test: "root-type".into(),
        hypotheses: hyp,
        conclusion: None,
        aux: vec![
            AuxEstimate {
                name: "liminf a_n^(1/t_n)".into(),
                value: liminf_ratio.exp(),
            },
            AuxEstimate {
                name: "limsup a_n^(1/t_n)".into(),
                value: limsup_ratio.exp(),
            },
        ],
    };
    let fires = report.hypotheses_hold() && upper_ok && lower_ok;
    if fires {
        let traj = run_trajectory(a, params)?;
        report.conclusion = Some(Verdict {
            kind: VerdictKind::Converges,
            limit_estimate: Some(traj.s_raw.exp()),
            liminf_estimate: None,
            limsup_estimate: None,
            n_used: n_max,
            eps: params.eps,
            evidence: "root-type sufficient condition".into(),
        });
    }
    Ok(RootTypeReport {
        report,
        liminf_ratio,
        limsup_ratio,
        ratio_stable: stable,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SegmentSandwich {
    pub segments: u32,
    pub violations: u32,
    pub alpha_fit: f64,
    pub beta_fit: f64,
}

/// Proof-side check for the root-type test: over sampled segments,
/// `alpha'^(sum t) < prod a < beta'^(sum t)` for fitted bracketing constants.
pub fn root_segment_sandwich(
    a: &PosSeq,
    t: &RealSeq,
    from: u64,
    to: u64,
    segments: u32,
    seed: u64,
) -> Result<SegmentSandwich> {
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    // fit alpha' and beta' just outside the realized ratio band
    let mut lr_min = f64::INFINITY;
    let mut lr_max = f64::NEG_INFINITY;
    for idx in from..=to {
        let lr = a.log_term(idx)? / t.value_at(idx)?;
        lr_min = lr_min.min(lr);
        lr_max = lr_max.max(lr);
    }
    let la = lr_min - 0.01 * (1.0 + lr_min.abs());
    let lb = lr_max + 0.01 * (1.0 + lr_max.abs());

    let mut rng = SmallRng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..segments {
        let m = rng.gen_range(from..to);
        let n = rng.gen_range(m..=to);
        let mut logs = NeumaierSum::new();
        let mut ts = NeumaierSum::new();
        for idx in m..=n {
            logs.add(a.log_term(idx)?);
            ts.add(t.value_at(idx)?);
        }
        let s = logs.value();
        let w = ts.value();
        if !(w * la < s && s < w * lb) {
            violations += 1;
        }
    }
    Ok(SegmentSandwich {
        segments,
        violations,
        alpha_fit: la.exp(),
        beta_fit: lb.exp(),
    })
}

// ---------------------------------------------------------------------------
// Condensation test
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CondensationReport {
    pub report: TestReport,
    /// Verdict for the condensed product `prod a_(2^k)^(2^k)`.
    pub condensed_verdict: Verdict,
    /// Verdict for the original product at the analysis horizon.
    pub original_verdict: Verdict,
    pub verdicts_agree: bool,
    pub condensed_value: Option<f64>,
    pub depth: u32,
}

/// For non-increasing factors `>= 1`, the product converges iff the
/// condensed product `a_1 a_2^2 a_4^4 a_8^8 ...` converges. Random access to
/// the term rule makes indices up to `2^depth` reachable directly.
pub fn condensation_test(
    a: &PosSeq,
    params: &AnalysisParams,
    depth: u32,
) -> Result<CondensationReport> {
    if a.origin() != 1 {
        return Err(Error::InvalidInput("condensation expects origin-1 sequences".into()));
    }
    let depth = depth.clamp(8, 48);

    // hypothesis: a_1 >= a_2 >= ... >= 1, scanned densely near the head and
    // at the dyadic points actually used
    let mut hypothesis = HypothesisCheck::ok(
        "a_1 >= a_2 >= ... >= 1",
        format!("checked densely to 10^4 and at dyadic indices to 2^{depth}"),
    );
    let mut prev = f64::INFINITY;
    let dense_to = 10_000u64.min(params.n_max);
    'scan: {
        for idx in 1..=dense_to {
            match a.term(idx) {
                Ok(v) => {
                    if v < 1.0 || v > prev {
                        hypothesis = HypothesisCheck::fail(
                            "a_1 >= a_2 >= ... >= 1",
                            Some(idx),
                            format!("a_{idx} = {v}"),
                        );
                        break 'scan;
                    }
                    prev = v;
                }
                Err(e) => {
                    hypothesis = HypothesisCheck::fail(
                        "a_1 >= a_2 >= ... >= 1",
                        Some(idx),
                        format!("{e}"),
                    );
                    break 'scan;
                }
            }
        }
        let mut prev_dyadic = prev;
        for k in 0..=depth {
            let idx = 1u64 << k;
            if idx <= dense_to {
                continue;
            }
            match a.term(idx) {
                Ok(v) => {
                    if v < 1.0 || v > prev_dyadic {
                        hypothesis = HypothesisCheck::fail(
                            "a_1 >= a_2 >= ... >= 1",
                            Some(idx),
                            format!("a_{idx} = {v}"),
                        );
                        break 'scan;
                    }
                    prev_dyadic = v;
                }
                Err(e) => {
                    hypothesis = HypothesisCheck::fail(
                        "a_1 >= a_2 >= ... >= 1",
                        Some(idx),
                        format!("{e}"),
                    );
                    break 'scan;
                }
            }
        }
    }

    if !hypothesis.holds {
        let report = TestReport {
            test: "condensation".into(),
            hypotheses: vec![hypothesis],
            conclusion: None,
            aux: vec![],
        };
        let inconclusive = Verdict::inconclusive(0, params.eps, "hypothesis failed");
        return Ok(CondensationReport {
            report,
            condensed_verdict: inconclusive.clone(),
            original_verdict: inconclusive,
            verdicts_agree: true,
            condensed_value: None,
            depth,
        });
    }

    // condensed trajectory: V_K = sum of 2^k log a_(2^k)
    let mut acc = NeumaierSum::new();
    let mut condensed = Vec::with_capacity(depth as usize + 1);
    for k in 0..=depth {
        let idx = 1u64 << k;
        let w = (idx as f64) * a.log_term(idx)?;
        acc.add(w);
        condensed.push(acc.value());
    }
    let points = condensed.len();
    let window = &condensed[points / 2..];
    let condensed_verdict = classify_log_window(window, depth as u64 + 1, params.eps);
    let condensed_value = condensed_verdict.limit_estimate;

    let original_verdict = crate::accum::estimate_convergence(a, params)?;
    let verdicts_agree = condensed_verdict.kind == original_verdict.kind;

    let report = TestReport {
        test: "condensation".into(),
        hypotheses: vec![hypothesis],
        conclusion: Some(condensed_verdict.clone()),
        aux: vec![AuxEstimate {
            name: "condensed log sum".into(),
            value: acc.value(),
        }],
    };
    Ok(CondensationReport {
        report,
        condensed_verdict,
        original_verdict,
        verdicts_agree,
        condensed_value,
        depth,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CondensationSandwich {
    pub checks: u32,
    pub violations: u32,
}

/// Proof-side inequalities: `u_n <= v_k` for `n < 2^k` and `u_n^2 >= v_k`
/// for `n > 2^k`, on realized prefixes.
pub fn condensation_sandwich(a: &PosSeq, depth: u32, n_max: u64) -> Result<CondensationSandwich> {
    let mut v = Vec::new();
    let mut acc = NeumaierSum::new();
    for k in 0..=depth {
        let idx = 1u64 << k;
        if idx > n_max {
            break;
        }
        acc.add((idx as f64) * a.log_term(idx)?);
        v.push((idx, acc.value()));
    }
    let mut s = NeumaierSum::new();
    let mut checks = 0;
    let mut violations = 0;
    let slack = 1e-12;
    for n in 1..=n_max {
        s.add(a.log_term(n)?);
        let u = s.value();
        for &(p2, vk) in &v {
            if n < p2 {
                checks += 1;
                if u > vk + slack * (1.0 + vk.abs()) {
                    violations += 1;
                }
            } else if n > p2 {
                checks += 1;
                if 2.0 * u < vk - slack * (1.0 + vk.abs()) {
                    violations += 1;
                }
            }
        }
    }
    Ok(CondensationSandwich { checks, violations })
}

// ---------------------------------------------------------------------------
// Alternating products
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct AlternatingReport {
    pub report: TestReport,
    /// Value of `prod a_n^((-1)^(n+1))` at the horizon.
    pub value: f64,
    /// Every even partial product stayed below `a_1` (proof bound).
    pub even_partials_below_a1: bool,
    pub max_even_partial: f64,
    pub a1: f64,
}

/// Alternating product `a_1 a_2^-1 a_3 a_4^-1 ...` of a strictly decreasing
/// sequence converging to 1. The corollary form for sequences in (0,1) is
/// reached through [`PosSeq::complement_reciprocal`].
pub fn alternating_product(a: &PosSeq, params: &AnalysisParams) -> Result<AlternatingReport> {
    let n_max = params.n_max;
    let origin = a.origin();
    let mut hyp_gt1 = HypothesisCheck::ok("a_n > 1", "checked up to the horizon");
    let mut hyp_dec = HypothesisCheck::ok("strictly decreasing", "checked up to the horizon");

    let a1 = a.term(origin)?;
    let mut prev = f64::INFINITY;
    let mut acc = NeumaierSum::new();
    let mut window = Vec::with_capacity((params.window + 1) as usize);
    let from = n_max - params.window;
    let mut max_even_partial = f64::NEG_INFINITY;
    let mut even_ok = true;
    let log_a1 = a.log_term(origin)?;
    let mut last = 1.0;

    for k in 1..=n_max {
        let idx = origin + k - 1;
        let v = a.term(idx)?;
        if v <= 1.0 && hyp_gt1.holds {
            hyp_gt1 = HypothesisCheck::fail("a_n > 1", Some(idx), format!("a_{idx} = {v}"));
        }
        if v >= prev && hyp_dec.holds {
            hyp_dec = HypothesisCheck::fail(
                "strictly decreasing",
                Some(idx),
                format!("a_{idx} = {v} >= previous {prev}"),
            );
        }
        prev = v;
        last = v;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc.add(sign * a.log_term(idx)?);
        if k % 2 == 0 {
            let s = acc.value();
            max_even_partial = max_even_partial.max(s);
            if s >= log_a1 {
                even_ok = false;
            }
        }
        if k >= from {
            window.push(acc.value());
        }
    }

    let to_one = if (last - 1.0).abs() < 0.05 {
        HypothesisCheck::ok("a_n -> 1", format!("a at the horizon is {last}"))
    } else {
        HypothesisCheck::fail("a_n -> 1", None, format!("a at the horizon is {last}"))
    };

    let verdict = classify_log_window(&window, n_max, params.eps);
    let hypotheses = vec![hyp_gt1, hyp_dec, to_one];
    let all_hold = hypotheses.iter().all(|h| h.holds);
    let report = TestReport {
        test: "alternating-product".into(),
        hypotheses,
        conclusion: if all_hold { Some(verdict) } else { None },
        aux: vec![AuxEstimate {
            name: "a_1 (upper bound for even partials)".into(),
            value: a1,
        }],
    };
    Ok(AlternatingReport {
        report,
        value: acc.value().exp(),
        even_partials_below_a1: even_ok,
        max_even_partial: max_even_partial.exp(),
        a1,
    })
}

// ---------------------------------------------------------------------------
// Cesaro product means
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CesaroReport {
    /// Decimated `(n, sigma_n)` samples, ending at the horizon.
    pub points: Vec<(u64, f64)>,
    pub final_sigma: f64,
    pub weight_sum: f64,
    pub weights_divergent: bool,
}

/// Weighted geometric means of the partial products:
/// `sigma_n = (u_1^{t_1} ... u_n^{t_n})^(1/(t_1+...+t_n))`.
pub fn cesaro_product_mean(
    a: &PosSeq,
    t: &RealSeq,
    n_max: u64,
    every: u64,
    precision: Precision,
) -> Result<CesaroReport> {
    if n_max < 4 {
        return Err(Error::InvalidInput("horizon too small".into()));
    }
    let origin = a.origin();
    let every = every.max(1);
    let mut s = CompensatedSum::new(precision); // log u_n
    let mut num = CompensatedSum::new(precision); // sum t_k log u_k
    let mut den = CompensatedSum::new(precision); // sum t_k
    let mut points = Vec::new();
    let (mut tq, mut th) = (0.0, 0.0);
    let mut sigma = f64::NAN;
    for k in 1..=n_max {
        let idx = origin + k - 1;
        s.add(a.log_term(idx)?);
        let tv = t.value_at(idx)?;
        if tv <= 0.0 {
            return Err(Error::eval(idx, format!("weight t_{idx} = {tv} must be positive")));
        }
        num.add(tv * s.value());
        den.add(tv);
        sigma = (num.value() / den.value()).exp();
        if k % every == 0 || k == n_max {
            points.push((k, sigma));
        }
        if k == n_max / 4 {
            tq = den.value();
        }
        if k == n_max / 2 {
            th = den.value();
        }
    }
    Ok(CesaroReport {
        points,
        final_sigma: sigma,
        weight_sum: den.value(),
        weights_divergent: weights_look_divergent(tq, th, den.value()),
    })
}

// ---------------------------------------------------------------------------
// Bounded-partial-sums (Abel-type) test
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct AbelReport {
    pub report: TestReport,
    /// Value of `prod b_k^{a_k}` at the horizon.
    pub value: f64,
    pub verdict: Verdict,
    /// Exact maximum of `|sum_{k=n..m} a_k|` over realized segments.
    pub bound_m: f64,
    /// Largest relative deviation of the summation-by-parts identity at the
    /// checkpoints.
    pub identity_max_dev: f64,
    pub identity_ok: bool,
}

/// Test for `prod b_k^{a_k}`: the ratio products `b_n/b_{n+1}` must converge
/// m-absolutely, `b_n -> 1`, and the segment sums of `a` must be bounded.
/// The proof's summation-by-parts identity is verified at every checkpoint.
pub fn abel_type_product(b: &PosSeq, a: &RealSeq, params: &AnalysisParams) -> Result<AbelReport> {
    let n_max = params.n_max;
    let origin = b.origin();

    // segment-sum bound via prefix extrema: max |P_m - P_j| over j < m
    let mut prefix = 0.0f64;
    let mut prefix_min = 0.0f64;
    let mut prefix_max = 0.0f64;
    let mut bound = 0.0f64;
    let mut bound_half = 0.0f64;

    // m-absolute mass of the ratio products
    let mut ratio_abs = NeumaierSum::new();
    let mut ratio_abs_window = Vec::with_capacity((params.window + 1) as usize);

    // the product itself
    let mut s = NeumaierSum::new();
    let mut window = Vec::with_capacity((params.window + 1) as usize);
    let from = n_max - params.window;

    // independent summation-by-parts route:
    //   b_1^{a_1}...b_n^{a_n}
    //     = prod_{j<n} (b_j/b_{j+1})^{A_j} * b_n^{A_n},  A_j = a_1+...+a_j
    let mut rhs = NeumaierSum::new();
    let mut identity_max_dev = 0.0f64;

    let mut b_last = 1.0;
    for k in 1..=n_max {
        let idx = origin + k - 1;
        let bv = b.term(idx)?;
        let lb = b.log_term(idx)?;
        let av = a.value_at(idx)?;
        b_last = bv;

        prefix += av;
        s.add(av * lb);
        if k >= from {
            window.push(s.value());
        }

        // ratio b_k / b_{k+1}
        let b_next = b.term(idx + 1)?;
        let lr = (bv / b_next).ln();
        ratio_abs.add(lr.abs());
        if k >= from {
            ratio_abs_window.push(ratio_abs.value());
        }

        // segment bound update (P_0 = 0 included)
        bound = bound.max(prefix - prefix_min).max(prefix_max - prefix);
        prefix_min = prefix_min.min(prefix);
        prefix_max = prefix_max.max(prefix);
        if k == n_max / 2 {
            bound_half = bound;
        }

        // identity at dyadic checkpoints and the horizon
        if k.is_power_of_two() || k == n_max {
            let rhs_full = rhs.value() + prefix * lb;
            let dev = (s.value() - rhs_full).exp_m1().abs();
            identity_max_dev = identity_max_dev.max(dev);
        }
        // extend the telescoped prefix for the next step
        rhs.add(prefix * lr);
    }

    let ratio_verdict = classify_log_window(&ratio_abs_window, n_max, params.eps);
    let hyp_ratio = if ratio_verdict.kind == VerdictKind::Converges {
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
    };
    let hyp_to_one = if (b_last - 1.0).abs() < 0.05 {
        HypothesisCheck::ok("b_n -> 1", format!("b at the horizon is {b_last}"))
    } else {
        HypothesisCheck::fail("b_n -> 1", None, format!("b at the horizon is {b_last}"))
    };
    // bounded segment sums: the realized max must stop growing
    let hyp_bounded = if bound <= bound_half * 1.05 + 1e-12 {
        HypothesisCheck::ok(
            "segment sums of a bounded",
            format!("realized bound M = {bound}"),
        )
    } else {
        HypothesisCheck::fail(
            "segment sums of a bounded",
            None,
            format!("bound grew from {bound_half} to {bound} over the second half"),
        )
    };

    let verdict = classify_log_window(&window, n_max, params.eps);
    let identity_ok = identity_max_dev <= 1e-10;
    if !identity_ok {
        return Err(Error::Domain(format!(
            "summation-by-parts identity violated: relative deviation {identity_max_dev:.3e}"
        )));
    }
    let hypotheses = vec![hyp_ratio, hyp_to_one, hyp_bounded];
    let all_hold = hypotheses.iter().all(|h| h.holds);
    let report = TestReport {
        test: "abel-type".into(),
        hypotheses,
        conclusion: if all_hold { Some(verdict.clone()) } else { None },
        aux: vec![AuxEstimate {
            name: "segment bound M".into(),
            value: bound,
        }],
    };
    Ok(AbelReport {
        report,
        value: s.value().exp(),
        verdict,
        bound_m: bound,
        identity_max_dev,
        identity_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_dev;

    fn seq(text: &str) -> PosSeq {
        PosSeq::from_expr_str(text).unwrap()
    }

    fn params(n: u64) -> AnalysisParams {
        AnalysisParams::with_horizon(n)
    }

    const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

    #[test]
    fn root_type_constant_ratio_concludes() {
        // a_n = exp(1/n^2) with t_n = 1/n^2: the ratio is exactly e
        let a = seq("exp(1/n^2)");
        let t = RealSeq::from_expr_str("1/n^2").unwrap();
        let r = root_type_test(&a, &t, &params(50_000)).unwrap();
        assert!(r.report.hypotheses_hold());
        assert!(r.ratio_stable);
        let c = r.report.conclusion.as_ref().expect("test should fire");
        assert_eq!(c.kind, VerdictKind::Converges);
        assert!(rel_dev(r.limsup_ratio.exp(), std::f64::consts::E) < 1e-9);
    }

    #[test]
    fn root_type_exploding_ratio_is_inconclusive() {
        // a_n = exp(1/n), t_n = 1/n^2: ratio e^n
        let a = seq("exp(1/n)");
        let t = RealSeq::from_expr_str("1/n^2").unwrap();
        let r = root_type_test(&a, &t, &params(20_000)).unwrap();
        assert!(r.report.conclusion.is_none());
        assert!(!r.ratio_stable);
    }

    #[test]
    fn root_type_constant_one_converges() {
        let a = seq("1");
        let t = RealSeq::from_expr_str("1/n^2").unwrap();
        let r = root_type_test(&a, &t, &params(20_000)).unwrap();
        let c = r.report.conclusion.as_ref().expect("trivial convergence");
        assert_eq!(c.kind, VerdictKind::Converges);
        assert!(rel_dev(c.limit_estimate.unwrap(), 1.0) < 1e-12);
    }

    #[test]
    fn root_segment_sandwich_has_no_violations() {
        let a = seq("exp(1/n^2)");
        let t = RealSeq::from_expr_str("1/n^2").unwrap();
        let s = root_segment_sandwich(&a, &t, 100, 5000, 200, 3).unwrap();
        assert_eq!(s.violations, 0);
    }

    #[test]
    fn condensation_basel_value() {
        // condensed log sum for exp(1/n^2): sum 2^k 4^-k = 2
        let a = seq("exp(1/n^2)");
        let r = condensation_test(&a, &params(200_000), 40).unwrap();
        assert!(r.report.hypotheses_hold());
        assert_eq!(r.condensed_verdict.kind, VerdictKind::Converges);
        assert!(r.verdicts_agree);
        assert!(rel_dev(r.condensed_value.unwrap(), 2.0f64.exp()) < 1e-9);
    }

    #[test]
    fn condensation_harmonic_diverges_in_lockstep() {
        let a = seq("exp(1/n)");
        let r = condensation_test(&a, &params(200_000), 40).unwrap();
        assert_eq!(r.condensed_verdict.kind, VerdictKind::DivergesToInfinity);
        assert_eq!(r.original_verdict.kind, VerdictKind::DivergesToInfinity);
        assert!(r.verdicts_agree);
    }

    #[test]
    fn condensation_hypothesis_violation_reports_witness() {
        // positive but not >= 1 from the start
        let a = seq("1 - 1/(2*n)");
        let r = condensation_test(&a, &params(1000), 20).unwrap();
        let h = &r.report.hypotheses[0];
        assert!(!h.holds);
        assert_eq!(h.witness, Some(1));
        assert!(r.report.conclusion.is_none());
    }

    #[test]
    fn condensation_sandwich_holds_for_basel() {
        let a = seq("exp(1/n^2)");
        let s = condensation_sandwich(&a, 12, 3000).unwrap();
        assert!(s.checks > 0);
        assert_eq!(s.violations, 0);
    }

    #[test]
    fn wallis_alternating_product() {
        let a = seq("1 + 1/n");
        let r = alternating_product(&a, &params(400_000)).unwrap();
        assert!(r.report.hypotheses_hold());
        assert!((r.value - HALF_PI).abs() < 1e-4, "value {}", r.value);
        assert!(r.even_partials_below_a1);
        assert!(r.max_even_partial < r.a1);
    }

    #[test]
    fn alternating_hypothesis_violation() {
        let a = seq("1 + 1/n");
        // shifted below 1: fails a_n > 1 at the first index
        let bad = seq("1/2 + 1/n");
        let r = alternating_product(&bad, &params(1000)).unwrap();
        assert!(!r.report.hypotheses_hold());
        assert!(r.report.conclusion.is_none());
        // the good sequence keeps its conclusion
        let ok = alternating_product(&a, &params(1000)).unwrap();
        assert!(ok.report.conclusion.is_some());
    }

    #[test]
    fn complement_form_reaches_reciprocal_wallis() {
        // a_n = 1/(n+1) in (0,1) decreasing to 0; the transformed sequence
        // is 1 + 1/n and the direct corollary product is its reciprocal
        let s = seq("1/(n+1)");
        let c = s.complement_reciprocal().unwrap();
        let r = alternating_product(&c, &params(400_000)).unwrap();
        assert!(r.report.hypotheses_hold());
        assert!((r.value - HALF_PI).abs() < 1e-4);

        let mut direct = NeumaierSum::new();
        for k in 1..=400_000u64 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            direct.add(sign * (1.0 - s.term(k).unwrap()).ln());
        }
        assert!(rel_dev(direct.value().exp(), 1.0 / r.value) < 1e-9);
    }

    #[test]
    fn cesaro_mean_of_convergent_product() {
        let a = seq("exp((-1)^(n+1)/n)");
        let r = cesaro_product_mean(&a, &RealSeq::constant(1.0), 200_000, 50_000, Precision::Fast)
            .unwrap();
        assert!((r.final_sigma - 2.0).abs() < 1e-2);
        assert!(r.weights_divergent);
    }

    #[test]
    fn cesaro_mean_of_oscillating_product() {
        let a = seq("(1/2)^((-1)^(n+1))");
        let r = cesaro_product_mean(&a, &RealSeq::constant(1.0), 400_000, 100_000, Precision::Fast)
            .unwrap();
        assert!((r.final_sigma - 0.5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn cesaro_mean_of_constant_product() {
        // a_1 = 3 and a_n = 1 afterwards: u_n stays at 3, and so does sigma_n
        let mut values = vec![1.0; 1000];
        values[0] = 3.0;
        let a = PosSeq::from_values(values).unwrap();
        let r = cesaro_product_mean(&a, &RealSeq::constant(1.0), 1000, 100, Precision::Fast).unwrap();
        assert!(rel_dev(r.final_sigma, 3.0) < 1e-12);
        for &(_, sigma) in &r.points {
            assert!(rel_dev(sigma, 3.0) < 1e-12);
        }
    }

    #[test]
    fn cesaro_regularity_against_full_range_oscillation() {
        // |sigma_N - limit| stays within 10x the full-range oscillation of
        // u_n for the convergent corpus members
        for (expr, limit) in [
            ("exp(1/n^2)", (std::f64::consts::PI.powi(2) / 6.0).exp()),
            ("exp((-1)^(n+1)/n)", 2.0),
            ("(4*n^2)/(4*n^2-1)", HALF_PI),
            ("1", 1.0),
        ] {
            let a = seq(expr);
            let n = 200_000u64;
            let mut s = NeumaierSum::new();
            let mut u_min = f64::INFINITY;
            let mut u_max = f64::NEG_INFINITY;
            for k in 1..=n {
                s.add(a.log_term(k).unwrap());
                let u = s.value().exp();
                u_min = u_min.min(u);
                u_max = u_max.max(u);
            }
            let oscillation = u_max - u_min;
            let r = cesaro_product_mean(&a, &RealSeq::constant(1.0), n, n, Precision::Fast)
                .unwrap();
            let dev = (r.final_sigma - limit).abs();
            assert!(
                dev <= 10.0 * oscillation + 1e-12,
                "{expr}: |sigma - limit| = {dev:.3e} vs 10 * osc = {:.3e}",
                10.0 * oscillation
            );
        }
    }

    #[test]
    fn abel_reciprocal_wallis() {
        let b = seq("n/(n+1)");
        let a = RealSeq::from_expr_str("(-1)^(n+1)").unwrap();
        let r = abel_type_product(&b, &a, &params(400_000)).unwrap();
        assert!(r.report.hypotheses_hold(), "{:#?}", r.report.hypotheses);
        assert!((r.value - 2.0 / std::f64::consts::PI).abs() < 1e-4);
        assert!(r.identity_ok);
        assert!(r.identity_max_dev <= 1e-10);
        assert!((r.bound_m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn abel_zero_exponents_give_unit_product() {
        let b = seq("n/(n+1)");
        let a = RealSeq::constant(0.0);
        let r = abel_type_product(&b, &a, &params(10_000)).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.report.hypotheses_hold());
    }

    #[test]
    fn abel_unbounded_segments_are_flagged() {
        let b = seq("n/(n+1)");
        let a = RealSeq::constant(1.0);
        let r = abel_type_product(&b, &a, &params(50_000)).unwrap();
        let bounded = r
            .report
            .hypotheses
            .iter()
            .find(|h| h.name.contains("segment"))
            .unwrap();
        assert!(!bounded.holds);
        assert!(r.report.conclusion.is_none());
    }
}
