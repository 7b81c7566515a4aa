//! Lazily evaluable positive sequences.
//!
//! A [`PosSeq`] is defined by a parsed expression, an explicit list, or a
//! transform view (masked, exponentiated, permuted, block-interleaved) over
//! other sequences. Views never materialize their parents; they map indices.
//!
//! Every sequence exposes both `term(n)` and `log_term(n)`. Views that act on
//! exponents operate directly on log terms, so an exponentiated view and a
//! log-domain evaluation of the same product take the same code path and
//! produce the same value.

pub mod expr;

pub use expr::{parse_seq, Func, SeqExpr};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::signed_power;

type Predicate = Arc<dyn Fn(u64) -> bool + Send + Sync>;

/// What a permuted view does past the end of its realized table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeyondTable {
    /// Map indices past the table through unchanged.
    Identity,
    /// Treat indices past the table as unrealized (evaluation error).
    Unrealized,
}

#[derive(Clone)]
enum Source {
    Expr(Arc<SeqExpr>),
    List(Arc<Vec<f64>>),
    Masked {
        parent: Arc<PosSeq>,
        keep: Predicate,
    },
    Exponentiated {
        parent: Arc<PosSeq>,
        exps: Arc<RealSeq>,
    },
    Permuted {
        parent: Arc<PosSeq>,
        table: Arc<Vec<u64>>,
        beyond: BeyondTable,
    },
    Interleaved {
        a: Arc<PosSeq>,
        b: Arc<PosSeq>,
        bounds: Arc<Boundaries>,
    },
}

/// A lazily evaluable sequence of strictly positive reals.
#[derive(Clone)]
pub struct PosSeq {
    source: Source,
    origin: u64,
}

impl PosSeq {
    /// Parse `text` as a sequence expression; index origin 1.
    pub fn from_expr_str(text: &str) -> Result<Self> {
        Ok(Self::from_expr(parse_seq(text)?))
    }

    pub fn from_expr(expr: SeqExpr) -> Self {
        PosSeq {
            source: Source::Expr(Arc::new(expr)),
            origin: 1,
        }
    }

    /// An explicit finite list of positive values; index origin 1.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "list entry {k} is not a positive finite real: {v}"
                )));
            }
        }
        Ok(PosSeq {
            source: Source::List(Arc::new(values)),
            origin: 1,
        })
    }

    /// Change the index origin (0 or 1).
    pub fn with_origin(mut self, origin: u64) -> Result<Self> {
        if origin > 1 {
            return Err(Error::InvalidInput(format!(
                "index origin must be 0 or 1, got {origin}"
            )));
        }
        self.origin = origin;
        Ok(self)
    }

    pub fn origin(&self) -> u64 {
        self.origin
    }

    /// Subproduct view: `b_k = a_k` where `keep(k)`, else 1.
    pub fn masked(parent: PosSeq, keep: impl Fn(u64) -> bool + Send + Sync + 'static) -> PosSeq {
        let origin = parent.origin;
        PosSeq {
            source: Source::Masked {
                parent: Arc::new(parent),
                keep: Arc::new(keep),
            },
            origin,
        }
    }

    /// Subproduct view plus a diagnostic when the predicate keeps nothing up
    /// to `check_horizon`. A subproduct is supposed to keep infinitely many
    /// factors; that is undecidable in general, so the check is
    /// horizon-bounded and the assumption is recorded with the result.
    pub fn masked_checked(
        parent: PosSeq,
        keep: impl Fn(u64) -> bool + Send + Sync + 'static,
        check_horizon: u64,
    ) -> (PosSeq, Option<String>) {
        let origin = parent.origin;
        let kept = (0..check_horizon).filter(|k| keep(origin + k)).count();
        let diagnostic = if kept == 0 {
            Some(format!(
                "mask keeps no factor within the first {check_horizon} indices; the view is constant 1 up to that horizon"
            ))
        } else {
            None
        };
        (PosSeq::masked(parent, keep), diagnostic)
    }

    /// Exponentiated view: term `a_n ^ c_n` with `c_n` in `[-1, 1]`.
    pub fn exponentiated(parent: PosSeq, exps: RealSeq) -> PosSeq {
        let origin = parent.origin;
        PosSeq {
            source: Source::Exponentiated {
                parent: Arc::new(parent),
                exps: Arc::new(exps),
            },
            origin,
        }
    }

    /// Permuted view. `table[k]` is the source index for view index
    /// `origin + k`; indices past the table follow `beyond`.
    pub fn permuted(parent: PosSeq, table: Vec<u64>, beyond: BeyondTable) -> PosSeq {
        let origin = parent.origin;
        PosSeq {
            source: Source::Permuted {
                parent: Arc::new(parent),
                table: Arc::new(table),
                beyond,
            },
            origin,
        }
    }

    /// Block-interleaved merge of two factor streams. Positions up to the
    /// first boundary come from `a`'s stream, the next block from `b`'s, and
    /// so on, each stream consumed in its own order. The merged sequence is
    /// indexed from 1.
    pub fn interleaved(a: PosSeq, b: PosSeq, bounds: Boundaries) -> PosSeq {
        PosSeq {
            source: Source::Interleaved {
                a: Arc::new(a),
                b: Arc::new(b),
                bounds: Arc::new(bounds),
            },
            origin: 1,
        }
    }

    /// Last realized index, when the source is finite.
    pub fn realized_end(&self) -> Option<u64> {
        match &self.source {
            Source::Expr(_) => None,
            Source::List(v) => Some(self.origin + v.len() as u64 - 1),
            Source::Masked { parent, .. } | Source::Exponentiated { parent, .. } => {
                parent.realized_end()
            }
            Source::Permuted { parent, table, beyond } => match beyond {
                BeyondTable::Identity => parent.realized_end(),
                BeyondTable::Unrealized => Some(self.origin + table.len() as u64 - 1),
            },
            Source::Interleaved { bounds, .. } => bounds.realized_end(),
        }
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n < self.origin {
            return Err(Error::eval(
                n,
                format!("index below origin {}", self.origin),
            ));
        }
        Ok(())
    }

    /// The `n`-th factor `a_n`.
    pub fn term(&self, n: u64) -> Result<f64> {
        self.check_index(n)?;
        match &self.source {
            Source::Expr(e) => {
                let v = e.eval(n as f64);
                if !v.is_finite() {
                    Err(Error::eval(n, format!("non-finite value {v}")))
                } else if v <= 0.0 {
                    Err(Error::eval(n, format!("non-positive value {v}")))
                } else {
                    Ok(v)
                }
            }
            Source::List(values) => values
                .get((n - self.origin) as usize)
                .copied()
                .ok_or_else(|| Error::eval(n, "index beyond realized list")),
            Source::Masked { parent, keep } => {
                if keep(n) {
                    parent.term(n)
                } else {
                    Ok(1.0)
                }
            }
            Source::Exponentiated { .. } => Ok(self.log_term(n)?.exp()),
            Source::Permuted { parent, table, beyond } => {
                parent.term(self.permuted_source_index(n, table, *beyond)?)
            }
            Source::Interleaved { a, b, bounds } => {
                let (from_a, pos) = bounds.locate(n)?;
                let stream = if from_a { a } else { b };
                stream.term(stream.origin + pos - 1)
            }
        }
    }

    /// `log a_n`, computed natively per view so exponent transforms compose
    /// without exp/log round trips.
    pub fn log_term(&self, n: u64) -> Result<f64> {
        self.check_index(n)?;
        match &self.source {
            // log(exp(g(n))) = g(n), taken directly: factors like
            // exp(1/n^2) keep their full log precision where the value
            // itself would round to 1.
            Source::Expr(e) => {
                if let SeqExpr::Call(Func::Exp, inner) = &**e {
                    let l = inner.eval(n as f64);
                    if l.is_finite() {
                        Ok(l)
                    } else {
                        Err(Error::eval(n, format!("non-finite log value {l}")))
                    }
                } else {
                    Ok(self.term(n)?.ln())
                }
            }
            Source::List(_) => Ok(self.term(n)?.ln()),
            Source::Masked { parent, keep } => {
                if keep(n) {
                    parent.log_term(n)
                } else {
                    Ok(0.0)
                }
            }
            Source::Exponentiated { parent, exps } => {
                let c = exps.value_at(n)?;
                if !(-1.0..=1.0).contains(&c) {
                    return Err(Error::Domain(format!(
                        "exponent c_{n} = {c} outside [-1, 1]"
                    )));
                }
                Ok(c * parent.log_term(n)?)
            }
            Source::Permuted { parent, table, beyond } => {
                parent.log_term(self.permuted_source_index(n, table, *beyond)?)
            }
            Source::Interleaved { a, b, bounds } => {
                let (from_a, pos) = bounds.locate(n)?;
                let stream = if from_a { a } else { b };
                stream.log_term(stream.origin + pos - 1)
            }
        }
    }

    fn permuted_source_index(&self, n: u64, table: &[u64], beyond: BeyondTable) -> Result<u64> {
        let k = (n - self.origin) as usize;
        match table.get(k) {
            Some(&src) => Ok(src),
            None => match beyond {
                BeyondTable::Identity => Ok(n),
                BeyondTable::Unrealized => Err(Error::eval(n, "index beyond realized permutation")),
            },
        }
    }

    /// The transformed sequence `n -> 1 / (1 - a_n)`, for expression- or
    /// list-backed sources.
    pub fn complement_reciprocal(&self) -> Result<PosSeq> {
        match &self.source {
            Source::Expr(e) => {
                let inner = SeqExpr::Div(
                    Box::new(SeqExpr::Number(1.0)),
                    Box::new(SeqExpr::Sub(
                        Box::new(SeqExpr::Number(1.0)),
                        Box::new((**e).clone()),
                    )),
                );
                Ok(PosSeq {
                    source: Source::Expr(Arc::new(inner)),
                    origin: self.origin,
                })
            }
            Source::List(values) => {
                let mapped: Result<Vec<f64>> = values
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        if v >= 1.0 {
                            Err(Error::eval(
                                self.origin + k as u64,
                                format!("complement transform needs values in (0,1), got {v}"),
                            ))
                        } else {
                            Ok(1.0 / (1.0 - v))
                        }
                    })
                    .collect();
                let seq = PosSeq::from_values(mapped?)?;
                seq.with_origin(self.origin)
            }
            _ => Err(Error::InvalidInput(
                "complement transform requires an expression- or list-backed sequence".into(),
            )),
        }
    }
}

/// A lazily evaluable real-valued sequence (exponents, weights).
#[derive(Clone)]
pub struct RealSeq {
    source: RealSource,
    origin: u64,
}

#[derive(Clone)]
enum RealSource {
    Expr(Arc<SeqExpr>),
    List(Arc<Vec<f64>>),
    Const(f64),
    /// `n -> x^n`, with exact parity at `x = -1` and renormalized iterative
    /// powers for `|x| < 1`.
    Powers(f64),
}

impl RealSeq {
    pub fn from_expr_str(text: &str) -> Result<Self> {
        Ok(Self::from_expr(parse_seq(text)?))
    }

    pub fn from_expr(expr: SeqExpr) -> Self {
        RealSeq {
            source: RealSource::Expr(Arc::new(expr)),
            origin: 1,
        }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "list entry {k} is not finite: {v}"
                )));
            }
        }
        Ok(RealSeq {
            source: RealSource::List(Arc::new(values)),
            origin: 1,
        })
    }

    pub fn constant(c: f64) -> Self {
        RealSeq {
            source: RealSource::Const(c),
            origin: 0,
        }
    }

    /// The exponent sequence `n -> x^n`.
    pub fn powers(x: f64) -> Self {
        RealSeq {
            source: RealSource::Powers(x),
            origin: 0,
        }
    }

    pub fn with_origin(mut self, origin: u64) -> Result<Self> {
        if origin > 1 {
            return Err(Error::InvalidInput(format!(
                "index origin must be 0 or 1, got {origin}"
            )));
        }
        self.origin = origin;
        Ok(self)
    }

    pub fn value_at(&self, n: u64) -> Result<f64> {
        match &self.source {
            RealSource::Expr(e) => {
                let v = e.eval(n as f64);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::eval(n, format!("non-finite value {v}")))
                }
            }
            RealSource::List(values) => {
                if n < self.origin {
                    return Err(Error::eval(n, format!("index below origin {}", self.origin)));
                }
                values
                    .get((n - self.origin) as usize)
                    .copied()
                    .ok_or_else(|| Error::eval(n, "index beyond realized list"))
            }
            RealSource::Const(c) => Ok(*c),
            RealSource::Powers(x) => Ok(signed_power(*x, n)),
        }
    }
}

/// Block boundaries `p(1) < p(2) < ...` for interleaved merges.
#[derive(Clone, Debug)]
pub enum Boundaries {
    /// `p(k) = stride * k`; stride 1 is plain alternation.
    Stride(u64),
    Explicit {
        points: Vec<u64>,
        cum_a: Vec<u64>,
        cum_b: Vec<u64>,
    },
}

impl Boundaries {
    pub fn alternating() -> Self {
        Boundaries::Stride(1)
    }

    pub fn stride(s: u64) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidInput("stride must be at least 1".into()));
        }
        Ok(Boundaries::Stride(s))
    }

    pub fn explicit(points: Vec<u64>) -> Result<Self> {
        let mut prev = 0u64;
        for (k, &p) in points.iter().enumerate() {
            if p <= prev {
                return Err(Error::InvalidInput(format!(
                    "boundaries must be strictly increasing (violated at entry {k}: {p})"
                )));
            }
            prev = p;
        }
        if points.is_empty() {
            return Err(Error::InvalidInput("boundary list is empty".into()));
        }
        // cum_a[j], cum_b[j]: stream positions consumed through block j.
        let mut cum_a = vec![0u64; points.len() + 1];
        let mut cum_b = vec![0u64; points.len() + 1];
        let mut prev = 0u64;
        for (j, &p) in points.iter().enumerate() {
            let size = p - prev;
            let block = j + 1;
            cum_a[block] = cum_a[block - 1] + if block % 2 == 1 { size } else { 0 };
            cum_b[block] = cum_b[block - 1] + if block % 2 == 0 { size } else { 0 };
            prev = p;
        }
        Ok(Boundaries::Explicit {
            points,
            cum_a,
            cum_b,
        })
    }

    fn realized_end(&self) -> Option<u64> {
        match self {
            Boundaries::Stride(_) => None,
            Boundaries::Explicit { points, .. } => points.last().copied(),
        }
    }

    /// Map merged position `i >= 1` to `(comes_from_a, stream_position)`.
    fn locate(&self, i: u64) -> Result<(bool, u64)> {
        match self {
            Boundaries::Stride(s) => {
                let j = i.div_ceil(*s);
                let r = i - (j - 1) * s;
                if j % 2 == 1 {
                    Ok((true, ((j - 1) / 2) * s + r))
                } else {
                    Ok((false, (j / 2 - 1) * s + r))
                }
            }
            Boundaries::Explicit {
                points,
                cum_a,
                cum_b,
            } => {
                let j = points.partition_point(|&p| p < i);
                if j >= points.len() && i > points[points.len() - 1] {
                    return Err(Error::eval(i, "index beyond realized boundaries"));
                }
                let block = j + 1;
                let prev = if j == 0 { 0 } else { points[j - 1] };
                let r = i - prev;
                if block % 2 == 1 {
                    Ok((true, cum_a[block - 1] + r))
                } else {
                    Ok((false, cum_b[block - 1] + r))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_dev;

    #[test]
    fn eval_term_examples() {
        let s = PosSeq::from_expr_str("1+1/n").unwrap();
        assert_eq!(s.term(1).unwrap(), 2.0);

        let s = PosSeq::from_expr_str("exp((-1)^(n+1)/n)").unwrap();
        assert!(rel_dev(s.term(2).unwrap(), (-0.5f64).exp()) < 1e-15);

        let s = PosSeq::from_expr_str("1 - 2/n").unwrap();
        match s.term(1) {
            Err(Error::Eval { index: 1, .. }) => {}
            other => panic!("expected positivity error at index 1, got {other:?}"),
        }
    }

    #[test]
    fn mask_keeps_even_indices() {
        let s = PosSeq::from_expr_str("1+1/n").unwrap();
        let m = PosSeq::masked(s, |n| n % 2 == 0);
        assert_eq!(m.term(1).unwrap(), 1.0);
        assert_eq!(m.term(2).unwrap(), 1.5);
        assert_eq!(m.term(3).unwrap(), 1.0);
        assert_eq!(m.log_term(3).unwrap(), 0.0);
    }

    #[test]
    fn mask_with_all_and_none() {
        let s = PosSeq::from_expr_str("1+1/n").unwrap();
        let (all, diag) = PosSeq::masked_checked(s.clone(), |_| true, 100);
        assert!(diag.is_none());
        let (none, diag) = PosSeq::masked_checked(s.clone(), |_| false, 100);
        assert!(diag.is_some());
        for n in 1..20 {
            assert_eq!(all.term(n).unwrap(), s.term(n).unwrap());
            assert_eq!(none.term(n).unwrap(), 1.0);
        }
    }

    #[test]
    fn exponentiate_identity_and_reciprocal() {
        let s = PosSeq::from_expr_str("exp(1/n^2)").unwrap();
        let id = PosSeq::exponentiated(s.clone(), RealSeq::constant(1.0));
        let inv = PosSeq::exponentiated(s.clone(), RealSeq::constant(-1.0));
        for n in 1..50 {
            let a = s.term(n).unwrap();
            assert!(rel_dev(id.term(n).unwrap(), a) < 1e-15);
            assert!(rel_dev(inv.term(n).unwrap(), 1.0 / a) < 1e-15);
        }
    }

    #[test]
    fn exponentiate_rejects_out_of_range() {
        let s = PosSeq::from_expr_str("exp(1/n^2)").unwrap();
        let bad = PosSeq::exponentiated(s, RealSeq::constant(1.5));
        assert!(matches!(bad.term(3), Err(Error::Domain(_))));
    }

    #[test]
    fn exponentiate_composes_with_sin_weights() {
        let s = PosSeq::from_expr_str("exp(1/n^2)").unwrap();
        let c = RealSeq::from_expr_str("sin(n)").unwrap();
        let v = PosSeq::exponentiated(s, c);
        for n in 1..50u64 {
            let want = ((n as f64).sin() / (n as f64 * n as f64)).exp();
            assert!(rel_dev(v.term(n).unwrap(), want) < 1e-14);
        }
    }

    #[test]
    fn alternating_interleave_merges_streams() {
        let a = PosSeq::from_values(vec![10.0, 11.0, 12.0, 13.0]).unwrap();
        let b = PosSeq::from_values(vec![20.0, 21.0, 22.0, 23.0]).unwrap();
        let m = PosSeq::interleaved(a, b, Boundaries::alternating());
        let got: Vec<f64> = (1..=8).map(|n| m.term(n).unwrap()).collect();
        assert_eq!(got, vec![10.0, 20.0, 11.0, 21.0, 12.0, 22.0, 13.0, 23.0]);
    }

    #[test]
    fn explicit_boundaries_follow_block_pattern() {
        // p = (2, 3, 7): blocks A:(1,2], B:(2,3], A:(3,7], then unrealized.
        let a = PosSeq::from_values((1..=10).map(|k| k as f64).collect()).unwrap();
        let b = PosSeq::from_values((1..=10).map(|k| 100.0 + k as f64).collect()).unwrap();
        let bounds = Boundaries::explicit(vec![2, 3, 7]).unwrap();
        let m = PosSeq::interleaved(a, b, bounds);
        let got: Vec<f64> = (1..=7).map(|n| m.term(n).unwrap()).collect();
        assert_eq!(got, vec![1.0, 2.0, 101.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(m.term(8).is_err());
        assert_eq!(m.realized_end(), Some(7));
    }

    #[test]
    fn non_increasing_boundaries_rejected() {
        assert!(Boundaries::explicit(vec![2, 2, 5]).is_err());
        assert!(Boundaries::explicit(vec![]).is_err());
    }

    #[test]
    fn views_compose_on_disjoint_parameters() {
        // permute (swap 1<->2), mask (drop multiples of 5), exponentiate
        // (constant 1/2) commute when applied in any order.
        let base = PosSeq::from_expr_str("1 + 1/n").unwrap();
        let table = vec![2u64, 1];
        let keep = |n: u64| !n.is_multiple_of(5);

        let v1 = PosSeq::exponentiated(
            PosSeq::masked(
                PosSeq::permuted(base.clone(), table.clone(), BeyondTable::Identity),
                keep,
            ),
            RealSeq::constant(0.5),
        );
        let v2 = PosSeq::permuted(
            PosSeq::masked(
                PosSeq::exponentiated(base.clone(), RealSeq::constant(0.5)),
                keep,
            ),
            table.clone(),
            BeyondTable::Identity,
        );
        let v3 = PosSeq::masked(
            PosSeq::permuted(
                PosSeq::exponentiated(base, RealSeq::constant(0.5)),
                table,
                BeyondTable::Identity,
            ),
            keep,
        );
        for n in 1..=10_000u64 {
            let a = v1.term(n).unwrap();
            let b = v2.term(n).unwrap();
            let c = v3.term(n).unwrap();
            assert_eq!(a, b, "mismatch at {n}");
            assert_eq!(b, c, "mismatch at {n}");
        }
    }

    #[test]
    fn power_exponents_match_signed_power() {
        let c = RealSeq::powers(-0.5);
        assert_eq!(c.value_at(0).unwrap(), 1.0);
        assert_eq!(c.value_at(1).unwrap(), -0.5);
        assert_eq!(c.value_at(2).unwrap(), 0.25);
    }

    #[test]
    fn origin_zero_list_indexing() {
        let s = PosSeq::from_values(vec![5.0, 6.0]).unwrap().with_origin(0).unwrap();
        assert_eq!(s.term(0).unwrap(), 5.0);
        assert_eq!(s.term(1).unwrap(), 6.0);
        assert!(s.term(2).is_err());
    }
}
