//! Compensated accumulators and small floating-point kernels.
//!
//! Two independent error channels back every log-domain sum in this crate:
//! Kahan-Neumaier compensation for the fast path and double-double
//! accumulation for the oracle path, so one can cross-check the other.

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// An unevaluated sum `hi + lo` carrying roughly 106 bits of precision.
#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

impl DoubleDouble {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let e = e + self.lo;
        let (hi, lo) = two_sum(s, e);
        self.hi = hi;
        self.lo = lo;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.hi
    }
}

/// Accumulator class selected by `PRODKIT_PRECISION`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Fast,
    Oracle,
}

impl Precision {
    /// Reads `PRODKIT_PRECISION` (`fast` | `oracle`); defaults to `Fast`.
    pub fn from_env() -> Self {
        match std::env::var("PRODKIT_PRECISION").as_deref() {
            Ok("oracle") => Precision::Oracle,
            _ => Precision::Fast,
        }
    }
}

/// A compensated sum backed by either accumulator class.
#[derive(Clone, Copy, Debug)]
pub enum CompensatedSum {
    Fast(NeumaierSum),
    Oracle(DoubleDouble),
}

impl CompensatedSum {
    pub fn new(precision: Precision) -> Self {
        match precision {
            Precision::Fast => CompensatedSum::Fast(NeumaierSum::new()),
            Precision::Oracle => CompensatedSum::Oracle(DoubleDouble::new()),
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        match self {
            CompensatedSum::Fast(s) => s.add(x),
            CompensatedSum::Oracle(s) => s.add(x),
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        match self {
            CompensatedSum::Fast(s) => s.value(),
            CompensatedSum::Oracle(s) => s.value(),
        }
    }
}

/// Relative deviation `|a - b| / max(|a|, |b|)`, zero when equal.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `x^n` for integer `n >= 0`, with the sign taken exactly by parity.
///
/// The magnitude multiplies iteratively inside 64-step blocks and
/// renormalizes from `exp(n log|x|)` at block boundaries, so long powers do
/// not accumulate drift.
pub fn signed_power(x: f64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let ax = x.abs();
    let negative = x < 0.0 && n % 2 == 1;
    let mag = if ax == 0.0 {
        0.0
    } else if ax == 1.0 {
        1.0
    } else {
        const BLOCK: u64 = 64;
        let base = n - (n % BLOCK);
        let mut m = if base == 0 {
            1.0
        } else {
            ((base as f64) * ax.ln()).exp()
        };
        for _ in 0..(n % BLOCK) {
            m *= ax;
        }
        m
    };
    if negative {
        -mag
    } else {
        mag
    }
}
