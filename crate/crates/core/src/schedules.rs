//! Relaxations `α_k`, overrelaxations `r_k`, the functionals `φ_i`, the
//! weights `λ_{i,k}` and the correction counter `[k]`.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::problem::Constraint;
use crate::{Error, Result};

/// `α_k ∈ (0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub enum RelaxationSchedule {
    Constant(f64),
    /// Values past the end repeat the last entry.
    List(Vec<f64>),
}

impl RelaxationSchedule {
    pub fn validate(&self) -> Result<()> {
        let check = |a: f64| {
            if a > 0.0 && a <= 2.0 {
                Ok(())
            } else {
                Err(Error::RelaxationOutOfRange(a))
            }
        };
        match self {
            Self::Constant(a) => check(*a),
            Self::List(values) => {
                if values.is_empty() {
                    return Err(Error::Config("relaxation list is empty".into()));
                }
                values.iter().try_for_each(|a| check(*a))
            }
        }
    }

    pub fn value(&self, n: u64) -> f64 {
        match self {
            Self::Constant(a) => *a,
            Self::List(values) => values[(n as usize).min(values.len() - 1)],
        }
    }
}

/// Positions are capped here; anything placed later is never reached.
const POSITION_CAP: u64 = 1 << 62;

/// Where an element of a merged schedule came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeSource {
    A(u64),
    B(u64),
}

/// `r_k > 0`, evaluated in binary64. Geometric tails underflow to zero after
/// roughly a thousand terms; the engine treats `r = 0` as "no overrelaxation".
#[derive(Debug, Clone, PartialEq)]
pub enum OverrelaxationSchedule {
    Constant(f64),
    /// `r_k = 1/(k+1)`.
    Harmonic,
    /// `r_k = ratio^k`, `0 < ratio < 1`.
    Geometric { ratio: f64 },
    /// Values past the end repeat the last entry.
    ExplicitList(Vec<f64>),
    /// All elements of two nonincreasing sequences sorted in decreasing order;
    /// on ties the `a` element comes first.
    MergedDecreasing {
        a: Box<OverrelaxationSchedule>,
        b: Box<OverrelaxationSchedule>,
    },
    /// `even.value(k)` for even `k`, `odd.value(k)` for odd `k`.
    Interleaved {
        even: Box<OverrelaxationSchedule>,
        odd: Box<OverrelaxationSchedule>,
    },
}

impl OverrelaxationSchedule {
    pub fn validate(&self) -> Result<()> {
        let positive = |r: f64, what: &str| {
            if r.is_finite() && r > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(alloc::format!(
                    "{what} must be positive and finite, got {r}"
                )))
            }
        };
        match self {
            Self::Constant(r) => positive(*r, "constant overrelaxation"),
            Self::Harmonic => Ok(()),
            Self::Geometric { ratio } => {
                if *ratio > 0.0 && *ratio < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config(alloc::format!(
                        "geometric ratio must lie in (0,1), got {ratio}"
                    )))
                }
            }
            Self::ExplicitList(values) => {
                if values.is_empty() {
                    return Err(Error::Config("overrelaxation list is empty".into()));
                }
                values.iter().try_for_each(|r| positive(*r, "overrelaxation entry"))
            }
            Self::MergedDecreasing { a, b } => {
                a.validate()?;
                b.validate()?;
                if !(a.is_nonincreasing() && b.is_nonincreasing()) {
                    return Err(Error::Config(
                        "merged schedule needs two nonincreasing sequences".into(),
                    ));
                }
                Ok(())
            }
            Self::Interleaved { even, odd } => {
                even.validate()?;
                odd.validate()
            }
        }
    }

    pub fn value(&self, n: u64) -> f64 {
        match self {
            Self::Constant(r) => *r,
            Self::Harmonic => 1.0 / (n as f64 + 1.0),
            Self::Geometric { ratio } => pow_u64(*ratio, n),
            Self::ExplicitList(values) => values[n.min(values.len() as u64 - 1) as usize],
            Self::MergedDecreasing { a, b } => match self.merge_source(n) {
                Some(MergeSource::A(i)) => a.value(i),
                Some(MergeSource::B(j)) => b.value(j),
                None => unreachable!(),
            },
            Self::Interleaved { even, odd } => {
                if n.is_multiple_of(2) {
                    even.value(n)
                } else {
                    odd.value(n)
                }
            }
        }
    }

    /// Declared `Σ r_k = ∞` for the known kinds.
    pub fn divergent_sum(&self) -> bool {
        match self {
            Self::Constant(_) | Self::Harmonic => true,
            Self::Geometric { .. } | Self::ExplicitList(_) => false,
            Self::MergedDecreasing { a, b } => a.divergent_sum() || b.divergent_sum(),
            Self::Interleaved { even, odd } => even.divergent_sum() || odd.divergent_sum(),
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        match self {
            Self::Constant(_) | Self::Harmonic | Self::Geometric { .. } => true,
            Self::ExplicitList(values) => values.windows(2).all(|w| w[0] >= w[1]),
            Self::MergedDecreasing { .. } => true,
            Self::Interleaved { .. } => false,
        }
    }

    /// For merged schedules: which input sequence supplies position `n`.
    pub fn merge_source(&self, n: u64) -> Option<MergeSource> {
        let Self::MergedDecreasing { a, b } = self else {
            return None;
        };
        let pos_b = |j: u64| j.saturating_add(count_at_least(a, b.value(j))).min(POSITION_CAP);
        // smallest j with pos_b(j) >= n; pos_b(n) >= n always
        let (mut lo, mut hi) = (0u64, n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if pos_b(mid) >= n {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(if pos_b(lo) == n {
            MergeSource::B(lo)
        } else {
            MergeSource::A(n - lo)
        })
    }

    /// Position of `b_j` in a merged schedule (`None` past the position cap).
    pub fn merged_position_of_b(&self, j: u64) -> Option<u64> {
        let Self::MergedDecreasing { a, b } = self else {
            return None;
        };
        let pos = j.saturating_add(count_at_least(a, b.value(j)));
        (pos < POSITION_CAP).then_some(pos)
    }
}

/// `#{i : seq(i) ≥ v}` for a nonincreasing `seq`, saturating at the cap.
fn count_at_least(seq: &OverrelaxationSchedule, v: f64) -> u64 {
    if !(v > 0.0) {
        return POSITION_CAP;
    }
    if let OverrelaxationSchedule::Harmonic = seq {
        let guess = 1.0 / v;
        let mut c = if guess >= POSITION_CAP as f64 { POSITION_CAP } else { guess as u64 };
        while c > 0 && seq.value(c - 1) < v {
            c -= 1;
        }
        while c < POSITION_CAP && seq.value(c) >= v {
            c += 1;
        }
        return c;
    }
    if seq.value(0) < v {
        return 0;
    }
    // galloping search for the first index below v
    let mut hi = 1u64;
    while hi < POSITION_CAP && seq.value(hi) >= v {
        hi = (hi * 2).min(POSITION_CAP);
    }
    if hi >= POSITION_CAP && seq.value(POSITION_CAP - 1) >= v {
        return POSITION_CAP;
    }
    let mut lo = hi / 2;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if seq.value(mid) >= v {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Square-and-multiply; exact for powers of two down to the subnormal range.
fn pow_u64(base: f64, mut n: u64) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    while n > 0 {
        if n & 1 == 1 {
            result *= b;
            if result == 0.0 {
                return 0.0;
            }
        }
        n >>= 1;
        if n > 0 {
            b *= b;
        }
    }
    result
}

type PhiFn = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;

/// `φ_i(x) ∈ (0, ∞)`, bounded above and below on bounded sets.
#[derive(Clone)]
pub enum PhiFunctional {
    One,
    /// `‖g_i(x)‖` where `f_i(x) > 0`, else 1.
    SubgradNorm,
    /// A user functional with declared bounds `lower ≤ φ ≤ upper`; values
    /// outside the bounds are an error.
    Custom { func: PhiFn, lower: f64, upper: f64 },
}

impl fmt::Debug for PhiFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::One => f.write_str("One"),
            Self::SubgradNorm => f.write_str("SubgradNorm"),
            Self::Custom { lower, upper, .. } => f
                .debug_struct("Custom")
                .field("lower", lower)
                .field("upper", upper)
                .finish_non_exhaustive(),
        }
    }
}

impl PhiFunctional {
    pub fn evaluate(&self, index: usize, constraint: &Constraint, x: &[f64]) -> Result<f64> {
        match self {
            Self::One => Ok(1.0),
            Self::SubgradNorm => {
                if constraint.value(x) > 0.0 {
                    let n = constraint.subgradient(x).norm();
                    if n == 0.0 {
                        return Err(Error::InconsistentConstraint);
                    }
                    Ok(n)
                } else {
                    Ok(1.0)
                }
            }
            Self::Custom { func, lower, upper } => {
                let value = func(index, x);
                if value >= *lower && value <= *upper && value > 0.0 {
                    Ok(value)
                } else {
                    Err(Error::PhiOutOfBounds {
                        value,
                        lower: *lower,
                        upper: *upper,
                    })
                }
            }
        }
    }

    /// The two regimes under which the iterates are known to stay bounded.
    pub fn guarantees_bounded_iterates(&self) -> bool {
        matches!(self, Self::One | Self::SubgradNorm)
    }
}

/// `λ_{i,k}(x)`, summing to one over `I_k(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    UniformOverActive,
    /// Uniform over `I_k ∩ I_+`; uniform over `I_k` when nothing active is violated.
    UniformOverViolated,
    /// Positive weight per constraint index, renormalized over `I_k`.
    ExplicitTable(Vec<f64>),
}

impl WeightRule {
    pub fn validate(&self) -> Result<()> {
        if let Self::ExplicitTable(w) = self {
            if w.is_empty() || w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::Config("weight table entries must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn weights(&self, active: &[usize], violated: &[bool]) -> Result<Vec<f64>> {
        debug_assert_eq!(active.len(), violated.len());
        let n = active.len();
        Ok(match self {
            Self::UniformOverActive => alloc::vec![1.0 / n as f64; n],
            Self::UniformOverViolated => {
                let nv = violated.iter().filter(|v| **v).count();
                if nv == 0 {
                    alloc::vec![1.0 / n as f64; n]
                } else {
                    violated
                        .iter()
                        .map(|v| if *v { 1.0 / nv as f64 } else { 0.0 })
                        .collect()
                }
            }
            Self::ExplicitTable(table) => {
                let raw = active
                    .iter()
                    .map(|&i| {
                        table.get(i).copied().ok_or_else(|| {
                            Error::Config(alloc::format!("weight table has no entry for index {i}"))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / total).collect()
            }
        })
    }

    /// A lower bound `λ` on the weight of every active violated index when at
    /// most `max_card` indices are active.
    pub fn floor(&self, max_card: usize) -> f64 {
        match self {
            Self::UniformOverActive | Self::UniformOverViolated => 1.0 / max_card as f64,
            Self::ExplicitTable(table) => {
                let lo = table.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = table.iter().copied().fold(0.0, f64::max);
                lo / (max_card as f64 * hi)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterMode {
    /// Schedules are indexed by `[k]`, the number of correction steps so far.
    Bracketed,
    /// Schedules are indexed by the iteration number `k`.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrectionCounter {
    mode: CounterMode,
    corrections: u64,
    steps: u64,
}

impl CorrectionCounter {
    pub fn new(mode: CounterMode) -> Self {
        Self {
            mode,
            corrections: 0,
            steps: 0,
        }
    }

    pub fn mode(&self) -> CounterMode {
        self.mode
    }

    /// The index fed to `α` and `r`.
    pub fn value(&self) -> u64 {
        match self.mode {
            CounterMode::Bracketed => self.corrections,
            CounterMode::Raw => self.steps,
        }
    }

    /// `[k]`, tracked in both modes.
    pub fn corrections(&self) -> u64 {
        self.corrections
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn update(self, corrected: bool) -> Self {
        Self {
            mode: self.mode,
            corrections: self.corrections + u64::from(corrected),
            steps: self.steps + 1,
        }
    }
}

/// `(r/φ + d)/d` for `d > 0`, and 0 when the cutter does not move `x`.
pub fn beta(r: f64, phi: f64, displacement: f64) -> f64 {
    if displacement == 0.0 {
        0.0
    } else {
        (r / phi + displacement) / displacement
    }
}
