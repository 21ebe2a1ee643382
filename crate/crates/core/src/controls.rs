//! Control sequences `I_k`: cyclic and intermittent orders, repetitive
//! generators, the adaptive maximal controls and seeded random sets, plus
//! empirical diagnostics for well-matchedness and the random-control
//! positivity condition.

use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operators::Cutter;
use crate::problem::Problem;
use crate::vector::Vector;
use crate::{Error, Result};

/// Singleton generators in which every index appears infinitely often.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepetitiveRule {
    /// Sweeps `0; 0,1; 0,1,2; …`, capped at the full pool when `m` is finite.
    /// Works for infinite pools.
    Expanding,
    /// Full sweeps over `0..m`, each in a fresh permutation keyed by
    /// `(seed, sweep)`.
    ShuffledSweeps { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlSpec {
    /// `I_k = {order[k mod s]}`.
    Cyclic(Vec<usize>),
    /// `I_k = blocks[k mod len]`; every `span` consecutive blocks cover the
    /// union of all blocks.
    Intermittent { blocks: Vec<Vec<usize>>, span: usize },
    Repetitive(RepetitiveRule),
    /// `argmax_i d(x, C_i)`.
    RemotestSet,
    /// `argmax_i ‖T_i(x) − x‖`.
    MaxDisplacement,
    /// `argmax_i f_i⁺(x)`.
    MaxViolation,
    /// I.i.d. draws of one atom per iteration; the draw at step `k` depends
    /// only on `(seed, k)`.
    RandomSets { atoms: Vec<(Vec<usize>, f64)>, seed: u64 },
    /// `I_k = sets[k mod len]`.
    Explicit(Vec<Vec<usize>>),
}

impl ControlSpec {
    /// `M = sup #I_k`.
    pub fn max_card(&self) -> usize {
        let largest = |sets: &mut dyn Iterator<Item = &Vec<usize>>| sets.map(Vec::len).max().unwrap_or(1);
        match self {
            Self::Intermittent { blocks, .. } => largest(&mut blocks.iter()),
            Self::Explicit(sets) => largest(&mut sets.iter()),
            Self::RandomSets { atoms, .. } => largest(&mut atoms.iter().map(|(a, _)| a)),
            _ => 1,
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, Self::RemotestSet | Self::MaxDisplacement | Self::MaxViolation)
    }

    pub fn validate(&self, cardinality: Option<usize>) -> Result<()> {
        let check_set = |set: &[usize]| -> Result<()> {
            if set.is_empty() {
                return Err(Error::Config("control emits an empty index set".into()));
            }
            match (cardinality, set.iter().find(|&&i| cardinality.is_some_and(|m| i >= m))) {
                (Some(_), Some(&i)) => Err(Error::IndexOutOfPool(i)),
                _ => Ok(()),
            }
        };
        match self {
            Self::Cyclic(order) => check_set(order),
            Self::Intermittent { blocks, span } => {
                if blocks.is_empty() || *span == 0 {
                    return Err(Error::Config("intermittent control needs blocks and a span".into()));
                }
                blocks.iter().try_for_each(|b| check_set(b))?;
                let mut all: Vec<usize> = blocks.iter().flatten().copied().collect();
                all.sort_unstable();
                all.dedup();
                for start in 0..blocks.len() {
                    let mut seen: Vec<usize> = (start..start + span)
                        .flat_map(|k| blocks[k % blocks.len()].iter().copied())
                        .collect();
                    seen.sort_unstable();
                    seen.dedup();
                    if seen != all {
                        return Err(Error::Config(alloc::format!(
                            "blocks starting at {start} do not cover every index within span {span}"
                        )));
                    }
                }
                Ok(())
            }
            Self::Repetitive(RepetitiveRule::Expanding) => Ok(()),
            Self::Repetitive(RepetitiveRule::ShuffledSweeps { .. })
            | Self::RemotestSet
            | Self::MaxDisplacement
            | Self::MaxViolation => {
                if cardinality.is_none() {
                    Err(Error::MaximalControlInfinitePool)
                } else {
                    Ok(())
                }
            }
            Self::RandomSets { atoms, .. } => {
                if atoms.is_empty() {
                    return Err(Error::Config("random control has no atoms".into()));
                }
                let mut total = 0.0;
                for (set, p) in atoms {
                    check_set(set)?;
                    if !(p.is_finite() && *p >= 0.0) {
                        return Err(Error::Config(alloc::format!("atom probability {p} is negative")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(alloc::format!(
                        "atom probabilities sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
            Self::Explicit(sets) => {
                if sets.is_empty() {
                    return Err(Error::Config("explicit control has no sets".into()));
                }
                sets.iter().try_for_each(|s| check_set(s))
            }
        }
    }

    /// `I_k` for controls that do not look at `x`; `None` for adaptive ones.
    /// `m` is the pool cardinality.
    pub fn nonadaptive_indices(&self, k: u64, m: Option<usize>) -> Option<Vec<usize>> {
        Some(match self {
            Self::Cyclic(order) => alloc::vec![order[(k % order.len() as u64) as usize]],
            Self::Intermittent { blocks, .. } => blocks[(k % blocks.len() as u64) as usize].clone(),
            Self::Explicit(sets) => sets[(k % sets.len() as u64) as usize].clone(),
            Self::Repetitive(RepetitiveRule::Expanding) => alloc::vec![expanding_index(k, m)],
            Self::Repetitive(RepetitiveRule::ShuffledSweeps { seed }) => {
                let m = m? as u64;
                let mut perm: Vec<usize> = (0..m as usize).collect();
                let mut rng = keyed_rng(*seed, k / m);
                perm.shuffle(&mut rng);
                alloc::vec![perm[(k % m) as usize]]
            }
            Self::RandomSets { atoms, seed } => {
                let u: f64 = keyed_rng(*seed, k).random();
                let mut acc = 0.0;
                let mut chosen = atoms.len() - 1;
                for (j, (_, p)) in atoms.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        chosen = j;
                        break;
                    }
                }
                atoms[chosen].0.clone()
            }
            Self::RemotestSet | Self::MaxDisplacement | Self::MaxViolation => return None,
        })
    }

    /// Exact `P(I_k ∩ I_+(x) ≠ ∅)` for a random control: the sum of the
    /// probabilities of the atoms meeting `violated`.
    pub fn hit_probability(&self, violated: &[usize]) -> Result<f64> {
        let Self::RandomSets { atoms, .. } = self else {
            return Err(Error::Config("positivity diagnostic needs a random control".into()));
        };
        Ok(atoms
            .iter()
            .filter(|(set, _)| set.iter().any(|i| violated.contains(i)))
            .fold(0.0, |acc, (_, p)| acc + p))
    }
}

fn keyed_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Position `k` of the sequence `0; 0,1; 0,1,2; …`, after which a finite pool
/// repeats full sweeps.
fn expanding_index(k: u64, m: Option<usize>) -> usize {
    let tri = |n: u64| n * (n + 1) / 2;
    if let Some(m) = m {
        let m = m as u64;
        if k >= tri(m) {
            return ((k - tri(m)) % m) as usize;
        }
    }
    // largest n with tri(n) <= k
    let mut n = ((libm::sqrt(8.0 * k as f64 + 1.0) - 1.0) / 2.0) as u64;
    while tri(n) > k {
        n -= 1;
    }
    while tri(n + 1) <= k {
        n += 1;
    }
    (k - tri(n)) as usize
}

/// A validated control bound to a problem. Every control here is a pure
/// function of `(k, x)`, so steps can be replayed.
#[derive(Debug, Clone)]
pub struct Control {
    spec: ControlSpec,
    cardinality: Option<usize>,
}

impl Control {
    pub fn new(spec: ControlSpec, problem: &Problem) -> Result<Self> {
        let cardinality = problem.cardinality();
        spec.validate(cardinality)?;
        Ok(Self { spec, cardinality })
    }

    pub fn spec(&self) -> &ControlSpec {
        &self.spec
    }

    pub fn next_indices(&self, k: u64, x: &Vector, problem: &Problem) -> Result<Vec<usize>> {
        if let Some(set) = self.spec.nonadaptive_indices(k, self.cardinality) {
            return Ok(set);
        }
        let m = self.cardinality.ok_or(Error::MaximalControlInfinitePool)?;
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..m {
            let c = problem.constraint(i)?;
            let score = match self.spec {
                ControlSpec::RemotestSet => c
                    .distance(x.as_slice())
                    .ok_or(Error::NoExactDistance(i))?,
                ControlSpec::MaxDisplacement => c.apply(x)?.displacement_norm,
                _ => c.value(x.as_slice()).max(0.0),
            };
            // strict comparison keeps the lowest index on ties
            if score > best.1 {
                best = (i, score);
            }
        }
        Ok(alloc::vec![best.0])
    }
}

/// Hit counts of one probe over a finite horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeHits {
    pub violated: Vec<usize>,
    /// `#{k < N : I_k(x) ∩ I_+(x) ≠ ∅}`.
    pub hits: u64,
    pub horizon: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellMatchedReport {
    pub probes: Vec<ProbeHits>,
    /// Probes that were never hit.
    pub flagged: Vec<usize>,
}

impl WellMatchedReport {
    /// A finite horizon can only refute well-matchedness, never establish it.
    pub fn summary(&self) -> alloc::string::String {
        if self.flagged.is_empty() {
            alloc::format!("no violation found over {} probes", self.probes.len())
        } else {
            alloc::format!(
                "{} of {} probes never hit a violated index: {:?}",
                self.flagged.len(),
                self.probes.len(),
                self.flagged
            )
        }
    }
}

/// Counts, for each infeasible probe, the steps `k < horizon` whose control
/// set meets `I_+(x)` (restricted to `window`).
pub fn empirical_well_matched(
    control: &Control,
    problem: &Problem,
    probes: &[Vector],
    window: &[usize],
    horizon: u64,
) -> Result<WellMatchedReport> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(probes.len());
    let mut flagged = Vec::new();
    for (p, x) in probes.iter().enumerate() {
        let violated = problem.violated_indices(x, window)?;
        if violated.is_empty() {
            return Err(Error::Precondition(alloc::format!("probe {p} is feasible")));
        }
        let mut hits = 0;
        for k in 0..horizon {
            let set = control.next_indices(k, x, problem)?;
            if set.iter().any(|i| violated.contains(i)) {
                hits += 1;
            }
        }
        if hits == 0 {
            flagged.push(p);
        }
        out.push(ProbeHits {
            violated,
            hits,
            horizon,
        });
    }
    Ok(WellMatchedReport {
        probes: out,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    /// Exact hit probability per probe.
    pub probabilities: Vec<f64>,
    /// Probes with probability zero.
    pub flagged: Vec<usize>,
}

impl PositivityReport {
    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// For every probe, the total probability of the atoms that contain a violated
/// index.
pub fn positivity_diagnostic(
    spec: &ControlSpec,
    problem: &Problem,
    probes: &[Vector],
    window: &[usize],
) -> Result<PositivityReport> {
    let mut probabilities = Vec::with_capacity(probes.len());
    let mut flagged = Vec::new();
    for (p, x) in probes.iter().enumerate() {
        let violated = problem.violated_indices(x, window)?;
        let prob = spec.hit_probability(&violated)?;
        if prob <= 0.0 {
            flagged.push(p);
        }
        probabilities.push(prob);
    }
    Ok(PositivityReport {
        probabilities,
        flagged,
    })
}
