//! Length sequences with an exact pairing certificate.
//!
//! Half-indices are grouped into consecutive pairs `(n_{2k-1}, n_{2k})`. Raising
//! sets every length in the window `[n_{2k-1}, n_{2k}]` to the right end's
//! value; lowering sets it to the left end's. Either way both ends of a pair
//! hold the same stored value, so `σ_{2k} = 0` with no rounding, and
//! monotonicity survives because the window is flattened to one of its own
//! endpoint values.

use std::fmt;
use std::str::FromStr;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result, Violation};
use crate::real::fmt_real;
use crate::surface::TwistPattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Output dominates the base.
    Raise,
    /// Output is dominated by the base.
    Lower,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Raise => "raise",
            Mode::Lower => "lower",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raise" => Ok(Mode::Raise),
            "lower" => Ok(Mode::Lower),
            other => Err(Error::domain(format!(
                "unknown synthesis mode `{other}` (expected raise or lower)"
            ))),
        }
    }
}

/// A changed entry, values in decimal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Change {
    pub index: usize,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisPlan {
    pub mode: Mode,
    pub pattern: TwistPattern,
    /// Windows `[n_{2k-1}, n_{2k}]` that were flattened.
    pub pairs: Vec<(usize, usize)>,
    /// Last half-index when the pattern has odd size; left untouched.
    pub trailing_unpaired: Option<usize>,
    pub changes: Vec<Change>,
    #[serde(skip)]
    base: Vec<Float>,
    #[serde(skip)]
    output: Vec<Float>,
}

impl SynthesisPlan {
    pub fn base(&self) -> &[Float] {
        &self.base
    }

    pub fn output(&self) -> &[Float] {
        &self.output
    }

    pub fn modified_indices(&self) -> Vec<usize> {
        self.changes.iter().map(|c| c.index).collect()
    }
}

fn check_inputs(base: &[Float], pattern: &TwistPattern) -> Result<()> {
    let mut v = Vec::new();
    for (i, w) in base.windows(2).enumerate() {
        if w[1] < w[0] {
            v.push(Violation::Decreasing { index: i + 2 });
        }
    }
    if let Some(&last) = pattern.half_indices().last() {
        if last > base.len() {
            v.push(Violation::HalfIndexBeyondTruncation {
                index: last,
                truncation: base.len(),
            });
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(v))
    }
}

/// Flattens every pair window of `base` per `mode`.
pub fn synthesize(
    base: &[Float],
    pattern: &TwistPattern,
    mode: Mode,
) -> Result<(Vec<Float>, SynthesisPlan)> {
    check_inputs(base, pattern)?;
    let h = pattern.half_indices();
    let mut out = base.to_vec();
    let mut pairs = Vec::with_capacity(h.len() / 2);
    for w in h.chunks_exact(2) {
        let (lo, hi) = (w[0], w[1]);
        let target = match mode {
            Mode::Raise => base[hi - 1].clone(),
            Mode::Lower => base[lo - 1].clone(),
        };
        for x in &mut out[lo - 1..hi] {
            *x = target.clone();
        }
        pairs.push((lo, hi));
    }
    let changes = base
        .iter()
        .zip(&out)
        .enumerate()
        .filter(|(_, (b, o))| b != o)
        .map(|(i, (b, o))| Change {
            index: i + 1,
            before: fmt_real(b, 20),
            after: fmt_real(o, 20),
        })
        .collect();
    let plan = SynthesisPlan {
        mode,
        pattern: pattern.clone(),
        pairs,
        trailing_unpaired: (h.len() % 2 == 1).then(|| h[h.len() - 1]),
        changes,
        base: base.to_vec(),
        output: out.clone(),
    };
    Ok((out, plan))
}

/// `l' >= a` with `l'_{n_{2k-1}} = l'_{n_{2k}}`.
pub fn raise_lengths(a: &[Float], pattern: &TwistPattern) -> Result<(Vec<Float>, SynthesisPlan)> {
    synthesize(a, pattern, Mode::Raise)
}

/// `l'' <= l` with `l''_{n_{2k-1}} = l''_{n_{2k}}`.
pub fn lower_lengths(l: &[Float], pattern: &TwistPattern) -> Result<(Vec<Float>, SynthesisPlan)> {
    synthesize(l, pattern, Mode::Lower)
}

/// Validates a sparse index set as a pattern within truncation `n`.
pub fn choose_pattern(sparse: &[usize], n: usize, declared_infinite: bool) -> Result<TwistPattern> {
    let p = TwistPattern::new(sparse.to_vec(), declared_infinite)?;
    if let Some(&last) = sparse.last() {
        if last > n {
            return Err(Error::Invalid(vec![Violation::HalfIndexBeyondTruncation {
                index: last,
                truncation: n,
            }]));
        }
    }
    Ok(p)
}
