//! Surface descriptors: tight flutes, basic end surfaces with bordered cuffs,
//! and finite trees of such ends; plus validation and document ingestion.
//!
//! Cuffs are numbered from 1. A flute descriptor is only usable after
//! [`validate_flute`] has expanded its length generator at a fixed precision
//! and checked positivity, monotonicity and the twist pattern.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::real::{parse_real, LENGTH_FLOOR};

/// Indices `n_k` at which the twist is one half; every other twist is zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwistPattern {
    half_indices: Vec<usize>,
    declared_infinite: bool,
}

impl TwistPattern {
    pub fn new(half_indices: Vec<usize>, declared_infinite: bool) -> Result<Self> {
        let mut v = Vec::new();
        if half_indices.first() == Some(&0) {
            v.push(Violation::HalfIndexZero);
        }
        for (k, w) in half_indices.windows(2).enumerate() {
            if w[1] <= w[0] {
                v.push(Violation::HalfIndexNotIncreasing { index: k + 2 });
            }
        }
        if !v.is_empty() {
            return Err(Error::Invalid(v));
        }
        Ok(TwistPattern {
            half_indices,
            declared_infinite,
        })
    }

    pub fn none() -> Self {
        TwistPattern {
            half_indices: Vec::new(),
            declared_infinite: false,
        }
    }

    /// Halves at every index `1..=n`.
    pub fn full(n: usize, declared_infinite: bool) -> Self {
        TwistPattern {
            half_indices: (1..=n).collect(),
            declared_infinite,
        }
    }

    pub fn half_indices(&self) -> &[usize] {
        &self.half_indices
    }

    pub fn declared_infinite(&self) -> bool {
        self.declared_infinite
    }

    pub fn is_empty(&self) -> bool {
        self.half_indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.half_indices.len()
    }

    /// `Some(k)` (1-based) when `n = n_k`.
    pub fn position(&self, n: usize) -> Option<usize> {
        self.half_indices.binary_search(&n).ok().map(|i| i + 1)
    }

    /// True when the halves are exactly `1..=n`.
    pub fn is_full(&self, n: usize) -> bool {
        self.half_indices.len() == n
            && self
                .half_indices
                .iter()
                .enumerate()
                .all(|(i, &x)| x == i + 1)
    }

    pub fn with_declared_infinite(mut self, flag: bool) -> Self {
        self.declared_infinite = flag;
        self
    }
}

/// Inline pattern families. Each enumerates its members up to a truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternGenerator {
    None,
    All,
    Every(usize),
    Factorial,
    Squares,
    Powers(usize),
    List(Vec<usize>),
}

impl PatternGenerator {
    pub fn indices(&self, n: usize) -> Vec<usize> {
        match self {
            PatternGenerator::None => Vec::new(),
            PatternGenerator::All => (1..=n).collect(),
            PatternGenerator::Every(k) => (1..).map(|j| j * k).take_while(|&x| x <= n).collect(),
            PatternGenerator::Factorial => {
                let mut out = Vec::new();
                let mut f: usize = 1;
                for j in 2.. {
                    if f > n {
                        break;
                    }
                    out.push(f);
                    match f.checked_mul(j) {
                        Some(x) => f = x,
                        None => break,
                    }
                }
                out
            }
            PatternGenerator::Squares => (1..)
                .map(|j: usize| j * j)
                .take_while(|&x| x <= n)
                .collect(),
            PatternGenerator::Powers(b) => {
                let mut out = Vec::new();
                let mut p: usize = 1;
                while p <= n {
                    out.push(p);
                    match p.checked_mul(*b) {
                        Some(x) => p = x,
                        None => break,
                    }
                }
                out
            }
            PatternGenerator::List(v) => v.clone(),
        }
    }

    /// Generated families are infinite by construction; explicit lists are not.
    pub fn infinite_by_default(&self) -> bool {
        !matches!(self, PatternGenerator::None | PatternGenerator::List(_))
    }

    pub fn pattern(&self, n: usize, declared_infinite: Option<bool>) -> Result<TwistPattern> {
        let flag = declared_infinite.unwrap_or_else(|| self.infinite_by_default());
        TwistPattern::new(self.indices(n), flag)
    }
}

impl FromStr for PatternGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Schema {
            path: "pattern".into(),
            message: format!("unknown pattern `{s}`"),
        };
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let int = |r: Option<&str>| -> Result<usize> {
            r.and_then(|x| x.trim().parse::<usize>().ok())
                .filter(|&x| x >= 1)
                .ok_or_else(bad)
        };
        Ok(match head {
            "none" => PatternGenerator::None,
            "all" => PatternGenerator::All,
            "factorial" => PatternGenerator::Factorial,
            "squares" => PatternGenerator::Squares,
            "every" => PatternGenerator::Every(int(rest)?),
            "powers" => {
                let b = int(rest)?;
                if b < 2 {
                    return Err(bad());
                }
                PatternGenerator::Powers(b)
            }
            "list" => {
                let body = rest.ok_or_else(bad)?;
                let v = body
                    .split(',')
                    .filter(|x| !x.trim().is_empty())
                    .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                PatternGenerator::List(v)
            }
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for PatternGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternGenerator::None => write!(f, "none"),
            PatternGenerator::All => write!(f, "all"),
            PatternGenerator::Every(k) => write!(f, "every:{k}"),
            PatternGenerator::Factorial => write!(f, "factorial"),
            PatternGenerator::Squares => write!(f, "squares"),
            PatternGenerator::Powers(b) => write!(f, "powers:{b}"),
            PatternGenerator::List(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "list:{}", s.join(","))
            }
        }
    }
}

/// Source of a cuff length sequence. Coefficients are binary64; generated
/// values are evaluated at the requested precision.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthGenerator {
    Explicit(Vec<Float>),
    /// `max(p log n, LENGTH_FLOOR)`
    PLogN {
        p: f64,
    },
    /// `c n^q`
    Power {
        c: f64,
        q: f64,
    },
    /// `scale e^{rate n}`
    Exponential {
        rate: f64,
        scale: f64,
    },
    /// Term `n` is the base term `2 ceil(n/2)`, so indices `2k-1, 2k` agree.
    Paired(Box<LengthGenerator>),
}

impl LengthGenerator {
    /// Raw values at indices `1..=n` without positivity or monotonicity checks.
    /// Explicit lists shorter than `n` return what they have.
    pub fn values(&self, n: usize, prec: u32) -> Vec<Float> {
        match self {
            LengthGenerator::Explicit(v) => {
                v.iter().take(n).map(|x| Float::with_val(prec, x)).collect()
            }
            LengthGenerator::PLogN { p } => {
                let floor = Float::with_val(prec, LENGTH_FLOOR);
                (1..=n)
                    .map(|i| {
                        let v = Float::with_val(prec, i).ln() * *p;
                        if v < floor {
                            floor.clone()
                        } else {
                            v
                        }
                    })
                    .collect()
            }
            LengthGenerator::Power { c, q } => (1..=n)
                .map(|i| Float::with_val(prec, i).pow(*q) * *c)
                .collect(),
            LengthGenerator::Exponential { rate, scale } => (1..=n)
                .map(|i| (Float::with_val(prec, *rate) * i as u64).exp() * *scale)
                .collect(),
            LengthGenerator::Paired(base) => {
                let b = base.values(n + 1, prec);
                (1..=n)
                    .filter_map(|i| {
                        let j = 2 * i.div_ceil(2);
                        b.get(j - 1).or_else(|| b.last()).cloned()
                    })
                    .collect()
            }
        }
    }

    fn available(&self) -> Option<usize> {
        match self {
            LengthGenerator::Explicit(v) => Some(v.len()),
            LengthGenerator::Paired(b) => b.available(),
            _ => None,
        }
    }

    /// Parses an inline expression: `plog:p`, `power:c:q`, `exp:rate[:scale]`,
    /// `values:a,b,...`, `list:<file>` (whitespace or comma separated) or
    /// `pairs-of:<expr>`.
    pub fn parse_expr(s: &str, prec: u32) -> Result<Self> {
        let bad = |m: &str| Error::Schema {
            path: "generator".into(),
            message: format!("`{s}`: {m}"),
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| bad("expected a number"))
        };
        let (head, rest) = s.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        Ok(match head {
            "plog" => LengthGenerator::PLogN { p: num(rest)? },
            "power" => {
                let (c, q) = rest
                    .split_once(':')
                    .ok_or_else(|| bad("expected power:c:q"))?;
                LengthGenerator::Power {
                    c: num(c)?,
                    q: num(q)?,
                }
            }
            "exp" => match rest.split_once(':') {
                Some((r, sc)) => LengthGenerator::Exponential {
                    rate: num(r)?,
                    scale: num(sc)?,
                },
                None => LengthGenerator::Exponential {
                    rate: num(rest)?,
                    scale: 1.0,
                },
            },
            "values" => LengthGenerator::Explicit(parse_reals(rest, prec)?),
            "list" => {
                let text = std::fs::read_to_string(rest).map_err(|e| Error::Io {
                    path: rest.to_string(),
                    source: e,
                })?;
                LengthGenerator::Explicit(parse_reals(&text, prec)?)
            }
            "pairs-of" => LengthGenerator::Paired(Box::new(Self::parse_expr(rest, prec)?)),
            _ => return Err(bad("unknown generator kind")),
        })
    }
}

fn parse_reals(text: &str, prec: u32) -> Result<Vec<Float>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|x| !x.is_empty())
        .map(|x| parse_real(x, prec))
        .collect()
}

impl fmt::Display for LengthGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthGenerator::Explicit(v) => write!(f, "values[{}]", v.len()),
            LengthGenerator::PLogN { p } => write!(f, "plog:{p}"),
            LengthGenerator::Power { c, q } => write!(f, "power:{c}:{q}"),
            LengthGenerator::Exponential { rate, scale } => write!(f, "exp:{rate}:{scale}"),
            LengthGenerator::Paired(b) => write!(f, "pairs-of:{b}"),
        }
    }
}

/// Expands `g` over `1..=n`; fails on the first nonpositive or decreasing term.
pub fn expand_lengths(g: &LengthGenerator, n: usize, prec: u32) -> Result<Vec<Float>> {
    if n == 0 {
        return Err(Error::domain("expansion needs at least one term"));
    }
    let v = g.values(n, prec);
    if v.len() < n {
        return Err(Error::Invalid(vec![Violation::LengthCountMismatch {
            expected: n,
            found: v.len(),
        }]));
    }
    if let Some(bad) = length_violations(&v).into_iter().next() {
        return Err(Error::domain(bad.to_string()));
    }
    Ok(v)
}

fn length_violations(v: &[Float]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, x) in v.iter().enumerate() {
        if !x.is_finite() || *x <= 0 {
            out.push(Violation::NonPositiveLength { index: i + 1 });
        } else if i > 0 && x < &v[i - 1] {
            out.push(Violation::Decreasing { index: i + 1 });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluteDescriptor {
    pub lengths: LengthGenerator,
    pub twists: TwistPattern,
    pub truncation: usize,
}

/// A flute whose lengths are expanded at a fixed precision and verified.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedFlute {
    lengths: Vec<Float>,
    twists: TwistPattern,
    source: String,
}

impl CheckedFlute {
    pub fn lengths(&self) -> &[Float] {
        &self.lengths
    }

    pub fn twists(&self) -> &TwistPattern {
        &self.twists
    }

    pub fn truncation(&self) -> usize {
        self.lengths.len()
    }

    pub fn precision(&self) -> u32 {
        self.lengths[0].prec()
    }

    /// Human-readable description of where the lengths came from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// The equivalent unchecked descriptor with explicit lengths.
    pub fn descriptor(&self) -> FluteDescriptor {
        FluteDescriptor {
            lengths: LengthGenerator::Explicit(self.lengths.clone()),
            twists: self.twists.clone(),
            truncation: self.lengths.len(),
        }
    }

    /// Offset of the twist at cuff `n`: `+l_n/2` for odd `k`, `-l_n/2` for
    /// even `k` when `n = n_k`, and zero otherwise.
    pub fn offset_sign(&self, n: usize) -> i8 {
        match self.twists.position(n) {
            Some(k) if k % 2 == 1 => 1,
            Some(_) => -1,
            None => 0,
        }
    }
}

pub fn validate_flute(d: &FluteDescriptor, prec: u32) -> Result<CheckedFlute> {
    let mut v = Vec::new();
    let n = d.truncation;
    if n < 2 {
        v.push(Violation::TruncationTooSmall { truncation: n });
    }
    let lengths = d.lengths.values(n, prec);
    if let Some(avail) = d.lengths.available() {
        if avail < n {
            v.push(Violation::LengthCountMismatch {
                expected: n,
                found: avail,
            });
        }
    }
    v.extend(length_violations(&lengths));
    let h = d.twists.half_indices();
    if h.first() == Some(&0) {
        v.push(Violation::HalfIndexZero);
    }
    for (k, w) in h.windows(2).enumerate() {
        if w[1] <= w[0] {
            v.push(Violation::HalfIndexNotIncreasing { index: k + 2 });
        }
    }
    if let Some(&last) = h.last() {
        if last > n {
            v.push(Violation::HalfIndexBeyondTruncation {
                index: last,
                truncation: n,
            });
        }
    }
    if d.twists.declared_infinite() && h.is_empty() {
        v.push(Violation::NoWitnessHalfTwist);
    }
    if !v.is_empty() {
        return Err(Error::Invalid(v));
    }
    Ok(CheckedFlute {
        lengths,
        twists: d.twists.clone(),
        source: d.lengths.to_string(),
    })
}

/// Border lengths of a basic end: list or generator, zeros allowed.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaLengths {
    Explicit(Vec<Float>),
    Generated(LengthGenerator),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicEndDescriptor {
    pub flute: FluteDescriptor,
    pub beta_lengths: BetaLengths,
    pub beta_bound: f64,
}

/// A basic end whose α-cuffs have been validated. The β-bound is checked at
/// classification time so a violation is reported as a refusal.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedBasicEnd {
    pub flute: CheckedFlute,
    /// `β_n` for `n = 1..N-1`, the border between cuffs `n` and `n+1`.
    pub beta_lengths: Vec<Float>,
    pub beta_bound: Float,
}

impl CheckedBasicEnd {
    /// First 1-based index with `β_n > M`.
    pub fn beta_violation(&self) -> Option<usize> {
        self.beta_lengths
            .iter()
            .position(|b| b > &self.beta_bound)
            .map(|i| i + 1)
    }

    /// The degenerate basic end whose borders are all punctures.
    pub fn from_flute(flute: CheckedFlute) -> Self {
        let prec = flute.precision();
        let n = flute.truncation();
        CheckedBasicEnd {
            flute,
            beta_lengths: vec![Float::new(prec); n - 1],
            beta_bound: Float::with_val(prec, 1),
        }
    }
}

pub fn validate_basic_end(d: &BasicEndDescriptor, prec: u32) -> Result<CheckedBasicEnd> {
    let flute = validate_flute(&d.flute, prec)?;
    let count = flute.truncation() - 1;
    let beta = match &d.beta_lengths {
        BetaLengths::Explicit(v) => v
            .iter()
            .take(count)
            .map(|x| Float::with_val(prec, x))
            .collect(),
        BetaLengths::Generated(g) => g.values(count, prec),
    };
    let mut v = Vec::new();
    if beta.len() < count {
        v.push(Violation::LengthCountMismatch {
            expected: count,
            found: beta.len(),
        });
    }
    for (i, b) in beta.iter().enumerate() {
        if !b.is_finite() || *b < 0 {
            v.push(Violation::NonPositiveLength { index: i + 1 });
        }
    }
    if !v.is_empty() {
        return Err(Error::Invalid(v));
    }
    if d.beta_bound.is_nan() || d.beta_bound <= 0.0 || !d.beta_bound.is_finite() {
        return Err(Error::Schema {
            path: "beta_bound".into(),
            message: "must be a positive real".into(),
        });
    }
    Ok(CheckedBasicEnd {
        flute,
        beta_lengths: beta,
        beta_bound: Float::with_val(prec, d.beta_bound),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeBody {
    Flute(CheckedFlute),
    BasicEnd(CheckedBasicEnd),
}

/// A finite-area surface glued to a border; it contributes no end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteAttachment {
    pub attach_at: usize,
    pub label: String,
}

/// Node of a finite rooted tree of end surfaces. Children hang from β-borders
/// of a basic-end parent.
#[derive(Debug, Clone, PartialEq)]
pub struct EndTree {
    pub id: String,
    pub attach_at: Option<usize>,
    pub body: NodeBody,
    pub children: Vec<EndTree>,
    pub finite_area: Vec<FiniteAttachment>,
}

impl EndTree {
    pub fn leaf(id: impl Into<String>, body: NodeBody) -> Self {
        EndTree {
            id: id.into(),
            attach_at: None,
            body,
            children: Vec::new(),
            finite_area: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(EndTree::node_count).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(EndTree::depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    Flute(CheckedFlute),
    BasicEnd(CheckedBasicEnd),
    Tree(EndTree),
}

// ---------- document schema ----------

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RealLit {
    Num(f64),
    Text(String),
}

impl RealLit {
    fn to_float(&self, prec: u32) -> Result<Float> {
        match self {
            RealLit::Num(x) => Ok(Float::with_val(prec, *x)),
            RealLit::Text(s) => parse_real(s, prec),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum GeneratorDoc {
    Plog {
        p: f64,
    },
    Power {
        c: f64,
        q: f64,
    },
    Exp {
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    List {
        values: Vec<RealLit>,
    },
    Paired {
        base: Box<GeneratorDoc>,
    },
}

fn one() -> f64 {
    1.0
}

impl GeneratorDoc {
    fn build(&self, prec: u32) -> Result<LengthGenerator> {
        Ok(match self {
            GeneratorDoc::Plog { p } => LengthGenerator::PLogN { p: *p },
            GeneratorDoc::Power { c, q } => LengthGenerator::Power { c: *c, q: *q },
            GeneratorDoc::Exp { rate, scale } => LengthGenerator::Exponential {
                rate: *rate,
                scale: *scale,
            },
            GeneratorDoc::List { values } => LengthGenerator::Explicit(
                values
                    .iter()
                    .map(|x| x.to_float(prec))
                    .collect::<Result<_>>()?,
            ),
            GeneratorDoc::Paired { base } => LengthGenerator::Paired(Box::new(base.build(prec)?)),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum PatternDoc {
    None,
    All,
    Every { step: usize },
    Factorial,
    Squares,
    Powers { base: usize },
}

impl PatternDoc {
    fn generator(&self) -> PatternGenerator {
        match self {
            PatternDoc::None => PatternGenerator::None,
            PatternDoc::All => PatternGenerator::All,
            PatternDoc::Every { step } => PatternGenerator::Every(*step),
            PatternDoc::Factorial => PatternGenerator::Factorial,
            PatternDoc::Squares => PatternGenerator::Squares,
            PatternDoc::Powers { base } => PatternGenerator::Powers(*base),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum NodeKind {
    Flute,
    BasicEnd,
    EndTree,
}

/// One node of a document. Every kind shares the flute fields; the border
/// fields and `children` are rejected where the kind does not admit them.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    kind: NodeKind,
    truncation: usize,
    #[serde(default)]
    lengths: Option<Vec<RealLit>>,
    #[serde(default)]
    generator: Option<GeneratorDoc>,
    #[serde(default)]
    half_twist_indices: Option<Vec<usize>>,
    #[serde(default)]
    pattern: Option<PatternDoc>,
    #[serde(default)]
    declared_infinite: Option<bool>,
    #[serde(default)]
    beta_lengths: Option<Vec<RealLit>>,
    #[serde(default)]
    beta_generator: Option<GeneratorDoc>,
    #[serde(default)]
    beta_bound: Option<f64>,
    #[serde(default)]
    beta_unbounded: bool,
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    children: Vec<ChildDoc>,
    #[serde(default)]
    finite_area: Vec<FiniteAreaDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChildDoc {
    attach_at: usize,
    node: Box<NodeDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FiniteAreaDoc {
    attach_at: usize,
    #[serde(default)]
    label: String,
}

/// Document syntax accepted by [`parse_surface`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocFormat {
    Json,
    Toml,
}

impl DocFormat {
    /// By extension, falling back to sniffing the first significant byte.
    pub fn detect(path: Option<&Path>, text: &str) -> Self {
        match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => DocFormat::Json,
            Some("toml") => DocFormat::Toml,
            _ => {
                if text.trim_start().starts_with('{') {
                    DocFormat::Json
                } else {
                    DocFormat::Toml
                }
            }
        }
    }
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

fn build_flute(f: &NodeDoc, at: &str, prec: u32) -> Result<FluteDescriptor> {
    let lengths = match (&f.lengths, &f.generator) {
        (Some(v), None) => LengthGenerator::Explicit(
            v.iter()
                .map(|x| x.to_float(prec))
                .collect::<Result<_>>()
                .map_err(|e| schema(&join(at, "lengths"), e.to_string()))?,
        ),
        (None, Some(g)) => g
            .build(prec)
            .map_err(|e| schema(&join(at, "generator"), e.to_string()))?,
        (Some(_), Some(_)) => {
            return Err(schema(at, "give either `lengths` or `generator`, not both"))
        }
        (None, None) => return Err(schema(at, "missing `lengths` or `generator`")),
    };
    let twists = match (&f.half_twist_indices, &f.pattern) {
        (Some(v), None) => TwistPattern::new(v.clone(), f.declared_infinite.unwrap_or(false))?,
        (None, Some(p)) => p.generator().pattern(f.truncation, f.declared_infinite)?,
        (None, None) => {
            TwistPattern::none().with_declared_infinite(f.declared_infinite.unwrap_or(false))
        }
        (Some(_), Some(_)) => {
            return Err(schema(
                at,
                "give either `half_twist_indices` or `pattern`, not both",
            ))
        }
    };
    Ok(FluteDescriptor {
        lengths,
        twists,
        truncation: f.truncation,
    })
}

fn build(b: &NodeDoc, at: &str, id: String, prec: u32) -> Result<Surface> {
    if b.kind != NodeKind::EndTree && !(b.children.is_empty() && b.finite_area.is_empty()) {
        return Err(schema(
            &join(at, "children"),
            "only an end-tree node may have attachments",
        ));
    }
    if b.kind == NodeKind::Flute {
        if b.beta_lengths.is_some()
            || b.beta_generator.is_some()
            || b.beta_bound.is_some()
            || b.beta_unbounded
        {
            return Err(schema(
                at,
                "border fields need kind `basic-end` or `end-tree`",
            ));
        }
        let d = build_flute(b, at, prec)?;
        return Ok(Surface::Flute(validate_flute(&d, prec)?));
    }
    let is_tree = b.kind == NodeKind::EndTree;
    if b.beta_unbounded {
        return Err(Error::Refused(
            "border lengths are declared unbounded; the basic-end criterion needs a bound on them"
                .into(),
        ));
    }
    let bound = b
        .beta_bound
        .ok_or_else(|| schema(&join(at, "beta_bound"), "required"))?;
    let beta = match (&b.beta_lengths, &b.beta_generator) {
        (Some(v), None) => BetaLengths::Explicit(
            v.iter()
                .map(|x| x.to_float(prec))
                .collect::<Result<_>>()
                .map_err(|e| schema(&join(at, "beta_lengths"), e.to_string()))?,
        ),
        (None, Some(g)) => BetaLengths::Generated(
            g.build(prec)
                .map_err(|e| schema(&join(at, "beta_generator"), e.to_string()))?,
        ),
        (None, None) => {
            BetaLengths::Explicit(vec![Float::new(prec); b.truncation.saturating_sub(1)])
        }
        (Some(_), Some(_)) => {
            return Err(schema(
                at,
                "give either `beta_lengths` or `beta_generator`, not both",
            ))
        }
    };
    let flute = build_flute(b, at, prec)?;
    let end = validate_basic_end(
        &BasicEndDescriptor {
            flute,
            beta_lengths: beta,
            beta_bound: bound,
        },
        prec,
    )
    .map_err(|e| match e {
        Error::Schema { path, message } => schema(&join(at, &path), message),
        other => other,
    })?;
    if !is_tree {
        return Ok(Surface::BasicEnd(end));
    }
    let borders = end.flute.truncation() - 1;
    let node_id = b.id.clone().unwrap_or(id);
    let mut children = Vec::new();
    for (i, c) in b.children.iter().enumerate() {
        let cat = join(at, &format!("children[{i}]"));
        if c.attach_at == 0 || c.attach_at > borders {
            return Err(schema(
                &join(&cat, "attach_at"),
                format!("border index must lie in 1..={borders}"),
            ));
        }
        let child_id = format!("{node_id}.{}", i + 1);
        let sub = build(&c.node, &join(&cat, "node"), child_id.clone(), prec)?;
        let mut node = match sub {
            Surface::Flute(f) => EndTree::leaf(child_id, NodeBody::Flute(f)),
            Surface::BasicEnd(e) => EndTree::leaf(child_id, NodeBody::BasicEnd(e)),
            Surface::Tree(t) => t,
        };
        node.attach_at = Some(c.attach_at);
        children.push(node);
    }
    let mut finite_area = Vec::new();
    for (i, a) in b.finite_area.iter().enumerate() {
        if a.attach_at == 0 || a.attach_at > borders {
            return Err(schema(
                &join(at, &format!("finite_area[{i}].attach_at")),
                format!("border index must lie in 1..={borders}"),
            ));
        }
        finite_area.push(FiniteAttachment {
            attach_at: a.attach_at,
            label: a.label.clone(),
        });
    }
    Ok(Surface::Tree(EndTree {
        id: node_id,
        attach_at: None,
        body: NodeBody::BasicEnd(end),
        children,
        finite_area,
    }))
}

/// Parses and validates a surface document.
///
/// Top-level `kind` is `flute`, `basic-end` or `end-tree`. A flute gives
/// `truncation`, either `lengths` or `generator`, either `half_twist_indices`
/// or `pattern`, and optionally `declared_infinite`. A basic end adds
/// `beta_lengths` or `beta_generator`, `beta_bound` and `beta_unbounded`. An
/// end tree is a basic end with `children = [{ attach_at, node }]` and
/// optional `finite_area = [{ attach_at, label }]`.
pub fn parse_surface(text: &str, format: DocFormat, prec: u32) -> Result<Surface> {
    let doc: NodeDoc = match format {
        DocFormat::Json => {
            let de = &mut serde_json::Deserializer::from_str(text);
            serde_path_to_error::deserialize(de).map_err(|e| {
                let path = e.path().to_string();
                schema(&path, e.into_inner().to_string())
            })?
        }
        DocFormat::Toml => {
            let de = toml::Deserializer::parse(text).map_err(|e| schema(".", e.to_string()))?;
            serde_path_to_error::deserialize(de).map_err(|e| {
                let path = e.path().to_string();
                schema(&path, e.into_inner().to_string())
            })?
        }
    };
    build(&doc, "", "root".to_string(), prec)
}

pub fn read_surface(path: &Path, prec: u32) -> Result<Surface> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_surface(&text, DocFormat::detect(Some(path), &text), prec)
}
