//! Series criteria for parabolicity and the row-by-row classifier.
//!
//! | row | twists              | test                         | strength   |
//! |-----|---------------------|------------------------------|------------|
//! | 1   | all zero            | `Σ e^{-l_n/2} = ∞`           | iff        |
//! | 2   | all one half        | `Σ e^{-σ_n/2} = ∞`, `n_k = k` | iff        |
//! | 3   | all half, concave l | `Σ e^{-l_n/4} = ∞`           | iff        |
//! | 4   | mixed               | `Σ e^{-σ_k/2} = ∞`           | sufficient |
//!
//! Divergence of an infinite series cannot be decided from a finite prefix;
//! [`divergence_classify`] is an explicit heuristic whose knobs live in
//! [`DivergencePolicy`] and are echoed in every verdict. The one exact route
//! is the pairing certificate: `σ_{2k} = 0` for every `k` makes every other
//! term of the row-4 series equal to one.

use std::fmt;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{fmt_real, log_add_exp};
use crate::shear::ShearSequence;
use crate::surface::{CheckedFlute, TwistPattern};

/// `σ_k = l_{n_k} - l_{n_{k-1}} + ... ± l_{n_1}` for `k = 1..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingSums {
    sigma: Vec<Float>,
    pattern: TwistPattern,
}

impl AlternatingSums {
    pub fn values(&self) -> &[Float] {
        &self.sigma
    }

    /// `σ_k`, 1-based.
    pub fn get(&self, k: usize) -> &Float {
        &self.sigma[k - 1]
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn pattern(&self) -> &TwistPattern {
        &self.pattern
    }

    /// True when `K >= 2` and `σ_{2k}` is exactly zero for every `2k <= K`.
    pub fn pairing_certificate(&self) -> bool {
        self.sigma.len() >= 2 && self.sigma.iter().skip(1).step_by(2).all(|s| s.is_zero())
    }
}

/// By the recurrence `σ_1 = l_{n_1}`, `σ_k = l_{n_k} - σ_{k-1}`.
pub fn alternating_sums(lengths: &[Float], pattern: &TwistPattern) -> Result<AlternatingSums> {
    let h = pattern.half_indices();
    if h.is_empty() {
        return Err(Error::domain(
            "alternating sums need at least one half-twist",
        ));
    }
    if let Some(&last) = h.last() {
        if last > lengths.len() {
            return Err(Error::domain(format!(
                "half-twist index {last} exceeds the {} available lengths",
                lengths.len()
            )));
        }
    }
    let prec = lengths[0].prec();
    let mut sigma: Vec<Float> = Vec::with_capacity(h.len());
    for &n in h {
        let s = match sigma.last() {
            Some(prev) => Float::with_val(prec, &lengths[n - 1] - prev),
            None => lengths[n - 1].clone(),
        };
        sigma.push(s);
    }
    Ok(AlternatingSums {
        sigma,
        pattern: pattern.clone(),
    })
}

/// `σ_k` by its alternating expansion, summed from `l_{n_1}` upward.
pub fn alternating_expansion(lengths: &[Float], pattern: &TwistPattern, k: usize) -> Float {
    let h = pattern.half_indices();
    let prec = lengths[0].prec();
    let mut acc = Float::new(prec);
    for (j, &n) in h[..k].iter().enumerate() {
        if (k - 1 - j).is_multiple_of(2) {
            acc += &lengths[n - 1];
        } else {
            acc -= &lengths[n - 1];
        }
    }
    acc
}

/// `log l(h_n)` for the piecewise horocyclic path: `-(s_1+...+s_n)` for odd
/// `n`, `+(s_1+...+s_n)` for even `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorocyclicLengths {
    ln_values: Vec<Float>,
}

impl HorocyclicLengths {
    pub fn ln_values(&self) -> &[Float] {
        &self.ln_values
    }

    pub fn len(&self) -> usize {
        self.ln_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_values.is_empty()
    }

    /// `log Σ_{i <= n} l(h_i)`, 1-based.
    pub fn ln_partial_sums(&self) -> Vec<Float> {
        let mut out: Vec<Float> = Vec::with_capacity(self.ln_values.len());
        for v in &self.ln_values {
            let next = match out.last() {
                Some(acc) => log_add_exp(acc, v),
                None => v.clone(),
            };
            out.push(next);
        }
        out
    }
}

pub fn horocyclic_lengths(s: &ShearSequence) -> Result<HorocyclicLengths> {
    if s.is_empty() {
        return Err(Error::TooFewTerms { needed: 1, got: 0 });
    }
    if !s.shear(1).is_zero() {
        return Err(Error::domain(
            "horocyclic lengths assume the normalization s_1 = 0",
        ));
    }
    let prec = s.precision();
    let mut acc = Float::new(prec);
    let mut ln_values = Vec::with_capacity(s.len());
    for (i, x) in s.shears().iter().enumerate() {
        acc += x;
        ln_values.push(if i % 2 == 0 {
            -acc.clone()
        } else {
            acc.clone()
        });
    }
    Ok(HorocyclicLengths { ln_values })
}

/// Knobs of the finite-data divergence heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergencePolicy {
    /// Minimum tail length examined.
    pub window: usize,
    /// Lower bound that counts as "bounded away from zero".
    pub delta: f64,
    /// Slack around the critical exponent `-1` and the ratio `1`.
    pub margin: f64,
    /// Largest acceptable RMS residual of a fit in log space.
    pub resid: f64,
}

impl Default for DivergencePolicy {
    fn default() -> Self {
        DivergencePolicy {
            window: 512,
            delta: 1e-9,
            margin: 0.05,
            resid: 0.1,
        }
    }
}

impl DivergencePolicy {
    pub fn validate(&self) -> Result<()> {
        if self.window < 16 {
            return Err(Error::domain("policy window must be at least 16"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::domain("policy delta must lie in (0, 1)"));
        }
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return Err(Error::domain("policy margin must lie in (0, 0.5)"));
        }
        if !(self.resid > 0.0 && self.resid.is_finite()) {
            return Err(Error::domain("policy residual bound must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Divergence {
    Divergent,
    Convergent,
    Inconclusive,
}

/// Which test decided a [`Divergence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    BoundedBelow,
    GeometricTail,
    PowerFit,
    Condensation,
    Underflow,
    Undecided,
}

/// Least-squares line `y = slope x + intercept` with RMS residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<Fit> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Some(Fit {
        slope,
        intercept,
        residual: (ss / n as f64).sqrt(),
        points: n,
    })
}

/// `(n, log Σ_{k<=n} t_k)` at a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSum {
    pub n: usize,
    pub ln_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub outcome: Divergence,
    pub rule: Rule,
    pub terms: usize,
    pub tail_start: usize,
    pub partial_sums: Vec<PartialSum>,
    /// `log t_k` against `log k` over tail block maxima.
    pub power_fit: Option<Fit>,
    /// `log t_k` against `k` over tail block maxima.
    pub geometric_fit: Option<Fit>,
    /// `D_last / D_{last-3}` of the dyadic block sums, when evaluated.
    pub condensation_ratio: Option<f64>,
    pub policy: DivergencePolicy,
}

const BLOCK: usize = 4;
const CHECKPOINTS: [usize; 3] = [100, 1000, 10000];

fn lse(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Classifies `Σ t_k` from `log t_k`, `k = 1..K`.
///
/// The tail is the last `max(window, K/2)` terms, reduced to maxima over
/// blocks of four so that sequences vanishing on a sub-lattice keep their
/// envelope (the sum of block maxima bounds the series from above, and by four
/// times the series from below). Decision order: bounded below, geometric
/// tail, power fit, dyadic condensation at the critical exponent.
pub fn divergence_classify(
    ln_terms: &[f64],
    policy: &DivergencePolicy,
) -> Result<DivergenceReport> {
    policy.validate()?;
    let k_total = ln_terms.len();
    if k_total < policy.window {
        return Err(Error::TooFewTerms {
            needed: policy.window,
            got: k_total,
        });
    }
    if ln_terms.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
        return Err(Error::domain("log terms must be finite or -inf"));
    }

    let mut partial_sums = Vec::new();
    let mut acc = f64::NEG_INFINITY;
    for (i, &t) in ln_terms.iter().enumerate() {
        acc = lse(acc, t);
        let n = i + 1;
        if CHECKPOINTS.contains(&n) || n == k_total {
            partial_sums.push(PartialSum { n, ln_sum: acc });
        }
    }

    let tail_len = policy.window.max(k_total / 2);
    let tail_start = k_total - tail_len + 1;
    let mut xs_log = Vec::new();
    let mut xs_lin = Vec::new();
    let mut ys = Vec::new();
    let mut blocks = 0usize;
    let mut vanished = 0usize;
    let mut min_block = f64::INFINITY;
    for chunk_start in (tail_start - 1..k_total).step_by(BLOCK) {
        let chunk_end = (chunk_start + BLOCK).min(k_total);
        let (arg, &max) = ln_terms[chunk_start..chunk_end]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty block");
        blocks += 1;
        min_block = min_block.min(max);
        if max == f64::NEG_INFINITY {
            vanished += 1;
            continue;
        }
        let k = (chunk_start + arg + 1) as f64;
        xs_log.push(k.ln());
        xs_lin.push(k);
        ys.push(max);
    }

    let power_fit = least_squares(&xs_log, &ys);
    let geometric_fit = least_squares(&xs_lin, &ys);
    let mut report = DivergenceReport {
        outcome: Divergence::Inconclusive,
        rule: Rule::Undecided,
        terms: k_total,
        tail_start,
        partial_sums,
        power_fit,
        geometric_fit,
        condensation_ratio: None,
        policy: *policy,
    };

    if 2 * vanished > blocks {
        report.outcome = Divergence::Convergent;
        report.rule = Rule::Underflow;
        return Ok(report);
    }
    let Some(pf) = power_fit else {
        return Ok(report);
    };

    if min_block >= policy.delta.ln() && pf.slope >= -policy.margin {
        report.outcome = Divergence::Divergent;
        report.rule = Rule::BoundedBelow;
        return Ok(report);
    }
    if let Some(gf) = geometric_fit {
        if gf.slope.exp() < 1.0 - policy.margin && gf.residual < policy.resid {
            report.outcome = Divergence::Convergent;
            report.rule = Rule::GeometricTail;
            return Ok(report);
        }
    }
    if pf.slope > -1.0 + policy.margin && pf.residual < policy.resid {
        report.outcome = Divergence::Divergent;
        report.rule = Rule::PowerFit;
        return Ok(report);
    }
    if pf.slope < -1.0 - policy.margin {
        report.outcome = Divergence::Convergent;
        report.rule = Rule::PowerFit;
        return Ok(report);
    }
    if (pf.slope + 1.0).abs() <= policy.margin {
        if let Some(ratio) = condensation_ratio(ln_terms) {
            report.condensation_ratio = Some(ratio);
            if ratio >= 1.0 - policy.margin {
                report.outcome = Divergence::Divergent;
                report.rule = Rule::Condensation;
            }
        }
    }
    Ok(report)
}

/// `D_j = Σ_{2^j <= k < 2^{j+1}} t_k` over complete blocks; returns
/// `D_last / D_{last-3}`. A series with nonincreasing terms diverges iff
/// `Σ D_j` does, and `D_j` bounded below signals divergence.
fn condensation_ratio(ln_terms: &[f64]) -> Option<f64> {
    let mut d = Vec::new();
    let mut lo = 1usize;
    while 2 * lo - 1 <= ln_terms.len() {
        let s = ln_terms[lo - 1..2 * lo - 1]
            .iter()
            .fold(f64::NEG_INFINITY, |a, &t| lse(a, t));
        d.push(s);
        lo *= 2;
    }
    if d.len() < 4 {
        return None;
    }
    let last = d.len() - 1;
    Some((d[last] - d[last - 3]).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub concave: bool,
    /// First index `i` (1-based) with `l_i - 2 l_{i+1} + l_{i+2} > τ`.
    pub first_violation: Option<usize>,
    pub tolerance: f64,
}

/// Relative tolerance on second differences.
pub const CONCAVITY_TOLERANCE: f64 = 1e-12;

/// Second differences must not exceed `τ` times the local magnitude.
pub fn concavity_check(lengths: &[Float]) -> ConcavityReport {
    let mut first_violation = None;
    if lengths.len() >= 3 {
        let prec = lengths[0].prec();
        for i in 0..lengths.len() - 2 {
            let mut d2 = Float::with_val(prec, &lengths[i] + &lengths[i + 2]);
            d2 -= Float::with_val(prec, &lengths[i + 1] * 2u32);
            let scale = lengths[i]
                .clone()
                .abs()
                .max(&lengths[i + 1].clone().abs())
                .max(&lengths[i + 2].clone().abs());
            if d2 > scale * CONCAVITY_TOLERANCE {
                first_violation = Some(i + 1);
                break;
            }
        }
    }
    ConcavityReport {
        concave: first_violation.is_none(),
        first_violation,
        tolerance: CONCAVITY_TOLERANCE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Row {
    ZeroTwist,
    HalfTwist,
    ConcaveHalfTwist,
    Mixed,
}

impl Row {
    pub fn number(self) -> u8 {
        match self {
            Row::ZeroTwist => 1,
            Row::HalfTwist => 2,
            Row::ConcaveHalfTwist => 3,
            Row::Mixed => 4,
        }
    }

    pub fn is_iff(self) -> bool {
        self != Row::Mixed
    }

    pub fn series(self) -> &'static str {
        match self {
            Row::ZeroTwist => "sum exp(-l_n/2)",
            Row::HalfTwist => "sum exp(-sigma_n/2), n_k = k",
            Row::ConcaveHalfTwist => "sum exp(-l_n/4)",
            Row::Mixed => "sum exp(-sigma_k/2)",
        }
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Row::ZeroTwist => "zero-twist",
            Row::HalfTwist => "half-twist",
            Row::ConcaveHalfTwist => "concave-half-twist",
            Row::Mixed => "mixed",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    Parabolic,
    NotParabolic,
    Inconclusive,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerdictKind::Parabolic => "Parabolic",
            VerdictKind::NotParabolic => "NotParabolic",
            VerdictKind::Inconclusive => "Inconclusive",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "strength", content = "row", rename_all = "kebab-case")]
pub enum Basis {
    IffRow(Row),
    SufficientRow(Row),
}

impl Basis {
    pub fn row(self) -> Row {
        match self {
            Basis::IffRow(r) | Basis::SufficientRow(r) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SeriesHeuristic,
    PairingCertificate,
}

/// One row of the σ table in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaEntry {
    pub k: usize,
    pub n_k: usize,
    pub sigma: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub basis: Basis,
    pub method: Method,
    pub series: String,
    pub divergence: Option<DivergenceReport>,
    pub concavity: Option<ConcavityReport>,
    /// Leading and trailing `σ_k`, when the row uses them.
    pub sigma: Vec<SigmaEntry>,
    pub assumptions: Vec<String>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(kind: VerdictKind, basis: Basis, method: Method) -> Self {
        debug_assert!(kind != VerdictKind::NotParabolic || matches!(basis, Basis::IffRow(_)));
        Verdict {
            kind,
            basis,
            method,
            series: basis.row().series().to_string(),
            divergence: None,
            concavity: None,
            sigma: Vec::new(),
            assumptions: Vec::new(),
            notes: Vec::new(),
        }
    }
}

const ROW2_ASSUMPTION: &str =
    "the all-half-twist row uses sigma_n as the alternating sum with n_k = k";
const DECLARED_INFINITE: &str =
    "infinitely many half-twists taken from the declared_infinite flag, not from the finite data";

fn sigma_table(sigma: &AlternatingSums) -> Vec<SigmaEntry> {
    let k = sigma.len();
    let h = sigma.pattern().half_indices();
    let pick: Vec<usize> = if k <= 20 {
        (1..=k).collect()
    } else {
        (1..=10).chain(k - 9..=k).collect()
    };
    pick.into_iter()
        .map(|i| SigmaEntry {
            k: i,
            n_k: h[i - 1],
            sigma: fmt_real(sigma.get(i), 20),
        })
        .collect()
}

/// `log` of the row's series terms.
fn row_terms(row: Row, flute: &CheckedFlute, sigma: Option<&AlternatingSums>) -> Vec<f64> {
    match row {
        Row::ZeroTwist => flute.lengths().iter().map(|l| -l.to_f64() / 2.0).collect(),
        Row::ConcaveHalfTwist => flute.lengths().iter().map(|l| -l.to_f64() / 4.0).collect(),
        Row::HalfTwist | Row::Mixed => sigma
            .expect("sigma for rows 2 and 4")
            .values()
            .iter()
            .map(|s| -s.to_f64() / 2.0)
            .collect(),
    }
}

fn decide(
    row: Row,
    flute: &CheckedFlute,
    sigma: Option<&AlternatingSums>,
    policy: &DivergencePolicy,
) -> Result<Verdict> {
    let terms = row_terms(row, flute, sigma);
    let basis = if row.is_iff() {
        Basis::IffRow(row)
    } else {
        Basis::SufficientRow(row)
    };
    let mut v = match divergence_classify(&terms, policy) {
        Ok(rep) => {
            let kind = match (rep.outcome, row.is_iff()) {
                (Divergence::Divergent, _) => VerdictKind::Parabolic,
                (Divergence::Convergent, true) => VerdictKind::NotParabolic,
                _ => VerdictKind::Inconclusive,
            };
            let mut v = Verdict::new(kind, basis, Method::SeriesHeuristic);
            v.divergence = Some(rep);
            v
        }
        Err(Error::TooFewTerms { needed, got }) => {
            let mut v = Verdict::new(VerdictKind::Inconclusive, basis, Method::SeriesHeuristic);
            v.notes.push(format!(
                "series has {got} terms; the policy window needs {needed}"
            ));
            v
        }
        Err(e) => return Err(e),
    };
    if let Some(s) = sigma {
        v.sigma = sigma_table(s);
    }
    if row == Row::HalfTwist {
        v.assumptions.push(ROW2_ASSUMPTION.to_string());
    }
    if row != Row::ZeroTwist {
        v.assumptions.push(DECLARED_INFINITE.to_string());
    }
    if row == Row::Mixed && v.kind != VerdictKind::Parabolic {
        v.notes.push(
            "the mixed row is sufficient only; divergence failing to show proves nothing".into(),
        );
    }
    Ok(v)
}

fn require_declared(flute: &CheckedFlute) -> Result<()> {
    if !flute.twists().declared_infinite() {
        return Err(Error::Refused(
            "the pattern has half-twists but is not declared infinite; every half-twist row needs infinitely many"
                .into(),
        ));
    }
    Ok(())
}

/// Picks the strongest applicable row and classifies.
///
/// Order: no half-twists gives row 1; a pattern that is not declared
/// infinite is refused; an exact pairing certificate settles row 4; a full
/// pattern gives row 3 when the lengths are concave and row 2 otherwise;
/// anything else is row 4.
pub fn classify_flute(flute: &CheckedFlute, policy: &DivergencePolicy) -> Result<Verdict> {
    policy.validate()?;
    let pattern = flute.twists();
    if pattern.is_empty() {
        return decide(Row::ZeroTwist, flute, None, policy);
    }
    require_declared(flute)?;
    let sigma = alternating_sums(flute.lengths(), pattern)?;
    if sigma.pairing_certificate() {
        let mut v = Verdict::new(
            VerdictKind::Parabolic,
            Basis::SufficientRow(Row::Mixed),
            Method::PairingCertificate,
        );
        v.sigma = sigma_table(&sigma);
        v.assumptions.push(DECLARED_INFINITE.to_string());
        v.notes.push(format!(
            "sigma_2k = 0 exactly for all {} even k, so the series has infinitely many unit terms",
            sigma.len() / 2
        ));
        return Ok(v);
    }
    if pattern.is_full(flute.truncation()) {
        let conc = concavity_check(flute.lengths());
        let mut v = if conc.concave {
            decide(Row::ConcaveHalfTwist, flute, None, policy)?
        } else {
            decide(Row::HalfTwist, flute, Some(&sigma), policy)?
        };
        v.concavity = Some(conc);
        return Ok(v);
    }
    decide(Row::Mixed, flute, Some(&sigma), policy)
}

/// Classifies under a caller-chosen row; fails when the flute does not
/// belong to that row.
pub fn classify_flute_as(
    flute: &CheckedFlute,
    row: Row,
    policy: &DivergencePolicy,
) -> Result<Verdict> {
    policy.validate()?;
    let pattern = flute.twists();
    let n = flute.truncation();
    match row {
        Row::ZeroTwist => {
            if !pattern.is_empty() {
                return Err(Error::domain(
                    "the zero-twist row needs an empty half-twist pattern",
                ));
            }
            decide(row, flute, None, policy)
        }
        Row::HalfTwist | Row::ConcaveHalfTwist => {
            if !pattern.is_full(n) {
                return Err(Error::domain(format!(
                    "the {row} row needs a half-twist at every index"
                )));
            }
            require_declared(flute)?;
            let conc = concavity_check(flute.lengths());
            if row == Row::ConcaveHalfTwist && !conc.concave {
                return Err(Error::domain(format!(
                    "lengths are not concave (first violation at index {})",
                    conc.first_violation.unwrap_or(0)
                )));
            }
            let sigma = alternating_sums(flute.lengths(), pattern)?;
            let mut v = decide(
                row,
                flute,
                (row == Row::HalfTwist).then_some(&sigma),
                policy,
            )?;
            v.concavity = Some(conc);
            Ok(v)
        }
        Row::Mixed => {
            if pattern.is_empty() {
                return Err(Error::domain("the mixed row needs at least one half-twist"));
            }
            require_declared(flute)?;
            let sigma = alternating_sums(flute.lengths(), pattern)?;
            decide(row, flute, Some(&sigma), policy)
        }
    }
}
