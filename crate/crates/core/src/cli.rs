//! Command-line front end: `analyze`, `develop`, `synthesize` and `endtree`.
//!
//! Exit codes: 0 success, 2 input error, 3 precision exhaustion, 4 refused
//! hypothesis. Reports embed the full [`RunConfig`] and contain no clocks or
//! host data, so identical invocations produce identical bytes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Float;
use serde::Serialize;

use crate::criterion::{
    classify_flute, horocyclic_lengths, DivergencePolicy, Verdict, VerdictKind,
};
use crate::ends::{classify_end, classify_surface, EndReport};
use crate::error::{Error, Result};
use crate::polygon::{develop_chain_until, render_disk, DevelopOptions, RenderOptions};
use crate::real::{fmt_real, parse_real, MIN_PRECISION};
use crate::shear::{shear_sequence, ShearSequence};
use crate::surface::{
    read_surface, validate_flute, CheckedBasicEnd, CheckedFlute, EndTree, FluteDescriptor,
    LengthGenerator, NodeBody, PatternGenerator, Surface, TwistPattern,
};
use crate::synth::{synthesize, Mode, SynthesisPlan};

/// Truncation used with `--generator` when `--truncate` is absent.
pub const DEFAULT_TRUNCATION: usize = 1000;

const CHECKPOINTS: [usize; 4] = [100, 1000, 10_000, 100_000];

#[derive(Debug, Parser)]
#[command(
    name = "flutetype",
    version,
    about = "Parabolicity type of symmetric flute surfaces and their end trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a flute or basic end and report the series evidence.
    Analyze,
    /// Develop the geodesic chain, write the gap trace and a disk drawing.
    Develop {
        /// Shears to develop directly: `zeros`, `values:a,b,...` or
        /// `list:<file>`. Overrides the surface input.
        #[arg(long)]
        shears: Option<String>,
        /// Gap trace destination (`n,gap,log_gap`).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Raise or lower lengths to a certified parabolic sequence.
    Synthesize {
        #[arg(long, value_enum, default_value_t = ModeArg::Raise)]
        mode: ModeArg,
        /// Adjusted lengths, one per line, readable by `list:<file>`.
        #[arg(long)]
        lengths_out: Option<PathBuf>,
    },
    /// Classify every end of a tree and aggregate.
    Endtree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Raise,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Surface document (JSON or TOML).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Inline length generator, e.g. `plog:2.5`, `pairs-of:plog:8`, `list:file.txt`.
    #[arg(long, global = true)]
    pub generator: Option<String>,
    /// Half-twist pattern: none, all, every:k, factorial, squares, powers:b, list:1,2,...
    #[arg(long, global = true)]
    pub pattern: Option<String>,
    /// Whether the half-twist pattern continues forever beyond the truncation.
    #[arg(long, global = true)]
    pub declare_infinite: Option<bool>,
    #[arg(long, global = true, default_value_t = 256, value_parser = clap::value_parser!(u32).range(MIN_PRECISION as i64..))]
    pub precision_bits: u32,
    /// Number of cuffs N.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub truncate: Option<u64>,
    #[arg(long, global = true)]
    pub policy_window: Option<usize>,
    #[arg(long, global = true)]
    pub policy_delta: Option<f64>,
    #[arg(long, global = true)]
    pub policy_margin: Option<f64>,
    /// Report destination; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Disk drawing destination (develop).
    #[arg(long, global = true)]
    pub svg_out: Option<PathBuf>,
    /// Recorded in the report; no command draws random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Everything that determines a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<String>,
    pub generator: Option<String>,
    pub pattern: Option<String>,
    pub declare_infinite: Option<bool>,
    pub shears: Option<String>,
    pub mode: Option<ModeArg>,
    pub precision_bits: u32,
    pub truncate: Option<u64>,
    pub policy: DivergencePolicy,
    pub out: Option<String>,
    pub svg_out: Option<String>,
    pub trace_out: Option<String>,
    pub lengths_out: Option<String>,
    pub seed: u64,
    pub format: Format,
    pub version: String,
}

fn path_str(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|x| x.display().to_string())
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let c = &cli.common;
        let mut policy = DivergencePolicy::default();
        if let Some(w) = c.policy_window {
            policy.window = w;
        }
        if let Some(d) = c.policy_delta {
            policy.delta = d;
        }
        if let Some(m) = c.policy_margin {
            policy.margin = m;
        }
        policy.validate()?;
        let (command, shears, mode, trace_out, lengths_out) = match &cli.command {
            Command::Analyze => ("analyze", None, None, None, None),
            Command::Develop { shears, trace_out } => {
                ("develop", shears.clone(), None, path_str(trace_out), None)
            }
            Command::Synthesize { mode, lengths_out } => {
                ("synthesize", None, Some(*mode), None, path_str(lengths_out))
            }
            Command::Endtree => ("endtree", None, None, None, None),
        };
        Ok(RunConfig {
            command: command.into(),
            input: path_str(&c.input),
            generator: c.generator.clone(),
            pattern: c.pattern.clone(),
            declare_infinite: c.declare_infinite,
            shears,
            mode,
            precision_bits: c.precision_bits,
            truncate: c.truncate,
            policy,
            out: path_str(&c.out),
            svg_out: path_str(&c.svg_out),
            trace_out,
            lengths_out,
            seed: c.seed,
            format: c.format,
            version: env!("CARGO_PKG_VERSION").into(),
        })
    }

    fn truncation(&self) -> Option<usize> {
        self.truncate.map(|t| t as usize)
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PrecisionExhausted { .. } | Error::NotNested { .. } => 3,
        Error::Refused(_) => 4,
        _ => 2,
    }
}

fn input_error(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

// ---------- surface loading ----------

fn restrict_pattern(p: &TwistPattern, n: usize) -> Result<TwistPattern> {
    let kept: Vec<usize> = p
        .half_indices()
        .iter()
        .copied()
        .filter(|&i| i <= n)
        .collect();
    TwistPattern::new(kept, p.declared_infinite())
}

fn retruncate_flute(f: &CheckedFlute, n: usize) -> Result<CheckedFlute> {
    if n > f.truncation() {
        return Err(input_error(format!(
            "--truncate {n} exceeds the document truncation {}",
            f.truncation()
        )));
    }
    let d = FluteDescriptor {
        lengths: LengthGenerator::Explicit(f.lengths()[..n].to_vec()),
        twists: restrict_pattern(f.twists(), n)?,
        truncation: n,
    };
    validate_flute(&d, f.precision())
}

fn retruncate_end(b: &CheckedBasicEnd, n: usize) -> Result<CheckedBasicEnd> {
    Ok(CheckedBasicEnd {
        flute: retruncate_flute(&b.flute, n)?,
        beta_lengths: b.beta_lengths[..n - 1].to_vec(),
        beta_bound: b.beta_bound.clone(),
    })
}

fn retruncate_tree(t: &mut EndTree, n: usize) -> Result<()> {
    t.body = match &t.body {
        NodeBody::Flute(f) => NodeBody::Flute(retruncate_flute(f, n)?),
        NodeBody::BasicEnd(b) => NodeBody::BasicEnd(retruncate_end(b, n)?),
    };
    for c in &mut t.children {
        retruncate_tree(c, n)?;
    }
    Ok(())
}

fn repattern(f: &CheckedFlute, cfg: &RunConfig) -> Result<CheckedFlute> {
    if cfg.pattern.is_none() && cfg.declare_infinite.is_none() {
        return Ok(f.clone());
    }
    let n = f.truncation();
    let twists = match &cfg.pattern {
        Some(p) => p
            .parse::<PatternGenerator>()?
            .pattern(n, cfg.declare_infinite)?,
        None => f
            .twists()
            .clone()
            .with_declared_infinite(cfg.declare_infinite.unwrap_or(false)),
    };
    let d = FluteDescriptor {
        lengths: LengthGenerator::Explicit(f.lengths().to_vec()),
        twists,
        truncation: n,
    };
    validate_flute(&d, f.precision())
}

/// Reads `--input` or builds a flute from `--generator` and `--pattern`,
/// then applies `--truncate`.
pub fn load_surface(cfg: &RunConfig, default_pattern: &str) -> Result<Surface> {
    let prec = cfg.precision_bits;
    match (&cfg.input, &cfg.generator) {
        (Some(_), Some(_)) => Err(input_error("give either --input or --generator, not both")),
        (None, None) => Err(input_error(
            "no surface given: use --input <file> or --generator <expr>",
        )),
        (None, Some(g)) => {
            let n = cfg.truncation().unwrap_or(DEFAULT_TRUNCATION);
            let lengths = LengthGenerator::parse_expr(g, prec)?;
            let pattern = cfg
                .pattern
                .as_deref()
                .unwrap_or(default_pattern)
                .parse::<PatternGenerator>()?;
            let twists = pattern.pattern(n, cfg.declare_infinite)?;
            Ok(Surface::Flute(validate_flute(
                &FluteDescriptor {
                    lengths,
                    twists,
                    truncation: n,
                },
                prec,
            )?))
        }
        (Some(path), None) => {
            let mut s = read_surface(Path::new(path), prec)?;
            if let Some(n) = cfg.truncation() {
                s = match s {
                    Surface::Flute(f) => Surface::Flute(retruncate_flute(&f, n)?),
                    Surface::BasicEnd(b) => Surface::BasicEnd(retruncate_end(&b, n)?),
                    Surface::Tree(mut t) => {
                        retruncate_tree(&mut t, n)?;
                        Surface::Tree(t)
                    }
                };
            }
            match s {
                Surface::Flute(f) => Ok(Surface::Flute(repattern(&f, cfg)?)),
                Surface::BasicEnd(mut b) => {
                    b.flute = repattern(&b.flute, cfg)?;
                    Ok(Surface::BasicEnd(b))
                }
                Surface::Tree(t) => {
                    if cfg.pattern.is_some() || cfg.declare_infinite.is_some() {
                        return Err(input_error(
                            "--pattern and --declare-infinite do not apply to end trees",
                        ));
                    }
                    Ok(Surface::Tree(t))
                }
            }
        }
    }
}

// ---------- reports ----------

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceSummary {
    pub kind: &'static str,
    pub source: String,
    pub truncation: usize,
    pub half_twists: usize,
    pub declared_infinite: bool,
    pub first_length: String,
    pub last_length: String,
}

impl SurfaceSummary {
    fn of(kind: &'static str, f: &CheckedFlute) -> Self {
        SurfaceSummary {
            kind,
            source: f.source().to_string(),
            truncation: f.truncation(),
            half_twists: f.twists().len(),
            declared_infinite: f.twists().declared_infinite(),
            first_length: fmt_real(&f.lengths()[0], 12),
            last_length: fmt_real(f.lengths().last().expect("N >= 2"), 12),
        }
    }
}

/// `log Σ_{i<=n} l(h_i)` at a checkpoint.
#[derive(Debug, Clone, Serialize)]
pub struct HorocyclicCheckpoint {
    pub n: usize,
    pub ln_partial_sum: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeReport {
    pub config: RunConfig,
    pub surface: SurfaceSummary,
    pub beta_bound_checked: bool,
    pub verdict: Verdict,
    pub horocyclic: Vec<HorocyclicCheckpoint>,
}

fn horocyclic_checkpoints(s: &ShearSequence) -> Result<Vec<HorocyclicCheckpoint>> {
    let sums = horocyclic_lengths(s)?.ln_partial_sums();
    let last = sums.len();
    Ok(CHECKPOINTS
        .iter()
        .copied()
        .filter(|&n| n < last)
        .chain(std::iter::once(last))
        .map(|n| HorocyclicCheckpoint {
            n,
            ln_partial_sum: fmt_real(&sums[n - 1], 12),
        })
        .collect())
}

fn verdict_text(out: &mut String, v: &Verdict, indent: &str) {
    let _ = writeln!(out, "{indent}verdict: {}", v.kind);
    let (strength, row) = match v.basis {
        crate::criterion::Basis::IffRow(r) => ("iff", r),
        crate::criterion::Basis::SufficientRow(r) => ("sufficient", r),
    };
    let _ = writeln!(
        out,
        "{indent}basis: row {} ({row}), {strength}",
        row.number()
    );
    let _ = writeln!(out, "{indent}method: {:?}", v.method);
    let _ = writeln!(out, "{indent}series: {}", v.series);
    if let Some(d) = &v.divergence {
        let _ = writeln!(
            out,
            "{indent}series outcome: {:?} by {:?} over {} terms (tail from {})",
            d.outcome, d.rule, d.terms, d.tail_start
        );
        for p in &d.partial_sums {
            let _ = writeln!(out, "{indent}  log partial sum at {}: {:.6}", p.n, p.ln_sum);
        }
        if let Some(f) = &d.power_fit {
            let _ = writeln!(
                out,
                "{indent}  power fit: slope {:.6}, residual {:.3e}",
                f.slope, f.residual
            );
        }
        if let Some(f) = &d.geometric_fit {
            let _ = writeln!(
                out,
                "{indent}  geometric fit: slope {:.6e}, residual {:.3e}",
                f.slope, f.residual
            );
        }
        if let Some(r) = d.condensation_ratio {
            let _ = writeln!(out, "{indent}  condensation ratio: {r:.6}");
        }
    }
    if let Some(c) = &v.concavity {
        let _ = writeln!(
            out,
            "{indent}concave: {} (first violation {:?})",
            c.concave, c.first_violation
        );
    }
    if !v.sigma.is_empty() {
        let _ = writeln!(out, "{indent}sigma:");
        for s in &v.sigma {
            let _ = writeln!(out, "{indent}  k={} n_k={} sigma={}", s.k, s.n_k, s.sigma);
        }
    }
    for a in &v.assumptions {
        let _ = writeln!(out, "{indent}assumption: {a}");
    }
    for n in &v.notes {
        let _ = writeln!(out, "{indent}note: {n}");
    }
}

fn config_text(out: &mut String, c: &RunConfig) {
    let json = serde_json::to_string(c).expect("config serializes");
    let _ = writeln!(out, "config: {json}");
}

fn render<T: Serialize>(cfg: &RunConfig, value: &T, text: impl FnOnce(&mut String)) -> String {
    match cfg.format {
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(value).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            text(&mut s);
            config_text(&mut s, cfg);
            s
        }
    }
}

fn write_file(path: &str, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.to_string(),
        source: e,
    })
}

/// Report text plus an error to surface after the report is written.
type Outcome = (String, Option<Error>);

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Outcome> {
    let (summary, verdict, flute, checked) = match load_surface(cfg, "none")? {
        Surface::Flute(f) => (
            SurfaceSummary::of("flute", &f),
            classify_flute(&f, &cfg.policy)?,
            f,
            false,
        ),
        Surface::BasicEnd(b) => (
            SurfaceSummary::of("basic-end", &b.flute),
            classify_end(&b, &cfg.policy)?,
            b.flute,
            true,
        ),
        Surface::Tree(_) => {
            return Err(input_error(
                "analyze takes a flute or a basic end; use `endtree` for trees",
            ))
        }
    };
    let horocyclic = horocyclic_checkpoints(&shear_sequence(&flute)?)?;
    let report = TypeReport {
        config: cfg.clone(),
        surface: summary,
        beta_bound_checked: checked,
        verdict,
        horocyclic,
    };
    let body = render(cfg, &report, |s| {
        let r = &report;
        let _ = writeln!(
            s,
            "surface: {} `{}`, N = {}, {} half-twists (declared infinite: {})",
            r.surface.kind,
            r.surface.source,
            r.surface.truncation,
            r.surface.half_twists,
            r.surface.declared_infinite
        );
        let _ = writeln!(
            s,
            "lengths: l_1 = {}, l_N = {}",
            r.surface.first_length, r.surface.last_length
        );
        if r.beta_bound_checked {
            let _ = writeln!(s, "border bound: checked");
        }
        verdict_text(s, &r.verdict, "");
        for h in &r.horocyclic {
            let _ = writeln!(
                s,
                "log sum of horocyclic lengths to {}: {}",
                h.n, h.ln_partial_sum
            );
        }
    });
    Ok((body, None))
}

#[derive(Debug, Clone, Serialize)]
pub struct GapPoint {
    pub n: usize,
    pub gap: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DevelopReport {
    pub config: RunConfig,
    pub shears: usize,
    pub geodesics: usize,
    pub gaps: Vec<GapPoint>,
    pub gap_nonincreasing: bool,
    pub max_roundtrip_error: String,
    pub max_global_roundtrip_error: String,
    pub stopped: Option<String>,
}

fn shears_from_expr(expr: &str, cfg: &RunConfig) -> Result<ShearSequence> {
    let prec = cfg.precision_bits;
    let values = if expr == "zeros" {
        let n = cfg.truncation().unwrap_or(DEFAULT_TRUNCATION);
        vec![Float::new(prec); 2 * n - 2]
    } else if let Some(rest) = expr.strip_prefix("values:") {
        rest.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| parse_real(x.trim(), prec))
            .collect::<Result<_>>()?
    } else if let Some(path) = expr.strip_prefix("list:") {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.into(),
            source: e,
        })?;
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|x| !x.is_empty())
            .map(|x| parse_real(x, prec))
            .collect::<Result<_>>()?
    } else {
        return Err(input_error(format!(
            "unknown shear source `{expr}` (zeros, values:..., list:<file>)"
        )));
    };
    if values.len() < 2 {
        return Err(input_error("development needs at least two shears"));
    }
    ShearSequence::from_shears(values)
}

pub fn cmd_develop(cfg: &RunConfig) -> Result<Outcome> {
    let s = match &cfg.shears {
        Some(expr) => {
            if cfg.input.is_some() || cfg.generator.is_some() {
                return Err(input_error("--shears replaces --input and --generator"));
            }
            shears_from_expr(expr, cfg)?
        }
        None => match load_surface(cfg, "none")? {
            Surface::Flute(f) => shear_sequence(&f)?,
            Surface::BasicEnd(b) => shear_sequence(&b.flute)?,
            Surface::Tree(_) => {
                return Err(input_error("develop takes a single flute or basic end"))
            }
        },
    };
    let (chain, err) = develop_chain_until(&s, &DevelopOptions::default());
    let gaps = chain.gaps();
    if let Some(p) = &cfg.trace_out {
        write_file(p, &gaps.to_csv())?;
    }
    if let Some(p) = &cfg.svg_out {
        let svg = render_disk(
            (!chain.is_empty()).then_some(&chain),
            &RenderOptions::default(),
        );
        write_file(p, &svg)?;
    }
    let mut marks: Vec<usize> = std::iter::successors(Some(1usize), |x| x.checked_mul(10))
        .take_while(|&x| x < gaps.len())
        .collect();
    if !gaps.is_empty() {
        marks.push(gaps.len());
    }
    let report = DevelopReport {
        config: cfg.clone(),
        shears: s.len(),
        geodesics: chain.len(),
        gaps: marks
            .into_iter()
            .map(|n| GapPoint {
                n,
                gap: fmt_real(gaps.get(n), 12),
            })
            .collect(),
        gap_nonincreasing: gaps.first_increase().is_none(),
        max_roundtrip_error: fmt_real(chain.max_local_roundtrip(), 6),
        max_global_roundtrip_error: fmt_real(chain.max_global_roundtrip(), 6),
        stopped: err.as_ref().map(|e| e.to_string()),
    };
    let body = render(cfg, &report, |t| {
        let r = &report;
        let _ = writeln!(
            t,
            "developed {} geodesics from {} shears",
            r.geodesics, r.shears
        );
        for g in &r.gaps {
            let _ = writeln!(t, "gap_{} = {}", g.n, g.gap);
        }
        let _ = writeln!(t, "gaps nonincreasing: {}", r.gap_nonincreasing);
        let _ = writeln!(t, "max round-trip shear error: {}", r.max_roundtrip_error);
        let _ = writeln!(
            t,
            "max round-trip error in global coordinates: {}",
            r.max_global_roundtrip_error
        );
        if let Some(e) = &r.stopped {
            let _ = writeln!(t, "stopped: {e}");
        }
    });
    Ok((body, err))
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthesisReport {
    pub config: RunConfig,
    pub plan: SynthesisPlan,
    pub lengths: Vec<String>,
    pub verification: Verdict,
}

pub fn cmd_synthesize(cfg: &RunConfig) -> Result<Outcome> {
    let mode = match cfg.mode {
        Some(ModeArg::Lower) => Mode::Lower,
        _ => Mode::Raise,
    };
    let flute = match load_surface(cfg, "all")? {
        Surface::Flute(f) => f,
        Surface::BasicEnd(b) => b.flute,
        Surface::Tree(_) => return Err(input_error("synthesize takes a single flute")),
    };
    let (out, plan) = synthesize(flute.lengths(), flute.twists(), mode)?;
    let n = out.len();
    if let Some(p) = &cfg.lengths_out {
        let mut body = String::new();
        for x in &out {
            let _ = writeln!(body, "{}", x.to_string_radix(10, None));
        }
        write_file(p, &body)?;
    }
    let d = FluteDescriptor {
        lengths: LengthGenerator::Explicit(out.clone()),
        twists: flute.twists().clone(),
        truncation: n,
    };
    let verification = classify_flute(&validate_flute(&d, cfg.precision_bits)?, &cfg.policy)?;
    let report = SynthesisReport {
        config: cfg.clone(),
        plan,
        lengths: out.iter().map(|x| fmt_real(x, 20)).collect(),
        verification,
    };
    let body = render(cfg, &report, |t| {
        let r = &report;
        let _ = writeln!(t, "mode: {}", r.plan.mode);
        let _ = writeln!(t, "pairs flattened: {}", r.plan.pairs.len());
        if let Some(i) = r.plan.trailing_unpaired {
            let _ = writeln!(t, "trailing unpaired half-index {i} left unchanged");
        }
        let _ = writeln!(t, "entries changed: {}", r.plan.changes.len());
        for c in r.plan.changes.iter().take(20) {
            let _ = writeln!(t, "  l_{}: {} -> {}", c.index, c.before, c.after);
        }
        let shown: Vec<&str> = r.lengths.iter().take(20).map(String::as_str).collect();
        let more = if r.lengths.len() > 20 { ", ..." } else { "" };
        let _ = writeln!(t, "lengths: {}{more}", shown.join(", "));
        let _ = writeln!(t, "verification:");
        verdict_text(t, &r.verification, "  ");
    });
    Ok((body, None))
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeReport {
    pub config: RunConfig,
    pub aggregate: VerdictKind,
    pub report: EndReport,
}

fn tree_text(out: &mut String, r: &EndReport, depth: usize) {
    let pad = "  ".repeat(depth);
    let at = r
        .attach_at
        .map(|a| format!(" at border {a}"))
        .unwrap_or_default();
    let _ = writeln!(
        out,
        "{pad}{} [{}]{at}: {} (subtree {})",
        r.id,
        match r.kind {
            crate::ends::NodeKind::Flute => "flute",
            crate::ends::NodeKind::BasicEnd => "basic-end",
        },
        r.verdict.kind,
        r.aggregate
    );
    for f in &r.finite_area {
        let _ = writeln!(
            out,
            "{pad}  finite-area `{}` at border {}",
            f.label, f.attach_at
        );
    }
    for c in &r.children {
        tree_text(out, c, depth + 1);
    }
}

pub fn cmd_endtree(cfg: &RunConfig) -> Result<Outcome> {
    let tree = match load_surface(cfg, "none")? {
        Surface::Tree(t) => t,
        Surface::Flute(f) => EndTree::leaf("root", NodeBody::Flute(f)),
        Surface::BasicEnd(b) => EndTree::leaf("root", NodeBody::BasicEnd(b)),
    };
    let report = classify_surface(&tree, &cfg.policy)?;
    let tr = TreeReport {
        config: cfg.clone(),
        aggregate: report.aggregate,
        report,
    };
    let body = render(cfg, &tr, |t| {
        let _ = writeln!(t, "aggregate: {}", tr.aggregate);
        tree_text(t, &tr.report, 0);
    });
    Ok((body, None))
}

fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_str() {
        "analyze" => cmd_analyze(cfg),
        "develop" => cmd_develop(cfg),
        "synthesize" => cmd_synthesize(cfg),
        _ => cmd_endtree(cfg),
    }
}

fn advice(e: &Error) -> &'static str {
    match exit_code(e) {
        3 => "\nhint: rerun with a larger --precision-bits or a smaller --truncate",
        4 => "\nhint: the input falls outside the hypotheses the criteria are proved under",
        _ => "",
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = RunConfig::from_cli(&cli).and_then(|cfg| {
        let (body, deferred) = dispatch(&cfg)?;
        match &cfg.out {
            Some(p) => write_file(p, &body)?,
            None => {
                let _ = stdout.write_all(body.as_bytes());
            }
        }
        match deferred {
            Some(e) => Err(e),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}{}", advice(&e));
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("flutetype").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn flag_ranges_are_enforced() {
        assert_eq!(
            run_str(&["analyze", "--generator", "plog:2", "--precision-bits", "32"]).0,
            2
        );
        assert_eq!(
            run_str(&["analyze", "--generator", "plog:2", "--truncate", "1"]).0,
            2
        );
        assert_eq!(
            run_str(&["analyze", "--generator", "plog:2", "--policy-margin", "0.9"]).0,
            2
        );
        assert_eq!(run_str(&["analyze"]).0, 2);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Refused("x".into())), 4);
        assert_eq!(
            exit_code(&Error::PrecisionExhausted {
                step: 3,
                detail: String::new()
            }),
            3
        );
        assert_eq!(exit_code(&Error::Domain("x".into())), 2);
    }

    #[test]
    fn undeclared_pattern_is_refused() {
        let (code, _, err) = run_str(&[
            "analyze",
            "--generator",
            "plog:2",
            "--pattern",
            "list:2,4",
            "--truncate",
            "600",
        ]);
        assert_eq!(code, 4, "{err}");
    }
}
