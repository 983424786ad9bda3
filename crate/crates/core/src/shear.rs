//! Orthogeodesic lengths `η_n` and the shear coordinates of the zig-zag chain
//! `g_1, g_2, ...` on the front of a flute.
//!
//! Geodesic `g_{2n-1}` lifts cuff `α_n`; `g_{2n}` is the diagonal joining the
//! two lifts `g_{2n-1}` and `g_{2n+1}`. The shears are
//!
//! - `s_1 = 0` (normalization),
//! - `s_{2n} = 2 log sinh(η_n / 2)`,
//! - `s_{2n-1} = log coth(η_{n-1}/2) + log coth(η_n/2) + a_n` for `n >= 2`,
//!
//! with `η_n = log coth(l_n/4) + log coth(l_{n+1}/4)` and `a_n` the twist offset.
//! `asinh(1/sinh x)` is always evaluated as `log coth(x/2)`.
//!
//! Lengths beyond [`LOG_DOMAIN_THRESHOLD`] make `η_n` fall below the MPFR
//! exponent range; for those the sequence is carried as `log η_n`.

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{
    ln2, ln_log_coth, ln_sinh_from_ln, log_add_exp, log_coth, log_coth_from_ln, GUARD_BITS,
};
use crate::surface::CheckedFlute;

/// Cuff lengths above this switch `η` to the log domain.
pub const LOG_DOMAIN_THRESHOLD: f64 = 1e8;

fn positive(x: &Float, what: &str) -> Result<()> {
    if x.is_nan() || *x <= 0 {
        return Err(Error::domain(format!("{what} must be positive")));
    }
    Ok(())
}

/// `asinh(1/sinh x)` by the direct route, evaluated with guard bits and
/// rounded once. Reference for [`log_coth`].
pub fn lambert_reference(x: &Float) -> Float {
    let prec = x.prec();
    let w = Float::with_val(prec + GUARD_BITS, x);
    Float::with_val(prec, w.sinh().recip().asinh())
}

/// Length of the common perpendicular between lifts of consecutive cuffs of
/// lengths `la`, `lb`.
pub fn eta_length(la: &Float, lb: &Float) -> Result<Float> {
    positive(la, "cuff length")?;
    positive(lb, "cuff length")?;
    let prec = la.prec().max(lb.prec());
    let w = prec + GUARD_BITS;
    let a = log_coth(&(Float::with_val(w, la) / 4u32));
    let b = log_coth(&(Float::with_val(w, lb) / 4u32));
    Ok(Float::with_val(prec, a + b))
}

pub fn even_shear(eta: &Float) -> Result<Float> {
    positive(eta, "eta")?;
    let prec = eta.prec();
    let h = Float::with_val(prec + GUARD_BITS, eta) / 2u32;
    Ok(Float::with_val(prec, h.sinh().ln() * 2u32))
}

pub fn odd_shear(eta_prev: &Float, eta_next: &Float, offset: &Float) -> Result<Float> {
    positive(eta_prev, "eta")?;
    positive(eta_next, "eta")?;
    let prec = eta_prev.prec().max(eta_next.prec());
    let w = prec + GUARD_BITS;
    let a = log_coth(&(Float::with_val(w, eta_prev) / 2u32));
    let b = log_coth(&(Float::with_val(w, eta_next) / 2u32));
    Ok(Float::with_val(prec, a + b + offset))
}

/// `η_n` for `n = 1..N-1`, stored as logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaSequence {
    ln_values: Vec<Float>,
}

impl EtaSequence {
    pub fn len(&self) -> usize {
        self.ln_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_values.is_empty()
    }

    /// `log η_n`, 1-based.
    pub fn ln_value(&self, n: usize) -> &Float {
        &self.ln_values[n - 1]
    }

    /// `η_n`, 1-based. Underflows to zero only past the exponent range.
    pub fn value(&self, n: usize) -> Float {
        Float::with_val(
            self.ln_values[n - 1].prec(),
            self.ln_values[n - 1].exp_ref(),
        )
    }

    pub fn ln_values(&self) -> &[Float] {
        &self.ln_values
    }
}

/// Which formula produced a shear entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShearSource {
    /// `s_1 = 0`.
    Normalization,
    /// `s_{2n}` from `η_n`.
    Even,
    /// `s_{2n-1}` with zero twist at `n`.
    OddZeroTwist,
    /// `s_{2n-1}` with `n = n_k`, `k` odd: offset `+l_n/2`.
    OddHalfTwistOddK,
    /// `s_{2n-1}` with `n = n_k`, `k` even: offset `-l_n/2`.
    OddHalfTwistEvenK,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShearSequence {
    shears: Vec<Float>,
    offsets: Vec<Float>,
    provenance: Vec<ShearSource>,
    eta: EtaSequence,
}

impl ShearSequence {
    /// Builds a sequence from raw shears, for synthetic inputs to the
    /// development. `s_1` is forced to zero; offsets and `η` are left empty.
    pub fn from_shears(mut shears: Vec<Float>) -> Result<Self> {
        if shears.is_empty() {
            return Err(Error::TooFewTerms { needed: 1, got: 0 });
        }
        let prec = shears[0].prec();
        shears[0] = Float::new(prec);
        let provenance = (1..=shears.len())
            .map(|i| match i {
                1 => ShearSource::Normalization,
                i if i % 2 == 0 => ShearSource::Even,
                _ => ShearSource::OddZeroTwist,
            })
            .collect();
        Ok(ShearSequence {
            shears,
            offsets: Vec::new(),
            provenance,
            eta: EtaSequence {
                ln_values: Vec::new(),
            },
        })
    }

    /// `s_1 ..= s_{2N-2}`.
    pub fn shears(&self) -> &[Float] {
        &self.shears
    }

    /// `s_i`, 1-based.
    pub fn shear(&self, i: usize) -> &Float {
        &self.shears[i - 1]
    }

    pub fn len(&self) -> usize {
        self.shears.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shears.is_empty()
    }

    /// `a_1 ..= a_N`.
    pub fn offsets(&self) -> &[Float] {
        &self.offsets
    }

    pub fn provenance(&self) -> &[ShearSource] {
        &self.provenance
    }

    pub fn eta(&self) -> &EtaSequence {
        &self.eta
    }

    pub fn precision(&self) -> u32 {
        self.shears[0].prec()
    }
}

/// Shears `s_1 ..= s_{2N-2}` of a validated flute with `N` cuffs. The last
/// odd shear `s_{2N-1}` would need `η_N` and hence `l_{N+1}`.
pub fn shear_sequence(flute: &CheckedFlute) -> Result<ShearSequence> {
    let l = flute.lengths();
    let n_cuffs = l.len();
    if n_cuffs < 2 {
        return Err(Error::TooFewTerms {
            needed: 2,
            got: n_cuffs,
        });
    }
    let prec = flute.precision();
    let w = prec + GUARD_BITS;

    let offsets: Vec<Float> = (1..=n_cuffs)
        .map(|n| {
            let half = Float::with_val(prec, &l[n - 1]) / 2u32;
            match flute.offset_sign(n) {
                1 => half,
                -1 => -half,
                _ => Float::new(prec),
            }
        })
        .collect();

    let huge = l[n_cuffs - 1].to_f64() > LOG_DOMAIN_THRESHOLD;
    let (ln_eta, lcoth_half_eta, even) = if huge {
        log_route(l, w)
    } else {
        direct_route(l, w)
    };

    let mut shears = Vec::with_capacity(2 * n_cuffs - 2);
    let mut provenance = Vec::with_capacity(2 * n_cuffs - 2);
    shears.push(Float::new(prec));
    provenance.push(ShearSource::Normalization);
    for n in 1..n_cuffs {
        if n >= 2 {
            let s = Float::with_val(w, &lcoth_half_eta[n - 2] + &lcoth_half_eta[n - 1])
                + &offsets[n - 1];
            shears.push(Float::with_val(prec, s));
            provenance.push(match flute.offset_sign(n) {
                1 => ShearSource::OddHalfTwistOddK,
                -1 => ShearSource::OddHalfTwistEvenK,
                _ => ShearSource::OddZeroTwist,
            });
        }
        shears.push(Float::with_val(prec, &even[n - 1]));
        provenance.push(ShearSource::Even);
    }
    let eta = EtaSequence {
        ln_values: ln_eta
            .into_iter()
            .map(|x| Float::with_val(prec, x))
            .collect(),
    };
    Ok(ShearSequence {
        shears,
        offsets,
        provenance,
        eta,
    })
}

type Route = (Vec<Float>, Vec<Float>, Vec<Float>);

/// `η` held directly; each `log coth(l_n/4)` is computed once and shared by
/// `η_{n-1}` and `η_n`.
fn direct_route(l: &[Float], w: u32) -> Route {
    let q: Vec<Float> = l
        .iter()
        .map(|x| log_coth(&(Float::with_val(w, x) / 4u32)))
        .collect();
    let mut ln_eta = Vec::with_capacity(l.len() - 1);
    let mut lc = Vec::with_capacity(l.len() - 1);
    let mut even = Vec::with_capacity(l.len() - 1);
    for n in 0..l.len() - 1 {
        let eta = Float::with_val(w, &q[n] + &q[n + 1]);
        let half = Float::with_val(w, &eta / 2u32);
        even.push(Float::with_val(w, half.sinh_ref()).ln() * 2u32);
        lc.push(log_coth(&half));
        ln_eta.push(eta.ln());
    }
    (ln_eta, lc, even)
}

/// `log η` throughout; finite for any finite lengths.
fn log_route(l: &[Float], w: u32) -> Route {
    let q: Vec<Float> = l
        .iter()
        .map(|x| ln_log_coth(&(Float::with_val(w, x) / 4u32)))
        .collect();
    let l2 = ln2(w);
    let mut ln_eta = Vec::with_capacity(l.len() - 1);
    let mut lc = Vec::with_capacity(l.len() - 1);
    let mut even = Vec::with_capacity(l.len() - 1);
    for n in 0..l.len() - 1 {
        let le = log_add_exp(&q[n], &q[n + 1]);
        let ln_half = Float::with_val(w, &le - &l2);
        even.push(ln_sinh_from_ln(&ln_half) * 2u32);
        lc.push(log_coth_from_ln(&ln_half));
        ln_eta.push(le);
    }
    (ln_eta, lc, even)
}

/// Reference shears computed term by term from the public formulas, without
/// sharing intermediate values. Only usable where `η` is representable.
pub fn shear_sequence_reference(flute: &CheckedFlute) -> Result<Vec<Float>> {
    let l = flute.lengths();
    let prec = flute.precision();
    let eta: Vec<Float> = (0..l.len() - 1)
        .map(|i| eta_length(&l[i], &l[i + 1]))
        .collect::<Result<_>>()?;
    let mut out = vec![Float::new(prec)];
    for n in 1..l.len() {
        if n >= 2 {
            let half = Float::with_val(prec, &l[n - 1]) / 2u32;
            let off = match flute.offset_sign(n) {
                1 => half,
                -1 => -half,
                _ => Float::new(prec),
            };
            out.push(odd_shear(&eta[n - 2], &eta[n - 1], &off)?);
        }
        out.push(even_shear(&eta[n - 1])?);
    }
    Ok(out)
}
