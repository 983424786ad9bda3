//! Working-precision reals and the log-domain kernels shared by the
//! geometry and series code.
//!
//! Every real in the crate is a [`rug::Float`] (MPFR, radix 2). Operations
//! produce results at the precision of their inputs unless a precision is
//! passed explicitly. Transcendental kernels here evaluate with
//! [`GUARD_BITS`] extra bits and round once, so their error is within one ulp
//! of the working precision.

use rug::float::{Constant, Special};
use rug::Float;

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 256;
pub const MIN_PRECISION: u32 = 64;
pub const GUARD_BITS: u32 = 24;

/// Smallest admissible cuff length; generators that vanish at `n = 1`
/// (such as `p log n`) are clamped up to this value.
pub const LENGTH_FLOOR: f64 = 1e-3;

pub fn real(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

pub fn zero(prec: u32) -> Float {
    Float::new(prec)
}

pub fn infinity(prec: u32) -> Float {
    Float::with_val(prec, Special::Infinity)
}

pub fn ln2(prec: u32) -> Float {
    Float::with_val(prec, Constant::Log2)
}

/// Parses a decimal literal (`"1.5"`, `"-2e30"`) at the given precision.
pub fn parse_real(s: &str, prec: u32) -> Result<Float> {
    let parsed = Float::parse(s.trim())
        .map_err(|e| Error::domain(format!("cannot parse real `{s}`: {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

/// Unit in the last place of `x` at precision `prec`.
pub fn ulp(x: &Float, prec: u32) -> Float {
    match x.get_exp() {
        Some(e) => {
            let one = Float::with_val(prec, 1);
            one << (e - prec as i32)
        }
        None => Float::with_val(prec, Special::Zero),
    }
}

/// `log coth(x)` for `x > 0`.
///
/// Uses `-log tanh(x)` below 1/2 and `2 atanh(e^{-2x})` above, so neither
/// branch subtracts nearly equal quantities. Equals `asinh(1/sinh(2x))`.
pub fn log_coth(x: &Float) -> Float {
    let prec = x.prec();
    let w = Float::with_val(prec + GUARD_BITS, x);
    let v = if w < 0.5 {
        -w.tanh().ln()
    } else {
        let e = (w * -2i32).exp();
        e.atanh() * 2u32
    };
    Float::with_val(prec, v)
}

/// `log(log coth(x))` for `x > 0`, finite even when `e^{-2x}` is below the
/// exponent range.
pub fn ln_log_coth(x: &Float) -> Float {
    let prec = x.prec();
    let w = Float::with_val(prec + GUARD_BITS, x);
    // Past this point atanh(u)/u - 1 < u^2 is far below one ulp.
    let cutoff = (prec + GUARD_BITS) as f64;
    if w.to_f64() > cutoff {
        let v = ln2(prec + GUARD_BITS) - w * 2u32;
        return Float::with_val(prec, v);
    }
    Float::with_val(prec, log_coth(&w).ln())
}

/// `log(e^a + e^b)`.
pub fn log_add_exp(a: &Float, b: &Float) -> Float {
    let prec = a.prec().max(b.prec());
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi.is_infinite() && hi.is_sign_negative() {
        return Float::with_val(prec, hi);
    }
    let d = Float::with_val(prec + GUARD_BITS, lo - hi);
    Float::with_val(prec, d.exp().ln_1p() + hi)
}

/// `log sinh(y)` for `y > 0` given `ln y`.
///
/// When `y` is so small that `y^2/6` is below working precision the series
/// `log y + y^2/6 - ...` collapses to `log y`; this keeps the kernel finite
/// for values of `y` that underflow the exponent range.
pub fn ln_sinh_from_ln(ln_y: &Float) -> Float {
    let prec = ln_y.prec();
    let threshold = -((prec / 2 + 4) as f64) * std::f64::consts::LN_2;
    if ln_y.to_f64() < threshold {
        return Float::with_val(prec, ln_y);
    }
    let y = Float::with_val(prec + GUARD_BITS, ln_y).exp();
    Float::with_val(prec, y.sinh().ln())
}

/// `log coth(y)` for `y > 0` given `ln y`; for tiny `y` this is
/// `-log y + y^2/3 - ...`.
pub fn log_coth_from_ln(ln_y: &Float) -> Float {
    let prec = ln_y.prec();
    let threshold = -((prec / 2 + 4) as f64) * std::f64::consts::LN_2;
    if ln_y.to_f64() < threshold {
        return Float::with_val(prec, -ln_y.clone());
    }
    let y = Float::with_val(prec, ln_y).exp();
    log_coth(&y)
}

/// Decimal rendering with `digits` significant digits, used in reports.
pub fn fmt_real(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.to_string();
    }
    x.to_string_radix(10, Some(digits))
}
