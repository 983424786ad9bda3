//! `asinh(1/sinh x)` through the cancellation-free `log coth(x/2)` against the
//! direct formula, across many orders of magnitude.

use flutetype::real::{log_coth, ulp};
use flutetype::shear::lambert_reference;
use rug::Float;

fn main() {
    let prec = 256;
    for e in -12..=3 {
        let x = Float::with_val(prec, 10f64.powi(e));
        let fast = log_coth(&Float::with_val(prec, &x / 2u32));
        let direct = lambert_reference(&x);
        let err = Float::with_val(prec, &fast - &direct).abs() / ulp(&direct, prec);
        println!(
            "x = 1e{e:<3} log coth(x/2) = {:.30}  difference {:.2} ulp",
            fast,
            err.to_f64()
        );
    }
}
