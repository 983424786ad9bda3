//! Type of zero-twist and half-twist flutes with `l_n = p log n`.

use flutetype::criterion::{classify_flute, DivergencePolicy};
use flutetype::surface::{validate_flute, FluteDescriptor, LengthGenerator, PatternGenerator};

fn main() -> flutetype::Result<()> {
    let policy = DivergencePolicy::default();
    let n = 5000;
    let cases = [
        (
            "zero-twist 1 log n",
            LengthGenerator::PLogN { p: 1.0 },
            PatternGenerator::None,
        ),
        (
            "zero-twist 3 log n",
            LengthGenerator::PLogN { p: 3.0 },
            PatternGenerator::None,
        ),
        (
            "paired 8 log n, all half-twists",
            LengthGenerator::Paired(Box::new(LengthGenerator::PLogN { p: 8.0 })),
            PatternGenerator::All,
        ),
        (
            "power 0.5 n, every third",
            LengthGenerator::Power { c: 0.5, q: 1.0 },
            PatternGenerator::Every(3),
        ),
    ];
    for (name, lengths, pattern) in cases {
        let d = FluteDescriptor {
            lengths,
            twists: pattern.pattern(n, None)?,
            truncation: n,
        };
        let v = classify_flute(&validate_flute(&d, 256)?, &policy)?;
        println!(
            "{name:<34} {:<13} via {:?}, series {}",
            v.kind.to_string(),
            v.method,
            v.series
        );
    }
    Ok(())
}
