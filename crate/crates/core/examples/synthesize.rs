//! Builds parabolic half-twist flutes from an arbitrary nondecreasing base by
//! flattening each window between paired half-twists.

use flutetype::criterion::{alternating_sums, classify_flute, DivergencePolicy};
use flutetype::surface::{validate_flute, FluteDescriptor, LengthGenerator, TwistPattern};
use flutetype::synth::{synthesize, Mode};
use rug::Float;

fn main() -> flutetype::Result<()> {
    let n = 200;
    // grows far too fast for any half-twist flute to be parabolic on its own
    let base: Vec<Float> = (1..=n).map(|i| Float::with_val(256, i).exp()).collect();
    let pattern = TwistPattern::new(vec![1, 2, 5, 9, 20, 60, 100, 180], true)?;
    for mode in [Mode::Raise, Mode::Lower] {
        let (lengths, plan) = synthesize(&base, &pattern, mode)?;
        let sigma = alternating_sums(&lengths, &pattern)?;
        let d = FluteDescriptor {
            lengths: LengthGenerator::Explicit(lengths),
            twists: pattern.clone(),
            truncation: n,
        };
        let v = classify_flute(&validate_flute(&d, 256)?, &DivergencePolicy::default())?;
        println!(
            "{mode}: {} windows, {} entries changed, pairing certificate {}, verdict {} via {:?}",
            plan.pairs.len(),
            plan.changes.len(),
            sigma.pairing_certificate(),
            v.kind,
            v.method
        );
    }
    Ok(())
}
