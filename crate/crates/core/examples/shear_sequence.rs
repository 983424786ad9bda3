//! Shear coordinates of the zig-zag chain on a flute with half-twists.

use flutetype::shear::shear_sequence;
use flutetype::surface::{validate_flute, FluteDescriptor, LengthGenerator, PatternGenerator};

fn main() -> flutetype::Result<()> {
    let n = 8;
    let d = FluteDescriptor {
        lengths: LengthGenerator::PLogN { p: 2.0 },
        twists: PatternGenerator::Every(2).pattern(n, Some(true))?,
        truncation: n,
    };
    let flute = validate_flute(&d, 128)?;
    let s = shear_sequence(&flute)?;
    for (i, (x, src)) in s.shears().iter().zip(s.provenance()).enumerate() {
        println!("s_{:<2} = {:>28.20}  ({src:?})", i + 1, x);
    }
    for n in 1..=s.eta().len() {
        println!("eta_{n} = {:.20}", s.eta().value(n));
    }
    Ok(())
}
