//! Develops the chain of a half-twist flute into the disk, prints the gap
//! trace and writes an SVG picture to the path given as first argument.

use flutetype::polygon::{develop_chain, render_disk, RenderOptions};
use flutetype::shear::shear_sequence;
use flutetype::surface::{validate_flute, FluteDescriptor, LengthGenerator, PatternGenerator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 400;
    let d = FluteDescriptor {
        lengths: LengthGenerator::Paired(Box::new(LengthGenerator::PLogN { p: 8.0 })),
        twists: PatternGenerator::All.pattern(n, None)?,
        truncation: n,
    };
    let chain = develop_chain(&shear_sequence(&validate_flute(&d, 256)?)?)?;
    let gaps = chain.gaps();
    for k in [1, 10, 100, gaps.len()] {
        println!("gap_{k} = {:.10e}", gaps.get(k).to_f64());
    }
    println!("nonincreasing: {}", gaps.first_increase().is_none());
    println!(
        "max round-trip shear error: {:.3e}",
        chain.max_local_roundtrip().to_f64()
    );
    let svg = render_disk(
        Some(&chain),
        &RenderOptions {
            max_geodesics: Some(200),
            ..RenderOptions::default()
        },
    );
    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, svg)?;
            println!("wrote {path}");
        }
        None => println!("svg: {} bytes (pass a path to save it)", svg.len()),
    }
    Ok(())
}
