//! Reads a surface document (TOML or JSON) and reports what it describes.
//! Defaults to the bundled three-end sample.

use std::path::PathBuf;

use flutetype::surface::{read_surface, Surface};

fn main() -> flutetype::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/three_ends.toml"));
    match read_surface(&path, 256)? {
        Surface::Flute(f) => println!("flute `{}` with {} cuffs", f.source(), f.truncation()),
        Surface::BasicEnd(b) => println!(
            "basic end with {} cuffs, border bound {}",
            b.flute.truncation(),
            b.beta_bound
        ),
        Surface::Tree(t) => println!(
            "end tree rooted at `{}`: {} nodes, depth {}",
            t.id,
            t.node_count(),
            t.depth()
        ),
    }
    Ok(())
}
