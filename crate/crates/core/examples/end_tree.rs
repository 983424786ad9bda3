//! Classifies every end of a surface built from flutes hanging off a basic
//! end, then shows that one non-parabolic end decides the whole surface.

use flutetype::criterion::DivergencePolicy;
use flutetype::ends::classify_surface;
use flutetype::surface::{
    validate_flute, EndTree, FluteDescriptor, LengthGenerator, NodeBody, PatternGenerator,
};

fn leaf(
    id: &str,
    lengths: LengthGenerator,
    pattern: PatternGenerator,
    n: usize,
) -> flutetype::Result<EndTree> {
    let d = FluteDescriptor {
        lengths,
        twists: pattern.pattern(n, None)?,
        truncation: n,
    };
    Ok(EndTree::leaf(id, NodeBody::Flute(validate_flute(&d, 128)?)))
}

fn print(r: &flutetype::ends::EndReport, depth: usize) {
    println!(
        "{}{} -> {} (subtree {})",
        "  ".repeat(depth),
        r.id,
        r.verdict.kind,
        r.aggregate
    );
    for c in &r.children {
        print(c, depth + 1);
    }
}

fn main() -> flutetype::Result<()> {
    let policy = DivergencePolicy::default();
    let paired = || LengthGenerator::Paired(Box::new(LengthGenerator::PLogN { p: 6.0 }));
    let mut root = leaf("root", paired(), PatternGenerator::All, 1000)?;
    root.children = vec![
        leaf(
            "root.1",
            LengthGenerator::PLogN { p: 2.0 },
            PatternGenerator::None,
            3000,
        )?,
        leaf("root.2", paired(), PatternGenerator::All, 1000)?,
    ];
    print(&classify_surface(&root, &policy)?, 0);

    root.children.push(leaf(
        "root.3",
        LengthGenerator::PLogN { p: 3.0 },
        PatternGenerator::None,
        3000,
    )?);
    print(&classify_surface(&root, &policy)?, 0);
    Ok(())
}
