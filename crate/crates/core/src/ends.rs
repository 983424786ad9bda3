//! Per-end classification and aggregation over a finite tree of ends.
//!
//! A surface with countably many ends is parabolic exactly when every end
//! is, so the tree verdict is a conjunction: Parabolic when all nodes are,
//! NotParabolic as soon as one node is, Inconclusive otherwise.

use serde::Serialize;

use crate::criterion::{classify_flute, DivergencePolicy, Verdict, VerdictKind};
use crate::error::{Error, Result};
use crate::real::fmt_real;
use crate::surface::{CheckedBasicEnd, EndTree, FiniteAttachment, NodeBody};

/// Classifies a basic end by its α-cuffs once the β-bound holds.
///
/// With every `β_n = 0` the result is exactly `classify_flute` on the cuffs.
pub fn classify_end(node: &CheckedBasicEnd, policy: &DivergencePolicy) -> Result<Verdict> {
    if let Some(i) = node.beta_violation() {
        return Err(Error::Refused(format!(
            "border length beta_{i} = {} exceeds the bound {}; no criterion is known for unbounded borders",
            fmt_real(&node.beta_lengths[i - 1], 12),
            fmt_real(&node.beta_bound, 12)
        )));
    }
    let mut v = classify_flute(&node.flute, policy)?;
    if node.beta_lengths.iter().any(|b| !b.is_zero()) {
        v.assumptions.push(format!(
            "border lengths bounded by {}, so the cuff criterion applies unchanged",
            fmt_real(&node.beta_bound, 12)
        ));
    }
    Ok(v)
}

/// Conjunction of node verdicts.
pub fn aggregate<I: IntoIterator<Item = VerdictKind>>(kinds: I) -> VerdictKind {
    let mut all_parabolic = true;
    for k in kinds {
        match k {
            VerdictKind::NotParabolic => return VerdictKind::NotParabolic,
            VerdictKind::Inconclusive => all_parabolic = false,
            VerdictKind::Parabolic => {}
        }
    }
    if all_parabolic {
        VerdictKind::Parabolic
    } else {
        VerdictKind::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Flute,
    BasicEnd,
}

/// Report mirroring the input tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndReport {
    pub id: String,
    pub attach_at: Option<usize>,
    pub kind: NodeKind,
    pub verdict: Verdict,
    pub beta_bound_checked: bool,
    /// Verdict of the subtree rooted here.
    pub aggregate: VerdictKind,
    pub finite_area: Vec<FiniteAttachment>,
    pub children: Vec<EndReport>,
}

impl EndReport {
    /// Node verdicts in pre-order.
    pub fn node_verdicts(&self) -> Vec<(&str, VerdictKind)> {
        let mut out = vec![(self.id.as_str(), self.verdict.kind)];
        for c in &self.children {
            out.extend(c.node_verdicts());
        }
        out
    }
}

fn classify_node(tree: &EndTree, policy: &DivergencePolicy) -> Result<(NodeKind, Verdict, bool)> {
    let with_id = |e: Error| match e {
        Error::Refused(m) => Error::Refused(format!("node `{}`: {m}", tree.id)),
        other => other,
    };
    match &tree.body {
        NodeBody::Flute(f) => Ok((
            NodeKind::Flute,
            classify_flute(f, policy).map_err(with_id)?,
            false,
        )),
        NodeBody::BasicEnd(b) => Ok((
            NodeKind::BasicEnd,
            classify_end(b, policy).map_err(with_id)?,
            true,
        )),
    }
}

/// Classifies every node, children concurrently, and folds the verdicts.
pub fn classify_surface(tree: &EndTree, policy: &DivergencePolicy) -> Result<EndReport> {
    policy.validate()?;
    let (kind, verdict, beta_bound_checked) = classify_node(tree, policy)?;
    let children: Vec<Result<EndReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = tree
            .children
            .iter()
            .map(|c| s.spawn(move || classify_surface(c, policy)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("node classification panicked"))
            .collect()
    });
    let children = children.into_iter().collect::<Result<Vec<_>>>()?;
    let aggregate =
        aggregate(std::iter::once(verdict.kind).chain(children.iter().map(|c| c.aggregate)));
    Ok(EndReport {
        id: tree.id.clone(),
        attach_at: tree.attach_at,
        kind,
        verdict,
        beta_bound_checked,
        aggregate,
        finite_area: tree.finite_area.clone(),
        children,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{
        validate_basic_end, validate_flute, BasicEndDescriptor, BetaLengths, CheckedFlute,
        FluteDescriptor, LengthGenerator, PatternGenerator,
    };
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rug::Float;

    const P: u32 = 128;

    fn flute(g: LengthGenerator, pattern: PatternGenerator, n: usize) -> FluteDescriptor {
        FluteDescriptor {
            lengths: g,
            twists: pattern.pattern(n, None).unwrap(),
            truncation: n,
        }
    }

    fn paired(n: usize) -> FluteDescriptor {
        flute(
            LengthGenerator::Paired(Box::new(LengthGenerator::PLogN { p: 3.0 })),
            PatternGenerator::All,
            n,
        )
    }

    fn checked(d: &FluteDescriptor) -> CheckedFlute {
        validate_flute(d, P).unwrap()
    }

    fn parabolic_leaf(id: &str) -> EndTree {
        EndTree::leaf(id, NodeBody::Flute(checked(&paired(600))))
    }

    fn not_parabolic_leaf(id: &str) -> EndTree {
        let d = flute(
            LengthGenerator::PLogN { p: 3.0 },
            PatternGenerator::None,
            3000,
        );
        EndTree::leaf(id, NodeBody::Flute(checked(&d)))
    }

    fn inconclusive_leaf(id: &str) -> EndTree {
        // too short for the policy window
        let d = flute(
            LengthGenerator::PLogN { p: 3.0 },
            PatternGenerator::None,
            20,
        );
        EndTree::leaf(id, NodeBody::Flute(checked(&d)))
    }

    fn basic_end(beta: BetaLengths, bound: f64) -> Result<CheckedBasicEnd> {
        validate_basic_end(
            &BasicEndDescriptor {
                flute: paired(600),
                beta_lengths: beta,
                beta_bound: bound,
            },
            P,
        )
    }

    fn root(children: Vec<EndTree>) -> EndTree {
        let b = basic_end(BetaLengths::Explicit(vec![Float::with_val(P, 1); 599]), 2.0).unwrap();
        let mut t = EndTree::leaf("root", NodeBody::BasicEnd(b));
        t.children = children;
        t
    }

    fn policy() -> DivergencePolicy {
        DivergencePolicy::default()
    }

    #[test]
    fn basic_end_examples() {
        let b = basic_end(BetaLengths::Explicit(vec![Float::with_val(P, 1); 599]), 2.0).unwrap();
        assert_eq!(
            classify_end(&b, &policy()).unwrap().kind,
            VerdictKind::Parabolic
        );

        let b = basic_end(
            BetaLengths::Explicit((1..=599).map(|n| Float::with_val(P, n)).collect()),
            10.0,
        )
        .unwrap();
        match classify_end(&b, &policy()) {
            Err(Error::Refused(m)) => assert!(m.contains("beta_11"), "{m}"),
            other => panic!("{other:?}"),
        }

        let f = checked(&flute(
            LengthGenerator::PLogN { p: 2.0 },
            PatternGenerator::None,
            2000,
        ));
        let punctured = CheckedBasicEnd::from_flute(f.clone());
        assert_eq!(
            classify_end(&punctured, &policy()).unwrap(),
            classify_flute(&f, &policy()).unwrap()
        );
    }

    #[test]
    fn tree_examples() {
        let r = classify_surface(
            &root(vec![parabolic_leaf("root.1"), parabolic_leaf("root.2")]),
            &policy(),
        )
        .unwrap();
        assert_eq!(r.aggregate, VerdictKind::Parabolic);
        assert!(r.beta_bound_checked && !r.children[0].beta_bound_checked);

        let r = classify_surface(
            &root(vec![parabolic_leaf("root.1"), not_parabolic_leaf("root.2")]),
            &policy(),
        )
        .unwrap();
        assert_eq!(r.aggregate, VerdictKind::NotParabolic);
        assert_eq!(r.children[1].verdict.kind, VerdictKind::NotParabolic);

        let r = classify_surface(
            &root(vec![parabolic_leaf("root.1"), inconclusive_leaf("root.2")]),
            &policy(),
        )
        .unwrap();
        assert_eq!(r.aggregate, VerdictKind::Inconclusive);
    }

    #[test]
    fn refusal_names_the_node() {
        let bad = basic_end(BetaLengths::Explicit(vec![Float::with_val(P, 5); 599]), 2.0).unwrap();
        let mut child = EndTree::leaf("root.1", NodeBody::BasicEnd(bad));
        child.attach_at = Some(3);
        match classify_surface(&root(vec![child]), &policy()) {
            Err(Error::Refused(m)) => assert!(m.contains("root.1") && m.contains("beta_1 ")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn report_mirrors_shape() {
        let mut mid = root(vec![parabolic_leaf("root.1.1")]);
        mid.id = "root.1".into();
        let t = root(vec![mid, parabolic_leaf("root.2")]);
        let r = classify_surface(&t, &policy()).unwrap();
        assert_eq!(t.depth(), 3);
        let ids: Vec<&str> = r.node_verdicts().into_iter().map(|(id, _)| id).collect();
        assert_eq!(ids, ["root", "root.1", "root.1.1", "root.2"]);
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["children"][0]["children"][0]["id"], "root.1.1");
    }

    #[test]
    fn aggregate_table() {
        use VerdictKind::*;
        assert_eq!(aggregate([Parabolic, Parabolic, Parabolic]), Parabolic);
        assert_eq!(
            aggregate([Parabolic, NotParabolic, Parabolic]),
            NotParabolic
        );
        assert_eq!(aggregate([Inconclusive, NotParabolic]), NotParabolic);
        assert_eq!(aggregate([Parabolic, Inconclusive]), Inconclusive);
        assert_eq!(aggregate([]), Parabolic);
    }

    #[test]
    fn order_independent_and_parabolic_leaves_removable() {
        let leaves = [
            parabolic_leaf("a"),
            parabolic_leaf("b"),
            inconclusive_leaf("c"),
            not_parabolic_leaf("d"),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for mask in 1u32..16 {
            let chosen: Vec<EndTree> = leaves
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| l.clone())
                .collect();
            let base = classify_surface(&root(chosen.clone()), &policy())
                .unwrap()
                .aggregate;
            let mut shuffled = chosen.clone();
            shuffled.shuffle(&mut rng);
            assert_eq!(
                classify_surface(&root(shuffled), &policy())
                    .unwrap()
                    .aggregate,
                base
            );
            if mask & 1 != 0 {
                let without: Vec<EndTree> = chosen.into_iter().filter(|l| l.id != "a").collect();
                assert_eq!(
                    classify_surface(&root(without), &policy())
                        .unwrap()
                        .aggregate,
                    base
                );
            }
        }
    }

    fn kind() -> impl Strategy<Value = VerdictKind> {
        prop_oneof![
            Just(VerdictKind::Parabolic),
            Just(VerdictKind::NotParabolic),
            Just(VerdictKind::Inconclusive)
        ]
    }

    proptest! {
        #[test]
        fn aggregate_is_a_symmetric_fold(mut v in prop::collection::vec(kind(), 0..12), seed in any::<u64>()) {
            let a = aggregate(v.clone());
            v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(aggregate(v.clone()), a);
            v.push(VerdictKind::Parabolic);
            prop_assert_eq!(aggregate(v), a);
        }
    }
}
