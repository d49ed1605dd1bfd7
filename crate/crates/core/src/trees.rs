//! Planar rooted binary trees, their signs in the Merkulov tree formula, and the aggregation of
//! type-(I) tree contributions into `phi`-coefficients.
//!
//! A tree on leaves `b_1, ..., b_n` contributes `-eps(T) m_T`. For the type-(I) input
//! `xi^a, theta, xi_L^b, eta, xi^c, theta, xi_L^d` every nonvanishing `m_T` pairs with `eta` to
//! `(-1)^p phi(k, l, p)`, so each tree adds `-eps(T) (-1)^p` to the bucket `(k, l, p)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eisenstein::binomial;
use crate::error::{Error, Result};
use num_traits::ToPrimitive;

/// Largest leaf count accepted by [`enumerate_trees`].
pub const MAX_TREE_LEAVES: usize = 14;

/// A planar rooted tree whose internal vertices have exactly two ordered children.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlanarTree {
    /// Leaf `b_position` (1-based) of the given degree.
    Leaf {
        position: usize,
        degree: u8,
    },
    Node(Box<PlanarTree>, Box<PlanarTree>),
}

impl PlanarTree {
    pub fn leaf(position: usize, degree: u8) -> Self {
        PlanarTree::Leaf { position, degree }
    }

    pub fn join(left: PlanarTree, right: PlanarTree) -> Self {
        PlanarTree::Node(Box::new(left), Box::new(right))
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            PlanarTree::Leaf { .. } => 1,
            PlanarTree::Node(l, r) => l.leaf_count() + r.leaf_count(),
        }
    }

    pub fn degree_sum(&self) -> usize {
        match self {
            PlanarTree::Leaf { degree, .. } => *degree as usize,
            PlanarTree::Node(l, r) => l.degree_sum() + r.degree_sum(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, PlanarTree::Leaf { .. })
    }

    /// Leaf positions from left to right.
    pub fn positions(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_positions(&mut out);
        out
    }

    fn collect_positions(&self, out: &mut Vec<usize>) {
        match self {
            PlanarTree::Leaf { position, .. } => out.push(*position),
            PlanarTree::Node(l, r) => {
                l.collect_positions(out);
                r.collect_positions(out);
            }
        }
    }

    fn contains(&self, position: usize) -> bool {
        match self {
            PlanarTree::Leaf { position: p, .. } => *p == position,
            PlanarTree::Node(l, r) => l.contains(position) || r.contains(position),
        }
    }

    /// No vertex has two degree-1 leaves as its children.
    pub fn is_admissible(&self) -> bool {
        match self {
            PlanarTree::Leaf { .. } => true,
            PlanarTree::Node(l, r) => {
                let both = matches!(
                    (l.as_ref(), r.as_ref()),
                    (
                        PlanarTree::Leaf { degree: 1, .. },
                        PlanarTree::Leaf { degree: 1, .. }
                    )
                );
                !both && l.is_admissible() && r.is_admissible()
            }
        }
    }

    /// Every internal subtree other than the whole tree has degree sum one less than its leaf
    /// count, i.e. holds exactly one degree-0 leaf when the other leaves have degree 1.
    pub fn passes_degree_rule(&self) -> bool {
        fn inner(t: &PlanarTree) -> bool {
            match t {
                PlanarTree::Leaf { .. } => true,
                PlanarTree::Node(l, r) => {
                    t.degree_sum() + 1 == t.leaf_count() && inner(l) && inner(r)
                }
            }
        }
        match self {
            PlanarTree::Leaf { .. } => true,
            PlanarTree::Node(l, r) => inner(l) && inner(r),
        }
    }
}

impl fmt::Display for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanarTree::Leaf { position, .. } => write!(f, "{position}"),
            PlanarTree::Node(l, r) => write!(f, "({l} {r})"),
        }
    }
}

/// All planar binary trees on leaves of the given degrees, in a fixed order: by the leaf count
/// of the left subtree, then recursively. Without the admissibility filter there are
/// `Catalan(n - 1)` of them.
pub fn enumerate_trees(degrees: &[u8], admissible_only: bool) -> Result<Vec<PlanarTree>> {
    let n = degrees.len();
    if n == 0 {
        return Err(Error::InvalidIndex("a tree needs at least one leaf".into()));
    }
    if n > MAX_TREE_LEAVES {
        return Err(Error::Budget(format!(
            "{n} leaves exceeds the enumeration limit of {MAX_TREE_LEAVES}"
        )));
    }
    if let Some(d) = degrees.iter().find(|&&d| d > 1) {
        return Err(Error::InvalidIndex(format!(
            "leaf degree {d} is not 0 or 1"
        )));
    }
    Ok(build(degrees, 1, admissible_only))
}

fn build(degrees: &[u8], offset: usize, admissible_only: bool) -> Vec<PlanarTree> {
    if degrees.len() == 1 {
        return vec![PlanarTree::leaf(offset, degrees[0])];
    }
    let mut out = Vec::new();
    for k in 1..degrees.len() {
        if admissible_only && k == 1 && degrees.len() == 2 && degrees[0] == 1 && degrees[1] == 1 {
            continue;
        }
        let lefts = build(&degrees[..k], offset, admissible_only);
        let rights = build(&degrees[k..], offset + k, admissible_only);
        for l in &lefts {
            for r in &rights {
                out.push(PlanarTree::join(l.clone(), r.clone()));
            }
        }
    }
    out
}

/// `prod_v (-1)^{|e1| + (|e2| - 1) deg(e1)}` over internal vertices, where `|e|` counts the
/// leaves above an edge and `deg(e)` sums their degrees.
pub fn epsilon_sign(tree: &PlanarTree) -> i8 {
    fn walk(t: &PlanarTree) -> (usize, usize, bool) {
        match t {
            PlanarTree::Leaf { degree, .. } => (1, *degree as usize, false),
            PlanarTree::Node(l, r) => {
                let (n1, d1, s1) = walk(l);
                let (n2, d2, s2) = walk(r);
                let here = (n1 + (n2 - 1) * d1) % 2 == 1;
                (n1 + n2, d1 + d2, s1 ^ s2 ^ here)
            }
        }
    }
    if walk(tree).2 {
        -1
    } else {
        1
    }
}

/// `(-1)^{C(n1+n2+2, 2) + n2}`.
pub fn sign_closed_form(n1: usize, n2: usize) -> i8 {
    let e = (n1 + n2 + 2) * (n1 + n2 + 1) / 2 + n2;
    if e.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignLemmaReport {
    pub n1: usize,
    pub n2: usize,
    pub trees_checked: usize,
    pub expected_sign: i8,
    pub counterexamples: Vec<String>,
    pub passed: bool,
}

/// Checks the closed-form sign on every `join(T1, T2)` where `T_i` has `n_i + 1` leaves, one of
/// degree 0 in any position, and no vertex carries two degree-1 leaves.
pub fn verify_sign_lemma(n1: usize, n2: usize) -> Result<SignLemmaReport> {
    if n1 + n2 + 2 > MAX_TREE_LEAVES {
        return Err(Error::Budget(format!(
            "{} leaves exceeds the enumeration limit of {MAX_TREE_LEAVES}",
            n1 + n2 + 2
        )));
    }
    let expected = sign_closed_form(n1, n2);
    let sides = |count: usize, offset: usize| -> Vec<PlanarTree> {
        let mut all = Vec::new();
        for zero in 0..=count {
            let degrees: Vec<u8> = (0..=count).map(|i| u8::from(i != zero)).collect();
            all.extend(build(&degrees, offset, true));
        }
        all
    };
    let lefts = sides(n1, 1);
    let rights = sides(n2, n1 + 2);
    let mut checked = 0;
    let mut counterexamples = Vec::new();
    for l in &lefts {
        for r in &rights {
            let t = PlanarTree::join(l.clone(), r.clone());
            checked += 1;
            if epsilon_sign(&t) != expected {
                counterexamples.push(t.to_string());
            }
        }
    }
    Ok(SignLemmaReport {
        n1,
        n2,
        trees_checked: checked,
        expected_sign: expected,
        passed: counterexamples.is_empty(),
        counterexamples,
    })
}

/// Leaf labels of the type-(I) products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeLabel {
    Xi,
    Theta,
    XiL,
    Eta,
}

impl TreeLabel {
    pub fn degree(self) -> u8 {
        match self {
            TreeLabel::Theta => 0,
            _ => 1,
        }
    }
}

/// `xi^a, theta, xi_L^b, eta, xi^c, theta, xi_L^d`.
pub fn type_one_labels(a: usize, b: usize, c: usize, d: usize) -> Vec<TreeLabel> {
    let mut v = vec![TreeLabel::Xi; a];
    v.push(TreeLabel::Theta);
    v.extend(std::iter::repeat_n(TreeLabel::XiL, b));
    v.push(TreeLabel::Eta);
    v.extend(std::iter::repeat_n(TreeLabel::Xi, c));
    v.push(TreeLabel::Theta);
    v.extend(std::iter::repeat_n(TreeLabel::XiL, d));
    v
}

/// `(k, l, p)` indexing `phi(k, l, p)`.
pub type PhiArgs = (usize, usize, usize);

/// Signed multiplicities of `phi(k, l, p)` in `<m_n(...), eta>`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TreeAggregate {
    pub exponents: [usize; 4],
    pub leaves: usize,
    pub trees_enumerated: usize,
    /// Trees with two degree-1 leaves on one vertex (only seen when those are enumerated).
    pub vanishing_products: usize,
    /// Trees killed because some inner edge carries a form of the wrong degree.
    pub vanishing_degree: usize,
    /// Contributing trees whose root split falls inside `xi^c` and inside `xi_L^b`.
    pub contributing: [usize; 2],
    /// Buckets from each of the two root-split patterns.
    pub by_family: [BTreeMap<PhiArgs, i64>; 2],
    pub buckets: BTreeMap<PhiArgs, i64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Leaves hanging off the path from the root to the degree-0 leaf, bottom first.
fn stem_attachments(tree: &PlanarTree) -> Vec<(Side, usize)> {
    let mut out = Vec::new();
    let mut cur = tree;
    while let PlanarTree::Node(l, r) = cur {
        let left_has_zero = l.degree_sum() < l.leaf_count();
        let (stem, hanging, side) = if left_has_zero {
            (l.as_ref(), r.as_ref(), Side::Right)
        } else {
            (r.as_ref(), l.as_ref(), Side::Left)
        };
        if let PlanarTree::Leaf { position, .. } = hanging {
            out.push((side, *position));
        }
        cur = stem;
    }
    out
}

fn count_before(att: &[(Side, usize)], position: usize, side: Side) -> usize {
    att.iter()
        .take_while(|(_, p)| *p != position)
        .filter(|(s, _)| *s == side)
        .count()
}

/// Evaluates the tree formula for `<m_n(xi^a, theta, xi_L^b, eta, xi^c, theta, xi_L^d), eta>`
/// structurally. With `include_inadmissible`, trees with two degree-1 leaves on one vertex are
/// enumerated too and dropped because the product of two degree-1 forms vanishes.
pub fn aggregate_tree_sum(
    a: usize,
    b: usize,
    c: usize,
    d: usize,
    include_inadmissible: bool,
) -> Result<TreeAggregate> {
    let labels = type_one_labels(a, b, c, d);
    let degrees: Vec<u8> = labels.iter().map(|l| l.degree()).collect();
    let trees = enumerate_trees(&degrees, !include_inadmissible)?;
    let eta = a + b + 2;
    let mut agg = TreeAggregate {
        exponents: [a, b, c, d],
        leaves: labels.len(),
        trees_enumerated: trees.len(),
        ..Default::default()
    };
    for tree in &trees {
        if !tree.is_admissible() {
            agg.vanishing_products += 1;
            continue;
        }
        if !tree.passes_degree_rule() {
            agg.vanishing_degree += 1;
            continue;
        }
        let PlanarTree::Node(t1, t2) = tree else {
            continue;
        };
        let k = t1.leaf_count();
        let (family, key, p) = if t1.contains(eta) {
            let att = stem_attachments(t1);
            let a1 = count_before(&att, eta, Side::Left);
            let c1 = k - eta;
            let (a2, c2) = (a - a1, c - c1);
            (0, (a2 + b, a1 + c1, c2 + d), c2 + d)
        } else {
            let att = stem_attachments(t2);
            let d2 = count_before(&att, eta, Side::Right);
            let b1 = k - (a + 1);
            let (b2, d1) = (b - b1, d - d2);
            (1, (c + d1, b2 + d2, a + b1), a + b1)
        };
        let sign = -i64::from(epsilon_sign(tree)) * if p % 2 == 0 { 1 } else { -1 };
        agg.contributing[family] += 1;
        *agg.by_family[family].entry(key).or_insert(0) += sign;
        *agg.buckets.entry(key).or_insert(0) += sign;
    }
    for map in agg.by_family.iter_mut() {
        map.retain(|_, v| *v != 0);
    }
    agg.buckets.retain(|_, v| *v != 0);
    Ok(agg)
}

fn binom(n: usize, k: usize) -> i64 {
    binomial(n as u32, k as u32).to_i64().unwrap_or(i64::MAX)
}

/// The closed-form `phi`-coefficients of the two root-split patterns, keyed by `(k, l, p)`.
pub fn comb_lemma_coefficients(
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> [BTreeMap<PhiArgs, i64>; 2] {
    let n = a + b + c + d + 3;
    let base = n * (n - 1) / 2;
    let s1 = if (base + 1).is_multiple_of(2) { 1 } else { -1 };
    let s2 = if (base + n + 1).is_multiple_of(2) {
        1
    } else {
        -1
    };
    let mut first = BTreeMap::new();
    for a1 in 0..=a {
        for c1 in 0..=c {
            let (a2, c2) = (a - a1, c - c1);
            let w = binom(a2 + b, a2) * binom(a1 + c1, a1) * binom(c2 + d, c2);
            *first.entry((a2 + b, a1 + c1, c2 + d)).or_insert(0) += s1 * w;
        }
    }
    let mut second = BTreeMap::new();
    for b1 in 0..=b {
        for d1 in 0..=d {
            let (b2, d2) = (b - b1, d - d1);
            let w = binom(c + d1, c) * binom(b2 + d2, b2) * binom(a + b1, a);
            *second.entry((c + d1, b2 + d2, a + b1)).or_insert(0) += s2 * w;
        }
    }
    first.retain(|_, v: &mut i64| *v != 0);
    second.retain(|_, v: &mut i64| *v != 0);
    [first, second]
}

/// Sum of the two maps of [`comb_lemma_coefficients`].
pub fn comb_lemma_total(a: usize, b: usize, c: usize, d: usize) -> BTreeMap<PhiArgs, i64> {
    let mut total = BTreeMap::new();
    for map in comb_lemma_coefficients(a, b, c, d) {
        for (k, v) in map {
            *total.entry(k).or_insert(0) += v;
        }
    }
    total.retain(|_, v| *v != 0);
    total
}
