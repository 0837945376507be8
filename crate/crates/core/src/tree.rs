//! Iterated permutational wreath products: the functors `F_x`, their iterates
//! `F^k_ω(H)`, and the finite Grigorchuk quotients `F^k_ω(1)`.
//!
//! An element of depth `d` is a portrait (one swap bit per internal node of the
//! binary tree of depth `d`) plus `2^d` leaf decorations in a base group `H`.
//! The pair `(ξ; u, v)` places `u` on the left subtree. Multiplication follows
//! the right-action rule `(s; u0, u1)(t; v0, v1) = (st; u0·v_{s(0)}, u1·v_{s(1)})`,
//! so a word is evaluated left to right.
//!
//! Internally the swap bits are stored in preorder (root, left subtree, right
//! subtree) so that joining two subtrees is concatenation; serialization uses
//! level order.

use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};
use smallvec::SmallVec;

use crate::error::GroupError;
use crate::group::{Element, Group, MarkedGroup, TrivialGroup};
use crate::word::{GenSymbol, OmegaWord, Word};
use crate::FxIndexSet;

/// Swap bits of a depth-`d` binary tree, `2^d - 1` of them, in preorder.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Portrait {
    depth: u8,
    bits: SmallVec<[u64; 2]>,
}

impl Portrait {
    pub fn identity(depth: usize) -> Portrait {
        assert!(depth < 32, "portrait depth {depth} too large");
        let nodes = (1usize << depth) - 1;
        Portrait {
            depth: depth as u8,
            bits: SmallVec::from_elem(0, nodes.div_ceil(64)),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn node_count(&self) -> usize {
        (1usize << self.depth) - 1
    }

    pub fn is_identity(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize, v: bool) {
        if v {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    fn join(swap: bool, left: &Portrait, right: &Portrait) -> Portrait {
        debug_assert_eq!(left.depth, right.depth);
        let child = left.node_count();
        let mut out = Portrait::identity(left.depth() + 1);
        out.set(0, swap);
        for i in 0..child {
            out.set(1 + i, left.get(i));
            out.set(1 + child + i, right.get(i));
        }
        out
    }

    /// Preorder index of every node, listed level by level.
    fn level_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut level = vec![0usize];
        for height in (1..=self.depth()).rev() {
            let half = 1usize << (height - 1);
            out.extend_from_slice(&level);
            level = level.iter().flat_map(|&o| [o + 1, o + half]).collect();
        }
        out
    }

    /// Swap bits in level order (root first), as a `0`/`1` string.
    pub fn to_bit_string(&self) -> String {
        self.level_order()
            .into_iter()
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bit_string(depth: usize, s: &str) -> Option<Portrait> {
        let mut p = Portrait::identity(depth);
        if s.len() != p.node_count() {
            return None;
        }
        for (idx, ch) in p.level_order().into_iter().zip(s.chars()) {
            match ch {
                '0' => {}
                '1' => p.set(idx, true),
                _ => return None,
            }
        }
        Some(p)
    }
}

impl fmt::Debug for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Portrait({})", self.to_bit_string())
    }
}

/// Element of `H ≀_{X_d} (portrait group)`; leaves are empty when `H` is trivial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecoratedElement {
    portrait: Portrait,
    leaves: Vec<Element>,
}

impl DecoratedElement {
    pub fn new(portrait: Portrait, leaves: Vec<Element>) -> DecoratedElement {
        assert!(leaves.is_empty() || leaves.len() == 1 << portrait.depth());
        DecoratedElement { portrait, leaves }
    }

    pub fn portrait(&self) -> &Portrait {
        &self.portrait
    }

    pub fn leaves(&self) -> &[Element] {
        &self.leaves
    }

    pub fn depth(&self) -> usize {
        self.portrait.depth()
    }

    /// Forgets the decorations (the image under `H -> 1`).
    pub fn project_to_portrait(&self) -> DecoratedElement {
        DecoratedElement {
            portrait: self.portrait.clone(),
            leaves: Vec::new(),
        }
    }

    fn join(swap: bool, left: &DecoratedElement, right: &DecoratedElement) -> DecoratedElement {
        let mut leaves = left.leaves.clone();
        leaves.extend_from_slice(&right.leaves);
        DecoratedElement {
            portrait: Portrait::join(swap, &left.portrait, &right.portrait),
            leaves,
        }
    }

    /// Group law of the iterated wreath product. `base` multiplies the leaves.
    pub fn compose(
        &self,
        other: &DecoratedElement,
        base: &dyn MarkedGroup,
    ) -> Result<DecoratedElement, GroupError> {
        if self.depth() != other.depth() {
            return Err(GroupError::DepthMismatch(self.depth(), other.depth()));
        }
        if self.leaves.len() != other.leaves.len() {
            return Err(GroupError::MalformedBase(
                "leaf decorations over different bases".into(),
            ));
        }
        Ok(self.compose_unchecked(other, base))
    }

    pub(crate) fn compose_unchecked(
        &self,
        other: &DecoratedElement,
        base: &dyn MarkedGroup,
    ) -> DecoratedElement {
        let mut out = DecoratedElement {
            portrait: Portrait::identity(self.depth()),
            leaves: self.leaves.clone(),
        };
        compose_rec(self, other, &mut out, base, 0, 0, 0, 0, self.depth());
        out
    }

    pub fn inverse(&self, base: &dyn MarkedGroup) -> DecoratedElement {
        let mut out = DecoratedElement {
            portrait: Portrait::identity(self.depth()),
            leaves: self.leaves.clone(),
        };
        inverse_rec(self, &mut out, base, 0, 0, 0, 0, self.depth());
        out
    }

    /// Image of each leaf (left-to-right index) under the portrait.
    pub fn leaf_permutation(&self) -> Vec<usize> {
        let mut perm = vec![0; 1 << self.depth()];
        perm_rec(&self.portrait, &mut perm, 0, 0, 0, self.depth());
        perm
    }

    /// `{"portrait": <level-order bits>, "leaves": [...]}`; leaves omitted over a trivial base.
    pub fn to_json(&self) -> Value {
        if self.leaves.is_empty() {
            json!({"portrait": self.portrait.to_bit_string()})
        } else {
            json!({
                "portrait": self.portrait.to_bit_string(),
                "leaves": self.leaves.iter().map(Element::to_json).collect::<Vec<_>>(),
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn compose_rec(
    x: &DecoratedElement,
    y: &DecoratedElement,
    out: &mut DecoratedElement,
    base: &dyn MarkedGroup,
    ox: usize,
    oy: usize,
    lx: usize,
    ly: usize,
    height: usize,
) {
    if height == 0 {
        if !x.leaves.is_empty() {
            out.leaves[lx] = base.mul(&x.leaves[lx], &y.leaves[ly]);
        }
        return;
    }
    let sx = x.portrait.get(ox);
    out.portrait.set(ox, sx ^ y.portrait.get(oy));
    let half = 1usize << (height - 1);
    let (yl, yr, lyl, lyr) = if sx {
        (oy + half, oy + 1, ly + half, ly)
    } else {
        (oy + 1, oy + half, ly, ly + half)
    };
    compose_rec(x, y, out, base, ox + 1, yl, lx, lyl, height - 1);
    compose_rec(x, y, out, base, ox + half, yr, lx + half, lyr, height - 1);
}

#[allow(clippy::too_many_arguments)]
fn inverse_rec(
    x: &DecoratedElement,
    out: &mut DecoratedElement,
    base: &dyn MarkedGroup,
    ox: usize,
    oo: usize,
    lx: usize,
    lo: usize,
    height: usize,
) {
    if height == 0 {
        if !x.leaves.is_empty() {
            out.leaves[lo] = base.inverse(&x.leaves[lx]);
        }
        return;
    }
    let s = x.portrait.get(ox);
    out.portrait.set(oo, s);
    let half = 1usize << (height - 1);
    // (s; u0, u1)^{-1} = (s; v0, v1) with v_{s(i)} = u_i^{-1}
    let (to_left, to_right) = if s {
        ((oo + half, lo + half), (oo + 1, lo))
    } else {
        ((oo + 1, lo), (oo + half, lo + half))
    };
    inverse_rec(x, out, base, ox + 1, to_left.0, lx, to_left.1, height - 1);
    inverse_rec(
        x,
        out,
        base,
        ox + half,
        to_right.0,
        lx + half,
        to_right.1,
        height - 1,
    );
}

fn perm_rec(p: &Portrait, perm: &mut [usize], o: usize, lin: usize, lout: usize, height: usize) {
    if height == 0 {
        perm[lin] = lout;
        return;
    }
    let half = 1usize << (height - 1);
    let (l_out, r_out) = if p.get(o) {
        (lout + half, lout)
    } else {
        (lout, lout + half)
    };
    perm_rec(p, perm, o + 1, lin, l_out, height - 1);
    perm_rec(p, perm, o + half, lin + half, r_out, height - 1);
}

/// `F^d_ω(H)`, flattened to depth-`d` decorated elements over `H`.
#[derive(Debug, Clone)]
pub struct WreathGroup {
    prefix: Vec<u8>,
    base: Group,
    generators: [DecoratedElement; 4],
}

impl WreathGroup {
    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    /// The letters `x_1 ... x_d`, outermost first.
    pub fn omega_prefix(&self) -> &[u8] {
        &self.prefix
    }

    /// The leaf group `H`.
    pub fn base(&self) -> &Group {
        &self.base
    }

    pub fn generator_element(&self, s: GenSymbol) -> &DecoratedElement {
        &self.generators[s.index()]
    }

    pub fn compose(
        &self,
        x: &DecoratedElement,
        y: &DecoratedElement,
    ) -> Result<DecoratedElement, GroupError> {
        x.compose(y, self.base.as_ref())
    }

    pub fn evaluate_word(&self, w: &Word) -> DecoratedElement {
        match self.evaluate(&w.indices()) {
            Element::Tree(t) => t,
            _ => unreachable!(),
        }
    }

    fn identity_element(&self) -> DecoratedElement {
        let leaves = if self.base.is_trivial() {
            Vec::new()
        } else {
            vec![self.base.identity(); 1 << self.depth()]
        };
        DecoratedElement {
            portrait: Portrait::identity(self.depth()),
            leaves,
        }
    }
}

fn tree_of(x: &Element) -> &DecoratedElement {
    match x {
        Element::Tree(t) => t,
        _ => panic!("WreathGroup operation on non-tree element"),
    }
}

impl MarkedGroup for WreathGroup {
    fn name(&self) -> String {
        let prefix: String = self.prefix.iter().map(|d| char::from(b'0' + d)).collect();
        if self.base.is_trivial() {
            format!("grig({prefix}|0, {})", self.depth())
        } else {
            format!(
                "functor({prefix}|0, {}, {})",
                self.depth(),
                self.base.name()
            )
        }
    }
    fn rank(&self) -> usize {
        4
    }
    fn identity(&self) -> Element {
        Element::Tree(self.identity_element())
    }
    fn generator(&self, i: usize) -> Element {
        Element::Tree(self.generators[i].clone())
    }
    fn mul(&self, x: &Element, y: &Element) -> Element {
        Element::Tree(tree_of(x).compose_unchecked(tree_of(y), self.base.as_ref()))
    }
    fn inverse(&self, x: &Element) -> Element {
        Element::Tree(tree_of(x).inverse(self.base.as_ref()))
    }
    fn as_wreath(&self) -> Option<&WreathGroup> {
        Some(self)
    }
}

fn check_base(base: &dyn MarkedGroup) -> Result<(), GroupError> {
    if base.rank() != 4 {
        return Err(GroupError::RankMismatch {
            expected: 4,
            found: base.rank(),
        });
    }
    let id = base.identity();
    for i in 0..4 {
        if base.evaluate(&[i, i]) != id {
            return Err(GroupError::MalformedBase(format!(
                "generator {} is not an involution",
                base.generator_label(i)
            )));
        }
    }
    if base.evaluate(&[1, 2, 3]) != id {
        return Err(GroupError::MalformedBase("bcd is not the identity".into()));
    }
    Ok(())
}

/// `F_x(base)`: `A = (ξ; 1, 1)` and, for `s ∈ {b, c, d}`, `S = (1; a or 1, s)`
/// where the left entry is `1` exactly for `s = φ^{-x}(d)`.
pub fn apply_functor(x: u8, base: Group) -> Result<WreathGroup, GroupError> {
    if x > 2 {
        return Err(GroupError::InvalidArgument(format!(
            "functor letter {x} not in 0..=2"
        )));
    }
    check_base(base.as_ref())?;
    let (leaf_base, child_gens, mut prefix): (Group, [DecoratedElement; 4], Vec<u8>) =
        match base.as_wreath() {
            Some(w) => (w.base.clone(), w.generators.clone(), w.prefix.clone()),
            None => {
                let gens = std::array::from_fn(|i| DecoratedElement {
                    portrait: Portrait::identity(0),
                    leaves: if base.is_trivial() {
                        Vec::new()
                    } else {
                        vec![base.generator(i)]
                    },
                });
                (base.clone(), gens, Vec::new())
            }
        };
    prefix.insert(0, x);
    let child_id = DecoratedElement {
        portrait: Portrait::identity(child_gens[0].depth()),
        leaves: if leaf_base.is_trivial() {
            Vec::new()
        } else {
            vec![leaf_base.identity(); 1 << child_gens[0].depth()]
        },
    };
    let trivial_left = GenSymbol::D.twist(-(x as i64));
    let a = &child_gens[GenSymbol::A.index()];
    let generators = std::array::from_fn(|i| {
        let s = GenSymbol::from_index(i);
        if s == GenSymbol::A {
            DecoratedElement::join(true, &child_id, &child_id)
        } else {
            let left = if s == trivial_left { &child_id } else { a };
            DecoratedElement::join(false, left, &child_gens[i])
        }
    });
    Ok(WreathGroup {
        prefix,
        base: leaf_base,
        generators,
    })
}

/// `F^k_ω(base) = F_{x_1}(F_{x_2}(... F_{x_k}(base)))`; `k = 0` returns `base`.
pub fn iterate_functor(omega: &OmegaWord, k: usize, base: Group) -> Result<Group, GroupError> {
    let mut g = base;
    for i in (1..=k).rev() {
        g = std::sync::Arc::new(apply_functor(omega.letter_at(i), g)?);
    }
    Ok(g)
}

/// The finite quotient `F^k_ω(1)`.
pub fn grigorchuk_quotient(omega: &OmegaWord, k: usize) -> Group {
    iterate_functor(omega, k, std::sync::Arc::new(TrivialGroup::new(4)))
        .expect("trivial base is well formed")
}

/// Largest `r <= n_max` such that words of length `<= r` have the same
/// equality pattern in both groups, i.e. the rooted generator-labeled balls of
/// radius `r` coincide.
pub fn ball_agreement_radius(g1: &dyn MarkedGroup, g2: &dyn MarkedGroup, n_max: usize) -> usize {
    assert_eq!(
        g1.rank(),
        g2.rank(),
        "ball comparison needs equal generator counts"
    );
    let k = g1.rank();
    let mut set1: FxIndexSet<Element> = FxIndexSet::default();
    let mut set2: FxIndexSet<Element> = FxIndexSet::default();
    set1.insert(g1.identity());
    set2.insert(g2.identity());
    let gens1: Vec<Element> = (0..k).map(|i| g1.generator(i)).collect();
    let gens2: Vec<Element> = (0..k).map(|i| g2.generator(i)).collect();
    let mut layer = 0..1;
    for r in 0..n_max {
        let expand =
            |set: &FxIndexSet<Element>, g: &dyn MarkedGroup, gens: &[Element]| -> Vec<Element> {
                layer
                    .clone()
                    .into_par_iter()
                    .flat_map_iter(|v| {
                        let x = &set[v];
                        gens.iter().map(move |s| g.mul(x, s))
                    })
                    .collect()
            };
        let (c1, c2) = rayon::join(|| expand(&set1, g1, &gens1), || expand(&set2, g2, &gens2));
        let start = set1.len();
        for (x, y) in c1.into_iter().zip(c2) {
            let (i, _) = set1.insert_full(x);
            let (j, _) = set2.insert_full(y);
            if i != j {
                return r;
            }
        }
        layer = start..set1.len();
    }
    n_max
}
