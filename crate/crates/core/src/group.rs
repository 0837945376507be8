//! Marked groups: a group with an ordered generating tuple and an evaluator
//! from words to canonical, hashable elements.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};
use smallvec::SmallVec;

use crate::error::GroupError;
use crate::matrix::ProjectiveMat;
use crate::tree::{DecoratedElement, WreathGroup};
use crate::word::{reduce, GenSymbol, Word};

/// Canonical element of some marked group. Equality is group equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Element {
    Trivial,
    /// Normal form in the free Grigorchuk group.
    Gamma(Word),
    /// Freely reduced word; generator `2i+1` is the inverse of `2i`.
    Free(SmallVec<[u8; 16]>),
    /// A point of `Z^d`, or a residue for cyclic groups.
    Abelian(SmallVec<[i64; 4]>),
    Matrix(Box<ProjectiveMat>),
    Tree(DecoratedElement),
    Tuple(Vec<Element>),
}

impl Element {
    pub fn to_json(&self) -> Value {
        match self {
            Element::Trivial => json!("e"),
            Element::Gamma(w) => json!(w.to_string()),
            Element::Free(v) => json!(v.to_vec()),
            Element::Abelian(v) => json!(v.to_vec()),
            Element::Matrix(m) => m.to_json(),
            Element::Tree(t) => t.to_json(),
            Element::Tuple(v) => Value::Array(v.iter().map(Element::to_json).collect()),
        }
    }

    pub fn as_tree(&self) -> Option<&DecoratedElement> {
        match self {
            Element::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&ProjectiveMat> {
        match self {
            Element::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Element]> {
        match self {
            Element::Tuple(v) => Some(v),
            _ => None,
        }
    }
}

pub trait MarkedGroup: Send + Sync + fmt::Debug {
    /// Expression that rebuilds this group in the command-line mini-language.
    fn name(&self) -> String;

    /// Number of ordered generators `k`.
    fn rank(&self) -> usize;

    fn identity(&self) -> Element;

    fn generator(&self, i: usize) -> Element;

    fn mul(&self, x: &Element, y: &Element) -> Element;

    fn inverse(&self, x: &Element) -> Element;

    /// Index of the formal inverse of generator `i`.
    fn inverse_generator(&self, i: usize) -> usize {
        i
    }

    fn generator_label(&self, i: usize) -> String {
        if self.rank() == 4 {
            GenSymbol::from_index(i).as_char().to_string()
        } else {
            format!("s{i}")
        }
    }

    /// Word length with respect to the marking, when it is cheap to compute.
    fn word_length(&self, _x: &Element) -> Option<usize> {
        None
    }

    /// `Some(q)` when the Cayley graph is the `q`-regular tree.
    fn tree_degree(&self) -> Option<usize> {
        None
    }

    fn is_trivial(&self) -> bool {
        false
    }

    fn as_wreath(&self) -> Option<&WreathGroup> {
        None
    }

    fn as_product(&self) -> Option<&ProductGroup> {
        None
    }

    /// Product of the generators listed in `letters`, left to right.
    fn evaluate(&self, letters: &[usize]) -> Element {
        letters.iter().fold(self.identity(), |acc, &i| {
            self.mul(&acc, &self.generator(i))
        })
    }
}

pub type Group = Arc<dyn MarkedGroup>;

/// Evaluates a word over `a, b, c, d` in a four-generated group.
pub fn evaluate_word(g: &dyn MarkedGroup, w: &Word) -> Element {
    debug_assert_eq!(g.rank(), 4);
    g.evaluate(&w.indices())
}

/// True iff `w` evaluates to the identity of `g`.
pub fn is_trivial_word(g: &dyn MarkedGroup, w: &Word) -> bool {
    evaluate_word(g, w) == g.identity()
}

/// The one-element group marked by `rank` copies of the identity.
#[derive(Debug, Clone)]
pub struct TrivialGroup {
    rank: usize,
}

impl TrivialGroup {
    pub fn new(rank: usize) -> TrivialGroup {
        TrivialGroup { rank }
    }
}

impl MarkedGroup for TrivialGroup {
    fn name(&self) -> String {
        format!("trivial({})", self.rank)
    }
    fn rank(&self) -> usize {
        self.rank
    }
    fn identity(&self) -> Element {
        Element::Trivial
    }
    fn generator(&self, _i: usize) -> Element {
        Element::Trivial
    }
    fn mul(&self, _x: &Element, _y: &Element) -> Element {
        Element::Trivial
    }
    fn inverse(&self, _x: &Element) -> Element {
        Element::Trivial
    }
    fn word_length(&self, _x: &Element) -> Option<usize> {
        Some(0)
    }
    fn is_trivial(&self) -> bool {
        true
    }
}

/// Free group of rank `r`, marked by `x_1, x_1⁻¹, ..., x_r, x_r⁻¹` (so `k = 2r`).
#[derive(Debug, Clone)]
pub struct FreeGroup {
    rank: usize,
}

impl FreeGroup {
    pub fn new(rank: usize) -> Result<FreeGroup, GroupError> {
        if rank == 0 || rank > 64 {
            return Err(GroupError::InvalidArgument(format!(
                "free group rank {rank} out of range 1..=64"
            )));
        }
        Ok(FreeGroup { rank })
    }
}

impl MarkedGroup for FreeGroup {
    fn name(&self) -> String {
        format!("free({})", self.rank)
    }
    fn rank(&self) -> usize {
        2 * self.rank
    }
    fn identity(&self) -> Element {
        Element::Free(SmallVec::new())
    }
    fn generator(&self, i: usize) -> Element {
        Element::Free(SmallVec::from_slice(&[i as u8]))
    }
    fn mul(&self, x: &Element, y: &Element) -> Element {
        let (Element::Free(u), Element::Free(v)) = (x, y) else {
            panic!("FreeGroup::mul on foreign elements");
        };
        let mut out = u.clone();
        for &l in v {
            if out.last() == Some(&(l ^ 1)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Element::Free(out)
    }
    fn inverse(&self, x: &Element) -> Element {
        let Element::Free(u) = x else {
            panic!("FreeGroup::inverse on foreign element")
        };
        Element::Free(u.iter().rev().map(|l| l ^ 1).collect())
    }
    fn inverse_generator(&self, i: usize) -> usize {
        i ^ 1
    }
    fn generator_label(&self, i: usize) -> String {
        let base = format!("x{}", i / 2 + 1);
        if i % 2 == 0 {
            base
        } else {
            format!("{base}^-1")
        }
    }
    fn word_length(&self, x: &Element) -> Option<usize> {
        match x {
            Element::Free(u) => Some(u.len()),
            _ => None,
        }
    }
    fn tree_degree(&self) -> Option<usize> {
        Some(2 * self.rank)
    }
}

/// `Z^dim` marked by `+e_1, -e_1, ..., +e_dim, -e_dim`.
#[derive(Debug, Clone)]
pub struct GridGroup {
    dim: usize,
}

impl GridGroup {
    pub fn new(dim: usize) -> Result<GridGroup, GroupError> {
        if dim == 0 {
            return Err(GroupError::InvalidArgument(
                "grid dimension must be positive".into(),
            ));
        }
        Ok(GridGroup { dim })
    }

    pub fn point(&self, coords: &[i64]) -> Element {
        assert_eq!(coords.len(), self.dim);
        Element::Abelian(SmallVec::from_slice(coords))
    }
}

impl MarkedGroup for GridGroup {
    fn name(&self) -> String {
        format!("grid({})", self.dim)
    }
    fn rank(&self) -> usize {
        2 * self.dim
    }
    fn identity(&self) -> Element {
        Element::Abelian(SmallVec::from_elem(0, self.dim))
    }
    fn generator(&self, i: usize) -> Element {
        let mut v: SmallVec<[i64; 4]> = SmallVec::from_elem(0, self.dim);
        v[i / 2] = if i % 2 == 0 { 1 } else { -1 };
        Element::Abelian(v)
    }
    fn mul(&self, x: &Element, y: &Element) -> Element {
        let (Element::Abelian(u), Element::Abelian(v)) = (x, y) else {
            panic!("GridGroup::mul on foreign elements");
        };
        Element::Abelian(u.iter().zip(v).map(|(a, b)| a + b).collect())
    }
    fn inverse(&self, x: &Element) -> Element {
        let Element::Abelian(u) = x else {
            panic!("GridGroup::inverse on foreign element")
        };
        Element::Abelian(u.iter().map(|a| -a).collect())
    }
    fn inverse_generator(&self, i: usize) -> usize {
        i ^ 1
    }
    fn generator_label(&self, i: usize) -> String {
        format!("{}e{}", if i % 2 == 0 { '+' } else { '-' }, i / 2 + 1)
    }
    fn word_length(&self, x: &Element) -> Option<usize> {
        match x {
            Element::Abelian(u) => Some(u.iter().map(|a| a.unsigned_abs() as usize).sum()),
            _ => None,
        }
    }
    fn tree_degree(&self) -> Option<usize> {
        (self.dim == 1).then_some(2)
    }
}

/// `Z/n` marked by `+1, -1`.
#[derive(Debug, Clone)]
pub struct CyclicGroup {
    n: i64,
}

impl CyclicGroup {
    pub fn new(n: usize) -> Result<CyclicGroup, GroupError> {
        if n == 0 {
            return Err(GroupError::InvalidArgument(
                "cycle length must be positive (use grid(1) for Z)".into(),
            ));
        }
        Ok(CyclicGroup { n: n as i64 })
    }
}

impl MarkedGroup for CyclicGroup {
    fn name(&self) -> String {
        format!("cycle({})", self.n)
    }
    fn rank(&self) -> usize {
        2
    }
    fn identity(&self) -> Element {
        Element::Abelian(SmallVec::from_slice(&[0]))
    }
    fn generator(&self, i: usize) -> Element {
        let v: i64 = if i == 0 { 1 } else { -1 };
        Element::Abelian(SmallVec::from_slice(&[v.rem_euclid(self.n)]))
    }
    fn mul(&self, x: &Element, y: &Element) -> Element {
        let (Element::Abelian(u), Element::Abelian(v)) = (x, y) else {
            panic!("CyclicGroup::mul on foreign elements");
        };
        Element::Abelian(SmallVec::from_slice(&[(u[0] + v[0]).rem_euclid(self.n)]))
    }
    fn inverse(&self, x: &Element) -> Element {
        let Element::Abelian(u) = x else {
            panic!("CyclicGroup::inverse on foreign element")
        };
        Element::Abelian(SmallVec::from_slice(&[(-u[0]).rem_euclid(self.n)]))
    }
    fn inverse_generator(&self, i: usize) -> usize {
        1 - i
    }
    fn generator_label(&self, i: usize) -> String {
        if i == 0 {
            "+1".into()
        } else {
            "-1".into()
        }
    }
    fn word_length(&self, x: &Element) -> Option<usize> {
        match x {
            Element::Abelian(u) => Some(u[0].min(self.n - u[0]) as usize),
            _ => None,
        }
    }
}

/// The free Grigorchuk group `Z2 * Z2^2` marked by `a, b, c, d`.
#[derive(Debug, Clone, Default)]
pub struct GammaFree;

impl MarkedGroup for GammaFree {
    fn name(&self) -> String {
        "gamma_free()".into()
    }
    fn rank(&self) -> usize {
        4
    }
    fn identity(&self) -> Element {
        Element::Gamma(Word::empty())
    }
    fn generator(&self, i: usize) -> Element {
        Element::Gamma(Word(vec![GenSymbol::from_index(i)]))
    }
    fn mul(&self, x: &Element, y: &Element) -> Element {
        let (Element::Gamma(u), Element::Gamma(v)) = (x, y) else {
            panic!("GammaFree::mul on foreign elements");
        };
        Element::Gamma(reduce(&u.concat(v)))
    }
    fn inverse(&self, x: &Element) -> Element {
        let Element::Gamma(u) = x else {
            panic!("GammaFree::inverse on foreign element")
        };
        Element::Gamma(u.inverse())
    }
    fn word_length(&self, x: &Element) -> Option<usize> {
        match x {
            Element::Gamma(u) => Some(u.len()),
            _ => None,
        }
    }
}

/// Subgroup of the direct product generated by the diagonal generators.
#[derive(Debug, Clone)]
pub struct ProductGroup {
    components: Vec<Group>,
    rank: usize,
}

/// `⊗ G_i`: components must share the generator count.
pub fn product(components: Vec<Group>) -> Result<ProductGroup, GroupError> {
    let Some(first) = components.first() else {
        return Err(GroupError::InvalidArgument("product of zero groups".into()));
    };
    let rank = first.rank();
    if let Some(bad) = components.iter().find(|g| g.rank() != rank) {
        return Err(GroupError::RankMismatch {
            expected: rank,
            found: bad.rank(),
        });
    }
    Ok(ProductGroup { components, rank })
}

impl ProductGroup {
    pub fn components(&self) -> &[Group] {
        &self.components
    }

    /// Image of `x` under the canonical epimorphism onto component `i`.
    pub fn project<'a>(&self, x: &'a Element, i: usize) -> &'a Element {
        match x {
            Element::Tuple(v) => &v[i],
            _ => panic!("ProductGroup::project on non-tuple"),
        }
    }

    fn zip_with(
        &self,
        x: &Element,
        y: &Element,
        f: impl Fn(&Group, &Element, &Element) -> Element,
    ) -> Element {
        let (Element::Tuple(u), Element::Tuple(v)) = (x, y) else {
            panic!("ProductGroup::mul on non-tuple elements");
        };
        Element::Tuple(
            self.components
                .iter()
                .zip(u.iter().zip(v))
                .map(|(g, (a, b))| f(g, a, b))
                .collect(),
        )
    }
}

impl MarkedGroup for ProductGroup {
    fn name(&self) -> String {
        let parts: Vec<String> = self.components.iter().map(|g| g.name()).collect();
        format!("product({})", parts.join(", "))
    }
    fn rank(&self) -> usize {
        self.rank
    }
    fn identity(&self) -> Element {
        Element::Tuple(self.components.iter().map(|g| g.identity()).collect())
    }
    fn generator(&self, i: usize) -> Element {
        Element::Tuple(self.components.iter().map(|g| g.generator(i)).collect())
    }
    fn mul(&self, x: &Element, y: &Element) -> Element {
        self.zip_with(x, y, |g, a, b| g.mul(a, b))
    }
    fn inverse(&self, x: &Element) -> Element {
        let Element::Tuple(u) = x else {
            panic!("ProductGroup::inverse on non-tuple")
        };
        Element::Tuple(
            self.components
                .iter()
                .zip(u)
                .map(|(g, a)| g.inverse(a))
                .collect(),
        )
    }
    fn inverse_generator(&self, i: usize) -> usize {
        self.components[0].inverse_generator(i)
    }
    fn generator_label(&self, i: usize) -> String {
        self.components[0].generator_label(i)
    }
    fn is_trivial(&self) -> bool {
        self.components.iter().all(|g| g.is_trivial())
    }
    fn as_product(&self) -> Option<&ProductGroup> {
        Some(self)
    }
    fn evaluate(&self, letters: &[usize]) -> Element {
        Element::Tuple(
            self.components
                .iter()
                .map(|g| g.evaluate(letters))
                .collect(),
        )
    }
}
