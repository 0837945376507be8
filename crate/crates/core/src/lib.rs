//! Marked groups, decorated Grigorchuk groups `G_J`, Cayley-ball algorithms and
//! estimators for random-walk and percolation observables.

pub mod cayley;
pub mod error;
pub mod estimators;
pub mod family;
pub mod group;
pub mod matrix;
pub mod tree;
pub mod word;

pub use error::{GroupError, ParseError, ResourceError};
pub use group::{evaluate_word, is_trivial_word, product, Element, Group, MarkedGroup};
pub use matrix::{generator_matrices, word_to_matrix, HGroup, ProjectiveMat};
pub use tree::{
    apply_functor, ball_agreement_radius, grigorchuk_quotient, iterate_functor, DecoratedElement,
    WreathGroup,
};
pub use word::{reduce, GenSymbol, OmegaWord, Word};

pub(crate) type FxIndexSet<T> =
    indexmap::IndexSet<T, std::hash::BuildHasherDefault<rustc_hash::FxHasher>>;
