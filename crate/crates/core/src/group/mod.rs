//! Words, generating sets, word-problem oracles, triangular presentations
//! and Cayley-ball generation: the substrate every other module consumes.

mod ball;
mod oracle;
mod presentation;
mod word;

pub use ball::{cayley_ball, CayleyBall, TwoCell};
pub use oracle::{FiniteTable, GroupOracle};
pub use presentation::{triangularize, Presentation, Triangularization};
pub use word::{GeneratorSet, Letter, Word};
