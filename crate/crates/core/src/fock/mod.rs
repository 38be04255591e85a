//! Truncated q-Fock space: word basis, symmetrizer Gram matrices, Cholesky
//! orthonormalization and the norms of the inclusion maps `j`.

pub mod cache;
pub mod level;
pub mod space;
pub mod symmetrizer;
pub mod word;

pub use cache::{CacheStats, GramCache};
pub use level::{gram_min_eigenvalue, orthonormalize, LevelSpace};
pub use space::{EmpiricalConstants, InclusionNorms, JNorms, SpaceKind, TruncatedFock};
pub use symmetrizer::{build_symmetrizer, symmetrizer_brute_force, DEFAULT_MAX_LEVEL_DIM};
pub use word::{index_word, word_index, Word};
