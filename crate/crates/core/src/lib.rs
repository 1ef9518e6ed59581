//! Finite-field arithmetic, twisted polynomials, Drinfeld modules and their
//! extensions along finite covers, abelian sheaves and shtukas.

pub mod drinfeld;
pub mod extend;
pub mod ff;
pub mod poly;
pub mod polymat;
pub mod report;
pub mod semilinear;
pub mod sheaves;
pub mod shtuka;
pub mod skew;

pub use drinfeld::{CoverMap, DrinfeldError, DrinfeldModule, RingTag};
pub use ff::{Embedding, FfError, FieldElement, FieldTower, TowerId};
pub use poly::{Degree, Poly};
pub use polymat::{InfinityDivisors, PolyMatrix};
pub use report::{Clause, VerificationReport};
pub use skew::{substitute, SkewError, SkewPoly};

/// Resource limits for exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Largest field that may be built or enumerated.
    pub field_size: u64,
    /// Largest candidate space `|K|^(r'+1)` for extension searches.
    pub candidates: u64,
    /// Largest F_p-solution space enumerated by the semilinear solvers.
    pub solution_space: u64,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps {
            field_size: ff::DEFAULT_FIELD_CAP,
            candidates: 10_000_000,
            solution_space: 1 << 20,
        }
    }
}
