//! Computational algebra for finite modules over the Boolean semiring `B`
//! and the generalized field `F_inf`.

pub mod dot;
pub mod error;
pub mod explorer;
pub mod families;
pub mod hom;
pub mod io;
pub mod linear;
pub mod module;
pub mod projective;

pub use error::{Error, Result};
pub use explorer::{CategorySpec, Factorization, MorphismClass, WitnessReport, WitnessVerdict};
pub use families::{Family, IndexedLattice};
pub use hom::{compose, enumerate_homs, Hom, HomConstraints, SearchOptions};
pub use module::{free_module, Congruence, FinModule, Flavor, FreeElem, FreeModule, FreeSpace, PartialOrder};
pub use linear::Matrix;
pub use projective::{projectivity, ProjectivityReport};
