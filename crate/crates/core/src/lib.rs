//! Implementability of positive linear maps with multiple copies of the input state.
//!
//! A positive map `Λ` that is not completely positive cannot act on half of an
//! entangled state, but it may still be realised by a completely positive map that
//! consumes `N` copies `ρ^{⊗N}` of the input. Whether that is possible is decided by
//! the smallest eigenvalue of the symmetrized `N`-copy extension Choi operator
//!
//! ```text
//! L_N = (1/N) Σ_i  L_{0,i} ⊗ I_rest
//! ```
//!
//! where `L` is the Choi operator of `Λ` placed on the output factor and the `i`-th
//! input copy. This crate builds that operator densely, decides its positivity,
//! searches for the minimum copy number and computes critical noise levels, together
//! with closed-form sufficient/necessary thresholds.
//!
//! Tensor factors are ordered as listed in `dims`, index `0` most significant in the
//! row-major flattening. Choi operators of maps store the input factor first
//! (`[d_in, d_out]`); extension Choi operators store the output factor first
//! (`[d_out, d_in, ..., d_in]`).

pub mod antisym;
pub mod checks;
pub mod criteria;
pub mod eigen;
pub mod error;
pub mod extension;
pub mod maps;
pub mod mapspec;
pub mod reduction;
pub mod tensor;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, hermitian_min_eig, is_psd, MinEig};
pub use error::{Error, Result};
pub use extension::{
    apply_sym_extension, critical_eta_a, critical_eta_b, implementable, min_copies,
    sym_extension_choi, CopySearchResult, ExtensionChoi, ImplementabilityReport,
};
pub use maps::{LinearMap, PositivityWitness};
pub use tensor::{Limits, RectOperator, StateVector, TensorOperator, C64};

/// Default tolerance for positive-semidefiniteness decisions.
pub const DEFAULT_TOL: f64 = 1e-9;
