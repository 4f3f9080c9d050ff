//! Feature maps producing [`FeatureMatrix`] values.
//!
//! Two embeddings are provided:
//! - [`proxy`]: `tanh(W^T x)` with a seeded Gaussian projection, usable at
//!   `d = 4^n` scale and evaluable one axis at a time;
//! - [`pauli`]: a dense statevector simulator computing Pauli-string
//!   expectations `<psi(x)| sigma_i |psi(x)>` for small qubit counts.
//!
//! [`io`] holds the binary and CSV feature file formats.
//!
//! [`FeatureMatrix`]: crate::axiscore::FeatureMatrix

pub mod io;
pub mod pauli;
pub mod proxy;

pub use pauli::{
    encode_state, pauli_expectation, pauli_feature_matrix, pauli_string, EncodingCircuitSpec,
    Entangler, PauliLetter, PauliString,
};
pub use proxy::{proxy_embed, ProjectionSpec, ProxyEmbedding};
