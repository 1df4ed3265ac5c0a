//! Dense tensors, reverse-mode differentiation, initialisation, Adam and
//! gradient checking.

pub mod adam;
pub mod checkpoint;
mod dropout;
pub mod gradcheck;
pub mod init;
mod kernels;
mod params;
mod scalar;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamState, DEFAULT_LR};
pub use dropout::Dropout;
pub use gradcheck::{finite_diff_gradcheck, GradcheckOptions, GradcheckReport, ParamCheck};
pub use kernels::dot;
pub use params::{ParamStore, Parameter};
pub use scalar::Real;
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;

/// Additive mask value for padded slots.
pub const MASK_NEG: f32 = -1e9;

/// Deterministic generator used for initialisation, dropout and shuffling.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Generator seeded from a single integer.
pub fn rng_from_seed(seed: u64) -> Rng {
    rand::SeedableRng::seed_from_u64(seed)
}
