//! Multi-key multi-recipient symmetric encryption built on Learning With
//! Errors.
//!
//! One ciphertext carries `m` independent message streams, one per
//! recipient, and each recipient decrypts only its own row with its own
//! secret vector. The crate also contains a noise-tolerant codec for
//! grayscale images and a statistical harness for the scheme's empirically
//! checkable security properties.

pub mod cli;
pub mod codec;
pub mod error;
pub mod field;
pub mod mkmr;
pub mod prm;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use field::{FieldElement, FieldParams};
pub use mkmr::{
    decrypt_all, decrypt_recipient, encrypt, keygen, setup, setup_with, Ciphertext, MessageMatrix, Overrides,
    RecipientKey, SchemeParams,
};
pub use prm::{SecretKeyMatrix, StateVector};
pub use sampler::{GaussianSpec, Seed};
