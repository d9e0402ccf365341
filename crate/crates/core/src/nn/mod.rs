//! Numerical foundation: a dense tensor type and reverse-mode tape autodiff.

mod tape;
mod tensor;

pub use tape::{AttnMask, Grads, Tape, Var};
pub use tensor::{Real, Tensor};
