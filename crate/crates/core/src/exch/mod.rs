//! Exchangeable laws on finite alphabets in type-class form.
//!
//! Only finite alphabets are supported: every law is a finite table indexed
//! by the types of length `n`.

mod block;
mod joint;
mod law;
mod types;

pub use block::BlockJoint;
pub use joint::{GenericJoint, LetterDist};
pub use law::{is_exchangeable, symmetrize, ExchangeableLaw, Tower};
pub(crate) use law::{conditional_component_from, single_letter_of};
pub use types::{enumerate_types, multiplicity, Alphabet, TypeSpace, TypeVector, MAX_LEN};
