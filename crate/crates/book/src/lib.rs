//! The guide under `book/src`, compiled so that its snippets run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/epidemic-model.md")]
pub mod epidemic_model {}

#[doc = include_str!("../../../book/src/binary-codec.md")]
pub mod binary_codec {}

#[doc = include_str!("../../../book/src/nn-codec.md")]
pub mod nn_codec {}

#[doc = include_str!("../../../book/src/multi-strain.md")]
pub mod multi_strain {}

#[doc = include_str!("../../../book/src/custom-codec.md")]
pub mod custom_codec {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}

#[doc = include_str!("../../../book/src/expectations.md")]
pub mod expectations {}
