//! Compiles the guide's snippets as doc-tests so they stay in sync with the
//! library.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/jets.md")]
pub mod jets {}
#[doc = include_str!("../../../book/src/forms.md")]
pub mod forms {}
#[doc = include_str!("../../../book/src/hopf.md")]
pub mod hopf {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/lcr.md")]
pub mod lcr {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
