//! The chapters of the guide in `book/src`, compiled so their code samples
//! run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/syntax.md")]
pub mod syntax {}

#[doc = include_str!("../../../book/src/semantics.md")]
pub mod semantics {}

#[doc = include_str!("../../../book/src/sessions.md")]
pub mod sessions {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
