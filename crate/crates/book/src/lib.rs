//! The guide's chapters as modules, so that `cargo test` compiles and runs
//! every Rust listing in `book/src`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/policies.md")]
pub mod policies {}

#[doc = include_str!("../../../book/src/estimators.md")]
pub mod estimators {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
