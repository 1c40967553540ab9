//! Guide chapters compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/affinity.md")]
pub mod affinity {}

#[doc = include_str!("../../../book/src/exponential_families.md")]
pub mod exponential_families {}

#[doc = include_str!("../../../book/src/testing.md")]
pub mod testing {}

#[doc = include_str!("../../../book/src/concentration.md")]
pub mod concentration {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
