//! The chapters of the guide in `book/src`, compiled so that their Rust
//! listings run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/setting.md")]
pub mod setting {}

#[doc = include_str!("../../../book/src/special-functions.md")]
pub mod special_functions {}

#[doc = include_str!("../../../book/src/heat.md")]
pub mod heat {}

#[doc = include_str!("../../../book/src/hankel.md")]
pub mod hankel {}

#[doc = include_str!("../../../book/src/hormander.md")]
pub mod hormander {}

#[doc = include_str!("../../../book/src/imaginary-powers.md")]
pub mod imaginary_powers {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
