#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charging;
pub mod currency;
pub mod emissions;
pub mod error;
pub mod harness;
pub mod lp;
pub mod power_system_data;
pub mod scenarios;
pub mod ucp;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lp.md")]
    mod lp {}
    #[doc = include_str!("../../../book/src/dispatch.md")]
    mod dispatch {}
    #[doc = include_str!("../../../book/src/emissions.md")]
    mod emissions {}
    #[doc = include_str!("../../../book/src/charging.md")]
    mod charging {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
