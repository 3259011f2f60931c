//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod bayes;
pub mod games;
pub mod hp;
pub mod lp_cases;
