#![allow(dead_code)]

pub mod checks;
pub mod exterior;
pub mod ma2;
pub mod problems;
