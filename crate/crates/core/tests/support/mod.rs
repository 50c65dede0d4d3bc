#![allow(dead_code)]

pub mod cli;
pub mod stub;
pub mod wup_oracle;
