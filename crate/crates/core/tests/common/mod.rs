#![allow(dead_code)]

pub mod conway;
pub mod strategies;
