//! Ready-made scenarios: the porter (alone and with two neighbours),
//! Conway's Game of Life, and the excuse-writing agent.

pub mod excuse;
pub mod generator;
pub mod gol;
pub mod porter;

pub use generator::{GeneratorError, HttpGenerator, TextGenerator};
