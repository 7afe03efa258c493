//! Bundled example models: an allosteric enzyme and a Morse oscillator.

use crate::expr::Bindings;
use crate::io::{parse_general, FormatError, LoadedGeneral};

/// A bundled model file with its default auxiliary specification.
#[derive(Debug, Clone, Copy)]
pub struct Example {
    pub name: &'static str,
    pub model: &'static str,
    pub aux: &'static str,
}

pub const ENZYME: Example = Example {
    name: "enzyme",
    model: include_str!("../assets/enzyme.json"),
    aux: include_str!("../assets/enzyme.aux.json"),
};

pub const MORSE: Example = Example {
    name: "morse",
    model: include_str!("../assets/morse.json"),
    aux: include_str!("../assets/morse.aux.json"),
};

pub const ALL: [Example; 2] = [ENZYME, MORSE];

pub fn names() -> Vec<&'static str> {
    ALL.iter().map(|e| e.name).collect()
}

pub fn find(name: &str) -> Option<Example> {
    ALL.iter().copied().find(|e| e.name == name)
}

impl Example {
    pub fn load(&self, overrides: &Bindings) -> Result<LoadedGeneral, FormatError> {
        parse_general(self.model, overrides)
    }
}
