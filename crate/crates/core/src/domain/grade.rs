use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Letter grade on the five-point scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
    E,
    F,
}

/// Lower bounds (inclusive) of each passing band, best first.
const BANDS: [(f64, Grade); 5] = [
    (70.0, Grade::A),
    (60.0, Grade::B),
    (50.0, Grade::C),
    (45.0, Grade::D),
    (40.0, Grade::E),
];

pub fn grade_of(total: f64) -> Result<Grade, ValidationError> {
    if !(0.0..=100.0).contains(&total) {
        return Err(ValidationError::ScoreOutOfRange);
    }
    Ok(BANDS
        .iter()
        .find(|(floor, _)| total >= *floor)
        .map_or(Grade::F, |(_, grade)| *grade))
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self {
            Grade::A => "A",
            Grade::B => "B",
            Grade::C => "C",
            Grade::D => "D",
            Grade::E => "E",
            Grade::F => "F",
        };
        f.write_str(letter)
    }
}
