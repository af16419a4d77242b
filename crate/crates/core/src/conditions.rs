//! The 2 × 4 within-subject design: listening condition × background noise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// Congruent audio-visual.
    AV,
    /// Audio only.
    A,
    /// Visual only.
    V,
    /// Masked lips.
    ML,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Condition::AV, Condition::A, Condition::V, Condition::ML];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::AV => "AV",
            Condition::A => "A",
            Condition::V => "V",
            Condition::ML => "ML",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "AV" => Ok(Condition::AV),
            "A" => Ok(Condition::A),
            "V" => Ok(Condition::V),
            "ML" => Ok(Condition::ML),
            other => Err(Error::invalid(format!("unknown condition tag '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Noise {
    Noise,
    Quiet,
}

impl Noise {
    pub const ALL: [Noise; 2] = [Noise::Noise, Noise::Quiet];

    pub fn as_str(self) -> &'static str {
        match self {
            Noise::Noise => "noise",
            Noise::Quiet => "quiet",
        }
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Noise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "noise" => Ok(Noise::Noise),
            "quiet" => Ok(Noise::Quiet),
            other => Err(Error::invalid(format!("unknown noise tag '{other}'"))),
        }
    }
}

/// One cell of the design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub condition: Condition,
    pub noise: Noise,
}

impl Cell {
    pub fn new(condition: Condition, noise: Noise) -> Self {
        Self { condition, noise }
    }

    /// All eight cells, noise-major.
    pub fn all() -> Vec<Cell> {
        Noise::ALL
            .iter()
            .flat_map(|&n| Condition::ALL.iter().map(move |&c| Cell::new(c, n)))
            .collect()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.condition, self.noise)
    }
}
