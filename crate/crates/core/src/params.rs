use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};

/// Model parameters `H = Δσz + ω a†a + g σx (a + a†)`, stored normalized so
/// that `omega == 1` and `delta`, `g` are in units of the mode frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiParams {
    pub delta: f64,
    pub g: f64,
    pub omega: f64,
}

impl RabiParams {
    /// Builds normalized parameters from physical values.
    pub fn new(delta: f64, g: f64, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(RabiError::InvalidParams(format!("omega must be positive, got {omega}")));
        }
        Self::normalized(delta / omega, g / omega)
    }

    /// Parameters already expressed in units of ω.
    pub fn normalized(delta: f64, g: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(RabiError::InvalidParams(format!("delta must be positive, got {delta}")));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(RabiError::InvalidParams(format!("g must be non-negative, got {g}")));
        }
        Ok(Self { delta, g, omega: 1.0 })
    }

    /// Dimensionless coupling `λ = g √(2 / (ω Δ))`.
    pub fn lambda(&self) -> f64 {
        self.g * (2.0 / (self.omega * self.delta)).sqrt()
    }

    pub fn phase(&self) -> Phase {
        Phase::from_lambda(self.lambda())
    }
}

/// Parity sector label; `Plus` selects `G₊`, `Minus` selects `G₋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Plus, Parity::Minus];

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Plus => "plus",
            Parity::Minus => "minus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plus" => Some(Parity::Plus),
            "minus" => Some(Parity::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spin projection a photonic branch is attached to, `|±⟩ = (|↑⟩ ± |↓⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Normal,
    Superradiant,
}

impl Phase {
    pub fn from_lambda(lambda: f64) -> Self {
        if lambda < 1.0 {
            Phase::Normal
        } else {
            Phase::Superradiant
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Superradiant => "superradiant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "normal" => Some(Phase::Normal),
            "superradiant" => Some(Phase::Superradiant),
            _ => None,
        }
    }
}
