use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four family members. Carries the two hidden bits: the group
/// bit (0 = rho-type / even weight, 1 = sigma-type / odd weight) and the
/// sign bit (0 = "+", 1 = "-").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateLabel {
    #[serde(rename = "rho+")]
    RhoPlus,
    #[serde(rename = "rho-")]
    RhoMinus,
    #[serde(rename = "sigma+")]
    SigmaPlus,
    #[serde(rename = "sigma-")]
    SigmaMinus,
}

impl StateLabel {
    /// All labels in message order `b = 0..4`.
    pub const ALL: [StateLabel; 4] = [
        StateLabel::RhoPlus,
        StateLabel::RhoMinus,
        StateLabel::SigmaPlus,
        StateLabel::SigmaMinus,
    ];

    pub fn from_bits(group_bit: u8, sign_bit: u8) -> Self {
        match (group_bit & 1, sign_bit & 1) {
            (0, 0) => StateLabel::RhoPlus,
            (0, _) => StateLabel::RhoMinus,
            (_, 0) => StateLabel::SigmaPlus,
            _ => StateLabel::SigmaMinus,
        }
    }

    pub fn group_bit(self) -> u8 {
        match self {
            StateLabel::RhoPlus | StateLabel::RhoMinus => 0,
            StateLabel::SigmaPlus | StateLabel::SigmaMinus => 1,
        }
    }

    pub fn sign_bit(self) -> u8 {
        match self {
            StateLabel::RhoPlus | StateLabel::SigmaPlus => 0,
            StateLabel::RhoMinus | StateLabel::SigmaMinus => 1,
        }
    }

    /// `(-1)^sign_bit`.
    pub fn sign(self) -> i8 {
        1 - 2 * self.sign_bit() as i8
    }

    /// Hidden message `b = 2 * group_bit + sign_bit`.
    pub fn message(self) -> u8 {
        2 * self.group_bit() + self.sign_bit()
    }

    pub fn from_message(b: u8) -> Result<Self> {
        if b > 3 {
            return Err(Error::Domain(format!("message {b} is not two bits")));
        }
        Ok(Self::from_bits(b >> 1, b & 1))
    }

    /// The Bell label with the same bit pair, i.e. the two-qubit member of
    /// the same algebra.
    pub fn as_bell(self) -> BellLabel {
        BellLabel::from_bits(self.group_bit(), self.sign_bit())
    }

    pub fn name(self) -> &'static str {
        match self {
            StateLabel::RhoPlus => "rho+",
            StateLabel::RhoMinus => "rho-",
            StateLabel::SigmaPlus => "sigma+",
            StateLabel::SigmaMinus => "sigma-",
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rho+" | "ρ+" | "rho_plus" => Ok(StateLabel::RhoPlus),
            "rho-" | "ρ-" | "ρ−" | "rho_minus" => Ok(StateLabel::RhoMinus),
            "sigma+" | "σ+" | "sigma_plus" => Ok(StateLabel::SigmaPlus),
            "sigma-" | "σ-" | "σ−" | "sigma_minus" => Ok(StateLabel::SigmaMinus),
            other => Err(Error::Parse(format!(
                "unknown label {other:?} (expected rho+, rho-, sigma+ or sigma-)"
            ))),
        }
    }
}

/// A Bell state: flip bit (0 = Phi, 1 = Psi) and phase bit (0 = "+", 1 = "-").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    pub fn from_bits(flip_bit: u8, phase_bit: u8) -> Self {
        match (flip_bit & 1, phase_bit & 1) {
            (0, 0) => BellLabel::PhiPlus,
            (0, _) => BellLabel::PhiMinus,
            (_, 0) => BellLabel::PsiPlus,
            _ => BellLabel::PsiMinus,
        }
    }

    pub fn flip_bit(self) -> u8 {
        match self {
            BellLabel::PhiPlus | BellLabel::PhiMinus => 0,
            BellLabel::PsiPlus | BellLabel::PsiMinus => 1,
        }
    }

    pub fn phase_bit(self) -> u8 {
        match self {
            BellLabel::PhiPlus | BellLabel::PsiPlus => 0,
            BellLabel::PhiMinus | BellLabel::PsiMinus => 1,
        }
    }

    /// Amplitudes over `|00>, |01>, |10>, |11>`.
    pub fn amplitudes(self) -> [Complex64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = if self.phase_bit() == 0 { h } else { -h };
        let z = Complex64::new(0.0, 0.0);
        if self.flip_bit() == 0 {
            [Complex64::new(h, 0.0), z, z, Complex64::new(s, 0.0)]
        } else {
            [z, Complex64::new(h, 0.0), Complex64::new(s, 0.0), z]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Label of the state fed by `label ⊗ bell` in the one-step recursion:
/// bitwise XOR of (group, sign) with (flip, phase).
pub fn compose(label: StateLabel, bell: BellLabel) -> StateLabel {
    StateLabel::from_bits(
        label.group_bit() ^ bell.flip_bit(),
        label.sign_bit() ^ bell.phase_bit(),
    )
}

/// The full 4x4 composition table, rows indexed by state label and columns
/// by Bell label, both in `ALL` order.
pub fn composition_table() -> [[StateLabel; 4]; 4] {
    let mut table = [[StateLabel::RhoPlus; 4]; 4];
    for (i, &l) in StateLabel::ALL.iter().enumerate() {
        for (j, &b) in BellLabel::ALL.iter().enumerate() {
            table[i][j] = compose(l, b);
        }
    }
    table
}
