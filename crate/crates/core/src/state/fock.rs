use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How the photon Fock space is cut off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FockScheme {
    /// Every mode independently holds `0..=cap` photons.
    PerMode,
    /// At most `cap` photons in total, each mode holding at most one.
    TotalExcitation,
}

/// Truncated Fock sector for `modes` photon modes.
///
/// Total-excitation sectors are ordered vacuum, then one-photon states
/// `|1_α⟩` by mode, then two-photon states `|1_α 1_β⟩` (α < β) in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockTruncation {
    pub scheme: FockScheme,
    pub cap: usize,
    pub modes: usize,
}

impl FockTruncation {
    pub fn per_mode(cap: usize, modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(invalid("modes", "need at least one photon mode"));
        }
        Ok(Self { scheme: FockScheme::PerMode, cap, modes })
    }

    pub fn single(cap: usize) -> Self {
        Self { scheme: FockScheme::PerMode, cap, modes: 1 }
    }

    pub fn total_excitation(cap: usize, modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(invalid("modes", "need at least one photon mode"));
        }
        if cap > 2 {
            return Err(invalid("cap", "total-excitation sectors are supported up to two photons"));
        }
        Ok(Self { scheme: FockScheme::TotalExcitation, cap, modes })
    }

    pub fn dim(&self) -> usize {
        match self.scheme {
            FockScheme::PerMode => (self.cap + 1).pow(self.modes as u32),
            FockScheme::TotalExcitation => {
                let m = self.modes;
                let mut d = 1;
                if self.cap >= 1 {
                    d += m;
                }
                if self.cap >= 2 {
                    d += m * (m - 1) / 2;
                }
                d
            }
        }
    }

    /// Index of the two-photon state `|1_a 1_b⟩` (total-excitation sectors, a ≠ b).
    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let m = self.modes;
        1 + m + a * (2 * m - a - 1) / 2 + (b - a - 1)
    }

    /// Photon occupations of sector state `index`.
    pub fn occupations(&self, index: usize) -> Vec<usize> {
        let m = self.modes;
        let mut occ = vec![0; m];
        match self.scheme {
            FockScheme::PerMode => {
                let mut i = index;
                for k in (0..m).rev() {
                    occ[k] = i % (self.cap + 1);
                    i /= self.cap + 1;
                }
            }
            FockScheme::TotalExcitation => {
                if index == 0 {
                } else if index <= m {
                    occ[index - 1] = 1;
                } else {
                    let mut rest = index - 1 - m;
                    for a in 0..m {
                        let row = m - a - 1;
                        if rest < row {
                            occ[a] = 1;
                            occ[a + 1 + rest] = 1;
                            break;
                        }
                        rest -= row;
                    }
                }
            }
        }
        occ
    }

    pub fn total_photons(&self, index: usize) -> usize {
        self.occupations(index).iter().sum()
    }
}
