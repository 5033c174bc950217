//! Physical parameters and the vibrational energy ladders of each dressed manifold.
//!
//! Each dressed state `|n, ±⟩` sees a lattice whose depth is shifted by the
//! light shift `±√n g₀`, so its centre-of-mass motion obeys a Mathieu equation
//! with parameter `q_{n,±} = V₀ ± √n g₀ / E_R` (V₀ in recoil units, g₀ and
//! E_R in units of γ). The ground manifold uses `q₀ = V₀`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mathieu::{self, MathieuMode};

/// How centre-of-mass motion is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Harmonic expansion of each well.
    Sho,
    /// Full periodic Mathieu eigenstates.
    Mathieu,
    /// No motion: unit Franck–Condon factors and a single vibrational channel.
    Stationary,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sho => "sho",
            Mode::Mathieu => "mathieu",
            Mode::Stationary => "stationary",
        })
    }
}

/// Everything that defines one simulation. Rates are in units of γ,
/// the lattice depth in units of E_R, and E_R itself in units of ħγ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSystem {
    pub g0: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub v0: f64,
    /// Weak-field drive amplitude Y.
    pub drive: f64,
    /// Width of the initial centre-of-mass Gaussian in units of the ground-state width.
    pub sigma: f64,
    pub mode: Mode,
    pub l_max: usize,
    /// Recoil energy E_R in units of ħγ.
    pub recoil: f64,
}

impl Default for LatticeSystem {
    fn default() -> Self {
        Self::canonical()
    }
}

impl LatticeSystem {
    /// g/γ = 1, κ/γ = 1.6 in a 20 E_R lattice.
    pub fn canonical() -> Self {
        Self {
            g0: 1.0,
            kappa: 1.6,
            gamma: 1.0,
            v0: 20.0,
            drive: 1e-3,
            sigma: 1.0,
            mode: Mode::Mathieu,
            l_max: 12,
            recoil: 1.0,
        }
    }

    /// A motionless atom with the given rates.
    pub fn stationary(g0: f64, kappa: f64, gamma: f64) -> Self {
        Self { g0, kappa, gamma, mode: Mode::Stationary, l_max: 0, ..Self::canonical() }
    }

    /// Every violated invariant, one message each.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut finite = |name: &str, v: f64| {
            if !v.is_finite() {
                out.push(format!("{name} must be finite, got {v}"));
                false
            } else {
                true
            }
        };
        let ok = [
            ("g0", self.g0),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("v0", self.v0),
            ("drive", self.drive),
            ("sigma", self.sigma),
            ("recoil", self.recoil),
        ]
        .map(|(n, v)| finite(n, v));
        if ok[0] && self.g0 < 0.0 {
            out.push(format!("g0 must be non-negative, got {}", self.g0));
        }
        for (i, name, v) in [(1, "kappa", self.kappa), (2, "gamma", self.gamma), (4, "drive", self.drive), (5, "sigma", self.sigma), (6, "recoil", self.recoil)] {
            if ok[i] && v <= 0.0 {
                out.push(format!("{name} must be positive, got {v}"));
            }
        }
        if ok[3] && self.v0 < 0.0 {
            out.push(format!("v0 must be non-negative, got {}", self.v0));
        }
        if self.mode == Mode::Sho && ok[0] && ok[3] && ok[6] && self.recoil > 0.0 {
            let shallowest = self.v0 - 2f64.sqrt() * self.g0 / self.recoil;
            if shallowest <= 0.0 {
                out.push(format!(
                    "sho mode needs every dressed well to be bound: v0 - sqrt(2) g0 / recoil = {shallowest}"
                ));
            }
        }
        if self.mode == Mode::Stationary && self.l_max != 0 {
            out.push(format!("stationary mode uses a single vibrational channel, got l_max = {}", self.l_max));
        }
        if self.l_max > 200 {
            out.push(format!("l_max = {} is beyond the supported range (200)", self.l_max));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.diagnostics().as_slice() {
            [] => Ok(()),
            msgs => Err(invalid(msgs.join("; "))),
        }
    }

    pub fn channels(&self) -> usize {
        self.l_max + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    Ground,
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Ground => 0.0,
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// `(n, l, branch)` label of a dressed level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DressedLevelIndex {
    pub n: usize,
    pub l: usize,
    pub branch: Branch,
}

impl DressedLevelIndex {
    pub fn new(n: usize, l: usize, branch: Branch) -> Result<Self> {
        match (n, branch) {
            (0, Branch::Ground) | (1..=2, Branch::Plus | Branch::Minus) => Ok(Self { n, l, branch }),
            (0, _) => Err(invalid("the n = 0 manifold only has the ground branch")),
            (1..=2, Branch::Ground) => Err(invalid(format!("n = {n} needs a + or - branch"))),
            _ => Err(invalid(format!("excitation number {n} is outside the two-excitation hierarchy"))),
        }
    }

    pub fn ground(l: usize) -> Self {
        Self { n: 0, l, branch: Branch::Ground }
    }
}

/// Light-shifted Mathieu parameter of manifold `(n, branch)`. May be negative.
pub fn mathieu_q(sys: &LatticeSystem, n: usize, branch: Branch) -> f64 {
    if n == 0 {
        return sys.v0;
    }
    sys.v0 + branch.sign() * (n as f64).sqrt() * sys.g0 / sys.recoil
}

/// The vibrational ladder of one manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub n: usize,
    pub branch: Branch,
    pub q: f64,
    /// `E_{n,l,branch}` for `l = 0..=l_max`, units of ħγ.
    pub energies: Vec<f64>,
    /// Mathieu eigenstates (empty outside Mathieu mode).
    pub modes: Vec<MathieuMode>,
}

/// Harmonic frequency `ħΩ = 4 E_R √q` of a well with Mathieu parameter q.
pub fn sho_quantum(recoil: f64, q: f64) -> f64 {
    4.0 * recoil * q.sqrt()
}

/// Energy ladder of manifold `(n, branch)` for `l = 0..=l_max`, `n ≤ 2`.
pub fn ladder(sys: &LatticeSystem, n: usize, branch: Branch) -> Result<Ladder> {
    DressedLevelIndex::new(n, 0, branch)?;
    manifold_ladder(sys, n, branch)
}

/// Like [`ladder`] but for any excitation number, as needed by Fock-truncated
/// models that reach beyond the two-excitation hierarchy.
pub fn manifold_ladder(sys: &LatticeSystem, n: usize, branch: Branch) -> Result<Ladder> {
    if (n == 0) != (branch == Branch::Ground) {
        return Err(invalid(format!("manifold n = {n} cannot carry branch {branch:?}")));
    }
    let q = mathieu_q(sys, n, branch);
    let shift = branch.sign() * (n as f64).sqrt() * sys.g0;
    let (vib, modes) = match sys.mode {
        Mode::Mathieu => {
            let modes = mathieu::even_ladder(q, sys.l_max)?;
            (modes.iter().map(|m| sys.recoil * m.char_value).collect(), modes)
        }
        Mode::Sho => {
            if q <= 0.0 {
                return Err(invalid(format!("sho mode needs a bound well, got q = {q} for n = {n}")));
            }
            let w = sho_quantum(sys.recoil, q);
            // Harmonic levels measured from the same origin as the Mathieu values.
            ((0..=sys.l_max).map(|l| -2.0 * sys.recoil * q + w * (l as f64 + 0.5)).collect(), Vec::new())
        }
        Mode::Stationary => (vec![0.0; sys.l_max + 1], Vec::new()),
    };
    let energies: Vec<f64> = vib.into_iter().map(|e: f64| e + shift).collect();
    Ok(Ladder { n, branch, q, energies, modes })
}

/// `E_{n,l,branch}` in units of ħγ.
pub fn level_energy(sys: &LatticeSystem, idx: DressedLevelIndex) -> Result<f64> {
    let idx = DressedLevelIndex::new(idx.n, idx.l, idx.branch)?;
    if idx.l > sys.l_max {
        return Err(invalid(format!("l = {} exceeds l_max = {}", idx.l, sys.l_max)));
    }
    let shift = idx.branch.sign() * (idx.n as f64).sqrt() * sys.g0;
    let q = mathieu_q(sys, idx.n, idx.branch);
    let vib = match sys.mode {
        Mode::Mathieu => sys.recoil * mathieu::characteristic_values(q, mathieu::Parity::Even, idx.l)?[idx.l],
        Mode::Sho => {
            if q <= 0.0 {
                return Err(invalid(format!("sho mode needs a bound well, got q = {q}")));
            }
            -2.0 * sys.recoil * q + sho_quantum(sys.recoil, q) * (idx.l as f64 + 0.5)
        }
        Mode::Stationary => 0.0,
    };
    Ok(vib + shift)
}
