//! Rate conventions shared by the amplitude hierarchy and the master-equation
//! oracle.
//!
//! Time is measured in units of 1/γ and energies in units of ħγ. The cavity
//! rate κ is the *field* decay rate, so the transmitted photon flux is
//! `2κ⟨a†a⟩`. The spontaneous emission rate γ is the *population* decay rate,
//! so the atomic dipole decays at γ/2 and the fluorescent flux is `γ⟨σ₊σ₋⟩`.
//! Both modules take their Lindblad channels from the functions below, which is
//! the only place these factors of two live.

/// Damping rate of a single cavity-photon amplitude.
pub fn field_amplitude_decay(kappa: f64) -> f64 {
    kappa
}

/// Damping rate of the atomic excited-state amplitude.
pub fn dipole_amplitude_decay(gamma: f64) -> f64 {
    0.5 * gamma
}

/// Squared prefactor of the cavity jump operator `√(2κ) a`.
pub fn cavity_jump_rate(kappa: f64) -> f64 {
    2.0 * kappa
}

/// Squared prefactor of the fluorescence jump operator `√γ σ₋`.
pub fn fluorescence_jump_rate(gamma: f64) -> f64 {
    gamma
}

/// Damping of a bare amplitude with `photons` cavity quanta and the atom in
/// the excited state if `excited`.
pub fn bare_amplitude_decay(kappa: f64, gamma: f64, photons: usize, excited: bool) -> f64 {
    photons as f64 * field_amplitude_decay(kappa)
        + if excited { dipole_amplitude_decay(gamma) } else { 0.0 }
}
