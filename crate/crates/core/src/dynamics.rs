//! The weak-field amplitude hierarchy: generator, steady state, collapses and
//! post-collapse evolution.
//!
//! The ground amplitudes `D(0,l,g)` are pinned to the initial weights. The
//! excited amplitudes form a vector of four sectors of `l_max + 1` channels
//! each. In the dressed frame the sectors are `|1,+⟩, |1,−⟩, |2,+⟩, |2,−⟩`
//! with `|n,±⟩ = (|g,n⟩ ± |e,n−1⟩)/√2`; in the bare frame they are
//! `|g,1⟩, |e,0⟩, |g,2⟩, |e,1⟩`. Every channel `l` is written in the frame
//! rotating with the ground level `E_{0,l}`, so the drive is time independent.
//!
//! The equation of motion is `Ḋ = (M + Y B) D + Y b`, where `M` holds the
//! coherent dynamics and damping, `B` the drive from `n = 1` into `n = 2`, and
//! `b` the drive out of the pinned ground amplitudes.

use std::collections::HashMap;
use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dressed_lattice::{ladder, Branch, Ladder, LatticeSystem};
use crate::error::{invalid, Error, Result};
use crate::overlaps::{fc_table_between, gaussian_weights_on, FranckCondonTable, InitialWeights};
use crate::units;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// The dressed manifolds in sector order.
pub const DRESSED_SECTORS: [(usize, Branch); 4] =
    [(1, Branch::Plus), (1, Branch::Minus), (2, Branch::Plus), (2, Branch::Minus)];

/// Everything about the lattice that the hierarchy needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub sys: LatticeSystem,
    pub ground: Ladder,
    /// Ladders of the dressed manifolds, in [`DRESSED_SECTORS`] order.
    pub manifolds: Vec<Ladder>,
    /// Franck–Condon tables ground → dressed manifold, same order.
    pub fc: Vec<FranckCondonTable>,
    pub weights: InitialWeights,
}

impl Spectrum {
    pub fn compute(sys: &LatticeSystem) -> Result<Self> {
        sys.validate()?;
        let ground = ladder(sys, 0, Branch::Ground)?;
        let manifolds = DRESSED_SECTORS.iter().map(|&(n, b)| ladder(sys, n, b)).collect::<Result<Vec<_>>>()?;
        let fc = manifolds.iter().map(|m| fc_table_between(sys, &ground, m)).collect::<Result<Vec<_>>>()?;
        let weights = gaussian_weights_on(sys, &ground)?;
        Ok(Self { sys: sys.clone(), ground, manifolds, fc, weights })
    }

    /// Coherent-evolution block of manifold number `sector` (see [`coherent_block`]).
    pub fn coherent_block(&self, sector: usize) -> DMatrix<f64> {
        coherent_block(&self.ground, &self.manifolds[sector], &self.fc[sector], self.sys.g0)
    }
}

/// Frequencies of manifold `(n, b)` in the ground-rotating frame:
///
/// `h = diag(E_{n,l,b} − E_{0,l} − b√n g₀) + b√n g₀ K`, with `K` the
/// symmetrised Franck–Condon table. The vibrational part comes from the full
/// dressed energies; the atom–cavity splitting enters through the
/// Franck–Condon–dressed coupling `g₀ FC`.
pub fn coherent_block(ground: &Ladder, target: &Ladder, fc: &FranckCondonTable, g0: f64) -> DMatrix<f64> {
    let d = ground.energies.len();
    let split = target.branch.sign() * (target.n as f64).sqrt() * g0;
    let f = fc.to_matrix();
    let k = (&f + f.transpose()) * 0.5;
    let mut h = k * split;
    for l in 0..d {
        h[(l, l)] += target.energies[l] - ground.energies[l] - split;
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Dressed,
    Bare,
}

/// Bare sectors: the physical amplitudes `C_{photons, internal, l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BareSector {
    /// `|g, 1⟩`
    G1,
    /// `|e, 0⟩`
    E0,
    /// `|g, 2⟩`
    G2,
    /// `|e, 1⟩`
    E1,
}

impl BareSector {
    fn slot(self) -> usize {
        match self {
            BareSector::G1 => 0,
            BareSector::E0 => 1,
            BareSector::G2 => 2,
            BareSector::E1 => 3,
        }
    }
}

/// Amplitudes of the weak-field state at one delay.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub frame: Frame,
    pub tau: f64,
    pub channels: usize,
    /// `D(0, l, g)`.
    pub ground: DVector<C64>,
    /// The four excited sectors, concatenated.
    pub excited: DVector<C64>,
}

fn to_bare(frame: Frame, d: usize, v: &DVector<C64>) -> DVector<C64> {
    match frame {
        Frame::Bare => v.clone(),
        Frame::Dressed => {
            let mut out = DVector::zeros(4 * d);
            for n in 0..2 {
                for l in 0..d {
                    let (p, m) = (v[(2 * n) * d + l], v[(2 * n + 1) * d + l]);
                    out[(2 * n) * d + l] = (p + m) / SQRT_2;
                    out[(2 * n + 1) * d + l] = (p - m) / SQRT_2;
                }
            }
            out
        }
    }
}

/// The dressed/bare change of basis is its own inverse.
fn from_bare(frame: Frame, d: usize, v: &DVector<C64>) -> DVector<C64> {
    to_bare(frame, d, v)
}

impl AmplitudeState {
    /// Physical amplitudes of one bare sector, whatever the storage frame.
    pub fn bare(&self, sector: BareSector) -> Vec<C64> {
        let d = self.channels;
        let s = sector.slot();
        let n = s / 2;
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        match self.frame {
            Frame::Bare => self.excited.rows(s * d, d).iter().copied().collect(),
            Frame::Dressed => (0..d)
                .map(|l| (self.excited[(2 * n) * d + l] + sign * self.excited[(2 * n + 1) * d + l]) / SQRT_2)
                .collect(),
        }
    }

    /// Dressed amplitude `D(n, l, branch)`.
    pub fn dressed(&self, n: usize, l: usize, branch: Branch) -> Result<C64> {
        let d = self.channels;
        if l >= d {
            return Err(invalid(format!("l = {l} outside 0..{d}")));
        }
        if n == 0 {
            return if branch == Branch::Ground { Ok(self.ground[l]) } else { Err(invalid("n = 0 is the ground branch")) };
        }
        let sector = DRESSED_SECTORS
            .iter()
            .position(|&s| s == (n, branch))
            .ok_or_else(|| invalid(format!("no sector ({n}, {branch:?})")))?;
        let v = to_bare(self.frame, d, &self.excited);
        let dressed = from_bare(Frame::Dressed, d, &v);
        Ok(dressed[sector * d + l])
    }

    /// Σ_l |C(sector, l)|².
    pub fn population(&self, sector: BareSector) -> f64 {
        self.bare(sector).iter().map(|c| c.norm_sqr()).sum()
    }

    /// Mean photon number through second order in the amplitudes.
    pub fn photon_number(&self) -> f64 {
        self.population(BareSector::G1) + self.population(BareSector::E1) + 2.0 * self.population(BareSector::G2)
    }

    /// ‖D‖ including the ground amplitudes.
    pub fn norm(&self) -> f64 {
        (self.ground.norm_squared() + self.excited.norm_squared()).sqrt()
    }

    pub fn in_frame(&self, frame: Frame) -> AmplitudeState {
        if frame == self.frame {
            return self.clone();
        }
        let bare = to_bare(self.frame, self.channels, &self.excited);
        AmplitudeState { frame, excited: from_bare(frame, self.channels, &bare), ..self.clone() }
    }
}

/// `Ḋ = (M + Y B) D + Y b` for one frame.
#[derive(Debug, Clone)]
pub struct Generator {
    pub frame: Frame,
    pub channels: usize,
    pub drive: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// Coherent evolution and damping; independent of Y.
    pub m: DMatrix<C64>,
    /// `n = 1 → 2` drive coupling, to be multiplied by Y.
    pub coupling: DMatrix<C64>,
    /// Drive out of the ground amplitudes, to be multiplied by Y.
    pub source: DVector<C64>,
    pub weights: Vec<f64>,
}

impl Generator {
    /// `M + Y B`.
    pub fn full(&self) -> DMatrix<C64> {
        &self.m + &self.coupling * C64::from(self.drive)
    }

    pub fn dim(&self) -> usize {
        4 * self.channels
    }
}

/// `⟨2,b₂| a† |1,b₁⟩`.
fn dressed_raise(b2: Branch, b1: Branch) -> f64 {
    0.5 * (SQRT_2 + b2.sign() * b1.sign())
}

/// Builds the generator. The dressed frame is assembled from the dressed
/// splittings and their Γ matrix; the bare frame from the physical rates of
/// each bare state and the `a†` matrix elements `√n`. The two are related by
/// the dressed/bare change of basis, which the tests exploit.
pub fn build_generator(spec: &Spectrum, frame: Frame) -> Generator {
    let sys = &spec.sys;
    let d = sys.l_max + 1;
    let dim = 4 * d;
    let (kappa, gamma) = (sys.kappa, sys.gamma);
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let mut coupling = DMatrix::<C64>::zeros(dim, dim);
    let mut source = DVector::<C64>::zeros(dim);
    let h: Vec<DMatrix<f64>> = (0..4).map(|s| spec.coherent_block(s)).collect();
    let i = C64::i();
    match frame {
        Frame::Dressed => {
            for s in 0..4 {
                for a in 0..d {
                    for b in 0..d {
                        m[(s * d + a, s * d + b)] = -i * h[s][(a, b)];
                    }
                }
            }
            for n in 1..=2usize {
                let dg = units::bare_amplitude_decay(kappa, gamma, n, false);
                let de = units::bare_amplitude_decay(kappa, gamma, n - 1, true);
                let (plus, minus) = (2 * (n - 1), 2 * (n - 1) + 1);
                for l in 0..d {
                    let (p, q) = (plus * d + l, minus * d + l);
                    m[(p, p)] -= C64::from(0.5 * (dg + de));
                    m[(q, q)] -= C64::from(0.5 * (dg + de));
                    m[(p, q)] -= C64::from(0.5 * (dg - de));
                    m[(q, p)] -= C64::from(0.5 * (dg - de));
                }
            }
            for (s2, &(_, b2)) in DRESSED_SECTORS.iter().enumerate().skip(2) {
                for (s1, &(_, b1)) in DRESSED_SECTORS.iter().enumerate().take(2) {
                    for l in 0..d {
                        coupling[(s2 * d + l, s1 * d + l)] = C64::from(-dressed_raise(b2, b1));
                    }
                }
            }
            for s in 0..2 {
                for l in 0..d {
                    source[s * d + l] = C64::from(-spec.weights.weights[l] / SQRT_2);
                }
            }
        }
        Frame::Bare => {
            // For manifold n the g-state is |g,n⟩ and the e-state |e,n−1⟩.
            for n in 1..=2usize {
                let (hp, hm) = (&h[2 * (n - 1)], &h[2 * (n - 1) + 1]);
                let (gs, es) = (2 * (n - 1), 2 * (n - 1) + 1);
                for a in 0..d {
                    for b in 0..d {
                        let diag = 0.5 * (hp[(a, b)] + hm[(a, b)]);
                        let off = 0.5 * (hp[(a, b)] - hm[(a, b)]);
                        m[(gs * d + a, gs * d + b)] = -i * diag;
                        m[(es * d + a, es * d + b)] = -i * diag;
                        m[(gs * d + a, es * d + b)] = -i * off;
                        m[(es * d + a, gs * d + b)] = -i * off;
                    }
                    m[(gs * d + a, gs * d + a)] -= C64::from(units::bare_amplitude_decay(kappa, gamma, n, false));
                    m[(es * d + a, es * d + a)] -= C64::from(units::bare_amplitude_decay(kappa, gamma, n - 1, true));
                }
            }
            // H_drive = iY(a − a†): Ċ = −Y a† C from the a† half.
            for l in 0..d {
                coupling[(2 * d + l, l)] = C64::from(-SQRT_2); // |g,1⟩ → |g,2⟩
                coupling[(3 * d + l, d + l)] = C64::from(-1.0); // |e,0⟩ → |e,1⟩
                source[l] = C64::from(-spec.weights.weights[l]); // |g,0⟩ → |g,1⟩
            }
        }
    }
    Generator {
        frame,
        channels: d,
        drive: sys.drive,
        kappa,
        gamma,
        m,
        coupling,
        source,
        weights: spec.weights.weights.clone(),
    }
}

fn solve_block(a: DMatrix<C64>, rhs: DVector<C64>, block: &'static str) -> Result<DVector<C64>> {
    let scale = a.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let lu = a.lu();
    let u = lu.u();
    let pivot = (0..u.nrows()).map(|k| u[(k, k)].norm()).fold(f64::INFINITY, f64::min);
    if !(pivot > 1e-13 * scale) {
        return Err(Error::SingularBlock { block, detail: format!("smallest pivot {pivot:e} against scale {scale:e}") });
    }
    lu.solve(&rhs).ok_or_else(|| Error::SingularBlock { block, detail: "LU solve failed".into() })
}

/// The Ḋ = 0 fixed point, solved one excitation order at a time.
pub fn steady_state(gen: &Generator) -> Result<AmplitudeState> {
    let d = gen.channels;
    let y = C64::from(gen.drive);
    let half = 2 * d;
    let m11 = gen.m.view((0, 0), (half, half)).into_owned();
    let b1: DVector<C64> = gen.source.rows(0, half).into_owned();
    let d1 = solve_block(m11, -(b1 * y), "n = 1")?;
    let m22 = gen.m.view((half, half), (half, half)).into_owned();
    let b21 = gen.coupling.view((half, 0), (half, half)).into_owned();
    let d2 = solve_block(m22, -(b21 * &d1) * y, "n = 2")?;
    let mut excited = DVector::zeros(4 * d);
    excited.rows_mut(0, half).copy_from(&d1);
    excited.rows_mut(half, half).copy_from(&d2);
    Ok(AmplitudeState {
        frame: gen.frame,
        tau: 0.0,
        channels: d,
        ground: DVector::from_iterator(d, gen.weights.iter().map(|&w| C64::from(w))),
        excited,
    })
}

/// Which photodetection conditioned the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollapseKind {
    /// Transmitted photon, jump operator `a`.
    T,
    /// Fluorescent photon, jump operator `σ₋`.
    F,
}

impl CollapseKind {
    pub fn name(self) -> &'static str {
        match self {
            CollapseKind::T => "transmission",
            CollapseKind::F => "fluorescence",
        }
    }
}

/// Photon fluxes `2κ⟨a†a⟩` and `γ⟨σ₊σ₋⟩` at leading order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionRates {
    pub transmission: f64,
    pub fluorescence: f64,
}

impl EmissionRates {
    pub fn of(state: &AmplitudeState, kappa: f64, gamma: f64) -> Self {
        Self {
            transmission: units::cavity_jump_rate(kappa) * state.population(BareSector::G1),
            fluorescence: units::fluorescence_jump_rate(gamma) * state.population(BareSector::E0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedState {
    pub state: AmplitudeState,
    pub kind: CollapseKind,
    /// Steady-state rate of the detection that produced this state.
    pub trigger_rate: f64,
    /// Rates of the next detections, evaluated in the collapsed state at τ = 0.
    pub emission: EmissionRates,
}

/// Applies `a` or `σ₋` to the steady state and renormalises.
///
/// The jump leaves a ground-manifold part (from `|g,1⟩` or `|e,0⟩`) and an
/// excited part one order lower in Y. The ground amplitudes are then reset to
/// the pinned weights and the excited part is divided by
/// `Z = ‖ground part‖ · e^{i arg⟨w|ground part⟩}`, so it is normalised relative
/// to a unit ground state with the same overall phase.
pub fn collapse(gen: &Generator, ss: &AmplitudeState, kind: CollapseKind) -> Result<CollapsedState> {
    let d = ss.channels;
    let (c1g, c0e, c2g, c1e) =
        (ss.bare(BareSector::G1), ss.bare(BareSector::E0), ss.bare(BareSector::G2), ss.bare(BareSector::E1));
    let (ground_part, new_g1, new_e0): (Vec<C64>, Vec<C64>, Vec<C64>) = match kind {
        // a|g,1⟩ = |g,0⟩, a|g,2⟩ = √2|g,1⟩, a|e,1⟩ = |e,0⟩
        CollapseKind::T => (c1g.clone(), c2g.iter().map(|c| c * SQRT_2).collect(), c1e.clone()),
        // σ₋|e,0⟩ = |g,0⟩, σ₋|e,1⟩ = |g,1⟩
        CollapseKind::F => (c0e.clone(), c1e.clone(), vec![ZERO; d]),
    };
    let norm = ground_part.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let proj: C64 = gen.weights.iter().zip(&ground_part).map(|(&w, c)| c * w).sum();
    // Exact zeros in one frame are rounding noise in the other, so judge
    // against the size of the whole one-excitation block.
    let scale = ss.excited.rows(0, 2 * d).norm();
    if !(norm > 1e-13 * scale) || !(proj.norm() > 1e-13 * scale) {
        return Err(Error::DegenerateCollapse { kind: kind.name() });
    }
    let z = C64::from_polar(norm, proj.arg());
    let mut bare = DVector::zeros(4 * d);
    for l in 0..d {
        bare[l] = new_g1[l] / z;
        bare[d + l] = new_e0[l] / z;
    }
    let state = AmplitudeState {
        frame: ss.frame,
        tau: 0.0,
        channels: d,
        ground: ss.ground.clone(),
        excited: from_bare(ss.frame, d, &bare),
    };
    let rates = EmissionRates::of(ss, gen.kappa, gen.gamma);
    let trigger_rate = match kind {
        CollapseKind::T => rates.transmission,
        CollapseKind::F => rates.fluorescence,
    };
    let emission = EmissionRates::of(&state, gen.kappa, gen.gamma);
    Ok(CollapsedState { state, kind, trigger_rate, emission })
}

/// Propagates a collapsed state with `D(τ) = D_ss + e^{Aτ}(D(0) − D_ss)`,
/// `A = M + Y B`, stepping with cached exact exponentials.
pub fn evolve(gen: &Generator, ss: &AmplitudeState, start: &CollapsedState, tau_grid: &[f64]) -> Result<Vec<AmplitudeState>> {
    if tau_grid.is_empty() {
        return Ok(Vec::new());
    }
    if tau_grid[0] < 0.0 || tau_grid.iter().any(|t| !t.is_finite()) || tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("tau grid must be finite, non-negative and ascending"));
    }
    if start.state.frame != gen.frame || ss.frame != gen.frame {
        return Err(invalid("generator and states must share a frame"));
    }
    let a = gen.full();
    let mut cache: HashMap<u64, DMatrix<C64>> = HashMap::new();
    let mut step = |dt: f64| -> DMatrix<C64> {
        cache.entry(dt.to_bits()).or_insert_with(|| (&a * C64::from(dt)).exp()).clone()
    };
    // A uniform grid reuses one exponential; rounding in the grid itself is ignored.
    let n = tau_grid.len();
    let uniform_dt = if n > 2 {
        let dt = (tau_grid[n - 1] - tau_grid[0]) / (n - 1) as f64;
        let ok = tau_grid.iter().enumerate().all(|(k, t)| (t - (tau_grid[0] + k as f64 * dt)).abs() <= 1e-12 * (1.0 + t.abs()));
        ok.then_some(dt)
    } else {
        None
    };
    let mut x = &start.state.excited - &ss.excited;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(n);
    for (k, &target) in tau_grid.iter().enumerate() {
        let dt = match uniform_dt {
            Some(dt) if k > 0 => dt,
            _ => target - t,
        };
        if dt != 0.0 {
            x = step(dt) * x;
        }
        t = target;
        let excited = if target == 0.0 { start.state.excited.clone() } else { &ss.excited + &x };
        out.push(AmplitudeState { frame: gen.frame, tau: target, channels: gen.channels, ground: ss.ground.clone(), excited });
    }
    Ok(out)
}
