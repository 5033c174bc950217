//! Brute-force verifier: the full master equation on a truncated
//! `{g, e} ⊗ Fock(0..=n_max) ⊗ vibration(0..=l_max)` space, its steady state,
//! and correlations by quantum regression.
//!
//! The Hamiltonian is assembled from the same Franck–Condon-dressed blocks as
//! the amplitude hierarchy (see [`coherent_block`]) plus the full drive
//! `iY(a − a†)`, with jump operators `√(2κ) a` and `√γ σ₋`. Nothing is
//! expanded in Y.
//!
//! Populations with n photons scale as `Y^{2n}`, which a direct dense solve
//! would bury in rounding. The density operator is therefore stored as
//! `ρ̃ = S ρ S` with `S = diag(Y^{−n})`. The map is an exact similarity
//! transform; expectation values are taken back through `S⁻¹`.
//!
//! The ground vibrational state is whatever the master equation relaxes to,
//! while the hierarchy pins it to the initial weights. The two agree when
//! vibration does not redistribute the ground population, for instance for a
//! stationary atom.

use nalgebra::{DMatrix, DVector};

use crate::correlations::{Channel, CorrelationTrace, FtDenominator, TraceKind};
use crate::dressed_lattice::{manifold_ladder, Branch, LatticeSystem};
use crate::dynamics::{coherent_block, BareSector, CollapseKind, C64};
use crate::error::{invalid, Error, Result};
use crate::overlaps::fc_table_between;
use crate::units;

/// Smallest photon cutoff accepted.
pub const MIN_PHOTONS: usize = 3;
/// Relative singular-value threshold for the Liouvillian null space.
pub const NULL_TOLERANCE: f64 = 1e-12;

/// Index bookkeeping for `|s, n, l⟩`, s = 0 (g) or 1 (e).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub n_max: usize,
    pub l_max: usize,
}

impl Basis {
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1) * (self.l_max + 1)
    }

    pub fn index(&self, excited: bool, n: usize, l: usize) -> usize {
        ((excited as usize) * (self.n_max + 1) + n) * (self.l_max + 1) + l
    }

    pub fn photons(&self, i: usize) -> usize {
        (i / (self.l_max + 1)) % (self.n_max + 1)
    }

    pub fn is_excited(&self, i: usize) -> bool {
        i / ((self.l_max + 1) * (self.n_max + 1)) == 1
    }
}

/// Operators of the truncated model, unscaled.
#[derive(Debug, Clone)]
pub struct OracleModel {
    pub sys: LatticeSystem,
    pub basis: Basis,
    pub hamiltonian: DMatrix<C64>,
    pub a: DMatrix<C64>,
    pub sigma_minus: DMatrix<C64>,
    /// Diagonal of the similarity transform, `Y^{−n}`.
    scale: Vec<f64>,
}

impl OracleModel {
    pub fn new(sys: &LatticeSystem, n_max: usize, l_max: usize) -> Result<Self> {
        let sys = LatticeSystem { l_max, ..sys.clone() };
        sys.validate()?;
        if n_max < MIN_PHOTONS {
            return Err(invalid(format!("n_max must be at least {MIN_PHOTONS}, got {n_max}")));
        }
        let basis = Basis { n_max, l_max };
        let dim = basis.dim();
        let d = l_max + 1;
        let ground = manifold_ladder(&sys, 0, Branch::Ground)?;
        let block = |n: usize, b: Branch| -> Result<DMatrix<f64>> {
            let target = manifold_ladder(&sys, n, b)?;
            let fc = fc_table_between(&sys, &ground, &target)?;
            Ok(coherent_block(&ground, &target, &fc, sys.g0))
        };
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        // Manifold n couples |g,n⟩ and |e,n−1⟩; |e,n_max⟩ keeps only the
        // diagonal part of manifold n_max + 1, whose |g⟩ partner is cut off.
        for n in 1..=n_max + 1 {
            let (hp, hm) = (block(n, Branch::Plus)?, block(n, Branch::Minus)?);
            for a in 0..d {
                for b in 0..d {
                    let diag = C64::from(0.5 * (hp[(a, b)] + hm[(a, b)]));
                    let off = C64::from(0.5 * (hp[(a, b)] - hm[(a, b)]));
                    let (ea, eb) = (basis.index(true, n - 1, a), basis.index(true, n - 1, b));
                    h[(ea, eb)] = diag;
                    if n <= n_max {
                        let (ga, gb) = (basis.index(false, n, a), basis.index(false, n, b));
                        h[(ga, gb)] = diag;
                        h[(ga, eb)] = off;
                        h[(ea, gb)] = off;
                    }
                }
            }
        }
        let mut a = DMatrix::<C64>::zeros(dim, dim);
        let mut sm = DMatrix::<C64>::zeros(dim, dim);
        for s in [false, true] {
            for n in 1..=n_max {
                for l in 0..d {
                    a[(basis.index(s, n - 1, l), basis.index(s, n, l))] = C64::from((n as f64).sqrt());
                }
            }
        }
        for n in 0..=n_max {
            for l in 0..d {
                sm[(basis.index(false, n, l), basis.index(true, n, l))] = C64::from(1.0);
            }
        }
        // H_drive = iY(a − a†)
        let ad = a.adjoint();
        h += (&a - &ad) * C64::new(0.0, sys.drive);
        let y = if sys.drive > 0.0 { sys.drive } else { 1.0 };
        let scale = (0..dim).map(|i| y.powi(-(basis.photons(i) as i32))).collect();
        Ok(Self { sys, basis, hamiltonian: h, a, sigma_minus: sm, scale })
    }

    /// `S A S⁻¹`, the left action in the scaled representation.
    fn left(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (self.scale[i] / self.scale[j]))
    }

    /// `S⁻¹ B S`, the right action in the scaled representation.
    fn right(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (self.scale[j] / self.scale[i]))
    }

    /// `S⁻¹ O S⁻¹`, so that `Tr(O ρ) = Tr(Õ ρ̃)`.
    fn observable(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / (self.scale[i] * self.scale[j]))
    }

    fn jumps(&self) -> [(f64, &DMatrix<C64>); 2] {
        [
            (units::cavity_jump_rate(self.sys.kappa), &self.a),
            (units::fluorescence_jump_rate(self.sys.gamma), &self.sigma_minus),
        ]
    }

    /// The Liouvillian acting on row-major `vec(ρ̃)`, using
    /// `vec(A X B) = (A ⊗ Bᵀ) vec(X)`.
    pub fn liouvillian(&self) -> DMatrix<C64> {
        let dim = self.basis.dim();
        let id = DMatrix::<C64>::identity(dim, dim);
        let i = C64::i();
        let h = &self.hamiltonian;
        let mut l = (self.left(h).kronecker(&id) - id.kronecker(&self.right(h).transpose())) * (-i);
        for (rate, j) in self.jumps() {
            let jd = j.adjoint();
            let jdj = &jd * j;
            let r = C64::from(rate);
            l += self.left(j).kronecker(&self.right(&jd).transpose()) * r;
            l -= self.left(&jdj).kronecker(&id) * (r * 0.5);
            l -= id.kronecker(&self.right(&jdj).transpose()) * (r * 0.5);
        }
        l
    }

    fn expect(&self, op: &DMatrix<C64>, rho: &DMatrix<C64>) -> C64 {
        (self.observable(op) * rho).trace()
    }

    fn trace(&self, rho: &DMatrix<C64>) -> f64 {
        (0..rho.nrows()).map(|i| rho[(i, i)].re / (self.scale[i] * self.scale[i])).sum()
    }
}

/// A density operator of the truncated model.
#[derive(Debug, Clone)]
pub struct TruncatedDensityOperator {
    pub basis: Basis,
    /// `ρ̃ = S ρ S`.
    scaled: DMatrix<C64>,
    scale: Vec<f64>,
    /// `|Tr ρ − 1|`.
    pub trace_residual: f64,
    /// `‖L ρ̃‖` for a steady state, 0 otherwise.
    pub liouvillian_residual: f64,
}

impl TruncatedDensityOperator {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// The physical density matrix ρ.
    pub fn matrix(&self) -> DMatrix<C64> {
        let s = &self.scale;
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.scaled[(i, j)] / (s[i] * s[j]))
    }

    /// Population of all states with `n` photons.
    pub fn photon_population(&self, n: usize) -> f64 {
        (0..self.dim())
            .filter(|&i| self.basis.photons(i) == n)
            .map(|i| self.scaled[(i, i)].re / (self.scale[i] * self.scale[i]))
            .sum()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let m = self.matrix();
        (&m - m.adjoint()).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Smallest eigenvalue of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.matrix();
        let h = (&m + m.adjoint()) * C64::from(0.5);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn to_vec(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

fn from_vec(v: &DVector<C64>, dim: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(dim, dim, v.as_slice())
}

/// Steady state of the truncated master equation.
pub fn lindblad_steady_state(model: &OracleModel) -> Result<TruncatedDensityOperator> {
    let dim = model.basis.dim();
    let l = model.liouvillian();
    let sv = l.clone().singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    let null = sv.iter().filter(|&&s| s <= NULL_TOLERANCE * top).count();
    if null != 1 {
        return Err(Error::DegenerateSteadyState { dim: null });
    }
    // Replace the first row by the trace condition Σ Y^{2n} ρ̃_ii = 1.
    let mut a = l.clone();
    let mut rhs = DVector::<C64>::zeros(dim * dim);
    for k in 0..dim * dim {
        a[(0, k)] = C64::from(0.0);
    }
    for i in 0..dim {
        a[(0, i * dim + i)] = C64::from(1.0 / (model.scale[i] * model.scale[i]));
    }
    rhs[0] = C64::from(1.0);
    let x = a.lu().solve(&rhs).ok_or(Error::DegenerateSteadyState { dim: 0 })?;
    let mut rho = from_vec(&x, dim);
    rho = (&rho + rho.adjoint()) * C64::from(0.5);
    let liouvillian_residual = (&l * to_vec(&rho)).norm();
    let out = TruncatedDensityOperator {
        basis: model.basis,
        trace_residual: (model.trace(&rho) - 1.0).abs(),
        scaled: rho,
        scale: model.scale.clone(),
        liouvillian_residual,
    };
    Ok(out)
}

/// A correlation trace from the oracle plus its bookkeeping.
#[derive(Debug, Clone)]
pub struct OracleTrace {
    pub trace: CorrelationTrace,
    /// Largest `|Tr ρ(τ) − 1|` along the conditioned propagation.
    pub max_trace_drift: f64,
}

fn jump_of(model: &OracleModel, kind: CollapseKind) -> &DMatrix<C64> {
    match kind {
        CollapseKind::T => &model.a,
        CollapseKind::F => &model.sigma_minus,
    }
}

fn measured_of(model: &OracleModel, sector: BareSector) -> &DMatrix<C64> {
    match sector {
        BareSector::G1 => &model.a,
        _ => &model.sigma_minus,
    }
}

/// Conditioned states `ρ_c(τ)` after the channel's first detection.
fn regress(
    model: &OracleModel,
    ss: &TruncatedDensityOperator,
    kind: CollapseKind,
    tau_grid: &[f64],
) -> Result<(Vec<DMatrix<C64>>, f64)> {
    if tau_grid.windows(2).any(|w| w[1] < w[0]) || tau_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(invalid("tau grid must be finite, non-negative and ascending"));
    }
    let dim = model.basis.dim();
    let j = jump_of(model, kind);
    let jumped = model.left(j) * &ss.scaled * model.right(&j.adjoint());
    let norm = model.trace(&jumped);
    if !(norm > 0.0) {
        return Err(Error::DegenerateCollapse { kind: kind.name() });
    }
    let mut x = to_vec(&(jumped / C64::from(norm)));
    let l = model.liouvillian();
    let mut cache: Option<(f64, DMatrix<C64>)> = None;
    let mut t = 0.0;
    let mut drift: f64 = 0.0;
    let mut out = Vec::with_capacity(tau_grid.len());
    for &target in tau_grid {
        let dt = target - t;
        if dt > 0.0 {
            let hit = matches!(&cache, Some((c, _)) if (c - dt).abs() <= 1e-12 * dt);
            if !hit {
                cache = Some((dt, (&l * C64::from(dt)).exp()));
            }
            x = &cache.as_ref().unwrap().1 * x;
        }
        t = target;
        let rho = from_vec(&x, dim);
        drift = drift.max((model.trace(&rho) - 1.0).abs());
        out.push(rho);
    }
    Ok((out, drift))
}

/// `g²(τ) = ⟨J†J⟩_c(τ) / ⟨J†J⟩_ss` for the channel's measured operator J.
pub fn regression_g2(model: &OracleModel, ss: &TruncatedDensityOperator, channel: Channel, tau_grid: &[f64]) -> Result<OracleTrace> {
    let (states, drift) = regress(model, ss, channel.trigger(), tau_grid)?;
    let m = measured_of(model, channel.measured());
    let op = m.adjoint() * m;
    let denom = model.expect(&op, &ss.scaled).re;
    if !(denom > 0.0) {
        return Err(Error::DegenerateDenominator { what: format!("oracle g2 {channel}"), value: denom });
    }
    let values = states.iter().map(|r| model.expect(&op, r).re / denom).collect();
    Ok(OracleTrace {
        trace: CorrelationTrace {
            kind: TraceKind::G2,
            channel,
            theta: None,
            tau: tau_grid.to_vec(),
            values,
            max_imag: 0.0,
            system: Some(model.sys.clone()),
        },
        max_trace_drift: drift,
    })
}

/// `hθ(τ) = Re(e^{−iθ} ⟨J⟩_c(τ) / ⟨J_den⟩_ss)`, J the measured field
/// (`a` or `σ₋`), evaluated without any weak-field expansion.
pub fn regression_h_theta(
    model: &OracleModel,
    ss: &TruncatedDensityOperator,
    channel: Channel,
    theta: f64,
    tau_grid: &[f64],
    ft_denominator: FtDenominator,
) -> Result<OracleTrace> {
    let (states, drift) = regress(model, ss, channel.trigger(), tau_grid)?;
    let m = measured_of(model, channel.measured());
    let den_op = match (channel, ft_denominator) {
        (Channel::FT, FtDenominator::Atomic) => &model.sigma_minus,
        _ => m,
    };
    let denom = model.expect(den_op, &ss.scaled);
    if !(denom.norm() > 0.0) {
        return Err(Error::DegenerateDenominator { what: format!("oracle h_theta {channel}"), value: denom.norm() });
    }
    let phase = C64::from_polar(1.0, -theta);
    let mut max_imag: f64 = 0.0;
    let values = states
        .iter()
        .map(|r| {
            let z = phase * model.expect(m, r) / denom;
            max_imag = max_imag.max(z.im.abs());
            z.re
        })
        .collect();
    Ok(OracleTrace {
        trace: CorrelationTrace {
            kind: TraceKind::Htheta,
            channel,
            theta: Some(theta),
            tau: tau_grid.to_vec(),
            values,
            max_imag,
            system: Some(model.sys.clone()),
        },
        max_trace_drift: drift,
    })
}

/// `⟨a†a⟩` in a state.
pub fn photon_number(model: &OracleModel, rho: &TruncatedDensityOperator) -> f64 {
    model.expect(&(model.a.adjoint() * &model.a), &rho.scaled).re
}
