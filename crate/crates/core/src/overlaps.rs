//! Franck–Condon factors between vibrational ladders and the projection of the
//! initial centre-of-mass Gaussian onto the ground ladder.
//!
//! All vibrational states live in the well centred at `z = π/2`. In Mathieu
//! mode they are the `ce_l` of that manifold's `q`; in harmonic mode they are
//! Hermite functions of `u = z − π/2` with width `(1/√2) q^{-1/4}`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dressed_lattice::{ladder, Branch, Ladder, LatticeSystem, Mode};
use crate::error::{invalid, Result};
use crate::mathieu::MathieuMode;
use crate::quadrature::{integrate, GaussLegendre};

const TABLE_TOL: f64 = 1e-12;
/// Fraction of the initial Gaussian's probability allowed outside one lattice period.
pub const SINGLE_SITE_MASS_LIMIT: f64 = 0.10;

/// Spatial width of the ground state of a harmonic well with parameter q, in z.
pub fn ground_width(q: f64) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * q.powf(-0.25)
}

/// Unit-normalised Hermite function `h_l(x)` (∫ h_l² dx = 1).
pub fn hermite_function(l: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..l {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `h_0..=h_l_max` at one point.
fn hermite_functions(l_max: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(cur);
    for k in 0..l_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
}

/// `(1/π) ∫₀^{2π} ψ_a ψ_b dz`, converged by panel doubling. Modes of
/// opposite parity, or of different period class, give exactly 0.
pub fn franck_condon(a: &MathieuMode, b: &MathieuMode) -> Result<f64> {
    if a.parity != b.parity || a.order % 2 != b.order % 2 {
        return Ok(0.0);
    }
    // Symmetric by construction: the integrand is a commutative product.
    Ok(integrate(|z| a.evaluate(z) * b.evaluate(z), 0.0, TAU, 1e-13)? / PI)
}

/// Overlaps between the ground ladder (rows) and one dressed ladder (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FranckCondonTable {
    pub n: usize,
    pub branch: Branch,
    pub l_max: usize,
    /// Row-major `(l_max+1)²` entries, `entries[l * (l_max+1) + m] = FC[l, m]`.
    pub entries: Vec<f64>,
}

impl FranckCondonTable {
    pub fn identity(n: usize, branch: Branch, l_max: usize) -> Self {
        let d = l_max + 1;
        let mut entries = vec![0.0; d * d];
        for l in 0..d {
            entries[l * d + l] = 1.0;
        }
        Self { n, branch, l_max, entries }
    }

    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.entries[l * (self.l_max + 1) + m]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.l_max + 1;
        DMatrix::from_row_slice(d, d, &self.entries)
    }

    /// Σ_m FC[l, m]²: the weight of ground mode `l` captured by the dressed ladder.
    pub fn row_completeness(&self, l: usize) -> f64 {
        (0..=self.l_max).map(|m| self.get(l, m).powi(2)).sum()
    }

    /// Rows `l`, columns `m`, for debugging dumps.
    pub fn to_csv(&self) -> String {
        let d = self.l_max + 1;
        let mut s = String::from("l");
        for m in 0..d {
            s.push_str(&format!(",m{m}"));
        }
        s.push('\n');
        for l in 0..d {
            s.push_str(&l.to_string());
            for m in 0..d {
                s.push_str(&format!(",{:e}", self.get(l, m)));
            }
            s.push('\n');
        }
        s
    }
}

/// Integrates `rows(x) ⊗ cols(x)` over a composite Gauss–Legendre grid,
/// doubling the panel count until the whole table is stable to `TABLE_TOL`.
fn tabulate<F, G>(a: f64, b: f64, mut panels: usize, d: usize, rows: F, cols: G) -> Result<DMatrix<f64>>
where
    F: Fn(f64, &mut Vec<f64>),
    G: Fn(f64, &mut Vec<f64>),
{
    let rule = GaussLegendre::new(16);
    let eval = |panels: usize| {
        let (xs, ws) = rule.composite(a, b, panels);
        let mut ra = DMatrix::zeros(d, xs.len());
        let mut cb = DMatrix::zeros(d, xs.len());
        let mut buf = Vec::with_capacity(d);
        for (j, (&x, &w)) in xs.iter().zip(&ws).enumerate() {
            rows(x, &mut buf);
            for i in 0..d {
                ra[(i, j)] = buf[i];
            }
            cols(x, &mut buf);
            for i in 0..d {
                cb[(i, j)] = buf[i] * w;
            }
        }
        ra * cb.transpose()
    };
    let mut prev = eval(panels);
    for _ in 0..8 {
        panels *= 2;
        let next = eval(panels);
        if (&next - &prev).amax() < TABLE_TOL {
            return Ok(next);
        }
        prev = next;
    }
    Err(invalid(format!("Franck-Condon table on [{a}, {b}] did not converge")))
}

fn max_harmonic(modes: &[MathieuMode]) -> usize {
    modes.iter().map(|m| m.fourier_coeffs.len()).max().unwrap_or(1)
}

/// Franck–Condon table between two ladders computed for the same system.
pub fn fc_table_between(sys: &LatticeSystem, ground: &Ladder, target: &Ladder) -> Result<FranckCondonTable> {
    let d = sys.l_max + 1;
    let raw = match sys.mode {
        Mode::Stationary => return Ok(FranckCondonTable::identity(target.n, target.branch, sys.l_max)),
        Mode::Mathieu => {
            let panels = 2 * (max_harmonic(&ground.modes) + max_harmonic(&target.modes)).max(8);
            let t = tabulate(
                0.0,
                TAU,
                panels,
                d,
                |z, out| {
                    out.clear();
                    out.extend(ground.modes.iter().map(|m| m.evaluate(z)));
                },
                |z, out| {
                    out.clear();
                    out.extend(target.modes.iter().map(|m| m.evaluate(z)));
                },
            )?;
            t / PI
        }
        Mode::Sho => {
            let (sa, sb) = (ground_width(ground.q), ground_width(target.q));
            let reach = sa.max(sb) * ((2.0 * sys.l_max as f64 + 1.0).sqrt() + 10.0);
            tabulate(
                -reach,
                reach,
                4 * (sys.l_max + 4),
                d,
                |u, out| {
                    hermite_functions(sys.l_max, u / sa, out);
                    out.iter_mut().for_each(|v| *v /= sa.sqrt());
                },
                |u, out| {
                    hermite_functions(sys.l_max, u / sb, out);
                    out.iter_mut().for_each(|v| *v /= sb.sqrt());
                },
            )?
        }
    };
    let mut entries = vec![0.0; d * d];
    for l in 0..d {
        for m in 0..d {
            // Parity about the well centre is (−1)^l for both families.
            if (l + m) % 2 == 0 {
                entries[l * d + m] = raw[(l, m)];
            }
        }
    }
    Ok(FranckCondonTable { n: target.n, branch: target.branch, l_max: sys.l_max, entries })
}

/// Franck–Condon table between the ground ladder and manifold `(n, branch)`.
pub fn fc_table(sys: &LatticeSystem, n: usize, branch: Branch) -> Result<FranckCondonTable> {
    if !(1..=2).contains(&n) || branch == Branch::Ground {
        return Err(invalid(format!("Franck-Condon tables exist for n = 1, 2 with a +/- branch, got n = {n}")));
    }
    let ground = ladder(sys, 0, Branch::Ground)?;
    let target = ladder(sys, n, branch)?;
    fc_table_between(sys, &ground, &target)
}

/// Ground-ladder amplitudes of the initial centre-of-mass state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialWeights {
    /// Renormalised amplitudes, Σ w² = 1.
    pub weights: Vec<f64>,
    pub sigma: f64,
    /// `1 − Σ w²` before renormalisation.
    pub deficit: f64,
    /// Probability of the Gaussian lying outside the integration window.
    pub outside_mass: f64,
    pub warning: Option<String>,
}

/// Normalised Gaussian amplitude of width `w` centred at 0.
fn gaussian(u: f64, w: f64) -> f64 {
    (-(u * u) / (2.0 * w * w)).exp() / (PI.sqrt() * w).sqrt()
}

/// Projects the Gaussian of width `σ · σ₀` onto the ground ladder.
///
/// In Mathieu mode the overlap runs over one period `[−π/2, 3π/2]` around the
/// well at `π/2`; in harmonic mode over the whole line.
pub fn gaussian_weights(sys: &LatticeSystem) -> Result<InitialWeights> {
    gaussian_weights_on(sys, &ladder(sys, 0, Branch::Ground)?)
}

pub fn gaussian_weights_on(sys: &LatticeSystem, ground: &Ladder) -> Result<InitialWeights> {
    if !(sys.sigma > 0.0 && sys.sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {}", sys.sigma)));
    }
    if sys.mode == Mode::Stationary {
        let mut weights = vec![0.0; sys.l_max + 1];
        weights[0] = 1.0;
        return Ok(InitialWeights { weights, sigma: sys.sigma, deficit: 0.0, outside_mass: 0.0, warning: None });
    }
    if sys.v0 <= 0.0 {
        return Err(invalid("the initial width is measured in ground-state widths, which needs v0 > 0"));
    }
    let s0 = ground_width(sys.v0);
    let w = sys.sigma * s0;
    let mut raw = vec![0.0; sys.l_max + 1];
    let outside_mass;
    match sys.mode {
        Mode::Mathieu => {
            let inside = integrate(|u| gaussian(u, w).powi(2), -PI, PI, 1e-13)?;
            outside_mass = (1.0 - inside).max(0.0);
            for (l, m) in ground.modes.iter().enumerate() {
                if l % 2 == 1 {
                    continue;
                }
                let v = integrate(|z| m.evaluate(z) * gaussian(z - FRAC_PI_2, w), -FRAC_PI_2, 3.0 * FRAC_PI_2, 1e-14)?;
                raw[l] = v / PI.sqrt();
            }
        }
        Mode::Sho => {
            outside_mass = 0.0;
            let reach = s0.max(w) * ((2.0 * sys.l_max as f64 + 1.0).sqrt() + 12.0);
            for (l, r) in raw.iter_mut().enumerate() {
                if l % 2 == 1 {
                    continue;
                }
                *r = integrate(|u| hermite_function(l, u / s0) / s0.sqrt() * gaussian(u, w), -reach, reach, 1e-14)?;
            }
        }
        Mode::Stationary => unreachable!(),
    }
    let total: f64 = raw.iter().map(|v| v * v).sum();
    if total <= 0.0 {
        return Err(invalid("the initial Gaussian has no overlap with the retained ladder"));
    }
    let norm = total.sqrt();
    let warning = (outside_mass > SINGLE_SITE_MASS_LIMIT).then(|| {
        format!(
            "sigma = {} puts {:.1}% of the initial probability outside one lattice period",
            sys.sigma,
            100.0 * outside_mass
        )
    });
    Ok(InitialWeights {
        weights: raw.iter().map(|v| v / norm).collect(),
        sigma: sys.sigma,
        deficit: 1.0 - total,
        outside_mass,
        warning,
    })
}
