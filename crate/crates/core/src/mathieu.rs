//! Periodic solutions of the Mathieu equation `ψ'' + (a − 2q cos 2z) ψ = 0`.
//!
//! Characteristic values come from diagonalising the symmetric tridiagonal
//! matrix of the three-term Fourier recurrence, one matrix per symmetry class
//! (even/odd function, period π or 2π). The truncation is doubled until the
//! last retained coefficient of every requested eigenvector is below
//! `1e-14` of the largest.
//!
//! Modes are normalised so that `∫₀^{2π} ψ_r ψ_s dz = π δ_rs` for every order,
//! including `ce₀` (which therefore tends to `1/√2` as `q → 0`). Signs follow
//! the usual convention `ce_r(0, q) > 0` and `se_r'(0, q) > 0`, which is
//! continuous in `q` on the whole real line.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest |q| accepted by the solver.
pub const Q_LIMIT: f64 = 1.0e4;
const COEFF_TOL: f64 = 1.0e-14;
const MAX_TERMS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    /// `ce_r`, cosine series.
    Even,
    /// `se_r`, sine series.
    Odd,
}

/// One periodic eigenfunction `ce_r(z, q)` or `se_r(z, q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MathieuMode {
    pub parity: Parity,
    pub order: usize,
    pub q: f64,
    /// `a_r(q)` for even modes, `b_r(q)` for odd ones.
    pub char_value: f64,
    /// `coeffs[k]` multiplies `cos kz` (even) or `sin kz` (odd).
    pub fourier_coeffs: Vec<f64>,
    /// Number of retained terms in the recurrence.
    pub truncation: usize,
}

#[derive(Debug, Clone, Copy)]
struct Class {
    parity: Parity,
    /// Harmonic of the first basis function (0, 1 or 2); basis runs in steps of 2.
    first: usize,
}

impl Class {
    fn of(parity: Parity, order: usize) -> Result<Self> {
        match (parity, order % 2) {
            (Parity::Even, 0) => Ok(Class { parity, first: 0 }),
            (Parity::Even, _) => Ok(Class { parity, first: 1 }),
            (Parity::Odd, _) if order == 0 => Err(invalid("se_0 does not exist")),
            (Parity::Odd, 0) => Ok(Class { parity, first: 2 }),
            (Parity::Odd, _) => Ok(Class { parity, first: 1 }),
        }
    }

    /// Position of `order` inside the ascending spectrum of this class.
    fn index_of(&self, order: usize) -> usize {
        (order - self.first) / 2
    }

    fn order_at(&self, index: usize) -> usize {
        self.first + 2 * index
    }

    fn matrix(&self, q: f64, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let k = (self.first + 2 * i) as f64;
            m[(i, i)] = k * k;
            if i + 1 < n {
                m[(i, i + 1)] = q;
                m[(i + 1, i)] = q;
            }
        }
        match (self.parity, self.first) {
            (Parity::Even, 0) if n > 1 => {
                // A₀ is stored as √2·A₀ to make the recurrence symmetric.
                m[(0, 1)] = SQRT_2 * q;
                m[(1, 0)] = SQRT_2 * q;
            }
            (Parity::Even, 1) => m[(0, 0)] += q,
            (Parity::Odd, 1) => m[(0, 0)] -= q,
            _ => {}
        }
        m
    }

    fn harmonic(&self, i: usize) -> usize {
        self.first + 2 * i
    }
}

struct Solved {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    n: usize,
}

fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() {
        return Err(invalid(format!("q must be finite, got {q}")));
    }
    if q.abs() >= Q_LIMIT {
        return Err(invalid(format!("|q| = {} outside the supported range |q| < {Q_LIMIT}", q.abs())));
    }
    Ok(())
}

/// Diagonalises the class matrix, growing the truncation until the lowest
/// `count` eigenvectors have converged tails.
fn solve_class(class: Class, q: f64, count: usize) -> Result<Solved> {
    if q == 0.0 {
        // Diagonal recurrence: the free rotor, solved exactly.
        let n = count + 1;
        let values = (0..count).map(|i| (class.harmonic(i) * class.harmonic(i)) as f64).collect();
        let vectors = (0..count)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        return Ok(Solved { values, vectors, n });
    }
    let mut n = (count + 12 + (2.0 * q.abs().sqrt()) as usize).max(16);
    loop {
        let eig = SymmetricEigen::new(class.matrix(q, n));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut worst: f64 = 0.0;
        let mut values = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count);
        for &j in idx.iter().take(count) {
            let col: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
            let max = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            worst = worst.max(col[n - 1].abs() / max);
            values.push(eig.eigenvalues[j]);
            vectors.push(col);
        }
        if worst < COEFF_TOL {
            return Ok(Solved { values, vectors, n });
        }
        if n >= MAX_TERMS {
            return Err(Error::Convergence { q, order: class.order_at(count - 1), residual: worst });
        }
        n = (2 * n).min(MAX_TERMS);
    }
}

/// Characteristic values `a₀..a_max` (even) or `b₁..b_max` (odd) in ascending order.
pub fn characteristic_values(q: f64, parity: Parity, max_order: usize) -> Result<Vec<f64>> {
    check_q(q)?;
    let first_order = match parity {
        Parity::Even => 0,
        Parity::Odd if max_order == 0 => return Err(invalid("odd modes start at order 1")),
        Parity::Odd => 1,
    };
    let mut out = Vec::new();
    let mut by_class = Vec::new();
    for start in [first_order, first_order + 1] {
        if start > max_order {
            continue;
        }
        let class = Class::of(parity, start)?;
        let count = class.index_of(max_order - (max_order - start) % 2) + 1;
        by_class.push((class, solve_class(class, q, count)?));
    }
    for order in first_order..=max_order {
        let (class, solved) = by_class
            .iter()
            .find(|(c, _)| Class::of(parity, order).map(|o| o.first == c.first).unwrap_or(false))
            .expect("class solved above");
        out.push(solved.values[class.index_of(order)]);
    }
    Ok(out)
}

/// The mode `ce_order(z, q)` or `se_order(z, q)`.
pub fn eigenfunction(q: f64, parity: Parity, order: usize) -> Result<MathieuMode> {
    check_q(q)?;
    let class = Class::of(parity, order)?;
    let index = class.index_of(order);
    let solved = solve_class(class, q, index + 1)?;
    Ok(build_mode(class, q, order, &solved, index))
}

/// `ce₀ … ce_max` at one `q`: the vibrational ladder of a lattice well.
pub fn even_ladder(q: f64, max_order: usize) -> Result<Vec<MathieuMode>> {
    check_q(q)?;
    let even = Class::of(Parity::Even, 0)?;
    let odd = Class::of(Parity::Even, 1)?;
    let solved_even = solve_class(even, q, max_order / 2 + 1)?;
    let solved_odd = if max_order >= 1 { Some(solve_class(odd, q, (max_order - 1) / 2 + 1)?) } else { None };
    Ok((0..=max_order)
        .map(|r| {
            if r % 2 == 0 {
                build_mode(even, q, r, &solved_even, r / 2)
            } else {
                build_mode(odd, q, r, solved_odd.as_ref().unwrap(), r / 2)
            }
        })
        .collect())
}

fn build_mode(class: Class, q: f64, order: usize, solved: &Solved, index: usize) -> MathieuMode {
    let v = &solved.vectors[index];
    let mut coeffs = vec![0.0; class.harmonic(solved.n - 1) + 1];
    for (i, &c) in v.iter().enumerate() {
        coeffs[class.harmonic(i)] = c;
    }
    if class.parity == Parity::Even && class.first == 0 {
        coeffs[0] /= SQRT_2;
    }
    let mut mode = MathieuMode {
        parity: class.parity,
        order,
        q,
        char_value: solved.values[index],
        fourier_coeffs: coeffs,
        truncation: solved.n,
    };
    if sign_indicator(&mode) < 0.0 {
        mode.fourier_coeffs.iter_mut().for_each(|c| *c = -*c);
    }
    mode
}

/// Positive exactly when the mode satisfies `ce(0) > 0` / `se'(0) > 0`.
///
/// Deep wells make the value at z = 0 exponentially small for q > 0, so the
/// equivalent condition at the well centre z = π/2 is used whenever it is the
/// better-conditioned of the two.
fn sign_indicator(mode: &MathieuMode) -> f64 {
    let n = mode.order / 2;
    let alt = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let (at_zero, at_centre) = match (mode.parity, mode.order % 2) {
        (Parity::Even, 0) => (mode.evaluate(0.0), alt(n) * mode.evaluate(FRAC_PI_2)),
        (Parity::Even, _) => (mode.evaluate(0.0), alt(n + 1) * mode.derivative(FRAC_PI_2)),
        (Parity::Odd, 1) => (mode.derivative(0.0), alt(n) * mode.evaluate(FRAC_PI_2)),
        (Parity::Odd, _) => {
            let n = (mode.order - 2) / 2;
            (mode.derivative(0.0), alt(n + 1) * mode.derivative(FRAC_PI_2))
        }
    };
    if at_zero.abs() >= at_centre.abs() { at_zero } else { at_centre }
}

impl MathieuMode {
    /// ψ(z) from the Fourier series.
    pub fn evaluate(&self, z: f64) -> f64 {
        self.series(z, 0)
    }

    pub fn derivative(&self, z: f64) -> f64 {
        self.series(z, 1)
    }

    pub fn second_derivative(&self, z: f64) -> f64 {
        self.series(z, 2)
    }

    fn series(&self, z: f64, deriv: u32) -> f64 {
        // cos kz / sin kz by the Chebyshev recurrence.
        let (s1, c1) = z.sin_cos();
        let (mut cp, mut sp) = (1.0, 0.0);
        let (mut ck, mut sk) = (c1, s1);
        let mut total = 0.0;
        for (k, &a) in self.fourier_coeffs.iter().enumerate() {
            let (c, s) = if k == 0 { (1.0, 0.0) } else { (ck, sk) };
            if a != 0.0 {
                let kf = k as f64;
                let term = match (self.parity, deriv) {
                    (Parity::Even, 0) => c,
                    (Parity::Even, 1) => -kf * s,
                    (Parity::Even, _) => -kf * kf * c,
                    (Parity::Odd, 0) => s,
                    (Parity::Odd, 1) => kf * c,
                    (Parity::Odd, _) => -kf * kf * s,
                };
                total += a * term;
            }
            if k >= 1 {
                let cn = 2.0 * c1 * ck - cp;
                let sn = 2.0 * c1 * sk - sp;
                cp = ck;
                sp = sk;
                ck = cn;
                sk = sn;
            }
        }
        total
    }

    /// Max-norm of `ψ'' + (a − 2q cos 2z)ψ` on an `n`-point uniform grid over one period.
    pub fn defect(&self, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let z = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (self.second_derivative(z) + (self.char_value - 2.0 * self.q * (2.0 * z).cos()) * self.evaluate(z)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `(1/π)∫₀^{2π} ψ_a ψ_b dz` computed from the coefficient vectors.
    pub fn fourier_overlap(&self, other: &MathieuMode) -> f64 {
        if self.parity != other.parity {
            return 0.0;
        }
        let n = self.fourier_coeffs.len().min(other.fourier_coeffs.len());
        let mut s: f64 = (1..n).map(|k| self.fourier_coeffs[k] * other.fourier_coeffs[k]).sum();
        if self.parity == Parity::Even {
            s += 2.0 * self.fourier_coeffs[0] * other.fourier_coeffs[0];
        }
        s
    }

    /// Samples as `(z, ψ(z))` rows, for dumping a mode to CSV.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let z = 2.0 * std::f64::consts::PI * i as f64 / (n - 1).max(1) as f64;
                (z, self.evaluate(z))
            })
            .collect()
    }
}
