//! Simply supported Euler-Bernoulli beam with viscous damping profile `h(ζ) = 1 − ζ`.
//!
//! State `(w, w_t)` is written in the sine basis `φ_n(ζ) = √2 sin(nπζ)` with energy
//! coordinates `p_n = ω_n a_n`, `q_n = c_n`, `ω_n = n²π²`, so the energy norm is
//! Euclidean. The undamped part is the skew block `[[0, Ω], [−Ω, 0]]` and damping
//! subtracts `h hᵀ` from the velocity block.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectral::{RieszBounds, C64};

/// Eigenpair residual threshold relative to `‖v‖`.
pub const BEAM_RESIDUAL: f64 = 1e-8;

/// `⟨1 − ζ, √2 sin(nπζ)⟩ = √2/(nπ)`.
pub fn damping_coefficient(n: usize) -> f64 {
    2f64.sqrt() / (n as f64 * PI)
}

pub fn frequency(n: usize) -> f64 {
    let k = n as f64 * PI;
    k * k
}

#[derive(Clone, Debug)]
pub struct BeamModel {
    pub modes: usize,
    pub damped: bool,
    /// `2N × 2N` generator in energy coordinates `(p_1..p_N, q_1..q_N)`.
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<C64>,
    /// Unit eigenvectors as columns.
    pub vectors: DMatrix<C64>,
    pub inverse: DMatrix<C64>,
    /// `max_k ‖A v_k − λ_k v_k‖`.
    pub residual: f64,
    /// Extreme singular values of the eigenvector matrix.
    pub riesz: RieszBounds,
}

pub fn assemble_beam(n: usize, damped: bool) -> Result<BeamModel> {
    let dim = 2 * n;
    let omega: Vec<f64> = (1..=n).map(frequency).collect();
    let h: Vec<f64> = (1..=n)
        .map(|k| if damped { damping_coefficient(k) } else { 0.0 })
        .collect();
    let mut matrix = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        matrix[(i, n + i)] = omega[i];
        matrix[(n + i, i)] = -omega[i];
        for j in 0..n {
            matrix[(n + i, n + j)] -= h[i] * h[j];
        }
    }

    let mut pairs: Vec<(C64, Vec<C64>)> = if damped {
        let guesses = matrix.complex_eigenvalues();
        guesses
            .iter()
            .map(|&g| {
                let lambda = secular_newton(g, &omega, &h);
                let mut v = vec![C64::new(0.0, 0.0); dim];
                for k in 0..n {
                    let d = lambda * lambda + omega[k] * omega[k];
                    v[k] = omega[k] * h[k] / d;
                    v[n + k] = lambda * h[k] / d;
                }
                (lambda, v)
            })
            .collect()
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (0..n)
            .flat_map(|k| {
                [1.0, -1.0].map(|sign| {
                    let mut v = vec![C64::new(0.0, 0.0); dim];
                    v[k] = C64::new(s, 0.0);
                    v[n + k] = C64::new(0.0, sign * s);
                    (C64::new(0.0, sign * omega[k]), v)
                })
            })
            .collect()
    };
    pairs.sort_by(|a, b| {
        a.0.im
            .abs()
            .total_cmp(&b.0.im.abs())
            .then(b.0.im.total_cmp(&a.0.im))
    });
    for w in pairs.windows(2) {
        if (w[0].0 - w[1].0).norm() <= 1e-9 * w[0].0.norm().max(1.0) {
            return Err(Error::Eigensolver {
                residual: f64::INFINITY,
                threshold: BEAM_RESIDUAL,
            });
        }
    }

    let eigenvalues: Vec<C64> = pairs.iter().map(|p| p.0).collect();
    let vectors = DMatrix::<C64>::from_fn(dim, dim, |r, c| pairs[c].1[r]);
    let vectors = normalize_columns(vectors);
    let complex = matrix.map(|x| C64::new(x, 0.0));
    let defect = &complex * &vectors - &vectors * DMatrix::from_diagonal(&eigenvalues.clone().into());
    let residual = (0..dim)
        .map(|c| defect.column(c).norm())
        .fold(0.0, f64::max);
    if !(residual <= BEAM_RESIDUAL) {
        return Err(Error::Eigensolver {
            residual,
            threshold: BEAM_RESIDUAL,
        });
    }
    let sv = vectors.clone().svd(false, false).singular_values;
    let riesz = RieszBounds {
        lower: sv.min(),
        upper: sv.max(),
    };
    let inverse = vectors
        .clone()
        .try_inverse()
        .ok_or(Error::Eigensolver {
            residual: f64::INFINITY,
            threshold: BEAM_RESIDUAL,
        })?;
    Ok(BeamModel {
        modes: n,
        damped,
        matrix,
        eigenvalues,
        vectors,
        inverse,
        residual,
        riesz,
    })
}

/// Root of `1 + λ Σ h_k²/(λ² + ω_k²)`, the characteristic equation of the damped blocks.
fn secular_newton(start: C64, omega: &[f64], h: &[f64]) -> C64 {
    let mut lambda = start;
    for _ in 0..100 {
        let mut s = C64::new(0.0, 0.0);
        let mut ds = C64::new(0.0, 0.0);
        for (w, hk) in omega.iter().zip(h) {
            let d = lambda * lambda + w * w;
            s += hk * hk / d;
            ds -= 2.0 * lambda * hk * hk / (d * d);
        }
        let f = 1.0 + lambda * s;
        let df = s + lambda * ds;
        let step = f / df;
        lambda -= step;
        if step.norm() <= 1e-15 * lambda.norm().max(1.0) {
            break;
        }
    }
    lambda
}

fn normalize_columns(mut m: DMatrix<C64>) -> DMatrix<C64> {
    for mut col in m.column_iter_mut() {
        let n = col.norm();
        col /= C64::new(n, 0.0);
    }
    m
}

impl BeamModel {
    /// Coordinates against the eigenvector basis.
    pub fn to_coordinates(&self, physical: &[C64]) -> Vec<C64> {
        let x = nalgebra::DVector::from_column_slice(physical);
        (&self.inverse * x).iter().copied().collect()
    }

    pub fn to_physical(&self, coords: &[C64]) -> Vec<C64> {
        let c = nalgebra::DVector::from_column_slice(coords);
        (&self.vectors * c).iter().copied().collect()
    }

    /// Physical state with zero displacement and velocity coefficients `b`.
    pub fn velocity_state(&self, b: &[C64]) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); 2 * self.modes];
        x[self.modes..].copy_from_slice(b);
        x
    }

    /// `e^(tA)x` through the eigen-decomposition.
    pub fn propagate(&self, t: f64, physical: &[C64]) -> Vec<C64> {
        let c: Vec<C64> = self
            .to_coordinates(physical)
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, l)| c * (l * t).exp())
            .collect();
        self.to_physical(&c)
    }
}
