//! Truncated evaluation of the spectral Dirichlet series
//!
//! `D(s) = Σ_γ (l(γ)/ν(γ))·Q(l(γ), A(γ))·cosh^{−s} l(γ)`
//!
//! with the normal-bundle factor
//! `Q(l, A) = |det(I − sech(l)·(A + Aᵀ)/2)|^{−(d−1)/2}`.
//! In dimension 2 the reversing factor is the preserving one times
//! `tanh(l/2)`, which lets the series be regrouped by total weight.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::spectrum::{weight, LengthTwistSpectrum, Orientation};

/// Orthogonality tolerance for twist matrices.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DirichletError {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("twist matrix must be {expected}×{expected}, got {rows}×{cols}")]
    WrongShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("twist matrix is not orthogonal (|AᵀA − I| = {0:e})")]
    NotOrthogonal(f64),
    #[error("a 2-dimensional twist must be exactly [1] or [-1], got [{0}]")]
    NotSign(f64),
    #[error("length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("Q(l, A) is singular at length {0}")]
    SingularAtZeroLength(f64),
}

/// Holonomy of a geodesic: an orthogonal `(d−1)×(d−1)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistData {
    dimension: usize,
    matrix: DMatrix<f64>,
}

impl TwistData {
    pub fn new(dimension: usize, matrix: DMatrix<f64>) -> Result<Self, DirichletError> {
        if dimension < 2 {
            return Err(DirichletError::DimensionTooSmall(dimension));
        }
        let k = dimension - 1;
        if matrix.nrows() != k || matrix.ncols() != k {
            return Err(DirichletError::WrongShape {
                expected: k,
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if dimension == 2 {
            let x = matrix[(0, 0)];
            if x != 1.0 && x != -1.0 {
                return Err(DirichletError::NotSign(x));
            }
        }
        let defect = (matrix.transpose() * &matrix - DMatrix::identity(k, k)).amax();
        if defect > ORTHOGONALITY_TOLERANCE {
            return Err(DirichletError::NotOrthogonal(defect));
        }
        Ok(TwistData { dimension, matrix })
    }

    pub fn surface(orientation: Orientation) -> Self {
        let sign = match orientation {
            Orientation::Preserving => 1.0,
            Orientation::Reversing => -1.0,
        };
        TwistData {
            dimension: 2,
            matrix: DMatrix::from_element(1, 1, sign),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

fn check_length(l: f64) -> Result<(), DirichletError> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(DirichletError::InvalidLength(l))
    }
}

/// `Q(l, A)` by the determinant formula in any dimension.
pub fn q_factor_general(l: f64, twist: &TwistData) -> Result<f64, DirichletError> {
    check_length(l)?;
    let k = twist.dimension - 1;
    let sym = (&twist.matrix + twist.matrix.transpose()) * 0.5;
    let m = DMatrix::<f64>::identity(k, k) - sym / l.cosh();
    let det = m.determinant().abs();
    if det == 0.0 {
        return Err(DirichletError::SingularAtZeroLength(l));
    }
    Ok(det.powf(-(k as f64) / 2.0))
}

/// `Q(l, A)`. In dimension 2 this uses the closed forms
/// `(cosh l/(cosh l − 1))^{1/2}` for `[1]` and `(cosh l/(cosh l + 1))^{1/2}`
/// for `[−1]`, written with `cosh l ∓ 1 = 2·sinh²(l/2)`, `2·cosh²(l/2)` to
/// stay accurate for short geodesics.
pub fn q_factor(l: f64, twist: &TwistData) -> Result<f64, DirichletError> {
    check_length(l)?;
    if twist.dimension != 2 {
        return q_factor_general(l, twist);
    }
    let half = l / 2.0;
    let denom = if twist.matrix[(0, 0)] > 0.0 {
        2.0 * half.sinh().powi(2)
    } else {
        2.0 * half.cosh().powi(2)
    };
    if denom == 0.0 {
        return Err(DirichletError::SingularAtZeroLength(l));
    }
    Ok((l.cosh() / denom).sqrt())
}

/// A point `s = σ + it` at which to evaluate the series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub s: Complex64,
}

impl SeriesPoint {
    pub fn new(sigma: f64, t: f64) -> Self {
        SeriesPoint {
            s: Complex64::new(sigma, t),
        }
    }

    /// Whether the full (untruncated) series converges here: `σ > d − 1`.
    pub fn converges(&self, dimension: usize) -> bool {
        self.s.re > (dimension as f64 - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialSum {
    pub value: Complex64,
    /// Set when `σ ≤ d − 1`: the truncation is finite but the full series
    /// diverges there.
    pub outside_convergence: bool,
}

fn cosh_pow_neg(l: f64, s: Complex64) -> Complex64 {
    (-s * l.cosh().ln()).exp()
}

/// Per-geodesic form: `Σ mult·(l/ν)·Q(l, A)·cosh^{−s} l`, summed in entry
/// order (ascending length, then orientation).
pub fn dirichlet_partial_sum(spec: &LengthTwistSpectrum, point: SeriesPoint) -> PartialSum {
    let mut value = Complex64::new(0.0, 0.0);
    for e in spec.entries() {
        let l = e.length.to_f64();
        let q = q_factor(l, &TwistData::surface(e.orientation)).expect("positive length");
        let term = e.multiplicity as f64 * l / e.nu as f64 * q;
        value += cosh_pow_neg(l, point.s) * term;
    }
    PartialSum {
        value,
        outside_convergence: !point.converges(2),
    }
}

/// Weight-grouped form: `Σ_l W(l)·l·Q(l, [1])·cosh^{−s} l`.
pub fn dirichlet_partial_sum_grouped(spec: &LengthTwistSpectrum, point: SeriesPoint) -> PartialSum {
    let mut value = Complex64::new(0.0, 0.0);
    for (length, w) in spec.weight_profile() {
        let l = length.to_f64();
        let q = q_factor(l, &TwistData::surface(Orientation::Preserving)).expect("positive length");
        value += cosh_pow_neg(l, point.s) * (w.to_f64() * l * q);
    }
    PartialSum {
        value,
        outside_convergence: !point.converges(2),
    }
}

/// Per-geodesic form written with the weight: `Σ mult·wt(γ)·l·Q(l,[1])·cosh^{−s} l`.
pub fn dirichlet_partial_sum_weighted(
    spec: &LengthTwistSpectrum,
    point: SeriesPoint,
) -> PartialSum {
    let mut value = Complex64::new(0.0, 0.0);
    for e in spec.entries() {
        let l = e.length.to_f64();
        let q = q_factor(l, &TwistData::surface(Orientation::Preserving)).expect("positive length");
        let term = e.multiplicity as f64 * weight(e).to_f64() * l * q;
        value += cosh_pow_neg(l, point.s) * term;
    }
    PartialSum {
        value,
        outside_convergence: !point.converges(2),
    }
}
