use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest joint dimension `d^N` we are willing to allocate.
pub const MAX_STATE_DIM: usize = 1 << 26;

/// A unit vector in `(ℂ^d)^{⊗N}`, party 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    local_dim: usize,
    parties: usize,
    amplitudes: Vec<Complex64>,
}

pub(crate) fn joint_dim(local_dim: usize, parties: usize) -> Result<usize> {
    u32::try_from(parties)
        .ok()
        .and_then(|n| local_dim.checked_pow(n))
        .filter(|&dim| dim <= MAX_STATE_DIM)
        .ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "joint dimension {local_dim}^{parties} exceeds {MAX_STATE_DIM}"
            ))
        })
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl PureState {
    /// Normalizes `amplitudes`, leaving vectors already of unit norm up to
    /// rounding untouched; fails on the zero vector or a wrong length.
    pub fn new(local_dim: usize, parties: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = joint_dim(local_dim, parties)?;
        if amplitudes.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: amplitudes.len(),
            });
        }
        let n = norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Precondition("state vector has zero norm".into()));
        }
        if (n - 1.0).abs() > 4.0 * f64::EPSILON {
            amplitudes.iter_mut().for_each(|z| *z /= n);
        }
        Ok(Self {
            local_dim,
            parties,
            amplitudes,
        })
    }

    /// `|i⟩` in the computational basis.
    pub fn basis(local_dim: usize, parties: usize, index: usize) -> Result<Self> {
        let dim = joint_dim(local_dim, parties)?;
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                party: 0,
                what: "basis",
                value: index,
                limit: dim,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(local_dim, parties, amps)
    }

    /// `Σᵢ |i⟩^{⊗N} / √d`.
    pub fn ghz(local_dim: usize, parties: usize) -> Result<Self> {
        let dim = joint_dim(local_dim, parties)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let step = if parties == 1 {
            1
        } else {
            (dim - 1) / (local_dim - 1)
        };
        for i in 0..local_dim {
            amps[i * step] = Complex64::new(1.0, 0.0);
        }
        Self::new(local_dim, parties, amps)
    }

    /// Tensor product of single-site vectors (each normalized separately).
    pub fn product(local: &[Vec<Complex64>]) -> Result<Self> {
        let d = local
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::Precondition("need at least one site".into()))?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for site in local {
            if site.len() != d {
                return Err(Error::DimensionMismatch("sites differ in dimension".into()));
            }
            let n = norm(site);
            amps = amps
                .iter()
                .flat_map(|a| site.iter().map(move |s| a * s / n))
                .collect();
        }
        Self::new(d, local.len(), amps)
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// Euclidean distance `‖ψ − φ‖₂` of the amplitude vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Haar-random pure state: i.i.d. standard complex Gaussian amplitudes,
/// normalized.
pub fn sample_haar_state<R: Rng + ?Sized>(
    local_dim: usize,
    parties: usize,
    rng: &mut R,
) -> Result<PureState> {
    if local_dim < 2 {
        return Err(Error::Precondition(format!(
            "local dimension {local_dim} must be ≥ 2"
        )));
    }
    let dim = joint_dim(local_dim, parties)?;
    loop {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        if norm(&amps) > 0.0 {
            return PureState::new(local_dim, parties, amps);
        }
    }
}
