use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance of the POVM validity checks.
pub const POVM_TOL: f64 = 1e-10;

const MAX_RESAMPLES: usize = 10;

/// `v` positive operators on `ℂ^d` summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<CMatrix>,
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

/// Eigen-decomposition of a Hermitian matrix (input is symmetrized first).
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitian_part(m).symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Projector onto the span of eigenvectors whose eigenvalue passes `keep`.
pub(crate) fn spectral_projector(m: &CMatrix, keep: impl Fn(f64) -> bool) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let d = m.nrows();
    let mut p = CMatrix::zeros(d, d);
    for (i, &l) in values.iter().enumerate() {
        if keep(l) {
            let col = vectors.column(i);
            p += col * col.adjoint();
        }
    }
    p
}

/// `f(M)` for Hermitian `M` through its eigen-decomposition.
pub(crate) fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| Complex64::new(f(l), 0.0)),
    ));
    &vectors * diag * vectors.adjoint()
}

fn gaussian_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Haar-random unitary from the QR decomposition of a Gaussian matrix with
/// the phases of `R`'s diagonal absorbed.
pub(crate) fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

impl Povm {
    /// Validates and wraps the given elements.
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|e| e.nrows())
            .ok_or_else(|| Error::Precondition("POVM needs at least one element".into()))?;
        let povm = Self { dim, elements };
        povm.validate(POVM_TOL)?;
        Ok(povm)
    }

    /// Checks hermiticity, positivity, completeness and `‖Πₐ‖ ≤ 1`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let d = self.dim;
        let mut sum = CMatrix::zeros(d, d);
        for (a, e) in self.elements.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "element {a} is {}×{}, expected {d}×{d}",
                    e.nrows(),
                    e.ncols()
                )));
            }
            let skew = max_abs(&(e - e.adjoint()));
            if skew > tol {
                return Err(Error::Precondition(format!(
                    "element {a} not Hermitian (deviation {skew:e})"
                )));
            }
            let (values, _) = hermitian_eigen(e);
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if min < -tol {
                return Err(Error::Precondition(format!(
                    "element {a} has negative eigenvalue {min:e}"
                )));
            }
            if max > 1.0 + tol {
                return Err(Error::Precondition(format!(
                    "element {a} has norm {max} > 1"
                )));
            }
            sum += e;
        }
        let dev = max_abs(&(sum - CMatrix::identity(d, d)));
        if dev > tol {
            return Err(Error::Precondition(format!(
                "elements do not sum to identity (deviation {dev:e})"
            )));
        }
        Ok(())
    }

    /// Projective measurement in the basis given by the columns of `basis`;
    /// column `i` goes to outcome `i mod v`.
    pub fn projective(basis: &CMatrix, outcomes: usize) -> Result<Self> {
        if outcomes < 2 {
            return Err(Error::Precondition("need at least two outcomes".into()));
        }
        let d = basis.nrows();
        let mut elements = vec![CMatrix::zeros(d, d); outcomes];
        for i in 0..basis.ncols() {
            let col = basis.column(i);
            elements[i % outcomes] += col * col.adjoint();
        }
        Self::new(elements)
    }

    /// Measurement in the computational basis.
    pub fn computational(dim: usize, outcomes: usize) -> Result<Self> {
        Self::projective(&CMatrix::identity(dim, dim), outcomes)
    }

    /// The two-outcome projective measurement of the qubit observable
    /// `cos θ σ_z + sin θ σ_x`: outcome 0 is the +1 eigenspace.
    pub fn qubit_observable(theta: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        let half = |x: f64| Complex64::new(0.5 * x, 0.0);
        let plus = CMatrix::from_row_slice(2, 2, &[half(1.0 + c), half(s), half(s), half(1.0 - c)]);
        let minus = CMatrix::identity(2, 2) - &plus;
        Self::new(vec![plus, minus]).expect("valid by construction")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn element(&self, outcome: usize) -> &CMatrix {
        &self.elements[outcome]
    }

    pub(crate) fn elements_mut(&mut self) -> &mut [CMatrix] {
        &mut self.elements
    }
}

/// Random POVM: `Πₐ = S^{−1/2} Gₐ†Gₐ S^{−1/2}` with Gaussian `Gₐ` and
/// `S = Σ Gₐ†Gₐ`.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Result<Povm> {
    if dim < 2 || outcomes < 2 {
        return Err(Error::Precondition(format!(
            "random POVM needs d ≥ 2 and v ≥ 2 (got d = {dim}, v = {outcomes})"
        )));
    }
    for _ in 0..MAX_RESAMPLES {
        let grams: Vec<CMatrix> = (0..outcomes)
            .map(|_| {
                let g = gaussian_matrix(dim, rng);
                g.adjoint() * g
            })
            .collect();
        let s = grams.iter().fold(CMatrix::zeros(dim, dim), |acc, e| acc + e);
        let (values, _) = hermitian_eigen(&s);
        if values.iter().any(|&l| l <= 1e-12) {
            continue;
        }
        let inv_sqrt = hermitian_fn(&s, |l| 1.0 / l.sqrt());
        let mut elements: Vec<CMatrix> = grams
            .iter()
            .map(|e| hermitian_part(&(&inv_sqrt * e * &inv_sqrt)))
            .collect();
        // push the residual of Σ = I into the last element
        let total = elements.iter().fold(CMatrix::zeros(dim, dim), |acc, e| acc + e);
        let last = elements.len() - 1;
        elements[last] += CMatrix::identity(dim, dim) - total;
        if let Ok(p) = Povm::new(elements) {
            return Ok(p);
        }
    }
    Err(Error::Consistency(format!(
        "random POVM sampling failed {MAX_RESAMPLES} times"
    )))
}

/// Random projective measurement in a Haar-random basis.
pub fn random_projective<R: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    rng: &mut R,
) -> Result<Povm> {
    if dim < 2 || outcomes < 2 {
        return Err(Error::Precondition(format!(
            "random measurement needs d ≥ 2 and v ≥ 2 (got d = {dim}, v = {outcomes})"
        )));
    }
    Povm::projective(&random_unitary(dim, rng), outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_povms_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (d, v) in [(2, 2), (3, 2), (2, 4), (4, 3)] {
            for _ in 0..20 {
                let p = random_povm(d, v, &mut rng).unwrap();
                assert_eq!(p.outcomes(), v);
                p.validate(POVM_TOL).unwrap();
            }
        }
    }

    #[test]
    fn random_povm_rejects_single_outcome() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(random_povm(2, 1, &mut rng), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_povm_is_reproducible() {
        let a = random_povm(2, 2, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = random_povm(2, 2, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn projective_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_projective(3, 2, &mut rng).unwrap();
        for e in p.elements() {
            assert!(max_abs(&(e * e - e)) < 1e-12);
        }
        let z = Povm::qubit_observable(0.0);
        assert_eq!(z, Povm::computational(2, 2).unwrap());
    }

    #[test]
    fn invalid_elements_rejected() {
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!(Povm::new(vec![half.clone(), half.clone(), half]).is_err());
        let mut skew = CMatrix::identity(2, 2);
        skew[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(Povm::new(vec![skew, CMatrix::zeros(2, 2)]).is_err());
    }
}
