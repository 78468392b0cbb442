//! ε-nets of subsets of the hypercube `[−1,1]^n` and the real
//! parametrizations that place assemblages and functionals inside it.
//!
//! A net is built by partitioning the cube into `(2l)^n` closed cells of
//! edge `1/l`, `l = ⌈1/ε⌉`, and keeping the first sampled point of `X` seen in
//! each cell. Every sampled point then shares a cell with a net point, so it
//! lies within `1/l ≤ ε` of it in the ∞-norm.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lhv::BellFunctional;
use crate::quantum::{hermitian_eigen, Assemblage, CMatrix, POVM_TOL};

/// Largest ambient dimension accepted by [`HypercubeNet::build`].
pub const MAX_NET_DIM: usize = 12;

/// `n · log(2/ε + 2)`, the log of the bound on the size of an ε-net.
pub fn net_size_bound(n: usize, epsilon: f64) -> f64 {
    n as f64 * (2.0 / epsilon + 2.0).ln()
}

/// `l = ⌈1/ε⌉`.
pub fn grid_resolution(epsilon: f64) -> usize {
    (1.0 / epsilon).ceil() as usize
}

/// Index of the cell containing `x ∈ [−1,1]` along one axis. Cell `j` is
/// `(j/l − 1, (j+1)/l − 1]`, except cell 0 which also contains −1, so a point
/// on a shared face belongs to the lower cell.
fn axis_cell(x: f64, l: usize) -> usize {
    let scaled = (l as f64 * (x + 1.0)).ceil() as i64 - 1;
    scaled.clamp(0, 2 * l as i64 - 1) as usize
}

#[derive(Clone, Debug)]
pub struct HypercubeNet {
    dim: usize,
    epsilon: f64,
    resolution: usize,
    points: Vec<Vec<f64>>,
    cells: HashMap<u64, usize>,
}

#[derive(Serialize, Deserialize)]
struct NetRecord {
    epsilon: f64,
    n: usize,
    points: Vec<Vec<f64>>,
}

impl HypercubeNet {
    /// Draws up to `budget` points from `sampler` (stopping early if it
    /// returns `None`) and keeps one representative per occupied cell.
    pub fn build<F>(dim: usize, epsilon: f64, budget: usize, mut sampler: F) -> Result<Self>
    where
        F: FnMut() -> Option<Vec<f64>>,
    {
        let mut net = Self::empty(dim, epsilon)?;
        let mut drawn = 0;
        while drawn < budget {
            let Some(x) = sampler() else { break };
            drawn += 1;
            net.insert(x)?;
        }
        if net.points.is_empty() {
            return Err(Error::EmptyNet { budget });
        }
        Ok(net)
    }

    fn empty(dim: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Precondition(format!("need 0 < ε < 1, got {epsilon}")));
        }
        if dim > MAX_NET_DIM {
            return Err(Error::Precondition(format!(
                "net construction limited to n ≤ {MAX_NET_DIM}, got {dim}"
            )));
        }
        let resolution = grid_resolution(epsilon);
        if (2 * resolution as u64).checked_pow(dim as u32).is_none() {
            return Err(Error::Precondition(format!(
                "(2l)^n cells do not fit a 64-bit key for l = {resolution}, n = {dim}"
            )));
        }
        Ok(Self {
            dim,
            epsilon,
            resolution,
            points: Vec::new(),
            cells: HashMap::new(),
        })
    }

    fn cell_key(&self, x: &[f64]) -> u64 {
        let side = 2 * self.resolution as u64;
        x.iter()
            .fold(0, |key, &c| key * side + axis_cell(c, self.resolution) as u64)
    }

    fn insert(&mut self, x: Vec<f64>) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        if x.iter().any(|c| !(-1.0..=1.0).contains(c)) {
            return Err(Error::Precondition("sample outside [−1,1]^n".into()));
        }
        let key = self.cell_key(&x);
        if self.cells.contains_key(&key) {
            return Ok(false);
        }
        self.cells.insert(key, self.points.len());
        self.points.push(x);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The representative of the cell containing `x`, with its ∞-distance to
    /// `x`; `None` when that cell holds no sampled point.
    pub fn witness(&self, x: &[f64]) -> Option<(&[f64], f64)> {
        if x.len() != self.dim {
            return None;
        }
        let idx = *self.cells.get(&self.cell_key(x))?;
        let p = &self.points[idx];
        Some((p, sup_distance(p, x)))
    }

    /// Nearest net point in the ∞-norm, by exhaustive scan.
    pub fn nearest(&self, x: &[f64]) -> Option<(&[f64], f64)> {
        self.points
            .iter()
            .map(|p| (p.as_slice(), sup_distance(p, x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&NetRecord {
            epsilon: self.epsilon,
            n: self.dim,
            points: self.points.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: NetRecord = serde_json::from_str(text)?;
        let mut net = Self::empty(record.n, record.epsilon)?;
        for p in record.points {
            if !net.insert(p)? {
                return Err(Error::Consistency("two net points share a cell".into()));
            }
        }
        Ok(net)
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Which family a parameter vector encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamBlock {
    /// `d²·m·v·N` coordinates, one `d²` block per POVM element.
    Assemblage,
    /// `(mv)^N` coordinates `T/b`.
    Functional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub coords: Vec<f64>,
    pub block: ParamBlock,
}

/// Real coordinates of a Hermitian `d × d` matrix: the diagonal, then the
/// real and imaginary parts of the strict upper triangle in row-major order.
pub fn povm_to_params(element: &CMatrix) -> Result<Vec<f64>> {
    let d = element.nrows();
    if element.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {d}×{}",
            element.ncols()
        )));
    }
    let mut params = Vec::with_capacity(d * d);
    for i in 0..d {
        params.push(element[(i, i)].re);
    }
    for i in 0..d {
        for j in i..d {
            let skew = (element[(i, j)] - element[(j, i)].conj()).norm();
            if skew > POVM_TOL {
                return Err(Error::Precondition(format!(
                    "matrix not Hermitian at ({i},{j}) (deviation {skew:e})"
                )));
            }
            if j > i {
                params.push(element[(i, j)].re);
                params.push(element[(i, j)].im);
            }
        }
    }
    Ok(params)
}

/// Whether a rebuilt Hermitian matrix is a valid POVM element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementCheck {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `0 ≤ Π ≤ I` within [`POVM_TOL`].
    pub valid: bool,
}

/// Inverse of [`povm_to_params`].
pub fn params_to_hermitian(params: &[f64]) -> Result<(CMatrix, ElementCheck)> {
    let d = (params.len() as f64).sqrt().round() as usize;
    if d * d != params.len() || d == 0 {
        return Err(Error::LengthMismatch {
            expected: d.max(1).pow(2),
            actual: params.len(),
        });
    }
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(params[i], 0.0);
    }
    let mut next = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = Complex64::new(params[next], params[next + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            next += 2;
        }
    }
    let (values, _) = hermitian_eigen(&m);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let check = ElementCheck {
        min_eigenvalue: min,
        max_eigenvalue: max,
        valid: min >= -POVM_TOL && max <= 1.0 + POVM_TOL,
    };
    Ok((m, check))
}

/// Concatenated parameters of every POVM element, in (party, setting,
/// outcome) order.
pub fn assemblage_params(assemblage: &Assemblage) -> ParamVector {
    let mut coords = Vec::new();
    for povm in assemblage.povms() {
        for e in povm.elements() {
            coords.extend(povm_to_params(e).expect("assemblage elements are Hermitian"));
        }
    }
    ParamVector {
        coords,
        block: ParamBlock::Assemblage,
    }
}

/// `T / b`, a point of `[−1,1]^{(mv)^N}` when `T ∈ 𝒯_b`.
pub fn functional_params(functional: &BellFunctional, cap: f64) -> Result<ParamVector> {
    if !(cap > 0.0) {
        return Err(Error::Precondition(format!("need b > 0, got {cap}")));
    }
    Ok(ParamVector {
        coords: functional.coeffs().iter().map(|t| t / cap).collect(),
        block: ParamBlock::Functional,
    })
}

/// Largest coordinate difference between the parameter vectors of two
/// assemblages.
pub fn dist_assemblages(a: &Assemblage, b: &Assemblage) -> Result<f64> {
    if a.scenario() != b.scenario() || a.local_dim() != b.local_dim() {
        return Err(Error::ScenarioMismatch(format!(
            "assemblages on {:?}/d={} and {:?}/d={}",
            a.scenario(),
            a.local_dim(),
            b.scenario(),
            b.local_dim()
        )));
    }
    let (pa, pb) = (assemblage_params(a), assemblage_params(b));
    Ok(sup_distance(&pa.coords, &pb.coords))
}

/// `‖T − T̃‖_max / b`.
pub fn dist_functionals(t: &BellFunctional, u: &BellFunctional, cap: f64) -> Result<f64> {
    if t.scenario() != u.scenario() {
        return Err(Error::ScenarioMismatch(format!(
            "{:?} vs {:?}",
            t.scenario(),
            u.scenario()
        )));
    }
    if !(cap > 0.0) {
        return Err(Error::Precondition(format!("need b > 0, got {cap}")));
    }
    Ok(sup_distance(t.coeffs(), u.coeffs()) / cap)
}

/// `max{dist_functionals, dist_assemblages}`.
pub fn dist_joint(
    first: (&BellFunctional, &Assemblage),
    second: (&BellFunctional, &Assemblage),
    cap: f64,
) -> Result<f64> {
    Ok(dist_functionals(first.0, second.0, cap)?.max(dist_assemblages(first.1, second.1)?))
}
