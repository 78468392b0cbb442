//! Bell operators `𝔅_{T,A} = Σ T_{a⃗|x⃗} ⊗ₖ Π^k_{aₖ,xₖ}` acting on state
//! vectors through single-site contractions.
//!
//! Nothing here builds a `d^N × d^N` matrix except [`BellOperator::to_dense`],
//! which is capped at [`DENSE_DIM_LIMIT`].

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::assemblage::Assemblage;
use super::povm::CMatrix;
use super::state::{inner, norm, sample_haar_state, PureState};
use crate::error::{Error, Result};
use crate::lhv::BellFunctional;
use crate::scenario::{Behaviour, Scenario};

/// Largest joint dimension `d^N` for which a dense operator may be built.
pub const DENSE_DIM_LIMIT: usize = 1024;

/// Default tolerance of the power iterations.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-9;
/// Default iteration cap of the power iterations.
pub const DEFAULT_MAX_ITERS: usize = 10_000;

const START_SEED: u64 = 0xb311_5eed;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Row-major copies of every POVM element, indexed `((k·m + x)·v + a)`.
#[derive(Clone, Debug)]
pub(crate) struct LocalOps {
    scenario: Scenario,
    d: usize,
    ops: Vec<Vec<Complex64>>,
}

impl LocalOps {
    pub(crate) fn new(assemblage: &Assemblage) -> Self {
        let s = assemblage.scenario();
        let d = assemblage.local_dim();
        let mut ops = Vec::with_capacity(s.parties() * s.settings() * s.outcomes());
        for k in 0..s.parties() {
            for x in 0..s.settings() {
                for a in 0..s.outcomes() {
                    ops.push(row_major(assemblage.element(k, x, a)));
                }
            }
        }
        Self { scenario: s, d, ops }
    }

    #[inline]
    pub(crate) fn get(&self, party: usize, setting: usize, outcome: usize) -> &[Complex64] {
        let s = self.scenario;
        &self.ops[(party * s.settings() + setting) * s.outcomes() + outcome]
    }
}

pub(crate) fn row_major(m: &CMatrix) -> Vec<Complex64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * m.ncols());
    for i in 0..d {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// `output = (I ⊗ … ⊗ op ⊗ … ⊗ I) input` with `op` (row-major `d × d`) on
/// site `party` of `parties`.
pub(crate) fn apply_local(
    op: &[Complex64],
    d: usize,
    party: usize,
    parties: usize,
    input: &[Complex64],
    output: &mut [Complex64],
) {
    let inner = d.pow((parties - 1 - party) as u32);
    let block = d * inner;
    for base in (0..input.len()).step_by(block) {
        let src = &input[base..base + block];
        let dst = &mut output[base..base + block];
        for i in 0..d {
            let row = &op[i * d..(i + 1) * d];
            let out = &mut dst[i * inner..(i + 1) * inner];
            out.iter_mut().for_each(|z| *z = ZERO);
            for (j, &c) in row.iter().enumerate() {
                if c == ZERO {
                    continue;
                }
                let col = &src[j * inner..(j + 1) * inner];
                for (o, &z) in out.iter_mut().zip(col) {
                    *o += c * z;
                }
            }
        }
    }
}

fn check_dims(
    functional: Option<&BellFunctional>,
    assemblage: &Assemblage,
    local_dim: usize,
    parties: usize,
) -> Result<()> {
    let s = assemblage.scenario();
    if let Some(t) = functional {
        if t.scenario() != s {
            return Err(Error::ScenarioMismatch(format!(
                "functional {:?} vs assemblage {:?}",
                t.scenario(),
                s
            )));
        }
    }
    if assemblage.local_dim() != local_dim || s.parties() != parties {
        return Err(Error::DimensionMismatch(format!(
            "state on (ℂ^{local_dim})^⊗{parties}, assemblage on (ℂ^{})^⊗{}",
            assemblage.local_dim(),
            s.parties()
        )));
    }
    Ok(())
}

/// Born-rule behaviour `p(a⃗|x⃗) = ⟨ψ| ⊗ₖ Π^k_{aₖ,xₖ} |ψ⟩`.
///
/// Walks the tree of partial products depth first; a node at depth `k`
/// carries `(⊗_{j<k} Π^j) ψ`, so prefixes are shared across all outcomes and
/// settings of the remaining parties.
pub fn behaviour_of(state: &PureState, assemblage: &Assemblage) -> Result<Behaviour> {
    check_dims(None, assemblage, state.local_dim(), state.parties())?;
    let s = assemblage.scenario();
    let ops = LocalOps::new(assemblage);
    let mut probs = vec![0.0; s.behaviour_len()];
    let mut bufs = vec![state.amplitudes().to_vec(); s.parties() + 1];
    descend(&ops, &mut bufs, 0, 0, 0, &mut |oi, si, leaf| {
        probs[s.join(oi, si)] = inner(state.amplitudes(), leaf).re;
    });
    Behaviour::new(s, probs)
}

fn descend(
    ops: &LocalOps,
    bufs: &mut [Vec<Complex64>],
    level: usize,
    oi: usize,
    si: usize,
    leaf: &mut dyn FnMut(usize, usize, &[Complex64]),
) {
    descend_pruned(ops, bufs, level, oi, si, None, leaf)
}

fn descend_pruned(
    ops: &LocalOps,
    bufs: &mut [Vec<Complex64>],
    level: usize,
    oi: usize,
    si: usize,
    support: Option<&Support>,
    leaf: &mut dyn FnMut(usize, usize, &[Complex64]),
) {
    let s = ops.scenario;
    let n = s.parties();
    if level == n {
        leaf(oi, si, &bufs[n]);
        return;
    }
    for x in 0..s.settings() {
        for a in 0..s.outcomes() {
            let (noi, nsi) = (oi * s.outcomes() + a, si * s.settings() + x);
            if let Some(sup) = support {
                if !sup.any(level + 1, noi, nsi) {
                    continue;
                }
            }
            let (head, tail) = bufs.split_at_mut(level + 1);
            apply_local(ops.get(level, x, a), ops.d, level, n, &head[level], &mut tail[0]);
            descend_pruned(ops, bufs, level + 1, noi, nsi, support, leaf);
        }
    }
}

/// Which prefixes `(a₁…a_k | x₁…x_k)` carry a nonzero coefficient below them.
struct Support {
    /// `levels[k][oi_prefix · m^k + si_prefix]`
    levels: Vec<Vec<bool>>,
    settings_pow: Vec<usize>,
}

impl Support {
    fn new(t: &BellFunctional) -> Self {
        let s = t.scenario();
        let (n, m, v) = (s.parties(), s.settings(), s.outcomes());
        let settings_pow: Vec<usize> = (0..=n).map(|k| m.pow(k as u32)).collect();
        let mut levels = vec![Vec::new(); n + 1];
        levels[n] = t.coeffs().iter().map(|&c| c != 0.0).collect();
        for k in (0..n).rev() {
            let (mk, mk1) = (settings_pow[k], settings_pow[k + 1]);
            let mut cur = vec![false; v.pow(k as u32) * mk];
            for (idx, flag) in cur.iter_mut().enumerate() {
                let (oi, si) = (idx / mk, idx % mk);
                *flag = (0..v).any(|a| {
                    (0..m).any(|x| levels[k + 1][(oi * v + a) * mk1 + si * m + x])
                });
            }
            levels[k] = cur;
        }
        Self {
            levels,
            settings_pow,
        }
    }

    fn any(&self, level: usize, oi: usize, si: usize) -> bool {
        self.levels[level][oi * self.settings_pow[level] + si]
    }
}

/// A Bell operator prepared for repeated application.
pub struct BellOperator {
    functional: BellFunctional,
    ops: LocalOps,
    support: Support,
    local_dim: usize,
}

impl BellOperator {
    pub fn new(functional: &BellFunctional, assemblage: &Assemblage) -> Result<Self> {
        let s = assemblage.scenario();
        check_dims(Some(functional), assemblage, assemblage.local_dim(), s.parties())?;
        Ok(Self {
            functional: functional.clone(),
            ops: LocalOps::new(assemblage),
            support: Support::new(functional),
            local_dim: assemblage.local_dim(),
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.ops.scenario
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// `d^N`.
    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.scenario().parties() as u32)
    }

    /// `𝔅 φ`.
    pub fn apply(&self, phi: &[Complex64]) -> Result<Vec<Complex64>> {
        if phi.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                actual: phi.len(),
            });
        }
        let s = self.scenario();
        let coeffs = self.functional.coeffs();
        let mut out = vec![ZERO; phi.len()];
        let mut bufs = vec![phi.to_vec(); s.parties() + 1];
        descend_pruned(
            &self.ops,
            &mut bufs,
            0,
            0,
            0,
            Some(&self.support),
            &mut |oi, si, leaf| {
                let t = coeffs[s.join(oi, si)];
                for (o, &z) in out.iter_mut().zip(leaf) {
                    *o += z * t;
                }
            },
        );
        Ok(out)
    }

    /// `⟨ψ|𝔅|ψ⟩` computed from [`BellOperator::apply`].
    pub fn expectation(&self, state: &PureState) -> Result<f64> {
        let b_psi = self.apply(state.amplitudes())?;
        Ok(inner(state.amplitudes(), &b_psi).re)
    }

    /// `Tr(𝔅)/d^N = Σ T_{a⃗|x⃗} Πₖ Tr(Π^k_{aₖ,xₖ})/d`, the expectation in the
    /// maximally mixed state.
    pub fn normalized_trace(&self) -> f64 {
        let s = self.scenario();
        let d = self.local_dim;
        let local: Vec<Vec<Vec<f64>>> = (0..s.parties())
            .map(|k| {
                (0..s.settings())
                    .map(|x| {
                        (0..s.outcomes())
                            .map(|a| {
                                let op = self.ops.get(k, x, a);
                                (0..d).map(|i| op[i * d + i].re).sum::<f64>() / d as f64
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mixed = Behaviour::product(s, &local).expect("shapes match");
        self.functional.evaluate(&mixed).expect("scenarios match")
    }

    /// The full `d^N × d^N` matrix, built by Kronecker recursion from the last
    /// party. Only for `d^N ≤ DENSE_DIM_LIMIT`.
    pub fn to_dense(&self) -> Result<CMatrix> {
        let dim = self.dim();
        if dim > DENSE_DIM_LIMIT {
            return Err(Error::DimensionMismatch(format!(
                "dense Bell operator of dimension {dim} exceeds limit {DENSE_DIM_LIMIT}"
            )));
        }
        Ok(self.dense_suffix(0, 0, 0))
    }

    fn dense_suffix(&self, level: usize, oi: usize, si: usize) -> CMatrix {
        let s = self.scenario();
        let n = s.parties();
        if level == n {
            let t = self.functional.coeffs()[s.join(oi, si)];
            return CMatrix::from_element(1, 1, Complex64::new(t, 0.0));
        }
        let d = self.local_dim;
        let size = d.pow((n - level) as u32);
        let mut acc = CMatrix::zeros(size, size);
        for x in 0..s.settings() {
            for a in 0..s.outcomes() {
                let (noi, nsi) = (oi * s.outcomes() + a, si * s.settings() + x);
                if !self.support.any(level + 1, noi, nsi) {
                    continue;
                }
                let rest = self.dense_suffix(level + 1, noi, nsi);
                let op = CMatrix::from_row_slice(d, d, self.ops.get(level, x, a));
                acc += op.kronecker(&rest);
            }
        }
        acc
    }

    /// Largest `|λ|` of `𝔅`, by power iteration on `𝔅²`.
    pub fn norm(&self, tol: f64, max_iters: usize) -> Result<f64> {
        let mut x = start_vector(self.dim(), self.local_dim, self.scenario().parties());
        let mut estimate = f64::NAN;
        let mut residual = f64::INFINITY;
        for _ in 0..max_iters {
            let bx = self.apply(&x)?;
            let bbx = self.apply(&bx)?;
            // ⟨x|𝔅²|x⟩ = ‖𝔅x‖²
            let rayleigh = norm(&bx).powi(2);
            let size = norm(&bbx);
            if size <= f64::MIN_POSITIVE {
                return Ok(0.0);
            }
            residual = bbx
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b * rayleigh).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let converged = (rayleigh - estimate).abs() <= tol * rayleigh.max(f64::MIN_POSITIVE)
                || residual <= tol * rayleigh;
            estimate = rayleigh;
            if converged {
                return Ok(estimate.sqrt());
            }
            x = bbx.into_iter().map(|z| z / size).collect();
        }
        Err(Error::Convergence {
            iterations: max_iters,
            residual,
        })
    }

    /// Largest (signed) eigenvalue and a unit eigenvector, by power iteration
    /// on `𝔅 + σI` with `σ` the spectral norm, which makes the spectrum
    /// nonnegative and puts the top eigenvalue on top.
    pub fn top_eigenpair(&self, tol: f64, max_iters: usize) -> Result<(f64, Vec<Complex64>)> {
        let shift = self.norm(tol.min(DEFAULT_EIGEN_TOL), max_iters)?;
        let mut x = start_vector(self.dim(), self.local_dim, self.scenario().parties());
        let mut estimate = f64::NAN;
        let mut residual = f64::INFINITY;
        for _ in 0..max_iters {
            let bx = self.apply(&x)?;
            let rayleigh = inner(&x, &bx).re;
            residual = bx
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b * rayleigh).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale = 1.0_f64.max(rayleigh.abs());
            if (rayleigh - estimate).abs() <= tol * 1e-3 * scale && residual <= tol.sqrt() * scale
                || residual <= tol * scale
            {
                return Ok((rayleigh, x));
            }
            estimate = rayleigh;
            let mut y: Vec<Complex64> = bx.iter().zip(&x).map(|(b, z)| b + z * shift).collect();
            let n = norm(&y);
            if n <= f64::MIN_POSITIVE {
                // 𝔅 = −σI on x: x is already an eigenvector
                return Ok((rayleigh, x));
            }
            y.iter_mut().for_each(|z| *z /= n);
            x = y;
        }
        Err(Error::Convergence {
            iterations: max_iters,
            residual,
        })
    }
}

fn start_vector(dim: usize, d: usize, n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let state = sample_haar_state(d.max(2), n, &mut rng).expect("dimension already validated");
    let mut v = state.amplitudes().to_vec();
    v.truncate(dim);
    v
}

/// `Q(ψ, T, A) = Σ T_{a⃗|x⃗} p(a⃗|x⃗)` with `p = behaviour_of(ψ, A)`.
pub fn evaluate_q(state: &PureState, functional: &BellFunctional, assemblage: &Assemblage) -> Result<f64> {
    check_dims(Some(functional), assemblage, state.local_dim(), state.parties())?;
    functional.evaluate(&behaviour_of(state, assemblage)?)
}

/// `𝔅_{T,A} φ`.
pub fn bell_operator_apply(
    functional: &BellFunctional,
    assemblage: &Assemblage,
    phi: &[Complex64],
) -> Result<Vec<Complex64>> {
    BellOperator::new(functional, assemblage)?.apply(phi)
}

/// Spectral norm `max |λ(𝔅_{T,A})|`.
pub fn operator_norm(functional: &BellFunctional, assemblage: &Assemblage, tol: f64) -> Result<f64> {
    BellOperator::new(functional, assemblage)?.norm(tol, DEFAULT_MAX_ITERS)
}
