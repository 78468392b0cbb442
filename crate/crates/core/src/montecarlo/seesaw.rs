//! Coordinate ascent over measurements for a fixed state.
//!
//! With every party but `k` fixed, `Q = Σ_{x,a} Tr(Π^k_{a,x} F_{x,a})` where
//! `F_{x,a} = Tr_{−k}[(I ⊗ O_{x,a}) |ψ⟩⟨ψ|]` and `O_{x,a}` collects the
//! coefficients with `(aₖ, xₖ) = (a, x)` against the other parties'
//! elements. Each setting's POVM is then improved independently.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lhv::BellFunctional;
use crate::quantum::{
    apply_local, hermitian_fn, hermitian_part, spectral_projector, Assemblage, BellOperator,
    CMatrix, LocalOps, PureState, DEFAULT_MAX_ITERS,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Improvement below which pairwise updates for `v > 2` stop cycling.
const PAIR_TOL: f64 = 1e-10;
const MAX_PAIR_ROUNDS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeesawOptions {
    /// Cap on full sweeps over all parties.
    pub max_sweeps: usize,
    /// A sweep improving `Q` by less than this ends the run.
    pub tol: f64,
    /// Start restarts from projective rather than general random POVMs.
    pub projective_init: bool,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 200,
            tol: 1e-9,
            projective_init: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawResult {
    pub assemblage: Assemblage,
    pub value: f64,
    /// `Q` at the start and after every sweep.
    pub trace: Vec<f64>,
    pub sweeps: usize,
    /// False when the sweep cap was reached first.
    pub converged: bool,
}

fn check_shapes(state: &PureState, functional: &BellFunctional, assemblage: &Assemblage) -> Result<()> {
    let s = assemblage.scenario();
    if functional.scenario() != s {
        return Err(Error::ScenarioMismatch(format!(
            "functional {:?} vs assemblage {:?}",
            functional.scenario(),
            s
        )));
    }
    if state.parties() != s.parties() || state.local_dim() != assemblage.local_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state on (ℂ^{})^⊗{}, assemblage on (ℂ^{})^⊗{}",
            state.local_dim(),
            state.parties(),
            assemblage.local_dim(),
            s.parties()
        )));
    }
    Ok(())
}

/// `F_{x,a}` for `party`, indexed `x·v + a`.
fn effective_operators(
    state: &PureState,
    functional: &BellFunctional,
    assemblage: &Assemblage,
    party: usize,
) -> Vec<CMatrix> {
    let s = assemblage.scenario();
    let (n, m, v) = (s.parties(), s.settings(), s.outcomes());
    let d = assemblage.local_dim();
    let ops = LocalOps::new(assemblage);
    let psi = state.amplitudes();
    let coeffs = functional.coeffs();
    let v_stride = v.pow((n - 1 - party) as u32);
    let m_stride = m.pow((n - 1 - party) as u32);

    let mut phis = vec![vec![ZERO; psi.len()]; m * v];
    let mut bufs = vec![psi.to_vec(); n + 1];
    let mut walk = Walk {
        ops: &ops,
        n,
        m,
        v,
        d,
        skip: party,
    };
    walk.descend(&mut bufs, 0, 0, 0, &mut |oi, si, leaf| {
        let t = coeffs[s.join(oi, si)];
        if t == 0.0 {
            return;
        }
        let (a, x) = ((oi / v_stride) % v, (si / m_stride) % m);
        for (o, &z) in phis[x * v + a].iter_mut().zip(leaf) {
            *o += z * t;
        }
    });

    let inner = d.pow((n - 1 - party) as u32);
    let block = d * inner;
    phis.iter()
        .map(|phi| {
            let mut f = CMatrix::zeros(d, d);
            for base in (0..psi.len()).step_by(block) {
                for j in 0..d {
                    let pj = &phi[base + j * inner..base + (j + 1) * inner];
                    for i in 0..d {
                        let qi = &psi[base + i * inner..base + (i + 1) * inner];
                        f[(j, i)] += pj.iter().zip(qi).map(|(p, q)| p * q.conj()).sum::<Complex64>();
                    }
                }
            }
            hermitian_part(&f)
        })
        .collect()
}

struct Walk<'a> {
    ops: &'a LocalOps,
    n: usize,
    m: usize,
    v: usize,
    d: usize,
    skip: usize,
}

impl Walk<'_> {
    fn descend(
        &mut self,
        bufs: &mut [Vec<Complex64>],
        level: usize,
        oi: usize,
        si: usize,
        leaf: &mut dyn FnMut(usize, usize, &[Complex64]),
    ) {
        if level == self.n {
            leaf(oi, si, &bufs[self.n]);
            return;
        }
        for x in 0..self.m {
            for a in 0..self.v {
                let (head, tail) = bufs.split_at_mut(level + 1);
                if level == self.skip {
                    tail[0].copy_from_slice(&head[level]);
                } else {
                    apply_local(self.ops.get(level, x, a), self.d, level, self.n, &head[level], &mut tail[0]);
                }
                self.descend(bufs, level + 1, oi * self.v + a, si * self.m + x, leaf);
            }
        }
    }
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Best POVM for one setting given its effective operators; keeps the
/// current elements whenever the update would not improve on them.
fn improve_setting(elements: &mut [CMatrix], fs: &[CMatrix]) {
    let d = elements[0].nrows();
    let value = |els: &[CMatrix]| -> f64 { els.iter().zip(fs).map(|(e, f)| trace_product(e, f)).sum() };
    if elements.len() == 2 {
        let p = spectral_projector(&(&fs[0] - &fs[1]), |l| l >= 0.0);
        let candidate = [p.clone(), CMatrix::identity(d, d) - p];
        if value(&candidate) >= value(elements) {
            elements.clone_from_slice(&candidate);
        }
        return;
    }
    for _ in 0..MAX_PAIR_ROUNDS {
        let mut improved = false;
        for a in 0..elements.len() {
            for b in a + 1..elements.len() {
                let total = &elements[a] + &elements[b];
                let root = hermitian_fn(&total, |l| l.max(0.0).sqrt());
                let p = spectral_projector(&(&root * (&fs[a] - &fs[b]) * &root), |l| l >= 0.0);
                let new_a = hermitian_part(&(&root * p * &root));
                let new_b = hermitian_part(&(&total - &new_a));
                let gain = trace_product(&new_a, &fs[a]) + trace_product(&new_b, &fs[b])
                    - trace_product(&elements[a], &fs[a])
                    - trace_product(&elements[b], &fs[b]);
                if gain > 0.0 {
                    elements[a] = new_a;
                    elements[b] = new_b;
                    improved |= gain > PAIR_TOL;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Maximizes `Q(ψ, T, A)` over `A` by party-wise exact block updates.
pub fn seesaw_measurements(
    state: &PureState,
    functional: &BellFunctional,
    start: &Assemblage,
    options: &SeesawOptions,
) -> Result<SeesawResult> {
    check_shapes(state, functional, start)?;
    let s = start.scenario();
    let (m, v) = (s.settings(), s.outcomes());
    let mut assemblage = start.clone();
    let initial = BellOperator::new(functional, &assemblage)?.expectation(state)?;
    let mut trace = vec![initial];
    let mut current = initial;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < options.max_sweeps {
        sweeps += 1;
        let mut value = current;
        for k in 0..s.parties() {
            let fs = effective_operators(state, functional, &assemblage, k);
            value = 0.0;
            for x in 0..m {
                let povm = assemblage.povm_mut(k, x);
                let block = &fs[x * v..(x + 1) * v];
                improve_setting(povm.elements_mut(), block);
                value += povm
                    .elements()
                    .iter()
                    .zip(block)
                    .map(|(e, f)| trace_product(e, f))
                    .sum::<f64>();
            }
        }
        trace.push(value);
        let gain = value - current;
        current = value;
        if gain < options.tol {
            converged = true;
            break;
        }
    }
    Ok(SeesawResult {
        assemblage,
        value: current,
        trace,
        sweeps,
        converged,
    })
}

/// Top eigenvector of `𝔅_{T,A}` and its eigenvalue, the largest `Q` over
/// states for fixed `(T, A)`.
pub fn optimize_state(
    functional: &BellFunctional,
    assemblage: &Assemblage,
    tol: f64,
) -> Result<(PureState, f64)> {
    let op = BellOperator::new(functional, assemblage)?;
    let (value, vector) = op.top_eigenpair(tol, DEFAULT_MAX_ITERS)?;
    let state = PureState::new(assemblage.local_dim(), assemblage.scenario().parties(), vector)?;
    Ok((state, value))
}

#[derive(Clone, Debug)]
pub struct JointOptimum {
    pub state: PureState,
    pub assemblage: Assemblage,
    pub value: f64,
    pub rounds: usize,
}

/// Alternates [`optimize_state`] and [`seesaw_measurements`] from `start`
/// until a round gains less than `options.tol`.
pub fn optimize_jointly(
    functional: &BellFunctional,
    start: &Assemblage,
    options: &SeesawOptions,
    max_rounds: usize,
) -> Result<JointOptimum> {
    let mut assemblage = start.clone();
    let (mut state, mut value) = optimize_state(functional, &assemblage, options.tol * 1e-2)?;
    let mut rounds = 0;
    while rounds < max_rounds {
        rounds += 1;
        let run = seesaw_measurements(&state, functional, &assemblage, options)?;
        assemblage = run.assemblage;
        let (next_state, next) = optimize_state(functional, &assemblage, options.tol * 1e-2)?;
        state = next_state;
        let gain = next - value;
        value = next.max(value);
        if gain < options.tol {
            break;
        }
    }
    Ok(JointOptimum {
        state,
        assemblage,
        value,
        rounds,
    })
}

/// Random starting assemblage for a restart.
pub fn random_start<R: Rng + ?Sized>(
    functional: &BellFunctional,
    local_dim: usize,
    projective: bool,
    rng: &mut R,
) -> Result<Assemblage> {
    if projective {
        Assemblage::random_projective(functional.scenario(), local_dim, rng)
    } else {
        Assemblage::random(functional.scenario(), local_dim, rng)
    }
}
