//! Dense tableau simplex for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The origin is feasible, so no phase one is needed. Pivoting follows
//! Bland's rule (smallest eligible entering index, ties in the ratio test
//! broken by smallest basic index), which rules out cycling and makes the
//! returned vertex a deterministic function of the input.

use crate::error::{Error, Result};

pub(crate) const MAX_TABLEAU_ENTRIES: usize = 20_000_000;

const PIVOT_EPS: f64 = 1e-12;

pub(crate) struct LinearProgram {
    vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, f64)>,
}

pub(crate) struct Solution {
    pub x: Vec<f64>,
    #[allow(dead_code)]
    pub value: f64,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        Self {
            vars,
            objective: vec![0.0; vars],
            rows: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) {
        assert_eq!(objective.len(), self.vars);
        self.objective = objective;
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.vars);
        assert!(rhs >= 0.0, "right-hand side must be nonnegative");
        self.rows.push((row, rhs));
    }

    pub fn maximize(&self) -> Result<Solution> {
        let n = self.vars;
        let r = self.rows.len();
        let width = n + r + 1;
        let rhs_col = n + r;
        let mut tab = vec![0.0; (r + 1) * width];
        for (i, (row, rhs)) in self.rows.iter().enumerate() {
            let base = i * width;
            tab[base..base + n].copy_from_slice(row);
            tab[base + n + i] = 1.0;
            tab[base + rhs_col] = *rhs;
        }
        // objective row holds reduced costs cⱼ − zⱼ
        let obj = r * width;
        tab[obj..obj + n].copy_from_slice(&self.objective);

        let mut basis: Vec<usize> = (n..n + r).collect();
        let max_iters = 50 * (n + r).max(100);
        for _ in 0..max_iters {
            let entering = match (0..n + r).find(|&j| tab[obj + j] > PIVOT_EPS) {
                Some(j) => j,
                None => {
                    let mut x = vec![0.0; n];
                    for (i, &b) in basis.iter().enumerate() {
                        if b < n {
                            x[b] = tab[i * width + rhs_col];
                        }
                    }
                    let value = x.iter().zip(&self.objective).map(|(a, c)| a * c).sum();
                    return Ok(Solution { x, value });
                }
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..r {
                let a = tab[i * width + entering];
                if a > PIVOT_EPS {
                    let ratio = tab[i * width + rhs_col] / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || (ratio <= lr + 1e-14 && basis[i] < basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let (pivot_row, _) = leaving.ok_or_else(|| {
                Error::Consistency("linear program is unbounded".into())
            })?;
            pivot(&mut tab, width, r + 1, pivot_row, entering);
            basis[pivot_row] = entering;
        }
        Err(Error::Convergence {
            iterations: max_iters,
            residual: f64::NAN,
        })
    }
}

fn pivot(tab: &mut [f64], width: usize, rows: usize, pr: usize, pc: usize) {
    let p = tab[pr * width + pc];
    for j in 0..width {
        tab[pr * width + j] /= p;
    }
    let pivot_row: Vec<f64> = tab[pr * width..(pr + 1) * width].to_vec();
    for i in 0..rows {
        if i == pr {
            continue;
        }
        let f = tab[i * width + pc];
        if f == 0.0 {
            continue;
        }
        let row = &mut tab[i * width..(i + 1) * width];
        for (t, &q) in row.iter_mut().zip(&pivot_row) {
            *t -= f * q;
        }
        row[pc] = 0.0;
    }
}
