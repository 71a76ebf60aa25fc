//! Jacobi-preconditioned conjugate gradient on a simulated block
//! distribution.

use serde::Serialize;

use crate::distribution::DistributionMap;
use crate::error::{invalid, Error, Result};
use crate::sparse::CsrMatrix;
use crate::spmv::{tile_matrix, BlockedVector, MessageLog, SpmvPlan};

/// Iterations at which the residual is recomputed from scratch.
pub const RESIDUAL_REFRESH: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PcgOptions {
    pub i_max: usize,
    pub eps: f64,
    /// Pack vector blocks and partial sums to their nonzero structure.
    pub packing: bool,
}

impl Default for PcgOptions {
    fn default() -> Self {
        PcgOptions {
            i_max: 1000,
            eps: 1e-8,
            packing: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PcgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `δ = rᵀ M⁻¹ r`, starting with `δ₀`, one entry per iteration after.
    pub residual_history: Vec<f64>,
    pub spmv_count: usize,
    pub log: MessageLog,
}

type Blocks = Vec<Vec<f64>>;

fn zip_map(a: &Blocks, b: &Blocks, f: impl Fn(f64, f64) -> f64) -> Blocks {
    a.iter()
        .zip(b)
        .map(|(u, v)| u.iter().zip(v).map(|(&x, &y)| f(x, y)).collect())
        .collect()
}

struct Solver {
    plan: SpmvPlan,
    log: MessageLog,
    spmvs: usize,
}

impl Solver {
    fn spmv(&mut self, x: &Blocks) -> Result<Blocks> {
        let (y, log) = self.plan.execute(&BlockedVector { blocks: x.clone() })?;
        self.log.merge(&log);
        self.spmvs += 1;
        Ok(y.blocks)
    }

    /// Each process dots its own block; the scalars are summed at process 0
    /// in ascending order and broadcast back.
    fn dot(&mut self, a: &Blocks, b: &Blocks) -> f64 {
        let local: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(u, v)| u.iter().zip(v).fold(0.0, |acc, (x, y)| acc + x * y))
            .collect();
        self.log.record_allreduce();
        local.into_iter().fold(0.0, |acc, v| acc + v)
    }
}

fn finite(v: f64, what: &str, i: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("{what} became non-finite at iteration {i}")))
    }
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn pcg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &PcgOptions,
    dist: &DistributionMap,
) -> Result<PcgResult> {
    if !a.is_square() || b.len() != a.nrows() {
        return invalid("pcg needs a square matrix and a conforming right-hand side");
    }
    if !(opts.eps > 0.0 && opts.eps < 1.0) {
        return invalid("tolerance must lie in (0, 1)");
    }
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::Domain(format!("zero diagonal entry at row {i}; Jacobi preconditioner undefined")));
    }
    let blocked = tile_matrix(a, dist.n() as usize)?;
    let part = blocked.partition().clone();
    let split = |v: &[f64]| BlockedVector::split(&part, v).map(|bv| bv.blocks);
    let minv = split(&diag.iter().map(|d| 1.0 / d).collect::<Vec<_>>())?;
    let bb = split(b)?;
    let mut x = match x0 {
        Some(v) => split(v)?,
        None => split(&vec![0.0; a.nrows()])?,
    };
    let mut s = Solver {
        plan: SpmvPlan::new(dist, &blocked, opts.packing)?,
        log: MessageLog::new(dist.n() as usize),
        spmvs: 0,
    };

    let ax = s.spmv(&x)?;
    let mut r = zip_map(&bb, &ax, |u, v| u - v);
    let mut d = zip_map(&minv, &r, |m, v| m * v);
    let mut delta_new = s.dot(&r, &d);
    let delta_limit = opts.eps * opts.eps * delta_new;
    let mut history = vec![delta_new];
    let mut i = 0;
    while i < opts.i_max && delta_new > delta_limit {
        let q = s.spmv(&d)?;
        let alpha = finite(delta_new / s.dot(&d, &q), "step length", i)?;
        x = zip_map(&x, &d, |u, v| u + alpha * v);
        if i % RESIDUAL_REFRESH == 0 {
            let ax = s.spmv(&x)?;
            r = zip_map(&bb, &ax, |u, v| u - v);
        } else {
            r = zip_map(&r, &q, |u, v| u - alpha * v);
        }
        let sv = zip_map(&minv, &r, |m, v| m * v);
        let delta_old = delta_new;
        delta_new = finite(s.dot(&r, &sv), "residual", i)?;
        let beta = delta_new / delta_old;
        d = zip_map(&sv, &d, |u, v| u + beta * v);
        i += 1;
        history.push(delta_new);
    }
    Ok(PcgResult {
        x: x.concat(),
        iterations: i,
        converged: delta_new <= delta_limit,
        residual_history: history,
        spmv_count: s.spmvs,
        log: s.log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{projective_distribution, rowwise_distribution};

    #[test]
    fn identity_converges_in_one_step() {
        let a = CsrMatrix::identity(7);
        let b: Vec<f64> = (1..=7).map(|v| v as f64).collect();
        let res = pcg_solve(&a, &b, None, &PcgOptions::default(), &projective_distribution(2).unwrap()).unwrap();
        assert_eq!(res.iterations, 1);
        assert!(res.converged);
        assert_eq!(res.x, b);
    }

    #[test]
    fn zero_diagonal_is_rejected() {
        let a = CsrMatrix::from_triplets(7, 7, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let err = pcg_solve(&a, &[1.0; 7], None, &PcgOptions::default(), &rowwise_distribution(7).unwrap());
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn imax_zero_returns_start() {
        let a = CsrMatrix::identity(7);
        let opts = PcgOptions {
            i_max: 0,
            ..Default::default()
        };
        let res = pcg_solve(&a, &[1.0; 7], None, &opts, &rowwise_distribution(7).unwrap()).unwrap();
        assert_eq!(res.iterations, 0);
        assert!(!res.converged);
        assert_eq!(res.x, vec![0.0; 7]);
    }
}
