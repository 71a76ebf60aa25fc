//! Blocked LU problem definition and the sequential reference
//! factorization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense;
use crate::error::{invalid, Result};

/// A dense `N × N` matrix to be factored in `b × b` blocks.
#[derive(Clone, Debug)]
pub struct BlockLUProblem {
    n: usize,
    b: usize,
    a: Vec<f64>,
}

impl BlockLUProblem {
    pub fn new(n: usize, b: usize, a: Vec<f64>) -> Result<Self> {
        if b == 0 || n == 0 || !n.is_multiple_of(b) {
            return invalid(format!("matrix order {n} is not a positive multiple of block size {b}"));
        }
        if a.len() != n * n {
            return invalid("matrix data does not match its order");
        }
        Ok(BlockLUProblem { n, b, a })
    }

    /// Random dense matrix with entries in `[-1, 1)` and a diagonal that
    /// strictly dominates each row, so pivot-free elimination is safe.
    pub fn diag_dominant(n: usize, b: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[i * n + j].abs()).sum();
            a[i * n + i] = off + 1.0;
        }
        Self::new(n, b, a)
    }

    /// Symmetric positive definite variant of [`Self::diag_dominant`].
    pub fn spd(n: usize, b: usize, seed: u64) -> Result<Self> {
        let base = Self::diag_dominant(n, b, seed)?;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 0.5 * (base.a[i * n + j] + base.a[j * n + i]);
            }
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[i * n + j].abs()).sum();
            a[i * n + i] = off + 1.0;
        }
        Self::new(n, b, a)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.b
    }

    /// Number of block rows `B = N / b`.
    pub fn blocks(&self) -> usize {
        self.n / self.b
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn block(&self, j: usize, k: usize) -> Vec<f64> {
        let b = self.b;
        let mut out = Vec::with_capacity(b * b);
        for r in 0..b {
            let row = (j * b + r) * self.n + k * b;
            out.extend_from_slice(&self.a[row..row + b]);
        }
        out
    }
}

/// Block-wise `L\U` overlay: strictly lower blocks hold `L`, the upper blocks
/// hold `U`, diagonal blocks hold both (unit diagonal of `L` implied).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockFactors {
    n: usize,
    b: usize,
    blocks: Vec<Vec<f64>>,
}

impl BlockFactors {
    pub fn from_blocks(n: usize, b: usize, blocks: Vec<Vec<f64>>) -> Self {
        BlockFactors { n, b, blocks }
    }

    pub fn block(&self, j: usize, k: usize) -> &[f64] {
        &self.blocks[j * (self.n / self.b) + k]
    }

    /// The overlay as one dense row-major matrix.
    pub fn overlay(&self) -> Vec<f64> {
        let (n, b) = (self.n, self.b);
        let nb = n / b;
        let mut out = vec![0.0; n * n];
        for j in 0..nb {
            for k in 0..nb {
                let blk = self.block(j, k);
                for r in 0..b {
                    let row = (j * b + r) * n + k * b;
                    out[row..row + b].copy_from_slice(&blk[r * b..r * b + b]);
                }
            }
        }
        out
    }

    /// `L · U` as a dense matrix.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.n;
        let f = self.overlay();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..=i {
                let l = if k == i { 1.0 } else { f[i * n + k] };
                let urow = &f[k * n..k * n + n];
                let orow = &mut out[i * n..i * n + n];
                for c in k..n {
                    orow[c] += l * urow[c];
                }
            }
        }
        out
    }

    /// `‖self − other‖_F / ‖other‖_F` over the overlays.
    pub fn relative_difference(&self, other: &BlockFactors) -> f64 {
        let a = self.overlay();
        let b = other.overlay();
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        dense::norm_fro(&diff) / dense::norm_fro(&b)
    }
}

/// `‖A − LU‖_F / ‖A‖_F`.
pub fn factor_residual(problem: &BlockLUProblem, f: &BlockFactors) -> f64 {
    let lu = f.reconstruct();
    let diff: Vec<f64> = problem.a.iter().zip(&lu).map(|(x, y)| x - y).collect();
    dense::norm_fro(&diff) / dense::norm_fro(&problem.a)
}

/// Sequential blocked LU in the inverse form: `L_ji = A_ji U_ii⁻¹`,
/// `U_ik = L_ii⁻¹ A_ik`, `A_jk -= L_ji U_ik`.
pub fn block_lu_reference(problem: &BlockLUProblem) -> Result<BlockFactors> {
    let nb = problem.blocks();
    let b = problem.b;
    let mut blocks: Vec<Vec<f64>> = (0..nb * nb).map(|t| problem.block(t / nb, t % nb)).collect();
    for i in 0..nb {
        dense::lu_in_place(&mut blocks[i * nb + i], b)?;
        let linv = dense::unit_lower_inverse(&blocks[i * nb + i], b);
        let uinv = dense::upper_inverse(&blocks[i * nb + i], b)?;
        for j in i + 1..nb {
            blocks[j * nb + i] = dense::matmul(&blocks[j * nb + i], &uinv, b);
        }
        for k in i + 1..nb {
            blocks[i * nb + k] = dense::matmul(&linv, &blocks[i * nb + k], b);
        }
        for j in i + 1..nb {
            for k in i + 1..nb {
                let prod = dense::matmul(&blocks[j * nb + i], &blocks[i * nb + k], b);
                dense::sub_assign(&mut blocks[j * nb + k], &prod);
            }
        }
    }
    Ok(BlockFactors {
        n: problem.n,
        b,
        blocks,
    })
}

/// Blocked Cholesky `A = L Lᵀ`; returns the dense lower factor.
pub fn block_cholesky_reference(problem: &BlockLUProblem) -> Result<Vec<f64>> {
    let nb = problem.blocks();
    let b = problem.b;
    let mut blocks: Vec<Vec<f64>> = (0..nb * nb).map(|t| problem.block(t / nb, t % nb)).collect();
    for i in 0..nb {
        dense::cholesky_in_place(&mut blocks[i * nb + i], b)?;
        let linv = dense::lower_inverse(&blocks[i * nb + i], b)?;
        for j in i + 1..nb {
            // L_ji = A_ji L_ii⁻ᵀ
            blocks[j * nb + i] = dense::matmul_transposed(&blocks[j * nb + i], &linv, b);
        }
        for j in i + 1..nb {
            for k in i + 1..=j {
                let prod = dense::matmul_transposed(&blocks[j * nb + i], &blocks[k * nb + i], b);
                dense::sub_assign(&mut blocks[j * nb + k], &prod);
            }
        }
    }
    let n = problem.n;
    let mut l = vec![0.0; n * n];
    for j in 0..nb {
        for k in 0..=j {
            let blk = &blocks[j * nb + k];
            for r in 0..b {
                for c in 0..b {
                    if j > k || c <= r {
                        l[(j * b + r) * n + k * b + c] = blk[r * b + c];
                    }
                }
            }
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors_trivially() {
        let n = 6;
        let a: Vec<f64> = (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
        let p = BlockLUProblem::new(n, 2, a.clone()).unwrap();
        let f = block_lu_reference(&p).unwrap();
        assert_eq!(f.overlay(), a);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(BlockLUProblem::new(10, 3, vec![0.0; 100]).is_err());
        assert!(BlockLUProblem::new(4, 2, vec![0.0; 15]).is_err());
    }

    #[test]
    fn blocks_round_trip() {
        let p = BlockLUProblem::diag_dominant(6, 3, 1).unwrap();
        let b = p.block(1, 0);
        assert_eq!(b[0], p.matrix()[3 * 6]);
        assert_eq!(b[8], p.matrix()[5 * 6 + 2]);
    }
}
