//! Dense `b × b` block kernels, row-major.

use crate::error::{Error, Result};

/// Doolittle LU without pivoting: on return the strict lower part holds the
/// unit-lower factor and the upper part (with diagonal) holds `U`.
pub fn lu_in_place(a: &mut [f64], b: usize) -> Result<()> {
    for p in 0..b {
        let piv = a[p * b + p];
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::Numerical(format!("zero or non-finite pivot at position {p}")));
        }
        for r in p + 1..b {
            let f = a[r * b + p] / piv;
            a[r * b + p] = f;
            for c in p + 1..b {
                a[r * b + c] -= f * a[p * b + c];
            }
        }
    }
    Ok(())
}

/// Inverse of the unit-lower factor stored in an LU overlay.
pub fn unit_lower_inverse(lu: &[f64], b: usize) -> Vec<f64> {
    let mut inv = vec![0.0; b * b];
    for col in 0..b {
        inv[col * b + col] = 1.0;
        for r in col + 1..b {
            let mut s = 0.0;
            for k in col..r {
                s += lu[r * b + k] * inv[k * b + col];
            }
            inv[r * b + col] = -s;
        }
    }
    inv
}

/// Inverse of the upper factor stored in an LU overlay.
pub fn upper_inverse(lu: &[f64], b: usize) -> Result<Vec<f64>> {
    let mut inv = vec![0.0; b * b];
    for col in (0..b).rev() {
        let d = lu[col * b + col];
        if d == 0.0 {
            return Err(Error::Numerical(format!("singular upper factor at {col}")));
        }
        inv[col * b + col] = 1.0 / d;
        for r in (0..col).rev() {
            let mut s = 0.0;
            for k in r + 1..=col {
                s += lu[r * b + k] * inv[k * b + col];
            }
            inv[r * b + col] = -s / lu[r * b + r];
        }
    }
    Ok(inv)
}

pub fn matmul(x: &[f64], y: &[f64], b: usize) -> Vec<f64> {
    let mut out = vec![0.0; b * b];
    for r in 0..b {
        for k in 0..b {
            let v = x[r * b + k];
            if v == 0.0 {
                continue;
            }
            for c in 0..b {
                out[r * b + c] += v * y[k * b + c];
            }
        }
    }
    out
}

/// `x · yᵀ`.
pub fn matmul_transposed(x: &[f64], y: &[f64], b: usize) -> Vec<f64> {
    let mut out = vec![0.0; b * b];
    for r in 0..b {
        for c in 0..b {
            out[r * b + c] = (0..b).fold(0.0, |acc, k| acc + x[r * b + k] * y[c * b + k]);
        }
    }
    out
}

pub fn sub_assign(x: &mut [f64], y: &[f64]) {
    for (a, b) in x.iter_mut().zip(y) {
        *a -= b;
    }
}

/// Lower Cholesky factor in place; the strict upper part is zeroed.
pub fn cholesky_in_place(a: &mut [f64], b: usize) -> Result<()> {
    for j in 0..b {
        let mut d = a[j * b + j];
        for k in 0..j {
            d -= a[j * b + k] * a[j * b + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Numerical(format!("matrix not positive definite at {j}")));
        }
        let d = d.sqrt();
        a[j * b + j] = d;
        for r in j + 1..b {
            let mut s = a[r * b + j];
            for k in 0..j {
                s -= a[r * b + k] * a[j * b + k];
            }
            a[r * b + j] = s / d;
        }
        for c in j + 1..b {
            a[j * b + c] = 0.0;
        }
    }
    Ok(())
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
pub fn lower_inverse(l: &[f64], b: usize) -> Result<Vec<f64>> {
    let mut inv = vec![0.0; b * b];
    for col in 0..b {
        let d = l[col * b + col];
        if d == 0.0 {
            return Err(Error::Numerical(format!("singular lower factor at {col}")));
        }
        inv[col * b + col] = 1.0 / d;
        for r in col + 1..b {
            let mut s = 0.0;
            for k in col..r {
                s += l[r * b + k] * inv[k * b + col];
            }
            inv[r * b + col] = -s / l[r * b + r];
        }
    }
    Ok(inv)
}

pub fn norm_fro(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    fn eye(b: usize) -> Vec<f64> {
        (0..b * b).map(|k| if k % (b + 1) == 0 { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn lu_and_inverses() {
        let a = vec![4.0, 3.0, 2.0, 2.0, 5.0, 1.0, 1.0, 2.0, 6.0];
        let mut lu = a.clone();
        lu_in_place(&mut lu, 3).unwrap();
        let li = unit_lower_inverse(&lu, 3);
        let ui = upper_inverse(&lu, 3).unwrap();
        // U⁻¹ L⁻¹ A = I
        let prod = matmul(&ui, &matmul(&li, &a, 3), 3);
        assert!(close(&prod, &eye(3)));
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = vec![4.0, 2.0, 2.0, 3.0];
        let mut l = a.clone();
        cholesky_in_place(&mut l, 2).unwrap();
        assert!(close(&matmul_transposed(&l, &l, 2), &a));
        let li = lower_inverse(&l, 2).unwrap();
        assert!(close(&matmul(&li, &l, 2), &eye(2)));
        let mut bad = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_in_place(&mut bad, 2).is_err());
    }

    #[test]
    fn zero_pivot_fails() {
        let mut a = vec![0.0, 1.0, 1.0, 0.0];
        assert!(lu_in_place(&mut a, 2).is_err());
    }
}
