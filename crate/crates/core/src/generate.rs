//! Built-in test matrices.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Debug, PartialEq)]
pub enum MatrixGenerator {
    /// 5-point Laplacian on a `side × side` grid with Dirichlet boundary.
    Poisson2d { side: usize },
    /// Symmetric, strictly diagonally dominant with positive diagonal.
    DiagDom { n: usize, density: f64, seed: u64 },
}

impl FromStr for MatrixGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<usize> {
            t.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad number '{t}' in generator spec '{s}'")))
        };
        match parts.as_slice() {
            ["poisson2d", side] => {
                let side = num(side)?;
                if side == 0 {
                    return invalid("poisson2d side must be >= 1");
                }
                Ok(MatrixGenerator::Poisson2d { side })
            }
            ["diagdom", n, density, seed] => {
                let n = num(n)?;
                let density: f64 = density
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad density '{density}'")))?;
                if n == 0 || !(0.0..=1.0).contains(&density) {
                    return invalid("diagdom needs n >= 1 and density in [0, 1]");
                }
                let seed = seed
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad seed '{seed}'")))?;
                Ok(MatrixGenerator::DiagDom { n, density, seed })
            }
            _ => invalid(format!(
                "unknown generator '{s}'; expected poisson2d:<side> or diagdom:<n>:<density>:<seed>"
            )),
        }
    }
}

impl fmt::Display for MatrixGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixGenerator::Poisson2d { side } => write!(f, "poisson2d:{side}"),
            MatrixGenerator::DiagDom { n, density, seed } => write!(f, "diagdom:{n}:{density}:{seed}"),
        }
    }
}

impl MatrixGenerator {
    /// Replaces the seed of seeded generators.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            MatrixGenerator::DiagDom { n, density, .. } => MatrixGenerator::DiagDom { n, density, seed },
            other => other,
        }
    }

    pub fn generate(&self) -> Result<CsrMatrix> {
        match *self {
            MatrixGenerator::Poisson2d { side } => poisson2d(side),
            MatrixGenerator::DiagDom { n, density, seed } => diagdom(n, density, seed),
        }
    }
}

pub fn poisson2d(side: usize) -> Result<CsrMatrix> {
    let n = side * side;
    let mut t = Vec::with_capacity(5 * n);
    for r in 0..side {
        for c in 0..side {
            let i = r * side + c;
            t.push((i, i, 4.0));
            if r > 0 {
                t.push((i, i - side, -1.0));
            }
            if r + 1 < side {
                t.push((i, i + side, -1.0));
            }
            if c > 0 {
                t.push((i, i - 1, -1.0));
            }
            if c + 1 < side {
                t.push((i, i + 1, -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t)
}

pub fn diagdom(n: usize, density: f64, seed: u64) -> Result<CsrMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut rowsum = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..i {
            if rng.random::<f64>() < density {
                let v: f64 = rng.random_range(-1.0..1.0);
                t.push((i, j, v));
                t.push((j, i, v));
                rowsum[i] += v.abs();
                rowsum[j] += v.abs();
            }
        }
    }
    for (i, s) in rowsum.iter().enumerate() {
        t.push((i, i, s + 1.0));
    }
    CsrMatrix::from_triplets(n, n, &t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_stencil_count() {
        let a: MatrixGenerator = "poisson2d:3".parse().unwrap();
        let m = a.generate().unwrap();
        assert_eq!((m.nrows(), m.nnz()), (9, 33));
        assert!(m.is_symmetric());
    }

    #[test]
    fn diagdom_is_reproducible_and_dominant() {
        let g: MatrixGenerator = "diagdom:40:0.2:9".parse().unwrap();
        let a = g.generate().unwrap();
        assert_eq!(a, g.generate().unwrap());
        assert!(a.is_symmetric());
        for i in 0..40 {
            let off: f64 = a.row(i).filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum();
            assert!(a.get(i, i) > off);
        }
        assert_ne!(a, g.with_seed(10).generate().unwrap());
    }

    #[test]
    fn bad_specs() {
        for s in ["poisson2d", "poisson2d:0", "diagdom:4:2:1", "laplace:3", "diagdom:4:0.1:x"] {
            assert!(s.parse::<MatrixGenerator>().is_err(), "{s}");
        }
        assert_eq!("diagdom:5:0.5:3".parse::<MatrixGenerator>().unwrap().to_string(), "diagdom:5:0.5:3");
    }
}
