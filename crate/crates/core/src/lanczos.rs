//! Lanczos iteration with full reorthogonalization for the extreme
//! eigenpair of a real symmetric operator given as a matvec closure.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Largest,
    Smallest,
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes keep the basis numerically orthogonal
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(v, -c, b);
        }
    }
}

/// Extreme eigenpair of `op` on the orthogonal complement of `deflate`
/// (which must be orthonormal). The start vector is drawn from a fixed seed,
/// so runs are bit-reproducible.
pub fn extreme_eigenpair<F>(
    n: usize,
    op: F,
    deflate: &[Vec<f64>],
    which: Which,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    project_out(&mut v, deflate);
    let nv = dot(&v, &v).sqrt();
    if nv == 0.0 {
        return Err(Error::InvalidParameter("empty Krylov space".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let max_iter = max_iter.min(n - deflate.len()).max(1);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut next_check = 8;
    let mut last = (0.0, f64::INFINITY, Vec::new());
    let mut scale = 0.0f64;

    loop {
        let k = basis.len();
        op(&basis[k - 1], &mut w);
        let a = dot(&w, &basis[k - 1]);
        alpha.push(a);
        project_out(&mut w, deflate);
        project_out(&mut w, &basis);
        let b = dot(&w, &w).sqrt();
        scale = scale.max(a.abs()).max(b);

        // a tiny remainder means the Krylov space is invariant and exact
        let done = k >= max_iter || b <= 1e-12 * scale;
        if k >= next_check || done {
            next_check = k + (k / 4).max(8);
            let t = DMatrix::from_fn(k, k, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let idx = (0..k)
                .max_by(|&i, &j| {
                    let (x, y) = (eig.eigenvalues[i], eig.eigenvalues[j]);
                    match which {
                        Which::Largest => x.total_cmp(&y),
                        Which::Smallest => y.total_cmp(&x),
                    }
                })
                .unwrap();
            let theta = eig.eigenvalues[idx];
            let s: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            let res = (b * s[k - 1]).abs();
            last = (theta, res, s);
            if res <= tol * theta.abs().max(1.0) || done {
                break;
            }
        }
        if done {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        project_out(&mut w, deflate);
        project_out(&mut w, &basis);
        let nw = dot(&w, &w).sqrt();
        w.iter_mut().for_each(|x| *x /= nw);
        basis.push(std::mem::replace(&mut w, vec![0.0; n]));
    }

    let (value, residual, s) = last;
    let mut vector = vec![0.0; n];
    for (c, b) in s.iter().zip(&basis) {
        axpy(&mut vector, *c, b);
    }
    let nv = dot(&vector, &vector).sqrt();
    vector.iter_mut().for_each(|x| *x /= nv);
    // true residual, independent of the recurrence
    let mut av = vec![0.0; n];
    op(&vector, &mut av);
    project_out(&mut av, deflate);
    axpy(&mut av, -value, &vector);
    let true_res = dot(&av, &av).sqrt();
    if true_res > tol.max(residual) * value.abs().max(1.0) * 10.0 {
        return Err(Error::ConvergenceFailure { residual: true_res });
    }
    Ok(EigenPair {
        value,
        vector,
        residual: true_res,
        iterations: basis.len(),
    })
}
