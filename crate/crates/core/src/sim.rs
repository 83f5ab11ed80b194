//! Dense state-vector helpers. Qubit `i` (1-based) of an `n`-qubit register is
//! bit `n - i` of the basis index, so qubit 1 is the most significant.

use num_complex::Complex;
use rand::Rng;

pub type C64 = Complex<f64>;
pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn mat_i() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn mat_h() -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
}

pub fn mat_s() -> Mat2 {
    [[ONE, ZERO], [ZERO, I]]
}

pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i >> 1][j >> 1] * b[i & 1][j & 1];
        }
    }
    m
}

pub fn identity4() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn cnot() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = ONE;
    m[1][1] = ONE;
    m[2][3] = ONE;
    m[3][2] = ONE;
    m
}

pub fn swap() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = ONE;
    m[1][2] = ONE;
    m[2][1] = ONE;
    m[3][3] = ONE;
    m
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            if a[i][k] == ZERO {
                continue;
            }
            for j in 0..4 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub fn dagger4(a: &Mat4) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[j][i].conj();
        }
    }
    m
}

/// Max-entry distance.
pub fn dist4(a: &Mat4, b: &Mat4) -> f64 {
    let mut d = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

pub fn is_unitary(m: &Mat4, tol: f64) -> bool {
    dist4(&mul4(&dagger4(m), m), &identity4()) <= tol
}

/// Applies `m` to qubits `p, q` (1-based) of an `n`-qubit state; `p` is the
/// high bit of `m`'s index.
pub fn apply_2q(psi: &mut [C64], n: usize, p: usize, q: usize, m: &Mat4) {
    let bp = 1usize << (n - p);
    let bq = 1usize << (n - q);
    for base in 0..psi.len() {
        if base & (bp | bq) != 0 {
            continue;
        }
        let idx = [base, base | bq, base | bp, base | bp | bq];
        let v = [psi[idx[0]], psi[idx[1]], psi[idx[2]], psi[idx[3]]];
        for r in 0..4 {
            psi[idx[r]] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
        }
    }
}

pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    v
}

pub fn basis_state(dim: usize, k: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[k] = ONE;
    v
}

pub fn normalize(v: &mut [C64]) {
    let nrm = norm(v);
    for x in v.iter_mut() {
        *x /= nrm;
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// |⟨a|b⟩|² for unit vectors.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).norm_sqr()
}
