#![allow(dead_code)]

use ncopy::tensor::{TensorOperator, C64};
use rand::Rng;
use rand_distr::StandardNormal;

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on the real
/// symmetric embedding `[[A, -B], [B, A]]`; every eigenvalue appears twice there,
/// so every other sorted value is returned.
pub fn jacobi_eigenvalues(op: &TensorOperator) -> Vec<f64> {
    let n = op.side();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let z = op.get(r, c);
            a[r * m + c] = z.re;
            a[(r + n) * m + c + n] = z.re;
            a[r * m + c + n] = -z.im;
            a[(r + n) * m + c] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|p| (0..m).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * m + q] * a[p * m + q])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut diag: Vec<f64> = (0..m).map(|k| a[k * m + k]).collect();
    diag.sort_by(|x, y| x.partial_cmp(y).unwrap());
    diag.into_iter().step_by(2).collect()
}

/// Entry-by-entry Kronecker product.
pub fn kron_oracle(a: &TensorOperator, b: &TensorOperator) -> Vec<C64> {
    let (n, m) = (a.side(), b.side());
    let side = n * m;
    let mut out = vec![C64::new(0.0, 0.0); side * side];
    for r in 0..side {
        for c in 0..side {
            out[r * side + c] = a.get(r / m, c / m) * b.get(r % m, c % m);
        }
    }
    out
}

/// Trace of the second factor of a two-factor operator by direct double summation.
pub fn trace_second_oracle(x: &TensorOperator, d0: usize, d1: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); d0 * d0];
    for i in 0..d0 {
        for j in 0..d0 {
            for k in 0..d1 {
                out[i * d0 + j] += x.get(i * d1 + k, j * d1 + k);
            }
        }
    }
    out
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(dims: &[usize], rng: &mut impl Rng) -> TensorOperator {
    let side: usize = dims.iter().product();
    let data = (0..side * side).map(|_| gaussian(rng)).collect();
    TensorOperator::new(dims.to_vec(), data).unwrap()
}

pub fn random_hermitian(dims: &[usize], rng: &mut impl Rng) -> TensorOperator {
    random_matrix(dims, rng).hermitian_part()
}

pub fn random_psd(dims: &[usize], rng: &mut impl Rng) -> TensorOperator {
    let g = random_matrix(dims, rng);
    g.matmul(&g.adjoint()).unwrap().hermitian_part()
}

pub fn random_density(d: usize, rng: &mut impl Rng) -> TensorOperator {
    let p = random_psd(&[d], rng);
    let tr = p.trace().re;
    p.scale(1.0 / tr)
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
