//! Dense Hermitian eigensolver.
//!
//! The operator is reduced to Hermitian tridiagonal form by complex Householder
//! reflections, the subdiagonal phases are absorbed into a diagonal unitary so the
//! tridiagonal becomes real symmetric, and that is diagonalised by the implicit-shift
//! QL iteration (EISPACK `tql2`). Eigenvectors are `Q · D · Z`.

use crate::error::{Error, Result};
use crate::tensor::{Limits, StateVector, TensorOperator, C64, ONE, ZERO};

/// Entrywise Hermiticity slack, relative to `max(1, max |A_ij|)`.
pub const HERMITIAN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Row-major `n×n`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Option<Vec<C64>>,
    n: usize,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Option<Vec<C64>> {
        let v = self.vectors.as_ref()?;
        Some((0..self.n).map(|r| v[r * self.n + k]).collect())
    }
}

#[derive(Clone, Debug)]
pub struct MinEig {
    pub value: f64,
    pub vector: StateVector,
}

fn prepare(op: &TensorOperator, limits: &Limits) -> Result<TensorOperator> {
    limits.check(op.side())?;
    let allowed = HERMITIAN_SLACK * op.max_abs().max(1.0);
    let deviation = op.hermitian_deviation();
    if deviation > allowed {
        return Err(Error::NotHermitian { deviation, allowed });
    }
    Ok(op.hermitian_part())
}

pub fn hermitian_eigenvalues(op: &TensorOperator, limits: &Limits) -> Result<Vec<f64>> {
    let a = prepare(op, limits)?;
    Ok(decompose(a.data().to_vec(), a.side(), false)?.values)
}

pub fn hermitian_eigen(op: &TensorOperator, limits: &Limits) -> Result<HermitianEigen> {
    let a = prepare(op, limits)?;
    decompose(a.data().to_vec(), a.side(), true)
}

/// Smallest eigenpair from the full decomposition.
///
/// `tol` is accepted for interface symmetry with [`is_psd`]; the dense solver
/// always runs to machine precision.
pub fn hermitian_min_eig(op: &TensorOperator, _tol: f64, limits: &Limits) -> Result<MinEig> {
    let eig = hermitian_eigen(op, limits)?;
    let vector = StateVector::new(op.dims().to_vec(), eig.vector(0).expect("vectors requested"))?;
    Ok(MinEig {
        value: eig.values[0],
        vector,
    })
}

pub fn min_eigenvalue(op: &TensorOperator, limits: &Limits) -> Result<f64> {
    Ok(hermitian_eigenvalues(op, limits)?[0])
}

/// `λ_min ≥ -tol`
pub fn is_psd(op: &TensorOperator, tol: f64, limits: &Limits) -> Result<bool> {
    Ok(min_eigenvalue(op, limits)? >= -tol)
}

/// `a` is a Hermitian row-major `n×n` matrix, consumed.
fn decompose(mut a: Vec<C64>, n: usize, want_vectors: bool) -> Result<HermitianEigen> {
    let mut q = if want_vectors {
        let mut q = vec![ZERO; n * n];
        for i in 0..n {
            q[i * n + i] = ONE;
        }
        Some(q)
    } else {
        None
    };

    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let xnorm = (k + 1..n)
            .map(|i| a[i * n + k].norm_sqr())
            .sum::<f64>()
            .sqrt();
        let tail = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;

        // v = x - alpha e_1, living on indices k+1..n
        for (t, i) in (k + 1..n).enumerate() {
            v[t] = a[i * n + k];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = tau * B v, B the trailing block
        for (t, i) in (k + 1..n).enumerate() {
            let row = &a[i * n + k + 1..(i + 1) * n];
            p[t] = row.iter().zip(&v[..m]).map(|(b, w)| b * w).sum::<C64>() * tau;
        }
        let vp: C64 = v[..m].iter().zip(&p[..m]).map(|(a, b)| a.conj() * b).sum();
        let kappa = vp * (tau / 2.0);
        // w = p - kappa v (stored back into p)
        for t in 0..m {
            p[t] -= kappa * v[t];
        }
        // B -= v w† + w v†
        for t in 0..m {
            let (vt, wt) = (v[t], p[t]);
            let row = &mut a[(k + 1 + t) * n + k + 1..(k + 2 + t) * n];
            for (s, b) in row.iter_mut().enumerate() {
                *b -= vt * p[s].conj() + wt * v[s].conj();
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for i in k + 2..n {
            a[i * n + k] = ZERO;
            a[k * n + i] = ZERO;
        }

        if let Some(q) = q.as_mut() {
            // Q <- Q H, H = I - tau v v†
            for r in 0..n {
                let row = &mut q[r * n + k + 1..(r + 1) * n];
                let s: C64 = row.iter().zip(&v[..m]).map(|(x, w)| x * w).sum::<C64>() * tau;
                for (x, w) in row.iter_mut().zip(&v[..m]) {
                    *x -= s * w.conj();
                }
            }
        }
    }

    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for i in 0..n.saturating_sub(1) {
        let sub = a[(i + 1) * n + i];
        let r = sub.norm();
        e[i] = r;
        phases[i + 1] = if r > 0.0 { phases[i] * (sub / r) } else { phases[i] };
    }

    let mut z = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };
    tql2(&mut d, &mut e, z.as_deref_mut(), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();

    let vectors = match (q, z) {
        (Some(q), Some(z)) => {
            // (Q D) Z with columns reordered
            let mut out = vec![ZERO; n * n];
            for r in 0..n {
                let qd: Vec<C64> = (0..n).map(|l| q[r * n + l] * phases[l]).collect();
                for (col, &src) in order.iter().enumerate() {
                    out[r * n + col] = (0..n).map(|l| qd[l] * z[l * n + src]).sum();
                }
            }
            Some(out)
        }
        _ => None,
    };

    Ok(HermitianEigen { values, vectors, n })
}

/// Implicit-shift QL on the real symmetric tridiagonal `(d, e)`, `e[i]` coupling
/// `i` and `i+1`. Eigenvalues overwrite `d`; rotations accumulate into `z`.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>, n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zk = &mut z[k * n..(k + 1) * n];
                            h = zk[i + 1];
                            zk[i + 1] = s * zk[i] + c * h;
                            zk[i] = c * zk[i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
