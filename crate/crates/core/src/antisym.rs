//! Totally anti-symmetric states and the explicit negative eigenvector of the
//! symmetrized transposition extension.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::sym_extension_choi;
use crate::maps::transposition_map;
use crate::tensor::{Limits, StateVector, C64, ZERO};

pub const MAX_ANTISYM_D: usize = 5;

#[derive(Clone, Debug)]
pub struct AntisymVector {
    pub d: usize,
    pub vector: StateVector,
}

/// All permutations of `0..d` with their signs, in lexicographic order.
fn signed_permutations(d: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, f64)>) {
        let d = used.len();
        if prefix.len() == d {
            let inversions = (0..d)
                .flat_map(|a| (a + 1..d).map(move |b| (a, b)))
                .filter(|&(a, b)| prefix[a] > prefix[b])
                .count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            out.push((prefix.clone(), sign));
            return;
        }
        for x in 0..d {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// `Σ_σ sgn(σ)/√(d!) |σ_0 σ_1 … σ_{d-1}⟩` on `d` qudits of dimension `d`.
pub fn antisymmetric_state(d: usize) -> Result<AntisymVector> {
    if !(2..=MAX_ANTISYM_D).contains(&d) {
        return Err(Error::Precondition(format!(
            "antisymmetric state needs 2 <= d <= {MAX_ANTISYM_D}, got {d}"
        )));
    }
    let dims = vec![d; d];
    let mut vector = StateVector::zeros(&dims)?;
    let amp = 1.0 / factorial(d).sqrt();
    for (perm, sign) in signed_permutations(d) {
        let idx = crate::tensor::flatten(&perm, &dims);
        vector.amps_mut()[idx] = C64::new(sign * amp, 0.0);
    }
    Ok(AntisymVector { d, vector })
}

/// Coefficient of the term with anti-symmetric part on copies `ks` (1-based).
fn coefficient(d: usize, ks: &[usize]) -> f64 {
    if d.is_multiple_of(2) {
        1.0
    } else {
        ks.iter()
            .enumerate()
            .map(|(i, &k)| if i % 2 == 0 { -(k as f64) } else { k as f64 })
            .sum()
    }
}

fn for_each_subset(n: usize, size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        for k in start..=n {
            cur.push(k);
            rec(k + 1, n, size, cur, f);
            cur.pop();
        }
    }
    rec(1, n, size, &mut Vec::new(), f);
}

/// Unnormalized `Σ_{k_1<…<k_{d-1}} c(k) |A_d⟩_{0,k_1,…,k_{d-1}} |0⟩_rest` on the
/// output factor followed by `N` input copies, all of dimension `d`.
/// `c = 1` for even `d` and `Σ_i (-1)^i k_i` for odd `d`.
pub fn psi_vector(d: usize, n: usize, limits: &Limits) -> Result<StateVector> {
    if n + 1 < d {
        return Err(Error::Precondition(format!("need N >= d - 1, got d = {d}, N = {n}")));
    }
    let a = antisymmetric_state(d)?;
    let dims = vec![d; n + 1];
    limits.check_dims(&dims)?;
    let mut psi = StateVector::zeros(&dims)?;
    let local_dims = vec![d; d];
    let mut digits = vec![0usize; n + 1];
    for_each_subset(n, d - 1, &mut |ks| {
        let c = coefficient(d, ks);
        if c == 0.0 {
            return;
        }
        for (local, amp) in a.vector.amps().iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            let local_digits = crate::tensor::unflatten(local, &local_dims);
            digits.iter_mut().for_each(|x| *x = 0);
            digits[0] = local_digits[0];
            for (slot, &k) in ks.iter().enumerate() {
                digits[k] = local_digits[slot + 1];
            }
            let idx = crate::tensor::flatten(&digits, &dims);
            psi.amps_mut()[idx] += amp * c;
        }
    });
    Ok(psi)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigvecCheck {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Rayleigh quotient `⟨ψ|L_N|ψ⟩/⟨ψ|ψ⟩`.
    pub eigenvalue: f64,
    /// `‖L_N ψ - λ ψ‖/‖ψ‖` with `λ` the Rayleigh quotient.
    pub residual: f64,
    pub expected: f64,
    /// `‖L_N ψ + ((d-1)/N) ψ‖/‖ψ‖`.
    pub expected_residual: f64,
}

/// Applies the symmetrized transposition extension to [`psi_vector`].
pub fn verify_transposition_eigvec(d: usize, n: usize, limits: &Limits) -> Result<EigvecCheck> {
    let psi = psi_vector(d, n, limits)?;
    let ext = sym_extension_choi(&transposition_map(d)?, n, limits)?;
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::Precondition(format!("vector vanishes for d = {d}, N = {n}")));
    }
    let lpsi = ext.op().apply(psi.amps())?;
    let rq: C64 = psi.amps().iter().zip(&lpsi).map(|(a, b)| a.conj() * b).sum();
    let eigenvalue = rq.re / (norm * norm);
    let expected = -((d - 1) as f64) / n as f64;
    let resid = |lam: f64| -> f64 {
        lpsi.iter()
            .zip(psi.amps())
            .map(|(a, b)| (a - b * lam).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / norm
    };
    Ok(EigvecCheck {
        d,
        n,
        eigenvalue,
        residual: resid(eigenvalue),
        expected,
        expected_residual: resid(expected),
    })
}
