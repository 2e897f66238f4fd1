//! Closed-form noise thresholds and a one-sided test for non-implementability.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::eigen::min_eigenvalue;
use crate::error::{Error, Result};
use crate::maps::LinearMap;
use crate::tensor::{Limits, TensorOperator, C64};

/// Slack on `⟨k_i|k_j⟩ = δ_ij` for user-supplied bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdBounds {
    pub eta_a_sufficient: f64,
    pub eta_b_sufficient: f64,
    pub used_qubit_improvement: bool,
    pub d0: usize,
    pub d1: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranspositionBounds {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub eta_sufficient: f64,
    /// The noisy transposition is not `N`-copy implementable below this.
    pub eta_necessary_below: f64,
}

fn check_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::Precondition(format!("{name} must be >= 1")));
    }
    Ok(())
}

/// White-noise weight sufficient for `N`-copy implementability of any positive
/// map: `d0 d1² / (N + d0 d1²)`, or `d0 d1 / (N + d0 d1)` for qubit inputs when
/// `improved` is set.
pub fn eta_a_bound_with(d0: usize, d1: usize, n: usize, improved: bool) -> Result<f64> {
    check_positive("d0", d0)?;
    check_positive("d1", d1)?;
    check_positive("N", n)?;
    let k = if improved && d1 == 2 {
        d0 * d1
    } else {
        d0 * d1 * d1
    } as f64;
    Ok(k / (n as f64 + k))
}

pub fn eta_a_bound(d0: usize, d1: usize, n: usize) -> Result<f64> {
    eta_a_bound_with(d0, d1, n, true)
}

/// Input-depolarizing weight sufficient for `N`-copy implementability:
/// `d1² / (N + d1²)`, or `d1 / (N + d1)` for qubit inputs when `improved`.
pub fn eta_b_bound_with(d1: usize, n: usize, improved: bool) -> Result<f64> {
    if d1 < 2 {
        return Err(Error::Precondition(format!("d1 must be >= 2, got {d1}")));
    }
    check_positive("N", n)?;
    let k = if improved && d1 == 2 { d1 } else { d1 * d1 } as f64;
    Ok(k / (n as f64 + k))
}

pub fn eta_b_bound(d1: usize, n: usize) -> Result<f64> {
    eta_b_bound_with(d1, n, true)
}

pub fn threshold_bounds(d0: usize, d1: usize, n: usize, improved: bool) -> Result<ThresholdBounds> {
    Ok(ThresholdBounds {
        eta_a_sufficient: eta_a_bound_with(d0, d1, n, improved)?,
        eta_b_sufficient: eta_b_bound_with(d1, n, improved)?,
        used_qubit_improvement: improved && d1 == 2,
        d0,
        d1,
        n,
    })
}

/// Bounds for `ρ ↦ (1-η) ρᵀ + η (I/d) Tr ρ`.
pub fn transposition_bounds(d: usize, n: usize) -> Result<TranspositionBounds> {
    if d < 2 {
        return Err(Error::Precondition(format!("d must be >= 2, got {d}")));
    }
    check_positive("N", n)?;
    let (df, nf) = (d as f64, n as f64);
    let pair = df * (df - 1.0);
    Ok(TranspositionBounds {
        d,
        n,
        eta_sufficient: df * df / (nf + df * df),
        eta_necessary_below: (df / (df + 1.0)).min(pair / (nf + pair)),
    })
}

/// Orthonormal basis of the input space, one vector per entry.
pub type Basis = Vec<Vec<C64>>;

pub fn computational_basis(d: usize) -> Basis {
    (0..d)
        .map(|i| {
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[i] = C64::new(1.0, 0.0);
            v
        })
        .collect()
}

fn check_basis(basis: &Basis, d: usize) -> Result<()> {
    if basis.len() != d || basis.iter().any(|v| v.len() != d) {
        return Err(Error::Precondition(format!(
            "basis must hold {d} vectors of length {d}"
        )));
    }
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let ip: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (ip - C64::new(want, 0.0)).norm() > ORTHONORMAL_TOL {
                return Err(Error::Precondition(format!(
                    "basis is not orthonormal: <k{i}|k{j}> = {ip}"
                )));
            }
        }
    }
    Ok(())
}

fn basis_unit(basis: &Basis, i: usize, j: usize) -> TensorOperator {
    let d = basis.len();
    let data = basis[i]
        .iter()
        .flat_map(|a| basis[j].iter().map(move |b| a * b.conj()))
        .collect();
    TensorOperator::new(vec![d], data).expect("basis vectors are finite")
}

/// `Σ_ij |i⟩⟨j| ⊗ Λ(|k_i⟩⟨k_j|) + (N-1) Σ_{i≥1} |i⟩⟨i| ⊗ Λ(|k_0⟩⟨k_0|)`, dims
/// `[d_in, d_out]`. With the computational basis the first term is `L` itself.
/// If this operator is not PSD the map has no CP `N`-copy extension.
pub fn necessity_operator(m: &LinearMap, n: usize, basis: Option<&Basis>) -> Result<TensorOperator> {
    check_positive("N", n)?;
    let (d_in, d_out) = (m.d_in(), m.d_out());
    let default_basis;
    let basis = match basis {
        Some(b) => {
            check_basis(b, d_in)?;
            b
        }
        None => {
            default_basis = computational_basis(d_in);
            &default_basis
        }
    };

    let mut op = TensorOperator::zeros(&[d_in, d_out])?;
    for i in 0..d_in {
        for j in 0..d_in {
            let block = m.apply(&basis_unit(basis, i, j))?;
            for a in 0..d_out {
                for b in 0..d_out {
                    op.add_at(i * d_out + a, j * d_out + b, block.get(a, b));
                }
            }
        }
    }
    let anchor = m.apply(&basis_unit(basis, 0, 0))?.scale((n - 1) as f64);
    for i in 1..d_in {
        for a in 0..d_out {
            for b in 0..d_out {
                op.add_at(i * d_out + a, i * d_out + b, anchor.get(a, b));
            }
        }
    }
    Ok(op)
}

#[derive(Clone, Debug, Serialize)]
pub struct NecessityReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(skip)]
    pub basis_used: Basis,
    #[serde(skip)]
    pub operator: TensorOperator,
    pub lambda_min: f64,
    /// `true` proves the map is not `N`-copy implementable; `false` proves nothing.
    pub conclusive_negative: bool,
}

pub fn necessity_check(
    m: &LinearMap,
    n: usize,
    basis: Option<&Basis>,
    tol: f64,
) -> Result<NecessityReport> {
    let operator = necessity_operator(m, n, basis)?;
    let lambda_min = min_eigenvalue(&operator, &Limits::default())?;
    Ok(NecessityReport {
        n,
        basis_used: basis.cloned().unwrap_or_else(|| computational_basis(m.d_in())),
        operator,
        lambda_min,
        conclusive_negative: lambda_min < -tol,
    })
}

/// Haar-random orthonormal basis: Gram-Schmidt on complex Gaussian columns.
pub fn haar_basis(d: usize, rng: &mut ChaCha8Rng) -> Basis {
    let mut basis: Basis = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v: Vec<C64> = (0..d)
            .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        for u in &basis {
            let ip: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= ip * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    basis
}

/// Runs [`necessity_check`] in the computational basis and `trials` Haar-random
/// bases, returning the report with the smallest eigenvalue.
pub fn necessity_basis_search(
    m: &LinearMap,
    n: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<NecessityReport> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = necessity_check(m, n, None, tol)?;
    for _ in 0..trials {
        let basis = haar_basis(m.d_in(), &mut rng);
        let report = necessity_check(m, n, Some(&basis), tol)?;
        if report.lambda_min < best.lambda_min {
            best = report;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{choi_map_3, identity_map, mix, transposition_map};
    use crate::tensor::principal_minor;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-15
    }

    #[test]
    fn eta_a_values() {
        assert!(close(eta_a_bound(2, 2, 2).unwrap(), 2.0 / 3.0));
        assert!(close(eta_a_bound_with(2, 2, 2, false).unwrap(), 0.8));
        assert!(close(eta_a_bound(3, 3, 1).unwrap(), 27.0 / 28.0));
        let big = eta_a_bound(3, 3, 1_000_000).unwrap() * 1e6;
        assert!((big - 27.0).abs() / 27.0 < 1e-4);
        assert!(eta_a_bound(0, 2, 1).is_err());
    }

    #[test]
    fn eta_b_values() {
        assert!(close(eta_b_bound(2, 1).unwrap(), 2.0 / 3.0));
        assert!(close(eta_b_bound(3, 6).unwrap(), 0.6));
        assert!(matches!(eta_b_bound(3, 0), Err(Error::Precondition(_))));
        assert!(eta_b_bound(1, 3).is_err());
    }

    #[test]
    fn bounds_record_improvement() {
        let b = threshold_bounds(2, 2, 3, true).unwrap();
        assert!(b.used_qubit_improvement);
        assert!(b.eta_b_sufficient <= b.eta_a_sufficient);
        let b = threshold_bounds(3, 3, 3, true).unwrap();
        assert!(!b.used_qubit_improvement);
    }

    #[test]
    fn transposition_bound_values() {
        let b = transposition_bounds(2, 3).unwrap();
        assert!(close(b.eta_sufficient, 4.0 / 7.0));
        assert!(close(b.eta_necessary_below, 0.4));
        assert!(close(transposition_bounds(3, 1).unwrap().eta_necessary_below, 0.75));
        assert!(close(transposition_bounds(3, 2).unwrap().eta_necessary_below, 0.75));
        assert!(close(transposition_bounds(3, 3).unwrap().eta_necessary_below, 2.0 / 3.0));
        assert!(transposition_bounds(1, 3).is_err());
    }

    #[test]
    fn single_copy_operator_is_choi() {
        let c = choi_map_3();
        assert_eq!(necessity_operator(&c, 1, None).unwrap().max_abs_diff(c.choi()), 0.0);
    }

    #[test]
    fn transposition_minor() {
        let t = transposition_map(2).unwrap();
        for n in [1, 4, 9] {
            let op = necessity_operator(&t, n, None).unwrap();
            let m = principal_minor(&op, &[vec![0, 1], vec![1, 0]]).unwrap();
            let want =
                TensorOperator::from_real_rows(vec![2], &[vec![0.0, 1.0], vec![1.0, (n - 1) as f64]])
                    .unwrap();
            assert_eq!(m.max_abs_diff(&want), 0.0);
        }
    }

    #[test]
    fn choi_map_minor() {
        let c = choi_map_3();
        let op = necessity_operator(&c, 7, None).unwrap();
        let m = principal_minor(&op, &[vec![0, 0], vec![1, 1], vec![2, 2]]).unwrap();
        let want = TensorOperator::from_real_rows(
            vec![3],
            &[
                vec![1.0, -1.0, -1.0],
                vec![-1.0, 7.0, -1.0],
                vec![-1.0, -1.0, 1.0],
            ],
        )
        .unwrap();
        assert_eq!(m.max_abs_diff(&want), 0.0);
    }

    #[test]
    fn checks() {
        let p = 0.5;
        let m = mix(
            &[identity_map(2).unwrap(), transposition_map(2).unwrap()],
            &[1.0 - p, p],
        )
        .unwrap();
        assert!(necessity_check(&m, 10, None, 1e-9).unwrap().conclusive_negative);
        for n in [1, 3, 20] {
            assert!(!necessity_check(&identity_map(3).unwrap(), n, None, 1e-9)
                .unwrap()
                .conclusive_negative);
        }
        assert!(necessity_check(&choi_map_3(), 100, None, 1e-9).unwrap().conclusive_negative);
    }

    #[test]
    fn rejects_bad_basis() {
        let t = transposition_map(2).unwrap();
        let skew = vec![
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        ];
        assert!(matches!(
            necessity_operator(&t, 2, Some(&skew)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn haar_bases_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..5 {
            check_basis(&haar_basis(d, &mut rng), d).unwrap();
        }
    }

    #[test]
    fn basis_search() {
        let id = identity_map(2).unwrap();
        assert!(!necessity_basis_search(&id, 3, 10, 0, 1e-9).unwrap().conclusive_negative);

        let t3 = transposition_map(3).unwrap();
        let computational = necessity_check(&t3, 2, None, 1e-9).unwrap();
        let searched = necessity_basis_search(&t3, 2, 20, 5, 1e-9).unwrap();
        assert!(searched.lambda_min <= computational.lambda_min);
        assert!(searched.conclusive_negative);
    }
}
