//! Symmetrized `N`-copy extension of a map and the implementability verdicts
//! built on it.
//!
//! The extension acts on product inputs as
//! `Λ_N(ρ_1 ⊗ ... ⊗ ρ_N) = (1/N) Σ_i Λ(ρ_i) Π_{j≠i} Tr ρ_j`
//! and its Choi operator is `(1/N) Σ_i L_{0,i} ⊗ I_rest`. A CP map consuming `N`
//! copies exists iff that operator is positive semidefinite.

use std::time::Instant;

use serde::Serialize;

use crate::eigen::min_eigenvalue;
use crate::error::{Error, Result};
use crate::maps::{noisy_b_endpoint, LinearMap};
use crate::tensor::{Limits, TensorOperator, C64};

/// PSD tolerance of the predicate inside [`critical_eta_b`].
pub const BISECTION_PSD_TOL: f64 = 1e-10;
pub const DEFAULT_BISECTION_WIDTH: f64 = 1e-6;

/// Choi operator of the symmetrized extension, dims `[d_out, d_in, ..., d_in]`.
#[derive(Clone, Debug)]
pub struct ExtensionChoi {
    n: usize,
    base: LinearMap,
    op: TensorOperator,
}

impl ExtensionChoi {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &LinearMap {
        &self.base
    }

    pub fn op(&self) -> &TensorOperator {
        &self.op
    }

    pub fn into_op(self) -> TensorOperator {
        self.op
    }

    /// Output for a product input `ρ_1 ⊗ ... ⊗ ρ_N`, contracted against the
    /// Choi operator: `Σ_{x,x'} Π_k ρ_k[x_k, x'_k] · op[(a,x),(b,x')]`.
    pub fn evaluate_product(&self, states: &[TensorOperator]) -> Result<TensorOperator> {
        let (d_in, d_out) = (self.base.d_in(), self.base.d_out());
        check_states(states, self.n, d_in)?;
        let inputs = self.op.side() / d_out;
        // weight of each (x, x') pair
        let mut weights = vec![C64::new(1.0, 0.0); inputs * inputs];
        for x in 0..inputs {
            let xd = crate::tensor::unflatten(x, &vec![d_in; self.n]);
            for xp in 0..inputs {
                let xpd = crate::tensor::unflatten(xp, &vec![d_in; self.n]);
                weights[x * inputs + xp] = states
                    .iter()
                    .zip(xd.iter().zip(&xpd))
                    .map(|(rho, (&a, &b))| rho.get(a, b))
                    .product();
            }
        }
        let mut out = TensorOperator::zeros(&[d_out])?;
        for a in 0..d_out {
            for b in 0..d_out {
                let mut acc = C64::new(0.0, 0.0);
                for x in 0..inputs {
                    for xp in 0..inputs {
                        acc += weights[x * inputs + xp] * self.op.get(a * inputs + x, b * inputs + xp);
                    }
                }
                out.set(a, b, acc);
            }
        }
        Ok(out)
    }
}

fn check_states(states: &[TensorOperator], n: usize, d_in: usize) -> Result<()> {
    if states.len() != n {
        return Err(Error::Shape(format!("{} states for N = {n}", states.len())));
    }
    if let Some(bad) = states.iter().find(|s| s.side() != d_in) {
        return Err(Error::Shape(format!(
            "state of side {} for d_in = {d_in}",
            bad.side()
        )));
    }
    Ok(())
}

/// `(1/N) Σ_i L_{0,i} ⊗ I_rest`: the `i = 1` term is `L` reordered to
/// `[out, in]` tensored with identity, the others are its conjugates by the
/// permutation exchanging input factors `1` and `i`.
pub fn sym_extension_choi(m: &LinearMap, n: usize, limits: &Limits) -> Result<ExtensionChoi> {
    if n == 0 {
        return Err(Error::Precondition("copy number N must be >= 1".into()));
    }
    let (d_in, d_out) = (m.d_in(), m.d_out());
    let mut dims = vec![d_in; n + 1];
    dims[0] = d_out;
    limits.check_dims(&dims)?;

    let out_first = m.choi().permute_factors(&[1, 0])?;
    let first = if n == 1 {
        out_first
    } else {
        let rest = TensorOperator::identity(&vec![d_in; n - 1])?;
        out_first.kron(&rest, limits)?
    };

    let mut op = TensorOperator::zeros(&dims)?;
    let weight = C64::new(1.0 / n as f64, 0.0);
    let mut perm: Vec<usize> = (0..=n).collect();
    for i in 1..=n {
        perm.swap(1, i);
        first.accumulate_permuted(&perm, weight, &mut op)?;
        perm.swap(1, i);
    }
    Ok(ExtensionChoi {
        n,
        base: m.clone(),
        op,
    })
}

/// `(1/N) Σ_i Λ(ρ_i) Π_{j≠i} Tr ρ_j`, evaluated without building the extension.
pub fn apply_sym_extension(m: &LinearMap, states: &[TensorOperator]) -> Result<TensorOperator> {
    if states.is_empty() {
        return Err(Error::Precondition("at least one input state is required".into()));
    }
    check_states(states, states.len(), m.d_in())?;
    let traces: Vec<C64> = states.iter().map(TensorOperator::trace).collect();
    let mut out = TensorOperator::zeros(&[m.d_out()])?;
    for (i, rho) in states.iter().enumerate() {
        let others: C64 = traces
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, t)| *t)
            .product();
        out.add_scaled(&m.apply(rho)?, others / states.len() as f64)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplementabilityReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda_min: f64,
    pub psd: bool,
    pub tol: f64,
    /// Side of the extension Choi operator.
    pub dim: usize,
    /// Wall time in seconds; left out of serialized reports.
    #[serde(skip)]
    pub elapsed: f64,
}

pub fn implementable(
    m: &LinearMap,
    n: usize,
    tol: f64,
    limits: &Limits,
) -> Result<ImplementabilityReport> {
    let start = Instant::now();
    let ext = sym_extension_choi(m, n, limits)?;
    let lambda_min = min_eigenvalue(ext.op(), limits)?;
    Ok(ImplementabilityReport {
        n,
        lambda_min,
        psd: lambda_min >= -tol,
        tol,
        dim: ext.op().side(),
        elapsed: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CopySearchResult {
    pub min_n: Option<usize>,
    pub reports: Vec<ImplementabilityReport>,
    /// Copy number whose extension exceeded the dimension limit, if the search
    /// stopped there.
    pub limit_reached_at: Option<usize>,
}

/// Evaluates `N = 1, 2, ...` in order and stops at the first PSD extension.
pub fn min_copies(
    m: &LinearMap,
    n_max: usize,
    tol: f64,
    limits: &Limits,
) -> Result<CopySearchResult> {
    if n_max == 0 {
        return Err(Error::Precondition("N_max must be >= 1".into()));
    }
    let mut result = CopySearchResult {
        min_n: None,
        reports: Vec::new(),
        limit_reached_at: None,
    };
    for n in 1..=n_max {
        match implementable(m, n, tol, limits) {
            Ok(report) => {
                let psd = report.psd;
                result.reports.push(report);
                if psd {
                    result.min_n = Some(n);
                    break;
                }
            }
            Err(Error::DimensionLimit { .. }) => {
                result.limit_reached_at = Some(n);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(result)
}

/// Smallest white-noise weight `η` making `noisy_a(m, η)` `N`-copy implementable.
///
/// The extension of the noisy map is `(1-η) L_N + η c I` with
/// `c = Tr L / (d_in d_out)`, so its smallest eigenvalue is `(1-η)λ + ηc` and
/// the threshold is `-λ / (c - λ)`.
pub fn critical_eta_a(m: &LinearMap, n: usize, tol: f64, limits: &Limits) -> Result<f64> {
    let trace = m.choi().trace().re;
    if trace <= 0.0 {
        return Err(Error::Precondition(format!(
            "white-noise family needs Tr L > 0, got {trace}"
        )));
    }
    let c = trace / (m.d_in() * m.d_out()) as f64;
    let lambda = min_eigenvalue(sym_extension_choi(m, n, limits)?.op(), limits)?;
    if lambda >= -tol {
        return Ok(0.0);
    }
    Ok(-lambda / (c - lambda))
}

/// Smallest `η` making `noisy_b(m, η)` `N`-copy implementable, by bisection to
/// `width`.
///
/// The extension is affine in `η` and `λ_min` is concave along it, so the
/// feasible set is an interval ending at `η = 1` (positive there whenever `Λ`
/// is positive). Returns the feasible end of the final bracket.
pub fn critical_eta_b(m: &LinearMap, n: usize, width: f64, limits: &Limits) -> Result<f64> {
    if !(width > 0.0) {
        return Err(Error::Precondition(format!("bisection width must be > 0, got {width}")));
    }
    let start = sym_extension_choi(m, n, limits)?.into_op();
    let endpoint = LinearMap::from_choi(noisy_b_endpoint(m)?)?;
    let end = sym_extension_choi(&endpoint, n, limits)?.into_op();

    let feasible = |eta: f64| -> Result<bool> {
        let mut op = start.scale(1.0 - eta);
        op.add_scaled(&end, C64::new(eta, 0.0))?;
        Ok(min_eigenvalue(&op, limits)? >= -BISECTION_PSD_TOL)
    };

    if feasible(0.0)? {
        return Ok(0.0);
    }
    if !feasible(1.0)? {
        return Err(Error::Precondition(
            "extension is not PSD at eta = 1; the map is not positive".into(),
        ));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
