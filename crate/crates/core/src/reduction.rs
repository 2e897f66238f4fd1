//! Compression of an `N`-copy extension Choi operator down to a single-copy
//! operator, and the phase-quadrature decompositions showing that the operators
//! involved lie in `span{|ψ⟩⟨ψ|^{⊗N}}`.
//!
//! `V` keeps the output factor and maps input configurations with at most one
//! excited copy onto one input qudit: `|o⟩|0…0⟩ ↦ |0⟩|o⟩` and
//! `|o⟩|0…i…0⟩ ↦ |i⟩|o⟩` (excitation `i ≥ 1` in any copy). Its column space is
//! ordered like an extension Choi operator (`[d_out, d_in, …]`) and its row space
//! like a map Choi operator (`[d_in, d_out]`).

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::tensor::{conjugate_by, permutation_operator, Limits, RectOperator, StateVector, TensorOperator, C64, ONE, ZERO};

/// Largest reconstruction error accepted as an exact decomposition.
pub const SPAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct VOperator {
    pub d1: usize,
    pub d0: usize,
    pub n: usize,
    pub matrix: RectOperator,
}

/// `|0⟩(⟨0|^{⊗N}) ⊗ I₀ + Σ_{i≥1} Σ_k |i⟩(⟨i| ⊗ ⟨0|^{⊗N-1}) S_{1k} ⊗ I₀`.
pub fn v_operator(d1: usize, d0: usize, n: usize, limits: &Limits) -> Result<VOperator> {
    if n == 0 || d1 == 0 || d0 == 0 {
        return Err(Error::Precondition("d1, d0 and N must all be >= 1".into()));
    }
    let inputs = vec![d1; n];
    let mut col_dims = vec![d0];
    col_dims.extend_from_slice(&inputs);
    let cols = limits.check_dims(&col_dims)?;
    let mut matrix = RectOperator::zeros(&[d1, d0], &col_dims)?;

    // rows of the input-space part, one per target |i⟩
    let mut bras: Vec<Vec<C64>> = Vec::with_capacity(d1);
    bras.push(StateVector::basis(&inputs, &vec![0; n])?.amps().to_vec());
    for i in 1..d1 {
        let mut digits = vec![0; n];
        digits[0] = i;
        let bra = StateVector::basis(&inputs, &digits)?;
        let mut row = vec![ZERO; cols / d0];
        for k in 0..n {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(0, k);
            // ⟨bra| S_{1k} = (S_{1k} |bra⟩)† as S is real symmetric
            let swapped = permutation_operator(&inputs, &perm)?.apply(bra.amps())?;
            for (acc, z) in row.iter_mut().zip(swapped) {
                *acc += z;
            }
        }
        bras.push(row);
    }

    let width = cols / d0;
    for (i, row) in bras.iter().enumerate() {
        for o in 0..d0 {
            for (x, z) in row.iter().enumerate() {
                if *z != ZERO {
                    matrix.add_at(i * d0 + o, o * width + x, z.conj());
                }
            }
        }
    }
    Ok(VOperator { d1, d0, n, matrix })
}

/// `Φ(X) = V X V†`.
pub fn phi_apply(v: &VOperator, x: &TensorOperator) -> Result<TensorOperator> {
    conjugate_by(&v.matrix, x)
}

fn excited(d: usize, n: usize, k: usize, i: usize) -> Result<StateVector> {
    let mut digits = vec![0; n];
    digits[k] = i;
    StateVector::basis(&vec![d; n], &digits)
}

/// The operators on `N` input copies whose images under the extension give the
/// blocks of the compressed operator: `a_00 = |0⟩⟨0|^{⊗N}`,
/// `a_i0 = Σ_k |i@k⟩⟨0…0|`, `a_0j = Σ_k |0…0⟩⟨j@k|`,
/// `a_ij = Σ_{k,l} |i@k⟩⟨j@l|`, where `|i@k⟩` has `i` in copy `k` and `0` elsewhere.
pub fn a_operator(i: usize, j: usize, d: usize, n: usize) -> Result<TensorOperator> {
    if i >= d || j >= d {
        return Err(Error::IndexOutOfRange(format!("(i, j) = ({i}, {j}) for d = {d}")));
    }
    if n == 0 {
        return Err(Error::Precondition("N must be >= 1".into()));
    }
    let kets: Vec<StateVector> = if i == 0 {
        vec![excited(d, n, 0, 0)?]
    } else {
        (0..n).map(|k| excited(d, n, k, i)).collect::<Result<_>>()?
    };
    let bras: Vec<StateVector> = if j == 0 {
        vec![excited(d, n, 0, 0)?]
    } else {
        (0..n).map(|k| excited(d, n, k, j)).collect::<Result<_>>()?
    };
    let mut op = TensorOperator::zeros(&vec![d; n])?;
    for ket in &kets {
        for bra in &bras {
            op.add_scaled(&ket.outer(bra)?, ONE)?;
        }
    }
    Ok(op)
}

/// One term `coef · |ket⟩⟨bra|^{⊗N}` of a span decomposition.
#[derive(Clone, Debug)]
pub struct PowerTerm {
    pub coef: C64,
    pub ket: StateVector,
    pub bra: StateVector,
}

#[derive(Clone, Debug)]
pub struct SpanWitness {
    pub target: (usize, usize),
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub terms: Vec<PowerTerm>,
    /// Largest entrywise distance between the reconstruction and `a_ij`.
    pub recon_error: f64,
}

impl SpanWitness {
    pub fn is_exact(&self) -> bool {
        self.recon_error <= SPAN_TOL
    }

    pub fn reconstruct(&self) -> Result<TensorOperator> {
        reconstruct(&self.terms, self.d, self.n)
    }

    /// Rewrites every `|φ1⟩⟨φ2|^{⊗N}` as `(1/M') Σ_θ e^{iNθ} |ψ_θ⟩⟨ψ_θ|^{⊗N}`
    /// with `ψ_θ = φ1 + e^{iθ} φ2`, giving a combination of pure-state powers.
    /// Exact for `M' > 2N`.
    pub fn to_projectors(&self, m_prime: usize) -> Result<SpanWitness> {
        if m_prime == 0 {
            return Err(Error::Precondition("quadrature size must be >= 1".into()));
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            if t.ket == t.bra {
                terms.push(t.clone());
                continue;
            }
            for s in 0..m_prime {
                let theta = TAU * s as f64 / m_prime as f64;
                let phase = C64::from_polar(1.0, theta);
                let amps = t
                    .ket
                    .amps()
                    .iter()
                    .zip(t.bra.amps())
                    .map(|(a, b)| a + phase * b)
                    .collect();
                let psi = StateVector::new(vec![self.d], amps)?;
                let w = C64::from_polar(1.0 / m_prime as f64, self.n as f64 * theta);
                terms.push(PowerTerm {
                    coef: t.coef * w,
                    ket: psi.clone(),
                    bra: psi,
                });
            }
        }
        let target = a_operator(self.target.0, self.target.1, self.d, self.n)?;
        let recon_error = reconstruct(&terms, self.d, self.n)?.max_abs_diff(&target);
        Ok(SpanWitness {
            terms,
            recon_error,
            ..self.clone()
        })
    }
}

fn power(v: &StateVector, n: usize) -> StateVector {
    let mut out = v.clone();
    for _ in 1..n {
        out = out.kron(v);
    }
    out
}

fn reconstruct(terms: &[PowerTerm], d: usize, n: usize) -> Result<TensorOperator> {
    let mut op = TensorOperator::zeros(&vec![d; n])?;
    for t in terms {
        let outer = power(&t.ket, n).outer(&power(&t.bra, n))?;
        op.add_scaled(&outer, t.coef)?;
    }
    Ok(op)
}

/// Discretizes the phase integrals extracting `a_ij` from powers of
/// `(|0⟩ + e^{iθ}|i⟩)(⟨0| + e^{iφ}⟨j|)` on `M` equispaced angles (an `M×M`
/// grid when both indices are nonzero). The phase exponents run over `0..=N`,
/// so the result is exact once `M > N - 1`; smaller `M` aliases and shows up
/// in `recon_error`.
pub fn a_span_decomposition(i: usize, j: usize, d: usize, n: usize, m: usize) -> Result<SpanWitness> {
    let target = a_operator(i, j, d, n)?;
    if m == 0 {
        return Err(Error::Precondition("quadrature size M must be >= 1".into()));
    }
    let unit = |k: usize| StateVector::basis(&[d], &[k]);
    let shifted = |k: usize, angle: f64| -> Result<StateVector> {
        let mut v = unit(0)?;
        v.amps_mut()[k] += C64::from_polar(1.0, angle);
        Ok(v)
    };
    let angles: Vec<f64> = (0..m).map(|s| TAU * s as f64 / m as f64).collect();
    let mf = m as f64;

    let mut terms = Vec::new();
    match (i, j) {
        (0, 0) => terms.push(PowerTerm {
            coef: ONE,
            ket: unit(0)?,
            bra: unit(0)?,
        }),
        (i, 0) => {
            for &t in &angles {
                terms.push(PowerTerm {
                    coef: C64::from_polar(1.0 / mf, -t),
                    ket: shifted(i, t)?,
                    bra: unit(0)?,
                });
            }
        }
        (0, j) => {
            // the bra carries e^{iφ} once conjugated
            for &p in &angles {
                terms.push(PowerTerm {
                    coef: C64::from_polar(1.0 / mf, -p),
                    ket: unit(0)?,
                    bra: shifted(j, -p)?,
                });
            }
        }
        (i, j) => {
            for &t in &angles {
                for &p in &angles {
                    terms.push(PowerTerm {
                        coef: C64::from_polar(1.0 / (mf * mf), -(t + p)),
                        ket: shifted(i, t)?,
                        bra: shifted(j, -p)?,
                    });
                }
            }
        }
    }
    let recon_error = reconstruct(&terms, d, n)?.max_abs_diff(&target);
    Ok(SpanWitness {
        target: (i, j),
        d,
        n,
        m,
        terms,
        recon_error,
    })
}
