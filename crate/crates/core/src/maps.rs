//! Linear maps `Λ: L(H_in) → L(H_out)` held as Choi operators
//! `L = Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)` with dims `[d_in, d_out]`.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::eigen::hermitian_min_eig;
use crate::error::{Error, Result};
use crate::tensor::{swap_operator, Limits, StateVector, TensorOperator, C64, ONE};

/// Hermiticity slack accepted when loading a Choi file.
pub const FILE_HERMITIAN_TOL: f64 = 1e-10;

/// A witness value must be below this to count as a refutation.
pub const REFUTE_THRESHOLD: f64 = -1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    d_in: usize,
    d_out: usize,
    choi: TensorOperator,
}

impl LinearMap {
    pub fn from_choi(choi: TensorOperator) -> Result<Self> {
        match *choi.dims() {
            [d_in, d_out] => Ok(Self { d_in, d_out, choi }),
            _ => Err(Error::Shape(format!(
                "Choi operator needs dims [d_in, d_out], got {:?}",
                choi.dims()
            ))),
        }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn choi(&self) -> &TensorOperator {
        &self.choi
    }

    /// `Λ(ρ)[a,b] = Σ_ij ρ_ij L[(i,a),(j,b)]`, i.e. `Tr_in[(ρᵀ ⊗ I) L]`.
    pub fn apply(&self, rho: &TensorOperator) -> Result<TensorOperator> {
        if rho.side() != self.d_in {
            return Err(Error::Shape(format!(
                "input of side {} for a map with d_in = {}",
                rho.side(),
                self.d_in
            )));
        }
        let (di, dout) = (self.d_in, self.d_out);
        let mut out = TensorOperator::zeros(&[dout])?;
        for i in 0..di {
            for j in 0..di {
                let w = rho.get(i, j);
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for a in 0..dout {
                    for b in 0..dout {
                        out.add_at(a, b, w * self.choi.get(i * dout + a, j * dout + b));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Λ(|i⟩⟨j|)`, the `(i,j)` block of the Choi operator.
    pub fn block(&self, i: usize, j: usize) -> Result<TensorOperator> {
        self.apply(&TensorOperator::matrix_unit(self.d_in, i, j)?)
    }

    /// `Λ(I_in) = Tr_in L`
    pub fn image_of_identity(&self) -> TensorOperator {
        self.choi.partial_trace(&[1]).expect("two factors")
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let reduced = self.choi.partial_trace(&[0]).expect("two factors");
        let eye = TensorOperator::identity(&[self.d_in]).expect("d_in >= 1");
        reduced.max_abs_diff(&eye) <= tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        let eye = TensorOperator::identity(&[self.d_out]).expect("d_out >= 1");
        self.image_of_identity().max_abs_diff(&eye) <= tol
    }

    pub fn to_file(&self) -> ChoiFile {
        ChoiFile {
            d_in: self.d_in,
            d_out: self.d_out,
            choi: self
                .choi
                .rows()
                .into_iter()
                .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChoiFile = serde_json::from_str(text)?;
        file.into_map()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }
}

/// On-disk Choi format: `{"d_in", "d_out", "choi": [[[re, im], ...], ...]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChoiFile {
    pub d_in: usize,
    pub d_out: usize,
    pub choi: Vec<Vec<[f64; 2]>>,
}

impl ChoiFile {
    pub fn into_map(self) -> Result<LinearMap> {
        if self.d_in == 0 || self.d_out == 0 {
            return Err(Error::Format("d_in and d_out must be positive".into()));
        }
        let side = self.d_in * self.d_out;
        if self.choi.len() != side || self.choi.iter().any(|r| r.len() != side) {
            return Err(Error::Format(format!(
                "choi must be {side}×{side} for d_in = {}, d_out = {}",
                self.d_in, self.d_out
            )));
        }
        let data = self
            .choi
            .iter()
            .flatten()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        let choi = TensorOperator::new(vec![self.d_in, self.d_out], data)?;
        let deviation = choi.hermitian_deviation();
        if deviation > FILE_HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                deviation,
                allowed: FILE_HERMITIAN_TOL,
            });
        }
        LinearMap::from_choi(choi)
    }
}

pub fn transposition_map(d: usize) -> Result<LinearMap> {
    if d < 2 {
        return Err(Error::Precondition(format!(
            "transposition needs d >= 2, got {d}"
        )));
    }
    LinearMap::from_choi(swap_operator(d)?)
}

/// Choi operator `d |Φ⁺⟩⟨Φ⁺| = Σ_ij |ii⟩⟨jj|`.
pub fn identity_map(d: usize) -> Result<LinearMap> {
    if d == 0 {
        return Err(Error::Precondition("identity map needs d >= 1".into()));
    }
    let mut choi = TensorOperator::zeros(&[d, d])?;
    for i in 0..d {
        for j in 0..d {
            choi.set(i * d + i, j * d + j, ONE);
        }
    }
    LinearMap::from_choi(choi)
}

/// The qutrit Choi map:
/// diagonal outputs `(x00 + x22, x00 + x11, x11 + x22)`, off-diagonal `-x_ij`.
/// Not trace normalized: `Tr C(ρ) = 2 Tr ρ`.
pub fn choi_map_3() -> LinearMap {
    // diagonal output contributed by input |i><i|
    const DIAG: [[f64; 3]; 3] = [[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]];
    let mut choi = TensorOperator::zeros(&[3, 3]).expect("static dims");
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                for (a, &w) in DIAG[i].iter().enumerate() {
                    choi.set(i * 3 + a, i * 3 + a, C64::new(w, 0.0));
                }
            } else {
                choi.set(i * 3 + i, j * 3 + j, C64::new(-1.0, 0.0));
            }
        }
    }
    LinearMap::from_choi(choi).expect("two factors")
}

/// `ρ ↦ scale · (I/d_out) · Tr ρ`
pub fn depolarizing_to(d_in: usize, d_out: usize, scale: f64) -> Result<LinearMap> {
    if d_in == 0 || d_out == 0 {
        return Err(Error::Precondition("dimensions must be at least 1".into()));
    }
    let choi = TensorOperator::identity(&[d_in, d_out])?.scale(scale / d_out as f64);
    LinearMap::from_choi(choi)
}

/// `Σ w_k Λ_k`; weights may be negative.
pub fn mix(maps: &[LinearMap], weights: &[f64]) -> Result<LinearMap> {
    if maps.is_empty() || maps.len() != weights.len() {
        return Err(Error::Shape(format!(
            "{} maps with {} weights",
            maps.len(),
            weights.len()
        )));
    }
    let (d_in, d_out) = (maps[0].d_in, maps[0].d_out);
    let mut choi = TensorOperator::zeros(&[d_in, d_out])?;
    for (m, &w) in maps.iter().zip(weights) {
        if (m.d_in, m.d_out) != (d_in, d_out) {
            return Err(Error::Shape(format!(
                "cannot mix a {}→{} map into {d_in}→{d_out}",
                m.d_in, m.d_out
            )));
        }
        choi.add_scaled(&m.choi, C64::new(w, 0.0))?;
    }
    LinearMap::from_choi(choi)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Precondition(format!("eta must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

/// White-noise admixture: `(1-η) Λ(ρ) + η (Tr L / d_in) (I/d_out) Tr ρ`.
pub fn noisy_a(m: &LinearMap, eta: f64) -> Result<LinearMap> {
    check_eta(eta)?;
    let c = m.choi.trace().re / (m.d_in * m.d_out) as f64;
    let mut choi = m.choi.scale(1.0 - eta);
    choi.add_scaled(
        &TensorOperator::identity(&[m.d_in, m.d_out])?,
        C64::new(eta * c, 0.0),
    )?;
    LinearMap::from_choi(choi)
}

/// Depolarize the input first: `(1-η) Λ(ρ) + η Λ(I/d_in) Tr ρ`.
pub fn noisy_b(m: &LinearMap, eta: f64) -> Result<LinearMap> {
    check_eta(eta)?;
    let endpoint = noisy_b_endpoint(m)?;
    let mut choi = m.choi.scale(1.0 - eta);
    choi.add_scaled(&endpoint, C64::new(eta, 0.0))?;
    LinearMap::from_choi(choi)
}

/// Choi of `ρ ↦ Λ(I/d_in) Tr ρ`, i.e. `I_in/d_in ⊗ Λ(I_in)`.
pub(crate) fn noisy_b_endpoint(m: &LinearMap) -> Result<TensorOperator> {
    let eye = TensorOperator::identity(&[m.d_in])?.scale(1.0 / m.d_in as f64);
    eye.kron(&m.image_of_identity(), &Limits::new(usize::MAX))
}

/// Choi of `after ∘ before`.
pub fn compose(after: &LinearMap, before: &LinearMap) -> Result<LinearMap> {
    if before.d_out != after.d_in {
        return Err(Error::Shape(format!(
            "cannot compose {}→{} after {}→{}",
            after.d_in, after.d_out, before.d_in, before.d_out
        )));
    }
    let (d_in, d_out) = (before.d_in, after.d_out);
    let mut choi = TensorOperator::zeros(&[d_in, d_out])?;
    for i in 0..d_in {
        for j in 0..d_in {
            let block = after.apply(&before.block(i, j)?)?;
            for a in 0..d_out {
                for b in 0..d_out {
                    choi.set(i * d_out + a, j * d_out + b, block.get(a, b));
                }
            }
        }
    }
    LinearMap::from_choi(choi)
}

pub fn is_trace_preserving(m: &LinearMap, tol: f64) -> bool {
    m.is_trace_preserving(tol)
}

/// Product state on which the map produces a negative expectation.
#[derive(Clone, Debug)]
pub struct PositivityWitness {
    pub psi_in: StateVector,
    pub phi_out: StateVector,
    /// `⟨φ|Λ(|ψ⟩⟨ψ|)|φ⟩`
    pub value: f64,
}

fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..d)
            .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let v = StateVector::new(vec![d], amps).expect("finite samples");
        if let Ok(u) = v.normalized() {
            return u;
        }
    }
}

/// Searches pure product states for `⟨φ|Λ(|ψ⟩⟨ψ|)|φ⟩ < 0` by alternating
/// minimisation. Finding nothing does not certify positivity.
pub fn refute_positivity(
    m: &LinearMap,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<Option<PositivityWitness>> {
    if restarts == 0 || iters == 0 {
        return Err(Error::Precondition("restarts and iters must be >= 1".into()));
    }
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<PositivityWitness> = None;
    let (d_in, d_out) = (m.d_in, m.d_out);

    for _ in 0..restarts {
        let mut psi = random_unit(d_in, &mut rng);
        let mut phi = random_unit(d_out, &mut rng);
        let mut value = f64::INFINITY;
        for _ in 0..iters {
            // best φ for fixed ψ
            let out = m.apply(&psi.projector())?.hermitian_part();
            let step = hermitian_min_eig(&out, 0.0, &limits)?;
            phi = step.vector;

            // best ψ for fixed φ: K_ij = ⟨φ|Λ(|i⟩⟨j|)|φ⟩, value = u† K u with u = conj ψ
            let mut k = TensorOperator::zeros(&[d_in])?;
            for i in 0..d_in {
                for j in 0..d_in {
                    k.set(i, j, m.block(i, j)?.expectation(phi.amps())?);
                }
            }
            let step = hermitian_min_eig(&k.hermitian_part(), 0.0, &limits)?;
            let conj: Vec<C64> = step.vector.amps().iter().map(|z| z.conj()).collect();
            psi = StateVector::new(vec![d_in], conj)?;
            let previous = value;
            value = step.value;
            if (previous - value).abs() <= 1e-15 * value.abs().max(1.0) {
                break;
            }
        }
        let value = m.apply(&psi.projector())?.expectation(phi.amps())?.re;
        if value < REFUTE_THRESHOLD && best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(PositivityWitness {
                psi_in: psi,
                phi_out: phi,
                value,
            });
        }
    }
    Ok(best)
}
