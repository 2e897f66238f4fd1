//! Dense complex operators over tensor-factored index spaces.
//!
//! Factor `0` of a `dims` list is the most significant digit of a flattened
//! row/column index, so `|x_0 x_1 ... x_{n-1}⟩` lives at
//! `((x_0 * d_1 + x_1) * d_2 + ...) + x_{n-1}`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Upper bound on the side of any operator built or diagonalised.
pub const DEFAULT_MAX_SIDE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_side: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_side: DEFAULT_MAX_SIDE,
        }
    }
}

impl Limits {
    pub fn new(max_side: usize) -> Self {
        Self { max_side }
    }

    pub fn check(&self, side: usize) -> Result<()> {
        if side > self.max_side {
            return Err(Error::DimensionLimit {
                side,
                max: self.max_side,
            });
        }
        Ok(())
    }

    /// Checks the product of `dims` without overflowing.
    pub fn check_dims(&self, dims: &[usize]) -> Result<usize> {
        match side_of(dims) {
            Some(side) => self.check(side).map(|_| side),
            None => Err(Error::DimensionLimit {
                side: usize::MAX,
                max: self.max_side,
            }),
        }
    }
}

/// Product of the factor dimensions, `None` on overflow.
pub fn side_of(dims: &[usize]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
}

fn validate_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::Shape("dims list is empty".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Shape(format!("zero factor dimension in {dims:?}")));
    }
    side_of(dims).ok_or_else(|| Error::Shape(format!("dimension product overflows for {dims:?}")))
}

/// Digits of a flat index in the mixed radix given by `dims`.
pub fn unflatten(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

pub fn flatten(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn validate_perm(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Shape(format!(
            "permutation has length {} but there are {n} factors",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Shape(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// For a permutation sending factor `j` to position `perm[j]`, the flat index
/// each source basis state lands on, and the permuted dims.
fn permutation_index_map(dims: &[usize], perm: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut new_dims = vec![0; dims.len()];
    for (j, &p) in perm.iter().enumerate() {
        new_dims[p] = dims[j];
    }
    let new_strides = strides(&new_dims);
    let side: usize = dims.iter().product();
    let mut map = Vec::with_capacity(side);
    let mut digits = vec![0usize; dims.len()];
    for _ in 0..side {
        let target = digits
            .iter()
            .zip(perm)
            .map(|(&x, &p)| x * new_strides[p])
            .sum();
        map.push(target);
        // odometer increment, last factor fastest
        for k in (0..dims.len()).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    (map, new_dims)
}

/// Dense square complex matrix with a tensor factorization of its index space.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator {
    dims: Vec<usize>,
    side: usize,
    data: Vec<C64>,
}

impl TensorOperator {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let side = validate_dims(&dims)?;
        if data.len() != side * side {
            return Err(Error::Shape(format!(
                "expected {} entries for side {side}, got {}",
                side * side,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dims, side, data })
    }

    pub fn from_rows(dims: Vec<usize>, rows: &[Vec<C64>]) -> Result<Self> {
        let data = rows.iter().flatten().copied().collect();
        Self::new(dims, data)
    }

    pub fn from_real_rows(dims: Vec<usize>, rows: &[Vec<f64>]) -> Result<Self> {
        let data = rows.iter().flatten().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(dims, data)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let side = validate_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            side,
            data: vec![ZERO; side * side],
        })
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        let mut op = Self::zeros(dims)?;
        for i in 0..op.side {
            op.data[i * op.side + i] = ONE;
        }
        Ok(op)
    }

    pub fn diagonal(dims: &[usize], values: &[f64]) -> Result<Self> {
        let mut op = Self::zeros(dims)?;
        if values.len() != op.side {
            return Err(Error::Shape(format!(
                "{} diagonal values for side {}",
                values.len(),
                op.side
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            op.data[i * op.side + i] = C64::new(v, 0.0);
        }
        Ok(op)
    }

    /// `|i⟩⟨j|` on a single factor of dimension `d`.
    pub fn matrix_unit(d: usize, i: usize, j: usize) -> Result<Self> {
        if i >= d || j >= d {
            return Err(Error::IndexOutOfRange(format!("({i},{j}) for dimension {d}")));
        }
        let mut op = Self::zeros(&[d])?;
        op.data[i * d + j] = ONE;
        Ok(op)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.side + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.side + col] = value;
    }

    #[inline]
    pub fn add_at(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.side + col] += value;
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.side).map(<[C64]>::to_vec).collect()
    }

    /// Same entries under a different factorization of the same side.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        let side = validate_dims(&dims)?;
        if side != self.side {
            return Err(Error::Shape(format!(
                "cannot refactor side {} as {dims:?}",
                self.side
            )));
        }
        self.dims = dims;
        Ok(self)
    }

    fn same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!(
                "{what}: dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    /// `self + w * other`
    pub fn add_scaled(&mut self, other: &Self, w: C64) -> Result<()> {
        self.same_shape(other, "add_scaled")?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += w * b;
        }
        Ok(())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(C64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self {
            data: self.data.iter().map(|z| z * s).collect(),
            ..self.clone()
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.side;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        Self {
            data,
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.side;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c];
            }
        }
        Self {
            data,
            ..self.clone()
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.side != other.side {
            return Err(Error::Shape(format!(
                "matmul of sides {} and {}",
                self.side, other.side
            )));
        }
        let data = matmul_raw(&self.data, &other.data, self.side, self.side, self.side);
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.side {
            return Err(Error::Shape(format!(
                "vector of length {} against side {}",
                v.len(),
                self.side
            )));
        }
        Ok(self
            .data
            .chunks(self.side)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `⟨v|self|v⟩`
    pub fn expectation(&self, v: &[C64]) -> Result<C64> {
        let w = self.apply(v)?;
        Ok(v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn trace(&self) -> C64 {
        (0..self.side).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.side != other.side {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Induced ∞-norm (max absolute row sum); bounds the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.side)
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.side;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> Self {
        let n = self.side;
        let mut out = self.clone();
        for r in 0..n {
            for c in r..n {
                let avg = (self.get(r, c) + self.get(c, r).conj()) * 0.5;
                out.set(r, c, avg);
                out.set(c, r, avg.conj());
            }
        }
        out
    }

    /// Kronecker product; `self`'s indices are the most significant.
    pub fn kron(&self, other: &Self, limits: &Limits) -> Result<Self> {
        let side = self
            .side
            .checked_mul(other.side)
            .ok_or(Error::DimensionLimit {
                side: usize::MAX,
                max: limits.max_side,
            })?;
        limits.check(side)?;
        let (n, m) = (self.side, other.side);
        let mut data = vec![ZERO; side * side];
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.data[r1 * n + c1];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..m {
                    let row = (r1 * m + r2) * side + c1 * m;
                    let src = &other.data[r2 * m..(r2 + 1) * m];
                    for (dst, b) in data[row..row + m].iter_mut().zip(src) {
                        *dst = a * b;
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(Self { dims, side, data })
    }

    /// `P X P†` where `P` sends factor `j` to position `perm[j]`.
    ///
    /// Realised as an index relabelling; the returned dims are permuted
    /// accordingly, so factors of unequal dimension may be reordered.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<Self> {
        validate_perm(perm, self.dims.len())?;
        let (map, new_dims) = permutation_index_map(&self.dims, perm);
        let n = self.side;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            let rr = map[r] * n;
            for c in 0..n {
                data[rr + map[c]] = self.data[r * n + c];
            }
        }
        Ok(Self {
            dims: new_dims,
            side: n,
            data,
        })
    }

    /// `target += weight · P self P†`, visiting only the nonzero entries of `self`.
    pub fn accumulate_permuted(&self, perm: &[usize], weight: C64, target: &mut Self) -> Result<()> {
        validate_perm(perm, self.dims.len())?;
        let (map, new_dims) = permutation_index_map(&self.dims, perm);
        if new_dims != target.dims {
            return Err(Error::Shape(format!(
                "permuted dims {new_dims:?} do not match target {:?}",
                target.dims
            )));
        }
        let n = self.side;
        for r in 0..n {
            let rr = map[r] * n;
            for (c, z) in self.data[r * n..(r + 1) * n].iter().enumerate() {
                if *z != ZERO {
                    target.data[rr + map[c]] += weight * z;
                }
            }
        }
        Ok(())
    }

    /// Trace over every factor not listed in `keep`; kept factors retain
    /// their original order. An empty `keep` yields the 1×1 full trace.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let nf = self.dims.len();
        let mut kept = vec![false; nf];
        for &k in keep {
            if k >= nf {
                return Err(Error::IndexOutOfRange(format!(
                    "factor {k} of an operator with {nf} factors"
                )));
            }
            kept[k] = true;
        }
        let keep_dims: Vec<usize> = (0..nf).filter(|&k| kept[k]).map(|k| self.dims[k]).collect();
        let out_dims = if keep_dims.is_empty() {
            vec![1]
        } else {
            keep_dims
        };
        let out_side: usize = out_dims.iter().product();

        // split each flat index into (kept part, traced part)
        let mut kept_idx = Vec::with_capacity(self.side);
        let mut traced_idx = Vec::with_capacity(self.side);
        for x in 0..self.side {
            let digits = unflatten(x, &self.dims);
            let (mut k, mut t) = (0usize, 0usize);
            for f in 0..nf {
                if kept[f] {
                    k = k * self.dims[f] + digits[f];
                } else {
                    t = t * self.dims[f] + digits[f];
                }
            }
            kept_idx.push(k);
            traced_idx.push(t);
        }

        let mut data = vec![ZERO; out_side * out_side];
        for r in 0..self.side {
            let (kr, tr) = (kept_idx[r], traced_idx[r]);
            let row = &self.data[r * self.side..(r + 1) * self.side];
            for (c, z) in row.iter().enumerate() {
                if traced_idx[c] == tr {
                    data[kr * out_side + kept_idx[c]] += z;
                }
            }
        }
        Self::new(out_dims, data)
    }
}

fn matmul_raw(a: &[C64], b: &[C64], n: usize, k: usize, m: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * m];
    for i in 0..n {
        let orow = &mut out[i * m..(i + 1) * m];
        for (l, &x) in a[i * k..(i + 1) * k].iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (o, y) in orow.iter_mut().zip(&b[l * m..(l + 1) * m]) {
                *o += x * y;
            }
        }
    }
    out
}

pub fn kron(a: &TensorOperator, b: &TensorOperator, limits: &Limits) -> Result<TensorOperator> {
    a.kron(b, limits)
}

pub fn partial_trace(op: &TensorOperator, keep: &[usize]) -> Result<TensorOperator> {
    op.partial_trace(keep)
}

/// Unitary `P_σ` with `P_σ|x_0 ... x_{n-1}⟩ = |y⟩`, `y_{perm[j]} = x_j`:
/// factor `j` is sent to position `perm[j]`.
pub fn permutation_operator(dims: &[usize], perm: &[usize]) -> Result<TensorOperator> {
    validate_dims(dims)?;
    validate_perm(perm, dims.len())?;
    if perm.iter().enumerate().any(|(j, &p)| dims[j] != dims[p]) {
        return Err(Error::Shape(format!(
            "permutation {perm:?} moves factors of unequal dimension in {dims:?}"
        )));
    }
    let (map, _) = permutation_index_map(dims, perm);
    let mut op = TensorOperator::zeros(dims)?;
    for (x, &y) in map.iter().enumerate() {
        op.set(y, x, ONE);
    }
    Ok(op)
}

/// Swap of two `d`-dimensional factors; the Choi operator of the transposition.
pub fn swap_operator(d: usize) -> Result<TensorOperator> {
    if d == 0 {
        return Err(Error::Precondition("swap dimension must be at least 1".into()));
    }
    permutation_operator(&[d, d], &[1, 0])
}

/// Extract `⟨r|op|c⟩` for the listed computational basis labels.
pub fn principal_minor(op: &TensorOperator, labels: &[Vec<usize>]) -> Result<TensorOperator> {
    let mut flat = Vec::with_capacity(labels.len());
    for label in labels {
        if label.len() != op.dims.len() || label.iter().zip(&op.dims).any(|(&x, &d)| x >= d) {
            return Err(Error::IndexOutOfRange(format!(
                "label {label:?} for dims {:?}",
                op.dims
            )));
        }
        flat.push(flatten(label, &op.dims));
    }
    if flat.is_empty() {
        return Err(Error::Precondition("empty label set".into()));
    }
    let data = flat
        .iter()
        .flat_map(|&r| flat.iter().map(move |&c| (r, c)))
        .map(|(r, c)| op.get(r, c))
        .collect();
    TensorOperator::new(vec![flat.len()], data)
}

/// Pure state over a tensor-factored space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let side = validate_dims(&dims)?;
        if amps.len() != side {
            return Err(Error::Shape(format!(
                "{} amplitudes for dims {dims:?}",
                amps.len()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dims, amps })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let side = validate_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            amps: vec![ZERO; side],
        })
    }

    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(dims)?;
        if digits.len() != dims.len() || digits.iter().zip(dims).any(|(&x, &d)| x >= d) {
            return Err(Error::IndexOutOfRange(format!(
                "basis label {digits:?} for dims {dims:?}"
            )));
        }
        v.amps[flatten(digits, dims)] = ONE;
        Ok(v)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Precondition("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|z| z / n).collect(),
        })
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Self { dims, amps }
    }

    /// `|self⟩⟨other|` on the same factorization.
    pub fn outer(&self, other: &Self) -> Result<TensorOperator> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::Shape("outer product of unequal lengths".into()));
        }
        let data = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b.conj()))
            .collect();
        TensorOperator::new(self.dims.clone(), data)
    }

    pub fn projector(&self) -> TensorOperator {
        self.outer(self).expect("same vector")
    }

    /// Relabel factors so that factor `j` moves to position `perm[j]`.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<Self> {
        validate_perm(perm, self.dims.len())?;
        let (map, new_dims) = permutation_index_map(&self.dims, perm);
        let mut amps = vec![ZERO; self.amps.len()];
        for (x, &y) in map.iter().enumerate() {
            amps[y] = self.amps[x];
        }
        Ok(Self {
            dims: new_dims,
            amps,
        })
    }
}

/// `(1/√d) Σ_i |i⟩|i⟩`
pub fn maximally_entangled(d: usize) -> Result<StateVector> {
    if d == 0 {
        return Err(Error::Precondition("dimension must be at least 1".into()));
    }
    let mut v = StateVector::zeros(&[d, d])?;
    let a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v.amps[i * d + i] = a;
    }
    Ok(v)
}

/// Rectangular operator between two tensor-factored spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct RectOperator {
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl RectOperator {
    pub fn new(row_dims: Vec<usize>, col_dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let rows = validate_dims(&row_dims)?;
        let cols = validate_dims(&col_dims)?;
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {}×{cols} entries, got {}",
                rows,
                data.len()
            )));
        }
        Ok(Self {
            row_dims,
            col_dims,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(row_dims: &[usize], col_dims: &[usize]) -> Result<Self> {
        let rows = validate_dims(row_dims)?;
        let cols = validate_dims(col_dims)?;
        Ok(Self {
            row_dims: row_dims.to_vec(),
            col_dims: col_dims.to_vec(),
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        })
    }

    /// `|ket⟩⟨bra|` as a rectangular operator.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Self {
        let data = ket
            .amps()
            .iter()
            .flat_map(|a| bra.amps().iter().map(move |b| a * b.conj()))
            .collect();
        Self {
            row_dims: ket.dims().to_vec(),
            col_dims: bra.dims().to_vec(),
            rows: ket.len(),
            cols: bra.len(),
            data,
        }
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, value: C64) {
        self.data[r * self.cols + c] += value;
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok(self
            .data
            .chunks(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `V X V†`, carrying `V`'s row factorization.
pub fn conjugate_by(v: &RectOperator, x: &TensorOperator) -> Result<TensorOperator> {
    if v.cols != x.side() {
        return Err(Error::Shape(format!(
            "V has {} columns but X has side {}",
            v.cols,
            x.side()
        )));
    }
    let vx = matmul_raw(&v.data, x.data(), v.rows, v.cols, v.cols);
    let mut out = vec![ZERO; v.rows * v.rows];
    for i in 0..v.rows {
        let vx_row = &vx[i * v.cols..(i + 1) * v.cols];
        for j in 0..v.rows {
            let v_row = &v.data[j * v.cols..(j + 1) * v.cols];
            out[i * v.rows + j] = vx_row.iter().zip(v_row).map(|(a, b)| a * b.conj()).sum();
        }
    }
    TensorOperator::new(v.row_dims.clone(), out)
}
