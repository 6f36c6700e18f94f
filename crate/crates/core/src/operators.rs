//! Spin operator algebra, tensor-product embedding and the vectorization
//! convention shared by every superoperator in the crate.
//!
//! Basis ordering is fixed: site 0 is the slowest index, and within a site
//! states run from maximal to minimal magnetization, `|S⟩, |S-1⟩, …, |-S⟩`.
//! Operators are vectorized by stacking columns, `vec(X)[i + D·j] = X[i, j]`,
//! so that `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::{Col, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::C64;

/// A spin magnitude `S`, stored as the integer `2S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !(twice.is_finite() && twice >= 1.0 && (twice - twice.round()).abs() < 1e-12) {
            return Err(Error::InvalidSpin(s));
        }
        Ok(Spin { twice: twice.round() as u32 })
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Spin { twice })
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// Magnetization of local basis state `index` (0 is `m = S`).
    pub fn magnetization(self, index: usize) -> f64 {
        self.value() - index as f64
    }

    /// `2m` for local basis state `index`, an exact integer.
    pub fn twice_magnetization(self, index: usize) -> i32 {
        self.twice as i32 - 2 * index as i32
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Spin::new(s)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.value()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// An ordered lattice of spins.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinSpec {
    sites: Vec<Spin>,
}

impl SpinSpec {
    pub fn new(sites: Vec<Spin>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidParameter("a spin lattice needs at least one site".into()));
        }
        Ok(SpinSpec { sites })
    }

    pub fn uniform(spin: Spin, n: usize) -> Result<Self> {
        Self::new(vec![spin; n])
    }

    pub fn sites(&self) -> &[Spin] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.dim()).collect()
    }

    /// Total Hilbert-space dimension `Π d_j`.
    pub fn dim(&self) -> usize {
        self.sites.iter().map(|s| s.dim()).product()
    }

    /// Local state indices of a product basis state.
    pub fn decompose(&self, mut index: usize) -> Vec<usize> {
        let mut local = vec![0; self.sites.len()];
        for (slot, spin) in local.iter_mut().zip(&self.sites).rev() {
            *slot = index % spin.dim();
            index /= spin.dim();
        }
        local
    }

    pub fn compose(&self, local: &[usize]) -> usize {
        local.iter().zip(&self.sites).fold(0, |acc, (&i, s)| acc * s.dim() + i)
    }

    /// `2m_j` of every site for product basis state `index`.
    pub fn twice_magnetizations(&self, index: usize) -> Vec<i32> {
        self.decompose(index)
            .into_iter()
            .zip(&self.sites)
            .map(|(i, s)| s.twice_magnetization(i))
            .collect()
    }
}

/// A dense square complex matrix acting on a spin Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: CMat,
}

impl Operator {
    pub fn from_mat(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::NotSquare { rows: mat.nrows(), cols: mat.ncols() });
        }
        Ok(Operator { mat })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Operator { mat: Mat::from_fn(dim, dim, f) }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator { mat: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Operator { mat: Mat::identity(dim, dim) }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn real_diagonal(entries: &[f64]) -> Self {
        Self::from_fn(entries.len(), |i, j| C64::new(if i == j { entries[i] } else { 0.0 }, 0.0))
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        assert_eq!(ket.len(), bra.len(), "outer product of vectors with different lengths");
        Self::from_fn(ket.len(), |i, j| ket[i] * bra[j].conj())
    }

    /// Matrix unit `|i⟩⟨j|` in dimension `dim`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        Self::from_fn(dim, |r, c| C64::new((r == i && c == j) as u8 as f64, 0.0))
    }

    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Operator { mat: self.mat.adjoint().to_owned() }
    }

    pub fn transpose(&self) -> Self {
        Operator { mat: self.mat.transpose().to_owned() }
    }

    pub fn conj(&self) -> Self {
        Operator { mat: self.mat.conjugate().to_owned() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm_l2()
    }

    /// `‖A − A†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Operator { mat: linalg::hermitian_part(self.mat.as_ref()) }
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator { mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * c) }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Hilbert-Schmidt inner product `Tr[A† B]`.
    pub fn inner(&self, other: &Operator) -> C64 {
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                acc += self.mat[(i, j)].conj() * other.mat[(i, j)];
            }
        }
        acc
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        self * other - other * self
    }

    pub fn anticommutator(&self, other: &Operator) -> Self {
        self * other + other * self
    }

    pub fn kron(&self, other: &Operator) -> Self {
        Operator { mat: linalg::kron(self.mat.as_ref(), other.mat.as_ref()) }
    }

    pub fn apply(&self, ket: &[C64]) -> Vec<C64> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.mat[(i, j)] * ket[j]).sum()).collect()
    }

    /// `⟨bra|A|ket⟩`.
    pub fn expectation(&self, bra: &[C64], ket: &[C64]) -> C64 {
        bra.iter().zip(self.apply(ket)).map(|(b, k)| b.conj() * k).sum()
    }

    /// Eigenvalues of the hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(self.mat.as_ref())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.mat.norm_max()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: self.dim() });
        }
        Ok(())
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat - &rhs.mat }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat * &rhs.mat }
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale_real(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Single-site spin matrices in the `|S⟩ … |−S⟩` basis.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub sz: Operator,
    pub splus: Operator,
    pub sminus: Operator,
    pub sx: Operator,
    pub sy: Operator,
}

pub fn spin_operators(spin: Spin) -> SpinOperators {
    let d = spin.dim();
    let s = spin.value();
    let zero = C64::new(0.0, 0.0);
    let sz = Operator::from_fn(d, |i, j| if i == j { C64::new(spin.magnetization(i), 0.0) } else { zero });
    // S+ |m⟩ = sqrt(S(S+1) − m(m+1)) |m+1⟩; |m+1⟩ sits one index above |m⟩.
    let splus = Operator::from_fn(d, |i, j| {
        if j == i + 1 {
            let m = spin.magnetization(j);
            C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0)
        } else {
            zero
        }
    });
    let sminus = splus.adjoint();
    let sx = (&splus + &sminus).scale_real(0.5);
    let sy = (&splus - &sminus).scale(C64::new(0.0, -0.5));
    SpinOperators { sz, splus, sminus, sx, sy }
}

/// `𝟙 ⊗ … ⊗ op ⊗ … ⊗ 𝟙` with `op` on `site` (0-based).
pub fn embed(op: &Operator, spec: &SpinSpec, site: usize) -> Result<Operator> {
    let sites = spec.sites();
    let spin = sites.get(site).ok_or(Error::SiteOutOfRange { index: site, sites: sites.len() })?;
    op.check_dim(spin.dim())?;
    let left: usize = sites[..site].iter().map(|s| s.dim()).product();
    let right: usize = sites[site + 1..].iter().map(|s| s.dim()).product();
    let d = spin.dim();
    let dim = left * d * right;
    let zero = C64::new(0.0, 0.0);
    Ok(Operator::from_fn(dim, |r, c| {
        let (rl, rm, rr) = (r / (d * right), (r / right) % d, r % right);
        let (cl, cm, cr) = (c / (d * right), (c / right) % d, c % right);
        if rl == cl && rr == cr {
            op.mat[(rm, cm)]
        } else {
            zero
        }
    }))
}

/// Column-stacked vectorization.
pub fn vectorize(op: &Operator) -> Col<C64> {
    let d = op.dim();
    Col::from_fn(d * d, |k| op.mat[(k % d, k / d)])
}

pub fn devectorize(v: &[C64]) -> Result<Operator> {
    let n = v.len();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || d == 0 {
        return Err(Error::NotPerfectSquare(n));
    }
    Ok(Operator::from_fn(d, |i, j| v[i + d * j]))
}

pub(crate) fn devectorize_col(v: faer::ColRef<'_, C64>) -> Result<Operator> {
    let buf: Vec<C64> = (0..v.nrows()).map(|i| v[i]).collect();
    devectorize(&buf)
}

/// Index of `|i⟩⟨j|` in the vectorized layout.
#[inline]
pub fn vec_index(dim: usize, i: usize, j: usize) -> usize {
    i + dim * j
}

/// A linear map on operators, stored as a `D² × D²` matrix acting on
/// column-stacked operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    mat: CMat,
    hilbert_dim: usize,
}

impl Superoperator {
    pub fn from_mat(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare { rows: mat.nrows(), cols: mat.ncols() });
        }
        let n = mat.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || d == 0 {
            return Err(Error::NotPerfectSquare(n));
        }
        Ok(Superoperator { mat, hilbert_dim: d })
    }

    pub fn zeros(hilbert_dim: usize) -> Self {
        let n = hilbert_dim * hilbert_dim;
        Superoperator { mat: Mat::zeros(n, n), hilbert_dim }
    }

    pub fn identity(hilbert_dim: usize) -> Self {
        let n = hilbert_dim * hilbert_dim;
        Superoperator { mat: Mat::identity(n, n), hilbert_dim }
    }

    /// `X ↦ A X B`, i.e. `Bᵀ ⊗ A`.
    pub fn sandwich(a: &Operator, b: &Operator) -> Self {
        let d = a.dim();
        Superoperator { mat: linalg::kron(b.mat.transpose(), a.mat.as_ref()), hilbert_dim: d }
    }

    pub fn left_multiplication(a: &Operator) -> Self {
        Self::sandwich(a, &Operator::identity(a.dim()))
    }

    pub fn right_multiplication(b: &Operator) -> Self {
        Self::sandwich(&Operator::identity(b.dim()), b)
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        x.check_dim(self.hilbert_dim)?;
        let v = vectorize(x);
        let out = &self.mat * &v;
        devectorize_col(out.as_ref())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm_l2()
    }

    pub fn scale(&self, c: f64) -> Self {
        let c = C64::new(c, 0.0);
        Superoperator {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * c),
            hilbert_dim: self.hilbert_dim,
        }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &Superoperator, c: f64) -> Result<Self> {
        if other.hilbert_dim != self.hilbert_dim {
            return Err(Error::DimensionMismatch { expected: self.hilbert_dim, found: other.hilbert_dim });
        }
        let c = C64::new(c, 0.0);
        Ok(Superoperator {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] + c * other.mat[(i, j)]),
            hilbert_dim: self.hilbert_dim,
        })
    }

    /// `‖vec(𝟙)ᵀ L‖₂`: zero exactly when `Tr ℒ[X] = 0` for every `X`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.hilbert_dim;
        let mut acc = 0.0;
        for col in 0..self.dim() {
            let s: C64 = (0..d).map(|i| self.mat[(vec_index(d, i, i), col)]).sum();
            acc += s.norm_sqr();
        }
        acc.sqrt()
    }

    /// Raw little-endian bytes of the matrix (column-major, re then im).
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.dim() * self.dim() * 16);
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                out.extend_from_slice(&self.mat[(i, j)].re.to_le_bytes());
                out.extend_from_slice(&self.mat[(i, j)].im.to_le_bytes());
            }
        }
        out
    }
}

impl<'a> Add<&'a Superoperator> for &'a Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.hilbert_dim, rhs.hilbert_dim, "superoperator dimensions differ");
        Superoperator { mat: &self.mat + &rhs.mat, hilbert_dim: self.hilbert_dim }
    }
}

impl<'a> Sub<&'a Superoperator> for &'a Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.hilbert_dim, rhs.hilbert_dim, "superoperator dimensions differ");
        Superoperator { mat: &self.mat - &rhs.mat, hilbert_dim: self.hilbert_dim }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn spin_one_matrices() {
        let ops = spin_operators(Spin::ONE);
        assert_eq!(ops.sz, Operator::real_diagonal(&[1.0, 0.0, -1.0]));
        // S+ |0⟩ = √2 |1⟩
        let up = ops.splus.apply(&[re(0.0), re(1.0), re(0.0)]);
        assert!((up[0] - re(2f64.sqrt())).norm() < 1e-15);
        assert!(up[1].norm() < 1e-15 && up[2].norm() < 1e-15);
    }

    #[test]
    fn spin_half_is_half_pauli() {
        let ops = spin_operators(Spin::HALF);
        let sx = Operator::from_fn(2, |i, j| re(if i != j { 0.5 } else { 0.0 }));
        let sy = Operator::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -0.5),
            (1, 0) => C64::new(0.0, 0.5),
            _ => re(0.0),
        });
        assert!((&ops.sx - &sx).frobenius_norm() < 1e-15);
        assert!((&ops.sy - &sy).frobenius_norm() < 1e-15);
        assert_eq!(ops.sz, Operator::real_diagonal(&[0.5, -0.5]));
    }

    #[test]
    fn rejects_non_half_integer_spin() {
        assert!(Spin::new(0.3).is_err());
        assert!(Spin::new(0.0).is_err());
        assert!(Spin::new(-1.0).is_err());
        assert_eq!(Spin::new(1.5).unwrap().dim(), 4);
    }

    #[test]
    fn embed_middle_site_of_three_spin_ones() {
        let spec = SpinSpec::uniform(Spin::ONE, 3).unwrap();
        let sz = spin_operators(Spin::ONE).sz;
        let e = embed(&sz, &spec, 1).unwrap();
        assert_eq!(e.dim(), 27);
        for k in 0..27 {
            let m = spec.twice_magnetizations(k)[1] as f64 / 2.0;
            assert_eq!(e.get(k, k), re(m));
        }
        assert!((&e - &Operator::diagonal(&(0..27).map(|k| e.get(k, k)).collect::<Vec<_>>())).frobenius_norm() == 0.0);
        let e3 = embed(&sz, &spec, 2).unwrap();
        let k = spec.compose(&[0, 1, 2]); // |1, 0, −1⟩
        assert_eq!(e3.get(k, k), re(-1.0));
    }

    #[test]
    fn embed_identity_and_errors() {
        let spec = SpinSpec::new(vec![Spin::HALF, Spin::ONE]).unwrap();
        assert_eq!(embed(&Operator::identity(3), &spec, 1).unwrap(), Operator::identity(6));
        assert!(matches!(embed(&Operator::identity(3), &spec, 2), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(embed(&Operator::identity(2), &spec, 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn vectorize_identity_and_devectorize_errors() {
        let v = vectorize(&Operator::identity(2));
        let ones = (0..4).filter(|&k| v[k] == re(1.0)).count();
        let zeros = (0..4).filter(|&k| v[k] == re(0.0)).count();
        assert_eq!((ones, zeros), (2, 2));
        assert!(matches!(devectorize(&[re(1.0); 3]), Err(Error::NotPerfectSquare(3))));
    }

    #[test]
    fn basis_compose_decompose() {
        let spec = SpinSpec::new(vec![Spin::ONE, Spin::HALF, Spin::ONE]).unwrap();
        for k in 0..spec.dim() {
            assert_eq!(spec.compose(&spec.decompose(k)), k);
        }
        assert_eq!(spec.twice_magnetizations(0), vec![2, 1, 2]);
        assert_eq!(spec.twice_magnetizations(spec.dim() - 1), vec![-2, -1, -2]);
    }
}
