//! Random perturbation generators: a GUE Hamiltonian plus a dissipator
//! whose Kossakowski matrix is a normalized complex Wishart matrix over a
//! trace-orthonormal operator basis.

use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::{vectorize, Operator, Superoperator};
use crate::C64;

/// PSD tolerance on the smallest eigenvalue of a Kossakowski matrix,
/// relative to its trace.
pub const KOSSAKOWSKI_PSD_TOL: f64 = 1e-10;

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `(M + M†)/√2` with `Re M_ij, Im M_ij ~ N(0, 1)` i.i.d.
pub fn gue_hamiltonian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let m = Mat::from_fn(d, d, |_, _| complex_gaussian(rng));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Operator::from_fn(d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * s)
}

/// `D² − 1` traceless operators with `Tr[F_m F_n†] = δ_mn`.
///
/// Slot `n = a·D + b` (0-based, the last slot `(D−1, D−1)` omitted) holds
/// the matrix unit `E_ab` when `a ≠ b` and, on the diagonal, the
/// normalized traceless combination `(Σ_{i≤a} E_ii − (a+1) E_{a+1,a+1}) /
/// √((a+1)(a+2))`.
#[derive(Clone, Debug)]
pub struct TraceOrthonormalBasis {
    hilbert_dim: usize,
    members: Vec<Operator>,
}

impl TraceOrthonormalBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("basis needs D ≥ 2, got {d}")));
        }
        let mut members = Vec::with_capacity(d * d - 1);
        for a in 0..d {
            for b in 0..d {
                if a == d - 1 && b == d - 1 {
                    continue;
                }
                if a != b {
                    members.push(Operator::unit(d, a, b));
                } else {
                    let k = (a + 1) as f64;
                    let norm = 1.0 / (k * (k + 1.0)).sqrt();
                    let diag: Vec<f64> = (0..d)
                        .map(|i| match i.cmp(&(a + 1)) {
                            std::cmp::Ordering::Less => norm,
                            std::cmp::Ordering::Equal => -k * norm,
                            std::cmp::Ordering::Greater => 0.0,
                        })
                        .collect();
                    members.push(Operator::real_diagonal(&diag));
                }
            }
        }
        Ok(TraceOrthonormalBasis { hilbert_dim: d, members })
    }

    /// Any list of operators; orthonormality is verified to `1e-12`.
    pub fn from_members(members: Vec<Operator>) -> Result<Self> {
        let d = members.first().map(|m| m.dim()).ok_or_else(|| Error::InvalidParameter("empty basis".into()))?;
        if members.len() != d * d - 1 {
            return Err(Error::DimensionMismatch { expected: d * d - 1, found: members.len() });
        }
        let basis = TraceOrthonormalBasis { hilbert_dim: d, members };
        let defect = basis.orthonormality_defect();
        if defect > 1e-12 {
            return Err(Error::InvalidParameter(format!("basis is not trace-orthonormal (defect {defect:.3e})")));
        }
        Ok(basis)
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Operator] {
        &self.members
    }

    /// Columns `vec(F_n)`.
    pub fn as_columns(&self) -> CMat {
        let n = self.hilbert_dim * self.hilbert_dim;
        let cols: Vec<_> = self.members.iter().map(vectorize).collect();
        Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
    }

    /// `max(|Tr F_n|, |Tr[F_m F_n†] − δ_mn|)`.
    pub fn orthonormality_defect(&self) -> f64 {
        let f = self.as_columns();
        let gram = f.adjoint() * &f;
        let mut worst: f64 = 0.0;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        self.members.iter().fold(worst, |w, m| w.max(m.trace().norm()))
    }
}

/// Hermitian positive semidefinite coefficient matrix of a dissipator.
#[derive(Clone, Debug, PartialEq)]
pub struct KossakowskiMatrix(CMat);

impl KossakowskiMatrix {
    pub fn new(k: CMat) -> Result<Self> {
        if k.nrows() != k.ncols() {
            return Err(Error::NotSquare { rows: k.nrows(), cols: k.ncols() });
        }
        let scale = (0..k.nrows()).map(|i| k[(i, i)].re.abs()).sum::<f64>().max(1.0);
        let herm = Operator::from_mat(k.clone())?.hermiticity_defect();
        if herm > 1e-12 * scale {
            return Err(Error::NotHermitian(herm));
        }
        let min = linalg::hermitian_eigenvalues(k.as_ref())?.first().copied().unwrap_or(0.0);
        if min < -KOSSAKOWSKI_PSD_TOL * scale {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        Ok(KossakowskiMatrix(k))
    }

    /// `d · G G† / Tr[G G†]`.
    pub fn from_ginibre(g: &CMat) -> Result<Self> {
        let d = g.nrows();
        let ggd = g * g.adjoint();
        let tr: f64 = (0..d).map(|i| ggd[(i, i)].re).sum();
        if !(tr > 0.0) {
            return Err(Error::InvalidParameter("G G† has zero trace".into()));
        }
        let k = linalg::hermitian_part(linalg::scaled(ggd.as_ref(), C64::new(d as f64 / tr, 0.0)).as_ref());
        Self::new(k)
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::hermitian_eigenvalues(self.0.as_ref())?.first().copied().unwrap_or(0.0))
    }
}

/// Normalized Wishart Kossakowski matrix for Hilbert dimension `D`,
/// `d = D² − 1`.
pub fn wishart_kossakowski<R: Rng + ?Sized>(hilbert_dim: usize, rng: &mut R) -> Result<KossakowskiMatrix> {
    if hilbert_dim < 2 {
        return Err(Error::InvalidParameter(format!("need D ≥ 2, got {hilbert_dim}")));
    }
    let d = hilbert_dim * hilbert_dim - 1;
    let g = Mat::from_fn(d, d, |_, _| complex_gaussian(rng));
    KossakowskiMatrix::from_ginibre(&g)
}

/// `ρ ↦ Σ_mn K_mn (F_n ρ F_m† − ½{F_m†F_n, ρ})`.
pub fn dissipator_superoperator(k: &KossakowskiMatrix, basis: &TraceOrthonormalBasis) -> Result<Superoperator> {
    if k.dim() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: k.dim() });
    }
    let d = basis.hilbert_dim();
    let n = d * d;
    let f = basis.as_columns();
    // Basis columns are sparse: nonzero (row, value) pairs per column.
    let sparse: Vec<Vec<(usize, C64)>> = (0..f.ncols())
        .map(|c| (0..n).filter(|&r| f[(r, c)] != C64::default()).map(|r| (r, f[(r, c)])).collect())
        .collect();
    // C[(k,l),(i,j)] = Σ_mn K_mn F_n[k,l] conj(F_m[i,j]) = (F Kᵀ F†)[(k,l),(i,j)].
    let km = k.mat();
    let mut t = Mat::<C64>::zeros(f.ncols(), n);
    for (m, col) in sparse.iter().enumerate() {
        for &(q, v) in col {
            let v = v.conj();
            for r in 0..f.ncols() {
                t[(r, q)] += km[(m, r)] * v;
            }
        }
    }
    let mut c = Mat::<C64>::zeros(n, n);
    for (m, col) in sparse.iter().enumerate() {
        for &(p, v) in col {
            for q in 0..n {
                c[(p, q)] += v * t[(m, q)];
            }
        }
    }
    let mut out = Mat::<C64>::zeros(n, n);
    for j in 0..d {
        for i in 0..d {
            for l in 0..d {
                for kk in 0..d {
                    out[(kk + d * i, l + d * j)] = c[(kk + d * l, i + d * j)];
                }
            }
        }
    }
    // A = Σ_mn K_mn F_m† F_n, A[x, y] = Σ_z C[(z,y),(z,x)].
    let a = Operator::from_fn(d, |x, y| (0..d).map(|z| c[(z + d * y, z + d * x)]).sum());
    let half = a.scale_real(0.5);
    let id = Operator::identity(d);
    let sup = Superoperator::from_mat(out)?;
    Ok(&(&sup - &Superoperator::sandwich(&half, &id)) - &Superoperator::sandwich(&id, &half))
}

/// Jump operators `L_μ = √κ_μ Σ_ν conj(U_νμ) F_ν` from `K = U diag(κ) U†`.
pub fn jump_operators(k: &KossakowskiMatrix, basis: &TraceOrthonormalBasis) -> Result<Vec<Operator>> {
    let (kappa, u) = linalg::hermitian_eigen(k.mat().as_ref())?;
    let d = basis.hilbert_dim();
    Ok(kappa
        .iter()
        .enumerate()
        .map(|(mu, &km)| {
            let s = km.max(0.0).sqrt();
            basis
                .members()
                .iter()
                .enumerate()
                .fold(Operator::zeros(d), |acc, (nu, f)| &acc + &f.scale(u[(nu, mu)].conj() * s))
        })
        .collect())
}

/// One draw of the perturbation ensemble.
#[derive(Clone, Debug)]
pub struct RandomLiouvillian {
    pub hamiltonian: Operator,
    pub kossakowski: KossakowskiMatrix,
    pub zeta_coh: f64,
    pub zeta_diss: f64,
    pub generator: Superoperator,
}

impl RandomLiouvillian {
    /// `ℒ₁[ρ] = −i ζ_coh [H, ρ] + ζ_diss 𝒟_K[ρ]` with `ζ_coh = ζ_diss = 1`.
    pub fn sample<R: Rng + ?Sized>(hilbert_dim: usize, rng: &mut R) -> Result<Self> {
        Self::sample_with(hilbert_dim, 1.0, 1.0, &TraceOrthonormalBasis::new(hilbert_dim)?, rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(
        hilbert_dim: usize,
        zeta_coh: f64,
        zeta_diss: f64,
        basis: &TraceOrthonormalBasis,
        rng: &mut R,
    ) -> Result<Self> {
        if basis.hilbert_dim() != hilbert_dim {
            return Err(Error::DimensionMismatch { expected: hilbert_dim, found: basis.hilbert_dim() });
        }
        let hamiltonian = gue_hamiltonian(hilbert_dim, rng);
        let kossakowski = wishart_kossakowski(hilbert_dim, rng)?;
        let h = hamiltonian.scale(C64::new(0.0, -zeta_coh));
        let id = Operator::identity(hilbert_dim);
        let coherent = &Superoperator::sandwich(&h, &id) - &Superoperator::sandwich(&id, &h);
        let diss = dissipator_superoperator(&kossakowski, basis)?;
        let generator = coherent.add_scaled(&diss, zeta_diss)?;
        Ok(RandomLiouvillian { hamiltonian, kossakowski, zeta_coh, zeta_diss, generator })
    }

    pub fn manifest(&self, seed: u64) -> SampleManifest {
        SampleManifest {
            seed,
            hilbert_dim: self.generator.hilbert_dim(),
            zeta_coh: self.zeta_coh,
            zeta_diss: self.zeta_diss,
            checksum: superoperator_checksum(&self.generator),
        }
    }
}

/// A random perturbation generator of Hilbert dimension `D`.
pub fn random_perturbation<R: Rng + ?Sized>(hilbert_dim: usize, rng: &mut R) -> Result<Superoperator> {
    Ok(RandomLiouvillian::sample(hilbert_dim, rng)?.generator)
}

/// Smallest eigenvalue of the Choi matrix of `exp(εℒ)`,
/// `Choi[(i·D + k), (j·D + l)] = Φ(|i⟩⟨j|)[k, l]`.
pub fn choi_min_eigenvalue(l: &Superoperator, eps: f64) -> Result<f64> {
    let d = l.hilbert_dim();
    let scaled = linalg::scaled(l.mat(), C64::new(eps, 0.0));
    let phi = linalg::expm(scaled.as_ref())?;
    let choi = Mat::from_fn(d * d, d * d, |r, c| {
        let (i, k) = (r / d, r % d);
        let (j, ll) = (c / d, c % d);
        phi[(k + d * ll, i + d * j)]
    });
    Ok(linalg::hermitian_eigenvalues(choi.as_ref())?.first().copied().unwrap_or(0.0))
}

/// Per-draw record of a sampled perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub seed: u64,
    #[serde(rename = "D")]
    pub hilbert_dim: usize,
    pub zeta_coh: f64,
    pub zeta_diss: f64,
    /// SHA-256 of the superoperator's little-endian bytes.
    pub checksum: String,
}

pub fn superoperator_checksum(l: &Superoperator) -> String {
    let digest = Sha256::digest(l.to_le_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// SplitMix64 finalizer applied to `master ⊕ golden·(index + 1)`; gives
/// each ensemble member an independent stream seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dissipator_matches_matrix_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = 3;
        let basis = TraceOrthonormalBasis::new(d).unwrap();
        let k = wishart_kossakowski(d, &mut rng).unwrap();
        let sup = dissipator_superoperator(&k, &basis).unwrap();
        let rho = Operator::from_fn(d, |i, j| C64::new((i + 2 * j) as f64 * 0.1, i as f64 - j as f64));
        let mut expect = Operator::zeros(d);
        for (m, fm) in basis.members().iter().enumerate() {
            for (n, fnn) in basis.members().iter().enumerate() {
                let kmn = k.mat()[(m, n)];
                let fmd = fm.adjoint();
                let term = &(&(fnn * &rho) * &fmd) - &(&fmd * fnn).anticommutator(&rho).scale_real(0.5);
                expect = &expect + &term.scale(kmn);
            }
        }
        let got = sup.apply(&rho).unwrap();
        assert!((&got - &expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn two_dimensional_basis() {
        let b = TraceOrthonormalBasis::new(2).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.members()[1], Operator::unit(2, 0, 1));
        assert_eq!(b.members()[2], Operator::unit(2, 1, 0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((&b.members()[0] - &Operator::real_diagonal(&[s, -s])).frobenius_norm() < 1e-15);
    }

    #[test]
    fn basis_is_orthonormal_up_to_27() {
        for d in [2, 3, 4, 9, 27] {
            assert!(TraceOrthonormalBasis::new(d).unwrap().orthonormality_defect() < 1e-13, "D = {d}");
        }
    }

    #[test]
    fn identity_ginibre_gives_identity() {
        let g = Mat::<C64>::identity(3, 3);
        let k = KossakowskiMatrix::from_ginibre(&g).unwrap();
        assert!(linalg::frobenius((k.mat() - Mat::<C64>::identity(3, 3)).as_ref()) < 1e-15);
    }

    #[test]
    fn rejects_indefinite_kossakowski() {
        let mut k = Mat::<C64>::identity(3, 3);
        k[(2, 2)] = C64::new(-0.5, 0.0);
        assert!(matches!(KossakowskiMatrix::new(k), Err(Error::NotPositiveSemidefinite(_))));
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = random_perturbation(3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = random_perturbation(3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(superoperator_checksum(&a), superoperator_checksum(&b));
        let c = random_perturbation(3, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
        assert_ne!(superoperator_checksum(&a), superoperator_checksum(&c));
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(s.len(), 1000);
    }
}
