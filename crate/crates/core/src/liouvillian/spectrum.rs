use std::io::Write;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::{devectorize, vectorize, Operator, Superoperator};
use crate::C64;

use super::residual;

/// Largest Hilbert dimension accepted by [`full_spectrum`].
pub const MAX_SPECTRUM_HILBERT_DIM: usize = 32;

/// Tolerances for spectral classification. Unset tolerances default to
/// `1e-9 · ‖ℒ‖_F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub tol_real: Option<f64>,
    pub tol_imag: Option<f64>,
    /// A decay-free cluster of size `k` must have its `k`-th smallest
    /// singular value of `ℒ − λ` below `null_tol · ‖ℒ‖_F`.
    pub null_tol: f64,
    /// Smallest admissible singular value of the left/right overlap of a
    /// cluster; below this the cluster is reported as defective.
    pub biorthogonality_tol: f64,
    pub max_hilbert_dim: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            tol_real: None,
            tol_imag: None,
            null_tol: 1e-8,
            biorthogonality_tol: 1e-6,
            max_hilbert_dim: MAX_SPECTRUM_HILBERT_DIM,
        }
    }
}

impl SpectrumOptions {
    pub fn resolved(&self, norm: f64) -> (f64, f64) {
        (self.tol_real.unwrap_or(1e-9 * norm), self.tol_imag.unwrap_or(1e-9 * norm))
    }
}

/// Eigenvalues with right modes and biorthogonal left partners,
/// `⟨σ_j, ρ_k⟩ = δ_jk`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub right_modes: Vec<Operator>,
    pub left_modes: Vec<Operator>,
    pub residuals: Vec<f64>,
    /// `‖ℒ‖_F` of the decomposed generator.
    pub norm: f64,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest distance from `λ̄_k` to the nearest eigenvalue.
    pub fn conjugation_defect(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| self.eigenvalues.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues with `|λ| ≤ tol`.
    pub fn count_near_zero(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|z| z.norm() <= tol).count()
    }

    pub fn class_of(&self, k: usize, tol_real: f64, tol_imag: f64) -> ModeClass {
        ModeClass::of(self.eigenvalues[k], tol_real, tol_imag)
    }
}

/// Diagonalize `ℒ` densely.
pub fn full_spectrum(l: &Superoperator) -> Result<SpectralDecomposition> {
    full_spectrum_with(l, &SpectrumOptions::default())
}

pub fn full_spectrum_with(l: &Superoperator, opts: &SpectrumOptions) -> Result<SpectralDecomposition> {
    let d = l.hilbert_dim();
    if d > opts.max_hilbert_dim {
        return Err(Error::TooLarge { dim: d, max: opts.max_hilbert_dim });
    }
    let n = l.dim();
    let norm = l.frobenius_norm();
    let eig = l
        .mat()
        .eigen()
        .map_err(|_| Error::EigenNoConvergence { dim: n, norm, max_entry: l.mat().norm_max() })?;
    let v = eig.U().to_owned();
    let s = eig.S().column_vector();
    let eigenvalues: Vec<C64> = (0..n).map(|k| s[k]).collect();
    let vinv = linalg::inverse(v.as_ref());
    let mut right_modes = Vec::with_capacity(n);
    let mut left_modes = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for k in 0..n {
        let col: Vec<C64> = (0..n).map(|i| v[(i, k)]).collect();
        let row: Vec<C64> = (0..n).map(|i| vinv[(k, i)].conj()).collect();
        let rho = devectorize(&col)?;
        residuals.push(residual(l, &rho, eigenvalues[k])?);
        right_modes.push(rho);
        left_modes.push(devectorize(&row)?);
    }
    Ok(SpectralDecomposition { eigenvalues, right_modes, left_modes, residuals, norm })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeClass {
    Zero,
    Oscillating,
    Decaying,
}

impl ModeClass {
    pub fn of(lambda: C64, tol_real: f64, tol_imag: f64) -> Self {
        if lambda.re.abs() > tol_real {
            ModeClass::Decaying
        } else if lambda.im.abs() <= tol_imag {
            ModeClass::Zero
        } else {
            ModeClass::Oscillating
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::Zero => "zero",
            ModeClass::Oscillating => "oscillating",
            ModeClass::Decaying => "decaying",
        }
    }
}

/// Right basis of the zero-eigenvalue subspace with a biorthogonal left
/// basis, `left† · right = 𝟙`. Columns are vectorized operators.
#[derive(Clone, Debug)]
pub struct ZeroSpace {
    right: CMat,
    left: CMat,
}

impl ZeroSpace {
    /// Numerical null space of `ℒ`, counting singular values at or below
    /// `rel_tol · σ_max`.
    pub fn compute(l: &Superoperator, rel_tol: f64, opts: &SpectrumOptions) -> Result<Self> {
        let k = linalg::nullity(l.mat(), rel_tol)?;
        Self::cluster(l, C64::new(0.0, 0.0), k, opts)
    }

    /// Zero space spanned by a known right basis. The left partners are
    /// taken from the left null space of `ℒ`.
    pub fn from_right_basis(l: &Superoperator, basis: &[Operator], opts: &SpectrumOptions) -> Result<Self> {
        let n = l.dim();
        let k = basis.len();
        let norm = l.frobenius_norm();
        let mut right = Mat::<C64>::zeros(n, k);
        for (c, b) in basis.iter().enumerate() {
            b.check_dim(l.hilbert_dim())?;
            let r = residual(l, b, C64::new(0.0, 0.0))?;
            if r > opts.null_tol * norm {
                return Err(Error::InvalidParameter(format!("basis element {c} is not a zero mode (residual {r:.3e})")));
            }
            let v = vectorize(b);
            for i in 0..n {
                right[(i, c)] = v[i];
            }
        }
        let ns = linalg::smallest_singular_subspace(l.mat(), k)?;
        Self::biorthogonalize(right, ns.left, C64::new(0.0, 0.0), opts)
    }

    fn cluster(l: &Superoperator, center: C64, k: usize, opts: &SpectrumOptions) -> Result<Self> {
        let n = l.dim();
        let norm = l.frobenius_norm();
        let shifted = Mat::from_fn(n, n, |i, j| l.mat()[(i, j)] - if i == j { center } else { C64::new(0.0, 0.0) });
        let ns = linalg::smallest_singular_subspace(shifted.as_ref(), k)?;
        if ns.max_null_singular_value > opts.null_tol * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::DefectiveCluster {
                eigenvalue: format!("{center}"),
                detail: format!(
                    "{k} eigenvalues but singular value {:.3e} of the shifted generator exceeds {:.3e}",
                    ns.max_null_singular_value,
                    opts.null_tol * norm
                ),
            });
        }
        Self::biorthogonalize(ns.right, ns.left, center, opts)
    }

    fn biorthogonalize(right: CMat, left_raw: CMat, center: C64, opts: &SpectrumOptions) -> Result<Self> {
        let k = right.ncols();
        if k == 0 {
            return Ok(ZeroSpace { left: left_raw, right });
        }
        let g = left_raw.adjoint() * &right;
        let sv = linalg::singular_values(g.as_ref())?;
        let smin = sv.last().copied().unwrap_or(0.0);
        // Overlap is measured against orthonormal left columns; rescale by
        // the right basis norm so analytic bases of any scale are accepted.
        let scale = linalg::singular_values(right.as_ref())?.first().copied().unwrap_or(1.0);
        if smin < opts.biorthogonality_tol * scale {
            return Err(Error::DefectiveCluster {
                eigenvalue: format!("{center}"),
                detail: format!("left/right overlap is singular (σ_min = {smin:.3e})"),
            });
        }
        let ginv = linalg::inverse(g.as_ref());
        let left = &left_raw * ginv.adjoint();
        Ok(ZeroSpace { right, left })
    }

    pub fn dim(&self) -> usize {
        self.right.ncols()
    }

    pub fn right(&self) -> &CMat {
        &self.right
    }

    pub fn left(&self) -> &CMat {
        &self.left
    }

    pub fn right_modes(&self) -> Vec<Operator> {
        columns_as_operators(&self.right)
    }

    pub fn left_modes(&self) -> Vec<Operator> {
        columns_as_operators(&self.left)
    }

    /// `⟨σ_α, X⟩` for every left partner.
    pub fn coordinates(&self, x: &Operator) -> Vec<C64> {
        let v = vectorize(x);
        (0..self.dim())
            .map(|a| (0..v.nrows()).map(|i| self.left[(i, a)].conj() * v[i]).sum())
            .collect()
    }

    /// `Σ_α c_α ρ_α`.
    pub fn combine(&self, c: &[C64]) -> Operator {
        let n = self.right.nrows();
        let v: Vec<C64> = (0..n).map(|i| (0..self.dim()).map(|a| self.right[(i, a)] * c[a]).sum()).collect();
        devectorize(&v).expect("zero-space columns are vectorized operators")
    }

    /// Spectral projection onto the zero space, `P₀(X) = Σ_α ρ_α ⟨σ_α, X⟩`.
    pub fn project(&self, x: &Operator) -> Operator {
        self.combine(&self.coordinates(x))
    }

    /// Traces of the right basis elements.
    pub fn traces(&self) -> Vec<C64> {
        let d = (self.right.nrows() as f64).sqrt().round() as usize;
        (0..self.dim()).map(|a| (0..d).map(|i| self.right[(i + d * i, a)]).sum()).collect()
    }
}

fn columns_as_operators(m: &CMat) -> Vec<Operator> {
    (0..m.ncols())
        .map(|c| {
            let v: Vec<C64> = (0..m.nrows()).map(|i| m[(i, c)]).collect();
            devectorize(&v).expect("columns are vectorized operators")
        })
        .collect()
}

/// A decay-free mode with nonzero frequency.
#[derive(Clone, Debug)]
pub struct OscillatingMode {
    pub mode: Operator,
    pub eigenvalue: C64,
    pub residual: f64,
}

impl OscillatingMode {
    pub fn frequency(&self) -> f64 {
        self.eigenvalue.im
    }
}

/// Decay-free part of a spectrum.
#[derive(Clone, Debug)]
pub struct ModeClassification {
    /// Unit-trace positive semidefinite zero modes with mutually
    /// orthogonal supports.
    pub steady: Vec<Operator>,
    /// Traceless zero modes spanning the rest of the zero space.
    pub traceless_zero: Vec<Operator>,
    pub oscillating: Vec<OscillatingMode>,
    pub decaying: usize,
    pub tol_real: f64,
    pub tol_imag: f64,
    pub zero_space: ZeroSpace,
}

/// Split the decay-free spectrum into steady states, traceless zero modes
/// and oscillating coherences. Every decay-free cluster is re-resolved
/// from the generator itself; a non-diagonalizable cluster is an error.
pub fn classify_decay_free(
    l: &Superoperator,
    dec: &SpectralDecomposition,
    opts: &SpectrumOptions,
) -> Result<ModeClassification> {
    let (tol_real, tol_imag) = opts.resolved(dec.norm);
    let mut free: Vec<C64> = dec.eigenvalues.iter().copied().filter(|z| z.re.abs() <= tol_real).collect();
    let decaying = dec.len() - free.len();
    free.sort_by(|a, b| a.im.total_cmp(&b.im));

    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for z in free {
        match clusters.last_mut() {
            Some(c) if (z.im - c.last().unwrap().im).abs() <= tol_imag => c.push(z),
            _ => clusters.push(vec![z]),
        }
    }

    let mut zero_space = None;
    let mut oscillating = Vec::new();
    for c in &clusters {
        let mean_im = c.iter().map(|z| z.im).sum::<f64>() / c.len() as f64;
        let center = C64::new(0.0, mean_im);
        if mean_im.abs() <= tol_imag {
            zero_space = Some(ZeroSpace::cluster(l, C64::new(0.0, 0.0), c.len(), opts)?);
            continue;
        }
        let cluster = ZeroSpace::cluster(l, center, c.len(), opts)?;
        oscillating.extend(resolve_cluster(l, &cluster)?);
    }
    oscillating.sort_by(|a, b| a.eigenvalue.im.total_cmp(&b.eigenvalue.im));

    let zero_space = match zero_space {
        Some(z) => z,
        None => ZeroSpace::cluster(l, C64::new(0.0, 0.0), 0, opts)?,
    };
    let (steady, traceless_zero) = split_zero_space(&zero_space, l.hilbert_dim())?;
    Ok(ModeClassification { steady, traceless_zero, oscillating, decaying, tol_real, tol_imag, zero_space })
}

fn resolve_cluster(l: &Superoperator, cluster: &ZeroSpace) -> Result<Vec<OscillatingMode>> {
    let reduced = cluster.left.adjoint() * (l.mat() * &cluster.right);
    let k = reduced.nrows();
    let eig = reduced
        .eigen()
        .map_err(|_| Error::EigenNoConvergence { dim: k, norm: reduced.norm_l2(), max_entry: reduced.norm_max() })?;
    let w = &cluster.right * eig.U();
    let s = eig.S().column_vector();
    let mut out = Vec::with_capacity(k);
    for (j, mode) in columns_as_operators(&w).into_iter().enumerate() {
        let eigenvalue = s[j];
        let residual = residual(l, &mode, eigenvalue)?;
        out.push(OscillatingMode { mode, eigenvalue, residual });
    }
    Ok(out)
}

/// Fixed seed for the generic combination of conserved quantities; any
/// value works, fixing it keeps the split reproducible.
const SPLIT_SEED: u64 = 0x5eed_0f_2e_0;

/// Split a zero space into extremal steady states and traceless zero modes.
///
/// `P₀(𝟙/D)` has full support on the recurrent subspace. Conserved
/// quantities compressed to that support are block constants, so the
/// eigenspaces of a generic Hermitian conserved combination give the
/// minimal invariant blocks `Q`, and `P₀(Q / Tr Q)` is the steady state of
/// each block.
fn split_zero_space(zs: &ZeroSpace, d: usize) -> Result<(Vec<Operator>, Vec<Operator>)> {
    let k = zs.dim();
    if k == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let full = zs.project(&Operator::identity(d).scale_real(1.0 / d as f64)).hermitian_part();
    let (vals, vecs) = linalg::hermitian_eigen(full.mat())?;
    let top = vals.last().copied().unwrap_or(0.0);
    let support: Vec<usize> = (0..d).filter(|&i| vals[i] > 1e-8 * top).collect();
    let vr = Mat::from_fn(d, support.len(), |i, c| vecs[(i, support[c])]);

    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
    let mut j = Operator::zeros(d);
    for s in zs.left_modes() {
        let sd = s.adjoint();
        let re = (&s + &sd).scale_real(0.5);
        let im = (&s - &sd).scale(C64::new(0.0, -0.5));
        j = &j + &re.scale_real(rng.random_range(-1.0..1.0));
        j = &j + &im.scale_real(rng.random_range(-1.0..1.0));
    }
    let compressed = vr.adjoint() * (j.mat() * &vr);
    let (jv, ju) = linalg::hermitian_eigen(compressed.as_ref())?;
    let jscale = jv.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..jv.len() {
        match groups.last_mut() {
            Some(g) if jv[i] - jv[*g.last().unwrap()] <= 1e-6 * jscale => g.push(i),
            _ => groups.push(vec![i]),
        }
    }

    let n = d * d;
    let mut steady: Vec<Operator> = Vec::new();
    let mut accepted = Mat::<C64>::zeros(n, 0);
    for g in groups {
        let basis = &vr * Mat::from_fn(ju.nrows(), g.len(), |i, c| ju[(i, g[c])]);
        let q = Operator::from_mat(&basis * basis.adjoint())?;
        let tau = zs.project(&q.scale_real(1.0 / g.len() as f64)).hermitian_part();
        let tr = tau.trace().re;
        if tr.abs() < 1e-10 {
            continue;
        }
        let tau = tau.scale_real(1.0 / tr);
        let trial = append_column(&accepted, &vectorize(&tau));
        if linalg::orthonormalize_columns(trial.as_ref(), 1e-8).ncols() > accepted.ncols() {
            accepted = trial;
            steady.push(tau);
        }
    }

    // Complement of the steady span inside the zero space, made traceless
    // by subtracting multiples of the first steady state.
    let qs = linalg::orthonormalize_columns(accepted.as_ref(), 1e-8);
    let mut traceless = Vec::new();
    let mut span = qs.clone();
    for rho in zs.right_modes() {
        let v = vectorize(&rho);
        let trial = append_column(&span, &v);
        if linalg::orthonormalize_columns(trial.as_ref(), 1e-8).ncols() > span.ncols() {
            span = trial;
            let x = if let Some(t) = steady.first() { &rho - &t.scale(rho.trace()) } else { rho };
            let scale = x.frobenius_norm();
            traceless.push(x.scale_real(1.0 / scale));
        }
        if span.ncols() == k {
            break;
        }
    }
    Ok((steady, traceless))
}

fn append_column(m: &CMat, v: &faer::Col<C64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols() + 1, |i, j| if j < m.ncols() { m[(i, j)] } else { v[i] })
}

/// Spectrum CSV with columns `re_lambda, im_lambda, class, residual`.
pub fn write_spectrum_csv<W: Write>(
    dec: &SpectralDecomposition,
    tol_real: f64,
    tol_imag: f64,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re_lambda", "im_lambda", "class", "residual"])?;
    let mut order: Vec<usize> = (0..dec.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (dec.eigenvalues[a], dec.eigenvalues[b]);
        y.re.total_cmp(&x.re).then(x.im.total_cmp(&y.im))
    });
    for k in order {
        let z = dec.eigenvalues[k];
        w.write_record([
            format!("{:.17e}", z.re),
            format!("{:.17e}", z.im),
            dec.class_of(k, tol_real, tol_imag).as_str().to_string(),
            format!("{:.6e}", dec.residuals[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}
