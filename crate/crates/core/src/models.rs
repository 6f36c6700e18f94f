//! The concrete systems: a spin-1 chain with strong magnetization and
//! spin-flip symmetries, a pair of spin-1/2 with two dark states, and two
//! weakly coupled spin-1 oscillators.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::LindbladModel;
use crate::operators::{embed, spin_operators, Operator, Spin, SpinSpec};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Spin1ChainParams {
    pub n: usize,
    pub omega: f64,
    pub j: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl Default for Spin1ChainParams {
    fn default() -> Self {
        Spin1ChainParams { n: 3, omega: 1.0, j: 0.5, delta: 0.5, gamma: 2.0 }
    }
}

/// `H = ω Σ S_j^z + J Σ (S_j^+ S_{j+1}^- + h.c.) + Δ Σ S_j^z S_{j+1}^z` with
/// open boundaries and dephasing jumps `L_j = √γ (S_j^z)²`.
pub fn spin1_chain(p: &Spin1ChainParams) -> Result<LindbladModel> {
    if p.n < 2 {
        return Err(Error::InvalidParameter(format!("spin-1 chain needs at least 2 sites, got {}", p.n)));
    }
    if !(p.gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be nonnegative, got {}", p.gamma)));
    }
    let spec = SpinSpec::uniform(Spin::ONE, p.n)?;
    let ops = spin_operators(Spin::ONE);
    let d = spec.dim();
    let sz: Vec<Operator> = (0..p.n).map(|j| embed(&ops.sz, &spec, j)).collect::<Result<_>>()?;
    let sp: Vec<Operator> = (0..p.n).map(|j| embed(&ops.splus, &spec, j)).collect::<Result<_>>()?;
    let mut h = Operator::zeros(d);
    for j in 0..p.n {
        h = &h + &sz[j].scale_real(p.omega);
    }
    for j in 0..p.n - 1 {
        let hop = &sp[j] * &sp[j + 1].adjoint();
        h = &h + &(&hop + &hop.adjoint()).scale_real(p.j);
        h = &h + &(&sz[j] * &sz[j + 1]).scale_real(p.delta);
    }
    let root = p.gamma.sqrt();
    let jumps = sz.iter().map(|z| (z * z).scale_real(root)).collect();
    LindbladModel::new(spec, h, jumps)
}

/// Total magnetization `M = Σ S_j^z` on a spin-1 chain.
pub fn spin1_magnetization(n: usize) -> Result<Operator> {
    let spec = SpinSpec::uniform(Spin::ONE, n)?;
    let diag: Vec<f64> = (0..spec.dim()).map(|k| spec.twice_magnetizations(k).iter().sum::<i32>() as f64 / 2.0).collect();
    Ok(Operator::real_diagonal(&diag))
}

/// Global spin flip `P = ⊗_j (|1⟩⟨−1| + |0⟩⟨0| + |−1⟩⟨1|)`.
pub fn spin1_parity(n: usize) -> Result<Operator> {
    let spec = SpinSpec::uniform(Spin::ONE, n)?;
    let flip: Vec<usize> = (0..spec.dim())
        .map(|k| spec.compose(&spec.decompose(k).iter().map(|&i| 2 - i).collect::<Vec<_>>()))
        .collect();
    Ok(Operator::from_fn(spec.dim(), |i, j| C64::new((flip[j] == i) as u8 as f64, 0.0)))
}

/// Quantum number of a symmetry sector of the spin-1 chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sector {
    Magnetization(i32),
    ZeroPlus,
    ZeroMinus,
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::Magnetization(m) => write!(f, "{m}"),
            Sector::ZeroPlus => write!(f, "0+"),
            Sector::ZeroMinus => write!(f, "0-"),
        }
    }
}

/// Projectors onto the joint eigenspaces of `M` and, at `M = 0`, of `P`.
#[derive(Clone, Debug)]
pub struct SectorTable {
    pub n: usize,
    pub sectors: Vec<Sector>,
    pub projectors: Vec<Operator>,
    pub dims: Vec<usize>,
}

impl SectorTable {
    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn index_of(&self, s: Sector) -> Option<usize> {
        self.sectors.iter().position(|&x| x == s)
    }

    pub fn projector(&self, s: Sector) -> Option<&Operator> {
        self.index_of(s).map(|i| &self.projectors[i])
    }

    pub fn dim_of(&self, s: Sector) -> Option<usize> {
        self.index_of(s).map(|i| self.dims[i])
    }

    /// Maximally mixed state `𝟙_α = Π_α / D_α`.
    pub fn mixed_state(&self, s: Sector) -> Option<Operator> {
        self.index_of(s).map(|i| self.projectors[i].scale_real(1.0 / self.dims[i] as f64))
    }

    pub fn mixed_states(&self) -> Vec<Operator> {
        self.projectors.iter().zip(&self.dims).map(|(p, &d)| p.scale_real(1.0 / d as f64)).collect()
    }

    /// `Σ_α c_α 𝟙_α` with weights in table order.
    pub fn mixture(&self, weights: &[f64]) -> Result<Operator> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: weights.len() });
        }
        let d = self.projectors[0].dim();
        Ok(self.mixed_states().iter().zip(weights).fold(Operator::zeros(d), |acc, (m, &c)| &acc + &m.scale_real(c)))
    }
}

/// Sectors ordered `−N, …, −1, 0+, 0−, 1, …, N`.
pub fn spin1_sectors(n: usize) -> Result<SectorTable> {
    let spec = SpinSpec::uniform(Spin::ONE, n)?;
    let d = spec.dim();
    let mag: Vec<i32> = (0..d).map(|k| spec.twice_magnetizations(k).iter().sum::<i32>() / 2).collect();
    let parity = spin1_parity(n)?;
    let mut sectors = Vec::new();
    let mut projectors = Vec::new();
    let ni = n as i32;
    let diag_projector = |m: i32| Operator::real_diagonal(&mag.iter().map(|&x| (x == m) as u8 as f64).collect::<Vec<_>>());
    for m in -ni..=-1 {
        sectors.push(Sector::Magnetization(m));
        projectors.push(diag_projector(m));
    }
    let p0 = diag_projector(0);
    let p0p = &p0 * &parity;
    sectors.push(Sector::ZeroPlus);
    projectors.push((&p0 + &p0p).scale_real(0.5));
    sectors.push(Sector::ZeroMinus);
    projectors.push((&p0 - &p0p).scale_real(0.5));
    for m in 1..=ni {
        sectors.push(Sector::Magnetization(m));
        projectors.push(diag_projector(m));
    }
    let dims = projectors.iter().map(|p| p.trace().re.round() as usize).collect();
    Ok(SectorTable { n, sectors, projectors, dims })
}

/// `ρ^osc_M = P 𝟙_M`, mapping the `M` sector onto `−M`.
pub fn spin1_oscillating_coherence(n: usize, m: i32) -> Result<Operator> {
    if m == 0 || m.unsigned_abs() as usize > n {
        return Err(Error::InvalidParameter(format!("oscillating coherence needs 1 ≤ |M| ≤ {n}, got {m}")));
    }
    let table = spin1_sectors(n)?;
    let mixed = table.mixed_state(Sector::Magnetization(m)).expect("sector exists for |M| ≤ N");
    Ok(&spin1_parity(n)? * &mixed)
}

/// One off-diagonal position `|ket⟩⟨bra|` in the product basis, with the
/// local magnetizations of each side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OffDiagonalPosition {
    pub ket: Vec<i32>,
    pub bra: Vec<i32>,
    pub row: usize,
    pub col: usize,
}

/// The positions at which `Σ_α c_α 𝟙_α` has off-diagonal entries for the
/// three-site chain: three forward entries followed by their transposes.
/// All six carry the common real value [`spin1_offdiagonal_value`].
pub fn spin1_offdiagonal_structure(n: usize) -> Result<Vec<OffDiagonalPosition>> {
    if n != 3 {
        return Err(Error::Unsupported(format!("off-diagonal catalogue is tabulated for N = 3 only, got {n}")));
    }
    let spec = SpinSpec::uniform(Spin::ONE, 3)?;
    let index = |m: &[i32]| spec.compose(&m.iter().map(|&x| (1 - x) as usize).collect::<Vec<_>>());
    let forward: [([i32; 3], [i32; 3]); 3] = [([1, -1, 0], [-1, 1, 0]), ([0, 1, -1], [0, -1, 1]), ([-1, 0, 1], [1, 0, -1])];
    let mut out: Vec<OffDiagonalPosition> = forward
        .iter()
        .map(|(k, b)| OffDiagonalPosition { ket: k.to_vec(), bra: b.to_vec(), row: index(k), col: index(b) })
        .collect();
    let back: Vec<_> = out
        .iter()
        .map(|p| OffDiagonalPosition { ket: p.bra.clone(), bra: p.ket.clone(), row: p.col, col: p.row })
        .collect();
    out.extend(back);
    Ok(out)
}

/// Value of every off-diagonal entry of `Σ_α c_α 𝟙_α`:
/// `c₀₊ / (2 D₀₊) − c₀₋ / (2 D₀₋)`.
pub fn spin1_offdiagonal_value(table: &SectorTable, c0_plus: f64, c0_minus: f64) -> f64 {
    let dp = table.dim_of(Sector::ZeroPlus).unwrap_or(1) as f64;
    let dm = table.dim_of(Sector::ZeroMinus).unwrap_or(1) as f64;
    c0_plus / (2.0 * dp) - c0_minus / (2.0 * dm)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinHalfPairParams {
    pub j: f64,
    pub delta: f64,
    pub b: f64,
    pub gamma: f64,
}

impl Default for SpinHalfPairParams {
    fn default() -> Self {
        SpinHalfPairParams { j: 1.0, delta: 1.0, b: 0.3, gamma: 0.5 }
    }
}

/// Two spin-1/2 with collective decay and their dark-state structure.
#[derive(Clone, Debug)]
pub struct SpinHalfPair {
    pub model: LindbladModel,
    /// `|↓↓⟩`.
    pub v_plus: Vec<C64>,
    /// `(|↑↓⟩ − |↓↑⟩)/√2`.
    pub v_minus: Vec<C64>,
    /// `|v₊⟩⟨v₋|`.
    pub rho_osc: Operator,
    /// Exchange symmetry `|↑↑⟩⟷|↓↓⟩`, `|↑↓⟩⟷|↓↑⟩`.
    pub parity: Operator,
}

impl SpinHalfPair {
    /// `⟨v₊|H|v₊⟩`, `⟨v₋|H|v₋⟩`.
    pub fn dark_energies(&self) -> (f64, f64) {
        let h = self.model.hamiltonian();
        (h.expectation(&self.v_plus, &self.v_plus).re, h.expectation(&self.v_minus, &self.v_minus).re)
    }

    /// Eigenvalue of `ρ^osc`, `−i(E₊ − E₋)`.
    pub fn oscillation_eigenvalue(&self) -> C64 {
        let (ep, em) = self.dark_energies();
        C64::new(0.0, -(ep - em))
    }
}

/// `H = J(σ₁⁺σ₂⁻ + h.c.) + Δσ₁ᶻσ₂ᶻ + B(σ₁ᶻ + σ₂ᶻ)` with `σ^± = (σˣ ± iσʸ)/2`
/// and the single jump `L₋ = γ(σ₁⁻ + σ₂⁻)`.
pub fn spin_half_pair(p: &SpinHalfPairParams) -> Result<SpinHalfPair> {
    if !(p.gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be nonnegative, got {}", p.gamma)));
    }
    let spec = SpinSpec::uniform(Spin::HALF, 2)?;
    let ops = spin_operators(Spin::HALF);
    let sigma_z = ops.sz.scale_real(2.0);
    let (p1, p2) = (embed(&ops.splus, &spec, 0)?, embed(&ops.splus, &spec, 1)?);
    let (z1, z2) = (embed(&sigma_z, &spec, 0)?, embed(&sigma_z, &spec, 1)?);
    let hop = &p1 * &p2.adjoint();
    let h = &(&(&hop + &hop.adjoint()).scale_real(p.j) + &(&z1 * &z2).scale_real(p.delta)) + &(&z1 + &z2).scale_real(p.b);
    let lminus = (&p1.adjoint() + &p2.adjoint()).scale_real(p.gamma);
    let model = LindbladModel::new(spec, h, vec![lminus])?;

    let zero = C64::new(0.0, 0.0);
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let v_plus = vec![zero, zero, zero, C64::new(1.0, 0.0)];
    let v_minus = vec![zero, s, -s, zero];
    let rho_osc = Operator::outer(&v_plus, &v_minus);
    let flip = [3usize, 2, 1, 0];
    let parity = Operator::from_fn(4, |i, j| C64::new((flip[j] == i) as u8 as f64, 0.0));
    Ok(SpinHalfPair { model, v_plus, v_minus, rho_osc, parity })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoupledSpin1Params {
    pub omega: f64,
    pub gamma1_g: f64,
    pub gamma2_d: f64,
    pub epsilon: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub gamma1_d: f64,
    pub gamma2_g: f64,
}

impl Default for CoupledSpin1Params {
    fn default() -> Self {
        CoupledSpin1Params {
            omega: 1.0,
            gamma1_g: 1.0,
            gamma2_d: 1.0,
            epsilon: 1e-3,
            delta1: 1e-3,
            delta2: -1e-3,
            gamma1_d: 1e-3,
            gamma2_g: 1e-3,
        }
    }
}

impl CoupledSpin1Params {
    fn rates(&self) -> [f64; 4] {
        [self.gamma1_g, self.gamma2_d, self.gamma1_d, self.gamma2_g]
    }

    /// Largest perturbation coupling divided by the smallest base coupling.
    pub fn weakness(&self) -> f64 {
        let pert = [self.epsilon, self.delta1, self.delta2, self.gamma1_d, self.gamma2_g]
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max);
        let base = [self.omega.abs(), self.gamma1_g, self.gamma2_d].iter().copied().fold(f64::INFINITY, f64::min);
        pert / base
    }

    /// Perturbation couplings all below `ratio` times the base couplings.
    pub fn is_weak(&self, ratio: f64) -> bool {
        self.weakness() < ratio
    }
}

/// Base oscillators and the coupling perturbation, each a Lindblad model
/// on the same two spin-1 sites. The generator of the full system is the
/// sum of the two superoperators.
#[derive(Clone, Debug)]
pub struct CoupledSpin1Pair {
    pub base: LindbladModel,
    pub perturbation: LindbladModel,
}

/// Base: `H = ω(S₁ᶻ + S₂ᶻ)`, `L₁ᵍ = √(γ₁ᵍ/2) S₁⁺S₁ᶻ`, `L₂ᵈ = √(γ₂ᵈ/2) S₂⁻S₂ᶻ`.
/// Perturbation: `H₁ = iε/2 (S₁⁺S₂⁻ − S₁⁻S₂⁺) + Σ Δ_j S_jᶻ`,
/// `L₁ᵈ = √(γ₁ᵈ/2) S₁⁻S₁ᶻ`, `L₂ᵍ = √(γ₂ᵍ/2) S₂⁺S₂ᶻ`.
pub fn coupled_spin1_pair(p: &CoupledSpin1Params) -> Result<CoupledSpin1Pair> {
    if p.rates().iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::InvalidParameter("rates must be nonnegative".into()));
    }
    let spec = SpinSpec::uniform(Spin::ONE, 2)?;
    let ops = spin_operators(Spin::ONE);
    let e = |op: &Operator, j: usize| embed(op, &spec, j);
    let (z1, z2) = (e(&ops.sz, 0)?, e(&ops.sz, 1)?);
    let (p1, p2) = (e(&ops.splus, 0)?, e(&ops.splus, 1)?);
    let (m1, m2) = (e(&ops.sminus, 0)?, e(&ops.sminus, 1)?);
    let jump = |rate: f64, a: &Operator, z: &Operator| (a * z).scale_real((rate / 2.0).sqrt());

    let h0 = (&z1 + &z2).scale_real(p.omega);
    let base = LindbladModel::new(spec.clone(), h0, vec![jump(p.gamma1_g, &p1, &z1), jump(p.gamma2_d, &m2, &z2)])?;

    let exchange = (&(&p1 * &m2) - &(&m1 * &p2)).scale(C64::new(0.0, p.epsilon / 2.0));
    let h1 = &(&exchange + &z1.scale_real(p.delta1)) + &z2.scale_real(p.delta2);
    let perturbation = LindbladModel::new(spec, h1, vec![jump(p.gamma1_d, &m1, &z1), jump(p.gamma2_g, &p2, &z2)])?;
    Ok(CoupledSpin1Pair { base, perturbation })
}

/// `|0,0⟩⟨1,−1|`, the off-diagonal zero mode of the uncoupled pair.
pub fn coupled_spin1_zero_mode() -> Operator {
    // Local index 0 ↔ m = 1, 1 ↔ m = 0, 2 ↔ m = −1.
    let ket = 3 + 1;
    let bra = 2;
    Operator::unit(9, ket, bra)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_dimensions_for_three_sites() {
        let t = spin1_sectors(3).unwrap();
        let got: Vec<(String, usize)> = t.sectors.iter().zip(&t.dims).map(|(s, &d)| (s.to_string(), d)).collect();
        let want = [("-3", 1), ("-2", 3), ("-1", 6), ("0+", 4), ("0-", 3), ("1", 6), ("2", 3), ("3", 1)];
        assert_eq!(got, want.iter().map(|(s, d)| (s.to_string(), *d)).collect::<Vec<_>>());
    }

    #[test]
    fn chain_rejects_single_site() {
        assert!(spin1_chain(&Spin1ChainParams { n: 1, ..Default::default() }).is_err());
    }

    #[test]
    fn offdiagonal_positions_match_kets() {
        let pos = spin1_offdiagonal_structure(3).unwrap();
        let spec = SpinSpec::uniform(Spin::ONE, 3).unwrap();
        for p in &pos {
            let twice: Vec<i32> = p.ket.iter().map(|m| 2 * m).collect();
            assert_eq!(spec.twice_magnetizations(p.row), twice);
        }
        assert!(spin1_offdiagonal_structure(4).is_err());
    }

    #[test]
    fn zero_mode_indices() {
        let spec = SpinSpec::uniform(Spin::ONE, 2).unwrap();
        let z = coupled_spin1_zero_mode();
        let (r, c) = (0..9).flat_map(|i| (0..9).map(move |j| (i, j))).find(|&(i, j)| z.get(i, j).re == 1.0).unwrap();
        assert_eq!(spec.twice_magnetizations(r), vec![0, 0]);
        assert_eq!(spec.twice_magnetizations(c), vec![2, -2]);
    }
}
