//! Angular statistics of phase configurations: the three-angle spread
//! `χ`, the two-angle `χ₂`, weighted sampling of `χ` over threshold
//! regions of `S_d`, interval probabilities and histograms.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasespace::{ReducedPhaseDistribution, ThresholdRegion};

/// Interval bounds `I₁, I₂, I₃` on `[0, 1]`, closed.
pub const INTERVALS: [(f64, f64); 3] = [(0.0, 2.0 / 16.0), (3.0 / 16.0, 5.0 / 16.0), (14.0 / 16.0, 1.0)];
pub const DEFAULT_BINS: usize = 64;
pub const DEFAULT_RESAMPLES: usize = 1000;

/// `min_n |θ − ψ + 2πn|`, in `[0, π]`.
pub fn argdist(theta: f64, psi: f64) -> f64 {
    let d = (theta - psi).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// `l = min_j (3/4π) Σ_i argdist(φ_i, φ̄_j)` with `φ̄_j = (2πj + Σφ)/3`.
pub fn chi3_l(p1: f64, p2: f64, p3: f64) -> f64 {
    let sum = p1 + p2 + p3;
    (0..3)
        .map(|j| {
            let mean = (2.0 * PI * j as f64 + sum) / 3.0;
            3.0 / (4.0 * PI) * (argdist(p1, mean) + argdist(p2, mean) + argdist(p3, mean))
        })
        .fold(f64::INFINITY, f64::min)
        .clamp(0.0, 1.0)
}

/// `χ = l²`.
pub fn chi3(p1: f64, p2: f64, p3: f64) -> f64 {
    chi3_l(p1, p2, p3).powi(2)
}

/// `χ₂ = argdist(φ'₁, 0)/π`.
pub fn chi2(phi1p: f64) -> f64 {
    argdist(phi1p, 0.0) / PI
}

/// `χ` at the difference angles: `χ(φ'₁, φ'₂, 0)` for two axes and
/// `χ₂(φ'₁)` for one.
pub fn chi_of_differences(phis: &[f64]) -> Result<f64> {
    match phis {
        [a] => Ok(chi2(*a)),
        [a, b] => Ok(chi3(*a, *b, 0.0)),
        _ => Err(Error::Unsupported(format!("χ is defined for two or three sites, got {} differences", phis.len()))),
    }
}

/// How cells of a threshold region are weighted when sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingWeight {
    #[default]
    Distribution,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSampleSet {
    pub sample_id: u64,
    pub eta: f64,
    pub threshold: f64,
    pub values: Vec<f64>,
}

impl ChiSampleSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Draw `n` difference-angle tuples from `region`, cell by weighted
/// categorical choice then uniform jitter across the cell, and map each to
/// `χ`.
pub fn sample_chi<R: Rng + ?Sized>(
    sd: &ReducedPhaseDistribution,
    region: &ThresholdRegion,
    n: usize,
    weight: SamplingWeight,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if region.is_empty() {
        return Err(Error::InvalidParameter("empty threshold region".into()));
    }
    if region.dims != sd.dims() {
        return Err(Error::DimensionMismatch { expected: sd.dims(), found: region.dims });
    }
    let weights: Vec<f64> = match weight {
        SamplingWeight::Distribution if region.weights.iter().any(|w| *w > 0.0) => region.weights.clone(),
        _ => vec![1.0; region.len()],
    };
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let h = region.cell_width();
    (0..n)
        .map(|_| {
            let c = pick.sample(rng);
            let phis: Vec<f64> = region.cells[c].iter().map(|&i| i as f64 * h + (rng.random::<f64>() - 0.5) * h).collect();
            chi_of_differences(&phis)
        })
        .collect()
}

/// Empirical probabilities of the three intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalProbabilities {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub count: usize,
}

impl IntervalProbabilities {
    /// `P₂/(3P₁)`, undefined when `P₁ = 0`.
    pub fn ratio(&self) -> Option<f64> {
        (self.p1 > 0.0).then(|| self.p2 / (3.0 * self.p1))
    }
}

pub fn interval_probabilities(values: &[f64]) -> Result<IntervalProbabilities> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("no χ samples".into()));
    }
    let mut hits = [0usize; 3];
    for &v in values {
        for (h, (lo, hi)) in hits.iter_mut().zip(INTERVALS) {
            if v >= lo && v <= hi {
                *h += 1;
            }
        }
    }
    let n = values.len() as f64;
    Ok(IntervalProbabilities {
        p1: hits[0] as f64 / n,
        p2: hits[1] as f64 / n,
        p3: hits[2] as f64 / n,
        count: values.len(),
    })
}

/// Percentile interval of `P₂/(3P₁)` from resampling whole groups (one
/// group per record) with replacement. `None` when fewer than half the
/// resamples give a defined ratio.
pub fn bootstrap_ratio_ci<R: Rng + ?Sized>(
    groups: &[&[f64]],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Option<(f64, f64)> {
    if groups.is_empty() || resamples == 0 || !(0.0..1.0).contains(&level) {
        return None;
    }
    let counts: Vec<[usize; 4]> = groups
        .iter()
        .map(|g| {
            let mut c = [0, 0, 0, g.len()];
            for &v in g.iter() {
                if v <= INTERVALS[0].1 {
                    c[0] += 1;
                }
                if v >= INTERVALS[1].0 && v <= INTERVALS[1].1 {
                    c[1] += 1;
                }
            }
            c
        })
        .collect();
    let mut ratios = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let (mut a, mut b) = (0usize, 0usize);
        for _ in 0..groups.len() {
            let c = &counts[rng.random_range(0..groups.len())];
            a += c[0];
            b += c[1];
        }
        if a > 0 {
            ratios.push(b as f64 / (3.0 * a as f64));
        }
    }
    if ratios.len() * 2 < resamples {
        return None;
    }
    ratios.sort_by(f64::total_cmp);
    let q = |p: f64| ratios[((p * (ratios.len() - 1) as f64).round() as usize).min(ratios.len() - 1)];
    let tail = (1.0 - level) / 2.0;
    Some((q(tail), q(1.0 - tail)))
}

/// Equal-width histogram on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: usize,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        Ok(Histogram { bins, counts: vec![0; bins] })
    }

    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        let mut h = Self::new(bins)?;
        h.extend(values);
        Ok(h)
    }

    /// Values outside `[0, 1]` are clamped into the edge bins.
    pub fn extend(&mut self, values: &[f64]) {
        for &v in values {
            let b = ((v * self.bins as f64).floor().max(0.0) as usize).min(self.bins - 1);
            self.counts[b] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if other.bins != self.bins {
            return Err(Error::DimensionMismatch { expected: self.bins, found: other.bins });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = 1.0 / self.bins as f64;
        (bin as f64 * w, (bin + 1) as f64 * w)
    }

    /// Counts normalized to unit integral; zeros when empty.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total();
        if total == 0 {
            return vec![0.0; self.bins];
        }
        let scale = self.bins as f64 / total as f64;
        self.counts.iter().map(|&c| c as f64 * scale).collect()
    }
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `values` and the continuous CDF `cdf`.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub samples: usize,
    /// KS distance of `χ` to the uniform CDF.
    pub ks_chi: f64,
    /// KS distance of `l = √χ` to `F(l) = l²`.
    pub ks_l: f64,
    /// Empirical `P(l ≤ 1/2)`.
    pub cdf_l_half: f64,
}

/// `χ` of i.i.d. uniform angle triples.
pub fn uniformity_oracle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UniformityReport {
    let ls: Vec<f64> = (0..n)
        .map(|_| {
            let mut a = || rng.random::<f64>() * 2.0 * PI;
            chi3_l(a(), a(), a())
        })
        .collect();
    let chis: Vec<f64> = ls.iter().map(|l| l * l).collect();
    UniformityReport {
        samples: n,
        ks_chi: ks_distance(&chis, |x| x.clamp(0.0, 1.0)),
        ks_l: ks_distance(&ls, |x| x.clamp(0.0, 1.0).powi(2)),
        cdf_l_half: ls.iter().filter(|&&l| l <= 0.5).count() as f64 / n.max(1) as f64,
    }
}

/// Piecewise-linear `l(φ'₁, φ'₂, 0)` on the six open triangles that tile
/// the `l < 1` region of `[−2π, 2π]²`; `None` outside them.
pub fn triangle_l(p1: f64, p2: f64) -> Option<f64> {
    let tau = 2.0 * PI;
    let inside = |x: f64, y: f64| -> Option<f64> {
        let (s, a, b) = (x + y, 2.0 * y - x, 2.0 * x - y);
        if s > 0.0 && s < tau && x - 2.0 * y < 0.0 && b > 0.0 {
            return Some(s / tau);
        }
        if a > 0.0 && a < tau && b < 0.0 && s > 0.0 {
            return Some(a / tau);
        }
        let c = y - 2.0 * x;
        if c > 0.0 && c < tau && s < 0.0 && x - 2.0 * y < 0.0 {
            return Some(c / tau);
        }
        None
    };
    inside(p1, p2).or_else(|| inside(-p1, -p2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argdist_examples() {
        assert!(argdist(0.0, 2.0 * PI).abs() < 1e-15);
        assert!((argdist(0.0, PI) - PI).abs() < 1e-15);
        assert!((argdist(0.1, 2.0 * PI - 0.1) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn chi_examples() {
        assert!(chi3(0.0, 0.0, 0.0).abs() < 1e-15);
        assert!((chi3(0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0) - 1.0).abs() < 1e-14);
        assert!((chi3(0.0, PI / 3.0, -PI / 3.0) - 0.25).abs() < 1e-14);
        assert!((chi2(PI) - 1.0).abs() < 1e-15);
        assert!((chi2(1.5 * PI) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interval_probabilities_and_ratio() {
        let p = interval_probabilities(&[0.0; 5]).unwrap();
        assert_eq!((p.p1, p.p2, p.p3), (1.0, 0.0, 0.0));
        assert_eq!(p.ratio(), Some(0.0));
        let q = interval_probabilities(&[0.5, 0.25]).unwrap();
        assert_eq!(q.ratio(), None);
        assert!(interval_probabilities(&[]).is_err());
    }

    #[test]
    fn histogram_counts_every_value() {
        let h = Histogram::from_values(&[0.0, 0.5, 1.0, 0.999, 1.2, -0.1], 4).unwrap();
        assert_eq!(h.total(), 6);
        assert_eq!(h.counts, vec![2, 0, 1, 3]);
        let dens: f64 = h.densities().iter().sum::<f64>() / 4.0;
        assert!((dens - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangles_agree_with_chi() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut hits = 0;
        for _ in 0..20000 {
            let x = (rng.random::<f64>() * 4.0 - 2.0) * PI;
            let y = (rng.random::<f64>() * 4.0 - 2.0) * PI;
            if let Some(l) = triangle_l(x, y) {
                hits += 1;
                assert!((l - chi3_l(x, y, 0.0)).abs() < 1e-12, "{x} {y} {l}");
            }
        }
        let frac = hits as f64 / 20000.0;
        assert!((frac - 0.25).abs() < 0.01, "{frac}");
        let r = uniformity_oracle(100_000, &mut rng);
        assert!(r.ks_chi < 0.01 && r.ks_l < 0.01, "{r:?}");
    }
}
