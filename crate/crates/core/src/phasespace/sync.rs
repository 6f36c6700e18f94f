use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::poly::ReducedPhaseDistribution;
use super::wrap_angle;

/// Grid points per axis used for maximization and export.
pub const DEFAULT_GRID: usize = 256;

/// Candidates within this absolute distance of the maximum join the
/// argmax set.
const ARGMAX_TOL: f64 = 1e-9;
/// Relative spread below which `S_d` counts as constant.
const FLAT_TOL: f64 = 1e-13;
const NEWTON_ITERS: usize = 40;

/// `S_max = max S_d − (1/2π)^{N−1}` and the maximizing difference angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncMeasure {
    pub s_max: f64,
    pub max_value: f64,
    /// Maximizers in `[0, 2π)^{N−1}`, best first. Empty when `S_d` is flat.
    pub argmax: Vec<Vec<f64>>,
    pub grid: usize,
}

impl SyncMeasure {
    pub fn is_flat(&self) -> bool {
        self.argmax.is_empty()
    }
}

fn neighbors(idx: &[usize], grid: usize) -> Vec<Vec<usize>> {
    let n = idx.len();
    let mut out = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let mut nb = Vec::with_capacity(n);
        let mut moved = false;
        for &i in idx {
            let step = c % 3;
            c /= 3;
            moved |= step != 1;
            nb.push((i + grid + step - 1) % grid);
        }
        if moved {
            out.push(nb);
        }
    }
    out
}

fn flat_index(idx: &[usize], grid: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * grid + i)
}

fn unflatten(mut f: usize, dims: usize, grid: usize) -> Vec<usize> {
    let mut idx = vec![0; dims];
    for slot in idx.iter_mut().rev() {
        *slot = f % grid;
        f /= grid;
    }
    idx
}

/// Solve the small dense system `h x = b` by Gaussian elimination with
/// partial pivoting.
fn solve_small(mut h: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &c| h[a * n + col].abs().total_cmp(&h[c * n + col].abs()))?;
        if h[piv * n + col].abs() < 1e-300 {
            return None;
        }
        for k in 0..n {
            h.swap(col * n + k, piv * n + k);
        }
        b.swap(col, piv);
        for r in col + 1..n {
            let f = h[r * n + col] / h[col * n + col];
            for k in col..n {
                h[r * n + k] -= f * h[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| h[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / h[r * n + r];
    }
    Some(x)
}

/// Damped Newton ascent from a grid maximum; never decreases the value
/// and never leaves the starting cell's neighborhood by more than `radius`.
fn refine(sd: &ReducedPhaseDistribution, start: Vec<f64>, radius: f64) -> (Vec<f64>, f64) {
    let mut x = start.clone();
    let (mut v, _, _) = sd.derivatives(&x);
    for _ in 0..NEWTON_ITERS {
        let (_, g, h) = sd.derivatives(&x);
        let neg_g: Vec<f64> = g.iter().map(|gi| -gi).collect();
        let Some(step) = solve_small(h, neg_g) else { break };
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + t * si).collect();
            let dist = cand.iter().zip(&start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if dist <= radius {
                let cv = sd.value(&cand);
                if cv >= v {
                    let moved = step.iter().map(|s| (t * s).abs()).fold(0.0, f64::max);
                    x = cand;
                    v = cv;
                    improved = moved > 1e-15;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x.into_iter().map(wrap_angle).collect(), v)
}

fn periodic_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d)
        })
        .fold(0.0, f64::max)
}

/// Dense-grid search followed by Newton refinement of every grid-local
/// maximum.
pub fn sync_measure(sd: &ReducedPhaseDistribution, grid: usize) -> Result<SyncMeasure> {
    if grid < 4 {
        return Err(Error::InvalidParameter(format!("grid must have at least 4 points per axis, got {grid}")));
    }
    let uniform = sd.uniform_level();
    let dims = sd.dims();
    let vals = sd.grid_values(grid);
    let (gmin, gmax) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if sd.is_constant() || gmax - gmin <= FLAT_TOL * gmax.abs().max(uniform) {
        let max_value = sd.zero_frequency().re.max(gmax);
        return Ok(SyncMeasure { s_max: max_value - uniform, max_value, argmax: Vec::new(), grid });
    }
    let h = 2.0 * PI / grid as f64;
    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    for (f, &v) in vals.iter().enumerate() {
        let idx = unflatten(f, dims, grid);
        if neighbors(&idx, grid).iter().all(|nb| vals[flat_index(nb, grid)] <= v) {
            let start: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            candidates.push(refine(sd, start, 2.0 * h));
        }
    }
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1));
    let max_value = candidates.first().map(|c| c.1).unwrap_or(gmax).max(gmax);
    let mut argmax: Vec<Vec<f64>> = Vec::new();
    for (x, v) in candidates {
        if max_value - v > ARGMAX_TOL {
            break;
        }
        if argmax.iter().all(|a| periodic_distance(a, &x) > 1e-6) {
            argmax.push(x);
        }
    }
    Ok(SyncMeasure { s_max: max_value - uniform, max_value, argmax, grid })
}

/// How the threshold `r` selects grid cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// `S_d ≥ r · max S_d`.
    MaxValue,
    /// `S_d − u ≥ r · (max S_d − u)` with `u = (1/2π)^{N−1}`.
    #[default]
    Calibrated,
}

/// Grid cells above threshold with their `S_d` weights. Cell `i` on an
/// axis is centered at `2π i / grid` and has width `2π / grid`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdRegion {
    pub grid: usize,
    pub dims: usize,
    pub cells: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl ThresholdRegion {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * PI / self.grid as f64
    }

    pub fn center(&self, cell: usize) -> Vec<f64> {
        self.cells[cell].iter().map(|&i| i as f64 * self.cell_width()).collect()
    }

    /// Fraction of the torus covered.
    pub fn coverage(&self) -> f64 {
        self.len() as f64 / (self.grid as f64).powi(self.dims as i32)
    }
}

pub fn threshold_region(sd: &ReducedPhaseDistribution, grid: usize, r: f64, mode: ThresholdMode) -> Result<ThresholdRegion> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, 1], got {r}")));
    }
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must be positive".into()));
    }
    let vals = sd.grid_values(grid);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = match mode {
        ThresholdMode::MaxValue => r * max,
        ThresholdMode::Calibrated => {
            let u = sd.uniform_level();
            u + r * (max - u)
        }
    };
    let (mut cells, mut weights) = (Vec::new(), Vec::new());
    for (f, &v) in vals.iter().enumerate() {
        if v >= cut || v == max {
            cells.push(unflatten(f, sd.dims(), grid));
            weights.push(v.max(0.0));
        }
    }
    Ok(ThresholdRegion { grid, dims: sd.dims(), cells, weights })
}

/// Export `S_d` on the grid: two `#` header lines, a column header, then
/// one row per grid point with the first axis slowest.
pub fn write_reduced_csv<W: Write>(sd: &ReducedPhaseDistribution, grid: usize, mut out: W) -> Result<()> {
    writeln!(out, "# grid={grid} dims={}", sd.dims())?;
    writeln!(out, "# normalization=husimi_unit_integral uniform={:.17e}", sd.uniform_level())?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=sd.dims()).map(|i| format!("phi{i}p")).collect();
    header.push("value".into());
    w.write_record(&header)?;
    let h = 2.0 * PI / grid as f64;
    for (f, v) in sd.grid_values(grid).iter().enumerate() {
        let mut row: Vec<String> =
            unflatten(f, sd.dims(), grid).iter().map(|&i| format!("{:.17e}", i as f64 * h)).collect();
        row.push(format!("{v:.17e}"));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn cosine(amplitude: f64) -> ReducedPhaseDistribution {
        let u = 1.0 / (2.0 * PI);
        ReducedPhaseDistribution::from_terms(
            1,
            vec![(vec![-1], C64::new(amplitude / 2.0, 0.0)), (vec![0], C64::new(u, 0.0)), (vec![1], C64::new(amplitude / 2.0, 0.0))],
        )
        .unwrap()
    }

    #[test]
    fn cosine_maximum() {
        let m = sync_measure(&cosine(-0.01), 256).unwrap();
        assert_eq!(m.argmax.len(), 1);
        assert!((m.argmax[0][0] - PI).abs() < 1e-9);
        assert!((m.s_max - 0.01).abs() < 1e-14);
    }

    #[test]
    fn refinement_off_grid() {
        // peak at 0.1 which is not a grid point of the 7-point grid
        let a = C64::from_polar(0.005, -0.1);
        let sd = ReducedPhaseDistribution::from_terms(
            1,
            vec![(vec![-1], a.conj()), (vec![0], C64::new(1.0 / (2.0 * PI), 0.0)), (vec![1], a)],
        )
        .unwrap();
        let m = sync_measure(&sd, 7).unwrap();
        assert!((m.argmax[0][0] - 0.1).abs() < 1e-10);
    }

    #[test]
    fn threshold_modes() {
        let sd = cosine(0.02);
        let full = threshold_region(&sd, 64, 0.5, ThresholdMode::MaxValue).unwrap();
        assert_eq!(full.len(), 64);
        let narrow = threshold_region(&sd, 64, 0.95, ThresholdMode::Calibrated).unwrap();
        assert!(narrow.len() < 10 && narrow.cells.contains(&vec![0]));
        let top = threshold_region(&sd, 64, 1.0, ThresholdMode::MaxValue).unwrap();
        assert_eq!(top.cells, vec![vec![0]]);
        assert!(threshold_region(&sd, 64, 0.0, ThresholdMode::MaxValue).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_reduced_csv(&cosine(0.01), 4, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# grid=4"));
        assert_eq!(lines[2], "phi1p,value");
        assert_eq!(lines.len(), 7);
    }
}
