//! Dense complex linear-algebra helpers on top of `faer`.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::C64;

pub type CMat = Mat<C64>;

/// Kronecker product with `(A ⊗ B)[i·p + k, j·q + l] = A[i, j] · B[k, l]`.
pub fn kron(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    let (p, q) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * p, a.ncols() * q, |r, c| a[(r / p, c / q)] * b[(r % p, c % q)])
}

/// `c · a`.
pub fn scaled(a: MatRef<'_, C64>, c: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * c)
}

pub fn frobenius(a: MatRef<'_, C64>) -> f64 {
    a.norm_l2()
}

/// Induced 1-norm (max absolute column sum).
pub fn norm_one(a: MatRef<'_, C64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn singular_values(a: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let mut s = a.singular_values().map_err(|_| Error::SvdNoConvergence(a.nrows()))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Singular triplets sorted by decreasing singular value.
pub struct SortedSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(a: MatRef<'_, C64>) -> Result<SortedSvd> {
    let svd = a.svd().map_err(|_| Error::SvdNoConvergence(a.nrows()))?;
    let sv = svd.S().column_vector();
    let mut order: Vec<usize> = (0..sv.nrows()).collect();
    order.sort_by(|&i, &j| sv[j].re.total_cmp(&sv[i].re));
    let u = Mat::from_fn(svd.U().nrows(), order.len(), |r, c| svd.U()[(r, order[c])]);
    let v = Mat::from_fn(svd.V().nrows(), order.len(), |r, c| svd.V()[(r, order[c])]);
    let s = order.iter().map(|&i| sv[i].re).collect();
    Ok(SortedSvd { u, s, v })
}

/// Relative singular-value threshold used to decide numerical rank:
/// `n · ε_machine`, the conventional matrix-rank cutoff.
pub fn default_rank_tol(n: usize) -> f64 {
    n.max(1) as f64 * f64::EPSILON
}

/// Number of singular values at or below `rel_tol · σ_max`.
pub fn nullity(a: MatRef<'_, C64>, rel_tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    Ok(count_small(&s, rel_tol))
}

pub(crate) fn count_small(s: &[f64], rel_tol: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x <= rel_tol * smax).count()
}

/// Right and left null spaces (orthonormal columns) of a square matrix,
/// taking the `k` smallest singular directions.
pub struct NullSpace {
    pub right: CMat,
    pub left: CMat,
    /// Largest singular value among the discarded (null) directions.
    pub max_null_singular_value: f64,
    /// Smallest singular value among the kept (range) directions.
    pub min_range_singular_value: f64,
    pub sigma_max: f64,
}

pub fn smallest_singular_subspace(a: MatRef<'_, C64>, k: usize) -> Result<NullSpace> {
    let n = a.ncols();
    let SortedSvd { u, s, v } = svd(a)?;
    let right = Mat::from_fn(n, k, |r, c| v[(r, n - k + c)]);
    let left = Mat::from_fn(a.nrows(), k, |r, c| u[(r, n - k + c)]);
    Ok(NullSpace {
        right,
        left,
        max_null_singular_value: if k == 0 { 0.0 } else { s[n - k] },
        min_range_singular_value: if k == n { 0.0 } else { s[n - k - 1] },
        sigma_max: s.first().copied().unwrap_or(0.0),
    })
}

pub fn null_space(a: MatRef<'_, C64>, rel_tol: f64) -> Result<NullSpace> {
    let s = singular_values(a)?;
    let k = count_small(&s, rel_tol);
    smallest_singular_subspace(a, k)
}

pub fn inverse(a: MatRef<'_, C64>) -> CMat {
    a.partial_piv_lu().inverse()
}

pub fn solve(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    a.partial_piv_lu().solve(b)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: MatRef<'_, C64>) -> Result<(Vec<f64>, CMat)> {
    let h = hermitian_part(a);
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenNoConvergence { dim: a.nrows(), norm: frobenius(a), max_entry: a.norm_max() })?;
    let s = eig.S().column_vector();
    Ok(((0..s.nrows()).map(|i| s[i].re).collect(), eig.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let h = hermitian_part(a);
    let mut s: Vec<f64> = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenNoConvergence { dim: a.nrows(), norm: frobenius(a), max_entry: a.norm_max() })?;
    s.sort_by(f64::total_cmp);
    Ok(s)
}

pub fn hermitian_part(a: MatRef<'_, C64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Orthonormalize the columns of `a` (modified Gram-Schmidt, two passes),
/// dropping columns whose residual norm falls below `drop_tol` relative to
/// their original norm.
pub fn orthonormalize_columns(a: MatRef<'_, C64>, drop_tol: f64) -> CMat {
    let n = a.nrows();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for j in 0..a.ncols() {
        let mut v: Vec<C64> = (0..n).map(|i| a[(i, j)]).collect();
        let norm0 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(y, x)| *y -= proj * x);
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > drop_tol * norm0 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    Mat::from_fn(n, basis.len(), |i, j| basis[j][i])
}

// Padé coefficients and 1-norm bounds for scaling and squaring
// (Higham, SIAM J. Matrix Anal. Appl. 26 (2005) 1179).
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        _ => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
    }
}

fn scaled_add(acc: &mut CMat, coef: f64, x: &CMat) {
    let c = C64::new(coef, 0.0);
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += c * x[(i, j)];
        }
    }
}

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3, 5, 7, 9 or 13.
pub fn expm(a: MatRef<'_, C64>) -> Result<CMat> {
    let n = a.nrows();
    let norm = norm_one(a);
    if !norm.is_finite() {
        return Err(Error::ExponentialOverflow(norm));
    }
    let id: CMat = Mat::identity(n, n);

    for &(m, theta) in &THETA {
        if norm <= theta {
            let b = pade_coefficients(m);
            let a2 = a * a;
            let mut powers = vec![id.clone(), a2.clone()];
            for k in 2..=m / 2 {
                let next = &powers[k - 1] * &a2;
                powers.push(next);
            }
            let mut u_inner: CMat = Mat::zeros(n, n);
            let mut v: CMat = Mat::zeros(n, n);
            for k in 0..=m / 2 {
                scaled_add(&mut u_inner, b[2 * k + 1], &powers[k]);
                scaled_add(&mut v, b[2 * k], &powers[k]);
            }
            let u = a * &u_inner;
            return pade_quotient(&u, &v, norm);
        }
    }

    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil().max(0.0) as i32 } else { 0 };
    let scale = C64::new(2f64.powi(-s), 0.0);
    let a_s: CMat = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let b = pade_coefficients(13);
    let a2 = &a_s * &a_s;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let mut w1: CMat = Mat::zeros(n, n);
    scaled_add(&mut w1, b[13], &a6);
    scaled_add(&mut w1, b[11], &a4);
    scaled_add(&mut w1, b[9], &a2);
    let mut w2: CMat = Mat::zeros(n, n);
    scaled_add(&mut w2, b[7], &a6);
    scaled_add(&mut w2, b[5], &a4);
    scaled_add(&mut w2, b[3], &a2);
    scaled_add(&mut w2, b[1], &id);
    let mut u_inner = &a6 * &w1;
    scaled_add(&mut u_inner, 1.0, &w2);
    let u = &a_s * &u_inner;

    let mut z1: CMat = Mat::zeros(n, n);
    scaled_add(&mut z1, b[12], &a6);
    scaled_add(&mut z1, b[10], &a4);
    scaled_add(&mut z1, b[8], &a2);
    let mut v = &a6 * &z1;
    scaled_add(&mut v, b[6], &a6);
    scaled_add(&mut v, b[4], &a4);
    scaled_add(&mut v, b[2], &a2);
    scaled_add(&mut v, b[0], &id);

    let mut r = pade_quotient(&u, &v, norm)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.norm_max().is_finite() {
        Ok(r)
    } else {
        Err(Error::ExponentialOverflow(norm))
    }
}

fn pade_quotient(u: &CMat, v: &CMat, norm: f64) -> Result<CMat> {
    let p = v + u;
    let q = v - u;
    let r = solve(q.as_ref(), p.as_ref());
    if r.norm_max().is_finite() {
        Ok(r)
    } else {
        Err(Error::ExponentialOverflow(norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_layout() {
        let a = Mat::from_fn(2, 2, |i, j| c((2 * i + j) as f64 + 1.0, 0.0));
        let b: CMat = Mat::identity(2, 2);
        let k = kron(a.as_ref(), b.as_ref());
        assert_eq!(k[(0, 0)], c(1.0, 0.0));
        assert_eq!(k[(1, 1)], c(1.0, 0.0));
        assert_eq!(k[(0, 2)], c(2.0, 0.0));
        assert_eq!(k[(2, 0)], c(3.0, 0.0));
        assert_eq!(k[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(-i θ σ_y) = cos θ I - i sin θ σ_y
        for &theta in &[1e-3, 0.3, 2.0, 40.0] {
            let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 1) => c(-theta, 0.0),
                (1, 0) => c(theta, 0.0),
                _ => c(0.0, 0.0),
            });
            let e = expm(a.as_ref()).unwrap();
            assert!((e[(0, 0)] - c(theta.cos(), 0.0)).norm() < 1e-12);
            assert!((e[(0, 1)] - c(-theta.sin(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_matches_taylor_on_random_matrix() {
        let a = Mat::from_fn(5, 5, |i, j| c(((i * 7 + j * 3) % 5) as f64 * 0.3 - 0.6, ((i + 2 * j) % 3) as f64 * 0.2 - 0.2));
        let e = expm(a.as_ref()).unwrap();
        let mut term: CMat = Mat::identity(5, 5);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * &a;
            term = Mat::from_fn(5, 5, |i, j| term[(i, j)] / k as f64);
            sum = &sum + &term;
        }
        assert!(frobenius((&e - &sum).as_ref()) < 1e-11 * frobenius(sum.as_ref()));
    }

    #[test]
    fn null_space_of_rank_deficient() {
        let a = Mat::from_fn(3, 3, |i, j| c((i + 1) as f64 * (j + 1) as f64, 0.0));
        let ns = null_space(a.as_ref(), 1e-12).unwrap();
        assert_eq!(ns.right.ncols(), 2);
        let prod = &a * &ns.right;
        assert!(frobenius(prod.as_ref()) < 1e-12);
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let a = Mat::from_fn(3, 3, |i, j| match j {
            0 => c(1.0, i as f64),
            1 => c(2.0, 2.0 * i as f64),
            _ => c(0.0, (i == 2) as u8 as f64),
        });
        let q = orthonormalize_columns(a.as_ref(), 1e-10);
        assert_eq!(q.ncols(), 2);
        let gram = q.adjoint() * &q;
        assert!(frobenius((&gram - Mat::<C64>::identity(2, 2)).as_ref()) < 1e-14);
    }
}
