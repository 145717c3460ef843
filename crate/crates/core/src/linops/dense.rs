//! Small dense helpers over `DMatrix<Complex64>`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use super::C64;

pub type CMat = DMatrix<C64>;

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Thin SVD with `V` completed to a full unitary by zero-row padding.
pub fn svd_full(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = CMat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    if padded.is_empty() {
        return (CMat::zeros(r, 0), Vec::new(), CMat::identity(c, c));
    }
    let mut svd = SVD::new(padded, true, true);
    svd.sort_by_singular_values();
    let u = svd.u.unwrap();
    let v = svd.v_t.unwrap().adjoint();
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    (u, s, v)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Rank with the threshold `tol * sigma_max * max(rows, cols)`.
pub fn rank(m: &CMat, tol: f64) -> usize {
    rank_with_scale(m, tol, 0.0)
}

/// As [`rank`] with `sigma_max` replaced by `max(sigma_max, scale)`.
pub fn rank_with_scale(m: &CMat, tol: f64, scale: f64) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    let thr = tol * smax.max(scale) * m.nrows().max(m.ncols()) as f64;
    s.iter().filter(|&&x| x > thr).count()
}

/// Orthonormal basis of the null space, singular values at most
/// `tol * max(1, sigma_max)` count as zero.
pub fn nullspace(m: &CMat, tol: f64) -> CMat {
    let c = m.ncols();
    if m.nrows() == 0 {
        return CMat::identity(c, c);
    }
    let (_, s, v) = svd_full(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let thr = tol * smax.max(1.0);
    let keep: Vec<usize> = (0..c).filter(|&k| s.get(k).is_none_or(|&x| x <= thr)).collect();
    select_columns(&v, &keep)
}

/// Orthonormal basis of the column space.
pub fn orth(m: &CMat, tol: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let mut svd = SVD::new(m.clone(), true, false);
    svd.sort_by_singular_values();
    let u = svd.u.unwrap();
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let thr = tol * smax.max(1.0);
    let keep: Vec<usize> = (0..s.len()).filter(|&k| s[k] > thr).collect();
    select_columns(&u, &keep)
}

pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    let mut out = CMat::zeros(m.nrows(), cols.len());
    for (k, &c) in cols.iter().enumerate() {
        out.set_column(k, &m.column(c));
    }
    out
}

/// Orthogonal projector onto the span of orthonormal columns.
pub fn projector(q: &CMat) -> CMat {
    q * q.adjoint()
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = (m + m.adjoint()).scale(0.5);
    let e = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vecs = select_columns(&e.eigenvectors, &order);
    (vals, vecs)
}

/// Eigenvalues of a general square matrix from its complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let n = m.nrows();
    if (0..n).all(|j| (j + 1..n).all(|i| m[(i, j)] == C64::new(0.0, 0.0))) {
        return (0..n).map(|k| m[(k, k)]).collect();
    }
    // the unshifted QR iteration can stall; retry on unitarily similar copies
    let mut a = m.clone();
    for attempt in 0..8 {
        if let Some(s) = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 500 * n) {
            let (_, t) = s.unpack();
            return (0..n).map(|k| t[(k, k)]).collect();
        }
        let v = CMat::from_fn(n, 1, |i, _| C64::from_polar(1.0, (attempt + 1) as f64 * 0.7 * (i + 1) as f64));
        let v = &v / C64::new(v.norm(), 0.0);
        let h = CMat::identity(n, n) - &v * v.adjoint() * C64::new(2.0, 0.0);
        a = &h * a * &h;
    }
    panic!("Schur iteration did not converge on a {n}x{n} matrix");
}

/// `||A^* A - I||_max` for the columns of `a`.
pub fn isometry_deviation(a: &CMat) -> f64 {
    let g = a.adjoint() * a;
    max_abs(&(g - CMat::identity(a.ncols(), a.ncols())))
}

pub fn unitary_deviation(a: &CMat) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    isometry_deviation(a).max(isometry_deviation(&a.adjoint()))
}

pub fn hermitian_deviation(a: &CMat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// Deviation of `a` from being an orthogonal projection.
pub fn projection_deviation(a: &CMat) -> f64 {
    hermitian_deviation(a).max(max_abs(&(a * a - a)))
}

/// `||(I - P_b) q_a||` for orthonormal columns, zero iff `span a` lies in `span b`.
pub fn inclusion_gap(a: &CMat, b: &CMat) -> f64 {
    if a.ncols() == 0 {
        return 0.0;
    }
    let r = a - b * (b.adjoint() * a);
    spectral_norm(&r)
}

pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut m = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    m
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn diag(v: &[C64]) -> CMat {
    CMat::from_diagonal(&DVector::from_column_slice(v))
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}
