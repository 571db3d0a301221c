//! Small dense linear algebra for LD blocks.
//!
//! Blocks hold on the order of ten SNPs, so everything here works on
//! row-major `n * n` slices and allocates nothing in the hot loops.

use rand::Rng;
use rand_distr::StandardNormal;

/// Lower Cholesky factor stored row-major in the lower triangle; the strict
/// upper triangle is zeroed. Fails if a pivot is not strictly positive.
pub fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<(), usize> {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(j);
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
        for i in 0..j {
            a[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Solve `L y = b` in place.
pub fn solve_lower(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solve `L^T x = y` in place.
pub fn solve_lower_transpose(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solve `(L L^T) x = b` in place.
pub fn chol_solve(l: &[f64], n: usize, b: &mut [f64]) {
    solve_lower(l, n, b);
    solve_lower_transpose(l, n, b);
}

pub fn chol_log_det(l: &[f64], n: usize) -> f64 {
    (0..n).map(|i| l[i * n + i].ln()).sum::<f64>() * 2.0
}

/// `out = A x` for a square row-major `A`.
pub fn matvec(a: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        out[i] = row.iter().zip(x).map(|(r, v)| r * v).sum();
    }
}

/// `out = L x` for a lower-triangular factor.
pub fn lower_matvec(l: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        out[i] = (0..=i).map(|k| l[i * n + k] * x[k]).sum();
    }
}

pub fn quad_form(a: &[f64], n: usize, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        s += x[i] * row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>();
    }
    s
}

pub fn bilinear(a: &[f64], n: usize, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        s += x[i] * row.iter().zip(y).map(|(r, v)| r * v).sum::<f64>();
    }
    s
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Draw from `N(P^{-1} h, P^{-1})` given the Cholesky factor `L` of the
/// precision `P`. `h` is overwritten with the mean, `out` receives the draw.
pub fn sample_from_precision<R: Rng + ?Sized>(
    chol: &[f64],
    n: usize,
    h: &mut [f64],
    out: &mut [f64],
    rng: &mut R,
) {
    chol_solve(chol, n, h);
    for z in out.iter_mut().take(n) {
        *z = rng.sample(StandardNormal);
    }
    solve_lower_transpose(chol, n, out);
    for (o, m) in out.iter_mut().zip(h.iter()) {
        *o += m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn ar1(n: usize, rho: f64) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = rho.powi((i as i32 - j as i32).abs());
            }
        }
        a
    }

    #[test]
    fn cholesky_matches_nalgebra() {
        let n = 7;
        let a = ar1(n, 0.6);
        let mut l = a.clone();
        cholesky_in_place(&mut l, n).unwrap();
        let reference = DMatrix::from_row_slice(n, n, &a).cholesky().unwrap().l();
        for i in 0..n {
            for j in 0..n {
                assert!((l[i * n + j] - reference[(i, j)]).abs() < 1e-13);
            }
        }
        let det = DMatrix::from_row_slice(n, n, &a).determinant();
        assert!((chol_log_det(&l, n) - det.ln()).abs() < 1e-10);
    }

    #[test]
    fn solve_inverts() {
        let n = 5;
        let a = ar1(n, 0.3);
        let mut l = a.clone();
        cholesky_in_place(&mut l, n).unwrap();
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 1.5).collect();
        let mut x = b.clone();
        chol_solve(&l, n, &mut x);
        let mut back = vec![0.0; n];
        matvec(&a, n, &x, &mut back);
        for i in 0..n {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        let mut lx = vec![0.0; n];
        lower_matvec(&l, n, &x, &mut lx);
        let mut y = b.clone();
        solve_lower(&l, n, &mut y);
        solve_lower_transpose(&l, n, &mut y);
        assert!(y.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        assert_eq!(cholesky_in_place(&mut a, 2), Err(1));
    }
}
