//! Dense linear algebra over a generic [`Scalar`].
//!
//! Everything here is Gaussian elimination with partial pivoting on
//! `Vec<Vec<T>>` matrices. Sizes are tiny (ambient dimension <= ~6, facet
//! counts in the tens), so no BLAS-style machinery is warranted; what matters
//! is that the identical code path runs exactly over `BigRational` and fast
//! over `f64`.

use crate::scalar::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn scale<T: Scalar>(a: &[T], s: &T) -> Vec<T> {
    a.iter().map(|x| x.clone() * s.clone()).collect()
}

pub fn mat_vec<T: Scalar>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = b[0].len();
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = T::zero();
                    for (k, x) in row.iter().enumerate() {
                        acc = acc + x.clone() * b[k][j].clone();
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Scalar>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn identity<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

/// Row-echelon reduction in place; returns the pivot column of each pivot row.
fn eliminate<T: Scalar>(m: &mut [Vec<T>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        // Partial pivot: largest absolute value keeps f64 stable and is a
        // deterministic choice for rationals.
        let mut best: Option<usize> = None;
        for i in r..rows {
            if !m[i][c].is_zero() && best.is_none_or(|b| m[i][c].abs() > m[b][c].abs()) {
                best = Some(i);
            }
        }
        let Some(p) = best else { continue };
        m.swap(r, p);
        for i in (r + 1)..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / m[r][c].clone();
            for j in c..cols {
                let v = m[i][j].clone() - f.clone() * m[r][j].clone();
                m[i][j] = v;
            }
            m[i][c] = T::zero();
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

pub fn rank<T: Scalar>(a: &[Vec<T>]) -> usize {
    let mut m: Vec<Vec<T>> = a.to_vec();
    eliminate(&mut m).len()
}

pub fn det<T: Scalar>(a: &[Vec<T>]) -> T {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut sign_flip = false;
    let mut acc = T::one();
    for c in 0..n {
        let mut best: Option<usize> = None;
        for i in c..n {
            if !m[i][c].is_zero() && best.is_none_or(|b| m[i][c].abs() > m[b][c].abs()) {
                best = Some(i);
            }
        }
        let Some(p) = best else { return T::zero() };
        if p != c {
            m.swap(c, p);
            sign_flip = !sign_flip;
        }
        acc = acc * m[c][c].clone();
        for i in (c + 1)..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / m[c][c].clone();
            for j in c..n {
                let v = m[i][j].clone() - f.clone() * m[c][j].clone();
                m[i][j] = v;
            }
        }
    }
    if sign_flip {
        -acc
    } else {
        acc
    }
}

/// Solve the square system `a x = b`; `None` if `a` is singular.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = eliminate(&mut m);
    if pivots.len() < n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = m[i][n].clone();
        for j in (i + 1)..n {
            acc = acc - m[i][j].clone() * x[j].clone();
        }
        x[i] = acc / m[i][i].clone();
    }
    Some(x)
}

pub fn inverse<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            for j in 0..n {
                r.push(if i == j { T::one() } else { T::zero() });
            }
            r
        })
        .collect();
    let pivots = eliminate(&mut m);
    if pivots.len() < n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    // Back-substitute each of the n appended columns.
    let mut inv = vec![vec![T::zero(); n]; n];
    for col in 0..n {
        for i in (0..n).rev() {
            let mut acc = m[i][n + col].clone();
            for j in (i + 1)..n {
                acc = acc - m[i][j].clone() * inv[j][col].clone();
            }
            inv[i][col] = acc / m[i][i].clone();
        }
    }
    Some(inv)
}

/// Basis of the nullspace `{x : a x = 0}` over the scalar field.
pub fn kernel_basis<T: Scalar>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    if a.is_empty() {
        return Vec::new();
    }
    let cols = a[0].len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let pivots = eliminate(&mut m);
    let pivot_rows: Vec<(usize, usize)> = pivots.iter().copied().enumerate().collect();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut x = vec![T::zero(); cols];
        x[f] = T::one();
        for &(r, c) in pivot_rows.iter().rev() {
            let mut acc = T::zero();
            for j in (c + 1)..cols {
                acc = acc + m[r][j].clone() * x[j].clone();
            }
            x[c] = -acc / m[r][c].clone();
        }
        basis.push(x);
    }
    basis
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
