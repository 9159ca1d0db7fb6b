//! Integer-lattice linear algebra: Smith normal form and kernel bases.
//!
//! A Delzant polytope's facet-normal projection is an integer matrix whose
//! kernel lattice drives the symplectic-quotient construction; the Smith
//! normal form both produces a lattice basis for that kernel and certifies
//! surjectivity over the integers (all elementary divisors 1).

use crate::rat::int_vec_to_rat;
use crate::{linalg, Int, Rat};
use num_traits::{One, Signed, Zero};

/// `U * a * V = S` with `U`, `V` unimodular and `S` in Smith normal form.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub u: Vec<Vec<Int>>,
    pub v: Vec<Vec<Int>>,
    pub s: Vec<Vec<Int>>,
    /// Nonzero diagonal entries d1 | d2 | ...
    pub divisors: Vec<Int>,
}

fn swap_rows(m: &mut [Vec<Int>], a: usize, b: usize) {
    m.swap(a, b);
}

fn swap_cols(m: &mut [Vec<Int>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn add_row(m: &mut [Vec<Int>], dst: usize, src: usize, factor: &Int) {
    let src_row = m[src].clone();
    for (d, s) in m[dst].iter_mut().zip(&src_row) {
        *d += factor * s;
    }
}

fn add_col(m: &mut [Vec<Int>], dst: usize, src: usize, factor: &Int) {
    for row in m.iter_mut() {
        let s = row[src].clone();
        row[dst] += factor * s;
    }
}

fn negate_row(m: &mut [Vec<Int>], r: usize) {
    for x in m[r].iter_mut() {
        *x = -x.clone();
    }
}

/// Smith normal form by repeated pivot reduction. Sizes here are tiny
/// (facet counts by ambient dimension), so the straightforward algorithm
/// with full transform tracking is fine.
pub fn smith_normal_form(a: &[Vec<Int>]) -> SmithForm {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut s: Vec<Vec<Int>> = a.to_vec();
    let mut u: Vec<Vec<Int>> = (0..rows)
        .map(|i| (0..rows).map(|j| Int::from((i == j) as i64)).collect())
        .collect();
    let mut v: Vec<Vec<Int>> = (0..cols)
        .map(|i| (0..cols).map(|j| Int::from((i == j) as i64)).collect())
        .collect();

    let mut t = 0;
    while t < rows.min(cols) {
        // Locate the smallest-magnitude nonzero entry in the trailing block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !s[i][j].is_zero()
                    && pivot.is_none_or(|(pi, pj)| s[i][j].abs() < s[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut s, t, pi);
        swap_rows(&mut u, t, pi);
        swap_cols(&mut s, t, pj);
        swap_cols(&mut v, t, pj);

        let mut clean = false;
        while !clean {
            clean = true;
            for i in (t + 1)..rows {
                if s[i][t].is_zero() {
                    continue;
                }
                let q = div_round(&s[i][t], &s[t][t]);
                add_row(&mut s, i, t, &(-&q));
                add_row(&mut u, i, t, &(-&q));
                if !s[i][t].is_zero() {
                    // Remainder smaller than pivot: swap it up and restart.
                    swap_rows(&mut s, t, i);
                    swap_rows(&mut u, t, i);
                    clean = false;
                }
            }
            for j in (t + 1)..cols {
                if s[t][j].is_zero() {
                    continue;
                }
                let q = div_round(&s[t][j], &s[t][t]);
                add_col(&mut s, j, t, &(-&q));
                add_col(&mut v, j, t, &(-&q));
                if !s[t][j].is_zero() {
                    swap_cols(&mut s, t, j);
                    swap_cols(&mut v, t, j);
                    clean = false;
                }
            }
        }

        // Divisibility fix-up: fold any non-divisible entry into the pivot row.
        let p = s[t][t].clone();
        let mut offender = None;
        'scan: for i in (t + 1)..rows {
            for j in (t + 1)..cols {
                if !(&s[i][j] % &p).is_zero() {
                    offender = Some(i);
                    break 'scan;
                }
            }
        }
        if let Some(i) = offender {
            add_row(&mut s, t, i, &Int::one());
            add_row(&mut u, t, i, &Int::one());
            continue; // re-run the same t
        }
        if s[t][t].is_negative() {
            negate_row(&mut s, t);
            negate_row(&mut u, t);
        }
        t += 1;
    }

    let divisors: Vec<Int> = (0..rows.min(cols))
        .map(|i| s[i][i].clone())
        .take_while(|d| !d.is_zero())
        .collect();
    SmithForm { u, v, s, divisors }
}

/// Round-to-nearest integer division (ties toward zero), keeping remainders
/// at most half the divisor so the Euclid steps terminate quickly.
fn div_round(a: &Int, b: &Int) -> Int {
    let (q, r) = num_integer::Integer::div_rem(a, b);
    let two_r = r.abs() * Int::from(2);
    if two_r > b.abs() {
        if (a.is_negative()) == (b.is_negative()) {
            q + Int::one()
        } else {
            q - Int::one()
        }
    } else {
        q
    }
}

/// Basis of the integer kernel lattice `{x in Z^cols : a x = 0}`.
///
/// The basis is a lattice basis (not merely Q-linear): it consists of the
/// trailing columns of the unimodular `V` from the Smith form.
pub fn kernel_lattice_basis(a: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let cols = if a.is_empty() { 0 } else { a[0].len() };
    let snf = smith_normal_form(a);
    let rank = snf.divisors.len();
    let mut basis = Vec::new();
    for j in rank..cols {
        let mut col: Vec<Int> = (0..cols).map(|i| snf.v[i][j].clone()).collect();
        // Canonical sign: first nonzero entry positive.
        if let Some(first) = col.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                for x in col.iter_mut() {
                    *x = -x.clone();
                }
            }
        }
        basis.push(col);
    }
    basis
}

/// True if the integer matrix maps `Z^cols` onto `Z^rows`
/// (full row rank with all elementary divisors 1).
pub fn is_surjective_over_z(a: &[Vec<Int>]) -> bool {
    let snf = smith_normal_form(a);
    snf.divisors.len() == a.len() && snf.divisors.iter().all(|d| d.is_one())
}

/// Exact determinant of an integer matrix (via rational elimination).
pub fn int_det(a: &[Vec<Int>]) -> Int {
    let rows: Vec<Vec<Rat>> = a.iter().map(|r| int_vec_to_rat(r)).collect();
    let d = linalg::det(&rows);
    debug_assert!(d.is_integer());
    d.to_integer()
}
