use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::IntMatrix;

/// Row Hermite normal form. Returns `(H, U)` with `U` unimodular and
/// `U * M = H`.
///
/// Convention: `H` is in row echelon form, every pivot is positive, and the
/// entries above a pivot lie in `[0, pivot)`. Zero rows sit at the bottom.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let rows = m.rows();
    let cols = m.cols();
    let mut h = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        for i in r + 1..rows {
            if h.get(i, c).is_zero() {
                continue;
            }
            let a = h.get(r, c).clone();
            let b = h.get(i, c).clone();
            let eg = a.extended_gcd(&b);
            let g = eg.gcd;
            let za = &a / &g;
            let zb = -(&b / &g);
            h.combine_rows(r, i, [&eg.x, &eg.y, &zb, &za]);
            u.combine_rows(r, i, [&eg.x, &eg.y, &zb, &za]);
        }
        if h.get(r, c).is_zero() {
            continue;
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let p = h.get(r, c).clone();
        for i in 0..r {
            let q = h.get(i, c).div_floor(&p);
            if !q.is_zero() {
                let nq = -q;
                h.add_row_multiple(i, r, &nq);
                u.add_row_multiple(i, r, &nq);
            }
        }
        r += 1;
    }
    (h, u)
}

/// Smith normal form. Returns `(S, U, V)` with `U`, `V` unimodular,
/// `U * M * V = S` diagonal, nonnegative, and `S[i][i] | S[i+1][i+1]`.
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let rows = m.rows();
    let cols = m.cols();
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = s.get(i, j);
                if x.is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| x.abs() < s.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        s.swap_rows(t, pi);
        u.swap_rows(t, pi);
        s.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let mut clean = true;
            let p = s.get(t, t).clone();
            for i in t + 1..rows {
                let q = s.get(i, t).div_floor(&p);
                if !q.is_zero() {
                    let nq = -q;
                    s.add_row_multiple(i, t, &nq);
                    u.add_row_multiple(i, t, &nq);
                }
                if !s.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = s.get(t, j).div_floor(&p);
                if !q.is_zero() {
                    let nq = -q;
                    s.add_col_multiple(j, t, &nq);
                    v.add_col_multiple(j, t, &nq);
                }
                if !s.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // move the smallest remainder to the pivot position
                let mut bi = t;
                let mut bj = t;
                for i in t + 1..rows {
                    let x = s.get(i, t);
                    if !x.is_zero() && x.abs() < s.get(bi, bj).abs() {
                        bi = i;
                        bj = t;
                    }
                }
                for j in t + 1..cols {
                    let x = s.get(t, j);
                    if !x.is_zero() && x.abs() < s.get(bi, bj).abs() {
                        bi = t;
                        bj = j;
                    }
                }
                s.swap_rows(t, bi);
                u.swap_rows(t, bi);
                s.swap_cols(t, bj);
                v.swap_cols(t, bj);
                continue;
            }
            // divisibility of the trailing block
            let bad = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !s.get(i, j).is_multiple_of(&p))
            });
            match bad {
                Some(i) => {
                    s.add_row_multiple(t, i, &BigInt::one());
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    (s, u, v)
}

/// Diagonal of a Smith form (length `min(rows, cols)`).
pub fn smith_diagonal(m: &IntMatrix) -> Vec<BigInt> {
    let (s, _, _) = snf(m);
    (0..s.rows().min(s.cols())).map(|i| s.get(i, i).clone()).collect()
}

/// Saturated basis (rows) of the integer kernel `{v : M * v^T = 0}`.
///
/// The basis is returned in Hermite normal form, so it is canonical for the
/// kernel lattice.
pub fn kernel_saturated(m: &IntMatrix) -> IntMatrix {
    let n = m.cols();
    let (h, u) = hnf(&m.transpose());
    let rank = (0..h.rows()).filter(|&i| !h.row(i).iter().all(Zero::is_zero)).count();
    let kernel_rows: Vec<usize> = (rank..n).collect();
    let basis = u.select_rows(&kernel_rows);
    if basis.rows() == 0 {
        return IntMatrix::zeros(0, n);
    }
    let (hb, _) = hnf(&basis);
    let nz: Vec<usize> = (0..hb.rows())
        .filter(|&i| !hb.row(i).iter().all(Zero::is_zero))
        .collect();
    hb.select_rows(&nz)
}

/// Row rank over Q.
pub fn rank(m: &IntMatrix) -> usize {
    let (h, _) = hnf(m);
    (0..h.rows())
        .filter(|&i| !h.row(i).iter().all(Zero::is_zero))
        .count()
}

/// Row-space basis in Hermite normal form (zero rows dropped).
pub fn row_basis(m: &IntMatrix) -> IntMatrix {
    let (h, _) = hnf(m);
    let nz: Vec<usize> = (0..h.rows())
        .filter(|&i| !h.row(i).iter().all(Zero::is_zero))
        .collect();
    h.select_rows(&nz)
}

/// True when the rows of `basis` span a primitive sublattice of `Z^n`,
/// i.e. every Smith invariant factor equals 1.
pub fn is_primitive(basis: &IntMatrix) -> bool {
    if basis.rows() == 0 {
        return true;
    }
    let d = smith_diagonal(basis);
    d.len() == basis.rows() && d.iter().all(One::is_one)
}
