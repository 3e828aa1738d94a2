use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::IntMatrix;

/// All nonzero `v` with `<v, v> <= bound`, one per `±` pair (first nonzero
/// coordinate positive), sorted by norm and then lexicographically.
pub fn short_vectors(l: &Lattice, bound: &BigInt) -> Result<Vec<(Vec<BigInt>, BigInt)>> {
    if !l.is_positive_definite() {
        let (plus, minus) = l.signature();
        return Err(Error::Indefinite { plus, minus });
    }
    if bound.is_negative() {
        return Err(Error::Invalid("negative norm bound".into()));
    }
    let found = fincke_pohst(l.gram(), bound);
    let mut out: Vec<(Vec<BigInt>, BigInt)> = found
        .into_iter()
        .map(|v| {
            let norm = l.norm(&v);
            (v, norm)
        })
        .collect();
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// Machine-word version used by the isometry search.
pub(crate) fn short_vectors_i64(l: &Lattice, bound: i64) -> Result<Vec<(Vec<i64>, i64)>> {
    let vs = short_vectors(l, &BigInt::from(bound))?;
    vs.into_iter()
        .map(|(v, n)| {
            let v: Option<Vec<i64>> = v.iter().map(ToPrimitive::to_i64).collect();
            match (v, n.to_i64()) {
                (Some(v), Some(n)) => Ok((v, n)),
                _ => Err(Error::Unsupported("short vector exceeds 64-bit range".into())),
            }
        })
        .collect()
}

/// Exact Fincke-Pohst enumeration over a rational LDL^T decomposition.
fn fincke_pohst(gram: &IntMatrix, bound: &BigInt) -> Vec<Vec<BigInt>> {
    let n = gram.rows();
    if n == 0 {
        return Vec::new();
    }
    // q[i][i] = D_i, q[i][j] (j > i) = L_ji, so
    // Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2
    let mut q: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            gram.row(i)
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            let v = q[i][j].clone();
            q[j][i] = v;
            let d = &q[i][j] / &q[i][i];
            q[i][j] = d;
        }
        for k in i + 1..n {
            for l in k..n {
                let d = &q[k][i] * &q[i][l];
                q[k][l] -= d;
            }
        }
    }

    let mut out = Vec::new();
    let mut x = vec![BigInt::zero(); n];
    let bound = BigRational::from_integer(bound.clone());
    recurse(&q, n - 1, &bound, &mut x, &mut out);
    out
}

fn recurse(
    q: &[Vec<BigRational>],
    i: usize,
    remaining: &BigRational,
    x: &mut Vec<BigInt>,
    out: &mut Vec<Vec<BigInt>>,
) {
    let n = q.len();
    let mut c = BigRational::zero();
    for j in i + 1..n {
        if !x[j].is_zero() {
            c += &q[i][j] * BigRational::from_integer(x[j].clone());
        }
    }
    let r = remaining / &q[i][i];
    let s: BigInt = r.ceil().to_integer().sqrt() + 1;
    let neg_c = -&c;
    let lo: BigInt = neg_c.floor().to_integer() - &s;
    let hi: BigInt = neg_c.ceil().to_integer() + &s;
    let mut xi = lo;
    while xi <= hi {
        let t = BigRational::from_integer(xi.clone()) + &c;
        let used = &q[i][i] * &t * &t;
        if used <= *remaining {
            x[i] = xi.clone();
            let rest = remaining - &used;
            if i == 0 {
                let first = x.iter().find(|v| !v.is_zero());
                if first.is_some_and(|v| v.is_positive()) {
                    out.push(x.clone());
                }
            } else {
                recurse(q, i - 1, &rest, x, out);
            }
        }
        xi += 1;
    }
    x[i] = BigInt::zero();
}
