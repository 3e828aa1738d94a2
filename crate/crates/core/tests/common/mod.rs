//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use k3cls_core::lattice::Lattice;
use k3cls_core::linalg::IntMatrix;
use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Brute-force vectors of norm <= bound, both signs, found by scanning the
/// box |x_i| <= sqrt(bound * (G^-1)_ii).
pub fn box_vectors(g: &[Vec<i64>], bound: i64) -> Vec<Vec<i64>> {
    let n = g.len();
    let inv = IntMatrix::from_rows(g).to_rational().inverse().unwrap();
    let radius: Vec<i64> = (0..n)
        .map(|i| {
            let r = inv.get(i, i) * BigInt::from(bound);
            let mut k = 0i64;
            while num_rational::BigRational::from_integer(BigInt::from((k + 1) * (k + 1))) <= r {
                k += 1;
            }
            k
        })
        .collect();
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    fn rec(i: usize, x: &mut Vec<i64>, radius: &[i64], g: &[Vec<i64>], bound: i64, out: &mut Vec<Vec<i64>>) {
        if i == x.len() {
            let norm: i64 = (0..x.len())
                .map(|a| (0..x.len()).map(|b| x[a] * g[a][b] * x[b]).sum::<i64>())
                .sum();
            if norm > 0 && norm <= bound {
                out.push(x.clone());
            }
            return;
        }
        for v in -radius[i]..=radius[i] {
            x[i] = v;
            rec(i + 1, x, radius, g, bound, out);
        }
        x[i] = 0;
    }
    rec(0, &mut x, &radius, g, bound, &mut out);
    out
}

pub fn ip(g: &[Vec<i64>], a: &[i64], b: &[i64]) -> i64 {
    (0..a.len())
        .map(|i| (0..b.len()).map(|j| a[i] * g[i][j] * b[j]).sum::<i64>())
        .sum()
}

/// Count of Gram-preserving assignments of basis images among equal-norm
/// vectors.
pub fn brute_force_aut_order(g: &[Vec<i64>]) -> u64 {
    let n = g.len();
    let maxd = (0..n).map(|i| g[i][i]).max().unwrap();
    let vs = box_vectors(g, maxd);
    let cands: Vec<Vec<&Vec<i64>>> = (0..n)
        .map(|i| vs.iter().filter(|v| ip(g, v, v) == g[i][i]).collect())
        .collect();
    fn rec(i: usize, chosen: &mut Vec<Vec<i64>>, cands: &[Vec<&Vec<i64>>], g: &[Vec<i64>]) -> u64 {
        if i == cands.len() {
            return 1;
        }
        let mut total = 0;
        for v in &cands[i] {
            if (0..i).all(|j| ip(g, v, &chosen[j]) == g[i][j]) {
                chosen.push((*v).clone());
                total += rec(i + 1, chosen, cands, g);
                chosen.pop();
            }
        }
        total
    }
    rec(0, &mut Vec::new(), &cands, g)
}

pub fn random_definite(rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    loop {
        let n = rng.gen_range(1..=3);
        let mut g = vec![vec![0i64; n]; n];
        for i in 0..n {
            g[i][i] = rng.gen_range(1..=20);
            for j in i + 1..n {
                let v = rng.gen_range(-20..=20);
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        let l = Lattice::from_rows(&g);
        if let Ok(l) = l {
            if l.is_positive_definite() {
                return g;
            }
        }
    }
}
