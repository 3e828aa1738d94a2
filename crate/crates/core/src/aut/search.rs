//! Backtracking search for isometries between definite lattices.
//!
//! Images of basis vectors are picked from the short vectors of matching
//! norm; a partial assignment survives only while all inner products with
//! previously placed images agree with the source Gram matrix. The basis is
//! processed in a fingerprint order (fewest consistent candidates first).
//! Automorphism groups are built level by level as a stabilizer chain.

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::IntMatrix;

use super::short::short_vectors_i64;

type Vector = Vec<i64>;
type Mat = Vec<Vec<i64>>;

pub(crate) fn to_i64_matrix(m: &IntMatrix) -> Result<Mat> {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|x| {
                    x.to_i64()
                        .ok_or_else(|| Error::Unsupported("entry exceeds 64-bit range".into()))
                })
                .collect()
        })
        .collect()
}

pub(crate) fn from_i64_matrix(m: &Mat) -> IntMatrix {
    IntMatrix::from_rows(m)
}

/// Candidate images living in a target lattice.
struct Target {
    vecs: Vec<Vector>,
    /// `gram * v` for every candidate
    gvecs: Vec<Vec<i128>>,
    norms: Vec<i64>,
    index: HashMap<Vector, usize>,
}

impl Target {
    fn new(l: &Lattice, bound: i64) -> Result<Self> {
        let gram = to_i64_matrix(l.gram())?;
        let short = short_vectors_i64(l, bound)?;
        let mut vecs = Vec::with_capacity(2 * short.len());
        let mut norms = Vec::with_capacity(2 * short.len());
        for (v, n) in short {
            let neg: Vector = v.iter().map(|x| -x).collect();
            vecs.push(v);
            vecs.push(neg);
            norms.push(n);
            norms.push(n);
        }
        let gvecs = vecs.iter().map(|v| mat_vec_wide(&gram, v)).collect();
        let index = vecs
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        Ok(Target {
            vecs,
            gvecs,
            norms,
            index,
        })
    }

    fn inner(&self, a: usize, b: usize) -> i128 {
        self.gvecs[a]
            .iter()
            .zip(&self.vecs[b])
            .map(|(x, y)| x * (*y as i128))
            .sum()
    }
}

fn mat_vec_wide(m: &Mat, v: &[i64]) -> Vec<i128> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| (*a as i128) * (*b as i128)).sum())
        .collect()
}

fn mat_vec(m: &Mat, v: &[i64]) -> Vector {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Search state for maps from a source Gram matrix into a target lattice.
struct Search<'a> {
    src: &'a Mat,
    tgt: &'a Target,
    order: Vec<usize>,
    /// candidate indices for each basis vector (by original index)
    cand: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(src: &'a Mat, tgt: &'a Target, order: Vec<usize>) -> Self {
        let n = src.len();
        let cand = (0..n)
            .map(|i| {
                (0..tgt.vecs.len())
                    .filter(|&v| tgt.norms[v] == src[i][i])
                    .collect()
            })
            .collect();
        Search {
            src,
            tgt,
            order,
            cand,
        }
    }

    fn consistent(&self, level: usize, w: usize, images: &[usize]) -> bool {
        let bi = self.order[level];
        (0..level).all(|j| {
            let bj = self.order[j];
            self.tgt.inner(w, images[j]) == self.src[bi][bj] as i128
        })
    }

    /// Depth-first completion of `images[..level]`; returns the first full
    /// assignment in search order.
    fn complete(&self, level: usize, images: &mut Vec<usize>) -> bool {
        if level == self.order.len() {
            return true;
        }
        let bi = self.order[level];
        for &w in &self.cand[bi] {
            if self.consistent(level, w, images) {
                images.push(w);
                if self.complete(level + 1, images) {
                    return true;
                }
                images.pop();
            }
        }
        false
    }

    /// Matrix whose column `order[k]` is the image vector `images[k]`.
    fn matrix(&self, images: &[usize]) -> Mat {
        let n = self.order.len();
        let mut m = vec![vec![0i64; n]; n];
        for (k, &img) in images.iter().enumerate() {
            let col = self.order[k];
            for r in 0..n {
                m[r][col] = self.tgt.vecs[img][r];
            }
        }
        m
    }
}

/// Greedy fingerprint order: repeatedly take the basis vector with the fewest
/// candidates consistent with the identity on the vectors chosen so far.
fn fingerprint_order(src: &Mat, own: &Target) -> Vec<usize> {
    let n = src.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let unit = |i: usize| -> usize {
        let mut e = vec![0i64; n];
        e[i] = 1;
        own.index[&e]
    };
    while chosen.len() < n {
        let mut best: Option<(usize, usize)> = None;
        for i in 0..n {
            if chosen.contains(&i) {
                continue;
            }
            let count = (0..own.vecs.len())
                .filter(|&v| own.norms[v] == src[i][i])
                .filter(|&v| chosen.iter().all(|&j| own.inner(v, unit(j)) == src[i][j] as i128))
                .count();
            if best.is_none_or(|(_, c)| count < c) {
                best = Some((i, count));
            }
        }
        chosen.push(best.expect("remaining index").0);
    }
    chosen
}

fn positive_gram(l: &Lattice) -> Result<Lattice> {
    if l.is_positive_definite() {
        Ok(l.clone())
    } else if l.is_negative_definite() {
        l.scaled(-1)
    } else {
        let (plus, minus) = l.signature();
        Err(Error::Indefinite { plus, minus })
    }
}

fn max_diag(g: &Mat) -> i64 {
    (0..g.len()).map(|i| g[i][i]).max().unwrap_or(0)
}

/// Stabilizer-chain data of `O(L)`.
pub(crate) struct ChainResult {
    pub generators: Vec<IntMatrix>,
    pub order: BigInt,
}

/// Generators and order of `O(L)` for a definite lattice.
pub(crate) fn automorphisms(l: &Lattice) -> Result<ChainResult> {
    let l = positive_gram(l)?;
    let n = l.rank();
    if n == 0 {
        return Ok(ChainResult {
            generators: Vec::new(),
            order: BigInt::from(1),
        });
    }
    let src = to_i64_matrix(l.gram())?;
    let tgt = Target::new(&l, max_diag(&src))?;
    let order = fingerprint_order(&src, &tgt);
    let search = Search::new(&src, &tgt, order.clone());

    let unit: Vec<usize> = (0..n)
        .map(|i| {
            let mut e = vec![0i64; n];
            e[i] = 1;
            tgt.index[&e]
        })
        .collect();

    let mut gens: Vec<(Mat, usize)> = Vec::new();
    let mut group_order = BigInt::from(1);
    for level in (0..n).rev() {
        let base = unit[order[level]];
        let prefix: Vec<usize> = (0..level).map(|j| unit[order[j]]).collect();
        let mut orbit = Orbit::new(base);
        let active: Vec<&Mat> = gens.iter().filter(|g| g.1 >= level).map(|g| &g.0).collect();
        orbit.extend(&active, &tgt);
        let mut new_gens: Vec<Mat> = Vec::new();
        for &w in &search.cand[order[level]] {
            if orbit.contains(w) || !search.consistent(level, w, &prefix) {
                continue;
            }
            let mut images = prefix.clone();
            images.push(w);
            if search.complete(level + 1, &mut images) {
                let g = search.matrix(&images);
                new_gens.push(g.clone());
                let mut all: Vec<&Mat> = active.clone();
                all.extend(new_gens.iter());
                orbit.extend(&all, &tgt);
            }
        }
        for g in new_gens {
            gens.push((g, level));
        }
        group_order *= orbit.len();
    }
    Ok(ChainResult {
        generators: gens.iter().map(|(g, _)| from_i64_matrix(g)).collect(),
        order: group_order,
    })
}

struct Orbit {
    members: Vec<usize>,
    seen: HashSet<usize>,
}

impl Orbit {
    fn new(start: usize) -> Self {
        Orbit {
            members: vec![start],
            seen: HashSet::from([start]),
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.seen.contains(&v)
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    /// Close the orbit under `gens` (acting on column vectors).
    fn extend(&mut self, gens: &[&Mat], tgt: &Target) {
        let mut queue: VecDeque<usize> = self.members.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            for g in gens {
                let img = mat_vec(g, &tgt.vecs[v]);
                let idx = tgt.index[&img];
                if self.seen.insert(idx) {
                    self.members.push(idx);
                    queue.push_back(idx);
                }
            }
        }
    }
}

/// An isometry `g` with `g^T G2 g = G1`, if one exists.
pub(crate) fn find_isometry(l1: &Lattice, l2: &Lattice) -> Result<Option<IntMatrix>> {
    if l1.rank() != l2.rank() {
        return Err(Error::RankMismatch(l1.rank(), l2.rank()));
    }
    let pos1 = l1.is_positive_definite();
    let pos2 = l2.is_positive_definite();
    let a = positive_gram(l1)?;
    let b = positive_gram(l2)?;
    if pos1 != pos2 {
        return Err(Error::SignMismatch);
    }
    if l1.det() != l2.det() {
        return Ok(None);
    }
    let n = a.rank();
    if a.gram() == b.gram() {
        return Ok(Some(IntMatrix::identity(n)));
    }
    let src = to_i64_matrix(a.gram())?;
    let own = Target::new(&a, max_diag(&src))?;
    let tgt = Target::new(&b, max_diag(&src))?;
    // counts of vectors per norm are an isometry invariant
    let count = |t: &Target| {
        let mut c: Vec<i64> = t.norms.clone();
        c.sort_unstable();
        c
    };
    if count(&own) != count(&tgt) {
        return Ok(None);
    }
    let order = fingerprint_order(&src, &own);
    let search = Search::new(&src, &tgt, order);
    let mut images = Vec::with_capacity(n);
    if search.complete(0, &mut images) {
        let g = from_i64_matrix(&search.matrix(&images));
        debug_assert_eq!(&(&g.transpose() * l2.gram()) * &g, *l1.gram());
        Ok(Some(g))
    } else {
        Ok(None)
    }
}
