//! p-adic Jordan decompositions and Conway-Sloane genus symbols of even
//! lattices.
//!
//! At odd primes the Jordan constituents (scale, rank, Legendre sign of the
//! unit determinant) are already canonical. At `p = 2` signs and oddities of
//! individual constituents are not invariants, so the canonical symbol is
//! chosen among all legal (sign, oddity) assignments whose model lattice is
//! 2-adically equivalent to the input. Equivalence of even 2-adic lattices is
//! decided by rank, the unit part of the determinant modulo 8 and the
//! isomorphism class of the 2-primary discriminant form. Among equivalent
//! assignments the symbol with the fewest minus signs wins, then the one
//! whose minus signs come at the smallest scales, then the smallest oddities.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::discform::{disc_form, find_form_isometry, q_value_profile, DiscForm};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::IntMatrix;

/// One Jordan constituent `f_q` with `q = p^scale_exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constituent {
    pub scale_exp: u32,
    pub rank: usize,
    /// `+1` or `-1`
    pub sign: i8,
    /// Type I (odd) at `p = 2`; always `false` at odd primes.
    pub odd: bool,
    /// Oddity modulo 8 (odd 2-adic constituents only; 0 otherwise).
    pub oddity: u8,
}

/// All constituents at one prime, in ascending scale, including scale 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimeSymbol {
    pub p: u64,
    pub constituents: Vec<Constituent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenusSymbol {
    pub signature: (usize, usize),
    pub primes: Vec<PrimeSymbol>,
}

impl Constituent {
    pub fn scale(&self, p: u64) -> BigInt {
        BigInt::from(p).pow(self.scale_exp)
    }
}

impl GenusSymbol {
    /// `prod q^rank` over all constituents.
    pub fn abs_det(&self) -> BigInt {
        let mut d = BigInt::one();
        for ps in &self.primes {
            for c in &ps.constituents {
                d *= c.scale(ps.p).pow(c.rank as u32);
            }
        }
        d
    }

    pub fn at(&self, p: u64) -> Option<&PrimeSymbol> {
        self.primes.iter().find(|s| s.p == p)
    }
}

impl fmt::Display for GenusSymbol {
    /// Scale-1 constituents are implied and not printed; the 2-adic part
    /// comes first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for ps in &self.primes {
            for c in &ps.constituents {
                if c.scale_exp == 0 {
                    continue;
                }
                let sign = if c.sign > 0 { '+' } else { '-' };
                let mut s = format!("{}^{{{}{}}}", c.scale(ps.p), sign, c.rank);
                if ps.p == 2 {
                    if c.odd {
                        s.push_str(&format!("_{}", c.oddity));
                    } else {
                        s.push_str("_II");
                    }
                }
                parts.push(s);
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// Normalize a printed symbol: drop backslashes, turn commas into spaces and
/// collapse whitespace.
pub fn normalize_symbol(s: &str) -> String {
    s.replace('\\', "")
        .replace(',', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn valuation(x: &BigInt, p: &BigInt) -> u32 {
    let mut x = x.clone();
    let mut v = 0;
    while !x.is_zero() && x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// `v_p` of a nonzero rational.
fn rat_valuation(x: &BigRational, p: &BigInt) -> i64 {
    valuation(x.numer(), p) as i64 - valuation(x.denom(), p) as i64
}

/// Residue of a `p`-adic unit `n/d` modulo `m` (`m` a power of `p`).
fn unit_residue(x: &BigRational, m: &BigInt) -> BigInt {
    let d = x.denom().mod_floor(m);
    let inv = d.extended_gcd(m).x.mod_floor(m);
    (x.numer() * inv).mod_floor(m)
}

fn legendre(a: &BigInt, p: u64) -> i8 {
    let pb = BigInt::from(p);
    let a = a.mod_floor(&pb);
    if a.is_zero() {
        return 0;
    }
    let e = a.modpow(&BigInt::from((p - 1) / 2), &pb);
    if e.is_one() {
        1
    } else {
        -1
    }
}

enum Block {
    One(BigRational),
    Two(BigRational, BigRational, BigRational),
}

/// Block diagonalization over `Z_(p)`: 1x1 blocks at odd `p`; 1x1 and even
/// 2x2 blocks at `p = 2`. Returns `(valuation, block)` pairs.
fn padic_blocks(gram: &IntMatrix, p: u64) -> Vec<(i64, Block)> {
    let pb = BigInt::from(p);
    let n = gram.rows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            gram.row(i)
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    while !active.is_empty() {
        let mut vmin: Option<i64> = None;
        for &i in &active {
            for &j in &active {
                if !a[i][j].is_zero() {
                    let v = rat_valuation(&a[i][j], &pb);
                    if vmin.is_none_or(|m| v < m) {
                        vmin = Some(v);
                    }
                }
            }
        }
        let Some(v) = vmin else {
            // degenerate remainder; the lattice invariant excludes this
            break;
        };
        let diag = active
            .iter()
            .copied()
            .find(|&i| !a[i][i].is_zero() && rat_valuation(&a[i][i], &pb) == v);
        let (i, j) = active
            .iter()
            .flat_map(|&i| active.iter().map(move |&j| (i, j)))
            .find(|&(i, j)| i != j && !a[i][j].is_zero() && rat_valuation(&a[i][j], &pb) == v)
            .unwrap_or((usize::MAX, usize::MAX));

        let pivot = match diag {
            Some(i) => Some(i),
            None if p != 2 => {
                // e_i <- e_i + e_j gives a diagonal entry of valuation v
                for c in 0..n {
                    let t = a[j][c].clone();
                    a[i][c] += t;
                }
                for r in 0..n {
                    let t = a[r][j].clone();
                    a[r][i] += t;
                }
                Some(i)
            }
            None => None,
        };

        match pivot {
            Some(i) => {
                let d = a[i][i].clone();
                active.retain(|&x| x != i);
                for &r in &active {
                    for &s in &active {
                        let t = &a[r][i] * &a[i][s] / &d;
                        a[r][s] -= t;
                    }
                }
                out.push((v, Block::One(d)));
            }
            None => {
                let (x, y, z) = (a[i][i].clone(), a[i][j].clone(), a[j][j].clone());
                let det = &x * &z - &y * &y;
                // inverse of [[x, y], [y, z]]
                let (ix, iy, iz) = (&z / &det, -&y / &det, &x / &det);
                active.retain(|&t| t != i && t != j);
                for &r in &active {
                    for &s in &active {
                        let ri = &a[r][i];
                        let rj = &a[r][j];
                        let is = &a[i][s];
                        let js = &a[j][s];
                        let t = ri * (&ix * is + &iy * js) + rj * (&iy * is + &iz * js);
                        a[r][s] -= t;
                    }
                }
                out.push((v, Block::Two(x, y, z)));
            }
        }
    }
    out
}

/// Jordan constituents at `p`, ascending in scale.
///
/// At `p = 2` this is the decomposition found by block elimination; signs
/// and oddities of individual constituents are not yet normalized (see
/// [`genus_symbol`]).
pub fn padic_jordan(l: &Lattice, p: u64) -> Result<Vec<Constituent>> {
    if p < 2 || !is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    let pb = BigInt::from(p);
    let blocks = padic_blocks(l.gram(), p);
    let mut scales: Vec<i64> = blocks.iter().map(|b| b.0).collect();
    scales.sort_unstable();
    scales.dedup();
    let mut out = Vec::new();
    for v in scales {
        let here: Vec<&Block> = blocks.iter().filter(|b| b.0 == v).map(|b| &b.1).collect();
        let scale = BigRational::from_integer(pb.pow(v as u32));
        if p == 2 {
            let eight = BigInt::from(8);
            let mut rank = 0;
            let mut det = BigInt::one();
            let mut oddity = BigInt::zero();
            let mut odd = false;
            for b in &here {
                match b {
                    Block::One(d) => {
                        let u = unit_residue(&(d / &scale), &eight);
                        det = (det * &u).mod_floor(&eight);
                        oddity += &u;
                        odd = true;
                        rank += 1;
                    }
                    Block::Two(x, y, z) => {
                        let dd = (x * z - y * y) / (&scale * &scale);
                        det = (det * unit_residue(&dd, &eight)).mod_floor(&eight);
                        rank += 2;
                    }
                }
            }
            let d = det.to_u8().unwrap();
            out.push(Constituent {
                scale_exp: v as u32,
                rank,
                sign: if d == 1 || d == 7 { 1 } else { -1 },
                odd,
                oddity: if odd { oddity.mod_floor(&eight).to_u8().unwrap() } else { 0 },
            });
        } else {
            let mut det = BigInt::one();
            for b in &here {
                if let Block::One(d) = b {
                    det = (det * unit_residue(&(d / &scale), &pb)).mod_floor(&pb);
                }
            }
            out.push(Constituent {
                scale_exp: v as u32,
                rank: here.len(),
                sign: legendre(&det, p),
                odd: false,
                oddity: 0,
            });
        }
    }
    Ok(out)
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Prime divisors of `n` in ascending order.
pub fn prime_divisors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = 2u64;
    while BigInt::from(d) * BigInt::from(d) <= n {
        let db = BigInt::from(d);
        if n.is_multiple_of(&db) {
            out.push(d);
            while n.is_multiple_of(&db) {
                n /= &db;
            }
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push(n.to_u64().expect("prime factor fits in 64 bits"));
    }
    out
}

/// `(sign, oddity)` values of odd unimodular forms of rank `r`, each with a
/// diagonal of units realizing it.
fn odd_options(r: usize) -> Vec<(i8, u8, Vec<i64>)> {
    let units = [1i64, 3, 5, 7];
    let free = r.min(3);
    let mut out: Vec<(i8, u8, Vec<i64>)> = Vec::new();
    let mut idx = vec![0usize; free];
    loop {
        let mut diag: Vec<i64> = idx.iter().map(|&i| units[i]).collect();
        diag.resize(r, 1);
        let det = diag.iter().product::<i64>().rem_euclid(8);
        let sign = if det == 1 || det == 7 { 1 } else { -1 };
        let odd = (diag.iter().sum::<i64>().rem_euclid(8)) as u8;
        if !out.iter().any(|o| o.0 == sign && o.1 == odd) {
            out.push((sign, odd, diag));
        }
        // next nondecreasing index tuple
        let mut k = free;
        loop {
            if k == 0 {
                out.sort();
                return out;
            }
            k -= 1;
            if idx[k] < 3 {
                idx[k] += 1;
                for t in k + 1..free {
                    idx[t] = idx[k];
                }
                break;
            }
        }
    }
}

/// Gram matrix of a model unimodular constituent scaled by `2^k`.
fn model_block(c: &Constituent, diag: Option<&[i64]>) -> IntMatrix {
    let s = BigInt::from(2).pow(c.scale_exp);
    let m = if c.odd {
        IntMatrix::from_diagonal(diag.expect("odd model needs a diagonal"))
    } else {
        let h = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        let v = IntMatrix::from_rows(&[vec![2, 1], vec![1, 2]]);
        let mut m = IntMatrix::zeros(0, 0);
        for t in 0..c.rank / 2 {
            let blk = if t + 1 == c.rank / 2 && c.sign < 0 { &v } else { &h };
            m = IntMatrix::block_diagonal(&m, blk);
        }
        m
    };
    m.scale(&s)
}

fn two_adic_unit_mod8(det: &BigInt) -> u8 {
    let two = BigInt::from(2);
    let mut d = det.clone();
    while d.is_multiple_of(&two) {
        d /= &two;
    }
    d.mod_floor(&BigInt::from(8)).to_u8().unwrap()
}

fn two_part(l: &Lattice) -> Result<DiscForm> {
    Ok(disc_form(l)?.p_part(2))
}

/// Canonical 2-adic constituents of an even lattice.
fn canonical_two_adic(l: &Lattice) -> Result<Vec<Constituent>> {
    let raw = padic_jordan(l, 2)?;
    let target_det = two_adic_unit_mod8(l.det());
    let target_form = two_part(l)?;
    let target_profile = q_value_profile(&target_form)?;

    // per constituent: list of (sign, oddity, model diagonal)
    let options: Vec<Vec<(i8, u8, Option<Vec<i64>>)>> = raw
        .iter()
        .map(|c| {
            if c.odd {
                odd_options(c.rank)
                    .into_iter()
                    .map(|(s, o, d)| (s, o, Some(d)))
                    .collect()
            } else {
                vec![(-1, 0, None), (1, 0, None)]
            }
        })
        .collect();

    let mut best: Option<(Vec<Constituent>, (usize, Vec<i8>, Vec<u8>))> = None;
    let mut idx = vec![0usize; raw.len()];
    'outer: loop {
        let cand: Vec<Constituent> = raw
            .iter()
            .zip(&idx)
            .enumerate()
            .map(|(k, (c, &i))| Constituent {
                sign: options[k][i].0,
                oddity: options[k][i].1,
                ..c.clone()
            })
            .collect();
        let key = (
            cand.iter().filter(|c| c.sign < 0).count(),
            cand.iter().map(|c| c.sign).collect::<Vec<_>>(),
            cand.iter().map(|c| c.oddity).collect::<Vec<_>>(),
        );
        if best.as_ref().is_none_or(|b| key < b.1) {
            let mut gram = IntMatrix::zeros(0, 0);
            for (k, c) in cand.iter().enumerate() {
                let diag = options[k][idx[k]].2.as_deref();
                gram = IntMatrix::block_diagonal(&gram, &model_block(c, diag));
            }
            let model = Lattice::new(gram)?;
            if two_adic_unit_mod8(model.det()) == target_det {
                let form = two_part(&model)?;
                if q_value_profile(&form)? == target_profile
                    && find_form_isometry(&form, &target_form)?.is_some()
                {
                    best = Some((cand, key));
                }
            }
        }
        // advance the mixed-radix counter
        let mut k = raw.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    best.map(|b| b.0)
        .ok_or_else(|| Error::Invalid("no 2-adic model matches the lattice".into()))
}

/// Canonical genus symbol of an even lattice, at every prime dividing
/// `2 det`.
pub fn genus_symbol(l: &Lattice) -> Result<GenusSymbol> {
    if !l.is_even() {
        return Err(Error::OddLattice);
    }
    let mut primes = prime_divisors(l.det());
    if !primes.contains(&2) {
        primes.insert(0, 2);
    }
    let mut out = Vec::new();
    for p in primes {
        let constituents = if p == 2 {
            canonical_two_adic(l)?
        } else {
            padic_jordan(l, p)?
        };
        out.push(PrimeSymbol { p, constituents });
    }
    Ok(GenusSymbol {
        signature: l.signature(),
        primes: out,
    })
}

/// Equal signatures and equal canonical local symbols.
pub fn same_genus(l1: &Lattice, l2: &Lattice) -> Result<bool> {
    if l1.rank() != l2.rank() || l1.signature() != l2.signature() || l1.det() != l2.det() {
        return Ok(false);
    }
    Ok(genus_symbol(l1)? == genus_symbol(l2)?)
}
