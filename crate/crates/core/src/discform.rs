//! Finite quadratic forms on discriminant groups and their isometries.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{self, IntMatrix};

/// Largest group handled by the brute-force searches.
pub const FORM_ORDER_CAP: u64 = 1000;
/// Largest number of invariant factors handled by the brute-force searches.
pub const FORM_FACTOR_CAP: usize = 6;

/// `q` with values in `Q/2Z` and `b` with values in `Q/Z` on
/// `Z/d_1 + ... + Z/d_k`, tabulated on the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscForm {
    factors: Vec<BigInt>,
    q: Vec<BigRational>,
    b: Vec<Vec<BigRational>>,
}

pub fn mod2(x: &BigRational) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    x - &two * (x / &two).floor()
}

pub fn mod1(x: &BigRational) -> BigRational {
    x - x.floor()
}

impl DiscForm {
    /// Builds a form after checking compatibility with the group: `d_i b_ij`
    /// and `d_i^2 q_i / 2` are integers and `b_ii = q_i` in `Q/Z`.
    pub fn new(factors: Vec<BigInt>, q: Vec<BigRational>, b: Vec<Vec<BigRational>>) -> Result<Self> {
        let k = factors.len();
        if q.len() != k || b.len() != k || b.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch("form tables do not match the group".into()));
        }
        let q: Vec<BigRational> = q.iter().map(mod2).collect();
        let b: Vec<Vec<BigRational>> = b.iter().map(|r| r.iter().map(mod1).collect()).collect();
        for i in 0..k {
            if mod1(&q[i]) != b[i][i] {
                return Err(Error::Invalid("b(x,x) differs from q(x) mod 1".into()));
            }
            for j in 0..k {
                if b[i][j] != b[j][i] {
                    return Err(Error::Invalid("bilinear table is not symmetric".into()));
                }
                let d = BigRational::from_integer(factors[i].clone());
                if !(&d * &b[i][j]).is_integer() {
                    return Err(Error::Invalid("bilinear table incompatible with orders".into()));
                }
            }
            let d = BigRational::from_integer(factors[i].clone());
            if !(&d * &d * &q[i] / BigRational::from_integer(BigInt::from(2))).is_integer() {
                return Err(Error::Invalid("quadratic value incompatible with order".into()));
            }
        }
        Ok(DiscForm { factors, q, b })
    }

    pub fn trivial() -> Self {
        DiscForm {
            factors: Vec::new(),
            q: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn factors(&self) -> &[BigInt] {
        &self.factors
    }

    pub fn order(&self) -> BigInt {
        self.factors.iter().product()
    }

    pub fn q_values(&self) -> &[BigRational] {
        &self.q
    }

    pub fn b_values(&self) -> &[Vec<BigRational>] {
        &self.b
    }

    /// `q(sum c_i g_i)` in `[0, 2)`.
    pub fn q(&self, c: &[BigInt]) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..c.len() {
            if c[i].is_zero() {
                continue;
            }
            let ci = BigRational::from_integer(c[i].clone());
            acc += &ci * &ci * &self.q[i];
            for j in i + 1..c.len() {
                if c[j].is_zero() {
                    continue;
                }
                let cj = BigRational::from_integer(c[j].clone());
                acc += BigRational::from_integer(BigInt::from(2)) * &ci * cj * &self.b[i][j];
            }
        }
        mod2(&acc)
    }

    /// `b(x, y)` in `[0, 1)`.
    pub fn b(&self, x: &[BigInt], y: &[BigInt]) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..x.len() {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..y.len() {
                if y[j].is_zero() {
                    continue;
                }
                acc += BigRational::from_integer(&x[i] * &y[j]) * &self.b[i][j];
            }
        }
        mod1(&acc)
    }

    /// The same group with `q` replaced by `-q`.
    pub fn negate(&self) -> DiscForm {
        DiscForm {
            factors: self.factors.clone(),
            q: self.q.iter().map(|x| mod2(&-x)).collect(),
            b: self.b.iter().map(|r| r.iter().map(|x| mod1(&-x)).collect()).collect(),
        }
    }

    /// Coordinates reduced into `[0, d_i)`.
    pub fn reduce(&self, c: &[BigInt]) -> Vec<BigInt> {
        c.iter().zip(&self.factors).map(|(x, d)| x.mod_floor(d)).collect()
    }

    pub fn add(&self, x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
        let s: Vec<BigInt> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        self.reduce(&s)
    }

    pub fn element_order(&self, c: &[BigInt]) -> BigInt {
        c.iter()
            .zip(&self.factors)
            .fold(BigInt::one(), |acc, (x, d)| acc.lcm(&(d / x.gcd(d))))
    }

    /// The `p`-primary part, generated by `(d_i / p^a_i) g_i`.
    pub fn p_part(&self, p: u64) -> DiscForm {
        let p = BigInt::from(p);
        let mut keep: Vec<(usize, BigInt, BigInt)> = Vec::new();
        for (i, d) in self.factors.iter().enumerate() {
            let mut pa = BigInt::one();
            let mut rest = d.clone();
            while rest.is_multiple_of(&p) {
                rest /= &p;
                pa *= &p;
            }
            if !pa.is_one() {
                keep.push((i, pa, rest));
            }
        }
        let factors = keep.iter().map(|k| k.1.clone()).collect();
        let q = keep
            .iter()
            .map(|(i, _, m)| {
                let m = BigRational::from_integer(m.clone());
                mod2(&(&m * &m * &self.q[*i]))
            })
            .collect();
        let b = keep
            .iter()
            .map(|(i, _, mi)| {
                keep.iter()
                    .map(|(j, _, mj)| mod1(&(BigRational::from_integer(mi * mj) * &self.b[*i][*j])))
                    .collect()
            })
            .collect();
        DiscForm {
            factors,
            q,
            b,
        }
    }

    /// All elements in mixed-radix order (last coordinate fastest).
    pub fn elements(&self) -> Result<Vec<Vec<BigInt>>> {
        self.check_cap()?;
        let mut out = vec![Vec::new()];
        for d in &self.factors {
            let mut next = Vec::new();
            for e in &out {
                let mut x = BigInt::zero();
                while &x < d {
                    let mut v: Vec<BigInt> = e.clone();
                    v.push(x.clone());
                    next.push(v);
                    x += 1;
                }
            }
            out = next;
        }
        Ok(out)
    }

    fn check_cap(&self) -> Result<()> {
        let order = self.order();
        if order > BigInt::from(FORM_ORDER_CAP) || self.factors.len() > FORM_FACTOR_CAP {
            return Err(Error::CapExceeded {
                what: "discriminant group",
                size: format!("order {order}, {} factors", self.factors.len()),
                cap: FORM_ORDER_CAP,
            });
        }
        Ok(())
    }

    /// Subgroup generated by `gens`, as a list of elements.
    pub fn span(&self, gens: &[Vec<BigInt>]) -> HashSet<Vec<BigInt>> {
        let zero = vec![BigInt::zero(); self.factors.len()];
        let mut seen = HashSet::from([zero.clone()]);
        let mut queue = VecDeque::from([zero]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// Invariant factors and Smith generators of the subgroup generated by
    /// `gens`, together with the restricted form.
    pub fn subgroup(&self, gens: &[Vec<BigInt>]) -> Result<(DiscForm, Vec<Vec<BigInt>>)> {
        let (factors, basis) = subgroup_structure(&self.factors, gens)?;
        let q = basis.iter().map(|c| self.q(c)).collect();
        let b = basis
            .iter()
            .map(|x| basis.iter().map(|y| self.b(x, y)).collect())
            .collect();
        Ok((DiscForm { factors, q, b }, basis))
    }
}

/// Invariant factors (all `> 1`) and generators of the subgroup of
/// `Z/d_1 + ... + Z/d_k` generated by `gens`.
pub fn subgroup_structure(
    factors: &[BigInt],
    gens: &[Vec<BigInt>],
) -> Result<(Vec<BigInt>, Vec<Vec<BigInt>>)> {
    let k = factors.len();
    if k == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    // preimage lattice P in Z^k
    let mut rows: Vec<Vec<BigInt>> = gens.iter().map(|g| g.to_vec()).collect();
    for (i, d) in factors.iter().enumerate() {
        let mut r = vec![BigInt::zero(); k];
        r[i] = d.clone();
        rows.push(r);
    }
    let bp = linalg::row_basis(&IntMatrix::try_from_rows(&rows)?);
    let diag = IntMatrix::from_diagonal(factors);
    // diag = X * B_P
    let x = diag
        .to_rational()
        .checked_mul(&bp.to_rational().inverse()?)?
        .to_integer()
        .ok_or_else(|| Error::Invalid("subgroup lattice does not contain the relations".into()))?;
    let (s, _, v) = linalg::snf(&x);
    let vinv = v
        .to_rational()
        .inverse()?
        .to_integer()
        .expect("unimodular inverse is integral");
    let c = &vinv * &bp;
    let mut out_f = Vec::new();
    let mut out_g = Vec::new();
    for i in 0..k {
        let d = s.get(i, i).clone();
        if d.is_one() {
            continue;
        }
        out_f.push(d);
        out_g.push(
            c.row(i)
                .iter()
                .zip(factors)
                .map(|(x, d)| x.mod_floor(d))
                .collect(),
        );
    }
    Ok((out_f, out_g))
}

/// Discriminant form of an even lattice in Smith coordinates.
pub fn disc_form(l: &Lattice) -> Result<DiscForm> {
    if !l.is_even() {
        return Err(Error::OddLattice);
    }
    let dg = l.discriminant_group();
    let k = dg.factors.len();
    let gens: Vec<Vec<BigRational>> = (0..k).map(|i| dg.generators.row(i).to_vec()).collect();
    let q = gens.iter().map(|x| mod2(&l.inner_rational(x, x))).collect();
    let b = gens
        .iter()
        .map(|x| gens.iter().map(|y| mod1(&l.inner_rational(x, y))).collect())
        .collect();
    Ok(DiscForm {
        factors: dg.factors,
        q,
        b,
    })
}

/// A homomorphism between discriminant groups: column `i` holds the image of
/// generator `i`, reduced modulo the target invariant factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormIsometry {
    matrix: IntMatrix,
    target: Vec<BigInt>,
}

impl FormIsometry {
    pub fn from_images(images: &[Vec<BigInt>], target: &[BigInt]) -> Self {
        let rows = target.len();
        let cols = images.len();
        let mut m = IntMatrix::zeros(rows, cols);
        for (j, img) in images.iter().enumerate() {
            for i in 0..rows {
                m.set(i, j, img[i].mod_floor(&target[i]));
            }
        }
        FormIsometry {
            matrix: m,
            target: target.to_vec(),
        }
    }

    pub fn identity(factors: &[BigInt]) -> Self {
        let images: Vec<Vec<BigInt>> = (0..factors.len())
            .map(|i| {
                let mut e = vec![BigInt::zero(); factors.len()];
                e[i] = BigInt::one();
                e
            })
            .collect();
        Self::from_images(&images, factors)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn image_of_generator(&self, i: usize) -> Vec<BigInt> {
        self.matrix.column(i)
    }

    pub fn apply(&self, c: &[BigInt]) -> Vec<BigInt> {
        self.matrix
            .mul_vec(c)
            .iter()
            .zip(&self.target)
            .map(|(x, d)| x.mod_floor(d))
            .collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FormIsometry) -> FormIsometry {
        let images: Vec<Vec<BigInt>> = (0..other.matrix.cols())
            .map(|j| self.apply(&other.image_of_generator(j)))
            .collect();
        Self::from_images(&images, &self.target)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(&self.target)
    }
}

/// Action of an isometry of `L` on `L^v / L`.
pub fn induced_form_isometry(l: &Lattice, g: &IntMatrix) -> Result<FormIsometry> {
    if !l.is_isometry(g) {
        return Err(Error::NotIsometry);
    }
    let dg = l.discriminant_group();
    let gq = g.to_rational();
    let mut images = Vec::with_capacity(dg.factors.len());
    for i in 0..dg.factors.len() {
        let x = dg.generators.row(i);
        let y: Vec<BigRational> = (0..l.rank())
            .map(|r| {
                (0..l.rank()).fold(BigRational::zero(), |acc, c| acc + gq.get(r, c) * &x[c])
            })
            .collect();
        images.push(dg.coords(&y)?);
    }
    Ok(FormIsometry::from_images(&images, &dg.factors))
}

/// Machine-word tables of a form: values scaled by a common denominator.
struct Table {
    factors: Vec<i64>,
    /// `N q_i` modulo `2N`
    q: Vec<i128>,
    /// `N b_ij` modulo `N`
    b: Vec<Vec<i128>>,
    n: i128,
}

impl Table {
    fn new(f: &DiscForm, n: &BigInt) -> Result<Self> {
        let big = |x: &BigRational| -> Result<i128> {
            let y = x * BigRational::from_integer(n.clone());
            debug_assert!(y.is_integer());
            y.to_integer()
                .to_i128()
                .ok_or_else(|| Error::Unsupported("form denominators too large".into()))
        };
        Ok(Table {
            factors: f
                .factors
                .iter()
                .map(|d| d.to_i64().ok_or_else(|| Error::Unsupported("factor too large".into())))
                .collect::<Result<_>>()?,
            q: f.q.iter().map(big).collect::<Result<_>>()?,
            b: f.b.iter().map(|r| r.iter().map(big).collect::<Result<_>>()).collect::<Result<_>>()?,
            n: n.to_i128().ok_or_else(|| Error::Unsupported("form denominators too large".into()))?,
        })
    }

    fn q(&self, c: &[i64]) -> i128 {
        let mut acc = 0i128;
        for i in 0..c.len() {
            let ci = c[i] as i128;
            acc += ci * ci * self.q[i];
            for j in i + 1..c.len() {
                acc += 2 * ci * (c[j] as i128) * self.b[i][j];
            }
        }
        acc.rem_euclid(2 * self.n)
    }

    fn b(&self, x: &[i64], y: &[i64]) -> i128 {
        let mut acc = 0i128;
        for i in 0..x.len() {
            for j in 0..y.len() {
                acc += (x[i] as i128) * (y[j] as i128) * self.b[i][j];
            }
        }
        acc.rem_euclid(self.n)
    }

    fn order(&self, c: &[i64]) -> i64 {
        c.iter()
            .zip(&self.factors)
            .fold(1i64, |acc, (x, d)| acc.lcm(&(d / x.gcd(d))))
    }

    fn elements(&self) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for &d in &self.factors {
            out = out
                .into_iter()
                .flat_map(|e: Vec<i64>| {
                    (0..d).map(move |x| {
                        let mut v = e.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

fn common_denominator(forms: &[&DiscForm]) -> BigInt {
    let mut n = BigInt::one();
    for f in forms {
        for x in f.q.iter().chain(f.b.iter().flatten()) {
            n = n.lcm(x.denom());
        }
    }
    n
}

/// All group isomorphisms `phi: d1 -> d2` with `q2(phi x) = sign * q1(x)`.
/// Stops after `limit` maps when given.
fn form_maps(d1: &DiscForm, d2: &DiscForm, sign: i128, limit: Option<usize>) -> Result<Vec<FormIsometry>> {
    d1.check_cap()?;
    d2.check_cap()?;
    if d1.order() != d2.order() {
        return Ok(Vec::new());
    }
    let n = common_denominator(&[d1, d2]);
    let t1 = Table::new(d1, &n)?;
    let t2 = Table::new(d2, &n)?;
    let k = t1.factors.len();
    let elems2 = t2.elements();
    let q2: Vec<i128> = elems2.iter().map(|e| t2.q(e)).collect();
    let ord2: Vec<i64> = elems2.iter().map(|e| t2.order(e)).collect();
    let cands: Vec<Vec<usize>> = (0..k)
        .map(|i| {
            let want = (sign * t1.q[i]).rem_euclid(2 * t1.n);
            (0..elems2.len())
                .filter(|&e| ord2[e] == t1.factors[i] && q2[e] == want)
                .collect()
        })
        .collect();
    let elems1 = t1.elements();

    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    search(&t1, &t2, &elems1, &elems2, &cands, sign, &mut chosen, &mut out, limit);
    Ok(out
        .into_iter()
        .map(|imgs: Vec<usize>| {
            let images: Vec<Vec<BigInt>> = imgs
                .iter()
                .map(|&e| elems2[e].iter().map(|&x| BigInt::from(x)).collect())
                .collect();
            FormIsometry::from_images(&images, &d2.factors)
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn search(
    t1: &Table,
    t2: &Table,
    elems1: &[Vec<i64>],
    elems2: &[Vec<i64>],
    cands: &[Vec<usize>],
    sign: i128,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: Option<usize>,
) -> bool {
    let level = chosen.len();
    if level == cands.len() {
        if injective(t2, elems1, elems2, chosen) {
            out.push(chosen.clone());
            if limit.is_some_and(|l| out.len() >= l) {
                return true;
            }
        }
        return false;
    }
    for &y in &cands[level] {
        let ok = (0..level).all(|j| {
            t2.b(&elems2[y], &elems2[chosen[j]]) == (sign * t1.b[level][j]).rem_euclid(t1.n)
        });
        if !ok {
            continue;
        }
        chosen.push(y);
        if search(t1, t2, elems1, elems2, cands, sign, chosen, out, limit) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn injective(t2: &Table, elems1: &[Vec<i64>], elems2: &[Vec<i64>], images: &[usize]) -> bool {
    let mut seen = HashSet::with_capacity(elems1.len());
    for c in elems1 {
        let mut y = vec![0i64; t2.factors.len()];
        for (i, ci) in c.iter().enumerate() {
            for (r, yr) in y.iter_mut().enumerate() {
                *yr += ci * elems2[images[i]][r];
            }
        }
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = yr.rem_euclid(t2.factors[r]);
        }
        if !seen.insert(y) {
            return false;
        }
    }
    true
}

/// `O(q)`: all automorphisms of the group preserving `q`.
pub fn orthogonal_group_of_form(d: &DiscForm) -> Result<Vec<FormIsometry>> {
    form_maps(d, d, 1, None)
}

/// All isomorphisms `phi` with `q2 ∘ phi = -q1`.
pub fn anti_isometries(d1: &DiscForm, d2: &DiscForm) -> Result<Vec<FormIsometry>> {
    form_maps(d1, d2, -1, None)
}

/// Some isometry `d1 -> d2`, if the forms are isomorphic.
pub fn find_form_isometry(d1: &DiscForm, d2: &DiscForm) -> Result<Option<FormIsometry>> {
    Ok(form_maps(d1, d2, 1, Some(1))?.pop())
}

/// Some anti-isometry `d1 -> d2`.
pub fn find_anti_isometry(d1: &DiscForm, d2: &DiscForm) -> Result<Option<FormIsometry>> {
    Ok(form_maps(d1, d2, -1, Some(1))?.pop())
}

/// Sorted multiset of `q`-values, a cheap isomorphism invariant.
pub fn q_value_profile(d: &DiscForm) -> Result<Vec<BigRational>> {
    let mut v: Vec<BigRational> = d.elements()?.iter().map(|c| d.q(c)).collect();
    v.sort();
    Ok(v)
}

/// `true` when the map sends `q1` to `sign * q2` on generators and pairs,
/// which makes it compatible with the whole form.
pub fn preserves_form(f: &FormIsometry, d1: &DiscForm, d2: &DiscForm, sign: i64) -> bool {
    let s = BigRational::from_integer(BigInt::from(sign));
    let k = d1.factors.len();
    let imgs: Vec<Vec<BigInt>> = (0..k).map(|i| f.image_of_generator(i)).collect();
    (0..k).all(|i| {
        d2.q(&imgs[i]) == mod2(&(&s * &d1.q[i]))
            && (0..k).all(|j| d2.b(&imgs[i], &imgs[j]) == mod1(&(&s * &d1.b[i][j])))
    }) && imgs
        .iter()
        .zip(&d1.factors)
        .all(|(y, d)| d2.reduce(&y.iter().map(|x| x * d).collect::<Vec<_>>()).iter().all(Zero::is_zero))
}

impl std::fmt::Display for DiscForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z/{d}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}
