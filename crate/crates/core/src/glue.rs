//! Primitive extensions `L1 ⊕ L2 ⊆ M` described by glue maps between
//! discriminant groups, and extension of isometries across them.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::aut::{automorphism_group, ELEMENT_CAP};
use crate::discform::{disc_form, find_anti_isometry, induced_form_isometry, orthogonal_group_of_form, FormIsometry};
use crate::error::{Error, Result};
use crate::lattice::{JsonInt, Lattice, LatticeFile, Sublattice};
use crate::linalg::{self, IntMatrix, RatMatrix};

/// A homomorphism from a subgroup of `D(L1)` to `D(L2)`, given on
/// generators: `domain[i] ↦ images[i]`, both in Smith coordinates of the
/// respective discriminant groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueMap {
    pub domain: Vec<Vec<BigInt>>,
    pub images: Vec<Vec<BigInt>>,
}

type Pair = (Vec<BigInt>, Vec<BigInt>);

fn reduce(c: &[BigInt], d: &[BigInt]) -> Vec<BigInt> {
    c.iter().zip(d).map(|(x, m)| x.mod_floor(m)).collect()
}

impl GlueMap {
    pub fn trivial() -> Self {
        GlueMap {
            domain: Vec::new(),
            images: Vec::new(),
        }
    }

    pub fn new(domain: Vec<Vec<BigInt>>, images: Vec<Vec<BigInt>>) -> Result<Self> {
        if domain.len() != images.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} glue generators but {} images",
                domain.len(),
                images.len()
            )));
        }
        Ok(GlueMap { domain, images })
    }

    /// All pairs `(x, φ(x))` of the graph, in breadth-first order from zero.
    pub fn graph(&self, d1: &[BigInt], d2: &[BigInt]) -> Result<Vec<Pair>> {
        for (x, y) in self.domain.iter().zip(&self.images) {
            if x.len() != d1.len() || y.len() != d2.len() {
                return Err(Error::DimensionMismatch("glue coordinates do not match the discriminant groups".into()));
            }
        }
        let gens: Vec<Pair> = self
            .domain
            .iter()
            .zip(&self.images)
            .map(|(x, y)| (reduce(x, d1), reduce(y, d2)))
            .collect();
        let zero: Pair = (vec![BigInt::zero(); d1.len()], vec![BigInt::zero(); d2.len()]);
        let mut seen: HashSet<Pair> = HashSet::from([zero.clone()]);
        let mut out = vec![zero.clone()];
        let mut queue = VecDeque::from([zero]);
        while let Some((a, b)) = queue.pop_front() {
            for (x, y) in &gens {
                let s: Vec<BigInt> = a.iter().zip(x).map(|(u, v)| u + v).collect();
                let t: Vec<BigInt> = b.iter().zip(y).map(|(u, v)| u + v).collect();
                let p = (reduce(&s, d1), reduce(&t, d2));
                if seen.insert(p.clone()) {
                    if out.len() as u64 >= ELEMENT_CAP {
                        return Err(Error::CapExceeded {
                            what: "glue graph",
                            size: format!(">{}", ELEMENT_CAP),
                            cap: ELEMENT_CAP,
                        });
                    }
                    out.push(p.clone());
                    queue.push_back(p);
                }
            }
        }
        Ok(out)
    }

    /// Order of the glue subgroup.
    pub fn order(&self, d1: &[BigInt], d2: &[BigInt]) -> Result<usize> {
        Ok(self.graph(d1, d2)?.len())
    }

    /// Equality of graphs.
    pub fn same_graph(&self, other: &GlueMap, d1: &[BigInt], d2: &[BigInt]) -> Result<bool> {
        let a: HashSet<Pair> = self.graph(d1, d2)?.into_iter().collect();
        let b: HashSet<Pair> = other.graph(d1, d2)?.into_iter().collect();
        Ok(a == b)
    }

    /// Graph of a full anti-isometry `D(L1) → D(L2)` given as a form map.
    pub fn from_form_map(f: &FormIsometry, d1: &[BigInt]) -> Self {
        let domain = (0..d1.len())
            .map(|i| {
                let mut e = vec![BigInt::zero(); d1.len()];
                e[i] = BigInt::one();
                e
            })
            .collect();
        let images = (0..d1.len()).map(|i| f.image_of_generator(i)).collect();
        GlueMap { domain, images }
    }
}

/// `M ⊇ L1 ⊕ L2` together with its basis in `L1 ⊕ L2` coordinates.
#[derive(Clone, Debug)]
pub struct PrimitiveExtension {
    l1: Lattice,
    l2: Lattice,
    glue: GlueMap,
    /// rows: basis of `M` in the rational coordinates of `L1 ⊕ L2`
    basis: RatMatrix,
    m: Lattice,
    index: BigInt,
}

impl PrimitiveExtension {
    pub fn l1(&self) -> &Lattice {
        &self.l1
    }

    pub fn l2(&self) -> &Lattice {
        &self.l2
    }

    pub fn glue(&self) -> &GlueMap {
        &self.glue
    }

    pub fn lattice(&self) -> &Lattice {
        &self.m
    }

    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    /// `[M : L1 ⊕ L2]`.
    pub fn index(&self) -> &BigInt {
        &self.index
    }

    /// Rows of `B^-1`: the basis of `L1 ⊕ L2` in `M`-coordinates.
    fn inverse_rows(&self) -> IntMatrix {
        self.basis
            .inverse()
            .expect("extension basis is invertible")
            .to_integer()
            .expect("L1 ⊕ L2 lies in M")
    }

    /// Basis of `L1` as a sublattice of `M`.
    pub fn embedding1(&self) -> Sublattice {
        let rows: Vec<usize> = (0..self.l1.rank()).collect();
        Sublattice::new(self.m.clone(), self.inverse_rows().select_rows(&rows)).expect("independent rows")
    }

    /// Basis of `L2` as a sublattice of `M`.
    pub fn embedding2(&self) -> Sublattice {
        let n1 = self.l1.rank();
        let rows: Vec<usize> = (n1..n1 + self.l2.rank()).collect();
        Sublattice::new(self.m.clone(), self.inverse_rows().select_rows(&rows)).expect("independent rows")
    }

    /// `f ⊕ g` written in the basis of `M`, if it is integral there.
    pub fn to_m_coordinates(&self, f: &IntMatrix, g: &IntMatrix) -> Option<IntMatrix> {
        let fg = IntMatrix::block_diagonal(f, g).to_rational();
        let bt = self.basis.transpose();
        let bt_inv = bt.inverse().ok()?;
        bt_inv.checked_mul(&fg).ok()?.checked_mul(&bt).ok()?.to_integer()
    }
}

fn concat(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    a.iter().chain(b).cloned().collect()
}

/// The overlattice of `L1 ⊕ L2` generated by the lifts `x ⊕ φ(x)`, using the
/// reduced lifts `0 <= c_i < d_i` in Smith coordinates.
pub fn build_extension(l1: &Lattice, l2: &Lattice, glue: &GlueMap) -> Result<PrimitiveExtension> {
    let dg1 = l1.discriminant_group();
    let dg2 = l2.discriminant_group();
    let graph = glue.graph(&dg1.factors, &dg2.factors)?;

    // graph of an injective map with injective inverse
    let mut firsts = HashSet::new();
    let mut seconds = HashSet::new();
    for (x, y) in &graph {
        if !firsts.insert(x.clone()) || !seconds.insert(y.clone()) {
            return Err(Error::NotAntiIsometry);
        }
    }

    let sum = l1.direct_sum(l2);
    let lifts: Vec<Vec<BigRational>> = glue
        .domain
        .iter()
        .zip(&glue.images)
        .map(|(x, y)| concat(&dg1.lift(x), &dg2.lift(y)))
        .collect();
    if l1.is_even() && l2.is_even() {
        for (x, y) in &graph {
            let v = concat(&dg1.lift(x), &dg2.lift(y));
            let norm = sum.inner_rational(&v, &v);
            if !norm.is_integer() || norm.to_integer().is_odd() {
                return Err(Error::NotAntiIsometry);
            }
        }
    }
    for a in &lifts {
        for b in &lifts {
            if !sum.inner_rational(a, b).is_integer() {
                return Err(Error::NotAntiIsometry);
            }
        }
    }

    let n = sum.rank();
    let mut rows: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigRational::from_integer(BigInt::from((i == j) as i32)))
                .collect()
        })
        .collect();
    rows.extend(lifts);
    let stacked = RatMatrix::from_rows(rows)?;
    let den = stacked.common_denominator();
    let (h, _) = linalg::hnf(&stacked.scaled_to_integer(&den));
    let top: Vec<usize> = (0..n).collect();
    let hb = h.select_rows(&top);
    let dq = BigRational::from_integer(den.clone());
    let basis = RatMatrix::from_rows(
        (0..n)
            .map(|i| hb.row(i).iter().map(|x| BigRational::from_integer(x.clone()) / &dq).collect())
            .collect(),
    )?;

    let gram_q = basis.mul_int(sum.gram()).checked_mul(&basis.transpose())?;
    let gram = gram_q.to_integer().ok_or(Error::NonIntegral)?;
    let m = Lattice::new(gram)?;
    if l1.is_even() && l2.is_even() && !m.is_even() {
        return Err(Error::NotAntiIsometry);
    }
    let index = (BigRational::one() / basis.det()?).abs();
    if !index.is_integer() {
        return Err(Error::NonIntegral);
    }
    Ok(PrimitiveExtension {
        l1: l1.clone(),
        l2: l2.clone(),
        glue: glue.clone(),
        basis,
        m,
        index: index.to_integer(),
    })
}

/// The orthogonal complement `K` of a primitive `S ⊆ M` and the glue map
/// between `D(S)` and `D(K)` whose graph is `M / (S ⊕ K)`.
pub fn glue_map_of(s: &Sublattice) -> Result<(Sublattice, GlueMap)> {
    let k = s.orthogonal_complement();
    let glue = glue_map_with(s, &k)?;
    Ok((k, glue))
}

/// Glue map of `M / (S ⊕ K)` for a primitive `S` and a given basis of its
/// orthogonal complement `K`.
pub fn glue_map_with(s: &Sublattice, k: &Sublattice) -> Result<GlueMap> {
    if !s.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let m = s.ambient();
    if k.ambient().gram() != m.gram() {
        return Err(Error::Invalid("sublattices live in different lattices".into()));
    }
    if s.rank() + k.rank() != m.rank() {
        return Err(Error::RankMismatch(s.rank() + k.rank(), m.rank()));
    }
    let cross = &(s.basis() * m.gram()) * &k.basis().transpose();
    if !cross.is_zero() {
        return Err(Error::Invalid("complement is not orthogonal".into()));
    }
    let ls = s.lattice()?;
    let lk = k.lattice()?;
    let dg_s = ls.discriminant_group();
    let dg_k = lk.discriminant_group();
    // e_j = sum_i c_ji p_i for the stacked basis P = [B_S; B_K]
    let p = s.basis().vstack(k.basis())?;
    let c = p.to_rational().inverse()?;
    let r = s.rank();
    let mut domain = Vec::new();
    let mut images = Vec::new();
    let mut seen = HashSet::new();
    for j in 0..m.rank() {
        let row = c.row(j);
        let x = dg_s.coords(&row[..r])?;
        let y = dg_k.coords(&row[r..])?;
        if x.iter().all(Zero::is_zero) && y.iter().all(Zero::is_zero) {
            continue;
        }
        if seen.insert((x.clone(), y.clone())) {
            domain.push(x);
            images.push(y);
        }
    }
    Ok(GlueMap { domain, images })
}

/// Isometries of `L2` to try when extending: `O(L2)` for definite lattices
/// and a bounded box search for indefinite binary lattices.
fn candidate_isometries(l2: &Lattice) -> Result<Vec<IntMatrix>> {
    if l2.rank() == 0 || l2.is_definite() {
        return Ok(automorphism_group(l2)?.elements()?.to_vec());
    }
    if l2.rank() != 2 {
        return Err(Error::Unsupported("extension needs a definite or binary second summand".into()));
    }
    const BOX: i64 = 6;
    let mut out = Vec::new();
    for a in -BOX..=BOX {
        for b in -BOX..=BOX {
            for c in -BOX..=BOX {
                for d in -BOX..=BOX {
                    if a * d - b * c != 1 && a * d - b * c != -1 {
                        continue;
                    }
                    let g = IntMatrix::from_rows(&[vec![a, b], vec![c, d]]);
                    if l2.is_isometry(&g) {
                        out.push(g);
                    }
                }
            }
        }
    }
    // identity first, then the rest in search order
    let id = IntMatrix::identity(2);
    out.sort_by_key(|g| *g != id);
    Ok(out)
}

/// An isometry of `M` restricting to `f` on `L1` and to some isometry of `L2`
/// on `L2`, in `M`-coordinates.
pub fn extend_isometry(e: &PrimitiveExtension, f: &IntMatrix) -> Result<Option<IntMatrix>> {
    if !e.l1.is_isometry(f) {
        return Err(Error::NotIsometry);
    }
    for g in candidate_isometries(&e.l2)? {
        if let Some(h) = e.to_m_coordinates(f, &g) {
            debug_assert!(e.m.is_isometry(&h));
            return Ok(Some(h));
        }
    }
    Ok(None)
}

/// Coinvariant-side input: a negative definite lattice `K` and optional glue
/// vectors of the overlattice `H ⊕ K ⊆ Λ`, each given in the rational
/// coordinates of `H ⊕ K` as `[numerator, denominator]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoinvariantFile {
    #[serde(default)]
    pub label: Option<String>,
    pub gram: Vec<Vec<JsonInt>>,
    #[serde(default)]
    pub glue_generators: Vec<Vec<[JsonInt; 2]>>,
}

#[derive(Clone, Debug)]
pub struct CoinvariantData {
    pub lattice: Lattice,
    pub glue_generators: Vec<Vec<BigRational>>,
}

impl CoinvariantData {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: CoinvariantFile = serde_json::from_str(s)?;
        let lattice = LatticeFile {
            label: file.label,
            gram: file.gram,
        }
        .into_lattice()?;
        let mut glue_generators = Vec::new();
        for v in file.glue_generators {
            let mut row = Vec::with_capacity(v.len());
            for [n, d] in v {
                if d.0.is_zero() {
                    return Err(Error::Invalid("zero denominator in glue generator".into()));
                }
                row.push(BigRational::new(n.0, d.0));
            }
            glue_generators.push(row);
        }
        Ok(CoinvariantData {
            lattice,
            glue_generators,
        })
    }
}

/// Outcome of checking a gluing `H ⊕ K ⊆ Λ` against an isometry of `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionReport {
    Skipped(String),
    Checked(ExtensionCheck),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionCheck {
    /// `#O(K)`
    pub aut_order: BigInt,
    /// `#O(q_K)`
    pub form_group_order: usize,
    /// size of the image of `O(K) → O(q_K)`
    pub image_order: usize,
    pub surjective: bool,
    /// kernel of `O(K) → O(q_K)`
    pub kernel_order: BigInt,
    /// vectors of square `-2` in `K` (up to sign)
    pub roots: usize,
    /// isometries `k` of `K` with `f ⊕ k` extending; equals the kernel order
    /// when the extension exists
    pub extension_count: usize,
    /// one extension `g ⊕ k` in the basis of the overlattice
    pub extension: Option<IntMatrix>,
    pub overlattice: Lattice,
}

/// Checks the coinvariant data `K` against `H` and extends `g ∈ O(H)` to the
/// overlattice. Without data the check is skipped.
pub fn unique_extension_check(h: &Lattice, data: Option<&CoinvariantData>, g: &IntMatrix) -> Result<ExtensionReport> {
    let Some(data) = data else {
        return Ok(ExtensionReport::Skipped("skipped: external data required".into()));
    };
    let k = &data.lattice;
    if !k.is_negative_definite() {
        return Err(Error::Invalid("coinvariant lattice is not negative definite".into()));
    }
    if k.det().abs() != h.det().abs() {
        return Err(Error::Invalid(format!(
            "coinvariant determinant {} does not match {}",
            k.det(),
            h.det()
        )));
    }
    if !h.is_isometry(g) {
        return Err(Error::NotIsometry);
    }
    let qh = disc_form(h)?;
    let qk = disc_form(k)?;
    let glue = if data.glue_generators.is_empty() {
        let phi = find_anti_isometry(&qh, &qk)?
            .ok_or_else(|| Error::Invalid("coinvariant discriminant form is not -q_H".into()))?;
        GlueMap::from_form_map(&phi, qh.factors())
    } else {
        let dg_h = h.discriminant_group();
        let dg_k = k.discriminant_group();
        let r = h.rank();
        let mut domain = Vec::new();
        let mut images = Vec::new();
        for v in &data.glue_generators {
            if v.len() != r + k.rank() {
                return Err(Error::DimensionMismatch("glue generator length".into()));
            }
            domain.push(dg_h.coords(&v[..r])?);
            images.push(dg_k.coords(&v[r..])?);
        }
        GlueMap { domain, images }
    };
    let e = build_extension(h, k, &glue).map_err(|err| match err {
        Error::NotAntiIsometry => Error::Invalid("coinvariant discriminant form is not -q_H".into()),
        other => other,
    })?;
    if BigInt::from(glue.order(qh.factors(), qk.factors())?) != qh.order() {
        return Err(Error::Invalid("glue does not identify the full discriminant groups".into()));
    }

    let ok = automorphism_group(k)?;
    let form_group = orthogonal_group_of_form(&qk)?;
    let mut image = HashSet::new();
    for a in ok.elements()? {
        image.insert(induced_form_isometry(k, a)?);
    }
    let kernel_order = ok.order() / BigInt::from(image.len());
    let roots = crate::aut::short_vectors(&k.scaled(-1)?, &BigInt::from(2))?.len();

    let mut extension = None;
    let mut extension_count = 0;
    for a in ok.elements()? {
        if let Some(x) = e.to_m_coordinates(g, a) {
            extension_count += 1;
            if extension.is_none() {
                extension = Some(x);
            }
        }
    }
    Ok(ExtensionReport::Checked(ExtensionCheck {
        aut_order: ok.order().clone(),
        form_group_order: form_group.len(),
        image_order: image.len(),
        surjective: image.len() == form_group.len(),
        kernel_order,
        roots,
        extension_count,
        extension,
        overlattice: e.m.clone(),
    }))
}
