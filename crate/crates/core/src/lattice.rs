//! Integral lattices given by Gram matrices, their sublattices, duals and
//! discriminant groups.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix, RatMatrix};

/// A nondegenerate integral lattice. The Gram matrix is symmetric with
/// nonzero determinant; signature, determinant and parity are cached.
#[derive(Clone, Debug)]
pub struct Lattice {
    gram: IntMatrix,
    label: Option<String>,
    det: BigInt,
    signature: (usize, usize),
    even: bool,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram
    }
}

impl Eq for Lattice {}

impl Lattice {
    pub fn new(gram: IntMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::NotSquare {
                rows: gram.rows(),
                cols: gram.cols(),
            });
        }
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let det = linalg::det(&gram)?;
        if det.is_zero() {
            return Err(Error::Degenerate);
        }
        let signature = inertia(&gram);
        let even = (0..gram.rows()).all(|i| gram.get(i, i).is_even());
        Ok(Lattice {
            gram,
            label: None,
            det,
            signature,
            even,
        })
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(IntMatrix::try_from_rows(rows)?)
    }

    /// The rank-0 lattice.
    pub fn empty() -> Self {
        Lattice {
            gram: IntMatrix::zeros(0, 0),
            label: None,
            det: BigInt::one(),
            signature: (0, 0),
            even: true,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature.1 == 0
    }

    pub fn is_negative_definite(&self) -> bool {
        self.signature.0 == 0
    }

    pub fn is_definite(&self) -> bool {
        self.is_positive_definite() || self.is_negative_definite()
    }

    /// `L(k)`: the Gram matrix multiplied by `k`.
    pub fn scaled(&self, k: i64) -> Result<Self> {
        let mut l = Self::new(self.gram.scale(&BigInt::from(k)))?;
        l.label = self.label.clone();
        Ok(l)
    }

    /// Inner product of two coordinate vectors.
    pub fn inner(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        linalg::dot(x, &self.gram.mul_vec(y))
    }

    pub fn norm(&self, x: &[BigInt]) -> BigInt {
        self.inner(x, x)
    }

    /// Inner product of rational coordinate vectors.
    pub fn inner_rational(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        let n = self.rank();
        let mut acc = BigRational::zero();
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            let mut row = BigRational::zero();
            for j in 0..n {
                if !y[j].is_zero() {
                    row += &y[j] * BigRational::from_integer(self.gram.get(i, j).clone());
                }
            }
            acc += &x[i] * row;
        }
        acc
    }

    /// `g^T G g == G`.
    pub fn is_isometry(&self, g: &IntMatrix) -> bool {
        g.rows() == self.rank()
            && g.cols() == self.rank()
            && (&(&g.transpose() * &self.gram) * g) == self.gram
    }

    /// Invariant factors and generators of `L^v / L`.
    pub fn discriminant_group(&self) -> DiscriminantGroup {
        let (s, u, v) = linalg::snf(&self.gram);
        let n = self.rank();
        let sel: Vec<usize> = (0..n).filter(|&i| !s.get(i, i).is_one()).collect();
        let factors: Vec<BigInt> = sel.iter().map(|&i| s.get(i, i).clone()).collect();
        let mut gens = Vec::with_capacity(sel.len());
        for (&i, d) in sel.iter().zip(&factors) {
            gens.push(
                (0..n)
                    .map(|r| BigRational::new(v.get(r, i).clone(), d.clone()))
                    .collect(),
            );
        }
        let generators = if sel.is_empty() {
            RatMatrix::zeros(0, n)
        } else {
            RatMatrix::from_rows(gens).expect("rectangular")
        };
        let reduce = &u.select_rows(&sel) * &self.gram;
        DiscriminantGroup {
            factors,
            generators,
            reduce,
        }
    }

    /// Block-diagonal sum `L1 ⊕ L2`.
    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        Lattice {
            gram: IntMatrix::block_diagonal(&self.gram, &other.gram),
            label: None,
            det: &self.det * &other.det,
            signature: (
                self.signature.0 + other.signature.0,
                self.signature.1 + other.signature.1,
            ),
            even: self.even && other.even,
        }
    }

    /// The whole lattice as a sublattice of itself.
    pub fn as_sublattice(&self) -> Sublattice {
        Sublattice {
            ambient: self.clone(),
            basis: IntMatrix::identity(self.rank()),
        }
    }

    pub fn sublattice(&self, basis: IntMatrix) -> Result<Sublattice> {
        Sublattice::new(self.clone(), basis)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: LatticeFile = serde_json::from_str(s)?;
        file.into_lattice()
    }

    pub fn to_file(&self) -> LatticeFile {
        LatticeFile {
            label: self.label.clone(),
            gram: self
                .gram
                .to_nested()
                .into_iter()
                .map(|r| r.into_iter().map(|x| JsonInt(x)).collect())
                .collect(),
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gram)
    }
}

/// Counts of positive and negative squares after rational congruence
/// diagonalization.
fn inertia(gram: &IntMatrix) -> (usize, usize) {
    let d = rational_diagonal(gram);
    let plus = d.iter().filter(|x| x.is_positive()).count();
    let minus = d.iter().filter(|x| x.is_negative()).count();
    (plus, minus)
}

/// Diagonal of a symmetric congruence diagonalization over Q.
pub fn rational_diagonal(gram: &IntMatrix) -> Vec<BigRational> {
    let n = gram.rows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            gram.row(i)
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // e_k <- e_k + e_j makes the pivot 2 a_kj != 0
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] += v;
                }
            }
        }
        let p = a[k][k].clone();
        out.push(p.clone());
        if p.is_zero() {
            continue;
        }
        // Schur complement on the trailing block
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for j in k + 1..n {
                let d = &f * &a[k][j];
                a[i][j] -= d;
            }
        }
    }
    out
}

/// `L^v / L` in Smith coordinates.
///
/// Generator `i` is the rational vector `generators.row(i)` (coordinates in
/// the lattice basis) and has order `factors[i]`.
#[derive(Clone, Debug)]
pub struct DiscriminantGroup {
    pub factors: Vec<BigInt>,
    pub generators: RatMatrix,
    reduce: IntMatrix,
}

impl DiscriminantGroup {
    pub fn order(&self) -> BigInt {
        self.factors.iter().product()
    }

    /// Smith coordinates of a dual vector, each reduced into `[0, d_i)`.
    pub fn coords(&self, x: &[BigRational]) -> Result<Vec<BigInt>> {
        let mut out = Vec::with_capacity(self.factors.len());
        for (i, d) in self.factors.iter().enumerate() {
            let mut acc = BigRational::zero();
            for (j, xj) in x.iter().enumerate() {
                if !xj.is_zero() {
                    acc += xj * BigRational::from_integer(self.reduce.get(i, j).clone());
                }
            }
            if !acc.is_integer() {
                return Err(Error::Invalid("vector is not in the dual lattice".into()));
            }
            out.push(acc.to_integer().mod_floor(d));
        }
        Ok(out)
    }

    /// Rational lift of a coordinate vector with the given Smith coordinates,
    /// using the reduced representatives `0 <= c_i < d_i`.
    pub fn lift(&self, c: &[BigInt]) -> Vec<BigRational> {
        let n = self.generators.cols();
        let mut out = vec![BigRational::zero(); n];
        for (i, ci) in c.iter().enumerate() {
            let ci = BigRational::from_integer(ci.mod_floor(&self.factors[i]));
            if ci.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += &ci * self.generators.get(i, j);
            }
        }
        out
    }
}

/// A sublattice spanned by the rows of `basis` (ambient coordinates).
#[derive(Clone, Debug)]
pub struct Sublattice {
    ambient: Lattice,
    basis: IntMatrix,
}

impl Sublattice {
    pub fn new(ambient: Lattice, basis: IntMatrix) -> Result<Self> {
        if basis.cols() != ambient.rank() {
            return Err(Error::DimensionMismatch(format!(
                "basis has {} columns, lattice rank is {}",
                basis.cols(),
                ambient.rank()
            )));
        }
        if linalg::rank(&basis) != basis.rows() {
            return Err(Error::Invalid("basis rows are dependent".into()));
        }
        Ok(Sublattice { ambient, basis })
    }

    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    /// Induced Gram matrix `B G B^T`.
    pub fn gram(&self) -> IntMatrix {
        &(&self.basis * self.ambient.gram()) * &self.basis.transpose()
    }

    pub fn lattice(&self) -> Result<Lattice> {
        if self.rank() == 0 {
            return Ok(Lattice::empty());
        }
        Lattice::new(self.gram())
    }

    pub fn is_primitive(&self) -> bool {
        linalg::is_primitive(&self.basis)
    }

    /// Saturated basis of the vectors orthogonal to this sublattice.
    pub fn orthogonal_complement(&self) -> Sublattice {
        let n = self.ambient.rank();
        let basis = if self.rank() == 0 {
            IntMatrix::identity(n)
        } else {
            linalg::kernel_saturated(&(&self.basis * self.ambient.gram()))
        };
        Sublattice {
            ambient: self.ambient.clone(),
            basis,
        }
    }

    /// The sublattice spanned by the rows of both bases.
    pub fn sum(&self, other: &Sublattice) -> Result<Sublattice> {
        let stacked = self.basis.vstack(&other.basis)?;
        Sublattice::new(self.ambient.clone(), linalg::row_basis(&stacked))
    }

    /// Index `[T : S]` for `S = self` contained in `T = other` of equal rank.
    pub fn index_in(&self, other: &Sublattice) -> Result<BigInt> {
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch(self.rank(), other.rank()));
        }
        if self.rank() == 0 {
            return Ok(BigInt::one());
        }
        // C with C T = S, via C = S T^T (T T^T)^-1
        let t = &other.basis;
        let ttt = t * &t.transpose();
        let st = &self.basis * &t.transpose();
        let c = linalg::solve_rational(&ttt, &st.transpose())?.transpose();
        let back = c.mul_int(t);
        if back != self.basis.to_rational() {
            return Err(Error::NotContained);
        }
        let c = c.to_integer().ok_or(Error::NotContained)?;
        Ok(linalg::det(&c)?.abs())
    }
}

/// Gauss reduction of a positive definite binary form: the result satisfies
/// `|2b| <= a <= c` and `b >= 0`, which picks one form per
/// `GL_2(Z)`-class.
pub fn reduce_binary(g: &IntMatrix) -> Result<IntMatrix> {
    if g.rows() != 2 || g.cols() != 2 || !g.is_symmetric() {
        return Err(Error::Invalid("expected a symmetric 2x2 matrix".into()));
    }
    let mut a = g.get(0, 0).clone();
    let mut b = g.get(0, 1).clone();
    let mut c = g.get(1, 1).clone();
    if !(a.is_positive() && &a * &c - &b * &b > BigInt::zero()) {
        return Err(Error::Indefinite {
            plus: inertia(g).0,
            minus: inertia(g).1,
        });
    }
    loop {
        // b <- b - k a with k the nearest integer to b / a
        let two_a: BigInt = &a * 2;
        let num: BigInt = &b * 2 + &a;
        let k = num.div_floor(&two_a);
        if !k.is_zero() {
            let nb = &b - &k * &a;
            c = &c - &k * (&b * 2 - &k * &a);
            b = nb;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            continue;
        }
        break;
    }
    Ok(IntMatrix::from_rows(&[vec![a, b.abs()], vec![b.abs(), c]]))
}

/// JSON integer that accepts numbers or decimal strings and serializes as a
/// string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JsonInt(pub BigInt);

impl Serialize for JsonInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::String(s) => s.trim().to_string(),
            other => return Err(D::Error::custom(format!("expected an integer, got {other}"))),
        };
        text.parse::<BigInt>()
            .map(JsonInt)
            .map_err(|_| D::Error::custom(format!("not an integer: {text}")))
    }
}

/// On-disk lattice: `{"label": string?, "gram": [[int, ...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub gram: Vec<Vec<JsonInt>>,
}

impl LatticeFile {
    pub fn gram_matrix(&self) -> Result<IntMatrix> {
        let rows: Vec<Vec<BigInt>> = self
            .gram
            .iter()
            .map(|r| r.iter().map(|x| x.0.clone()).collect())
            .collect();
        if rows.is_empty() {
            return Ok(IntMatrix::zeros(0, 0));
        }
        IntMatrix::try_from_rows(&rows)
    }

    pub fn into_lattice(self) -> Result<Lattice> {
        let g = self.gram_matrix()?;
        let l = if g.rows() == 0 && g.cols() == 0 {
            Lattice::empty()
        } else {
            Lattice::new(g)?
        };
        Ok(match self.label {
            Some(s) => l.with_label(s),
            None => l,
        })
    }
}
