use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix};

/// Largest group whose elements are listed explicitly.
pub const ELEMENT_CAP: u64 = 1_000_000;

/// An isometry acting on coordinate columns: column `i` is the image of the
/// `i`-th basis vector.
pub type Isometry = IntMatrix;

/// A finite group of integer matrices.
///
/// Elements are listed in breadth-first order from the identity over the
/// generators whenever the order is at most [`ELEMENT_CAP`].
#[derive(Clone, Debug)]
pub struct MatrixGroup {
    degree: usize,
    generators: Vec<Isometry>,
    order: BigInt,
    elements: Option<Vec<Isometry>>,
}

impl MatrixGroup {
    /// The group generated by `generators`, enumerated by closure.
    pub fn generated_by(degree: usize, generators: Vec<Isometry>) -> Result<Self> {
        let elements = closure(degree, &generators, ELEMENT_CAP)?;
        Ok(MatrixGroup {
            degree,
            generators,
            order: BigInt::from(elements.len()),
            elements: Some(elements),
        })
    }

    /// A group with known order; elements are listed when within the cap.
    pub fn with_order(degree: usize, generators: Vec<Isometry>, order: BigInt) -> Result<Self> {
        let elements = if order <= BigInt::from(ELEMENT_CAP) {
            let e = closure(degree, &generators, ELEMENT_CAP)?;
            if BigInt::from(e.len()) != order {
                return Err(Error::Invalid(format!(
                    "generators span {} elements, expected {order}",
                    e.len()
                )));
            }
            Some(e)
        } else {
            None
        };
        Ok(MatrixGroup {
            degree,
            generators,
            order,
            elements,
        })
    }

    pub fn trivial(degree: usize) -> Self {
        MatrixGroup {
            degree,
            generators: Vec::new(),
            order: BigInt::one(),
            elements: Some(vec![IntMatrix::identity(degree)]),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn order(&self) -> &BigInt {
        &self.order
    }

    pub fn elements(&self) -> Result<&[Isometry]> {
        self.elements.as_deref().ok_or_else(|| Error::CapExceeded {
            what: "group elements",
            size: self.order.to_string(),
            cap: ELEMENT_CAP,
        })
    }

    pub fn contains(&self, g: &IntMatrix) -> Result<bool> {
        Ok(self.elements()?.contains(g))
    }

    /// Subgroup of elements with determinant `+1`.
    pub fn special_subgroup(&self) -> Result<MatrixGroup> {
        let special: Vec<&Isometry> = self
            .elements()?
            .iter()
            .filter(|g| linalg::det(g).map(|d| d.is_one()).unwrap_or(false))
            .collect();
        let mut gens: Vec<Isometry> = Vec::new();
        let mut span = vec![IntMatrix::identity(self.degree)];
        for g in special.iter().copied() {
            if span.contains(g) {
                continue;
            }
            gens.push(g.clone());
            span = closure(self.degree, &gens, ELEMENT_CAP)?;
            if span.len() == special.len() {
                break;
            }
        }
        MatrixGroup::generated_by(self.degree, gens)
    }

    /// Conjugacy classes of nontrivial cyclic subgroups.
    pub fn cyclic_subgroup_classes(&self) -> Result<Vec<CyclicClass>> {
        let table = GroupTable::new(self)?;
        Ok(table.cyclic_classes())
    }

    /// Classes whose subgroups are not properly contained in a cyclic
    /// subgroup.
    pub fn maximal_cyclic_classes(&self) -> Result<Vec<CyclicClass>> {
        Ok(self
            .cyclic_subgroup_classes()?
            .into_iter()
            .filter(|c| c.maximal)
            .collect())
    }

    /// `k` with the group isomorphic to the dihedral group of order `2k`.
    pub fn dihedral_recognition(&self) -> Result<Option<usize>> {
        let table = GroupTable::new(self)?;
        Ok(table.dihedral())
    }

    /// Order of a single element.
    pub fn element_order(g: &IntMatrix) -> usize {
        let id = IntMatrix::identity(g.rows());
        let mut p = g.clone();
        let mut k = 1;
        while p != id {
            p = &p * g;
            k += 1;
        }
        k
    }
}

fn closure(degree: usize, gens: &[Isometry], cap: u64) -> Result<Vec<Isometry>> {
    let id = IntMatrix::identity(degree);
    let mut seen: HashMap<Isometry, ()> = HashMap::from([(id.clone(), ())]);
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = &x * g;
            if !seen.contains_key(&y) {
                if out.len() as u64 >= cap {
                    return Err(Error::CapExceeded {
                        what: "group elements",
                        size: format!(">{cap}"),
                        cap,
                    });
                }
                seen.insert(y.clone(), ());
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}

/// One conjugacy class of nontrivial cyclic subgroups.
#[derive(Clone, Debug)]
pub struct CyclicClass {
    /// A generator of the representative subgroup.
    pub generator: Isometry,
    pub order: usize,
    /// Number of conjugate subgroups.
    pub class_size: usize,
    /// Not contained in a larger cyclic subgroup.
    pub maximal: bool,
}

/// Multiplication data of an enumerated group.
struct GroupTable<'a> {
    elems: &'a [Isometry],
    index: HashMap<&'a Isometry, usize>,
    gens: Vec<usize>,
    identity: usize,
}

impl<'a> GroupTable<'a> {
    fn new(g: &'a MatrixGroup) -> Result<Self> {
        let elems = g.elements()?;
        let index: HashMap<&Isometry, usize> = elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let gens = g
            .generators
            .iter()
            .map(|x| index.get(x).copied().ok_or(Error::Invalid("generator outside group".into())))
            .collect::<Result<_>>()?;
        let identity = index[&IntMatrix::identity(g.degree)];
        Ok(GroupTable {
            elems,
            index,
            gens,
            identity,
        })
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.index[&(&self.elems[a] * &self.elems[b])]
    }

    /// Powers `x, x^2, ..., 1`.
    fn powers(&self, x: usize) -> Vec<usize> {
        let mut out = vec![x];
        let mut p = x;
        while p != self.identity {
            p = self.mul(p, x);
            out.push(p);
        }
        out
    }

    fn inverse(&self, x: usize) -> usize {
        let p = self.powers(x);
        if p.len() == 1 {
            x
        } else {
            p[p.len() - 2]
        }
    }

    fn cyclic_classes(&self) -> Vec<CyclicClass> {
        // distinct cyclic subgroups as sorted element sets, in order of first
        // appearance
        let mut subgroups: Vec<Vec<usize>> = Vec::new();
        let mut sub_index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut gen_of: Vec<usize> = Vec::new();
        for x in 0..self.elems.len() {
            if x == self.identity {
                continue;
            }
            let mut s = self.powers(x);
            s.sort_unstable();
            if !sub_index.contains_key(&s) {
                sub_index.insert(s.clone(), subgroups.len());
                subgroups.push(s);
                gen_of.push(x);
            }
        }
        let conj: Vec<Vec<usize>> = self
            .gens
            .iter()
            .map(|&h| {
                let hi = self.inverse(h);
                (0..self.elems.len())
                    .map(|e| self.mul(self.mul(h, e), hi))
                    .collect()
            })
            .collect();

        let mut class_of: Vec<Option<usize>> = vec![None; subgroups.len()];
        let mut classes: Vec<(usize, usize)> = Vec::new(); // (rep, size)
        for start in 0..subgroups.len() {
            if class_of[start].is_some() {
                continue;
            }
            let cid = classes.len();
            class_of[start] = Some(cid);
            let mut queue = VecDeque::from([start]);
            let mut size = 1;
            while let Some(s) = queue.pop_front() {
                for table in &conj {
                    let mut img: Vec<usize> = subgroups[s].iter().map(|&e| table[e]).collect();
                    img.sort_unstable();
                    let t = sub_index[&img];
                    if class_of[t].is_none() {
                        class_of[t] = Some(cid);
                        size += 1;
                        queue.push_back(t);
                    }
                }
            }
            classes.push((start, size));
        }

        let mut out: Vec<CyclicClass> = classes
            .iter()
            .map(|&(rep, size)| {
                let s = &subgroups[rep];
                let maximal = !subgroups
                    .iter()
                    .any(|t| t.len() > s.len() && s.iter().all(|e| t.binary_search(e).is_ok()));
                CyclicClass {
                    generator: self.elems[gen_of[rep]].clone(),
                    order: s.len(),
                    class_size: size,
                    maximal,
                }
            })
            .collect();
        out.sort_by_key(|c| c.order);
        out
    }

    fn dihedral(&self) -> Option<usize> {
        let n = self.elems.len();
        if n % 2 != 0 {
            return None;
        }
        let k = n / 2;
        for c in 0..n {
            let pc = self.powers(c);
            if pc.len() != k {
                continue;
            }
            let ci = self.inverse(c);
            for t in 0..n {
                if t == self.identity || pc.contains(&t) || self.mul(t, t) != self.identity {
                    continue;
                }
                if self.mul(self.mul(t, c), t) == ci {
                    return Some(k);
                }
            }
        }
        None
    }
}
