//! Maximal cyclic extensions of the symplectic actions: for every maximal
//! cyclic subgroup `<g>` of `SO(H)` of a rank-3 invariant lattice `H`, the
//! polarization `Zl = ker(1 - g)`, its complement `T_X` and the index
//! `[H : T_X ⊕ Zl]`.

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aut::{automorphism_group, is_isometric, special_subgroup};
use crate::discform::{disc_form, orthogonal_group_of_form};
use crate::error::{Error, Result};
use crate::genus::{genus_symbol, normalize_symbol, same_genus};
use crate::lattice::{reduce_binary, JsonInt, Lattice};
use crate::linalg::{self, char_poly, IntMatrix};

/// Environment variable naming a reference dataset to use instead of the
/// embedded one.
pub const DATA_ENV: &str = "K3CLS_DATA";

const EMBEDDED: &str = include_str!("../data/reference.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reference {
    pub rows: Vec<ReferenceRow>,
}

/// One symplectic group with its invariant lattices and printed invariants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub group_no: u32,
    pub group: String,
    pub group_order: u64,
    pub det: i64,
    pub genus: String,
    /// printed `#O(Λ_{G_s})`
    pub o_coinvariant: u64,
    /// printed `#O(q)`
    pub o_q: u64,
    pub lattices: Vec<ReferenceLattice>,
    #[serde(default)]
    pub errata: Vec<Erratum>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceLattice {
    pub gram: Vec<Vec<JsonInt>>,
    pub dihedral_k: usize,
    pub cases: Vec<ReferenceCase>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceCase {
    pub label: String,
    pub n: usize,
    pub tx: Vec<Vec<JsonInt>>,
    pub l2: i64,
    pub glue: i64,
    /// carried as metadata only
    #[serde(default)]
    pub gap_id: Option<[u64; 2]>,
    /// carried as metadata only
    #[serde(default = "yes")]
    pub split: bool,
}

fn yes() -> bool {
    true
}

/// A printed value known to be wrong, with the corrected one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Erratum {
    pub lattice: usize,
    pub field: String,
    pub printed: i64,
    pub corrected: i64,
    pub note: String,
}

fn matrix_of(rows: &[Vec<JsonInt>]) -> IntMatrix {
    IntMatrix::from_rows(&rows.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect::<Vec<Vec<BigInt>>>())
}

impl ReferenceLattice {
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(matrix_of(&self.gram))
    }
}

impl ReferenceCase {
    pub fn tx_lattice(&self) -> Result<Lattice> {
        Lattice::new(matrix_of(&self.tx))
    }
}

impl Reference {
    pub fn embedded() -> Self {
        serde_json::from_str(EMBEDDED).expect("embedded reference parses")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(p: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(p)?)
    }

    /// The dataset named by `K3CLS_DATA`, or the embedded one.
    pub fn load() -> Result<Self> {
        match std::env::var_os(DATA_ENV) {
            Some(p) if !p.is_empty() => Self::from_path(Path::new(&p)),
            _ => Ok(Self::embedded()),
        }
    }

    /// `(group_no, lattice index within the row, entry)` in dataset order.
    pub fn lattices(&self) -> impl Iterator<Item = (u32, usize, &ReferenceLattice)> {
        self.rows
            .iter()
            .flat_map(|r| r.lattices.iter().enumerate().map(move |(i, l)| (r.group_no, i, l)))
    }

    pub fn case_count(&self) -> usize {
        self.lattices().map(|(_, _, l)| l.cases.len()).sum()
    }

    pub fn row(&self, group_no: u32) -> Option<&ReferenceRow> {
        self.rows.iter().find(|r| r.group_no == group_no)
    }
}

/// One maximal extension `G_s.μ_n` of a symplectic action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseRecord {
    pub group_no: u32,
    /// index of the invariant lattice within its row
    pub lattice: usize,
    pub label: String,
    pub n: usize,
    /// Gauss-reduced Gram matrix of `T_X`
    #[serde(serialize_with = "ser_matrix")]
    pub tx: IntMatrix,
    #[serde(serialize_with = "ser_int")]
    pub l_square: BigInt,
    #[serde(serialize_with = "ser_int")]
    pub glue: BigInt,
    /// `l` in the basis of `H`
    #[serde(serialize_with = "ser_vec")]
    pub l: Vec<BigInt>,
    /// a generator of the cyclic class, acting on columns
    #[serde(serialize_with = "ser_matrix")]
    pub generator: IntMatrix,
    pub char_poly_ok: bool,
}

fn ser_int<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_vec<S: serde::Serializer>(x: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|v| v.to_string()))
}

fn ser_matrix<S: serde::Serializer>(m: &IntMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.to_nested().into_iter().map(|r| r.into_iter().map(|v| v.to_string()).collect::<Vec<_>>()))
}

impl CaseRecord {
    /// `|det T_X| l^2 = glue^2 |det H|`.
    pub fn satisfies_index_identity(&self, h: &Lattice) -> bool {
        let dt = linalg::det(&self.tx).map(|d| d.abs()).unwrap_or_default();
        dt * &self.l_square == &self.glue * &self.glue * h.det().abs()
    }
}

/// `(x - 1)(x + 1)^2` or `(x - 1) Φ_n` for `n = 3, 4, 6`, as coefficient
/// lists from the constant term up.
const ALLOWED_CHAR_POLYS: [[i64; 4]; 4] = [[-1, -1, 1, 1], [-1, 0, 0, 1], [-1, 1, -1, 1], [-1, 2, -2, 1]];

/// Whether the characteristic polynomial of a rank-3 isometry is one of the
/// four allowed for a nontrivial non-symplectic generator.
pub fn char_poly_check(g: &IntMatrix) -> bool {
    if g.rows() != 3 || g.cols() != 3 {
        return false;
    }
    let Ok(cp) = char_poly(g) else {
        return false;
    };
    let cp: Option<Vec<i64>> = cp.iter().map(ToPrimitive::to_i64).collect();
    cp.is_some_and(|cp| ALLOWED_CHAR_POLYS.iter().any(|a| a[..] == cp[..]))
}

/// The unlabeled records of one invariant lattice, sorted by `n` descending
/// and then `l^2` ascending.
pub fn classify_lattice(h: &Lattice) -> Result<Vec<CaseRecord>> {
    if h.rank() != 3 {
        return Err(Error::RankMismatch(h.rank(), 3));
    }
    if !h.is_even() {
        return Err(Error::OddLattice);
    }
    if !h.is_positive_definite() {
        let (plus, minus) = h.signature();
        return Err(Error::Indefinite { plus, minus });
    }
    let so = special_subgroup(&automorphism_group(h)?)?;
    if so.dihedral_recognition()?.is_none() {
        return Err(Error::NotDihedral);
    }
    let mut out = Vec::new();
    for class in so.maximal_cyclic_classes()? {
        let g = &class.generator;
        let fixed = linalg::kernel_saturated(&(g - &IntMatrix::identity(3)));
        if fixed.rows() != 1 {
            return Err(Error::KernelRank(fixed.rows()));
        }
        let mut l = fixed.row(0).to_vec();
        if l.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
            l.iter_mut().for_each(|x| *x = -x.clone());
        }
        let s = h.sublattice(IntMatrix::from_rows(&[l.clone()]))?;
        let t = s.orthogonal_complement();
        let glue = linalg::det(&t.basis().vstack(s.basis())?)?.abs();
        out.push(CaseRecord {
            group_no: 0,
            lattice: 0,
            label: String::new(),
            n: class.order,
            tx: reduce_binary(&t.gram())?,
            l_square: h.norm(&l),
            glue,
            l,
            generator: g.clone(),
            char_poly_ok: char_poly_check(g),
        });
    }
    out.sort_by(|a, b| {
        b.n.cmp(&a.n)
            .then_with(|| a.l_square.cmp(&b.l_square))
            .then_with(|| a.tx.cmp(&b.tx))
    });
    Ok(out)
}

fn same_case(c: &CaseRecord, r: &ReferenceCase) -> Result<bool> {
    if c.n != r.n || c.l_square != BigInt::from(r.l2) || c.glue != BigInt::from(r.glue) {
        return Ok(false);
    }
    let t = Lattice::new(c.tx.clone())?;
    Ok(is_isometric(&t, &r.tx_lattice()?)?.is_some())
}

/// Assigns labels: the reference case matching `(n, l^2, glue, T_X)` if
/// any, otherwise the sort position.
fn label_records(records: &mut [CaseRecord], group_no: u32, lattice: usize, reference: &ReferenceLattice) -> Result<()> {
    let mut used = vec![false; reference.cases.len()];
    for (pos, c) in records.iter_mut().enumerate() {
        c.group_no = group_no;
        c.lattice = lattice;
        c.label = format!("{group_no}{}?", (b'a' + pos as u8) as char);
        for (i, r) in reference.cases.iter().enumerate() {
            if !used[i] && same_case(c, r)? {
                used[i] = true;
                c.label = r.label.clone();
                break;
            }
        }
    }
    Ok(())
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Per-lattice classification results in dataset order.
fn classify_each(reference: &Reference, threads: usize) -> Result<Vec<(u32, usize, Result<Vec<CaseRecord>>)>> {
    let items: Vec<(u32, usize, &ReferenceLattice)> = reference.lattices().collect();
    let work = |&(no, i, entry): &(u32, usize, &ReferenceLattice)| {
        let res = entry.lattice().and_then(|h| {
            let mut recs = classify_lattice(&h)?;
            label_records(&mut recs, no, i, entry)?;
            Ok(recs)
        });
        (no, i, res)
    };
    in_pool(threads, || {
        if threads <= 1 {
            items.iter().map(work).collect()
        } else {
            items.par_iter().map(work).collect()
        }
    })
}

/// All case records of the dataset, labeled, in dataset order.
pub fn run_all(reference: &Reference, threads: usize) -> Result<Vec<CaseRecord>> {
    let mut out = Vec::new();
    for (_, _, res) in classify_each(reference, threads)? {
        out.extend(res?);
    }
    Ok(out)
}

/// Outcome of comparing computations with the reference dataset.
#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub cases_total: usize,
    pub cases_matched: usize,
    pub rows_total: usize,
    pub rows_matched: usize,
    pub mismatches: Vec<String>,
    /// printed values contradicted by computation and recorded as errata
    pub errata: Vec<String>,
    /// reference fields that are not recomputed
    pub unverified: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
            && self.cases_matched == self.cases_total
            && self.rows_matched == self.rows_total
    }

    pub fn summary(&self) -> String {
        format!(
            "{}/{} cases, {}/{} table rows",
            self.cases_matched, self.cases_total, self.rows_matched, self.rows_total
        )
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        for m in &self.mismatches {
            writeln!(f, "mismatch: {m}")?;
        }
        for e in &self.errata {
            writeln!(f, "erratum: {e}")?;
        }
        for u in &self.unverified {
            writeln!(f, "unverified: {u}")?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

fn check_cases(
    no: u32,
    i: usize,
    entry: &ReferenceLattice,
    res: &Result<Vec<CaseRecord>>,
    report: &mut VerifyReport,
) -> Result<()> {
    let recs = match res {
        Ok(r) => r,
        Err(e) => {
            report.mismatches.push(format!("No. {no} lattice {i}: classification failed: {e}"));
            return Ok(());
        }
    };
    let h = entry.lattice()?;
    for r in &entry.cases {
        if recs.iter().any(|c| c.label == r.label) {
            report.cases_matched += 1;
        } else {
            report.mismatches.push(format!(
                "case {}: no computed record with n={}, l^2={}, glue={}, T_X={:?}",
                r.label,
                r.n,
                r.l2,
                r.glue,
                matrix_of(&r.tx).to_nested()
            ));
        }
    }
    for c in recs {
        if c.label.ends_with('?') {
            report.mismatches.push(format!(
                "No. {no} lattice {i}: computed record n={}, l^2={}, glue={}, T_X={:?} has no reference case",
                c.n,
                c.l_square,
                c.glue,
                c.tx.to_nested()
            ));
        }
        if !c.char_poly_ok {
            report.mismatches.push(format!("{}: characteristic polynomial not allowed", c.label));
        }
        if !c.satisfies_index_identity(&h) {
            report.mismatches.push(format!("{}: |det T_X| l^2 != glue^2 det H", c.label));
        }
        if c.n % 2 != 0 {
            report.mismatches.push(format!("{}: odd n = {}", c.label, c.n));
        }
    }
    Ok(())
}

/// Checks of one printed table row; returns the failures.
fn check_row(row: &ReferenceRow, report: &mut VerifyReport) -> Result<Vec<String>> {
    let mut fails = Vec::new();
    let no = row.group_no;
    let mut lattices = Vec::new();
    for (i, entry) in row.lattices.iter().enumerate() {
        match entry.lattice() {
            Ok(l) => lattices.push((i, entry, l)),
            Err(e) => fails.push(format!("No. {no} lattice {i}: {e}")),
        }
    }
    for (i, entry, l) in &lattices {
        if *l.det() != BigInt::from(row.det) {
            fails.push(format!("No. {no} lattice {i}: det {} != {}", l.det(), row.det));
        }
        let k = automorphism_group(l)
            .and_then(|o| special_subgroup(&o))
            .and_then(|so| so.dihedral_recognition());
        match k {
            Ok(Some(k)) if k == entry.dihedral_k => {}
            Ok(Some(k)) => {
                let erratum = row
                    .errata
                    .iter()
                    .find(|e| e.lattice == *i && e.field == "dihedral_k" && e.corrected == k as i64);
                match erratum {
                    Some(e) => report.errata.push(format!(
                        "No. {no} lattice {i}: SO printed D_{}, computed D_{} ({})",
                        e.printed, k, e.note
                    )),
                    None => fails.push(format!("No. {no} lattice {i}: SO is D_{k}, expected D_{}", entry.dihedral_k)),
                }
            }
            Ok(None) => fails.push(format!("No. {no} lattice {i}: SO is not dihedral")),
            Err(e) => fails.push(format!("No. {no} lattice {i}: {e}")),
        }
        match genus_symbol(l) {
            Ok(g) => {
                let expect = normalize_symbol(&row.genus).replace("{II}", "II");
                if g.to_string() != expect {
                    fails.push(format!("No. {no} lattice {i}: genus {g} != {expect}"));
                }
            }
            Err(e) => fails.push(format!("No. {no} lattice {i}: genus: {e}")),
        }
    }
    if let Some((_, _, first)) = lattices.first() {
        let oq = disc_form(first).and_then(|d| orthogonal_group_of_form(&d)).map(|o| o.len() as u64);
        match oq {
            Ok(oq) => {
                if oq != row.o_q {
                    fails.push(format!("No. {no}: #O(q) = {oq}, printed {}", row.o_q));
                }
                if row.group_order * oq != row.o_coinvariant {
                    fails.push(format!(
                        "No. {no}: #G_s * #O(q) = {} != {}",
                        row.group_order * oq,
                        row.o_coinvariant
                    ));
                }
            }
            Err(e) => fails.push(format!("No. {no}: #O(q): {e}")),
        }
    }
    // several invariant lattices of one row: one genus, distinct classes
    for a in 0..lattices.len() {
        for b in a + 1..lattices.len() {
            let (la, lb) = (&lattices[a].2, &lattices[b].2);
            match same_genus(la, lb) {
                Ok(true) => {}
                Ok(false) => fails.push(format!("No. {no}: lattices {a} and {b} differ in genus")),
                Err(e) => fails.push(format!("No. {no}: genus comparison: {e}")),
            }
            match is_isometric(la, lb) {
                Ok(None) => {}
                Ok(Some(_)) => fails.push(format!("No. {no}: lattices {a} and {b} are isometric")),
                Err(e) => fails.push(format!("No. {no}: isometry test: {e}")),
            }
        }
    }
    Ok(fails)
}

/// Field-by-field comparison of the classification and the table invariants
/// with the reference dataset.
pub fn verify_against_reference(reference: &Reference, threads: usize) -> Result<VerifyReport> {
    let mut report = VerifyReport {
        cases_total: reference.case_count(),
        rows_total: reference.rows.len(),
        ..Default::default()
    };
    let results = classify_each(reference, threads)?;
    for ((no, i, res), (_, _, entry)) in results.iter().zip(reference.lattices()) {
        check_cases(*no, *i, entry, res, &mut report)?;
    }
    let row_fails: Vec<Result<(Vec<String>, VerifyReport)>> = in_pool(threads, || {
        let work = |row: &ReferenceRow| {
            let mut part = VerifyReport::default();
            check_row(row, &mut part).map(|f| (f, part))
        };
        if threads <= 1 {
            reference.rows.iter().map(work).collect()
        } else {
            reference.rows.par_iter().map(work).collect()
        }
    })?;
    for r in row_fails {
        let (fails, part) = r?;
        if fails.is_empty() {
            report.rows_matched += 1;
        }
        report.mismatches.extend(fails);
        report.errata.extend(part.errata);
    }
    let split_meta = reference
        .lattices()
        .flat_map(|(_, _, l)| l.cases.iter())
        .filter(|c| !c.split)
        .map(|c| c.label.clone())
        .collect::<Vec<_>>();
    report.unverified.push(format!(
        "GAP ids and extension structure are metadata (non-split: {})",
        if split_meta.is_empty() { "none".to_string() } else { split_meta.join(", ") }
    ));
    report
        .unverified
        .push("#O(Λ_{G_s}) enters only through #G_s * #O(q)".to_string());
    Ok(report)
}

/// Dihedral index `k` of `SO(H)`.
pub fn dihedral_index(h: &Lattice) -> Result<Option<usize>> {
    special_subgroup(&automorphism_group(h)?)?.dihedral_recognition()
}

