use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use k3cls_core::aut::{automorphism_group, special_subgroup};
use k3cls_core::classify::{classify_lattice, run_all, verify_against_reference, CaseRecord, Reference, VerifyReport};
use k3cls_core::glue::{unique_extension_check, CoinvariantData, ExtensionReport};
use k3cls_core::{genus_symbol, Error, IntMatrix, Lattice};

const OK: u8 = 0;
const MISMATCH: u8 = 1;
const PARSE: u8 = 2;
const PRECONDITION: u8 = 3;
const UNKNOWN: u8 = 4;

#[derive(Parser)]
#[command(name = "k3cls", version, about = "Exact lattice tools for maximal K3 group actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Determinant, signature, parity and discriminant group of a lattice
    LatticeInfo {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Automorphism group of a definite lattice
    Aut {
        path: PathBuf,
        /// Also report SO(L) and its dihedral type
        #[arg(long)]
        special: bool,
        /// List all group elements
        #[arg(long)]
        elements: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Canonical genus symbol of an even lattice
    Genus {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Maximal cyclic extensions of the invariant lattices
    Classify {
        /// Row number (e.g. 70) or case label (e.g. 70d)
        #[arg(long)]
        case: Option<String>,
        /// Classify this lattice file instead of the dataset
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        threads: u16,
    },
    /// Compare all computations with the reference dataset
    Verify {
        /// Directory of coinvariant lattices named <row>.json
        #[arg(long)]
        with_coinvariants: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        threads: u16,
    },
}

/// A failure with its exit code.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(_) | Error::Io(_) => Failure(PARSE, format!("cannot read input: {e}")),
            Error::Degenerate => Failure(PRECONDITION, "degenerate Gram matrix: determinant is 0".into()),
            Error::NotSquare { .. } | Error::NotSymmetric | Error::DimensionMismatch(_) => {
                Failure(PARSE, format!("malformed Gram matrix: {e}"))
            }
            other => Failure(PRECONDITION, other.to_string()),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read_lattice(path: &Path) -> Result<Lattice, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(PARSE, format!("{}: {e}", path.display())))?;
    Ok(Lattice::from_json_str(&text)?)
}

fn ints(xs: &[k3cls_core::BigInt]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn matrix_json(m: &IntMatrix) -> Value {
    Value::from(m.to_nested().iter().map(|r| Value::from(ints(r))).collect::<Vec<_>>())
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn unsupported(format: Format, what: &str) -> Result<(), Failure> {
    match format {
        Format::Text | Format::Json => Ok(()),
        _ => Err(Failure(PARSE, format!("format not supported by {what}"))),
    }
}

fn lattice_info(path: &Path, format: Format) -> Outcome {
    unsupported(format, "lattice-info")?;
    let l = read_lattice(path)?;
    let dg = l.discriminant_group();
    let (plus, minus) = l.signature();
    if format == Format::Json {
        print_json(&json!({
            "label": l.label(),
            "rank": l.rank().to_string(),
            "det": l.det().to_string(),
            "signature": [plus.to_string(), minus.to_string()],
            "even": l.is_even(),
            "invariant_factors": ints(&dg.factors),
        }));
    } else {
        println!("rank: {}", l.rank());
        println!("det: {}", l.det());
        println!("signature: ({plus},{minus})");
        println!("even: {}", l.is_even());
        println!("invariant factors: [{}]", ints(&dg.factors).join(", "));
    }
    Ok(OK)
}

fn aut(path: &Path, special: bool, elements: bool, format: Format) -> Outcome {
    unsupported(format, "aut")?;
    let l = read_lattice(path)?;
    let o = automorphism_group(&l)?;
    let so = if special { Some(special_subgroup(&o)?) } else { None };
    let dihedral = match &so {
        Some(s) => s.dihedral_recognition()?,
        None => None,
    };
    let listed = if elements { Some(o.elements()?) } else { None };
    if format == Format::Json {
        let mut v = json!({
            "order": o.order().to_string(),
            "generators": o.generators().iter().map(matrix_json).collect::<Vec<_>>(),
        });
        if let Some(s) = &so {
            v["special_order"] = Value::from(s.order().to_string());
            v["special_generators"] = Value::from(s.generators().iter().map(matrix_json).collect::<Vec<_>>());
            v["dihedral"] = dihedral.map(|k| Value::from(format!("D{k}"))).unwrap_or(Value::Null);
        }
        if let Some(els) = listed {
            v["elements"] = Value::from(els.iter().map(matrix_json).collect::<Vec<_>>());
        }
        print_json(&v);
    } else {
        println!("order: {}", o.order());
        println!("generators:");
        for g in o.generators() {
            println!("{g}");
        }
        if let Some(s) = &so {
            println!("special order: {}", s.order());
            match dihedral {
                Some(k) => println!("SO: D{k}"),
                None => println!("SO: not dihedral"),
            }
        }
        if let Some(els) = listed {
            println!("elements:");
            for g in els {
                println!("{g}");
            }
        }
    }
    Ok(OK)
}

fn genus(path: &Path, format: Format) -> Outcome {
    unsupported(format, "genus")?;
    let l = read_lattice(path)?;
    let g = genus_symbol(&l)?;
    if format == Format::Json {
        print_json(&json!({ "symbol": g.to_string() }));
    } else {
        println!("{g}");
    }
    Ok(OK)
}

fn record_row(c: &CaseRecord) -> Vec<String> {
    vec![
        c.group_no.to_string(),
        c.label.clone(),
        c.n.to_string(),
        c.l_square.to_string(),
        c.glue.to_string(),
        c.tx.get(0, 0).to_string(),
        c.tx.get(0, 1).to_string(),
        c.tx.get(1, 1).to_string(),
    ]
}

const COLUMNS: [&str; 8] = ["group_no", "label", "n", "l2", "glue", "tx_11", "tx_12", "tx_22"];

fn print_records(recs: &[CaseRecord], format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let v = serde_json::to_value(recs).map_err(|e| Failure(PARSE, e.to_string()))?;
            print_json(&v);
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let io = |e: csv::Error| Failure(PARSE, e.to_string());
            w.write_record(COLUMNS).map_err(io)?;
            for c in recs {
                w.write_record(record_row(c)).map_err(io)?;
            }
            w.flush().map_err(|e| Failure(PARSE, e.to_string()))?;
        }
        Format::Md => {
            println!("| {} |", COLUMNS.join(" | "));
            println!("|{}", "---|".repeat(COLUMNS.len()));
            for c in recs {
                println!("| {} |", record_row(c).join(" | "));
            }
        }
        Format::Text => {
            let rows: Vec<Vec<String>> = std::iter::once(COLUMNS.iter().map(|s| s.to_string()).collect())
                .chain(recs.iter().map(record_row))
                .collect();
            let widths: Vec<usize> = (0..COLUMNS.len())
                .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
                .collect();
            for r in rows {
                let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                println!("{}", cells.join("  ").trim_end());
            }
        }
    }
    Ok(())
}

fn select(recs: Vec<CaseRecord>, case: &str) -> Result<Vec<CaseRecord>, Failure> {
    let picked: Vec<CaseRecord> = match case.parse::<u32>() {
        Ok(no) => recs.into_iter().filter(|c| c.group_no == no).collect(),
        Err(_) => recs.into_iter().filter(|c| c.label == case).collect(),
    };
    if picked.is_empty() {
        return Err(Failure(UNKNOWN, format!("unknown case {case}")));
    }
    Ok(picked)
}

fn classify(case: Option<&str>, input: Option<&Path>, format: Format, threads: usize) -> Outcome {
    let recs = match input {
        Some(p) => {
            let l = read_lattice(p)?;
            let mut recs = classify_lattice(&l)?;
            for (i, c) in recs.iter_mut().enumerate() {
                c.label = ((b'a' + i as u8) as char).to_string();
            }
            recs
        }
        None => {
            let reference = Reference::load()?;
            if let Some(c) = case {
                // reject unknown selectors before computing anything
                let known = reference.rows.iter().any(|r| {
                    r.group_no.to_string() == c || r.lattices.iter().any(|l| l.cases.iter().any(|x| x.label == c))
                });
                if !known {
                    return Err(Failure(UNKNOWN, format!("unknown case {c}")));
                }
            }
            run_all(&reference, threads)?
        }
    };
    let recs = match case {
        Some(c) => select(recs, c)?,
        None => recs,
    };
    print_records(&recs, format)?;
    Ok(OK)
}

/// Coinvariant checks for the rows that have a file in `dir`.
fn coinvariant_checks(reference: &Reference, dir: &Path, report: &mut VerifyReport) -> Result<Vec<Value>, Failure> {
    let mut out = Vec::new();
    for row in &reference.rows {
        let no = row.group_no;
        let path = dir.join(format!("{no}.json"));
        let data = if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|e| Failure(PARSE, format!("{}: {e}", path.display())))?;
            Some(CoinvariantData::from_json_str(&text)?)
        } else {
            None
        };
        let h = row.lattices[0].lattice()?;
        let so = special_subgroup(&automorphism_group(&h)?)?;
        let mut entries = Vec::new();
        for class in so.maximal_cyclic_classes()? {
            match unique_extension_check(&h, data.as_ref(), &class.generator) {
                Ok(ExtensionReport::Skipped(msg)) => {
                    entries.push(json!({ "status": msg }));
                    break;
                }
                Ok(ExtensionReport::Checked(c)) => {
                    let mut bad = Vec::new();
                    if !c.surjective {
                        bad.push("O(K) -> O(q) is not surjective".to_string());
                    }
                    if c.roots != 0 {
                        bad.push(format!("{} roots of square -2", c.roots));
                    }
                    if c.kernel_order != k3cls_core::BigInt::from(row.group_order) {
                        bad.push(format!("kernel order {} != #G_s = {}", c.kernel_order, row.group_order));
                    }
                    if c.extension.is_none() {
                        bad.push(format!("order-{} generator does not extend", class.order));
                    }
                    for b in &bad {
                        report.mismatches.push(format!("No. {no} coinvariant: {b}"));
                    }
                    entries.push(json!({
                        "n": class.order.to_string(),
                        "aut_order": c.aut_order.to_string(),
                        "form_group_order": c.form_group_order.to_string(),
                        "kernel_order": c.kernel_order.to_string(),
                        "surjective": c.surjective,
                        "roots": c.roots.to_string(),
                        "extensions": c.extension_count.to_string(),
                    }));
                }
                Err(e) => {
                    report.mismatches.push(format!("No. {no} coinvariant: {e}"));
                    entries.push(json!({ "error": e.to_string() }));
                    break;
                }
            }
        }
        out.push(json!({ "group_no": no.to_string(), "checks": entries }));
    }
    Ok(out)
}

fn verify(dir: Option<&Path>, format: Format, threads: usize) -> Outcome {
    unsupported(format, "verify")?;
    let reference = Reference::load()?;
    let mut report = verify_against_reference(&reference, threads)?;
    let coinvariants = match dir {
        Some(d) => Some(coinvariant_checks(&reference, d, &mut report)?),
        None => None,
    };
    if format == Format::Json {
        let mut v = serde_json::to_value(&report).map_err(|e| Failure(PARSE, e.to_string()))?;
        for key in ["cases_total", "cases_matched", "rows_total", "rows_matched"] {
            v[key] = Value::from(v[key].to_string());
        }
        v["passed"] = Value::from(report.passed());
        if let Some(c) = coinvariants {
            v["coinvariants"] = Value::from(c);
        }
        print_json(&v);
    } else {
        if let Some(c) = &coinvariants {
            for row in c {
                println!("coinvariant {}: {}", row["group_no"].as_str().unwrap_or("?"), row["checks"]);
            }
        }
        println!("{report}");
    }
    Ok(if report.passed() { OK } else { MISMATCH })
}

fn main() -> ExitCode {
    // die quietly on a closed pipe, like other unix filters
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { PARSE } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::LatticeInfo { path, format } => lattice_info(&path, format),
        Command::Aut {
            path,
            special,
            elements,
            format,
        } => aut(&path, special, elements, format),
        Command::Genus { path, format } => genus(&path, format),
        Command::Classify {
            case,
            input,
            format,
            threads,
        } => classify(case.as_deref(), input.as_deref(), format, threads as usize),
        Command::Verify {
            with_coinvariants,
            format,
            threads,
        } => verify(with_coinvariants.as_deref(), format, threads as usize),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
