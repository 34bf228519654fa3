use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};

use selmer_core::compare::{self, compare_methods, CompareOptions};
use selmer_core::graphs::PartitionGraph;
use selmer_core::local::{Mutation, Tables};
use selmer_core::model::{CurveParams, Family, InstanceKey, Sign};
use selmer_core::oracle::Depth;
use selmer_core::selmer::OracleTable;
use selmer_core::sweep::{self, SweepSpec};
use selmer_core::verify::{self as checks, OracleCache, Summary};

use crate::report::{self, Method, Record, Row};
use crate::{ComputeArgs, Format, Instance, SurveyArgs, VerifyArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Ok = 0,
    Mismatch = 1,
    Invalid = 2,
    Depth = 3,
}

impl From<Code> for ExitCode {
    fn from(c: Code) -> ExitCode {
        ExitCode::from(c as u8)
    }
}

fn sign(text: &str) -> Result<Sign> {
    match text.trim() {
        "+1" | "1" | "+" => Ok(Sign::Plus),
        "-1" | "-" => Ok(Sign::Minus),
        other => bail!("eps must be +1 or -1, got {other:?}"),
    }
}

fn params(eps: &str, p: i64, q: i64, d: i64) -> Result<CurveParams> {
    Ok(CurveParams::new(sign(eps)?, p, q, d)?)
}

fn depth(fixed: Option<u32>) -> Depth {
    fixed.map_or(Depth::Auto, Depth::Fixed)
}

fn graph_dump(params: &CurveParams) -> String {
    let mut out = String::new();
    for family in [Family::E, Family::EPrime] {
        match PartitionGraph::for_family(params, family) {
            Ok(g) => out.push_str(&g.dump()),
            Err(e) => out.push_str(&format!("# graph for {family} unavailable: {e}\n")),
        }
        out.push('\n');
    }
    out
}

pub fn compute(args: ComputeArgs) -> Result<Code> {
    let Instance { eps, p, q, d } = &args.instance;
    let params = params(eps, *p, *q, *d)?;
    let oracle = (args.method == Method::Both).then(|| OracleTable::compute(&params, Depth::Auto));
    let opts = CompareOptions {
        oracle: oracle.as_ref(),
        ..Default::default()
    };
    let report = match compare_methods(&params, &opts) {
        Ok(r) => r,
        Err(e) if compare::depth_error(&e).is_some() => {
            eprintln!("error: {e}");
            return Ok(Code::Depth);
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &args.dump_graph {
        fs::write(path, graph_dump(&params)).with_context(|| format!("writing {}", path.display()))?;
    }
    let record = Record::new(&report, args.method);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match args.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&record)?)?,
        Format::Text => write!(out, "{}", record.text())?,
        Format::Csv => {
            report::write_csv_header(&mut out)?;
            let mut w = report::csv_writer(&mut out);
            w.serialize(Row::new(&record))?;
            w.flush()?;
        }
    }
    Ok(if record.mismatches.is_empty() { Code::Ok } else { Code::Mismatch })
}

/// Parses `default`, an inline table `{...}` or `key = value` lines.
pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    #[derive(serde::Deserialize)]
    struct Wrapped {
        sweep: SweepSpec,
    }
    let text = text.trim();
    if text == "default" {
        return Ok(SweepSpec::default());
    }
    let spec = if text.starts_with('{') {
        toml::from_str::<Wrapped>(&format!("sweep = {text}")).map(|w| w.sweep)
    } else {
        toml::from_str::<SweepSpec>(text)
    };
    spec.context("malformed sweep spec")
}

fn sweep_instances(spec: &SweepSpec) -> Vec<CurveParams> {
    let g = spec.generate();
    eprintln!(
        "sweep: {} instances, {} combinations skipped",
        g.instances.len(),
        g.skipped.len()
    );
    g.instances
}

pub fn verify(args: VerifyArgs) -> Result<Code> {
    let instances = match (&args.sweep, &args.eps) {
        (Some(s), _) => sweep_instances(&parse_sweep(s)?),
        (None, Some(eps)) => {
            let (Some(p), Some(q), Some(d)) = (args.p, args.q, args.d) else {
                bail!("--eps needs --p, --q and --d");
            };
            vec![params(eps, p, q, d)?]
        }
        (None, None) => bail!("give --sweep or --eps/--p/--q/--d"),
    };
    let tables = match &args.mutate {
        Some(m) => Tables::mutated(Mutation::parse(m).with_context(|| format!("bad mutation {m:?}"))?),
        None => Tables::default(),
    };
    let depth = depth(args.oracle_depth);
    let cache = OracleCache::compute(&instances, depth, args.jobs);
    let outcomes = checks::verify(&instances, tables, Some(&cache), depth, args.jobs);
    let s = Summary::of(&outcomes);

    for (k, m) in &s.mismatches {
        eprintln!("mismatch {k}: {}", serde_json::to_string(m)?);
    }
    for (k, e) in &s.depth_errors {
        eprintln!("oracle {k}: {e}");
    }
    for (k, e) in &s.other_errors {
        eprintln!("error {k}: {e}");
    }
    for (k, why) in &s.graph_unavailable {
        eprintln!("graph unavailable {k}: {why}");
    }
    let unavailable: BTreeSet<InstanceKey> = s.graph_unavailable.iter().map(|(k, _)| *k).collect();
    println!("instances: {}", s.instances);
    println!("agreeing: {}", s.agreeing);
    println!("table verdicts checked: {}", s.table_checks);
    println!("mismatches: {}", s.mismatches.len());
    println!("oracle depth errors: {}", s.depth_errors.len());
    println!("other errors: {}", s.other_errors.len());
    println!("graph route unavailable: {} instances", unavailable.len());
    println!(
        "E' bounds: hold against S(E') on {}/{}, against S(E) on {}/{}",
        s.eprime_bound_vs_eprime, s.eprime_bound_total, s.eprime_bound_vs_e, s.eprime_bound_total
    );
    let unfired = s.unfired_clauses();
    if !unfired.is_empty() && instances.len() > 1 {
        println!("clauses never exercised: {}", unfired.join(" "));
    }
    Ok(if !s.depth_errors.is_empty() {
        Code::Depth
    } else if !s.clean() {
        Code::Mismatch
    } else {
        Code::Ok
    })
}

/// Instance keys already present in a survey file.
fn existing_keys(path: &std::path::Path) -> Result<BTreeSet<InstanceKey>> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut first = String::new();
    BufReader::new(&file).read_line(&mut first)?;
    if first.trim_end() != report::CSV_VERSION {
        bail!("{} is not a survey file of this version", path.display());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    if header != report::COLUMNS {
        bail!("{} has unexpected columns", path.display());
    }
    let mut keys = BTreeSet::new();
    for row in rdr.deserialize::<Row>() {
        let r = row.with_context(|| format!("reading {}", path.display()))?;
        keys.insert(InstanceKey { eps: r.eps, p: r.p, q: r.q, d: r.d });
    }
    Ok(keys)
}

pub fn survey(args: SurveyArgs) -> Result<Code> {
    let text = fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let spec: SweepSpec = toml::from_str(&text).with_context(|| format!("malformed spec {}", args.spec.display()))?;
    let has_rows = fs::metadata(&args.out).map(|m| m.len() > 0).unwrap_or(false);
    let done = match (has_rows, args.resume) {
        (true, false) => bail!("{} exists; pass --resume to append", args.out.display()),
        (true, true) => existing_keys(&args.out)?,
        (false, _) => BTreeSet::new(),
    };
    let g = spec.generate();
    for s in g.skipped.iter().filter(|_| args.verbose) {
        eprintln!("skipped eps={} p={} q={} D={}: {}", s.eps, s.p, s.q, s.d, s.reason);
    }
    let todo: Vec<CurveParams> = g.instances.into_iter().filter(|p| !done.contains(&p.key())).collect();
    let results = sweep::run(&todo, args.jobs, |p| {
        compare_methods(p, &CompareOptions::default()).map(|r| Row::new(&Record::new(&r, Method::Both)))
    });

    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&args.out)
        .with_context(|| format!("opening {}", args.out.display()))?;
    let mut file = io::BufWriter::new(file);
    if !has_rows {
        report::write_csv_header(&mut file)?;
    }
    let mut w = report::csv_writer(file);
    let mut code = Code::Ok;
    let mut written = 0;
    for (key, row) in results {
        match row {
            Ok(row) => {
                w.serialize(row)?;
                written += 1;
            }
            Err(e) => {
                eprintln!("error {key}: {e}");
                if compare::depth_error(&e).is_some() {
                    code = Code::Depth;
                } else if code == Code::Ok {
                    code = Code::Mismatch;
                }
            }
        }
    }
    w.flush()?;
    eprintln!(
        "survey: {written} new rows, {} already present, {} combinations skipped",
        done.len(),
        g.skipped.len()
    );
    Ok(code)
}
