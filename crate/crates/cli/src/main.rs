//! Command-line front end for the toolkit: experiment orchestration over
//! parameter grids, parallel sweeps, and bit-stable CSV/JSON reports.
//!
//! Exit codes: 0 success, 2 assertion-class failure (an exact identity or
//! oracle comparison was violated), 3 resource limits and I/O trouble,
//! 64 usage errors (bad flags or parameter domains).

mod emit;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use emit::{json_report, pack_params, Csv, Json};
use smoothsqf::arith::{self, SieveTables};
use smoothsqf::characters;
use smoothsqf::congruences;
use smoothsqf::kloosterman;
use smoothsqf::lemma_lab::{self, Constants};
use smoothsqf::report::{fmt_f64, fmt_opt_f64, CountReport};
use smoothsqf::representatives::{self, MalphaStatus, MpStatus};
use smoothsqf::verify;
use smoothsqf::Error;

const EXIT_OK: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_USAGE: u8 = 64;

/// Parses an unsigned integer, accepting scientific notation like `1e6`.
fn sci_u64(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if !(v >= 0.0) || v > 9.0e18 {
        return Err(format!("out of range: {s}"));
    }
    let r = v.round();
    if (v - r).abs() > 1e-6 * r.max(1.0) {
        return Err(format!("not an integer: {s}"));
    }
    Ok(r as u64)
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "smoothsqf",
    version,
    about = "Smooth square-free representatives, character sums, Kloosterman sums, and congruence counts"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Report format
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-prime cover bounds: least M with every class holding a p-smooth
    /// square-free integer <= M
    MpTable {
        #[arg(long, value_parser = sci_u64)]
        pmin: u64,
        #[arg(long, value_parser = sci_u64)]
        pmax: u64,
    },
    /// Least q^alpha-smooth square-free representative per reduced class
    Malpha {
        #[arg(long, value_parser = sci_u64)]
        q: u64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_parser = sci_u64)]
        budget: u64,
    },
    /// Window prime-pair construction l1*l2*u over reduced classes
    Thm13 {
        #[arg(long, value_parser = sci_u64)]
        p: u64,
        #[arg(long)]
        eps: f64,
        /// Single class (sweeps all reduced classes when omitted)
        #[arg(long)]
        a: Option<i64>,
    },
    /// CRT lower-bound family: prime p whose first K candidates 4+kp all
    /// hit a prime square
    LowerBound {
        #[arg(long = "K", value_parser = clap::value_parser!(u32).range(1..=6))]
        k: u32,
    },
    /// Exact congruence counters with optional naive-oracle comparison
    Congruence {
        #[command(subcommand)]
        counter: Counter,
    },
    /// Census of primes in [Q, 2Q] with large square-free character sums
    CharCensus {
        #[arg(long = "Q", value_parser = sci_u64)]
        q: u64,
        #[arg(long, value_parser = sci_u64)]
        t: u64,
        #[arg(long)]
        delta: f64,
    },
    /// Double Kloosterman sum maxima over prime windows
    Ksum {
        /// Single prime modulus
        #[arg(long, value_parser = sci_u64, conflicts_with = "q")]
        p: Option<u64>,
        /// Sweep over all primes in [Q, 2Q]
        #[arg(long = "Q", value_parser = sci_u64)]
        q: Option<u64>,
        /// Window bases L (comma-separated)
        #[arg(long = "L", value_delimiter = ',', required = true)]
        l: Vec<f64>,
    },
    /// Short-window censuses against predicted main terms
    LemmaLab {
        #[command(subcommand)]
        census: Census,
    },
    /// Run every exact-identity check and print a pass/fail table
    VerifySuite {},
}

#[derive(Subcommand)]
enum Counter {
    /// l1*l2*u = a (mod p), window primes, 1 <= u <= h
    #[command(name = "N")]
    N {
        #[arg(long, value_parser = sci_u64)]
        p: u64,
        #[arg(long)]
        a: i64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        h: f64,
        /// Compare against the naive triple loop
        #[arg(long)]
        oracle: bool,
    },
    /// Square-free u variant, dual route (direct filter vs inclusion-exclusion)
    #[command(name = "NSF")]
    Nsf {
        #[arg(long, value_parser = sci_u64)]
        p: u64,
        #[arg(long)]
        a: i64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        h: f64,
    },
    /// l1*l2^2*v = a (mod p)
    #[command(name = "Q")]
    Q {
        #[arg(long, value_parser = sci_u64)]
        p: u64,
        #[arg(long)]
        a: i64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        oracle: bool,
    },
    /// u^2*v = a (mod p), 1 <= u <= U, 1 <= v <= V
    #[command(name = "T")]
    T {
        #[arg(long, value_parser = sci_u64)]
        p: u64,
        #[arg(long)]
        a: i64,
        #[arg(long = "U")]
        u: f64,
        #[arg(long = "V")]
        v: f64,
        #[arg(long)]
        oracle: bool,
    },
    /// Balanced reciprocal-square tuples in [U, 2U]
    #[command(name = "I")]
    I {
        #[arg(long, value_parser = sci_u64)]
        p: u64,
        #[arg(long)]
        r: u32,
        #[arg(long = "U")]
        u: f64,
        #[arg(long, default_value_t = 0)]
        lambda: i64,
        #[arg(long)]
        oracle: bool,
    },
    /// Sum of window counts at rescaled residues a*dbar^2, d in [F, 2F]
    #[command(name = "R")]
    R {
        #[arg(long, value_parser = sci_u64)]
        p: u64,
        #[arg(long)]
        a: i64,
        #[arg(long = "F")]
        f: f64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        h: f64,
    },
    /// Structured products m*n*r = a (mod q) with square-free smooth mn
    #[command(name = "products")]
    Products {
        #[arg(long, value_parser = sci_u64)]
        q: u64,
        #[arg(long)]
        a: i64,
        #[arg(long = "N")]
        n: f64,
        #[arg(long)]
        zeta: f64,
        /// Window factor for every window (>= 2^(1/15))
        #[arg(long, default_value_t = 2.0)]
        wf: f64,
        /// Prime windows for r as countxbase, e.g. 2x8,1x3;
        /// defaults to 12 primes near q^(1/8) plus one near q^(1/10)
        #[arg(long = "r-spec", value_delimiter = ',')]
        r_spec: Vec<String>,
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(Subcommand)]
enum Census {
    /// Square-free integers in [M, psi*M] coprime to q
    Sqfap {
        #[arg(long = "M", value_delimiter = ',', required = true)]
        m: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = sci_u64, default_value = "1")]
        q: Vec<u64>,
    },
    /// Window count coprime to q against phi(q)/q * M
    ApUpper {
        #[arg(long = "M", value_delimiter = ',', required = true)]
        m: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = sci_u64, required = true)]
        q: Vec<u64>,
    },
    /// Square-free counts over windows N/(d p'), primes p' in [N^zeta, N]
    Smooth {
        #[arg(long = "N")]
        n: f64,
        #[arg(long)]
        zeta: f64,
        #[arg(long, value_parser = sci_u64, default_value = "1")]
        d: u64,
        #[arg(long, value_parser = sci_u64, default_value = "1")]
        q: u64,
    },
    /// Square-free coprime pairs (m, n) in [N, psi*N]^2
    Sums {
        #[arg(long = "N")]
        n: f64,
        #[arg(long)]
        zeta: f64,
        #[arg(long, value_parser = sci_u64, default_value = "1")]
        q: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap's own help/version output is not an error
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                let _ = e.print();
                return ExitCode::from(EXIT_OK);
            }
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    setup_threads();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Domain(_) => EXIT_USAGE,
                Error::Resource(_) | Error::NeedsLargerSieve(_) => EXIT_RESOURCE,
            })
        }
    }
}

/// RS_THREADS overrides the worker count.
fn setup_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(s) = std::env::var("RS_THREADS") {
        if let Ok(n) = s.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn write_out(out: &Option<PathBuf>, bytes: &str) -> Result<(), Error> {
    let io_err = |e: std::io::Error| Error::Resource(format!("write failed: {e}"));
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(io_err),
        None => std::io::stdout()
            .write_all(bytes.as_bytes())
            .map_err(io_err),
    }
}

fn sieve(limit: f64) -> Result<SieveTables, Error> {
    SieveTables::build((limit.ceil() as u64).max(100))
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::MpTable { pmin, pmax } => run_mp_table(&cli, pmin, pmax),
        Cmd::Malpha { q, alpha, budget } => run_malpha(&cli, q, alpha, budget),
        Cmd::Thm13 { p, eps, a } => run_thm13(&cli, p, eps, a),
        Cmd::LowerBound { k } => run_lower_bound(&cli, k),
        Cmd::Congruence { ref counter } => run_congruence(&cli, counter),
        Cmd::CharCensus { q, t, delta } => run_char_census(&cli, q, t, delta),
        Cmd::Ksum { p, q, ref l } => run_ksum(&cli, p, q, l),
        Cmd::LemmaLab { ref census } => run_lemma_lab(&cli, census),
        Cmd::VerifySuite {} => run_verify_suite(&cli),
    }
}

fn config_json(cmd: &str, fields: Vec<(String, Json)>, seed: u64) -> Json {
    let mut all = vec![("command".to_string(), Json::str(cmd))];
    all.extend(fields);
    all.push(("seed".to_string(), Json::u64(seed)));
    Json::Obj(all)
}

fn run_mp_table(cli: &Cli, pmin: u64, pmax: u64) -> Result<u8, Error> {
    if pmin < 2 || pmax < pmin {
        return Err(Error::Domain(format!("bad prime range [{pmin}, {pmax}]")));
    }
    let tables = sieve(pmax as f64)?;
    let results = representatives::compute_m_table(pmin, pmax, &tables)?;
    let text = match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&[
                "p",
                "status",
                "m_value",
                "reduced_max",
                "exponent",
                "classes",
                "budget",
            ]);
            for r in &results {
                let (status, value) = match &r.status {
                    MpStatus::Finite(v) => ("finite", Some(*v)),
                    MpStatus::Infinite { .. } => ("infinite", None),
                    MpStatus::Undecided { .. } => ("undecided", None),
                };
                let exponent =
                    value.map(|v| (v as f64).ln() / (r.p as f64).ln());
                csv.row(vec![
                    r.p.to_string(),
                    status.to_string(),
                    value.map(|v| v.to_string()).unwrap_or_default(),
                    r.reduced_max.map(|v| v.to_string()).unwrap_or_default(),
                    fmt_opt_f64(exponent),
                    r.per_class.iter().filter(|c| c.is_some()).count().to_string(),
                    r.budget.to_string(),
                ]);
            }
            csv.render()
        }
        Format::Json => {
            let rows: Vec<Json> = results
                .iter()
                .map(|r| {
                    let (status, value, uncovered) = match &r.status {
                        MpStatus::Finite(v) => ("finite", Some(*v), Vec::new()),
                        MpStatus::Infinite { uncovered } => ("infinite", None, uncovered.clone()),
                        MpStatus::Undecided { uncovered } => ("undecided", None, uncovered.clone()),
                    };
                    Json::Obj(vec![
                        ("p".into(), Json::u64(r.p)),
                        ("status".into(), Json::str(status)),
                        ("m_value".into(), Json::opt_u64(value)),
                        ("reduced_max".into(), Json::opt_u64(r.reduced_max)),
                        (
                            "exponent".into(),
                            Json::opt_f64(value.map(|v| (v as f64).ln() / (r.p as f64).ln())),
                        ),
                        (
                            "uncovered".into(),
                            Json::Arr(uncovered.into_iter().map(Json::u64).collect()),
                        ),
                    ])
                })
                .collect();
            json_report(
                config_json(
                    "mp-table",
                    vec![
                        ("pmin".into(), Json::u64(pmin)),
                        ("pmax".into(), Json::u64(pmax)),
                    ],
                    cli.seed,
                ),
                Json::Arr(rows),
            )
        }
    };
    write_out(&cli.out, &text)?;
    Ok(EXIT_OK)
}

fn run_malpha(cli: &Cli, q: u64, alpha: f64, budget: u64) -> Result<u8, Error> {
    let tables = sieve(budget as f64)?;
    let r = representatives::compute_m_alpha_star(q, alpha, budget, &tables)?;
    let text = match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&["q", "alpha", "budget", "class", "found", "s", "exponent"]);
            for &(a, s) in &r.per_class {
                csv.row(vec![
                    q.to_string(),
                    fmt_f64(alpha),
                    budget.to_string(),
                    a.to_string(),
                    s.is_some().to_string(),
                    s.map(|v| v.to_string()).unwrap_or_default(),
                    fmt_opt_f64(s.map(|v| (v as f64).ln() / (q as f64).ln())),
                ]);
            }
            csv.render()
        }
        Format::Json => {
            let (status, value, uncovered) = match &r.status {
                MalphaStatus::Finite(v) => ("finite", Some(*v), Vec::new()),
                MalphaStatus::Undecided { uncovered } => ("undecided", None, uncovered.clone()),
            };
            let per_class: Vec<Json> = r
                .per_class
                .iter()
                .map(|&(a, s)| {
                    Json::Obj(vec![
                        ("class".into(), Json::u64(a)),
                        ("s".into(), Json::opt_u64(s)),
                        (
                            "exponent".into(),
                            Json::opt_f64(s.map(|v| (v as f64).ln() / (q as f64).ln())),
                        ),
                    ])
                })
                .collect();
            json_report(
                config_json(
                    "malpha",
                    vec![
                        ("q".into(), Json::u64(q)),
                        ("alpha".into(), Json::f64(alpha)),
                        ("budget".into(), Json::u64(budget)),
                    ],
                    cli.seed,
                ),
                Json::Obj(vec![
                    ("status".into(), Json::str(status)),
                    ("value".into(), Json::opt_u64(value)),
                    (
                        "exponent".into(),
                        Json::opt_f64(value.map(|v| (v as f64).ln() / (q as f64).ln())),
                    ),
                    ("smooth_bound".into(), Json::f64(r.smooth_bound)),
                    (
                        "uncovered".into(),
                        Json::Arr(uncovered.into_iter().map(Json::u64).collect()),
                    ),
                    ("per_class".into(), Json::Arr(per_class)),
                ]),
            )
        }
    };
    write_out(&cli.out, &text)?;
    Ok(EXIT_OK)
}

fn run_thm13(cli: &Cli, p: u64, eps: f64, a: Option<i64>) -> Result<u8, Error> {
    let tables = sieve(p as f64)?;
    let reps = match a {
        Some(a) => vec![representatives::prime_pair_representative(p, a, eps, &tables)?],
        None => representatives::prime_pair_sweep(p, eps, &tables)?,
    };
    let found = reps.iter().filter(|r| r.record.found).count();
    let text = match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&[
                "p",
                "eps",
                "class",
                "found",
                "s",
                "l1",
                "l2",
                "u",
                "exponent",
                "within_budget",
            ]);
            for r in &reps {
                let (l1, l2, u) = match r.parts {
                    Some((x, y, z)) => (x.to_string(), y.to_string(), z.to_string()),
                    None => (String::new(), String::new(), String::new()),
                };
                csv.row(vec![
                    p.to_string(),
                    fmt_f64(eps),
                    r.record.class.to_string(),
                    r.record.found.to_string(),
                    r.record.s.map(|v| v.to_string()).unwrap_or_default(),
                    l1,
                    l2,
                    u,
                    fmt_opt_f64(r.record.exponent),
                    r.record
                        .s
                        .map(|s| ((s as f64) <= r.size_budget).to_string())
                        .unwrap_or_default(),
                ]);
            }
            csv.render()
        }
        Format::Json => {
            let rows: Vec<Json> = reps
                .iter()
                .map(|r| {
                    Json::Obj(vec![
                        ("class".into(), Json::u64(r.record.class)),
                        ("found".into(), Json::Bool(r.record.found)),
                        ("s".into(), Json::opt_u64(r.record.s)),
                        (
                            "parts".into(),
                            match r.parts {
                                Some((l1, l2, u)) => Json::Arr(vec![
                                    Json::u64(l1),
                                    Json::u64(l2),
                                    Json::u64(u),
                                ]),
                                None => Json::Null,
                            },
                        ),
                        ("exponent".into(), Json::opt_f64(r.record.exponent)),
                    ])
                })
                .collect();
            json_report(
                config_json(
                    "thm13",
                    vec![
                        ("p".into(), Json::u64(p)),
                        ("eps".into(), Json::f64(eps)),
                        ("a".into(), a.map(Json::i64).unwrap_or(Json::Null)),
                    ],
                    cli.seed,
                ),
                Json::Obj(vec![
                    ("window_l".into(), Json::f64(reps[0].l)),
                    ("window_k".into(), Json::u64(reps[0].k as u64)),
                    ("size_budget".into(), Json::f64(reps[0].size_budget)),
                    ("found".into(), Json::u64(found as u64)),
                    ("classes".into(), Json::u64(reps.len() as u64)),
                    ("per_class".into(), Json::Arr(rows)),
                ]),
            )
        }
    };
    write_out(&cli.out, &text)?;
    Ok(EXIT_OK)
}

fn run_lower_bound(cli: &Cli, k: u32) -> Result<u8, Error> {
    let tables = sieve(4_000_000.0)?;
    let r = representatives::booker_lower_bound(k, &tables)?;
    let text = match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&["K", "residue", "modulus", "p", "s_min", "ratio"]);
            csv.row(vec![
                r.k.to_string(),
                r.residue.to_string(),
                r.modulus.to_string(),
                r.p.to_string(),
                r.s_min.to_string(),
                fmt_f64(r.ratio),
            ]);
            csv.render()
        }
        Format::Json => json_report(
            config_json("lower-bound", vec![("K".into(), Json::u64(k as u64))], cli.seed),
            Json::Obj(vec![
                ("residue".into(), Json::u64(r.residue)),
                ("modulus".into(), Json::u64(r.modulus)),
                ("p".into(), Json::u64(r.p)),
                ("s_min".into(), Json::u64(r.s_min)),
                ("ratio".into(), Json::f64(r.ratio)),
            ]),
        ),
    };
    write_out(&cli.out, &text)?;
    Ok(EXIT_OK)
}

fn count_report_json(r: &CountReport, oracle: Option<u64>) -> Json {
    let params: Vec<(String, Json)> = r
        .params
        .iter()
        .map(|(k, v)| (k.clone(), Json::f64(*v)))
        .collect();
    let mut fields = vec![
        ("label".into(), Json::str(r.label.clone())),
        ("params".into(), Json::Obj(params)),
        ("exact_count".into(), Json::u64(r.exact_count)),
        ("main_term".into(), Json::f64(r.main_term)),
        ("error_bound".into(), Json::opt_f64(r.error_bound)),
        (
            "relative_deviation".into(),
            Json::f64(r.relative_deviation),
        ),
        (
            "flag".into(),
            r.flag
                .as_ref()
                .map(|f| Json::str(f.clone()))
                .unwrap_or(Json::Null),
        ),
    ];
    if let Some(o) = oracle {
        fields.push(("oracle".into(), Json::u64(o)));
    }
    Json::Obj(fields)
}

fn count_report_csv(reports: &[(CountReport, Option<u64>)]) -> String {
    let mut csv = Csv::new(&[
        "label",
        "params",
        "exact_count",
        "main_term",
        "error_bound",
        "relative_deviation",
        "flag",
        "oracle",
    ]);
    for (r, oracle) in reports {
        csv.row(vec![
            r.label.clone(),
            pack_params(&r.params),
            r.exact_count.to_string(),
            fmt_f64(r.main_term),
            fmt_opt_f64(r.error_bound),
            fmt_f64(r.relative_deviation),
            r.flag.clone().unwrap_or_default(),
            oracle.map(|o| o.to_string()).unwrap_or_default(),
        ]);
    }
    csv.render()
}

fn parse_r_spec(specs: &[String]) -> Result<Vec<(usize, f64)>, Error> {
    specs
        .iter()
        .map(|s| {
            let (count, base) = s
                .split_once('x')
                .ok_or_else(|| Error::Domain(format!("bad r-spec entry '{s}', want countxbase")))?;
            let count: usize = count
                .parse()
                .map_err(|_| Error::Domain(format!("bad r-spec count in '{s}'")))?;
            let base: f64 = base
                .parse()
                .map_err(|_| Error::Domain(format!("bad r-spec base in '{s}'")))?;
            Ok((count, base))
        })
        .collect()
}

fn run_congruence(cli: &Cli, counter: &Counter) -> Result<u8, Error> {
    let mut mismatch = false;
    let reports: Vec<(CountReport, Option<u64>)> = match *counter {
        Counter::N { p, a, l, h, oracle } => {
            let tables = sieve(p as f64)?;
            let r = congruences::count_n(p, a, l, h, &tables)?;
            let o = if oracle {
                let o = congruences::count_n_naive(p, a, l, h, &tables)?;
                mismatch |= o != r.exact_count;
                Some(o)
            } else {
                None
            };
            vec![(r, o)]
        }
        Counter::Nsf { p, a, l, h } => {
            let tables = sieve(p as f64)?;
            let sc = congruences::count_n_squarefree(p, a, l, h, &tables)?;
            // the inclusion-exclusion route doubles as the oracle here
            mismatch |= !sc.agree;
            let incl = if sc.inclusion_exclusion >= 0 {
                Some(sc.inclusion_exclusion as u64)
            } else {
                None
            };
            vec![(sc.report, incl)]
        }
        Counter::Q { p, a, l, h, oracle } => {
            let tables = sieve(p as f64)?;
            let r = congruences::count_q(p, a, l, h, &tables)?;
            let o = if oracle {
                let o = congruences::count_q_naive(p, a, l, h, &tables)?;
                mismatch |= o != r.exact_count;
                Some(o)
            } else {
                None
            };
            vec![(r, o)]
        }
        Counter::T { p, a, u, v, oracle } => {
            let tables = sieve(p as f64)?;
            let r = congruences::count_t(p, a, u, v, &tables)?;
            let o = if oracle {
                let o = congruences::count_t_naive(p, a, u, v, &tables)?;
                mismatch |= o != r.exact_count;
                Some(o)
            } else {
                None
            };
            vec![(r, o)]
        }
        Counter::I {
            p,
            r,
            u,
            lambda,
            oracle,
        } => {
            let tables = sieve(p as f64)?;
            let rep = congruences::count_i(p, r, u, lambda, &tables)?;
            let o = if oracle {
                let o = congruences::count_i_naive(p, r, u, lambda, &tables)?;
                mismatch |= o != rep.exact_count;
                Some(o)
            } else {
                None
            };
            vec![(rep, o)]
        }
        Counter::R { p, a, f, l, h } => {
            let tables = sieve(p as f64)?;
            vec![(congruences::count_r(p, a, f, l, h, &tables)?, None)]
        }
        Counter::Products {
            q,
            a,
            n,
            zeta,
            wf,
            ref r_spec,
            oracle,
        } => {
            let spec = if r_spec.is_empty() {
                vec![
                    (12usize, (q as f64).powf(1.0 / 8.0)),
                    (1usize, (q as f64).powf(1.0 / 10.0)),
                ]
            } else {
                parse_r_spec(r_spec)?
            };
            let top = spec
                .iter()
                .map(|&(_, b)| wf * b)
                .fold(wf * n, f64::max)
                .max(q as f64);
            let tables = sieve(top + 1.0)?;
            let r = congruences::count_structured_products(q, a, n, zeta, wf, &spec, &tables)?;
            let o = if oracle {
                let o = congruences::count_structured_products_naive(
                    q, a, n, zeta, wf, &spec, &tables,
                )?;
                mismatch |= o != r.exact_count;
                Some(o)
            } else {
                None
            };
            vec![(r, o)]
        }
    };
    let text = match cli.format {
        Format::Csv => count_report_csv(&reports),
        Format::Json => json_report(
            config_json("congruence", Vec::new(), cli.seed),
            Json::Arr(
                reports
                    .iter()
                    .map(|(r, o)| count_report_json(r, *o))
                    .collect(),
            ),
        ),
    };
    write_out(&cli.out, &text)?;
    Ok(if mismatch { EXIT_CHECK_FAILED } else { EXIT_OK })
}

fn run_char_census(cli: &Cli, q: u64, t: u64, delta: f64) -> Result<u8, Error> {
    let tables = sieve(2.0 * q as f64)?;
    let rep = characters::exceptional_prime_census(q, t, delta, &tables)?;
    let text = match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&["prime", "max_abs_sum", "exponent", "violates_bound"]);
            for row in &rep.rows {
                csv.row(vec![
                    row.prime.to_string(),
                    fmt_f64(row.max_abs),
                    fmt_f64(row.exponent),
                    row.violates.to_string(),
                ]);
            }
            csv.render()
        }
        Format::Json => {
            let rows: Vec<Json> = rep
                .rows
                .iter()
                .map(|r| {
                    Json::Obj(vec![
                        ("prime".into(), Json::u64(r.prime)),
                        ("max_abs_sum".into(), Json::f64(r.max_abs)),
                        ("exponent".into(), Json::f64(r.exponent)),
                        ("violates_bound".into(), Json::Bool(r.violates)),
                    ])
                })
                .collect();
            json_report(
                config_json(
                    "char-census",
                    vec![
                        ("Q".into(), Json::u64(q)),
                        ("t".into(), Json::u64(t)),
                        ("delta".into(), Json::f64(delta)),
                    ],
                    cli.seed,
                ),
                Json::Obj(vec![
                    ("bound".into(), Json::f64(rep.bound)),
                    ("violations".into(), Json::u64(rep.violation_count as u64)),
                    ("gamma".into(), Json::f64(rep.gamma)),
                    ("theta_1".into(), Json::f64(rep.theta_candidates.0)),
                    ("theta_2".into(), Json::f64(rep.theta_candidates.1)),
                    (
                        "predicted_exceptional".into(),
                        Json::f64(rep.predicted_exceptional),
                    ),
                    ("rows".into(), Json::Arr(rows)),
                ]),
            )
        }
    };
    write_out(&cli.out, &text)?;
    Ok(EXIT_OK)
}

fn run_ksum(cli: &Cli, p: Option<u64>, q: Option<u64>, l_list: &[f64]) -> Result<u8, Error> {
    let mut ls = l_list.to_vec();
    ls.sort_by(|a, b| a.partial_cmp(b).expect("finite L"));
    ls.dedup();
    let (primes, limit) = match (p, q) {
        (Some(p), None) => (vec![p], p as f64),
        (None, Some(q)) => {
            let tables = sieve(2.0 * q as f64)?;
            (tables.primes_in(q as f64, 2.0 * q as f64).to_vec(), 2.0 * q as f64)
        }
        _ => {
            return Err(Error::Domain(
                "ksum needs exactly one of --p or --Q".into(),
            ))
        }
    };
    let lmax = ls.last().copied().unwrap_or(2.0);
    let tables = sieve(limit.max(2.0 * lmax + 1.0))?;
    let mut csv = Csv::new(&[
        "prime",
        "L",
        "K",
        "max_abs",
        "exponent_observed",
        "bound_k1",
        "bound_k2",
        "bound_k3",
        "bound_k4",
        "bound_k5",
    ]);
    let mut rows_json = Vec::new();
    for &prime in &primes {
        for &l in &ls {
            let window = tables.prime_window(l, prime)?;
            let (_, max_abs) = kloosterman::max_over_residues(prime, l, &tables)?;
            let exponent = if max_abs > 0.0 {
                Some(max_abs.ln() / (prime as f64).ln())
            } else {
                None
            };
            let bounds: Vec<f64> = (1..=5u32)
                .map(|k| {
                    let kf = k as f64;
                    l.powf((3.0 * kf - 1.0) / (2.0 * kf)) * (prime as f64).powf(1.0 / (2.0 * kf))
                        + l.powf((4.0 * kf - 1.0) / (2.0 * kf))
                })
                .collect();
            csv.row(vec![
                prime.to_string(),
                fmt_f64(l),
                window.k().to_string(),
                fmt_f64(max_abs),
                fmt_opt_f64(exponent),
                fmt_f64(bounds[0]),
                fmt_f64(bounds[1]),
                fmt_f64(bounds[2]),
                fmt_f64(bounds[3]),
                fmt_f64(bounds[4]),
            ]);
            rows_json.push(Json::Obj(vec![
                ("prime".into(), Json::u64(prime)),
                ("L".into(), Json::f64(l)),
                ("K".into(), Json::u64(window.k() as u64)),
                ("max_abs".into(), Json::f64(max_abs)),
                ("exponent_observed".into(), Json::opt_f64(exponent)),
                (
                    "bounds".into(),
                    Json::Arr(bounds.iter().map(|&b| Json::f64(b)).collect()),
                ),
            ]));
        }
    }
    let text = match cli.format {
        Format::Csv => csv.render(),
        Format::Json => json_report(
            config_json(
                "ksum",
                vec![
                    ("p".into(), Json::opt_u64(p)),
                    ("Q".into(), Json::opt_u64(q)),
                    (
                        "L".into(),
                        Json::Arr(ls.iter().map(|&l| Json::f64(l)).collect()),
                    ),
                ],
                cli.seed,
            ),
            Json::Arr(rows_json),
        ),
    };
    write_out(&cli.out, &text)?;
    Ok(EXIT_OK)
}

fn run_lemma_lab(cli: &Cli, census: &Census) -> Result<u8, Error> {
    let mut reports: Vec<CountReport> = Vec::new();
    match census {
        Census::Sqfap { m, q } => {
            let mut ms = m.clone();
            ms.sort_by(|a, b| a.partial_cmp(b).expect("finite M"));
            let top = ms.last().copied().unwrap_or(2.0) * arith::psi() + 1.0;
            let tables = sieve(top)?;
            for &mv in &ms {
                for &qv in q {
                    reports.push(lemma_lab::sqfap_count(mv, qv, &tables)?);
                }
            }
        }
        Census::ApUpper { m, q } => {
            let mut ms = m.clone();
            ms.sort_by(|a, b| a.partial_cmp(b).expect("finite M"));
            let top = ms.last().copied().unwrap_or(2.0) * arith::psi() + 1.0;
            let tables = sieve(top)?;
            for &mv in &ms {
                for &qv in q {
                    let r = lemma_lab::ap_upper_check(mv, qv, &tables)?;
                    // shaped like the other censuses: main term phi(q)/q * M
                    let phi = tables.euler_phi(qv)? as f64;
                    let mut rep = CountReport::new(
                        "ap-upper",
                        &[("M", mv), ("q", qv as f64)],
                        r.count,
                        phi / qv as f64 * mv,
                        None,
                    );
                    if !r.bound_ok {
                        rep = rep.with_flag("bound-exceeded");
                    }
                    reports.push(rep);
                }
            }
        }
        Census::Smooth { n, zeta, d, q } => {
            let tables = sieve((arith::psi() * n / *d as f64).max(*n) + 1.0)?;
            reports.push(lemma_lab::smooth_lemma_census(*n, *zeta, *d, *q, &tables)?);
        }
        Census::Sums { n, zeta, q } => {
            let top = (arith::psi() * n + 1.0).max(1_000_000.0);
            let tables = sieve(top)?;
            let constants = Constants::compute(&tables, 1_000_000)?;
            reports.push(lemma_lab::sums_lemma_census(*n, *zeta, *q, &tables, &constants)?);
        }
    }
    let text = match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&["lemma", "params", "exact", "main_term", "relative_deviation"]);
            for r in &reports {
                csv.row(vec![
                    r.label.clone(),
                    pack_params(&r.params),
                    r.exact_count.to_string(),
                    fmt_f64(r.main_term),
                    fmt_f64(r.relative_deviation),
                ]);
            }
            csv.render()
        }
        Format::Json => json_report(
            config_json("lemma-lab", Vec::new(), cli.seed),
            Json::Arr(reports.iter().map(|r| count_report_json(r, None)).collect()),
        ),
    };
    write_out(&cli.out, &text)?;
    Ok(EXIT_OK)
}

fn run_verify_suite(cli: &Cli) -> Result<u8, Error> {
    let tables = sieve(1_100_000.0)?;
    let report = verify::verify_suite(cli.seed, &tables)?;
    write_out(&cli.out, &report.render())?;
    Ok(if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}
