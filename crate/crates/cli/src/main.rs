//! Command-line driver for the modular-functor pipelines.
//!
//! Exit codes: 0 success, 2 validation/usage error, 3 integrality failure,
//! 4 truncation failure, 5 cross-check failure.

mod cache;
mod mfconfig;
mod table;

use clap::{Args, Parser, Subcommand};
use modfun::catalog;
use modfun::cohft::{cohft_integral, CohftError};
use modfun::frobenius::{fusion_table, validate_mf, verlinde_dim, FrobeniusError, ModularFunctorData};
use modfun::hurwitz::bmat_hurwitz_check;
use modfun::scalar::{format_rational, parse_rational, Rational, Tolerance, INTEGER_TOL};
use modfun::toprec::{curve_from_cohft, curve_verlinde, default_trunc, free_energy, xi_decompose, TrError};
use num_traits::Zero;
use std::path::PathBuf;
use table::{fmt_float, Metadata, ResultTable, Row};

const EXIT_VALIDATION: i32 = 2;
const EXIT_INTEGRALITY: i32 = 3;
const EXIT_TRUNCATION: i32 = 4;
const EXIT_CROSSCHECK: i32 = 5;

#[derive(Parser)]
#[command(name = "modfun", version, about = "Verlinde dimensions, CohFT graph sums and topological recursion from modular functor data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Built-in data: su2:L, slN:N,L, dg:Zn or dg:S3
    #[arg(long, conflicts_with = "mf")]
    builtin: Option<String>,
    /// Modular functor JSON file (see docs for the schema)
    #[arg(long)]
    mf: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Output {
    /// Write the result table to this path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    /// Comparison tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// Intersection-number cache file (loaded before, saved after)
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Verlinde dimension of a labeled surface
    Verlinde {
        #[command(flatten)]
        source: Source,
        /// Genus of the surface
        #[arg(long, visible_alias = "g")]
        genus: u32,
        /// Boundary labels (names or indices, comma separated)
        #[arg(long, value_delimiter = ',')]
        labels: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Full fusion table N_{λμν}
    Fusion {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
    /// Topological recursion: polar coefficients of ω_{g,n}
    Tr {
        #[command(flatten)]
        source: Source,
        /// Chern parameter t as an exact rational "p/q"
        #[arg(long, default_value = "0")]
        t: String,
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Run both pipelines and compare (recursion vs stable-graph sums)
    Crosscheck {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "1")]
        t: String,
        /// Topologies to check, e.g. "0,3;0,4;1,1;1,2;2,1"
        #[arg(long, default_value = "0,3;0,4;1,1;1,2;2,1")]
        gn: String,
        #[command(flatten)]
        output: Output,
    },
    /// Write modular functor data as a JSON config file
    Export {
        #[command(flatten)]
        source: Source,
        /// Destination path
        #[arg(long)]
        out: PathBuf,
    },
    /// Restricted double Hurwitz series vs sl_N edge data
    Hurwitz {
        /// Built-in source, must be slN:N,L
        #[arg(long)]
        builtin: String,
        /// Two label indices λ1, λ2
        #[arg(long, value_delimiter = ',')]
        labels: Vec<usize>,
        /// Compare coefficients up to u^order
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[command(flatten)]
        output: Output,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn load_source(source: &Source, tol: Tolerance) -> Result<ModularFunctorData, (i32, String)> {
    let mf = match (&source.builtin, &source.mf) {
        (Some(spec), None) => catalog::builtin(spec).map_err(|e| (EXIT_VALIDATION, e.to_string()))?,
        (None, Some(path)) => mfconfig::load_mf(path, tol).map_err(|e| (EXIT_VALIDATION, e))?,
        _ => return Err((EXIT_VALIDATION, "exactly one of --builtin or --mf is required".into())),
    };
    let report = validate_mf(&mf, tol);
    if !report.all_hard_passed() {
        return Err((EXIT_VALIDATION, format!("validation failed for {}:\n{report}", mf.name)));
    }
    Ok(mf)
}

fn with_cache<T>(cache_path: &Option<PathBuf>, f: impl FnOnce() -> T) -> Result<T, (i32, String)> {
    if let Some(path) = cache_path {
        cache::load(path).map_err(|e| (EXIT_VALIDATION, e))?;
    }
    let out = f();
    if let Some(path) = cache_path {
        cache::save(path).map_err(|e| (EXIT_VALIDATION, e))?;
    }
    Ok(out)
}

fn emit(output: &Output, mut tbl: ResultTable) -> i32 {
    let rendered = tbl.render(&output.format);
    if let Some(path) = &output.out {
        if let Err(e) = std::fs::write(path, rendered) {
            return fail(EXIT_VALIDATION, format!("cannot write {}: {e}", path.display()));
        }
    } else if output.format == "csv" {
        print!("{rendered}");
    }
    0
}

fn metadata(mf: &str, pipeline: &str, t: &str, tolerance: f64) -> Metadata {
    Metadata {
        tool: "modfun".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mf: mf.into(),
        pipeline: pipeline.into(),
        t: t.into(),
        tolerance,
    }
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Verlinde { source, genus, labels, output } => {
            let tol = Tolerance::default();
            let mf = match load_source(&source, tol) {
                Ok(mf) => mf,
                Err((code, msg)) => return fail(code, msg),
            };
            let mut indices = Vec::new();
            for token in &labels {
                match resolve_label(&mf, token) {
                    Some(i) => indices.push(i),
                    None => return fail(EXIT_VALIDATION, format!("unknown label '{token}' for {}", mf.name)),
                }
            }
            match verlinde_dim(&mf, genus, &indices, INTEGER_TOL) {
                Ok(d) => {
                    println!("{d}");
                    let mut tbl = ResultTable::new(metadata(&mf.name, "verlinde", "0", INTEGER_TOL));
                    tbl.push(Row {
                        g: genus,
                        n: indices.len(),
                        channels: indices.iter().map(|&i| mf.labels[i].clone()).collect(),
                        degrees: vec![],
                        value: [fmt_float(d as f64), fmt_float(0.0)],
                        exact: Some(d.to_string()),
                    });
                    emit(&output, tbl)
                }
                Err(e @ FrobeniusError::NotAnInteger { .. }) => fail(EXIT_INTEGRALITY, e),
                Err(e) => fail(EXIT_VALIDATION, e),
            }
        }

        Command::Fusion { source, output } => {
            let tol = Tolerance::default();
            let mf = match load_source(&source, tol) {
                Ok(mf) => mf,
                Err((code, msg)) => return fail(code, msg),
            };
            match fusion_table(&mf, INTEGER_TOL) {
                Ok(table) => {
                    let k = mf.k();
                    let mut tbl = ResultTable::new(metadata(&mf.name, "fusion", "0", INTEGER_TOL));
                    for l in 0..k {
                        for m in 0..k {
                            for n in 0..k {
                                let v = table.get(l, m, n);
                                tbl.push(Row {
                                    g: 0,
                                    n: 3,
                                    channels: vec![mf.labels[l].clone(), mf.labels[m].clone(), mf.labels[n].clone()],
                                    degrees: vec![],
                                    value: [fmt_float(v as f64), fmt_float(0.0)],
                                    exact: Some(v.to_string()),
                                });
                            }
                        }
                    }
                    println!("{} fusion entries for {}", k * k * k, mf.name);
                    emit(&output, tbl)
                }
                Err(e @ FrobeniusError::NotAnInteger { .. }) => fail(EXIT_INTEGRALITY, e),
                Err(e) => fail(EXIT_VALIDATION, e),
            }
        }

        Command::Tr { source, t, g, n, output } => {
            let tol = output.tolerance.map(|r| Tolerance::new(r, r * 1e-3)).unwrap_or_default();
            let mf = match load_source(&source, tol) {
                Ok(mf) => mf,
                Err((code, msg)) => return fail(code, msg),
            };
            let t_rat = match parse_rational(&t) {
                Some(r) => r,
                None => return fail(EXIT_VALIDATION, format!("--t expects an exact rational, got '{t}'")),
            };
            let run_result = with_cache(&output.cache, || run_tr(&mf, &t_rat, g, n));
            let omega = match run_result {
                Ok(Ok(w)) => w,
                Ok(Err(TrError::InsufficientTruncation { needed, trunc })) => {
                    return fail(EXIT_TRUNCATION, format!("truncation {trunc} insufficient (needed {needed}) after retries"))
                }
                Ok(Err(e)) => return fail(EXIT_VALIDATION, e),
                Err((code, msg)) => return fail(code, msg),
            };
            let mut tbl = ResultTable::new(metadata(&mf.name, "tr", &format_rational(&t_rat), tol.rel));
            for (ch, block) in &omega.blocks {
                for (deg, v) in block {
                    if !deg.iter().all(|&d| d < 0) {
                        continue; // polar part only
                    }
                    tbl.push(Row {
                        g,
                        n,
                        channels: ch.iter().map(|&i| mf.labels[i].clone()).collect(),
                        degrees: deg.clone(),
                        value: [fmt_float(v.re), fmt_float(v.im)],
                        exact: None,
                    });
                }
            }
            println!("ω_{{{g},{n}}} for {} at t = {}: {} polar rows", mf.name, format_rational(&t_rat), tbl.rows.len());
            emit(&output, tbl)
        }

        Command::Crosscheck { source, t, gn, output } => {
            let tolerance = output.tolerance.unwrap_or(1e-7);
            let tol = Tolerance::default();
            let mf = match load_source(&source, tol) {
                Ok(mf) => mf,
                Err((code, msg)) => return fail(code, msg),
            };
            let t_rat = match parse_rational(&t) {
                Some(r) => r,
                None => return fail(EXIT_VALIDATION, format!("--t expects an exact rational, got '{t}'")),
            };
            let topologies = match parse_topologies(&gn) {
                Some(v) => v,
                None => return fail(EXIT_VALIDATION, format!("cannot parse --gn '{gn}'")),
            };
            let result = with_cache(&output.cache, || crosscheck(&mf, &t_rat, &topologies, tolerance));
            match result {
                Ok(0) => 0,
                Ok(code) => code,
                Err((code, msg)) => fail(code, msg),
            }
        }

        Command::Export { source, out } => {
            let mf = match load_source(&source, Tolerance::default()) {
                Ok(mf) => mf,
                Err((code, msg)) => return fail(code, msg),
            };
            let cfg = mfconfig::MfConfigFile::from_mf(&mf);
            let text = serde_json::to_string_pretty(&cfg).expect("serializable") + "\n";
            if let Err(e) = std::fs::write(&out, text) {
                return fail(EXIT_VALIDATION, format!("cannot write {}: {e}", out.display()));
            }
            println!("wrote {} ({} labels)", out.display(), mf.k());
            0
        }

        Command::Hurwitz { builtin, labels, order, output } => {
            let tolerance = output.tolerance.unwrap_or(1e-9);
            let (n, l) = match builtin.strip_prefix("slN:").or_else(|| builtin.strip_prefix("sln:")).and_then(|p| p.split_once(',')) {
                Some((n, l)) => match (n.trim().parse::<u32>(), l.trim().parse::<u32>()) {
                    (Ok(n), Ok(l)) => (n, l),
                    _ => return fail(EXIT_VALIDATION, format!("cannot parse '{builtin}'")),
                },
                None => return fail(EXIT_VALIDATION, "hurwitz requires --builtin slN:N,L"),
            };
            if labels.len() != 2 {
                return fail(EXIT_VALIDATION, "--labels expects two label indices");
            }
            let mf = match catalog::sln_level(n, l) {
                Ok(mf) => mf,
                Err(e) => return fail(EXIT_VALIDATION, e),
            };
            if labels.iter().any(|&i| i >= mf.k()) {
                return fail(EXIT_VALIDATION, format!("label index out of range (K = {})", mf.k()));
            }
            let weights: Vec<Vec<u32>> = labels
                .iter()
                .map(|&i| {
                    mf.labels[i]
                        .trim_matches(|c| c == '(' || c == ')')
                        .split(',')
                        .map(|x| x.parse().unwrap())
                        .collect()
                })
                .collect();
            let dev = match bmat_hurwitz_check(n, l, &weights[0], &weights[1], order) {
                Ok(d) => d,
                Err(e) => return fail(EXIT_VALIDATION, e),
            };
            // emit the S-matrix-side series table alongside the deviation
            let t1 = Rational::from_integer(1.into());
            let mut tbl = ResultTable::new(metadata(&mf.name, "hurwitz", "1", tolerance));
            for k in 0..=order {
                let coeff = if k == 0 {
                    if labels[0] == labels[1] { modfun::Scalar::new(1.0, 0.0) } else { modfun::Scalar::zero() }
                } else {
                    -modfun::cohft::edge_coeff(&mf, &t1, labels[0], labels[1], k - 1, 0)
                };
                tbl.push(Row {
                    g: 0,
                    n: 2,
                    channels: vec![mf.labels[labels[0]].clone(), mf.labels[labels[1]].clone()],
                    degrees: vec![k as i64],
                    value: [fmt_float(coeff.re), fmt_float(coeff.im)],
                    exact: None,
                });
            }
            println!(
                "B_{{λ1λ2}}(u) for {} λ1={} λ2={} to order u^{order}: max deviation {dev:.3e}",
                mf.name, mf.labels[labels[0]], mf.labels[labels[1]]
            );
            let code = emit(&output, tbl);
            if code != 0 {
                return code;
            }
            if dev > tolerance {
                return fail(EXIT_CROSSCHECK, format!("Hurwitz/S-matrix deviation {dev:.3e} exceeds {tolerance:.1e}"));
            }
            0
        }
    }
}

fn resolve_label(mf: &ModularFunctorData, token: &str) -> Option<usize> {
    if let Some(i) = mf.label_index(token) {
        return Some(i);
    }
    token.parse::<usize>().ok().filter(|&i| i < mf.k())
}

fn parse_topologies(s: &str) -> Option<Vec<(u32, usize)>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (g, n) = p.split_once(',')?;
            Some((g.trim().parse().ok()?, n.trim().parse().ok()?))
        })
        .collect()
}

fn run_tr(mf: &ModularFunctorData, t: &Rational, g: u32, n: usize) -> Result<modfun::toprec::OmegaGN, TrError> {
    if t.is_zero() {
        modfun::toprec::tr_run_auto(|trunc| Ok(curve_verlinde(mf, trunc)), g, n)
    } else {
        modfun::toprec::tr_run_auto(|trunc| curve_from_cohft(mf, t, trunc), g, n)
    }
}

/// Run both pipelines on each topology and compare entrywise; also compare
/// `F_g` against the `(g,0)` graph sum for any genus >= 2 in the list.
fn crosscheck(mf: &ModularFunctorData, t: &Rational, topologies: &[(u32, usize)], tolerance: f64) -> i32 {
    let tol = Tolerance::default();
    let mut failed = false;
    for &(g, n) in topologies {
        if n == 0 || 2 * g as i64 - 2 + (n as i64) <= 0 {
            println!("SKIP  (g,n)=({g},{n}): unstable or n = 0");
            continue;
        }
        let omega = match run_tr(mf, t, g, n) {
            Ok(w) => w,
            Err(e) => {
                println!("FAIL  (g,n)=({g},{n}): recursion failed: {e}");
                failed = true;
                continue;
            }
        };
        let curve = if t.is_zero() {
            curve_verlinde(mf, default_trunc(g, n))
        } else {
            curve_from_cohft(mf, t, default_trunc(g, n)).expect("t != 0")
        };
        let tensor = match xi_decompose(&omega, &curve, tol) {
            Ok(t) => t,
            Err(e) => {
                println!("FAIL  (g,n)=({g},{n}): decomposition failed: {e}");
                failed = true;
                continue;
            }
        };
        let mut dev: f64 = 0.0;
        let mut count = 0usize;
        let dim = 3 * g as i64 - 3 + n as i64;
        for channels in tuples(mf.k(), n) {
            for degrees in degree_tuples(dim, n) {
                let graph = match cohft_integral(mf, t, g, &channels, &degrees) {
                    Ok(v) => v,
                    Err(CohftError::DegreeOverflow { .. }) => continue,
                    Err(e) => {
                        println!("FAIL  (g,n)=({g},{n}): graph sum failed: {e}");
                        failed = true;
                        continue;
                    }
                };
                let key: Vec<(usize, u32)> = channels.iter().copied().zip(degrees.iter().copied()).collect();
                dev = dev.max((graph - tensor.get(&key)).norm());
                count += 1;
            }
        }
        let ok = dev <= tolerance;
        println!(
            "{}  (g,n)=({g},{n}): {count} entries compared, max deviation {dev:.3e} (tolerance {tolerance:.1e})",
            if ok { "PASS " } else { "FAIL " }
        );
        failed |= !ok;
    }
    let mut genera: Vec<u32> = topologies.iter().map(|&(g, _)| g).filter(|&g| g >= 2).collect();
    genera.sort_unstable();
    genera.dedup();
    for g in genera {
        let fg = if t.is_zero() {
            free_energy(&curve_verlinde(mf, default_trunc(g, 1)), g)
        } else {
            curve_from_cohft(mf, t, default_trunc(g, 1)).and_then(|c| free_energy(&c, g))
        };
        let fg = match fg {
            Ok(v) => v,
            Err(e) => {
                println!("FAIL  F_{g}: {e}");
                failed = true;
                continue;
            }
        };
        let graph = if t.is_zero() {
            // degree-0 theory: the (g,0) integral vanishes for g >= 2
            Ok(modfun::Scalar::zero())
        } else {
            let gd = modfun::cohft::GiventalData::from_mf(mf, t, 3 * g as usize + 4);
            modfun::cohft::cohft_integral_vec(&gd, g, &[], &[])
        };
        match graph {
            Ok(v) => {
                let d = (fg - v).norm();
                let ok = d <= tolerance;
                println!("{}  F_{g} = {:.12e} vs (g,0) graph sum {:.12e}: deviation {d:.3e}", if ok { "PASS " } else { "FAIL " }, fg.re, v.re);
                failed |= !ok;
            }
            Err(e) => {
                println!("FAIL  (g,0) graph sum: {e}");
                failed = true;
            }
        }
    }
    if failed {
        eprintln!("cross-check FAILED");
        EXIT_CROSSCHECK
    } else {
        println!("cross-check passed");
        0
    }
}

fn tuples(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|c| {
                (0..k).map(move |x| {
                    let mut c2 = c.clone();
                    c2.push(x);
                    c2
                })
            })
            .collect();
    }
    out
}

fn degree_tuples(max_total: i64, n: usize) -> Vec<Vec<u32>> {
    fn go(rem: i64, n: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in 0..=rem {
            cur.push(k as u32);
            go(rem - k, n - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(max_total, n, &mut Vec::new(), &mut out);
    out
}
