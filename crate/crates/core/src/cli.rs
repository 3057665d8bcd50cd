//! Command-line front end.
//!
//! Data goes to standard output (or `--out`), messages to standard error.
//! Exit codes: 0 certified, 1 certification failure, 2 bad input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::definetti::{certify_with, CERTIFY_SLACK};
use crate::error::{Error, Result};
use crate::exch::ExchangeableLaw;
use crate::generators::{GeneratorKind, GeneratorSpec};
use crate::io::{self, CertRow, CertificateJson, ImprovementJson, Real17, SearchJson, Units};
use crate::optimizer::{
    adversarial_search, improve_certificate, FitOptions, ImproveOptions, SearchOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable bounding the worker count.
pub const THREADS_ENV: &str = "DEFINETTI_THREADS";

#[derive(Debug, Parser)]
#[command(name = "definetti", version, about = "Finite de Finetti certificates for exchangeable laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a law file for a generator family.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        n: Option<usize>,
        /// Read the generator from a JSON spec instead of flags.
        #[arg(long, conflicts_with = "kind")]
        spec: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build the mixture and certify the bound chain for one k.
    Certify {
        #[arg(long)]
        law: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Certify every (n, k) cell of a grid.
    Sweep {
        #[arg(long, conflicts_with = "kind")]
        law: Option<PathBuf>,
        #[command(flatten)]
        gen: GenArgs,
        /// Lengths, e.g. `4..12` or `4,6,8`. Defaults to the law file's n.
        #[arg(long = "n", value_name = "RANGE")]
        n_range: Option<String>,
        /// Marginal sizes, e.g. `1..3`.
        #[arg(long = "k", value_name = "RANGE")]
        k_range: String,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Certify and list every bound side by side.
    Compare {
        #[arg(long)]
        law: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Refit mixture weights over the constructed atoms and a grid.
    Optimize {
        #[arg(long)]
        law: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        grid_resolution: usize,
        /// Use only the constructed atoms.
        #[arg(long)]
        constructed_only: bool,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Random local search for laws with a large D / bound ratio.
    Search {
        #[arg(long = "alphabet-size", short = 'm')]
        alphabet_size: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Report information quantities in bits.
    #[arg(long)]
    bits: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl ReportArgs {
    fn units(&self) -> Units {
        if self.bits {
            Units::Bits
        } else {
            Units::Nats
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Kind {
    Iid,
    IidMixture,
    Polya,
    Urn,
    DiaconisPair,
    RandomDirichlet,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Ball counts for `polya` and `urn`, e.g. `1,1`.
    #[arg(long)]
    counts: Option<String>,
    /// Letter laws separated by `;`, e.g. `0.3,0.7;0.7,0.3`.
    #[arg(long)]
    components: Option<String>,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long = "alphabet-size", short = 'm')]
    alphabet_size: Option<usize>,
    /// Dirichlet concentration.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|e| usage(format!("bad {what} entry {x:?}: {e}")))
        })
        .collect()
}

/// Comma list of `a` or inclusive `a..b` items, sorted and deduplicated.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| usage(format!("bad range {item:?}")))?;
            let b: usize = b.trim().parse().map_err(|_| usage(format!("bad range {item:?}")))?;
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| usage(format!("bad range item {item:?}")))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

impl GenArgs {
    fn spec(&self, n: Option<usize>) -> Result<GeneratorSpec> {
        let kind = self.kind.ok_or_else(|| usage("--kind is required"))?;
        let n = match (n, kind) {
            (Some(n), _) => n,
            (None, Kind::DiaconisPair) => 2,
            (None, _) => return Err(usage("--n is required")),
        };
        let counts = || -> Result<Vec<u32>> {
            parse_list(self.counts.as_deref().ok_or_else(|| usage("--counts is required"))?, "count")
        };
        let components = || -> Result<Vec<Vec<f64>>> {
            self.components
                .as_deref()
                .ok_or_else(|| usage("--components is required"))?
                .split(';')
                .map(|c| parse_list(c, "component"))
                .collect()
        };
        let kind = match kind {
            Kind::Iid => {
                let mut cs = components()?;
                if cs.len() != 1 {
                    return Err(usage("iid takes exactly one component"));
                }
                GeneratorKind::Iid {
                    component: cs.remove(0),
                }
            }
            Kind::IidMixture => {
                let components = components()?;
                let weights = match &self.weights {
                    Some(w) => parse_list(w, "weight")?,
                    None => vec![1.0 / components.len() as f64; components.len()],
                };
                GeneratorKind::IidMixture {
                    components,
                    weights,
                }
            }
            Kind::Polya => GeneratorKind::Polya { counts: counts()? },
            Kind::Urn => GeneratorKind::Urn { counts: counts()? },
            Kind::DiaconisPair => GeneratorKind::DiaconisPair,
            Kind::RandomDirichlet => GeneratorKind::RandomDirichlet {
                alphabet_size: self
                    .alphabet_size
                    .ok_or_else(|| usage("--alphabet-size is required"))?,
                concentration: self.alpha,
                seed: self.seed,
            },
        };
        Ok(GeneratorSpec::new(kind, n))
    }
}

/// Parses `args` (program name first) and runs one command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => return report_error(e, stdout, stderr),
    };
    match pool.install(|| execute(cli.command)) {
        Ok(output) => match emit(&output, stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => report_error(e, stdout, stderr),
        },
        Err(e) => report_error(e, stdout, stderr),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| usage(format!("cannot start worker pool: {e}")))
}

fn report_error(e: Error, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error: {e}");
    match e {
        Error::CertificationFailure { certificate, .. } => {
            if let Ok(text) = io::to_json(&CertificateJson::new(&certificate, Units::Nats)) {
                let _ = stdout.write_all(text.as_bytes());
            }
            EXIT_CERTIFICATION
        }
        _ => EXIT_USAGE,
    }
}

struct Output {
    text: String,
    path: Option<PathBuf>,
}

fn emit(output: &Output, stdout: &mut dyn Write) -> Result<()> {
    match &output.path {
        Some(p) => std::fs::write(p, &output.text)?,
        None => stdout.write_all(output.text.as_bytes())?,
    }
    Ok(())
}

fn load(path: &Path) -> Result<ExchangeableLaw<f64>> {
    io::read_law_path(path).map_err(|e| match e {
        Error::Io(err) => usage(format!("cannot read {}: {err}", path.display())),
        other => other,
    })
}

fn certificate_text(
    certs: &[crate::definetti::Certificate<f64>],
    format: Format,
    units: Units,
) -> Result<String> {
    match format {
        Format::Json => {
            let recs: Vec<_> = certs.iter().map(|c| CertificateJson::new(c, units)).collect();
            if recs.len() == 1 {
                io::to_json(&recs[0])
            } else {
                io::to_json(&recs)
            }
        }
        Format::Csv => {
            let rows: Vec<_> = certs.iter().map(|c| CertRow::new(c, units)).collect();
            let mut buf = Vec::new();
            io::write_csv(&rows, &mut buf)?;
            Ok(String::from_utf8(buf).expect("CSV is ASCII"))
        }
    }
}

fn execute(cmd: Command) -> Result<Output> {
    let slack = CERTIFY_SLACK;
    match cmd {
        Command::Generate { gen, n, spec, out } => {
            let spec = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)
                        .map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
                    serde_json::from_str::<GeneratorSpec>(&text)
                        .map_err(|e| usage(format!("bad generator spec: {e}")))?
                }
                None => gen.spec(n)?,
            };
            let law = spec.build::<f64>()?;
            Ok(Output {
                text: io::law_to_json(&law)?,
                path: out,
            })
        }
        Command::Certify { law, k, report } => {
            let law = load(&law)?;
            let cert = certify_with(&law, k, slack)?.certificate;
            Ok(Output {
                text: certificate_text(&[cert], report.format.unwrap_or(Format::Json), report.units())?,
                path: report.out,
            })
        }
        Command::Compare { law, k, report } => {
            let law = load(&law)?;
            let cert = certify_with(&law, k, slack)?.certificate;
            Ok(Output {
                text: compare_text(&cert, report.format.unwrap_or(Format::Json), report.units())?,
                path: report.out,
            })
        }
        Command::Sweep {
            law,
            gen,
            n_range,
            k_range,
            report,
        } => {
            let ks = parse_range(&k_range)?;
            let (base, ns) = match law {
                Some(p) => {
                    let law = load(&p)?;
                    let ns = match n_range {
                        Some(r) => parse_range(&r)?,
                        None => vec![law.n()],
                    };
                    if let Some(&bad) = ns.iter().find(|&&n| n > law.n()) {
                        return Err(usage(format!(
                            "n = {bad} exceeds the law file's n = {}",
                            law.n()
                        )));
                    }
                    (Source::Law(law), ns)
                }
                None => {
                    let ns = match n_range {
                        Some(r) => parse_range(&r)?,
                        None => return Err(usage("--n is required")),
                    };
                    let spec = gen.spec(Some(ns.first().copied().unwrap_or(2)))?;
                    (Source::Spec(spec), ns)
                }
            };
            let cells: Vec<(usize, usize)> = ns
                .iter()
                .flat_map(|&n| ks.iter().filter(move |&&k| k >= 1 && k < n).map(move |&k| (n, k)))
                .collect();
            if cells.is_empty() {
                return Err(usage("no (n, k) cell with 1 <= k <= n-1 in the given ranges"));
            }
            let laws: Vec<(usize, ExchangeableLaw<f64>)> = ns
                .par_iter()
                .filter(|&&n| cells.iter().any(|c| c.0 == n))
                .map(|&n| base.at(n).map(|l| (n, l)))
                .collect::<Result<_>>()?;
            let certs = cells
                .par_iter()
                .map(|&(n, k)| {
                    let law = &laws.iter().find(|(m, _)| *m == n).expect("law built").1;
                    certify_with(law, k, slack).map(|c| c.certificate)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Output {
                text: certificate_text(&certs, report.format.unwrap_or(Format::Csv), report.units())?,
                path: report.out,
            })
        }
        Command::Optimize {
            law,
            k,
            grid_resolution,
            constructed_only,
            max_iter,
            tol,
            report,
        } => {
            if !constructed_only && grid_resolution == 0 {
                return Err(usage("--grid-resolution must be at least 1"));
            }
            let law = load(&law)?;
            let opts = ImproveOptions {
                grid_resolution: if constructed_only {
                    None
                } else {
                    Some(grid_resolution)
                },
                fit: FitOptions {
                    max_iter,
                    tol,
                    ..FitOptions::default()
                },
                slack,
            };
            let imp = improve_certificate(&law, k, &opts)?;
            let units = report.units();
            let text = match report.format.unwrap_or(Format::Json) {
                Format::Json => io::to_json(&ImprovementJson::new(&imp, units))?,
                Format::Csv => {
                    let mut row = CertRow::new(&imp.certificate, units);
                    row.d = units.scale(imp.fit.d.value());
                    let mut buf = Vec::new();
                    io::write_csv(&[row], &mut buf)?;
                    String::from_utf8(buf).expect("CSV is ASCII")
                }
            };
            Ok(Output {
                text,
                path: report.out,
            })
        }
        Command::Search {
            alphabet_size,
            n,
            k,
            seed,
            restarts,
            steps,
            report,
        } => {
            let opts = SearchOptions {
                restarts,
                steps,
                ..SearchOptions::default()
            };
            let rep = adversarial_search::<f64>(alphabet_size, n, k, seed, &opts)?;
            let units = report.units();
            let text = match report.format.unwrap_or(Format::Json) {
                Format::Json => io::to_json(&SearchJson::new(&rep, units))?,
                Format::Csv => certificate_text(std::slice::from_ref(&rep.certificate), Format::Csv, units)?,
            };
            Ok(Output {
                text,
                path: report.out,
            })
        }
    }
}

enum Source {
    Law(ExchangeableLaw<f64>),
    Spec(GeneratorSpec),
}

impl Source {
    fn at(&self, n: usize) -> Result<ExchangeableLaw<f64>> {
        match self {
            Source::Law(law) => law.marginal(n),
            Source::Spec(spec) => spec.with_n(n).build(),
        }
    }
}

#[derive(serde::Serialize)]
struct CompareRow {
    quantity: &'static str,
    value: Option<Real17>,
    note: &'static str,
}

#[derive(serde::Serialize)]
struct CompareJson {
    n: usize,
    k: usize,
    alphabet_size: usize,
    m_star: usize,
    units: &'static str,
    rows: Vec<CompareRow>,
}

fn compare_text(c: &crate::definetti::Certificate<f64>, format: Format, units: Units) -> Result<String> {
    let u = |x: f64| Some(Real17(units.scale(x)));
    let rows = vec![
        CompareRow { quantity: "D", value: u(c.d), note: "constructed mixture" },
        CompareRow { quantity: "mstar_value", value: u(c.mstar_value), note: "conditional MI sum at m_star" },
        CompareRow { quantity: "thm_bound", value: u(c.thm_bound), note: "tail mutual-information bound" },
        CompareRow { quantity: "cor_bound_H", value: u(c.cor_bound_h), note: "entropy bound" },
        CompareRow { quantity: "cor_bound_logA", value: u(c.cor_bound_log_a), note: "alphabet-size bound" },
        CompareRow { quantity: "first_bound", value: c.first_bound.and_then(u), note: "binary alphabets only" },
        CompareRow { quantity: "second_rate", value: u(c.second_rate), note: "rate-only, constant set to 1" },
        CompareRow { quantity: "tv", value: Some(Real17(c.tv)), note: "total variation" },
        CompareRow { quantity: "pinsker_tv", value: Some(Real17(c.pinsker_tv)), note: "Pinsker bound on tv" },
        CompareRow { quantity: "df_tv_ref", value: Some(Real17(c.df_tv_ref)), note: "reference tv rate k(k-1)/(2n)" },
    ];
    match format {
        Format::Json => io::to_json(&CompareJson {
            n: c.n,
            k: c.k,
            alphabet_size: c.alphabet_size,
            m_star: c.m_star,
            units: units.name(),
            rows,
        }),
        Format::Csv => {
            let mut wtr = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            wtr.write_record(["quantity", "value", "note"])?;
            for r in &rows {
                let v = r.value.map(|x| io::fmt_real(x.0)).unwrap_or_default();
                wtr.write_record([r.quantity, v.as_str(), r.note])?;
            }
            let buf = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(buf).expect("CSV is ASCII"))
        }
    }
}
