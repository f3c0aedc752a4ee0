//! `isogeo`: batch verification and data export on top of `isogeo-core`.
//!
//! Exit codes: 0 on success, 1 when a residual or relation check fails,
//! 2 on usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use isogeo_core::dirichlet::{dirichlet_partial_sum, dirichlet_partial_sum_grouped, SeriesPoint};
use isogeo_core::flat::{
    norm_census, orbifold_spectrum, verify_relation_with, LatticeKind, OrbifoldId, RelationCheck,
    SpectralRelation, FLAT_RELATIONS,
};
use isogeo_core::hyperbolic::{enumerate_geodesics, EnumConfig};
use isogeo_core::io::{generators_from_json, spectrum_from_json, spectrum_to_json};
use isogeo_core::scenario::scenario_rows;
use isogeo_core::{
    almost_conjugate, build_scenario, compare_weights, LengthTwistSpectrum, LengthValue, Weight,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the size of the worker pool.
pub const THREADS_ENV: &str = "ISOGEO_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "isogeo",
    version,
    about = "Length-twist spectra, necklace scenarios and flat orbifold checks"
)]
struct Cli {
    /// File receiving machine-readable output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of the machine-readable output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Square,
    Hex,
}

impl Family {
    fn lattice(self) -> LatticeKind {
        match self {
            Family::Square => LatticeKind::Square,
            Family::Hex => LatticeKind::Hexagonal,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the necklace solution for base q and check every constraint.
    Scenario {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 24)]
        n: u64,
    },
    /// Check spectral relations between flat torus quotients.
    FlatVerify {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 10_000)]
        max_norm: u64,
        /// A single relation such as "S1+2S4=3S2"; defaults to every known one in the family.
        #[arg(long)]
        relation: Option<String>,
        /// Dump the multiplicities of one quotient (S1, S2, S4, H1, H2, H3, H6) as CSV.
        #[arg(long)]
        emit_spectrum: Option<String>,
    },
    /// Compare two spectra for almost-conjugacy and equal total weight.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Print the total weight function of a spectrum.
    Weights {
        #[arg(long)]
        spectrum: PathBuf,
    },
    /// Evaluate the truncated Dirichlet series at s = sigma + i t.
    Dirichlet {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// Enumerate closed geodesics of the group generated by 2×2 matrices.
    Enumerate {
        #[arg(long)]
        generators: PathBuf,
        #[arg(long, default_value_t = 12)]
        max_word_length: usize,
        #[arg(long, default_value_t = 10.0)]
        cutoff: f64,
        #[arg(long, default_value_t = 1e-9)]
        epsilon: f64,
        /// Drop orientation-reversing geodesics.
        #[arg(long)]
        no_reversing: bool,
    },
}

/// Runs the command line against the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the command line, writing the report to `out` and diagnostics to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e:#}");
        return EXIT_USAGE;
    }
    match dispatch(&cli, out) {
        Ok(passed) => {
            if passed {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    // The global pool can only be set once per process; later calls keep it.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    let sink = Sink {
        path: cli.out.as_deref(),
        format: cli.format,
    };
    match &cli.command {
        Command::Scenario { q, n } => scenario(*q, *n, &sink, out),
        Command::FlatVerify {
            family,
            max_norm,
            relation,
            emit_spectrum,
        } => flat_verify(
            *family,
            *max_norm,
            relation.as_deref(),
            emit_spectrum.as_deref(),
            &sink,
            out,
        ),
        Command::Compare { a, b } => compare(a, b, &sink, out),
        Command::Weights { spectrum } => weights(spectrum, &sink, out),
        Command::Dirichlet { spectrum, sigma, t } => dirichlet(spectrum, *sigma, *t, &sink, out),
        Command::Enumerate {
            generators,
            max_word_length,
            cutoff,
            epsilon,
            no_reversing,
        } => {
            let config = EnumConfig {
                max_word_length: *max_word_length,
                length_cutoff: *cutoff,
                dedup_tolerance: *epsilon,
                include_reversing: !no_reversing,
            };
            enumerate(generators, &config, &sink, out)
        }
    }
}

/// Where machine output goes, and in which format.
struct Sink<'a> {
    path: Option<&'a Path>,
    format: Format,
}

impl Sink<'_> {
    fn table(
        &self,
        header: &[&str],
        rows: &[Vec<String>],
        doc: impl FnOnce() -> Value,
    ) -> Result<()> {
        let Some(path) = self.path else {
            return Ok(());
        };
        let text = match self.format {
            Format::Csv => csv(header, rows),
            Format::Json => serde_json::to_string_pretty(&doc())? + "\n",
        };
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_spectrum(path: &Path) -> Result<LengthTwistSpectrum> {
    spectrum_from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn ratio_text(num: &BigInt, den: &BigInt) -> String {
    format!("{num}/{den}")
}

fn length_text(l: &LengthValue) -> String {
    match l.canonical() {
        Some((root, mult)) => format!("{}*log({root})", ratio_text(mult.numer(), mult.denom())),
        None => format!("{}", l.to_f64()),
    }
}

fn weight_text(w: &Weight) -> String {
    match w.as_exact() {
        Some(r) => ratio_text(r.numer(), r.denom()),
        None => format!("{}", w.to_f64()),
    }
}

fn scenario(q: u64, n: u64, sink: &Sink, out: &mut dyn Write) -> Result<bool> {
    let sol = build_scenario(q, n)?;
    let rows = scenario_rows(&sol)?;
    let cs: Vec<String> = rows.iter().map(|r| r.c.to_string()).collect();
    writeln!(out, "necklace counts c_n for q = {q}, n = 1..{n}:")?;
    writeln!(out, "{}", cs.join(", "))?;
    writeln!(out)?;
    writeln!(
        out,
        "{:>4}  {:>12}  {:>12}  residual",
        "n", "a(n l0)", "b(n l0)"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{:>4}  {:>12}  {:>12}  {}",
            r.n,
            r.a,
            r.b,
            ratio_text(r.residual.numer(), r.residual.denom())
        )?;
    }
    let failures: Vec<u64> = rows
        .iter()
        .filter(|r| r.residual.numer().sign() != num_bigint::Sign::NoSign)
        .map(|r| r.n)
        .collect();
    if failures.is_empty() {
        writeln!(out, "PASS: every constraint residual is zero")?;
    } else {
        writeln!(out, "FAIL: nonzero residual at n = {failures:?}")?;
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.c.to_string(),
                r.a.to_string(),
                r.b.to_string(),
                r.residual.numer().to_string(),
                r.residual.denom().to_string(),
            ]
        })
        .collect();
    sink.table(
        &["n", "c_n", "a", "b", "residual_num", "residual_den"],
        &table,
        || {
            json!({
                "q": q,
                "horizon": n,
                "rows": rows.iter().map(|r| json!({
                    "n": r.n,
                    "c_n": r.c.to_string(),
                    "a": r.a.to_string(),
                    "b": r.b.to_string(),
                    "residual": ratio_text(r.residual.numer(), r.residual.denom()),
                })).collect::<Vec<_>>(),
            })
        },
    )?;
    Ok(failures.is_empty())
}

fn flat_verify(
    family: Family,
    max_norm: u64,
    relation: Option<&str>,
    emit: Option<&str>,
    sink: &Sink,
    out: &mut dyn Write,
) -> Result<bool> {
    let lattice = family.lattice();
    if let Some(id) = emit {
        let id: OrbifoldId = id.parse()?;
        if id.lattice() != lattice {
            bail!("{id} does not belong to the {family:?} family");
        }
        let spec = orbifold_spectrum(id, max_norm);
        let rows: Vec<Vec<String>> = spec
            .iter()
            .map(|(n, m)| vec![n.to_string(), m.to_string()])
            .collect();
        if sink.path.is_some() {
            sink.table(&["n", "multiplicity"], &rows, || {
                json!({
                    "orbifold": id.to_string(),
                    "max_norm": max_norm,
                    "multiplicities": spec.iter().map(|(n, m)| json!({"n": n, "multiplicity": m})).collect::<Vec<_>>(),
                })
            })?;
            writeln!(
                out,
                "wrote {} eigenvalues of {id} ({}) up to n = {max_norm}",
                rows.len(),
                id.conway()
            )?;
        } else {
            out.write_all(csv(&["n", "multiplicity"], &rows).as_bytes())?;
        }
        return Ok(true);
    }

    let relations: Vec<SpectralRelation> = match relation {
        Some(text) => {
            let rel: SpectralRelation = text.parse()?;
            if rel.lattice() != lattice {
                bail!("relation {text} does not belong to the {family:?} family");
            }
            vec![rel]
        }
        None => FLAT_RELATIONS
            .iter()
            .map(|t| t.parse::<SpectralRelation>())
            .collect::<std::result::Result<Vec<_>, _>>()?
            .into_iter()
            .filter(|r| r.lattice() == lattice)
            .collect(),
    };
    let census = norm_census(lattice, max_norm);
    let checks: Vec<RelationCheck> = relations
        .iter()
        .map(|r| verify_relation_with(r, &census))
        .collect();
    for c in &checks {
        match &c.first_failure {
            None => writeln!(out, "PASS {} (n <= {max_norm})", c.relation)?,
            Some(f) => writeln!(
                out,
                "FAIL {} (n <= {max_norm}): first failure at n = {}, left {} != right {}",
                c.relation, f.n, f.left, f.right
            )?,
        }
    }
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            let (n, l, r) = match &c.first_failure {
                Some(f) => (f.n.to_string(), f.left.to_string(), f.right.to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            vec![
                c.relation.to_string(),
                max_norm.to_string(),
                if c.holds() { "PASS" } else { "FAIL" }.into(),
                n,
                l,
                r,
            ]
        })
        .collect();
    sink.table(&["relation", "max_norm", "status", "failure_n", "left", "right"], &rows, || {
        json!(checks
            .iter()
            .map(|c| json!({
                "relation": c.relation.to_string(),
                "max_norm": max_norm,
                "holds": c.holds(),
                "first_failure": c.first_failure.as_ref().map(|f| json!({"n": f.n, "left": f.left, "right": f.right})),
            }))
            .collect::<Vec<_>>())
    })?;
    Ok(checks.iter().all(RelationCheck::holds))
}

fn compare(a_path: &Path, b_path: &Path, sink: &Sink, out: &mut dyn Write) -> Result<bool> {
    let a = load_spectrum(a_path)?;
    let b = load_spectrum(b_path)?;
    let report = almost_conjugate(&a, &b)?;
    let diffs = compare_weights(&a, &b)?;
    match &report.witness {
        None => writeln!(out, "almost conjugate up to horizon {}", report.horizon)?,
        Some(w) => writeln!(
            out,
            "not almost conjugate: at length {} ({:?}, nu = {}) multiplicities {} vs {}",
            w.length, w.orientation, w.nu, w.multiplicity_a, w.multiplicity_b
        )?,
    }
    if diffs.is_empty() {
        writeln!(out, "total weights agree up to horizon")?;
    } else {
        writeln!(out, "total weights differ at {} lengths:", diffs.len())?;
        for d in &diffs {
            writeln!(
                out,
                "  {}: {} vs {}",
                d.length,
                weight_text(&d.weight_a),
                weight_text(&d.weight_b)
            )?;
        }
    }
    let rows: Vec<Vec<String>> = diffs
        .iter()
        .map(|d| {
            vec![
                length_text(&d.length),
                d.length.to_f64().to_string(),
                weight_text(&d.weight_a),
                weight_text(&d.weight_b),
            ]
        })
        .collect();
    sink.table(
        &["length", "length_value", "weight_a", "weight_b"],
        &rows,
        || {
            json!({
                "almost_conjugate": report.almost_conjugate(),
                "witness": report.witness.as_ref().map(|w| json!({
                    "length": length_text(&w.length),
                    "orientation": w.orientation,
                    "nu": w.nu,
                    "multiplicity_a": w.multiplicity_a,
                    "multiplicity_b": w.multiplicity_b,
                })),
                "weight_differences": diffs.iter().map(|d| json!({
                    "length": length_text(&d.length),
                    "weight_a": weight_text(&d.weight_a),
                    "weight_b": weight_text(&d.weight_b),
                })).collect::<Vec<_>>(),
            })
        },
    )?;
    Ok(report.almost_conjugate())
}

fn weights(path: &Path, sink: &Sink, out: &mut dyn Write) -> Result<bool> {
    let spec = load_spectrum(path)?;
    let profile = spec.weight_profile();
    writeln!(
        out,
        "{} distinct lengths up to horizon {}",
        profile.len(),
        spec.horizon()
    )?;
    for (l, w) in &profile {
        writeln!(out, "W({l}) = {}", weight_text(w))?;
    }
    let rows: Vec<Vec<String>> = profile
        .iter()
        .map(|(l, w)| {
            vec![
                length_text(l),
                l.to_f64().to_string(),
                weight_text(w),
                w.to_f64().to_string(),
            ]
        })
        .collect();
    sink.table(
        &["length", "length_value", "weight", "weight_value"],
        &rows,
        || {
            json!(profile
                .iter()
                .map(|(l, w)| json!({"length": length_text(l), "weight": weight_text(w)}))
                .collect::<Vec<_>>())
        },
    )?;
    Ok(true)
}

fn sci(x: f64) -> String {
    format!("{x:.14e}")
}

fn dirichlet(path: &Path, sigma: f64, t: f64, sink: &Sink, out: &mut dyn Write) -> Result<bool> {
    if !sigma.is_finite() || !t.is_finite() {
        bail!("sigma and t must be finite");
    }
    let spec = load_spectrum(path)?;
    let point = SeriesPoint::new(sigma, t);
    let per = dirichlet_partial_sum(&spec, point);
    let grouped = dirichlet_partial_sum_grouped(&spec, point);
    let show = |z: Complex64| format!("real = {}, imag = {}", sci(z.re), sci(z.im));
    writeln!(out, "s = {sigma} + {t}i, horizon {}", spec.horizon())?;
    writeln!(out, "per-geodesic: {}", show(per.value))?;
    writeln!(out, "by weight:    {}", show(grouped.value))?;
    if per.outside_convergence {
        writeln!(
            out,
            "warning: sigma <= 1, the full series diverges here; this is only the truncated sum"
        )?;
    }
    let rows = vec![
        vec![
            "per_geodesic".to_string(),
            sci(per.value.re),
            sci(per.value.im),
        ],
        vec![
            "by_weight".to_string(),
            sci(grouped.value.re),
            sci(grouped.value.im),
        ],
    ];
    sink.table(&["form", "real", "imag"], &rows, || {
        json!({
            "sigma": sigma,
            "t": t,
            "outside_convergence": per.outside_convergence,
            "per_geodesic": {"real": sci(per.value.re), "imag": sci(per.value.im)},
            "by_weight": {"real": sci(grouped.value.re), "imag": sci(grouped.value.im)},
        })
    })?;
    Ok(true)
}

fn enumerate(path: &Path, config: &EnumConfig, sink: &Sink, out: &mut dyn Write) -> Result<bool> {
    let gens = generators_from_json(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    let en = enumerate_geodesics(&gens, config)?;
    writeln!(
        out,
        "{} generators, words up to length {}",
        gens.len(),
        config.max_word_length
    )?;
    writeln!(out, "words examined: {}", en.words_examined)?;
    writeln!(
        out,
        "closed geodesics up to length {}: {}",
        config.length_cutoff,
        en.geodesics.len()
    )?;
    writeln!(
        out,
        "non-translating cyclic words: {}",
        en.non_translating.len()
    )?;
    for e in en.spectrum.entries().iter().take(10) {
        writeln!(
            out,
            "  l = {:.12}  {:?}  nu = {}  x{}",
            e.length.to_f64(),
            e.orientation,
            e.nu,
            e.multiplicity
        )?;
    }
    if en.nu_mismatches > 0 {
        writeln!(
            out,
            "warning: {} words whose length disagrees with nu times their root",
            en.nu_mismatches
        )?;
    }
    if let Some(p) = sink.path {
        let text = match sink.format {
            Format::Json => spectrum_to_json(&en.spectrum)? + "\n",
            Format::Csv => {
                let rows: Vec<Vec<String>> = en
                    .geodesics
                    .iter()
                    .map(|g| {
                        vec![
                            g.word.to_string(),
                            g.length.to_string(),
                            format!("{:?}", g.orientation).to_lowercase(),
                            g.nu.to_string(),
                        ]
                    })
                    .collect();
                csv(&["word", "length", "orientation", "nu"], &rows)
            }
        };
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(true)
}
