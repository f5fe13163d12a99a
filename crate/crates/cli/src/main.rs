use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fiberforge::fiber::build_fiber;
use fiberforge::homology::{betti_over_field, homology, ChainComplex, GroupPresentation};
use fiberforge::morse::fibration_certificate;
use fiberforge::n5::{assemble_n5, complexes_isomorphic, gamma0_quotient, PairingTable};
use fiberforge::orientation::with_reversed_states;
use fiberforge::report::{
    fiber_summary, full_report, group_json, groups_json, run_suite, CheckResult, CheckVerdict, Context, Suite,
    SuiteResult, Tier, VerificationReport,
};
use fiberforge::triangulation::Triangulation;

/// Prints a line, ignoring a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Exit status for command-line usage errors, distinct from check verdicts.
const USAGE_ERROR: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "fiberforge", version, about = "Verifies a fibration of cusped hyperbolic 5-manifolds over the circle")]
struct Cli {
    /// Seed for the randomized collapse search.
    #[arg(long, global = true, env = "FIBERFORGE_SEED", default_value_t = 0)]
    seed: u64,
    /// Include per-check wall times (the report is then not reproducible).
    #[arg(long, global = true)]
    timings: bool,
    /// Write the JSON report of the command to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structural checks of the polytope, the coloring, or the move sets.
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
    },
    /// Collapsibility certificate for the circle-valued function.
    CertifyFibration {
        #[arg(long, value_enum)]
        space: Space,
        /// Write every collapse certificate, with its link, as JSON.
        #[arg(long, value_name = "PATH")]
        emit_collapses: Option<PathBuf>,
    },
    /// Builds the fiber triangulation and writes it in tri4 format.
    BuildFiber {
        #[arg(long, visible_alias = "complex", value_enum)]
        space: Space,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Assembles the two-copy manifold from a facet pairing table.
    AssembleN5 {
        #[arg(long, value_name = "PATH")]
        table: PathBuf,
        /// Compare with the quotient of the cyclic cover.
        #[arg(long)]
        compare_gamma0: bool,
        /// Write the assembled complex as JSON.
        #[arg(long, value_name = "PATH")]
        emit_complex: Option<PathBuf>,
    },
    /// Integral homology of a tri3/tri4 triangulation or of a pairing table.
    Homology {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Remove ideal vertices (open stars of ideal classes, or truncation).
        #[arg(long)]
        truncate: bool,
        /// Betti numbers over F_p instead (0 for the rationals).
        #[arg(long, value_name = "P")]
        field: Option<u64>,
    },
    /// Abelianization of a finite group presentation.
    Abelianize {
        #[arg(long, value_name = "PATH")]
        presentation: PathBuf,
    },
    /// Runs every suite and writes the full report.
    Report {
        #[arg(long, value_enum, default_value_t = TierArg::Default)]
        tier: TierArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerifyTarget {
    Polytope,
    Coloring,
    Moves,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Space {
    M5,
    N5,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TierArg {
    Default,
    Long,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let ctx = Context::new(cli.seed);
    let tier = match &cli.command {
        Command::Report { tier: TierArg::Long } => Tier::Long,
        _ => Tier::Default,
    };
    let suites = match &cli.command {
        Command::Verify { target } => {
            let suite = match target {
                VerifyTarget::Polytope => Suite::Polytope,
                VerifyTarget::Coloring => Suite::Coloring,
                VerifyTarget::Moves => Suite::Moves,
            };
            let r = run_suite(&ctx, suite);
            if let VerifyTarget::Moves = target {
                let sparse = r.checks.iter().find(|c| c.name == "sparse partitions");
                let singletons = r.checks.iter().any(|c| c.name.contains("singletons") && c.passed());
                if let Some(c) = sparse {
                    let which = if singletons { " (singletons)" } else { "" };
                    say!("sparse partitions found: {}{which}", c.computed);
                }
            }
            vec![r]
        }
        Command::CertifyFibration { space, emit_collapses } => {
            let suite = match space {
                Space::M5 => Suite::CertifyM5,
                Space::N5 => Suite::CertifyN5,
            };
            let r = run_suite(&ctx, suite);
            if let Some(first) = r.checks.first() {
                say!("report {}", first.computed["verdict"].as_str().unwrap_or("error"));
            }
            if let Some(path) = emit_collapses {
                let x = complex_of(&ctx, *space)?;
                let full = fibration_certificate(x, ctx.coloring()?, &ctx.certificate_options(true))?;
                let certs = full.certificates.unwrap_or_default();
                write_json(path, &json!({"certificates": certs}))?;
            }
            vec![r]
        }
        Command::BuildFiber { space, out } => {
            let f = build_fiber(complex_of(&ctx, *space)?)?;
            f.triangulation.write(out).with_context(|| format!("writing {}", out.display()))?;
            let summary = match space {
                Space::N5 => fiber_summary(&f.triangulation)?,
                Space::M5 => json!({
                    "pentachora": f.triangulation.len(),
                    "components": f.triangulation.component_count(),
                }),
            };
            vec![single("build-fiber", summary)]
        }
        Command::AssembleN5 {
            table,
            compare_gamma0,
            emit_complex,
        } => {
            let text = fs::read_to_string(table).with_context(|| format!("reading {}", table.display()))?;
            let t = PairingTable::parse(&text).with_context(|| format!("in {}", table.display()))?;
            let x = assemble_n5(&t, ctx.coloring()?).with_context(|| format!("in {}", table.display()))?;
            if let Some(path) = emit_complex {
                write_json(path, &x.to_json(true))?;
            }
            let mut checks = vec![check(
                "assemble-n5",
                json!({"copies": x.copy_count(), "cusps": fiberforge::complex::cusp_census(&x)?.len()}),
            )];
            if *compare_gamma0 {
                let q = gamma0_quotient(ctx.coloring()?)?;
                let plain = complexes_isomorphic(&q.complex, &x, false)?;
                let reversed = match with_reversed_states(&x) {
                    Some(r) => complexes_isomorphic(&q.complex, &r, true)?,
                    None => false,
                };
                checks.push(compare("isomorphic to the quotient", plain));
                checks.push(compare("isomorphic with states up to global reversal", reversed));
            }
            vec![SuiteResult {
                suite: "assemble-n5".into(),
                checks,
            }]
        }
        Command::Homology { input, truncate, field } => {
            let chains = chains_of(&ctx, input, *truncate)?;
            let computed = match field {
                Some(p) => json!({"field": p, "betti": betti_over_field(&chains, *p)}),
                None => json!({"homology": groups_json(&homology(&chains))}),
            };
            if let Some(h) = computed.get("homology").and_then(Value::as_array) {
                for (k, g) in h.iter().enumerate() {
                    say!("H{k} = {}", fmt_group(g));
                }
            }
            vec![single("homology", computed)]
        }
        Command::Abelianize { presentation } => {
            let text = fs::read_to_string(presentation).with_context(|| format!("reading {}", presentation.display()))?;
            let p = GroupPresentation::parse(&text).with_context(|| format!("in {}", presentation.display()))?;
            let g = group_json(&p.abelianize());
            say!("abelianization = {}", fmt_group(&g));
            vec![single("abelianize", g)]
        }
        Command::Report { .. } => full_report(&ctx, tier).suites,
    };
    let mut report = VerificationReport::new(cli.seed, tier, suites);
    if !cli.timings {
        report.strip_timings();
    }
    for c in report.checks() {
        say!("{}", c.line());
    }
    if let Some(path) = &cli.json {
        fs::write(path, report.to_json_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.exit_code())
}

fn complex_of(ctx: &Context, space: Space) -> Result<&fiberforge::complex::PolytopalComplex> {
    Ok(match space {
        Space::M5 => ctx.m5()?,
        Space::N5 => ctx.n5()?,
    })
}

/// Chain complex of a triangulation file, or of the complex of a pairing table.
fn chains_of(ctx: &Context, input: &Path, truncate: bool) -> Result<ChainComplex> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    if text.trim_start().starts_with("tri") {
        let t = Triangulation::parse(&text).with_context(|| format!("in {}", input.display()))?;
        return Ok(t.chain_complex(truncate)?);
    }
    if text.trim_start().starts_with("copy,") {
        let t = PairingTable::parse(&text).with_context(|| format!("in {}", input.display()))?;
        let x = assemble_n5(&t, ctx.coloring()?)?;
        if !truncate {
            bail!("pairing-table complexes are cusped; pass --truncate");
        }
        return Ok(x.cellular_chains()?);
    }
    bail!("{}: expected a tri3/tri4 triangulation or a pairing table", input.display())
}

fn fmt_group(g: &Value) -> String {
    let rank = g["rank"].as_u64().unwrap_or(0);
    let mut parts: Vec<String> = Vec::new();
    if rank > 0 {
        parts.push(if rank == 1 { "Z".into() } else { format!("Z^{rank}") });
    }
    for t in g["torsion"].as_array().into_iter().flatten() {
        parts.push(format!("Z{t}"));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn check(name: &str, computed: Value) -> CheckResult {
    CheckResult {
        name: name.into(),
        verdict: CheckVerdict::Pass,
        expected: Value::Null,
        computed,
        detail: None,
        wall_ms: None,
    }
}

fn compare(name: &str, ok: bool) -> CheckResult {
    CheckResult {
        verdict: if ok { CheckVerdict::Pass } else { CheckVerdict::Fail },
        expected: json!(true),
        ..check(name, json!(ok))
    }
}

fn single(name: &str, computed: Value) -> SuiteResult {
    SuiteResult {
        suite: name.into(),
        checks: vec![check(name, computed)],
    }
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
