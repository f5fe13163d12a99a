//! Named checks grouped into suites, and the schema-versioned JSON report.

use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coloring::{all_solutions, find_standard_coloring, Coloring};
use crate::complex::{assemble_m5_with_states, cusp_census, face_quotient, CuspKind, PolytopalComplex};
use crate::error::{Error, Result};
use crate::fiber::build_fiber;
use crate::homology::{betti_over_field, homology, AbelianGroup, GroupPresentation};
use crate::morse::{fibration_certificate, CertificateOptions, FibrationReport, OverallVerdict};
use crate::n5::{assemble_n5, complexes_isomorphic, freeness_spot_check, gamma0_quotient, ridge_cycle, PairingTable};
use crate::orientation::{boundary_torus_analysis, with_reversed_states};
use crate::polytope::{are_adjacent, enumerate_facets, polytope};
use crate::states::{all_move_sets, bad_ridges, enumerate_balanced, initial_state, is_sparse, MoveSet};
use crate::triangulation::{is_isomorphic, EulerMode, Triangulation, VertexKind};

pub const SCHEMA_VERSION: u32 = 1;
pub const PI1_PRESENTATION: &str = include_str!("../data/fiber_n5_pi1.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub verdict: CheckVerdict,
    pub expected: Value,
    pub computed: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.verdict == CheckVerdict::Pass
    }

    pub fn line(&self) -> String {
        let tag = match self.verdict {
            CheckVerdict::Pass => "PASS",
            CheckVerdict::Fail => "FAIL",
            CheckVerdict::Inconclusive => "INCONCLUSIVE",
            CheckVerdict::Skipped => "SKIPPED",
        };
        let mut s = match self.verdict {
            CheckVerdict::Skipped => format!("{tag} {}", self.name),
            _ => format!("{tag} {}: {}", self.name, self.computed),
        };
        if matches!(self.verdict, CheckVerdict::Fail | CheckVerdict::Inconclusive) {
            s.push_str(&format!(" (expected {})", self.expected));
        }
        if let Some(d) = &self.detail {
            s.push_str(&format!(" [{d}]"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Polytope,
    Coloring,
    Moves,
    CertifyM5,
    CertifyN5,
    Tori,
    N5,
    FiberN5,
    Presentation,
    Geodesic,
    FiberM5,
    BettiM5,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Polytope,
        Suite::Coloring,
        Suite::Moves,
        Suite::CertifyM5,
        Suite::CertifyN5,
        Suite::Tori,
        Suite::N5,
        Suite::FiberN5,
        Suite::Presentation,
        Suite::Geodesic,
        Suite::FiberM5,
        Suite::BettiM5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Polytope => "polytope",
            Suite::Coloring => "coloring",
            Suite::Moves => "moves",
            Suite::CertifyM5 => "certify-m5",
            Suite::CertifyN5 => "certify-n5",
            Suite::Tori => "tori",
            Suite::N5 => "n5",
            Suite::FiberN5 => "fiber-n5",
            Suite::Presentation => "presentation",
            Suite::Geodesic => "geodesic",
            Suite::FiberM5 => "fiber-m5",
            Suite::BettiM5 => "betti-m5",
        }
    }

    pub fn is_long(self) -> bool {
        matches!(self, Suite::FiberM5 | Suite::BettiM5)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    #[default]
    Default,
    Long,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub tier: Tier,
    pub suites: Vec<SuiteResult>,
}

impl VerificationReport {
    pub fn new(seed: u64, tier: Tier, suites: Vec<SuiteResult>) -> Self {
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            tool: "fiberforge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            tier,
            suites,
        }
    }

    pub fn checks(&self) -> impl Iterator<Item = &CheckResult> {
        self.suites.iter().flat_map(|s| s.checks.iter())
    }

    /// 0 when everything passed or was skipped, 1 on any failure, 2 when
    /// only inconclusive verdicts remain.
    pub fn exit_code(&self) -> i32 {
        if self.checks().any(|c| c.verdict == CheckVerdict::Fail) {
            1
        } else if self.checks().any(|c| c.verdict == CheckVerdict::Inconclusive) {
            2
        } else {
            0
        }
    }

    pub fn strip_timings(&mut self) {
        for s in &mut self.suites {
            for c in &mut s.checks {
                c.wall_ms = None;
            }
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub fn group_json(g: &AbelianGroup) -> Value {
    let torsion: Vec<Value> = g
        .torsion
        .iter()
        .map(|t| u64::try_from(t).map_or_else(|_| json!(t.to_string()), |v| json!(v)))
        .collect();
    json!({"rank": g.rank, "torsion": torsion})
}

pub fn groups_json(gs: &[AbelianGroup]) -> Value {
    Value::Array(gs.iter().map(group_json).collect())
}

fn group(rank: usize, torsion: &[u64]) -> Value {
    json!({"rank": rank, "torsion": torsion})
}

/// Shared inputs, built on first use.
pub struct Context {
    pub seed: u64,
    pub restarts: u32,
    coloring: OnceLock<Coloring>,
    m5: OnceLock<PolytopalComplex>,
    n5: OnceLock<std::result::Result<PolytopalComplex, String>>,
}

impl Context {
    pub fn new(seed: u64) -> Self {
        Context {
            seed,
            restarts: crate::morse::DEFAULT_RESTARTS,
            coloring: OnceLock::new(),
            m5: OnceLock::new(),
            n5: OnceLock::new(),
        }
    }

    pub fn coloring(&self) -> Result<&Coloring> {
        if self.coloring.get().is_none() {
            let _ = self.coloring.set(find_standard_coloring()?);
        }
        Ok(self.coloring.get().expect("set above"))
    }

    pub fn m5(&self) -> Result<&PolytopalComplex> {
        let c = self.coloring()?;
        let s0 = initial_state(c)?;
        Ok(self
            .m5
            .get_or_init(|| assemble_m5_with_states(c, s0, &MoveSet::canonical())))
    }

    pub fn n5(&self) -> Result<&PolytopalComplex> {
        let c = self.coloring()?;
        self.n5
            .get_or_init(|| assemble_n5(&PairingTable::standard(), c).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Verification(e.clone()))
    }

    pub fn certificate_options(&self, keep: bool) -> CertificateOptions {
        CertificateOptions {
            seed: self.seed,
            restarts: self.restarts,
            keep_certificates: keep,
        }
    }
}

/// Collects checks, timing each from the end of the previous one.
struct Checks {
    out: Vec<CheckResult>,
    clock: Instant,
}

impl Checks {
    fn new() -> Self {
        Checks {
            out: Vec::new(),
            clock: Instant::now(),
        }
    }

    fn push(&mut self, name: &str, verdict: CheckVerdict, expected: Value, computed: Value, detail: Option<String>) {
        let now = Instant::now();
        let ms = (now - self.clock).as_secs_f64() * 1e3;
        self.clock = now;
        self.out.push(CheckResult {
            name: name.into(),
            verdict,
            expected,
            computed,
            detail,
            wall_ms: Some(ms),
        });
    }

    fn eq<T: Serialize + PartialEq>(&mut self, name: &str, expected: T, computed: T) {
        let verdict = if expected == computed { CheckVerdict::Pass } else { CheckVerdict::Fail };
        self.push(name, verdict, json!(expected), json!(computed), None);
    }

    fn holds(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        self.eq(name, true, ok);
        if !detail.is_empty() {
            self.out.last_mut().expect("just pushed").detail = Some(detail);
        }
    }

    fn error(&mut self, name: &str, e: &Error) {
        self.push(name, CheckVerdict::Fail, Value::Null, Value::Null, Some(e.to_string()));
    }
}

/// Runs one suite; construction errors become failing checks.
pub fn run_suite(ctx: &Context, suite: Suite) -> SuiteResult {
    let mut ch = Checks::new();
    let res = match suite {
        Suite::Polytope => polytope_suite(&mut ch, ctx),
        Suite::Coloring => coloring_suite(&mut ch, ctx),
        Suite::Moves => moves_suite(&mut ch, ctx),
        Suite::CertifyM5 => ctx.m5().and_then(|x| certify_suite(&mut ch, ctx, x).map(|_| ())),
        Suite::CertifyN5 => ctx.n5().and_then(|x| certify_suite(&mut ch, ctx, x).map(|_| ())),
        Suite::Tori => tori_suite(&mut ch, ctx),
        Suite::N5 => n5_suite(&mut ch, ctx),
        Suite::FiberN5 => fiber_n5_suite(&mut ch, ctx),
        Suite::Presentation => presentation_suite(&mut ch),
        Suite::Geodesic => geodesic_suite(&mut ch, ctx),
        Suite::FiberM5 => fiber_m5_suite(&mut ch, ctx),
        Suite::BettiM5 => betti_m5_suite(&mut ch, ctx),
    };
    if let Err(e) = res {
        ch.error(&format!("{} construction", suite.name()), &e);
    }
    SuiteResult {
        suite: suite.name().into(),
        checks: ch.out,
    }
}

fn skipped(suite: Suite, reason: &str) -> SuiteResult {
    SuiteResult {
        suite: suite.name().into(),
        checks: vec![CheckResult {
            name: suite.name().into(),
            verdict: CheckVerdict::Skipped,
            expected: Value::Null,
            computed: Value::Null,
            detail: Some(reason.into()),
            wall_ms: None,
        }],
    }
}

/// Every suite, in parallel, merged in the fixed suite order; long suites are
/// reported as skipped unless the long tier is requested.
pub fn full_report(ctx: &Context, tier: Tier) -> VerificationReport {
    // build shared inputs once before fanning out
    let _ = ctx.m5();
    let _ = ctx.n5();
    let suites = Suite::ALL
        .par_iter()
        .map(|&s| {
            if s.is_long() && tier == Tier::Default {
                skipped(s, "long tier; rerun with --tier long")
            } else {
                run_suite(ctx, s)
            }
        })
        .collect();
    VerificationReport::new(ctx.seed, tier, suites)
}

fn polytope_suite(ch: &mut Checks, ctx: &Context) -> Result<()> {
    let p = polytope();
    ch.eq("facet count", 16, p.facets().len());
    let ideal = p.vertices().iter().filter(|v| v.is_ideal()).count();
    ch.eq("vertex count (ideal, real)", (10, 16), (ideal, p.vertices().len() - ideal));
    let degrees: Vec<usize> = p
        .facets()
        .iter()
        .map(|&f| p.facets().iter().filter(|&&g| are_adjacent(f, g)).count())
        .collect();
    ch.eq("adjacency degree", vec![10; 16], degrees);
    ch.eq("f-vector", vec![26, 120, 160, 80, 16], p.f_vector());
    ch.eq("isometry group order", 1920, p.isometries().len());
    ch.eq("R16 order", 16, p.r16().len());
    let f0 = enumerate_facets()[0];
    let mut images: Vec<usize> = p.r16().iter().map(|g| g.apply_facet(f0).index()).collect();
    images.sort_unstable();
    ch.eq("R16 free and transitive on facets", (0..16).collect::<Vec<_>>(), images);
    let balanced = enumerate_balanced(ctx.coloring()?)?;
    let s0 = balanced[0];
    let mut orbit: Vec<u16> = p.r16().iter().map(|g| s0.transported(g).in_mask()).collect();
    orbit.sort_unstable();
    let all: Vec<u16> = balanced.iter().map(|s| s.in_mask()).collect();
    ch.eq("balanced states", 16, balanced.len());
    ch.holds("R16 free and transitive on balanced states", orbit == all, "");
    Ok(())
}

fn coloring_suite(ch: &mut Checks, ctx: &Context) -> Result<()> {
    let c = ctx.coloring()?;
    ch.eq("coloring solutions", 4, all_solutions().len());
    ch.holds("standard coloring is valid", c.validate().is_ok(), "");
    ch.holds("quartet rule", c.satisfies_quartet_rule(), "");
    ch.holds("target permutations realized", c.realizes_target_permutations(), "");
    let m = ctx.m5()?;
    ch.eq("M5 copies", 256, m.copy_count());
    let bad_cycles = ridge_cycle_failures(m);
    ch.eq("ridge cycles of length other than 4", 0, bad_cycles);
    let census = cusp_census(m)?;
    let large: Vec<usize> = census.iter().filter(|k| k.kind == CuspKind::Large).map(|k| k.cubes.len()).collect();
    let small: Vec<usize> = census.iter().filter(|k| k.kind == CuspKind::Small).map(|k| k.cubes.len()).collect();
    ch.eq("cusps", 40, census.len());
    ch.eq("large cusps", vec![256; 8], large);
    ch.eq("small cusps", vec![16; 32], small);
    Ok(())
}

fn ridge_cycle_failures(x: &PolytopalComplex) -> usize {
    (0..x.copy_count() as u32)
        .into_par_iter()
        .map(|a| {
            let facets = enumerate_facets();
            let mut bad = 0;
            for &f in &facets {
                for &g in &facets {
                    if are_adjacent(f, g) && ridge_cycle(x, a, f, g) != (4, true) {
                        bad += 1;
                    }
                }
            }
            bad
        })
        .sum()
}

fn moves_suite(ch: &mut Checks, ctx: &Context) -> Result<()> {
    let c = ctx.coloring()?;
    let all = all_move_sets();
    ch.eq("set partitions of the colors", 4140, all.len());
    let sparse: Vec<&MoveSet> = all.iter().filter(|m| is_sparse(c, m)).collect();
    let only_singletons = sparse.len() == 1 && *sparse[0] == MoveSet::singletons();
    ch.eq("sparse partitions", 1, sparse.len());
    ch.holds("the sparse partition is the singletons", only_singletons, "");
    let canonical = MoveSet::canonical();
    ch.holds("canonical move set is not sparse", !is_sparse(c, &canonical), "");
    let bad = bad_ridges(c, &canonical);
    ch.eq("bad ridges", 8, bad.len());
    let p = polytope();
    let lat = p.lattice();
    let disjoint = bad.iter().enumerate().all(|(i, &a)| {
        bad[i + 1..].iter().all(|&b| {
            lat.vertices(a)
                .iter()
                .all(|v| p.is_ideal_face(*v) || !lat.vertices(b).contains(v))
        })
    });
    ch.holds("bad ridges pairwise disjoint", disjoint, "");
    Ok(())
}

fn certify_suite(ch: &mut Checks, ctx: &Context, x: &PolytopalComplex) -> Result<FibrationReport> {
    let r = fibration_certificate(x, ctx.coloring()?, &ctx.certificate_options(false))?;
    let verdict = match r.verdict {
        OverallVerdict::Certified => CheckVerdict::Pass,
        OverallVerdict::Failed => CheckVerdict::Fail,
        OverallVerdict::Inconclusive => CheckVerdict::Inconclusive,
    };
    let summary = json!({
        "verdict": r.verdict,
        "type1": r.type1,
        "type2": r.type2,
        "type3": r.type3,
        "boundary_squares": r.boundary_squares,
    });
    let detail = r.failures.first().or(r.inconclusive.first()).map(|e| format!("{}: {}", e.location, e.detail));
    ch.push("fibration certificate", verdict, json!("Certified"), summary, detail);
    ch.eq("inconclusive entries", 0, r.inconclusive.len());
    ch.eq("type-1 cone witnesses", r.type1.checks, r.type1.witnessed);
    ch.eq("type-2 opposite-vertex witnesses", r.type2.checks, r.type2.witnessed);
    ch.eq("type-3 figure cases", r.type3.checks, r.type3.witnessed);
    Ok(r)
}

fn tori_suite(ch: &mut Checks, ctx: &Context) -> Result<()> {
    let c = ctx.coloring()?;
    let m = ctx.m5()?;
    let census = cusp_census(m)?;
    let reports = boundary_torus_analysis(m, c, &MoveSet::canonical(), &census)?;
    let small = reports
        .iter()
        .filter(|r| r.kind == CuspKind::Small && r.certified && r.opposite_statuses && r.moves_are_opposite_pairs)
        .count();
    let large = reports
        .iter()
        .filter(|r| r.kind == CuspKind::Large && r.certified && r.preferred_direction.is_some())
        .count();
    ch.eq("small cusps certified diagonal", 32, small);
    ch.eq("large cusps with a preferred direction", 8, large);
    Ok(())
}

fn n5_suite(ch: &mut Checks, ctx: &Context) -> Result<()> {
    let c = ctx.coloring()?;
    let t = ctx.n5()?;
    ch.eq("N5 cusps", 2, cusp_census(t)?.len());
    ch.holds("copy exchange is a status-preserving symmetry", crate::n5::has_copy_swap(t), "");
    let q = gamma0_quotient(c)?;
    ch.eq("level-0 orbits", 2, q.orbit_count);
    let free = freeness_spot_check(c)?;
    ch.eq("faces fixed by level-0 elements", 0, free.fixed.len());
    ch.holds(
        "quotient isomorphic to the table complex",
        complexes_isomorphic(&q.complex, t, false)?,
        "",
    );
    let reversed = with_reversed_states(t).ok_or_else(|| Error::Verification("no states".into()))?;
    ch.holds(
        "isomorphic with states up to global reversal",
        complexes_isomorphic(&q.complex, &reversed, true)?,
        "table statuses are the reversal of the induced ones",
    );
    let cell = homology(&t.cellular_chains()?);
    let bary = homology(&t.barycentric_chains()?);
    let expected = json!([group(1, &[]), group(1, &[4]), group(0, &[4, 4]), group(1, &[]), group(1, &[]), group(0, &[])]);
    ch.eq("N5 homology (cellular)", expected.clone(), groups_json(&cell));
    ch.eq("N5 homology (barycentric)", expected, groups_json(&bary));
    let mut h1: Vec<AbelianGroup> = t
        .cusp_section_chains()?
        .iter()
        .map(|(_, cc)| homology(cc)[1].clone())
        .collect();
    h1.sort_by(|a, b| (a.rank, &a.torsion).cmp(&(b.rank, &b.torsion)));
    let cusps: Vec<Value> = h1.iter().map(group_json).collect();
    ch.eq("cusp section H1", json!([group(1, &[4]), group(1, &[4, 4])]), Value::Array(cusps));
    Ok(())
}

/// Invariants of a fiber triangulation as a JSON object.
pub fn fiber_summary(t: &Triangulation) -> Result<Value> {
    let vc = t.vertex_classes();
    let kinds = t.vertex_kinds(&vc)?;
    let links: Vec<Value> = t
        .boundary_triangulations()?
        .iter()
        .map(|l| Ok(json!({"closed": l.is_closed(), "h1": group_json(&l.homology(false)?[1])})))
        .collect::<Result<_>>()?;
    Ok(json!({
        "pentachora": t.len(),
        "components": t.component_count(),
        "ideal_classes": kinds.iter().filter(|k| **k == VertexKind::Ideal).count(),
        "chi_truncated": t.euler_characteristic(EulerMode::Truncated)?,
        "chi_compactified": t.euler_characteristic(EulerMode::Compactified)?,
        "homology": groups_json(&t.homology(true)?),
        "boundary_links": links,
    }))
}

fn fiber_n5_suite(ch: &mut Checks, ctx: &Context) -> Result<()> {
    let f = build_fiber(ctx.n5()?)?;
    let t = &f.triangulation;
    let s = fiber_summary(t)?;
    ch.eq("pentachora", json!(144), s["pentachora"].clone());
    ch.eq("components", json!(1), s["components"].clone());
    ch.holds("closed pseudomanifold", t.check_closed_pseudomanifold().is_ok(), "");
    ch.eq("ideal vertex classes", json!(5), s["ideal_classes"].clone());
    ch.eq("truncated Euler characteristic", json!(1), s["chi_truncated"].clone());
    ch.eq("compactified Euler characteristic", json!(6), s["chi_compactified"].clone());
    let h = &s["homology"];
    ch.eq("H1", group(0, &[4, 4, 4, 4]), h[1].clone());
    ch.eq("H2", group(4, &[]), h[2].clone());
    ch.eq("H3", group(4, &[]), h[3].clone());
    let link = json!({"closed": true, "h1": group(0, &[4, 4])});
    ch.eq("boundary links", json!(vec![link; 5]), s["boundary_links"].clone());
    Ok(())
}

fn presentation_suite(ch: &mut Checks) -> Result<()> {
    let p = GroupPresentation::parse(PI1_PRESENTATION)?;
    ch.eq("generators and relators", (4, 8), (p.generator_count(), p.relators().len()));
    ch.eq("abelianization", group(0, &[4, 4, 4, 4]), group_json(&p.abelianize()));
    Ok(())
}

fn geodesic_suite(ch: &mut Checks, ctx: &Context) -> Result<()> {
    let c = ctx.coloring()?;
    let r = bad_ridges(c, &MoveSet::canonical())[0];
    let q = face_quotient(ctx.m5()?, c, r)?;
    ch.eq("copies", 64, q.copy_count());
    ch.eq("components", 1, q.component_count());
    ch.eq("cusps", 12, q.cusp_count()?);
    Ok(())
}

fn fiber_m5_suite(ch: &mut Checks, ctx: &Context) -> Result<()> {
    let f = build_fiber(ctx.m5()?)?;
    let t = &f.triangulation;
    ch.eq("pentachora", 18432, t.len());
    ch.eq("components", 2, t.component_count());
    let (a, b) = (t.component(0), t.component(1));
    ch.holds("components isomorphic", is_isomorphic(&a, &b), "");
    let chi = a.euler_characteristic(EulerMode::Truncated)?;
    let betti = betti_over_field(&a.chain_complex(true)?, 0);
    let alternating: i64 = betti.iter().enumerate().map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) }).sum();
    ch.eq("Betti sum matches cell count", chi, alternating);
    ch.eq("truncated Euler characteristic per component", 16, alternating);
    ch.out.last_mut().expect("just pushed").detail = Some(format!("Betti numbers over Q {betti:?}"));
    Ok(())
}

fn betti_m5_suite(ch: &mut Checks, ctx: &Context) -> Result<()> {
    let chains = ctx.m5()?.cellular_chains()?;
    let b = betti_over_field(&chains, 0);
    ch.eq("Betti numbers over Q", vec![1, 24, 120, 136, 39], b[..5].to_vec());
    for p in [2, 3] {
        let bp = betti_over_field(&chains, p);
        ch.holds(&format!("Betti over F{p} bound Betti over Q"), bp.iter().zip(&b).all(|(x, y)| x >= y), "");
    }
    Ok(())
}
