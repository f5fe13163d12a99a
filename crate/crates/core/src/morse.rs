//! Links of the vertices of the cell decomposition, collapsibility
//! certificates, and the fibration certificate.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coloring::Coloring;
use crate::complex::PolytopalComplex;
use crate::error::{Error, Result};
use crate::lattice::FaceId;
use crate::orientation::{is_alternating, orient_dual_edges, square_crossing_pattern, CubeKind, DualCube};
use crate::polytope::{are_adjacent, enumerate_facets, polytope, SignVector};
use crate::states::{State, Status};

pub const DEFAULT_RESTARTS: u32 = 64;

/// A regular cell complex whose cells are determined by their vertex sets.
///
/// Cells are bit masks over at most 32 labeled vertices; a cell is a face of
/// another when its mask is a subset. Simplicial complexes are the case where
/// every cell has `popcount - 1` as dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkComplex {
    labels: Vec<String>,
    cells: Vec<(u32, u8)>,
    simplicial: bool,
}

impl LinkComplex {
    /// The downward closure of the given simplices.
    pub fn simplicial(labels: Vec<String>, maximal: &[u32]) -> Self {
        let mut cells: Vec<u32> = Vec::new();
        for &m in maximal {
            let mut sub = m;
            loop {
                if sub != 0 {
                    cells.push(sub);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & m;
            }
        }
        cells.sort_unstable_by_key(|&c| (c.count_ones(), c));
        cells.dedup();
        LinkComplex {
            labels,
            cells: cells.into_iter().map(|c| (c, (c.count_ones() - 1) as u8)).collect(),
            simplicial: true,
        }
    }

    /// Cells given explicitly with their dimensions; the list must be closed under faces.
    pub fn from_cells(labels: Vec<String>, mut cells: Vec<(u32, u8)>) -> Result<Self> {
        cells.sort_unstable_by_key(|&(c, d)| (d, c));
        cells.dedup();
        for &(c, d) in &cells {
            if c == 0 {
                return Err(Error::Verification("cells must be nonempty".into()));
            }
            for v in 0..32 {
                if c & (1 << v) != 0 && !cells.contains(&(1 << v, 0)) {
                    return Err(Error::Verification(format!("vertex {v} of a cell is missing")));
                }
            }
            if d > 0 && !cells.iter().any(|&(f, e)| e + 1 == d && f & c == f && f != c) {
                return Err(Error::Verification("a cell has no facets in the list".into()));
            }
        }
        let simplicial = cells.iter().all(|&(c, d)| c.count_ones() == u32::from(d) + 1);
        Ok(LinkComplex {
            labels,
            cells,
            simplicial,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cells(&self) -> &[(u32, u8)] {
        &self.cells
    }

    pub fn is_simplicial(&self) -> bool {
        self.simplicial
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn vertex_mask(&self) -> u32 {
        self.cells.iter().fold(0, |m, &(c, _)| m | c)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_mask().count_ones() as usize
    }

    pub fn dim(&self) -> Option<usize> {
        self.cells.iter().map(|&(_, d)| d as usize).max()
    }

    pub fn f_vector(&self) -> Vec<usize> {
        let mut f = vec![0; self.dim().map_or(0, |d| d + 1)];
        for &(_, d) in &self.cells {
            f[d as usize] += 1;
        }
        f
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cells
            .iter()
            .map(|&(_, d)| if d % 2 == 0 { 1 } else { -1 })
            .sum()
    }

    /// Maximal cells.
    pub fn maximal(&self) -> Vec<u32> {
        self.cells
            .iter()
            .filter(|&&(c, _)| !self.cells.iter().any(|&(d, _)| d != c && d & c == c))
            .map(|&(c, _)| c)
            .collect()
    }

    /// The subcomplex of cells whose vertices all lie in `mask`.
    pub fn induced(&self, mask: u32) -> LinkComplex {
        LinkComplex {
            labels: self.labels.clone(),
            cells: self.cells.iter().copied().filter(|&(c, _)| c & !mask == 0).collect(),
            simplicial: self.simplicial,
        }
    }

    /// Join with `extra` new isolated vertices, labeled after the existing ones.
    pub fn join_points(&self, extra: &[String]) -> Result<LinkComplex> {
        let base = self.labels.len();
        if base + extra.len() > 32 {
            return Err(Error::Verification("too many vertices for a link complex".into()));
        }
        let mut labels = self.labels.clone();
        labels.extend(extra.iter().cloned());
        let mut cells = self.cells.clone();
        for k in 0..extra.len() {
            let p = 1u32 << (base + k);
            cells.push((p, 0));
            for &(c, d) in &self.cells {
                cells.push((c | p, d + 1));
            }
        }
        LinkComplex::from_cells(labels, cells)
    }

    /// Mask of the vertices lying in every maximal cell, for simplicial complexes.
    pub fn cone_apexes(&self) -> u32 {
        if !self.simplicial || self.is_empty() {
            return 0;
        }
        self.maximal().into_iter().fold(u32::MAX, |m, c| m & c)
    }

    pub fn cone_apex(&self) -> Option<u32> {
        let common = self.cone_apexes();
        (common != 0).then(|| common.trailing_zeros())
    }
}

/// Removal of a free face together with its unique proper coface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CollapseStep {
    pub face: u32,
    pub coface: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CollapseMethod {
    Point,
    Cone { apex: u32 },
    Greedy { attempt: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollapseCertificate {
    pub method: CollapseMethod,
    pub steps: Vec<CollapseStep>,
    pub remaining_vertex: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Collapsibility {
    Collapsible(CollapseCertificate),
    Inconclusive { attempts: u32 },
}

impl Collapsibility {
    pub fn certificate(&self) -> Option<&CollapseCertificate> {
        match self {
            Collapsibility::Collapsible(c) => Some(c),
            Collapsibility::Inconclusive { .. } => None,
        }
    }

    pub fn is_collapsible(&self) -> bool {
        self.certificate().is_some()
    }
}

fn free_pairs(cells: &[(u32, u8)]) -> Vec<CollapseStep> {
    let mut out = Vec::new();
    for &(s, ds) in cells {
        let mut cof = cells.iter().filter(|&&(t, _)| t != s && t & s == s);
        if let (Some(&(t, dt)), None) = (cof.next(), cof.next()) {
            if dt == ds + 1 {
                out.push(CollapseStep { face: s, coface: t });
            }
        }
    }
    out
}

/// Tries to collapse `c` to a single vertex: a cone apex first, then greedy
/// free-face collapses with `restarts` random orders.
pub fn collapse_to_point(c: &LinkComplex, seed: u64, restarts: u32) -> Result<Collapsibility> {
    if c.is_empty() {
        return Err(Error::EmptyComplex);
    }
    if c.cells.len() == 1 {
        return Ok(Collapsibility::Collapsible(CollapseCertificate {
            method: CollapseMethod::Point,
            steps: Vec::new(),
            remaining_vertex: c.cells[0].0.trailing_zeros(),
        }));
    }
    if let Some(apex) = c.cone_apex() {
        let a = 1u32 << apex;
        let mut base: Vec<u32> = c
            .cells
            .iter()
            .map(|&(s, _)| s)
            .filter(|&s| s & a == 0)
            .collect();
        base.sort_unstable_by_key(|&s| std::cmp::Reverse((s.count_ones(), s)));
        let steps = base
            .into_iter()
            .map(|s| CollapseStep { face: s, coface: s | a })
            .collect();
        return Ok(Collapsibility::Collapsible(CollapseCertificate {
            method: CollapseMethod::Cone { apex },
            steps,
            remaining_vertex: apex,
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..restarts.max(1) {
        let mut cells = c.cells.clone();
        let mut steps = Vec::new();
        loop {
            if cells.len() == 1 {
                return Ok(Collapsibility::Collapsible(CollapseCertificate {
                    method: CollapseMethod::Greedy { attempt },
                    steps,
                    remaining_vertex: cells[0].0.trailing_zeros(),
                }));
            }
            let pairs = free_pairs(&cells);
            let Some(&step) = pairs.choose(&mut rng) else {
                break;
            };
            cells.retain(|&(s, _)| s != step.face && s != step.coface);
            steps.push(step);
        }
    }
    Ok(Collapsibility::Inconclusive { attempts: restarts.max(1) })
}

/// Replays a certificate: every step must remove a free pair, and a single
/// vertex must remain.
pub fn replay(c: &LinkComplex, cert: &CollapseCertificate) -> bool {
    let mut cells = c.cells.clone();
    for step in &cert.steps {
        let Some(&(_, df)) = cells.iter().find(|&&(s, _)| s == step.face) else {
            return false;
        };
        let cofaces: Vec<(u32, u8)> = cells
            .iter()
            .copied()
            .filter(|&(t, _)| t != step.face && t & step.face == step.face)
            .collect();
        if cofaces.len() != 1 || cofaces[0].0 != step.coface || cofaces[0].1 != df + 1 {
            return false;
        }
        cells.retain(|&(s, _)| s != step.face && s != step.coface);
    }
    cells == [(1u32 << cert.remaining_vertex, 0)]
}

fn facet_labels() -> Vec<String> {
    enumerate_facets().into_iter().map(|f| f.to_string()).collect()
}

/// The flag complex of the facet adjacency graph, one vertex per facet.
pub fn flag_complex_k() -> LinkComplex {
    let facets = enumerate_facets();
    let adj: Vec<u32> = facets
        .iter()
        .map(|&f| {
            facets
                .iter()
                .enumerate()
                .filter(|(_, &g)| are_adjacent(f, g))
                .fold(0, |m, (j, _)| m | (1 << j))
        })
        .collect();
    let mut cliques = Vec::new();
    for mask in 1u32..(1 << facets.len()) {
        let ok = (0..facets.len())
            .filter(|&i| mask & (1 << i) != 0)
            .all(|i| mask & !(1 << i) & !adj[i] == 0);
        if ok {
            cliques.push(mask);
        }
    }
    LinkComplex::simplicial(facet_labels(), &cliques)
}

fn status_mask(s: State, status: Status) -> u32 {
    match status {
        Status::I => u32::from(s.in_mask()),
        Status::O => u32::from(!s.in_mask()),
    }
}

/// Induced subcomplex of `K` on the O-facets.
pub fn ascending_link(k: &LinkComplex, s: State) -> LinkComplex {
    k.induced(status_mask(s, Status::O))
}

/// Induced subcomplex of `K` on the I-facets.
pub fn descending_link(k: &LinkComplex, s: State) -> LinkComplex {
    k.induced(status_mask(s, Status::I))
}

/// Outcome of checking one link: emptiness and a nonzero reduced Euler
/// characteristic rule out collapsibility, otherwise a collapse is searched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LinkOutcome {
    Empty,
    Obstructed { euler: i64 },
    Checked(Collapsibility),
}

impl LinkOutcome {
    pub fn check(c: &LinkComplex, seed: u64, restarts: u32) -> Result<Self> {
        if c.is_empty() {
            return Ok(LinkOutcome::Empty);
        }
        let euler = c.euler_characteristic();
        if euler != 1 {
            return Ok(LinkOutcome::Obstructed { euler });
        }
        collapse_to_point(c, seed, restarts).map(LinkOutcome::Checked)
    }

    pub fn certificate(&self) -> Option<&CollapseCertificate> {
        match self {
            LinkOutcome::Checked(c) => c.certificate(),
            _ => None,
        }
    }

    pub fn is_collapsible(&self) -> bool {
        self.certificate().is_some()
    }

    pub fn is_obstructed(&self) -> bool {
        !matches!(self, LinkOutcome::Checked(_))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkVerdicts {
    pub ascending: LinkOutcome,
    pub descending: LinkOutcome,
    #[serde(skip)]
    pub links: [LinkComplex; 2],
}

impl LinkVerdicts {
    pub fn passed(&self) -> bool {
        self.ascending.is_collapsible() && self.descending.is_collapsible()
    }

    pub fn verdict(&self) -> Verdict {
        if self.ascending.is_obstructed() || self.descending.is_obstructed() {
            Verdict::Fail
        } else if self.passed() {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn cone_witnesses(&self) -> bool {
        matches!(
            (self.ascending.certificate(), self.descending.certificate()),
            (Some(a), Some(d))
                if matches!(a.method, CollapseMethod::Cone { .. } | CollapseMethod::Point)
                && matches!(d.method, CollapseMethod::Cone { .. } | CollapseMethod::Point)
        )
    }
}

fn both_links(asc: &LinkComplex, desc: &LinkComplex, seed: u64, restarts: u32) -> Result<LinkVerdicts> {
    Ok(LinkVerdicts {
        ascending: LinkOutcome::check(asc, seed, restarts)?,
        descending: LinkOutcome::check(desc, seed, restarts)?,
        links: [asc.clone(), desc.clone()],
    })
}

pub fn balanced_link_check(k: &LinkComplex, s: State, seed: u64, restarts: u32) -> Result<LinkVerdicts> {
    both_links(&ascending_link(k, s), &descending_link(k, s), seed, restarts)
}

/// The boundary of the 4-dimensional cross-polytope dual to the cube link of
/// an ideal vertex; vertices are the eight facets at the vertex.
pub fn octahedron(v: FaceId) -> Result<(LinkComplex, Vec<SignVector>)> {
    let p = polytope();
    let lat = p.lattice();
    let link = p.ideal_vertex_link(p.vertices()[v as usize])?;
    let position = |f: SignVector| link.facets.iter().position(|&g| g == f).expect("facet at the vertex");
    let mut cells = Vec::new();
    for &g in &lat.faces_of_rank(1).iter().chain(lat.faces_of_rank(2)).chain(lat.faces_of_rank(3)).chain(lat.faces_of_rank(4)).copied().collect::<Vec<_>>() {
        if !lat.vertices(g).contains(&v) {
            continue;
        }
        let mask = p.face_facet_mask(g);
        let cell = enumerate_facets()
            .into_iter()
            .filter(|f| mask & (1 << f.index()) != 0)
            .fold(0u32, |m, f| m | (1 << position(f)));
        cells.push((cell, (4 - lat.rank(g)) as u8));
    }
    let labels = link.facets.iter().map(|f| f.to_string()).collect();
    Ok((LinkComplex::from_cells(labels, cells)?, link.facets))
}

#[derive(Clone, Debug, Serialize)]
pub struct OctahedronVerdict {
    pub links: LinkVerdicts,
    /// An opposite pair of facets with opposite statuses.
    pub witness: Option<(String, String)>,
}

impl OctahedronVerdict {
    pub fn passed(&self) -> bool {
        self.links.passed() && self.witness.is_some()
    }
}

pub fn octahedron_link_check(s: State, v: FaceId, seed: u64, restarts: u32) -> Result<OctahedronVerdict> {
    let p = polytope();
    let (oct, facets) = octahedron(v)?;
    let link = p.ideal_vertex_link(p.vertices()[v as usize])?;
    let mask = |st: Status| {
        facets
            .iter()
            .enumerate()
            .filter(|(_, &f)| s.status(f) == st)
            .fold(0u32, |m, (i, _)| m | (1 << i))
    };
    let links = both_links(&oct.induced(mask(Status::O)), &oct.induced(mask(Status::I)), seed, restarts)?;
    let witness = link
        .opposite
        .iter()
        .map(|&(i, j)| (facets[i], facets[j]))
        .find(|(a, b)| s.status(*a) != s.status(*b))
        .map(|(a, b)| (a.to_string(), b.to_string()));
    Ok(OctahedronVerdict { links, witness })
}

/// The triangular prism dual to the boundary of a ridge: one vertex per
/// surrounding facet (meeting the ridge in a 2-face), a triangle per real
/// vertex of the ridge and a square per ideal vertex.
pub fn prism(ridge: FaceId) -> Result<(LinkComplex, Vec<SignVector>)> {
    let p = polytope();
    let lat = p.lattice();
    if lat.rank(ridge) != 3 {
        return Err(Error::BadFaceRank(lat.rank(ridge)));
    }
    let own = p.face_facet_mask(ridge);
    let below = lat.down_closure(ridge);
    let surrounding: Vec<SignVector> = below
        .iter()
        .filter(|&&g| lat.rank(g) == 2)
        .map(|&g| {
            let extra = p.face_facet_mask(g) & !own;
            SignVector::from_index(extra.trailing_zeros() as usize)
        })
        .collect();
    let mut cells = Vec::new();
    for &g in &below {
        let r = lat.rank(g);
        if r > 2 {
            continue;
        }
        let extra = p.face_facet_mask(g) & !own;
        let cell = surrounding
            .iter()
            .enumerate()
            .filter(|(_, f)| extra & (1 << f.index()) != 0)
            .fold(0u32, |m, (i, _)| m | (1 << i));
        cells.push((cell, (2 - r) as u8));
    }
    let labels = surrounding.iter().map(|f| f.to_string()).collect();
    Ok((LinkComplex::from_cells(labels, cells)?, surrounding))
}

/// Shape of an induced subcomplex of the prism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PrismCase {
    Triangle,
    TwoEdgePath,
    Other,
}

fn prism_case(c: &LinkComplex) -> PrismCase {
    match c.f_vector().as_slice() {
        [3, 3, 1] => PrismCase::Triangle,
        [3, 2] => PrismCase::TwoEdgePath,
        _ => PrismCase::Other,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PrismVerdict {
    pub ascending_case: PrismCase,
    pub descending_case: PrismCase,
    /// The prism pieces on their own.
    pub pieces: LinkVerdicts,
    /// After the join with the two same-status vertices of the square.
    pub joined: LinkVerdicts,
}

impl PrismVerdict {
    pub fn passed(&self) -> bool {
        self.pieces.passed() && self.joined.passed()
    }

    pub fn figure_case(&self) -> bool {
        self.ascending_case != PrismCase::Other && self.descending_case != PrismCase::Other
    }
}

/// Checks a complex and its pieces by status, joined with two extra vertices
/// of each status.
fn joined_check(
    c: &LinkComplex,
    facets: &[SignVector],
    s: State,
    seed: u64,
    restarts: u32,
) -> Result<(LinkComplex, LinkComplex, LinkVerdicts, LinkVerdicts)> {
    let mask = |st: Status| {
        facets
            .iter()
            .enumerate()
            .filter(|(_, &f)| s.status(f) == st)
            .fold(0u32, |m, (i, _)| m | (1 << i))
    };
    let asc = c.induced(mask(Status::O));
    let desc = c.induced(mask(Status::I));
    let pieces = both_links(&asc, &desc, seed, restarts)?;
    let pair = |tag: &str| vec![format!("{tag}1"), format!("{tag}2")];
    let joined = both_links(&asc.join_points(&pair("O"))?, &desc.join_points(&pair("I"))?, seed, restarts)?;
    Ok((asc, desc, pieces, joined))
}

pub fn prism_link_check(ridge: FaceId, s: State, seed: u64, restarts: u32) -> Result<PrismVerdict> {
    let (pr, facets) = prism(ridge)?;
    let (asc, desc, pieces, joined) = joined_check(&pr, &facets, s, seed, restarts)?;
    Ok(PrismVerdict {
        ascending_case: prism_case(&asc),
        descending_case: prism_case(&desc),
        pieces,
        joined,
    })
}

/// The square face of the prism at an ideal vertex of the ridge, for bad
/// squares on the boundary.
pub fn prism_square_check(ridge: FaceId, v: FaceId, s: State, seed: u64, restarts: u32) -> Result<LinkVerdicts> {
    let p = polytope();
    let (pr, facets) = prism(ridge)?;
    let vmask = p.vertex_facet_mask(v as usize);
    let square = facets
        .iter()
        .enumerate()
        .filter(|(_, f)| vmask & (1 << f.index()) != 0)
        .fold(0u32, |m, (i, _)| m | (1 << i));
    let (_, _, _, joined) = joined_check(&pr.induced(square), &facets, s, seed, restarts)?;
    Ok(joined)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub vertex_type: u8,
    pub location: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TypeSummary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    /// Checks whose pass rests on the expected witness.
    pub witnessed: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OverallVerdict {
    Certified,
    Failed,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct FibrationReport {
    pub copies: usize,
    pub unclassifiable_cubes: usize,
    pub crossing_violations: usize,
    pub bad_squares: usize,
    pub non_alternating_bad_squares: usize,
    pub type1: TypeSummary,
    pub type2: TypeSummary,
    pub type3: TypeSummary,
    pub boundary_squares: TypeSummary,
    /// Distinct states among the copies, as status strings.
    pub distinct_states: Vec<String>,
    pub prism_cases: BTreeMap<String, usize>,
    pub realized_prism_patterns: usize,
    pub failures: Vec<CheckEntry>,
    pub inconclusive: Vec<CheckEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Vec<EmittedCertificate>>,
    pub verdict: OverallVerdict,
}

fn tally(summary: &mut TypeSummary, entries: &mut Vec<CheckEntry>, inconclusive: &mut Vec<CheckEntry>, e: CheckEntry, witnessed: bool) {
    summary.checks += 1;
    match e.verdict {
        Verdict::Pass => {
            summary.passed += 1;
            if witnessed {
                summary.witnessed += 1;
            }
        }
        Verdict::Fail => {
            summary.failed += 1;
            entries.push(e);
        }
        Verdict::Inconclusive => {
            summary.inconclusive += 1;
            inconclusive.push(e);
        }
    }
}

fn worst(a: Verdict, b: Verdict) -> Verdict {
    use Verdict::*;
    match (a, b) {
        (Fail, _) | (_, Fail) => Fail,
        (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
        _ => Pass,
    }
}

/// A collapse certificate together with the link it collapses.
#[derive(Clone, Debug, Serialize)]
pub struct EmittedCertificate {
    pub location: String,
    pub link: LinkComplex,
    pub certificate: CollapseCertificate,
}

impl EmittedCertificate {
    pub fn replays(&self) -> bool {
        replay(&self.link, &self.certificate)
    }
}

fn collect_certificates(out: &mut Vec<EmittedCertificate>, loc: &str, links: &LinkVerdicts) {
    let outcomes = [("ascending", &links.ascending), ("descending", &links.descending)];
    for ((tag, c), link) in outcomes.into_iter().zip(&links.links) {
        if let Some(cert) = c.certificate() {
            out.push(EmittedCertificate {
                location: format!("{loc} {tag}"),
                link: link.clone(),
                certificate: cert.clone(),
            });
        }
    }
}

pub struct CertificateOptions {
    pub seed: u64,
    pub restarts: u32,
    pub keep_certificates: bool,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            keep_certificates: false,
        }
    }
}

/// Runs the link checks at the three types of vertices: copies, boundary
/// cubes at ideal vertices, and bad squares (interior and on the boundary).
pub fn fibration_certificate(
    x: &PolytopalComplex,
    coloring: &Coloring,
    opts: &CertificateOptions,
) -> Result<FibrationReport> {
    let states = x
        .states()
        .ok_or_else(|| Error::Verification("the complex carries no states".into()))?;
    let skel = orient_dual_edges(x)?;
    let k = flag_complex_k();
    let mut failures = Vec::new();
    let mut inconclusive = Vec::new();
    let mut certs = Vec::new();

    // type 1: one check per distinct state
    let mut distinct: Vec<State> = states.to_vec();
    distinct.sort();
    distinct.dedup();
    let by_state: HashMap<State, LinkVerdicts> = distinct
        .par_iter()
        .map(|&s| balanced_link_check(&k, s, opts.seed, opts.restarts).map(|v| (s, v)))
        .collect::<Result<_>>()?;
    let mut type1 = TypeSummary::default();
    for (a, s) in states.iter().enumerate() {
        let links = &by_state[s];
        let loc = format!("copy {}", x.label(a as u32));
        let verdict = links.verdict();
        if opts.keep_certificates {
            collect_certificates(&mut certs, &loc, links);
        }
        tally(
            &mut type1,
            &mut failures,
            &mut inconclusive,
            CheckEntry {
                vertex_type: 1,
                location: loc,
                verdict,
                detail: format!("state {s}, balanced {}", s.is_balanced(coloring)),
            },
            links.cone_witnesses(),
        );
    }

    // type 2: one per (copy, ideal vertex), deduplicated by local statuses
    let p = polytope();
    let mut oct_cache: HashMap<(FaceId, u16), OctahedronVerdict> = HashMap::new();
    let mut type2 = TypeSummary::default();
    for (a, &s) in states.iter().enumerate() {
        for v in p.ideal_vertex_faces() {
            let local = s.in_mask() & p.vertex_facet_mask(v as usize);
            let verdict = match oct_cache.get(&(v, local)) {
                Some(r) => r.clone(),
                None => {
                    let r = octahedron_link_check(s, v, opts.seed, opts.restarts)?;
                    oct_cache.insert((v, local), r.clone());
                    r
                }
            };
            let loc = format!("copy {} vertex {}", x.label(a as u32), p.vertices()[v as usize]);
            if opts.keep_certificates {
                collect_certificates(&mut certs, &loc, &verdict.links);
            }
            let v_kind = verdict.links.verdict();
            tally(
                &mut type2,
                &mut failures,
                &mut inconclusive,
                CheckEntry {
                    vertex_type: 2,
                    location: loc,
                    verdict: v_kind,
                    detail: format!("{:?}", verdict.witness),
                },
                verdict.witness.is_some(),
            );
        }
    }

    // type 3: bad squares
    let mut type3 = TypeSummary::default();
    let mut boundary_squares = TypeSummary::default();
    let mut prism_cases: BTreeMap<String, usize> = BTreeMap::new();
    let mut patterns: std::collections::HashSet<(FaceId, u16)> = Default::default();
    let mut non_alternating = 0;
    let mut bad_square_count = 0;
    let bad: Vec<&DualCube> = skel
        .cubes
        .iter()
        .filter(|c| c.real_dim() == 2 && matches!(c.kind, CubeKind::Bad { .. }))
        .filter(|c| c.dim() == 2 || (c.dim() == 3 && c.touches_boundary()))
        .collect();
    for cube in bad {
        let s = states[cube.copy as usize];
        let surrounding = !p.face_facet_mask(cube.face);
        let loc = format!("copy {} ridge {}", x.label(cube.copy), cube.face);
        match cube.cut_vertex {
            None => {
                bad_square_count += 1;
                if !square_crossing_pattern(x, cube).is_some_and(|pat| is_alternating(&pat)) {
                    non_alternating += 1;
                }
                patterns.insert((cube.face, s.in_mask() & surrounding));
                let r = prism_link_check(cube.face, s, opts.seed, opts.restarts)?;
                *prism_cases
                    .entry(format!("{:?}/{:?}", r.ascending_case, r.descending_case))
                    .or_default() += 1;
                if opts.keep_certificates {
                    collect_certificates(&mut certs, &loc, &r.joined);
                }
                let verdict = worst(r.pieces.verdict(), r.joined.verdict());
                tally(
                    &mut type3,
                    &mut failures,
                    &mut inconclusive,
                    CheckEntry {
                        vertex_type: 3,
                        location: loc,
                        verdict,
                        detail: format!("{:?}/{:?}", r.ascending_case, r.descending_case),
                    },
                    r.figure_case(),
                );
            }
            Some(v) => {
                let r = prism_square_check(cube.face, v, s, opts.seed, opts.restarts)?;
                let loc = format!("{loc} vertex {}", p.vertices()[v as usize]);
                if opts.keep_certificates {
                    collect_certificates(&mut certs, &loc, &r);
                }
                tally(
                    &mut boundary_squares,
                    &mut failures,
                    &mut inconclusive,
                    CheckEntry {
                        vertex_type: 3,
                        location: loc,
                        verdict: r.verdict(),
                        detail: "boundary square".into(),
                    },
                    true,
                );
            }
        }
    }
    let unclassifiable = skel.unclassifiable().count();
    let violations = skel.crossing_violations.len();
    let structural_ok = unclassifiable == 0 && violations == 0 && non_alternating == 0;
    let verdict = if !failures.is_empty() || !structural_ok {
        OverallVerdict::Failed
    } else if !inconclusive.is_empty() {
        OverallVerdict::Inconclusive
    } else {
        OverallVerdict::Certified
    };
    Ok(FibrationReport {
        copies: x.copy_count(),
        unclassifiable_cubes: unclassifiable,
        crossing_violations: violations,
        bad_squares: bad_square_count,
        non_alternating_bad_squares: non_alternating,
        type1,
        type2,
        type3,
        boundary_squares,
        distinct_states: distinct.iter().map(|s| s.to_string()).collect(),
        prism_cases,
        realized_prism_patterns: patterns.len(),
        failures,
        inconclusive,
        certificates: opts.keep_certificates.then_some(certs),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::find_standard_coloring;
    use crate::complex::assemble_m5_with_states;
    use crate::states::{bad_ridges, enumerate_balanced, initial_state, MoveSet};

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn flag_complex_shape() {
        let k = flag_complex_k();
        assert_eq!(k.vertex_count(), 16);
        assert_eq!(k.dim(), Some(4));
        assert_eq!(k.f_vector()[1], 80);
        // oracle: brute-force 5-cliques of the adjacency graph
        let facets = enumerate_facets();
        let mut five = Vec::new();
        for m in 0u32..1 << 16 {
            if m.count_ones() == 5
                && (0..16).all(|i| {
                    m & (1 << i) == 0
                        || (0..16).all(|j| i == j || m & (1 << j) == 0 || are_adjacent(facets[i], facets[j]))
                })
            {
                five.push(m);
            }
        }
        assert_eq!(five.len(), 16);
        let mut top: Vec<u32> = k.cells().iter().filter(|&&(_, d)| d == 4).map(|&(c, _)| c).collect();
        top.sort();
        assert_eq!(top, five);
        assert!(k.maximal().iter().all(|m| m.count_ones() >= 4));
    }

    #[test]
    fn point_triangle_boundary_and_cone() {
        let point = LinkComplex::simplicial(labels(1), &[1]);
        let r = collapse_to_point(&point, 0, 4).unwrap();
        assert!(r.certificate().unwrap().steps.is_empty());
        let circle = LinkComplex::simplicial(labels(3), &[0b011, 0b110, 0b101]);
        assert_eq!(collapse_to_point(&circle, 0, 8).unwrap(), Collapsibility::Inconclusive { attempts: 8 });
        let cone = LinkComplex::simplicial(labels(4), &[0b1011, 0b1110]);
        let r = collapse_to_point(&cone, 0, 4).unwrap();
        let cert = r.certificate().unwrap();
        assert!(matches!(cert.method, CollapseMethod::Cone { .. }));
        assert!(replay(&cone, cert));
        assert!(collapse_to_point(&point.induced(0), 0, 1).is_err());
    }

    #[test]
    fn greedy_collapse_replays() {
        // a path of two edges is not a cone over an end, the greedy route must work
        let path = LinkComplex::from_cells(
            labels(4),
            vec![(1, 0), (2, 0), (4, 0), (8, 0), (0b0011, 1), (0b0110, 1), (0b1100, 1)],
        )
        .unwrap();
        let r = collapse_to_point(&path, 7, 4).unwrap();
        assert!(replay(&path, r.certificate().unwrap()));
        let mut bad = r.certificate().unwrap().clone();
        bad.steps.reverse();
        assert!(!replay(&path, &bad) || bad.steps.len() < 2);
    }

    #[test]
    fn balanced_links_are_cones() {
        let c = find_standard_coloring().unwrap();
        let k = flag_complex_k();
        for s in enumerate_balanced(&c).unwrap() {
            assert_eq!(ascending_link(&k, s).vertex_count(), 8);
            let v = balanced_link_check(&k, s, 0, 8).unwrap();
            assert!(v.passed() && v.cone_witnesses());
            let down = s.center().unwrap();
            let up = s.reversed().center().unwrap();
            assert_ne!(descending_link(&k, s).cone_apexes() & (1 << down.index()), 0);
            assert_ne!(ascending_link(&k, s).cone_apexes() & (1 << up.index()), 0);
            assert_eq!(c.color(down), c.color(up));
        }
        let s0 = initial_state(&c).unwrap();
        for link in [ascending_link(&k, s0), descending_link(&k, s0)] {
            let apexes = link.cone_apexes();
            assert!(c.facets_of(crate::coloring::Color::new(8).unwrap())
                .iter()
                .any(|f| apexes & (1 << f.index()) != 0));
        }
    }

    #[test]
    fn octahedron_checks() {
        let c = find_standard_coloring().unwrap();
        let (oct, _) = octahedron(0).unwrap();
        assert_eq!(oct.f_vector(), vec![8, 24, 32, 16]);
        for s in enumerate_balanced(&c).unwrap() {
            for v in polytope().ideal_vertex_faces() {
                assert!(octahedron_link_check(s, v, 0, 8).unwrap().passed());
            }
        }
        let all_in = State::from_mask(u16::MAX);
        let r = octahedron_link_check(all_in, 0, 0, 8).unwrap();
        assert!(!r.passed());
        assert!(r.witness.is_none());
    }

    #[test]
    fn prism_shape_and_cases() {
        let c = find_standard_coloring().unwrap();
        let moves = MoveSet::canonical();
        let s0 = initial_state(&c).unwrap();
        for r in bad_ridges(&c, &moves) {
            let (pr, facets) = prism(r).unwrap();
            assert_eq!(pr.f_vector(), vec![6, 9, 5]);
            let mut colors: Vec<u8> = facets.iter().map(|&f| c.color(f).get()).collect();
            colors.sort();
            colors.dedup();
            assert_eq!(colors.len(), 6);
            let v = prism_link_check(r, s0, 0, 16).unwrap();
            assert!(v.passed() && v.figure_case(), "{v:?}");
        }
    }

    #[test]
    fn m5_certificate() {
        let c = find_standard_coloring().unwrap();
        let moves = MoveSet::canonical();
        let s0 = initial_state(&c).unwrap();
        let m = assemble_m5_with_states(&c, s0, &moves);
        let rep = fibration_certificate(&m, &c, &CertificateOptions::default()).unwrap();
        assert_eq!(rep.verdict, OverallVerdict::Certified, "{:?}", rep.failures.first());
        assert_eq!(rep.type1.checks, 256);
        assert_eq!(rep.type1.witnessed, 256);
        assert_eq!(rep.type2.checks, 2560);
        assert_eq!(rep.distinct_states.len(), 16);
    }

    #[test]
    fn links_partition_and_swap() {
        let c = find_standard_coloring().unwrap();
        let k = flag_complex_k();
        let all_o = State::from_mask(0);
        assert_eq!(ascending_link(&k, all_o), k);
        assert!(descending_link(&k, all_o).is_empty());
        for s in enumerate_balanced(&c).unwrap() {
            let (a, d) = (ascending_link(&k, s), descending_link(&k, s));
            assert_eq!(a.vertex_mask() & d.vertex_mask(), 0);
            assert_eq!(a.vertex_mask() | d.vertex_mask(), 0xffff);
            assert_eq!(ascending_link(&k, s.reversed()), d);
            assert_eq!(descending_link(&k, s.reversed()), a);
        }
    }

    #[test]
    fn verdicts_are_r16_equivariant() {
        let c = find_standard_coloring().unwrap();
        let k = flag_complex_k();
        let s0 = initial_state(&c).unwrap();
        let base = balanced_link_check(&k, s0, 3, 8).unwrap();
        for g in polytope().r16() {
            let t = s0.transported(g);
            let v = balanced_link_check(&k, t, 3, 8).unwrap();
            assert_eq!(v.verdict(), base.verdict());
            assert_eq!(ascending_link(&k, t).f_vector(), ascending_link(&k, s0).f_vector());
            for w in polytope().ideal_vertex_faces() {
                let gw = g.apply_vertex(polytope().vertices()[w as usize]).index() as FaceId;
                assert_eq!(
                    octahedron_link_check(s0, w, 0, 8).unwrap().passed(),
                    octahedron_link_check(t, gw, 0, 8).unwrap().passed()
                );
            }
        }
    }

    #[test]
    fn euler_obstruction_is_a_failure() {
        let circle = LinkComplex::simplicial(labels(3), &[0b011, 0b110, 0b101]);
        assert_eq!(LinkOutcome::check(&circle, 0, 4).unwrap(), LinkOutcome::Obstructed { euler: 0 });
        let two_points = LinkComplex::simplicial(labels(2), &[]).join_points(&labels(2)).unwrap();
        assert_eq!(two_points.euler_characteristic(), 2);
    }

    #[test]
    fn singleton_moves_are_not_certified() {
        let c = find_standard_coloring().unwrap();
        let s0 = initial_state(&c).unwrap();
        let m = assemble_m5_with_states(&c, s0, &MoveSet::singletons());
        let rep = fibration_certificate(&m, &c, &CertificateOptions::default()).unwrap();
        assert_eq!(rep.verdict, OverallVerdict::Failed);
        assert_eq!(rep.bad_squares, 0);
    }
}
