//! Bipartite lattice graphs with 2D embeddings and region catalogs.
//!
//! Three kinds are supported: `honeycomb` (two interleaved triangular
//! sublattices, coordination 3), `chain` (arrays of linear chains,
//! coordination 2) and `pairs` (disconnected two-site dimers). All graphs
//! are bipartite by construction: every edge connects sublattice A to
//! sublattice B. Boundaries are open; edge sites simply have fewer
//! neighbors.
//!
//! Honeycomb convention: A(u,v) neighbors B(u,v), B(u-1,v) and B(u,v-1)
//! whenever those cells exist. A(u,v) sits at u*a1 + v*a2 with
//! a1 = (1, 0), a2 = (1/2, sqrt(3)/2), and B(u,v) at A(u,v) + (a1+a2)/3.

use crate::error::{Error, Result};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

/// The two sublattices of a bipartite graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    pub fn other(self) -> Sublattice {
        match self {
            Sublattice::A => Sublattice::B,
            Sublattice::B => Sublattice::A,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sublattice::A => "A",
            Sublattice::B => "B",
        }
    }
}

impl fmt::Display for Sublattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Lattice site: unit cell (u, v) plus sublattice label.
///
/// The derived ordering sorts by (basis, u, v); that order fixes neighbor
/// lists, site columns in shot records, and expansion term order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteId {
    pub basis: Sublattice,
    pub cell_u: u32,
    pub cell_v: u32,
}

impl SiteId {
    pub fn new(basis: Sublattice, cell_u: u32, cell_v: u32) -> SiteId {
        SiteId {
            basis,
            cell_u,
            cell_v,
        }
    }

    pub fn a(u: u32, v: u32) -> SiteId {
        SiteId::new(Sublattice::A, u, v)
    }

    pub fn b(u: u32, v: u32) -> SiteId {
        SiteId::new(Sublattice::B, u, v)
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.basis, self.cell_u, self.cell_v)
    }
}

// Wire format: [u, v, "A"], matching the lattice descriptor schema.
impl Serialize for SiteId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        seq.serialize_element(&self.cell_u)?;
        seq.serialize_element(&self.cell_v)?;
        seq.serialize_element(self.basis.label())?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for SiteId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct SiteVisitor;
        impl<'de> Visitor<'de> for SiteVisitor {
            type Value = SiteId;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a [u, v, \"A\"|\"B\"] triple")
            }

            fn visit_seq<S: SeqAccess<'de>>(
                self,
                mut seq: S,
            ) -> std::result::Result<SiteId, S::Error> {
                let u: u32 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let v: u32 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let basis: String = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(2, &self))?;
                let basis = match basis.as_str() {
                    "A" => Sublattice::A,
                    "B" => Sublattice::B,
                    other => {
                        return Err(de::Error::custom(format!(
                            "sublattice must be \"A\" or \"B\", got {other:?}"
                        )))
                    }
                };
                if seq.next_element::<serde_json::Value>()?.is_some() {
                    return Err(de::Error::invalid_length(4, &self));
                }
                Ok(SiteId::new(basis, u, v))
            }
        }
        deserializer.deserialize_seq(SiteVisitor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Honeycomb,
    Chain,
    Pairs,
}

impl LatticeKind {
    /// Maximum coordination number of interior sites.
    pub fn full_degree(self) -> usize {
        match self {
            LatticeKind::Honeycomb => 3,
            LatticeKind::Chain => 2,
            LatticeKind::Pairs => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LatticeKind::Honeycomb => "honeycomb",
            LatticeKind::Chain => "chain",
            LatticeKind::Pairs => "pairs",
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Serializable lattice description: `{kind, n_u, n_v, holes}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeDescriptor {
    pub kind: LatticeKind,
    pub n_u: u32,
    pub n_v: u32,
    #[serde(default)]
    pub holes: Vec<SiteId>,
}

/// Immutable bipartite site graph with positions and hole markers.
#[derive(Clone, Debug)]
pub struct LatticeGraph {
    kind: LatticeKind,
    n_u: u32,
    n_v: u32,
    sites: Vec<SiteId>,
    index: HashMap<SiteId, u32>,
    neighbors: Vec<Vec<u32>>,
    positions: Vec<(f64, f64)>,
    hole_mask: Vec<bool>,
    holes: Vec<SiteId>,
    edges: Vec<(u32, u32)>,
    edges_at: Vec<Vec<u32>>,
}

/// Build a lattice graph of the given kind and size, with the listed
/// sites marked as holes. Holes stay in the site set; downstream noise
/// treats them as loss with probability 1.
pub fn build_lattice(
    kind: LatticeKind,
    n_u: u32,
    n_v: u32,
    holes: &[SiteId],
) -> Result<LatticeGraph> {
    if n_u == 0 || n_v == 0 {
        return Err(Error::ZeroDimension { n_u, n_v });
    }

    // Site list in (basis, u, v) order.
    let mut sites = Vec::with_capacity(2 * (n_u as usize) * (n_v as usize));
    for basis in [Sublattice::A, Sublattice::B] {
        for u in 0..n_u {
            for v in 0..n_v {
                sites.push(SiteId::new(basis, u, v));
            }
        }
    }
    let index: HashMap<SiteId, u32> = sites
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, i as u32))
        .collect();

    let mut seen = BTreeSet::new();
    for h in holes {
        if !index.contains_key(h) {
            return Err(Error::SiteOutOfBounds(*h));
        }
        if !seen.insert(*h) {
            return Err(Error::DuplicateHole(*h));
        }
    }
    let holes: Vec<SiteId> = seen.into_iter().collect();

    let positions: Vec<(f64, f64)> = sites.iter().map(|s| site_position(kind, *s)).collect();

    // Neighbors of an A site; B adjacency is the mirror image.
    let a_neighbors = |u: u32, v: u32| -> Vec<SiteId> {
        let mut out = Vec::with_capacity(3);
        match kind {
            LatticeKind::Honeycomb => {
                out.push(SiteId::b(u, v));
                if u > 0 {
                    out.push(SiteId::b(u - 1, v));
                }
                if v > 0 {
                    out.push(SiteId::b(u, v - 1));
                }
            }
            LatticeKind::Chain => {
                out.push(SiteId::b(u, v));
                if u > 0 {
                    out.push(SiteId::b(u - 1, v));
                }
            }
            LatticeKind::Pairs => {
                out.push(SiteId::b(u, v));
            }
        }
        out
    };

    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); sites.len()];
    for (i, site) in sites.iter().enumerate() {
        if site.basis != Sublattice::A {
            continue;
        }
        for nb in a_neighbors(site.cell_u, site.cell_v) {
            let j = index[&nb] as usize;
            neighbors[i].push(j as u32);
            neighbors[j].push(i as u32);
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }

    let mut hole_mask = vec![false; sites.len()];
    for h in &holes {
        hole_mask[index[h] as usize] = true;
    }

    let (edges, edges_at) = collect_edges(&neighbors);

    Ok(LatticeGraph {
        kind,
        n_u,
        n_v,
        sites,
        index,
        neighbors,
        positions,
        hole_mask,
        holes,
        edges,
        edges_at,
    })
}

fn site_position(kind: LatticeKind, site: SiteId) -> (f64, f64) {
    let u = site.cell_u as f64;
    let v = site.cell_v as f64;
    match kind {
        LatticeKind::Honeycomb => {
            // a1 = (1, 0), a2 = (1/2, sqrt(3)/2); B offset (a1 + a2)/3.
            let ax = u + v * 0.5;
            let ay = v * (3.0f64.sqrt() / 2.0);
            match site.basis {
                Sublattice::A => (ax, ay),
                Sublattice::B => (ax + 0.5, ay + 3.0f64.sqrt() / 6.0),
            }
        }
        LatticeKind::Chain | LatticeKind::Pairs => match site.basis {
            Sublattice::A => (u, v),
            Sublattice::B => (u + 0.5, v),
        },
    }
}

fn collect_edges(neighbors: &[Vec<u32>]) -> (Vec<(u32, u32)>, Vec<Vec<u32>>) {
    let mut edges = Vec::new();
    for (i, list) in neighbors.iter().enumerate() {
        for &j in list {
            if (i as u32) < j {
                edges.push((i as u32, j));
            }
        }
    }
    edges.sort_unstable();
    let mut edges_at: Vec<Vec<u32>> = vec![Vec::new(); neighbors.len()];
    for (e, &(i, j)) in edges.iter().enumerate() {
        edges_at[i as usize].push(e as u32);
        edges_at[j as usize].push(e as u32);
    }
    (edges, edges_at)
}

impl LatticeGraph {
    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn n_u(&self) -> u32 {
        self.n_u
    }

    pub fn n_v(&self) -> u32 {
        self.n_v
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// All sites in canonical (basis, u, v) order.
    pub fn sites(&self) -> &[SiteId] {
        &self.sites
    }

    pub fn site(&self, idx: usize) -> SiteId {
        self.sites[idx]
    }

    pub fn site_index(&self, site: SiteId) -> Option<usize> {
        self.index.get(&site).map(|&i| i as usize)
    }

    pub fn contains(&self, site: SiteId) -> bool {
        self.index.contains_key(&site)
    }

    pub fn neighbor_indices(&self, idx: usize) -> &[u32] {
        &self.neighbors[idx]
    }

    pub fn neighbors_of(&self, site: SiteId) -> impl Iterator<Item = SiteId> + '_ {
        let idx = self.site_index(site).expect("site not in lattice");
        self.neighbors[idx].iter().map(|&j| self.sites[j as usize])
    }

    pub fn degree(&self, site: SiteId) -> usize {
        let idx = self.site_index(site).expect("site not in lattice");
        self.neighbors[idx].len()
    }

    pub fn position(&self, site: SiteId) -> (f64, f64) {
        let idx = self.site_index(site).expect("site not in lattice");
        self.positions[idx]
    }

    pub fn position_by_index(&self, idx: usize) -> (f64, f64) {
        self.positions[idx]
    }

    pub fn holes(&self) -> &[SiteId] {
        &self.holes
    }

    pub fn is_hole(&self, site: SiteId) -> bool {
        self.site_index(site)
            .map(|i| self.hole_mask[i])
            .unwrap_or(false)
    }

    /// Edges as (lower, higher) site-index pairs in canonical order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_sites(&self, edge_idx: usize) -> (SiteId, SiteId) {
        let (i, j) = self.edges[edge_idx];
        (self.sites[i as usize], self.sites[j as usize])
    }

    pub fn edge_midpoint(&self, edge_idx: usize) -> (f64, f64) {
        let (i, j) = self.edges[edge_idx];
        let (xa, ya) = self.positions[i as usize];
        let (xb, yb) = self.positions[j as usize];
        ((xa + xb) / 2.0, (ya + yb) / 2.0)
    }

    pub fn edges_at(&self, idx: usize) -> &[u32] {
        &self.edges_at[idx]
    }

    pub fn descriptor(&self) -> LatticeDescriptor {
        LatticeDescriptor {
            kind: self.kind,
            n_u: self.n_u,
            n_v: self.n_v,
            holes: self.holes.clone(),
        }
    }

    pub fn from_descriptor(d: &LatticeDescriptor) -> Result<LatticeGraph> {
        build_lattice(d.kind, d.n_u, d.n_v, &d.holes)
    }

    /// Subgraph induced by `keep`: same kind and cell bounds, adjacency
    /// restricted to the kept sites. Used for minimal dense-engine patches.
    pub fn induced_subgraph(&self, keep: &[SiteId]) -> Result<LatticeGraph> {
        let keep: BTreeSet<SiteId> = keep.iter().copied().collect();
        for s in &keep {
            if !self.contains(*s) {
                return Err(Error::SiteOutOfBounds(*s));
            }
        }
        let sites: Vec<SiteId> = keep.iter().copied().collect();
        let index: HashMap<SiteId, u32> = sites
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i as u32))
            .collect();
        let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); sites.len()];
        for (i, s) in sites.iter().enumerate() {
            for nb in self.neighbors_of(*s) {
                if let Some(&j) = index.get(&nb) {
                    neighbors[i].push(j);
                }
            }
            neighbors[i].sort_unstable();
        }
        let positions: Vec<(f64, f64)> = sites.iter().map(|s| self.position(*s)).collect();
        let holes: Vec<SiteId> = self
            .holes
            .iter()
            .copied()
            .filter(|h| index.contains_key(h))
            .collect();
        let mut hole_mask = vec![false; sites.len()];
        for h in &holes {
            hole_mask[index[h] as usize] = true;
        }
        let (edges, edges_at) = collect_edges(&neighbors);
        Ok(LatticeGraph {
            kind: self.kind,
            n_u: self.n_u,
            n_v: self.n_v,
            sites,
            index,
            neighbors,
            positions,
            hole_mask,
            holes,
            edges,
            edges_at,
        })
    }

    /// Pairs (A site, B partner) of a `pairs` lattice.
    pub fn pair_list(&self) -> Result<Vec<(SiteId, SiteId)>> {
        if self.kind != LatticeKind::Pairs {
            return Err(Error::WrongLatticeKind {
                expected: "pairs".into(),
                got: self.kind.to_string(),
            });
        }
        Ok(self
            .sites
            .iter()
            .filter(|s| s.basis == Sublattice::A)
            .map(|s| (*s, SiteId::b(s.cell_u, s.cell_v)))
            .filter(|(_, b)| self.contains(*b))
            .collect())
    }
}

/// Region kinds of the witness catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Alpha,
    Beta,
    Gamma,
    Custom,
}

impl RegionKind {
    pub fn label(self) -> &'static str {
        match self {
            RegionKind::Alpha => "alpha",
            RegionKind::Beta => "beta",
            RegionKind::Gamma => "gamma",
            RegionKind::Custom => "custom",
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl std::str::FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<RegionKind> {
        match s {
            "alpha" => Ok(RegionKind::Alpha),
            "beta" => Ok(RegionKind::Beta),
            "gamma" => Ok(RegionKind::Gamma),
            "custom" => Ok(RegionKind::Custom),
            other => Err(Error::InvalidConfig(format!(
                "unknown region kind {other:?} (expected alpha, beta or gamma)"
            ))),
        }
    }
}

/// A connected set of sites the witness is evaluated on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    /// Member sites in canonical order.
    pub sites: Vec<SiteId>,
    /// Arithmetic mean of member positions.
    pub centroid: (f64, f64),
}

fn centroid_of(graph: &LatticeGraph, sites: &[SiteId]) -> (f64, f64) {
    let mut x = 0.0;
    let mut y = 0.0;
    for s in sites {
        let (px, py) = graph.position(*s);
        x += px;
        y += py;
    }
    let n = sites.len() as f64;
    (x / n, y / n)
}

fn make_region(graph: &LatticeGraph, kind: RegionKind, mut sites: Vec<SiteId>) -> RegionSpec {
    sites.sort_unstable();
    let centroid = centroid_of(graph, &sites);
    RegionSpec {
        kind,
        sites,
        centroid,
    }
}

/// Enumerate the full catalog of regions of one kind.
///
/// alpha: every edge. beta: every full-degree site together with all its
/// neighbors (both sublattices serve as centers). gamma: every hexagonal
/// plaquette; empty on non-honeycomb lattices. Regions containing holes
/// are still returned; the estimator flags them instead.
pub fn enumerate_regions(graph: &LatticeGraph, kind: RegionKind) -> Vec<RegionSpec> {
    match kind {
        RegionKind::Alpha => graph
            .edges()
            .iter()
            .map(|&(i, j)| {
                make_region(
                    graph,
                    RegionKind::Alpha,
                    vec![graph.site(i as usize), graph.site(j as usize)],
                )
            })
            .collect(),
        RegionKind::Beta => {
            let full = graph.kind().full_degree();
            graph
                .sites()
                .iter()
                .filter(|s| graph.degree(**s) == full)
                .map(|s| {
                    let mut sites = vec![*s];
                    sites.extend(graph.neighbors_of(*s));
                    make_region(graph, RegionKind::Beta, sites)
                })
                .collect()
        }
        RegionKind::Gamma => {
            if graph.kind() != LatticeKind::Honeycomb {
                return Vec::new();
            }
            let mut out = Vec::new();
            for u in 1..graph.n_u() {
                for v in 1..graph.n_v() {
                    let hex = [
                        SiteId::a(u, v - 1),
                        SiteId::b(u, v - 1),
                        SiteId::a(u, v),
                        SiteId::b(u - 1, v),
                        SiteId::a(u - 1, v),
                        SiteId::b(u - 1, v - 1),
                    ];
                    if hex.iter().all(|s| graph.contains(*s)) {
                        out.push(make_region(graph, RegionKind::Gamma, hex.to_vec()));
                    }
                }
            }
            out
        }
        RegionKind::Custom => Vec::new(),
    }
}

/// Validate and build a custom region from explicit sites.
pub fn custom_region(graph: &LatticeGraph, sites: &[SiteId]) -> Result<RegionSpec> {
    if sites.is_empty() {
        return Err(Error::InvalidRegion("region has no sites".into()));
    }
    let set: BTreeSet<SiteId> = sites.iter().copied().collect();
    if set.len() != sites.len() {
        return Err(Error::InvalidRegion("duplicate sites".into()));
    }
    for s in &set {
        if !graph.contains(*s) {
            return Err(Error::SiteOutOfBounds(*s));
        }
    }
    if !induces_connected(graph, &set) {
        return Err(Error::InvalidRegion(
            "sites do not induce a connected subgraph".into(),
        ));
    }
    Ok(make_region(
        graph,
        RegionKind::Custom,
        set.into_iter().collect(),
    ))
}

pub(crate) fn induces_connected(graph: &LatticeGraph, set: &BTreeSet<SiteId>) -> bool {
    let start = match set.iter().next() {
        Some(s) => *s,
        None => return true,
    };
    let mut seen = BTreeSet::new();
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for nb in graph.neighbors_of(s) {
            if set.contains(&nb) && seen.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    seen.len() == set.len()
}

/// Minimal patch of a region: the member sites plus every neighbor, i.e.
/// the union of the supports of all stabilizers entering the witness.
pub fn region_patch(graph: &LatticeGraph, region: &RegionSpec) -> Vec<SiteId> {
    let mut set: BTreeSet<SiteId> = region.sites.iter().copied().collect();
    for s in &region.sites {
        set.extend(graph.neighbors_of(*s));
    }
    set.into_iter().collect()
}
