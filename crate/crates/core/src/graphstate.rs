//! Stabilizer algebra for bipartite graph states.
//!
//! A graph state is stabilized by g_i = X_i * prod_{j in N(i)} Z_j, one
//! generator per vertex, with the vertex's actual neighbor set (reduced at
//! open boundaries). A `pairs` lattice instead carries the two-qubit state
//! stabilized per dimer by {X X, Y Z} (and their product Z Y).
//!
//! Expectation values on the ideal state are decided algebraically: a
//! Pauli string has expectation +-1 iff it is +- an element of the
//! stabilizer group, and 0 otherwise. Membership is resolved by matching
//! the X/Y support against the unique candidate generator subset and
//! comparing with exact phases.

use crate::error::Result;
use crate::lattice::{LatticeGraph, LatticeKind, RegionSpec, SiteId, Sublattice};
use crate::pauli::{PauliLetter, PauliString};

/// Stabilizing operator of `site`: X there, Z on every neighbor.
pub fn generator(graph: &LatticeGraph, site: SiteId) -> PauliString {
    let mut s = PauliString::single(site, PauliLetter::X);
    for nb in graph.neighbors_of(site) {
        s.mul_letter(nb, PauliLetter::Z);
    }
    s
}

/// All generators in canonical site order.
pub fn graph_generators(graph: &LatticeGraph) -> Vec<PauliString> {
    graph.sites().iter().map(|s| generator(graph, *s)).collect()
}

/// Stabilizer pair of one dimer of a `pairs` lattice.
#[derive(Clone, Debug)]
pub struct PairGenerators {
    pub cs: SiteId,
    pub li: SiteId,
    /// X_cs X_li
    pub xx: PauliString,
    /// Y_cs Z_li
    pub yz: PauliString,
}

impl PairGenerators {
    /// The third nontrivial group element, (XX)*(YZ) = +Z_cs Y_li.
    pub fn zy(&self) -> PauliString {
        self.xx.times(&self.yz)
    }
}

/// Per-dimer stabilizer pairs {X X, Y Z} of a `pairs` lattice.
pub fn pair_generators(graph: &LatticeGraph) -> Result<Vec<PairGenerators>> {
    let pairs = graph.pair_list()?;
    Ok(pairs
        .into_iter()
        .map(|(cs, li)| PairGenerators {
            cs,
            li,
            xx: PauliString::from_letters([(cs, PauliLetter::X), (li, PauliLetter::X)]),
            yz: PauliString::from_letters([(cs, PauliLetter::Y), (li, PauliLetter::Z)]),
        })
        .collect())
}

/// Expansion of prod_{i in region ∩ sublattice} (1 + g_i)/2 into signed
/// Pauli terms.
#[derive(Clone, Debug)]
pub struct ProjectorExpansion {
    /// 2^k terms, each with coefficient 2^-k; the identity term comes
    /// first (subset mask order over generators in site order).
    pub terms: Vec<(f64, PauliString)>,
    pub region: RegionSpec,
    pub sublattice: Sublattice,
}

impl ProjectorExpansion {
    /// Number of generators entering the product.
    pub fn generator_count(&self) -> usize {
        self.terms.len().trailing_zeros() as usize
    }
}

/// Expand the sublattice-restricted region projector with exact phase
/// tracking. An empty intersection yields the single identity term with
/// coefficient 1.
pub fn expand_region_projector(
    graph: &LatticeGraph,
    region: &RegionSpec,
    sublattice: Sublattice,
) -> ProjectorExpansion {
    let gens: Vec<PauliString> = region
        .sites
        .iter()
        .filter(|s| s.basis == sublattice)
        .map(|s| generator(graph, *s))
        .collect();
    let k = gens.len();
    let coeff = 0.5f64.powi(k as i32);
    let mut terms = Vec::with_capacity(1 << k);
    for mask in 0u32..(1 << k) {
        let mut term = PauliString::identity();
        for (bit, g) in gens.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                term = term.times(g);
            }
        }
        debug_assert!(term.phase().is_real(), "generator products are Hermitian");
        terms.push((coeff, term));
    }
    ProjectorExpansion {
        terms,
        region: region.clone(),
        sublattice,
    }
}

/// The unique stabilizer-group element whose X/Y support can match a
/// string with the given X/Y support, with exact phase.
///
/// Graph states: each generator is the only one carrying X at its own
/// vertex, so the candidate subset is exactly the support. Pair states:
/// within each dimer the four group elements {I, XX, YZ, ZY} have
/// distinct X/Y-support patterns.
pub(crate) fn candidate_element(graph: &LatticeGraph, xy_support: &[SiteId]) -> PauliString {
    match graph.kind() {
        LatticeKind::Pairs => {
            let mut cand = PauliString::identity();
            let mut cells: Vec<(u32, u32)> = xy_support
                .iter()
                .map(|s| (s.cell_u, s.cell_v))
                .collect();
            cells.dedup();
            cells.sort_unstable();
            cells.dedup();
            for (u, v) in cells {
                let a = SiteId::a(u, v);
                let b = SiteId::b(u, v);
                let on_a = xy_support.contains(&a);
                let on_b = xy_support.contains(&b);
                let element = match (on_a, on_b) {
                    (true, true) => {
                        PauliString::from_letters([(a, PauliLetter::X), (b, PauliLetter::X)])
                    }
                    (true, false) => {
                        PauliString::from_letters([(a, PauliLetter::Y), (b, PauliLetter::Z)])
                    }
                    (false, true) => {
                        PauliString::from_letters([(a, PauliLetter::Z), (b, PauliLetter::Y)])
                    }
                    (false, false) => unreachable!(),
                };
                cand = cand.times(&element);
            }
            cand
        }
        _ => {
            let mut cand = PauliString::identity();
            for site in xy_support {
                cand = cand.times(&generator(graph, *site));
            }
            cand
        }
    }
}

/// Expectation of a Pauli string on the ideal (noise-free) state of the
/// lattice: +1 or -1 when the string is +- a stabilizer-group element,
/// 0 otherwise.
///
/// Panics if the string is supported outside the graph; callers uphold
/// that precondition.
pub fn ideal_expectation(graph: &LatticeGraph, p: &PauliString) -> i8 {
    for (site, _) in p.letters() {
        assert!(
            graph.contains(site),
            "string supported outside the lattice at {site}"
        );
    }
    let support: Vec<SiteId> = p.xy_support().collect();
    let cand = candidate_element(graph, &support);
    match p.relative_sign(&cand) {
        Some(sign) => sign,
        None => {
            // Letters differ, or the relative phase is imaginary; the
            // latter cannot occur for Hermitian inputs.
            debug_assert!(
                !p.same_letters(&cand) || !p.phase().is_real(),
                "hermitian string with matching letters must have real relative sign"
            );
            0
        }
    }
}
