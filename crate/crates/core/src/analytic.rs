//! Exact Heisenberg-picture expectation engine for noisy graph states,
//! plus the simplified product formula over isolated stabilizers.
//!
//! Observables are pushed through the channels instead of evolving the
//! state: X/Y letters pick up scalar attenuation factors, Z letters under
//! reset branch into (1-r) Z + r I, and an edge with gate error
//! attenuates any string that anticommutes with Z Z on that edge (X or Y
//! on exactly one endpoint). The surviving branch of a pushed string is
//! matched against the stabilizer group with exact phases, so region
//! bounds keep all cross terms — no factorization assumption.

use crate::estimator::{MapSource, WitnessEstimate, WitnessMap};
use crate::graphstate::{self, candidate_element, expand_region_projector, generator};
use crate::lattice::{region_patch, LatticeGraph, RegionSpec, SiteId, Sublattice};
use crate::noise::ChannelDescriptor;
use crate::pauli::{PauliLetter, PauliString};

/// Attenuation a stabilizer picks up per anticommuting noisy edge.
///
/// `SincAverage` is the exact average of the random ZZ rotation,
/// sinc(2 eps) = 1 - 2q. `ShiftedSinc` applies (1 + sinc(2 eps))/2 = 1 - q
/// instead; it is kept as a labeled comparison mode and adjudicated
/// against the dense engine in the acceptance suite.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GateErrorModel {
    #[default]
    SincAverage,
    ShiftedSinc,
}

impl GateErrorModel {
    fn edge_factor(self, desc: &ChannelDescriptor, edge_idx: usize) -> f64 {
        let att = desc.edge_attenuation(edge_idx);
        match self {
            GateErrorModel::SincAverage => att,
            GateErrorModel::ShiftedSinc => 0.5 * (1.0 + att),
        }
    }
}

/// Real-weighted sum of Pauli strings.
#[derive(Clone, Debug, Default)]
pub struct WeightedPauliSum {
    pub terms: Vec<(f64, PauliString)>,
}

impl WeightedPauliSum {
    pub fn identity(weight: f64) -> WeightedPauliSum {
        WeightedPauliSum {
            terms: vec![(weight, PauliString::identity())],
        }
    }

    pub fn from_projector(expansion: &graphstate::ProjectorExpansion) -> WeightedPauliSum {
        WeightedPauliSum {
            terms: expansion.terms.clone(),
        }
    }

    pub fn scaled(mut self, f: f64) -> WeightedPauliSum {
        for (w, _) in &mut self.terms {
            *w *= f;
        }
        self
    }

    pub fn plus(mut self, rhs: &WeightedPauliSum) -> WeightedPauliSum {
        self.terms.extend(rhs.terms.iter().cloned());
        self.collected()
    }

    /// Operator product, expanding termwise with exact phases and folding
    /// the resulting signs into the weights.
    pub fn times(&self, rhs: &WeightedPauliSum) -> WeightedPauliSum {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (wa, pa) in &self.terms {
            for (wb, pb) in &rhs.terms {
                out.push((wa * wb, pa.times(pb)));
            }
        }
        WeightedPauliSum { terms: out }.collected()
    }

    /// Merge identical strings. Phases must be real (Hermitian algebra);
    /// signs fold into the weights.
    pub fn collected(self) -> WeightedPauliSum {
        use std::collections::BTreeMap;
        let mut acc: BTreeMap<Vec<(SiteId, PauliLetter)>, f64> = BTreeMap::new();
        for (w, p) in self.terms {
            let sign = p
                .phase()
                .real_sign()
                .expect("weighted Pauli sums keep real phases") as f64;
            *acc.entry(p.letters().collect()).or_insert(0.0) += w * sign;
        }
        WeightedPauliSum {
            terms: acc
                .into_iter()
                .filter(|(_, w)| *w != 0.0)
                .map(|(letters, w)| (w, PauliString::from_letters(letters)))
                .collect(),
        }
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (w, _)| m.max(w.abs()))
    }
}

/// Push a Pauli string through the Pauli-fied channels, expanding every
/// reset-carrying Z letter into its (1-r) Z + r I branches.
///
/// Intended for desk-scale strings (the branch count is 2^#Z); the region
/// engine below uses the equivalent closed form instead.
pub fn heisenberg_push(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    p: &PauliString,
    model: GateErrorModel,
) -> WeightedPauliSum {
    let base = scalar_attenuation(graph, desc, p, model);
    let z_sites: Vec<(SiteId, f64, f64)> = p
        .letters()
        .filter(|(_, l)| *l == PauliLetter::Z)
        .map(|(s, _)| {
            let idx = graph.site_index(s).expect("support inside graph");
            (s, desc.f_z(idx), desc.reset_weight(idx))
        })
        .collect();
    assert!(z_sites.len() <= 24, "branch expansion too large");
    let mut terms = vec![(base, p.clone())];
    for (site, keep, drop) in z_sites {
        let mut next = Vec::with_capacity(terms.len() * 2);
        for (w, s) in terms {
            if keep != 0.0 {
                next.push((w * keep, s.clone()));
            }
            if drop != 0.0 {
                next.push((w * drop, s.without_site(site)));
            }
        }
        terms = next;
    }
    WeightedPauliSum { terms }
}

/// Scalar part of the push: X/Y attenuation plus gate-error factors on
/// every edge the string anticommutes with (X or Y on exactly one
/// endpoint).
fn scalar_attenuation(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    p: &PauliString,
    model: GateErrorModel,
) -> f64 {
    let mut support_idx: Vec<usize> = p
        .xy_support()
        .map(|s| graph.site_index(s).expect("support inside graph"))
        .collect();
    support_idx.sort_unstable();
    let mut factor = 1.0;
    for &i in &support_idx {
        factor *= desc.f_xy(i);
        for &e in graph.edges_at(i) {
            let (s, t) = graph.edges()[e as usize];
            let other = if s as usize == i { t } else { s } as usize;
            if support_idx.binary_search(&other).is_err() {
                factor *= model.edge_factor(desc, e as usize);
            }
        }
    }
    factor
}

/// Expectation of a pushed string on the ideal state, in closed form.
///
/// Only one reset branch can land on the stabilizer group (the candidate
/// element fixed by the X/Y support), so the full branch sum collapses to
/// a product of per-site factors: a matching Z letter keeps
/// (1-p_depol)(1-r), a Z the candidate lacks survives only through its
/// reset branch (factor r), and a Z the candidate needs but the string
/// lacks kills the expectation.
pub fn attenuated_expectation(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    p: &PauliString,
    model: GateErrorModel,
) -> f64 {
    let support: Vec<SiteId> = p.xy_support().collect();
    let cand = candidate_element(graph, &support);

    let mut factor = scalar_attenuation(graph, desc, p, model);
    for (site, cl) in cand.letters() {
        let idx = graph.site_index(site).expect("support inside graph");
        match p.letter_at(site) {
            Some(pl) if pl == cl => {
                if pl == PauliLetter::Z {
                    factor *= desc.f_z(idx);
                }
                // X/Y factors are already in scalar_attenuation.
            }
            Some(_) => return 0.0, // X vs Y mismatch at a support site
            None => {
                debug_assert_eq!(cl, PauliLetter::Z);
                return 0.0; // candidate needs a Z the string lacks
            }
        }
    }
    for (site, pl) in p.letters() {
        if cand.letter_at(site).is_none() {
            debug_assert_eq!(pl, PauliLetter::Z);
            let idx = graph.site_index(site).expect("support inside graph");
            factor *= desc.reset_weight(idx);
        }
    }
    // Letters are reconciled above (reset branches drop surplus Zs without
    // touching the phase), so only the relative sign remains.
    match p.phase().times(cand.phase().conj()).real_sign() {
        Some(sign) => factor * sign as f64,
        None => {
            debug_assert!(
                !p.phase().is_real(),
                "hermitian strings have a real phase relative to the candidate"
            );
            0.0
        }
    }
}

/// Noisy expectation of the stabilizer of one site.
pub fn stabilizer_expectation(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    site: SiteId,
    model: GateErrorModel,
) -> f64 {
    attenuated_expectation(graph, desc, &generator(graph, site), model)
}

/// Region fidelity bound and witness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionBound {
    /// <P_{region ∩ A}>
    pub p_a: f64,
    /// <P_{region ∩ B}>
    pub p_b: f64,
    /// <P~> = p_a + p_b - 1, the fidelity lower bound
    pub p_tilde: f64,
    /// <W~> = 1/2 - <P~>; negative certifies multipartite entanglement
    pub witness: f64,
}

impl RegionBound {
    fn from_parts(p_a: f64, p_b: f64) -> RegionBound {
        let p_tilde = p_a + p_b - 1.0;
        RegionBound {
            p_a,
            p_b,
            p_tilde,
            witness: 0.5 - p_tilde,
        }
    }
}

fn projector_expectation(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    region: &RegionSpec,
    sublattice: Sublattice,
    model: GateErrorModel,
) -> f64 {
    let expansion = expand_region_projector(graph, region, sublattice);
    expansion
        .terms
        .iter()
        .map(|(c, t)| c * attenuated_expectation(graph, desc, t, model))
        .sum()
}

/// Exact region bound: expands both sublattice projectors, pushes every
/// term through the channels and evaluates on the ideal state. Cross
/// terms are exact.
pub fn exact_region_bound(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    region: &RegionSpec,
    model: GateErrorModel,
) -> RegionBound {
    RegionBound::from_parts(
        projector_expectation(graph, desc, region, Sublattice::A, model),
        projector_expectation(graph, desc, region, Sublattice::B, model),
    )
}

/// Simplified product formula: <P_{region ∩ S}> approximated by
/// prod (1 + <g_i>)/2 over isolated stabilizer expectations. Exact for
/// channels whose attenuation factorizes over overlapping supports (pure
/// dephasing, pure gate error); deviates when cross terms share Z
/// cancellations (depolarizing, loss).
pub fn product_formula_bound(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    region: &RegionSpec,
    model: GateErrorModel,
) -> RegionBound {
    let mut parts = [1.0f64, 1.0f64];
    for site in &region.sites {
        let g = stabilizer_expectation(graph, desc, *site, model);
        let k = if site.basis == Sublattice::A { 0 } else { 1 };
        parts[k] *= 0.5 * (1.0 + g);
    }
    RegionBound::from_parts(parts[0], parts[1])
}

/// Expectation of the dimer projector 1/4 (1 + XX + YZ + ZY) of one pair
/// under the scenario.
pub fn pair_projector_expectation(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    pair: &graphstate::PairGenerators,
    model: GateErrorModel,
) -> f64 {
    let xx = attenuated_expectation(graph, desc, &pair.xx, model);
    let yz = attenuated_expectation(graph, desc, &pair.yz, model);
    let zy = attenuated_expectation(graph, desc, &pair.zy(), model);
    0.25 * (1.0 + xx + yz + zy)
}

/// Witness map from the analytic engine, in the same format the shot
/// estimator emits (stderr 0, shot counts 0).
pub fn analytic_witness_map(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    regions: &[RegionSpec],
    kind: crate::lattice::RegionKind,
    exact: bool,
    model: GateErrorModel,
) -> WitnessMap {
    let entries = regions
        .iter()
        .map(|region| {
            let bound = if exact {
                exact_region_bound(graph, desc, region, model)
            } else {
                product_formula_bound(graph, desc, region, model)
            };
            let certified = region_patch(graph, region);
            let defect_adjacent = certified.iter().any(|s| graph.is_hole(*s));
            WitnessEstimate {
                kind: region.kind,
                sites: region.sites.clone(),
                centroid: region.centroid,
                p_a_hat: bound.p_a,
                p_b_hat: bound.p_b,
                p_tilde_hat: bound.p_tilde,
                w_hat: bound.witness,
                stderr: 0.0,
                n_shots_a: 0,
                n_shots_b: 0,
                defect_adjacent,
                entanglement_detected: bound.witness < 0.0,
                certified_sites: certified,
            }
        })
        .collect();
    WitnessMap {
        source: if exact {
            MapSource::AnalyticExact
        } else {
            MapSource::AnalyticPaper
        },
        region_kind: kind,
        lattice: graph.descriptor(),
        entries,
    }
}
