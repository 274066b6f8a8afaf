//! Noise channels, spatial parameter fields, and their exact stochastic
//! (Pauli-flip / reset) form.
//!
//! Five channels are modeled, applied in the fixed order
//! gate error -> dephasing -> depolarizing -> loss -> spontaneous emission:
//!
//! - dephasing: random Z rotation by an angle uniform in [-eps, eps];
//!   averaging turns it into a phase flip with probability
//!   (1 - sinc(2 eps))/2, attenuating X and Y by sinc(2 eps).
//! - gate error: random ZZ rotation on an edge, likewise an exact ZZ
//!   flip with probability (1 - sinc(2 eps))/2.
//! - loss and spontaneous emission: reset to |0> with probability p,
//!   i.e. rho -> (1-p) rho + p |0><0|. Both share one implementation and
//!   compose into a single reset weight r = 1 - (1-p_loss)(1-p_se).
//! - depolarizing: rho -> (1-p) rho + p I/2.
//!
//! Holes in the lattice are forced to loss probability 1.

use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeGraph, SiteId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// sin(x)/x with the exact limit 1 at x = 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Flip probability of the Pauli-fied random-phase channel with
/// half-width `eps`: (1 - sinc(2 eps))/2.
pub fn flip_probability(eps: f64) -> f64 {
    0.5 * (1.0 - sinc(2.0 * eps))
}

/// Circular override region of a parameter field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub value: f64,
}

/// Linear radial ramp: zero inside `r_in`, `edge_value` at and beyond
/// `r_out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub cx: f64,
    pub cy: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub edge_value: f64,
}

/// Spatial parameter field: a base value, overridden inside disks, plus
/// a radial ramp contribution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    #[serde(default)]
    pub base: f64,
    #[serde(default)]
    pub disks: Vec<Disk>,
    #[serde(default)]
    pub ramp: Option<Ramp>,
}

impl FieldSpec {
    pub fn uniform(value: f64) -> FieldSpec {
        FieldSpec {
            base: value,
            disks: Vec::new(),
            ramp: None,
        }
    }

    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let mut v = self.base;
        for d in &self.disks {
            if (x - d.cx).hypot(y - d.cy) <= d.r {
                v = d.value;
            }
        }
        if let Some(r) = &self.ramp {
            let dist = (x - r.cx).hypot(y - r.cy);
            v += if dist <= r.r_in {
                0.0
            } else if dist >= r.r_out {
                r.edge_value
            } else {
                r.edge_value * (dist - r.r_in) / (r.r_out - r.r_in)
            };
        }
        v
    }
}

/// Per-channel field configuration, the JSON scenario document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub dephasing: FieldSpec,
    #[serde(default)]
    pub gate_error: FieldSpec,
    #[serde(default)]
    pub loss: FieldSpec,
    #[serde(default)]
    pub spont_emission: FieldSpec,
    #[serde(default)]
    pub depolarizing: FieldSpec,
}

/// Materialized per-site / per-edge channel parameters for one lattice.
///
/// Angles are radians (half-widths of the uniform phase distributions),
/// the rest are probabilities. Edge keys are (lower, higher) site pairs
/// in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseScenario {
    #[serde(with = "site_map")]
    pub dephase_eps: BTreeMap<SiteId, f64>,
    #[serde(with = "edge_map")]
    pub gate_eps: BTreeMap<(SiteId, SiteId), f64>,
    #[serde(with = "site_map")]
    pub loss_p: BTreeMap<SiteId, f64>,
    #[serde(with = "site_map")]
    pub se_p: BTreeMap<SiteId, f64>,
    #[serde(with = "site_map")]
    pub depol_p: BTreeMap<SiteId, f64>,
}

/// Site- and edge-keyed maps serialize as entry lists; JSON object keys
/// must be strings.
mod site_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<SiteId, f64>,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<(SiteId, f64)> = map.iter().map(|(s, v)| (*s, *v)).collect();
        entries.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<BTreeMap<SiteId, f64>, D::Error> {
        let entries = Vec::<(SiteId, f64)>::deserialize(de)?;
        Ok(entries.into_iter().collect())
    }
}

mod edge_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(SiteId, SiteId), f64>,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<(SiteId, SiteId, f64)> =
            map.iter().map(|((a, b), v)| (*a, *b, *v)).collect();
        entries.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<BTreeMap<(SiteId, SiteId), f64>, D::Error> {
        let entries = Vec::<(SiteId, SiteId, f64)>::deserialize(de)?;
        Ok(entries.into_iter().map(|(a, b, v)| ((a, b), v)).collect())
    }
}

fn check_probability(field: &str, site: SiteId, v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::FieldOutOfRange {
            field: format!("{field} at {site}"),
            value: v,
        });
    }
    Ok(v)
}

fn check_angle(field: &str, what: String, v: f64) -> Result<f64> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::FieldOutOfRange {
            field: format!("{field} at {what}"),
            value: v,
        });
    }
    Ok(v)
}

/// Evaluate the channel fields on every site and edge of the lattice.
/// Edge fields are evaluated at edge midpoints. Holes are forced to
/// loss probability 1.
pub fn build_scenario(graph: &LatticeGraph, config: &ScenarioConfig) -> Result<NoiseScenario> {
    let mut s = NoiseScenario::default();
    for site in graph.sites() {
        let (x, y) = graph.position(*site);
        s.dephase_eps.insert(
            *site,
            check_angle("dephasing", site.to_string(), config.dephasing.value_at(x, y))?,
        );
        let loss = if graph.is_hole(*site) {
            1.0
        } else {
            check_probability("loss", *site, config.loss.value_at(x, y))?
        };
        s.loss_p.insert(*site, loss);
        s.se_p.insert(
            *site,
            check_probability("spont_emission", *site, config.spont_emission.value_at(x, y))?,
        );
        s.depol_p.insert(
            *site,
            check_probability("depolarizing", *site, config.depolarizing.value_at(x, y))?,
        );
    }
    for e in 0..graph.edges().len() {
        let (a, b) = graph.edge_sites(e);
        let (x, y) = graph.edge_midpoint(e);
        s.gate_eps.insert(
            (a, b),
            check_angle("gate_error", format!("{a}-{b}"), config.gate_error.value_at(x, y))?,
        );
    }
    Ok(s)
}

impl NoiseScenario {
    /// The all-zero scenario on a lattice (holes still forced to loss 1).
    pub fn identity(graph: &LatticeGraph) -> NoiseScenario {
        build_scenario(graph, &ScenarioConfig::default())
            .expect("zero fields are always in range")
    }

    fn site_param(map: &BTreeMap<SiteId, f64>, site: SiteId) -> f64 {
        map.get(&site).copied().unwrap_or(0.0)
    }

    pub fn dephase_at(&self, site: SiteId) -> f64 {
        Self::site_param(&self.dephase_eps, site)
    }

    pub fn loss_at(&self, site: SiteId) -> f64 {
        Self::site_param(&self.loss_p, site)
    }

    pub fn se_at(&self, site: SiteId) -> f64 {
        Self::site_param(&self.se_p, site)
    }

    pub fn depol_at(&self, site: SiteId) -> f64 {
        Self::site_param(&self.depol_p, site)
    }

    pub fn gate_at(&self, a: SiteId, b: SiteId) -> f64 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.gate_eps.get(&key).copied().unwrap_or(0.0)
    }

    /// Restriction to a site subset (for minimal patches). Edge
    /// parameters survive when both endpoints are kept.
    pub fn restricted_to(&self, patch: &LatticeGraph) -> NoiseScenario {
        let keep = |m: &BTreeMap<SiteId, f64>| {
            m.iter()
                .filter(|(s, _)| patch.contains(**s))
                .map(|(s, v)| (*s, *v))
                .collect()
        };
        NoiseScenario {
            dephase_eps: keep(&self.dephase_eps),
            gate_eps: self
                .gate_eps
                .iter()
                .filter(|((a, b), _)| patch.contains(*a) && patch.contains(*b))
                .map(|(k, v)| (*k, *v))
                .collect(),
            loss_p: keep(&self.loss_p),
            se_p: keep(&self.se_p),
            depol_p: keep(&self.depol_p),
        }
    }

    /// Provenance digest over the lattice descriptor and all channel
    /// parameters; hex, 16 characters.
    pub fn digest(&self, lattice: &LatticeDescriptor) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(lattice).expect("descriptor serializes"));
        hasher.update(serde_json::to_vec(self).expect("scenario serializes"));
        let out = hasher.finalize();
        out[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Exact stochastic form of a scenario, aligned to a lattice's site and
/// edge order: per site the flip probability of the Pauli-fied dephasing,
/// the depolarizing probability and the combined reset weight; per edge
/// the ZZ-flip probability.
#[derive(Clone, Debug)]
pub struct ChannelDescriptor {
    pub(crate) dephase_flip: Vec<f64>,
    pub(crate) depol: Vec<f64>,
    pub(crate) reset: Vec<f64>,
    pub(crate) edge_flip: Vec<f64>,
}

/// Convert a scenario into its exact stochastic-Pauli/reset form on the
/// given lattice.
pub fn pauliize(graph: &LatticeGraph, scenario: &NoiseScenario) -> ChannelDescriptor {
    let n = graph.site_count();
    let mut dephase_flip = Vec::with_capacity(n);
    let mut depol = Vec::with_capacity(n);
    let mut reset = Vec::with_capacity(n);
    for site in graph.sites() {
        dephase_flip.push(flip_probability(scenario.dephase_at(*site)));
        depol.push(scenario.depol_at(*site));
        reset.push(1.0 - (1.0 - scenario.loss_at(*site)) * (1.0 - scenario.se_at(*site)));
    }
    let edge_flip = (0..graph.edges().len())
        .map(|e| {
            let (a, b) = graph.edge_sites(e);
            flip_probability(scenario.gate_at(a, b))
        })
        .collect();
    ChannelDescriptor {
        dephase_flip,
        depol,
        reset,
        edge_flip,
    }
}

impl ChannelDescriptor {
    pub fn site_count(&self) -> usize {
        self.dephase_flip.len()
    }

    pub fn dephase_flip(&self, site_idx: usize) -> f64 {
        self.dephase_flip[site_idx]
    }

    pub fn depol(&self, site_idx: usize) -> f64 {
        self.depol[site_idx]
    }

    pub fn reset_weight(&self, site_idx: usize) -> f64 {
        self.reset[site_idx]
    }

    pub fn edge_flip(&self, edge_idx: usize) -> f64 {
        self.edge_flip[edge_idx]
    }

    /// X/Y attenuation of one site: sinc from dephasing times (1-p) from
    /// depolarizing times (1-r) from reset.
    pub fn f_xy(&self, site_idx: usize) -> f64 {
        (1.0 - 2.0 * self.dephase_flip[site_idx])
            * (1.0 - self.depol[site_idx])
            * (1.0 - self.reset[site_idx])
    }

    /// Z attenuation of the kept branch: dephasing leaves Z alone, the
    /// reset branch splits off separately with weight `reset_weight`.
    pub fn f_z(&self, site_idx: usize) -> f64 {
        (1.0 - self.depol[site_idx]) * (1.0 - self.reset[site_idx])
    }

    /// Attenuation a string picks up on an edge it anticommutes with:
    /// 1 - 2q = sinc(2 eps).
    pub fn edge_attenuation(&self, edge_idx: usize) -> f64 {
        1.0 - 2.0 * self.edge_flip[edge_idx]
    }
}
