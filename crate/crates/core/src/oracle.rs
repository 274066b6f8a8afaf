//! Dense density-matrix reference engine for small patches.
//!
//! Prepares the noisy state by exact channel application and evaluates
//! arbitrary operators; ground truth for the analytic engine and the
//! sampler. Capped at 12 qubits — the largest minimal patch (a hexagonal
//! plaquette plus its boundary supports) is exactly 12.
//!
//! Site k of the patch (canonical order) is bit k of the basis index,
//! bit value 1 meaning |1>.

use crate::analytic::WeightedPauliSum;
use crate::error::{Error, Result};
use crate::graphstate::ProjectorExpansion;
use crate::lattice::{LatticeGraph, LatticeKind, SiteId};
use crate::noise::{flip_probability, NoiseScenario};
use crate::pauli::{PauliLetter, PauliString, Phase};
use crate::sampler::MeasurementSetting;
use num_complex::Complex64;

pub const MAX_DENSE_QUBITS: usize = 12;

/// Dense density matrix over the sites of one patch.
#[derive(Clone)]
pub struct DensePatch {
    sites: Vec<SiteId>,
    n: usize,
    dim: usize,
    rho: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl DensePatch {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn sites(&self) -> &[SiteId] {
        &self.sites
    }

    fn bit_of(&self, site: SiteId) -> usize {
        self.sites
            .binary_search(&site)
            .expect("operator supported outside the patch")
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> Complex64 {
        self.rho[r * self.dim + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|r| self.at(r, r)).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.dim {
            for c in 0..=r {
                m = m.max((self.at(r, c) - self.at(c, r).conj()).norm());
            }
        }
        m
    }

    /// Ideal pure state of the patch graph: |+>^n with CZ on every edge
    /// for graph kinds, the {XX, YZ}-stabilized dimer state for pairs.
    fn ideal_statevector(graph: &LatticeGraph) -> Result<Vec<Complex64>> {
        let n = graph.site_count();
        let dim = 1usize << n;
        let mut psi = vec![ZERO; dim];
        match graph.kind() {
            LatticeKind::Pairs => {
                let pairs = graph.pair_list()?;
                for (idx, amp) in psi.iter_mut().enumerate() {
                    let mut a = Complex64::new(1.0, 0.0);
                    for (cs, li) in &pairs {
                        let ba = idx >> graph.site_index(*cs).unwrap() & 1;
                        let bb = idx >> graph.site_index(*li).unwrap() & 1;
                        // (|00> + i|01> + i|10> + |11>)/2 per dimer.
                        a *= if ba == bb {
                            Complex64::new(0.5, 0.0)
                        } else {
                            Complex64::new(0.0, 0.5)
                        };
                    }
                    *amp = a;
                }
            }
            _ => {
                let norm = (dim as f64).sqrt().recip();
                for (idx, amp) in psi.iter_mut().enumerate() {
                    let mut sign = norm;
                    for &(i, j) in graph.edges() {
                        if idx >> i & 1 == 1 && idx >> j & 1 == 1 {
                            sign = -sign;
                        }
                    }
                    *amp = Complex64::new(sign, 0.0);
                }
            }
        }
        Ok(psi)
    }

    /// Prepare the noisy state of a patch: ideal state, then the edge
    /// gate-error channels (exact two-term ZZ-flip form of the averaged
    /// random rotation), then per-site dephasing, depolarizing, loss and
    /// spontaneous emission, each by its exact operator-sum form.
    pub fn prepare(graph: &LatticeGraph, scenario: &NoiseScenario) -> Result<DensePatch> {
        let n = graph.site_count();
        if n > MAX_DENSE_QUBITS {
            return Err(Error::PatchTooLarge {
                n,
                max: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << n;
        let psi = Self::ideal_statevector(graph)?;
        let mut rho = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                rho[r * dim + c] = psi[r] * psi[c].conj();
            }
        }
        let mut patch = DensePatch {
            sites: graph.sites().to_vec(),
            n,
            dim,
            rho,
        };
        for e in 0..graph.edges().len() {
            let (a, b) = graph.edge_sites(e);
            let (i, j) = graph.edges()[e];
            patch.apply_zz_flip(
                i as usize,
                j as usize,
                flip_probability(scenario.gate_at(a, b)),
            );
        }
        for (k, site) in graph.sites().iter().enumerate() {
            patch.apply_phase_flip(k, flip_probability(scenario.dephase_at(*site)));
        }
        for (k, site) in graph.sites().iter().enumerate() {
            patch.apply_depolarizing(k, scenario.depol_at(*site));
        }
        for (k, site) in graph.sites().iter().enumerate() {
            patch.apply_reset(k, scenario.loss_at(*site));
        }
        for (k, site) in graph.sites().iter().enumerate() {
            patch.apply_reset(k, scenario.se_at(*site));
        }
        Ok(patch)
    }

    /// Phase-flip channel on one qubit: (1-q) rho + q Z rho Z.
    pub fn apply_phase_flip(&mut self, bit: usize, q: f64) {
        if q == 0.0 {
            return;
        }
        let f = 1.0 - 2.0 * q;
        for r in 0..self.dim {
            for c in 0..self.dim {
                if (r >> bit & 1) != (c >> bit & 1) {
                    self.rho[r * self.dim + c] *= f;
                }
            }
        }
    }

    /// ZZ-flip channel on an edge: (1-q) rho + q (ZZ) rho (ZZ).
    pub fn apply_zz_flip(&mut self, bit_i: usize, bit_j: usize, q: f64) {
        if q == 0.0 {
            return;
        }
        let f = 1.0 - 2.0 * q;
        for r in 0..self.dim {
            let zr = (r >> bit_i & 1) ^ (r >> bit_j & 1);
            for c in 0..self.dim {
                let zc = (c >> bit_i & 1) ^ (c >> bit_j & 1);
                if zr != zc {
                    self.rho[r * self.dim + c] *= f;
                }
            }
        }
    }

    /// Depolarizing channel: (1-p) rho + p/2 I_site (x) tr_site rho.
    pub fn apply_depolarizing(&mut self, bit: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let mask = 1usize << bit;
        let keep = 1.0 - p;
        for r0 in 0..self.dim {
            if r0 & mask != 0 {
                continue;
            }
            let r1 = r0 | mask;
            for c0 in 0..self.dim {
                if c0 & mask != 0 {
                    continue;
                }
                let c1 = c0 | mask;
                let d00 = self.at(r0, c0);
                let d11 = self.at(r1, c1);
                let t = (d00 + d11) * (p / 2.0);
                self.rho[r0 * self.dim + c0] = d00 * keep + t;
                self.rho[r1 * self.dim + c1] = d11 * keep + t;
                self.rho[r0 * self.dim + c1] *= keep;
                self.rho[r1 * self.dim + c0] *= keep;
            }
        }
    }

    /// Reset channel (loss / spontaneous emission):
    /// (1-p) rho + p |0><0|_site (x) tr_site rho.
    pub fn apply_reset(&mut self, bit: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let mask = 1usize << bit;
        let keep = 1.0 - p;
        for r0 in 0..self.dim {
            if r0 & mask != 0 {
                continue;
            }
            let r1 = r0 | mask;
            for c0 in 0..self.dim {
                if c0 & mask != 0 {
                    continue;
                }
                let c1 = c0 | mask;
                let d00 = self.at(r0, c0);
                let d11 = self.at(r1, c1);
                self.rho[r0 * self.dim + c0] = d00 * keep + (d00 + d11) * p;
                self.rho[r1 * self.dim + c1] = d11 * keep;
                self.rho[r0 * self.dim + c1] *= keep;
                self.rho[r1 * self.dim + c0] *= keep;
            }
        }
    }

    /// Conjugate by a single-qubit unitary: rho -> U rho U^dagger.
    pub fn apply_unitary(&mut self, bit: usize, u: [[Complex64; 2]; 2]) {
        let mask = 1usize << bit;
        // Left multiply.
        for r0 in 0..self.dim {
            if r0 & mask != 0 {
                continue;
            }
            let r1 = r0 | mask;
            for c in 0..self.dim {
                let a = self.at(r0, c);
                let b = self.at(r1, c);
                self.rho[r0 * self.dim + c] = u[0][0] * a + u[0][1] * b;
                self.rho[r1 * self.dim + c] = u[1][0] * a + u[1][1] * b;
            }
        }
        // Right multiply by U^dagger.
        for c0 in 0..self.dim {
            if c0 & mask != 0 {
                continue;
            }
            let c1 = c0 | mask;
            for r in 0..self.dim {
                let a = self.at(r, c0);
                let b = self.at(r, c1);
                self.rho[r * self.dim + c0] = a * u[0][0].conj() + b * u[0][1].conj();
                self.rho[r * self.dim + c1] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    /// Exact expectation tr(P rho) of a signed Pauli string.
    pub fn expectation_string(&self, p: &PauliString) -> Complex64 {
        let (xmask, letters) = self.compile_string(p);
        let base = phase_to_complex(p.phase());
        let mut acc = ZERO;
        for c in 0..self.dim {
            let mut phi = base;
            for &(bit, letter) in &letters {
                let set = c >> bit & 1 == 1;
                match letter {
                    PauliLetter::X => {}
                    PauliLetter::Y => {
                        phi *= Complex64::new(0.0, if set { -1.0 } else { 1.0 });
                    }
                    PauliLetter::Z => {
                        if set {
                            phi = -phi;
                        }
                    }
                }
            }
            acc += phi * self.at(c, c ^ xmask);
        }
        acc
    }

    fn compile_string(&self, p: &PauliString) -> (usize, Vec<(usize, PauliLetter)>) {
        let mut xmask = 0usize;
        let mut letters = Vec::with_capacity(p.weight());
        for (site, letter) in p.letters() {
            let bit = self.bit_of(site);
            if letter.anticommutes_with_z() {
                xmask |= 1 << bit;
            }
            letters.push((bit, letter));
        }
        (xmask, letters)
    }

    /// Real expectation of a weighted Pauli sum.
    pub fn expectation_sum(&self, sum: &WeightedPauliSum) -> f64 {
        let mut acc = ZERO;
        for (w, p) in &sum.terms {
            acc += self.expectation_string(p) * *w;
        }
        debug_assert!(acc.im.abs() < 1e-10, "imaginary expectation {acc}");
        acc.re
    }

    /// Real expectation of a region projector expansion.
    pub fn expectation_projector(&self, expansion: &ProjectorExpansion) -> f64 {
        self.expectation_sum(&WeightedPauliSum::from_projector(expansion))
    }

    /// Born-rule probabilities of the product-basis measurement of a
    /// setting, over all 2^n outcomes (basis index: bit k set means
    /// outcome -1 at site k).
    pub fn outcome_distribution(&self, setting: MeasurementSetting) -> Vec<f64> {
        let mut rotated = self.clone();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = [
            [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        ];
        // S H diagonalizes Y: (SH) Z (SH)^dagger = Y.
        let sh = [
            [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            [Complex64::new(0.0, s), Complex64::new(0.0, -s)],
        ];
        for (k, site) in self.sites.iter().enumerate() {
            match setting.basis(site.basis) {
                PauliLetter::X => rotated.apply_hermitian_basis(k, h),
                PauliLetter::Y => rotated.apply_hermitian_basis(k, sh),
                PauliLetter::Z => {}
            }
        }
        (0..self.dim).map(|r| rotated.at(r, r).re).collect()
    }

    /// rho -> U^dagger rho U (measurement basis change).
    fn apply_hermitian_basis(&mut self, bit: usize, u: [[Complex64; 2]; 2]) {
        let udag = [
            [u[0][0].conj(), u[1][0].conj()],
            [u[0][1].conj(), u[1][1].conj()],
        ];
        self.apply_unitary(bit, udag);
    }
}

fn phase_to_complex(phase: Phase) -> Complex64 {
    match phase.exponent() {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Apply a weighted Pauli sum to a state vector over the patch sites of
/// `graph` (canonical site order = bit order).
pub fn sum_matvec(graph: &LatticeGraph, sum: &WeightedPauliSum, v: &[Complex64]) -> Vec<Complex64> {
    let n = graph.site_count();
    let dim = 1usize << n;
    assert_eq!(v.len(), dim);
    let mut out = vec![ZERO; dim];
    for (w, p) in &sum.terms {
        let mut xmask = 0usize;
        let mut letters = Vec::with_capacity(p.weight());
        for (site, letter) in p.letters() {
            let bit = graph.site_index(site).expect("support inside patch");
            if letter.anticommutes_with_z() {
                xmask |= 1 << bit;
            }
            letters.push((bit, letter));
        }
        let base = phase_to_complex(p.phase()) * *w;
        for (c, &amp) in v.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            let mut phi = base;
            for &(bit, letter) in &letters {
                let set = c >> bit & 1 == 1;
                match letter {
                    PauliLetter::X => {}
                    PauliLetter::Y => {
                        // Y|0> = i|1>, Y|1> = -i|0>.
                        phi *= Complex64::new(0.0, if set { -1.0 } else { 1.0 });
                    }
                    PauliLetter::Z => {
                        if set {
                            phi = -phi;
                        }
                    }
                }
            }
            out[c ^ xmask] += phi * amp;
        }
    }
    out
}

/// Largest eigenvalue of (sum + shift I) by power iteration with a
/// deterministic pseudo-random start, returned as the Rayleigh quotient
/// after `iters` steps.
pub fn power_iteration_max(
    graph: &LatticeGraph,
    sum: &WeightedPauliSum,
    shift: f64,
    iters: usize,
    seed: u64,
) -> f64 {
    let n = graph.site_count();
    let dim = 1usize << n;
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut next = || {
        state = state.wrapping_mul(0xD129_8E93_5A6C_6D21).wrapping_add(1);
        let z = state ^ (state >> 29);
        (z >> 11) as f64 / 9_007_199_254_740_992.0 - 0.5
    };
    let mut v: Vec<Complex64> = (0..dim).map(|_| Complex64::new(next(), next())).collect();
    normalize(&mut v);
    let mut rayleigh = 0.0;
    for _ in 0..iters {
        let mut w = sum_matvec(graph, sum, &v);
        for (wk, vk) in w.iter_mut().zip(&v) {
            *wk += vk * shift;
        }
        rayleigh = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>();
        normalize(&mut w);
        v = w;
    }
    rayleigh
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{attenuated_expectation, exact_region_bound, GateErrorModel};
    use crate::graphstate::{expand_region_projector, generator, pair_generators};
    use crate::lattice::{
        build_lattice, custom_region, enumerate_regions, region_patch, RegionKind, Sublattice,
    };
    use crate::noise::{build_scenario, pauliize, FieldSpec, ScenarioConfig};

    fn uniform_scenario(graph: &LatticeGraph, channel: &str, value: f64) -> NoiseScenario {
        let mut c = ScenarioConfig::default();
        let f = FieldSpec::uniform(value);
        match channel {
            "dephasing" => c.dephasing = f,
            "gate_error" => c.gate_error = f,
            "loss" => c.loss = f,
            "spont_emission" => c.spont_emission = f,
            "depolarizing" => c.depolarizing = f,
            _ => unreachable!(),
        }
        build_scenario(graph, &c).unwrap()
    }

    #[test]
    fn ideal_1x1_is_pure_graph_state() {
        let g = build_lattice(LatticeKind::Honeycomb, 1, 1, &[]).unwrap();
        let patch = DensePatch::prepare(&g, &NoiseScenario::identity(&g)).unwrap();
        assert!((patch.trace().re - 1.0).abs() < 1e-12);
        assert!(patch.hermiticity_error() < 1e-12);
        let ga = generator(&g, SiteId::a(0, 0));
        assert!((patch.expectation_string(&ga).re - 1.0).abs() < 1e-12);
        // Global fidelity at desk scale: full-region projector is 1.
        let region = custom_region(&g, &[SiteId::a(0, 0), SiteId::b(0, 0)]).unwrap();
        for subl in [Sublattice::A, Sublattice::B] {
            let exp = expand_region_projector(&g, &region, subl);
            assert!((patch.expectation_projector(&exp) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_one_resets_to_zero_ket() {
        let g = build_lattice(LatticeKind::Honeycomb, 1, 1, &[]).unwrap();
        let mut scenario = NoiseScenario::identity(&g);
        scenario.loss_p.insert(SiteId::b(0, 0), 1.0);
        let patch = DensePatch::prepare(&g, &scenario).unwrap();
        assert!((patch.trace().re - 1.0).abs() < 1e-12);
        let xz = generator(&g, SiteId::a(0, 0));
        assert!(patch.expectation_string(&xz).norm() < 1e-12);
        let zb = PauliString::single(SiteId::b(0, 0), PauliLetter::Z);
        assert!((patch.expectation_string(&zb).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channels_preserve_trace_and_hermiticity() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, &[]).unwrap();
        let config = ScenarioConfig {
            dephasing: FieldSpec::uniform(0.4),
            gate_error: FieldSpec::uniform(0.25),
            loss: FieldSpec::uniform(0.15),
            spont_emission: FieldSpec::uniform(0.1),
            depolarizing: FieldSpec::uniform(0.2),
        };
        let s = build_scenario(&g, &config).unwrap();
        let patch = DensePatch::prepare(&g, &s).unwrap();
        assert!((patch.trace().re - 1.0).abs() < 1e-12);
        assert!(patch.trace().im.abs() < 1e-12);
        assert!(patch.hermiticity_error() < 1e-12);
    }

    #[test]
    fn density_matrix_stays_positive_semidefinite() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, &[SiteId::b(1, 1)]).unwrap();
        let config = ScenarioConfig {
            dephasing: FieldSpec::uniform(0.3),
            gate_error: FieldSpec::uniform(0.2),
            depolarizing: FieldSpec::uniform(0.1),
            ..Default::default()
        };
        let s = build_scenario(&g, &config).unwrap();
        let patch = DensePatch::prepare(&g, &s).unwrap();
        let dim = patch.dim;
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = patch.at(r, c);
            }
        }
        let eig = nalgebra::SymmetricEigen::new(m);
        let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        assert!(min >= -1e-10, "smallest eigenvalue {min}");
    }

    /// Averaged random-phase unitary channel computed by quadrature,
    /// compared against the two-term flip form.
    #[test]
    fn pauliized_channels_match_quadrature() {
        let g = build_lattice(LatticeKind::Honeycomb, 1, 1, &[]).unwrap();
        let eps = 0.37f64;
        // Dephasing on site A (bit 0).
        let base = DensePatch::prepare(&g, &NoiseScenario::identity(&g)).unwrap();
        let mut flipped = base.clone();
        flipped.apply_phase_flip(0, flip_probability(eps));
        let averaged = quadrature_average(&base, eps, |rho, theta| {
            let u = [
                [
                    Complex64::new(0.0, -theta).exp().into(),
                    ZERO,
                ],
                [ZERO, Complex64::new(0.0, theta).exp().into()],
            ];
            let mut r = rho.clone();
            r.apply_unitary(0, u);
            r
        });
        assert!(max_entry_diff(&flipped, &averaged) < 1e-12);
        // Gate error on the edge (bits 0, 1).
        let mut flipped = base.clone();
        flipped.apply_zz_flip(0, 1, flip_probability(eps));
        let averaged = quadrature_average(&base, eps, |rho, theta| {
            // exp(i theta ZZ) is diagonal: phase exp(i theta (-1)^(b0^b1)).
            let mut r = rho.clone();
            for row in 0..r.dim {
                let zr = if (row ^ (row >> 1)) & 1 == 0 { 1.0 } else { -1.0 };
                for col in 0..r.dim {
                    let zc = if (col ^ (col >> 1)) & 1 == 0 { 1.0 } else { -1.0 };
                    let phase = Complex64::new(0.0, theta * (zr - zc)).exp();
                    r.rho[row * r.dim + col] *= phase;
                }
            }
            r
        });
        assert!(max_entry_diff(&flipped, &averaged) < 1e-12);
    }

    fn quadrature_average(
        base: &DensePatch,
        eps: f64,
        apply: impl Fn(&DensePatch, f64) -> DensePatch,
    ) -> DensePatch {
        // Composite Simpson over theta in [-eps, eps].
        let steps = 2000usize;
        let h = 2.0 * eps / steps as f64;
        let mut acc = vec![ZERO; base.rho.len()];
        for k in 0..=steps {
            let theta = -eps + k as f64 * h;
            let w = if k == 0 || k == steps {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let r = apply(base, theta);
            for (a, b) in acc.iter_mut().zip(&r.rho) {
                *a += b * w;
            }
        }
        let norm = h / 3.0 / (2.0 * eps);
        let mut out = base.clone();
        for (o, a) in out.rho.iter_mut().zip(acc) {
            *o = a * norm;
        }
        out
    }

    fn max_entry_diff(a: &DensePatch, b: &DensePatch) -> f64 {
        a.rho
            .iter()
            .zip(&b.rho)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn oracle_matches_analytic_on_alpha_patch() {
        let g = build_lattice(LatticeKind::Honeycomb, 4, 4, &[]).unwrap();
        let alpha = enumerate_regions(&g, RegionKind::Alpha);
        let region = alpha
            .iter()
            .find(|r| r.sites.iter().all(|s| g.degree(*s) == 3))
            .unwrap();
        let patch_sites = region_patch(&g, region);
        let patch_graph = g.induced_subgraph(&patch_sites).unwrap();
        for channel in ["dephasing", "gate_error", "loss", "depolarizing"] {
            let scenario = uniform_scenario(&patch_graph, channel, 0.2);
            let desc = pauliize(&patch_graph, &scenario);
            let dense = DensePatch::prepare(&patch_graph, &scenario).unwrap();
            let exact = exact_region_bound(&patch_graph, &desc, region, GateErrorModel::SincAverage);
            let pa = dense.expectation_projector(&expand_region_projector(
                &patch_graph,
                region,
                Sublattice::A,
            ));
            let pb = dense.expectation_projector(&expand_region_projector(
                &patch_graph,
                region,
                Sublattice::B,
            ));
            assert!(
                (pa - exact.p_a).abs() < 1e-11 && (pb - exact.p_b).abs() < 1e-11,
                "{channel}: dense ({pa}, {pb}) vs analytic ({}, {})",
                exact.p_a,
                exact.p_b
            );
        }
    }

    #[test]
    fn pairs_state_and_noise() {
        let g = build_lattice(LatticeKind::Pairs, 2, 1, &[]).unwrap();
        let ident = NoiseScenario::identity(&g);
        let patch = DensePatch::prepare(&g, &ident).unwrap();
        for pg in pair_generators(&g).unwrap() {
            for op in [pg.xx.clone(), pg.yz.clone(), pg.zy()] {
                assert!((patch.expectation_string(&op).re - 1.0).abs() < 1e-12);
            }
        }
        // Depolarizing on one member matches the analytic attenuation.
        let pairs = pair_generators(&g).unwrap();
        let mut scenario = ident.clone();
        scenario.depol_p.insert(pairs[0].cs, 0.3);
        let desc = pauliize(&g, &scenario);
        let patch = DensePatch::prepare(&g, &scenario).unwrap();
        for op in [pairs[0].xx.clone(), pairs[0].yz.clone(), pairs[0].zy()] {
            let dense = patch.expectation_string(&op).re;
            let analytic = attenuated_expectation(&g, &desc, &op, GateErrorModel::SincAverage);
            assert!((dense - analytic).abs() < 1e-12, "{op}");
        }
    }

    #[test]
    fn outcome_distribution_cases() {
        let g = build_lattice(LatticeKind::Honeycomb, 1, 1, &[]).unwrap();
        let patch = DensePatch::prepare(&g, &NoiseScenario::identity(&g)).unwrap();
        let dist = patch.outcome_distribution(MeasurementSetting::SA);
        // Outcomes with x_A = z_B each carry probability 1/2: indices
        // 00 (+,+) and 11 (-,-).
        assert!((dist[0] - 0.5).abs() < 1e-12);
        assert!((dist[3] - 0.5).abs() < 1e-12);
        assert!(dist[1].abs() < 1e-12 && dist[2].abs() < 1e-12);
        // Hole at B: z_B = +1 always, x_A uniform.
        let mut scenario = NoiseScenario::identity(&g);
        scenario.loss_p.insert(SiteId::b(0, 0), 1.0);
        let patch = DensePatch::prepare(&g, &scenario).unwrap();
        let dist = patch.outcome_distribution(MeasurementSetting::SA);
        assert!((dist[0] - 0.5).abs() < 1e-12);
        assert!((dist[1] - 0.5).abs() < 1e-12);
        assert!(dist[2].abs() < 1e-12 && dist[3].abs() < 1e-12);
        // Pair YZ setting: products of outcomes are +1.
        let gp = build_lattice(LatticeKind::Pairs, 1, 1, &[]).unwrap();
        let patch = DensePatch::prepare(&gp, &NoiseScenario::identity(&gp)).unwrap();
        let dist = patch.outcome_distribution(MeasurementSetting::PairYZ);
        assert!((dist[0] - 0.5).abs() < 1e-12);
        assert!((dist[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn patch_size_cap() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[]).unwrap(); // 18 sites
        assert!(matches!(
            DensePatch::prepare(&g, &NoiseScenario::identity(&g)),
            Err(Error::PatchTooLarge { .. })
        ));
    }

    #[test]
    fn power_iteration_finds_projector_top() {
        // P = 1/2 (1 + g) has eigenvalues {0, 1}: top of (P + I) is 2.
        let g = build_lattice(LatticeKind::Honeycomb, 1, 1, &[]).unwrap();
        let region = custom_region(&g, &[SiteId::a(0, 0), SiteId::b(0, 0)]).unwrap();
        let exp = expand_region_projector(&g, &region, Sublattice::A);
        let sum = WeightedPauliSum::from_projector(&exp);
        let top = power_iteration_max(&g, &sum, 1.0, 200, 7);
        assert!((top - 2.0).abs() < 1e-10, "{top}");
    }
}
