//! Signed multi-site Pauli operators with exact phase arithmetic.
//!
//! Phases live in the group {+1, +i, -1, -i}, stored as the exponent of i.
//! No floating point enters a product, so stabilizer-group membership tests
//! are bit-exact.

use crate::lattice::SiteId;
use std::collections::BTreeMap;
use std::fmt;

/// Single-site Pauli letter. Identity is represented by absence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliLetter {
    X,
    Y,
    Z,
}

impl PauliLetter {
    /// True for letters that anticommute with Z (X and Y).
    pub fn anticommutes_with_z(self) -> bool {
        matches!(self, PauliLetter::X | PauliLetter::Y)
    }
}

impl fmt::Display for PauliLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PauliLetter::X => write!(f, "X"),
            PauliLetter::Y => write!(f, "Y"),
            PauliLetter::Z => write!(f, "Z"),
        }
    }
}

/// Element of {1, i, -1, -i} as the exponent k in i^k.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u8) -> Phase {
        Phase(k & 3)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn times(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) & 3)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) & 3)
    }

    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    /// +1 or -1 when the phase is real, None for +-i.
    pub fn real_sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => write!(f, "+"),
            1 => write!(f, "+i"),
            2 => write!(f, "-"),
            _ => write!(f, "-i"),
        }
    }
}

/// Product of two single-site letters: phase times the resulting letter
/// (None = identity). Cyclic products pick up +i, anticyclic -i:
/// X*Y = iZ, Y*X = -iZ, X*Z = -iY, and so on.
fn letter_product(a: PauliLetter, b: PauliLetter) -> (Phase, Option<PauliLetter>) {
    use PauliLetter::*;
    match (a, b) {
        (X, X) | (Y, Y) | (Z, Z) => (Phase::ONE, None),
        (X, Y) => (Phase::I, Some(Z)),
        (Y, X) => (Phase::MINUS_I, Some(Z)),
        (Y, Z) => (Phase::I, Some(X)),
        (Z, Y) => (Phase::MINUS_I, Some(X)),
        (Z, X) => (Phase::I, Some(Y)),
        (X, Z) => (Phase::MINUS_I, Some(Y)),
    }
}

/// Signed Pauli string: phase * product of letters over sites.
///
/// Letters are kept sorted by site so iteration order (and therefore any
/// derived expansion) is deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    phase: Phase,
    letters: BTreeMap<SiteId, PauliLetter>,
}

impl PauliString {
    pub fn identity() -> PauliString {
        PauliString {
            phase: Phase::ONE,
            letters: BTreeMap::new(),
        }
    }

    pub fn single(site: SiteId, letter: PauliLetter) -> PauliString {
        let mut letters = BTreeMap::new();
        letters.insert(site, letter);
        PauliString {
            phase: Phase::ONE,
            letters,
        }
    }

    pub fn from_letters<I>(iter: I) -> PauliString
    where
        I: IntoIterator<Item = (SiteId, PauliLetter)>,
    {
        let mut s = PauliString::identity();
        for (site, letter) in iter {
            s.mul_letter(site, letter);
        }
        s
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn times_phase(mut self, phase: Phase) -> PauliString {
        self.phase = self.phase.times(phase);
        self
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    pub fn letter_at(&self, site: SiteId) -> Option<PauliLetter> {
        self.letters.get(&site).copied()
    }

    pub fn letters(&self) -> impl Iterator<Item = (SiteId, PauliLetter)> + '_ {
        self.letters.iter().map(|(s, l)| (*s, *l))
    }

    /// Sites carrying X or Y (the letters that anticommute with Z).
    pub fn xy_support(&self) -> impl Iterator<Item = SiteId> + '_ {
        self.letters
            .iter()
            .filter(|(_, l)| l.anticommutes_with_z())
            .map(|(s, _)| *s)
    }

    /// Multiply a single letter onto this string from the right,
    /// tracking the phase exactly.
    pub fn mul_letter(&mut self, site: SiteId, letter: PauliLetter) {
        match self.letters.get(&site).copied() {
            None => {
                self.letters.insert(site, letter);
            }
            Some(existing) => {
                let (phase, product) = letter_product(existing, letter);
                self.phase = self.phase.times(phase);
                match product {
                    None => {
                        self.letters.remove(&site);
                    }
                    Some(l) => {
                        self.letters.insert(site, l);
                    }
                }
            }
        }
    }

    /// Exact product self * rhs.
    pub fn times(&self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.phase = out.phase.times(rhs.phase);
        for (site, letter) in rhs.letters() {
            out.mul_letter(site, letter);
        }
        out
    }

    /// Same letters at the same sites, ignoring phase.
    pub fn same_letters(&self, rhs: &PauliString) -> bool {
        self.letters == rhs.letters
    }

    /// Relative sign against `rhs` when the letters coincide:
    /// +1, -1, or None when letters differ or the relative phase is
    /// imaginary.
    pub fn relative_sign(&self, rhs: &PauliString) -> Option<i8> {
        if !self.same_letters(rhs) {
            return None;
        }
        self.phase.times(rhs.phase.conj()).real_sign()
    }

    /// Drop the letter at `site` (used for reset-branch expansions).
    pub fn without_site(&self, site: SiteId) -> PauliString {
        let mut out = self.clone();
        out.letters.remove(&site);
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        if self.letters.is_empty() {
            return write!(f, "I");
        }
        for (site, letter) in self.letters() {
            write!(f, " {letter}[{site}]")?;
        }
        Ok(())
    }
}
