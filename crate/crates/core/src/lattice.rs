//! Part-space bitmasks and the free lattice they generate.
//!
//! A frame of `n` atoms t1..tn splits its Venn diagram into `2^n - 1`
//! elementary parts, one per non-empty subset of atoms. A lattice element is
//! the set of parts it covers, stored as one bit per part, so intersection
//! and union are bitwise AND and OR. The free lattice is the closure of the
//! atoms under both operations; its elements are exactly the upward-closed
//! part sets, and each one has a unique minimal disjunctive normal form that
//! serves as its canonical expression.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{self, Expr};

/// Largest supported frame. The element count grows like the Dedekind
/// numbers (2, 5, 19, 167, 7580, 7828353), so anything past six atoms is
/// out of reach for an in-memory enumeration.
pub const MAX_FRAME: u8 = 6;

/// Number of free-lattice elements for each supported frame size.
pub const ELEMENT_COUNTS: [usize; MAX_FRAME as usize] = [2, 5, 19, 167, 7580, 7_828_353];

/// A set of atom indices, packed as a bitmask (bit `i-1` is atom `ti`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ThetaSet(u32);

impl ThetaSet {
    pub const EMPTY: ThetaSet = ThetaSet(0);

    pub fn singleton(i: u8) -> Self {
        debug_assert!(i >= 1);
        ThetaSet(1 << (i - 1))
    }

    pub fn from_bits(bits: u32) -> Self {
        ThetaSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn union(self, other: ThetaSet) -> ThetaSet {
        ThetaSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ThetaSet) -> ThetaSet {
        ThetaSet(self.0 & other.0)
    }

    pub fn contains(self, i: u8) -> bool {
        i >= 1 && self.0 & (1 << (i - 1)) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    /// Atom indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = u8> {
        let bits = self.0;
        (1..=32u8).filter(move |i| bits & (1 << (i - 1)) != 0)
    }
}

impl fmt::Display for ThetaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// A set of Venn parts for a frame of `n` atoms.
///
/// Part `s` (a non-empty `ThetaSet` over the frame, encoded by its bits)
/// occupies bit `s - 1`, so the mask is `2^n - 1` bits wide. The atom `ti`
/// covers every part whose subset contains `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartMask {
    n: u8,
    bits: u64,
}

impl PartMask {
    fn width(n: u8) -> u32 {
        (1u32 << n) - 1
    }

    pub fn empty(n: u8) -> Self {
        PartMask { n, bits: 0 }
    }

    /// All `2^n - 1` parts: the total ignorance t1 v .. v tn.
    pub fn full(n: u8) -> Self {
        PartMask {
            n,
            bits: if n == 0 {
                0
            } else {
                (1u64 << Self::width(n)) - 1
            },
        }
    }

    /// The parts covered by atom `ti`: every subset containing `i`.
    pub fn theta(n: u8, i: u8) -> Self {
        debug_assert!(i >= 1 && i <= n);
        let mut bits = 0u64;
        for s in 1..=Self::width(n) {
            if s & (1 << (i - 1)) != 0 {
                bits |= 1 << (s - 1);
            }
        }
        PartMask { n, bits }
    }

    pub fn from_bits(n: u8, bits: u64) -> Self {
        debug_assert_eq!(bits >> Self::width(n), 0, "bits outside the part space");
        PartMask { n, bits }
    }

    pub fn n(self) -> u8 {
        self.n
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn and(self, other: PartMask) -> PartMask {
        assert_eq!(self.n, other.n, "part masks from different frames");
        PartMask {
            n: self.n,
            bits: self.bits & other.bits,
        }
    }

    pub fn or(self, other: PartMask) -> PartMask {
        assert_eq!(self.n, other.n, "part masks from different frames");
        PartMask {
            n: self.n,
            bits: self.bits | other.bits,
        }
    }

    /// Parts of `self` not in `other`.
    pub fn minus(self, other: PartMask) -> PartMask {
        assert_eq!(self.n, other.n, "part masks from different frames");
        PartMask {
            n: self.n,
            bits: self.bits & !other.bits,
        }
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn is_subset_of(self, other: PartMask) -> bool {
        assert_eq!(self.n, other.n, "part masks from different frames");
        self.bits & !other.bits == 0
    }

    /// Number of parts covered; in the free model this is the cardinality.
    pub fn count(self) -> u32 {
        self.bits.count_ones()
    }

    /// Parts in ascending subset encoding.
    pub fn parts(self) -> impl Iterator<Item = ThetaSet> {
        let bits = self.bits;
        let w = Self::width(self.n);
        (1..=w).filter_map(move |s| {
            if bits & (1 << (s - 1)) != 0 {
                Some(ThetaSet::from_bits(s))
            } else {
                None
            }
        })
    }

    /// Minimal parts under subset order. For an upward-closed mask these
    /// are the terms of the canonical disjunctive form.
    fn minimal_parts(self) -> Vec<ThetaSet> {
        let mut out = Vec::new();
        let w = Self::width(self.n);
        's: for s in 1..=w {
            if self.bits & (1 << (s - 1)) == 0 {
                continue;
            }
            // walk the proper non-empty subsets of s
            let mut sub = (s - 1) & s;
            while sub != 0 {
                if self.bits & (1 << (sub - 1)) != 0 {
                    continue 's;
                }
                sub = (sub - 1) & s;
            }
            out.push(ThetaSet::from_bits(s));
        }
        out
    }

    /// True when every superset of a covered part is also covered. Holds
    /// for every element of the free lattice.
    pub fn is_upward_closed(self) -> bool {
        let w = Self::width(self.n);
        for s in 1..=w {
            if self.bits & (1 << (s - 1)) == 0 {
                continue;
            }
            for t in (s + 1)..=w {
                if t & s == s && self.bits & (1 << (t - 1)) == 0 {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for PartMask {
    /// Parts listed by their atom subsets: `{<1>,<12>}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.parts().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "<")?;
            for i in p.iter() {
                write!(f, "{i}")?;
            }
            write!(f, ">")?;
        }
        write!(f, "}}")
    }
}

/// One element of a free lattice: its enumeration index and part mask.
///
/// Two elements are equal exactly when their part masks are equal; the
/// index is derived from the mask by the deterministic enumeration order.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    index: u32,
    parts: PartMask,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Eq for Element {}

impl std::hash::Hash for Element {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.parts.hash(state);
    }
}

impl Element {
    pub fn index(&self) -> usize {
        self.index as usize
    }

    pub fn parts(&self) -> PartMask {
        self.parts
    }

    pub fn is_empty_set(&self) -> bool {
        self.parts.is_empty()
    }

    /// Terms of the canonical disjunctive form: the minimal antichain of
    /// parts, each read as an intersection of atoms. Ordered widest
    /// intersection first, then by subset encoding.
    pub fn terms(&self) -> Vec<ThetaSet> {
        let mut t = self.parts.minimal_parts();
        t.sort_by_key(|s| (std::cmp::Reverse(s.len()), s.bits()));
        t
    }

    /// Atoms appearing in the canonical form.
    pub fn labels(&self) -> ThetaSet {
        self.terms()
            .into_iter()
            .fold(ThetaSet::EMPTY, ThetaSet::union)
    }

    /// Canonical expression: a join of intersection terms.
    pub fn expr(&self) -> Expr {
        let terms = self.terms();
        if terms.is_empty() {
            return Expr::Empty;
        }
        let mut joined: Vec<Expr> = Vec::with_capacity(terms.len());
        for t in terms {
            let atoms: Vec<Expr> = t.iter().map(Expr::Theta).collect();
            joined.push(if atoms.len() == 1 {
                atoms.into_iter().next().unwrap()
            } else {
                Expr::Meet(atoms)
            });
        }
        if joined.len() == 1 {
            joined.into_iter().next().unwrap()
        } else {
            Expr::Join(joined)
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr().fmt(f)
    }
}

/// The free lattice over `n` atoms: every element reachable from the atoms
/// and the empty set by intersections and unions.
///
/// Elements are enumerated by part count, then by part-mask bits, so
/// indices and iteration order are stable across runs.
pub struct FreeLattice {
    n: u8,
    elements: Vec<Element>,
    lookup: HashMap<u64, u32>,
}

impl FreeLattice {
    /// Generates the whole lattice. Every element is a union of the
    /// `2^n - 1` principal intersections (one per non-empty atom subset),
    /// so the closure seeds those and saturates under union with them;
    /// this reaches the same fixpoint as closing all pairs under AND/OR
    /// while staying linear in the output size.
    pub fn generate(n: u8) -> Result<FreeLattice> {
        if n == 0 || n > MAX_FRAME {
            return Err(Error::FrameSize(n as usize));
        }
        let width = PartMask::width(n);
        let thetas: Vec<u64> = (1..=n).map(|i| PartMask::theta(n, i).bits()).collect();
        let mut principals: Vec<u64> = Vec::with_capacity(width as usize);
        for s in 1..=width {
            let mut m = PartMask::full(n).bits();
            for i in 1..=n {
                if s & (1 << (i - 1)) != 0 {
                    m &= thetas[(i - 1) as usize];
                }
            }
            principals.push(m);
        }

        let mut seen: HashMap<u64, ()> = HashMap::new();
        let mut stack: Vec<u64> = Vec::new();
        for &p in &principals {
            if seen.insert(p, ()).is_none() {
                stack.push(p);
            }
        }
        while let Some(u) = stack.pop() {
            for &p in &principals {
                let v = u | p;
                if v != u && seen.insert(v, ()).is_none() {
                    stack.push(v);
                }
            }
        }

        let mut masks: Vec<u64> = seen.into_keys().collect();
        masks.push(0);
        masks.sort_by_key(|m| (m.count_ones(), *m));

        let mut elements = Vec::with_capacity(masks.len());
        let mut lookup = HashMap::with_capacity(masks.len());
        for (index, bits) in masks.into_iter().enumerate() {
            let index = index as u32;
            elements.push(Element {
                index,
                parts: PartMask::from_bits(n, bits),
            });
            lookup.insert(bits, index);
        }
        Ok(FreeLattice {
            n,
            elements,
            lookup,
        })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> Element {
        self.elements[index]
    }

    /// The empty set, always index 0.
    pub fn empty_set(&self) -> Element {
        self.elements[0]
    }

    /// The total ignorance t1 v .. v tn, always the last element.
    pub fn total_ignorance(&self) -> Element {
        *self.elements.last().unwrap()
    }

    pub fn theta(&self, i: u8) -> Result<Element> {
        if i == 0 || i > self.n {
            return Err(Error::ThetaOutOfRange {
                index: i,
                n: self.n,
            });
        }
        Ok(self.by_mask(PartMask::theta(self.n, i)).unwrap())
    }

    pub fn by_mask(&self, mask: PartMask) -> Option<Element> {
        assert_eq!(mask.n(), self.n, "mask from a different frame");
        self.lookup
            .get(&mask.bits())
            .map(|&i| self.elements[i as usize])
    }

    /// The element whose parts are the union of the given atoms.
    pub fn union_of_atoms(&self, atoms: ThetaSet) -> Element {
        let mut m = PartMask::empty(self.n);
        for i in atoms.iter() {
            assert!(i <= self.n, "atom t{i} outside the frame");
            m = m.or(PartMask::theta(self.n, i));
        }
        self.by_mask(m)
            .expect("unions of atoms are lattice elements")
    }

    pub fn meet(&self, a: Element, b: Element) -> Element {
        self.by_mask(a.parts.and(b.parts))
            .expect("the lattice is closed under intersection")
    }

    pub fn join(&self, a: Element, b: Element) -> Element {
        self.by_mask(a.parts.or(b.parts))
            .expect("the lattice is closed under union")
    }

    /// Parses an expression and resolves it to its lattice element.
    pub fn parse(&self, input: &str) -> Result<Element> {
        let e = expr::parse(input)?;
        self.resolve(&e)
    }

    pub fn resolve(&self, e: &Expr) -> Result<Element> {
        let mask = e.eval(self.n)?;
        Ok(self
            .by_mask(mask)
            .expect("every expression evaluates to a lattice element"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_counts_follow_the_dedekind_sequence() {
        for (n, &want) in ELEMENT_COUNTS.iter().enumerate().take(4) {
            let n = (n + 1) as u8;
            let lat = FreeLattice::generate(n).unwrap();
            assert_eq!(lat.len(), want, "element count for n={n}");
        }
    }

    #[test]
    fn five_atom_lattice_has_7580_elements() {
        assert_eq!(FreeLattice::generate(5).unwrap().len(), 7580);
    }

    #[test]
    #[ignore = "builds ~7.8M elements; run with --ignored --release"]
    fn six_atom_lattice_has_7828353_elements() {
        assert_eq!(FreeLattice::generate(6).unwrap().len(), 7_828_353);
    }

    #[test]
    fn frame_size_is_capped() {
        assert!(matches!(FreeLattice::generate(0), Err(Error::FrameSize(0))));
        assert!(matches!(FreeLattice::generate(7), Err(Error::FrameSize(7))));
    }

    #[test]
    fn single_atom_frame_is_empty_set_plus_atom() {
        let lat = FreeLattice::generate(1).unwrap();
        assert_eq!(lat.len(), 2);
        assert_eq!(lat.element(0).to_string(), "empty");
        assert_eq!(lat.element(1).to_string(), "t1");
        assert_eq!(lat.total_ignorance(), lat.theta(1).unwrap());
    }

    #[test]
    fn two_atom_enumeration_order() {
        let lat = FreeLattice::generate(2).unwrap();
        let order: Vec<String> = lat.elements().iter().map(|e| e.to_string()).collect();
        assert_eq!(order, ["empty", "t1^t2", "t1", "t2", "t1vt2"]);
    }

    #[test]
    fn meet_of_atoms_covers_their_shared_parts() {
        let lat = FreeLattice::generate(3).unwrap();
        let m = lat.meet(lat.theta(1).unwrap(), lat.theta(2).unwrap());
        // t1^t2 covers exactly the parts <12> and <123>
        assert_eq!(m.parts().to_string(), "{<12>,<123>}");
        assert_eq!(m.parts().count(), 2);
    }

    #[test]
    fn closure_is_exhaustive_for_small_frames() {
        for n in 1..=3u8 {
            let lat = FreeLattice::generate(n).unwrap();
            for a in lat.elements() {
                for b in lat.elements() {
                    assert!(lat.by_mask(a.parts().and(b.parts())).is_some());
                    assert!(lat.by_mask(a.parts().or(b.parts())).is_some());
                }
            }
        }
    }

    #[test]
    fn meet_distributes_over_join_exhaustively() {
        let lat = FreeLattice::generate(3).unwrap();
        for a in lat.elements() {
            for b in lat.elements() {
                for c in lat.elements() {
                    let left = lat.meet(*a, lat.join(*b, *c));
                    let right = lat.join(lat.meet(*a, *b), lat.meet(*a, *c));
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn every_element_is_upward_closed() {
        let lat = FreeLattice::generate(4).unwrap();
        for e in lat.elements() {
            assert!(e.parts().is_upward_closed(), "{e}");
        }
    }

    #[test]
    fn canonical_terms_are_a_minimal_antichain() {
        let lat = FreeLattice::generate(3).unwrap();
        let e = lat.parse("(t1^t2)vt3").unwrap();
        let terms = e.terms();
        assert_eq!(terms.len(), 2);
        assert_eq!(e.labels().to_string(), "{1,2,3}");
        assert_eq!(e.to_string(), "(t1^t2)vt3");
    }

    #[test]
    fn absorption_shrinks_redundant_joins() {
        let lat = FreeLattice::generate(3).unwrap();
        // t1 absorbs t1^t2
        assert_eq!(lat.parse("(t1^t2)vt1").unwrap(), lat.parse("t1").unwrap());
        assert_eq!(lat.parse("(t1^t2)vt1").unwrap().to_string(), "t1");
    }

    #[test]
    fn canonical_expression_round_trips_for_whole_frames() {
        for n in 1..=4u8 {
            let lat = FreeLattice::generate(n).unwrap();
            for e in lat.elements() {
                let s = e.to_string();
                let back = lat.parse(&s).unwrap();
                assert_eq!(*e, back, "round trip of {s}");
            }
        }
    }

    #[test]
    fn cardinality_is_additive_over_meets_and_joins() {
        let lat = FreeLattice::generate(3).unwrap();
        for a in lat.elements() {
            for b in lat.elements() {
                let cup = lat.join(*a, *b).parts().count();
                let cap = lat.meet(*a, *b).parts().count();
                assert_eq!(cup + cap, a.parts().count() + b.parts().count());
            }
        }
    }

    #[test]
    fn empty_set_has_no_terms_and_no_labels() {
        let lat = FreeLattice::generate(2).unwrap();
        let empty = lat.empty_set();
        assert!(empty.terms().is_empty());
        assert!(empty.labels().is_empty());
        assert_eq!(empty.to_string(), "empty");
    }
}
