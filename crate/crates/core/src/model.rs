//! Integrity constraints over a frame.
//!
//! A model declares some lattice elements empty. Constraining an element
//! suppresses all of its Venn parts, which automatically empties every
//! subset of a constrained element and every intersection that only
//! overlaps it inside suppressed parts. What is left of an element after
//! suppression is its residual; two elements with equal residuals are the
//! same element under the model, and the distinct non-empty residuals form
//! the restricted lattice.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::lattice::{Element, FreeLattice, PartMask, ThetaSet};

/// How the constraint set relates the atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// No constraints at all.
    Free,
    /// Every pairwise atom intersection is empty; the lattice collapses to
    /// the classical power set of the frame.
    Shafer,
    /// Anything in between.
    Hybrid,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Free => "free",
            ModelKind::Shafer => "shafer",
            ModelKind::Hybrid => "hybrid",
        })
    }
}

/// Structural shape of a single constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// A single intersection of two or more atoms.
    Exclusivity,
    /// A union of atoms (possibly just one): those atoms cannot occur.
    NonExistential,
    /// Mixed forms.
    Mixed,
}

/// Classifies a constraint by its canonical form. Informational only; the
/// suppression machinery treats all kinds alike.
pub fn classify_constraint(e: Element) -> ConstraintKind {
    let terms = e.terms();
    if terms.iter().all(|t| t.len() == 1) {
        ConstraintKind::NonExistential
    } else if terms.len() == 1 {
        ConstraintKind::Exclusivity
    } else {
        ConstraintKind::Mixed
    }
}

/// Serialized form of a model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: u8,
    #[serde(default)]
    pub constraints: Vec<String>,
}

/// Declarative description of a built model.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub n: u8,
    /// Constraint expressions as given by the caller.
    pub constraints: Vec<String>,
    pub kind: ModelKind,
}

/// One element of the restricted lattice: an equivalence class of free
/// elements sharing a residual. The representative is the member with the
/// lowest free index.
#[derive(Debug, Clone, Copy)]
pub struct Survivor {
    pub index: u32,
    pub representative: Element,
    pub residual: PartMask,
}

impl Survivor {
    /// Cardinality under the model: the number of residual parts.
    pub fn cardinality(&self) -> u32 {
        self.residual.count()
    }
}

/// A frame together with its constraints and the restricted lattice they
/// induce.
pub struct Model {
    lattice: FreeLattice,
    spec: ModelSpec,
    constraint_elements: Vec<Element>,
    suppressed: PartMask,
    alive: PartMask,
    survivors: Vec<Survivor>,
    /// free element index -> survivor index, None when empty under the model
    class_of: Vec<Option<u32>>,
    residual_lookup: std::collections::HashMap<u64, u32>,
    empty_members: Vec<Element>,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("n", &self.spec.n)
            .field("kind", &self.spec.kind)
            .field("constraints", &self.spec.constraints)
            .field("classes", &self.survivors.len())
            .finish()
    }
}

impl Model {
    /// Builds a model from constraint expressions. Fails when a constraint
    /// is the empty set, when one names an atom outside the frame, or when
    /// the constraints suppress every part (nothing can occur at all).
    pub fn build<S: AsRef<str>>(n: u8, constraints: &[S]) -> Result<Model> {
        let lattice = FreeLattice::generate(n)?;
        let mut constraint_elements = Vec::with_capacity(constraints.len());
        let mut suppressed = PartMask::empty(n);
        for c in constraints {
            let e = lattice.parse(c.as_ref())?;
            if e.is_empty_set() {
                return Err(Error::EmptyConstraint);
            }
            suppressed = suppressed.or(e.parts());
            constraint_elements.push(e);
        }
        let alive = PartMask::full(n).minus(suppressed);
        if alive.is_empty() {
            return Err(Error::DegenerateModel);
        }

        let kind = derive_kind(n, suppressed);

        // scan free elements in index order so each class keeps its
        // lowest-index member as representative
        let mut class_members: std::collections::HashMap<u64, Element> =
            std::collections::HashMap::new();
        let mut empty_members = Vec::new();
        for e in lattice.elements() {
            let residual = e.parts().minus(suppressed);
            if residual.is_empty() {
                if !e.is_empty_set() {
                    empty_members.push(*e);
                }
            } else {
                class_members.entry(residual.bits()).or_insert(*e);
            }
        }
        let mut survivors: Vec<Survivor> = class_members
            .into_iter()
            .map(|(bits, representative)| Survivor {
                index: 0,
                representative,
                residual: PartMask::from_bits(n, bits),
            })
            .collect();
        survivors.sort_by_key(|s| (s.residual.count(), s.residual.bits()));
        let mut residual_lookup = std::collections::HashMap::with_capacity(survivors.len());
        for (i, s) in survivors.iter_mut().enumerate() {
            s.index = i as u32;
            residual_lookup.insert(s.residual.bits(), i as u32);
        }
        let class_of: Vec<Option<u32>> = lattice
            .elements()
            .iter()
            .map(|e| {
                let residual = e.parts().minus(suppressed);
                residual_lookup.get(&residual.bits()).copied()
            })
            .collect();

        let spec = ModelSpec {
            n,
            constraints: constraints.iter().map(|s| s.as_ref().to_owned()).collect(),
            kind,
        };
        Ok(Model {
            lattice,
            spec,
            constraint_elements,
            suppressed,
            alive,
            survivors,
            class_of,
            residual_lookup,
            empty_members,
        })
    }

    /// The unconstrained model.
    pub fn free(n: u8) -> Result<Model> {
        Model::build::<&str>(n, &[])
    }

    /// The model with every pairwise atom intersection constrained empty.
    pub fn shafer(n: u8) -> Result<Model> {
        let mut constraints = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                constraints.push(format!("t{i}^t{j}"));
            }
        }
        Model::build(n, &constraints)
    }

    pub fn from_file_spec(file: &ModelFile) -> Result<Model> {
        Model::build(file.n, &file.constraints)
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile = serde_json::from_str(&text)?;
        Model::from_file_spec(&file)
    }

    pub fn to_file_spec(&self) -> ModelFile {
        ModelFile {
            n: self.spec.n,
            constraints: self.spec.constraints.clone(),
        }
    }

    pub fn n(&self) -> u8 {
        self.spec.n
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn lattice(&self) -> &FreeLattice {
        &self.lattice
    }

    pub fn constraint_elements(&self) -> &[Element] {
        &self.constraint_elements
    }

    pub fn suppressed(&self) -> PartMask {
        self.suppressed
    }

    /// Parts still available under the model.
    pub fn alive(&self) -> PartMask {
        self.alive
    }

    /// Dimension of the constrained Venn diagram: `2^n - 1` minus the
    /// suppressed parts.
    pub fn venn_dimension(&self) -> u32 {
        self.alive.count()
    }

    /// The distinct non-empty elements of the restricted lattice, ordered
    /// by cardinality then residual bits.
    pub fn survivors(&self) -> &[Survivor] {
        &self.survivors
    }

    pub fn survivor(&self, index: u32) -> &Survivor {
        &self.survivors[index as usize]
    }

    /// Free elements (other than the empty set itself) forced empty.
    pub fn empty_members(&self) -> &[Element] {
        &self.empty_members
    }

    pub fn residual(&self, e: Element) -> PartMask {
        e.parts().minus(self.suppressed)
    }

    /// Cardinality under the model: residual parts left after suppression.
    pub fn cardinality(&self, e: Element) -> u32 {
        self.residual(e).count()
    }

    pub fn is_empty_under(&self, e: Element) -> bool {
        self.residual(e).is_empty()
    }

    /// Survivor index of the class `e` belongs to, None when `e` is empty
    /// under the model.
    pub fn class_of(&self, e: Element) -> Option<u32> {
        self.class_of[e.index()]
    }

    pub(crate) fn class_of_residual_bits(&self, bits: u64) -> Option<u32> {
        self.residual_lookup.get(&bits).copied()
    }

    /// Lowest-indexed free element equal to `e` under the model.
    pub fn representative(&self, e: Element) -> Option<Element> {
        self.class_of(e)
            .map(|i| self.survivors[i as usize].representative)
    }

    /// The class of the total ignorance; always the last survivor.
    pub fn total_ignorance_class(&self) -> &Survivor {
        self.survivors.last().unwrap()
    }

    pub fn parse(&self, input: &str) -> Result<Element> {
        self.lattice.parse(input)
    }

    pub fn resolve(&self, e: &Expr) -> Result<Element> {
        self.lattice.resolve(e)
    }

    /// The element covering the parts of the given atoms.
    pub fn union_of_atoms(&self, atoms: ThetaSet) -> Element {
        self.lattice.union_of_atoms(atoms)
    }

    /// Two models agree when they constrain the same frame the same way;
    /// sources combined together must satisfy this.
    pub fn same_restriction(&self, other: &Model) -> bool {
        self.spec.n == other.spec.n && self.suppressed == other.suppressed
    }
}

/// Shared handle used by mass functions and fusion results.
pub type ModelRef = Arc<Model>;

fn derive_kind(n: u8, suppressed: PartMask) -> ModelKind {
    if suppressed.is_empty() {
        return ModelKind::Free;
    }
    // Shafer: exactly the parts shared by two or more atoms are gone
    let mut shared = 0u64;
    for s in 1..=((1u32 << n) - 1) {
        if s.count_ones() >= 2 {
            shared |= 1 << (s - 1);
        }
    }
    if suppressed.bits() == shared {
        ModelKind::Shafer
    } else {
        ModelKind::Hybrid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exprs(model: &Model) -> Vec<(String, u32)> {
        model
            .survivors()
            .iter()
            .map(|s| (s.representative.to_string(), s.cardinality()))
            .collect()
    }

    #[test]
    fn free_model_keeps_every_element() {
        let m = Model::free(3).unwrap();
        assert_eq!(m.kind(), ModelKind::Free);
        assert_eq!(m.survivors().len(), 18);
        assert_eq!(m.venn_dimension(), 7);
        assert!(m.empty_members().is_empty());
        for e in m.lattice().elements() {
            assert_eq!(m.cardinality(*e), e.parts().count());
        }
    }

    #[test]
    fn shafer_model_collapses_to_the_power_set() {
        let m = Model::shafer(3).unwrap();
        assert_eq!(m.kind(), ModelKind::Shafer);
        assert_eq!(m.survivors().len(), 7);
        assert_eq!(m.venn_dimension(), 3);
        assert_eq!(
            exprs(&m),
            [
                ("t1".into(), 1),
                ("t2".into(), 1),
                ("t3".into(), 1),
                ("t1vt2".into(), 2),
                ("t1vt3".into(), 2),
                ("t2vt3".into(), 2),
                ("t1vt2vt3".into(), 3),
            ]
        );
    }

    #[test]
    fn constraining_an_element_empties_everything_below_it() {
        let m = Model::build(3, &["t1^t3", "t2^t3"]).unwrap();
        assert_eq!(m.kind(), ModelKind::Hybrid);
        // t1^t2^t3 sits below both constraints and disappears with them
        for gone in ["t1^t3", "t2^t3", "t1^t2^t3", "(t1vt2)^t3"] {
            let e = m.parse(gone).unwrap();
            assert!(m.is_empty_under(e), "{gone} should be empty");
            assert_eq!(m.cardinality(e), 0);
        }
        let kept = m.parse("t1^t2").unwrap();
        assert_eq!(m.cardinality(kept), 1);
    }

    #[test]
    fn hybrid_survivors_merge_elements_with_equal_residuals() {
        let m = Model::build(3, &["t1^t3", "t2^t3"]).unwrap();
        assert_eq!(m.survivors().len(), 9);
        // (t1vt3)^t2 loses its <23> part and collapses onto t1^t2
        let a = m.parse("(t1vt3)^t2").unwrap();
        let b = m.parse("t1^t2").unwrap();
        assert_eq!(m.class_of(a), m.class_of(b));
        assert_eq!(m.representative(a).unwrap().to_string(), "t1^t2");
        // the representative is the lowest-indexed member
        assert!(b.index() < a.index());
    }

    #[test]
    fn hybrid_cardinalities_match_the_reduced_diagram() {
        let m = Model::build(3, &["t1^t3", "t2^t3"]).unwrap();
        assert_eq!(m.venn_dimension(), 4);
        let expect = [
            ("t1^t2", 1),
            ("t3", 1),
            ("t1", 2),
            ("t2", 2),
            ("t1vt2", 3),
            ("t1vt3", 3),
            ("t2vt3", 3),
            ("t1vt2vt3", 4),
        ];
        for (s, card) in expect {
            let e = m.parse(s).unwrap();
            assert_eq!(m.cardinality(e), card, "cardinality of {s}");
        }
    }

    #[test]
    fn degenerate_constraint_sets_are_rejected() {
        assert!(matches!(
            Model::build(2, &["t1vt2"]),
            Err(Error::DegenerateModel)
        ));
        // jointly emptying every atom is just as degenerate
        assert!(matches!(
            Model::build(2, &["t1", "t2"]),
            Err(Error::DegenerateModel)
        ));
    }

    #[test]
    fn the_empty_set_is_not_a_constraint() {
        assert!(matches!(
            Model::build(2, &["empty"]),
            Err(Error::EmptyConstraint)
        ));
        assert!(matches!(
            Model::build(2, &["t1^empty"]),
            Err(Error::EmptyConstraint)
        ));
    }

    #[test]
    fn constraint_classification_reads_the_canonical_form() {
        let lat = FreeLattice::generate(3).unwrap();
        let k = |s: &str| classify_constraint(lat.parse(s).unwrap());
        assert_eq!(k("t1^t2"), ConstraintKind::Exclusivity);
        assert_eq!(k("t1^t2^t3"), ConstraintKind::Exclusivity);
        assert_eq!(k("t1"), ConstraintKind::NonExistential);
        assert_eq!(k("t1vt2"), ConstraintKind::NonExistential);
        assert_eq!(k("(t1^t2)vt3"), ConstraintKind::Mixed);
    }

    #[test]
    fn adding_constraints_never_raises_a_cardinality() {
        let base = Model::build(3, &["t1^t2"]).unwrap();
        let more = Model::build(3, &["t1^t2", "t2^t3"]).unwrap();
        for e in base.lattice().elements() {
            assert!(more.cardinality(*e) <= base.cardinality(*e));
        }
    }

    #[test]
    fn duplicate_and_overlapping_constraints_are_idempotent() {
        let a = Model::build(3, &["t1^t2"]).unwrap();
        let b = Model::build(3, &["t1^t2", "t1^t2", "t1^t2^t3"]).unwrap();
        assert!(a.same_restriction(&b));
        assert_eq!(a.survivors().len(), b.survivors().len());
    }

    #[test]
    fn total_ignorance_class_has_the_full_residual() {
        for m in [
            Model::free(3).unwrap(),
            Model::shafer(3).unwrap(),
            Model::build(3, &["t1^t3", "t2^t3"]).unwrap(),
        ] {
            let top = m.total_ignorance_class();
            assert_eq!(top.residual, m.alive());
            assert_eq!(top.cardinality(), m.venn_dimension());
        }
    }

    #[test]
    fn model_files_round_trip() {
        let m = Model::build(3, &["t1^t3", "t2^t3"]).unwrap();
        let file = m.to_file_spec();
        let text = serde_json::to_string(&file).unwrap();
        let back: ModelFile = serde_json::from_str(&text).unwrap();
        let m2 = Model::from_file_spec(&back).unwrap();
        assert!(m.same_restriction(&m2));
    }
}
