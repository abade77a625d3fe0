//! Pignistic projections: from masses to a betting probability.
//!
//! The generalized transformation weights each focal element's mass by the
//! fraction of its parts that fall inside the target, measured with the
//! model's cardinality. On a Shafer model this reduces to the classical
//! transformation on the power set. Coefficients are exact rationals;
//! floating point enters only when they are multiplied into the masses.

use num_rational::Ratio;

use crate::bba::MassFunction;
use crate::error::{Error, Result};
use crate::lattice::{Element, ThetaSet};
use crate::model::{Model, ModelKind, ModelRef};

/// One weighting row: the share of `source` lying inside the table's
/// target, as the unreduced pair (num, den) = (card(source ∩ target),
/// card(source)).
#[derive(Debug, Clone, Copy)]
pub struct CoefficientRow {
    pub source: Element,
    pub num: u32,
    pub den: u32,
}

impl CoefficientRow {
    /// Exact reduced value.
    pub fn value(&self) -> Ratio<u32> {
        Ratio::new(self.num, self.den)
    }

    /// The raw fraction as printed, e.g. `3/5`.
    pub fn fraction(&self) -> String {
        format!("{}/{}", self.num, self.den)
    }
}

/// All weighting rows for one target, over the model's non-empty elements
/// in lattice order.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub target: Element,
    pub rows: Vec<CoefficientRow>,
}

impl CoefficientTable {
    pub fn row_for(&self, source: Element) -> Option<&CoefficientRow> {
        self.rows.iter().find(|r| r.source == source)
    }
}

/// Probabilities over the model's restricted lattice. The empty set and
/// every element emptied by the model carry probability zero.
#[derive(Clone)]
pub struct PignisticDist {
    model: ModelRef,
    /// one value per survivor, in survivor order
    values: Vec<f64>,
}

impl PignisticDist {
    /// Wraps raw values (one per survivor). No axioms are checked; useful
    /// for exercising `verify_axioms` against known violations.
    pub fn from_values(model: ModelRef, values: Vec<f64>) -> PignisticDist {
        assert_eq!(
            values.len(),
            model.survivors().len(),
            "one value per non-empty element"
        );
        PignisticDist { model, values }
    }

    pub fn model(&self) -> &ModelRef {
        &self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Probability of any lattice element; elements empty under the model
    /// get zero.
    pub fn value(&self, e: Element) -> f64 {
        match self.model.class_of(e) {
            Some(class) => self.values[class as usize],
            None => 0.0,
        }
    }

    pub fn value_of_expr(&self, s: &str) -> Result<f64> {
        Ok(self.value(self.model.parse(s)?))
    }

    fn value_of_residual_bits(&self, bits: u64) -> f64 {
        if bits == 0 {
            return 0.0;
        }
        let class = self
            .model
            .class_of_residual_bits(bits)
            .expect("residual of a lattice element");
        self.values[class as usize]
    }

    /// (representative, probability) pairs in survivor order.
    pub fn entries(&self) -> Vec<(Element, f64)> {
        self.model
            .survivors()
            .iter()
            .map(|s| (s.representative, self.values[s.index as usize]))
            .collect()
    }
}

impl std::fmt::Debug for PignisticDist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map()
            .entries(self.entries().iter().map(|(e, p)| (e.to_string(), p)))
            .finish()
    }
}

fn check_no_empty_focals(m: &MassFunction) -> Result<()> {
    for (e, mass) in m.focal_elements() {
        if m.model().is_empty_under(e) {
            return Err(Error::MassOnEmptyElement {
                expr: e.to_string(),
                mass,
            });
        }
    }
    Ok(())
}

/// The generalized pignistic transformation. Defined on every model;
/// sources must not weight elements of zero cardinality.
pub fn gpt(m: &MassFunction) -> Result<PignisticDist> {
    check_no_empty_focals(m)?;
    let model = m.model();
    let focals: Vec<(u64, u32, f64)> = m
        .focal_elements()
        .into_iter()
        .map(|(e, mass)| {
            let r = model.residual(e);
            (r.bits(), r.count(), mass)
        })
        .collect();
    let values = model
        .survivors()
        .iter()
        .map(|s| {
            let a = s.residual.bits();
            let mut p = 0.0;
            for &(x, den, mass) in &focals {
                let num = (x & a).count_ones();
                let coeff = Ratio::new(num, den);
                p += ratio_f64(coeff) * mass;
            }
            p
        })
        .collect();
    Ok(PignisticDist {
        model: std::sync::Arc::clone(model),
        values,
    })
}

/// The classical pignistic transformation over the power set of the frame.
/// Elements are read as plain sets of atoms, so it only exists on Shafer
/// models; there it coincides with `gpt`.
pub fn classical_pt(m: &MassFunction) -> Result<PignisticDist> {
    let model = m.model();
    if model.kind() != ModelKind::Shafer {
        return Err(Error::ShaferRequired {
            operation: "the classical pignistic transformation",
        });
    }
    check_no_empty_focals(m)?;
    let focals: Vec<(ThetaSet, f64)> = m
        .focal_elements()
        .into_iter()
        .map(|(e, mass)| (atom_set(model, e), mass))
        .collect();
    let values = model
        .survivors()
        .iter()
        .map(|s| {
            let a = atom_set(model, s.representative);
            let mut p = 0.0;
            for &(x, mass) in &focals {
                let coeff = Ratio::new(x.intersection(a).len(), x.len());
                p += ratio_f64(coeff) * mass;
            }
            p
        })
        .collect();
    Ok(PignisticDist {
        model: std::sync::Arc::clone(model),
        values,
    })
}

/// The atoms whose singleton region survives inside `e`: the classical
/// reading of a lattice element as a subset of the frame.
fn atom_set(model: &Model, e: Element) -> ThetaSet {
    let residual = model.residual(e);
    let mut set = ThetaSet::EMPTY;
    for i in 1..=model.n() {
        let singleton = 1u64 << ((1u32 << (i - 1)) - 1);
        if residual.bits() & singleton != 0 {
            set = set.union(ThetaSet::singleton(i));
        }
    }
    set
}

fn ratio_f64(r: Ratio<u32>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Weighting rows of the generalized transformation for one target.
pub fn gpt_coefficients(target: Element, model: &Model) -> CoefficientTable {
    let a = model.residual(target).bits();
    let rows = model
        .survivors()
        .iter()
        .map(|s| CoefficientRow {
            source: s.representative,
            num: (s.residual.bits() & a).count_ones(),
            den: s.cardinality(),
        })
        .collect();
    CoefficientTable { target, rows }
}

/// Weighting rows of the classical transformation; Shafer models only.
pub fn pt_coefficients(target: Element, model: &Model) -> Result<CoefficientTable> {
    if model.kind() != ModelKind::Shafer {
        return Err(Error::ShaferRequired {
            operation: "classical pignistic coefficients",
        });
    }
    let a = atom_set(model, target);
    let rows = model
        .survivors()
        .iter()
        .map(|s| {
            let x = atom_set(model, s.representative);
            CoefficientRow {
                source: s.representative,
                num: x.intersection(a).len(),
                den: x.len(),
            }
        })
        .collect();
    Ok(CoefficientTable { target, rows })
}

/// One verified property of a distribution.
#[derive(Debug, Clone)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub pass: bool,
    pub max_deviation: f64,
}

/// Outcome of `verify_axioms`.
#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub tolerance: f64,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn worst(&self) -> f64 {
        self.checks.iter().fold(0.0, |w, c| w.max(c.max_deviation))
    }
}

/// Checks that a distribution behaves like a probability measure on the
/// restricted lattice: values in [0,1], the sure event at 1, additivity on
/// disjoint pairs, monotonicity under inclusion, the two-set
/// inclusion-exclusion identity on all pairs, and the full n-set identity
/// over the atoms.
pub fn verify_axioms(p: &PignisticDist, tolerance: f64) -> AxiomReport {
    let model = p.model();
    let survivors = model.survivors();
    let mut checks = Vec::with_capacity(6);

    let mut dev = 0.0f64;
    for &v in p.values() {
        dev = dev.max(-v).max(v - 1.0);
    }
    checks.push(AxiomCheck {
        name: "bounds",
        pass: dev <= tolerance,
        max_deviation: dev.max(0.0),
    });

    let top = model.total_ignorance_class();
    let dev = (p.values()[top.index as usize] - 1.0).abs();
    checks.push(AxiomCheck {
        name: "sure-event",
        pass: dev <= tolerance,
        max_deviation: dev,
    });

    let mut disjoint_dev = 0.0f64;
    let mut monotone_dev = 0.0f64;
    let mut pair_dev = 0.0f64;
    for a in survivors {
        for b in survivors {
            let pa = p.values()[a.index as usize];
            let pb = p.values()[b.index as usize];
            let meet = a.residual.bits() & b.residual.bits();
            let join = a.residual.bits() | b.residual.bits();
            let p_join = p.value_of_residual_bits(join);
            let p_meet = p.value_of_residual_bits(meet);
            if meet == 0 {
                disjoint_dev = disjoint_dev.max((p_join - pa - pb).abs());
            }
            if meet == a.residual.bits() {
                // a is contained in b
                monotone_dev = monotone_dev.max(pa - pb);
            }
            pair_dev = pair_dev.max((p_join - (pa + pb - p_meet)).abs());
        }
    }
    checks.push(AxiomCheck {
        name: "disjoint-additivity",
        pass: disjoint_dev <= tolerance,
        max_deviation: disjoint_dev,
    });
    checks.push(AxiomCheck {
        name: "monotone",
        pass: monotone_dev <= tolerance,
        max_deviation: monotone_dev.max(0.0),
    });
    checks.push(AxiomCheck {
        name: "union-pair-identity",
        pass: pair_dev <= tolerance,
        max_deviation: pair_dev,
    });

    // P{t1 v .. v tn} expanded by inclusion-exclusion over all atom
    // subsets; the union of all atoms is the sure event
    let n = model.n();
    let theta_res: Vec<u64> = (1..=n)
        .map(|i| {
            model
                .residual(model.lattice().theta(i).expect("atom"))
                .bits()
        })
        .collect();
    let mut signed = 0.0;
    for subset in 1u32..(1 << n) {
        let mut meet = u64::MAX;
        for i in 1..=n {
            if subset & (1 << (i - 1)) != 0 {
                meet &= theta_res[(i - 1) as usize];
            }
        }
        let term = p.value_of_residual_bits(meet & model.alive().bits());
        if subset.count_ones() % 2 == 1 {
            signed += term;
        } else {
            signed -= term;
        }
    }
    let union_all = theta_res.iter().fold(0u64, |acc, &r| acc | r);
    let dev = (p.value_of_residual_bits(union_all) - signed).abs();
    checks.push(AxiomCheck {
        name: "union-all-atoms-identity",
        pass: dev <= tolerance,
        max_deviation: dev,
    });

    AxiomReport { tolerance, checks }
}

/// A ranking decision.
#[derive(Debug, Clone)]
pub struct Decision {
    pub element: Element,
    pub probability: f64,
    /// Candidates whose probability exactly equals the winner's; the
    /// winner is the tied candidate with the lowest lattice index.
    pub tied_with: Vec<Element>,
}

impl Decision {
    pub fn is_tie(&self) -> bool {
        !self.tied_with.is_empty()
    }
}

/// Picks the candidate with the highest probability. Exact ties go to the
/// lowest lattice index and are reported.
pub fn decide(p: &PignisticDist, candidates: &[Element]) -> Result<Decision> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut sorted: Vec<Element> = candidates.to_vec();
    sorted.sort_by_key(|e| e.index());
    sorted.dedup();
    let mut best = sorted[0];
    let mut best_p = p.value(best);
    for &c in &sorted[1..] {
        let v = p.value(c);
        if v > best_p {
            best = c;
            best_p = v;
        }
    }
    let tied_with: Vec<Element> = sorted
        .into_iter()
        .filter(|&c| c != best && p.value(c) == best_p)
        .collect();
    Ok(Decision {
        element: best,
        probability: best_p,
        tied_with,
    })
}

/// The frame's atoms, the default decision candidates.
pub fn singleton_candidates(model: &Model) -> Vec<Element> {
    (1..=model.n())
        .map(|i| model.lattice().theta(i).expect("atom"))
        .collect()
}
