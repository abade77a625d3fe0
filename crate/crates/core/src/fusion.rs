//! Combination rules for independent sources.
//!
//! All rules walk the cartesian product of the sources' focal elements in
//! lattice index order and accumulate in that order, so outputs are
//! bit-reproducible. Output masses always land on the lowest-indexed
//! representative of the receiving class and the empty set gets nothing.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bba::MassFunction;
use crate::error::{Error, Result};
use crate::lattice::Element;
use crate::model::{Model, ModelKind, ModelRef};

/// A conflict degree this close to one is treated as full contradiction;
/// dividing by what is left would only amplify rounding noise.
const CONTRADICTION_EPS: f64 = 1e-12;

/// Per-element audit of the hybrid rule: how much mass arrived through
/// plain tuple meets (s1), through tuples entirely inside the empty
/// classes (s2), and through meet-empty tuples rerouted to their join (s3).
#[derive(Debug, Clone, Copy)]
pub struct MassBreakdown {
    pub element: Element,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl MassBreakdown {
    pub fn total(&self) -> f64 {
        self.s1 + self.s2 + self.s3
    }
}

/// Result of a combination.
#[derive(Debug, Clone)]
pub struct FusionReport {
    pub combined: MassFunction,
    /// Conflict of the final pairwise step; Dempster only.
    pub conflict: Option<f64>,
    /// Routing audit; hybrid rule only.
    pub breakdown: Option<Vec<MassBreakdown>>,
}

fn shared_model(sources: &[MassFunction]) -> Result<ModelRef> {
    if sources.len() < 2 {
        return Err(Error::TooFewSources(sources.len()));
    }
    let first = sources[0].model();
    for s in &sources[1..] {
        if !first.same_restriction(s.model()) {
            return Err(Error::ModelMismatch);
        }
    }
    Ok(Arc::clone(first))
}

fn require_strict(sources: &[MassFunction], model: &Model) -> Result<()> {
    for s in sources {
        for (e, mass) in s.focal_elements() {
            if model.is_empty_under(e) {
                return Err(Error::MassOnEmptyElement {
                    expr: e.to_string(),
                    mass,
                });
            }
        }
    }
    Ok(())
}

/// Dempster's rule: conjunctive combination with the conflicting mass
/// renormalized away. Applied pairwise left to right; the reported
/// conflict is that of the final step.
pub fn dempster_combine(sources: &[MassFunction]) -> Result<FusionReport> {
    let model = shared_model(sources)?;
    if model.kind() != ModelKind::Shafer {
        return Err(Error::ShaferRequired {
            operation: "Dempster's rule",
        });
    }
    require_strict(sources, &model)?;

    // masses keyed by class representative index
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for (e, m) in sources[0].focal_elements() {
        let rep = model.representative(e).expect("strict source");
        *acc.entry(rep.index() as u32).or_insert(0.0) += m;
    }
    let mut conflict = 0.0;
    for s in &sources[1..] {
        let mut next: BTreeMap<u32, f64> = BTreeMap::new();
        let mut k = 0.0;
        for (&xi, &xm) in &acc {
            let x = model.lattice().element(xi as usize);
            for (y, ym) in s.focal_elements() {
                let p = xm * ym;
                let meet_res = x.parts().and(y.parts()).minus(model.suppressed());
                if meet_res.is_empty() {
                    k += p;
                } else {
                    let class = model
                        .class_of_residual_bits(meet_res.bits())
                        .expect("meets of lattice elements stay in the lattice");
                    let rep = model.survivor(class).representative;
                    *next.entry(rep.index() as u32).or_insert(0.0) += p;
                }
            }
        }
        if k >= 1.0 - CONTRADICTION_EPS {
            return Err(Error::FullContradiction);
        }
        let scale = 1.0 / (1.0 - k);
        for m in next.values_mut() {
            *m *= scale;
        }
        acc = next;
        conflict = k;
    }
    Ok(FusionReport {
        combined: MassFunction::from_raw(model, acc),
        conflict: Some(conflict),
        breakdown: None,
    })
}

/// Degree of conflict between two sources: the product mass sitting on
/// empty intersections.
pub fn conflict_degree(m1: &MassFunction, m2: &MassFunction) -> Result<f64> {
    let model = m1.model();
    if !model.same_restriction(m2.model()) {
        return Err(Error::ModelMismatch);
    }
    if model.kind() != ModelKind::Shafer {
        return Err(Error::ShaferRequired {
            operation: "conflict degree",
        });
    }
    let mut k = 0.0;
    for (x, xm) in m1.focal_elements() {
        for (y, ym) in m2.focal_elements() {
            let meet_res = x.parts().and(y.parts()).minus(model.suppressed());
            if meet_res.is_empty() {
                k += xm * ym;
            }
        }
    }
    Ok(k)
}

struct Focal {
    bits: u64,
    mass: f64,
    empty: bool,
    labels: u32,
}

fn focal_table(sources: &[MassFunction], model: &Model) -> Vec<Vec<Focal>> {
    sources
        .iter()
        .map(|s| {
            s.focal_elements()
                .into_iter()
                .map(|(e, mass)| Focal {
                    bits: e.parts().bits(),
                    mass,
                    empty: model.is_empty_under(e),
                    labels: e.labels().bits(),
                })
                .collect()
        })
        .collect()
}

/// Running accumulator for one branch of the focal tuple walk.
#[derive(Clone, Copy)]
struct TupleState {
    meet: u64,
    join: u64,
    labels: u32,
    all_empty: bool,
    product: f64,
}

impl TupleState {
    fn start(full_mask: u64) -> TupleState {
        TupleState {
            meet: full_mask,
            join: 0,
            labels: 0,
            all_empty: true,
            product: 1.0,
        }
    }

    fn then(self, f: &Focal) -> TupleState {
        TupleState {
            meet: self.meet & f.bits,
            join: self.join | f.bits,
            labels: self.labels | f.labels,
            all_empty: self.all_empty && f.empty,
            product: self.product * f.mass,
        }
    }
}

/// Walks every focal tuple in lexicographic lattice order, carrying the
/// running meet, join, label union and emptiness flag.
fn walk_tuples(
    levels: &[Vec<Focal>],
    depth: usize,
    state: TupleState,
    sink: &mut impl FnMut(&TupleState),
) {
    if depth == levels.len() {
        sink(&state);
        return;
    }
    for f in &levels[depth] {
        walk_tuples(levels, depth + 1, state.then(f), sink);
    }
}

/// The classic DSm rule: a k-fold conjunctive sum on the free lattice.
/// Every tuple's product mass lands on the tuple's intersection; nothing
/// is ever empty, so nothing is renormalized.
pub fn dsm_classic_combine(sources: &[MassFunction]) -> Result<FusionReport> {
    let model = shared_model(sources)?;
    if model.kind() != ModelKind::Free {
        return Err(Error::FreeRequired {
            operation: "the classic DSm rule",
        });
    }
    let levels = focal_table(sources, &model);
    let full = crate::lattice::PartMask::full(model.n()).bits();
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    {
        let lattice = model.lattice();
        let mut sink = |s: &TupleState| {
            let e = lattice
                .by_mask(crate::lattice::PartMask::from_bits(model.n(), s.meet))
                .expect("meets stay in the lattice");
            *acc.entry(e.index() as u32).or_insert(0.0) += s.product;
        };
        walk_tuples(&levels, 0, TupleState::start(full), &mut sink);
    }
    Ok(FusionReport {
        combined: MassFunction::from_raw(model, acc),
        conflict: None,
        breakdown: None,
    })
}

/// The hybrid DSm rule. Each tuple is routed to exactly one receiver:
/// a non-empty meet keeps the mass (s1); tuples whose members are all
/// empty under the model send it to the union of the atoms those members
/// were built from, or to the total ignorance when that union is itself
/// empty (s2); remaining meet-empty tuples send it to their join (s3).
pub fn dsm_hybrid_combine(sources: &[MassFunction]) -> Result<FusionReport> {
    let model = shared_model(sources)?;
    let n = model.n();
    let levels = focal_table(sources, &model);
    let alive = model.alive().bits();
    let full = crate::lattice::PartMask::full(n).bits();
    let theta_bits: Vec<u64> = (1..=n)
        .map(|i| crate::lattice::PartMask::theta(n, i).bits())
        .collect();
    let top_class = model.total_ignorance_class().index;

    // survivor index -> [s1, s2, s3]
    let mut acc: BTreeMap<u32, [f64; 3]> = BTreeMap::new();
    {
        let mut sink = |s: &TupleState| {
            let meet_res = s.meet & alive;
            let (class, route) = if meet_res != 0 {
                (
                    model
                        .class_of_residual_bits(meet_res)
                        .expect("meet residual is a class"),
                    0,
                )
            } else if s.all_empty {
                let mut union = 0u64;
                for i in 1..=n {
                    if s.labels & (1 << (i - 1)) != 0 {
                        union |= theta_bits[(i - 1) as usize];
                    }
                }
                let u_res = union & alive;
                let class = if u_res != 0 {
                    model
                        .class_of_residual_bits(u_res)
                        .expect("atom unions are classes")
                } else {
                    top_class
                };
                (class, 1)
            } else {
                let join_res = s.join & alive;
                // a join of anything non-empty is non-empty, so the total
                // ignorance fallback is unreachable; kept for safety
                let class = if join_res != 0 {
                    model
                        .class_of_residual_bits(join_res)
                        .expect("join residual is a class")
                } else {
                    top_class
                };
                (class, 2)
            };
            acc.entry(class).or_insert([0.0; 3])[route] += s.product;
        };
        walk_tuples(&levels, 0, TupleState::start(full), &mut sink);
    }

    let mut masses: BTreeMap<u32, f64> = BTreeMap::new();
    let mut breakdown = Vec::with_capacity(acc.len());
    for (&class, &[s1, s2, s3]) in &acc {
        let rep = model.survivor(class).representative;
        let total = s1 + s2 + s3;
        if total > 0.0 {
            *masses.entry(rep.index() as u32).or_insert(0.0) += total;
        }
        breakdown.push(MassBreakdown {
            element: rep,
            s1,
            s2,
            s3,
        });
    }
    breakdown.sort_by_key(|b| b.element.index());
    Ok(FusionReport {
        combined: MassFunction::from_raw(model, masses),
        conflict: None,
        breakdown: Some(breakdown),
    })
}
