//! Basic belief assignments over a model.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Element;
use crate::model::{Model, ModelFile, ModelRef};

/// Masses must sum to one within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// How entries are admitted.
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Reject mass on elements that are empty under the model. On by
    /// default; turn off to feed the hybrid rule sources that still
    /// believe in constrained elements.
    pub strict: bool,
    /// Rescale masses to sum to one instead of rejecting a bad sum. Off by
    /// default.
    pub normalize: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            strict: true,
            normalize: false,
        }
    }
}

impl LoadOptions {
    pub fn lenient() -> Self {
        LoadOptions {
            strict: false,
            normalize: false,
        }
    }
}

/// Reference to the model a serialized bba is defined over: either a path
/// to a model file or the model spelled out inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Path(String),
    Inline(ModelFile),
}

/// Serialized form of a bba.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BbaFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSource>,
    pub masses: BTreeMap<String, f64>,
}

/// A mass function: non-negative masses on lattice elements, summing to
/// one, with nothing on the empty set proper.
///
/// Masses are keyed by free-lattice element, so syntactic variants of one
/// element always merge; elements that a model forces empty stay
/// addressable (the hybrid rule needs to know what a source believed in),
/// but only when loaded leniently.
#[derive(Clone)]
pub struct MassFunction {
    model: ModelRef,
    masses: BTreeMap<u32, f64>,
}

impl MassFunction {
    /// Validates and builds a mass function from (element, mass) pairs.
    /// Pairs resolving to the same element are summed. Zero-mass entries
    /// are dropped after merging.
    pub fn new(
        model: ModelRef,
        entries: impl IntoIterator<Item = (Element, f64)>,
        options: LoadOptions,
    ) -> Result<MassFunction> {
        let mut masses: BTreeMap<u32, f64> = BTreeMap::new();
        for (e, mass) in entries {
            if mass < 0.0 {
                return Err(Error::NegativeMass {
                    expr: e.to_string(),
                    mass,
                });
            }
            if e.is_empty_set() {
                if mass != 0.0 {
                    return Err(Error::MassOnEmptySet { mass });
                }
                continue;
            }
            *masses.entry(e.index() as u32).or_insert(0.0) += mass;
        }
        masses.retain(|_, m| *m > 0.0);
        if options.strict {
            for &i in masses.keys() {
                let e = model.lattice().element(i as usize);
                if model.is_empty_under(e) {
                    return Err(Error::MassOnEmptyElement {
                        expr: e.to_string(),
                        mass: masses[&i],
                    });
                }
            }
        }
        let sum: f64 = masses.values().sum();
        if options.normalize {
            if sum <= 0.0 {
                return Err(Error::UnnormalizableMass { sum });
            }
            for m in masses.values_mut() {
                *m /= sum;
            }
        } else if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::MassSum {
                sum,
                tolerance: SUM_TOLERANCE,
            });
        }
        Ok(MassFunction { model, masses })
    }

    /// Parses (expression, mass) pairs against the model's lattice.
    pub fn from_exprs<S: AsRef<str>>(
        model: ModelRef,
        entries: &[(S, f64)],
        options: LoadOptions,
    ) -> Result<MassFunction> {
        let mut resolved = Vec::with_capacity(entries.len());
        for (s, mass) in entries {
            let e = model.parse(s.as_ref())?;
            if *mass < 0.0 {
                return Err(Error::NegativeMass {
                    expr: s.as_ref().to_owned(),
                    mass: *mass,
                });
            }
            resolved.push((e, *mass));
        }
        MassFunction::new(model, resolved, options)
    }

    /// Builds from a deserialized file body. `fallback` supplies the model
    /// when the file names none; when both are present they must restrict
    /// the frame identically.
    pub fn from_file_body(
        file: &BbaFile,
        fallback: Option<ModelRef>,
        base_dir: Option<&Path>,
        options: LoadOptions,
    ) -> Result<MassFunction> {
        let own_model = match &file.model {
            Some(ModelSource::Inline(spec)) => Some(Arc::new(Model::from_file_spec(spec)?)),
            Some(ModelSource::Path(p)) => {
                let path = match base_dir {
                    Some(dir) => dir.join(p),
                    None => Path::new(p).to_path_buf(),
                };
                Some(Arc::new(Model::load(&path)?))
            }
            None => None,
        };
        let model = match (own_model, fallback) {
            (Some(own), Some(given)) => {
                if !own.same_restriction(&given) {
                    return Err(Error::ModelMismatch);
                }
                given
            }
            (Some(own), None) => own,
            (None, Some(given)) => given,
            (None, None) => return Err(Error::MissingModel),
        };
        let entries: Vec<(String, f64)> =
            file.masses.iter().map(|(k, v)| (k.clone(), *v)).collect();
        MassFunction::from_exprs(model, &entries, options)
    }

    /// Reads a bba from a JSON file, resolving a relative model path
    /// against the bba's own directory.
    pub fn load(
        path: &Path,
        fallback: Option<ModelRef>,
        options: LoadOptions,
    ) -> Result<MassFunction> {
        let text = std::fs::read_to_string(path)?;
        let file: BbaFile = serde_json::from_str(&text)?;
        MassFunction::from_file_body(&file, fallback, path.parent(), options)
    }

    /// Serializes with canonical expressions and the model inlined.
    pub fn to_file_body(&self) -> BbaFile {
        let masses = self
            .focal_elements()
            .into_iter()
            .map(|(e, m)| (e.to_string(), m))
            .collect();
        BbaFile {
            model: Some(ModelSource::Inline(self.model.to_file_spec())),
            masses,
        }
    }

    /// Builds without validation; callers guarantee the invariants.
    pub(crate) fn from_raw(model: ModelRef, masses: BTreeMap<u32, f64>) -> MassFunction {
        debug_assert!(masses.values().all(|m| *m >= 0.0));
        MassFunction { model, masses }
    }

    pub fn model(&self) -> &ModelRef {
        &self.model
    }

    /// Elements with positive mass, in lattice index order.
    pub fn focal_elements(&self) -> Vec<(Element, f64)> {
        self.masses
            .iter()
            .map(|(&i, &m)| (self.model.lattice().element(i as usize), m))
            .collect()
    }

    pub fn focal_count(&self) -> usize {
        self.masses.len()
    }

    pub fn mass_of(&self, e: Element) -> f64 {
        self.masses.get(&(e.index() as u32)).copied().unwrap_or(0.0)
    }

    pub fn mass_of_expr(&self, s: &str) -> Result<f64> {
        Ok(self.mass_of(self.model.parse(s)?))
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    /// True when no focal element is empty under the model.
    pub fn is_strict(&self) -> bool {
        self.masses.keys().all(|&i| {
            let e = self.model.lattice().element(i as usize);
            !self.model.is_empty_under(e)
        })
    }

    /// The vacuous bba: all mass on the total ignorance.
    pub fn vacuous(model: ModelRef) -> MassFunction {
        let top = model.lattice().total_ignorance();
        let mut masses = BTreeMap::new();
        masses.insert(top.index() as u32, 1.0);
        MassFunction { model, masses }
    }

    /// Draws a random bba: a non-empty random subset of the model's
    /// non-empty elements gets uniform random weights, normalized to one.
    pub fn random<R: Rng + ?Sized>(model: &ModelRef, rng: &mut R) -> MassFunction {
        let survivors = model.survivors();
        let count = rng.gen_range(1..=survivors.len().min(8));
        let mut picked = std::collections::BTreeSet::new();
        while picked.len() < count {
            picked.insert(rng.gen_range(0..survivors.len()));
        }
        let mut masses = BTreeMap::new();
        let mut sum = 0.0;
        for i in picked {
            let w: f64 = rng.gen_range(0.05..1.0);
            masses.insert(survivors[i].representative.index() as u32, w);
            sum += w;
        }
        for m in masses.values_mut() {
            *m /= sum;
        }
        MassFunction {
            model: Arc::clone(model),
            masses,
        }
    }
}

impl std::fmt::Debug for MassFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut map = f.debug_map();
        for (e, m) in self.focal_elements() {
            map.entry(&e.to_string(), &m);
        }
        map.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free2() -> ModelRef {
        Arc::new(Model::free(2).unwrap())
    }

    #[test]
    fn a_well_formed_bba_loads() {
        let m = MassFunction::from_exprs(
            free2(),
            &[("t1", 0.3), ("t2", 0.2), ("t1^t2", 0.1), ("t1vt2", 0.4)],
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(m.focal_count(), 4);
        assert!((m.total() - 1.0).abs() < 1e-12);
        assert_eq!(m.mass_of_expr("t1").unwrap(), 0.3);
    }

    #[test]
    fn vacuous_bba_has_one_focal_element() {
        let m = MassFunction::vacuous(free2());
        assert_eq!(m.focal_count(), 1);
        assert_eq!(m.mass_of_expr("t1vt2").unwrap(), 1.0);
    }

    #[test]
    fn syntactic_variants_of_one_element_merge() {
        let m = MassFunction::from_exprs(
            free2(),
            &[("t1", 0.6), ("(t1^t2)vt1", 0.4)],
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(m.focal_count(), 1);
        assert_eq!(m.mass_of_expr("t1").unwrap(), 1.0);
    }

    #[test]
    fn sums_off_by_more_than_the_tolerance_are_rejected() {
        let r =
            MassFunction::from_exprs(free2(), &[("t1", 0.5), ("t2", 0.4)], LoadOptions::default());
        assert!(matches!(r, Err(Error::MassSum { .. })));
        // a hair inside the tolerance is accepted
        let r = MassFunction::from_exprs(
            free2(),
            &[("t1", 0.5), ("t2", 0.5 + 4e-10)],
            LoadOptions::default(),
        );
        assert!(r.is_ok());
    }

    #[test]
    fn normalization_is_opt_in() {
        let opts = LoadOptions {
            normalize: true,
            ..LoadOptions::default()
        };
        let m = MassFunction::from_exprs(free2(), &[("t1", 2.0), ("t2", 2.0)], opts).unwrap();
        assert_eq!(m.mass_of_expr("t1").unwrap(), 0.5);
        let r = MassFunction::from_exprs(free2(), &[("t1", 0.0)], opts);
        assert!(matches!(r, Err(Error::UnnormalizableMass { .. })));
    }

    #[test]
    fn negative_mass_and_mass_on_the_empty_set_are_rejected() {
        let r = MassFunction::from_exprs(
            free2(),
            &[("t1", -0.1), ("t2", 1.1)],
            LoadOptions::default(),
        );
        assert!(matches!(r, Err(Error::NegativeMass { .. })));
        let r = MassFunction::from_exprs(
            free2(),
            &[("empty", 0.5), ("t1", 0.5)],
            LoadOptions::default(),
        );
        assert!(matches!(r, Err(Error::MassOnEmptySet { .. })));
        // zero mass on the empty set is tolerated and dropped
        let m = MassFunction::from_exprs(
            free2(),
            &[("empty", 0.0), ("t1", 1.0)],
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(m.focal_count(), 1);
    }

    #[test]
    fn strict_loading_rejects_mass_on_constrained_elements() {
        let shafer = Arc::new(Model::shafer(2).unwrap());
        let entries = [("t1^t2", 0.4), ("t1vt2", 0.6)];
        let r = MassFunction::from_exprs(Arc::clone(&shafer), &entries, LoadOptions::default());
        assert!(matches!(r, Err(Error::MassOnEmptyElement { .. })));
        let m = MassFunction::from_exprs(shafer, &entries, LoadOptions::lenient()).unwrap();
        assert!(!m.is_strict());
        assert_eq!(m.mass_of_expr("t1^t2").unwrap(), 0.4);
    }

    #[test]
    fn unknown_atoms_are_rejected() {
        let r = MassFunction::from_exprs(free2(), &[("t3", 1.0)], LoadOptions::default());
        assert!(matches!(r, Err(Error::ThetaOutOfRange { index: 3, n: 2 })));
    }

    #[test]
    fn serialization_round_trips_by_element() {
        let m = MassFunction::from_exprs(
            free2(),
            &[("t1 v t2", 0.25), ("t1 ^ t2", 0.75)],
            LoadOptions::default(),
        )
        .unwrap();
        let body = m.to_file_body();
        let text = serde_json::to_string_pretty(&body).unwrap();
        let back: BbaFile = serde_json::from_str(&text).unwrap();
        let m2 = MassFunction::from_file_body(&back, None, None, LoadOptions::default()).unwrap();
        assert_eq!(m.focal_count(), m2.focal_count());
        for (e, mass) in m.focal_elements() {
            assert_eq!(m2.mass_of(e), mass);
        }
        // and serializing again is byte-identical
        let text2 = serde_json::to_string_pretty(&m2.to_file_body()).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn file_model_must_agree_with_the_supplied_one() {
        let body = BbaFile {
            model: Some(ModelSource::Inline(ModelFile {
                n: 2,
                constraints: vec!["t1^t2".into()],
            })),
            masses: [("t1".to_string(), 1.0)].into_iter().collect(),
        };
        let free = free2();
        let r = MassFunction::from_file_body(&body, Some(free), None, LoadOptions::default());
        assert!(matches!(r, Err(Error::ModelMismatch)));
        let ok = MassFunction::from_file_body(&body, None, None, LoadOptions::default()).unwrap();
        assert_eq!(ok.model().kind(), crate::model::ModelKind::Shafer);
    }

    #[test]
    fn random_bbas_are_valid_and_seeded_deterministically() {
        use rand::SeedableRng;
        let model = Arc::new(Model::shafer(3).unwrap());
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = MassFunction::random(&model, &mut a);
            let y = MassFunction::random(&model, &mut b);
            assert!((x.total() - 1.0).abs() < 1e-12);
            assert!(x.is_strict());
            assert!(x.focal_count() >= 1);
            let xs = x.focal_elements();
            let ys = y.focal_elements();
            assert_eq!(xs.len(), ys.len());
            for ((e1, m1), (e2, m2)) in xs.iter().zip(ys.iter()) {
                assert_eq!(e1, e2);
                assert_eq!(m1, m2);
            }
        }
    }
}
