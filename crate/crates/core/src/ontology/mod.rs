//! Versioned semantic ontology: classes, templates, variables, molecules,
//! entailment constraints and concept decompositions.
//!
//! An [`Ontology`] is an immutable snapshot; mutation produces a new value
//! with the version bumped by one. [`OntologyStore`] serializes writers and
//! persists snapshots atomically.

mod model;
mod store;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use model::*;
pub use store::{save_ontology, OntologyStore};
pub use validate::{is_valid_id, validate, validate_concept, Rule, ValidationReport, Violation};

/// Bundled seed ontology.
pub const SEED_ONTOLOGY_JSON: &str = include_str!("../../data/seed_ontology.json");

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("cannot access ontology file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed ontology document at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("ontology failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("concept `{lemma}`/{pos} already exists")]
    Duplicate { lemma: String, pos: PartOfSpeech },
    #[error("concept rejected:\n{0}")]
    Rejected(ValidationReport),
    #[error("no entailment constraint for template `{template}` and variable `{variable}`")]
    UnknownPair { template: String, variable: String },
}

/// Serialized form: one JSON object, every collection an array sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologyDocument {
    pub version: u64,
    #[serde(default)]
    pub classes: Vec<SemanticClass>,
    #[serde(default)]
    pub templates: Vec<SemanticTemplate>,
    #[serde(default)]
    pub variables: Vec<SemanticVariable>,
    #[serde(default)]
    pub molecules: Vec<SemanticMolecule>,
    #[serde(default)]
    pub constraints: Vec<EntailmentConstraint>,
    #[serde(default)]
    pub concepts: Vec<ConceptEntry>,
    #[serde(default)]
    pub icon_manifest: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    pub version: u64,
    pub classes: BTreeMap<String, SemanticClass>,
    pub templates: BTreeMap<String, SemanticTemplate>,
    pub variables: BTreeMap<String, SemanticVariable>,
    pub molecules: BTreeMap<String, SemanticMolecule>,
    pub constraints: BTreeMap<(String, String), EntailmentConstraint>,
    pub concepts: BTreeMap<(String, PartOfSpeech), ConceptEntry>,
    /// icon id -> image path relative to the ontology file.
    pub icon_manifest: BTreeMap<String, String>,
}

impl Ontology {
    /// Keys the collections without checking any invariant except
    /// uniqueness, which the keyed form cannot represent.
    pub fn from_document(doc: OntologyDocument) -> Result<Self, OntologyError> {
        let dups = validate::document_duplicates(&doc);
        if !dups.is_empty() {
            return Err(OntologyError::Invalid(dups));
        }
        Ok(Self {
            version: doc.version,
            classes: doc.classes.into_iter().map(|x| (x.id.clone(), x)).collect(),
            templates: doc.templates.into_iter().map(|x| (x.id.clone(), x)).collect(),
            variables: doc.variables.into_iter().map(|x| (x.id.clone(), x)).collect(),
            molecules: doc.molecules.into_iter().map(|x| (x.id.clone(), x)).collect(),
            constraints: doc
                .constraints
                .into_iter()
                .map(|x| ((x.template.clone(), x.variable.clone()), x))
                .collect(),
            concepts: doc.concepts.into_iter().map(|x| (x.key(), x)).collect(),
            icon_manifest: doc.icon_manifest,
        })
    }

    pub fn to_document(&self) -> OntologyDocument {
        OntologyDocument {
            version: self.version,
            classes: self.classes.values().cloned().collect(),
            templates: self.templates.values().cloned().collect(),
            variables: self.variables.values().cloned().collect(),
            molecules: self.molecules.values().cloned().collect(),
            constraints: self.constraints.values().cloned().collect(),
            concepts: self.concepts.values().cloned().collect(),
            icon_manifest: self.icon_manifest.clone(),
        }
    }

    /// Parses and validates a document.
    pub fn from_json(json: &str) -> Result<Self, OntologyError> {
        let de = &mut serde_json::Deserializer::from_str(json);
        let doc: OntologyDocument = serde_path_to_error::deserialize(de).map_err(|e| OntologyError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        let o = Self::from_document(doc)?;
        let report = validate(&o);
        if report.is_empty() {
            Ok(o)
        } else {
            Err(OntologyError::Invalid(report))
        }
    }

    /// Canonical serialization: sorted keys, arrays sorted by id, two-space
    /// indentation, trailing newline.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self.to_document()).expect("ontology serializes");
        let mut out = serde_json::to_string_pretty(&value).expect("ontology serializes");
        out.push('\n');
        out
    }

    /// The bundled seed ontology.
    pub fn seed() -> Self {
        Self::from_json(SEED_ONTOLOGY_JSON).expect("bundled seed ontology is valid")
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Exact match on the normalized lemma.
    pub fn lookup(&self, lemma: &str, pos: PartOfSpeech) -> Option<&ConceptEntry> {
        self.concepts.get(&(lemma.to_owned(), pos))
    }

    /// Returns a new snapshot with `c` added and the version bumped. `self` is
    /// never modified.
    pub fn insert_concept(&self, c: ConceptEntry) -> Result<Self, OntologyError> {
        if self.concepts.contains_key(&c.key()) {
            return Err(OntologyError::Duplicate {
                lemma: c.lemma,
                pos: c.pos,
            });
        }
        let violations = validate_concept(self, &c);
        if !violations.is_empty() {
            return Err(OntologyError::Rejected(ValidationReport { violations }));
        }
        let mut next = self.clone();
        next.concepts.insert(c.key(), c);
        next.version += 1;
        Ok(next)
    }

    pub fn allowed_molecules(&self, st: &str, sv: &str) -> Result<&BTreeSet<String>, OntologyError> {
        self.constraints
            .get(&(st.to_owned(), sv.to_owned()))
            .map(|c| &c.allowed_molecules)
            .ok_or_else(|| OntologyError::UnknownPair {
                template: st.to_owned(),
                variable: sv.to_owned(),
            })
    }

    pub fn class_of_template(&self, st: &str) -> Option<&SemanticClass> {
        self.templates.get(st).and_then(|t| self.classes.get(&t.parent_class))
    }

    /// Constraints of one template, in slot order.
    pub fn constraints_for(&self, st: &str) -> Vec<&EntailmentConstraint> {
        let Some(template) = self.templates.get(st) else {
            return Vec::new();
        };
        template
            .variable_slots
            .iter()
            .filter_map(|sv| self.constraints.get(&(st.to_owned(), sv.clone())))
            .collect()
    }

    pub fn concepts_of_pos(&self, pos: PartOfSpeech) -> impl Iterator<Item = &ConceptEntry> {
        self.concepts.values().filter(move |c| c.pos == pos)
    }

    pub fn stats(&self) -> OntologyStats {
        let mut stats = OntologyStats::default();
        fn pick(stats: &mut OntologyStats, pos: PartOfSpeech) -> &mut DomainStats {
            match pos {
                PartOfSpeech::Noun => &mut stats.nouns,
                PartOfSpeech::Verb => &mut stats.verbs,
            }
        }
        for class in self.classes.values() {
            pick(&mut stats, class.pos_domain).classes += 1;
        }
        for template in self.templates.values() {
            if let Some(class) = self.classes.get(&template.parent_class) {
                pick(&mut stats, class.pos_domain).templates += 1;
            }
        }
        for constraint in self.constraints.values() {
            if let Some(class) = self.class_of_template(&constraint.template) {
                pick(&mut stats, class.pos_domain).tuples += constraint.allowed_molecules.len();
            }
        }
        for concept in self.concepts.values() {
            pick(&mut stats, concept.pos).concepts += 1;
        }
        let icons: BTreeSet<&str> = self
            .classes
            .values()
            .map(|c| c.icon.as_str())
            .chain(self.templates.values().map(|t| t.icon.as_str()))
            .chain(self.molecules.values().map(|m| m.icon.as_str()))
            .collect();
        stats.ideographs = icons.len();
        stats
    }

    /// Resolves an icon id to a path, relative to `base` (normally the
    /// directory holding the ontology file).
    pub fn icon_path(&self, icon: &str, base: &Path) -> Option<PathBuf> {
        self.icon_manifest.get(icon).map(|rel| base.join(rel))
    }
}

pub fn load_ontology(path: impl AsRef<Path>) -> Result<Ontology, OntologyError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| OntologyError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ontology::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(lemma: &str, pos: PartOfSpeech, sc: &str, st: &str, ex: &[(&str, &[&str])]) -> ConceptEntry {
        ConceptEntry {
            lemma: lemma.into(),
            pos,
            sc: sc.into(),
            st: st.into(),
            explication: ex
                .iter()
                .map(|(sv, sm)| ExplicationTuple::new(*sv, sm.iter().copied()))
                .collect(),
            provenance: Provenance::LlmAdmitted,
            admitted_at: None,
        }
    }

    #[test]
    fn seed_loads_with_paper_concepts() {
        let o = Ontology::seed();
        for lemma in [
            "mother",
            "nephew",
            "grandfather",
            "seed",
            "motorcycle",
            "market",
            "typhoon",
            "tomorrow",
        ] {
            assert!(o.lookup(lemma, PartOfSpeech::Noun).is_some(), "{lemma}");
        }
        assert!(o.validate().is_empty());
    }

    #[test]
    fn empty_document_is_valid() {
        let o = Ontology::from_json(r#"{"version": 3, "classes": [], "templates": [], "variables": [], "molecules": [], "constraints": [], "concepts": [], "icon_manifest": {}}"#).unwrap();
        assert_eq!(o.version, 3);
        assert!(o.concepts.is_empty());
        assert_eq!(o.stats(), OntologyStats::default());
    }

    #[test]
    fn dangling_template_parent_is_reported() {
        let json = r#"{"version": 1,
            "classes": [],
            "templates": [{"id": "automobile", "parent_class": "things", "icon": "st", "variable_slots": ["wheels"]}],
            "variables": [{"id": "wheels", "display_name": "Wheels"}],
            "icon_manifest": {"st": "icons/st.svg"}}"#;
        match Ontology::from_json(json) {
            Err(OntologyError::Invalid(report)) => {
                assert!(report.has(Rule::UnknownParentClass));
                assert!(report.to_string().contains("sc/st relationship"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_document_is_a_parse_error() {
        assert!(matches!(Ontology::from_json("{"), Err(OntologyError::Parse { .. })));
        // variables never carry icons
        let json = r#"{"version": 1, "variables": [{"id": "wheels", "display_name": "W", "icon": "x"}]}"#;
        match Ontology::from_json(json) {
            Err(OntologyError::Parse { path, .. }) => assert!(path.starts_with("variables")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_in_document() {
        let json =
            r#"{"version": 1, "variables": [{"id": "a", "display_name": "A"}, {"id": "a", "display_name": "B"}]}"#;
        match Ontology::from_json(json) {
            Err(OntologyError::Invalid(r)) => assert!(r.has(Rule::DuplicateId)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mother_under_things_is_inconsistent() {
        let mut o = Ontology::seed();
        let key = ("mother".to_owned(), PartOfSpeech::Noun);
        o.concepts.get_mut(&key).unwrap().sc = "things".into();
        let report = o.validate();
        assert!(report.has(Rule::StParentMismatch));
    }

    #[test]
    fn disallowed_molecule_is_reported() {
        let o = Ontology::seed();
        let bad = entry(
            "scooter",
            PartOfSpeech::Noun,
            "things",
            "automobile",
            &[("wheels", &["germinate"])],
        );
        let v = validate_concept(&o, &bad);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::MoleculeNotAllowed);
        assert_eq!(v[0].rule.to_string(), "molecule not allowed for variable");
    }

    #[test]
    fn lookup_is_exact() {
        let o = Ontology::seed();
        let moto = o.lookup("motorcycle", PartOfSpeech::Noun).unwrap();
        assert_eq!(moto.st, "automobile");
        assert_eq!(
            moto.explication,
            vec![
                ExplicationTuple::new("category", ["private transport"]),
                ExplicationTuple::new("wheels", ["two"]),
            ]
        );
        assert!(o.lookup("mandi", PartOfSpeech::Noun).is_none());
        assert!(o.lookup("", PartOfSpeech::Noun).is_none());
        assert!(o.lookup("Motorcycle", PartOfSpeech::Noun).is_none());
        assert!(o.lookup("motorcycle", PartOfSpeech::Verb).is_none());
    }

    #[test]
    fn kinship_paths_are_ordered_values() {
        let o = Ontology::seed();
        let gf = o.lookup("grandfather", PartOfSpeech::Noun).unwrap();
        assert_eq!(gf.explication[0], ExplicationTuple::new("path", ["parent", "parent"]));
        let nephew = o.lookup("nephew", PartOfSpeech::Noun).unwrap();
        assert_eq!(
            nephew.explication[0],
            ExplicationTuple::new("path", ["sibling", "child"])
        );
    }

    #[test]
    fn insert_bumps_version_and_is_visible() {
        let o = Ontology::seed();
        let mandi = entry(
            "mandi",
            PartOfSpeech::Noun,
            "location",
            "commercial",
            &[("purpose", &["business"])],
        );
        let next = o.insert_concept(mandi.clone()).unwrap();
        assert_eq!(next.version, o.version + 1);
        assert_eq!(next.lookup("mandi", PartOfSpeech::Noun), Some(&mandi));
        assert!(o.lookup("mandi", PartOfSpeech::Noun).is_none());
    }

    #[test]
    fn insert_rejects_duplicates_and_violations() {
        let o = Ontology::seed();
        let seed = o.lookup("seed", PartOfSpeech::Noun).unwrap().clone();
        assert!(matches!(o.insert_concept(seed), Err(OntologyError::Duplicate { .. })));

        let before = o.clone();
        let bad = entry(
            "scooter",
            PartOfSpeech::Noun,
            "things",
            "automobile",
            &[("wheels", &["germinate"])],
        );
        assert!(matches!(o.insert_concept(bad), Err(OntologyError::Rejected(_))));
        assert_eq!(o, before);
    }

    #[test]
    fn allowed_molecules_lookup() {
        let o = Ontology::seed();
        assert!(o.allowed_molecules("automobile", "wheels").unwrap().contains("two"));
        assert!(o
            .allowed_molecules("commercial", "purpose")
            .unwrap()
            .contains("business"));
        assert!(matches!(
            o.allowed_molecules("automobile", "purpose"),
            Err(OntologyError::UnknownPair { .. })
        ));
    }

    #[test]
    fn seed_stats_match_document_contents() {
        let o = Ontology::seed();
        let doc: serde_json::Value = serde_json::from_str(SEED_ONTOLOGY_JSON).unwrap();
        let domain_of_class = |id: &str| {
            doc["classes"]
                .as_array()
                .unwrap()
                .iter()
                .find(|c| c["id"] == id)
                .unwrap()["pos_domain"]
                .as_str()
                .unwrap()
                .to_owned()
        };
        let domain_of_template = |id: &str| {
            let t = doc["templates"]
                .as_array()
                .unwrap()
                .iter()
                .find(|t| t["id"] == id)
                .unwrap();
            domain_of_class(t["parent_class"].as_str().unwrap())
        };
        let mut expected = OntologyStats::default();
        for c in doc["classes"].as_array().unwrap() {
            if c["pos_domain"] == "noun" {
                expected.nouns.classes += 1
            } else {
                expected.verbs.classes += 1
            }
        }
        for t in doc["templates"].as_array().unwrap() {
            if domain_of_class(t["parent_class"].as_str().unwrap()) == "noun" {
                expected.nouns.templates += 1
            } else {
                expected.verbs.templates += 1
            }
        }
        for c in doc["constraints"].as_array().unwrap() {
            let n = c["allowed_molecules"].as_array().unwrap().len();
            if domain_of_template(c["template"].as_str().unwrap()) == "noun" {
                expected.nouns.tuples += n
            } else {
                expected.verbs.tuples += n
            }
        }
        for c in doc["concepts"].as_array().unwrap() {
            if c["pos"] == "noun" {
                expected.nouns.concepts += 1
            } else {
                expected.verbs.concepts += 1
            }
        }
        let mut icons = BTreeSet::new();
        for key in ["classes", "templates", "molecules"] {
            for x in doc[key].as_array().unwrap() {
                icons.insert(x["icon"].as_str().unwrap().to_owned());
            }
        }
        expected.ideographs = icons.len();
        assert_eq!(o.stats(), expected);
    }

    #[test]
    fn canonical_json_round_trip_is_byte_stable() {
        let o = Ontology::seed();
        let once = o.to_json();
        let again = Ontology::from_json(&once).unwrap().to_json();
        assert_eq!(once, again);
        assert_eq!(Ontology::from_json(&once).unwrap(), o);
    }
}
