//! Invariant checks over an ontology and over candidate concept entries.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use super::{ConceptEntry, Ontology, OntologyDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    DuplicateId,
    MalformedId,
    MissingIcon,
    InvalidManifestPath,
    /// Template parent class does not exist (class/template relationship).
    UnknownParentClass,
    EmptyVariableSlots,
    UnknownSlotVariable,
    DuplicateSlotVariable,
    UnknownConstraintTemplate,
    UnknownConstraintVariable,
    VariableNotInTemplate,
    EmptyAllowedMolecules,
    UnknownMolecule,
    DuplicateConstraint,
    DuplicateConcept,
    MalformedLemma,
    UnknownClass,
    UnknownTemplate,
    PosClassMismatch,
    StParentMismatch,
    EmptyExplication,
    UnknownExplicationVariable,
    DuplicateExplicationVariable,
    ExplicationOrder,
    MissingConstraint,
    EmptyMoleculeValue,
    MoleculeNotAllowed,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::DuplicateId => "duplicate id",
            Rule::MalformedId => "malformed id",
            Rule::MissingIcon => "icon missing from manifest",
            Rule::InvalidManifestPath => "manifest path must be relative",
            Rule::UnknownParentClass => "sc/st relationship: parent class missing",
            Rule::EmptyVariableSlots => "template has no variable slots",
            Rule::UnknownSlotVariable => "template slot names unknown variable",
            Rule::DuplicateSlotVariable => "template slot repeated",
            Rule::UnknownConstraintTemplate => "st/e relationship: constraint template missing",
            Rule::UnknownConstraintVariable => "constraint variable missing",
            Rule::VariableNotInTemplate => "constraint variable not a slot of its template",
            Rule::EmptyAllowedMolecules => "constraint allows no molecules",
            Rule::UnknownMolecule => "unknown molecule",
            Rule::DuplicateConstraint => "duplicate constraint",
            Rule::DuplicateConcept => "duplicate concept",
            Rule::MalformedLemma => "malformed lemma",
            Rule::UnknownClass => "unknown semantic class",
            Rule::UnknownTemplate => "unknown semantic template",
            Rule::PosClassMismatch => "pos/class mismatch",
            Rule::StParentMismatch => "st-parent mismatch",
            Rule::EmptyExplication => "empty explication",
            Rule::UnknownExplicationVariable => "variable not a slot of the template",
            Rule::DuplicateExplicationVariable => "variable repeated in explication",
            Rule::ExplicationOrder => "explication out of slot order",
            Rule::MissingConstraint => "no constraint for variable",
            Rule::EmptyMoleculeValue => "empty molecule value",
            Rule::MoleculeNotAllowed => "molecule not allowed for variable",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.entity, self.rule, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, entity: impl Into<String>, rule: Rule, detail: impl Into<String>) {
        self.violations.push(Violation {
            entity: entity.into(),
            rule,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Ids are lowercase, trimmed, and free of the characters the elementalization
/// and prompt formats use as separators.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.trim() == id
        && !id
            .chars()
            .any(|c| c.is_uppercase() || c.is_control() || matches!(c, ',' | ';' | '<' | '>' | '⟦' | '⟧'))
}

fn is_valid_icon_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(|c| c.is_whitespace() || c.is_control())
}

pub fn validate(o: &Ontology) -> ValidationReport {
    let mut report = ValidationReport::default();

    let check_id = |report: &mut ValidationReport, kind: &str, id: &str| {
        if !is_valid_id(id) {
            report.push(
                format!("{kind} `{id}`"),
                Rule::MalformedId,
                "ids are lowercase trimmed tokens",
            );
        }
    };
    let check_icon = |report: &mut ValidationReport, entity: String, icon: &str| {
        if !is_valid_icon_id(icon) || !o.icon_manifest.contains_key(icon) {
            report.push(entity, Rule::MissingIcon, format!("icon `{icon}`"));
        }
    };

    for (icon, path) in &o.icon_manifest {
        let p = std::path::Path::new(path);
        if path.is_empty() || p.is_absolute() || p.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
            report.push(format!("icon `{icon}`"), Rule::InvalidManifestPath, path.clone());
        }
    }

    for (key, class) in &o.classes {
        let entity = format!("class `{key}`");
        if key != &class.id {
            report.push(entity.clone(), Rule::DuplicateId, "map key differs from id");
        }
        check_id(&mut report, "class", &class.id);
        check_icon(&mut report, entity, &class.icon);
    }

    for variable in o.variables.values() {
        check_id(&mut report, "variable", &variable.id);
    }
    for molecule in o.molecules.values() {
        check_id(&mut report, "molecule", &molecule.id);
        check_icon(&mut report, format!("molecule `{}`", molecule.id), &molecule.icon);
    }

    for template in o.templates.values() {
        let entity = format!("template `{}`", template.id);
        check_id(&mut report, "template", &template.id);
        check_icon(&mut report, entity.clone(), &template.icon);
        if !o.classes.contains_key(&template.parent_class) {
            report.push(
                entity.clone(),
                Rule::UnknownParentClass,
                format!("class `{}`", template.parent_class),
            );
        }
        if template.variable_slots.is_empty() {
            report.push(entity.clone(), Rule::EmptyVariableSlots, "");
        }
        let mut seen = HashSet::new();
        for slot in &template.variable_slots {
            if !o.variables.contains_key(slot) {
                report.push(entity.clone(), Rule::UnknownSlotVariable, format!("variable `{slot}`"));
            }
            if !seen.insert(slot) {
                report.push(
                    entity.clone(),
                    Rule::DuplicateSlotVariable,
                    format!("variable `{slot}`"),
                );
            }
        }
    }

    for ((t, v), constraint) in &o.constraints {
        let entity = format!("constraint `{t}`/`{v}`");
        if t != &constraint.template || v != &constraint.variable {
            report.push(entity.clone(), Rule::DuplicateId, "map key differs from constraint ids");
        }
        match o.templates.get(t) {
            None => report.push(
                entity.clone(),
                Rule::UnknownConstraintTemplate,
                format!("template `{t}`"),
            ),
            Some(template) if !template.variable_slots.contains(v) => {
                report.push(entity.clone(), Rule::VariableNotInTemplate, format!("variable `{v}`"))
            }
            Some(_) => {}
        }
        if !o.variables.contains_key(v) {
            report.push(
                entity.clone(),
                Rule::UnknownConstraintVariable,
                format!("variable `{v}`"),
            );
        }
        if constraint.allowed_molecules.is_empty() {
            report.push(entity.clone(), Rule::EmptyAllowedMolecules, "");
        }
        for m in &constraint.allowed_molecules {
            if !o.molecules.contains_key(m) {
                report.push(entity.clone(), Rule::UnknownMolecule, format!("molecule `{m}`"));
            }
        }
    }

    for ((lemma, pos), concept) in &o.concepts {
        if lemma != &concept.lemma || *pos != concept.pos {
            report.push(
                format!("concept `{lemma}`/{pos}"),
                Rule::DuplicateId,
                "map key differs from lemma/pos",
            );
        }
        report.violations.extend(validate_concept(o, concept));
    }

    report
}

/// Checks one entry against the ontology's classes, templates and
/// constraints. Does not check for duplicates.
pub fn validate_concept(o: &Ontology, c: &ConceptEntry) -> Vec<Violation> {
    let mut report = ValidationReport::default();
    let entity = format!("concept `{}`/{}", c.lemma, c.pos);

    if !is_valid_id(&c.lemma) {
        report.push(
            entity.clone(),
            Rule::MalformedLemma,
            "lemmas are normalized lowercase words",
        );
    }
    match o.classes.get(&c.sc) {
        None => report.push(entity.clone(), Rule::UnknownClass, format!("class `{}`", c.sc)),
        Some(class) if class.pos_domain != c.pos => report.push(
            entity.clone(),
            Rule::PosClassMismatch,
            format!("class `{}` holds {}s", class.id, class.pos_domain),
        ),
        Some(_) => {}
    }
    let Some(template) = o.templates.get(&c.st) else {
        report.push(entity, Rule::UnknownTemplate, format!("template `{}`", c.st));
        return report.violations;
    };
    if template.parent_class != c.sc {
        report.push(
            entity.clone(),
            Rule::StParentMismatch,
            format!("template `{}` belongs to `{}`", template.id, template.parent_class),
        );
    }
    if c.explication.is_empty() {
        report.push(entity.clone(), Rule::EmptyExplication, "");
    }

    let mut seen = BTreeSet::new();
    let mut last_slot: Option<usize> = None;
    for tuple in &c.explication {
        let Some(slot) = template.variable_slots.iter().position(|s| s == &tuple.sv) else {
            report.push(
                entity.clone(),
                Rule::UnknownExplicationVariable,
                format!("variable `{}`", tuple.sv),
            );
            continue;
        };
        if !seen.insert(tuple.sv.as_str()) {
            report.push(
                entity.clone(),
                Rule::DuplicateExplicationVariable,
                format!("variable `{}`", tuple.sv),
            );
            continue;
        }
        if last_slot.is_some_and(|last| slot < last) {
            report.push(
                entity.clone(),
                Rule::ExplicationOrder,
                format!("variable `{}`", tuple.sv),
            );
        }
        last_slot = Some(slot);

        let Some(constraint) = o.constraints.get(&(c.st.clone(), tuple.sv.clone())) else {
            report.push(
                entity.clone(),
                Rule::MissingConstraint,
                format!("variable `{}`", tuple.sv),
            );
            continue;
        };
        if tuple.sm.is_empty() {
            report.push(
                entity.clone(),
                Rule::EmptyMoleculeValue,
                format!("variable `{}`", tuple.sv),
            );
        }
        for m in &tuple.sm {
            if !constraint.allowed_molecules.contains(m) {
                report.push(
                    entity.clone(),
                    Rule::MoleculeNotAllowed,
                    format!("`{m}` for `{}` under `{}`", tuple.sv, c.st),
                );
            }
        }
    }
    report.violations
}

/// Duplicate detection that only makes sense on the raw document, before the
/// collections are keyed.
pub(super) fn document_duplicates(doc: &OntologyDocument) -> ValidationReport {
    fn dups(report: &mut ValidationReport, kind: &str, rule: Rule, ids: impl Iterator<Item = String>) {
        let mut seen = HashSet::new();
        for id in ids {
            if !seen.insert(id.clone()) {
                report.push(format!("{kind} `{id}`"), rule, "appears more than once");
            }
        }
    }
    let mut report = ValidationReport::default();
    dups(
        &mut report,
        "class",
        Rule::DuplicateId,
        doc.classes.iter().map(|x| x.id.clone()),
    );
    dups(
        &mut report,
        "template",
        Rule::DuplicateId,
        doc.templates.iter().map(|x| x.id.clone()),
    );
    dups(
        &mut report,
        "variable",
        Rule::DuplicateId,
        doc.variables.iter().map(|x| x.id.clone()),
    );
    dups(
        &mut report,
        "molecule",
        Rule::DuplicateId,
        doc.molecules.iter().map(|x| x.id.clone()),
    );
    dups(
        &mut report,
        "constraint",
        Rule::DuplicateConstraint,
        doc.constraints.iter().map(|x| format!("{}/{}", x.template, x.variable)),
    );
    dups(
        &mut report,
        "concept",
        Rule::DuplicateConcept,
        doc.concepts.iter().map(|x| format!("{}/{}", x.lemma, x.pos)),
    );
    report
}
