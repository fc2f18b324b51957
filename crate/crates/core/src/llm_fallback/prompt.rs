//! Few-shot prompt construction for the two fallback stages.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::FallbackError;
use crate::ontology::{ConceptEntry, Ontology, PartOfSpeech};

/// Context, instructions and worked examples; `rendered` is what the
/// provider sees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prompt {
    pub context: String,
    pub instructions: String,
    pub examples: Vec<(String, String)>,
    pub rendered: String,
}

impl Prompt {
    fn new(context: String, instructions: String, examples: Vec<(String, String)>) -> Self {
        let mut p = Self {
            context,
            instructions,
            examples,
            rendered: String::new(),
        };
        p.render();
        p
    }

    fn render(&mut self) {
        let mut out = self.context.clone();
        out.push_str("\n\nExamples:\n");
        for (word, answer) in &self.examples {
            out.push_str(&format!("{word} => {answer}\n"));
        }
        out.push('\n');
        out.push_str(&self.instructions);
        self.rendered = out;
    }

    /// Copy of the prompt with rejected-answer feedback added to the
    /// instructions.
    pub fn with_feedback(&self, violations: &[String]) -> Self {
        let mut p = self.clone();
        if violations.is_empty() {
            return p;
        }
        p.instructions.push_str("\nYour previous answer was rejected:");
        for v in violations {
            p.instructions.push_str("\n- ");
            p.instructions.push_str(v);
        }
        p.instructions.push_str("\nAnswer again using only the allowed values.");
        p.render();
        p
    }
}

fn rng_for(lemma: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(Sha256::digest(lemma.as_bytes()).into())
}

fn sc_st_json(c: &ConceptEntry) -> String {
    serde_json::json!({ "SC": c.sc, "ST": c.st }).to_string()
}

/// Key/value JSON in the stage-two response format, pairs in slot order.
pub fn sv_sm_json(c: &ConceptEntry) -> String {
    let body: Vec<String> = c
        .explication
        .iter()
        .zip(1..)
        .map(|(t, n)| {
            format!(
                "\"Key{n}\":{},\"Value{n}\":{}",
                serde_json::Value::from(t.sv.as_str()),
                serde_json::Value::from(t.sm.join("; "))
            )
        })
        .collect();
    format!("{{{}}}", body.join(","))
}

pub fn build_prompt_sc_st(
    lemma: &str,
    pos: PartOfSpeech,
    o: &Ontology,
    k_examples: usize,
) -> Result<Prompt, FallbackError> {
    let pool: Vec<&ConceptEntry> = o.concepts_of_pos(pos).filter(|c| c.lemma != lemma).collect();
    if k_examples == 0 || pool.len() < k_examples {
        return Err(FallbackError::InsufficientExamples {
            pos,
            needed: k_examples.max(1),
            available: pool.len(),
        });
    }
    let examples = pool
        .choose_multiple(&mut rng_for(lemma), k_examples)
        .map(|c| (c.lemma.clone(), sc_st_json(c)))
        .collect();

    let mut inventory = String::new();
    for class in o.classes.values().filter(|c| c.pos_domain == pos) {
        let templates: Vec<&str> = o
            .templates
            .values()
            .filter(|t| t.parent_class == class.id)
            .map(|t| t.id.as_str())
            .collect();
        inventory.push_str(&format!("\nSC {}: ST one of [{}]", class.id, templates.join(", ")));
    }
    let context = format!(
        "Imagine the human annotator has been given the task to hierarchically break down a word into 2 levels.\n\
         Level 1 is the broad category of the word and is referred to as SC.\n\
         Level 2 is the narrow category of the word and is referred to as ST.\n\
         Allowed categories for a {pos}:{inventory}"
    );
    let instructions = format!(
        "Now considering the examples as illustrated, use your inferencing to find the SC and ST for the word <<{lemma}>>.\n\
         Respond with one JSON object of the form {{\"SC\":\"...\",\"ST\":\"...\"}}."
    );
    Ok(Prompt::new(context, instructions, examples))
}

pub fn build_prompt_svsm(lemma: &str, st: &str, o: &Ontology, k_examples: usize) -> Result<Prompt, FallbackError> {
    let template = o
        .templates
        .get(st)
        .ok_or_else(|| FallbackError::UnknownTemplate(st.to_owned()))?;
    let constraints = o.constraints_for(st);
    if constraints.is_empty() {
        return Err(FallbackError::UnknownTemplate(st.to_owned()));
    }

    let keys = template.variable_slots.join(", ");
    let mut values: Vec<&str> = constraints
        .iter()
        .flat_map(|c| c.allowed_molecules.iter().map(String::as_str))
        .collect();
    values.sort_unstable();
    values.dedup();
    let combos: Vec<String> = template
        .variable_slots
        .iter()
        .filter_map(|sv| constraints.iter().find(|c| &c.variable == sv))
        .map(|c| {
            let allowed: Vec<&str> = c.allowed_molecules.iter().map(String::as_str).collect();
            format!("{} -> {{{}}}", c.variable, allowed.join(", "))
        })
        .collect();

    let pool: Vec<&ConceptEntry> = o.concepts.values().filter(|c| c.st == st && c.lemma != lemma).collect();
    let examples = pool
        .choose_multiple(&mut rng_for(lemma), k_examples.min(pool.len()))
        .map(|c| (c.lemma.clone(), sv_sm_json(c)))
        .collect();

    let context = format!(
        "Imagine the human annotator has been given the task to explain the semantic meaning of the word <<{lemma}>>, using Key-Value pairs.\n\
         Keys to be considered should be from the predefined set of values [{keys}].\n\
         Values considered should be from the predefined set of values [{}].\n\
         Each semantic variable can only take limited values from semantic molecule sets as illustrated:\n{}",
        values.join(", "),
        combos.join("\n")
    );
    let instructions = format!(
        "Now considering the examples and constraints as illustrated use your inferencing to find the Key-Value pairs for the word <<{lemma}>>.\n\
         When there are multiple Key-Value pairs, use Key1, Value1, Key2, Value2 in your response.\n\
         Respond with one JSON object. A value made of several molecules lists them in order separated by \"; \"."
    );
    Ok(Prompt::new(context, instructions, examples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_one_prompt() {
        let o = Ontology::seed();
        let p = build_prompt_sc_st("mandi", PartOfSpeech::Noun, &o, 3).unwrap();
        assert_eq!(p.examples.len(), 3);
        assert!(p.rendered.contains("<<mandi>>"));
        assert!(p.rendered.contains("2 levels"));
        assert!(p.rendered.contains(&p.context) && p.rendered.contains(&p.instructions));
        for (word, answer) in &p.examples {
            assert!(p.rendered.contains(&format!("{word} => {answer}")));
        }
        assert_eq!(p, build_prompt_sc_st("mandi", PartOfSpeech::Noun, &o, 3).unwrap());
        assert_ne!(
            p.rendered,
            build_prompt_sc_st("bazaar", PartOfSpeech::Noun, &o, 3)
                .unwrap()
                .rendered
        );
    }

    #[test]
    fn stage_one_never_shows_the_query() {
        let o = Ontology::seed();
        let n = o.concepts_of_pos(PartOfSpeech::Noun).count();
        let p = build_prompt_sc_st("market", PartOfSpeech::Noun, &o, n - 1).unwrap();
        assert!(p.examples.iter().all(|(w, _)| w != "market"));
        assert!(build_prompt_sc_st("market", PartOfSpeech::Noun, &o, n).is_err());
    }

    #[test]
    fn stage_one_guards() {
        let o = Ontology::seed();
        assert!(matches!(
            build_prompt_sc_st("mandi", PartOfSpeech::Noun, &o, 0),
            Err(FallbackError::InsufficientExamples { .. })
        ));
        assert!(matches!(
            build_prompt_sc_st("mandi", PartOfSpeech::Noun, &Ontology::default(), 1),
            Err(FallbackError::InsufficientExamples { available: 0, .. })
        ));
    }

    #[test]
    fn stage_two_prompt() {
        let o = Ontology::seed();
        let p = build_prompt_svsm("mandi", "commercial", &o, 5).unwrap();
        assert!(p.rendered.contains("purpose -> {"));
        assert!(p.rendered.contains("business"));
        assert!(p.rendered.contains("Key1, Value1"));
        assert!(p.examples.iter().any(|(w, _)| w == "market"));
        assert!(matches!(
            build_prompt_svsm("mandi", "nope", &o, 5),
            Err(FallbackError::UnknownTemplate(_))
        ));
    }

    #[test]
    fn stage_two_json_keeps_pair_order() {
        let o = Ontology::seed();
        let moto = o.lookup("motorcycle", PartOfSpeech::Noun).unwrap();
        assert_eq!(
            sv_sm_json(moto),
            r#"{"Key1":"category","Value1":"private transport","Key2":"wheels","Value2":"two"}"#
        );
    }
}
