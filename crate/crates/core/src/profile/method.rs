//! Pedagogical method definitions and presentation sections.
//!
//! Method file:
//!
//! ```text
//! method <method_id> | <name>
//! [steps]
//! <step_id> | <name> | <weight> | <delivery>,<delivery>,...
//! [sections]
//! <section_id> | principle|example | <modality>=<locator>,...
//! ```
//!
//! Presentation catalog file: `[topic <topic_id>]` headers, each followed by
//! section lines in the same format. `#` starts a comment line.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::is_name_token;
use crate::macros::name_enum;

name_enum! {
    pub enum Modality {
        Audio => "audio",
        Video => "video",
        Text => "text",
    }
}

name_enum! {
    /// Order of principle and example sections in a presentation.
    pub enum PresentationOrder {
        /// Principles first.
        Deductive => "deductive",
        /// Examples first.
        Inductive => "inductive",
    }
}

name_enum! {
    pub enum SectionKind {
        Principle => "principle",
        Example => "example",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationSection {
    pub section_id: String,
    pub kind: SectionKind,
    /// Placeholder media locator per modality; always has a `text` entry.
    pub media: BTreeMap<Modality, String>,
}

impl PresentationSection {
    /// Locator for `modality`, falling back to the text locator.
    pub fn locator(&self, modality: Modality) -> (Modality, &str) {
        match self.media.get(&modality) {
            Some(loc) => (modality, loc),
            None => (Modality::Text, &self.media[&Modality::Text]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodStep {
    pub step_id: String,
    pub name: String,
    /// Relative share of practical time; normalized at use.
    pub weight: Ratio<i64>,
    pub deliveries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDefinition {
    pub method_id: String,
    pub name: String,
    pub steps: Vec<MethodStep>,
    pub presentation_sections: Vec<PresentationSection>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct MethodFileError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> MethodFileError {
    MethodFileError { line, message: message.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn fields(line: &str) -> Vec<&str> {
    line.split('|').map(str::trim).collect()
}

fn parse_weight(s: &str) -> Option<Ratio<i64>> {
    super::Hours::parse(s).map(|h| h.0).filter(|w| *w > Ratio::from_integer(0))
}

fn parse_section(line_no: usize, line: &str) -> Result<PresentationSection, MethodFileError> {
    let f = fields(line);
    let [id, kind, media] = f[..] else {
        return Err(err(line_no, "section needs `section_id | kind | modality=locator,...`"));
    };
    if !is_name_token(id) {
        return Err(err(line_no, format!("invalid section id {id:?}")));
    }
    let kind: SectionKind = kind.parse().map_err(|e| err(line_no, format!("{e}")))?;
    let mut map = BTreeMap::new();
    for entry in media.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (m, loc) = entry.split_once('=').ok_or_else(|| err(line_no, format!("media entry {entry:?} lacks `=`")))?;
        let m: Modality = m.trim().parse().map_err(|e| err(line_no, format!("{e}")))?;
        let loc = loc.trim();
        if loc.is_empty() {
            return Err(err(line_no, format!("empty locator for {m}")));
        }
        if map.insert(m, loc.to_string()).is_some() {
            return Err(err(line_no, format!("modality {m} given twice")));
        }
    }
    if !map.contains_key(&Modality::Text) {
        return Err(err(line_no, format!("section {id} has no text locator")));
    }
    Ok(PresentationSection { section_id: id.to_string(), kind, media: map })
}

impl MethodDefinition {
    pub fn parse(text: &str) -> Result<Self, MethodFileError> {
        #[derive(PartialEq)]
        enum Block {
            Header,
            Steps,
            Sections,
        }
        let mut block = Block::Header;
        let mut header: Option<(String, String)> = None;
        let mut steps: Vec<MethodStep> = Vec::new();
        let mut sections: Vec<PresentationSection> = Vec::new();

        for (n, line) in content_lines(text) {
            match line {
                "[steps]" => {
                    block = Block::Steps;
                    continue;
                }
                "[sections]" => {
                    block = Block::Sections;
                    continue;
                }
                _ => {}
            }
            match block {
                Block::Header => {
                    let rest = line.strip_prefix("method ").ok_or_else(|| err(n, "expected `method <id> | <name>`"))?;
                    let f = fields(rest);
                    let [id, name] = f[..] else { return Err(err(n, "expected `method <id> | <name>`")) };
                    if !is_name_token(id) {
                        return Err(err(n, format!("invalid method id {id:?}")));
                    }
                    header = Some((id.to_string(), name.to_string()));
                }
                Block::Steps => {
                    let f = fields(line);
                    let [id, name, weight, deliveries] = f[..] else {
                        return Err(err(n, "step needs `step_id | name | weight | deliveries`"));
                    };
                    if !is_name_token(id) {
                        return Err(err(n, format!("invalid step id {id:?}")));
                    }
                    if steps.iter().any(|s| s.step_id == id) {
                        return Err(err(n, format!("duplicate step {id}")));
                    }
                    let weight = parse_weight(weight).ok_or_else(|| err(n, format!("weight {weight:?} is not positive")))?;
                    let deliveries: Vec<String> =
                        deliveries.split(',').map(str::trim).filter(|d| !d.is_empty()).map(String::from).collect();
                    if let Some(bad) = deliveries.iter().find(|d| !is_name_token(d)) {
                        return Err(err(n, format!("invalid delivery label {bad:?}")));
                    }
                    steps.push(MethodStep { step_id: id.to_string(), name: name.to_string(), weight, deliveries });
                }
                Block::Sections => {
                    let s = parse_section(n, line)?;
                    if sections.iter().any(|x| x.section_id == s.section_id) {
                        return Err(err(n, format!("duplicate section {}", s.section_id)));
                    }
                    sections.push(s);
                }
            }
        }
        let (method_id, name) = header.ok_or_else(|| err(0, "missing `method` header"))?;
        if steps.is_empty() {
            return Err(err(0, "method defines no steps"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &steps {
            for d in &s.deliveries {
                if !seen.insert(d.as_str()) {
                    return Err(err(0, format!("delivery {d} belongs to several steps")));
                }
            }
        }
        Ok(MethodDefinition { method_id, name, steps, presentation_sections: sections })
    }

    pub fn shipped() -> Self {
        Self::parse(include_str!("../../../../config/maetic.method")).expect("shipped method parses")
    }
}

/// Presentation sections per topic: pedagogies from the catalog file plus the
/// method's own sections under its `method_id`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PresentationCatalog {
    topics: BTreeMap<String, Vec<PresentationSection>>,
}

impl PresentationCatalog {
    pub fn parse(text: &str) -> Result<Self, MethodFileError> {
        let mut topics: BTreeMap<String, Vec<PresentationSection>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (n, line) in content_lines(text) {
            if let Some(rest) = line.strip_prefix("[topic ").and_then(|r| r.strip_suffix(']')) {
                let topic = rest.trim();
                if !is_name_token(topic) {
                    return Err(err(n, format!("invalid topic {topic:?}")));
                }
                if topics.insert(topic.to_string(), Vec::new()).is_some() {
                    return Err(err(n, format!("topic {topic} declared twice")));
                }
                current = Some(topic.to_string());
                continue;
            }
            let topic = current.as_ref().ok_or_else(|| err(n, "section before any `[topic ...]` header"))?;
            let s = parse_section(n, line)?;
            let list = topics.get_mut(topic).expect("current topic exists");
            if list.iter().any(|x| x.section_id == s.section_id) {
                return Err(err(n, format!("duplicate section {}", s.section_id)));
            }
            list.push(s);
        }
        Ok(PresentationCatalog { topics })
    }

    pub fn shipped() -> Self {
        Self::parse(include_str!("../../../../config/pedagogies.sections")).expect("shipped catalog parses")
    }

    /// Adds (or replaces) the method's own presentation under its id.
    pub fn with_method(mut self, method: &MethodDefinition) -> Self {
        self.topics.insert(method.method_id.clone(), method.presentation_sections.clone());
        self
    }

    pub fn sections(&self, topic: &str) -> Option<&[PresentationSection]> {
        self.topics.get(topic).map(Vec::as_slice).filter(|s| !s.is_empty())
    }

    /// Every locator referenced by any section.
    pub fn locators(&self) -> impl Iterator<Item = &str> {
        self.topics.values().flatten().flat_map(|s| s.media.values().map(String::as_str))
    }
}
