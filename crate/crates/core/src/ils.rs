//! Scoring of the 44-item two-choice learning-style questionnaire.
//!
//! Eleven items per axis (processing, perception, input, understanding). An
//! axis value is the number of answers favouring the axis' first pole minus
//! the number favouring the second, so complete sheets give odd values in
//! `[-11, 11]`. The reasoning axis is not covered by the instrument and is
//! always taken from the teacher's own declaration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::macros::name_enum;
use crate::profile::{Axis, PersonalityType, Pole, Strength};

pub const ITEM_COUNT: u32 = 44;
pub const ITEMS_PER_AXIS: usize = 11;

/// Axes scored by the questionnaire, in output order.
pub const SCORED_AXES: [Axis; 4] = [Axis::Processing, Axis::Perception, Axis::Input, Axis::Understanding];

name_enum! {
    pub enum Choice {
        A => "a",
        B => "b",
    }
}

impl Choice {
    pub fn flipped(self) -> Choice {
        match self {
            Choice::A => Choice::B,
            Choice::B => Choice::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionItem {
    pub item_id: u32,
    pub axis: Axis,
    /// Pole an "a" answer favours.
    pub pole_of_a: Pole,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireDefinition {
    pub items: Vec<QuestionItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuestionnaireFileError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("questionnaire: {0}")]
    Shape(String),
}

impl QuestionnaireDefinition {
    /// Parses `item_id | axis | pole_of_a | prompt` records.
    pub fn parse(text: &str) -> Result<Self, QuestionnaireFileError> {
        let mut items = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| QuestionnaireFileError::Line { line: idx + 1, message };
            let mut parts = line.splitn(4, '|').map(str::trim);
            let (Some(id), Some(axis), Some(pole), Some(prompt)) = (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(bad("expected `item_id | axis | pole_of_a | prompt`".into()));
            };
            let item_id: u32 = id.parse().map_err(|_| bad(format!("invalid item id {id:?}")))?;
            let axis: Axis = axis.parse().map_err(|e| bad(format!("{e}")))?;
            let pole_of_a: Pole = pole.parse().map_err(|e| bad(format!("{e}")))?;
            if pole_of_a.axis() != axis {
                return Err(bad(format!("pole {pole_of_a} is not on axis {axis}")));
            }
            items.push(QuestionItem { item_id, axis, pole_of_a, prompt: prompt.to_string() });
        }
        let def = QuestionnaireDefinition { items };
        def.check()?;
        Ok(def)
    }

    pub fn shipped() -> Self {
        Self::parse(include_str!("../../../config/ils-44.txt")).expect("shipped questionnaire parses")
    }

    fn check(&self) -> Result<(), QuestionnaireFileError> {
        let shape = |m: String| Err(QuestionnaireFileError::Shape(m));
        if self.items.len() != ITEM_COUNT as usize {
            return shape(format!("{} items instead of {ITEM_COUNT}", self.items.len()));
        }
        let mut ids: Vec<u32> = self.items.iter().map(|i| i.item_id).collect();
        ids.sort_unstable();
        if ids != (1..=ITEM_COUNT).collect::<Vec<_>>() {
            return shape("item ids must be exactly 1..44".into());
        }
        for axis in SCORED_AXES {
            let n = self.items.iter().filter(|i| i.axis == axis).count();
            if n != ITEMS_PER_AXIS {
                return shape(format!("axis {axis} has {n} items instead of {ITEMS_PER_AXIS}"));
            }
        }
        if let Some(item) = self.items.iter().find(|i| !SCORED_AXES.contains(&i.axis)) {
            return shape(format!("item {} is on unscored axis {}", item.item_id, item.axis));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSheet {
    pub answers: BTreeMap<u32, Choice>,
}

impl AnswerSheet {
    pub fn uniform(choice: Choice) -> Self {
        AnswerSheet { answers: (1..=ITEM_COUNT).map(|i| (i, choice)).collect() }
    }

    /// Item ids of `def` with no answer, ascending.
    pub fn missing(&self, def: &QuestionnaireDefinition) -> Vec<u32> {
        let mut ids: Vec<u32> =
            def.items.iter().map(|i| i.item_id).filter(|id| !self.answers.contains_key(id)).collect();
        ids.sort_unstable();
        ids
    }

    pub fn is_complete(&self, def: &QuestionnaireDefinition) -> bool {
        self.missing(def).is_empty()
    }

    pub fn flipped(&self) -> Self {
        AnswerSheet { answers: self.answers.iter().map(|(k, c)| (*k, c.flipped())).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisScore {
    pub axis: Axis,
    /// Positive values favour the axis' first pole.
    pub value: i32,
    pub strength: Strength,
}

/// Band of a score magnitude: 1-3 balanced, 5-7 moderate, 9-11 strong.
pub fn strength_of(value: i32) -> Strength {
    match value.unsigned_abs() {
        0..=3 => Strength::Balanced,
        4..=7 => Strength::Moderate,
        _ => Strength::Strong,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IlsError {
    #[error("incomplete answer sheet, missing items {missing:?}")]
    Incomplete { missing: Vec<u32> },
    #[error("answer for unknown item {0}")]
    UnknownItem(u32),
    #[error("no score for axis {axis}")]
    MissingAxis { axis: Axis },
    #[error("score for axis {axis} is zero and favours no pole")]
    Undecided { axis: Axis },
    #[error("{0} is not a reasoning pole")]
    NotReasoning(Pole),
}

/// Scores a complete sheet: one [`AxisScore`] per scored axis, in
/// [`SCORED_AXES`] order.
pub fn score(sheet: &AnswerSheet, def: &QuestionnaireDefinition) -> Result<Vec<AxisScore>, IlsError> {
    let missing = sheet.missing(def);
    if !missing.is_empty() {
        return Err(IlsError::Incomplete { missing });
    }
    if let Some(id) = sheet.answers.keys().find(|id| !def.items.iter().any(|i| i.item_id == **id)) {
        return Err(IlsError::UnknownItem(*id));
    }
    let mut values: BTreeMap<Axis, i32> = SCORED_AXES.iter().map(|a| (*a, 0)).collect();
    for item in &def.items {
        let favoured = match sheet.answers[&item.item_id] {
            Choice::A => item.pole_of_a,
            Choice::B => item.pole_of_a.opposite(),
        };
        let delta = if favoured == item.axis.poles()[0] { 1 } else { -1 };
        *values.get_mut(&item.axis).expect("scored axis") += delta;
    }
    Ok(SCORED_AXES
        .iter()
        .map(|axis| {
            let value = values[axis];
            AxisScore { axis: *axis, value, strength: strength_of(value) }
        })
        .collect())
}

/// Turns questionnaire scores plus the declared reasoning pole into a
/// personality type. Strengths are recorded for the four scored axes only.
pub fn classify(scores: &[AxisScore], declared_reasoning: Pole) -> Result<PersonalityType, IlsError> {
    if declared_reasoning.axis() != Axis::Reasoning {
        return Err(IlsError::NotReasoning(declared_reasoning));
    }
    let mut strengths = BTreeMap::new();
    let mut pole_for = |axis: Axis| -> Result<Pole, IlsError> {
        let s = scores.iter().find(|s| s.axis == axis).ok_or(IlsError::MissingAxis { axis })?;
        let [first, second] = axis.poles();
        let pole = match s.value.signum() {
            1 => first,
            -1 => second,
            _ => return Err(IlsError::Undecided { axis }),
        };
        strengths.insert(axis, s.strength);
        Ok(pole)
    };
    let perception = pole_for(Axis::Perception)?;
    let input = pole_for(Axis::Input)?;
    let processing = pole_for(Axis::Processing)?;
    let understanding = pole_for(Axis::Understanding)?;
    Ok(PersonalityType { perception, input, reasoning: declared_reasoning, processing, understanding, strengths })
}
