use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::macros::name_enum;

name_enum! {
    /// The five learning-style axes.
    pub enum Axis {
        Perception => "perception",
        Input => "input",
        Reasoning => "reasoning",
        Processing => "processing",
        Understanding => "understanding",
    }
}

name_enum! {
    /// Either end of an [`Axis`].
    pub enum Pole {
        Sensory => "sensory",
        Intuitive => "intuitive",
        Visual => "visual",
        Verbal => "verbal",
        Inductive => "inductive",
        Deductive => "deductive",
        Active => "active",
        Reflexive => "reflexive",
        Sequential => "sequential",
        Global => "global",
    }
}

impl Pole {
    pub fn axis(self) -> Axis {
        match self {
            Pole::Sensory | Pole::Intuitive => Axis::Perception,
            Pole::Visual | Pole::Verbal => Axis::Input,
            Pole::Inductive | Pole::Deductive => Axis::Reasoning,
            Pole::Active | Pole::Reflexive => Axis::Processing,
            Pole::Sequential | Pole::Global => Axis::Understanding,
        }
    }

    pub fn opposite(self) -> Pole {
        match self {
            Pole::Sensory => Pole::Intuitive,
            Pole::Intuitive => Pole::Sensory,
            Pole::Visual => Pole::Verbal,
            Pole::Verbal => Pole::Visual,
            Pole::Inductive => Pole::Deductive,
            Pole::Deductive => Pole::Inductive,
            Pole::Active => Pole::Reflexive,
            Pole::Reflexive => Pole::Active,
            Pole::Sequential => Pole::Global,
            Pole::Global => Pole::Sequential,
        }
    }
}

impl Axis {
    /// The two poles; the first is the one a positive questionnaire score points to.
    pub fn poles(self) -> [Pole; 2] {
        match self {
            Axis::Perception => [Pole::Sensory, Pole::Intuitive],
            Axis::Input => [Pole::Visual, Pole::Verbal],
            Axis::Reasoning => [Pole::Inductive, Pole::Deductive],
            Axis::Processing => [Pole::Active, Pole::Reflexive],
            Axis::Understanding => [Pole::Sequential, Pole::Global],
        }
    }

    /// Fact predicate carrying the pole for this axis.
    pub fn predicate(self) -> &'static str {
        match self {
            Axis::Perception => "perceives",
            Axis::Input => "inputs",
            Axis::Reasoning => "reasons",
            Axis::Processing => "processes",
            Axis::Understanding => "understands",
        }
    }
}

name_enum! {
    pub enum Strength {
        Balanced => "balanced",
        Moderate => "moderate",
        Strong => "strong",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonalityType {
    pub perception: Pole,
    pub input: Pole,
    pub reasoning: Pole,
    pub processing: Pole,
    pub understanding: Pole,
    /// Only filled for axes derived from the questionnaire.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub strengths: BTreeMap<Axis, Strength>,
}

impl PersonalityType {
    /// Self-declared type, without strengths.
    pub fn declared(perception: Pole, input: Pole, reasoning: Pole, processing: Pole, understanding: Pole) -> Self {
        PersonalityType { perception, input, reasoning, processing, understanding, strengths: BTreeMap::new() }
    }

    pub fn pole(&self, axis: Axis) -> Pole {
        match axis {
            Axis::Perception => self.perception,
            Axis::Input => self.input,
            Axis::Reasoning => self.reasoning,
            Axis::Processing => self.processing,
            Axis::Understanding => self.understanding,
        }
    }

    pub fn poles(&self) -> [Pole; 5] {
        [self.perception, self.input, self.reasoning, self.processing, self.understanding]
    }
}
