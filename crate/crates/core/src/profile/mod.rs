//! Teacher model and teaching-unit model.
//!
//! A [`TeacherProfile`] holds the adaptation-relevant dimensions of a teacher:
//! skills, knowledge levels, behaviours, personality type and tool
//! preferences. Other dimensions are kept as free-text `extensions`. Personal
//! data lives in [`TeacherIdentity`] and never enters the fact store.
//!
//! Profiles map to facts about the subject `teacher:<uid>` with this vocabulary:
//!
//! | predicate              | object                                  |
//! |------------------------|-----------------------------------------|
//! | `has_skill`            | skill                                   |
//! | `knows_level`          | `topic=level`                           |
//! | `knows_level_<topic>`  | level                                   |
//! | `behaves`              | `aspect=style`                          |
//! | `perceives` `inputs` `reasons` `processes` `understands` | pole  |
//! | `strength`             | `axis=band`                             |
//! | `personality`          | `absent` or `declared`                  |
//! | `knows_tool`           | tool                                    |
//! | `wishes_functionality` | functionality                           |
//! | `extension`            | `"dimension=free text"`                 |

mod method;
mod personality;
mod registry;
mod unit;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::facts::{Fact, FactSet, Ident, Value};
use crate::macros::name_enum;

pub use method::{
    MethodDefinition, MethodFileError, MethodStep, Modality, PresentationCatalog, PresentationOrder,
    PresentationSection, SectionKind,
};
pub use personality::{Axis, PersonalityType, Pole, Strength};
pub use registry::{RegistryError, TopicRegistry};
pub use unit::{facts_to_unit, unit_to_facts, validate_unit, Hours, Resource, TeachingUnit, UnitError};

/// Opaque numeric teacher identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Uid(pub u64);

impl Uid {
    /// Fact subject for this teacher: `teacher:<uid>`.
    pub fn subject(self) -> Ident {
        Ident::new(format!("teacher:{}", self.0)).expect("teacher subject is an identifier")
    }
}

impl fmt::Display for Uid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Personal data used at registration and login. Kept in the credentials
/// store only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeacherIdentity {
    pub uid: Uid,
    pub name: String,
    pub surname: String,
    pub email: String,
    pub password_hash: String,
}

name_enum! {
    pub enum KnowledgeLevel {
        None => "none",
        Little => "little",
        Working => "working",
        Expert => "expert",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeEntry {
    pub topic: String,
    pub level: KnowledgeLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviourEntry {
    pub aspect: String,
    pub style: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolPreference {
    #[serde(default)]
    pub known_tools: Vec<String>,
    #[serde(default)]
    pub wished_functionalities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeacherProfile {
    pub uid: Uid,
    #[serde(default)]
    pub skills: Vec<String>,
    #[serde(default)]
    pub knowledge: Vec<KnowledgeEntry>,
    #[serde(default)]
    pub behaviours: Vec<BehaviourEntry>,
    #[serde(default)]
    pub personality: Option<PersonalityType>,
    #[serde(default)]
    pub tools: ToolPreference,
    #[serde(default)]
    pub extensions: BTreeMap<String, String>,
}

impl TeacherProfile {
    /// A profile with nothing filled in.
    pub fn empty(uid: Uid) -> Self {
        TeacherProfile {
            uid,
            skills: Vec::new(),
            knowledge: Vec::new(),
            behaviours: Vec::new(),
            personality: None,
            tools: ToolPreference::default(),
            extensions: BTreeMap::new(),
        }
    }

    pub fn level(&self, topic: &str) -> Option<KnowledgeLevel> {
        self.knowledge.iter().find(|k| k.topic == topic).map(|k| k.level)
    }

    /// Canonical form: lists sorted, registry topics without an entry filled
    /// with `none`. This is what a fact round trip returns.
    pub fn normalized(&self, registry: &TopicRegistry) -> TeacherProfile {
        let mut p = self.clone();
        p.skills.sort();
        p.skills.dedup();
        for topic in registry.topics() {
            if p.level(topic).is_none() {
                p.knowledge.push(KnowledgeEntry { topic: topic.clone(), level: KnowledgeLevel::None });
            }
        }
        p.knowledge.sort_by(|a, b| a.topic.cmp(&b.topic));
        p.behaviours.sort_by(|a, b| a.aspect.cmp(&b.aspect));
        p.tools.known_tools.sort();
        p.tools.known_tools.dedup();
        p.tools.wished_functionalities.sort();
        p.tools.wished_functionalities.dedup();
        p
    }

    /// True when the profile carries no information beyond registry defaults.
    pub fn is_standard(&self, registry: &TopicRegistry) -> bool {
        self.normalized(registry) == default_profile(self.uid, registry)
    }
}

/// `[A-Za-z0-9_-]+`: the names used for topics, skills, tools and the like.
pub(crate) fn is_name_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// One broken invariant, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    pub(crate) fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation { field: field.into(), rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

fn check_names<'a>(
    field: &str,
    what: &str,
    names: impl IntoIterator<Item = &'a str>,
    out: &mut Vec<Violation>,
) {
    let mut seen = BTreeSet::new();
    for (i, name) in names.into_iter().enumerate() {
        if !is_name_token(name) {
            out.push(Violation::new(format!("{field}[{i}]"), format!("{name:?} is not a valid {what} name")));
        } else if !seen.insert(name) {
            out.push(Violation::new(format!("{field}[{i}]"), format!("duplicate {what} {name}")));
        }
    }
}

/// Checks every profile invariant. An empty report means the profile is valid.
pub fn validate_profile(profile: &TeacherProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    check_names("skills", "skill", profile.skills.iter().map(String::as_str), &mut out);
    check_names("knowledge", "topic", profile.knowledge.iter().map(|k| k.topic.as_str()), &mut out);
    check_names("behaviours", "aspect", profile.behaviours.iter().map(|b| b.aspect.as_str()), &mut out);
    for (i, b) in profile.behaviours.iter().enumerate() {
        if !is_name_token(&b.style) {
            out.push(Violation::new(format!("behaviours[{i}].style"), format!("{:?} is not a valid style name", b.style)));
        }
    }
    check_names("tools.known_tools", "tool", profile.tools.known_tools.iter().map(String::as_str), &mut out);
    check_names(
        "tools.wished_functionalities",
        "functionality",
        profile.tools.wished_functionalities.iter().map(String::as_str),
        &mut out,
    );
    if let Some(p) = &profile.personality {
        for axis in Axis::ALL {
            let pole = p.pole(*axis);
            if pole.axis() != *axis {
                out.push(Violation::new(
                    format!("personality.{axis}"),
                    format!("pole {pole} belongs to axis {}", pole.axis()),
                ));
            }
        }
        if p.strengths.contains_key(&Axis::Reasoning) {
            out.push(Violation::new(
                "personality.strengths.reasoning",
                "strengths exist only for questionnaire-derived axes",
            ));
        }
    }
    for key in profile.extensions.keys() {
        if !is_name_token(key) {
            out.push(Violation::new(format!("extensions.{key}"), "dimension name must be a name token"));
        }
    }
    out
}

/// The standard profile used when a teacher fills nothing in: every registry
/// topic at level `none`, nothing else.
pub fn default_profile(uid: Uid, registry: &TopicRegistry) -> TeacherProfile {
    TeacherProfile::empty(uid).normalized(registry)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("invalid profile: {0}")]
    Invalid(Violation),
    #[error("conflicting knowledge levels for topic {topic}")]
    ConflictingLevel { topic: String },
    #[error("conflicting values for personality axis {axis}")]
    ConflictingAxis { axis: Axis },
    #[error("conflicting styles for behaviour aspect {aspect}")]
    ConflictingBehaviour { aspect: String },
    #[error("incomplete personality: axis {axis} missing")]
    IncompletePersonality { axis: Axis },
    #[error("personality marked absent but axis {axis} is set")]
    AbsentPersonalityWithAxis { axis: Axis },
    #[error("malformed fact `{fact}`: {reason}")]
    Malformed { fact: String, reason: String },
}

fn name_ident(s: &str) -> Value {
    Value::Ident(Ident::new(s).expect("name tokens are identifiers"))
}

/// Maps a valid profile to facts. Registry topics without an entry are
/// materialized at level `none`, so an empty profile and the default profile
/// produce the same facts. No personal data is ever emitted.
pub fn profile_to_facts(profile: &TeacherProfile, registry: &TopicRegistry) -> Result<FactSet, ProfileError> {
    if let Some(v) = validate_profile(profile).into_iter().next() {
        return Err(ProfileError::Invalid(v));
    }
    let p = profile.normalized(registry);
    let subject = p.uid.subject();
    let fact = |predicate: &str, object: Value| {
        Fact::new(subject.clone(), Ident::new(predicate).expect("vocabulary predicate"), object)
    };

    let mut fs = FactSet::new();
    fs.extend(p.skills.iter().map(|s| fact("has_skill", name_ident(s))));
    for k in &p.knowledge {
        fs.insert(fact("knows_level", name_ident(&format!("{}={}", k.topic, k.level))));
        fs.insert(fact(&format!("knows_level_{}", k.topic), name_ident(k.level.as_str())));
    }
    fs.extend(p.behaviours.iter().map(|b| fact("behaves", name_ident(&format!("{}={}", b.aspect, b.style)))));
    match &p.personality {
        None => {
            fs.insert(fact("personality", Value::ident("absent")));
        }
        Some(pt) => {
            fs.insert(fact("personality", Value::ident("declared")));
            for axis in Axis::ALL {
                fs.insert(fact(axis.predicate(), name_ident(pt.pole(*axis).as_str())));
            }
            for (axis, strength) in &pt.strengths {
                fs.insert(fact("strength", name_ident(&format!("{axis}={strength}"))));
            }
        }
    }
    fs.extend(p.tools.known_tools.iter().map(|t| fact("knows_tool", name_ident(t))));
    fs.extend(p.tools.wished_functionalities.iter().map(|t| fact("wishes_functionality", name_ident(t))));
    fs.extend(p.extensions.iter().map(|(k, v)| fact("extension", Value::Text(format!("{k}={v}")))));
    Ok(fs)
}

/// Result of decoding facts into a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedProfile {
    pub profile: TeacherProfile,
    /// Facts outside the vocabulary or about another subject.
    pub ignored: Vec<Fact>,
}

/// Inverse of [`profile_to_facts`]. An empty fact list yields the default
/// profile; the result is always in [`TeacherProfile::normalized`] form.
pub fn facts_to_profile(uid: Uid, facts: &FactSet, registry: &TopicRegistry) -> Result<DecodedProfile, ProfileError> {
    let subject = uid.subject();
    let mut profile = TeacherProfile::empty(uid);
    let mut ignored = Vec::new();
    let mut levels: BTreeMap<String, KnowledgeLevel> = BTreeMap::new();
    let mut behaviours: BTreeMap<String, String> = BTreeMap::new();
    let mut poles: BTreeMap<Axis, Pole> = BTreeMap::new();
    let mut strengths: BTreeMap<Axis, Strength> = BTreeMap::new();
    let mut marker: Option<bool> = None;

    let malformed = |f: &Fact, reason: &str| ProfileError::Malformed { fact: f.to_string(), reason: reason.to_string() };

    for f in facts {
        if f.subject != subject {
            ignored.push(f.clone());
            continue;
        }
        let pred = f.predicate.as_str();
        let obj_name = || -> Result<&str, ProfileError> {
            match f.object.as_ident() {
                Some(id) => Ok(id.as_str()),
                None => Err(malformed(f, "object must be an identifier")),
            }
        };
        let pair = || -> Result<(&str, &str), ProfileError> {
            obj_name()?.split_once('=').ok_or_else(|| malformed(f, "object must have the form key=value"))
        };
        let mut set_level = |topic: &str, level: &str| -> Result<(), ProfileError> {
            let level: KnowledgeLevel = level.parse().map_err(|_| malformed(f, "unknown knowledge level"))?;
            match levels.insert(topic.to_string(), level) {
                Some(prev) if prev != level => Err(ProfileError::ConflictingLevel { topic: topic.to_string() }),
                _ => Ok(()),
            }
        };

        match pred {
            "has_skill" => profile.skills.push(obj_name()?.to_string()),
            "knows_level" => {
                let (topic, level) = pair()?;
                set_level(topic, level)?;
            }
            "behaves" => {
                let (aspect, style) = pair()?;
                if let Some(prev) = behaviours.insert(aspect.to_string(), style.to_string()) {
                    if prev != style {
                        return Err(ProfileError::ConflictingBehaviour { aspect: aspect.to_string() });
                    }
                }
            }
            "strength" => {
                let (axis, band) = pair()?;
                let axis: Axis = axis.parse().map_err(|_| malformed(f, "unknown axis"))?;
                let band: Strength = band.parse().map_err(|_| malformed(f, "unknown strength"))?;
                if strengths.insert(axis, band).is_some_and(|prev| prev != band) {
                    return Err(ProfileError::ConflictingAxis { axis });
                }
            }
            "personality" => {
                let declared = match obj_name()? {
                    "absent" => false,
                    "declared" => true,
                    _ => return Err(malformed(f, "expected absent or declared")),
                };
                if marker.replace(declared).is_some_and(|prev| prev != declared) {
                    return Err(malformed(f, "personality both absent and declared"));
                }
            }
            "knows_tool" => profile.tools.known_tools.push(obj_name()?.to_string()),
            "wishes_functionality" => profile.tools.wished_functionalities.push(obj_name()?.to_string()),
            "extension" => {
                let text = f.object.as_text().ok_or_else(|| malformed(f, "extension must be text"))?;
                let (k, v) = text.split_once('=').ok_or_else(|| malformed(f, "extension must be dimension=text"))?;
                profile.extensions.insert(k.to_string(), v.to_string());
            }
            _ => {
                if let Some(topic) = pred.strip_prefix("knows_level_") {
                    let level = obj_name()?;
                    set_level(topic, level)?;
                } else if let Some(axis) = Axis::ALL.iter().copied().find(|a| a.predicate() == pred) {
                    let pole: Pole = obj_name()?.parse().map_err(|_| malformed(f, "unknown pole"))?;
                    if pole.axis() != axis {
                        return Err(malformed(f, "pole belongs to another axis"));
                    }
                    if poles.insert(axis, pole).is_some_and(|prev| prev != pole) {
                        return Err(ProfileError::ConflictingAxis { axis });
                    }
                } else {
                    ignored.push(f.clone());
                }
            }
        }
    }

    profile.knowledge = levels.into_iter().map(|(topic, level)| KnowledgeEntry { topic, level }).collect();
    profile.behaviours = behaviours.into_iter().map(|(aspect, style)| BehaviourEntry { aspect, style }).collect();

    if marker == Some(false) {
        if let Some(axis) = poles.keys().chain(strengths.keys()).next() {
            return Err(ProfileError::AbsentPersonalityWithAxis { axis: *axis });
        }
    } else if !poles.is_empty() || marker == Some(true) {
        let get = |axis: Axis| poles.get(&axis).copied().ok_or(ProfileError::IncompletePersonality { axis });
        profile.personality = Some(PersonalityType {
            perception: get(Axis::Perception)?,
            input: get(Axis::Input)?,
            reasoning: get(Axis::Reasoning)?,
            processing: get(Axis::Processing)?,
            understanding: get(Axis::Understanding)?,
            strengths,
        });
    }

    if let Some(v) = validate_profile(&profile).into_iter().next() {
        return Err(ProfileError::Invalid(v));
    }
    Ok(DecodedProfile { profile: profile.normalized(registry), ignored })
}
