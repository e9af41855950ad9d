use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{is_name_token, Violation};
use crate::facts::{Fact, FactSet, Ident, Value};

/// Exact hour count. Serialized as a JSON integer when whole, otherwise as an
/// `"n/d"` string; decimals such as `1.5` are accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hours(pub Ratio<i64>);

impl Hours {
    pub fn whole(h: i64) -> Self {
        Hours(Ratio::from_integer(h))
    }

    pub fn new(numer: i64, denom: i64) -> Self {
        Hours(Ratio::new(numer, denom))
    }

    pub fn is_positive(self) -> bool {
        self.0 > Ratio::from_integer(0)
    }

    fn to_value(self) -> Value {
        if self.0.is_integer() {
            Value::Int(self.0.to_integer())
        } else {
            Value::Rational(self.0)
        }
    }

    /// Parses `26`, `13/2` or `6.5`.
    pub fn parse(s: &str) -> Option<Hours> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let (n, d) = (n.trim().parse::<i64>().ok()?, d.trim().parse::<i64>().ok()?);
            return (d != 0).then(|| Hours::new(n, d));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let scale = 10i64.pow(frac.len() as u32);
            let negative = int.starts_with('-');
            let int: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
            let frac: i64 = frac.parse().ok()?;
            let magnitude = int.abs().checked_mul(scale)?.checked_add(frac)?;
            return Some(Hours::new(if negative { -magnitude } else { magnitude }, scale));
        }
        s.parse::<i64>().ok().map(Hours::whole)
    }
}

impl fmt::Display for Hours {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.to_integer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Hours {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            s.serialize_i64(self.0.to_integer())
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Hours {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Int(i) => Some(Hours::whole(i)),
            // Go through the shortest decimal rendering so 1.5 stays 3/2.
            Raw::Float(x) => Hours::parse(&format!("{x}")),
            Raw::Text(t) => Hours::parse(&t),
        };
        parsed.ok_or_else(|| serde::de::Error::custom("expected hours as a number or \"n/d\""))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub label: String,
    pub locator: String,
}

/// A course offering as described by the teacher.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeachingUnit {
    pub unit_id: String,
    pub title: String,
    #[serde(default)]
    pub domain_project: String,
    #[serde(default)]
    pub client_needs: String,
    pub lecture_hours: Hours,
    pub practical_hours: Hours,
    pub session_duration: Hours,
    pub group_count: u32,
    /// Student names, one list per group.
    pub roster: Vec<Vec<String>>,
    /// Teams to form in each group; 0 for groups the teacher does not supervise.
    pub team_counts: Vec<u32>,
    #[serde(default)]
    pub resources: Vec<Resource>,
    pub method_id: String,
}

impl TeachingUnit {
    pub fn total_teams(&self) -> u32 {
        self.team_counts.iter().sum()
    }
}

pub fn validate_unit(unit: &TeachingUnit) -> Vec<Violation> {
    let mut out = Vec::new();
    if !is_name_token(&unit.unit_id) {
        out.push(Violation::new("unit_id", format!("{:?} is not a valid unit identifier", unit.unit_id)));
    }
    if !is_name_token(&unit.method_id) {
        out.push(Violation::new("method_id", format!("{:?} is not a valid method identifier", unit.method_id)));
    }
    if unit.lecture_hours.0 < Ratio::from_integer(0) {
        out.push(Violation::new("lecture_hours", "must not be negative"));
    }
    if !unit.practical_hours.is_positive() {
        out.push(Violation::new("practical_hours", "must be positive"));
    }
    if !unit.session_duration.is_positive() {
        out.push(Violation::new("session_duration", "must be positive"));
    } else if unit.session_duration > unit.practical_hours {
        out.push(Violation::new("session_duration", "must not exceed practical_hours"));
    }
    if unit.group_count == 0 {
        out.push(Violation::new("group_count", "must be positive"));
    }
    if unit.roster.len() != unit.group_count as usize {
        out.push(Violation::new(
            "roster",
            format!("has {} groups but group_count is {}", unit.roster.len(), unit.group_count),
        ));
    }
    if unit.team_counts.len() != unit.group_count as usize {
        out.push(Violation::new(
            "team_counts",
            format!("has {} entries but group_count is {}", unit.team_counts.len(), unit.group_count),
        ));
    }
    for (g, members) in unit.roster.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for (i, name) in members.iter().enumerate() {
            if name.trim().is_empty() {
                out.push(Violation::new(format!("roster[{g}][{i}]"), "student name is empty"));
            } else if !seen.insert(name.as_str()) {
                out.push(Violation::new(format!("roster[{g}][{i}]"), format!("duplicate student {name:?}")));
            }
        }
        if let Some(&teams) = unit.team_counts.get(g) {
            if teams as usize > members.len() {
                out.push(Violation::new(
                    format!("team_counts[{g}]"),
                    format!("{teams} teams for {} students", members.len()),
                ));
            }
        }
    }
    for (i, r) in unit.resources.iter().enumerate() {
        if r.locator.trim().is_empty() {
            out.push(Violation::new(format!("resources[{i}].locator"), "must not be empty"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnitError {
    #[error("invalid teaching unit: {0}")]
    Invalid(Violation),
    #[error("teaching unit facts: missing {0}")]
    Missing(String),
    #[error("teaching unit facts: malformed `{fact}`: {reason}")]
    Malformed { fact: String, reason: String },
}

// Fact layout for a unit `u`:
//   unit:u               title/domain_project/client_needs (text), *_hours (number),
//                        group_count (int), method (ident)
//   unit:u:group:G       team_count (int), member:I (text)      G, I 1-based
//   unit:u:resource:I    label, locator (text)

fn ident(s: &str) -> Ident {
    Ident::new(s).expect("unit vocabulary is made of identifiers")
}

pub fn unit_to_facts(unit: &TeachingUnit) -> Result<FactSet, UnitError> {
    if let Some(v) = validate_unit(unit).into_iter().next() {
        return Err(UnitError::Invalid(v));
    }
    let root = format!("unit:{}", unit.unit_id);
    let mut fs = FactSet::new();
    let mut put = |subject: &str, predicate: &str, object: Value| {
        fs.insert(Fact::new(ident(subject), ident(predicate), object));
    };
    put(&root, "title", Value::text(&unit.title));
    put(&root, "domain_project", Value::text(&unit.domain_project));
    put(&root, "client_needs", Value::text(&unit.client_needs));
    put(&root, "lecture_hours", unit.lecture_hours.to_value());
    put(&root, "practical_hours", unit.practical_hours.to_value());
    put(&root, "session_duration", unit.session_duration.to_value());
    put(&root, "group_count", Value::Int(unit.group_count.into()));
    put(&root, "method", Value::Ident(ident(&unit.method_id)));
    for (g, members) in unit.roster.iter().enumerate() {
        let subject = format!("{root}:group:{}", g + 1);
        put(&subject, "team_count", Value::Int(unit.team_counts[g].into()));
        for (i, name) in members.iter().enumerate() {
            put(&subject, &format!("member:{}", i + 1), Value::text(name));
        }
    }
    for (i, r) in unit.resources.iter().enumerate() {
        let subject = format!("{root}:resource:{}", i + 1);
        put(&subject, "label", Value::text(&r.label));
        put(&subject, "locator", Value::text(&r.locator));
    }
    Ok(fs)
}

pub fn facts_to_unit(unit_id: &str, facts: &FactSet) -> Result<TeachingUnit, UnitError> {
    let root = format!("unit:{unit_id}");
    let group_prefix = format!("{root}:group:");
    let resource_prefix = format!("{root}:resource:");
    let malformed = |f: &Fact, reason: &str| UnitError::Malformed { fact: f.to_string(), reason: reason.into() };

    let mut scalars: BTreeMap<&str, &Value> = BTreeMap::new();
    let mut groups: BTreeMap<usize, (Option<u32>, BTreeMap<usize, String>)> = BTreeMap::new();
    let mut resources: BTreeMap<usize, (Option<String>, Option<String>)> = BTreeMap::new();

    let index = |f: &Fact, s: &str| -> Result<usize, UnitError> {
        s.parse::<usize>().ok().filter(|i| *i > 0).ok_or_else(|| malformed(f, "bad index"))
    };

    for f in facts {
        let subject = f.subject.as_str();
        let pred = f.predicate.as_str();
        if subject == root {
            scalars.insert(pred, &f.object);
        } else if let Some(g) = subject.strip_prefix(&group_prefix) {
            let entry = groups.entry(index(f, g)?).or_default();
            if pred == "team_count" {
                let Value::Int(n) = f.object else { return Err(malformed(f, "team_count must be an integer")) };
                entry.0 = Some(u32::try_from(n).map_err(|_| malformed(f, "team_count out of range"))?);
            } else if let Some(i) = pred.strip_prefix("member:") {
                let name = f.object.as_text().ok_or_else(|| malformed(f, "member must be text"))?;
                entry.1.insert(index(f, i)?, name.to_string());
            }
        } else if let Some(i) = subject.strip_prefix(&resource_prefix) {
            let entry = resources.entry(index(f, i)?).or_default();
            let text = f.object.as_text().map(str::to_string);
            match pred {
                "label" => entry.0 = text,
                "locator" => entry.1 = text,
                _ => {}
            }
        }
    }

    let text = |key: &str| -> Result<String, UnitError> {
        match scalars.get(key) {
            Some(Value::Text(t)) => Ok(t.clone()),
            _ => Err(UnitError::Missing(key.into())),
        }
    };
    let hours = |key: &str| -> Result<Hours, UnitError> {
        scalars.get(key).and_then(|v| v.as_ratio()).map(Hours).ok_or_else(|| UnitError::Missing(key.into()))
    };
    let group_count = match scalars.get("group_count") {
        Some(Value::Int(n)) => u32::try_from(*n).map_err(|_| UnitError::Missing("group_count".into()))?,
        _ => return Err(UnitError::Missing("group_count".into())),
    };
    let method_id = scalars
        .get("method")
        .and_then(|v| v.as_ident())
        .map(|i| i.to_string())
        .ok_or_else(|| UnitError::Missing("method".into()))?;

    let mut roster = Vec::new();
    let mut team_counts = Vec::new();
    for (pos, (g, (teams, members))) in groups.into_iter().enumerate() {
        if g != pos + 1 {
            return Err(UnitError::Missing(format!("group {}", pos + 1)));
        }
        team_counts.push(teams.ok_or_else(|| UnitError::Missing(format!("team_count of group {g}")))?);
        let mut names = Vec::new();
        for (pos, (i, name)) in members.into_iter().enumerate() {
            if i != pos + 1 {
                return Err(UnitError::Missing(format!("member {} of group {g}", pos + 1)));
            }
            names.push(name);
        }
        roster.push(names);
    }
    let mut res = Vec::new();
    for (pos, (i, (label, locator))) in resources.into_iter().enumerate() {
        if i != pos + 1 {
            return Err(UnitError::Missing(format!("resource {}", pos + 1)));
        }
        res.push(Resource {
            label: label.ok_or_else(|| UnitError::Missing(format!("label of resource {i}")))?,
            locator: locator.ok_or_else(|| UnitError::Missing(format!("locator of resource {i}")))?,
        });
    }

    let unit = TeachingUnit {
        unit_id: unit_id.to_string(),
        title: text("title")?,
        domain_project: text("domain_project")?,
        client_needs: text("client_needs")?,
        lecture_hours: hours("lecture_hours")?,
        practical_hours: hours("practical_hours")?,
        session_duration: hours("session_duration")?,
        group_count,
        roster,
        team_counts,
        resources: res,
        method_id,
    };
    if let Some(v) = validate_unit(&unit).into_iter().next() {
        return Err(UnitError::Invalid(v));
    }
    Ok(unit)
}
