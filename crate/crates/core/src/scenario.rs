//! Pedagogical scenario: practical sessions laid out over the method steps,
//! and balanced student teams.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::profile::{Hours, MethodDefinition, TeachingUnit};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("team count must be positive")]
    NoTeams,
    #[error("{teams} teams requested for {members} members")]
    TooManyTeams { teams: usize, members: usize },
    #[error("practical hours and session duration must be positive")]
    NonPositiveHours,
    #[error("session duration {duration} exceeds practical hours {practical}")]
    SessionTooLong { practical: Hours, duration: Hours },
    #[error("unit uses method {unit} but method {method} was given")]
    MethodMismatch { unit: String, method: String },
    #[error("method has no steps")]
    NoSteps,
    #[error("step weights must be non-negative with a positive total")]
    BadWeights,
    #[error("{sessions} sessions for {steps} steps: {} sessions short", steps - sessions)]
    TooFewSessions { sessions: usize, steps: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Team {
    pub team_id: String,
    /// 0-based index of the group the team belongs to.
    pub group_index: usize,
    pub members: Vec<String>,
}

/// Sorts members bytewise and deals them round-robin into `team-1..team-k`.
pub fn compose_teams(members: &[String], team_count: usize, group_index: usize) -> Result<Vec<Team>, ScenarioError> {
    if team_count == 0 {
        return Err(ScenarioError::NoTeams);
    }
    if team_count > members.len() {
        return Err(ScenarioError::TooManyTeams { teams: team_count, members: members.len() });
    }
    let mut sorted = members.to_vec();
    sorted.sort();
    let mut teams: Vec<Team> = (1..=team_count)
        .map(|i| Team { team_id: format!("team-{i}"), group_index, members: Vec::new() })
        .collect();
    for (i, m) in sorted.into_iter().enumerate() {
        teams[i % team_count].members.push(m);
    }
    Ok(teams)
}

/// Whole sessions that fit in the practical hours, and the unscheduled rest.
pub fn session_count(practical: Hours, duration: Hours) -> Result<(usize, Hours), ScenarioError> {
    if !practical.is_positive() || !duration.is_positive() {
        return Err(ScenarioError::NonPositiveHours);
    }
    if duration > practical {
        return Err(ScenarioError::SessionTooLong { practical, duration });
    }
    let n = (practical.0 / duration.0).floor();
    Ok((n.to_integer() as usize, Hours(practical.0 - n * duration.0)))
}

/// Largest-remainder apportionment of `n` seats over `weights`, with at least
/// one seat per entry.
///
/// Plain Hamilton rounding comes first. Entries left at zero then take a seat
/// from the entry with the largest surplus over its exact share, preferring
/// donors that stay within one seat of their share. Every allocation is then
/// within one seat of the exact share whenever the minimum makes that
/// possible at all.
pub fn apportion(weights: &[Ratio<i64>], n: usize) -> Result<Vec<usize>, ScenarioError> {
    let k = weights.len();
    if k == 0 {
        return Err(ScenarioError::NoSteps);
    }
    let zero = Ratio::from_integer(0);
    if weights.iter().any(|w| *w < zero) || weights.iter().all(|w| *w == zero) {
        return Err(ScenarioError::BadWeights);
    }
    if n < k {
        return Err(ScenarioError::TooFewSessions { sessions: n, steps: k });
    }
    let shares = exact_shares(weights, n);
    let mut alloc: Vec<i128> = shares.iter().map(|q| q.floor().to_integer()).collect();
    let mut left = n as i128 - alloc.iter().sum::<i128>();
    let mut by_remainder: Vec<usize> = (0..k).collect();
    by_remainder.sort_by(|&a, &b| (shares[b] - shares[b].floor()).cmp(&(shares[a] - shares[a].floor())).then(a.cmp(&b)));
    for &i in &by_remainder {
        if left == 0 {
            break;
        }
        alloc[i] += 1;
        left -= 1;
    }

    let one = Ratio::from_integer(1i128);
    let lower: Vec<i128> = shares.iter().map(|q| (*q - one).ceil().to_integer().max(1)).collect();
    for i in 0..k {
        if alloc[i] > 0 {
            continue;
        }
        let surplus = |j: usize| Ratio::from_integer(alloc[j]) - shares[j];
        let pick = |within: bool| {
            (0..k)
                .filter(|&j| alloc[j] > 1 && (!within || alloc[j] > lower[j]))
                .max_by(|&a, &b| surplus(a).cmp(&surplus(b)).then(b.cmp(&a)))
        };
        let donor = pick(true).or_else(|| pick(false)).expect("n >= k leaves a donor");
        alloc[donor] -= 1;
        alloc[i] = 1;
    }
    Ok(alloc.into_iter().map(|a| a as usize).collect())
}

/// `n * w_i / sum(w)` for every weight, exactly.
pub fn exact_shares(weights: &[Ratio<i64>], n: usize) -> Vec<Ratio<i128>> {
    let wide = |r: &Ratio<i64>| Ratio::new(*r.numer() as i128, *r.denom() as i128);
    let total: Ratio<i128> = weights.iter().map(wide).sum();
    weights.iter().map(|w| wide(w) * Ratio::from_integer(n as i128) / total).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Session {
    /// 1-based.
    pub index: usize,
    pub duration: Hours,
    pub assigned_step: String,
    pub due_deliveries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scenario {
    pub unit_id: String,
    pub sessions: Vec<Session>,
    /// First and last session index of every step.
    pub step_spans: BTreeMap<String, (usize, usize)>,
    /// Practical hours left over after the last whole session.
    pub unscheduled: Hours,
}

impl Scenario {
    pub fn sessions_of<'a>(&'a self, step_id: &'a str) -> impl Iterator<Item = &'a Session> + 'a {
        self.sessions.iter().filter(move |s| s.assigned_step == step_id)
    }
}

/// Lays the unit's practical sessions over the method steps, in order. Each
/// step's deliveries are due in its last session.
pub fn compose_scenario(unit: &TeachingUnit, method: &MethodDefinition) -> Result<Scenario, ScenarioError> {
    if unit.method_id != method.method_id {
        return Err(ScenarioError::MethodMismatch { unit: unit.method_id.clone(), method: method.method_id.clone() });
    }
    let (n, unscheduled) = session_count(unit.practical_hours, unit.session_duration)?;
    let weights: Vec<Ratio<i64>> = method.steps.iter().map(|s| s.weight).collect();
    let alloc = apportion(&weights, n)?;

    let mut sessions = Vec::with_capacity(n);
    let mut step_spans = BTreeMap::new();
    for (step, count) in method.steps.iter().zip(alloc) {
        let first = sessions.len() + 1;
        let last = first + count - 1;
        for index in first..=last {
            sessions.push(Session {
                index,
                duration: unit.session_duration,
                assigned_step: step.step_id.clone(),
                due_deliveries: if index == last { step.deliveries.clone() } else { Vec::new() },
            });
        }
        step_spans.insert(step.step_id.clone(), (first, last));
    }
    Ok(Scenario { unit_id: unit.unit_id.clone(), sessions, step_spans, unscheduled })
}
