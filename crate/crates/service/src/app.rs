//! Operations shared by the HTTP handlers and the command line.

use std::path::PathBuf;

use at_core::assets::{AssetError, Assets};
use at_core::device::{generate_device, DeviceError};
use at_core::ils::{classify, score, AnswerSheet, IlsError, QuestionnaireDefinition};
use at_core::profile::{
    default_profile, facts_to_profile, facts_to_unit, profile_to_facts, unit_to_facts, validate_profile,
    validate_unit, Pole, ProfileError, TeacherProfile, TeachingUnit, Uid, UnitError, Violation,
};
use at_core::store::{FactKind, StoreError, UserStore};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0} already exists")]
    Conflict(String),
    #[error("validation failed: {}", list(.0))]
    Invalid(Vec<Violation>),
    #[error("questionnaire incomplete")]
    IncompleteQuiz { missing: Vec<u32> },
    #[error(transparent)]
    Quiz(IlsError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("method: {0}")]
    Method(#[from] AssetError),
}

fn list(violations: &[Violation]) -> String {
    violations.iter().map(Violation::to_string).collect::<Vec<_>>().join("; ")
}

/// Profile as reported to the client.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileView {
    pub profile: TeacherProfile,
    /// True when the profile carries nothing beyond the default.
    pub standard: bool,
}

/// A filled-in questionnaire plus the self-declared reasoning pole.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizSubmission {
    pub answers: AnswerSheet,
    pub reasoning: Pole,
}

#[derive(Debug)]
pub struct App {
    pub store: UserStore,
    pub assets: Assets,
    pub questionnaire: QuestionnaireDefinition,
}

impl App {
    pub fn new(store: UserStore, assets: Assets) -> Self {
        App { store, assets, questionnaire: QuestionnaireDefinition::shipped() }
    }

    /// The saved profile, or the default one when nothing was saved.
    pub fn load_profile(&self, uid: Uid) -> Result<ProfileView, AppError> {
        let registry = &self.assets.catalogs.registry;
        let profile = match self.store.try_load_user_facts(uid, &FactKind::Profile)? {
            Some(facts) => facts_to_profile(uid, &facts, registry)?.profile,
            None => default_profile(uid, registry),
        };
        Ok(ProfileView { standard: profile.is_standard(registry), profile })
    }

    /// Validates and stores `profile` for `uid`; the uid in the body is ignored.
    pub fn save_profile(&self, uid: Uid, mut profile: TeacherProfile) -> Result<ProfileView, AppError> {
        profile.uid = uid;
        let violations = validate_profile(&profile);
        if !violations.is_empty() {
            return Err(AppError::Invalid(violations));
        }
        let facts = profile_to_facts(&profile, &self.assets.catalogs.registry)?;
        self.store.save_user_facts(uid, &FactKind::Profile, &facts)?;
        self.load_profile(uid)
    }

    /// Scores the sheet and replaces the stored personality with the result.
    pub fn apply_quiz(&self, uid: Uid, quiz: &QuizSubmission) -> Result<ProfileView, AppError> {
        let missing = quiz.answers.missing(&self.questionnaire);
        if !missing.is_empty() {
            return Err(AppError::IncompleteQuiz { missing });
        }
        let scores = score(&quiz.answers, &self.questionnaire).map_err(AppError::Quiz)?;
        let personality = classify(&scores, quiz.reasoning).map_err(AppError::Quiz)?;
        let mut profile = self.load_profile(uid)?.profile;
        profile.personality = Some(personality);
        self.save_profile(uid, profile)
    }

    fn check_unit(&self, unit: &TeachingUnit) -> Result<(), AppError> {
        let mut violations = validate_unit(unit);
        if self.assets.method(&unit.method_id).is_err() {
            violations.push(Violation { field: "method_id".into(), rule: format!("unknown method {:?}", unit.method_id) });
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(AppError::Invalid(violations))
        }
    }

    fn unit_kind(unit_id: &str) -> FactKind {
        FactKind::Unit(unit_id.to_string())
    }

    pub fn create_unit(&self, uid: Uid, unit: &TeachingUnit) -> Result<(), AppError> {
        self.check_unit(unit)?;
        if self.store.try_load_user_facts(uid, &Self::unit_kind(&unit.unit_id))?.is_some() {
            return Err(AppError::Conflict(format!("unit {}", unit.unit_id)));
        }
        self.store.save_user_facts(uid, &Self::unit_kind(&unit.unit_id), &unit_to_facts(unit)?)?;
        Ok(())
    }

    /// Replaces an existing unit. `unit_id` must match the unit's own id.
    pub fn update_unit(&self, uid: Uid, unit_id: &str, unit: &TeachingUnit) -> Result<(), AppError> {
        if unit.unit_id != unit_id {
            return Err(AppError::Invalid(vec![Violation {
                field: "unit_id".into(),
                rule: format!("must equal the addressed unit {unit_id:?}"),
            }]));
        }
        self.get_unit(uid, unit_id)?;
        self.check_unit(unit)?;
        self.store.save_user_facts(uid, &Self::unit_kind(unit_id), &unit_to_facts(unit)?)?;
        Ok(())
    }

    pub fn get_unit(&self, uid: Uid, unit_id: &str) -> Result<TeachingUnit, AppError> {
        match self.store.try_load_user_facts(uid, &Self::unit_kind(unit_id)) {
            Ok(Some(facts)) => Ok(facts_to_unit(unit_id, &facts)?),
            Ok(None) | Err(StoreError::InvalidUnitId(_)) => Err(AppError::NotFound(format!("unit {unit_id}"))),
            Err(e) => Err(e.into()),
        }
    }

    pub fn list_units(&self, uid: Uid) -> Result<Vec<TeachingUnit>, AppError> {
        self.store.list_units(uid)?.iter().map(|id| self.get_unit(uid, id)).collect()
    }

    pub fn delete_unit(&self, uid: Uid, unit_id: &str) -> Result<(), AppError> {
        match self.store.delete_unit(uid, unit_id) {
            Ok(true) => Ok(()),
            Ok(false) | Err(StoreError::InvalidUnitId(_)) => Err(AppError::NotFound(format!("unit {unit_id}"))),
            Err(e) => Err(e.into()),
        }
    }

    /// Runs the whole pipeline on the stored profile and unit and writes the
    /// bundle to the user's device directory, which is returned.
    pub fn generate(&self, uid: Uid, unit_id: &str) -> Result<PathBuf, AppError> {
        let profile = self.load_profile(uid)?.profile;
        let unit = self.get_unit(uid, unit_id)?;
        let method = self.assets.method(&unit.method_id)?;
        let bundle = generate_device(&profile, &unit, method, &self.assets.rules, &self.assets.catalogs)?;
        Ok(self.store.write_device(uid, &bundle)?)
    }
}
