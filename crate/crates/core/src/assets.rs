//! Reference data: topic registry, presentations, tools, methods and rules.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::device::{Catalogs, ToolCatalog};
use crate::profile::{MethodDefinition, PresentationCatalog, TopicRegistry};
use crate::rules::{parse_rules, RuleBase};

#[derive(Debug, thiserror::Error)]
pub enum AssetError {
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("no method {0:?}")]
    UnknownMethod(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assets {
    pub catalogs: Catalogs,
    pub methods: BTreeMap<String, MethodDefinition>,
    pub rules: RuleBase,
}

impl Assets {
    /// The data compiled into the binary.
    pub fn shipped() -> Self {
        let method = MethodDefinition::shipped();
        Assets {
            catalogs: Catalogs::shipped(),
            methods: BTreeMap::from([(method.method_id.clone(), method)]),
            rules: RuleBase::shipped(),
        }
    }

    /// Reads `topics.txt`, `pedagogies.sections`, `tools.txt`,
    /// `adaptation.rules` and every `*.method` file from `dir`.
    pub fn load(dir: &Path) -> Result<Self, AssetError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map(|t| (t, path.clone())).map_err(|source| AssetError::Io { path, source })
        };
        let invalid = |path: PathBuf, e: &dyn std::fmt::Display| AssetError::Invalid { path, message: e.to_string() };

        let (text, path) = read("topics.txt")?;
        let registry = TopicRegistry::parse(&text).map_err(|e| invalid(path, &e))?;
        let (text, path) = read("pedagogies.sections")?;
        let presentations = PresentationCatalog::parse(&text).map_err(|e| invalid(path, &e))?;
        let (text, path) = read("tools.txt")?;
        let tools = ToolCatalog::parse(&text).map_err(|e| invalid(path, &e))?;
        let (text, path) = read("adaptation.rules")?;
        let rules = parse_rules(&text).map_err(|e| invalid(path, &e))?;

        let mut methods = BTreeMap::new();
        let entries = fs::read_dir(dir).map_err(|source| AssetError::Io { path: dir.to_path_buf(), source })?;
        let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for path in paths.into_iter().filter(|p| p.extension().is_some_and(|e| e == "method")) {
            let text = fs::read_to_string(&path).map_err(|source| AssetError::Io { path: path.clone(), source })?;
            let m = MethodDefinition::parse(&text).map_err(|e| invalid(path.clone(), &e))?;
            if methods.insert(m.method_id.clone(), m).is_some() {
                return Err(invalid(path, &"method defined twice"));
            }
        }
        Ok(Assets { catalogs: Catalogs { registry, presentations, tools }, methods, rules })
    }

    pub fn method(&self, method_id: &str) -> Result<&MethodDefinition, AssetError> {
        self.methods.get(method_id).ok_or_else(|| AssetError::UnknownMethod(method_id.to_string()))
    }

    pub fn with_rules(mut self, rules: RuleBase) -> Self {
        self.rules = rules;
        self
    }
}
