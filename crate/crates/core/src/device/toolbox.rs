use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::macros::name_enum;
use crate::profile::is_name_token;
use crate::rules::Directive;

name_enum! {
    pub enum ToolSource {
        Directive => "directive",
        Standard => "standard",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToolSpec {
    pub tool: String,
    pub locator: String,
    pub standard: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("tool catalog line {line}: {message}")]
pub struct ToolCatalogError {
    pub line: usize,
    pub message: String,
}

/// Known tools with their embed locators; standard ones go into every toolbox.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ToolCatalog {
    tools: BTreeMap<String, ToolSpec>,
}

impl ToolCatalog {
    /// Lines `tool_id | locator | yes|no`; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, ToolCatalogError> {
        let mut tools = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ToolCatalogError { line: i + 1, message };
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            let [tool, locator, standard] = fields[..] else {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            };
            if !is_name_token(tool) {
                return Err(err(format!("invalid tool id {tool:?}")));
            }
            if locator.is_empty() {
                return Err(err("empty locator".into()));
            }
            let standard = match standard {
                "yes" => true,
                "no" => false,
                other => return Err(err(format!("expected yes or no, got {other:?}"))),
            };
            let spec = ToolSpec { tool: tool.into(), locator: locator.into(), standard };
            if tools.insert(tool.to_string(), spec).is_some() {
                return Err(err(format!("duplicate tool {tool}")));
            }
        }
        Ok(ToolCatalog { tools })
    }

    pub fn shipped() -> Self {
        Self::parse(include_str!("../../../../config/tools.txt")).expect("shipped tool catalog parses")
    }

    /// Catalog locator, or `tool://<id>` for tools the catalog does not know.
    pub fn locator(&self, tool: &str) -> String {
        self.tools.get(tool).map_or_else(|| format!("tool://{tool}"), |t| t.locator.clone())
    }

    pub fn standard(&self) -> impl Iterator<Item = &ToolSpec> {
        self.tools.values().filter(|t| t.standard)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToolEntry {
    pub tool: String,
    pub locator: String,
    pub source: ToolSource,
}

/// Toolbox contents, sorted by tool id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToolboxManifest {
    pub entries: Vec<ToolEntry>,
}

impl ToolboxManifest {
    pub fn get(&self, tool: &str) -> Option<&ToolEntry> {
        self.entries.iter().find(|e| e.tool == tool)
    }

    /// Parses the `tool | locator | source` text form.
    pub fn parse(text: &str) -> Option<Self> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let f: Vec<&str> = l.split(" | ").collect();
                let [tool, locator, source] = f[..] else { return None };
                Some(ToolEntry { tool: tool.into(), locator: locator.into(), source: source.parse().ok()? })
            })
            .collect::<Option<_>>()?;
        Some(ToolboxManifest { entries })
    }
}

impl fmt::Display for ToolboxManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{} | {} | {}", e.tool, e.locator, e.source)?;
        }
        Ok(())
    }
}

/// One entry per `embed_tool` directive plus the standard tools; a tool that
/// is both keeps the directive entry.
pub fn generate_toolbox(directives: &[Directive], catalog: &ToolCatalog) -> ToolboxManifest {
    let mut entries: BTreeMap<String, ToolEntry> = BTreeMap::new();
    for d in directives {
        if let Directive::EmbedTool { tool } = d {
            entries.entry(tool.clone()).or_insert_with(|| ToolEntry {
                tool: tool.clone(),
                locator: catalog.locator(tool),
                source: ToolSource::Directive,
            });
        }
    }
    for t in catalog.standard() {
        entries.entry(t.tool.clone()).or_insert_with(|| ToolEntry {
            tool: t.tool.clone(),
            locator: t.locator.clone(),
            source: ToolSource::Standard,
        });
    }
    ToolboxManifest { entries: entries.into_values().collect() }
}
