use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::facts::{is_ident, Value};
use crate::macros::name_enum;
use crate::profile::{Modality, PresentationOrder};

name_enum! {
    pub enum DirectiveKind {
        Present => "present",
        Skip => "skip",
        EmbedTool => "embed_tool",
        LinkBlogs => "link_blogs",
    }
}

impl DirectiveKind {
    pub fn arity(self) -> usize {
        match self {
            DirectiveKind::Present => 3,
            DirectiveKind::Skip | DirectiveKind::EmbedTool => 1,
            DirectiveKind::LinkBlogs => 0,
        }
    }
}

/// Adaptation instruction emitted by inference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Directive {
    /// Present a topic in the given modality and section order.
    Present { topic: String, modality: Modality, ordering: PresentationOrder },
    /// Do not present a topic.
    Skip { topic: String },
    /// Put a tool in the toolbox.
    EmbedTool { tool: String },
    /// Link the team logbooks from the e-suitcase.
    LinkBlogs,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot build {kind} directive: {reason}")]
pub struct DirectiveArgError {
    pub kind: DirectiveKind,
    pub reason: String,
}

impl Directive {
    pub fn kind(&self) -> DirectiveKind {
        match self {
            Directive::Present { .. } => DirectiveKind::Present,
            Directive::Skip { .. } => DirectiveKind::Skip,
            Directive::EmbedTool { .. } => DirectiveKind::EmbedTool,
            Directive::LinkBlogs => DirectiveKind::LinkBlogs,
        }
    }

    /// Deduplication key: the kind plus the topic or tool it is about.
    pub fn key(&self) -> (DirectiveKind, &str) {
        match self {
            Directive::Present { topic, .. } | Directive::Skip { topic } => (self.kind(), topic),
            Directive::EmbedTool { tool } => (self.kind(), tool),
            Directive::LinkBlogs => (self.kind(), ""),
        }
    }

    pub fn present(topic: &str, modality: Modality, ordering: PresentationOrder) -> Self {
        Directive::Present { topic: topic.to_string(), modality, ordering }
    }

    pub fn skip(topic: &str) -> Self {
        Directive::Skip { topic: topic.to_string() }
    }

    pub fn embed_tool(tool: &str) -> Self {
        Directive::EmbedTool { tool: tool.to_string() }
    }

    /// Builds a directive from instantiated arguments; every argument must be
    /// an identifier of the right domain.
    pub fn from_args(kind: DirectiveKind, args: &[Value]) -> Result<Self, DirectiveArgError> {
        let fail = |reason: String| DirectiveArgError { kind, reason };
        if args.len() != kind.arity() {
            return Err(fail(format!("expected {} arguments, got {}", kind.arity(), args.len())));
        }
        let names: Vec<&str> = args
            .iter()
            .map(|v| v.as_ident().map(|i| i.as_str()).ok_or_else(|| fail(format!("argument {v} is not an identifier"))))
            .collect::<Result<_, _>>()?;
        Ok(match kind {
            DirectiveKind::Present => Directive::Present {
                topic: names[0].to_string(),
                modality: names[1].parse().map_err(|e| fail(format!("{e}")))?,
                ordering: names[2].parse().map_err(|e| fail(format!("{e}")))?,
            },
            DirectiveKind::Skip => Directive::skip(names[0]),
            DirectiveKind::EmbedTool => Directive::embed_tool(names[0]),
            DirectiveKind::LinkBlogs => Directive::LinkBlogs,
        })
    }

    fn args(&self) -> Vec<&str> {
        match self {
            Directive::Present { topic, modality, ordering } => vec![topic, modality.as_str(), ordering.as_str()],
            Directive::Skip { topic } => vec![topic],
            Directive::EmbedTool { tool } => vec![tool],
            Directive::LinkBlogs => vec![],
        }
    }
}

/// Canonical form `kind(arg,...)`.
impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind(), self.args().join(","))
    }
}

impl FromStr for Directive {
    type Err = DirectiveArgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || DirectiveArgError { kind: DirectiveKind::LinkBlogs, reason: format!("malformed directive {s:?}") };
        let (kind, rest) = s.trim().split_once('(').ok_or_else(malformed)?;
        let inner = rest.strip_suffix(')').ok_or_else(malformed)?;
        let kind: DirectiveKind = kind.trim().parse().map_err(|_| malformed())?;
        let args: Vec<Value> = inner
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .map(|a| if is_ident(a) { Ok(Value::ident(a)) } else { Err(malformed()) })
            .collect::<Result<_, _>>()?;
        Directive::from_args(kind, &args)
    }
}

/// Sorts directives by kind name, then key, as printed by the CLI.
pub fn sort_canonical(directives: &mut [Directive]) {
    directives.sort_by(|a, b| {
        let (ka, ta) = a.key();
        let (kb, tb) = b.key();
        (ka.as_str(), ta).cmp(&(kb.as_str(), tb))
    });
}
