use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::profile::Modality;

/// Theme applied to every generated page.
pub const THEME: &str = "classic";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Item {
    Text { text: String },
    Link { label: String, href: String },
    Media { label: String, modality: Modality, locator: String },
    /// A checklist entry, e.g. a delivery to hand in.
    Check { label: String },
}

impl Item {
    pub fn text(s: impl Into<String>) -> Self {
        Item::Text { text: s.into() }
    }

    pub fn link(label: impl Into<String>, href: impl Into<String>) -> Self {
        Item::Link { label: label.into(), href: href.into() }
    }

    /// Link target or media locator.
    pub fn target(&self) -> Option<&str> {
        match self {
            Item::Link { href, .. } => Some(href),
            Item::Media { locator, .. } => Some(locator),
            Item::Text { .. } | Item::Check { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Section {
    pub heading: String,
    pub items: Vec<Item>,
}

impl Section {
    pub fn new(heading: impl Into<String>, items: Vec<Item>) -> Self {
        Section { heading: heading.into(), items }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Page {
    pub title: String,
    pub sections: Vec<Section>,
}

impl Page {
    pub fn new(title: impl Into<String>) -> Self {
        Page { title: title.into(), sections: Vec::new() }
    }

    pub fn section(mut self, heading: impl Into<String>, items: Vec<Item>) -> Self {
        self.sections.push(Section::new(heading, items));
        self
    }

    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.sections.iter().flat_map(|s| &s.items)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
        let _ = writeln!(out, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(out, "</head>\n<body class=\"theme-{THEME}\">\n<h1>{}</h1>", escape(&self.title));
        for s in &self.sections {
            let _ = writeln!(out, "<section>\n<h2>{}</h2>\n<ul>", escape(&s.heading));
            for item in &s.items {
                let _ = writeln!(out, "<li>{}</li>", render_item(item));
            }
            out.push_str("</ul>\n</section>\n");
        }
        out.push_str("</body>\n</html>\n");
        out
    }
}

fn render_item(item: &Item) -> String {
    match item {
        Item::Text { text } => escape(text),
        Item::Link { label, href } => format!("<a href=\"{}\">{}</a>", escape(href), escape(label)),
        Item::Media { label, modality, locator } => {
            let (l, src) = (escape(label), escape(locator));
            match modality {
                Modality::Audio => format!("{l} <audio controls src=\"{src}\"></audio>"),
                Modality::Video => format!("{l} <video controls src=\"{src}\"></video>"),
                Modality::Text => format!("<a href=\"{src}\">{l}</a>"),
            }
        }
        Item::Check { label } => format!("<input type=\"checkbox\" disabled> {}", escape(label)),
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Static site: pages keyed by relative path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiteTree {
    pub root: String,
    pub pages: BTreeMap<String, Page>,
}

/// A link that does not resolve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BrokenLink {
    pub page: String,
    pub target: String,
}

pub fn is_external(target: &str) -> bool {
    target.contains("://")
}

/// Resolves `target` against the directory of `page`. `None` when the path
/// climbs above the root.
pub fn resolve_path(page: &str, target: &str) -> Option<String> {
    let mut parts: Vec<&str> = page.split('/').collect();
    parts.pop();
    for seg in target.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                parts.pop()?;
            }
            s => parts.push(s),
        }
    }
    Some(parts.join("/"))
}

fn valid_path(p: &str) -> bool {
    !p.is_empty() && !p.starts_with('/') && p.split('/').all(|s| !s.is_empty() && s != "." && s != "..")
}

impl SiteTree {
    pub fn new(root: impl Into<String>) -> Self {
        SiteTree { root: root.into(), pages: BTreeMap::new() }
    }

    pub fn add(&mut self, path: impl Into<String>, page: Page) {
        let path = path.into();
        debug_assert!(valid_path(&path), "bad page path {path}");
        self.pages.insert(path, page);
    }

    pub fn page(&self, path: &str) -> Option<&Page> {
        self.pages.get(path)
    }

    /// Rendered files, keyed by relative path.
    pub fn render(&self) -> BTreeMap<String, String> {
        self.pages.iter().map(|(p, page)| (p.clone(), page.render())).collect()
    }

    /// Every `(page, target)` pair.
    pub fn links(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pages.iter().flat_map(|(p, page)| page.items().filter_map(move |i| i.target().map(|t| (p.as_str(), t))))
    }

    /// Links that neither resolve inside the tree nor name a registered
    /// external locator.
    pub fn broken_links(&self, externals: &BTreeSet<String>) -> Vec<BrokenLink> {
        check(self.links().map(|(p, t)| (p.to_string(), t.to_string())), |path| self.pages.contains_key(path), externals)
    }
}

/// Shared link check: `exists` decides internal targets.
pub(crate) fn check(
    links: impl Iterator<Item = (String, String)>,
    exists: impl Fn(&str) -> bool,
    externals: &BTreeSet<String>,
) -> Vec<BrokenLink> {
    links
        .filter(|(page, target)| {
            if is_external(target) {
                !externals.contains(target)
            } else {
                !resolve_path(page, target).is_some_and(|p| exists(&p))
            }
        })
        .map(|(page, target)| BrokenLink { page, target })
        .collect()
}
