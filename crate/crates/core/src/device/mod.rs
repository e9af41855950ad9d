//! Device generation: team blogs, the teacher's e-suitcase and the toolbox.

mod blog;
mod esuitcase;
mod site;
mod toolbox;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

pub use blog::{generate_team_blog, step_order, step_page_path};
pub use esuitcase::{
    blog_href, blog_link_count, generate_esuitcase, order_presentation, presentation_path, EsuitcaseError,
};
pub use site::{is_external, resolve_path, BrokenLink, Item, Page, Section, SiteTree, THEME};
pub use toolbox::{generate_toolbox, ToolCatalog, ToolCatalogError, ToolEntry, ToolSource, ToolSpec, ToolboxManifest};

use crate::facts::FactSet;
use crate::profile::{
    profile_to_facts, unit_to_facts, validate_profile, validate_unit, MethodDefinition, PresentationCatalog,
    TeacherProfile, TeachingUnit, TopicRegistry,
};
use crate::rules::{infer, Directive, RuleBase};
use crate::scenario::{compose_scenario, compose_teams, Scenario, Team};

/// Reference data the generator needs besides the method and the rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalogs {
    pub registry: TopicRegistry,
    pub presentations: PresentationCatalog,
    pub tools: ToolCatalog,
}

impl Catalogs {
    pub fn shipped() -> Self {
        Catalogs {
            registry: TopicRegistry::shipped(),
            presentations: PresentationCatalog::shipped(),
            tools: ToolCatalog::shipped(),
        }
    }
}

/// Failure of one generation stage.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct DeviceError {
    pub stage: &'static str,
    pub message: String,
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> DeviceError {
    move |e| DeviceError { stage, message: e.to_string() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TeamBlog {
    pub team: Team,
    pub site: SiteTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeviceBundle {
    pub unit_id: String,
    pub directives: Vec<Directive>,
    pub scenario: Scenario,
    /// In team order: `team-1`, `team-2`, ...
    pub team_blogs: Vec<TeamBlog>,
    pub esuitcase: SiteTree,
    pub toolbox: ToolboxManifest,
}

pub const TOOLBOX_FILE: &str = "toolbox.manifest";

impl DeviceBundle {
    /// Output files keyed by path relative to the device directory.
    pub fn files(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for b in &self.team_blogs {
            for (path, html) in b.site.render() {
                out.insert(format!("blogs/{}/{path}", b.team.team_id), html);
            }
        }
        for (path, html) in self.esuitcase.render() {
            out.insert(format!("esuitcase/{path}"), html);
        }
        out.insert(TOOLBOX_FILE.to_string(), self.toolbox.to_string());
        out
    }

    /// Links anywhere in the bundle that resolve neither to a bundle page nor
    /// to a registered external locator.
    pub fn broken_links(&self, externals: &BTreeSet<String>) -> Vec<BrokenLink> {
        let files = self.files();
        let mut links = Vec::new();
        for b in &self.team_blogs {
            let prefix = format!("blogs/{}/", b.team.team_id);
            links.extend(b.site.links().map(|(p, t)| (format!("{prefix}{p}"), t.to_string())));
        }
        links.extend(self.esuitcase.links().map(|(p, t)| (format!("esuitcase/{p}"), t.to_string())));
        site::check(links.into_iter(), |p| files.contains_key(p), externals)
    }
}

/// Every external locator the generator may reference.
pub fn registered_locators(unit: &TeachingUnit, method: &MethodDefinition, catalogs: &Catalogs) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = catalogs.presentations.locators().map(String::from).collect();
    out.extend(method.presentation_sections.iter().flat_map(|s| s.media.values().cloned()));
    out.extend(unit.resources.iter().map(|r| r.locator.clone()));
    out
}

/// Teams of every group, numbered `team-1..team-N` across groups in group
/// order. Groups with a team count of zero get no team.
pub fn compose_unit_teams(unit: &TeachingUnit) -> Result<Vec<Team>, crate::scenario::ScenarioError> {
    let mut teams = Vec::new();
    for (g, (members, &count)) in unit.roster.iter().zip(&unit.team_counts).enumerate() {
        if count == 0 {
            continue;
        }
        teams.extend(compose_teams(members, count as usize, g)?);
    }
    for (i, t) in teams.iter_mut().enumerate() {
        t.team_id = format!("team-{}", i + 1);
    }
    Ok(teams)
}

/// facts → inference → teams → scenario → blogs → e-suitcase → toolbox.
pub fn generate_device(
    profile: &TeacherProfile,
    unit: &TeachingUnit,
    method: &MethodDefinition,
    rules: &RuleBase,
    catalogs: &Catalogs,
) -> Result<DeviceBundle, DeviceError> {
    if let Some(v) = validate_profile(profile).into_iter().next() {
        return Err(stage("profile")(v));
    }
    if let Some(v) = validate_unit(unit).into_iter().next() {
        return Err(stage("unit")(v));
    }
    let mut facts: FactSet = profile_to_facts(profile, &catalogs.registry).map_err(stage("profile"))?;
    facts.extend(unit_to_facts(unit).map_err(stage("unit"))?);

    let inference = infer(&facts, rules);
    if inference.budget_exhausted {
        return Err(stage("inference")("iteration budget exhausted"));
    }
    let directives = inference.directives;

    let teams = compose_unit_teams(unit).map_err(stage("teams"))?;
    let scenario = compose_scenario(unit, method).map_err(stage("scenario"))?;
    let team_blogs: Vec<TeamBlog> =
        teams.into_iter().map(|team| TeamBlog { site: generate_team_blog(&team, &scenario), team }).collect();
    let team_ids: Vec<String> = team_blogs.iter().map(|b| b.team.team_id.clone()).collect();
    let presentations = catalogs.presentations.clone().with_method(method);
    let esuitcase =
        generate_esuitcase(&directives, &team_ids, method, &presentations, unit).map_err(stage("esuitcase"))?;
    let toolbox = generate_toolbox(&directives, &catalogs.tools);
    Ok(DeviceBundle { unit_id: unit.unit_id.clone(), directives, scenario, team_blogs, esuitcase, toolbox })
}

/// Replaces `dir` with the bundle's files. The new tree is written next to
/// `dir` first and renamed into place.
pub fn write_bundle(bundle: &DeviceBundle, dir: &Path) -> io::Result<()> {
    let parent = dir.parent().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "device dir has no parent"))?;
    fs::create_dir_all(parent)?;
    let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or("device");
    let staging = parent.join(format!(".{name}.new"));
    let old = parent.join(format!(".{name}.old"));
    for leftover in [&staging, &old] {
        if leftover.exists() {
            fs::remove_dir_all(leftover)?;
        }
    }
    for (rel, content) in bundle.files() {
        let path = staging.join(&rel);
        fs::create_dir_all(path.parent().expect("file path has a parent"))?;
        fs::write(path, content)?;
    }
    if dir.exists() {
        fs::rename(dir, &old)?;
    }
    fs::rename(&staging, dir)?;
    if old.exists() {
        fs::remove_dir_all(&old)?;
    }
    Ok(())
}
