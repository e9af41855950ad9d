use std::collections::BTreeSet;

use super::site::{Item, Page, SiteTree};
use crate::profile::{MethodDefinition, PresentationCatalog, PresentationOrder, PresentationSection, SectionKind, TeachingUnit};
use crate::rules::Directive;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EsuitcaseError {
    #[error("no presentation sections for topic {topic}")]
    NoPresentation { topic: String },
}

/// Deductive puts principles first, inductive puts examples first; the
/// original order is kept within each kind.
pub fn order_presentation(sections: &[PresentationSection], ordering: PresentationOrder) -> Vec<PresentationSection> {
    let first = match ordering {
        PresentationOrder::Deductive => SectionKind::Principle,
        PresentationOrder::Inductive => SectionKind::Example,
    };
    let (mut head, tail): (Vec<_>, Vec<_>) = sections.iter().cloned().partition(|s| s.kind == first);
    head.extend(tail);
    head
}

pub fn presentation_path(topic: &str) -> String {
    format!("presentation/{topic}.html")
}

pub fn blog_href(team_id: &str) -> String {
    format!("../blogs/{team_id}/index.html")
}

/// The teacher's site: device presentation, adapted topic presentations,
/// logbook, resources and links to the team blogs.
///
/// A topic with a `skip` directive gets no page even if it is also presented.
/// `link_blogs` adds the blogs page to the index navigation.
pub fn generate_esuitcase(
    directives: &[Directive],
    team_ids: &[String],
    method: &MethodDefinition,
    catalog: &PresentationCatalog,
    unit: &TeachingUnit,
) -> Result<SiteTree, EsuitcaseError> {
    let skipped: BTreeSet<&str> = directives
        .iter()
        .filter_map(|d| match d {
            Directive::Skip { topic } => Some(topic.as_str()),
            _ => None,
        })
        .collect();
    let mut tree = SiteTree::new("esuitcase");
    let back = || Item::link("Device presentation", "../index.html");

    let mut presented = Vec::new();
    for d in directives {
        let Directive::Present { topic, modality, ordering } = d else { continue };
        if skipped.contains(topic.as_str()) {
            continue;
        }
        let sections = catalog.sections(topic).ok_or_else(|| EsuitcaseError::NoPresentation { topic: topic.clone() })?;
        let mut page = Page::new(format!("Presentation of {topic}"));
        for s in order_presentation(sections, *ordering) {
            let (m, locator) = s.locator(*modality);
            page = page.section(
                format!("{} ({})", s.section_id, s.kind),
                vec![Item::Media { label: s.section_id.clone(), modality: m, locator: locator.to_string() }],
            );
        }
        tree.add(presentation_path(topic), page.section("Navigation", vec![back()]));
        presented.push(topic.as_str());
    }
    presented.sort_unstable();

    let mut nav: Vec<Item> = presented.iter().map(|t| Item::link(format!("Presentation of {t}"), presentation_path(t))).collect();
    nav.push(Item::link("Teacher logbook", "logbook.html"));
    nav.push(Item::link("Pedagogical resources", "resources.html"));
    if directives.contains(&Directive::LinkBlogs) {
        nav.push(Item::link("Team logbooks", "blogs.html"));
    }
    let unit_items = vec![
        Item::text(format!("Domain project: {}", unit.domain_project)),
        Item::text(format!("Client needs: {}", unit.client_needs)),
        Item::text(format!("Lectures: {} h", unit.lecture_hours)),
        Item::text(format!("Practical work: {} h in sessions of {} h", unit.practical_hours, unit.session_duration)),
        Item::text(format!("Groups: {}, teams: {}", unit.group_count, team_ids.len())),
    ];
    tree.add(
        "index.html",
        Page::new(format!("Pedagogical device: {}", unit.title))
            .section("Teaching unit", unit_items)
            .section("Method", vec![Item::text(format!("{} ({})", method.name, method.method_id))])
            .section("Contents", nav),
    );

    let resources: Vec<Item> = unit.resources.iter().map(|r| Item::link(r.label.clone(), r.locator.clone())).collect();
    tree.add(
        "logbook.html",
        Page::new("Teacher logbook")
            .section("Entries", vec![Item::text("No entries yet.")])
            .section("Pedagogical resources", resources.clone())
            .section("Navigation", vec![Item::link("Device presentation", "index.html")]),
    );
    tree.add(
        "resources.html",
        Page::new("Pedagogical resources")
            .section("Resources", resources)
            .section("Navigation", vec![Item::link("Device presentation", "index.html")]),
    );
    tree.add(
        "blogs.html",
        Page::new("Team logbooks")
            .section("Teams", team_ids.iter().map(|t| Item::link(t.clone(), blog_href(t))).collect())
            .section("Navigation", vec![Item::link("Device presentation", "index.html")]),
    );
    Ok(tree)
}

/// Number of links into the team blogs.
pub fn blog_link_count(esuitcase: &SiteTree) -> usize {
    esuitcase.links().filter(|(_, t)| t.starts_with("../blogs/")).count()
}
