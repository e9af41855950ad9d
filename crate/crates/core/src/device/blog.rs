use super::site::{Item, Page, SiteTree};
use crate::scenario::{Scenario, Team};

/// Step ids in session order.
pub fn step_order(scenario: &Scenario) -> Vec<&str> {
    let mut steps: Vec<(&usize, &str)> = scenario.step_spans.iter().map(|(id, (first, _))| (first, id.as_str())).collect();
    steps.sort();
    steps.into_iter().map(|(_, id)| id).collect()
}

pub fn step_page_path(step_id: &str) -> String {
    format!("steps/{step_id}.html")
}

/// Logbook scaffold of one team: index, progress, one page per step and a
/// communication page.
pub fn generate_team_blog(team: &Team, scenario: &Scenario) -> SiteTree {
    let steps = step_order(scenario);
    let mut tree = SiteTree::new(team.team_id.clone());

    let mut nav = vec![Item::link("Progress", "progress.html")];
    nav.extend(steps.iter().map(|s| Item::link(format!("Step {s}"), step_page_path(s))));
    nav.push(Item::link("Communication", "communication.html"));
    tree.add(
        "index.html",
        Page::new(format!("Logbook of {}", team.team_id))
            .section(format!("Group {}", team.group_index + 1), team.members.iter().map(Item::text).collect())
            .section("Pages", nav),
    );

    let progress = scenario
        .sessions
        .iter()
        .map(|s| Item::Check { label: format!("Session {} ({} h): {}", s.index, s.duration, s.assigned_step) })
        .collect();
    tree.add(
        "progress.html",
        Page::new(format!("Progress of {}", team.team_id))
            .section("Sessions", progress)
            .section("Navigation", vec![Item::link("Logbook", "index.html")]),
    );

    for step in &steps {
        let sessions: Vec<Item> =
            scenario.sessions_of(step).map(|s| Item::text(format!("Session {} ({} h)", s.index, s.duration))).collect();
        let deliveries: Vec<Item> = scenario
            .sessions_of(step)
            .flat_map(|s| s.due_deliveries.iter().map(move |d| Item::Check { label: format!("{d} (due session {})", s.index) }))
            .collect();
        tree.add(
            step_page_path(step),
            Page::new(format!("Step {step}"))
                .section("Sessions", sessions)
                .section("Deliveries", deliveries)
                .section("Navigation", vec![Item::link("Logbook", "../index.html")]),
        );
    }

    tree.add(
        "communication.html",
        Page::new(format!("Communication of {}", team.team_id))
            .section("Members", team.members.iter().map(Item::text).collect())
            .section("Messages", vec![Item::text("No messages yet.")])
            .section("Navigation", vec![Item::link("Logbook", "index.html")]),
    );
    tree
}
