//! Command-line front end for the `rbfbca` solver: seeded benchmark
//! campaigns with CSV reports, and camera placement on scenario files with
//! SVG maps.

pub mod campaign;
pub mod placement;
pub mod scenario;

pub use campaign::{
    load_campaign, parse_campaign, run_campaign, CampaignConfig, CampaignReport, ObjectiveSpec,
    StartBox,
};
pub use placement::{corner_heuristic, render_svg, run_placement, PlacementReport};
pub use scenario::{parse_scenario, parse_scenario_str, ScenarioError};
