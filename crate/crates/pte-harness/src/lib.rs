//! Seed corpora, random seed generation, campaigns and reports.

pub mod campaign;
pub mod corpus;
pub mod generator;
pub mod report;

pub use campaign::{run_campaign, run_on_seeds, Campaign, CampaignConfig, CampaignError, SeedSource};
pub use corpus::{load_corpus, Corpus};
pub use report::Report;
