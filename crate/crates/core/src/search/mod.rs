//! Graph enumeration, instance sampling and bulk bound campaigns.

pub mod campaign;
pub mod canon;
pub mod enumerate;
pub mod sample;

pub use campaign::{
    load_violations, recheck_violation, run_campaign, write_campaign, BoundAggregate, CampaignConfig, CampaignError,
    CampaignOutputs, CampaignReport, GraphSource, ViolationRecord,
};
pub use canon::{canonical_form, canonical_labeling, CanonicalForm};
pub use enumerate::{enumerate_graphs, EnumerateError, GraphFilter};
pub use sample::{draw_ratio, sample_list_instance, sample_weights, WeightKind, WeightSampler};
