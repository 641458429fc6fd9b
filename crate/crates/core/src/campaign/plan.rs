use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CampaignConfig, CampaignError, TargetSpec};
use crate::mutation::{Mutation, MutationSite};

fn covered(site: &MutationSite, target: &TargetSpec) -> bool {
    site.enclosing_function == target.function
        && (site.enclosing_file == target.file || site.enclosing_file.ends_with(&target.file))
}

/// Mutations for every site inside a covered function of an enabled kind,
/// in seeded random order, truncated to `max_mutations`.
pub fn plan(sites: &[MutationSite], targets: &[TargetSpec], config: &CampaignConfig) -> Result<Vec<Mutation>, CampaignError> {
    let mut out = Vec::new();
    for site in sites {
        if !config.mutator_kinds.contains(&site.kind) || !targets.iter().any(|t| covered(site, t)) {
            continue;
        }
        if site.candidates.is_empty() {
            continue;
        }
        out.push(Mutation::choose(site, config.seed)?);
    }
    if out.is_empty() {
        return Err(CampaignError::EmptyPlan);
    }
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    out.truncate(config.max_mutations);
    Ok(out)
}
