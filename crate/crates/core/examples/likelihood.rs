//! Log-likelihoods and log-partition functions for each family.

use dyadic_ergm::{BlockAssignment, Graph, ModelSpec};

fn main() -> dyadic_ergm::Result<()> {
    let g = Graph::from_edges(5, false, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])?;
    let blocks = BlockAssignment::new(vec![0, 0, 1, 1, 2])?;
    let models = [
        ModelSpec::erdos_renyi(-0.2, false)?,
        ModelSpec::beta(vec![0.4, -0.1, 0.4, -0.3, -0.3])?,
        ModelSpec::sbm_from_upper(blocks.clone(), &[0.5, -0.4, 0.1, 0.2, -1.0, 0.0])?,
        ModelSpec::additive_sbm(blocks, vec![0.1, -0.2, 0.3], vec![0.8, -0.5, 0.0])?,
    ];
    for m in &models {
        println!(
            "{:<14} psi = {:>10.6}  loglik = {:>10.6}  (from statistics {:>10.6})",
            m.family().name(),
            m.log_partition(g.n())?,
            m.log_likelihood(&g)?,
            m.log_likelihood_from_stats(&g)?
        );
    }
    Ok(())
}
