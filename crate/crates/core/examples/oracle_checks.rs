//! Checking closed forms against brute-force enumeration of every graph.

use dyadic_ergm::oracle::{brute_expected_stats, brute_log_partition, enumerate_graphs, total_probability};
use dyadic_ergm::ModelSpec;

fn main() -> dyadic_ergm::Result<()> {
    let m = ModelSpec::p1_config(vec![0.3, -0.4, 0.9], vec![-0.2, 0.5, 0.1])?;
    let n = 3;
    println!("{} directed graphs on {n} nodes", enumerate_graphs(n, true)?.len());
    println!("total probability {:.15}", total_probability(&m, n)?);
    println!("log partition  closed {:.15}  brute {:.15}", m.log_partition(n)?, brute_log_partition(&m, n)?);
    let gap = m.expected_stats(n)?.max_abs_diff(&brute_expected_stats(&m, n)?)?;
    println!("expected statistics differ by at most {gap:.1e}");
    Ok(())
}
