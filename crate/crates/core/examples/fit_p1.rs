//! The p1/configuration model on a directed graph, reported with sum(beta) = 0.

use dyadic_ergm::estimation::fit_p1_config;
use dyadic_ergm::oracle::certify_mle;
use dyadic_ergm::{FitOptions, Graph, ModelSpec};

fn main() -> dyadic_ergm::Result<()> {
    let g = Graph::from_edges(4, true, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (2, 1)])?;
    let fit = fit_p1_config(&g, &FitOptions::default())?;
    let ModelSpec::P1Config { alpha, beta } = &fit.params else { unreachable!() };
    println!("out/in degrees {:?}", g.out_in_degrees()?);
    println!("alpha {:.6?}", alpha);
    println!("beta  {:.6?}  (sum {:.1e})", beta, beta.iter().sum::<f64>());
    for d in &fit.diagnostics {
        println!("note: {d}");
    }
    let cert = certify_mle(&g, &fit.params, 500, 1)?;
    println!("certified against {} competitors: {}", cert.competitors_checked, cert.certified);
    Ok(())
}
