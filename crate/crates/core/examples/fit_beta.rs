//! Fitting the β model, including a degree sequence with no MLE.

use dyadic_ergm::estimation::fit_beta;
use dyadic_ergm::{Error, FitOptions, Graph, ModelSpec};

fn main() -> dyadic_ergm::Result<()> {
    let opts = FitOptions::default();
    let g = Graph::from_edges(6, false, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (1, 5), (0, 4)])?;
    let fit = fit_beta(&g, &opts)?;
    let ModelSpec::Beta { beta } = &fit.params else { unreachable!() };
    println!("degrees {:?}", g.degree_sequence()?);
    println!("beta    {:.6?}", beta);
    println!("{} iterations, moment gap {:.2e}", fit.iterations, fit.max_moment_gap);

    let star = Graph::from_edges(4, false, [(0, 1), (0, 2), (0, 3)])?;
    match fit_beta(&star, &opts) {
        Err(Error::NonexistentMle { violations, .. }) => {
            for v in violations {
                println!("star: {v}");
            }
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
