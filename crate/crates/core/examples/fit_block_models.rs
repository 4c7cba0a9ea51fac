//! Block models: the closed-form SBM fit, the additive SBM on three blocks and
//! the unidentifiable two-block case.

use dyadic_ergm::estimation::{fit_additive_sbm, fit_sbm};
use dyadic_ergm::sampling::sample;
use dyadic_ergm::{BlockAssignment, Error, FitOptions, ModelSpec, SampleConfig};

fn main() -> dyadic_ergm::Result<()> {
    let n = 24;
    let blocks = BlockAssignment::new((0..n).map(|i| i % 3).collect())?;
    let truth = ModelSpec::additive_sbm(blocks.clone(), vec![0.4, -0.3, 0.1], vec![0.5, 0.0, -0.5])?;
    let g = sample(&truth, n, &SampleConfig::new(5, 1)?)?.remove(0);
    let opts = FitOptions::default();

    let sbm = fit_sbm(&g, &blocks, &opts)?;
    println!("sbm:          {:?}", sbm.params.params());
    let additive = fit_additive_sbm(&g, &blocks, &opts)?;
    println!("additive sbm: {:?}", additive.params.param_names());
    println!("              {:.4?}", additive.params.params());
    println!("truth:        {:.4?}", truth.params());

    let two = BlockAssignment::new((0..n).map(|i| i % 2).collect())?;
    if let Err(Error::UnidentifiableParameters { names, direction }) = fit_additive_sbm(&g, &two, &opts) {
        println!("two blocks: null direction {direction:?} over {names:?}");
    }
    Ok(())
}
