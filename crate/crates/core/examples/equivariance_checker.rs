//! Running the equivariance, additivity and reduction checks on the built-in
//! probes.

use dyadic_ergm::equivariance::{builtin_probes, check_additivity, check_equivariance, verify_reduction, ProbeKind};

fn main() -> dyadic_ergm::Result<()> {
    for b in builtin_probes(4)? {
        let p = &b.probe;
        let eq = check_equivariance(p, 500, 0)?;
        print!("{:<24} equivariant={:<5}", p.name, eq.equivariant);
        if let Some(w) = &eq.witness {
            println!("  witness: {w}");
            continue;
        }
        let add = check_additivity(p, 8, 1e-6)?;
        print!(" additive={:<5} symmetric={:<5} mixed={:.2e}", add.additive, add.symmetric_additive, add.max_mixed_partial);
        if add.additive {
            let n = if p.kind == ProbeKind::Nodal { p.size } else if p.directed { 4 } else { 5 };
            let r = verify_reduction(p, n, 1e-9, 0)?;
            print!("  reduces to {} (gap {:.1e})", r.reduced.family(), r.max_gap);
        }
        println!();
    }
    Ok(())
}
