//! Weighted Bessel potential norms and randomized checks of the embedding,
//! isometry and Hausdorff-Young type inequalities.

use psidyn::spaces::{bessel_norm, check_proposition, random_field, BesselNormSpec, PropId, PropParams};
use psidyn::spectral::make_grid;

fn main() -> psidyn::Result<()> {
    let grid = make_grid(1, 128, 20.0)?;
    let f = random_field(&grid, 3.0, 42);
    for spec in [BesselNormSpec::inner(2.0, 1.0, 2.0), BesselNormSpec::outer(2.0, 1.0, 2.0), BesselNormSpec::inner(0.0, 0.0, 4.0)] {
        println!("{:?} (g1 {}, g2 {}, q {}): {:.6}", spec.kind, spec.gamma1, spec.gamma2, spec.q, bessel_norm(&f, &spec)?);
    }
    let params = PropParams { samples: 50, ..PropParams::default() };
    for prop in PropId::ALL {
        let params = match prop {
            PropId::PLargeEmbedding => PropParams { q: 4.0, ..params },
            PropId::InOutBridge => PropParams { q: 1.5, ..params },
            _ => params,
        };
        let r = check_proposition(prop, &params)?;
        println!(
            "{prop:?}: worst ratio {:.4}, violations {}, passed {}{}",
            r.worst_ratio,
            r.violations,
            r.passed,
            if r.diagnostic { " (diagnostic)" } else { "" }
        );
    }
    Ok(())
}
