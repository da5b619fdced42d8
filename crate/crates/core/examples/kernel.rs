//! Physical kernels: the heat kernel matches the Gaussian
//! (4 pi t)^{-1/2} exp(-x^2 / (4t)); the backward heat kernel does not exist
//! on a wide band and is reported as an overflow.

use psidyn::propagator::kernel_snapshot;
use psidyn::quadrature::QuadratureSpec;
use psidyn::spectral::make_grid;
use psidyn::symbols::SecondOrderSymbol;
use psidyn::Error;
use std::f64::consts::PI;

fn main() -> psidyn::Result<()> {
    let quad = QuadratureSpec::default();
    let grid = make_grid(1, 256, 40.0)?;
    let t = 0.5;
    let k = kernel_snapshot(&SecondOrderSymbol::heat(1)?, 0.0, t, &grid, &quad)?;
    let err = (0..grid.len())
        .map(|j| {
            let x = grid.position(j)[0];
            (k.values()[j].re - (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()).abs()
        })
        .fold(0.0, f64::max);
    println!("heat kernel at t = {t}: max deviation from the Gaussian {err:.2e}, mass {:.12}", k.lq_norm(1.0));

    let wide = make_grid(1, 64, 2.0 * PI)?;
    match kernel_snapshot(&SecondOrderSymbol::isotropic(1, -1.0)?, 0.0, 1.0, &wide, &quad) {
        Err(Error::KernelOverflow { modes }) => println!("backward heat kernel: {} modes overflow", modes.len()),
        other => println!("unexpected: {:?}", other.map(|f| f.max_abs())),
    }
    Ok(())
}
