//! The logarithmic Laplacian: its multiplier is |xi|^{2t}, and the log-type
//! integrability conditions stay finite on every ball.

use psidyn::propagator::{multiplier_field, ZeroModePolicy};
use psidyn::quadrature::QuadratureSpec;
use psidyn::spectral::make_grid;
use psidyn::symbols::log_laplacian;
use psidyn::wellposedness::{check_log_conditions, LogCheckOptions};

fn main() -> psidyn::Result<()> {
    let grid = make_grid(1, 64, 20.0)?;
    let quad = QuadratureSpec::default();
    let sym = log_laplacian();
    for t in [0.25, 1.0, 2.0] {
        let m = multiplier_field(&sym, 0.0, t, &grid, &quad, ZeroModePolicy::Drop)?;
        let worst = (0..grid.len())
            .filter(|&k| grid.frequency_norm_sq(k) > 0.0)
            .map(|k| {
                let exact = grid.frequency_norm_sq(k).powf(t);
                (m[k].materialize().unwrap().re - exact).abs() / exact
            })
            .fold(0.0, f64::max);
        println!("t = {t}: max relative deviation from |xi|^(2t) = {worst:.2e}");
    }
    for radius in [1.0, 2.0, 4.0] {
        let r = check_log_conditions(&sym, &grid, 1.0, radius, &quad, LogCheckOptions::default())?;
        println!(
            "R = {radius}: Log0 {:.4}, Log1 {:.4}, Log2 {:.4}, all finite: {}",
            r.log0.bound,
            r.log1.bound,
            r.log2.bound,
            r.all_finite()
        );
    }
    Ok(())
}
