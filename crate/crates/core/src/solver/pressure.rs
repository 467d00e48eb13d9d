use num_complex::Complex64;

use crate::field::{ScalarField, VelocityField};
use crate::spectral::Spectral2d;

/// Kinematic pressure `p / rho` of a divergence-free periodic field.
///
/// Solves `lap(p/rho) = -(du_i/dx_j)(du_j/dx_i)` spectrally; the mean of the
/// result is fixed to zero.
pub fn pressure_from_velocity(f: &VelocityField) -> ScalarField {
    let grid = *f.grid();
    let mut sp = Spectral2d::new(&grid);
    let u_hat = sp.forward(f.u());
    let v_hat = sp.forward(f.v());
    let ux = sp.inverse(&sp.ddx(&u_hat));
    let uy = sp.inverse(&sp.ddy(&u_hat));
    let vx = sp.inverse(&sp.ddx(&v_hat));
    let vy = sp.inverse(&sp.ddy(&v_hat));
    let source: Vec<f64> = (0..grid.len())
        .map(|k| -(ux[k] * ux[k] + 2.0 * uy[k] * vx[k] + vy[k] * vy[k]))
        .collect();
    let s_hat = sp.forward(&source);
    let nx = grid.nx();
    let p_hat: Vec<Complex64> = s_hat
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let k2 = sp.k2(idx % nx, idx / nx);
            if k2 > 0.0 {
                -s / k2
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    ScalarField::new(grid, sp.inverse(&p_hat)).expect("finite input yields finite pressure")
}
