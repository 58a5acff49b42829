//! Mass-preserving dilation `u_lambda(x) = lambda^d u(lambda x)` on the
//! grid, with separable Catmull-Rom interpolation of the cell data.

use crate::error::{Error, Result};
use crate::grid::Field;

fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Cubic interpolation of `u` at an arbitrary point inside the box (padded
/// 3-coordinate form); nodes are clamped at the faces.
pub(crate) fn interpolate(u: &Field, x: &[f64; 3]) -> f64 {
    let dom = u.domain();
    let mut idx = [[0usize; 4]; 3];
    let mut wts = [[0.0f64; 4]; 3];
    for a in 0..3 {
        if a >= dom.dim() {
            idx[a] = [0; 4];
            wts[a] = [1.0, 0.0, 0.0, 0.0];
            continue;
        }
        let n = dom.cells(a) as isize;
        let s = (x[a] - dom.lo(a)) / dom.spacing(a) - 0.5;
        let i0 = s.floor() as isize;
        let t = s - i0 as f64;
        let w = catmull_rom_weights(t);
        for k in 0..4 {
            idx[a][k] = (i0 - 1 + k as isize).clamp(0, n - 1) as usize;
            wts[a][k] = w[k];
        }
    }
    let mut total = 0.0;
    for k0 in 0..4 {
        if wts[0][k0] == 0.0 {
            continue;
        }
        for k1 in 0..4 {
            if wts[1][k1] == 0.0 {
                continue;
            }
            for k2 in 0..4 {
                if wts[2][k2] == 0.0 {
                    continue;
                }
                let lin = dom.linear_index(&[idx[0][k0], idx[1][k1], idx[2][k2]]);
                total += wts[0][k0] * wts[1][k1] * wts[2][k2] * u.data()[lin];
            }
        }
    }
    total
}

fn inside(u: &Field, x: &[f64; 3]) -> bool {
    let dom = u.domain();
    (0..dom.dim()).all(|a| x[a] >= dom.lo(a) && x[a] <= dom.hi(a))
}

/// `u_lambda(x) = lambda^d u(lambda x)`, which preserves mass under the
/// continuum change of variables. For `lambda < 1` the support expands; the
/// call errors if a non-negligible part of it would leave the box.
pub fn rescale(u: &Field, lambda: f64) -> Result<Field> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::ParameterOutOfRange(format!(
            "rescaling factor must be positive, got {lambda}"
        )));
    }
    if lambda == 1.0 {
        return Ok(u.clone());
    }
    let dom = u.domain().clone();
    let dim = dom.dim();
    if lambda < 1.0 {
        // mass carried outside the box comes from cells outside lambda*box
        let mass: f64 = u.data().iter().sum();
        let mut lost = 0.0;
        for lin in 0..u.len() {
            let x = dom.cell_center(lin);
            let escapes = (0..dim)
                .any(|a| x[a] < lambda * dom.lo(a) || x[a] > lambda * dom.hi(a));
            if escapes {
                lost += u.data()[lin];
            }
        }
        if lost > 1e-10 * mass.max(1e-300) {
            return Err(Error::SupportEscapesBox);
        }
    }
    let scale = lambda.powi(dim as i32);
    let out = Field::from_fn(dom.clone(), |xs| {
        let mut y = [0.0; 3];
        for (a, &c) in xs.iter().enumerate() {
            y[a] = lambda * c;
        }
        if !inside(u, &y) {
            return 0.0;
        }
        (scale * interpolate(u, &y)).max(0.0)
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gradient, integrate, Domain};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn fisher(u: &Field) -> f64 {
        let floor = 1e-12 * u.max();
        let grads = gradient(u);
        let mut s = Field::zeros(u.domain().clone());
        for g in &grads {
            for (o, &v) in s.data_mut().iter_mut().zip(g.data()) {
                *o += v * v;
            }
        }
        let integrand = s
            .zip_map(u, |num, den| if den <= floor { 0.0 } else { num / den })
            .unwrap();
        integrate(&integrand)
    }

    fn gaussian_on_half_line() -> Field {
        let dom = Arc::new(Domain::half_space(1, 0.0, 14.0, 16384).unwrap());
        let u = Field::from_fn(dom, |x| (-2.0 * (x[0] - 3.0) * (x[0] - 3.0)).exp());
        let m = integrate(&u);
        u.scale(1.0 / m)
    }

    #[test]
    fn identity_at_lambda_one() {
        let u = gaussian_on_half_line();
        let r = rescale(&u, 1.0).unwrap();
        assert_eq!(u.data(), r.data());
    }

    #[test]
    fn mass_is_preserved() {
        let u = gaussian_on_half_line();
        for lambda in [0.8, 1.3, 2.0] {
            let r = rescale(&u, lambda).unwrap();
            assert_relative_eq!(integrate(&r), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn fisher_information_scales_quadratically() {
        let u = gaussian_on_half_line();
        let f1 = fisher(&u);
        let f2 = fisher(&rescale(&u, 2.0).unwrap());
        assert_relative_eq!(f2, 4.0 * f1, max_relative = 1e-6);
    }

    #[test]
    fn escaping_support_is_detected() {
        let dom = Arc::new(Domain::half_space(1, 0.0, 5.0, 512).unwrap());
        let u = Field::from_fn(dom, |x| (-0.1 * x[0]).exp());
        assert!(matches!(rescale(&u, 0.5), Err(Error::SupportEscapesBox)));
    }
}
