//! Differential operators, carre du champ, and quadrature on the grid.
//!
//! First and second derivatives are second-order centered differences with
//! one-sided second-order stencils at the faces. The discrete Hessian uses
//! the same compact second differences on the diagonal that the Laplacian is
//! built from, and commuting first-derivative compositions off-diagonal, so
//! the Hessian is exactly symmetric and its trace is exactly the Laplacian.
//! This makes the CD(0,d) margin a true pointwise Cauchy-Schwarz inequality
//! on the discrete Hessian rather than a finite-difference artifact.

use crate::error::{Error, Result};
use crate::grid::{Field, FaceKind, Side};

/// First derivative along `axis`.
pub fn deriv_axis(f: &Field, axis: usize) -> Field {
    let dom = f.domain().clone();
    let n = dom.shape();
    let stride = dom.strides()[axis];
    let na = n[axis];
    let h = dom.spacing(axis);
    let src = f.data();
    let mut out = vec![0.0; src.len()];
    if na == 1 {
        return Field::from_vec(dom, out).unwrap();
    }
    assert!(na >= 3, "derivative stencils need at least 3 cells per axis");
    for lin in 0..src.len() {
        let ia = dom.multi_index(lin)[axis];
        out[lin] = if ia == 0 {
            (-3.0 * src[lin] + 4.0 * src[lin + stride] - src[lin + 2 * stride]) / (2.0 * h)
        } else if ia == na - 1 {
            (3.0 * src[lin] - 4.0 * src[lin - stride] + src[lin - 2 * stride]) / (2.0 * h)
        } else {
            (src[lin + stride] - src[lin - stride]) / (2.0 * h)
        };
    }
    Field::from_vec(dom, out).unwrap()
}

/// Compact second derivative along `axis` (3-point interior, 4-point
/// one-sided at the faces).
pub fn second_deriv_axis(f: &Field, axis: usize) -> Field {
    let dom = f.domain().clone();
    let n = dom.shape();
    let stride = dom.strides()[axis];
    let na = n[axis];
    let h2 = dom.spacing(axis) * dom.spacing(axis);
    let src = f.data();
    let mut out = vec![0.0; src.len()];
    if na == 1 {
        return Field::from_vec(dom, out).unwrap();
    }
    assert!(na >= 4, "second-derivative stencils need at least 4 cells per axis");
    for lin in 0..src.len() {
        let ia = dom.multi_index(lin)[axis];
        out[lin] = if ia == 0 {
            (2.0 * src[lin] - 5.0 * src[lin + stride] + 4.0 * src[lin + 2 * stride]
                - src[lin + 3 * stride])
                / h2
        } else if ia == na - 1 {
            (2.0 * src[lin] - 5.0 * src[lin - stride] + 4.0 * src[lin - 2 * stride]
                - src[lin - 3 * stride])
                / h2
        } else {
            (src[lin + stride] - 2.0 * src[lin] + src[lin - stride]) / h2
        };
    }
    Field::from_vec(dom, out).unwrap()
}

/// Gradient as one component field per axis.
pub fn gradient(f: &Field) -> Vec<Field> {
    (0..f.domain().dim()).map(|a| deriv_axis(f, a)).collect()
}

/// Divergence of a vector field given per-axis components.
pub fn divergence(components: &[Field]) -> Result<Field> {
    let dim = components[0].domain().dim();
    if components.len() != dim {
        return Err(Error::DimensionMismatch);
    }
    let mut out = Field::zeros(components[0].domain().clone());
    for (a, comp) in components.iter().enumerate() {
        components[0].check_same_domain(comp)?;
        let d = deriv_axis(comp, a);
        for (o, v) in out.data_mut().iter_mut().zip(d.data()) {
            *o += v;
        }
    }
    Ok(out)
}

/// Laplacian: sum of compact second differences (equals the Hessian trace).
pub fn laplacian(f: &Field) -> Field {
    let mut out = Field::zeros(f.domain().clone());
    for a in 0..f.domain().dim() {
        let d2 = second_deriv_axis(f, a);
        for (o, v) in out.data_mut().iter_mut().zip(d2.data()) {
            *o += v;
        }
    }
    out
}

/// Full discrete Hessian, row-major `d*d` component fields. Symmetric by
/// construction (mixed partials commute on the tensor grid).
pub fn hessian(f: &Field) -> Vec<Field> {
    let dim = f.domain().dim();
    let grads: Vec<Field> = (0..dim).map(|a| deriv_axis(f, a)).collect();
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                out.push(second_deriv_axis(f, i));
            } else if j > i {
                out.push(deriv_axis(&grads[j], i));
            } else {
                // symmetric entry, reuse the (j,i) computation
                let prev = out[j * dim + i].clone();
                out.push(prev);
            }
        }
    }
    out
}

/// Carre du champ `Gamma(a, b) = grad a . grad b`.
pub fn gamma(a: &Field, b: &Field) -> Result<Field> {
    a.check_same_domain(b)?;
    let mut out = Field::zeros(a.domain().clone());
    for axis in 0..a.domain().dim() {
        let da = deriv_axis(a, axis);
        let db = deriv_axis(b, axis);
        for ((o, x), y) in out.data_mut().iter_mut().zip(da.data()).zip(db.data()) {
            *o += x * y;
        }
    }
    Ok(out)
}

/// Iterated carre du champ from the Hessian-trace closed form,
/// `Gamma_2(a, b) = tr((Hess a)^T Hess b)`.
pub fn gamma2(a: &Field, b: &Field) -> Result<Field> {
    a.check_same_domain(b)?;
    let ha = hessian(a);
    let hb = if std::ptr::eq(a, b) { None } else { Some(hessian(b)) };
    let mut out = Field::zeros(a.domain().clone());
    for (k, comp_a) in ha.iter().enumerate() {
        let comp_b = match &hb {
            Some(hb) => &hb[k],
            None => comp_a,
        };
        for ((o, x), y) in out
            .data_mut()
            .iter_mut()
            .zip(comp_a.data())
            .zip(comp_b.data())
        {
            *o += x * y;
        }
    }
    Ok(out)
}

/// Worst-margin report for a pointwise inequality or identity check.
#[derive(Clone, Debug)]
pub struct CdReport {
    /// min over interior cells of `Gamma_2(a) - (Lap a)^2 / d`
    pub worst_margin: f64,
    pub worst_cell: usize,
    pub interior_cells: usize,
}

/// Checks the CD(0,d) condition `Gamma_2(a) >= (Lap a)^2 / d` on interior
/// cells. With the shared Hessian trace this is an exact discrete
/// Cauchy-Schwarz inequality, so margins below roundoff indicate a bug.
pub fn check_cd_condition(a: &Field) -> CdReport {
    let dim = a.domain().dim() as f64;
    let g2 = gamma2(a, a).unwrap();
    let lap = laplacian(a);
    let mut worst = f64::INFINITY;
    let mut worst_cell = 0;
    let mut count = 0;
    for lin in 0..a.len() {
        if !a.domain().is_interior(lin, 1) {
            continue;
        }
        count += 1;
        let margin = g2.data()[lin] - lap.data()[lin] * lap.data()[lin] / dim;
        if margin < worst {
            worst = margin;
            worst_cell = lin;
        }
    }
    CdReport {
        worst_margin: worst,
        worst_cell,
        interior_cells: count,
    }
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub worst_error: f64,
    pub worst_cell: usize,
}

/// Checks the Hessian representation
/// `Hess f(grad g, grad h) = (Gamma(g,Gamma(f,h)) + Gamma(h,Gamma(f,g)) - Gamma(f,Gamma(g,h))) / 2`
/// on cells at least two layers away from the faces (nested gradients lose
/// an order at one-sided stencils).
pub fn check_hessian_gamma_identity(f: &Field, g: &Field, h: &Field) -> Result<IdentityReport> {
    f.check_same_domain(g)?;
    f.check_same_domain(h)?;
    let dim = f.domain().dim();
    let hf = hessian(f);
    let dg = gradient(g);
    let dh = gradient(h);
    let mut lhs = Field::zeros(f.domain().clone());
    for i in 0..dim {
        for j in 0..dim {
            let comp = &hf[i * dim + j];
            for (((o, hij), gi), hj) in lhs
                .data_mut()
                .iter_mut()
                .zip(comp.data())
                .zip(dg[i].data())
                .zip(dh[j].data())
            {
                *o += hij * gi * hj;
            }
        }
    }
    let gfh = gamma(f, h)?;
    let gfg = gamma(f, g)?;
    let ggh = gamma(g, h)?;
    let t1 = gamma(g, &gfh)?;
    let t2 = gamma(h, &gfg)?;
    let t3 = gamma(f, &ggh)?;
    let mut worst = 0.0f64;
    let mut worst_cell = 0;
    for lin in 0..f.len() {
        if !f.domain().is_interior(lin, 2) {
            continue;
        }
        let rhs = 0.5 * (t1.data()[lin] + t2.data()[lin] - t3.data()[lin]);
        let err = (lhs.data()[lin] - rhs).abs();
        if err > worst {
            worst = err;
            worst_cell = lin;
        }
    }
    Ok(IdentityReport {
        worst_error: worst,
        worst_cell,
    })
}

/// Cell quadrature (midpoint rule over cell centers), second order.
pub fn integrate(f: &Field) -> f64 {
    f.data().iter().sum::<f64>() * f.domain().cell_volume()
}

/// Quadratic extrapolation of the three boundary-adjacent layers to the face.
fn face_value(f0: f64, f1: f64, f2: f64) -> f64 {
    (15.0 * f0 - 10.0 * f1 + 3.0 * f2) / 8.0
}

/// Derivative along the inward axis direction, evaluated at the face.
fn face_inward_derivative(f0: f64, f1: f64, f2: f64, h: f64) -> f64 {
    (-2.0 * f0 + 3.0 * f1 - f2) / h
}

/// Integral of `f` over one true-boundary face with respect to the
/// `(d-1)`-dimensional Hausdorff measure.
pub fn trace_integrate(f: &Field, axis: usize, side: Side) -> Result<f64> {
    let dom = f.domain();
    if dom.face_kind(axis, side) != FaceKind::TrueBoundary {
        return Err(Error::TraceOnTruncationFace);
    }
    let area = dom.face_area_element(axis);
    let src = f.data();
    let mut total = 0.0;
    dom.for_face_lines(axis, side, |i0, i1, i2| {
        total += face_value(src[i0], src[i1], src[i2]);
    });
    Ok(total * area)
}

/// Outward flux of a vector field through the whole box boundary.
pub fn boundary_flux(components: &[Field]) -> f64 {
    let dom = components[0].domain();
    let mut total = 0.0;
    for axis in 0..dom.dim() {
        let area = dom.face_area_element(axis);
        let src = components[axis].data();
        for (side, sign) in [(Side::Low, -1.0), (Side::High, 1.0)] {
            let mut face_sum = 0.0;
            dom.for_face_lines(axis, side, |i0, i1, i2| {
                face_sum += face_value(src[i0], src[i1], src[i2]);
            });
            total += sign * face_sum * area;
        }
    }
    total
}

/// Surface integral of `(d_nu g) * w` over the whole box boundary, with both
/// factors extrapolated to the faces.
pub fn surface_integral_normal_derivative(g: &Field, w: &Field) -> Result<f64> {
    g.check_same_domain(w)?;
    let dom = g.domain();
    let gs = g.data();
    let ws = w.data();
    let mut total = 0.0;
    for axis in 0..dom.dim() {
        let area = dom.face_area_element(axis);
        let h = dom.spacing(axis);
        for side in [Side::Low, Side::High] {
            let mut face_sum = 0.0;
            dom.for_face_lines(axis, side, |i0, i1, i2| {
                // outward normal derivative = -(inward derivative)
                let dnu = -face_inward_derivative(gs[i0], gs[i1], gs[i2], h);
                let wv = face_value(ws[i0], ws[i1], ws[i2]);
                face_sum += dnu * wv;
            });
            total += face_sum * area;
        }
    }
    Ok(total)
}
