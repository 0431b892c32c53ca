//! Operator algebra on the discrete Hardy space: Toeplitz operators T_b,
//! the Lax operator L_u = D − T_u, the operator X* and the boundary
//! functional I₊(f) = f̂(0⁺).
//!
//! Matrices act on Hardy coefficients in the symmetrized basis c̃ = W^{1/2} c
//! with W = diag(2, 1, …, 1) (the weight of the Hardy inner product on stored
//! coefficients). In that basis the plain matrix inner product equals the
//! Hardy one, Toeplitz matrices with real symbols are Hermitian, and the
//! congruence T̃ = W^{−1/2} T₀ W^{−1/2} of the plain Toeplitz matrix
//! T₀[n,m] = (1/2L) b̂(ξ_{n−m}) preserves sign-definiteness, so L_{u₀} is
//! exactly positive semidefinite whenever u₀ ≤ 0 on the grid.

use nalgebra::{DMatrix, DVector};

use crate::grid::{szego_project_complex, ComplexField, HardyField, RealField};
use crate::C64;

/// Matrix-free Toeplitz action T_b f = Π(b f).
pub fn toeplitz_apply(b: &RealField, f: &HardyField) -> HardyField {
    debug_assert!(b.grid().same_as(f.grid()));
    let synth = f.synthesize();
    let prod: Vec<C64> = synth
        .values()
        .iter()
        .zip(b.values())
        .map(|(v, s)| v * s)
        .collect();
    let field = ComplexField::new(f.grid().clone(), prod).expect("same grid");
    szego_project_complex(&field)
}

/// Matrix-free Lax action L_{u₀} f = D f − T_{u₀} f.
pub fn lax_apply(u0: &RealField, f: &HardyField) -> HardyField {
    f.d_apply().sub(&toeplitz_apply(u0, f))
}

/// Map stored Hardy coefficients to the symmetrized basis.
pub(crate) fn to_symmetrized(f: &HardyField) -> DVector<C64> {
    let mut v = DVector::from_column_slice(f.coeff());
    v[0] *= std::f64::consts::SQRT_2;
    v
}

/// Inverse of [`to_symmetrized`].
pub(crate) fn from_symmetrized(
    grid: &std::sync::Arc<crate::SpatialGrid>,
    v: &DVector<C64>,
) -> HardyField {
    let mut coeff: Vec<C64> = v.iter().copied().collect();
    coeff[0] *= std::f64::consts::FRAC_1_SQRT_2;
    HardyField::new(grid.clone(), coeff).expect("length M/2")
}

/// Dense Toeplitz operator for a real symbol, in the symmetrized basis.
///
/// Entries are s_n s_m (1/2L) b̂(ξ_n − ξ_m) with s_0 = 1/√2; away from the
/// shared zero mode this is the plain (1/2L) b̂(ξ_n − ξ_m), and the matrix is
/// Hermitian for real b.
pub struct ToeplitzMatrix {
    grid: std::sync::Arc<crate::SpatialGrid>,
    mat: DMatrix<C64>,
}

impl ToeplitzMatrix {
    pub fn new(b: &RealField) -> Self {
        let grid = b.grid().clone();
        let half = grid.hardy_len();
        let spec = b.spectrum();
        let m = grid.point_count();
        let norm = 1.0 / (2.0 * grid.half_width());
        // b̂ at signed frequency ξ_d, d = n−m ∈ (−M/2, M/2)
        let sym = |d: i64| -> C64 {
            let bin = if d >= 0 { d as usize } else { (m as i64 + d) as usize };
            spec[bin]
        };
        let s0 = std::f64::consts::FRAC_1_SQRT_2;
        let mat = DMatrix::from_fn(half, half, |n, mm| {
            let scale = if n == 0 { s0 } else { 1.0 } * if mm == 0 { s0 } else { 1.0 };
            sym(n as i64 - mm as i64) * (norm * scale)
        });
        Self { grid, mat }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn apply(&self, f: &HardyField) -> HardyField {
        debug_assert!(self.grid.same_as(f.grid()));
        let v = to_symmetrized(f);
        from_symmetrized(&self.grid, &(&self.mat * v))
    }
}

/// Dense Lax operator L_{u₀} = D − T_{u₀} in the symmetrized basis; Hermitian
/// for real u₀, with diagonal part carrying ξ_n.
pub struct LaxMatrix {
    grid: std::sync::Arc<crate::SpatialGrid>,
    mat: DMatrix<C64>,
}

impl LaxMatrix {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn grid(&self) -> &std::sync::Arc<crate::SpatialGrid> {
        &self.grid
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn apply(&self, f: &HardyField) -> HardyField {
        debug_assert!(self.grid.same_as(f.grid()));
        let v = to_symmetrized(f);
        from_symmetrized(&self.grid, &(&self.mat * v))
    }
}

/// Assemble the dense Lax matrix for a real datum.
pub fn assemble_lax(u0: &RealField) -> LaxMatrix {
    let grid = u0.grid().clone();
    let toeplitz = ToeplitzMatrix::new(u0);
    let mut mat = -toeplitz.mat;
    for n in 0..grid.hardy_len() {
        mat[(n, n)] += grid.xi(n);
    }
    LaxMatrix { grid, mat }
}

/// Boundary value I₊(f) = f̂(0⁺) by quartic extrapolation from the first
/// five positive modes (the stored zero mode carries the shared-half
/// convention and is skipped). The error is O(Δξ⁵ f̂⁽⁵⁾).
pub fn i_plus(f: &HardyField) -> C64 {
    let c = f.coeff();
    assert!(c.len() >= 6, "grid too coarse for the boundary extrapolation");
    5.0 * c[1] - 10.0 * c[2] + 10.0 * c[3] - 5.0 * c[4] + c[5]
}

/// X* f, realized in frequency as i d/dξ of the underlying coefficients:
/// fourth-order central differences in the interior, with the two rows at
/// the ξ = 0 end built from the quartic through modes 1..5 (skipping the
/// shared zero mode, consistent with the I₊ convention). The soliton
/// parameters p_j = −⟨X*φ_j, φ_j⟩ and the Im p_j = |I₊(φ_j)|²/4π chain are
/// sensitive to the boundary rows, hence the matching order there.
pub fn xstar_apply(f: &HardyField) -> HardyField {
    let grid = f.grid().clone();
    let half = grid.hardy_len();
    assert!(half >= 8, "grid too coarse for the X* stencil");
    let h = grid.dxi();
    let u: Vec<C64> = (0..half).map(|n| f.underlying(n)).collect();
    let i = C64::new(0.0, 1.0);
    let mut out = vec![C64::new(0.0, 0.0); half];
    // derivative of the quartic through modes 1..5, at ξ = 0 and ξ = Δξ
    out[0] = i * (-385.0 * u[1] + 1070.0 * u[2] - 1170.0 * u[3] + 610.0 * u[4] - 125.0 * u[5])
        / (60.0 * h);
    out[1] = i
        * (-25.0 / 12.0 * u[1] + 4.0 * u[2] - 3.0 * u[3] + 4.0 / 3.0 * u[4] - 0.25 * u[5])
        / h;
    for n in 2..half - 2 {
        out[n] = i * (-u[n + 2] + 8.0 * u[n + 1] - 8.0 * u[n - 1] + u[n - 2]) / (12.0 * h);
    }
    // decayed top end: second-order stencils suffice
    out[half - 2] = i * (u[half - 1] - u[half - 3]) / (2.0 * h);
    out[half - 1] = i * (3.0 * u[half - 1] - 4.0 * u[half - 2] + u[half - 3]) / (2.0 * h);
    out[0] *= 0.5; // store the shared zero mode
    HardyField::new(grid, out).expect("length M/2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, periodized_soliton, szego_project, RealField, SpatialGrid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid() -> Arc<SpatialGrid> {
        make_grid(32.0, 512).unwrap()
    }

    fn r_i(g: &Arc<SpatialGrid>) -> RealField {
        let l = g.half_width();
        RealField::from_fn(g.clone(), move |x| {
            periodized_soliton(C64::new(0.0, 1.0), l, x)
        })
    }

    /// Normalized ground state φ₁ = ΠR_i/√π.
    fn phi1(g: &Arc<SpatialGrid>) -> HardyField {
        let h = szego_project(&r_i(g));
        let n = h.l2_norm();
        h.scale(C64::new(1.0 / n, 0.0))
    }

    #[test]
    fn toeplitz_zero_symbol_and_identity_symbol() {
        let g = grid();
        let f = phi1(&g);
        let zero = RealField::zeros(g.clone());
        assert!(toeplitz_apply(&zero, &f).l2_norm() < 1e-14);
        // identity symbol reproduces mean-zero Hardy fields exactly
        let one = RealField::from_fn(g.clone(), |_| 1.0);
        let mut f0 = f.clone();
        f0.coeff_mut()[0] = C64::new(0.0, 0.0);
        let t1 = toeplitz_apply(&one, &f0);
        assert!(t1.sub(&f0).l2_norm() < 1e-12);
    }

    #[test]
    fn toeplitz_matrix_matches_projection_path() {
        let g = grid();
        let b = RealField::from_fn(g.clone(), |x| (-x * x / 18.0).exp() * (1.0 + 0.3 * x.sin()));
        let tm = ToeplitzMatrix::new(&b);
        // a generic Hardy field
        let mut f = szego_project(&r_i(&g));
        for (n, c) in f.coeff_mut().iter_mut().enumerate() {
            *c *= C64::new(0.2 * (n as f64 * 0.11).cos() + 1.0, 0.1 * (n as f64 * 0.07).sin());
        }
        let dense = tm.apply(&f);
        let direct = toeplitz_apply(&b, &f);
        let rel = dense.sub(&direct).l2_norm() / direct.l2_norm().max(1e-30);
        assert!(rel < 1e-12, "two-path Toeplitz mismatch {rel:e}");
        // Hermitian in the symmetrized basis
        let a = tm.matrix();
        let mut herm = 0.0f64;
        for n in 0..a.nrows() {
            for m in 0..a.ncols() {
                herm = herm.max((a[(n, m)] - a[(m, n)].conj()).norm());
            }
        }
        assert!(herm < 1e-12);
    }

    // Eigen-relation oracle: L_{R_i} q = −½ q for q = ΠR_i, with the D and
    // T_{R_i} contributions ⟨Dq,q⟩ = ½⟨q,q⟩ and ⟨T q,q⟩ = ⟨q,q⟩ (residue
    // calculus on i/(x+i)).
    #[test]
    fn toeplitz_and_d_quadratic_forms_on_ground_state() {
        let g = grid();
        let u0 = r_i(&g);
        let f = phi1(&g);
        // trapezoid bias in the quadratic forms is O(Δξ²) at this grid
        let d_ratio = f.d_apply().inner(&f).re / f.inner(&f).re;
        assert!((d_ratio - 0.5).abs() < 5e-3, "⟨Dφ,φ⟩ ratio {d_ratio}");
        let t_ratio = toeplitz_apply(&u0, &f).inner(&f).re / f.inner(&f).re;
        assert!((t_ratio - 1.0).abs() < 5e-3, "⟨Tφ,φ⟩ ratio {t_ratio}");
        let l_ratio = lax_apply(&u0, &f).inner(&f).re / f.inner(&f).re;
        assert!((l_ratio + 0.5).abs() < 5e-3, "⟨Lφ,φ⟩ ratio {l_ratio}");
    }

    #[test]
    fn lax_of_zero_datum_is_diagonal() {
        let g = grid();
        let lax = assemble_lax(&RealField::zeros(g.clone()));
        let a = lax.matrix();
        for n in 0..g.hardy_len() {
            for m in 0..g.hardy_len() {
                let expect = if n == m { g.xi(n) } else { 0.0 };
                assert!((a[(n, m)] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn lax_matrix_hermitian_and_consistent() {
        let g = grid();
        let u0 = r_i(&g);
        let lax = assemble_lax(&u0);
        let a = lax.matrix();
        let mut herm = 0.0f64;
        for n in 0..a.nrows() {
            for m in 0..a.ncols() {
                herm = herm.max((a[(n, m)] - a[(m, n)].conj()).norm());
            }
        }
        assert!(herm < 1e-12, "Hermiticity residual {herm:e}");
        let f = phi1(&g);
        let dense = lax.apply(&f);
        let direct = lax_apply(&u0, &f);
        let rel = dense.sub(&direct).l2_norm() / direct.l2_norm().max(1e-30);
        assert!(rel < 1e-12, "two-path Lax mismatch {rel:e}");
    }

    #[test]
    fn lax_self_adjoint_in_hardy_metric() {
        let g = grid();
        let u0 = r_i(&g);
        let f = phi1(&g);
        let mut gg = szego_project(&RealField::from_fn(g.clone(), |x| {
            x * (-x * x / 30.0).exp() + 0.2
        }));
        for (n, c) in gg.coeff_mut().iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, 0.05 * n as f64);
        }
        let lhs = lax_apply(&u0, &f).inner(&gg);
        let rhs = f.inner(&lax_apply(&u0, &gg));
        let scale = f.l2_norm() * gg.l2_norm();
        assert!((lhs - rhs).norm() < 1e-10 * scale);
    }

    #[test]
    fn lax_positive_for_nonpositive_datum() {
        let g = grid();
        let u0 = r_i(&g).scale(-1.0);
        for seed in 0..3u32 {
            let f = szego_project(&RealField::from_fn(g.clone(), move |x| {
                ((seed as f64 + 1.0) * 0.3 * x).sin() * (-x * x / 40.0).exp()
            }));
            let q = lax_apply(&u0, &f).inner(&f).re;
            assert!(q > -1e-12 * f.inner(&f).re, "⟨Lf,f⟩ = {q}");
        }
    }

    // Residue oracle: X* φ₁ = −i φ₁ for φ₁ = ΠR_i/√π, so ⟨X*φ₁,φ₁⟩ = −i.
    #[test]
    fn xstar_on_ground_state() {
        let g = make_grid(64.0, 1024).unwrap();
        let f = phi1(&g);
        let xf = xstar_apply(&f);
        let defect = xf.sub(&f.scale(C64::new(0.0, -1.0))).l2_norm();
        assert!(defect < 2e-3, "X*φ + iφ defect {defect:e}");
        let pairing = xf.inner(&f);
        assert!(
            (pairing - C64::new(0.0, -1.0)).norm() < 2e-3,
            "⟨X*φ,φ⟩ = {pairing}"
        );
    }

    #[test]
    fn xstar_is_multiplication_when_spectrum_avoids_zero() {
        let g = grid();
        let half = g.hardy_len();
        // smooth frequency bump supported on modes 30..120: I₊ = 0 and the
        // representative decays rapidly, so Π(x f) is grid-computable
        let mut coeff = vec![C64::new(0.0, 0.0); half];
        for (n, c) in coeff.iter_mut().enumerate().take(120).skip(30) {
            let s = (n as f64 - 30.0) / 90.0;
            *c = C64::new((PI * s).sin().powi(2), 0.0);
        }
        let f = HardyField::new(g.clone(), coeff).unwrap();
        assert!(i_plus(&f).norm() < 1e-12);
        let xf = xstar_apply(&f);
        let synth = f.synthesize();
        let weighted: Vec<C64> = synth
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| v * g.point(k))
            .collect();
        let pxf = szego_project_complex(&ComplexField::new(g.clone(), weighted).unwrap());
        let rel = xf.sub(&pxf).l2_norm() / xf.l2_norm();
        assert!(rel < 5e-3, "X*f vs Π(xf) relative defect {rel:e}");
    }

    #[test]
    fn xstar_linearity() {
        let g = grid();
        let f = phi1(&g);
        let h = f.d_apply();
        let (a, b) = (C64::new(1.3, -0.4), C64::new(-0.2, 0.9));
        let lhs = xstar_apply(&f.scale(a).add(&h.scale(b)));
        let rhs = xstar_apply(&f).scale(a).add(&xstar_apply(&h).scale(b));
        assert!(lhs.sub(&rhs).l2_norm() < 1e-12 * (f.l2_norm() + h.l2_norm()));
    }

    #[test]
    fn xstar_adjoint_to_multiplication() {
        // ⟨X*f, g⟩ = ⟨f, Π(xg)⟩ for frequency-localized g
        let g = grid();
        let half = g.hardy_len();
        let mut cf = vec![C64::new(0.0, 0.0); half];
        let mut cg = vec![C64::new(0.0, 0.0); half];
        for n in 20..100 {
            let s = (n as f64 - 20.0) / 80.0;
            cf[n] = C64::new((PI * s).sin().powi(2), 0.3 * (2.0 * PI * s).sin());
            cg[n + 15] = C64::new((PI * s).sin().powi(2) * (1.0 - s), -0.2 * (PI * s).sin());
        }
        let f = HardyField::new(g.clone(), cf).unwrap();
        let gg = HardyField::new(g.clone(), cg).unwrap();
        let lhs = xstar_apply(&f).inner(&gg);
        let synth = gg.synthesize();
        let weighted: Vec<C64> = synth
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| v * g.point(k))
            .collect();
        let pxg = szego_project_complex(&ComplexField::new(g.clone(), weighted).unwrap());
        let rhs = f.inner(&pxg);
        let scale = f.l2_norm() * gg.l2_norm();
        assert!(
            (lhs - rhs).norm() < 1e-3 * scale,
            "adjoint defect {:e}",
            (lhs - rhs).norm()
        );
    }

    #[test]
    fn i_plus_of_ground_state_and_mass() {
        // residue oracle: the half-line transform of ΠR_i is 2π e^{−ξ}
        let g = make_grid(32.0, 1024).unwrap();
        let h = szego_project(&r_i(&g));
        let ip = i_plus(&h);
        assert!(
            (ip - 2.0 * PI).norm() / (2.0 * PI) < 1e-4,
            "I₊(ΠR_i) = {ip}, relative error {:e}",
            (ip - 2.0 * PI).norm() / (2.0 * PI)
        );
        // I₊(Πu₀) ≈ ∫u₀ dx for real data
        let u0 = RealField::from_fn(g.clone(), |x| 0.4 * (-x * x / 6.0).exp());
        let pm = i_plus(&szego_project(&u0));
        assert!((pm - u0.mass()).norm() < 1e-3 * u0.mass().abs());
    }

    #[test]
    fn i_plus_vanishing_boundary_value() {
        // f̂(ξ) = ξ e^{−ξ} has boundary value 0; the quartic extrapolation
        // error O(h⁵ f⁽⁵⁾(0)) is well below 1e-6 at this frequency spacing
        let g = make_grid(128.0, 2048).unwrap();
        let coeff: Vec<C64> = (0..g.hardy_len())
            .map(|n| {
                let xi = g.xi(n);
                C64::new(xi * (-xi).exp(), 0.0)
            })
            .collect();
        let f = HardyField::new(g.clone(), coeff).unwrap();
        assert!(i_plus(&f).norm() < 1e-6, "I₊ = {:e}", i_plus(&f).norm());
    }
}
