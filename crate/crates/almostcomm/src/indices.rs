//! Topological indices with gap certificates: the Bott index of sphere
//! representations (spectral count and trace formula), the winding number of
//! almost commuting unitary pairs (determinant path and trace-log formulas,
//! plus the two projection-count variants), and the self-dual Z2 Pfaffian
//! index.
//!
//! An index is only ever reported together with a positive `gap`, the
//! distance of the decisive spectrum from its threshold; when the gap closes
//! the index is undefined and an error is returned instead of a guess.

use crate::linalg::{
    check_unitary, commutator, commutator_norm, eig_hermitian_unchecked, eig_unitary, identity,
    kron, matrix_function_unitary, operator_norm, pfaffian_sign, trace, ComplexMatrix, LinalgError,
};
use crate::repr::{self, ReprError, SelfDualStructure, SurfaceKind, SurfaceRep};
use num_complex::Complex64;
use thiserror::Error;

const GAP_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Error)]
pub enum IndexError {
    #[error("defect {delta} is not below 1/4; the index gap is not guaranteed")]
    DeltaTooLarge { delta: f64 },
    #[error("spectrum touches the decision threshold (gap {gap:.3e}); index undefined")]
    GapCollapse { gap: f64 },
    #[error("trace formula unsafe: n*delta^2 = {budget:.3e}, |raw - nearest| = {excess:.3e}")]
    RoundingUnsafe { budget: f64, excess: f64 },
    #[error("commutator norm {norm} is not below 2; winding undefined")]
    CommutatorTooLarge { norm: f64 },
    #[error("winding path under-sampled even at {steps} steps")]
    UnderSampled { steps: usize },
    #[error("eigenvalue within {dist:.3e} of the log branch cut at -1")]
    BranchCut { dist: f64 },
    #[error("matrix {which} is not self-dual (residual {residual:.3e})")]
    NotSelfDual { which: usize, residual: f64 },
    #[error("Pfaffian/spectrum too close to singular; index undefined")]
    NearSingular,
    #[error("expected a {expected} representation, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Repr(#[from] ReprError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMethod {
    BottSpectral,
    BottTrace,
    WindingDet,
    WindingTraceLog,
    Kappa,
    Kappa1,
    Z2Pfaffian,
}

impl IndexMethod {
    pub fn name(self) -> &'static str {
        match self {
            IndexMethod::BottSpectral => "bott-spec",
            IndexMethod::BottTrace => "bott-trace",
            IndexMethod::WindingDet => "winding-det",
            IndexMethod::WindingTraceLog => "winding-log",
            IndexMethod::Kappa => "kappa",
            IndexMethod::Kappa1 => "kappa1",
            IndexMethod::Z2Pfaffian => "z2",
        }
    }
}

/// An integer (or ±1) index with its gap certificate.
#[derive(Debug, Clone)]
pub struct IndexResult {
    pub value: i64,
    /// Distance of the decisive spectrum from the threshold; always positive.
    pub gap: f64,
    pub method: IndexMethod,
    /// Pre-rounding value, where the formula produces one.
    pub raw: Option<f64>,
}

/// The almost-projection `B` and its shifted companion `S = 2B - I`.
#[derive(Debug, Clone)]
pub struct BottMatrices {
    pub b: ComplexMatrix,
    pub s: ComplexMatrix,
}

fn expect_sphere(t: &SurfaceRep) -> Result<(), IndexError> {
    if t.kind != SurfaceKind::Sphere {
        return Err(IndexError::WrongKind {
            expected: "sphere",
            got: t.kind.name(),
        });
    }
    Ok(())
}

/// `S = sigma_1 ⊗ H1 + sigma_2 ⊗ H2 + sigma_3 ⊗ H3` in its block form.
pub fn s_matrix(h1: &ComplexMatrix, h2: &ComplexMatrix, h3: &ComplexMatrix) -> ComplexMatrix {
    let n = h1.nrows();
    let i = Complex64::new(0.0, 1.0);
    ComplexMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (br, bc) = (r / n, c / n);
        let (rr, cc) = (r % n, c % n);
        match (br, bc) {
            (0, 0) => h3[(rr, cc)],
            (0, 1) => h1[(rr, cc)] - i * h2[(rr, cc)],
            (1, 0) => h1[(rr, cc)] + i * h2[(rr, cc)],
            (1, 1) => -h3[(rr, cc)],
            _ => unreachable!(),
        }
    })
}

/// Assemble `B = (I + S)/2` and `S` for a sphere representation.
pub fn build_bott_matrices(t: &SurfaceRep) -> Result<BottMatrices, IndexError> {
    expect_sphere(t)?;
    let s = s_matrix(&t.mats[0], &t.mats[1], &t.mats[2]);
    let b = (identity(s.nrows()) + &s).scale(0.5);
    Ok(BottMatrices { b, s })
}

/// Signature count of `S` with only the spectral-gap gate; used where the
/// defect bound is unavailable but the gap itself certifies the count, e.g.
/// in the lattice sweep and the cut-down example.
pub fn bott_count(t: &SurfaceRep) -> Result<IndexResult, IndexError> {
    expect_sphere(t)?;
    let s = s_matrix(&t.mats[0], &t.mats[1], &t.mats[2]);
    let eig = eig_hermitian_unchecked(&s);
    let gap = eig.values.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
    if gap < GAP_FLOOR {
        return Err(IndexError::GapCollapse { gap });
    }
    let pos = eig.values.iter().filter(|&&v| v > 0.0).count() as i64;
    let neg = eig.values.iter().filter(|&&v| v < 0.0).count() as i64;
    Ok(IndexResult {
        value: (pos - neg) / 2,
        gap,
        method: IndexMethod::BottSpectral,
        raw: None,
    })
}

/// Bott index via the eigenvalue count of `B`, equivalently half the
/// signature of `S`.
///
/// `delta < 1/4` guarantees the spectral gap; above that threshold the gap
/// itself still certifies the count when it happens to be open, so the
/// defect bound only decides which error is reported when the gap closes.
pub fn bott_spectral(t: &SurfaceRep) -> Result<IndexResult, IndexError> {
    expect_sphere(t)?;
    match bott_count(t) {
        Err(IndexError::GapCollapse { gap }) if t.delta >= 0.25 => {
            let _ = gap;
            Err(IndexError::DeltaTooLarge { delta: t.delta })
        }
        other => other,
    }
}

/// Bott index via the third-order trace formula
/// `Rnd((3/2i) Tr(H1 [H2, H3]))`, valid when `n delta^2 < 1/64`.
pub fn bott_trace(t: &SurfaceRep) -> Result<IndexResult, IndexError> {
    expect_sphere(t)?;
    let n = t.dim() as f64;
    let budget = 32.0 * n * t.delta * t.delta;
    if n * t.delta * t.delta >= 1.0 / 64.0 {
        return Err(IndexError::RoundingUnsafe {
            budget,
            excess: f64::NAN,
        });
    }
    let tr = trace(&(&t.mats[0] * commutator(&t.mats[1], &t.mats[2])));
    // (3/2i) Tr = (3/2) Im(Tr) - (3/2) i Re(Tr); Re(Tr) vanishes for Hermitian input
    let raw = 1.5 * tr.im;
    let value = raw.round();
    let excess = (raw - value).abs();
    if excess >= 0.5 - budget {
        return Err(IndexError::RoundingUnsafe { budget, excess });
    }
    Ok(IndexResult {
        value: value as i64,
        gap: 0.5 - excess,
        method: IndexMethod::BottTrace,
        raw: Some(raw),
    })
}

/// Norm budget of perturbations guaranteed to preserve the Bott index:
/// `sqrt(1 - 4 delta)`.
pub fn bott_stability_radius(t: &SurfaceRep) -> Result<f64, IndexError> {
    expect_sphere(t)?;
    if t.delta >= 0.25 {
        return Err(IndexError::DeltaTooLarge { delta: t.delta });
    }
    Ok((1.0 - 4.0 * t.delta).sqrt())
}

const MAX_WINDING_STEPS: usize = 1 << 20;

/// Winding number of `t ↦ det((1-t) UV + t VU)` around zero.
///
/// The segment from `UV` to `VU` stays invertible whenever `‖[U,V]‖ < 2`, and
/// its determinant path is closed. Sampling starts at `steps` (1024 when zero
/// is passed) and doubles until consecutive argument jumps stay below `pi/2`.
pub fn winding_det(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    steps: usize,
) -> Result<IndexResult, IndexError> {
    check_unitary(u)?;
    check_unitary(v)?;
    let comm = commutator_norm(u, v)?;
    if comm >= 2.0 {
        return Err(IndexError::CommutatorTooLarge { norm: comm });
    }
    let uv = u * v;
    let vu = v * u;
    let mut steps = if steps == 0 { 1024 } else { steps };
    loop {
        match winding_at_resolution(&uv, &vu, steps) {
            Ok(total) => {
                let raw = total / (2.0 * std::f64::consts::PI);
                return Ok(IndexResult {
                    value: raw.round() as i64,
                    gap: 2.0 - comm,
                    method: IndexMethod::WindingDet,
                    raw: Some(raw),
                });
            }
            Err(()) => {
                if steps >= MAX_WINDING_STEPS {
                    return Err(IndexError::UnderSampled { steps });
                }
                steps *= 2;
            }
        }
    }
}

fn winding_at_resolution(uv: &ComplexMatrix, vu: &ComplexMatrix, steps: usize) -> Result<f64, ()> {
    let mut total = 0.0;
    let mut prev = uv.determinant().arg();
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let m = uv.scale(1.0 - t) + vu.scale(t);
        let arg = m.determinant().arg();
        let mut jump = arg - prev;
        while jump > std::f64::consts::PI {
            jump -= 2.0 * std::f64::consts::PI;
        }
        while jump < -std::f64::consts::PI {
            jump += 2.0 * std::f64::consts::PI;
        }
        if jump.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(());
        }
        total += jump;
        prev = arg;
    }
    Ok(total)
}

/// Winding number via the trace-log formula
/// `(1/2pi) Tr(-i log(V U V* U*))` on the principal branch.
pub fn winding_tracelog(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<IndexResult, IndexError> {
    check_unitary(u)?;
    check_unitary(v)?;
    let comm = commutator_norm(u, v)?;
    if comm >= 2.0 {
        return Err(IndexError::CommutatorTooLarge { norm: comm });
    }
    let w = v * u * v.adjoint() * u.adjoint();
    let (values, _) = eig_unitary(&w)?;
    let mut gap = f64::INFINITY;
    let mut total = 0.0;
    for z in &values {
        gap = gap.min((z + Complex64::new(1.0, 0.0)).norm());
        total += z.arg();
    }
    if gap < GAP_FLOOR {
        return Err(IndexError::BranchCut { dist: gap });
    }
    let raw = total / (2.0 * std::f64::consts::PI);
    Ok(IndexResult {
        value: raw.round() as i64,
        gap,
        method: IndexMethod::WindingTraceLog,
        raw: Some(raw),
    })
}

/// Chart functions of the torus-to-sphere map. The second branch of each
/// piecewise definition applies for `x > 1/2`; together they satisfy
/// `f1^2 + g1^2 + h1^2 = 1` and `g1 h1 = 0`.
fn gamma_f1(x: f64) -> f64 {
    if x <= 0.5 {
        1.0 - 4.0 * x
    } else {
        -3.0 + 4.0 * x
    }
}

fn gamma_g1(x: f64) -> f64 {
    if x <= 0.5 {
        (2.0 * x - 4.0 * x * x).max(0.0).sqrt() * 2.0
    } else {
        0.0
    }
}

fn gamma_h1(x: f64) -> f64 {
    if x <= 0.5 {
        0.0
    } else {
        (-8.0 + 24.0 * x - 16.0 * x * x).max(0.0).sqrt()
    }
}

/// Angle in `[0, 1)` of a unit complex number.
fn circle_coord(z: Complex64) -> f64 {
    let t = z.arg() / (2.0 * std::f64::consts::PI);
    if t < 0.0 {
        t + 1.0
    } else {
        t
    }
}

fn count_above_half(q: &ComplexMatrix, n: usize, method: IndexMethod) -> Result<IndexResult, IndexError> {
    let eig = eig_hermitian_unchecked(q);
    let gap = eig
        .values
        .iter()
        .fold(f64::INFINITY, |a, &v| a.min((v - 0.5).abs()));
    if gap < GAP_FLOOR {
        return Err(IndexError::GapCollapse { gap });
    }
    let above = eig.values.iter().filter(|&&v| v > 0.5).count() as i64;
    Ok(IndexResult {
        value: above - n as i64,
        gap,
        method,
        raw: None,
    })
}

/// Projection-count index from the continuous chart: eigenvalues of
/// `Q(U,V)` above one half, minus `n`.
pub fn kappa(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<IndexResult, IndexError> {
    check_unitary(u)?;
    check_unitary(v)?;
    let n = u.nrows();
    let fv = matrix_function_unitary(v, |z| Complex64::new(0.5 - 0.5 * gamma_f1(circle_coord(z)), 0.0))?;
    let gv = matrix_function_unitary(v, |z| Complex64::new(0.5 * gamma_g1(circle_coord(z)), 0.0))?;
    let hv = matrix_function_unitary(v, |z| Complex64::new(0.5 * gamma_h1(circle_coord(z)), 0.0))?;
    let top_right = &gv + &hv * u;
    let q = assemble_projection_like(&fv, &top_right);
    count_above_half(&q, n, IndexMethod::Kappa)
}

/// Projection-count index from the discontinuous chart `l(e^{2 pi i x}) = x`:
/// eigenvalues of `Q1(U,V)` above one half, minus `n`.
///
/// The chart's branch point is assigned to the top: `l` takes values in
/// `(0, 1]`, so an eigenvalue exactly at one maps to one. Either assignment
/// leaves commuting pairs at zero, but only this one keeps the clock/shift
/// family at the winding value all the way down to n = 4.
pub fn kappa1(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<IndexResult, IndexError> {
    check_unitary(u)?;
    check_unitary(v)?;
    let n = u.nrows();
    let ell = |z: Complex64| {
        let t = circle_coord(z);
        if t == 0.0 {
            1.0
        } else {
            t
        }
    };
    let lv = matrix_function_unitary(v, |z| Complex64::new(ell(z), 0.0))?;
    let sv = matrix_function_unitary(v, |z| {
        let x = ell(z);
        Complex64::new((x - x * x).max(0.0).sqrt(), 0.0)
    })?;
    let top_right = &sv * u.adjoint();
    let q = assemble_projection_like(&lv, &top_right);
    count_above_half(&q, n, IndexMethod::Kappa1)
}

/// `[[D, T], [T*, I - D]]`, symmetrized.
fn assemble_projection_like(diag: &ComplexMatrix, top_right: &ComplexMatrix) -> ComplexMatrix {
    let n = diag.nrows();
    let tr_adj = top_right.adjoint();
    let q = ComplexMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (br, bc) = (r / n, c / n);
        let (rr, cc) = (r % n, c % n);
        match (br, bc) {
            (0, 0) => diag[(rr, cc)],
            (0, 1) => top_right[(rr, cc)],
            (1, 0) => tr_adj[(rr, cc)],
            (1, 1) => {
                let idv = if rr == cc { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                idv - diag[(rr, cc)]
            }
            _ => unreachable!(),
        }
    });
    (&q + q.adjoint()).scale(0.5)
}

/// Z2 index of a self-dual sphere representation: the sign of the Pfaffian of
/// the anti-symmetrized `S` matrix.
pub fn z2_index(t: &SurfaceRep, sd: &SelfDualStructure) -> Result<IndexResult, IndexError> {
    expect_sphere(t)?;
    for (which, m) in t.mats.iter().enumerate() {
        let residual = repr::self_dual_residual(m, sd)?;
        if residual > 1e-10 * operator_norm(m)?.max(1.0) {
            return Err(IndexError::NotSelfDual { which: which + 1, residual });
        }
    }
    let s = s_matrix(&t.mats[0], &t.mats[1], &t.mats[2]);
    let eig = eig_hermitian_unchecked(&s);
    let gap = eig.values.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
    if gap < GAP_FLOOR {
        return Err(IndexError::NearSingular);
    }
    // unitary change of basis making S anti-symmetric: U = (I + sigma_y ⊗ Z)/sqrt(2)
    let sigma_y = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => Complex64::new(0.0, -1.0),
        (1, 0) => Complex64::new(0.0, 1.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let m = kron(&sigma_y, &sd.z_matrix());
    let dim = s.nrows();
    let u = (identity(dim) + m).scale(1.0 / 2.0f64.sqrt());
    let b_tilde = u.adjoint() * &s * &u;
    let skew_resid = operator_norm(&(&b_tilde + b_tilde.transpose()))?;
    if skew_resid > 1e-9 * operator_norm(&b_tilde)?.max(1.0) {
        return Err(IndexError::Linalg(LinalgError::NotSkew { residual: skew_resid }));
    }
    let sign = pfaffian_sign(&b_tilde).map_err(|e| match e {
        LinalgError::NearSingular => IndexError::NearSingular,
        other => IndexError::Linalg(other),
    })?;
    Ok(IndexResult {
        value: sign as i64,
        gap,
        method: IndexMethod::Z2Pfaffian,
        raw: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::{
        clock_shift, direct_sum, negate_component, self_dual_doubled_triple, spin_triple,
        SurfaceKind, SurfaceRep,
    };
    use crate::testutil::{rand_hermitian, Splitmix};

    fn commuting_diag_triple(n: usize, seed: u64) -> SurfaceRep {
        let mut rng = Splitmix::new(seed);
        let thetas: Vec<f64> = (0..n).map(|_| rng.uniform(0.1, std::f64::consts::PI - 0.1)).collect();
        let phis: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 2.0 * std::f64::consts::PI)).collect();
        let diag = |f: &dyn Fn(usize) -> f64| {
            ComplexMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(f(i), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        };
        SurfaceRep::new(
            SurfaceKind::Sphere,
            vec![
                diag(&|i| thetas[i].sin() * phis[i].cos()),
                diag(&|i| thetas[i].sin() * phis[i].sin()),
                diag(&|i| thetas[i].cos()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn bott_matrices_shape_and_relation() {
        let t = spin_triple(6);
        let bm = build_bott_matrices(&t).unwrap();
        let n2 = 2 * t.dim();
        let resid = operator_norm(&(&bm.b - (identity(n2) + &bm.s).scale(0.5))).unwrap();
        assert_eq!(resid, 0.0);
        // ‖S^2 - I‖ <= 4 delta
        let s2 = &bm.s * &bm.s;
        let r = operator_norm(&(s2 - identity(n2))).unwrap();
        assert!(r <= 4.0 * t.delta + 1e-12);

        // zero triple -> B = I/2
        let z = ComplexMatrix::zeros(2, 2);
        let t0 = SurfaceRep::new(SurfaceKind::Sphere, vec![z.clone(), z.clone(), z]).unwrap();
        let bm0 = build_bott_matrices(&t0).unwrap();
        assert!(operator_norm(&(bm0.b - identity(4).scale(0.5))).unwrap() < 1e-15);
    }

    #[test]
    fn bott_spectral_spin_and_commuting() {
        let r = bott_spectral(&spin_triple(40)).unwrap();
        assert_eq!(r.value, 1);
        assert!(r.gap > 0.9);

        let r = bott_spectral(&commuting_diag_triple(7, 3)).unwrap();
        assert_eq!(r.value, 0);

        let spin = spin_triple(12);
        let both = direct_sum(&spin, &negate_component(&spin, 1).unwrap()).unwrap();
        assert_eq!(bott_spectral(&both).unwrap().value, 0);
    }

    #[test]
    fn bott_negation_flips_sign() {
        let spin = spin_triple(6);
        for r in 1..=3 {
            let neg = negate_component(&spin, r).unwrap();
            assert_eq!(bott_spectral(&neg).unwrap().value, -1, "component {r}");
        }
    }

    #[test]
    fn bott_additive_over_direct_sum() {
        let a = spin_triple(8);
        let b = spin_triple(4);
        let sum = direct_sum(&a, &b).unwrap();
        assert_eq!(bott_spectral(&sum).unwrap().value, 2);
    }

    #[test]
    fn bott_vanishes_for_real_and_self_dual() {
        // real almost-commuting triple: commuting sphere coordinates plus a
        // small real symmetric perturbation of each component
        let n = 8;
        let base = commuting_diag_triple(n, 14);
        let mut rng = Splitmix::new(15);
        let mats: Vec<ComplexMatrix> = base
            .mats
            .iter()
            .map(|m| {
                let g = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.normal(), 0.0));
                let sym = (&g + g.transpose()).scale(0.5);
                let gn = operator_norm(&sym).unwrap();
                m + sym.scale(0.02 / gn)
            })
            .collect();
        let t = SurfaceRep::new(SurfaceKind::Sphere, mats).unwrap();
        assert!(crate::repr::is_real(&t.mats[0]));
        assert_eq!(bott_spectral(&t).unwrap().value, 0);

        let (dbl, _) = self_dual_doubled_triple(8);
        assert_eq!(bott_spectral(&dbl).unwrap().value, 0);
    }

    #[test]
    fn bott_transpose_flips_sign() {
        let spin = spin_triple(8);
        let t = SurfaceRep::new(
            SurfaceKind::Sphere,
            spin.mats.iter().map(|m| m.transpose()).collect(),
        )
        .unwrap();
        assert_eq!(bott_spectral(&t).unwrap().value, -1);
    }

    #[test]
    fn bott_trace_matches_spectral_on_large_spin() {
        let t = spin_triple(400);
        let n = t.dim() as f64;
        assert!(n * t.delta * t.delta < 1.0 / 64.0);
        let tr = bott_trace(&t).unwrap();
        let sp = bott_spectral(&t).unwrap();
        assert_eq!(tr.value, 1);
        assert_eq!(tr.value, sp.value);
        let raw = tr.raw.unwrap();
        assert!((raw - 1.0).abs() <= 32.0 * n * t.delta * t.delta);

        let c = commuting_diag_triple(5, 9);
        let tr = bott_trace(&c).unwrap();
        assert_eq!(tr.value, 0);
        assert!(tr.raw.unwrap().abs() < 1e-10);
    }

    #[test]
    fn bott_trace_refuses_outside_budget() {
        let t = spin_triple(8); // n delta^2 = 9/25 > 1/64
        assert!(matches!(bott_trace(&t), Err(IndexError::RoundingUnsafe { .. })));
    }

    #[test]
    fn stability_radius_and_perturbations() {
        let t = spin_triple(40); // delta <= 0.05
        let radius = bott_stability_radius(&t).unwrap();
        assert!(radius >= (1.0 - 4.0 / 20.0_f64).sqrt() - 1e-12);

        let mut rng = Splitmix::new(2024);
        for _ in 0..50 {
            let mut mats = t.mats.clone();
            let mut budget = 0.9 * radius;
            for m in mats.iter_mut() {
                let share = budget / 3.0;
                let g = rand_hermitian(t.dim(), &mut rng);
                let gn = operator_norm(&g).unwrap();
                *m += g.scale(share / gn);
                budget -= share;
            }
            let t2 = SurfaceRep {
                kind: SurfaceKind::Sphere,
                mats,
                delta: t.delta,
            };
            assert_eq!(bott_count(&t2).unwrap().value, 1);
        }
    }

    #[test]
    fn winding_values_on_clock_shift() {
        for n in [4usize, 8, 16] {
            let rep = clock_shift(n);
            let (u, v) = (&rep.mats[0], &rep.mats[1]);
            let wd = winding_det(u, v, 0).unwrap();
            assert_eq!(wd.value, 1, "n={n}");
            let wl = winding_tracelog(u, v).unwrap();
            assert_eq!(wl.value, 1, "n={n}");
            // swap flips the sign
            assert_eq!(winding_det(v, u, 0).unwrap().value, -1);
            assert_eq!(winding_tracelog(v, u).unwrap().value, -1);
        }
    }

    #[test]
    fn winding_zero_for_commuting() {
        let mut rng = Splitmix::new(5);
        let n = 6;
        let phases: Vec<f64> = (0..2 * n).map(|_| rng.uniform(0.0, 6.28)).collect();
        let u = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j { Complex64::from_polar(1.0, phases[i]) } else { Complex64::new(0.0, 0.0) }
        });
        let v = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j { Complex64::from_polar(1.0, phases[n + i]) } else { Complex64::new(0.0, 0.0) }
        });
        assert_eq!(winding_det(&u, &v, 0).unwrap().value, 0);
        assert_eq!(winding_tracelog(&u, &v).unwrap().value, 0);
        assert_eq!(kappa(&u, &v).unwrap().value, 0);
        assert_eq!(kappa1(&u, &v).unwrap().value, 0);
    }

    #[test]
    fn winding_antisymmetry_relations() {
        let rep = clock_shift(12);
        let (u, v) = (&rep.mats[0], &rep.mats[1]);
        let w = winding_det(u, v, 0).unwrap().value;
        // swapping the pair or reversing either circle flips the sign;
        // negating a unitary leaves the determinant loop unchanged
        assert_eq!(winding_det(v, u, 0).unwrap().value, -w);
        assert_eq!(winding_det(&u.adjoint(), v, 0).unwrap().value, -w);
        assert_eq!(winding_det(u, &v.adjoint(), 0).unwrap().value, -w);
        assert_eq!(winding_det(&(-u), v, 0).unwrap().value, w);
        assert_eq!(winding_det(u, &(-v), 0).unwrap().value, w);
    }

    #[test]
    fn winding_block_additivity() {
        let a = clock_shift(8);
        let b = clock_shift(6);
        let sum = direct_sum(&a, &b).unwrap();
        let w = winding_det(&sum.mats[0], &sum.mats[1], 0).unwrap();
        assert_eq!(w.value, 2);
    }

    #[test]
    fn kappa_variants_on_clock_shift() {
        for n in [8usize, 16] {
            let rep = clock_shift(n);
            let (u, v) = (&rep.mats[0], &rep.mats[1]);
            assert_eq!(kappa(u, v).unwrap().value, 1, "kappa n={n}");
            assert_eq!(kappa1(u, v).unwrap().value, 1, "kappa1 n={n}");
            assert_eq!(kappa(v, u).unwrap().value, -1);
            assert_eq!(kappa1(v, u).unwrap().value, -1);
        }
        // n = 4 is the degenerate case: Q has an exact half eigenvalue
        let rep = clock_shift(4);
        assert!(matches!(
            kappa(&rep.mats[0], &rep.mats[1]),
            Err(IndexError::GapCollapse { .. })
        ));
        assert_eq!(kappa1(&rep.mats[0], &rep.mats[1]).unwrap().value, 1);
    }

    #[test]
    fn four_formulas_agree_on_perturbed_clocks() {
        use crate::linalg::polar_unitary;
        let mut rng = Splitmix::new(77);
        for trial in 0..30 {
            let rep = clock_shift(12);
            let perturb = |m: &ComplexMatrix, rng: &mut Splitmix| {
                let g = rand_hermitian(12, rng);
                let gn = operator_norm(&g).unwrap();
                let bumped = m + (g * Complex64::new(0.0, 1.0)).scale(0.08 / gn) * m;
                polar_unitary(&bumped).unwrap().0
            };
            let u = perturb(&rep.mats[0], &mut rng);
            let v = perturb(&rep.mats[1], &mut rng);
            let wd = winding_det(&u, &v, 0).unwrap().value;
            let wl = winding_tracelog(&u, &v).unwrap().value;
            let k = kappa(&u, &v).unwrap().value;
            let k1 = kappa1(&u, &v).unwrap().value;
            assert!(wd == wl && wl == k && k == k1, "trial {trial}: {wd} {wl} {k} {k1}");
        }
    }

    #[test]
    fn z2_values() {
        // exactly commuting self-dual triple with squares = I
        let n = 3;
        let mut rng = Splitmix::new(8);
        let thetas: Vec<f64> = (0..n).map(|_| rng.uniform(0.3, 2.8)).collect();
        let phis: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 6.0)).collect();
        let dd = |f: &dyn Fn(usize) -> f64| {
            ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| {
                if i == j {
                    Complex64::new(f(i % n), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        };
        let t = SurfaceRep::new(
            SurfaceKind::Sphere,
            vec![
                dd(&|i| thetas[i].sin() * phis[i].cos()),
                dd(&|i| thetas[i].sin() * phis[i].sin()),
                dd(&|i| thetas[i].cos()),
            ],
        )
        .unwrap();
        let sd = SelfDualStructure::new(n);
        assert_eq!(z2_index(&t, &sd).unwrap().value, 1);

        for two_s in [4usize, 16] {
            let (dbl, sd) = self_dual_doubled_triple(two_s);
            let r = z2_index(&dbl, &sd).unwrap();
            assert_eq!(r.value, -1, "two_s={two_s}");
            assert!(r.gap > 0.5);
        }

        // non-self-dual input is rejected
        let spin = spin_triple(3);
        let sd = SelfDualStructure::new(2);
        assert!(matches!(
            z2_index(&spin, &sd),
            Err(IndexError::NotSelfDual { .. }) | Err(IndexError::Repr(_))
        ));
    }

    #[test]
    fn z2_stable_under_self_dual_perturbation_paths() {
        let (dbl, sd) = self_dual_doubled_triple(16);
        let s = 8.0f64;
        let radius = (1.0 - 4.0 / s).sqrt();
        let mut rng = Splitmix::new(31);
        let z = sd.z_matrix();
        for _ in 0..8 {
            let mut mats = dbl.mats.clone();
            for m in mats.iter_mut() {
                let g = rand_hermitian(dbl.dim(), &mut rng);
                // self-dual part: (G - Z G^T Z)/2
                let gsd = (&g - &z * g.transpose() * &z).scale(0.5);
                let gn = operator_norm(&gsd).unwrap();
                *m += gsd.scale(0.3 * radius / gn.max(1e-12));
            }
            let t = SurfaceRep {
                kind: SurfaceKind::Sphere,
                mats,
                delta: dbl.delta,
            };
            assert_eq!(z2_index(&t, &sd).unwrap().value, -1);
        }
    }
}
