//! Coordinate changes between surface representations and the constructive
//! pipeline that produces exactly commuting representations when the Bott
//! index vanishes.
//!
//! The chain follows the quantitative reductions: a sphere representation
//! with vanishing index is first traded for a cylinder pair, the cylinder is
//! folded into an annulus via `X = U (3/4 I + 1/4 K)`, the annulus is solved
//! through the disk, and the exact pieces are recombined. The only genuinely
//! heuristic stage is the square/disk solver that replaces an almost normal
//! matrix by an exactly normal one; it is pluggable, and the default strategy
//! carries no dimension-free error bound.

use crate::indices::{self, IndexError};
use crate::linalg::{
    commutator_norm, eig_hermitian_unchecked, hermitian_parts, identity, jacobi_joint,
    operator_norm, polar_unitary, sqrt_psd, ComplexMatrix, LinalgError,
};
use crate::repr::{measure_defect, ReprError, SurfaceKind, SurfaceRep};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("the Bott index is {value}, not zero; no commuting approximation exists nearby")]
    IndexNonzero { value: i64 },
    #[error("defect {delta} is not below 1/4")]
    DeltaTooLarge { delta: f64 },
    #[error("intermediate displacement {displacement} reached 1/4; annulus inversion unsafe")]
    DisplacementTooLarge { displacement: f64 },
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Pluggable strategy for the square solver (and everything built on it).
#[derive(Debug, Clone)]
pub enum SquareSolver {
    /// Recursive spectral clustering: the pair is bisected at the largest
    /// spectral gap near the median of whichever Hermitian part has the wider
    /// spectrum, recursing into both halves; blocks at or below `terminal_dim`
    /// are finished with Jacobi-style joint diagonalization sweeps.
    SpectralCluster {
        /// Block size at which recursion stops and Jacobi sweeps take over.
        terminal_dim: usize,
    },
}

impl Default for SquareSolver {
    fn default() -> Self {
        SquareSolver::SpectralCluster { terminal_dim: 3 }
    }
}

impl SquareSolver {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "spectral-cluster" => Some(Self::default()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SquareSolver::SpectralCluster { .. } => "spectral-cluster",
        }
    }
}

/// Exactly normal approximant of an almost normal matrix: a unitary basis and
/// complex values such that `basis · diag(values) · basis*` is normal by
/// construction.
#[derive(Debug, Clone)]
pub struct NormalApproximant {
    pub basis: ComplexMatrix,
    pub values: Vec<Complex64>,
}

impl NormalApproximant {
    pub fn assemble(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.basis.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.basis.adjoint()
    }
}

/// Largest gap in the middle 60% of a sorted spectrum; balanced cuts that
/// still prefer genuine gaps.
fn median_gap_cut(vals: &[f64]) -> Option<usize> {
    let n = vals.len();
    if n < 2 {
        return None;
    }
    let lo = (n / 5).max(1);
    let hi = (4 * n / 5 + 1).min(n);
    let mut best = -1.0;
    let mut at = None;
    for i in lo..hi.max(lo + 1) {
        if i >= n {
            break;
        }
        let g = vals[i] - vals[i - 1];
        if g > best {
            best = g;
            at = Some(i);
        }
    }
    at
}

/// Recursive spectral bisection producing a joint basis for a set of almost
/// commuting Hermitian matrices. The axis with the widest spectrum is split
/// at the best central gap; terminal blocks get Jacobi sweeps.
fn bisect_joint(mats: &[ComplexMatrix], terminal_dim: usize, depth: usize) -> ComplexMatrix {
    let n = mats[0].nrows();
    if n <= terminal_dim || depth > 96 {
        let mut work: Vec<ComplexMatrix> = mats.to_vec();
        return jacobi_joint(&mut work, 40);
    }
    // pick the widest spectrum
    let mut widest = 0usize;
    let mut best_width = -1.0;
    let mut eigs: Vec<Option<crate::linalg::EigenDecomposition>> = vec![None; mats.len()];
    for (k, m) in mats.iter().enumerate() {
        let e = eig_hermitian_unchecked(m);
        let width = e.values.last().unwrap() - e.values.first().unwrap();
        if width > best_width {
            best_width = width;
            widest = k;
        }
        eigs[k] = Some(e);
    }
    if best_width < 1e-13 {
        // everything is scalar; any orthonormal basis works
        return identity(n);
    }
    let eig = eigs[widest].take().expect("computed above");
    let Some(cut) = median_gap_cut(&eig.values) else {
        let mut work: Vec<ComplexMatrix> = mats.to_vec();
        return jacobi_joint(&mut work, 40);
    };
    let q = eig.basis;
    let mut out = ComplexMatrix::zeros(n, n);
    let mut pos = 0;
    for range in [0..cut, cut..n] {
        let width = range.len();
        let qc = q.columns(range.start, width).into_owned();
        let sub: Vec<ComplexMatrix> = mats
            .iter()
            .map(|m| {
                let b = qc.adjoint() * m * &qc;
                (&b + b.adjoint()).scale(0.5)
            })
            .collect();
        let qs = bisect_joint(&sub, terminal_dim, depth + 1);
        let glued = qc * qs;
        for (jj, col) in glued.column_iter().enumerate() {
            out.set_column(pos + jj, &col);
        }
        pos += width;
    }
    out
}

/// Joint approximate diagonalization of almost commuting Hermitian matrices:
/// returns a unitary basis plus each matrix's diagonal values in that basis.
pub fn joint_diagonalize(
    mats: &[ComplexMatrix],
    solver: &SquareSolver,
) -> Result<(ComplexMatrix, Vec<Vec<f64>>), SolveError> {
    if mats.is_empty() {
        return Err(SolveError::SolverFailure("no matrices given".into()));
    }
    let SquareSolver::SpectralCluster { terminal_dim } = solver;
    let basis = bisect_joint(mats, (*terminal_dim).max(1), 0);
    let vals = mats
        .iter()
        .map(|m| {
            let d = basis.adjoint() * m * &basis;
            (0..m.nrows()).map(|j| d[(j, j)].re).collect()
        })
        .collect();
    Ok((basis, vals))
}

/// Normal approximant of an almost normal matrix through its Hermitian parts.
pub fn approximate_normal(
    x: &ComplexMatrix,
    solver: &SquareSolver,
) -> Result<NormalApproximant, SolveError> {
    let (h, g) = hermitian_parts(x);
    let (basis, vals) = joint_diagonalize(&[h, g], solver)?;
    let values = vals[0]
        .iter()
        .zip(vals[1].iter())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    Ok(NormalApproximant { basis, values })
}

/// Exact solution report: the output representation, per-matrix displacements
/// from the input, and per-stage displacement bookkeeping.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub output: SurfaceRep,
    pub displacement: Vec<f64>,
    pub stages: Vec<(String, f64)>,
}

impl SolveReport {
    pub fn max_displacement(&self) -> f64 {
        self.displacement.iter().fold(0.0, |a, &b| a.max(b))
    }
}

fn diag_from(basis: &ComplexMatrix, vals: &[Complex64]) -> ComplexMatrix {
    let n = vals.len();
    let mut scaled = basis.clone();
    for j in 0..n {
        for i in 0..n {
            scaled[(i, j)] *= vals[j];
        }
    }
    scaled * basis.adjoint()
}

/// Replace an almost commuting pair of Hermitian contractions by an exactly
/// commuting pair of Hermitian contractions.
pub fn solve_square(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    solver: &SquareSolver,
) -> Result<SolveReport, SolveError> {
    measure_defect(SurfaceKind::Square, &[h1.clone(), h2.clone()])?;
    let (basis, vals) = joint_diagonalize(&[h1.clone(), h2.clone()], solver)?;
    // diagonal values are Rayleigh quotients, hence stay within [-1, 1]
    let k1 = diag_from(
        &basis,
        &vals[0].iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>(),
    );
    let k2 = diag_from(
        &basis,
        &vals[1].iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>(),
    );
    let d1 = operator_norm(&(&k1 - h1))?;
    let d2 = operator_norm(&(&k2 - h2))?;
    let output = SurfaceRep::new(SurfaceKind::Square, vec![k1, k2])?;
    if output.delta > 1e-10 {
        return Err(SolveError::SolverFailure(format!(
            "square output defect {} above tolerance",
            output.delta
        )));
    }
    Ok(SolveReport {
        output,
        displacement: vec![d1, d2],
        stages: vec![("square".into(), d1.max(d2))],
    })
}

/// Replace an almost normal contraction by an exactly normal contraction.
pub fn solve_disk(x: &ComplexMatrix, solver: &SquareSolver) -> Result<SolveReport, SolveError> {
    measure_defect(SurfaceKind::Disk, std::slice::from_ref(x))?;
    let normal = approximate_normal(x, solver)?;
    let square_disp = operator_norm(&(normal.assemble(|z| z) - x))?;
    // clamp onto the disk: z -> z/|z| outside the unit circle
    let clamped: Vec<Complex64> = normal
        .values
        .iter()
        .map(|&z| if z.norm() > 1.0 { z / z.norm() } else { z })
        .collect();
    let out = diag_from(&normal.basis, &clamped);
    let disp = operator_norm(&(&out - x))?;
    let output = SurfaceRep::new(SurfaceKind::Disk, vec![out])?;
    if output.delta > 1e-10 {
        return Err(SolveError::SolverFailure(format!(
            "disk output defect {} above tolerance",
            output.delta
        )));
    }
    Ok(SolveReport {
        output,
        displacement: vec![disp],
        stages: vec![
            ("square".into(), square_disp),
            ("disk-clamp".into(), disp),
        ],
    })
}

/// Replace an almost normal annular matrix by an exactly normal one with
/// modulus pinned to `[1/2, 1]`.
pub fn solve_annulus(x: &ComplexMatrix, solver: &SquareSolver) -> Result<SolveReport, SolveError> {
    measure_defect(SurfaceKind::Annulus, std::slice::from_ref(x))?;
    let disk = solve_disk(x, solver)?;
    let intermediate = disk.displacement[0];
    if intermediate >= 0.25 {
        return Err(SolveError::DisplacementTooLarge {
            displacement: intermediate,
        });
    }
    let normal = approximate_normal(&disk.output.mats[0], solver)?;
    let remapped: Vec<Complex64> = normal
        .values
        .iter()
        .map(|&z| {
            let r = z.norm();
            let dir = if r > 1e-12 { z / r } else { Complex64::new(1.0, 0.0) };
            dir * r.clamp(0.5, 1.0)
        })
        .collect();
    let out = diag_from(&normal.basis, &remapped);
    let disp = operator_norm(&(&out - x))?;
    let mut stages = disk.stages;
    stages.push(("annulus-remap".into(), disp));
    let output = SurfaceRep::new(SurfaceKind::Annulus, vec![out])?;
    if output.delta > 1e-10 {
        return Err(SolveError::SolverFailure(format!(
            "annulus output defect {} above tolerance",
            output.delta
        )));
    }
    Ok(SolveReport {
        output,
        displacement: vec![disp],
        stages,
    })
}

/// Joint data for an exactly commuting cylinder pair: shared basis, phases of
/// the unitary, and values of the Hermitian contraction.
#[derive(Debug, Clone)]
struct CylinderJoint {
    basis: ComplexMatrix,
    phases: Vec<f64>,
    kvals: Vec<f64>,
    stages: Vec<(String, f64)>,
}

fn solve_cylinder_joint(
    u: &ComplexMatrix,
    k: &ComplexMatrix,
    solver: &SquareSolver,
) -> Result<CylinderJoint, SolveError> {
    measure_defect(SurfaceKind::Cylinder, &[u.clone(), k.clone()])?;
    let n = u.nrows();
    // X = U (3/4 I + 1/4 K) is an annulus representation with
    // ‖[X*,X]‖ <= (5/16) ‖[K,U]‖
    let x = u * (identity(n).scale(0.75) + k.scale(0.25));
    let annulus = solve_annulus(&x, solver)?;
    let y = &annulus.output.mats[0];
    let normal = approximate_normal(y, solver)?;
    let mut phases = Vec::with_capacity(n);
    let mut kvals = Vec::with_capacity(n);
    for z in &normal.values {
        let r = z.norm().clamp(0.5, 1.0);
        phases.push(z.arg());
        kvals.push(4.0 * r - 3.0);
    }
    let mut stages = annulus.stages;
    stages.push((
        "cylinder-recombine".into(),
        operator_norm(&(diag_from(&normal.basis, &normal.values) - &x))?,
    ));
    Ok(CylinderJoint {
        basis: normal.basis,
        phases,
        kvals,
        stages,
    })
}

/// Replace an almost commuting cylinder pair by an exactly commuting one:
/// `U' = Y|Y|^{-1}` unitary, `K' = 4|Y| - 3I` Hermitian contraction.
pub fn solve_cylinder(
    u: &ComplexMatrix,
    k: &ComplexMatrix,
    solver: &SquareSolver,
) -> Result<SolveReport, SolveError> {
    let joint = solve_cylinder_joint(u, k, solver)?;
    let up = diag_from(
        &joint.basis,
        &joint
            .phases
            .iter()
            .map(|&p| Complex64::from_polar(1.0, p))
            .collect::<Vec<_>>(),
    );
    let kp = diag_from(
        &joint.basis,
        &joint
            .kvals
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect::<Vec<_>>(),
    );
    let du = operator_norm(&(&up - u))?;
    let dk = operator_norm(&(&kp - k))?;
    let output = SurfaceRep::new(SurfaceKind::Cylinder, vec![up, kp])?;
    if output.delta > 1e-10 {
        return Err(SolveError::SolverFailure(format!(
            "cylinder output defect {} above tolerance",
            output.delta
        )));
    }
    Ok(SolveReport {
        output,
        displacement: vec![du, dk],
        stages: joint.stages,
    })
}

/// Exact cylinder-to-sphere coordinate change:
/// `H1 = K`, `H2 + iH3 = U sqrt(I - K^2)`. The defect does not grow.
pub fn cylinder_to_sphere(u: &ComplexMatrix, k: &ComplexMatrix) -> Result<SurfaceRep, SolveError> {
    measure_defect(SurfaceKind::Cylinder, &[u.clone(), k.clone()])?;
    let n = u.nrows();
    let root = sqrt_psd(&(identity(n) - k * k))?;
    let m = u * &root;
    let h2 = (&m + m.adjoint()).scale(0.5);
    let h3 = (&m - m.adjoint()).scale(0.5) * Complex64::new(0.0, -1.0);
    Ok(SurfaceRep::new(
        SurfaceKind::Sphere,
        vec![k.clone(), h2, h3],
    )?)
}

/// Result of the spherical-to-cylindrical coordinate change.
#[derive(Debug, Clone)]
pub struct CylinderData {
    pub u: ComplexMatrix,
    /// The cylinder's Hermitian contraction; equals the input `H3`.
    pub k: ComplexMatrix,
    /// Measured `‖U sqrt(I - H3^2) - (H1 + iH2)‖`.
    pub displacement: f64,
    /// Measured `‖[U, H3]‖` of the produced pair.
    pub cylinder_defect: f64,
    /// The guaranteed displacement budget `2 sqrt(8 delta) + 2 delta` plus
    /// slack, recorded for auditing.
    pub displacement_bound: f64,
}

/// Spherical-to-cylindrical coordinate change. Requires a vanishing Bott
/// index; the index is the obstruction and non-zero values are refused.
pub fn sphere_to_cylinder(t: &SurfaceRep) -> Result<CylinderData, SolveError> {
    if t.kind != SurfaceKind::Sphere {
        return Err(SolveError::Repr(ReprError::KindMismatch {
            a: t.kind.name(),
            b: SurfaceKind::Sphere.name(),
        }));
    }
    if t.delta >= 0.25 {
        return Err(SolveError::DeltaTooLarge { delta: t.delta });
    }
    let index = indices::bott_spectral(t)?;
    if index.value != 0 {
        return Err(SolveError::IndexNonzero { value: index.value });
    }
    let n = t.dim();
    let bott = indices::build_bott_matrices(t)?;
    let eig = eig_hermitian_unchecked(&bott.b);
    // split the eigenbasis into the band near one (first n columns below)
    // and the band near zero, descending order
    let mut w = ComplexMatrix::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        w.set_column(j, &eig.basis.column(2 * n - 1 - j));
    }
    let w = w.adjoint();
    let a = w.view((0, 0), (n, n)).into_owned();
    let b = w.view((0, n), (n, n)).into_owned();
    let (za, _) = polar_unitary(&a)?;
    let (vb, _) = polar_unitary(&b)?;
    let u = vb.adjoint() * za;
    let k = t.mats[2].clone();
    let root = sqrt_psd(&(identity(n) - &k * &k))?;
    let target = &t.mats[0] + &t.mats[1] * Complex64::new(0.0, 1.0);
    let displacement = operator_norm(&(&u * &root - target))?;
    let cylinder_defect = commutator_norm(&u, &k)?;
    let displacement_bound = 2.0 * (8.0 * t.delta).sqrt() + 2.0 * t.delta + 1e-6;
    Ok(CylinderData {
        u,
        k,
        displacement,
        cylinder_defect,
        displacement_bound,
    })
}

/// Produce exactly commuting Hermitian matrices whose squares sum to the
/// identity, near a sphere representation with vanishing Bott index.
pub fn solve_sphere(t: &SurfaceRep, solver: &SquareSolver) -> Result<SolveReport, SolveError> {
    let cyl = sphere_to_cylinder(t)?;
    let mut stages = vec![("sphere-to-cylinder".into(), cyl.displacement)];
    let joint = solve_cylinder_joint(&cyl.u, &cyl.k, solver)?;
    stages.extend(joint.stages.iter().cloned());
    // recombine: H1' = Re(V sqrt(1-K^2)), H2' = Im(V sqrt(1-K^2)), H3' = K
    let n = t.dim();
    let mut m1 = Vec::with_capacity(n);
    let mut m2 = Vec::with_capacity(n);
    let mut m3 = Vec::with_capacity(n);
    for j in 0..n {
        let kv = joint.kvals[j].clamp(-1.0, 1.0);
        let s = (1.0 - kv * kv).max(0.0).sqrt();
        let z = Complex64::from_polar(s, joint.phases[j]);
        m1.push(Complex64::new(z.re, 0.0));
        m2.push(Complex64::new(z.im, 0.0));
        m3.push(Complex64::new(kv, 0.0));
    }
    let h1 = diag_from(&joint.basis, &m1);
    let h2 = diag_from(&joint.basis, &m2);
    let h3 = diag_from(&joint.basis, &m3);
    let displacement = vec![
        operator_norm(&(&h1 - &t.mats[0]))?,
        operator_norm(&(&h2 - &t.mats[1]))?,
        operator_norm(&(&h3 - &t.mats[2]))?,
    ];
    stages.push((
        "sphere-recombine".into(),
        displacement.iter().fold(0.0f64, |a, &b| a.max(b)),
    ));
    let output = SurfaceRep::new(SurfaceKind::Sphere, vec![h1, h2, h3])?;
    if output.delta > 1e-10 {
        return Err(SolveError::SolverFailure(format!(
            "sphere output defect {} above tolerance",
            output.delta
        )));
    }
    Ok(SolveReport {
        output,
        displacement,
        stages,
    })
}

/// Finite analog of the cut-down construction: solve the doubled (index-zero)
/// spin triple exactly, then compress onto the first block. The compressed
/// triple carries Bott index one.
pub fn doubled_cut_example(
    two_s: usize,
    solver: &SquareSolver,
) -> Result<SurfaceRep, SolveError> {
    let spin = crate::repr::spin_triple(two_s);
    let n = spin.dim();
    let doubled = crate::repr::direct_sum(
        &spin,
        &crate::repr::SurfaceRep::new(
            SurfaceKind::Sphere,
            spin.mats.iter().map(|m| -m).collect(),
        )?,
    )?;
    let solved = solve_sphere(&doubled, solver)?;
    let compressed: Vec<ComplexMatrix> = solved
        .output
        .mats
        .iter()
        .map(|m| {
            let b = m.view((0, 0), (n, n)).into_owned();
            (&b + b.adjoint()).scale(0.5)
        })
        .collect();
    Ok(SurfaceRep::new(SurfaceKind::Sphere, compressed)?)
}
