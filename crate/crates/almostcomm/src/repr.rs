//! Approximate representations of the six surfaces and their measured
//! defects.
//!
//! A `delta`-representation bundles matrices that satisfy a surface's exact
//! structural constraints (Hermitian, unitary, contraction bounds) together
//! with the measured commutator/relation defect `delta`. Structural
//! constraints are gates: inputs violating them are rejected rather than
//! having the violation absorbed into `delta`.

use crate::linalg::{
    check_hermitian, check_unitary, commutator_norm, eig_hermitian, identity, kron, operator_norm,
    ComplexMatrix, LinalgError, STRUCT_TOL,
};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Sphere,
    Torus,
    Square,
    Disk,
    Annulus,
    Cylinder,
}

impl SurfaceKind {
    /// Number of matrices carried by a representation of this surface.
    pub fn arity(self) -> usize {
        match self {
            SurfaceKind::Sphere => 3,
            SurfaceKind::Torus | SurfaceKind::Square | SurfaceKind::Cylinder => 2,
            SurfaceKind::Disk | SurfaceKind::Annulus => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Torus => "torus",
            SurfaceKind::Square => "square",
            SurfaceKind::Disk => "disk",
            SurfaceKind::Annulus => "annulus",
            SurfaceKind::Cylinder => "cylinder",
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum ReprError {
    #[error("structural violation for {kind}: {what}")]
    StructuralViolation { kind: &'static str, what: String },
    #[error("expected {expected} matrices for {kind}, got {got}")]
    WrongArity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("representation kinds do not match: {a} vs {b}")]
    KindMismatch { a: &'static str, b: &'static str },
    #[error("component index {r} out of range 1..=3")]
    BadComponent { r: usize },
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A tuple of matrices claimed to represent a surface, plus its measured
/// defect.
#[derive(Debug, Clone)]
pub struct SurfaceRep {
    pub kind: SurfaceKind,
    pub mats: Vec<ComplexMatrix>,
    pub delta: f64,
}

impl SurfaceRep {
    /// Validate the structural gates and measure the defect.
    pub fn new(kind: SurfaceKind, mats: Vec<ComplexMatrix>) -> Result<Self, ReprError> {
        let delta = measure_defect(kind, &mats)?;
        Ok(Self { kind, mats, delta })
    }

    pub fn dim(&self) -> usize {
        self.mats.first().map_or(0, |m| m.nrows())
    }
}

/// Per-constraint defect breakdown; `delta` is the max over entries.
#[derive(Debug, Clone)]
pub struct DefectBreakdown {
    pub entries: Vec<(String, f64)>,
}

impl DefectBreakdown {
    pub fn delta(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, (_, v)| acc.max(*v))
    }
}

fn structural(kind: SurfaceKind, what: impl Into<String>) -> ReprError {
    ReprError::StructuralViolation {
        kind: kind.name(),
        what: what.into(),
    }
}

fn gate_hermitian(kind: SurfaceKind, label: &str, m: &ComplexMatrix) -> Result<(), ReprError> {
    check_hermitian(m).map_err(|e| structural(kind, format!("{label}: {e}")))
}

fn gate_unitary(kind: SurfaceKind, label: &str, m: &ComplexMatrix) -> Result<(), ReprError> {
    check_unitary(m).map_err(|e| structural(kind, format!("{label}: {e}")))
}

fn gate_contraction(kind: SurfaceKind, label: &str, m: &ComplexMatrix) -> Result<(), ReprError> {
    let norm = operator_norm(m)?;
    if norm > 1.0 + STRUCT_TOL {
        return Err(structural(kind, format!("{label}: norm {norm} exceeds 1")));
    }
    Ok(())
}

/// Per-constraint defect measurement. Structural constraints error out;
/// the returned entries are the defining inequalities' left-hand sides.
pub fn defect_breakdown(
    kind: SurfaceKind,
    mats: &[ComplexMatrix],
) -> Result<DefectBreakdown, ReprError> {
    if mats.len() != kind.arity() {
        return Err(ReprError::WrongArity {
            kind: kind.name(),
            expected: kind.arity(),
            got: mats.len(),
        });
    }
    let n = mats[0].nrows();
    for m in mats {
        if m.nrows() != n {
            return Err(ReprError::DimensionMismatch {
                a: n,
                b: m.nrows(),
            });
        }
    }
    let mut entries = Vec::new();
    match kind {
        SurfaceKind::Sphere => {
            for (i, m) in mats.iter().enumerate() {
                gate_hermitian(kind, &format!("H{}", i + 1), m)?;
            }
            for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
                entries.push((
                    format!("‖[H{},H{}]‖", i + 1, j + 1),
                    commutator_norm(&mats[i], &mats[j])?,
                ));
            }
            let sos = &mats[0] * &mats[0] + &mats[1] * &mats[1] + &mats[2] * &mats[2];
            entries.push((
                "‖H1²+H2²+H3²−I‖".to_string(),
                operator_norm(&(sos - identity(n)))?,
            ));
        }
        SurfaceKind::Torus => {
            gate_unitary(kind, "U1", &mats[0])?;
            gate_unitary(kind, "U2", &mats[1])?;
            entries.push(("‖[U1,U2]‖".to_string(), commutator_norm(&mats[0], &mats[1])?));
        }
        SurfaceKind::Square => {
            gate_hermitian(kind, "H1", &mats[0])?;
            gate_hermitian(kind, "H2", &mats[1])?;
            gate_contraction(kind, "H1", &mats[0])?;
            gate_contraction(kind, "H2", &mats[1])?;
            entries.push(("‖[H1,H2]‖".to_string(), commutator_norm(&mats[0], &mats[1])?));
        }
        SurfaceKind::Disk => {
            gate_contraction(kind, "X", &mats[0])?;
            entries.push((
                "‖[X*,X]‖".to_string(),
                operator_norm(&(mats[0].adjoint() * &mats[0] - &mats[0] * mats[0].adjoint()))?,
            ));
        }
        SurfaceKind::Annulus => {
            gate_contraction(kind, "X", &mats[0])?;
            // |X| = (X*X)^{1/2} must sit above 1/2
            let gram = mats[0].adjoint() * &mats[0];
            let eig = eig_hermitian(&((&gram + gram.adjoint()).scale(0.5)))?;
            let min_mod = eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
            if min_mod < 0.5 - STRUCT_TOL {
                return Err(structural(
                    kind,
                    format!("|X| has eigenvalue {min_mod} below 1/2"),
                ));
            }
            entries.push((
                "‖[X*,X]‖".to_string(),
                operator_norm(&(mats[0].adjoint() * &mats[0] - &mats[0] * mats[0].adjoint()))?,
            ));
        }
        SurfaceKind::Cylinder => {
            gate_unitary(kind, "U", &mats[0])?;
            gate_hermitian(kind, "K", &mats[1])?;
            gate_contraction(kind, "K", &mats[1])?;
            entries.push(("‖[U,K]‖".to_string(), commutator_norm(&mats[0], &mats[1])?));
        }
    }
    Ok(DefectBreakdown { entries })
}

/// The smallest `delta` for which the surface's defining inequalities hold.
pub fn measure_defect(kind: SurfaceKind, mats: &[ComplexMatrix]) -> Result<f64, ReprError> {
    Ok(defect_breakdown(kind, mats)?.delta())
}

/// Spin operators for spin `S = two_s/2`, scaled by `1/sqrt(S(S+1))`, with the
/// third component diagonal descending `S..-S`. Their squares sum to the
/// identity exactly and `‖[H_r,H_s]‖ = 1/(S+1) <= 1/S`.
pub fn spin_triple(two_s: usize) -> SurfaceRep {
    assert!(two_s >= 1, "two_s must be at least 1");
    let s = two_s as f64 / 2.0;
    let n = two_s + 1;
    let norm = 1.0 / (s * (s + 1.0)).sqrt();
    let mvals: Vec<f64> = (0..n).map(|j| s - j as f64).collect();
    let mut raise = ComplexMatrix::zeros(n, n);
    for j in 1..n {
        let m = mvals[j];
        raise[(j - 1, j)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let h1 = (&raise + &lower).scale(0.5 * norm);
    let h2 = (&raise - &lower).scale(0.5 * norm) * Complex64::new(0.0, -1.0);
    let h3 = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(mvals[i] * norm, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    SurfaceRep::new(SurfaceKind::Sphere, vec![h1, h2, h3]).expect("spin triple is structural")
}

/// The clock and shift pair `(S_n, Omega_n)`: the canonical almost commuting
/// unitaries with winding number one and defect `2 sin(pi/n)`.
pub fn clock_shift(n: usize) -> SurfaceRep {
    assert!(n >= 2, "clock/shift needs n >= 2");
    let mut shift = ComplexMatrix::zeros(n, n);
    for j in 0..n - 1 {
        shift[(j + 1, j)] = Complex64::new(1.0, 0.0);
    }
    shift[(0, n - 1)] = Complex64::new(1.0, 0.0);
    let clock = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            // reduce the angle so e^{2 pi i n/n} is exactly one
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((i + 1) % n) as f64 / n as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    SurfaceRep::new(SurfaceKind::Torus, vec![shift, clock]).expect("clock/shift is structural")
}

/// The standard symplectic form on `2N` dimensions: `Z = [[0, I], [-I, 0]]`.
#[derive(Debug, Clone)]
pub struct SelfDualStructure {
    pub half: usize,
}

impl SelfDualStructure {
    pub fn new(half: usize) -> Self {
        Self { half }
    }

    pub fn dim(&self) -> usize {
        2 * self.half
    }

    pub fn z_matrix(&self) -> ComplexMatrix {
        let n = self.half;
        ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i < n && j == i + n {
                Complex64::new(1.0, 0.0)
            } else if i >= n && j + n == i {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// `true` iff `‖Z A^T Z + A‖ <= tol`, i.e. `A` is self-dual for the given
/// symplectic structure.
pub fn is_self_dual(a: &ComplexMatrix, sd: &SelfDualStructure) -> Result<bool, ReprError> {
    if a.nrows() != sd.dim() {
        return Err(ReprError::DimensionMismatch {
            a: a.nrows(),
            b: sd.dim(),
        });
    }
    Ok(self_dual_residual(a, sd)? <= STRUCT_TOL * operator_norm(a)?.max(1.0))
}

pub fn self_dual_residual(a: &ComplexMatrix, sd: &SelfDualStructure) -> Result<f64, ReprError> {
    let z = sd.z_matrix();
    Ok(operator_norm(&(&z * a.transpose() * &z + a))?)
}

/// `true` iff every entry's imaginary part is at most `1e-12`.
pub fn is_real(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.im.abs() <= 1e-12)
}

/// Two copies of the spin triple with opposite Bott index, glued so all three
/// matrices are self-dual: the canonical triple with Z2 index `-1`.
pub fn self_dual_doubled_triple(two_s: usize) -> (SurfaceRep, SelfDualStructure) {
    let spin = spin_triple(two_s);
    let n = spin.dim();
    let id2 = identity(2);
    let sigma_y = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => Complex64::new(0.0, -1.0),
        (1, 0) => Complex64::new(0.0, 1.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let h1 = kron(&id2, &spin.mats[0]);
    let h2 = kron(&sigma_y, &spin.mats[1]);
    let h3 = kron(&id2, &spin.mats[2]);
    let rep =
        SurfaceRep::new(SurfaceKind::Sphere, vec![h1, h2, h3]).expect("doubled triple structural");
    (rep, SelfDualStructure::new(n))
}

/// Block-diagonal direct sum of two representations of the same kind.
pub fn direct_sum(a: &SurfaceRep, b: &SurfaceRep) -> Result<SurfaceRep, ReprError> {
    if a.kind != b.kind {
        return Err(ReprError::KindMismatch {
            a: a.kind.name(),
            b: b.kind.name(),
        });
    }
    let mats: Vec<ComplexMatrix> = a
        .mats
        .iter()
        .zip(b.mats.iter())
        .map(|(ma, mb)| {
            let (na, nb) = (ma.nrows(), mb.nrows());
            ComplexMatrix::from_fn(na + nb, na + nb, |i, j| {
                if i < na && j < na {
                    ma[(i, j)]
                } else if i >= na && j >= na {
                    mb[(i - na, j - na)]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    SurfaceRep::new(a.kind, mats)
}

/// Negate one component of a sphere representation; flips the Bott index.
pub fn negate_component(a: &SurfaceRep, r: usize) -> Result<SurfaceRep, ReprError> {
    if a.kind != SurfaceKind::Sphere {
        return Err(ReprError::KindMismatch {
            a: a.kind.name(),
            b: SurfaceKind::Sphere.name(),
        });
    }
    if !(1..=3).contains(&r) {
        return Err(ReprError::BadComponent { r });
    }
    let mut mats = a.mats.clone();
    mats[r - 1] = -&mats[r - 1];
    // commutator and sum-of-squares norms are unchanged by a sign flip
    Ok(SurfaceRep {
        kind: a.kind,
        mats,
        delta: a.delta,
    })
}
