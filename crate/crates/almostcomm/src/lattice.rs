//! Tight-binding quantum Hall model on a sphere: sites on latitude rings, a
//! monopole hopping phase, spectral projectors below a Fermi level, band
//! compression of the position operators, Bott-index sweeps, the Hall trace,
//! and Wannier-localization diagnostics.

use crate::indices::{self, IndexError};
use crate::linalg::{commutator_norm, eig_hermitian_unchecked, trace, ComplexMatrix, LinalgError};
use crate::repr::{ReprError, SurfaceKind, SurfaceRep};
use crate::transforms::{joint_diagonalize, SolveError, SquareSolver};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum LatticeError {
    #[error("cannot reach {target} sites with {latitudes} latitudes")]
    InfeasibleTarget { target: usize, latitudes: usize },
    #[error("Fermi level {fermi} is within 1e-8 of an eigenvalue")]
    FermiOnEigenvalue { fermi: f64 },
    #[error("no states below the Fermi level; the band is empty")]
    EmptyBand,
    #[error("trace has imaginary residue {residue:.3e}")]
    ImaginaryResidue { residue: f64 },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One lattice site on the unit sphere.
#[derive(Debug, Clone, Copy)]
pub struct Site {
    /// Polar angle from the north pole, radians.
    pub theta: f64,
    /// Azimuth, radians in [0, 2pi).
    pub phi: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Full model configuration plus the generated sites.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    pub sites: Vec<Site>,
    /// Sphere radius.
    pub radius: f64,
    /// Hopping range (chord distance).
    pub hop_range: f64,
    /// Hopping scale J.
    pub hop_scale: f64,
    /// Disorder strength.
    pub disorder: f64,
    pub n_monopole: i64,
    pub seed: u64,
}

/// Model parameters; defaults reproduce the 560-site experiment.
#[derive(Debug, Clone)]
pub struct LatticeConfig {
    pub latitudes: usize,
    pub total_sites: usize,
    pub n_monopole: i64,
    pub disorder: f64,
    pub seed: u64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            latitudes: 29,
            total_sites: 560,
            n_monopole: 100,
            disorder: 0.0,
            seed: 1,
        }
    }
}

/// Sites on evenly spaced latitudes `theta_k = k pi/(L+1)`, with per-ring
/// counts proportional to the ring circumference `sin(theta)` and rescaled so
/// the total matches; rounding residue lands on the largest ring. Azimuths
/// are evenly spaced from zero.
pub fn build_sites(latitudes: usize, total: usize) -> Result<Vec<Site>, LatticeError> {
    if latitudes == 0 || total < latitudes {
        return Err(LatticeError::InfeasibleTarget {
            target: total,
            latitudes,
        });
    }
    let thetas: Vec<f64> = (1..=latitudes)
        .map(|k| k as f64 * std::f64::consts::PI / (latitudes + 1) as f64)
        .collect();
    let weights: Vec<f64> = thetas.iter().map(|t| t.sin()).collect();
    let weight_sum: f64 = weights.iter().sum();
    let scale = total as f64 / weight_sum;
    let mut counts: Vec<usize> = weights
        .iter()
        .map(|w| ((scale * w + 0.5).floor() as usize).max(1))
        .collect();
    let assigned: usize = counts.iter().sum();
    let largest = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if assigned > total {
        let excess = assigned - total;
        if counts[largest] <= excess {
            return Err(LatticeError::InfeasibleTarget {
                target: total,
                latitudes,
            });
        }
        counts[largest] -= excess;
    } else {
        counts[largest] += total - assigned;
    }
    let mut sites = Vec::with_capacity(total);
    for (t, &m) in thetas.iter().zip(counts.iter()) {
        for j in 0..m {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            sites.push(Site {
                theta: *t,
                phi,
                x: t.sin() * phi.cos(),
                y: t.sin() * phi.sin(),
                z: t.cos(),
            });
        }
    }
    debug_assert_eq!(sites.len(), total);
    Ok(sites)
}

impl LatticeModel {
    pub fn build(config: &LatticeConfig) -> Result<Self, LatticeError> {
        Ok(Self {
            sites: build_sites(config.latitudes, config.total_sites)?,
            radius: 1.0,
            hop_range: 0.07f64.sqrt(),
            hop_scale: 1.0,
            disorder: config.disorder,
            n_monopole: config.n_monopole,
            seed: config.seed,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Diagonal position operators scaled to the sphere radius.
    pub fn position_operators(&self) -> [ComplexMatrix; 3] {
        let n = self.len();
        let mk = |f: &dyn Fn(&Site) -> f64| {
            ComplexMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(f(&self.sites[i]), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        };
        [mk(&|s| s.x), mk(&|s| s.y), mk(&|s| s.z)]
    }
}

/// SplitMix64 finalizer; the per-edge disorder stream is
/// `mix(mix(seed ^ i) ^ j)` over ordered pairs `i < j`, so it is independent
/// of traversal order and safely parallel.
fn splitmix(x: u64) -> u64 {
    let x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform in (-1/2, 1/2) for edge (i, j), derived from the seed.
fn edge_uniform(seed: u64, i: usize, j: usize) -> f64 {
    let h = splitmix(splitmix(seed ^ ((i as u64) << 32)) ^ j as u64);
    (h >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

/// Hamiltonian: zero beyond the hopping range, otherwise
/// `H_ij = J_ij exp(i w_ij)` with `J_ij = -1 + disorder * u_ij` and the
/// monopole phase `w_ij = n_monopole (phi_i - phi_j) cos((theta_i+theta_j)/2)`.
/// The phase difference is taken raw, without wrapping; entries are generated
/// for `i < j` and mirrored by conjugation.
pub fn build_hamiltonian(model: &LatticeModel) -> ComplexMatrix {
    let n = model.len();
    let r2 = model.hop_range * model.hop_range;
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let si = model.sites[i];
        for j in (i + 1)..n {
            let sj = model.sites[j];
            let d2 =
                (si.x - sj.x).powi(2) + (si.y - sj.y).powi(2) + (si.z - sj.z).powi(2);
            if d2 > r2 {
                continue;
            }
            let omega = model.n_monopole as f64
                * (si.phi - sj.phi)
                * ((si.theta + sj.theta) / 2.0).cos();
            let hop = model.hop_scale * (-1.0 + model.disorder * edge_uniform(model.seed, i, j));
            let entry = Complex64::from_polar(hop.abs(), omega) * hop.signum();
            h[(i, j)] = entry;
            h[(j, i)] = entry.conj();
        }
    }
    h
}

/// Occupied-band data below a Fermi level.
#[derive(Debug, Clone)]
pub struct BandData {
    pub hamiltonian: ComplexMatrix,
    pub spectrum: Vec<f64>,
    /// Projector onto states strictly below the Fermi level.
    pub projector: ComplexMatrix,
    /// Occupied eigenvectors, one column per state.
    pub occupied: ComplexMatrix,
    pub fermi: f64,
    pub rank: usize,
}

/// Spectral projector onto eigenvalues strictly below `fermi`.
pub fn spectral_projector(h: &ComplexMatrix, fermi: f64) -> Result<BandData, LatticeError> {
    let eig = eig_hermitian_unchecked(h);
    spectral_projector_from_eig(h, &eig.values, &eig.basis, fermi)
}

/// Same, reusing a precomputed eigendecomposition (ascending values).
pub fn spectral_projector_from_eig(
    h: &ComplexMatrix,
    values: &[f64],
    basis: &ComplexMatrix,
    fermi: f64,
) -> Result<BandData, LatticeError> {
    if values.iter().any(|&v| (v - fermi).abs() < 1e-8) {
        return Err(LatticeError::FermiOnEigenvalue { fermi });
    }
    let rank = values.iter().filter(|&&v| v < fermi).count();
    let n = values.len();
    let occupied = basis.columns(0, rank).into_owned();
    let projector = if rank == 0 {
        ComplexMatrix::zeros(n, n)
    } else {
        &occupied * occupied.adjoint()
    };
    Ok(BandData {
        hamiltonian: h.clone(),
        spectrum: values.to_vec(),
        projector,
        occupied,
        fermi,
        rank,
    })
}

/// Compress the position operators through the occupied band:
/// `H_r = (P X_r P)/L` restricted to the band, in the band eigenbasis.
pub fn band_compress(band: &BandData, model: &LatticeModel) -> Result<SurfaceRep, LatticeError> {
    if band.rank == 0 {
        return Err(LatticeError::EmptyBand);
    }
    let [x, y, z] = model.position_operators();
    let v = &band.occupied;
    let mats: Vec<ComplexMatrix> = [x, y, z]
        .into_iter()
        .map(|pos| {
            let c = (v.adjoint() * pos * v).scale(1.0 / model.radius);
            (&c + c.adjoint()).scale(0.5)
        })
        .collect();
    Ok(SurfaceRep::new(SurfaceKind::Sphere, mats)?)
}

/// One row of a Bott-index sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub fermi: f64,
    pub rank: usize,
    /// The index, when defined; errors are recorded instead of values.
    pub bott: Option<i64>,
    /// Distance of the decisive spectrum from the threshold.
    pub gap: f64,
    /// Two-sided separation of the B spectrum around one half.
    pub separation: f64,
    pub max_commutator: f64,
    pub sos_min_eigenvalue: f64,
    pub hall_raw: f64,
    pub error: Option<String>,
}

/// Sweep the Bott index over Fermi levels. Undefined rows are flagged, never
/// fabricated. Index values use the direct spectral count of the `B` matrix
/// with only the gap gate, as the experiment itself does.
pub fn bott_sweep(model: &LatticeModel, fermis: &[f64]) -> Result<Vec<SweepRow>, LatticeError> {
    let h = build_hamiltonian(model);
    let eig = eig_hermitian_unchecked(&h);
    let mut rows = Vec::with_capacity(fermis.len());
    for &fermi in fermis {
        let band = match spectral_projector_from_eig(&h, &eig.values, &eig.basis, fermi) {
            Ok(b) => b,
            Err(e) => {
                rows.push(SweepRow {
                    fermi,
                    rank: 0,
                    bott: None,
                    gap: 0.0,
                    separation: 0.0,
                    max_commutator: f64::NAN,
                    sos_min_eigenvalue: f64::NAN,
                    hall_raw: f64::NAN,
                    error: Some(e.to_string()),
                });
                continue;
            }
        };
        rows.push(sweep_row(&band, model, fermi)?);
    }
    Ok(rows)
}

fn sweep_row(band: &BandData, model: &LatticeModel, fermi: f64) -> Result<SweepRow, LatticeError> {
    let rep = match band_compress(band, model) {
        Ok(r) => r,
        Err(e) => {
            return Ok(SweepRow {
                fermi,
                rank: band.rank,
                bott: None,
                gap: 0.0,
                separation: 0.0,
                max_commutator: f64::NAN,
                sos_min_eigenvalue: f64::NAN,
                hall_raw: f64::NAN,
                error: Some(e.to_string()),
            })
        }
    };
    let k = rep.dim();
    let max_commutator = [(0usize, 1usize), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| commutator_norm(&rep.mats[i], &rep.mats[j]).unwrap_or(f64::NAN))
        .fold(0.0f64, f64::max);
    let sos = &rep.mats[0] * &rep.mats[0]
        + &rep.mats[1] * &rep.mats[1]
        + &rep.mats[2] * &rep.mats[2];
    let sos_min_eigenvalue = eig_hermitian_unchecked(&sos)
        .values
        .first()
        .copied()
        .unwrap_or(f64::NAN);
    let hall_raw = hall_trace(&rep)?;
    // B spectrum: count and two-sided separation around one half
    let s = indices::s_matrix(&rep.mats[0], &rep.mats[1], &rep.mats[2]);
    let vals = eig_hermitian_unchecked(&s).values;
    let b_vals: Vec<f64> = vals.iter().map(|v| (1.0 + v) / 2.0).collect();
    let below = b_vals.iter().copied().filter(|&v| v < 0.5).fold(f64::NEG_INFINITY, f64::max);
    let above = b_vals.iter().copied().filter(|&v| v > 0.5).fold(f64::INFINITY, f64::min);
    let separation = if below.is_finite() && above.is_finite() {
        above - below
    } else {
        f64::NAN
    };
    let gap = vals.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
    let (bott, error) = if gap < 1e-8 {
        (None, Some("index undefined: spectrum touches the threshold".to_string()))
    } else {
        let pos = vals.iter().filter(|&&v| v > 0.0).count() as i64;
        (Some(pos - k as i64), None)
    };
    Ok(SweepRow {
        fermi,
        rank: band.rank,
        bott,
        gap,
        separation,
        max_commutator,
        sos_min_eigenvalue,
        hall_raw,
        error,
    })
}

/// Raw Hall trace `(3/2i) Tr(H1 [H2, H3])` of a sphere representation.
pub fn hall_trace(rep: &SurfaceRep) -> Result<f64, LatticeError> {
    let t = trace(&(&rep.mats[0] * (&rep.mats[1] * &rep.mats[2] - &rep.mats[2] * &rep.mats[1])));
    // (3/2i)(re + i im) = (3/2) im - (3/2) re i; the real part of the trace
    // is the residue and must vanish for Hermitian input
    let residue = 1.5 * t.re.abs();
    if residue > 1e-9 * rep.dim() as f64 {
        return Err(LatticeError::ImaginaryResidue { residue });
    }
    Ok(1.5 * t.im)
}

/// Wannier localization report for an occupied band.
#[derive(Debug, Clone)]
pub struct WannierReport {
    /// Per-vector position expectations (x, y, z), scaled by the radius.
    pub centers: Vec<[f64; 3]>,
    /// Per-vector variance per coordinate.
    pub variances: Vec<[f64; 3]>,
    /// Largest per-coordinate localization length: `max sqrt(variance)`.
    pub l_loc: f64,
    /// Norm-bound estimate: `max_w |(X - X') w| / |w|` over the band.
    pub norm_bound: f64,
}

/// Construct localized Wannier functions for the band by jointly
/// diagonalizing the compressed position triple, then lifting the joint basis
/// back to site space. Refused when the Bott index of the compressed triple
/// is non-zero, which is exactly the obstruction.
pub fn wannier_functions(
    band: &BandData,
    model: &LatticeModel,
    solver: &SquareSolver,
) -> Result<WannierReport, LatticeError> {
    let rep = band_compress(band, model)?;
    let index = indices::bott_count(&rep)?;
    if index.value != 0 {
        return Err(LatticeError::Solve(SolveError::IndexNonzero {
            value: index.value,
        }));
    }
    let (basis, _) = joint_diagonalize(
        &[rep.mats[0].clone(), rep.mats[1].clone(), rep.mats[2].clone()],
        solver,
    )?;
    // lift to site space: columns are the Wannier vectors
    let lifted = &band.occupied * &basis;
    let n = model.len();
    let k = band.rank;
    let coords: [Vec<f64>; 3] = [
        model.sites.iter().map(|s| s.x).collect(),
        model.sites.iter().map(|s| s.y).collect(),
        model.sites.iter().map(|s| s.z).collect(),
    ];
    let mut centers = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    let mut l_loc2: f64 = 0.0;
    for a in 0..k {
        let mut c = [0.0f64; 3];
        let mut var = [0.0f64; 3];
        for (coord, d) in coords.iter().enumerate() {
            let mut mean = 0.0;
            let mut second = 0.0;
            for i in 0..n {
                let w = lifted[(i, a)].norm_sqr();
                mean += w * d[i];
                second += w * d[i] * d[i];
            }
            c[coord] = mean;
            var[coord] = (second - mean * mean).max(-1e-12);
            l_loc2 = l_loc2.max(var[coord]);
        }
        centers.push(c);
        variances.push(var);
    }
    // X' = sum_a x^a |v^a><v^a| on the band; the d2-style norm bound is the
    // operator norm of (X - X') restricted to the band
    let mut norm_bound: f64 = 0.0;
    for (coord, d) in coords.iter().enumerate() {
        let diff = ComplexMatrix::from_fn(n, k, |i, a| {
            lifted[(i, a)] * Complex64::new(d[i] - centers[a][coord], 0.0)
        });
        norm_bound = norm_bound.max(diff.singular_values().max());
    }
    Ok(WannierReport {
        centers,
        variances,
        l_loc: l_loc2.max(0.0).sqrt(),
        norm_bound,
    })
}

/// Commutator and site-density diagnostics for the projector.
#[derive(Debug, Clone)]
pub struct LocalityReport {
    /// `‖[X, P]‖, ‖[Y, P]‖, ‖[Z, P]‖`.
    pub commutators: [f64; 3],
    /// `(radius, max over centers of site counts within that radius)`.
    pub density: Vec<(f64, usize)>,
}

pub fn projector_locality_check(
    band: &BandData,
    model: &LatticeModel,
) -> Result<LocalityReport, LatticeError> {
    let [x, y, z] = model.position_operators();
    let p = &band.projector;
    let commutators = [
        commutator_norm(&x, p)?,
        commutator_norm(&y, p)?,
        commutator_norm(&z, p)?,
    ];
    let radii = [0.1, 0.2, 0.4, 0.8];
    let mut density = Vec::with_capacity(radii.len());
    for &l in &radii {
        let l2 = l * l;
        let mut max_count = 0usize;
        for a in &model.sites {
            let count = model
                .sites
                .iter()
                .filter(|b| {
                    (a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2) <= l2
                })
                .count();
            max_count = max_count.max(count);
        }
        density.push((l, max_count));
    }
    Ok(LocalityReport {
        commutators,
        density,
    })
}
