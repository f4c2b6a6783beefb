//! Parameter sweeps over coupling, filling and magnetization.
//!
//! Each grid point is an independent work item; sweeps evaluate points on a
//! bounded worker pool and merge results in deterministic grid order, so
//! repeated runs produce bit-identical records. Failed points are recorded
//! with an error marker instead of aborting the sweep.

use crate::bethe::{
    double_occupancy_hf, free_fermion_energy, total_ground_energy, ModelSector, SolverOptions,
    FREE_COUPLING_CUTOFF,
};
use crate::ed;
use crate::entanglement::{infinite_u_filling_curve, von_neumann_entropy, LocalDensityMatrix};
use crate::error::{Error, Result};
use crate::half_filling::{
    double_occupancy_integral, series_double_occupancy, series_entanglement_from_occupancy,
    SeriesRegime,
};
use crate::special::{entropy_term, QuadratureSpec};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Provenance of one record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Thermodynamic-limit Bessel integral (half filling only).
    Integral,
    /// Finite-chain Bethe-ansatz solve.
    Bethe,
    /// Exact diagonalization (small chains only).
    Ed,
    /// Truncated coupling series / analytic limiting curves.
    Series,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Integral => "integral",
            Method::Bethe => "bethe",
            Method::Ed => "ed",
            Method::Series => "series",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integral" => Ok(Method::Integral),
            "bethe" => Ok(Method::Bethe),
            "ed" => Ok(Method::Ed),
            "series" => Ok(Method::Series),
            other => Err(Error::domain(format!(
                "unknown method `{other}` (expected integral, bethe, ed or series)"
            ))),
        }
    }
}

/// Per-point outcome; failures keep their reason for the output stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    Failed(String),
}

impl PointStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, PointStatus::Ok)
    }
}

/// One parameter point's observables.
#[derive(Clone, Debug)]
pub struct ScanRecord {
    /// U, n or m_z depending on the sweep.
    pub parameter: f64,
    /// Ground-state energy per site; absent for thermodynamic-limit methods
    /// that only evaluate the occupancy derivative.
    pub energy_per_site: Option<f64>,
    /// Double occupancy w.
    pub double_occupancy: Option<f64>,
    /// Local entanglement E_v in bits.
    pub entanglement: Option<f64>,
    pub method: Method,
    pub status: PointStatus,
}

impl ScanRecord {
    fn failed(parameter: f64, method: Method, err: &Error) -> Self {
        ScanRecord {
            parameter,
            energy_per_site: None,
            double_occupancy: None,
            entanglement: None,
            method,
            status: PointStatus::Failed(err.to_string()),
        }
    }
}

/// Shared sweep controls.
#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub quadrature: QuadratureSpec,
    pub solver: SolverOptions,
    /// Central-difference step for the Hellmann-Feynman derivative;
    /// `None` uses 1e-4 max(1, |U|).
    pub hf_step: Option<f64>,
    /// Worker threads for grid evaluation.
    pub workers: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            quadrature: QuadratureSpec::default(),
            solver: SolverOptions::default(),
            hf_step: None,
            workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        }
    }
}

/// Evaluate `f` over 0..count on a bounded pool, returning results in index
/// order regardless of scheduling.
pub(crate) fn parallel_map<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if workers <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let collected: Mutex<Vec<(usize, T)>> = Mutex::new(Vec::with_capacity(count));
    std::thread::scope(|scope| {
        for _ in 0..workers.min(count) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= count {
                    break;
                }
                let value = f(index);
                collected.lock().unwrap().push((index, value));
            });
        }
    });
    let mut pairs = collected.into_inner().unwrap();
    pairs.sort_by_key(|(i, _)| *i);
    pairs.into_iter().map(|(_, v)| v).collect()
}

/// Full set of ground-state observables for one finite-chain sector.
#[derive(Clone, Debug)]
pub struct SectorObservables {
    pub total_energy: f64,
    pub energy_per_site: f64,
    pub double_occupancy: f64,
    pub density_matrix: LocalDensityMatrix,
    pub entanglement: f64,
}

/// Solve a sector (through the particle-hole maps where needed) and derive
/// energy, Hellmann-Feynman double occupancy and local entanglement.
pub fn sector_observables(sector: &ModelSector, opts: &ScanOptions) -> Result<SectorObservables> {
    let (total_energy, w) = if sector.coupling.abs() < FREE_COUPLING_CUTOFF {
        (
            free_fermion_energy(sector),
            sector.density_up() * sector.density_down(),
        )
    } else {
        (
            total_ground_energy(sector, &opts.solver)?,
            double_occupancy_hf(sector, opts.hf_step, &opts.solver)?,
        )
    };
    let rho = LocalDensityMatrix::from_populations(w, sector.density_up(), sector.density_down())?;
    Ok(SectorObservables {
        total_energy,
        energy_per_site: total_energy / sector.sites as f64,
        double_occupancy: w,
        density_matrix: rho,
        entanglement: von_neumann_entropy(&rho),
    })
}

fn half_filling_entropy(w: f64) -> Result<f64> {
    Ok(2.0 * (entropy_term(w)? + entropy_term(0.5 - w)?))
}

fn coupling_point(
    sites: usize,
    coupling: f64,
    method: Method,
    opts: &ScanOptions,
) -> ScanRecord {
    let result: Result<ScanRecord> = (|| match method {
        Method::Integral => {
            let w = double_occupancy_integral(coupling, &opts.quadrature)?;
            Ok(ScanRecord {
                parameter: coupling,
                energy_per_site: None,
                double_occupancy: Some(w),
                entanglement: Some(half_filling_entropy(w)?),
                method,
                status: PointStatus::Ok,
            })
        }
        Method::Bethe => {
            let sector = ModelSector::new(sites, sites, sites / 2, coupling)?;
            let obs = sector_observables(&sector, opts)?;
            Ok(ScanRecord {
                parameter: coupling,
                energy_per_site: Some(obs.energy_per_site),
                double_occupancy: Some(obs.double_occupancy),
                entanglement: Some(obs.entanglement),
                method,
                status: PointStatus::Ok,
            })
        }
        Method::Ed => {
            let (basis, state) = ed::solve_sector(sites, sites - sites / 2, sites / 2, coupling)?;
            let rho = ed::measure_local(&basis, &state)?;
            Ok(ScanRecord {
                parameter: coupling,
                energy_per_site: Some(state.energy / sites as f64),
                double_occupancy: Some(ed::measure_double_occupancy(&basis, &state)),
                entanglement: Some(von_neumann_entropy(&rho)),
                method,
                status: PointStatus::Ok,
            })
        }
        Method::Series => {
            let regime = if coupling >= 8.0 {
                SeriesRegime::StrongCoupling
            } else if coupling.abs() <= 1.0 {
                SeriesRegime::WeakCoupling
            } else {
                return Err(Error::domain(format!(
                    "coupling {coupling} is outside both series validity windows"
                )));
            };
            let w = series_double_occupancy(coupling, regime)?;
            Ok(ScanRecord {
                parameter: coupling,
                energy_per_site: None,
                double_occupancy: Some(w),
                entanglement: Some(series_entanglement_from_occupancy(coupling, regime)?),
                method,
                status: PointStatus::Ok,
            })
        }
    })();
    result.unwrap_or_else(|err| ScanRecord::failed(coupling, method, &err))
}

/// Sweep the on-site coupling at half filling, zero magnetization.
///
/// The `bethe` method needs an even chain (the singlet sector N = L,
/// M = L/2); negative couplings route through the particle-hole map.
pub fn scan_coupling(
    sites: usize,
    coupling_grid: &[f64],
    methods: &[Method],
    opts: &ScanOptions,
) -> Result<Vec<ScanRecord>> {
    if methods.is_empty() {
        return Err(Error::domain("no methods selected"));
    }
    if methods.contains(&Method::Bethe) && sites % 2 != 0 {
        return Err(Error::domain(
            "the bethe method needs an even number of sites for the singlet sector",
        ));
    }
    let tasks: Vec<(f64, Method)> = coupling_grid
        .iter()
        .flat_map(|&u| methods.iter().map(move |&m| (u, m)))
        .collect();
    Ok(parallel_map(tasks.len(), opts.workers, |i| {
        let (u, method) = tasks[i];
        coupling_point(sites, u, method, opts)
    }))
}

/// Sweep the filling factor n = N/L at fixed coupling.
///
/// Every grid entry must be an even electron count so each point is a
/// zero-magnetization singlet; counts above L are obtained from the mirror
/// sector at 2L - N, which shares the computation and makes
/// E_v(n) = E_v(2-n) exact.
pub fn scan_filling(
    sites: usize,
    coupling: f64,
    electron_grid: &[usize],
    opts: &ScanOptions,
) -> Result<Vec<ScanRecord>> {
    if sites % 2 != 0 {
        return Err(Error::domain("filling scans need an even number of sites"));
    }
    if !coupling.is_finite() || coupling < 0.0 {
        return Err(Error::domain(
            "filling scans are defined for finite U >= 0",
        ));
    }
    for &n in electron_grid {
        if n % 2 != 0 || n == 0 || n >= 2 * sites {
            return Err(Error::domain(format!(
                "electron count {n} is not an even number in (0, 2L)"
            )));
        }
    }
    // Solve each needed base sector (at or below half filling) once.
    let mut base_counts: Vec<usize> = electron_grid
        .iter()
        .map(|&n| n.min(2 * sites - n))
        .collect();
    base_counts.sort_unstable();
    base_counts.dedup();
    let base_results: Vec<(usize, Result<SectorObservables>)> =
        parallel_map(base_counts.len(), opts.workers, |i| {
            let n = base_counts[i];
            let sector = ModelSector::new(sites, n, n / 2, coupling)
                .expect("validated grid entry");
            (n, sector_observables(&sector, opts))
        });

    let mut records = Vec::with_capacity(electron_grid.len());
    for &n in electron_grid {
        let base_n = n.min(2 * sites - n);
        let filling = n as f64 / sites as f64;
        let (_, result) = base_results
            .iter()
            .find(|(count, _)| *count == base_n)
            .expect("base sector computed");
        match result {
            Ok(obs) => {
                let mirrored = n > sites;
                // under the double particle-hole map the empty and doubly
                // occupied populations trade places; the entropy is shared
                let (energy, w) = if mirrored {
                    (
                        (sites as f64 - base_n as f64) * coupling + obs.total_energy,
                        obs.density_matrix.empty,
                    )
                } else {
                    (obs.total_energy, obs.double_occupancy)
                };
                records.push(ScanRecord {
                    parameter: filling,
                    energy_per_site: Some(energy / sites as f64),
                    double_occupancy: Some(w),
                    entanglement: Some(obs.entanglement),
                    method: Method::Bethe,
                    status: PointStatus::Ok,
                });
            }
            Err(err) => records.push(ScanRecord::failed(filling, Method::Bethe, err)),
        }
    }
    Ok(records)
}

/// Analytic infinite-coupling filling curve over the same grid shape,
/// mirrored above half filling.
pub fn scan_filling_infinite_coupling(
    sites: usize,
    electron_grid: &[usize],
) -> Result<Vec<ScanRecord>> {
    if sites % 2 != 0 {
        return Err(Error::domain("filling scans need an even number of sites"));
    }
    let mut records = Vec::with_capacity(electron_grid.len());
    for &n in electron_grid {
        if n == 0 || n >= 2 * sites {
            return Err(Error::domain(format!(
                "electron count {n} is not in (0, 2L)"
            )));
        }
        let filling = n as f64 / sites as f64;
        // fold on the integer count so mirrored points share their input bits
        let base = n.min(2 * sites - n) as f64 / sites as f64;
        let record = match infinite_u_filling_curve(base) {
            Ok(ev) => ScanRecord {
                parameter: filling,
                energy_per_site: None,
                // no double occupancy below half filling at U = ∞; above it
                // the mirror turns the frozen empty weight into w = n - 1
                double_occupancy: Some(if filling > 1.0 { filling - 1.0 } else { 0.0 }),
                entanglement: Some(ev),
                method: Method::Series,
                status: PointStatus::Ok,
            },
            Err(err) => ScanRecord::failed(filling, Method::Series, &err),
        };
        records.push(record);
    }
    Ok(records)
}

/// Sweep the magnetization at fixed L, N, U by varying the down-spin count.
/// Records are ordered by m_z ascending (down spins descending).
pub fn scan_magnetization(
    sites: usize,
    electrons: usize,
    coupling: f64,
    down_spin_grid: &[usize],
    opts: &ScanOptions,
) -> Result<Vec<ScanRecord>> {
    if !coupling.is_finite() || coupling < 0.0 {
        return Err(Error::domain(
            "magnetization scans are defined for finite U >= 0",
        ));
    }
    if electrons == 0 || electrons > 2 * sites {
        return Err(Error::domain(format!(
            "electron count {electrons} is not in (0, 2L]"
        )));
    }
    for &m in down_spin_grid {
        if 2 * m > electrons {
            return Err(Error::domain(format!(
                "down-spin count {m} exceeds N/2; magnetization scans run over m_z >= 0"
            )));
        }
    }
    let mut grid: Vec<usize> = down_spin_grid.to_vec();
    grid.sort_unstable_by(|a, b| b.cmp(a));
    grid.dedup();
    Ok(parallel_map(grid.len(), opts.workers, |i| {
        let m = grid[i];
        match ModelSector::new(sites, electrons, m, coupling)
            .and_then(|sector| sector_observables(&sector, opts).map(|obs| (sector, obs)))
        {
            Ok((sector, obs)) => ScanRecord {
                parameter: sector.magnetization(),
                energy_per_site: Some(obs.energy_per_site),
                double_occupancy: Some(obs.double_occupancy),
                entanglement: Some(obs.entanglement),
                method: Method::Bethe,
                status: PointStatus::Ok,
            },
            Err(err) => {
                let m_z = (electrons as f64 - 2.0 * m as f64) / (2.0 * sites as f64);
                ScanRecord::failed(m_z, Method::Bethe, &err)
            }
        }
    }))
}

/// One-sided slopes of E_v(n) at n = 1, from a second-order difference over
/// the three nearest singlet fillings N = L, L-2, L-4. The right slope is
/// the mirror image of the left one, so their antisymmetry is exact.
pub fn derivative_jump_at_half_filling(
    sites: usize,
    coupling: f64,
    opts: &ScanOptions,
) -> Result<(f64, f64)> {
    if sites % 2 != 0 || sites < 6 {
        return Err(Error::domain(
            "the derivative jump needs an even chain of at least 6 sites",
        ));
    }
    let entropy_at = |electrons: usize| -> Result<f64> {
        let sector = ModelSector::new(sites, electrons, electrons / 2, coupling)?;
        Ok(sector_observables(&sector, opts)?.entanglement)
    };
    let at_half = entropy_at(sites)?;
    let minus_one = entropy_at(sites - 2)?;
    let minus_two = entropy_at(sites - 4)?;
    let step = 2.0 / sites as f64;
    let left = (3.0 * at_half - 4.0 * minus_one + minus_two) / (2.0 * step);
    Ok((left, -left))
}
