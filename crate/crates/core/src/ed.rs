//! Exact diagonalization of small periodic Hubbard chains.
//!
//! Basis states are (up-mask, down-mask) pairs with fixed particle numbers
//! per spin species. Orbitals are ordered all-up-then-all-down, site-major;
//! with that ordering the up-hop and down-hop sign computations are the
//! same Jordan-Wigner parity count, and the up count drops out of the down
//! signs inside a fixed sector.
//!
//! Rings with two sites double-count their single bond, so cross-validation
//! uses four sites and up.

use crate::entanglement::LocalDensityMatrix;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Dense diagonalization is capped here; C(8,4)² = 4900 already takes a
/// while but stays well inside the dense-solver comfort zone.
pub const ED_MAX_SITES: usize = 8;

/// Occupation-number basis of one (n_up, n_down) sector.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub sites: usize,
    pub n_up: usize,
    pub n_down: usize,
    /// (up-mask, down-mask) pairs, up-major lexicographic.
    pub states: Vec<(u32, u32)>,
}

/// Ground eigenpair of one sector Hamiltonian.
#[derive(Clone, Debug)]
pub struct SectorState {
    pub energy: f64,
    pub amplitudes: DVector<f64>,
    /// Set when the next eigenvalue sits within 1e-10 of the lowest.
    pub degenerate: bool,
}

fn masks_with_popcount(sites: usize, count: usize) -> Vec<u32> {
    (0u32..1 << sites)
        .filter(|m| m.count_ones() as usize == count)
        .collect()
}

pub fn build_basis(sites: usize, n_up: usize, n_down: usize) -> Result<SectorBasis> {
    if sites == 0 || sites > ED_MAX_SITES {
        return Err(Error::EdCapacity {
            sites,
            dimension: 0,
        });
    }
    if n_up > sites || n_down > sites {
        return Err(Error::domain(format!(
            "cannot place ({n_up} up, {n_down} down) electrons on {sites} sites"
        )));
    }
    let ups = masks_with_popcount(sites, n_up);
    let downs = masks_with_popcount(sites, n_down);
    let mut states = Vec::with_capacity(ups.len() * downs.len());
    for &up in &ups {
        for &dn in &downs {
            states.push((up, dn));
        }
    }
    Ok(SectorBasis {
        sites,
        n_up,
        n_down,
        states,
    })
}

impl SectorBasis {
    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    fn index_of(&self, state: (u32, u32)) -> usize {
        self.states
            .binary_search(&state)
            .expect("hopped state stays inside the sector")
    }
}

/// Jordan-Wigner parity of the occupied orbitals below `pos`.
fn parity_below(mask: u32, pos: usize) -> f64 {
    if (mask & ((1u32 << pos) - 1)).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Apply c†_to c_from within one spin species; `from` must be occupied and
/// `to` empty. Returns the new mask and the fermionic sign.
fn hop(mask: u32, from: usize, to: usize) -> (u32, f64) {
    let sign_from = parity_below(mask, from);
    let cleared = mask & !(1u32 << from);
    let sign_to = parity_below(cleared, to);
    (cleared | (1u32 << to), sign_from * sign_to)
}

/// Assemble the dense sector Hamiltonian: hopping amplitude one on the
/// periodic ring plus U times the number of doubly occupied sites on the
/// diagonal.
pub fn build_hamiltonian(basis: &SectorBasis, coupling: f64) -> DMatrix<f64> {
    let dim = basis.dimension();
    let sites = basis.sites;
    let mut h = DMatrix::zeros(dim, dim);
    for (col, &(up, dn)) in basis.states.iter().enumerate() {
        h[(col, col)] = coupling * (up & dn).count_ones() as f64;
        for site in 0..sites {
            let neighbor = (site + 1) % sites;
            for (from, to) in [(site, neighbor), (neighbor, site)] {
                if up & (1 << from) != 0 && up & (1 << to) == 0 {
                    let (new_up, sign) = hop(up, from, to);
                    let row = basis.index_of((new_up, dn));
                    h[(row, col)] += -sign;
                }
                if dn & (1 << from) != 0 && dn & (1 << to) == 0 {
                    let (new_dn, sign) = hop(dn, from, to);
                    let row = basis.index_of((up, new_dn));
                    h[(row, col)] += -sign;
                }
            }
        }
    }
    h
}

/// Lowest eigenpair of a dense symmetric matrix, with an honest degeneracy
/// flag from the spectral gap.
pub fn ground_state(hamiltonian: &DMatrix<f64>) -> Result<SectorState> {
    let dim = hamiltonian.nrows();
    if dim == 0 {
        return Err(Error::domain("empty Hamiltonian"));
    }
    if dim == 1 {
        return Ok(SectorState {
            energy: hamiltonian[(0, 0)],
            amplitudes: DVector::from_element(1, 1.0),
            degenerate: false,
        });
    }
    let eigen = hamiltonian
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Eigensolver("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[a]
            .partial_cmp(&eigen.eigenvalues[b])
            .unwrap()
    });
    let lowest = order[0];
    let second = order[1];
    let gap = eigen.eigenvalues[second] - eigen.eigenvalues[lowest];
    Ok(SectorState {
        energy: eigen.eigenvalues[lowest],
        amplitudes: eigen.eigenvectors.column(lowest).into_owned(),
        degenerate: gap < 1e-10,
    })
}

/// Convenience wrapper: basis, Hamiltonian, ground state in one call.
pub fn solve_sector(
    sites: usize,
    n_up: usize,
    n_down: usize,
    coupling: f64,
) -> Result<(SectorBasis, SectorState)> {
    let basis = build_basis(sites, n_up, n_down)?;
    let h = build_hamiltonian(&basis, coupling);
    let state = ground_state(&h)?;
    Ok((basis, state))
}

/// Populations of the four local states at site 0, from the ground-state
/// amplitudes grouped by the site-0 occupation.
///
/// Degenerate ground states are rejected: their populations depend on an
/// arbitrary tie-break.
pub fn measure_local(basis: &SectorBasis, state: &SectorState) -> Result<LocalDensityMatrix> {
    if state.degenerate {
        return Err(Error::DegenerateGroundState { gap: 0.0 });
    }
    let mut pops = [0.0f64; 4];
    for (idx, &(up, dn)) in basis.states.iter().enumerate() {
        let a = state.amplitudes[idx];
        let slot = (up & 1) + 2 * (dn & 1);
        pops[slot as usize] += a * a;
    }
    LocalDensityMatrix::new(pops[0], pops[1], pops[2], pops[3])
}

/// Site-averaged double occupancy (1/L) Σ_j <n_j↑ n_j↓>.
pub fn measure_double_occupancy(basis: &SectorBasis, state: &SectorState) -> f64 {
    let mut acc = 0.0;
    for (idx, &(up, dn)) in basis.states.iter().enumerate() {
        let a = state.amplitudes[idx];
        acc += a * a * (up & dn).count_ones() as f64;
    }
    acc / basis.sites as f64
}

/// <n_j↑ n_j↓> at one site, for the translation-invariance checks.
pub fn site_double_occupancy(basis: &SectorBasis, state: &SectorState, site: usize) -> f64 {
    let bit = 1u32 << site;
    let mut acc = 0.0;
    for (idx, &(up, dn)) in basis.states.iter().enumerate() {
        if up & bit != 0 && dn & bit != 0 {
            let a = state.amplitudes[idx];
            acc += a * a;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_counts() {
        assert_eq!(build_basis(2, 1, 1).unwrap().dimension(), 4);
        assert_eq!(build_basis(4, 2, 2).unwrap().dimension(), 36);
        assert_eq!(build_basis(6, 3, 3).unwrap().dimension(), 400);
        assert!(build_basis(9, 1, 1).is_err());
    }

    #[test]
    fn basis_is_sorted_and_duplicate_free() {
        let basis = build_basis(5, 2, 3).unwrap();
        for w in basis.states.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn single_particle_spectrum() {
        // free dispersion -2 cos(2πm/4): {-2, 0, 0, 2}
        let basis = build_basis(4, 1, 0).unwrap();
        let h = build_hamiltonian(&basis, 7.3); // U irrelevant without pairs
        let eigen = h.symmetric_eigen();
        let mut vals: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-2.0, 0.0, 0.0, 2.0];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_exactly_symmetric() {
        let basis = build_basis(4, 2, 1).unwrap();
        let h = build_hamiltonian(&basis, 3.0);
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn free_ground_energies() {
        let (_, state) = solve_sector(4, 1, 1, 0.0).unwrap();
        assert!((state.energy + 4.0).abs() < 1e-12);
        let (_, state) = solve_sector(6, 3, 3, 0.0).unwrap();
        assert!((state.energy + 8.0).abs() < 1e-12);
    }

    #[test]
    fn open_shell_degeneracy_is_flagged() {
        // two independent particles per species at L = 4, U = 0: the second
        // electron of each species sits on a doubly degenerate shell
        let (basis, state) = solve_sector(4, 2, 2, 0.0).unwrap();
        assert!(state.degenerate);
        assert!(measure_local(&basis, &state).is_err());
    }

    #[test]
    fn saturated_sector_has_no_double_occupancy() {
        // three up spins on four sites close the shell m = 0, ±1
        let (basis, state) = solve_sector(4, 3, 0, 5.0).unwrap();
        assert_eq!(measure_double_occupancy(&basis, &state), 0.0);
        let rho = measure_local(&basis, &state).unwrap();
        assert_eq!(rho.down, 0.0);
        assert_eq!(rho.double, 0.0);
    }

    #[test]
    fn strong_coupling_empties_double_occupancy() {
        let (basis, state) = solve_sector(4, 2, 2, 1e4).unwrap();
        assert!(measure_double_occupancy(&basis, &state) < 1e-3);
    }

    #[test]
    fn one_by_one_matrix() {
        let h = DMatrix::from_element(1, 1, -3.25);
        let state = ground_state(&h).unwrap();
        assert_eq!(state.energy, -3.25);
        assert!(!state.degenerate);
    }

    #[test]
    fn spin_swapped_sectors_share_spectra() {
        let a = build_hamiltonian(&build_basis(4, 3, 1).unwrap(), 2.5);
        let b = build_hamiltonian(&build_basis(4, 1, 3).unwrap(), 2.5);
        let mut ea: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut eb: Vec<f64> = b.symmetric_eigen().eigenvalues.iter().copied().collect();
        ea.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
