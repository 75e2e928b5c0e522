//! Random states, unitaries, spectra and purification pairs for tests and
//! demos.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::state::StateVector;
use super::{RegisterLayout, C64};
use crate::error::Result;

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random pure state on a layout.
pub fn random_state<R: Rng + ?Sized>(layout: RegisterLayout, rng: &mut R) -> StateVector {
    let dim = layout.total_dim();
    let raw: DVector<C64> = ginibre(dim, 1, rng).column(0).into_owned();
    let norm = raw.norm();
    StateVector::new_unchecked(layout, raw / C64::from(norm))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = ginibre(dim, dim, rng).qr();
    let r_diag: Vec<C64> = (0..dim).map(|i| qr.r()[(i, i)]).collect();
    let mut q = qr.q();
    for (i, d) in r_diag.iter().enumerate() {
        let phase = if d.norm() > 0.0 {
            d / C64::from(d.norm())
        } else {
            C64::new(1.0, 0.0)
        };
        for r in 0..dim {
            q[(r, i)] *= phase;
        }
    }
    q
}

/// Random probability spectrum of the given length. With
/// `degenerate = true`, eigenvalues come in repeated groups so degenerate
/// Schmidt blocks are exercised.
pub fn random_spectrum<R: Rng + ?Sized>(len: usize, degenerate: bool, rng: &mut R) -> Vec<f64> {
    let mut spectrum = Vec::with_capacity(len);
    if degenerate {
        while spectrum.len() < len {
            let weight: f64 = rng.gen_range(0.2..1.0);
            let multiplicity = rng.gen_range(1..=(len - spectrum.len()).min(3));
            for _ in 0..multiplicity {
                spectrum.push(weight);
            }
        }
    } else {
        for _ in 0..len {
            spectrum.push(rng.gen_range(0.05..1.0));
        }
    }
    let total: f64 = spectrum.iter().sum();
    for w in &mut spectrum {
        *w /= total;
    }
    spectrum.sort_by(|a, b| b.total_cmp(a));
    spectrum
}

/// Two independent purifications of one mixed state.
///
/// Both returned states live on `(local, rest)` and reduce to exactly the
/// same density matrix on `rest`: ψ = Σᵢ √λᵢ |uᵢ⟩_local ⊗ |vᵢ⟩_rest with a
/// shared spectrum λ, independent random local bases u, and — inside
/// degenerate spectral blocks — an extra random rotation of the rest-side
/// eigenvectors for the second state (which leaves the reduced state
/// untouched but forces nontrivial basis alignment).
pub fn random_purification_pair<R: Rng + ?Sized>(
    local: (&str, usize),
    rest: (&str, usize),
    spectrum: &[f64],
    rng: &mut R,
) -> Result<(StateVector, StateVector)> {
    let (local_name, local_dim) = local;
    let (rest_name, rest_dim) = rest;
    assert!(spectrum.len() <= local_dim.min(rest_dim));
    let layout = RegisterLayout::new([(local_name, local_dim), (rest_name, rest_dim)])?;

    let rest_basis = random_unitary(rest_dim, rng);
    let local_basis_a = random_unitary(local_dim, rng);
    let local_basis_b = random_unitary(local_dim, rng);

    // Rotating rest-side eigenvectors inside a degenerate block keeps the
    // reduced state identical.
    let mut rest_basis_b = rest_basis.clone();
    let mut start = 0;
    while start < spectrum.len() {
        let mut end = start + 1;
        while end < spectrum.len() && (spectrum[end] - spectrum[start]).abs() < 1e-12 {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let rotation = random_unitary(size, rng);
            let block = rest_basis.columns(start, size) * rotation;
            rest_basis_b.columns_mut(start, size).copy_from(&block);
        }
        start = end;
    }

    let build = |local_basis: &DMatrix<C64>, rest_vectors: &DMatrix<C64>| {
        let mut amplitudes: DVector<C64> = DVector::zeros(local_dim * rest_dim);
        for (i, lambda) in spectrum.iter().enumerate() {
            let weight = C64::from(lambda.sqrt());
            for l in 0..local_dim {
                for r in 0..rest_dim {
                    amplitudes[l * rest_dim + r] +=
                        weight * local_basis[(l, i)] * rest_vectors[(r, i)];
                }
            }
        }
        let norm = amplitudes.norm();
        StateVector::new_unchecked(layout.clone(), amplitudes / C64::from(norm))
    };

    Ok((
        build(&local_basis_a, &rest_basis),
        build(&local_basis_b, &rest_basis_b),
    ))
}
