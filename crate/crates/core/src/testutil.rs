use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hilbert::{DensityMatrix, ExcitationBasis, PureState};
use crate::{Ket, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss_pair(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

/// Random pure state supported on patterns of weight <= `max_weight`.
pub fn random_pure(basis: &Arc<ExcitationBasis>, max_weight: usize, rng: &mut impl Rng) -> PureState {
    let v = Ket::from_fn(basis.dim(), |i, _| {
        if basis.weight(i) <= max_weight {
            gauss_pair(rng)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    PureState::normalized(basis.clone(), v).unwrap()
}

/// Random mixed state of rank 3 supported on weight <= `max_weight`.
pub fn random_density(basis: &Arc<ExcitationBasis>, max_weight: usize, rng: &mut impl Rng) -> DensityMatrix {
    let d = basis.dim();
    let mut m = DMatrix::<C64>::zeros(d, d);
    for _ in 0..3 {
        let psi = random_pure(basis, max_weight, rng);
        let w = rng.random::<f64>();
        m += psi.to_density().into_matrix() * C64::new(w, 0.0);
    }
    let tr = m.trace().re;
    m /= C64::new(tr, 0.0);
    DensityMatrix::new(basis.clone(), m).unwrap()
}

/// Random (not necessarily Hermitian) matrix.
pub fn random_matrix(d: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| gauss_pair(rng))
}
