//! Seeded random finite triples.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{block_triple, BclTriple};
use crate::linops::dense::{self, CMat};
use crate::linops::C64;

pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    if d == 0 {
        return CMat::zeros(0, 0);
    }
    let qr = gaussian(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let x = r[(k, k)];
        let ph = if x.norm() > 0.0 { x / x.norm() } else { C64::new(1.0, 0.0) };
        let col = q.column(k) * ph;
        q.set_column(k, &col);
    }
    q
}

/// `V diag(1,..,1,0,..,0) V*` with `rank` ones.
pub fn random_projection(d: usize, rank: usize, rng: &mut impl Rng) -> CMat {
    let v = haar_unitary(d, rng);
    let mut diag = vec![C64::new(0.0, 0.0); d];
    for x in diag.iter_mut().take(rank) {
        *x = C64::new(1.0, 0.0);
    }
    &v * dense::diag(&diag) * v.adjoint()
}

/// Unrestricted triple with `rank P` uniform in `0..=d`.
pub fn random_triple(d: usize, rng: &mut impl Rng) -> BclTriple {
    let rank = rng.random_range(0..=d);
    let p = random_projection(d, rank, rng);
    let u = haar_unitary(d, rng);
    BclTriple::finite_with_tol(u, p, 1e-10).expect("random triple")
}

/// `ran P` reduces `U`: Zero class.
pub fn random_zero_triple(d: usize, rng: &mut impl Rng) -> BclTriple {
    let r = rng.random_range(0..=d);
    let u1 = haar_unitary(r, rng);
    let u2 = haar_unitary(d - r, rng);
    conjugate(&block_triple(&u1, &u2).unwrap(), rng)
}

/// `U*PU = P^perp`: off-diagonal class, dimension `2h`.
pub fn random_offdiag_triple(h: usize, rng: &mut impl Rng) -> BclTriple {
    let u1 = haar_unitary(h, rng);
    let u2 = haar_unitary(h, rng);
    let mut u = CMat::zeros(2 * h, 2 * h);
    u.view_mut((0, h), (h, h)).copy_from(&u1);
    u.view_mut((h, 0), (h, h)).copy_from(&u2);
    let p = dense::block_diag(&CMat::identity(h, h), &CMat::zeros(h, h));
    conjugate(&BclTriple::finite_with_tol(u, p, 1e-10).unwrap(), rng)
}

/// Generic triple with `0 < rank P < d` (Mixed with probability one), `d >= 2`.
pub fn random_mixed_triple(d: usize, rng: &mut impl Rng) -> BclTriple {
    let rank = rng.random_range(1..d);
    let p = random_projection(d, rank, rng);
    let u = haar_unitary(d, rng);
    BclTriple::finite_with_tol(u, p, 1e-10).unwrap()
}

/// `(V U V*, V P V*)` for a random unitary `V`.
pub fn conjugate(t: &BclTriple, rng: &mut impl Rng) -> BclTriple {
    match t {
        BclTriple::Finite { u, p } => {
            let v = haar_unitary(u.nrows(), rng);
            let u2 = &v * u * v.adjoint();
            let p2 = &v * p * v.adjoint();
            BclTriple::finite_with_tol(u2, p2, 1e-10).unwrap()
        }
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcl::DefectClass;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_hit_their_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let d = rng.random_range(1..=6);
            assert_eq!(random_zero_triple(d, &mut rng).classify(0).class, DefectClass::Zero);
            let h = rng.random_range(1..=3);
            assert_eq!(random_offdiag_triple(h, &mut rng).classify(0).class, DefectClass::OffDiagonal);
            let d = rng.random_range(2..=6);
            assert_eq!(random_mixed_triple(d, &mut rng).classify(0).class, DefectClass::Mixed);
        }
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..8 {
            assert!(dense::unitary_deviation(&haar_unitary(d, &mut rng)) < 1e-13);
        }
    }
}
