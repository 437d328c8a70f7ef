use num_complex::Complex64 as C64;

use super::{hilbert_dim, Axis, SparseOperator};
use crate::{Error, Result};

const HALF: f64 = 0.5;

/// Nonzero entries `(row, value)` of the single-site operator acting on
/// basis state `b` in column `b`.
fn site_column(b: usize, site: usize, axis: Axis) -> Option<(usize, C64)> {
    let mask = 1usize << site;
    let up = b & mask != 0;
    match axis {
        Axis::Z => Some((b, C64::new(if up { HALF } else { -HALF }, 0.0))),
        Axis::Plus => (!up).then_some((b | mask, C64::new(1.0, 0.0))),
        Axis::Minus => up.then_some((b & !mask, C64::new(1.0, 0.0))),
        Axis::X => Some((b ^ mask, C64::new(HALF, 0.0))),
        // S^y = (S^+ - S^-)/(2i)
        Axis::Y => Some((b ^ mask, if up { C64::new(0.0, HALF) } else { C64::new(0.0, -HALF) })),
    }
}

/// Spin-1/2 operator on `site`, identity on the other `n_atoms - 1` sites.
pub fn local_operator(n_atoms: usize, site: usize, axis: Axis) -> Result<SparseOperator> {
    let dim = hilbert_dim(n_atoms)?;
    if site >= n_atoms {
        return Err(Error::SiteOutOfRange { site, n_atoms });
    }
    let trip = (0..dim)
        .filter_map(|b| site_column(b, site, axis).map(|(r, v)| (r, b, v)))
        .collect();
    Ok(SparseOperator::from_triplets(dim, trip))
}

/// `S^axis = sum_j S_j^axis`.
pub fn collective_operator(n_atoms: usize, axis: Axis) -> Result<SparseOperator> {
    let dim = hilbert_dim(n_atoms)?;
    let mut trip = Vec::with_capacity(dim * if axis == Axis::Z { 1 } else { n_atoms });
    for b in 0..dim {
        if axis == Axis::Z {
            let m = b.count_ones() as f64 - n_atoms as f64 / 2.0;
            trip.push((b, b, C64::new(m, 0.0)));
            continue;
        }
        for site in 0..n_atoms {
            if let Some((r, v)) = site_column(b, site, axis) {
                trip.push((r, b, v));
            }
        }
    }
    Ok(SparseOperator::from_triplets(dim, trip))
}

/// `S.S` assembled directly: `S_z^2 + N/2 + sum_{i != j} S_i^+ S_j^-`.
pub fn total_spin_squared(n_atoms: usize) -> Result<SparseOperator> {
    let dim = hilbert_dim(n_atoms)?;
    let mut trip = Vec::new();
    for b in 0..dim {
        let m = b.count_ones() as f64 - n_atoms as f64 / 2.0;
        trip.push((b, b, C64::new(m * m + n_atoms as f64 / 2.0, 0.0)));
        for j in (0..n_atoms).filter(|&j| b >> j & 1 == 1) {
            for i in (0..n_atoms).filter(|&i| b >> i & 1 == 0) {
                trip.push((b ^ (1 << j) ^ (1 << i), b, C64::new(1.0, 0.0)));
            }
        }
    }
    Ok(SparseOperator::from_triplets(dim, trip))
}

/// Matrix-free `y = S^axis x` on the full product basis.
pub fn collective_apply(n_atoms: usize, axis: Axis, x: &[C64], y: &mut [C64]) {
    let dim = 1usize << n_atoms;
    assert_eq!(x.len(), dim);
    assert_eq!(y.len(), dim);
    let half_n = n_atoms as f64 / 2.0;
    match axis {
        Axis::Z => {
            for (b, (yi, xi)) in y.iter_mut().zip(x).enumerate() {
                *yi = xi * (b.count_ones() as f64 - half_n);
            }
        }
        _ => {
            // y[r] = sum over sites of the single column contributions, gathered by row
            for (r, yi) in y.iter_mut().enumerate() {
                let mut s = C64::new(0.0, 0.0);
                for site in 0..n_atoms {
                    let mask = 1usize << site;
                    let up = r & mask != 0;
                    let src = r ^ mask;
                    s += match axis {
                        Axis::X => x[src] * HALF,
                        Axis::Y => x[src] * if up { C64::new(0.0, -HALF) } else { C64::new(0.0, HALF) },
                        Axis::Plus if up => x[src],
                        Axis::Minus if !up => x[src],
                        _ => C64::new(0.0, 0.0),
                    };
                }
                *yi = s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{LinearOperator, SpinState};

    fn apply(op: &SparseOperator, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::default(); x.len()];
        op.apply(x, &mut y);
        y
    }

    #[test]
    fn sz_on_up_is_half() {
        let sz = local_operator(1, 0, Axis::Z).unwrap();
        let up = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let y = apply(&sz, &up);
        assert_eq!(y[1], C64::new(0.5, 0.0));
        assert_eq!(y[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn raising_on_second_site() {
        let sp = local_operator(2, 1, Axis::Plus).unwrap();
        let mut x = vec![C64::default(); 4];
        x[0] = C64::new(1.0, 0.0);
        let y = apply(&sp, &x);
        // |down up> has site 1 set: index 0b10
        assert_eq!(y[0b10], C64::new(1.0, 0.0));
        assert_eq!(y.iter().filter(|v| v.norm() > 0.0).count(), 1);
    }

    #[test]
    fn single_site_casimir() {
        let n = 3;
        let sq: Vec<_> = Axis::CARTESIAN
            .iter()
            .map(|&a| {
                let s = local_operator(n, 0, a).unwrap();
                &s * &s
            })
            .collect();
        let total = &(&sq[0] + &sq[1]) + &sq[2];
        let expect = SparseOperator::identity(8).scale(C64::new(0.75, 0.0));
        assert!(total.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn out_of_range_site_is_rejected() {
        assert!(matches!(local_operator(3, 3, Axis::X), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn su2_algebra_collective() {
        for n in 1..=6 {
            let sx = collective_operator(n, Axis::X).unwrap();
            let sy = collective_operator(n, Axis::Y).unwrap();
            let sz = collective_operator(n, Axis::Z).unwrap();
            let i = C64::new(0.0, 1.0);
            let c = SparseOperator::commutator;
            assert!(c(&sx, &sy).max_abs_diff(&sz.scale(i)) < 1e-12);
            assert!(c(&sy, &sz).max_abs_diff(&sx.scale(i)) < 1e-12);
            assert!(c(&sz, &sx).max_abs_diff(&sy.scale(i)) < 1e-12);
        }
    }

    #[test]
    fn plus_minus_match_cartesian() {
        let n = 4;
        let sx = collective_operator(n, Axis::X).unwrap();
        let sy = collective_operator(n, Axis::Y).unwrap();
        let sp = collective_operator(n, Axis::Plus).unwrap();
        let i = C64::new(0.0, 1.0);
        assert!((&sx + &sy.scale(i)).max_abs_diff(&sp) < 1e-15);
        assert!((&sx - &sy.scale(i)).max_abs_diff(&sp.adjoint()) < 1e-15);
    }

    #[test]
    fn total_spin_matches_sum_of_squares() {
        let n = 5;
        let direct = total_spin_squared(n).unwrap();
        let mut sum = SparseOperator::zeros(1 << n);
        for a in Axis::CARTESIAN {
            let s = collective_operator(n, a).unwrap();
            sum = &sum + &(&s * &s);
        }
        assert!(direct.max_abs_diff(&sum) < 1e-12);
    }

    #[test]
    fn stretched_state_casimir_n16() {
        let n = 16;
        let all_up = SpinState::basis_state(n, (1 << n) - 1).unwrap();
        let m = crate::observables::CollectiveMoments::of(&all_up);
        assert!((m.total_spin_sq - 72.0).abs() < 1e-12);
    }

    #[test]
    fn sz_on_all_up_pair() {
        let sz = collective_operator(2, Axis::Z).unwrap();
        assert_eq!(sz.get(3, 3), C64::new(1.0, 0.0));
    }

    #[test]
    fn matrix_free_apply_matches_sparse() {
        let n = 5;
        let x: Vec<C64> = (0..32).map(|k| C64::new((k as f64).sin(), (0.3 * k as f64).cos())).collect();
        for axis in [Axis::X, Axis::Y, Axis::Z, Axis::Plus, Axis::Minus] {
            let op = collective_operator(n, axis).unwrap();
            let want = apply(&op, &x);
            let mut got = vec![C64::default(); 32];
            collective_apply(n, axis, &x, &mut got);
            for k in 0..32 {
                assert!((want[k] - got[k]).norm() < 1e-14, "{axis:?}");
            }
        }
    }
}
