//! Statistical checks of the sampling/estimator pipeline through the public
//! API: the Dikin displacement is mean-zero at any fixed iterate.

use scrible_core::barrier::ConeBarrier;
use scrible_core::geometry::BallActionSet;
use scrible_core::linalg;
use scrible_core::sampling::{sample_sphere_orthogonal, SeededRng};

/// E[A_t μ_t] = 0: over N draws at a fixed iterate the mean displacement has
/// norm at most 4·√(trace(A_spatial²)/N).
#[test]
fn dikin_displacement_is_mean_zero() {
    let d = 5;
    let set = BallActionSet::new(d, 5.0).unwrap();
    let barrier = ConeBarrier::new(set);

    for (seed, iterate) in [
        (41_u64, vec![0.0; 5]),
        (42, vec![1.2, -0.8, 0.3, 2.0, -0.5]),
    ] {
        let mut point = iterate.clone();
        point.push(1.0);
        let factors = barrier.hessian_factors(&point).unwrap();
        let mut e_last = vec![0.0; d + 1];
        e_last[d] = 1.0;
        let anchor = factors.apply_inv_sqrt(&e_last);

        // trace(A_spatial²) = Σ_{i<d} (H⁻¹)_{ii}.
        let mut trace_sq = 0.0;
        for i in 0..d {
            let mut e_i = vec![0.0; d + 1];
            e_i[i] = 1.0;
            trace_sq += factors.apply_inv(&e_i)[i];
        }

        let n = 100_000usize;
        let mut rng = SeededRng::new(seed);
        let mut mean = vec![0.0; d];
        for _ in 0..n {
            let mu = sample_sphere_orthogonal(&anchor, &mut rng).unwrap();
            let step = factors.apply_inv_sqrt(&mu);
            for i in 0..d {
                mean[i] += step[i];
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let bound = 4.0 * (trace_sq / n as f64).sqrt();
        let norm = linalg::norm(&mean);
        assert!(
            norm <= bound,
            "seed {seed}: mean displacement norm {norm:.3e} exceeds {bound:.3e}"
        );
    }
}
