//! Runtime validation suites: the normal-barrier identities at random
//! interior points, finite-difference derivative checks, and the sampler's
//! statistical properties. Backs the `validate` subcommand.

use anyhow::Result;

use scrible_core::barrier::ConeBarrier;
use scrible_core::geometry::BallActionSet;
use scrible_core::linalg::{self, Matrix};
use scrible_core::sampling::{sample_sphere_orthogonal, sample_unit_sphere, SeededRng};

/// One named residual with its tolerance.
#[derive(Debug, Clone)]
pub struct ResidualRow {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl ResidualRow {
    pub fn pass(&self) -> bool {
        self.value <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub rows: Vec<ResidualRow>,
}

impl ValidationOutcome {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(ResidualRow::pass)
    }

    pub fn failures(&self) -> Vec<&ResidualRow> {
        self.rows.iter().filter(|r| !r.pass()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Random interior points for the barrier suite.
    pub trials: usize,
    /// Draws for the sampler statistics.
    pub draws: usize,
    pub dimension: usize,
    pub radius: f64,
    pub scale: f64,
    pub inner_nu: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            seed: 7,
            trials: 100,
            draws: 100_000,
            dimension: 5,
            radius: 5.0,
            scale: 400.0,
            inner_nu: 1.0,
        }
    }
}

/// Runs both suites and collects residuals. Construction errors (e.g. an
/// invalid barrier scale injected through the CLI hook) surface as `Err`.
pub fn run_validation(opts: &ValidateOptions) -> Result<ValidationOutcome> {
    let mut rows = barrier_suite(opts)?;
    rows.extend(sampler_suite(opts)?);
    Ok(ValidationOutcome { rows })
}

/// Random strictly interior cone point (radius fraction ≤ 0.95 so that
/// finite differences stay well-conditioned).
fn random_interior(
    set: &BallActionSet,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let b = 0.5 + 1.5 * rng.uniform();
    let direction = sample_unit_sphere(set.dimension(), rng)?;
    let r = 0.95 * rng.uniform() * b * set.radius();
    let mut p = linalg::scaled(&direction, r);
    p.push(b);
    Ok(p)
}

pub fn barrier_suite(opts: &ValidateOptions) -> Result<Vec<ResidualRow>> {
    let set = BallActionSet::new(opts.dimension, opts.radius)?;
    let barrier = ConeBarrier::with_parameters(set.clone(), opts.scale, opts.inner_nu)?;
    let mut rng = SeededRng::new(opts.seed);

    let mut homogeneity: f64 = 0.0;
    let mut norm_identity: f64 = 0.0;
    let mut hessian_identity: f64 = 0.0;
    let mut gradient_bound: f64 = f64::NEG_INFINITY;
    let mut gradient_fd: f64 = 0.0;
    let mut hessian_fd: f64 = 0.0;
    let mut dikin_excess: f64 = f64::NEG_INFINITY;
    let mut convexity: f64 = f64::NEG_INFINITY;

    let fd_step = 1e-5;
    for _ in 0..opts.trials {
        let p = random_interior(&set, &mut rng)?;
        let t = 0.5 + 1.5 * rng.uniform();
        let report = barrier.validate_normal_barrier(&p, t, &mut rng)?;
        homogeneity = homogeneity.max(report.homogeneity);
        norm_identity = norm_identity.max(report.norm_identity);
        hessian_identity = hessian_identity.max(report.hessian_identity);
        gradient_bound = gradient_bound.max(report.gradient_bound_excess);

        // Central finite differences for the gradient.
        let n = p.len();
        let gradient = barrier.gradient(&p)?;
        let mut fd = vec![0.0; n];
        for i in 0..n {
            let mut hi = p.clone();
            let mut lo = p.clone();
            hi[i] += fd_step;
            lo[i] -= fd_step;
            fd[i] = (barrier.value(&hi)? - barrier.value(&lo)?) / (2.0 * fd_step);
        }
        gradient_fd = gradient_fd.max(
            linalg::norm(&linalg::sub(&fd, &gradient)) / (1.0 + linalg::norm(&gradient)),
        );

        // Finite differences of the gradient for the Hessian.
        let hessian = barrier.hessian(&p)?;
        let mut fd_h = Matrix::zeros(n, n);
        for j in 0..n {
            let mut hi = p.clone();
            let mut lo = p.clone();
            hi[j] += fd_step;
            lo[j] -= fd_step;
            let ghi = barrier.gradient(&hi)?;
            let glo = barrier.gradient(&lo)?;
            for i in 0..n {
                fd_h.set(i, j, (ghi[i] - glo[i]) / (2.0 * fd_step));
            }
        }
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((fd_h.get(i, j) - hessian.get(i, j)).abs());
            }
        }
        hessian_fd = hessian_fd.max(worst / (1.0 + hessian.max_abs()));

        // Dikin containment on the slice b = 1: a unit-local-norm spatial
        // step stays inside K.
        let direction = sample_unit_sphere(set.dimension(), &mut rng)?;
        let r = 0.999 * rng.uniform() * set.radius();
        let mut slice_point = linalg::scaled(&direction, r);
        slice_point.push(1.0);
        let mut h = sample_unit_sphere(set.dimension(), &mut rng)?;
        h.push(0.0);
        let local = barrier.local_norm(&slice_point, &h)?;
        let step = linalg::scaled(&h, 1.0 / local);
        let y = linalg::add(&slice_point, &step);
        dikin_excess = dikin_excess.max(linalg::norm(&y[..set.dimension()]) - set.radius());

        // Midpoint convexity along a random chord.
        let q = random_interior(&set, &mut rng)?;
        let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
        let vp = barrier.value(&p)?;
        let vq = barrier.value(&q)?;
        let vm = barrier.value(&mid)?;
        convexity =
            convexity.max((vm - 0.5 * (vp + vq)) / (1.0 + vp.abs().max(vq.abs())));
    }

    Ok(vec![
        ResidualRow {
            name: "barrier.homogeneity R(tp)=R(p)-nu.ln(t)",
            value: homogeneity,
            tolerance: 1e-8,
        },
        ResidualRow {
            name: "barrier.norm_identity |p|^2_p=nu",
            value: norm_identity,
            tolerance: 1e-8,
        },
        ResidualRow {
            name: "barrier.hessian_identity H(p)p=-grad(p)",
            value: hessian_identity,
            tolerance: 1e-8,
        },
        ResidualRow {
            name: "barrier.gradient_bound |grad.h|<=sqrt(nu)|h|_p",
            value: gradient_bound,
            tolerance: 1e-8,
        },
        ResidualRow {
            name: "barrier.gradient_vs_central_differences",
            value: gradient_fd,
            tolerance: 1e-5,
        },
        ResidualRow {
            name: "barrier.hessian_vs_central_differences",
            value: hessian_fd,
            tolerance: 1e-5,
        },
        ResidualRow {
            name: "barrier.dikin_step_stays_in_set",
            value: dikin_excess,
            tolerance: 1e-9,
        },
        ResidualRow {
            name: "barrier.midpoint_convexity",
            value: convexity,
            tolerance: 1e-9,
        },
    ])
}

pub fn sampler_suite(opts: &ValidateOptions) -> Result<Vec<ResidualRow>> {
    let ambient = opts.dimension + 1;
    let mut rng = SeededRng::new(opts.seed).substream(11);

    // Two anchor vectors: the basis direction the learner actually uses, and
    // a generic one.
    let mut basis = vec![0.0; ambient];
    basis[ambient - 1] = 1.0;
    let generic: Vec<f64> = (1..=ambient)
        .map(|i| if i % 2 == 0 { -(i as f64) } else { i as f64 })
        .collect();

    let mut unit_norm_err: f64 = 0.0;
    let mut orthogonality_err: f64 = 0.0;
    let mut mean_bound_excess: f64 = f64::NEG_INFINITY;
    let mut ks_worst: f64 = 0.0;

    for anchor in [&basis, &generic] {
        let anchor_norm = linalg::norm(anchor);
        // Orthonormal pair spanning a plane of anchor's complement, for the
        // angle-uniformity check.
        let u1 = {
            let mut rng_probe = rng.substream(101);
            sample_sphere_orthogonal(anchor, &mut rng_probe)?
        };
        let u2 = {
            let mut rng_probe = rng.substream(102);
            let mut candidate = sample_sphere_orthogonal(anchor, &mut rng_probe)?;
            let overlap = linalg::dot(&candidate, &u1);
            linalg::axpy(-overlap, &u1, &mut candidate);
            linalg::scaled(&candidate, 1.0 / linalg::norm(&candidate))
        };

        let mut mean = vec![0.0; ambient];
        let mut angles = Vec::with_capacity(opts.draws);
        for _ in 0..opts.draws {
            let mu = sample_sphere_orthogonal(anchor, &mut rng)?;
            unit_norm_err = unit_norm_err.max((linalg::norm(&mu) - 1.0).abs());
            orthogonality_err =
                orthogonality_err.max(linalg::dot(&mu, anchor).abs() / anchor_norm);
            linalg::axpy(1.0, &mu, &mut mean);
            angles.push(linalg::dot(&mu, &u2).atan2(linalg::dot(&mu, &u1)));
        }
        let n = opts.draws as f64;
        let mean_tol = 4.0 / n.sqrt();
        for m in &mean {
            mean_bound_excess = mean_bound_excess.max((m / n).abs() - mean_tol);
        }
        ks_worst = ks_worst.max(ks_uniform_statistic(&mut angles));
    }

    // Covariance oracle in the 3-dimensional case: uniform on the circle in
    // the plane orthogonal to e_3 has covariance diag(1/2, 1/2, 0).
    let mut cov = [[0.0_f64; 3]; 3];
    {
        let mut cov_rng = SeededRng::new(opts.seed).substream(12);
        let e3 = vec![0.0, 0.0, 1.0];
        for _ in 0..opts.draws {
            let mu = sample_sphere_orthogonal(&e3, &mut cov_rng)?;
            for i in 0..3 {
                for j in 0..3 {
                    cov[i][j] += mu[i] * mu[j];
                }
            }
        }
        let n = opts.draws as f64;
        for row in &mut cov {
            for v in row.iter_mut() {
                *v /= n;
            }
        }
    }
    let mut cov_err: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j && i < 2 { 0.5 } else { 0.0 };
            cov_err = cov_err.max((cov[i][j] - expected).abs());
        }
    }

    // Determinism: equal seeds reproduce the first 1000 samples exactly.
    let mut determinism_gap: f64 = 0.0;
    {
        let mut a = SeededRng::new(opts.seed).substream(13);
        let mut b = SeededRng::new(opts.seed).substream(13);
        for _ in 0..1000 {
            let ma = sample_sphere_orthogonal(&generic, &mut a)?;
            let mb = sample_sphere_orthogonal(&generic, &mut b)?;
            for (x, y) in ma.iter().zip(&mb) {
                determinism_gap = determinism_gap.max((x - y).abs());
            }
        }
    }

    Ok(vec![
        ResidualRow {
            name: "sampler.unit_norm",
            value: unit_norm_err,
            tolerance: 1e-12,
        },
        ResidualRow {
            name: "sampler.orthogonality",
            value: orthogonality_err,
            tolerance: 1e-10,
        },
        ResidualRow {
            name: "sampler.mean_within_4_sigma",
            value: mean_bound_excess,
            tolerance: 0.0,
        },
        ResidualRow {
            name: "sampler.angle_ks_statistic",
            value: ks_worst,
            tolerance: 0.01,
        },
        ResidualRow {
            name: "sampler.circle_covariance",
            value: cov_err,
            tolerance: 0.02,
        },
        ResidualRow {
            name: "sampler.determinism_gap",
            value: determinism_gap,
            tolerance: 0.0,
        },
    ])
}

/// Kolmogorov–Smirnov statistic of angles against the uniform law on
/// (-π, π].
fn ks_uniform_statistic(angles: &mut [f64]) -> f64 {
    angles.sort_by(f64::total_cmp);
    let n = angles.len() as f64;
    let mut worst = 0.0_f64;
    for (i, &a) in angles.iter().enumerate() {
        let cdf = (a + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        worst = worst.max((cdf - lo).abs()).max((hi - cdf).abs());
    }
    worst
}
