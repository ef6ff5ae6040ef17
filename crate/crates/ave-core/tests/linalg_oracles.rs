//! Spectral estimators and the generator checked against an independent
//! Jacobi SVD oracle.

mod common;

use ave_core::generator::{generate, GeneratorSpec};
use ave_core::linalg::csr::CsrMatrix;
use ave_core::linalg::singular::extreme_singular_values;
use ave_core::rng::Rng;

#[test]
fn extreme_singular_values_match_jacobi_oracle() {
    let mut rng = Rng::from_seed(2024);
    for trial in 0..8 {
        let n = 10 + 5 * trial; // up to 45
        let mut dense = vec![0.0; n * n];
        for (i, slot) in dense.iter_mut().enumerate() {
            *slot = rng.range_f64(-1.0, 1.0);
            if i % (n + 1) == 0 {
                *slot += 4.0; // keep A⁻¹ bounded so inverse iteration is stable
            }
        }
        let m = CsrMatrix::from_dense(n, n, &dense).unwrap();
        let (hi, lo) = extreme_singular_values(&m, 1e-9, 200_000, trial as u64).unwrap();
        let (hi_oracle, lo_oracle) = common::jacobi_extremes(&m);
        assert!(
            (hi - hi_oracle).abs() <= 1e-6 * hi_oracle,
            "trial {trial}: sv_max {hi} vs oracle {hi_oracle}"
        );
        assert!(
            (lo - lo_oracle).abs() <= 1e-6 * lo_oracle,
            "trial {trial}: sv_min {lo} vs oracle {lo_oracle}"
        );
    }
}

#[test]
fn generated_spectra_match_the_prescribed_singular_values() {
    for seed in 0..6 {
        let spec = GeneratorSpec::new(30, 0.4, 4000 + seed).unwrap();
        let inst = generate(&spec).unwrap();
        let p = &inst.problem;
        let svs = common::jacobi_singular_values(&p.matrix().to_dense(), p.n());
        let claimed_max = p.sv_max().unwrap();
        let claimed_min = p.sv_min().unwrap();
        assert!(
            (svs[0] - claimed_max).abs() <= 1e-8 * claimed_max,
            "seed {seed}: sv_max {} vs claimed {claimed_max}",
            svs[0]
        );
        assert!(
            (svs[p.n() - 1] - claimed_min).abs() <= 1e-8 * claimed_min,
            "seed {seed}: sv_min {} vs claimed {claimed_min}",
            svs[p.n() - 1]
        );
    }
}

#[test]
fn verifier_flags_hold_on_generated_problems() {
    for seed in 0..5 {
        let inst = generate(&GeneratorSpec::new(25, 0.3, 5000 + seed).unwrap()).unwrap();
        let report = ave_core::verify_hypotheses(&inst.problem);
        assert!(report.spectral_flags_hold(), "seed {seed}: {report:?}");
    }
}
