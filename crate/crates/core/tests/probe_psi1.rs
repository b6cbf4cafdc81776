//! Ignored calibration probe: prints the psi1/L_K ratios across the body
//! family and dimensions. Used to freeze the suite's ratio cap; run with
//! `cargo test --release -p conelab --test probe_psi1 -- --ignored --nocapture`.

use conelab::body::BodySpec;
use conelab::concentration::verify_psi1_general;
use conelab::sampling::StreamRng;

#[test]
#[ignore]
fn probe_psi1_ratios() {
    for n in [2usize, 4, 6, 8, 12] {
        for (label, body) in [
            ("rotated", BodySpec::rotated_cube(n, 55).unwrap()),
            ("l1", BodySpec::l1_ball(n).isotropic_normalize().unwrap()),
            ("cube", BodySpec::cube(n).isotropic_normalize().unwrap()),
            (
                "b4",
                BodySpec::lp_ball(conelab::body::PNorm::Finite(4.0), n)
                    .unwrap()
                    .isotropic_normalize()
                    .unwrap(),
            ),
        ] {
            let mut thetas = Vec::new();
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            thetas.push(e1);
            thetas.push(vec![1.0 / (n as f64).sqrt(); n]);
            let report =
                verify_psi1_general(&body, &thetas, 100_000, StreamRng::new(7, n as u64)).unwrap();
            println!("n={n} {label}: max_ratio = {:.4}", report.max_ratio);
        }
    }
}
