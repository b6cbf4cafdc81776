//! Ignored benchmark probe for hull and bound-chain costs at the largest
//! acceptance cell.

use conelab::body::BodySpec;
use conelab::hull::measures::{facet_sign_sum_max, integral_l1_mc, SignSumNorm};
use conelab::isotropy::isotropic_constant_polytope;
use conelab::sampling::{sample_cone_boundary, StreamRng};
use std::time::Instant;

#[test]
#[ignore]
fn probe_hull_performance() {
    let n = 8usize;
    let big_n = 64usize;
    let body = BodySpec::l1_ball(n).isotropic_normalize().unwrap();
    let stream = StreamRng::new(1, 0);
    let batch = sample_cone_boundary(&body, big_n, stream).unwrap();

    let t0 = Instant::now();
    let poly = batch.build_hull().unwrap();
    println!("hull build: {:.3}s, {} facets", t0.elapsed().as_secs_f64(), poly.facets().len());

    let t0 = Instant::now();
    let _ = isotropic_constant_polytope(&poly).unwrap();
    println!("volume+cov (cached at build) + L: {:.3}s", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let s1 = facet_sign_sum_max(&poly, SignSumNorm::L1);
    let s2 = facet_sign_sum_max(&poly, SignSumNorm::L2Squared);
    println!("sign-sum max (both norms): {:.3}s ({s1:.2}, {s2:.2})", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let mut rng = stream.substream(1).rng();
    let _ = integral_l1_mc(&poly, 4096, &mut rng);
    println!("l1 MC 4096: {:.3}s", t0.elapsed().as_secs_f64());
}
