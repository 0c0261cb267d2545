use ftp_core::rng::Rng;
use ftp_core::tensor::{matmul, Tensor};
use std::time::Instant;

fn main() {
    let mut rng = Rng::new(0);
    for &(m, k, n) in &[(64, 784, 1024), (64, 1024, 1024), (1024, 64, 784), (32, 25, 576)] {
        let a = Tensor::randn(&[m, k], 1.0, &mut rng);
        let b = Tensor::randn(&[k, n], 1.0, &mut rng);
        let t = Instant::now();
        let reps = 20;
        for _ in 0..reps {
            std::hint::black_box(matmul(&a, &b).unwrap());
        }
        let s = t.elapsed().as_secs_f64() / reps as f64;
        println!("{m}x{k}x{n}: {:.2} ms, {:.2} GFLOP/s", s * 1e3, 2.0 * (m * k * n) as f64 / s / 1e9);
    }
}
