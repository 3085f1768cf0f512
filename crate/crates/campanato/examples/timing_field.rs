use std::sync::Arc;
use std::time::Instant;
use campanato::czkernel::Kernel;
use campanato::geometry::{Domain, Point};
use campanato::moduli::Modulus;
use campanato::t1::tchi_field;

fn main() {
    let k = Kernel::beurling_re();
    let m = Modulus::power(0.5).unwrap();
    let tilde = m.tilde().unwrap();
    let gd = Arc::new(Domain::graph_perturbed_disk(tilde, 0.25, 0.35, 0.5).unwrap());
    for grid in [128usize, 256] {
        let start = Instant::now();
        let f = tchi_field(&gd, &k, grid, 5e-4).unwrap();
        println!("graph disk field grid {grid}: {:?} (sample {:.4})", start.elapsed(), f.eval(Point::new(0.05, 0.2)));
    }
    let sq = Arc::new(Domain::unit_square());
    for grid in [128usize, 256] {
        let start = Instant::now();
        let f = tchi_field(&sq, &k, grid, 5e-4).unwrap();
        println!("square field grid {grid}: {:?} (sample {:.4})", start.elapsed(), f.eval(Point::new(0.25, 0.5)));
    }
    let ball = Arc::new(Domain::unit_ball());
    let start = Instant::now();
    let f = tchi_field(&ball, &k, 128, 5e-4).unwrap();
    println!("ball field grid 128: {:?} (sample {:.2e})", start.elapsed(), f.eval(Point::new(0.2, 0.1)));
}
