use std::sync::Arc;
use std::time::Instant;
use campanato::czkernel::{pv_tchi_detailed, Kernel, PvParams};
use campanato::geometry::{Domain, Point};
use campanato::moduli::Modulus;
use rand::{Rng, SeedableRng};

fn main() {
    let d = Domain::unit_ball();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut probes = Vec::new();
    while probes.len() < 50 {
        let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if d.contains(p) && d.dist_to_boundary_fast(p) >= 0.1 { probes.push(p); }
    }
    let kernels = [Kernel::beurling_re(), Kernel::beurling_im(),
                   Kernel::riesz_second(0,0).unwrap(), Kernel::riesz_second(0,1).unwrap()];
    let params = PvParams::with_tol(2e-5);
    let start = Instant::now();
    let mut max_abs = 0.0f64; let mut max_cells = 0;
    for k in &kernels {
        for &p in &probes {
            let r = pv_tchi_detailed(&d, k, p, &params).unwrap();
            max_abs = max_abs.max(r.value.abs());
            max_cells = max_cells.max(r.cells);
        }
    }
    println!("C1 ball batch: 200 evals in {:?}, max |T chi| = {:.2e}, max cells {}", start.elapsed(), max_abs, max_cells);

    // Graph disk single eval timing at tchi_field tol 5e-4
    let m = Modulus::power(0.5).unwrap();
    let gd = Arc::new(Domain::graph_perturbed_disk(m, 0.25, 0.35, 0.5).unwrap());
    let start = Instant::now();
    let r = pv_tchi_detailed(&gd, &kernels[0], Point::new(0.1, 0.4), &PvParams::with_tol(5e-4)).unwrap();
    println!("graph disk pv (tol 5e-4): {:?} value {:.4} cells {}", start.elapsed(), r.value, r.cells);
    let start = Instant::now();
    let r = pv_tchi_detailed(&gd, &kernels[0], Point::new(0.0, 0.01), &PvParams::with_tol(5e-4)).unwrap();
    println!("graph disk pv near boundary: {:?} value {:.4} cells {}", start.elapsed(), r.value, r.cells);
    // FD-grade tolerance on square + graph disk
    let sq = Domain::unit_square();
    let start = Instant::now();
    let r = pv_tchi_detailed(&sq, &kernels[0], Point::new(0.25, 0.4), &PvParams::with_tol(5e-7)).unwrap();
    println!("square pv (tol 5e-7): {:?} value {:.6} cells {}", start.elapsed(), r.value, r.cells);
    let start = Instant::now();
    let r = pv_tchi_detailed(&gd, &kernels[0], Point::new(0.1, 0.4), &PvParams::with_tol(5e-7)).unwrap();
    println!("graph disk pv (tol 5e-7): {:?} value {:.6} cells {}", start.elapsed(), r.value, r.cells);
}
