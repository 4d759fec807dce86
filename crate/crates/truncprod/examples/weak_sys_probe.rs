use num_complex::Complex64;
use truncprod::asymptotics::{weak_density, WeakLimitParams};
use truncprod::kernel::FiniteKernel;
use truncprod::quad;
use truncprod::EnsembleParams;

fn main() {
    for (m, n) in [(1usize, 100usize), (2, 100), (1, 400)] {
        let params = EnsembleParams::equal(n, m, 1).unwrap();
        let weak = WeakLimitParams::from_params(&params);
        let fk = FiniteKernel::new(&params);
        let nf = n as f64;
        println!("M={m} N={n}: per-bin (weak-expected / exact - 1)");
        let x_hi = 8.0 * weak.l_total() as f64;
        let bins = 16;
        for i in 0..bins {
            let (x1, x2) = (x_hi * i as f64 / bins as f64, x_hi * (i + 1) as f64 / bins as f64);
            let w = quad::integrate(
                |x| (1.0 - x / nf) * weak_density(&weak, Complex64::new(x, 0.0)),
                x1, x2, 1e-12, 1e-10,
            ).unwrap() * 2.0 * std::f64::consts::PI * nf;
            let exact = fk.radial_mass(1.0 - x2 / nf, 1.0 - x1 / nf).unwrap();
            print!(" {:+.4}", w / exact - 1.0);
        }
        println!();
    }
}
