use num_complex::Complex64;
use truncprod::asymptotics::origin_density;
use truncprod::kernel::FiniteKernel;
use truncprod::EnsembleParams;

fn main() {
    for m in [1usize, 2, 3] {
        println!("M = {m}");
        for &dz in &[0.5f64, 1.0, 2.0] {
            let limit = origin_density(m, dz).unwrap();
            print!("  |dz|={dz}: limit {limit:.6e}  errors:");
            for n in [20usize, 40, 80, 160] {
                let params = EnsembleParams::equal(n, m, n).unwrap();
                let fk = FiniteKernel::new(&params);
                let l = n as f64;
                let z = dz * l.powf(-(m as f64) / 2.0);
                let scaled = fk.density_radial(z).unwrap() * l.powf(-(m as f64));
                let rel = (scaled - limit) / limit;
                print!(" N={n}: {rel:+.4}");
            }
            println!();
        }
    }
}
