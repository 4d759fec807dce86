use num_complex::Complex64;
use truncprod::asymptotics::d_n;
use truncprod::kernel::FiniteKernel;
use truncprod::logspace::ln_factorial;
use truncprod::quad;
use truncprod::EnsembleParams;

fn main() {
    let pi = std::f64::consts::PI;
    for (m, n) in [(1usize, 100usize), (2, 100), (2, 50)] {
        let params = EnsembleParams::equal(n, m, 1).unwrap();
        let fk = FiniteKernel::new(&params);
        let nf = n as f64;
        let ml = m;
        let w_exact = |r: f64| {
            (2.0 * (1.0 / r).ln()).powi(ml as i32 - 1) / (pi * ln_factorial(ml as u64 - 1).exp())
        };
        let x_hi = 8.0 * ml as f64;
        let bins = 16;
        for (name, use_log_t, k_scale) in [("E: K=N+L t=K(1-y)", false, (n + 1) as f64), ("F: K=N t=-K ln y", true, nf)] {
            print!("M={m} N={n} {name}:");
            for i in 0..bins {
                let (x1, x2) = (x_hi * i as f64 / bins as f64, x_hi * (i + 1) as f64 / bins as f64);
                let (r1, r2) = (1.0 - x2 / nf, 1.0 - x1 / nf);
                let f = |r: f64| {
                    let y = r * r;
                    let t = if use_log_t { -k_scale * y.ln() } else { k_scale * (1.0 - y) };
                    let dn = d_n(ml, Complex64::new(t, 0.0)).re;
                    let t_form = ((ml as f64 + 1.0) * k_scale.ln()).exp() * dn;
                    2.0 * pi * r * w_exact(r) * t_form
                };
                let v = quad::integrate(f, r1, r2, 1e-12, 1e-10).unwrap();
                let exact = fk.radial_mass(r1, r2).unwrap();
                print!(" {:+.4}", v / exact - 1.0);
            }
            println!();
        }
    }
}
