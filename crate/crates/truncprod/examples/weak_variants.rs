use num_complex::Complex64;
use truncprod::asymptotics::{d_n, weak_density, WeakLimitParams};
use truncprod::kernel::FiniteKernel;
use truncprod::logspace::ln_factorial;
use truncprod::quad;
use truncprod::EnsembleParams;

fn main() {
    let pi = std::f64::consts::PI;
    for (m, n) in [(1usize, 100usize), (2, 100)] {
        let params = EnsembleParams::equal(n, m, 1).unwrap();
        let weak = WeakLimitParams::from_params(&params);
        let fk = FiniteKernel::new(&params);
        let nf = n as f64;
        let l = 1usize;
        let ml = m * l;
        let ln_lfac_m = m as f64 * ln_factorial(l as u64);
        // weight for L = 1 is exact: w(r) = (2 ln(1/r))^{ML-1} / (pi (ML-1)!)
        let w_exact = |r: f64| {
            (2.0 * (1.0 / r).ln()).powi(ml as i32 - 1) / (pi * ln_factorial(ml as u64 - 1).exp())
        };
        let x_hi = 8.0 * ml as f64;
        let bins = 16;
        for (name, k_scale, log_arg) in [("B: K=N+L", (n + l) as f64, false), ("C: K=N", nf, false), ("D: K=N+L, t=-2K ln r", (n + l) as f64, true)] {
            print!("M={m} {name}:");
            for i in 0..bins {
                let (x1, x2) = (x_hi * i as f64 / bins as f64, x_hi * (i + 1) as f64 / bins as f64);
                let (r1, r2) = (1.0 - x2 / nf, 1.0 - x1 / nf);
                let f = |r: f64| {
                    let t = if log_arg {
                        -(m as f64) * k_scale * (r.powf(2.0 / m as f64)).ln()
                    } else {
                        (m as f64) * k_scale * (1.0 - r.powf(2.0 / m as f64))
                    };
                    let dn = d_n(ml, Complex64::new(t, 0.0)).re;
                    let t_form = ((ml as f64 + 1.0) * k_scale.ln() - ln_lfac_m).exp() * dn;
                    2.0 * pi * r * w_exact(r) * t_form
                };
                let v = quad::integrate(f, r1, r2, 1e-12, 1e-10).unwrap();
                let exact = fk.radial_mass(r1, r2).unwrap();
                print!(" {:+.4}", v / exact - 1.0);
            }
            println!();
        }
        // variant A for reference
        print!("M={m} A: current   :");
        for i in 0..bins {
            let (x1, x2) = (x_hi * i as f64 / bins as f64, x_hi * (i + 1) as f64 / bins as f64);
            let v = quad::integrate(|x| (1.0 - x / nf) * weak_density(&weak, Complex64::new(x, 0.0)), x1, x2, 1e-12, 1e-10).unwrap() * 2.0 * pi * nf;
            let exact = fk.radial_mass(1.0 - x2 / nf, 1.0 - x1 / nf).unwrap();
            print!(" {:+.4}", v / exact - 1.0);
        }
        println!();
    }
}
