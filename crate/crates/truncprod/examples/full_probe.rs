use truncprod::harness::{run_edge_profile, run_weak_profile};
use truncprod::sampler::RngStream;
use truncprod::EnsembleParams;

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_default();
    if mode == "edge" {
        for m in [1usize, 2] {
            let params = EnsembleParams::equal(100, m, 100).unwrap();
            let r = run_edge_profile(&params, 10_000, RngStream::new(777, 0), 0).unwrap();
            let f = r.edge_fit.as_ref().unwrap();
            println!(
                "edge M={m}: c1={:.4}±{:.4} (full {:.4}, half {:.4}) c2={:.4}±{:.4} (pred {:.4}) c3={:.4} sep={:.1}σ rms={:.2} decision={} pass={}",
                f.fit.c1, f.fit.sigma[0], f.predicted_amplitude_full, f.predicted_amplitude_half,
                f.fit.c2, f.fit.sigma[1], f.predicted_slope, f.fit.c3, f.separation_sigma, f.fit.weighted_rms,
                f.decision, r.pass
            );
        }
    } else {
        for m in [1usize, 2] {
            let params = EnsembleParams::equal(100, m, 1).unwrap();
            let r = run_weak_profile(&params, 10_000, RngStream::new(778, 0), 0).unwrap();
            let c = r.chi_square.as_ref().unwrap();
            println!(
                "weak M={m}: chi2={:.1} dof={} p={:.4} max_sigma={:.2} pass={}",
                c.statistic, c.dof, c.p_value, c.max_sigma, r.pass
            );
        }
    }
}
