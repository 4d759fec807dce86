use truncprod::harness::run_ginibre_crossover;
use truncprod::sampler::RngStream;

fn main() {
    for m in [1usize, 2] {
        for &samples in &[12usize, 25, 50, 200] {
            let r = run_ginibre_crossover(30, 20.0, m, samples, RngStream::new(4242, 0), 0).unwrap();
            let ks = r.ks.as_ref().unwrap();
            println!(
                "M={m} samples={samples}: D={:.4} p={:.4} beyond_edge={:.4} pass={}",
                ks.statistic, ks.p_value, r.scalars["fraction_beyond_edge"], r.pass
            );
        }
    }
}
