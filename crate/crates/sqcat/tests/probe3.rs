#[test]
fn probe_sweep_cell_cost() {
    use sqcat::noise::NoiseParams;
    use sqcat::recovery::{cat_baseline, optimize_encoding};
    use std::time::Instant;
    for (k1, k2) in [(1e-1f64, 1e-1f64), (1e-3, 1e-3)] {
        let p = NoiseParams::new(k1, k2).unwrap();
        let t0 = Instant::now();
        let sc = optimize_encoding(&p, 1.5).unwrap();
        let t1 = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let cat = cat_baseline(&p).unwrap();
        let t2 = t0.elapsed().as_secs_f64();
        println!(
            "cell ({k1},{k2}): SC opt ({:.3},{:.3}) F={:.8} in {t1:.1}s | cat F={:.8} in {t2:.1}s | skipped={}",
            sc.alpha_opt, sc.xi_opt, sc.fidelity_opt, cat.fidelity_opt, sc.skipped.len()
        );
    }
}
