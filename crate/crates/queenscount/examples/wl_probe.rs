use std::sync::Arc;
use queenscount::board::{BoardSpec, Embedding};
use queenscount::estimators::{wang_landau_count, WangLandauParams};
use queenscount::exact::exact_dos;

fn main() {
    let n = 7;
    let spec = Arc::new(BoardSpec::unconstrained(n, Embedding::Permutation).unwrap());
    let exact = exact_dos(n).unwrap();
    for (c, interval, ln_f_final) in [
        (0.8, 10_000u64, 1e-8f64),
        (0.8, 20_000, 1e-8),
        (0.8, 40_000, 1e-8),
    ] {
        for seed in 0..5u64 {
            let params = WangLandauParams {
                flatness: c,
                check_interval: interval,
                ln_f_final,
                ..Default::default()
            };
            let (est, dos) = wang_landau_count(&spec, &params, seed).unwrap();
            let mut worst: (usize, f64) = (0, 0.0);
            for (s, &cnt) in exact.counts.iter().enumerate() {
                if cnt == 0 { continue; }
                let rel = (dos.log_n[s].exp() / cnt as f64 - 1.0).abs();
                if rel > worst.1 { worst = (s, rel); }
            }
            println!(
                "c={c} interval={interval} seed={seed}: count={:.2} (want 40), worst level {} rel {:.3}, steps={}",
                est.count, worst.0, worst.1, est.budget_used
            );
        }
    }
}
