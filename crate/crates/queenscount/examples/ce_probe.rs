use std::sync::Arc;
use queenscount::board::{BoardSpec, Embedding};
use queenscount::estimators::{ce_count, CrossEntropyParams};

fn main() {
    let spec = Arc::new(BoardSpec::unconstrained(4, Embedding::RowWise).unwrap());
    for lambda in [0.2, 0.3, 0.5, 0.7] {
        let mut counts = Vec::new();
        for seed in 0..10u64 {
            let params = CrossEntropyParams {
                samples_per_iter: 2_000,
                elite_rho: 0.1,
                smoothing: lambda,
                iterations: 30,
                final_samples: 50_000,
                ..Default::default()
            };
            let est = ce_count(&spec, &params, seed).unwrap();
            counts.push((est.count, est.count * est.stderr_log, est.budget_used));
        }
        let strs: Vec<String> = counts.iter().map(|(c, se, b)| format!("{c:.2}±{se:.2}@{b}")).collect();
        println!("lambda={lambda}: {}", strs.join(" "));
    }
}
