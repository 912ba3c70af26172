use evoguide_core::predictor::*;
use evoguide_core::rng::{stream_rng, Stream};
use evoguide_core::symreg::random_graph;
use std::time::Instant;

fn main() {
    let mut r = stream_rng(1, Stream::ModelInit, 0);
    let model = PredictorModel::new(EncoderConfig::default(), HeadKind::Binary, &mut r);
    println!("params: {}", model.param_count());
    let graphs: Vec<_> = (0..64).map(|_| random_graph(1, 15, &mut r)).collect();

    let t = Instant::now();
    let mut sink = 0.0;
    for _ in 0..20 {
        for g in &graphs {
            sink += model.encode(g)[0];
        }
    }
    let per = t.elapsed().as_secs_f64() / (20.0 * 64.0);
    println!("encode: {:.1} us each (sink {sink:.3})", per * 1e6);

    let pairs: Vec<_> = (0..32).map(|i| (&graphs[i], &graphs[i + 32], (i % 2) as f64)).collect();
    let t = Instant::now();
    for _ in 0..20 {
        let _ = model.loss_and_grad_pairs(&pairs).unwrap();
    }
    let per = t.elapsed().as_secs_f64() / (20.0 * 32.0);
    println!("pair grad: {:.1} us each", per * 1e6);
}
