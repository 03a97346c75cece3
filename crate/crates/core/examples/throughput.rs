//! Rough single-thread timings for the augmentation pipeline and the
//! feature extractor. Run with `cargo run --release --example throughput`.

use std::time::Instant;

use sensor_transfer::augment::{apply_pipeline, SensorParams};
use sensor_transfer::profile::builtin_profile;
use sensor_transfer::rng::stream;
use sensor_transfer::scenes::street_scene;
use sensor_transfer::stylefeat::{builtin_test_bank, style_grams, DEFAULT_STYLE_LAYERS};

fn main() {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| {
        let img = street_scene(1920, 1080, 0, 0);
        let profile = builtin_profile("gta2kitti").unwrap();
        let mut rng = stream(1);
        let draws: Vec<SensorParams> = profile.sample(&mut rng, 10);
        let t = Instant::now();
        for p in &draws {
            std::hint::black_box(apply_pipeline(&img, p, &mut rng).unwrap());
        }
        let secs = t.elapsed().as_secs_f64();
        println!("pipeline 1920x1080: {:.2} images/s", draws.len() as f64 / secs);

        let fx = builtin_test_bank();
        let small = street_scene(224, 224, 0, 1);
        let t = Instant::now();
        for _ in 0..5 {
            std::hint::black_box(style_grams(&fx, &small, DEFAULT_STYLE_LAYERS).unwrap());
        }
        println!("test-bank grams 224x224: {:.1} ms", t.elapsed().as_secs_f64() * 200.0);
    });
}
