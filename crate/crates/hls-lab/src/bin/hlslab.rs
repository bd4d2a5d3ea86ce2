use clap::Parser;
use hls_lab::cli::{run, HlsLab};

fn main() {
    // HLS_LAB_THREADS caps internal parallelism; results are deterministic
    // regardless of the thread count.
    if let Ok(raw) = std::env::var("HLS_LAB_THREADS") {
        if let Ok(threads) = raw.parse::<usize>() {
            if threads >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                    .ok();
            }
        }
    }
    let cli = HlsLab::parse();
    std::process::exit(run(cli));
}
