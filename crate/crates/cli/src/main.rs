fn main() {
    if let Ok(v) = std::env::var("ASM_GALOIS_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
    std::process::exit(asm_galois_cli::cli::run_cli(std::env::args_os()));
}
