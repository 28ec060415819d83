use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match bicluster_cli::run_with_args(std::env::args_os()) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout
                .write_all(out.stdout.as_bytes())
                .and_then(|_| stdout.flush())
            {
                eprintln!("error: {e}");
                return ExitCode::from(bicluster_cli::EXIT_IO);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
