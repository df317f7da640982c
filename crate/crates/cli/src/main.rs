use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match solarcast_cli::run(std::env::args_os()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let message = format!("{e:#}");
            // clap's usage errors carry their own prefix.
            if message.starts_with("error:") {
                eprintln!("{}", message.trim_end());
            } else {
                eprintln!("error: {message}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
