use std::process::ExitCode;

use dnasearch_cli::{parse_args, run, CliError, EXIT_USAGE};

fn main() -> ExitCode {
    let config = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(CliError::Help(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("{}", msg.trim_end());
            eprintln!(
                "usage: dnasearch L prob_a prob_c prob_g n_rand rand_len_mean rand_len_dev \
                 n_samp samp_len_mean samp_len_dev samp_loc_mean samp_loc_dev seed [OPTIONS]"
            );
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    ExitCode::from(run(&config, &mut stdout.lock(), &mut stderr.lock()))
}
