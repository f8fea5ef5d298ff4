use std::io::{self, IsTerminal};

fn main() {
    let code = {
        let stdin = io::stdin();
        let interactive = stdin.is_terminal();
        rowsub::cli::run(
            std::env::args_os(),
            &mut stdin.lock(),
            &mut io::stdout().lock(),
            &mut io::stderr().lock(),
            interactive,
        )
    };
    std::process::exit(code);
}
