// SPDX-License-Identifier: Apache-2.0

fn main() {
    let code = slaac_sim::cli::run_command(
        std::env::args_os().skip(1),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
