use clap::Parser;

fn main() {
    let cli = zetapfrac_cli::Cli::parse();
    std::process::exit(zetapfrac_cli::main_with(&cli));
}
