use clap::Parser;

fn main() {
    let cli = llasym::cli::Cli::parse();
    std::process::exit(llasym::cli::main_with(cli));
}
