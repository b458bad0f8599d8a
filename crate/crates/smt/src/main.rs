use std::io::Read;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let script = match args.iter().find(|a| !a.starts_with('-')) {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                println!("(error \"cannot read {path}: {e}\")");
                return ExitCode::FAILURE;
            }
        },
        None => {
            let mut buf = String::new();
            if let Err(e) = std::io::stdin().read_to_string(&mut buf) {
                println!("(error \"cannot read stdin: {e}\")");
                return ExitCode::FAILURE;
            }
            buf
        }
    };
    match ltlk_smt::run_script(&script) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(msg) => {
            println!("(error \"{}\")", msg.replace('"', "'"));
            ExitCode::FAILURE
        }
    }
}
