//! Writing and reading the plain-text model format, and driving the CLI
//! in-process on the written file.
//!
//! cargo run --example model_files

use waxman::model::{from_text, to_text};
use waxman::{cli, generate, ModelSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::evenly_spaced(4, 2.0, 0.5, 0.3, 42, "demo");
    let problem = generate(&spec)?;
    let text = to_text(&problem);
    print!("{text}");
    assert_eq!(from_text(&text)?, problem);

    let dir = std::env::temp_dir().join(format!("waxman-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("demo.txt");
    std::fs::write(&path, &text)?;
    let path = path.to_string_lossy().into_owned();
    let code = cli::run([
        "waxman",
        "solve",
        "--model",
        &path,
        "--eps",
        "1",
        "--scheme",
        "2x2",
        "--verify-oracle",
    ]);
    std::fs::remove_dir_all(&dir)?;
    println!("exit code {code}");
    Ok(())
}
