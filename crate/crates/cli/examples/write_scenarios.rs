//! Write the default config of every scenario into a directory
//! (default `configs/`).

use solitonscope::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "configs".into());
    std::fs::create_dir_all(&dir)?;
    for s in Scenario::ALL {
        let path = std::path::Path::new(&dir).join(format!("{}.toml", s.name()));
        std::fs::write(&path, s.default_config().to_toml()?)?;
        println!("{}", path.display());
    }
    Ok(())
}
