//! Run the full analysis pipeline on a gallery fixture, as the CLI does.
//!
//!     cargo run --example gallery -- wab

use condpd::pipeline::{gallery, run, GALLERY};

fn main() -> condpd::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "wab".into());
    if name == "--list" {
        GALLERY.iter().for_each(|g| println!("{g}"));
        return Ok(());
    }
    let report = run(&gallery(&name)?)?;
    print!("{}", report.to_text());
    Ok(())
}
