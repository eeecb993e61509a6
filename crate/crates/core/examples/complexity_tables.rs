//! Attack cost tables for both deployments, written as CSV to stdout.

use prc_lab::complexity::emit_table;
use prc_lab::io::write_table_csv;
use prc_lab::Scheme;

fn main() -> prc_lab::Result<()> {
    let out = std::io::stdout();
    println!("# language model, n = 2^17");
    write_table_csv(out.lock(), Scheme::Llm, &emit_table(Scheme::Llm, 3, 14)?)?;
    println!("# image model, n = 2^14");
    write_table_csv(out.lock(), Scheme::Gim, &emit_table(Scheme::Gim, 3, 7)?)?;
    Ok(())
}
